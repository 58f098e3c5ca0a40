//! The event log: one record per line,
//! `t=d<D>:<HH:MM> kind=<kind> k1=v1 k2=v2 ...`, keys in a fixed order per kind.
//!
//! Values are bare tokens (identifiers, numbers, comma lists with `-` for an
//! empty list) or double-quoted strings using the plan-file escapes.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::engine::{Addressee, DeliveryMode, PrivacyCause, PrivacyExit, PrivacyTransition, SuppressReason};
use crate::perception::{PersonObs, Scene, Stage1};
use crate::plan::lex::quote;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Patrol,
    Seek,
    Dock,
}

impl Purpose {
    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Patrol => "patrol",
            Purpose::Seek => "seek",
            Purpose::Dock => "dock",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NavFailure {
    /// A door closed on the way.
    Blocked,
    /// No open path at departure.
    Unreachable,
}

impl NavFailure {
    pub fn as_str(self) -> &'static str {
        match self {
            NavFailure::Blocked => "blocked",
            NavFailure::Unreachable => "unreachable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeekPhase {
    Start,
    Found,
    Failed,
}

impl SeekPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            SeekPhase::Start => "start",
            SeekPhase::Found => "found",
            SeekPhase::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordKind {
    MoveStart { from: String, to: String, minutes: u32, purpose: Purpose },
    Arrive { location: String },
    NavFailed { target: String, at: String, reason: NavFailure },
    HelpRequest { at: String, target: String },
    Snapshot { location: String, stage1: Stage1, perceived: Option<Scene> },
    /// `location` is `None` for on-screen check-in deliveries.
    Delivered { reminder: String, mode: DeliveryMode, recipients: Vec<String>, location: Option<String> },
    Suppressed { reminder: String, mode: DeliveryMode, reason: SuppressReason },
    Seek { phase: SeekPhase, reminder: String, target: String, location: Option<String> },
    Checkin { member: String, shown: Vec<String> },
    MessagePost { from: String, to: Addressee, text: String },
    MessageRead { member: String, count: u32, unread: u32 },
    Privacy(PrivacyTransition),
    DockAttempt { ok: bool },
    Battery { level: u32, capacity: u32 },
    Offline { location: String },
    Rescue { location: String },
    End,
}

impl RecordKind {
    pub fn name(&self) -> &'static str {
        match self {
            RecordKind::MoveStart { .. } => "move_start",
            RecordKind::Arrive { .. } => "arrive",
            RecordKind::NavFailed { .. } => "nav_failed",
            RecordKind::HelpRequest { .. } => "help_request",
            RecordKind::Snapshot { .. } => "snapshot",
            RecordKind::Delivered { .. } => "delivered",
            RecordKind::Suppressed { .. } => "suppressed",
            RecordKind::Seek { .. } => "seek",
            RecordKind::Checkin { .. } => "checkin",
            RecordKind::MessagePost { .. } | RecordKind::MessageRead { .. } => "message",
            RecordKind::Privacy(_) => "privacy",
            RecordKind::DockAttempt { .. } => "dock_attempt",
            RecordKind::Battery { .. } => "battery",
            RecordKind::Offline { .. } => "offline",
            RecordKind::Rescue { .. } => "rescue",
            RecordKind::End => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogRecord {
    pub time: SimTime,
    pub kind: RecordKind,
}

impl LogRecord {
    pub fn new(time: SimTime, kind: RecordKind) -> Self {
        Self { time, kind }
    }

    /// Parses one formatted line back into a record.
    pub fn parse(line: &str) -> Result<Self, String> {
        let l = LogLine::parse(line)?;
        l.to_record()
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "-".into()
    } else {
        items.join(",")
    }
}

fn set_list(items: &BTreeSet<String>) -> String {
    if items.is_empty() {
        "-".into()
    } else {
        items.iter().map(String::as_str).collect::<Vec<_>>().join(",")
    }
}

fn persons_field(persons: &[PersonObs]) -> String {
    if persons.is_empty() {
        return "-".into();
    }
    let mut out = String::new();
    for (i, p) in persons.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&p.member);
        out.push(':');
        if p.activities.is_empty() {
            out.push('-');
        } else {
            out.push_str(&p.activities.iter().map(String::as_str).collect::<Vec<_>>().join("+"));
        }
    }
    out
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} kind={}", self.time, self.kind.name())?;
        match &self.kind {
            RecordKind::MoveStart { from, to, minutes, purpose } => {
                write!(f, " from={from} to={to} minutes={minutes} purpose={}", purpose.as_str())
            }
            RecordKind::Arrive { location } => write!(f, " location={location}"),
            RecordKind::NavFailed { target, at, reason } => {
                write!(f, " target={target} at={at} reason={}", reason.as_str())
            }
            RecordKind::HelpRequest { at, target } => write!(f, " at={at} target={target}"),
            RecordKind::Snapshot { location, stage1, perceived } => {
                write!(
                    f,
                    " location={location} person_count={} detected={} stage2_ran={}",
                    stage1.person_count,
                    set_list(&stage1.objects),
                    perceived.is_some()
                )?;
                if let Some(p) = perceived {
                    write!(f, " persons={} objects={}", persons_field(&p.persons), set_list(&p.objects))?;
                }
                Ok(())
            }
            RecordKind::Delivered { reminder, mode, recipients, location } => write!(
                f,
                " reminder={reminder} mode={mode} recipients={} location={}",
                list(recipients),
                location.as_deref().unwrap_or("screen")
            ),
            RecordKind::Suppressed { reminder, mode, reason } => {
                write!(f, " reminder={reminder} mode={mode} reason={reason}")
            }
            RecordKind::Seek { phase, reminder, target, location } => write!(
                f,
                " phase={} reminder={reminder} target={target} location={}",
                phase.as_str(),
                location.as_deref().unwrap_or("-")
            ),
            RecordKind::Checkin { member, shown } => write!(f, " member={member} shown={}", list(shown)),
            RecordKind::MessagePost { from, to, text } => {
                write!(f, " action=post from={from} to={to} text={}", quote(text))
            }
            RecordKind::MessageRead { member, count, unread } => {
                write!(f, " action=read member={member} count={count} unread={unread}")
            }
            RecordKind::Privacy(PrivacyTransition::Enter { cause, until }) => {
                write!(f, " state=on cause={} until=", cause.as_str())?;
                match until {
                    Some(u) => write!(f, "{u}"),
                    None => f.write_char('-'),
                }
            }
            RecordKind::Privacy(PrivacyTransition::Exit { cause }) => {
                write!(f, " state=off cause={} until=-", cause.as_str())
            }
            RecordKind::DockAttempt { ok } => write!(f, " result={}", if *ok { "ok" } else { "fail" }),
            RecordKind::Battery { level, capacity } => write!(f, " level={level} capacity={capacity}"),
            RecordKind::Offline { location } => write!(f, " level=0 location={location}"),
            RecordKind::Rescue { location } => write!(f, " location={location}"),
            RecordKind::End => Ok(()),
        }
    }
}

/// A log line split into time, kind and ordered fields, without
/// interpreting field values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogLine {
    pub time: SimTime,
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl LogLine {
    pub fn parse(line: &str) -> Result<Self, String> {
        let mut pairs = split_pairs(line)?.into_iter();
        let (k, t) = pairs.next().ok_or("empty line")?;
        if k != "t" {
            return Err("line must start with t=".into());
        }
        let time = SimTime::parse_log(&t).ok_or_else(|| format!("bad time `{t}`"))?;
        let (k, kind) = pairs.next().ok_or("missing kind")?;
        if k != "kind" {
            return Err("second field must be kind=".into());
        }
        Ok(Self { time, kind, fields: pairs.collect() })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn req(&self, key: &str) -> Result<&str, String> {
        self.get(key).ok_or_else(|| format!("{} record lacks `{key}`", self.kind))
    }

    fn num(&self, key: &str) -> Result<u32, String> {
        let v = self.req(key)?;
        v.parse().map_err(|_| format!("`{key}` is not a number: `{v}`"))
    }

    fn expect_keys(&self, keys: &[&str]) -> Result<(), String> {
        let got: Vec<&str> = self.fields.iter().map(|(k, _)| k.as_str()).collect();
        if got == keys {
            Ok(())
        } else {
            Err(format!("{} record has keys {got:?}, expected {keys:?}", self.kind))
        }
    }

    pub fn to_record(&self) -> Result<LogRecord, String> {
        let s = |k: &str| self.req(k).map(String::from);
        let kind = match self.kind.as_str() {
            "move_start" => {
                self.expect_keys(&["from", "to", "minutes", "purpose"])?;
                let purpose = match self.req("purpose")? {
                    "patrol" => Purpose::Patrol,
                    "seek" => Purpose::Seek,
                    "dock" => Purpose::Dock,
                    other => return Err(format!("unknown purpose `{other}`")),
                };
                RecordKind::MoveStart { from: s("from")?, to: s("to")?, minutes: self.num("minutes")?, purpose }
            }
            "arrive" => {
                self.expect_keys(&["location"])?;
                RecordKind::Arrive { location: s("location")? }
            }
            "nav_failed" => {
                self.expect_keys(&["target", "at", "reason"])?;
                let reason = match self.req("reason")? {
                    "blocked" => NavFailure::Blocked,
                    "unreachable" => NavFailure::Unreachable,
                    other => return Err(format!("unknown reason `{other}`")),
                };
                RecordKind::NavFailed { target: s("target")?, at: s("at")?, reason }
            }
            "help_request" => {
                self.expect_keys(&["at", "target"])?;
                RecordKind::HelpRequest { at: s("at")?, target: s("target")? }
            }
            "snapshot" => {
                let ran = parse_bool(self.req("stage2_ran")?)?;
                if ran {
                    self.expect_keys(&["location", "person_count", "detected", "stage2_ran", "persons", "objects"])?;
                } else {
                    self.expect_keys(&["location", "person_count", "detected", "stage2_ran"])?;
                }
                let location = s("location")?;
                let stage1 = Stage1 {
                    person_count: self.num("person_count")?,
                    objects: parse_list(self.req("detected")?).into_iter().collect(),
                };
                let perceived = if ran {
                    Some(Scene {
                        location: location.clone(),
                        persons: parse_persons(self.req("persons")?)?,
                        objects: parse_list(self.req("objects")?).into_iter().collect(),
                    })
                } else {
                    None
                };
                RecordKind::Snapshot { location, stage1, perceived }
            }
            "delivered" => {
                self.expect_keys(&["reminder", "mode", "recipients", "location"])?;
                let location = match self.req("location")? {
                    "screen" => None,
                    l => Some(l.to_string()),
                };
                RecordKind::Delivered {
                    reminder: s("reminder")?,
                    mode: parse_mode(self.req("mode")?)?,
                    recipients: parse_list(self.req("recipients")?),
                    location,
                }
            }
            "suppressed" => {
                self.expect_keys(&["reminder", "mode", "reason"])?;
                let reason = self.req("reason")?;
                let reason = SuppressReason::ALL
                    .into_iter()
                    .find(|r| r.as_str() == reason)
                    .ok_or_else(|| format!("unknown suppression reason `{reason}`"))?;
                RecordKind::Suppressed { reminder: s("reminder")?, mode: parse_mode(self.req("mode")?)?, reason }
            }
            "seek" => {
                self.expect_keys(&["phase", "reminder", "target", "location"])?;
                let phase = match self.req("phase")? {
                    "start" => SeekPhase::Start,
                    "found" => SeekPhase::Found,
                    "failed" => SeekPhase::Failed,
                    other => return Err(format!("unknown seek phase `{other}`")),
                };
                let location = match self.req("location")? {
                    "-" => None,
                    l => Some(l.to_string()),
                };
                RecordKind::Seek { phase, reminder: s("reminder")?, target: s("target")?, location }
            }
            "checkin" => {
                self.expect_keys(&["member", "shown"])?;
                RecordKind::Checkin { member: s("member")?, shown: parse_list(self.req("shown")?) }
            }
            "message" => match self.req("action")? {
                "post" => {
                    self.expect_keys(&["action", "from", "to", "text"])?;
                    RecordKind::MessagePost { from: s("from")?, to: Addressee::parse(self.req("to")?), text: s("text")? }
                }
                "read" => {
                    self.expect_keys(&["action", "member", "count", "unread"])?;
                    RecordKind::MessageRead { member: s("member")?, count: self.num("count")?, unread: self.num("unread")? }
                }
                other => return Err(format!("unknown message action `{other}`")),
            },
            "privacy" => {
                self.expect_keys(&["state", "cause", "until"])?;
                let cause = self.req("cause")?;
                let t = match self.req("state")? {
                    "on" => {
                        let cause = match cause {
                            "manual_duration" => PrivacyCause::ManualDuration,
                            "manual_rest_of_day" => PrivacyCause::ManualRestOfDay,
                            "auto" => PrivacyCause::Auto,
                            other => return Err(format!("unknown privacy cause `{other}`")),
                        };
                        let until = match self.req("until")? {
                            "-" => None,
                            u => Some(SimTime::parse_log(u).ok_or_else(|| format!("bad time `{u}`"))?),
                        };
                        PrivacyTransition::Enter { cause, until }
                    }
                    "off" => {
                        let cause = match cause {
                            "manual_off" => PrivacyExit::Manual,
                            "expired" => PrivacyExit::Expired,
                            "auto" => PrivacyExit::Auto,
                            other => return Err(format!("unknown privacy exit `{other}`")),
                        };
                        PrivacyTransition::Exit { cause }
                    }
                    other => return Err(format!("unknown privacy state `{other}`")),
                };
                RecordKind::Privacy(t)
            }
            "dock_attempt" => {
                self.expect_keys(&["result"])?;
                let ok = match self.req("result")? {
                    "ok" => true,
                    "fail" => false,
                    other => return Err(format!("unknown dock result `{other}`")),
                };
                RecordKind::DockAttempt { ok }
            }
            "battery" => {
                self.expect_keys(&["level", "capacity"])?;
                RecordKind::Battery { level: self.num("level")?, capacity: self.num("capacity")? }
            }
            "offline" => {
                self.expect_keys(&["level", "location"])?;
                RecordKind::Offline { location: s("location")? }
            }
            "rescue" => {
                self.expect_keys(&["location"])?;
                RecordKind::Rescue { location: s("location")? }
            }
            "end" => {
                self.expect_keys(&[])?;
                RecordKind::End
            }
            other => return Err(format!("unknown record kind `{other}`")),
        };
        Ok(LogRecord { time: self.time, kind })
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, got `{other}`")),
    }
}

fn parse_mode(s: &str) -> Result<DeliveryMode, String> {
    DeliveryMode::parse(s).ok_or_else(|| format!("unknown delivery mode `{s}`"))
}

fn parse_list(s: &str) -> Vec<String> {
    if s == "-" {
        Vec::new()
    } else {
        s.split(',').map(String::from).collect()
    }
}

fn parse_persons(s: &str) -> Result<Vec<PersonObs>, String> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            let (member, acts) = p.split_once(':').ok_or_else(|| format!("bad person entry `{p}`"))?;
            let activities = if acts == "-" { BTreeSet::new() } else { acts.split('+').map(String::from).collect() };
            Ok(PersonObs { member: member.to_string(), activities })
        })
        .collect()
}

/// Splits `k=v k="quoted v" ...` into pairs.
fn split_pairs(line: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek() == Some(&' ') {
            chars.next();
        }
        if chars.peek().is_none() {
            return Ok(out);
        }
        let mut key = String::new();
        loop {
            match chars.next() {
                Some('=') => break,
                Some(c) if c.is_ascii_alphanumeric() || c == '_' => key.push(c),
                Some(c) => return Err(format!("unexpected `{c}` in key")),
                None => return Err(format!("key `{key}` has no value")),
            }
        }
        if key.is_empty() {
            return Err("empty key".into());
        }
        let mut value = String::new();
        if chars.peek() == Some(&'"') {
            chars.next();
            loop {
                match chars.next() {
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('"') => value.push('"'),
                        Some('\\') => value.push('\\'),
                        Some('n') => value.push('\n'),
                        Some('r') => value.push('\r'),
                        Some('t') => value.push('\t'),
                        _ => return Err("bad escape in quoted value".into()),
                    },
                    Some(c) => value.push(c),
                    None => return Err("unterminated quoted value".into()),
                }
            }
            if chars.peek().is_some_and(|c| *c != ' ') {
                return Err("missing space after quoted value".into());
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c == ' ' {
                    break;
                }
                if c == '"' {
                    return Err("unexpected quote in value".into());
                }
                value.push(c);
                chars.next();
            }
            if value.is_empty() {
                return Err(format!("empty value for `{key}`"));
            }
        }
        out.push((key, value));
    }
}

/// A complete run's records, in emission order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub records: Vec<LogRecord>,
}

impl EventLog {
    /// LF-terminated lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            writeln!(out, "{r}").expect("writing to a String cannot fail");
        }
        out
    }

    /// Parses a whole log; errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Self, (usize, String)> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            records.push(LogRecord::parse(line).map_err(|e| (i + 1, e))?);
        }
        Ok(Self { records })
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LogRecord> {
        self.records.iter()
    }
}
