//! Scripted household timelines (`.trace` files).
//!
//! ```text
//! trace v1
//! d1 18:15 move kidA dining_table homework
//! d1 18:40 leave kidB
//! d1 19:00 objects playroom +toys_scattered -dishes
//! d1 19:05 checkin mom
//! d1 19:10 privacy on 60          # or: privacy on rest_of_day / privacy off
//! d1 19:20 edge hall playroom closed
//! d1 19:30 rescue
//! d1 19:35 post mom kidA "chores first"
//! d1 19:40 read kidA
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::engine::{Addressee, PrivacyRequest};
use crate::plan::lex::{self, quote, Line, Token};
use crate::plan::{finish, is_tag, Code, Diagnostic, HomeMap, Parsed, Plan, Span};
use crate::time::{parse_clock, Clock, SimTime};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceAction {
    /// Places the member at a location with exactly these activities.
    Move { member: String, location: String, activities: BTreeSet<String> },
    /// The member goes away (in no location).
    Leave { member: String },
    /// `(true, tag)` adds, `(false, tag)` removes; applied in order.
    Objects { location: String, changes: Vec<(bool, String)> },
    Checkin { member: String },
    Privacy(PrivacyRequest),
    Edge { a: String, b: String, open: bool },
    Rescue,
    Post { from: String, to: Addressee, text: String },
    Read { member: String },
}

impl TraceAction {
    /// Actions that change ground truth rather than arrive through the screen.
    pub fn is_world_event(&self) -> bool {
        matches!(
            self,
            TraceAction::Move { .. }
                | TraceAction::Leave { .. }
                | TraceAction::Objects { .. }
                | TraceAction::Edge { .. }
                | TraceAction::Rescue
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: SimTime,
    pub action: TraceAction,
    pub line: Span,
}

/// Events in nondecreasing time order; same-minute events keep file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn at(&self, t: SimTime) -> impl Iterator<Item = &TraceEvent> {
        let start = self.events.partition_point(|e| e.time < t);
        self.events[start..].iter().take_while(move |e| e.time == t)
    }
}

impl fmt::Display for TraceAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceAction::Move { member, location, activities } => {
                write!(f, "move {member} {location}")?;
                for a in activities {
                    write!(f, " {a}")?;
                }
                Ok(())
            }
            TraceAction::Leave { member } => write!(f, "leave {member}"),
            TraceAction::Objects { location, changes } => {
                write!(f, "objects {location}")?;
                for (add, tag) in changes {
                    write!(f, " {}{tag}", if *add { '+' } else { '-' })?;
                }
                Ok(())
            }
            TraceAction::Checkin { member } => write!(f, "checkin {member}"),
            TraceAction::Privacy(PrivacyRequest::OnFor(d)) => write!(f, "privacy on {d}"),
            TraceAction::Privacy(PrivacyRequest::OnRestOfDay) => write!(f, "privacy on rest_of_day"),
            TraceAction::Privacy(PrivacyRequest::Off) => write!(f, "privacy off"),
            TraceAction::Edge { a, b, open } => write!(f, "edge {a} {b} {}", if *open { "open" } else { "closed" }),
            TraceAction::Rescue => write!(f, "rescue"),
            TraceAction::Post { from, to, text } => write!(f, "post {from} {to} {}", quote(text)),
            TraceAction::Read { member } => write!(f, "read {member}"),
        }
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trace v1")?;
        for e in &self.events {
            writeln!(f, "d{} {} {}", e.time.day(), Clock(e.time.minute()), e.action)?;
        }
        Ok(())
    }
}

/// Parses and validates a trace against the plan's roster and the map.
pub fn parse_trace(text: &str, plan: &Plan, map: &HomeMap) -> Result<Parsed<Trace>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let lines = lex::lines(text, &mut diags);
    let Some(body) = lex::expect_header(&lines, "trace", &mut diags) else {
        return Err(diags);
    };
    let ctx = Ctx { plan, map };
    let mut trace = Trace::default();
    let mut prev: Option<SimTime> = None;
    for line in body {
        match ctx.event(line) {
            Ok(ev) => {
                if prev.is_some_and(|p| ev.time < p) {
                    diags.push(Diagnostic::new(
                        line.number,
                        Code::UnsortedEvents,
                        format!("event at {} is earlier than the one before it", ev.time),
                    ));
                }
                prev = Some(prev.map_or(ev.time, |p| p.max(ev.time)));
                trace.events.push(ev);
            }
            Err(d) => diags.push(d),
        }
    }
    finish(trace, diags)
}

struct Ctx<'a> {
    plan: &'a Plan,
    map: &'a HomeMap,
}

impl Ctx<'_> {
    fn member(&self, line: &Line, i: usize) -> Result<String, Diagnostic> {
        let m = word(line, i, "member id")?;
        if self.plan.member(m).is_some() {
            Ok(m.to_string())
        } else {
            Err(Diagnostic::new(line.number, Code::UnknownMember, format!("unknown member `{m}`")))
        }
    }

    fn location(&self, line: &Line, i: usize) -> Result<String, Diagnostic> {
        let l = word(line, i, "location")?;
        if self.map.has_location(l) {
            Ok(l.to_string())
        } else {
            Err(Diagnostic::new(line.number, Code::UnknownLocation, format!("unknown location `{l}`")))
        }
    }

    fn event(&self, line: &Line) -> Result<TraceEvent, Diagnostic> {
        let time = parse_time(line)?;
        let verb = word(line, 2, "event verb")?;
        let arity = |n: usize| -> Result<(), Diagnostic> {
            if line.tokens.len() == n {
                Ok(())
            } else {
                Err(line.syntax(format!("`{verb}` takes {} argument(s)", n - 3)))
            }
        };
        let action = match verb {
            "move" => {
                let member = self.member(line, 3)?;
                let location = self.location(line, 4)?;
                let mut activities = BTreeSet::new();
                for i in 5..line.tokens.len() {
                    activities.insert(tag(line, i)?.to_string());
                }
                TraceAction::Move { member, location, activities }
            }
            "leave" => {
                arity(4)?;
                TraceAction::Leave { member: self.member(line, 3)? }
            }
            "objects" => {
                let location = self.location(line, 3)?;
                let mut changes = Vec::new();
                for i in 4..line.tokens.len() {
                    let w = word(line, i, "`+tag` or `-tag`")?;
                    let (add, t) = match (w.strip_prefix('+'), w.strip_prefix('-')) {
                        (Some(t), _) => (true, t),
                        (_, Some(t)) => (false, t),
                        _ => return Err(line.syntax(format!("expected `+tag` or `-tag`, got `{w}`"))),
                    };
                    if !is_tag(t) {
                        return Err(Diagnostic::new(line.number, Code::BadTag, format!("bad object tag `{t}`")));
                    }
                    changes.push((add, t.to_string()));
                }
                if changes.is_empty() {
                    return Err(line.syntax("`objects` needs at least one change"));
                }
                TraceAction::Objects { location, changes }
            }
            "checkin" => {
                arity(4)?;
                TraceAction::Checkin { member: self.member(line, 3)? }
            }
            "read" => {
                arity(4)?;
                TraceAction::Read { member: self.member(line, 3)? }
            }
            "privacy" => {
                let req = match (line.word(3), line.word(4), line.tokens.len()) {
                    (Some("off"), None, 4) => PrivacyRequest::Off,
                    (Some("on"), Some("rest_of_day"), 5) => PrivacyRequest::OnRestOfDay,
                    (Some("on"), Some(d), 5) => match lex::parse_count(d) {
                        Some(d) if d > 0 => PrivacyRequest::OnFor(d),
                        _ => return Err(line.syntax("privacy duration must be a positive number of minutes")),
                    },
                    _ => return Err(line.syntax("expected `privacy on <minutes>|rest_of_day` or `privacy off`")),
                };
                TraceAction::Privacy(req)
            }
            "edge" => {
                arity(6)?;
                let a = self.location(line, 3)?;
                let b = self.location(line, 4)?;
                if self.map.edge(&a, &b).is_none() {
                    return Err(Diagnostic::new(
                        line.number,
                        Code::UnknownEdgeEndpoint,
                        format!("the map has no edge between `{a}` and `{b}`"),
                    ));
                }
                let open = match line.word(5) {
                    Some("open") => true,
                    Some("closed") => false,
                    _ => return Err(line.syntax("edge state must be `open` or `closed`")),
                };
                TraceAction::Edge { a, b, open }
            }
            "rescue" => {
                arity(3)?;
                TraceAction::Rescue
            }
            "post" => {
                arity(6)?;
                let from = self.member(line, 3)?;
                let to = match word(line, 4, "addressee")? {
                    "all" => Addressee::All,
                    _ => Addressee::Member(self.member(line, 4)?),
                };
                let text = match &line.tokens[5] {
                    Token::Quoted(s) => s.clone(),
                    Token::Word(_) => return Err(line.syntax("message text must be quoted")),
                };
                TraceAction::Post { from, to, text }
            }
            other => return Err(line.syntax(format!("unknown event `{other}`"))),
        };
        Ok(TraceEvent { time, action, line: Span(line.number) })
    }
}

fn word<'l>(line: &'l Line, i: usize, what: &str) -> Result<&'l str, Diagnostic> {
    line.word(i).ok_or_else(|| line.syntax(format!("expected {what}")))
}

fn tag(line: &Line, i: usize) -> Result<&str, Diagnostic> {
    let t = word(line, i, "activity tag")?;
    if is_tag(t) {
        Ok(t)
    } else {
        Err(Diagnostic::new(line.number, Code::BadTag, format!("bad activity tag `{t}`")))
    }
}

fn parse_time(line: &Line) -> Result<SimTime, Diagnostic> {
    let day = line
        .word(0)
        .and_then(|d| d.strip_prefix('d'))
        .and_then(lex::parse_count)
        .filter(|d| *d >= 1)
        .ok_or_else(|| line.syntax("expected day `d<N>` with N >= 1"))?;
    let minute = line.word(1).and_then(parse_clock).ok_or_else(|| line.syntax("expected time `HH:MM` before 24:00"))?;
    SimTime::new(day, minute).ok_or_else(|| line.syntax("invalid time"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{parse_map, parse_plan};

    fn fixture() -> (Plan, HomeMap) {
        let map = parse_map("map v1\nlocation dock\nlocation dining_table\nlocation hall\nedge dock dining_table 1\nedge dock hall 2\ndock dock\n")
            .unwrap()
            .value;
        let plan = parse_plan("plan v1\nmember mom adult\nmember kidA child\nmember kidB child\n", &map).unwrap().value;
        (plan, map)
    }

    fn parse(body: &str) -> Result<Trace, Vec<Diagnostic>> {
        let (plan, map) = fixture();
        parse_trace(&format!("trace v1\n{body}"), &plan, &map).map(|p| p.value)
    }

    fn codes(body: &str) -> Vec<Code> {
        parse(body).unwrap_err().into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn homework_pair() {
        let t = parse("d1 18:15 move kidA dining_table homework\nd1 18:15 move kidB dining_table homework\n").unwrap();
        assert_eq!(t.events.len(), 2);
        assert_eq!(t.events[0].time, SimTime::new(1, 18 * 60 + 15).unwrap());
    }

    #[test]
    fn empty_body_is_valid() {
        assert!(parse("").unwrap().events.is_empty());
    }

    #[test]
    fn hour_25_is_a_syntax_error() {
        assert_eq!(codes("d1 25:00 rescue\n"), vec![Code::SyntaxError]);
        assert_eq!(codes("d1 24:00 rescue\n"), vec![Code::SyntaxError]);
        assert_eq!(codes("d0 10:00 rescue\n"), vec![Code::SyntaxError]);
    }

    #[test]
    fn unknown_names_and_order() {
        assert_eq!(codes("d1 10:00 move dad hall\n"), vec![Code::UnknownMember]);
        assert_eq!(codes("d1 10:00 move kidA garage\n"), vec![Code::UnknownLocation]);
        assert_eq!(codes("d1 10:00 rescue\nd1 09:59 rescue\n"), vec![Code::UnsortedEvents]);
        assert_eq!(codes("d1 10:00 edge hall dining_table closed\n"), vec![Code::UnknownEdgeEndpoint]);
    }

    #[test]
    fn every_verb_parses_and_prints_back() {
        let text = "trace v1\n\
            d1 08:00 move kidA hall homework reading\n\
            d1 08:01 leave kidA\n\
            d1 08:02 objects hall +toys_scattered -dishes\n\
            d1 08:03 checkin mom\n\
            d1 08:04 privacy on 60\n\
            d1 08:05 privacy on rest_of_day\n\
            d1 08:06 privacy off\n\
            d1 08:07 edge dock hall closed\n\
            d1 08:08 rescue\n\
            d1 08:09 post mom all \"dinner \\\"now\\\"\"\n\
            d2 08:10 read kidB\n";
        let (plan, map) = fixture();
        let t = parse_trace(text, &plan, &map).unwrap().value;
        assert_eq!(t.events.len(), 11);
        assert_eq!(t.to_string(), text);
        assert_eq!(t.at(SimTime::new(1, 8 * 60 + 3).unwrap()).count(), 1);
    }
}
