//! Brute-force reference for what an all-seeing, error-free robot delivers.
//!
//! A straight per-minute loop over ground truth. It shares the plan and trace
//! data types with the rest of the crate but none of the engine's trigger,
//! dwell, cadence or privacy logic: every rule is restated here in its most
//! literal form (dwell is a run of consecutive true minutes).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::engine::{DeliveryMode, PrivacyRequest};
use crate::homesim::{EventLog, LogRecord, RecordKind, Trace, TraceAction};
use crate::plan::{ActionSpec, Cmp, FamilyMember, Plan, Predicate, Recipients, ReminderSpec, Role, Subject};
use crate::time::{DaySet, SimTime, MINUTES_PER_DAY};

/// Default lead of automatic privacy exit before the next day's first window.
pub const PRIVACY_LEAD: u32 = 15;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DeliveryRecord {
    pub time: SimTime,
    pub reminder: String,
    pub mode: DeliveryMode,
    pub recipients: Vec<String>,
    /// `None` for on-screen check-in deliveries.
    pub location: Option<String>,
}

impl DeliveryRecord {
    fn to_log(&self) -> LogRecord {
        LogRecord::new(
            self.time,
            RecordKind::Delivered {
                reminder: self.reminder.clone(),
                mode: self.mode,
                recipients: self.recipients.clone(),
                location: self.location.clone(),
            },
        )
    }
}

/// Same line format as a log's `delivered` records.
impl fmt::Display for DeliveryRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_log().fmt(f)
    }
}

/// The `delivered` records of a log, in log order.
pub fn extract_deliveries(log: &EventLog) -> Vec<DeliveryRecord> {
    log.iter()
        .filter_map(|r| match &r.kind {
            RecordKind::Delivered { reminder, mode, recipients, location } => Some(DeliveryRecord {
                time: r.time,
                reminder: reminder.clone(),
                mode: *mode,
                recipients: recipients.clone(),
                location: location.clone(),
            }),
            _ => None,
        })
        .collect()
}

pub fn oracle_text(records: &[DeliveryRecord]) -> String {
    records.iter().map(|r| format!("{r}\n")).collect()
}

/// Parses an oracle file: one `delivered` log line per record.
pub fn parse_oracle_text(text: &str) -> Result<Vec<DeliveryRecord>, (usize, String)> {
    let log = EventLog::parse(text)?;
    if let Some(pos) = log.iter().position(|r| !matches!(r.kind, RecordKind::Delivered { .. })) {
        let line = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).nth(pos).map_or(0, |(i, _)| i + 1);
        return Err((line, "oracle files contain only delivered records".into()));
    }
    Ok(extract_deliveries(&log))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffReport {
    /// In the oracle, not in the log.
    pub missing: Vec<DeliveryRecord>,
    /// In the log, not in the oracle.
    pub extra: Vec<DeliveryRecord>,
    /// Same reminder and minute, different mode, recipients or location: `(oracle, log)`.
    pub mismatched: Vec<(DeliveryRecord, DeliveryRecord)>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty() && self.mismatched.is_empty()
    }
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "missing={} extra={} mismatched={}", self.missing.len(), self.extra.len(), self.mismatched.len())?;
        for r in &self.missing {
            writeln!(f, "- {r}")?;
        }
        for r in &self.extra {
            writeln!(f, "+ {r}")?;
        }
        for (o, l) in &self.mismatched {
            writeln!(f, "- {o}")?;
            writeln!(f, "+ {l}")?;
        }
        Ok(())
    }
}

/// Set comparison keyed by `(time, reminder)`; a reminder is delivered at
/// most once per minute.
pub fn compare(log: &EventLog, oracle: &[DeliveryRecord]) -> DiffReport {
    compare_records(&extract_deliveries(log), oracle)
}

pub fn compare_records(logged: &[DeliveryRecord], oracle: &[DeliveryRecord]) -> DiffReport {
    let key = |r: &DeliveryRecord| (r.time, r.reminder.clone());
    let mut from_log: BTreeMap<_, Vec<&DeliveryRecord>> = BTreeMap::new();
    for r in logged {
        from_log.entry(key(r)).or_default().push(r);
    }
    let mut diff = DiffReport::default();
    for o in oracle {
        match from_log.get_mut(&key(o)).and_then(|v| if v.is_empty() { None } else { Some(v.remove(0)) }) {
            Some(l) if l == o => {}
            Some(l) => diff.mismatched.push((o.clone(), l.clone())),
            None => diff.missing.push(o.clone()),
        }
    }
    diff.extra = from_log.into_values().flatten().cloned().collect();
    diff.extra.sort();
    diff
}

/// Ground truth, folded independently of the simulator.
#[derive(Default)]
struct House {
    whereabouts: BTreeMap<String, (String, BTreeSet<String>)>,
    objects: BTreeMap<String, BTreeSet<String>>,
}

impl House {
    fn people_at<'a>(&'a self, loc: &'a str) -> impl Iterator<Item = (&'a str, &'a BTreeSet<String>)> + 'a {
        self.whereabouts.iter().filter(move |(_, (l, _))| l == loc).map(|(m, (_, a))| (m.as_str(), a))
    }
}

fn role_of(roster: &[FamilyMember], id: &str) -> Option<Role> {
    roster.iter().find(|m| m.id == id).map(|m| m.role)
}

fn subject_covers(s: &Subject, id: &str, roster: &[FamilyMember]) -> bool {
    match s {
        Subject::Any => true,
        Subject::AnyChild => role_of(roster, id) == Some(Role::Child),
        Subject::AnyAdult => role_of(roster, id) == Some(Role::Adult),
        Subject::Member(m) => m == id,
    }
}

fn holds(p: &Predicate, house: &House, loc: &str, roster: &[FamilyMember]) -> bool {
    match p {
        Predicate::Always => true,
        Predicate::Present(s) => house.people_at(loc).any(|(m, _)| subject_covers(s, m, roster)),
        Predicate::Doing(s, tag) => house.people_at(loc).any(|(m, acts)| subject_covers(s, m, roster) && acts.contains(tag)),
        Predicate::Object(tag) => house.objects.get(loc).is_some_and(|o| o.contains(tag)),
        Predicate::Count(cmp, n) => {
            let k = house.people_at(loc).count() as u32;
            match cmp {
                Cmp::Lt => k < *n,
                Cmp::Le => k <= *n,
                Cmp::Eq => k == *n,
                Cmp::Ge => k >= *n,
                Cmp::Gt => k > *n,
            }
        }
        Predicate::All(ps) => ps.iter().all(|q| holds(q, house, loc, roster)),
        Predicate::Any(ps) => ps.iter().any(|q| holds(q, house, loc, roster)),
        Predicate::Not(q) => !holds(q, house, loc, roster),
    }
}

fn addressed_to(r: &Recipients, member: &str) -> bool {
    match r {
        Recipients::All => true,
        Recipients::Members(ms) => ms.iter().any(|m| m == member),
    }
}

fn open_at(r: &ReminderSpec, abs: u32) -> bool {
    let (day, minute) = (abs / MINUTES_PER_DAY + 1, abs % MINUTES_PER_DAY);
    r.window.days.contains(day) && r.window.start <= minute && minute < r.window.end
}

struct Oracle<'a> {
    reminders: Vec<&'a ReminderSpec>,
    roster: &'a [FamilyMember],
    lead: u32,
    /// Absolute minutes of each reminder's deliveries.
    sent: Vec<Vec<u32>>,
    /// `Some(until)` while private; inner `None` means no scheduled end.
    private: Option<Option<u32>>,
    no_auto_on_day: Option<u32>,
    /// Start minute of the current unbroken true run per (reminder, location).
    run: BTreeMap<(usize, String), u32>,
    out: Vec<DeliveryRecord>,
}

impl Oracle<'_> {
    fn sent_on_day(&self, r: usize, day: u32) -> u32 {
        self.sent[r].iter().filter(|&&a| a / MINUTES_PER_DAY + 1 == day).count() as u32
    }

    fn deliverable(&self, r: usize, abs: u32, screen: bool) -> bool {
        let spec = self.reminders[r];
        open_at(spec, abs)
            && self.sent_on_day(r, abs / MINUTES_PER_DAY + 1) < spec.daily_max
            && self.sent[r].last().is_none_or(|&last| abs - last >= spec.repeat_min)
            && (screen || self.private.is_none())
    }

    fn emit(&mut self, r: usize, abs: u32, mode: DeliveryMode, mut recipients: Vec<String>, location: Option<&str>) {
        recipients.sort();
        recipients.dedup();
        self.sent[r].push(abs);
        self.run.retain(|(rr, _), _| *rr != r);
        self.out.push(DeliveryRecord {
            time: SimTime::from_abs(abs),
            reminder: self.reminders[r].id.clone(),
            mode,
            recipients,
            location: location.map(String::from),
        });
        self.maybe_auto_privacy(abs);
    }

    fn maybe_auto_privacy(&mut self, abs: u32) {
        let (day, minute) = (abs / MINUTES_PER_DAY + 1, abs % MINUTES_PER_DAY);
        if self.private.is_some() || self.no_auto_on_day == Some(day) {
            return;
        }
        for (i, r) in self.reminders.iter().enumerate() {
            if r.window.days.contains(day) && self.sent_on_day(i, day) < r.daily_max && minute < r.window.end {
                return;
            }
        }
        // Next day with anything scheduled, scanning forward. Daily windows
        // recur tomorrow; explicit day lists are finite.
        let last_listed = self
            .reminders
            .iter()
            .filter_map(|r| match &r.window.days {
                DaySet::Daily => None,
                DaySet::Days(ds) => ds.iter().next_back().copied(),
            })
            .max()
            .unwrap_or(0);
        let any_daily = self.reminders.iter().any(|r| r.window.days == DaySet::Daily);
        let horizon = if any_daily { day + 1 } else { last_listed };
        let next = (day + 1..=horizon).find(|d| self.reminders.iter().any(|r| r.window.days.contains(*d)));
        let until = next.map(|d| {
            let first = self.reminders.iter().filter(|r| r.window.days.contains(d)).map(|r| r.window.start).min().unwrap_or(0);
            let midnight = (d - 1) * MINUTES_PER_DAY;
            (midnight + first).saturating_sub(self.lead).max(midnight)
        });
        if until.is_some_and(|u| u <= abs) {
            return;
        }
        self.private = Some(until);
    }

    fn request(&mut self, req: PrivacyRequest, abs: u32) {
        match req {
            PrivacyRequest::OnFor(d) => self.private = Some(Some(abs + d)),
            PrivacyRequest::OnRestOfDay => self.private = Some(Some((abs / MINUTES_PER_DAY + 1) * MINUTES_PER_DAY)),
            PrivacyRequest::Off => {
                if self.private.is_some() {
                    self.private = None;
                    self.no_auto_on_day = Some(abs / MINUTES_PER_DAY + 1);
                }
            }
        }
    }

    fn checkin(&mut self, member: &str, abs: u32) {
        for r in 0..self.reminders.len() {
            if addressed_to(&self.reminders[r].recipients, member) && self.deliverable(r, abs, true) {
                self.emit(r, abs, DeliveryMode::Checkin, vec![member.to_string()], None);
            }
        }
    }

    /// One minute of continuous observation over every location, in name
    /// order, each watched by its reminders in id order.
    fn observe(&mut self, house: &House, abs: u32) {
        let mut locations: BTreeSet<&str> = BTreeSet::new();
        for r in &self.reminders {
            locations.extend(r.locations.iter().map(String::as_str));
        }
        for loc in locations {
            if self.private.is_some() {
                return;
            }
            let watching: Vec<usize> = (0..self.reminders.len())
                .filter(|&r| self.reminders[r].locations.iter().any(|l| l == loc) && self.deliverable(r, abs, false))
                .collect();
            for &r in &watching {
                let key = (r, loc.to_string());
                if holds(&self.reminders[r].predicate, house, loc, self.roster) {
                    self.run.entry(key).or_insert(abs);
                } else {
                    self.run.remove(&key);
                }
            }
            for r in watching {
                let spec = self.reminders[r];
                let armed = self.run.get(&(r, loc.to_string())).is_some_and(|&s| abs - s >= spec.dwell_min);
                if !armed || !self.deliverable(r, abs, false) {
                    continue;
                }
                let here: Vec<&str> = house.people_at(loc).map(|(m, _)| m).collect();
                let to: Vec<String> =
                    here.iter().filter(|m| addressed_to(&spec.recipients, m)).map(|m| m.to_string()).collect();
                if !to.is_empty() {
                    self.emit(r, abs, DeliveryMode::Proactive, to, Some(loc));
                    continue;
                }
                let ActionSpec::SeekThenSpeak { target, .. } = &spec.action else { continue };
                if here.contains(&target.as_str()) {
                    self.emit(r, abs, DeliveryMode::Seek, vec![target.clone()], Some(loc));
                } else if let Some((found, _)) = house.whereabouts.get(target) {
                    let mut to: Vec<String> = house
                        .people_at(found)
                        .map(|(m, _)| m)
                        .filter(|m| addressed_to(&spec.recipients, m))
                        .map(String::from)
                        .collect();
                    to.push(target.clone());
                    let found = found.clone();
                    self.emit(r, abs, DeliveryMode::Seek, to, Some(&found));
                }
            }
        }
    }
}

/// Every delivery an omniscient robot makes over `days` days, ordered by
/// time then reminder id.
pub fn oracle_deliveries(plan: &Plan, trace: &Trace, days: u32) -> Vec<DeliveryRecord> {
    oracle_deliveries_with_lead(plan, trace, days, PRIVACY_LEAD)
}

pub fn oracle_deliveries_with_lead(plan: &Plan, trace: &Trace, days: u32, lead: u32) -> Vec<DeliveryRecord> {
    let mut reminders: Vec<&ReminderSpec> = plan.reminders.iter().collect();
    reminders.sort_by(|a, b| a.id.cmp(&b.id));
    let mut o = Oracle {
        sent: vec![Vec::new(); reminders.len()],
        reminders,
        roster: &plan.roster,
        lead,
        private: None,
        no_auto_on_day: None,
        run: BTreeMap::new(),
        out: Vec::new(),
    };
    let mut house = House::default();
    let mut next_event = 0;
    for abs in 0..days * MINUTES_PER_DAY {
        let now = SimTime::from_abs(abs);
        let first = next_event;
        while next_event < trace.events.len() && trace.events[next_event].time <= now {
            next_event += 1;
        }
        let events = &trace.events[first..next_event];
        for e in events {
            match &e.action {
                TraceAction::Move { member, location, activities } => {
                    house.whereabouts.insert(member.clone(), (location.clone(), activities.clone()));
                }
                TraceAction::Leave { member } => {
                    house.whereabouts.remove(member);
                }
                TraceAction::Objects { location, changes } => {
                    let set = house.objects.entry(location.clone()).or_default();
                    for (add, tag) in changes {
                        if *add {
                            set.insert(tag.clone());
                        } else {
                            set.remove(tag);
                        }
                    }
                }
                _ => {}
            }
        }

        if let Some(Some(until)) = o.private {
            if until <= abs {
                o.private = None;
            }
        }
        o.maybe_auto_privacy(abs);
        for r in 0..o.reminders.len() {
            if !o.deliverable(r, abs, false) {
                o.run.retain(|(rr, _), _| *rr != r);
            }
        }

        for e in events {
            match &e.action {
                TraceAction::Checkin { member } => o.checkin(member, abs),
                TraceAction::Privacy(req) => o.request(*req, abs),
                _ => {}
            }
        }

        o.observe(&house, abs);
    }
    let mut out = o.out;
    out.sort();
    out
}
