//! Log checkers. Each replays a finished event log against one safety or
//! consistency rule and returns every violation it finds; an empty vector
//! means the rule holds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::engine::DeliveryMode;
use crate::homesim::{navigate, EventLog, GroundWorld, Purpose, RecordKind, SeekPhase, Trace};
use crate::plan::Plan;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub time: SimTime,
    pub rule: &'static str,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.time, self.rule, self.detail)
    }
}

fn violation(time: SimTime, rule: &'static str, detail: String) -> Violation {
    Violation { time, rule, detail }
}

/// `(time, reminder, mode)` of every delivery, in log order.
fn deliveries(log: &EventLog) -> impl Iterator<Item = (SimTime, &str, DeliveryMode, Option<&str>)> {
    log.iter().filter_map(|r| match &r.kind {
        RecordKind::Delivered { reminder, mode, location, .. } => {
            Some((r.time, reminder.as_str(), *mode, location.as_deref()))
        }
        _ => None,
    })
}

/// Every delivery falls inside its reminder's half-open window.
pub fn check_windows(plan: &Plan, log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();
    for (t, id, _, _) in deliveries(log) {
        match plan.reminder(id) {
            None => out.push(violation(t, "window", format!("unknown reminder {id}"))),
            Some(r) if !r.window.contains(t) => out.push(violation(t, "window", format!("{id} delivered outside its window"))),
            Some(_) => {}
        }
    }
    out
}

/// Per reminder: at most `daily_max` deliveries a day and at least
/// `repeat_min` minutes between consecutive deliveries.
pub fn check_cadence(plan: &Plan, log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut last: BTreeMap<&str, SimTime> = BTreeMap::new();
    let mut per_day: BTreeMap<(&str, u32), u32> = BTreeMap::new();
    for (t, id, _, _) in deliveries(log) {
        let Some(r) = plan.reminder(id) else { continue };
        let n = per_day.entry((id, t.day())).or_default();
        *n += 1;
        if *n > r.daily_max {
            out.push(violation(t, "daily_max", format!("{id} delivered {n} times on day {}", t.day())));
        }
        if let Some(prev) = last.insert(id, t) {
            if t.since(prev) < r.repeat_min {
                out.push(violation(t, "repeat", format!("{id} repeated after {} min", t.since(prev))));
            }
        }
    }
    out
}

/// Privacy intervals as `[on, off)` record pairs; a trailing open interval
/// ends at `None`.
pub fn privacy_intervals(log: &EventLog) -> Vec<(SimTime, Option<SimTime>)> {
    let mut out = Vec::new();
    let mut open = None;
    for r in log.iter() {
        if let RecordKind::Privacy(tr) = &r.kind {
            match (tr.is_enter(), open) {
                (true, None) => open = Some(r.time),
                (false, Some(s)) => {
                    out.push((s, Some(r.time)));
                    open = None;
                }
                _ => {}
            }
        }
    }
    if let Some(s) = open {
        out.push((s, None));
    }
    out
}

/// No snapshot and no robot-spoken delivery between a privacy `on` record
/// and the matching `off` record, in log order.
pub fn check_privacy(log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut private = false;
    for r in log.iter() {
        match &r.kind {
            RecordKind::Privacy(tr) => private = tr.is_enter(),
            RecordKind::Snapshot { location, .. } if private => {
                out.push(violation(r.time, "privacy", format!("snapshot at {location}")));
            }
            RecordKind::Delivered { reminder, mode, .. } if private && *mode != DeliveryMode::Checkin => {
                out.push(violation(r.time, "privacy", format!("{mode} delivery of {reminder}")));
            }
            _ => {}
        }
    }
    out
}

/// Every proactive delivery happens where the predicate holds on ground truth.
pub fn check_grounded(plan: &Plan, trace: &Trace, log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut world = GroundWorld::new(SimTime::start_of_day(1));
    let mut next = 0;
    for (t, id, mode, loc) in deliveries(log) {
        if mode != DeliveryMode::Proactive {
            continue;
        }
        while next < trace.events.len() && trace.events[next].time <= t {
            world.apply(&trace.events[next].action);
            next += 1;
        }
        let (Some(r), Some(loc)) = (plan.reminder(id), loc) else {
            out.push(violation(t, "grounded", format!("{id} has no reminder or location")));
            continue;
        };
        if !r.predicate.eval(&world.scene(loc), &plan.roster) {
            out.push(violation(t, "grounded", format!("{id} delivered at {loc} but its condition is false there")));
        }
    }
    out
}

/// `0 <= level <= capacity`; a zero level only while offline.
pub fn check_battery(log: &EventLog, capacity: u32) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut offline = false;
    let records = &log.records;
    for (i, r) in records.iter().enumerate() {
        match &r.kind {
            RecordKind::Battery { level, capacity: c } => {
                if *c != capacity || *level > capacity {
                    out.push(violation(r.time, "battery", format!("level {level} of {c}, expected capacity {capacity}")));
                }
                let about_to_go = records.get(i + 1).is_some_and(|n| matches!(n.kind, RecordKind::Offline { .. }));
                if (*level == 0) != (offline || about_to_go) {
                    out.push(violation(r.time, "battery", format!("level {level} while offline={offline}")));
                }
            }
            RecordKind::Offline { .. } => {
                let drained = i > 0 && matches!(records[i - 1].kind, RecordKind::Battery { level: 0, .. });
                if !drained {
                    out.push(violation(r.time, "battery", "offline without an empty battery".into()));
                }
                offline = true;
            }
            RecordKind::Rescue { .. } => offline = false,
            _ => {}
        }
    }
    out
}

/// Consecutive arrivals are at least the shortest-path travel time apart
/// on the full map. A rescue puts the robot back on the dock.
pub fn check_motion(map: &crate::plan::HomeMap, log: &EventLog) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut prev: Option<(String, SimTime)> = Some((map.dock().to_string(), SimTime::start_of_day(1)));
    let open = BTreeSet::new();
    for r in log.iter() {
        match &r.kind {
            RecordKind::Rescue { location } => prev = Some((location.clone(), r.time)),
            RecordKind::Arrive { location } => {
                if let Some((from, t0)) = &prev {
                    if let Ok(route) = navigate(map, from, location, &open) {
                        if r.time.since(*t0) < route.minutes {
                            out.push(violation(
                                r.time,
                                "motion",
                                format!("{from} to {location} in {} min, shortest is {}", r.time.since(*t0), route.minutes),
                            ));
                        }
                    }
                }
                prev = Some((location.clone(), r.time));
            }
            _ => {}
        }
    }
    out
}

/// Omniscient mode only: every location of a reminder that is active in a
/// minute carries a snapshot in that minute. A minute is exempt when the
/// reminder was delivered in it or privacy was on at any point of it.
pub fn check_completeness(plan: &Plan, log: &EventLog, days: u32) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut snapshots: BTreeSet<(SimTime, &str)> = BTreeSet::new();
    let mut delivered: BTreeMap<&str, Vec<SimTime>> = BTreeMap::new();
    let mut privacy_at: BTreeMap<SimTime, Vec<bool>> = BTreeMap::new();
    for r in log.iter() {
        match &r.kind {
            RecordKind::Snapshot { location, .. } => {
                snapshots.insert((r.time, location.as_str()));
            }
            RecordKind::Delivered { reminder, .. } => delivered.entry(reminder.as_str()).or_default().push(r.time),
            RecordKind::Privacy(tr) => privacy_at.entry(r.time).or_default().push(tr.is_enter()),
            _ => {}
        }
    }
    let mut private = false;
    let mut private_minutes = BTreeSet::new();
    for abs in SimTime::start_of_day(1).abs()..SimTime::start_of_day(days + 1).abs() {
        let t = SimTime::from_abs(abs);
        let changes = privacy_at.get(&t).map(Vec::as_slice).unwrap_or(&[]);
        let exempt = changes.iter().any(|on| *on) || (private && !changes.iter().any(|on| !*on));
        if exempt {
            private_minutes.insert(t);
        }
        if let Some(last) = changes.last() {
            private = *last;
        }
    }
    for r in &plan.reminders {
        let times = delivered.get(r.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        for day in 1..=days {
            for minute in r.window.start..r.window.end {
                let t = SimTime::new(day, minute).expect("window minutes are in range");
                if !r.window.contains(t) || private_minutes.contains(&t) || times.contains(&t) {
                    continue;
                }
                let before: Vec<&SimTime> = times.iter().filter(|d| **d < t).collect();
                let today = before.iter().filter(|d| d.day() == day).count() as u32;
                let cooling = before.last().is_some_and(|d| t.since(**d) < r.repeat_min);
                if today >= r.daily_max || cooling {
                    continue;
                }
                for loc in &r.locations {
                    if !snapshots.contains(&(t, loc.as_str())) {
                        out.push(violation(t, "completeness", format!("{} active but {loc} not observed", r.id)));
                    }
                }
            }
        }
    }
    out
}

/// A seek visits each location at most once, ends within `timeout`
/// minutes, and a failed seek delivers nothing in seek mode.
pub fn check_seeks(log: &EventLog, timeout: u32) -> Vec<Violation> {
    struct Open<'a> {
        reminder: &'a str,
        start: SimTime,
        visited: BTreeSet<&'a str>,
        seek_deliveries: u32,
    }
    let mut out = Vec::new();
    let mut open: Option<Open> = None;
    for r in log.iter() {
        match &r.kind {
            RecordKind::Seek { phase: SeekPhase::Start, reminder, location, .. } => {
                if open.is_some() {
                    out.push(violation(r.time, "seek", format!("{reminder} started while another seek runs")));
                }
                open = Some(Open {
                    reminder,
                    start: r.time,
                    visited: location.as_deref().into_iter().collect(),
                    seek_deliveries: 0,
                });
            }
            RecordKind::MoveStart { to, purpose: Purpose::Seek, .. } => {
                if let Some(o) = open.as_mut() {
                    if !o.visited.insert(to) {
                        out.push(violation(r.time, "seek", format!("{} revisits {to}", o.reminder)));
                    }
                }
            }
            RecordKind::Delivered { reminder, mode: DeliveryMode::Seek, .. } => {
                if let Some(o) = open.as_mut().filter(|o| o.reminder == reminder) {
                    o.seek_deliveries += 1;
                }
            }
            RecordKind::Seek { phase, reminder, .. } => {
                let Some(o) = open.take() else {
                    out.push(violation(r.time, "seek", format!("{reminder} ended without starting")));
                    continue;
                };
                if r.time.since(o.start) > timeout {
                    out.push(violation(r.time, "seek", format!("{reminder} ran {} min", r.time.since(o.start))));
                }
                if *phase == SeekPhase::Failed && o.seek_deliveries > 0 {
                    out.push(violation(r.time, "seek", format!("failed seek of {reminder} delivered")));
                }
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{PrivacyCause, PrivacyExit, PrivacyTransition};
    use crate::homesim::LogRecord;
    use crate::plan::{parse_map, parse_plan};

    fn at(m: u32) -> SimTime {
        SimTime::new(1, 18 * 60 + m).unwrap()
    }

    fn plan() -> Plan {
        let map = parse_map("map v1\nlocation den\ndock den\n").unwrap().value;
        parse_plan(
            "plan v1\nmember kid child\nreminder r\n  recipients all\n  window 18:00-19:00 daily\n  at den\n  when present(any)\n  action speak \"x\"\n  repeat 10\n  max 2\nend\n",
            &map,
        )
        .unwrap()
        .value
    }

    fn delivered(m: u32, mode: DeliveryMode) -> LogRecord {
        LogRecord::new(
            at(m),
            RecordKind::Delivered { reminder: "r".into(), mode, recipients: vec!["kid".into()], location: Some("den".into()) },
        )
    }

    #[test]
    fn cadence_violations_are_found() {
        let ok = EventLog { records: vec![delivered(0, DeliveryMode::Proactive), delivered(10, DeliveryMode::Proactive)] };
        assert!(check_cadence(&plan(), &ok).is_empty());
        let fast = EventLog { records: vec![delivered(0, DeliveryMode::Proactive), delivered(9, DeliveryMode::Proactive)] };
        assert_eq!(check_cadence(&plan(), &fast)[0].rule, "repeat");
        let many = EventLog { records: (0..3).map(|i| delivered(i * 20, DeliveryMode::Proactive)).collect() };
        assert_eq!(check_cadence(&plan(), &many)[0].rule, "daily_max");
    }

    #[test]
    fn window_end_is_outside() {
        let log = EventLog { records: vec![delivered(60, DeliveryMode::Checkin)] };
        assert_eq!(check_windows(&plan(), &log).len(), 1);
    }

    #[test]
    fn privacy_violation_is_found_and_checkin_is_exempt() {
        let on = LogRecord::new(
            at(0),
            RecordKind::Privacy(PrivacyTransition::Enter { cause: PrivacyCause::ManualRestOfDay, until: None }),
        );
        let off = LogRecord::new(at(30), RecordKind::Privacy(PrivacyTransition::Exit { cause: PrivacyExit::Manual }));
        let log = EventLog { records: vec![on.clone(), delivered(5, DeliveryMode::Checkin), off.clone(), delivered(30, DeliveryMode::Proactive)] };
        assert!(check_privacy(&log).is_empty());
        assert_eq!(privacy_intervals(&log), vec![(at(0), Some(at(30)))]);
        let log = EventLog { records: vec![on, delivered(5, DeliveryMode::Seek), off] };
        assert_eq!(check_privacy(&log).len(), 1);
    }

    #[test]
    fn battery_zero_must_mean_offline() {
        let b = |level| LogRecord::new(at(0), RecordKind::Battery { level, capacity: 120 });
        let off = LogRecord::new(at(0), RecordKind::Offline { location: "den".into() });
        assert!(check_battery(&EventLog { records: vec![b(0), off.clone(), b(0)] }, 120).is_empty());
        assert_eq!(check_battery(&EventLog { records: vec![b(0)] }, 120).len(), 1);
        assert_eq!(check_battery(&EventLog { records: vec![off] }, 120).len(), 1);
        assert_eq!(check_battery(&EventLog { records: vec![b(121)] }, 120).len(), 1);
    }

    #[test]
    fn teleporting_is_a_motion_violation() {
        let map = parse_map("map v1\nlocation a\nlocation b\ndock a\nedge a b 3\n").unwrap().value;
        let arrive = |m, l: &str| LogRecord::new(at(m), RecordKind::Arrive { location: l.into() });
        assert!(check_motion(&map, &EventLog { records: vec![arrive(3, "b"), arrive(6, "a")] }).is_empty());
        assert_eq!(check_motion(&map, &EventLog { records: vec![arrive(3, "b"), arrive(5, "a")] }).len(), 1);
    }
}
