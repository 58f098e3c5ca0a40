//! Seeded generators for small random households and a text mutator for
//! parser fuzzing. Every output is a pure function of the seed.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{Addressee, PrivacyRequest};
use crate::homesim::{Trace, TraceAction, TraceEvent};
use crate::plan::{
    ActionSpec, Cmp, Edge, FamilyMember, FieldLines, HomeMap, Plan, Predicate, Recipients, ReminderSpec, Role, Span,
    Subject,
};
use crate::time::{DaySet, SimTime, TimeWindow, MINUTES_PER_DAY};

pub const ACTIVITIES: [&str; 5] = ["homework", "tv", "reading", "eating", "gaming"];
pub const OBJECTS: [&str; 4] = ["toys", "dishes", "shoes", "laptop"];
const LOCATIONS: [&str; 7] = ["kitchen", "dining", "living", "hall", "playroom", "bedroom", "porch"];
const MEMBERS: [(&str, Role); 5] = [
    ("mom", Role::Adult),
    ("kid_a", Role::Child),
    ("kid_b", Role::Child),
    ("dad", Role::Adult),
    ("gran", Role::Adult),
];

/// Size bounds and feature switches for generated instances.
#[derive(Debug, Clone)]
pub struct Limits {
    pub reminders: usize,
    pub locations: usize,
    pub days: u32,
    pub events: usize,
    pub privacy: bool,
    /// Check-ins, message posts and reads.
    pub screen: bool,
    /// Edge closures and reopenings.
    pub edges: bool,
    pub rescue: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self { reminders: 5, locations: 6, days: 2, events: 40, privacy: true, screen: true, edges: false, rescue: false }
    }
}

impl Limits {
    /// Adds the failure-injection events that only matter in realistic mode.
    pub fn realistic() -> Self {
        Self { edges: true, rescue: true, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub plan: Plan,
    pub map: HomeMap,
    pub trace: Trace,
    pub days: u32,
}

impl Instance {
    /// Plan, map and trace in their canonical text forms.
    pub fn texts(&self) -> (String, String, String) {
        (self.plan.to_string(), self.map.to_string(), self.trace.to_string())
    }
}

pub fn random_instance(seed: u64, limits: &Limits) -> Instance {
    Gen::new(seed).instance(limits)
}

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn instance(&mut self, limits: &Limits) -> Instance {
        let days = self.rng.random_range(1..=limits.days.max(1));
        let n = self.rng.random_range(1..=limits.locations.clamp(1, LOCATIONS.len()));
        let map = self.map(n);
        let plan = self.plan(&map, limits.reminders, days);
        let trace = self.trace(&plan, &map, limits, days);
        Instance { plan, map, trace, days }
    }

    /// Connected map: a random spanning tree plus a few chords.
    pub fn map(&mut self, n: usize) -> HomeMap {
        let mut names: Vec<&str> = LOCATIONS.to_vec();
        shuffle(&mut self.rng, &mut names);
        names.truncate(n.max(1));
        let mut edges = Vec::new();
        for i in 1..names.len() {
            let j = self.rng.random_range(0..i);
            edges.push(Edge::new(names[i], names[j], self.rng.random_range(1..=4)));
        }
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let exists = edges.iter().any(|e: &Edge| e.key() == Edge::new(names[i], names[j], 1).key());
                if !exists && self.rng.random_bool(0.2) {
                    edges.push(Edge::new(names[i], names[j], self.rng.random_range(1..=4)));
                }
            }
        }
        let dock = names[self.rng.random_range(0..names.len())];
        HomeMap::new(names.iter().copied(), edges, dock)
    }

    pub fn roster(&mut self) -> Vec<FamilyMember> {
        let n = self.rng.random_range(1..=4);
        let mut pool = MEMBERS.to_vec();
        shuffle(&mut self.rng, &mut pool);
        pool.truncate(n);
        pool.into_iter().map(|(id, role)| FamilyMember { id: id.to_string(), role, line: Span(0) }).collect()
    }

    pub fn plan(&mut self, map: &HomeMap, max_reminders: usize, days: u32) -> Plan {
        let roster = self.roster();
        let n = self.rng.random_range(0..=max_reminders);
        let reminders = (0..n).map(|i| self.reminder(&format!("r{i}"), &roster, map, days)).collect();
        Plan { map_ref: None, roster, reminders }
    }

    pub fn reminder(&mut self, id: &str, roster: &[FamilyMember], map: &HomeMap, days: u32) -> ReminderSpec {
        let ids: Vec<&str> = roster.iter().map(|m| m.id.as_str()).collect();
        let recipients = if self.rng.random_bool(0.4) {
            Recipients::All
        } else {
            Recipients::Members(self.subset(&ids).into_iter().map(String::from).collect())
        };
        let len = if self.rng.random_bool(0.15) { MINUTES_PER_DAY } else { self.rng.random_range(10..=360) };
        let start = self.rng.random_range(0..=MINUTES_PER_DAY - len);
        let day_set = if self.rng.random_bool(0.7) {
            DaySet::Daily
        } else {
            let all: Vec<u32> = (1..=days.max(2)).collect();
            DaySet::Days(self.subset(&all).into_iter().collect())
        };
        let locs: Vec<&str> = map.locations().collect();
        let mut locations: Vec<String> = self.subset(&locs).into_iter().take(2).map(String::from).collect();
        locations.sort();
        let text = self.text();
        let action = if self.rng.random_bool(0.3) {
            ActionSpec::SeekThenSpeak { target: ids[self.rng.random_range(0..ids.len())].to_string(), text }
        } else {
            ActionSpec::Speak { text }
        };
        ReminderSpec {
            id: id.to_string(),
            recipients,
            window: TimeWindow { start, end: start + len, days: day_set },
            locations,
            predicate: self.predicate(roster, 2),
            action,
            dwell_min: self.rng.random_range(0..=15.min(len - 1)),
            repeat_min: self.rng.random_range(1..=90),
            daily_max: self.rng.random_range(1..=3),
            lines: FieldLines::default(),
        }
    }

    pub fn predicate(&mut self, roster: &[FamilyMember], depth: usize) -> Predicate {
        let roll = self.rng.random_range(0..100);
        match roll {
            0..=29 => Predicate::Present(self.subject(roster)),
            30..=59 => Predicate::Doing(self.subject(roster), pick(&mut self.rng, &ACTIVITIES).to_string()),
            60..=71 => Predicate::Object(pick(&mut self.rng, &OBJECTS).to_string()),
            72..=79 => Predicate::Count(*pick(&mut self.rng, &Cmp::ALL), self.rng.random_range(0..=3)),
            80..=83 => Predicate::Always,
            _ if depth == 0 => Predicate::Present(self.subject(roster)),
            84..=91 => {
                let n = self.rng.random_range(1..=3);
                Predicate::All((0..n).map(|_| self.predicate(roster, depth - 1)).collect())
            }
            92..=96 => {
                let n = self.rng.random_range(1..=3);
                Predicate::Any((0..n).map(|_| self.predicate(roster, depth - 1)).collect())
            }
            _ => Predicate::Not(Box::new(self.predicate(roster, depth - 1))),
        }
    }

    fn subject(&mut self, roster: &[FamilyMember]) -> Subject {
        match self.rng.random_range(0..6) {
            0 => Subject::Any,
            1 => Subject::AnyChild,
            2 => Subject::AnyAdult,
            _ => Subject::Member(roster[self.rng.random_range(0..roster.len())].id.clone()),
        }
    }

    /// Reminder text, sometimes with characters that need escaping.
    pub fn text(&mut self) -> String {
        const POOL: [&str; 10] = ["time", "for", "homework", "please", "tidy", "up", " ", "\"", "\\", "\n"];
        let n = self.rng.random_range(1..=6);
        let pool = if self.rng.random_bool(0.3) { &POOL[..] } else { &POOL[..7] };
        let mut s: String = (0..n).map(|_| *pick(&mut self.rng, pool)).collect();
        if s.trim().is_empty() {
            s.push_str("hello");
        }
        s
    }

    pub fn trace(&mut self, plan: &Plan, map: &HomeMap, limits: &Limits, days: u32) -> Trace {
        let n = self.rng.random_range(0..=limits.events);
        let locs: Vec<&str> = map.locations().collect();
        let ids: Vec<&str> = plan.roster.iter().map(|m| m.id.as_str()).collect();
        let mut events = Vec::with_capacity(n);
        for _ in 0..n {
            let time = self.event_time(plan, days);
            let member = pick(&mut self.rng, &ids).to_string();
            let roll = self.rng.random_range(0..100);
            let action = match roll {
                0..=54 => {
                    let activities: BTreeSet<String> =
                        ACTIVITIES.iter().filter(|_| self.rng.random_bool(0.3)).map(|a| a.to_string()).collect();
                    TraceAction::Move { member, location: pick(&mut self.rng, &locs).to_string(), activities }
                }
                55..=61 => TraceAction::Leave { member },
                62..=71 => {
                    let k = self.rng.random_range(1..=2);
                    let changes =
                        (0..k).map(|_| (self.rng.random_bool(0.6), pick(&mut self.rng, &OBJECTS).to_string())).collect();
                    TraceAction::Objects { location: pick(&mut self.rng, &locs).to_string(), changes }
                }
                72..=79 if limits.screen => TraceAction::Checkin { member },
                80..=83 if limits.screen => {
                    let to = if self.rng.random_bool(0.5) { Addressee::All } else { Addressee::Member(pick(&mut self.rng, &ids).to_string()) };
                    TraceAction::Post { from: member, to, text: self.text() }
                }
                84..=85 if limits.screen => TraceAction::Read { member },
                86..=93 if limits.privacy => TraceAction::Privacy(match self.rng.random_range(0..3) {
                    0 => PrivacyRequest::OnFor(self.rng.random_range(5..=120)),
                    1 => PrivacyRequest::OnRestOfDay,
                    _ => PrivacyRequest::Off,
                }),
                94..=97 if limits.edges && !map.edges().is_empty() => {
                    let e = pick(&mut self.rng, map.edges()).clone();
                    TraceAction::Edge { a: e.a, b: e.b, open: self.rng.random_bool(0.4) }
                }
                98..=99 if limits.rescue => TraceAction::Rescue,
                _ => TraceAction::Move { member, location: pick(&mut self.rng, &locs).to_string(), activities: BTreeSet::new() },
            };
            events.push(TraceEvent { time, action, line: Span(0) });
        }
        events.sort_by_key(|e| e.time);
        Trace { events }
    }

    /// Mostly near some reminder's window so triggers actually fire.
    fn event_time(&mut self, plan: &Plan, days: u32) -> SimTime {
        let day = self.rng.random_range(1..=days.max(1));
        let minute = if !plan.reminders.is_empty() && self.rng.random_bool(0.75) {
            let w = &pick(&mut self.rng, &plan.reminders).window;
            let lo = w.start.saturating_sub(10);
            let hi = (w.end + 10).min(MINUTES_PER_DAY - 1);
            self.rng.random_range(lo..=hi)
        } else {
            self.rng.random_range(0..MINUTES_PER_DAY)
        };
        SimTime::new(day, minute).expect("minute is in range")
    }

    fn subset<T: Clone>(&mut self, items: &[T]) -> Vec<T> {
        let mut out: Vec<T> = items.iter().filter(|_| self.rng.random_bool(0.5)).cloned().collect();
        if out.is_empty() {
            out.push(pick(&mut self.rng, items).clone());
        }
        out
    }
}

/// Tokens that are meaningful somewhere in the plan, map, trace or log grammars.
const FUZZ_TOKENS: [&str; 24] = [
    "plan v1", "map v1", "trace v1", "reminder", "end", "window", "when", "all(", "any(", "not(", "present(", "count(",
    ">=", ")", ",", "\"", "\\", "d1", "24:00", "99:99", "-", "+", "\n", "t=d1:00:00 kind=",
];

/// One random structural edit of `text`. Output is always valid UTF-8.
pub fn mutate(rng: &mut ChaCha8Rng, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    let pos = |rng: &mut ChaCha8Rng, len: usize| rng.random_range(0..=len);
    match rng.random_range(0..8) {
        0 if !chars.is_empty() => {
            let a = pos(rng, chars.len() - 1);
            let b = (a + rng.random_range(1..=8)).min(chars.len());
            chars.drain(a..b);
        }
        1 => {
            let at = pos(rng, chars.len());
            let tok = *pick(rng, &FUZZ_TOKENS);
            chars.splice(at..at, tok.chars());
        }
        2 if !chars.is_empty() => {
            let at = pos(rng, chars.len() - 1);
            chars[at] = match rng.random_range(0..4) {
                0 => char::from(rng.random_range(0x20u8..0x7f)),
                1 => '\u{00e9}',
                2 => '\0',
                _ => '\t',
            };
        }
        3 => {
            let mut lines: Vec<&str> = text.lines().collect();
            if lines.len() > 1 {
                let a = rng.random_range(0..lines.len());
                let b = rng.random_range(0..lines.len());
                lines.swap(a, b);
            }
            return lines.join("\n");
        }
        4 => {
            let lines: Vec<&str> = text.lines().collect();
            if let Some(l) = lines.get(rng.random_range(0..lines.len().max(1))) {
                return format!("{text}{l}\n");
            }
        }
        5 => chars.truncate(pos(rng, chars.len())),
        6 => {
            let at = pos(rng, chars.len());
            let digits: String = (0..rng.random_range(1..=12)).map(|_| char::from(b'0' + rng.random_range(0..10u8))).collect();
            chars.splice(at..at, digits.chars());
        }
        _ => {
            let at = pos(rng, chars.len());
            let deep = "all(".repeat(rng.random_range(1..=200));
            chars.splice(at..at, deep.chars());
        }
    }
    chars.into_iter().collect()
}

fn pick<'a, T>(rng: &mut ChaCha8Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        items.swap(i, rng.random_range(0..=i));
    }
}
