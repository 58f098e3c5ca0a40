use std::collections::{BTreeMap, BTreeSet};

use super::trace::{Trace, TraceAction};
use crate::perception::{GroundScene, PersonObs};
use crate::plan::edge_key;
use crate::time::SimTime;

/// Ground truth at one instant. Members never moved (or who left) are away
/// and appear in no scene.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundWorld {
    time: SimTime,
    members: BTreeMap<String, (String, BTreeSet<String>)>,
    objects: BTreeMap<String, BTreeSet<String>>,
    closed: BTreeSet<(String, String)>,
}

impl GroundWorld {
    pub fn new(time: SimTime) -> Self {
        Self { time, members: BTreeMap::new(), objects: BTreeMap::new(), closed: BTreeSet::new() }
    }

    pub fn time(&self) -> SimTime {
        self.time
    }

    pub fn set_time(&mut self, t: SimTime) {
        self.time = t;
    }

    pub fn apply(&mut self, action: &TraceAction) {
        match action {
            TraceAction::Move { member, location, activities } => {
                self.members.insert(member.clone(), (location.clone(), activities.clone()));
            }
            TraceAction::Leave { member } => {
                self.members.remove(member);
            }
            TraceAction::Objects { location, changes } => {
                let set = self.objects.entry(location.clone()).or_default();
                for (add, tag) in changes {
                    if *add {
                        set.insert(tag.clone());
                    } else {
                        set.remove(tag);
                    }
                }
            }
            TraceAction::Edge { a, b, open } => {
                let key = edge_key(a, b);
                if *open {
                    self.closed.remove(&key);
                } else {
                    self.closed.insert(key);
                }
            }
            _ => {}
        }
    }

    /// `None` when the member is away.
    pub fn location_of(&self, member: &str) -> Option<&str> {
        self.members.get(member).map(|(l, _)| l.as_str())
    }

    pub fn scene(&self, loc: &str) -> GroundScene {
        let persons = self
            .members
            .iter()
            .filter(|(_, (l, _))| l == loc)
            .map(|(m, (_, acts))| PersonObs { member: m.clone(), activities: acts.clone() })
            .collect();
        GroundScene {
            location: loc.to_string(),
            persons,
            objects: self.objects.get(loc).cloned().unwrap_or_default(),
        }
    }

    /// Closed edges as normalized endpoint pairs.
    pub fn closed_edges(&self) -> &BTreeSet<(String, String)> {
        &self.closed
    }

    pub fn is_open(&self, a: &str, b: &str) -> bool {
        !self.closed.contains(&edge_key(a, b))
    }
}

/// Folds every event with time `<= t`.
pub fn world_at(trace: &Trace, t: SimTime) -> GroundWorld {
    let mut w = GroundWorld::new(t);
    for e in trace.events.iter().take_while(|e| e.time <= t) {
        w.apply(&e.action);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homesim::trace::TraceEvent;
    use crate::plan::Span;

    fn ev(min: u32, action: TraceAction) -> TraceEvent {
        TraceEvent { time: SimTime::new(1, min).unwrap(), action, line: Span(0) }
    }

    fn trace() -> Trace {
        Trace {
            events: vec![
                ev(10, TraceAction::Move { member: "kidA".into(), location: "dining".into(), activities: ["homework".to_string()].into() }),
                ev(20, TraceAction::Edge { a: "playroom".into(), b: "hall".into(), open: false }),
                ev(30, TraceAction::Move { member: "kidA".into(), location: "hall".into(), activities: BTreeSet::new() }),
            ],
        }
    }

    #[test]
    fn member_is_away_before_first_move() {
        let w = world_at(&trace(), SimTime::new(1, 9).unwrap());
        assert_eq!(w.location_of("kidA"), None);
        assert!(w.scene("dining").persons.is_empty());
    }

    #[test]
    fn move_places_member_with_activities() {
        let w = world_at(&trace(), SimTime::new(1, 10).unwrap());
        let s = w.scene("dining");
        assert_eq!(s.persons.len(), 1);
        assert!(s.persons[0].activities.contains("homework"));
        let later = world_at(&trace(), SimTime::new(1, 30).unwrap());
        assert!(later.scene("dining").persons.is_empty());
        assert_eq!(later.location_of("kidA"), Some("hall"));
    }

    #[test]
    fn closed_edge_is_projected() {
        let w = world_at(&trace(), SimTime::new(1, 20).unwrap());
        assert!(!w.is_open("hall", "playroom"));
        assert!(world_at(&trace(), SimTime::new(1, 19).unwrap()).is_open("hall", "playroom"));
    }
}
