use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::plan::{edge_key, HomeMap};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    /// Starts at the origin and ends at the destination.
    pub path: Vec<String>,
    pub minutes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unreachable;

/// Shortest open path by total minutes; equal-length paths are ordered by
/// their location sequence, lexicographically.
pub fn navigate(map: &HomeMap, from: &str, to: &str, closed: &BTreeSet<(String, String)>) -> Result<Route, Unreachable> {
    if !map.has_location(from) || !map.has_location(to) {
        return Err(Unreachable);
    }
    // Labels are (minutes, path); the heap pops the smallest label, so the
    // first label settled at a node is its lexicographic optimum.
    let mut heap = BinaryHeap::new();
    let mut settled: BTreeSet<String> = BTreeSet::new();
    heap.push(Reverse((0u32, vec![from.to_string()])));
    while let Some(Reverse((minutes, path))) = heap.pop() {
        let here = path.last().expect("paths are never empty").as_str();
        if !settled.insert(here.to_string()) {
            continue;
        }
        if here == to {
            return Ok(Route { path, minutes });
        }
        for (next, m) in map.neighbors(here) {
            if settled.contains(next) || closed.contains(&edge_key(here, next)) {
                continue;
            }
            let mut p = path.clone();
            p.push(next.to_string());
            heap.push(Reverse((minutes + m, p)));
        }
    }
    Err(Unreachable)
}

/// One docking attempt: a single Bernoulli(`p_dock`) draw.
pub fn attempt_dock(rng: &mut SimRng, p_dock: f64) -> bool {
    rng.chance(p_dock)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::Edge;

    fn map() -> HomeMap {
        HomeMap::new(
            ["kitchen", "dining", "hall", "playroom"],
            [Edge::new("kitchen", "dining", 1), Edge::new("kitchen", "hall", 2), Edge::new("hall", "playroom", 3)],
            "kitchen",
        )
    }

    #[test]
    fn same_place_is_free() {
        let r = navigate(&map(), "hall", "hall", &BTreeSet::new()).unwrap();
        assert_eq!((r.path, r.minutes), (vec!["hall".to_string()], 0));
    }

    #[test]
    fn single_edge() {
        assert_eq!(navigate(&map(), "kitchen", "dining", &BTreeSet::new()).unwrap().minutes, 1);
        assert_eq!(navigate(&map(), "dining", "playroom", &BTreeSet::new()).unwrap().minutes, 6);
    }

    #[test]
    fn closed_bridge_is_unreachable() {
        let closed = BTreeSet::from([edge_key("playroom", "hall")]);
        assert_eq!(navigate(&map(), "kitchen", "playroom", &closed), Err(Unreachable));
    }

    #[test]
    fn ties_break_on_location_sequence() {
        let m = HomeMap::new(
            ["a", "b", "c", "d"],
            [Edge::new("a", "c", 1), Edge::new("c", "d", 1), Edge::new("a", "b", 1), Edge::new("b", "d", 1)],
            "a",
        );
        assert_eq!(navigate(&m, "a", "d", &BTreeSet::new()).unwrap().path, ["a", "b", "d"]);
    }

    #[test]
    fn docking_probability_extremes() {
        let mut rng = SimRng::new(0);
        assert!(attempt_dock(&mut rng, 1.0));
        assert!(!attempt_dock(&mut rng, 0.0));
        let run = |seed| {
            let mut rng = SimRng::new(seed);
            (0..32).map(|_| attempt_dock(&mut rng, 0.5)).collect::<Vec<_>>()
        };
        assert_eq!(run(4), run(4));
    }
}
