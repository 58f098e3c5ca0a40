//! Two-stage snapshot analysis over simulated ground truth.
//!
//! Stage 1 is a cheap detector: it counts people and spots object classes the
//! plan cares about, and decides whether stage 2 is worth running. Stage 2
//! interprets the scene (identities, activities, objects) through an
//! [`ErrorModel`] that can misidentify people and flip tags.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::homesim::GroundWorld;
use crate::plan::{FamilyMember, Predicate, Vocabulary};
use crate::rng::SimRng;
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PersonObs {
    pub member: String,
    pub activities: BTreeSet<String>,
}

/// People and objects at one location. Persons are kept sorted by member id;
/// after misidentification the same id may appear more than once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scene {
    pub location: String,
    pub persons: Vec<PersonObs>,
    pub objects: BTreeSet<String>,
}

/// Ground truth at a location.
pub type GroundScene = Scene;
/// What the analyzer reports; same shape as ground truth, possibly distorted.
pub type PerceivedScene = Scene;

impl Scene {
    pub fn empty(location: impl Into<String>) -> Self {
        Self { location: location.into(), persons: Vec::new(), objects: BTreeSet::new() }
    }

    pub fn person_count(&self) -> u32 {
        self.persons.len() as u32
    }

    pub fn is_present(&self, member: &str) -> bool {
        self.persons.iter().any(|p| p.member == member)
    }

    /// Distinct member ids, sorted.
    pub fn present_members(&self) -> BTreeSet<&str> {
        self.persons.iter().map(|p| p.member.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorModel {
    pub p_person_swap: f64,
    pub p_activity_fp: f64,
    pub p_activity_fn: f64,
    pub p_object_flip: f64,
}

impl ErrorModel {
    pub const ZERO: ErrorModel =
        ErrorModel { p_person_swap: 0.0, p_activity_fp: 0.0, p_activity_fn: 0.0, p_object_flip: 0.0 };

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    pub fn is_valid(&self) -> bool {
        [self.p_person_swap, self.p_activity_fp, self.p_activity_fn, self.p_object_flip]
            .iter()
            .all(|p| (0.0..=1.0).contains(p))
    }

    /// Applies one `key=value` setting. Keys: `person_swap`, `activity_fp`,
    /// `activity_fn`, `object_flip`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        if !(0.0..=1.0).contains(&value) {
            return Err(format!("probability for `{key}` must be within [0, 1]"));
        }
        let slot = match key {
            "person_swap" => &mut self.p_person_swap,
            "activity_fp" => &mut self.p_activity_fp,
            "activity_fn" => &mut self.p_activity_fn,
            "object_flip" => &mut self.p_object_flip,
            other => return Err(format!("unknown error-model key `{other}`")),
        };
        *slot = value;
        Ok(())
    }
}

/// Parses comma-separated `key=value` pairs, e.g. `person_swap=0.1,object_flip=0.05`.
impl FromStr for ErrorModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut em = ErrorModel::ZERO;
        for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| format!("expected key=value, got `{pair}`"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
            em.set(k.trim(), v)?;
        }
        Ok(em)
    }
}

impl fmt::Display for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "person_swap={},activity_fp={},activity_fn={},object_flip={}",
            self.p_person_swap, self.p_activity_fp, self.p_activity_fn, self.p_object_flip
        )
    }
}

/// What the predicates watching a location need stage 1 to look for.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AtomSummary {
    /// Some predicate depends on the people present.
    pub persons: bool,
    /// Object tags referenced by the predicates.
    pub objects: BTreeSet<String>,
    /// Some predicate holds on a scene with nobody and none of `objects`,
    /// e.g. `not(present(kid))`. Such predicates always need stage 2.
    pub fires_on_empty: bool,
}

impl AtomSummary {
    pub fn add(&mut self, p: &Predicate, roster: &[FamilyMember]) {
        self.persons |= p.mentions_persons();
        self.objects.extend(p.object_tags().into_iter().map(String::from));
        self.fires_on_empty |= p.eval(&Scene::empty(""), roster);
    }

    pub fn of<'a>(preds: impl IntoIterator<Item = &'a Predicate>, roster: &[FamilyMember]) -> Self {
        let mut s = Self::default();
        for p in preds {
            s.add(p, roster);
        }
        s
    }

    /// Summary used while searching for a person.
    pub fn person_search() -> Self {
        Self { persons: true, ..Self::default() }
    }

    pub fn is_empty(&self) -> bool {
        !self.persons && self.objects.is_empty() && !self.fires_on_empty
    }
}

/// Stage-1 detector output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage1 {
    pub person_count: u32,
    /// Needed object tags actually detected.
    pub objects: BTreeSet<String>,
}

pub fn stage1_detect(ground: &GroundScene, needed: &AtomSummary) -> Stage1 {
    Stage1 {
        person_count: ground.person_count(),
        objects: needed.objects.intersection(&ground.objects).cloned().collect(),
    }
}

/// Whether stage 2 should run for this snapshot.
pub fn stage1_gate(ground: &GroundScene, needed: &AtomSummary) -> bool {
    gate_from(&stage1_detect(ground, needed), needed)
}

fn gate_from(s1: &Stage1, needed: &AtomSummary) -> bool {
    needed.fires_on_empty || (needed.persons && s1.person_count > 0) || !s1.objects.is_empty()
}

/// Full scene interpretation with injected errors. Randomness is drawn in a
/// fixed order: persons by member id, then ground activities, then missing
/// plan activities, then plan object tags.
pub fn perceive(
    ground: &GroundScene,
    em: &ErrorModel,
    roster: &[FamilyMember],
    vocab: &Vocabulary,
    rng: &mut SimRng,
) -> PerceivedScene {
    let mut persons = Vec::with_capacity(ground.persons.len());
    for p in &ground.persons {
        let mut member = p.member.clone();
        if rng.chance(em.p_person_swap) {
            let others: Vec<&str> = roster.iter().map(|m| m.id.as_str()).filter(|id| *id != p.member).collect();
            if !others.is_empty() {
                member = others[rng.pick(others.len())].to_string();
            }
        }
        let mut activities = BTreeSet::new();
        for a in &p.activities {
            if !rng.chance(em.p_activity_fn) {
                activities.insert(a.clone());
            }
        }
        for a in vocab.activities.difference(&p.activities) {
            if rng.chance(em.p_activity_fp) {
                activities.insert(a.clone());
            }
        }
        persons.push(PersonObs { member, activities });
    }
    persons.sort();

    let mut objects = ground.objects.clone();
    for o in &vocab.objects {
        if rng.chance(em.p_object_flip) && !objects.remove(o) {
            objects.insert(o.clone());
        }
    }
    Scene { location: ground.location.clone(), persons, objects }
}

/// One logged snapshot. `perceived` is present iff stage 2 ran.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotRecord {
    pub time: SimTime,
    pub location: String,
    pub stage1: Stage1,
    pub perceived: Option<PerceivedScene>,
}

impl SnapshotRecord {
    pub fn stage2_ran(&self) -> bool {
        self.perceived.is_some()
    }
}

/// Context shared by every snapshot in a run.
#[derive(Debug, Clone, Copy)]
pub struct Analyzer<'a> {
    pub roster: &'a [FamilyMember],
    pub vocab: &'a Vocabulary,
    pub errors: &'a ErrorModel,
}

/// Stage 1 on ground truth, then stage 2 if the gate opens.
pub fn snapshot(
    world: &GroundWorld,
    loc: &str,
    needed: &AtomSummary,
    analyzer: &Analyzer<'_>,
    rng: &mut SimRng,
) -> SnapshotRecord {
    let ground = world.scene(loc);
    let stage1 = stage1_detect(&ground, needed);
    let perceived =
        gate_from(&stage1, needed).then(|| perceive(&ground, analyzer.errors, analyzer.roster, analyzer.vocab, rng));
    SnapshotRecord { time: world.time(), location: loc.to_string(), stage1, perceived }
}

/// Request/response boundary for a real scene analyzer. An implementation
/// must answer within `timeout_ms` or return `None`, which callers record as
/// a snapshot whose stage 2 did not run. Only the simulated analyzer ships.
pub trait SceneAnalyzer {
    fn analyze(&mut self, location: &str, needed: &AtomSummary, timeout_ms: u64) -> Option<PerceivedScene>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{Role, Span};

    fn member(id: &str, role: Role) -> FamilyMember {
        FamilyMember { id: id.into(), role, line: Span(0) }
    }

    fn scene(persons: &[(&str, &[&str])], objects: &[&str]) -> Scene {
        let mut persons: Vec<PersonObs> = persons
            .iter()
            .map(|(m, a)| PersonObs { member: m.to_string(), activities: a.iter().map(|s| s.to_string()).collect() })
            .collect();
        persons.sort();
        Scene { location: "room".into(), persons, objects: objects.iter().map(|s| s.to_string()).collect() }
    }

    fn summary(preds: &[&str]) -> AtomSummary {
        let ps: Vec<Predicate> = preds.iter().map(|p| p.parse().unwrap()).collect();
        AtomSummary::of(&ps, &[member("kid", Role::Child)])
    }

    #[test]
    fn empty_room_skips_stage_two() {
        assert!(!stage1_gate(&scene(&[], &[]), &summary(&["present(kid)"])));
    }

    #[test]
    fn two_people_open_the_gate() {
        let s = scene(&[("a", &[]), ("b", &[])], &[]);
        assert!(stage1_gate(&s, &summary(&["present(kid)"])));
        assert_eq!(stage1_detect(&s, &summary(&["present(kid)"])).person_count, 2);
    }

    #[test]
    fn needed_object_opens_the_gate() {
        let s = scene(&[], &["toys_scattered"]);
        assert!(stage1_gate(&s, &summary(&["object(toys_scattered)"])));
        assert!(!stage1_gate(&scene(&[], &["dishes"]), &summary(&["object(toys_scattered)"])));
    }

    #[test]
    fn negated_presence_always_needs_stage_two() {
        assert!(stage1_gate(&scene(&[], &[]), &summary(&["not(present(kid))"])));
    }

    #[test]
    fn zero_error_model_is_identity() {
        let ground = scene(&[("kid", &["homework"]), ("mom", &["tv"])], &["toys"]);
        let vocab = Vocabulary {
            activities: ["homework", "tv", "reading"].map(String::from).into(),
            objects: ["toys", "dishes"].map(String::from).into(),
        };
        let roster = [member("kid", Role::Child), member("mom", Role::Adult)];
        let mut rng = SimRng::new(1);
        assert_eq!(perceive(&ground, &ErrorModel::ZERO, &roster, &vocab, &mut rng), ground);
    }

    #[test]
    fn certain_swap_mistakes_daughter_for_mom() {
        let roster = [member("mom", Role::Adult), member("daughter", Role::Child)];
        let em = ErrorModel { p_person_swap: 1.0, ..ErrorModel::ZERO };
        let ground = scene(&[("daughter", &["tv"])], &[]);
        let seen = perceive(&ground, &em, &roster, &Vocabulary::default(), &mut SimRng::new(5));
        assert_eq!(seen.present_members().into_iter().collect::<Vec<_>>(), vec!["mom"]);
        assert!(seen.persons[0].activities.contains("tv"));
    }

    #[test]
    fn perception_is_reproducible_per_seed() {
        let roster = [member("a", Role::Adult), member("b", Role::Child), member("c", Role::Child)];
        let vocab = Vocabulary { activities: ["x", "y"].map(String::from).into(), objects: ["o"].map(String::from).into() };
        let em = ErrorModel { p_person_swap: 0.3, p_activity_fp: 0.3, p_activity_fn: 0.3, p_object_flip: 0.3 };
        let ground = scene(&[("a", &["x"]), ("b", &[])], &["o"]);
        let run = |seed| {
            let mut rng = SimRng::new(seed);
            (0..20).map(|_| perceive(&ground, &em, &roster, &vocab, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        for s in run(9) {
            assert!(s.persons.iter().all(|p| roster.iter().any(|m| m.id == p.member)));
        }
    }

    #[test]
    fn error_model_parsing() {
        let em: ErrorModel = "person_swap=0.25, object_flip=1".parse().unwrap();
        assert_eq!(em.p_person_swap, 0.25);
        assert_eq!(em.p_object_flip, 1.0);
        assert!("person_swap=2".parse::<ErrorModel>().is_err());
        assert!("bogus=0.1".parse::<ErrorModel>().is_err());
        assert!("".parse::<ErrorModel>().unwrap().is_zero());
    }
}
