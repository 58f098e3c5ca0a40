//! Trigger predicates: a small boolean language over a perceived scene.
//!
//! ```text
//! pred    := "always" | atom | ("all" | "any") "(" [pred ("," pred)*] ")" | "not" "(" pred ")"
//! atom    := "present" "(" subject ")" | "doing" "(" subject "," tag ")"
//!          | "object" "(" tag ")" | "count" "(" cmp "," int ")"
//! subject := "any" | "any_child" | "any_adult" | member-id
//! cmp     := "<" | "<=" | "=" | ">=" | ">"
//! ```

use std::collections::BTreeSet;
use std::fmt;

use super::{FamilyMember, Role};
use crate::perception::Scene;

/// Nesting bound enforced by plan validation.
pub const MAX_DEPTH: usize = 16;

/// Hard nesting bound of the parser itself, so hostile input cannot exhaust the stack.
const PARSE_DEPTH_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Subject {
    Any,
    AnyChild,
    AnyAdult,
    Member(String),
}

impl Subject {
    fn from_word(w: &str) -> Self {
        match w {
            "any" => Subject::Any,
            "any_child" => Subject::AnyChild,
            "any_adult" => Subject::AnyAdult,
            other => Subject::Member(other.to_string()),
        }
    }

    /// Whether a person identified as `member` is covered by this subject.
    pub fn matches(&self, member: &str, roster: &[FamilyMember]) -> bool {
        let role = || roster.iter().find(|m| m.id == member).map(|m| m.role);
        match self {
            Subject::Any => true,
            Subject::AnyChild => role() == Some(Role::Child),
            Subject::AnyAdult => role() == Some(Role::Adult),
            Subject::Member(id) => id == member,
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Any => f.write_str("any"),
            Subject::AnyChild => f.write_str("any_child"),
            Subject::AnyAdult => f.write_str("any_adult"),
            Subject::Member(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub const ALL: [Cmp; 5] = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ge, Cmp::Gt];

    pub fn apply(self, lhs: u32, rhs: u32) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Predicate {
    Always,
    Present(Subject),
    Doing(Subject, String),
    Object(String),
    Count(Cmp, u32),
    All(Vec<Predicate>),
    Any(Vec<Predicate>),
    Not(Box<Predicate>),
}

impl Predicate {
    pub fn depth(&self) -> usize {
        match self {
            Predicate::All(ps) | Predicate::Any(ps) => 1 + ps.iter().map(Predicate::depth).max().unwrap_or(0),
            Predicate::Not(p) => 1 + p.depth(),
            _ => 1,
        }
    }

    pub fn eval(&self, scene: &Scene, roster: &[FamilyMember]) -> bool {
        match self {
            Predicate::Always => true,
            Predicate::Present(s) => scene.persons.iter().any(|p| s.matches(&p.member, roster)),
            Predicate::Doing(s, tag) => scene
                .persons
                .iter()
                .any(|p| s.matches(&p.member, roster) && p.activities.contains(tag)),
            Predicate::Object(tag) => scene.objects.contains(tag),
            Predicate::Count(cmp, n) => cmp.apply(scene.persons.len() as u32, *n),
            Predicate::All(ps) => ps.iter().all(|p| p.eval(scene, roster)),
            Predicate::Any(ps) => ps.iter().any(|p| p.eval(scene, roster)),
            Predicate::Not(p) => !p.eval(scene, roster),
        }
    }

    /// Pre-order traversal of every node.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Predicate)) {
        f(self);
        match self {
            Predicate::All(ps) | Predicate::Any(ps) => ps.iter().for_each(|p| p.walk(f)),
            Predicate::Not(p) => p.walk(f),
            _ => {}
        }
    }

    /// Member ids named explicitly in `present`/`doing` atoms.
    pub fn members(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |p| {
            if let Predicate::Present(Subject::Member(id)) | Predicate::Doing(Subject::Member(id), _) = p {
                out.insert(id.as_str());
            }
        });
        out
    }

    pub fn activity_tags(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |p| {
            if let Predicate::Doing(_, tag) = p {
                out.insert(tag.as_str());
            }
        });
        out
    }

    pub fn object_tags(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.walk(&mut |p| {
            if let Predicate::Object(tag) = p {
                out.insert(tag.as_str());
            }
        });
        out
    }

    /// True if any atom depends on the people in the scene.
    pub fn mentions_persons(&self) -> bool {
        let mut found = false;
        self.walk(&mut |p| {
            found |= matches!(p, Predicate::Present(_) | Predicate::Doing(..) | Predicate::Count(..));
        });
        found
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Always => f.write_str("always"),
            Predicate::Present(s) => write!(f, "present({s})"),
            Predicate::Doing(s, tag) => write!(f, "doing({s}, {tag})"),
            Predicate::Object(tag) => write!(f, "object({tag})"),
            Predicate::Count(cmp, n) => write!(f, "count({}, {n})", cmp.symbol()),
            Predicate::All(ps) | Predicate::Any(ps) => {
                f.write_str(if matches!(self, Predicate::All(_)) { "all(" } else { "any(" })?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            Predicate::Not(p) => write!(f, "not({p})"),
        }
    }
}

/// Free-function form of [`Predicate::eval`].
pub fn eval_predicate(p: &Predicate, scene: &Scene, roster: &[FamilyMember]) -> bool {
    p.eval(scene, roster)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u32),
    Cmp(Cmp),
    Open,
    Close,
    Comma,
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push(Tok::Open);
            }
            ')' => {
                chars.next();
                out.push(Tok::Close);
            }
            ',' => {
                chars.next();
                out.push(Tok::Comma);
            }
            '<' | '>' | '=' => {
                chars.next();
                let eq = chars.peek() == Some(&'=');
                let cmp = match (c, eq) {
                    ('<', true) => Cmp::Le,
                    ('<', false) => Cmp::Lt,
                    ('>', true) => Cmp::Ge,
                    ('>', false) => Cmp::Gt,
                    _ => Cmp::Eq,
                };
                if eq && c != '=' {
                    chars.next();
                }
                out.push(Tok::Cmp(cmp));
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    chars.next();
                }
                let n = s.parse::<u32>().map_err(|_| format!("integer `{s}` out of range"))?;
                out.push(Tok::Int(n));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_alphanumeric() || **d == '_') {
                    s.push(d);
                    chars.next();
                }
                out.push(Tok::Ident(s));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), String> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            _ => Err(format!("expected {what}")),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            _ => Err(format!("expected {what}")),
        }
    }

    fn pred(&mut self, depth: usize) -> Result<Predicate, String> {
        if depth > PARSE_DEPTH_LIMIT {
            return Err("predicate nesting too deep".into());
        }
        let head = self.ident("predicate")?;
        if head == "always" {
            return Ok(Predicate::Always);
        }
        self.expect(Tok::Open, &format!("`(` after `{head}`"))?;
        let p = match head.as_str() {
            "present" => Predicate::Present(Subject::from_word(&self.ident("subject")?)),
            "doing" => {
                let s = Subject::from_word(&self.ident("subject")?);
                self.expect(Tok::Comma, "`,`")?;
                Predicate::Doing(s, self.ident("activity tag")?)
            }
            "object" => Predicate::Object(self.ident("object tag")?),
            "count" => {
                let cmp = match self.next() {
                    Some(Tok::Cmp(c)) => c,
                    _ => return Err("expected comparison operator".into()),
                };
                self.expect(Tok::Comma, "`,`")?;
                match self.next() {
                    Some(Tok::Int(n)) => Predicate::Count(cmp, n),
                    _ => return Err("expected integer".into()),
                }
            }
            "not" => Predicate::Not(Box::new(self.pred(depth + 1)?)),
            "all" | "any" => {
                let mut items = Vec::new();
                if self.peek() != Some(&Tok::Close) {
                    loop {
                        items.push(self.pred(depth + 1)?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                if head == "all" {
                    Predicate::All(items)
                } else {
                    Predicate::Any(items)
                }
            }
            other => return Err(format!("unknown predicate `{other}`")),
        };
        self.expect(Tok::Close, "`)`")?;
        Ok(p)
    }
}

impl std::str::FromStr for Predicate {
    type Err = String;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { toks: lex(src)?, pos: 0 };
        let pred = p.pred(0)?;
        if p.pos < p.toks.len() {
            return Err("trailing input after predicate".into());
        }
        Ok(pred)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::PersonObs;
    use crate::plan::Span;
    use proptest::prelude::*;

    fn roster() -> Vec<FamilyMember> {
        vec![
            FamilyMember { id: "mom".into(), role: Role::Adult, line: Span(0) },
            FamilyMember { id: "kidA".into(), role: Role::Child, line: Span(0) },
            FamilyMember { id: "kidB".into(), role: Role::Child, line: Span(0) },
        ]
    }

    fn scene(persons: &[(&str, &[&str])], objects: &[&str]) -> Scene {
        Scene {
            location: "dining_table".into(),
            persons: persons
                .iter()
                .map(|(m, acts)| PersonObs {
                    member: m.to_string(),
                    activities: acts.iter().map(|a| a.to_string()).collect(),
                })
                .collect(),
            objects: objects.iter().map(|o| o.to_string()).collect(),
        }
    }

    fn p(s: &str) -> Predicate {
        s.parse().unwrap()
    }

    #[test]
    fn presence_of_named_member() {
        assert!(p("present(kidA)").eval(&scene(&[("kidA", &["homework"])], &[]), &roster()));
    }

    #[test]
    fn both_children_doing_homework() {
        let pred = p("all(doing(kidA,homework), doing(kidB,homework))");
        let both = scene(&[("kidA", &["homework"]), ("kidB", &["homework"])], &[]);
        let one = scene(&[("kidA", &["homework"]), ("kidB", &["tv"])], &[]);
        assert!(pred.eval(&both, &roster()));
        assert!(!pred.eval(&one, &roster()));
    }

    #[test]
    fn count_on_empty_scene() {
        assert!(!p("count(>=, 2)").eval(&scene(&[], &[]), &roster()));
        assert!(p("count(=,0)").eval(&scene(&[], &[]), &roster()));
    }

    #[test]
    fn group_subjects_follow_roles() {
        let s = scene(&[("mom", &["cooking"])], &[]);
        assert!(p("present(any_adult)").eval(&s, &roster()));
        assert!(!p("present(any_child)").eval(&s, &roster()));
        assert!(p("doing(any, cooking)").eval(&s, &roster()));
    }

    #[test]
    fn empty_combinators() {
        let s = scene(&[], &[]);
        assert!(p("all()").eval(&s, &roster()));
        assert!(!p("any()").eval(&s, &roster()));
    }

    #[test]
    fn display_is_canonical() {
        let src = "all(doing(kidA,homework),not(object(toys)),count(<=,3),any(present(any_child),always))";
        assert_eq!(
            p(src).to_string(),
            "all(doing(kidA, homework), not(object(toys)), count(<=, 3), any(present(any_child), always))"
        );
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "present", "present(", "doing(kidA)", "count(>,x)", "foo(x)", "always extra", "object(1)", "a$"] {
            assert!(bad.parse::<Predicate>().is_err(), "{bad}");
        }
        let deep = format!("{}always{}", "not(".repeat(100), ")".repeat(100));
        assert!(deep.parse::<Predicate>().is_err());
    }

    #[test]
    fn depth_is_counted_from_atoms() {
        assert_eq!(p("always").depth(), 1);
        assert_eq!(p("not(all(present(kidA)))").depth(), 3);
        assert_eq!(p("all()").depth(), 1);
    }

    fn arb_pred() -> impl Strategy<Value = Predicate> {
        let subject = prop_oneof![
            Just(Subject::Any),
            Just(Subject::AnyChild),
            Just(Subject::AnyAdult),
            Just(Subject::Member("kidA".into())),
            Just(Subject::Member("mom".into())),
        ];
        let tag = prop_oneof![Just("homework".to_string()), Just("tv".to_string())];
        let leaf = prop_oneof![
            Just(Predicate::Always),
            subject.clone().prop_map(Predicate::Present),
            (subject, tag).prop_map(|(s, t)| Predicate::Doing(s, t)),
            prop_oneof![Just("toys".to_string()), Just("dishes".to_string())].prop_map(Predicate::Object),
            (prop::sample::select(Cmp::ALL.to_vec()), 0u32..4).prop_map(|(c, n)| Predicate::Count(c, n)),
        ];
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 0..4).prop_map(Predicate::All),
                prop::collection::vec(inner.clone(), 0..4).prop_map(Predicate::Any),
                inner.prop_map(|p| Predicate::Not(Box::new(p))),
            ]
        })
    }

    fn arb_scene() -> impl Strategy<Value = Scene> {
        let person = (
            prop::sample::select(vec!["mom", "kidA", "kidB"]),
            prop::collection::btree_set(prop::sample::select(vec!["homework", "tv"]), 0..3),
        );
        (
            prop::collection::vec(person, 0..4),
            prop::collection::btree_set(prop::sample::select(vec!["toys", "dishes"]), 0..3),
        )
            .prop_map(|(persons, objects)| Scene {
                location: "x".into(),
                persons: persons
                    .into_iter()
                    .map(|(m, acts)| PersonObs {
                        member: m.to_string(),
                        activities: acts.into_iter().map(String::from).collect(),
                    })
                    .collect(),
                objects: objects.into_iter().map(String::from).collect(),
            })
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(pred in arb_pred()) {
            prop_assert_eq!(pred.to_string().parse::<Predicate>().unwrap(), pred);
        }

        #[test]
        fn negation_inverts(pred in arb_pred(), s in arb_scene()) {
            let r = roster();
            prop_assert_eq!(Predicate::Not(Box::new(pred.clone())).eval(&s, &r), !pred.eval(&s, &r));
        }

        #[test]
        fn combinators_are_order_and_grouping_insensitive(
            a in arb_pred(), b in arb_pred(), c in arb_pred(), s in arb_scene()
        ) {
            let r = roster();
            let ev = |p: Predicate| p.eval(&s, &r);
            let flat_all = ev(Predicate::All(vec![a.clone(), b.clone(), c.clone()]));
            prop_assert_eq!(flat_all, ev(Predicate::All(vec![c.clone(), a.clone(), b.clone()])));
            prop_assert_eq!(flat_all, ev(Predicate::All(vec![Predicate::All(vec![a.clone(), b.clone()]), c.clone()])));
            let flat_any = ev(Predicate::Any(vec![a.clone(), b.clone(), c.clone()]));
            prop_assert_eq!(flat_any, ev(Predicate::Any(vec![b.clone(), c.clone(), a.clone()])));
            prop_assert_eq!(flat_any, ev(Predicate::Any(vec![a, Predicate::Any(vec![b, c])])));
        }
    }
}
