//! Family routine plans: the reminder data model, the `.plan` and `.map`
//! text formats, and static validation.

mod diag;
pub(crate) mod lex;
mod map;
mod parse;
pub mod predicate;
mod serialize;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use diag::{has_errors, sort_diagnostics, Code, Diagnostic, Parsed, Severity};
pub(crate) use diag::finish;
pub use lex::{is_identifier, is_tag};
pub use map::{edge_key, parse_map, Edge, HomeMap};
pub use parse::parse_plan;
pub use predicate::{eval_predicate, Cmp, Predicate, Subject};
pub use serialize::serialize_plan;
pub use validate::validate_plan;

use crate::time::{SimTime, TimeWindow};

/// Identifiers that may not be used as member ids.
pub const RESERVED_IDS: [&str; 4] = ["all", "any", "any_child", "any_adult"];

/// A 1-based source line. Never participates in equality, so parsed values
/// compare structurally.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span(pub usize);

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Adult,
    Child,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Adult => "adult",
            Role::Child => "child",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyMember {
    pub id: String,
    pub role: Role,
    pub line: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recipients {
    All,
    Members(Vec<String>),
}

impl Recipients {
    pub fn includes(&self, member: &str) -> bool {
        match self {
            Recipients::All => true,
            Recipients::Members(ms) => ms.iter().any(|m| m == member),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionSpec {
    Speak { text: String },
    /// Locate `target` first, then speak.
    SeekThenSpeak { target: String, text: String },
}

impl ActionSpec {
    pub fn text(&self) -> &str {
        match self {
            ActionSpec::Speak { text } | ActionSpec::SeekThenSpeak { text, .. } => text,
        }
    }

    pub fn seek_target(&self) -> Option<&str> {
        match self {
            ActionSpec::Speak { .. } => None,
            ActionSpec::SeekThenSpeak { target, .. } => Some(target),
        }
    }
}

/// Source lines of a reminder's fields, keyed by field keyword.
#[derive(Debug, Clone, Default)]
pub struct FieldLines(BTreeMap<&'static str, usize>);

impl FieldLines {
    pub fn set(&mut self, field: &'static str, line: usize) {
        self.0.insert(field, line);
    }

    /// Line of `field`, falling back to the `reminder` header line.
    pub fn get(&self, field: &str) -> usize {
        self.0.get(field).or_else(|| self.0.get("reminder")).copied().unwrap_or(0)
    }
}

impl PartialEq for FieldLines {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for FieldLines {}

/// One contextual reminder. Every trigger and cadence parameter lives here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReminderSpec {
    pub id: String,
    /// Intended recipients.
    pub recipients: Recipients,
    /// Time range in which the reminder may fire.
    pub window: TimeWindow,
    /// Household areas where the trigger condition is watched.
    pub locations: Vec<String>,
    /// Environment state that must hold.
    pub predicate: Predicate,
    pub action: ActionSpec,
    /// Minutes the trigger condition must persist before the robot acts.
    pub dwell_min: u32,
    /// Minimum minutes between two deliveries of this reminder.
    pub repeat_min: u32,
    /// Maximum deliveries per day.
    pub daily_max: u32,
    pub lines: FieldLines,
}

impl ReminderSpec {
    pub fn is_scheduled_on(&self, day: u32) -> bool {
        self.window.days.contains(day)
    }

    pub fn in_window(&self, t: SimTime) -> bool {
        self.window.contains(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub map_ref: Option<String>,
    pub roster: Vec<FamilyMember>,
    pub reminders: Vec<ReminderSpec>,
}

impl Plan {
    pub fn member(&self, id: &str) -> Option<&FamilyMember> {
        self.roster.iter().find(|m| m.id == id)
    }

    pub fn reminder(&self, id: &str) -> Option<&ReminderSpec> {
        self.reminders.iter().find(|r| r.id == id)
    }

    /// Roster member ids in roster order.
    pub fn member_ids(&self) -> Vec<&str> {
        self.roster.iter().map(|m| m.id.as_str()).collect()
    }

    /// Activity and object tags referenced anywhere in the plan.
    pub fn vocabulary(&self) -> Vocabulary {
        let mut v = Vocabulary::default();
        for r in &self.reminders {
            v.activities.extend(r.predicate.activity_tags().into_iter().map(String::from));
            v.objects.extend(r.predicate.object_tags().into_iter().map(String::from));
        }
        v
    }
}

/// Tags a plan refers to; perception errors are injected only over these.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pub activities: BTreeSet<String>,
    pub objects: BTreeSet<String>,
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_plan(self))
    }
}
