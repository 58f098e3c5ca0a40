use std::collections::BTreeSet;

use super::diag::{sort_diagnostics, Code, Diagnostic};
use super::lex::is_tag;
use super::predicate::MAX_DEPTH;
use super::{HomeMap, Plan, Recipients, RESERVED_IDS};

/// Static checks over a structurally parsed plan. Returns an empty list iff
/// every plan invariant holds; output is sorted by `(line, code)`.
pub fn validate_plan(plan: &Plan, map: &HomeMap) -> Vec<Diagnostic> {
    let mut d = Vec::new();

    if plan.roster.is_empty() {
        d.push(Diagnostic::new(1, Code::EmptyRoster, "plan declares no family members"));
    }
    let mut members = BTreeSet::new();
    for m in &plan.roster {
        if RESERVED_IDS.contains(&m.id.as_str()) {
            d.push(Diagnostic::new(m.line.0, Code::ReservedIdentifier, format!("`{}` is reserved", m.id)));
        }
        if !members.insert(m.id.as_str()) {
            d.push(Diagnostic::new(m.line.0, Code::DuplicateMember, format!("member `{}` declared twice", m.id)));
        }
    }

    let mut ids = BTreeSet::new();
    for r in &plan.reminders {
        let at = |field: &str| r.lines.get(field);
        if !ids.insert(r.id.as_str()) {
            d.push(Diagnostic::new(at("reminder"), Code::DuplicateReminderId, format!("reminder id `{}` used twice", r.id)));
        }

        if r.window.is_valid() {
            if r.dwell_min >= r.window.len() {
                d.push(Diagnostic::new(
                    at("dwell"),
                    Code::DwellExceedsWindow,
                    format!("dwell {} min does not fit in a {} min window", r.dwell_min, r.window.len()),
                ));
            }
        } else {
            d.push(Diagnostic::new(
                at("window"),
                Code::BadWindow,
                "window must satisfy start < end <= 24:00 on days >= 1 and may not span midnight",
            ));
        }
        if r.repeat_min < 1 {
            d.push(Diagnostic::new(at("repeat"), Code::BadRepeat, "repeat interval must be at least 1 minute"));
        }
        if r.daily_max < 1 {
            d.push(Diagnostic::new(at("max"), Code::BadDailyMax, "daily maximum must be at least 1"));
        }

        if r.locations.is_empty() {
            d.push(Diagnostic::new(at("at"), Code::UnknownLocation, "reminder has no locations"));
        }
        for loc in &r.locations {
            if !map.has_location(loc) {
                d.push(Diagnostic::new(at("at"), Code::UnknownLocation, format!("location `{loc}` is not on the map")));
            }
        }

        if let Recipients::Members(ms) = &r.recipients {
            for m in ms {
                if !members.contains(m.as_str()) {
                    d.push(Diagnostic::new(at("recipients"), Code::UnknownMember, format!("recipient `{m}` is not in the roster")));
                }
            }
        }
        for m in r.predicate.members() {
            if !members.contains(m) {
                d.push(Diagnostic::new(at("when"), Code::UnknownMember, format!("predicate names unknown member `{m}`")));
            }
        }
        if let Some(target) = r.action.seek_target() {
            if !members.contains(target) {
                d.push(Diagnostic::new(at("action"), Code::UnknownMember, format!("seek target `{target}` is not in the roster")));
            }
        }
        for tag in r.predicate.activity_tags().into_iter().chain(r.predicate.object_tags()) {
            if !is_tag(tag) {
                d.push(Diagnostic::new(at("when"), Code::BadTag, format!("tag `{tag}` must be a lowercase identifier")));
            }
        }
        if r.predicate.depth() > MAX_DEPTH {
            d.push(Diagnostic::new(
                at("when"),
                Code::DepthExceeded,
                format!("predicate depth {} exceeds {MAX_DEPTH}", r.predicate.depth()),
            ));
        }

        if let Recipients::Members(ms) = &r.recipients {
            let subjects = r.predicate.members();
            if !subjects.is_empty() && !subjects.iter().any(|s| ms.iter().any(|m| m == s)) {
                d.push(Diagnostic::new(
                    at("when"),
                    Code::RecipientPredicateDivergence,
                    "predicate names none of the reminder's recipients",
                ));
            }
        }
    }

    sort_diagnostics(&mut d);
    d
}
