use std::fmt::Write;

use super::lex::quote;
use super::{ActionSpec, Plan, Recipients};
use crate::time::{Clock, DaySet};

/// Canonical `.plan` text: one declaration per line, lowercase keywords, LF endings.
pub fn serialize_plan(plan: &Plan) -> String {
    let mut out = String::from("plan v1\n");
    if let Some(m) = &plan.map_ref {
        if is_bare_path(m) {
            let _ = writeln!(out, "map {m}");
        } else {
            let _ = writeln!(out, "map {}", quote(m));
        }
    }
    for m in &plan.roster {
        let _ = writeln!(out, "member {} {}", m.id, m.role.as_str());
    }
    for r in &plan.reminders {
        out.push('\n');
        let _ = writeln!(out, "reminder {}", r.id);
        let recipients = match &r.recipients {
            Recipients::All => "all".to_string(),
            Recipients::Members(ms) => ms.join(" "),
        };
        let _ = writeln!(out, "  recipients {recipients}");
        let days = match &r.window.days {
            DaySet::Daily => "daily".to_string(),
            DaySet::Days(ds) => {
                let ds: Vec<String> = ds.iter().map(u32::to_string).collect();
                format!("days {}", ds.join(" "))
            }
        };
        let _ = writeln!(out, "  window {}-{} {days}", Clock(r.window.start), Clock(r.window.end));
        let _ = writeln!(out, "  at {}", r.locations.join(" "));
        let _ = writeln!(out, "  when {}", r.predicate);
        match &r.action {
            ActionSpec::Speak { text } => {
                let _ = writeln!(out, "  action speak {}", quote(text));
            }
            ActionSpec::SeekThenSpeak { target, text } => {
                let _ = writeln!(out, "  action seek_then_speak {target} {}", quote(text));
            }
        }
        let _ = writeln!(out, "  dwell {}", r.dwell_min);
        let _ = writeln!(out, "  repeat {}", r.repeat_min);
        let _ = writeln!(out, "  max {}", r.daily_max);
        out.push_str("end\n");
    }
    out
}

/// File names made of identifier characters plus `.`, `/` and `-` are written bare.
fn is_bare_path(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '/' | '-'))
}
