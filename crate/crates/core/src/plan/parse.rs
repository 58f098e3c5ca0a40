use std::collections::BTreeSet;

use super::diag::{finish, Diagnostic, Parsed};
use super::lex::{self, is_identifier, Line, Token};
use super::{
    validate_plan, ActionSpec, FamilyMember, FieldLines, HomeMap, Plan, Predicate, Recipients, ReminderSpec, Role,
    Span,
};
use crate::time::{parse_clock_allowing_midnight_end, DaySet, TimeWindow};

pub const DEFAULT_DWELL: u32 = 0;
pub const DEFAULT_REPEAT: u32 = 30;
pub const DEFAULT_DAILY_MAX: u32 = 1;

/// Parses a `.plan` file and validates it against `map`.
///
/// Syntax errors are reported alone; a syntactically clean plan is then run
/// through [`validate_plan`] and returned only if that yields no errors.
pub fn parse_plan(text: &str, map: &HomeMap) -> Result<Parsed<Plan>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let lines = lex::lines(text, &mut diags);
    let Some(body) = lex::expect_header(&lines, "plan", &mut diags) else {
        return Err(diags);
    };

    let mut plan = Plan { map_ref: None, roster: Vec::new(), reminders: Vec::new() };
    let mut i = 0;
    while i < body.len() {
        let line = &body[i];
        i += 1;
        match line.word(0) {
            Some("map") => match (&line.tokens[1..], plan.map_ref.is_some()) {
                ([Token::Word(w) | Token::Quoted(w)], false) => plan.map_ref = Some(w.clone()),
                (_, true) => diags.push(line.syntax("map declared twice")),
                _ => diags.push(line.syntax("expected `map <filename>`")),
            },
            Some("member") => {
                let role = match line.word(2) {
                    Some("adult") => Some(Role::Adult),
                    Some("child") => Some(Role::Child),
                    _ => None,
                };
                match (line.word(1).filter(|w| is_identifier(w)), role, line.tokens.len()) {
                    (Some(id), Some(role), 3) => {
                        plan.roster.push(FamilyMember { id: id.to_string(), role, line: Span(line.number) })
                    }
                    _ => diags.push(line.syntax("expected `member <id> adult|child`")),
                }
            }
            Some("reminder") => {
                let end = body[i..].iter().position(|l| l.word(0) == Some("end") && l.tokens.len() == 1);
                let block_end = end.map_or(body.len(), |e| i + e);
                if end.is_none() {
                    diags.push(line.syntax("reminder block is missing `end`"));
                }
                if let Some(r) = parse_reminder(line, &body[i..block_end], &mut diags) {
                    plan.reminders.push(r);
                }
                i = block_end + 1;
            }
            _ => diags.push(line.syntax("unknown declaration")),
        }
    }

    if !diags.is_empty() {
        super::sort_diagnostics(&mut diags);
        return Err(diags);
    }
    let diags = validate_plan(&plan, map);
    finish(plan, diags)
}

fn parse_reminder(header: &Line, fields: &[Line], diags: &mut Vec<Diagnostic>) -> Option<ReminderSpec> {
    let before = diags.len();
    let id = match (header.word(1).filter(|w| is_identifier(w)), header.tokens.len()) {
        (Some(id), 2) => id.to_string(),
        _ => {
            diags.push(header.syntax("expected `reminder <id>`"));
            String::new()
        }
    };
    let mut lines = FieldLines::default();
    lines.set("reminder", header.number);

    let mut recipients = None;
    let mut window = None;
    let mut locations = None;
    let mut predicate = None;
    let mut action = None;
    let mut dwell = None;
    let mut repeat = None;
    let mut max = None;

    for line in fields {
        let Some(kw) = line.word(0) else {
            diags.push(line.syntax("expected a field keyword"));
            continue;
        };
        let field: &'static str = match kw {
            "recipients" => "recipients",
            "window" => "window",
            "at" => "at",
            "when" => "when",
            "action" => "action",
            "dwell" => "dwell",
            "repeat" => "repeat",
            "max" => "max",
            other => {
                diags.push(line.syntax(format!("unknown reminder field `{other}`")));
                continue;
            }
        };
        lines.set(field, line.number);
        let args = &line.tokens[1..];
        let parsed = match field {
            "recipients" => set_once(&mut recipients, parse_recipients(args)),
            "window" => set_once(&mut window, parse_window(args)),
            "at" => set_once(&mut locations, parse_locations(args)),
            "when" => set_once(&mut predicate, parse_when(args)),
            "action" => set_once(&mut action, parse_action(args)),
            "dwell" => set_once(&mut dwell, parse_minutes(args)),
            "repeat" => set_once(&mut repeat, parse_minutes(args)),
            _ => set_once(&mut max, parse_minutes(args)),
        };
        if let Err(msg) = parsed {
            diags.push(line.syntax(format!("{field}: {msg}")));
        }
    }

    for (name, missing) in [
        ("recipients", recipients.is_none()),
        ("window", window.is_none()),
        ("at", locations.is_none()),
        ("when", predicate.is_none()),
        ("action", action.is_none()),
    ] {
        if missing && diags.len() == before {
            diags.push(header.syntax(format!("reminder `{id}` is missing `{name}`")));
        }
    }
    if diags.len() > before {
        return None;
    }
    Some(ReminderSpec {
        id,
        recipients: recipients?,
        window: window?,
        locations: locations?,
        predicate: predicate?,
        action: action?,
        dwell_min: dwell.unwrap_or(DEFAULT_DWELL),
        repeat_min: repeat.unwrap_or(DEFAULT_REPEAT),
        daily_max: max.unwrap_or(DEFAULT_DAILY_MAX),
        lines,
    })
}

fn set_once<T>(slot: &mut Option<T>, value: Result<T, String>) -> Result<(), String> {
    if slot.is_some() {
        return Err("field given twice".into());
    }
    *slot = Some(value?);
    Ok(())
}

fn words(args: &[Token]) -> Result<Vec<&str>, String> {
    args.iter().map(|t| t.word().ok_or_else(|| "unexpected string".to_string())).collect()
}

fn parse_recipients(args: &[Token]) -> Result<Recipients, String> {
    match words(args)?.as_slice() {
        [] => Err("expected `all` or member ids".into()),
        ["all"] => Ok(Recipients::All),
        ids => {
            if let Some(bad) = ids.iter().find(|w| !is_identifier(w) || **w == "all") {
                return Err(format!("`{bad}` is not a member id"));
            }
            Ok(Recipients::Members(ids.iter().map(|s| s.to_string()).collect()))
        }
    }
}

fn parse_window(args: &[Token]) -> Result<TimeWindow, String> {
    let ws = words(args)?;
    let (range, days) = ws.split_first().ok_or("expected `HH:MM-HH:MM`")?;
    let (a, b) = range.split_once('-').ok_or("expected `HH:MM-HH:MM`")?;
    let start = parse_clock_allowing_midnight_end(a).ok_or_else(|| format!("bad start time `{a}`"))?;
    let end = parse_clock_allowing_midnight_end(b).ok_or_else(|| format!("bad end time `{b}`"))?;
    let days = match days {
        [] | ["daily"] => DaySet::Daily,
        ["days", rest @ ..] if !rest.is_empty() => {
            let mut set = BTreeSet::new();
            for d in rest {
                set.insert(lex::parse_count(d).ok_or_else(|| format!("bad day `{d}`"))?);
            }
            DaySet::Days(set)
        }
        _ => return Err("expected `daily` or `days <n>...` after the time range".into()),
    };
    Ok(TimeWindow { start, end, days })
}

fn parse_locations(args: &[Token]) -> Result<Vec<String>, String> {
    let ws = words(args)?;
    if ws.is_empty() {
        return Err("expected at least one location".into());
    }
    if let Some(bad) = ws.iter().find(|w| !is_identifier(w)) {
        return Err(format!("`{bad}` is not a location id"));
    }
    Ok(ws.into_iter().map(String::from).collect())
}

fn parse_when(args: &[Token]) -> Result<Predicate, String> {
    words(args)?.join(" ").parse()
}

fn parse_action(args: &[Token]) -> Result<ActionSpec, String> {
    match args {
        [Token::Word(k), Token::Quoted(text)] if k == "speak" => Ok(ActionSpec::Speak { text: text.clone() }),
        [Token::Word(k), Token::Word(target), Token::Quoted(text)] if k == "seek_then_speak" && is_identifier(target) => {
            Ok(ActionSpec::SeekThenSpeak { target: target.clone(), text: text.clone() })
        }
        _ => Err("expected `speak \"text\"` or `seek_then_speak <member> \"text\"`".into()),
    }
}

fn parse_minutes(args: &[Token]) -> Result<u32, String> {
    match words(args)?.as_slice() {
        [n] => lex::parse_count(n).ok_or_else(|| format!("`{n}` is not a non-negative integer")),
        _ => Err("expected one integer".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{parse_map, Code};

    fn map() -> HomeMap {
        parse_map(
            "map v1\nlocation kitchen\nlocation dining_table\nlocation living_room\ndock kitchen\n\
             edge kitchen dining_table 1\nedge dining_table living_room 2\n",
        )
        .unwrap()
        .value
    }

    const HOMEWORK: &str = r#"plan v1
map home.map
member son child
member daughter child
member mom adult

reminder homework_sep
  recipients son daughter
  window 18:00-21:00
  at dining_table
  when all(doing(son,homework), doing(daughter,homework))
  action speak "Would you like to do homework separately?"
end
"#;

    fn codes(text: &str) -> Vec<Code> {
        parse_plan(text, &map()).err().unwrap().into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn evening_homework_reminder() {
        let plan = parse_plan(HOMEWORK, &map()).unwrap().value;
        assert_eq!(plan.map_ref.as_deref(), Some("home.map"));
        let r = &plan.reminders[0];
        assert_eq!((r.window.start, r.window.end), (18 * 60, 21 * 60));
        assert_eq!(r.locations, vec!["dining_table"]);
        assert_eq!(r.predicate.to_string(), "all(doing(son, homework), doing(daughter, homework))");
        assert_eq!((r.dwell_min, r.repeat_min, r.daily_max), (DEFAULT_DWELL, DEFAULT_REPEAT, DEFAULT_DAILY_MAX));
        assert_eq!(r.lines.get("when"), 11);
    }

    #[test]
    fn overnight_window_rejected() {
        let err = parse_plan(&HOMEWORK.replace("18:00-21:00", "22:00-06:00"), &map()).err().unwrap();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].code, Code::BadWindow);
        assert_eq!(err[0].line, 9);
    }

    #[test]
    fn unknown_location_reported_with_line() {
        let err = parse_plan(&HOMEWORK.replace("at dining_table", "at garage"), &map()).err().unwrap();
        assert_eq!(err.len(), 1);
        assert_eq!((err[0].code, err[0].line), (Code::UnknownLocation, 10));
    }

    #[test]
    fn unknown_member_in_predicate() {
        assert_eq!(codes(&HOMEWORK.replace("doing(son,", "doing(dad,")), vec![Code::UnknownMember]);
    }

    #[test]
    fn syntax_errors() {
        assert_eq!(codes(&HOMEWORK.replace("end\n", "")), vec![Code::SyntaxError]);
        assert_eq!(codes(&HOMEWORK.replace("  window 18:00-21:00\n", "")), vec![Code::SyntaxError]);
        assert_eq!(codes(&HOMEWORK.replace("window 18:00-21:00", "window 18:00")), vec![Code::SyntaxError]);
        assert_eq!(codes(&HOMEWORK.replace("speak \"", "shout \"")), vec![Code::SyntaxError]);
        assert_eq!(codes(&HOMEWORK.replace("member mom adult", "member mom parent")), vec![Code::SyntaxError]);
        assert_eq!(codes(&HOMEWORK.replace("plan v1", "plan")), vec![Code::SyntaxError]);
        assert_eq!(codes("plan v1\nmember a child\nbogus\n"), vec![Code::SyntaxError]);
    }

    #[test]
    fn optional_fields_and_day_sets() {
        let text = HOMEWORK
            .replace("18:00-21:00", "18:00-21:00 days 3 1")
            .replace("end\n", "  dwell 10\n  repeat 15\n  max 2\nend\n");
        let r = &parse_plan(&text, &map()).unwrap().value.reminders[0];
        assert_eq!(r.window.days, DaySet::Days([1, 3].into()));
        assert_eq!((r.dwell_min, r.repeat_min, r.daily_max), (10, 15, 2));
    }
}
