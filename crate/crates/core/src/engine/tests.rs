use super::*;
use crate::perception::{PersonObs, Stage1};
use crate::plan::{parse_map, parse_plan};

const MAP: &str = "map v1
location kitchen
location dining_table
location living
location hallway
dock kitchen
edge kitchen dining_table 1
edge kitchen living 2
edge living hallway 1
";

fn map() -> HomeMap {
    parse_map(MAP).unwrap().value
}

fn plan(text: &str) -> Plan {
    parse_plan(text, &map()).unwrap().value
}

fn reminder(id: &str, window: &str, at: &str, when: &str, extra: &str) -> String {
    format!(
        "reminder {id}\n  recipients all\n  window {window} daily\n  at {at}\n  when {when}\n  action speak \"{id}\"\n{extra}end\n"
    )
}

fn engine(body: &str) -> Engine {
    let text = format!("plan v1\nmember mom adult\nmember kidA child\nmember kidB child\n{body}");
    Engine::new(&plan(&text), &map(), EngineConfig::default())
}

fn at(h: u32, m: u32) -> SimTime {
    SimTime::new(1, h * 60 + m).unwrap()
}

fn snap(now: SimTime, loc: &str, people: &[(&str, &[&str])]) -> EngineEvent {
    let persons: Vec<PersonObs> = people
        .iter()
        .map(|(m, acts)| PersonObs { member: m.to_string(), activities: acts.iter().map(|a| a.to_string()).collect() })
        .collect();
    let scene = Scene { location: loc.to_string(), persons, objects: BTreeSet::new() };
    EngineEvent::SnapshotResult(SnapshotRecord {
        time: now,
        location: loc.to_string(),
        stage1: Stage1 { person_count: scene.person_count(), objects: BTreeSet::new() },
        perceived: Some(scene),
    })
}

fn kinds(t: &Transition) -> Vec<&'static str> {
    t.records.iter().map(|r| r.kind.name()).collect()
}

const HOMEWORK: &str = "all(doing(kidA, homework), doing(kidB, homework))";

#[test]
fn no_active_reminders_means_dock() {
    let e = engine(&reminder("homework_sep", "18:00-21:00", "dining_table", HOMEWORK, ""));
    assert_eq!(e.schedule_next(at(10, 0)), Command::Dock);
}

#[test]
fn one_active_reminder_sends_robot_to_its_location() {
    let e = engine(&reminder("homework_sep", "18:00-21:00", "dining_table", HOMEWORK, ""));
    assert_eq!(
        e.schedule_next(at(18, 5)),
        Command::Goto { location: "dining_table".into(), purpose: Purpose::Patrol }
    );
}

#[test]
fn least_recently_observed_location_wins() {
    let body = reminder("a", "18:00-21:00", "dining_table", "present(any)", "")
        + &reminder("b", "18:00-21:00", "living", "present(any)", "");
    let mut e = engine(&body);
    e.handle_event(at(18, 10), snap(at(18, 10), "living", &[]));
    e.handle_event(at(18, 18), snap(at(18, 18), "dining_table", &[]));
    assert_eq!(e.schedule_next(at(18, 20)), Command::Goto { location: "living".into(), purpose: Purpose::Patrol });
}

#[test]
fn never_observed_beats_observed_then_earliest_window_end() {
    let body = reminder("a", "18:00-21:00", "dining_table", "present(any)", "")
        + &reminder("b", "18:00-20:00", "living", "present(any)", "");
    let e = engine(&body);
    assert_eq!(e.schedule_next(at(18, 0)), Command::Goto { location: "living".into(), purpose: Purpose::Patrol });
}

#[test]
fn scheduling_ignores_plan_order() {
    let a = reminder("a", "18:00-21:00", "dining_table", "present(any)", "");
    let b = reminder("b", "18:00-21:00", "living", "present(any)", "");
    let forward = engine(&(a.clone() + &b));
    let backward = engine(&(b + &a));
    for h in [17, 18, 19, 20] {
        assert_eq!(forward.schedule_next(at(h, 30)), backward.schedule_next(at(h, 30)));
    }
}

#[test]
fn already_stationed_means_snapshot() {
    let mut e = engine(&reminder("a", "18:00-21:00", "kitchen", "present(any)", ""));
    e.handle_event(at(18, 0), EngineEvent::Arrived("kitchen".into()));
    assert!(matches!(e.schedule_next(at(18, 1)), Command::TakeSnapshot(_)));
}

#[test]
fn arrival_at_watched_location_takes_snapshot() {
    let mut e = engine(&reminder("homework_sep", "18:00-21:00", "dining_table", HOMEWORK, ""));
    let t = e.handle_event(at(18, 15), EngineEvent::Arrived("dining_table".into()));
    assert_eq!(t.commands.len(), 1);
    assert!(matches!(&t.commands[0], Command::TakeSnapshot(s) if s.persons));
}

#[test]
fn true_snapshot_with_zero_dwell_speaks() {
    let mut e = engine(&reminder("homework_sep", "18:00-21:00", "dining_table", HOMEWORK, ""));
    let kids: &[(&str, &[&str])] = &[("kidA", &["homework"]), ("kidB", &["homework"])];
    let t = e.handle_event(at(18, 15), snap(at(18, 15), "dining_table", kids));
    assert_eq!(
        t.commands,
        vec![Command::Speak {
            reminder: "homework_sep".into(),
            recipients: vec!["kidA".into(), "kidB".into()],
            text: "homework_sep".into()
        }]
    );
    assert_eq!(e.ledger().count_on("homework_sep", 1), 1);
}

#[test]
fn dwell_must_elapse_before_speaking() {
    let mut e = engine(&reminder("homework_sep", "18:00-21:00", "dining_table", HOMEWORK, "  dwell 3\n  max 2\n"));
    let kids: &[(&str, &[&str])] = &[("kidA", &["homework"]), ("kidB", &["homework"])];
    for m in 15..18 {
        e.handle_event(at(18, m), EngineEvent::Tick);
        let t = e.handle_event(at(18, m), snap(at(18, m), "dining_table", kids));
        assert!(t.commands.is_empty(), "spoke early at 18:{m}");
    }
    e.handle_event(at(18, 18), EngineEvent::Tick);
    let t = e.handle_event(at(18, 18), snap(at(18, 18), "dining_table", kids));
    assert_eq!(kinds(&t), ["delivered"]);
}

#[test]
fn navigation_failure_asks_for_help() {
    let mut e = engine(&reminder("a", "18:00-21:00", "hallway", "present(any)", ""));
    let t = e.handle_event(
        at(18, 3),
        EngineEvent::NavFailed { target: "hallway".into(), at: "living".into(), reason: NavFailure::Blocked },
    );
    assert_eq!(kinds(&t), ["nav_failed", "help_request"]);
    assert_eq!(e.schedule_next(at(18, 4)), Command::Dock);
}

#[test]
fn speak_with_nobody_addressed_is_suppressed() {
    let text = "reminder a\n  recipients kidA\n  window 18:00-21:00 daily\n  at living\n  when present(any)\n  action speak \"x\"\nend\n";
    let mut e = engine(text);
    let t = e.handle_event(at(18, 0), snap(at(18, 0), "living", &[("mom", &[])]));
    assert!(matches!(
        &t.records[..],
        [LogRecord { kind: RecordKind::Suppressed { reason: SuppressReason::NoRecipient, .. }, .. }]
    ));
}

fn bedtime(extra: &str) -> Engine {
    engine(&(reminder("bedtime", "20:00-21:00", "living", "present(any)", extra)))
}

#[test]
fn first_delivery_counts_one() {
    let mut e = bedtime("  max 2\n");
    let (shown, _) = e.checkin("kidA", at(20, 5));
    assert_eq!(shown, vec![("bedtime".to_string(), "bedtime".to_string())]);
    assert_eq!(e.ledger().count_on("bedtime", 1), 1);
}

#[test]
fn delivery_inside_repeat_interval_is_cooldown() {
    let mut e = bedtime("  repeat 10\n  max 3\n");
    e.checkin("kidA", at(20, 0));
    let (shown, t) = e.checkin("kidB", at(20, 5));
    assert!(shown.is_empty());
    assert!(matches!(t.records[1].kind, RecordKind::Suppressed { reason: SuppressReason::Cooldown, .. }));
    assert_eq!(e.checkin("kidB", at(20, 10)).0.len(), 1);
}

#[test]
fn delivery_beyond_daily_max_is_exhausted() {
    let mut e = bedtime("  repeat 1\n  max 1\n");
    e.checkin("kidA", at(20, 0));
    let (_, t) = e.checkin("kidA", at(20, 30));
    assert!(matches!(t.records[1].kind, RecordKind::Suppressed { reason: SuppressReason::Exhausted, .. }));
    assert!(!e.is_active(0, at(20, 31)));
}

#[test]
fn checkin_shows_pending_reminder() {
    let mut e = bedtime("  max 2\n");
    let (shown, t) = e.checkin("kidA", at(20, 15));
    assert_eq!(shown.len(), 1);
    assert_eq!(kinds(&t), ["checkin", "delivered"]);
    assert_eq!(e.ledger().deliveries("bedtime")[0].mode, DeliveryMode::Checkin);
}

#[test]
fn checkin_with_nothing_pending_is_empty() {
    let mut e = bedtime("");
    assert!(e.checkin("kidA", at(12, 0)).0.is_empty());
}

#[test]
fn checkin_respects_addressee() {
    let text = "reminder chores\n  recipients kidA\n  window 18:00-21:00 daily\n  at living\n  when always\n  action speak \"x\"\nend\n";
    let mut e = engine(text);
    assert!(e.checkin("mom", at(19, 0)).0.is_empty());
    assert_eq!(e.checkin("kidA", at(19, 0)).0.len(), 1);
}

#[test]
fn checkin_works_in_privacy() {
    let mut e = bedtime("");
    e.handle_event(at(20, 0), EngineEvent::PrivacyRequest(PrivacyRequest::OnFor(60)));
    assert_eq!(e.checkin("kidA", at(20, 10)).0.len(), 1);
}

#[test]
fn message_board_round_trip() {
    let mut e = bedtime("");
    let t = e.handle_event(
        at(9, 0),
        EngineEvent::MessagePost { from: "mom".into(), to: Addressee::Member("kidA".into()), text: "chores".into() },
    );
    assert_eq!(kinds(&t), ["message"]);
    let read = |e: &mut Engine, who: &str| e.handle_event(at(9, 5), EngineEvent::CheckMessages(who.into())).records;
    assert!(matches!(read(&mut e, "kidB")[0].kind, RecordKind::MessageRead { count: 0, .. }));
    assert!(matches!(read(&mut e, "kidA")[0].kind, RecordKind::MessageRead { count: 1, unread: 1, .. }));
    assert!(matches!(read(&mut e, "kidA")[0].kind, RecordKind::MessageRead { count: 1, unread: 0, .. }));
}

#[test]
fn privacy_blocks_sensing_and_speaking() {
    let mut e = engine(&reminder("a", "13:00-15:00", "living", "present(any)", ""));
    let t = e.handle_event(at(13, 0), EngineEvent::PrivacyRequest(PrivacyRequest::OnFor(60)));
    assert!(matches!(t.records[0].kind, RecordKind::Privacy(PrivacyTransition::Enter { until: Some(u), .. }) if u == at(14, 0)));
    assert_eq!(e.schedule_next(at(13, 30)), Command::Dock);
    let t = e.handle_event(at(13, 30), snap(at(13, 30), "living", &[("mom", &[])]));
    assert!(t.commands.is_empty() && t.records.is_empty());
    let t = e.handle_event(at(14, 0), EngineEvent::Tick);
    assert_eq!(kinds(&t), ["privacy"]);
    assert!(!e.is_private());
}

#[test]
fn rest_of_day_privacy_lasts_until_midnight() {
    let mut e = engine(&reminder("a", "13:00-15:00", "living", "present(any)", ""));
    e.handle_event(at(13, 0), EngineEvent::PrivacyRequest(PrivacyRequest::OnRestOfDay));
    assert_eq!(e.privacy().until(), Some(SimTime::start_of_day(2)));
}

#[test]
fn off_ends_manual_privacy_at_once() {
    let mut e = engine(&reminder("a", "13:00-15:00", "living", "present(any)", ""));
    e.handle_event(at(13, 0), EngineEvent::PrivacyRequest(PrivacyRequest::OnFor(60)));
    e.handle_event(at(13, 10), EngineEvent::PrivacyRequest(PrivacyRequest::Off));
    assert!(!e.is_private());
    assert!(matches!(e.schedule_next(at(13, 10)), Command::Goto { .. }));
}

#[test]
fn auto_privacy_after_last_window_until_next_morning() {
    let body = reminder("morning", "08:30-10:30", "kitchen", "present(any)", "")
        + &reminder("night", "20:00-21:40", "living", "present(any)", "");
    let mut e = engine(&body);
    assert!(e.handle_event(at(14, 0), EngineEvent::Tick).records.is_empty());
    assert!(e.handle_event(at(21, 39), EngineEvent::Tick).records.is_empty());
    let t = e.handle_event(at(21, 40), EngineEvent::Tick);
    assert!(matches!(
        t.records[0].kind,
        RecordKind::Privacy(PrivacyTransition::Enter { cause: PrivacyCause::Auto, until: Some(u) })
            if u == SimTime::new(2, 8 * 60 + 15).unwrap()
    ));
    let t = e.handle_event(SimTime::new(2, 8 * 60 + 15).unwrap(), EngineEvent::Tick);
    assert_eq!(kinds(&t), ["privacy"]);
    assert!(!e.is_private());
}

#[test]
fn auto_privacy_once_everything_is_exhausted() {
    let mut e = bedtime("  max 1\n");
    let t = e.handle_event(at(20, 0), snap(at(20, 0), "living", &[("kidA", &[])]));
    assert_eq!(kinds(&t), ["delivered", "privacy"]);
    assert!(e.is_private());
}

#[test]
fn seek_visits_each_location_once_then_gives_up() {
    let text = "reminder call\n  recipients all\n  window 18:00-21:00 daily\n  at kitchen\n  when present(any)\n  action seek_then_speak kidA \"dinner\"\n  max 2\nend\n";
    let mut e = engine(text);
    let t = e.handle_event(at(18, 0), snap(at(18, 0), "kitchen", &[("mom", &[])]));
    // mom is a recipient and present, so the reminder is spoken directly.
    assert_eq!(kinds(&t), ["delivered"]);

    let text = text.replace("recipients all", "recipients kidA");
    let mut e = engine(&text);
    let t = e.handle_event(at(18, 0), snap(at(18, 0), "kitchen", &[("mom", &[])]));
    assert_eq!(kinds(&t), ["seek"]);
    let mut visited = vec!["kitchen".to_string()];
    let mut cmds = t.commands;
    let mut minute = 1;
    while let Some(Command::Goto { location, purpose: Purpose::Seek }) = cmds.pop() {
        assert!(!visited.contains(&location), "revisited {location}");
        visited.push(location.clone());
        e.handle_event(at(18, minute), EngineEvent::Tick);
        e.handle_event(at(18, minute), EngineEvent::Arrived(location.clone()));
        cmds = e.handle_event(at(18, minute), snap(at(18, minute), &location, &[])).commands;
        minute += 1;
    }
    assert!(!e.is_seeking());
    assert_eq!(visited.len(), 4);
    assert_eq!(e.ledger().total(), 0);
}

#[test]
fn seek_times_out_without_delivering() {
    let text = "reminder call\n  recipients kidA\n  window 18:00-21:00 daily\n  at kitchen\n  when present(any)\n  action seek_then_speak kidA \"dinner\"\n  max 2\nend\n";
    let mut e = engine(text);
    e.handle_event(at(18, 0), snap(at(18, 0), "kitchen", &[("mom", &[])]));
    assert!(e.is_seeking());
    e.handle_event(at(18, 9), EngineEvent::Tick);
    assert!(e.is_seeking());
    let t = e.handle_event(at(18, 10), EngineEvent::Tick);
    assert!(!e.is_seeking());
    assert!(matches!(t.records[0].kind, RecordKind::Seek { phase: SeekPhase::Failed, .. }));
    assert_eq!(e.ledger().total(), 0);
}

#[test]
fn seek_finds_target_and_delivers() {
    let text = "reminder call\n  recipients kidA\n  window 18:00-21:00 daily\n  at kitchen\n  when present(any)\n  action seek_then_speak kidA \"dinner\"\n  max 2\nend\n";
    let mut e = engine(text);
    let t = e.handle_event(at(18, 0), snap(at(18, 0), "kitchen", &[("mom", &[])]));
    let Command::Goto { location, .. } = &t.commands[0] else { panic!("expected goto") };
    let loc = location.clone();
    e.handle_event(at(18, 2), EngineEvent::Arrived(loc.clone()));
    let t = e.handle_event(at(18, 2), snap(at(18, 2), &loc, &[("kidA", &[])]));
    assert_eq!(kinds(&t), ["seek", "delivered"]);
    assert_eq!(e.ledger().deliveries("call")[0].mode, DeliveryMode::Seek);
}

#[test]
fn identical_event_sequences_give_identical_output() {
    let run = || {
        let mut e = engine(&reminder("homework_sep", "18:00-21:00", "dining_table", HOMEWORK, "  dwell 2\n"));
        let kids: &[(&str, &[&str])] = &[("kidA", &["homework"]), ("kidB", &["homework"])];
        let mut all = Transition::default();
        for m in 0..30 {
            all.extend(e.handle_event(at(18, m), EngineEvent::Tick));
            all.extend(e.next_command(at(18, m)));
            all.extend(e.handle_event(at(18, m), snap(at(18, m), "dining_table", kids)));
        }
        all
    };
    assert_eq!(run(), run());
}
