use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use super::log::{EventLog, LogRecord, NavFailure, Purpose, RecordKind};
use super::nav::{attempt_dock, navigate};
use super::trace::{Trace, TraceAction};
use super::world::GroundWorld;
use crate::engine::{Command, Engine, EngineConfig, EngineEvent, Transition};
use crate::perception::{snapshot, Analyzer, ErrorModel};
use crate::plan::{HomeMap, Plan};
use crate::rng::SimRng;
use crate::time::{SimTime, MINUTES_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Travel times, battery, docking failures and perception errors apply.
    Realistic,
    /// Every active location is observed every minute without error;
    /// motion is instantaneous and the battery never drains.
    Omniscient,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Realistic => "realistic",
            Mode::Omniscient => "omniscient",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "realistic" => Ok(Mode::Realistic),
            "omniscient" => Ok(Mode::Omniscient),
            other => Err(format!("unknown mode `{other}` (expected realistic or omniscient)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Linear battery, in integer units per minute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatteryModel {
    pub capacity: u32,
    pub drain_moving: u32,
    pub drain_idle: u32,
    pub charge_rate: u32,
}

impl Default for BatteryModel {
    fn default() -> Self {
        Self { capacity: 480, drain_moving: 2, drain_idle: 1, charge_rate: 4 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub days: u32,
    pub battery: BatteryModel,
    pub p_dock: f64,
    pub errors: ErrorModel,
    pub mode: Mode,
    pub engine: EngineConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            days: 1,
            battery: BatteryModel::default(),
            p_dock: 0.9,
            errors: ErrorModel::ZERO,
            mode: Mode::Realistic,
            engine: EngineConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.days == 0 {
            return Err("days must be at least 1".into());
        }
        if self.battery.capacity == 0 {
            return Err("battery capacity must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.p_dock) {
            return Err("p_dock must be within [0, 1]".into());
        }
        if !self.errors.is_valid() {
            return Err("error-model probabilities must be within [0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Trip {
    path: Vec<String>,
    /// `arrivals[i]` is when `path[i]` is reached.
    arrivals: Vec<SimTime>,
    /// Index of the next node to reach.
    next: usize,
}

impl Trip {
    fn last_node(&self) -> &str {
        &self.path[self.next - 1]
    }
}

#[derive(Debug, Clone)]
enum Place {
    At(String),
    Travelling(Trip),
}

struct Body {
    place: Place,
    docked: bool,
    level: u32,
    online: bool,
}

impl Body {
    fn location(&self) -> &str {
        match &self.place {
            Place::At(l) => l,
            Place::Travelling(t) => t.last_node(),
        }
    }
}

/// Runs the minute-stepped simulation and returns the complete log.
///
/// Each minute: battery accounting for the minute just ended, trace world
/// events, an engine tick, screen events (check-ins, privacy, messages), then
/// observation and motion.
pub fn simulate(plan: &Plan, map: &HomeMap, trace: &Trace, cfg: &SimConfig) -> Result<EventLog, String> {
    cfg.validate()?;
    let vocab = plan.vocabulary();
    let errors = match cfg.mode {
        Mode::Realistic => cfg.errors,
        Mode::Omniscient => ErrorModel::ZERO,
    };
    let mut sim = Sim {
        cfg,
        map,
        trace,
        analyzer: Analyzer { roster: &plan.roster, vocab: &vocab, errors: &errors },
        engine: Engine::new(plan, map, cfg.engine),
        world: GroundWorld::new(SimTime::start_of_day(1)),
        rng: SimRng::new(cfg.seed),
        body: Body {
            place: Place::At(map.dock().to_string()),
            docked: true,
            level: cfg.battery.capacity,
            online: true,
        },
        records: Vec::new(),
        cursor: 0,
    };
    for abs in 0..cfg.days * MINUTES_PER_DAY {
        sim.step(SimTime::from_abs(abs));
    }
    sim.records.push(LogRecord::new(SimTime::start_of_day(cfg.days + 1), RecordKind::End));
    Ok(EventLog { records: sim.records })
}

struct Sim<'a> {
    cfg: &'a SimConfig,
    map: &'a HomeMap,
    trace: &'a Trace,
    analyzer: Analyzer<'a>,
    engine: Engine,
    world: GroundWorld,
    rng: SimRng,
    body: Body,
    records: Vec<LogRecord>,
    cursor: usize,
}

impl Sim<'_> {
    fn realistic(&self) -> bool {
        self.cfg.mode == Mode::Realistic
    }

    fn log(&mut self, now: SimTime, kind: RecordKind) {
        self.records.push(LogRecord::new(now, kind));
    }

    fn step(&mut self, now: SimTime) {
        self.world.set_time(now);
        if self.realistic() {
            self.account_battery(now);
        }

        let trace = self.trace;
        let start = self.cursor;
        while self.cursor < trace.events.len() && trace.events[self.cursor].time <= now {
            self.cursor += 1;
        }
        let events = &trace.events[start..self.cursor];
        for e in events.iter().filter(|e| e.action.is_world_event()) {
            self.world.apply(&e.action);
            if e.action == TraceAction::Rescue {
                self.rescue(now);
            }
        }

        let t = self.engine.handle_event(now, EngineEvent::Tick);
        self.run(now, t);

        if self.body.online {
            for e in events.iter().filter(|e| !e.action.is_world_event()) {
                let ev = match &e.action {
                    TraceAction::Checkin { member } => EngineEvent::Checkin(member.clone()),
                    TraceAction::Privacy(req) => EngineEvent::PrivacyRequest(*req),
                    TraceAction::Post { from, to, text } => {
                        EngineEvent::MessagePost { from: from.clone(), to: to.clone(), text: text.clone() }
                    }
                    TraceAction::Read { member } => EngineEvent::CheckMessages(member.clone()),
                    _ => unreachable!("world events are filtered out"),
                };
                let t = self.engine.handle_event(now, ev);
                self.run(now, t);
            }
        }

        match self.cfg.mode {
            Mode::Omniscient => self.observe_everything(now),
            Mode::Realistic if self.body.online => self.move_or_plan(now),
            Mode::Realistic => {}
        }
    }

    /// Charges or drains for the minute `[now - 1, now)`.
    fn account_battery(&mut self, now: SimTime) {
        let b = self.cfg.battery;
        let mut went_offline = false;
        if now.abs() > 0 && self.body.online {
            self.body.level = match (&self.body.place, self.body.docked) {
                (Place::Travelling(_), _) => self.body.level.saturating_sub(b.drain_moving),
                (Place::At(_), true) => (self.body.level + b.charge_rate).min(b.capacity),
                (Place::At(_), false) => self.body.level.saturating_sub(b.drain_idle),
            };
            went_offline = self.body.level == 0;
        }
        if now.minute().is_multiple_of(60) || went_offline {
            self.log(now, RecordKind::Battery { level: self.body.level, capacity: b.capacity });
        }
        if went_offline {
            let at = self.body.location().to_string();
            self.body.place = Place::At(at.clone());
            self.body.online = false;
            self.body.docked = false;
            self.log(now, RecordKind::Offline { location: at });
            let t = self.engine.handle_event(now, EngineEvent::Battery(0));
            self.run(now, t);
        }
    }

    fn rescue(&mut self, now: SimTime) {
        let dock = self.map.dock().to_string();
        self.log(now, RecordKind::Rescue { location: dock.clone() });
        if self.realistic() {
            self.body.place = Place::At(dock);
            self.body.docked = true;
            self.body.online = true;
            let t = self.engine.handle_event(now, EngineEvent::Rescued);
            self.run(now, t);
        }
    }

    fn observe_everything(&mut self, now: SimTime) {
        for loc in self.engine.active_locations(now) {
            if self.engine.is_private() {
                break;
            }
            if !self.engine.active_locations(now).contains(&loc) {
                continue;
            }
            self.body.place = Place::At(loc.clone());
            self.snapshot_here(now, self.engine.needed_at(&loc, now));
        }
    }

    fn move_or_plan(&mut self, now: SimTime) {
        let Place::Travelling(trip) = &mut self.body.place else {
            let t = self.engine.next_command(now);
            self.run(now, t);
            return;
        };
        if trip.arrivals[trip.next] > now {
            return;
        }
        let node = trip.path[trip.next].clone();
        trip.next += 1;
        if trip.next == trip.path.len() {
            self.body.place = Place::At(node.clone());
            self.log(now, RecordKind::Arrive { location: node.clone() });
            let t = self.engine.handle_event(now, EngineEvent::Arrived(node));
            self.run(now, t);
        } else if !self.world.is_open(&node, &trip.path[trip.next]) {
            let target = trip.path.last().expect("non-empty path").clone();
            self.body.place = Place::At(node.clone());
            let t = self
                .engine
                .handle_event(now, EngineEvent::NavFailed { target, at: node, reason: NavFailure::Blocked });
            self.run(now, t);
        }
    }

    fn snapshot_here(&mut self, now: SimTime, needed: crate::perception::AtomSummary) {
        let loc = self.body.location().to_string();
        let rec = snapshot(&self.world, &loc, &needed, &self.analyzer, &mut self.rng);
        self.log(
            now,
            RecordKind::Snapshot { location: loc, stage1: rec.stage1.clone(), perceived: rec.perceived.clone() },
        );
        let t = self.engine.handle_event(now, EngineEvent::SnapshotResult(rec));
        self.run(now, t);
    }

    /// Logs a transition's records, then executes its commands in order.
    fn run(&mut self, now: SimTime, t: Transition) {
        self.records.extend(t.records);
        let mut queue: VecDeque<Command> = t.commands.into();
        while let Some(cmd) = queue.pop_front() {
            match cmd {
                Command::Goto { location, purpose } => self.goto(now, location, purpose),
                Command::TakeSnapshot(needed) => {
                    if matches!(self.body.place, Place::At(_)) {
                        self.snapshot_here(now, needed);
                    }
                }
                Command::Dock => {
                    let ok = attempt_dock(&mut self.rng, self.cfg.p_dock);
                    self.body.docked = ok;
                    self.log(now, RecordKind::DockAttempt { ok });
                    let t = self.engine.handle_event(now, EngineEvent::DockResult(ok));
                    self.run(now, t);
                }
                Command::Speak { .. } | Command::Idle => {}
            }
        }
    }

    fn goto(&mut self, now: SimTime, to: String, purpose: Purpose) {
        let Place::At(from) = &self.body.place else { return };
        let from = from.clone();
        if from == to {
            let t = self.engine.handle_event(now, EngineEvent::Arrived(to));
            self.run(now, t);
            return;
        }
        if !self.realistic() {
            self.log(now, RecordKind::MoveStart { from, to: to.clone(), minutes: 0, purpose });
            self.log(now, RecordKind::Arrive { location: to.clone() });
            self.body.place = Place::At(to.clone());
            let t = self.engine.handle_event(now, EngineEvent::Arrived(to));
            self.run(now, t);
            return;
        }
        match navigate(self.map, &from, &to, self.world.closed_edges()) {
            Err(_) => {
                let ev = EngineEvent::NavFailed { target: to, at: from, reason: NavFailure::Unreachable };
                let t = self.engine.handle_event(now, ev);
                self.run(now, t);
            }
            Ok(route) => {
                let mut arrivals = vec![now];
                for w in route.path.windows(2) {
                    let m = self.map.edge(&w[0], &w[1]).expect("route follows map edges").minutes;
                    arrivals.push(arrivals.last().expect("non-empty").plus(m));
                }
                self.body.docked = false;
                self.log(now, RecordKind::MoveStart { from, to, minutes: route.minutes, purpose });
                self.body.place = Place::Travelling(Trip { path: route.path, arrivals, next: 1 });
            }
        }
    }
}
