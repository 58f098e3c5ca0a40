//! The robot's decision core.
//!
//! [`Engine`] is a deterministic state machine: every input is an
//! [`EngineEvent`] stamped with the current time, and every output is a
//! [`Transition`] of commands for the robot plus log records. It performs no
//! I/O and reads no clock.

mod dwell;
mod ledger;
mod messages;
mod privacy;
mod schedule;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub use dwell::{update_dwell, DwellState, DwellTracker, Observation};
pub use ledger::{Delivery, DeliveryLedger, DeliveryMode, SuppressReason};
pub use messages::{Addressee, Message, MessageBoard, MessageView};
pub use privacy::{
    auto_exit_time, day_is_complete, PrivacyCause, PrivacyExit, PrivacyRequest, PrivacyState, PrivacyTransition,
};

use crate::homesim::log::{LogRecord, NavFailure, Purpose, RecordKind, SeekPhase};
use crate::perception::{AtomSummary, Scene, SnapshotRecord};
use crate::plan::{FamilyMember, HomeMap, Plan, ReminderSpec};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Longest unobserved gap that keeps dwell accrual alive.
    pub max_gap: u32,
    /// A seek gives up this many minutes after it started.
    pub seek_timeout: u32,
    /// Automatic privacy ends this many minutes before the next day's first window.
    pub privacy_lead: u32,
    /// A location whose navigation failed is skipped for this many minutes.
    pub nav_retry: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { max_gap: 5, seek_timeout: 10, privacy_lead: 15, nav_retry: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Goto { location: String, purpose: Purpose },
    /// Snapshot the current location, looking for what `AtomSummary` names.
    TakeSnapshot(AtomSummary),
    Speak { reminder: String, recipients: Vec<String>, text: String },
    Dock,
    Idle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EngineEvent {
    Tick,
    Arrived(String),
    NavFailed { target: String, at: String, reason: NavFailure },
    SnapshotResult(SnapshotRecord),
    Checkin(String),
    MessagePost { from: String, to: Addressee, text: String },
    CheckMessages(String),
    PrivacyRequest(PrivacyRequest),
    DockResult(bool),
    Battery(u32),
    Rescued,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transition {
    pub commands: Vec<Command>,
    pub records: Vec<LogRecord>,
}

impl Transition {
    fn log(&mut self, now: SimTime, kind: RecordKind) {
        self.records.push(LogRecord::new(now, kind));
    }

    pub fn extend(&mut self, other: Transition) {
        self.commands.extend(other.commands);
        self.records.extend(other.records);
    }
}

/// The engine's belief about the robot body.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RobotView {
    /// `None` while travelling.
    location: Option<String>,
    heading: Option<(String, Purpose)>,
    docked: bool,
    /// The one dock attempt since the last return already failed.
    dock_failed: bool,
    online: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SeekEpisode {
    reminder: usize,
    target: String,
    started: SimTime,
    queue: VecDeque<String>,
    visited: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct Engine {
    /// Sorted by id; indices below refer to this order.
    reminders: Vec<ReminderSpec>,
    roster: Vec<FamilyMember>,
    locations: Vec<String>,
    dock: String,
    cfg: EngineConfig,
    trackers: BTreeMap<(usize, String), DwellTracker>,
    ledger: DeliveryLedger,
    privacy: PrivacyState,
    board: MessageBoard,
    robot: RobotView,
    last_observed: BTreeMap<String, SimTime>,
    nav_blocked_until: BTreeMap<String, SimTime>,
    seek: Option<SeekEpisode>,
    /// Seeks triggered while another was running; dropped at the next tick.
    pending_seeks: VecDeque<(usize, String)>,
}

impl Engine {
    /// The robot starts docked and online at the map's dock.
    pub fn new(plan: &Plan, map: &HomeMap, cfg: EngineConfig) -> Self {
        let mut reminders = plan.reminders.clone();
        reminders.sort_by(|a, b| a.id.cmp(&b.id));
        let mut trackers = BTreeMap::new();
        for (i, r) in reminders.iter().enumerate() {
            for loc in &r.locations {
                trackers.insert((i, loc.clone()), DwellTracker::new(r.id.clone(), loc.clone()));
            }
        }
        Self {
            reminders,
            roster: plan.roster.clone(),
            locations: map.locations().map(String::from).collect(),
            dock: map.dock().to_string(),
            cfg,
            trackers,
            ledger: DeliveryLedger::default(),
            privacy: PrivacyState::default(),
            board: MessageBoard::default(),
            robot: RobotView {
                location: Some(map.dock().to_string()),
                heading: None,
                docked: true,
                dock_failed: false,
                online: true,
            },
            last_observed: BTreeMap::new(),
            nav_blocked_until: BTreeMap::new(),
            seek: None,
            pending_seeks: VecDeque::new(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn reminders(&self) -> &[ReminderSpec] {
        &self.reminders
    }

    pub fn ledger(&self) -> &DeliveryLedger {
        &self.ledger
    }

    pub fn privacy(&self) -> &PrivacyState {
        &self.privacy
    }

    pub fn is_private(&self) -> bool {
        self.privacy.is_on()
    }

    pub fn board(&self) -> &MessageBoard {
        &self.board
    }

    pub fn is_seeking(&self) -> bool {
        self.seek.is_some()
    }

    pub fn tracker(&self, reminder: &str, location: &str) -> Option<&DwellTracker> {
        let i = self.reminders.iter().position(|r| r.id == reminder)?;
        self.trackers.get(&(i, location.to_string()))
    }

    pub fn last_observed(&self, location: &str) -> Option<SimTime> {
        self.last_observed.get(location).copied()
    }

    /// Checks every delivery gate in a fixed order.
    fn gate(&self, r: usize, now: SimTime, mode: DeliveryMode) -> Result<(), SuppressReason> {
        let spec = &self.reminders[r];
        if !spec.in_window(now) {
            return Err(SuppressReason::OutOfWindow);
        }
        if self.ledger.count_on(&spec.id, now.day()) >= spec.daily_max {
            return Err(SuppressReason::Exhausted);
        }
        if self.ledger.last(&spec.id).is_some_and(|last| now.since(last) < spec.repeat_min) {
            return Err(SuppressReason::Cooldown);
        }
        if mode != DeliveryMode::Checkin && self.privacy.is_on() {
            return Err(SuppressReason::Privacy);
        }
        Ok(())
    }

    /// A reminder is active when a proactive delivery would pass every gate.
    pub fn is_active(&self, r: usize, now: SimTime) -> bool {
        self.gate(r, now, DeliveryMode::Proactive).is_ok()
    }

    fn active_at<'a>(&'a self, loc: &'a str, now: SimTime) -> impl Iterator<Item = usize> + 'a {
        (0..self.reminders.len())
            .filter(move |&r| self.reminders[r].locations.iter().any(|l| l == loc) && self.is_active(r, now))
    }

    /// Locations watched by at least one active reminder, sorted.
    pub fn active_locations(&self, now: SimTime) -> Vec<String> {
        let mut locs = BTreeSet::new();
        for r in 0..self.reminders.len() {
            if self.is_active(r, now) {
                locs.extend(self.reminders[r].locations.iter().cloned());
            }
        }
        locs.into_iter().collect()
    }

    /// What a snapshot at `loc` must look for right now.
    pub fn needed_at(&self, loc: &str, now: SimTime) -> AtomSummary {
        AtomSummary::of(self.active_at(loc, now).map(|r| &self.reminders[r].predicate), &self.roster)
    }

    pub fn handle_event(&mut self, now: SimTime, ev: EngineEvent) -> Transition {
        let mut out = Transition::default();
        match ev {
            EngineEvent::Tick => self.tick(now, &mut out),
            EngineEvent::Arrived(loc) => self.arrived(now, loc, &mut out),
            EngineEvent::NavFailed { target, at, reason } => {
                out.log(now, RecordKind::NavFailed { target: target.clone(), at: at.clone(), reason });
                out.log(now, RecordKind::HelpRequest { at: at.clone(), target: target.clone() });
                self.robot.location = Some(at);
                self.robot.heading = None;
                self.nav_blocked_until.insert(target, now.plus(self.cfg.nav_retry));
            }
            EngineEvent::SnapshotResult(rec) => {
                if self.privacy.is_on() {
                    return out;
                }
                self.last_observed.insert(rec.location.clone(), now);
                if self.seek.is_some() {
                    self.seek_snapshot(now, &rec, &mut out);
                } else {
                    self.patrol_snapshot(now, &rec, &mut out);
                }
            }
            EngineEvent::Checkin(member) => {
                self.checkin_into(&member, now, &mut out);
            }
            EngineEvent::MessagePost { from, to, text } => {
                self.board.post(&from, to.clone(), &text, now);
                out.log(now, RecordKind::MessagePost { from, to, text });
            }
            EngineEvent::CheckMessages(member) => {
                let views = self.board.check(&member);
                let unread = views.iter().filter(|v| !v.read).count() as u32;
                out.log(now, RecordKind::MessageRead { member, count: views.len() as u32, unread });
            }
            EngineEvent::PrivacyRequest(req) => {
                if let Some(t) = self.privacy.set_privacy(req, now) {
                    out.log(now, RecordKind::Privacy(t));
                    if self.privacy.is_on() {
                        self.abandon_seeks(now, &mut out);
                    }
                }
            }
            EngineEvent::DockResult(ok) => {
                self.robot.docked = ok;
                self.robot.dock_failed = !ok;
            }
            EngineEvent::Battery(level) => {
                if level == 0 && self.robot.online {
                    self.robot.online = false;
                    self.robot.heading = None;
                    self.robot.docked = false;
                    self.abandon_seeks(now, &mut out);
                }
            }
            EngineEvent::Rescued => {
                self.robot = RobotView {
                    location: Some(self.dock.clone()),
                    heading: None,
                    docked: true,
                    dock_failed: false,
                    online: true,
                };
            }
        }
        out
    }

    /// Shows `member` every in-window reminder addressed to them that can
    /// still be delivered, recording each as a check-in delivery.
    pub fn checkin(&mut self, member: &str, now: SimTime) -> (Vec<(String, String)>, Transition) {
        let mut out = Transition::default();
        let shown = self.checkin_into(member, now, &mut out);
        (shown, out)
    }

    fn checkin_into(&mut self, member: &str, now: SimTime, out: &mut Transition) -> Vec<(String, String)> {
        let mark = out.records.len();
        let mut shown = Vec::new();
        for r in 0..self.reminders.len() {
            let spec = &self.reminders[r];
            if !spec.recipients.includes(member) || !spec.in_window(now) {
                continue;
            }
            let (id, text) = (spec.id.clone(), spec.action.text().to_string());
            if self.deliver(r, vec![member.to_string()], now, DeliveryMode::Checkin, None, out) {
                shown.push((id, text));
            }
        }
        let ids = shown.iter().map(|(id, _)| id.clone()).collect();
        out.records.insert(mark, LogRecord::new(now, RecordKind::Checkin { member: member.to_string(), shown: ids }));
        shown
    }

    fn tick(&mut self, now: SimTime, out: &mut Transition) {
        if let Some(t) = self.privacy.expire(now) {
            out.log(now, RecordKind::Privacy(t));
        }
        self.check_auto_privacy(now, out);
        let active: Vec<bool> = (0..self.reminders.len()).map(|r| self.is_active(r, now)).collect();
        let max_gap = self.cfg.max_gap;
        for ((r, _), tr) in self.trackers.iter_mut() {
            if active[*r] {
                *tr = update_dwell(tr, Observation::Unobserved, now, self.reminders[*r].dwell_min, max_gap);
            } else {
                tr.reset();
            }
        }
        self.pending_seeks.clear();
        if let Some(seek) = &self.seek {
            let expired = now.since(seek.started) >= self.cfg.seek_timeout;
            if expired || self.gate(seek.reminder, now, DeliveryMode::Seek).is_err() {
                self.fail_seek(now, out);
            }
        }
    }

    fn check_auto_privacy(&mut self, now: SimTime, out: &mut Transition) {
        if let Some(t) = self.privacy.auto_privacy(&self.reminders, &self.ledger, now, self.cfg.privacy_lead) {
            out.log(now, RecordKind::Privacy(t));
            self.abandon_seeks(now, out);
        }
    }

    fn arrived(&mut self, now: SimTime, loc: String, out: &mut Transition) {
        let purpose = self.robot.heading.take().map(|(_, p)| p);
        self.robot.location = Some(loc.clone());
        if purpose == Some(Purpose::Dock) && loc == self.dock {
            out.commands.push(Command::Dock);
        } else if !self.privacy.is_on() {
            if self.seek.is_some() {
                out.commands.push(Command::TakeSnapshot(AtomSummary::person_search()));
            } else if self.active_at(&loc, now).next().is_some() {
                out.commands.push(Command::TakeSnapshot(self.needed_at(&loc, now)));
            }
        }
    }

    fn patrol_snapshot(&mut self, now: SimTime, rec: &SnapshotRecord, out: &mut Transition) {
        let loc = rec.location.as_str();
        let watching: Vec<usize> = self.active_at(loc, now).collect();
        for &r in &watching {
            let spec = &self.reminders[r];
            let holds = rec.perceived.as_ref().is_some_and(|s| spec.predicate.eval(s, &self.roster));
            let obs = if holds { Observation::True } else { Observation::False };
            let key = (r, loc.to_string());
            let tr = &self.trackers[&key];
            let next = update_dwell(tr, obs, now, spec.dwell_min, self.cfg.max_gap);
            self.trackers.insert(key, next);
        }
        for r in watching {
            if self.trackers[&(r, loc.to_string())].is_armed() && self.is_active(r, now) {
                self.fire(r, loc, rec.perceived.as_ref(), now, out);
            }
        }
    }

    /// An armed reminder at `loc` tries to reach its recipients.
    fn fire(&mut self, r: usize, loc: &str, perceived: Option<&Scene>, now: SimTime, out: &mut Transition) {
        let spec = &self.reminders[r];
        let present: BTreeSet<&str> = perceived.map(Scene::present_members).unwrap_or_default();
        let recipients: Vec<String> =
            present.iter().filter(|m| spec.recipients.includes(m)).map(|m| m.to_string()).collect();
        if !recipients.is_empty() {
            self.deliver(r, recipients, now, DeliveryMode::Proactive, Some(loc), out);
            return;
        }
        match spec.action.seek_target().map(String::from) {
            None => out.log(
                now,
                RecordKind::Suppressed {
                    reminder: spec.id.clone(),
                    mode: DeliveryMode::Proactive,
                    reason: SuppressReason::NoRecipient,
                },
            ),
            Some(target) if present.contains(target.as_str()) => {
                self.deliver(r, vec![target], now, DeliveryMode::Seek, Some(loc), out);
            }
            Some(_) => {
                if self.seek.is_none() {
                    self.start_seek(r, loc, now, out);
                } else if self.seek.as_ref().is_some_and(|s| s.reminder != r)
                    && !self.pending_seeks.iter().any(|(p, _)| *p == r)
                {
                    self.pending_seeks.push_back((r, loc.to_string()));
                }
            }
        }
    }

    /// Runs every gate; on success updates the ledger, resets the
    /// reminder's trackers and (outside check-in) speaks.
    fn deliver(
        &mut self,
        r: usize,
        recipients: Vec<String>,
        now: SimTime,
        mode: DeliveryMode,
        loc: Option<&str>,
        out: &mut Transition,
    ) -> bool {
        let id = self.reminders[r].id.clone();
        if let Err(reason) = self.gate(r, now, mode) {
            out.log(now, RecordKind::Suppressed { reminder: id, mode, reason });
            return false;
        }
        self.ledger.record(&id, Delivery { time: now, recipients: recipients.clone(), mode });
        for ((tr_r, _), tr) in self.trackers.iter_mut() {
            if *tr_r == r {
                tr.reset();
            }
        }
        out.log(
            now,
            RecordKind::Delivered {
                reminder: id.clone(),
                mode,
                recipients: recipients.clone(),
                location: loc.map(String::from),
            },
        );
        if mode != DeliveryMode::Checkin {
            let text = self.reminders[r].action.text().to_string();
            out.commands.push(Command::Speak { reminder: id, recipients, text });
        }
        self.check_auto_privacy(now, out);
        true
    }

    fn start_seek(&mut self, r: usize, trigger: &str, now: SimTime, out: &mut Transition) {
        let spec = &self.reminders[r];
        let target = spec.action.seek_target().expect("seek needs a target").to_string();
        let mut queue: VecDeque<String> = VecDeque::new();
        for l in &spec.locations {
            if l != trigger && !queue.contains(l) {
                queue.push_back(l.clone());
            }
        }
        let mut rest: Vec<&String> =
            self.locations.iter().filter(|l| *l != trigger && !queue.contains(l)).collect();
        rest.sort_by_key(|l| (self.last_observed.get(*l).copied(), l.as_str()));
        queue.extend(rest.into_iter().cloned());
        out.log(
            now,
            RecordKind::Seek {
                phase: SeekPhase::Start,
                reminder: spec.id.clone(),
                target: target.clone(),
                location: Some(trigger.to_string()),
            },
        );
        self.seek = Some(SeekEpisode {
            reminder: r,
            target,
            started: now,
            queue,
            visited: BTreeSet::from([trigger.to_string()]),
        });
        self.advance_seek(now, out);
    }

    /// Heads for the next unvisited location, or gives up.
    fn advance_seek(&mut self, now: SimTime, out: &mut Transition) {
        let Some(seek) = self.seek.as_mut() else { return };
        while let Some(next) = seek.queue.pop_front() {
            if self.nav_blocked_until.get(&next).is_some_and(|until| *until > now) {
                continue;
            }
            seek.visited.insert(next.clone());
            self.robot.location = None;
            self.robot.docked = false;
            self.robot.dock_failed = false;
            self.robot.heading = Some((next.clone(), Purpose::Seek));
            out.commands.push(Command::Goto { location: next, purpose: Purpose::Seek });
            return;
        }
        self.fail_seek(now, out);
    }

    fn seek_snapshot(&mut self, now: SimTime, rec: &SnapshotRecord, out: &mut Transition) {
        let seek = self.seek.as_ref().expect("seek in progress");
        let present: BTreeSet<&str> = rec.perceived.as_ref().map(Scene::present_members).unwrap_or_default();
        if !present.contains(seek.target.as_str()) {
            self.advance_seek(now, out);
            return;
        }
        let seek = self.seek.take().expect("seek in progress");
        let spec = &self.reminders[seek.reminder];
        let mut recipients: BTreeSet<String> =
            present.iter().filter(|m| spec.recipients.includes(m)).map(|m| m.to_string()).collect();
        recipients.insert(seek.target.clone());
        out.log(
            now,
            RecordKind::Seek {
                phase: SeekPhase::Found,
                reminder: spec.id.clone(),
                target: seek.target.clone(),
                location: Some(rec.location.clone()),
            },
        );
        self.deliver(seek.reminder, recipients.into_iter().collect(), now, DeliveryMode::Seek, Some(&rec.location), out);
        self.start_pending_seek(now, out);
    }

    fn fail_seek(&mut self, now: SimTime, out: &mut Transition) {
        if let Some(seek) = self.seek.take() {
            out.log(
                now,
                RecordKind::Seek {
                    phase: SeekPhase::Failed,
                    reminder: self.reminders[seek.reminder].id.clone(),
                    target: seek.target,
                    location: None,
                },
            );
            self.start_pending_seek(now, out);
        }
    }

    fn abandon_seeks(&mut self, now: SimTime, out: &mut Transition) {
        self.pending_seeks.clear();
        self.fail_seek(now, out);
    }

    fn start_pending_seek(&mut self, now: SimTime, out: &mut Transition) {
        while let Some((r, loc)) = self.pending_seeks.pop_front() {
            let armed = self.trackers.get(&(r, loc.clone())).is_some_and(DwellTracker::is_armed);
            if armed && self.is_active(r, now) {
                self.start_seek(r, &loc, now, out);
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests;
