//! Patrol arbitration: where the robot should be next.

use super::{Command, Engine, Transition};
use crate::homesim::log::Purpose;
use crate::time::SimTime;

impl Engine {
    fn nav_blocked(&self, loc: &str, now: SimTime) -> bool {
        self.nav_blocked_until.get(loc).is_some_and(|until| *until > now)
    }

    /// Pure patrol decision for a robot that is free.
    ///
    /// Among locations of active reminders, picks the one observed least
    /// recently (never observed first), then earliest window end, then
    /// reminder id, then location name. Returns `Dock` when nothing is active
    /// or privacy is on.
    pub fn schedule_next(&self, now: SimTime) -> Command {
        if !self.robot.online {
            return Command::Idle;
        }
        if self.privacy.is_on() {
            return Command::Dock;
        }
        let best = (0..self.reminders.len())
            .filter(|&r| self.is_active(r, now))
            .flat_map(|r| {
                let spec = &self.reminders[r];
                spec.locations.iter().filter(|l| !self.nav_blocked(l, now)).map(move |l| {
                    (self.last_observed.get(l).copied(), spec.window.end, spec.id.as_str(), l.as_str())
                })
            })
            .min();
        match best {
            None => Command::Dock,
            Some((_, _, _, loc)) if self.robot.location.as_deref() == Some(loc) => {
                Command::TakeSnapshot(self.needed_at(loc, now))
            }
            Some((_, _, _, loc)) => Command::Goto { location: loc.to_string(), purpose: Purpose::Patrol },
        }
    }

    /// Decision for a free robot in a travelling simulation: continues a
    /// seek, otherwise follows [`Engine::schedule_next`], turning `Dock` into
    /// travel to the dock and a single docking attempt per return.
    pub fn next_command(&mut self, now: SimTime) -> Transition {
        let mut out = Transition::default();
        if !self.robot.online {
            out.commands.push(Command::Idle);
            return out;
        }
        if self.robot.heading.is_some() {
            return out;
        }
        if self.seek.is_some() {
            self.advance_seek(now, &mut out);
            if !out.commands.is_empty() {
                return out;
            }
        }
        let cmd = match self.schedule_next(now) {
            Command::Goto { location, purpose } => {
                self.depart(&location, purpose);
                Command::Goto { location, purpose }
            }
            Command::Dock => {
                let dock = self.dock.clone();
                if self.robot.location.as_deref() == Some(dock.as_str()) {
                    if self.robot.docked || self.robot.dock_failed {
                        Command::Idle
                    } else {
                        Command::Dock
                    }
                } else if self.nav_blocked(&dock, now) {
                    Command::Idle
                } else {
                    self.depart(&dock, Purpose::Dock);
                    Command::Goto { location: dock, purpose: Purpose::Dock }
                }
            }
            other => other,
        };
        out.commands.push(cmd);
        out
    }

    fn depart(&mut self, to: &str, purpose: Purpose) {
        self.robot.location = None;
        self.robot.docked = false;
        self.robot.dock_failed = false;
        self.robot.heading = Some((to.to_string(), purpose));
    }
}
