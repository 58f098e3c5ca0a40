use std::fmt;

use crate::engine::ledger::DeliveryLedger;
use crate::plan::ReminderSpec;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrivacyRequest {
    OnFor(u32),
    OnRestOfDay,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrivacyCause {
    ManualDuration,
    ManualRestOfDay,
    Auto,
}

impl PrivacyCause {
    pub fn as_str(self) -> &'static str {
        match self {
            PrivacyCause::ManualDuration => "manual_duration",
            PrivacyCause::ManualRestOfDay => "manual_rest_of_day",
            PrivacyCause::Auto => "auto",
        }
    }
}

/// Why privacy mode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrivacyExit {
    Manual,
    Expired,
    Auto,
}

impl PrivacyExit {
    pub fn as_str(self) -> &'static str {
        match self {
            PrivacyExit::Manual => "manual_off",
            PrivacyExit::Expired => "expired",
            PrivacyExit::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrivacyTransition {
    /// `until == None` means no scheduled exit.
    Enter { cause: PrivacyCause, until: Option<SimTime> },
    Exit { cause: PrivacyExit },
}

impl PrivacyTransition {
    pub fn is_enter(&self) -> bool {
        matches!(self, PrivacyTransition::Enter { .. })
    }
}

impl fmt::Display for PrivacyTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrivacyTransition::Enter { cause, until: Some(u) } => write!(f, "on cause={} until={u}", cause.as_str()),
            PrivacyTransition::Enter { cause, until: None } => write!(f, "on cause={} until=-", cause.as_str()),
            PrivacyTransition::Exit { cause } => write!(f, "off cause={}", cause.as_str()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrivacyState {
    /// `Some` iff privacy mode is on.
    active: Option<(PrivacyCause, Option<SimTime>)>,
    /// Day on which a manual `off` suppresses automatic re-entry.
    auto_suppressed_day: Option<u32>,
}

impl PrivacyState {
    pub fn is_on(&self) -> bool {
        self.active.is_some()
    }

    pub fn cause(&self) -> Option<PrivacyCause> {
        self.active.map(|(c, _)| c)
    }

    pub fn until(&self) -> Option<SimTime> {
        self.active.and_then(|(_, u)| u)
    }

    /// Manual request. `off` while private also keeps auto privacy from
    /// re-engaging for the rest of that day.
    pub fn set_privacy(&mut self, req: PrivacyRequest, now: SimTime) -> Option<PrivacyTransition> {
        let t = match req {
            PrivacyRequest::OnFor(d) => {
                PrivacyTransition::Enter { cause: PrivacyCause::ManualDuration, until: Some(now.plus(d)) }
            }
            PrivacyRequest::OnRestOfDay => PrivacyTransition::Enter {
                cause: PrivacyCause::ManualRestOfDay,
                until: Some(SimTime::start_of_day(now.day() + 1)),
            },
            PrivacyRequest::Off => {
                if !self.is_on() {
                    return None;
                }
                self.auto_suppressed_day = Some(now.day());
                PrivacyTransition::Exit { cause: PrivacyExit::Manual }
            }
        };
        self.apply(t);
        Some(t)
    }

    /// Ends privacy whose exit time has been reached.
    pub fn expire(&mut self, now: SimTime) -> Option<PrivacyTransition> {
        let (cause, until) = self.active?;
        if until.is_some_and(|u| u <= now) {
            let exit = if cause == PrivacyCause::Auto { PrivacyExit::Auto } else { PrivacyExit::Expired };
            let t = PrivacyTransition::Exit { cause: exit };
            self.apply(t);
            Some(t)
        } else {
            None
        }
    }

    /// Enters automatic privacy when the day's reminders are all done.
    pub fn auto_privacy(
        &mut self,
        reminders: &[ReminderSpec],
        ledger: &DeliveryLedger,
        now: SimTime,
        lead: u32,
    ) -> Option<PrivacyTransition> {
        if self.is_on() || self.auto_suppressed_day == Some(now.day()) || !day_is_complete(reminders, ledger, now) {
            return None;
        }
        let until = auto_exit_time(reminders, now.day(), lead);
        // An exit time already reached would flap straight back out.
        if until.is_some_and(|u| u <= now) {
            return None;
        }
        let t = PrivacyTransition::Enter { cause: PrivacyCause::Auto, until };
        self.apply(t);
        Some(t)
    }

    fn apply(&mut self, t: PrivacyTransition) {
        self.active = match t {
            PrivacyTransition::Enter { cause, until } => Some((cause, until)),
            PrivacyTransition::Exit { .. } => None,
        };
    }
}

/// Every reminder scheduled on `now`'s day has reached its daily maximum or
/// has a window that already closed. True for days with nothing scheduled.
pub fn day_is_complete(reminders: &[ReminderSpec], ledger: &DeliveryLedger, now: SimTime) -> bool {
    reminders
        .iter()
        .filter(|r| r.is_scheduled_on(now.day()))
        .all(|r| ledger.count_on(&r.id, now.day()) >= r.daily_max || r.window.has_passed(now))
}

/// `lead` minutes before the earliest window on the next scheduled day,
/// never earlier than that day's midnight.
pub fn auto_exit_time(reminders: &[ReminderSpec], day: u32, lead: u32) -> Option<SimTime> {
    let next = reminders.iter().filter_map(|r| r.window.days.next_after(day)).min()?;
    let first = reminders.iter().filter(|r| r.is_scheduled_on(next)).map(|r| r.window.start).min()?;
    let midnight = SimTime::start_of_day(next);
    Some(SimTime::from_abs((midnight.abs() + first).saturating_sub(lead).max(midnight.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ledger::{Delivery, DeliveryMode};
    use crate::plan::{ActionSpec, FieldLines, Predicate, Recipients};
    use crate::time::TimeWindow;

    fn t(day: u32, h: u32, m: u32) -> SimTime {
        SimTime::new(day, h * 60 + m).unwrap()
    }

    fn reminder(id: &str, start: u32, end: u32) -> ReminderSpec {
        ReminderSpec {
            id: id.into(),
            recipients: Recipients::All,
            window: TimeWindow::daily(start, end),
            locations: vec!["kitchen".into()],
            predicate: Predicate::Always,
            action: ActionSpec::Speak { text: "x".into() },
            dwell_min: 0,
            repeat_min: 30,
            daily_max: 1,
            lines: FieldLines::default(),
        }
    }

    #[test]
    fn manual_duration_and_rest_of_day() {
        let mut p = PrivacyState::default();
        p.set_privacy(PrivacyRequest::OnFor(60), t(1, 13, 0));
        assert_eq!(p.until(), Some(t(1, 14, 0)));
        p.set_privacy(PrivacyRequest::OnRestOfDay, t(1, 13, 0));
        assert_eq!(p.until(), Some(t(2, 0, 0)));
        assert!(p.expire(t(1, 23, 59)).is_none());
        assert_eq!(p.expire(t(2, 0, 0)), Some(PrivacyTransition::Exit { cause: PrivacyExit::Expired }));
        assert!(!p.is_on());
    }

    #[test]
    fn off_returns_to_active_now() {
        let mut p = PrivacyState::default();
        p.set_privacy(PrivacyRequest::OnFor(60), t(1, 13, 0));
        assert!(p.set_privacy(PrivacyRequest::Off, t(1, 13, 10)).is_some());
        assert!(!p.is_on());
        assert!(p.set_privacy(PrivacyRequest::Off, t(1, 13, 11)).is_none());
    }

    #[test]
    fn auto_enters_after_last_window_and_exits_before_next_morning() {
        let rs = vec![reminder("homework", 18 * 60, 21 * 60 + 40), reminder("breakfast", 8 * 60 + 30, 10 * 60 + 30)];
        let ledger = DeliveryLedger::default();
        let mut p = PrivacyState::default();
        assert!(p.auto_privacy(&rs, &ledger, t(1, 14, 0), 15).is_none());
        assert!(p.auto_privacy(&rs, &ledger, t(1, 21, 39), 15).is_none());
        let tr = p.auto_privacy(&rs, &ledger, t(1, 21, 40), 15);
        assert_eq!(tr, Some(PrivacyTransition::Enter { cause: PrivacyCause::Auto, until: Some(t(2, 8, 15)) }));
        assert_eq!(p.expire(t(2, 8, 15)), Some(PrivacyTransition::Exit { cause: PrivacyExit::Auto }));
    }

    #[test]
    fn exhausted_reminders_complete_the_day() {
        let rs = vec![reminder("a", 9 * 60, 17 * 60)];
        let mut ledger = DeliveryLedger::default();
        ledger.record("a", Delivery { time: t(1, 9, 5), recipients: vec![], mode: DeliveryMode::Checkin });
        let mut p = PrivacyState::default();
        let tr = p.auto_privacy(&rs, &ledger, t(1, 9, 5), 15).unwrap();
        assert_eq!(tr, PrivacyTransition::Enter { cause: PrivacyCause::Auto, until: Some(t(2, 8, 45)) });
    }

    #[test]
    fn manual_off_suppresses_auto_for_the_day() {
        let rs = vec![reminder("a", 9 * 60, 10 * 60)];
        let ledger = DeliveryLedger::default();
        let mut p = PrivacyState::default();
        p.set_privacy(PrivacyRequest::OnFor(5), t(1, 11, 0));
        p.set_privacy(PrivacyRequest::Off, t(1, 11, 1));
        assert!(p.auto_privacy(&rs, &ledger, t(1, 11, 2), 15).is_none());
        assert!(p.auto_privacy(&rs, &ledger, t(2, 10, 0), 15).is_some());
    }

    #[test]
    fn exit_clamps_to_midnight() {
        let rs = vec![reminder("early", 5, 60)];
        assert_eq!(auto_exit_time(&rs, 1, 15), Some(t(2, 0, 0)));
        assert_eq!(auto_exit_time(&[], 1, 15), None);
    }
}
