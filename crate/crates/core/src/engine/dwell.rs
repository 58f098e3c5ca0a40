use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DwellState {
    Idle,
    Accruing,
    Armed,
}

/// What the latest snapshot (or its absence) said about a trigger condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observation {
    True,
    False,
    Unobserved,
}

/// Persistence tracking for one reminder at one location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DwellTracker {
    pub reminder: String,
    pub location: String,
    /// Minutes the condition has held, capped at the reminder's dwell.
    pub accrued: u32,
    pub last_observation: Option<SimTime>,
    pub state: DwellState,
}

impl DwellTracker {
    pub fn new(reminder: impl Into<String>, location: impl Into<String>) -> Self {
        Self {
            reminder: reminder.into(),
            location: location.into(),
            accrued: 0,
            last_observation: None,
            state: DwellState::Idle,
        }
    }

    pub fn is_armed(&self) -> bool {
        self.state == DwellState::Armed
    }

    pub fn reset(&mut self) {
        self.accrued = 0;
        self.last_observation = None;
        self.state = DwellState::Idle;
    }
}

/// Advances a tracker.
///
/// A true observation credits the minutes elapsed since the previous
/// observation. Gaps without observation up to `max_gap` minutes leave the
/// accrual untouched; longer gaps, and any false observation, reset it.
/// The tracker is armed once `accrued == dwell_min`.
pub fn update_dwell(tr: &DwellTracker, obs: Observation, now: SimTime, dwell_min: u32, max_gap: u32) -> DwellTracker {
    let mut next = tr.clone();
    let stale = tr.last_observation.is_some_and(|last| now.since(last) > max_gap);
    match obs {
        Observation::False => next.reset(),
        Observation::Unobserved => {
            if stale {
                next.reset();
            }
        }
        Observation::True => {
            match tr.last_observation {
                Some(last) if !stale && tr.state != DwellState::Idle => {
                    next.accrued = (tr.accrued + now.since(last)).min(dwell_min);
                }
                _ => next.accrued = 0,
            }
            next.last_observation = Some(now);
            next.state = if next.accrued >= dwell_min { DwellState::Armed } else { DwellState::Accruing };
        }
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(min: u32) -> SimTime {
        SimTime::new(1, min).unwrap()
    }

    /// Independent counting oracle: first minute at which `dwell` minutes have
    /// elapsed since the start of an unbroken run of true observations.
    fn first_armed_by_counting(obs: &[bool], dwell: u32) -> Option<u32> {
        let mut run_start = None;
        for (m, &o) in obs.iter().enumerate() {
            let m = m as u32;
            if !o {
                run_start = None;
                continue;
            }
            let s = *run_start.get_or_insert(m);
            if m - s >= dwell {
                return Some(m);
            }
        }
        None
    }

    fn first_armed_by_tracker(obs: &[bool], dwell: u32) -> Option<u32> {
        let mut tr = DwellTracker::new("r", "loc");
        for (m, &o) in obs.iter().enumerate() {
            let o = if o { Observation::True } else { Observation::False };
            tr = update_dwell(&tr, o, at(m as u32), dwell, 5);
            if tr.is_armed() {
                return Some(m as u32);
            }
        }
        None
    }

    #[test]
    fn twenty_true_minutes_arm_at_minute_twenty() {
        let obs = vec![true; 40];
        assert_eq!(first_armed_by_counting(&obs, 20), Some(20));
        assert_eq!(first_armed_by_tracker(&obs, 20), Some(20));
    }

    #[test]
    fn counting_oracle_agrees_on_patterns() {
        for pattern in 0u32..(1 << 12) {
            let obs: Vec<bool> = (0..12).map(|i| pattern >> i & 1 == 1).collect();
            for dwell in 0..6 {
                assert_eq!(first_armed_by_tracker(&obs, dwell), first_armed_by_counting(&obs, dwell), "{obs:?} {dwell}");
            }
        }
    }

    #[test]
    fn false_observation_resets() {
        let tr = DwellTracker { accrued: 15, last_observation: Some(at(15)), state: DwellState::Accruing, ..DwellTracker::new("r", "l") };
        let tr = update_dwell(&tr, Observation::False, at(16), 20, 5);
        assert_eq!((tr.accrued, tr.state), (0, DwellState::Idle));
    }

    #[test]
    fn short_gap_freezes_long_gap_resets() {
        let tr = DwellTracker { accrued: 15, last_observation: Some(at(15)), state: DwellState::Accruing, ..DwellTracker::new("r", "l") };
        let frozen = update_dwell(&tr, Observation::Unobserved, at(18), 20, 5);
        assert_eq!(frozen.accrued, 15);
        assert_eq!(frozen.state, DwellState::Accruing);
        let reset = update_dwell(&tr, Observation::Unobserved, at(21), 20, 5);
        assert_eq!(reset.state, DwellState::Idle);
        // a true observation after a short gap credits the gap
        let resumed = update_dwell(&frozen, Observation::True, at(20), 20, 5);
        assert!(resumed.is_armed());
        // after a long gap it starts over
        let restarted = update_dwell(&tr, Observation::True, at(30), 20, 5);
        assert_eq!((restarted.accrued, restarted.state), (0, DwellState::Accruing));
    }

    #[test]
    fn zero_dwell_arms_on_first_truth() {
        let tr = update_dwell(&DwellTracker::new("r", "l"), Observation::True, at(0), 0, 5);
        assert!(tr.is_armed());
    }
}
