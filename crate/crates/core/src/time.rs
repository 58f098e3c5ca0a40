//! Minute-granularity simulation clock and daily time windows.

use std::collections::BTreeSet;
use std::fmt;

pub const MINUTES_PER_DAY: u32 = 1440;

/// A point in simulated time: 1-based day plus minute-of-day.
///
/// Ordering is lexicographic on `(day, minute)`, which coincides with the
/// ordering of [`SimTime::abs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime {
    day: u32,
    minute: u32,
}

impl SimTime {
    /// Returns `None` when `day == 0` or `minute >= 1440`.
    pub fn new(day: u32, minute: u32) -> Option<Self> {
        (day >= 1 && minute < MINUTES_PER_DAY).then_some(Self { day, minute })
    }

    pub fn start_of_day(day: u32) -> Self {
        Self { day: day.max(1), minute: 0 }
    }

    /// Builds a time from minutes elapsed since day 1, 00:00.
    pub fn from_abs(abs: u32) -> Self {
        Self { day: abs / MINUTES_PER_DAY + 1, minute: abs % MINUTES_PER_DAY }
    }

    pub fn day(self) -> u32 {
        self.day
    }

    pub fn minute(self) -> u32 {
        self.minute
    }

    /// Minutes elapsed since day 1, 00:00.
    pub fn abs(self) -> u32 {
        (self.day - 1) * MINUTES_PER_DAY + self.minute
    }

    pub fn plus(self, minutes: u32) -> Self {
        Self::from_abs(self.abs() + minutes)
    }

    /// Minutes from `earlier` to `self`, saturating at zero.
    pub fn since(self, earlier: SimTime) -> u32 {
        self.abs().saturating_sub(earlier.abs())
    }

    /// Parses `d<D>:<HH:MM>` as written in event logs.
    pub fn parse_log(s: &str) -> Option<Self> {
        let rest = s.strip_prefix('d')?;
        let (day, hhmm) = rest.split_once(':')?;
        let day = parse_decimal(day)?;
        let minute = parse_clock(hhmm)?;
        Self::new(day, minute)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}:{}", self.day, Clock(self.minute))
    }
}

/// Formats a minute-of-day (0..=1440) as `HH:MM`.
#[derive(Debug, Clone, Copy)]
pub struct Clock(pub u32);

impl fmt::Display for Clock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}:{:02}", self.0 / 60, self.0 % 60)
    }
}

fn parse_decimal(s: &str) -> Option<u32> {
    if s.is_empty() || s.len() > 9 || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses `HH:MM` into a minute-of-day in `0..1440`.
pub fn parse_clock(s: &str) -> Option<u32> {
    let m = parse_clock_allowing_midnight_end(s)?;
    (m < MINUTES_PER_DAY).then_some(m)
}

/// Parses `HH:MM`, additionally accepting `24:00` (= 1440) as a window end.
pub fn parse_clock_allowing_midnight_end(s: &str) -> Option<u32> {
    let (h, m) = s.split_once(':')?;
    if h.len() != 2 || m.len() != 2 {
        return None;
    }
    let h = parse_decimal(h)?;
    let m = parse_decimal(m)?;
    if m >= 60 {
        return None;
    }
    let total = h * 60 + m;
    (total <= MINUTES_PER_DAY).then_some(total)
}

/// Days on which a window applies.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DaySet {
    Daily,
    Days(BTreeSet<u32>),
}

impl DaySet {
    pub fn contains(&self, day: u32) -> bool {
        match self {
            DaySet::Daily => true,
            DaySet::Days(days) => days.contains(&day),
        }
    }

    /// Smallest scheduled day strictly after `day`, if any.
    pub fn next_after(&self, day: u32) -> Option<u32> {
        match self {
            DaySet::Daily => Some(day + 1),
            DaySet::Days(days) => days.range(day + 1..).next().copied(),
        }
    }
}

/// Half-open daily interval `[start, end)` in minutes-of-day.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeWindow {
    pub start: u32,
    pub end: u32,
    pub days: DaySet,
}

impl TimeWindow {
    pub fn daily(start: u32, end: u32) -> Self {
        Self { start, end, days: DaySet::Daily }
    }

    pub fn is_valid(&self) -> bool {
        self.start < self.end
            && self.end <= MINUTES_PER_DAY
            && match &self.days {
                DaySet::Daily => true,
                DaySet::Days(d) => !d.is_empty() && !d.contains(&0),
            }
    }

    pub fn len(&self) -> u32 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True iff `t` falls on a scheduled day and `start <= t.minute < end`.
    pub fn contains(&self, t: SimTime) -> bool {
        self.days.contains(t.day()) && self.start <= t.minute() && t.minute() < self.end
    }

    /// True once the minute of `t` has reached the window's end.
    pub fn has_passed(&self, t: SimTime) -> bool {
        t.minute() >= self.end
    }
}

/// Free-function form of [`TimeWindow::contains`].
pub fn window_contains(w: &TimeWindow, t: SimTime) -> bool {
    w.contains(t)
}
