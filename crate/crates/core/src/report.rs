//! Run summaries computed from an event log, optionally against oracle
//! deliveries, in an aligned text form and a `key=value` block.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::engine::{DeliveryMode, SuppressReason};
use crate::homesim::{EventLog, RecordKind};
use crate::oracle::DeliveryRecord;
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModeCounts {
    pub proactive: u32,
    pub seek: u32,
    pub checkin: u32,
}

impl ModeCounts {
    pub fn total(&self) -> u32 {
        self.proactive + self.seek + self.checkin
    }

    fn bump(&mut self, mode: DeliveryMode) {
        match mode {
            DeliveryMode::Proactive => self.proactive += 1,
            DeliveryMode::Seek => self.seek += 1,
            DeliveryMode::Checkin => self.checkin += 1,
        }
    }

    fn add(&mut self, other: &ModeCounts) {
        self.proactive += other.proactive;
        self.seek += other.seek;
        self.checkin += other.checkin;
    }
}

/// Totals always equal the sum of `per_reminder`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub totals: ModeCounts,
    pub per_reminder: BTreeMap<String, ModeCounts>,
    /// Every reason is present, zero or not.
    pub suppressed: BTreeMap<SuppressReason, u32>,
    pub downtime_min: u32,
    pub help_requests: u32,
    /// `(reminder, day)` pairs the oracle delivered on and the log did not.
    /// `None` when no oracle was supplied.
    pub missed_windows: Option<BTreeSet<(String, u32)>>,
}

impl Report {
    pub fn from_log(log: &EventLog, oracle: Option<&[DeliveryRecord]>) -> Self {
        let mut r = Report { suppressed: SuppressReason::ALL.iter().map(|s| (*s, 0)).collect(), ..Report::default() };
        let mut delivered_days = BTreeSet::new();
        for rec in log.iter() {
            match &rec.kind {
                RecordKind::Delivered { reminder, mode, .. } => {
                    r.per_reminder.entry(reminder.clone()).or_default().bump(*mode);
                    delivered_days.insert((reminder.clone(), rec.time.day()));
                }
                RecordKind::Suppressed { reason, .. } => *r.suppressed.entry(*reason).or_default() += 1,
                RecordKind::HelpRequest { .. } => r.help_requests += 1,
                _ => {}
            }
        }
        for c in r.per_reminder.values() {
            r.totals.add(c);
        }
        r.downtime_min = downtime(log);
        r.missed_windows = oracle.map(|o| {
            o.iter()
                .map(|d| (d.reminder.clone(), d.time.day()))
                .filter(|k| !delivered_days.contains(k))
                .collect()
        });
        r
    }

    /// Human-readable, column-aligned.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let t = &self.totals;
        let _ = writeln!(out, "{:<16}{:>8}", "deliveries", t.total());
        for (k, v) in [("proactive", t.proactive), ("seek", t.seek), ("checkin", t.checkin)] {
            let _ = writeln!(out, "  {k:<14}{v:>8}");
        }
        if !self.per_reminder.is_empty() {
            let w = self.per_reminder.keys().map(String::len).max().unwrap_or(0).max(14);
            let _ = writeln!(out, "{:<w$}  {:>9} {:>5} {:>7} {:>5}", "reminder", "proactive", "seek", "checkin", "total", w = w + 2);
            for (id, c) in &self.per_reminder {
                let _ = writeln!(
                    out,
                    "  {id:<w$}  {:>9} {:>5} {:>7} {:>5}",
                    c.proactive,
                    c.seek,
                    c.checkin,
                    c.total()
                );
            }
        }
        let _ = writeln!(out, "suppressed");
        for (reason, n) in &self.suppressed {
            let _ = writeln!(out, "  {:<14}{n:>8}", reason.as_str());
        }
        let _ = writeln!(out, "{:<16}{:>8}", "downtime_min", self.downtime_min);
        let _ = writeln!(out, "{:<16}{:>8}", "help_requests", self.help_requests);
        match &self.missed_windows {
            None => {
                let _ = writeln!(out, "{:<16}{:>8}", "missed_windows", "-");
            }
            Some(m) => {
                let _ = writeln!(out, "{:<16}{:>8}", "missed_windows", m.len());
                for (id, day) in m {
                    let _ = writeln!(out, "  {id} d{day}");
                }
            }
        }
        out
    }

    /// Machine-readable block; [`Report::parse_kv`] reads it back.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let t = &self.totals;
        let _ = writeln!(out, "deliveries={}", t.total());
        let _ = writeln!(out, "proactive={}", t.proactive);
        let _ = writeln!(out, "seek={}", t.seek);
        let _ = writeln!(out, "checkin={}", t.checkin);
        for (id, c) in &self.per_reminder {
            let _ = writeln!(out, "reminder.{id}={},{},{}", c.proactive, c.seek, c.checkin);
        }
        for (reason, n) in &self.suppressed {
            let _ = writeln!(out, "suppressed.{}={n}", reason.as_str());
        }
        let _ = writeln!(out, "downtime_min={}", self.downtime_min);
        let _ = writeln!(out, "help_requests={}", self.help_requests);
        match &self.missed_windows {
            None => {
                let _ = writeln!(out, "missed_windows=-");
            }
            Some(m) => {
                let _ = writeln!(out, "missed_windows={}", m.len());
                for (id, day) in m {
                    let _ = writeln!(out, "missed.{id}=d{day}");
                }
            }
        }
        out
    }

    pub fn parse_kv(text: &str) -> Result<Report, String> {
        let mut r = Report::default();
        let mut totals = ModeCounts::default();
        let mut deliveries = None;
        let mut missed_count: Option<Option<usize>> = None;
        let mut missed = BTreeSet::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let err = |m: &str| format!("line {}: {m}", i + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value"))?;
            let num = |v: &str| v.parse::<u32>().map_err(|_| err(&format!("`{v}` is not a count")));
            match key {
                "deliveries" => deliveries = Some(num(value)?),
                "proactive" => totals.proactive = num(value)?,
                "seek" => totals.seek = num(value)?,
                "checkin" => totals.checkin = num(value)?,
                "downtime_min" => r.downtime_min = num(value)?,
                "help_requests" => r.help_requests = num(value)?,
                "missed_windows" if value == "-" => missed_count = Some(None),
                "missed_windows" => missed_count = Some(Some(num(value)? as usize)),
                _ => {
                    if let Some(id) = key.strip_prefix("reminder.") {
                        let parts: Vec<&str> = value.split(',').collect();
                        let [p, s, c] = parts[..] else { return Err(err("expected three counts")) };
                        r.per_reminder.insert(id.into(), ModeCounts { proactive: num(p)?, seek: num(s)?, checkin: num(c)? });
                    } else if let Some(reason) = key.strip_prefix("suppressed.") {
                        let reason = SuppressReason::ALL
                            .into_iter()
                            .find(|s| s.as_str() == reason)
                            .ok_or_else(|| err(&format!("unknown suppression reason `{reason}`")))?;
                        r.suppressed.insert(reason, num(value)?);
                    } else if let Some(id) = key.strip_prefix("missed.") {
                        let day = value.strip_prefix('d').ok_or_else(|| err("expected d<day>"))?;
                        missed.insert((id.to_string(), num(day)?));
                    } else {
                        return Err(err(&format!("unknown key `{key}`")));
                    }
                }
            }
        }
        r.totals = totals;
        let mut sum = ModeCounts::default();
        for c in r.per_reminder.values() {
            sum.add(c);
        }
        if sum != totals || deliveries != Some(totals.total()) {
            return Err("totals do not match the per-reminder breakdown".into());
        }
        r.missed_windows = match missed_count {
            Some(None) if missed.is_empty() => None,
            Some(Some(n)) if n == missed.len() => Some(missed),
            _ => return Err("missed_windows does not match its entries".into()),
        };
        for s in SuppressReason::ALL {
            r.suppressed.entry(s).or_insert(0);
        }
        Ok(r)
    }
}

/// Minutes spent offline: each `offline` runs until the next `rescue`, or
/// until the end of the log. Within one timestamp an `offline` is taken to
/// precede a `rescue`, so the result does not depend on same-time ordering.
pub fn downtime(log: &EventLog) -> u32 {
    let mut by_time: BTreeMap<SimTime, (bool, bool)> = BTreeMap::new();
    let mut last = None;
    for rec in log.iter() {
        last = last.max(Some(rec.time));
        let e = by_time.entry(rec.time).or_default();
        match rec.kind {
            RecordKind::Offline { .. } => e.0 = true,
            RecordKind::Rescue { .. } => e.1 = true,
            _ => {}
        }
    }
    let mut total = 0;
    let mut since: Option<SimTime> = None;
    for (t, (offline, rescue)) in by_time {
        if offline && since.is_none() {
            since = Some(t);
        }
        if rescue {
            if let Some(s) = since.take() {
                total += t.since(s);
            }
        }
    }
    if let (Some(s), Some(end)) = (since, last) {
        total += end.since(s);
    }
    total
}
