use std::collections::BTreeMap;
use std::fmt;

use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeliveryMode {
    Proactive,
    Seek,
    Checkin,
}

impl DeliveryMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DeliveryMode::Proactive => "proactive",
            DeliveryMode::Seek => "seek",
            DeliveryMode::Checkin => "checkin",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "proactive" => Some(DeliveryMode::Proactive),
            "seek" => Some(DeliveryMode::Seek),
            "checkin" => Some(DeliveryMode::Checkin),
            _ => None,
        }
    }
}

impl fmt::Display for DeliveryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuppressReason {
    Cooldown,
    Exhausted,
    OutOfWindow,
    Privacy,
    NoRecipient,
}

impl SuppressReason {
    pub const ALL: [SuppressReason; 5] = [
        SuppressReason::Cooldown,
        SuppressReason::Exhausted,
        SuppressReason::OutOfWindow,
        SuppressReason::Privacy,
        SuppressReason::NoRecipient,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuppressReason::Cooldown => "cooldown",
            SuppressReason::Exhausted => "exhausted",
            SuppressReason::OutOfWindow => "out_of_window",
            SuppressReason::Privacy => "privacy",
            SuppressReason::NoRecipient => "no_recipient",
        }
    }
}

impl fmt::Display for SuppressReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub time: SimTime,
    pub recipients: Vec<String>,
    pub mode: DeliveryMode,
}

/// Every delivery, per reminder, in time order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeliveryLedger {
    by_reminder: BTreeMap<String, Vec<Delivery>>,
}

impl DeliveryLedger {
    pub fn record(&mut self, reminder: &str, delivery: Delivery) {
        self.by_reminder.entry(reminder.to_string()).or_default().push(delivery);
    }

    pub fn deliveries(&self, reminder: &str) -> &[Delivery] {
        self.by_reminder.get(reminder).map_or(&[], Vec::as_slice)
    }

    pub fn count_on(&self, reminder: &str, day: u32) -> u32 {
        self.deliveries(reminder).iter().filter(|d| d.time.day() == day).count() as u32
    }

    pub fn last(&self, reminder: &str) -> Option<SimTime> {
        self.deliveries(reminder).last().map(|d| d.time)
    }

    pub fn total(&self) -> usize {
        self.by_reminder.values().map(Vec::len).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Delivery)> {
        self.by_reminder.iter().flat_map(|(r, ds)| ds.iter().map(move |d| (r.as_str(), d)))
    }
}
