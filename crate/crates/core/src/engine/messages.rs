use std::collections::BTreeSet;
use std::fmt;

use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Addressee {
    All,
    Member(String),
}

impl Addressee {
    pub fn parse(s: &str) -> Self {
        if s == "all" {
            Addressee::All
        } else {
            Addressee::Member(s.to_string())
        }
    }

    pub fn includes(&self, member: &str) -> bool {
        match self {
            Addressee::All => true,
            Addressee::Member(m) => m == member,
        }
    }
}

impl fmt::Display for Addressee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Addressee::All => f.write_str("all"),
            Addressee::Member(m) => f.write_str(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: String,
    pub to: Addressee,
    pub text: String,
    pub posted: SimTime,
    /// Members who have seen this message. Only ever grows.
    pub read_by: BTreeSet<String>,
}

/// A message as shown to one member; `read` is its state before this check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageView {
    pub from: String,
    pub text: String,
    pub posted: SimTime,
    pub read: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageBoard {
    messages: Vec<Message>,
}

impl MessageBoard {
    pub fn post(&mut self, from: &str, to: Addressee, text: &str, now: SimTime) {
        self.messages.push(Message {
            from: from.to_string(),
            to,
            text: text.to_string(),
            posted: now,
            read_by: BTreeSet::new(),
        });
    }

    /// Messages addressed to `member`, oldest first; marks them read.
    pub fn check(&mut self, member: &str) -> Vec<MessageView> {
        self.messages
            .iter_mut()
            .filter(|m| m.to.includes(member))
            .map(|m| {
                let read = !m.read_by.insert(member.to_string());
                MessageView { from: m.from.clone(), text: m.text.clone(), posted: m.posted, read }
            })
            .collect()
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }
}
