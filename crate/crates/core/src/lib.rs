//! Context-aware household reminders for a patrolling home robot.
//!
//! A [`plan::Plan`] describes who gets reminded of what, where, and when.
//! The [`engine::Engine`] decides where the robot goes and what it says, the
//! [`homesim`] simulator drives it against a scripted household, and the
//! [`oracle`] computes independently what an all-seeing robot must deliver.

pub mod audit;
pub mod engine;
pub mod homesim;
pub mod oracle;
pub mod perception;
pub mod plan;
pub mod report;
pub mod rng;
pub mod testkit;
pub mod time;
