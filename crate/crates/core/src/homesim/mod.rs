//! Discrete-event household simulator: a scripted ground-truth world, robot
//! motion, battery and docking physics, driving the engine minute by minute.

pub mod log;
mod nav;
mod sim;
mod trace;
mod world;

pub use log::{EventLog, LogLine, LogRecord, NavFailure, Purpose, RecordKind, SeekPhase};
pub use nav::{attempt_dock, navigate, Route, Unreachable};
pub use sim::{simulate, BatteryModel, Mode, SimConfig};
pub use trace::{parse_trace, Trace, TraceAction, TraceEvent};
pub use world::{world_at, GroundWorld};
