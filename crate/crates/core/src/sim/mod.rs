//! Deterministic closed-loop simulator.
//!
//! An operator trajectory drives ideal encoders; readings go through the
//! emulated bus, the solver and the retargeting map onto a simulated robot
//! hand. Contact forces from the hand return through the feedback policy
//! with per-stage delays. Time is integer microseconds, and all randomness
//! comes from one seeded generator, so an episode is a pure function of its
//! configuration.

mod episode;
mod report;
mod trace;
mod trajectory;

pub use episode::{derive_seed, run_episode, run_episodes, Simulator};
pub use report::{
    latency_report, repeatability_from_angles, repeatability_report, LatencyEvent, LatencyReport,
    RepeatabilityReport,
};
pub use trace::{Trace, TraceRow};
pub use trajectory::{from_spec, CyclePose, RecordedPose, StaticPose, Trajectory};

use crate::bus::BusError;
use crate::cable::CableError;
use crate::kinematics::KinematicsError;
use crate::model::ConfigError;
use crate::retarget::RetargetError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Cable(#[from] CableError),
    #[error(transparent)]
    Retarget(#[from] RetargetError),
    #[error("bus: {0}")]
    Bus(#[from] BusError),
    #[error("trajectory: {0}")]
    Trajectory(String),
    #[error("trajectory ends at {available_us} us, episode needs {needed_us} us")]
    TrajectoryTooShort { needed_us: u64, available_us: u64 },
    #[error("trace: {0}")]
    Trace(String),
    #[error("need at least 3 contact events, found {found}")]
    NotEnoughContacts { found: usize },
    #[error("no force-feedback activation in trace")]
    NoActivation,
}

impl From<csv::Error> for SimError {
    fn from(e: csv::Error) -> Self {
        SimError::Trace(e.to_string())
    }
}
