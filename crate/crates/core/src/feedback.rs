//! Haptic feedback policy.
//!
//! Contact force selects one of four exclusive feedback rows:
//!
//! | force (N)        | vibration   | cable tension |
//! |------------------|-------------|---------------|
//! | `< 0.1`          | off         | off           |
//! | `[0.1, 0.5)`     | waveform 1  | off           |
//! | `[0.5, 1.0]`     | waveform 2  | off           |
//! | `> 1.0`          | off         | on            |
//!
//! A mode is entered when the force reaches its threshold and released only
//! once the force falls `hysteresis` below it. While the cable is tensioned
//! the servo holds the position it had on entry, minus a fixed retraction.

use crate::cable::{servo_target, CableError, FingerPose, ServoMode};
pub use crate::model::FeedbackPolicy;
use crate::model::{FeedbackCommand, Finger, ForceSample, GloveGeometry, Waveform, FINGERS};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeedbackError {
    #[error("motor current must be a non-negative number, got {0} mA")]
    NegativeCurrent(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum FeedbackMode {
    #[default]
    None,
    Waveform1,
    Waveform2,
    ForceFeedback,
}

impl FeedbackMode {
    pub const ALL: [FeedbackMode; 4] = [
        FeedbackMode::None,
        FeedbackMode::Waveform1,
        FeedbackMode::Waveform2,
        FeedbackMode::ForceFeedback,
    ];

    /// Row index, 0 (no feedback) to 3 (cable tension).
    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn from_level(level: u8) -> Option<FeedbackMode> {
        FeedbackMode::ALL.get(level as usize).copied()
    }

    pub fn waveform(self) -> Waveform {
        match self {
            FeedbackMode::Waveform1 => Waveform::Waveform1,
            FeedbackMode::Waveform2 => Waveform::Waveform2,
            _ => Waveform::Off,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeedbackMode::None => "none",
            FeedbackMode::Waveform1 => "waveform1",
            FeedbackMode::Waveform2 => "waveform2",
            FeedbackMode::ForceFeedback => "force_feedback",
        }
    }
}

impl std::fmt::Display for FeedbackMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Contact force from motor current; linear through the origin.
pub fn current_to_force(current: f64, policy: &FeedbackPolicy) -> Result<f64, FeedbackError> {
    if current.is_nan() || current < 0.0 {
        return Err(FeedbackError::NegativeCurrent(current));
    }
    Ok(current / policy.current_per_newton)
}

/// Table row for `force` without hysteresis.
pub fn classify_force(force: f64, policy: &FeedbackPolicy) -> FeedbackMode {
    let [t0, t1, t2] = policy.thresholds;
    if force > t2 {
        FeedbackMode::ForceFeedback
    } else if force >= t1 {
        FeedbackMode::Waveform2
    } else if force >= t0 {
        FeedbackMode::Waveform1
    } else {
        FeedbackMode::None
    }
}

/// Next mode from `current` given `force`: rises immediately, falls only
/// below the release band.
pub fn next_mode(current: FeedbackMode, force: f64, policy: &FeedbackPolicy) -> FeedbackMode {
    let rising = classify_force(force, policy);
    if rising > current {
        return rising;
    }
    let released = classify_force(force + policy.hysteresis, policy);
    if released < current {
        released
    } else {
        current
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FingerFeedback {
    pub mode: FeedbackMode,
    /// Time of the last mode change, µs.
    pub since_us: u64,
    /// Servo angle held while the cable is tensioned.
    pub hold_target: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeedbackState {
    pub fingers: [FingerFeedback; FINGERS],
}

impl FeedbackState {
    pub fn mode(&self, finger: Finger) -> FeedbackMode {
        self.fingers[finger.index()].mode
    }
}

/// Advances one finger's feedback state with a new force sample.
///
/// Returns the new state and the command for that finger. Servo targets are
/// deltas from the zero pose.
pub fn step_feedback(
    state: &FeedbackState,
    sample: &ForceSample,
    policy: &FeedbackPolicy,
    pose: &FingerPose,
    geometry: &GloveGeometry,
) -> Result<(FeedbackState, FeedbackCommand), CableError> {
    let follow = servo_target(pose, geometry, sample.finger, ServoMode::Delta)?;
    Ok(step_with_follow(state, sample, policy, follow, geometry.rs))
}

/// [`step_feedback`] with the follow target already computed.
pub fn step_with_follow(
    state: &FeedbackState,
    sample: &ForceSample,
    policy: &FeedbackPolicy,
    follow_target: f64,
    flange_radius: f64,
) -> (FeedbackState, FeedbackCommand) {
    let idx = sample.finger.index();
    let prev = state.fingers[idx];
    let mode = next_mode(prev.mode, sample.force, policy);
    let mut next = prev;
    if mode != prev.mode {
        next.mode = mode;
        next.since_us = sample.timestamp_us;
    }
    next.hold_target = match (mode, prev.hold_target) {
        (FeedbackMode::ForceFeedback, Some(h)) => Some(h),
        (FeedbackMode::ForceFeedback, None) => {
            Some(follow_target - policy.tension_offset / flange_radius)
        }
        _ => None,
    };
    let mut out = *state;
    out.fingers[idx] = next;
    let cmd = FeedbackCommand {
        finger: sample.finger,
        waveform: mode.waveform(),
        servo_target: next.hold_target.unwrap_or(follow_target),
        force_feedback_active: mode == FeedbackMode::ForceFeedback,
    };
    (out, cmd)
}
