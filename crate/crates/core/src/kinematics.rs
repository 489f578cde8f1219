//! Finger joint angles from the two measurement cables.
//!
//! Each long finger carries an MCP cable (radius `r1` at the MCP joint) and
//! a DIP cable that wraps MCP, PIP and DIP (radii `r1p`, `r2p`, `r3p`). Both
//! drive encoder gears of radius `rg`. The PIP angle is not measured; it
//! follows the DIP angle through the affine coupling
//! `theta2 = (theta3 + b) / a`.
//!
//! Because the coupling is affine the DIP cable balance
//! `rg * theta_ed = theta1 * r1p + theta2 * r2p + theta3 * r3p` is linear in
//! `theta3` and solved in closed form.

use crate::model::{
    Calibration, ChannelMap, EncoderFrame, Finger, FingerJoints, GloveGeometry, Interval,
    JointLimits, JointState, ThumbJoints, ENCODER_CHANNELS, JOINT_CHANNELS,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("non-finite encoder reading on {0}")]
    NonFinite(&'static str),
}

/// Default PIP/DIP coupling slope.
pub const COUPLING_A: f64 = 0.989;
/// Default PIP/DIP coupling intercept, radians.
pub const COUPLING_B: f64 = 0.230;

/// PIP angle implied by a DIP angle under the default coupling.
pub fn pip_from_dip(theta3: f64) -> f64 {
    (theta3 + COUPLING_B) / COUPLING_A
}

impl GloveGeometry {
    /// PIP angle implied by a DIP angle under this geometry's coupling.
    pub fn pip_from_dip(&self, theta3: f64) -> f64 {
        (theta3 + self.pip_coupling_b) / self.pip_coupling_a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerSolveInput {
    /// MCP-cable encoder angle, radians.
    pub theta_em: f64,
    /// DIP-cable encoder angle, radians.
    pub theta_ed: f64,
    /// Zero-pose readings `(mcp, dip)` subtracted before solving.
    pub calibration_offset: (f64, f64),
}

impl FingerSolveInput {
    pub fn calibrated(theta_em: f64, theta_ed: f64) -> Self {
        FingerSolveInput {
            theta_em,
            theta_ed,
            calibration_offset: (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FingerSolveOutput {
    /// Clamped joint angles.
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    /// Angles before clamping.
    pub raw: [f64; 3],
    /// Which of `theta1..theta3` were clamped.
    pub clamped: [bool; 3],
    /// MCP cable displacement, mm.
    pub delta_p1: f64,
    /// DIP cable displacement, mm.
    pub delta_p3: f64,
    /// DIP cable elongation at MCP, PIP, DIP, mm (pre-clamp).
    pub delta_l1: f64,
    pub delta_l2: f64,
    pub delta_l3: f64,
}

impl FingerSolveOutput {
    pub fn any_clamped(&self) -> bool {
        self.clamped.iter().any(|&c| c)
    }

    /// `delta_p3 - (delta_l1 + delta_l2 + delta_l3)`, mm.
    pub fn closure_residual(&self) -> f64 {
        self.delta_p3 - (self.delta_l1 + self.delta_l2 + self.delta_l3)
    }
}

fn finite(v: f64, what: &'static str) -> Result<f64, KinematicsError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(KinematicsError::NonFinite(what))
    }
}

/// Solves MCP, PIP and DIP bend of one long finger.
pub fn solve_finger(
    input: &FingerSolveInput,
    geometry: &GloveGeometry,
    limits: &JointLimits,
) -> Result<FingerSolveOutput, KinematicsError> {
    let em = finite(input.theta_em, "theta_em")? - finite(input.calibration_offset.0, "offset")?;
    let ed = finite(input.theta_ed, "theta_ed")? - finite(input.calibration_offset.1, "offset")?;
    let g = geometry;
    let (a, b) = (g.pip_coupling_a, g.pip_coupling_b);

    let delta_p1 = g.rg * em;
    let theta1 = delta_p1 / g.r1;
    let delta_l1 = theta1 * g.r1p;
    let delta_p3 = g.rg * ed;
    let theta3 = (delta_p3 - delta_l1 - (b / a) * g.r2p) / (g.r2p / a + g.r3p);
    let theta2 = (theta3 + b) / a;
    let delta_l2 = theta2 * g.r2p;
    let delta_l3 = theta3 * g.r3p;

    let (c1, k1) = limits.mcp.clamp(theta1);
    let (c3, k3) = limits.dip.clamp(theta3);
    // PIP follows the clamped DIP so the reported pair stays coupled.
    let (c2, _) = limits.pip.clamp((c3 + b) / a);
    let k2 = c2 != theta2;
    Ok(FingerSolveOutput {
        theta1: c1,
        theta2: c2,
        theta3: c3,
        raw: [theta1, theta2, theta3],
        clamped: [k1, k2, k3],
        delta_p1,
        delta_p3,
        delta_l1,
        delta_l2,
        delta_l3,
    })
}

/// Encoder angles `(theta_em, theta_ed)` that a finger at `theta1`, `theta3`
/// (PIP coupled) produces. Exact inverse of [`solve_finger`].
pub fn encoders_from_angles(theta1: f64, theta3: f64, geometry: &GloveGeometry) -> (f64, f64) {
    let g = geometry;
    let theta_em = theta1 * g.r1 / g.rg;
    let theta_ed = (theta1 * g.r1p + g.pip_from_dip(theta3) * g.r2p + theta3 * g.r3p) / g.rg;
    (theta_em, theta_ed)
}

/// Thumb IP bend from the IP cable, which wraps the thumb MCP and IP joints.
fn thumb_ip(encoder: f64, mcp: f64, g: &GloveGeometry) -> f64 {
    (g.rg * encoder - mcp * g.thumb_r_mcp) / g.thumb_r_ip
}

fn thumb_ip_encoder(mcp: f64, ip: f64, g: &GloveGeometry) -> f64 {
    (mcp * g.thumb_r_mcp + ip * g.thumb_r_ip) / g.rg
}

/// Full-hand solve result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandSolution {
    pub joints: JointState,
    /// Angles before clamping, in [`JointState::to_array`] order.
    pub raw: [f64; JOINT_CHANNELS],
    pub clamped: [bool; JOINT_CHANNELS],
}

impl HandSolution {
    pub fn any_clamped(&self) -> bool {
        self.clamped.iter().any(|&c| c)
    }
}

/// Solver for complete encoder frames. Holds everything a solve needs
/// besides the frame itself.
#[derive(Debug, Clone)]
pub struct HandSolver {
    pub geometry: GloveGeometry,
    pub limits: JointLimits,
    pub channels: ChannelMap,
    pub calibration: Calibration,
}

impl HandSolver {
    pub fn new(
        geometry: GloveGeometry,
        limits: JointLimits,
        channels: ChannelMap,
        calibration: Calibration,
    ) -> Self {
        HandSolver {
            geometry,
            limits,
            channels,
            calibration,
        }
    }

    pub fn solve(&self, frame: &EncoderFrame) -> Result<HandSolution, KinematicsError> {
        solve_hand(
            frame,
            &self.geometry,
            &self.limits,
            &self.channels,
            &self.calibration,
        )
    }

    /// Calibrated encoder angles (offsets not yet added) for `state`.
    /// PIP values in `state` are ignored; they follow from DIP.
    pub fn encoders_for(&self, state: &JointState) -> [f64; ENCODER_CHANNELS] {
        hand_encoders_from_angles(state, &self.geometry, &self.channels)
    }
}

/// Calibrated encoder angles for every channel of `state`.
pub fn hand_encoders_from_angles(
    state: &JointState,
    geometry: &GloveGeometry,
    channels: &ChannelMap,
) -> [f64; ENCODER_CHANNELS] {
    let g = geometry;
    let mut out = [0.0; ENCODER_CHANNELS];
    out[EncoderFrame::THUMB_TM_BEND] = channels.thumb_tm_bend.to_encoder(state.thumb.tm_bend, g.rg);
    out[EncoderFrame::THUMB_TM_SPLAY] = channels
        .thumb_tm_splay
        .to_encoder(state.thumb.tm_splay, g.rg);
    out[EncoderFrame::THUMB_MCP] = channels.thumb_mcp.to_encoder(state.thumb.mcp_bend, g.rg);
    out[EncoderFrame::THUMB_IP] = thumb_ip_encoder(state.thumb.mcp_bend, state.thumb.ip_bend, g);
    for finger in Finger::LONG {
        let (em, ed, splay) = EncoderFrame::finger_channels(finger).expect("long finger");
        let j = state.finger(finger).expect("long finger");
        let (theta_em, theta_ed) = encoders_from_angles(j.theta1, j.theta3, g);
        out[em] = theta_em;
        out[ed] = theta_ed;
        out[splay] = channels.splay.to_encoder(j.splay, g.rg);
    }
    out
}

fn clamp_into(iv: Interval, raw: f64, value: &mut f64, flag: &mut bool) {
    let (c, k) = iv.clamp(raw);
    *value = c;
    *flag = k;
}

/// Solves all 20 joint angles from one encoder frame.
pub fn solve_hand(
    frame: &EncoderFrame,
    geometry: &GloveGeometry,
    limits: &JointLimits,
    channels: &ChannelMap,
    calibration: &Calibration,
) -> Result<HandSolution, KinematicsError> {
    const NAMES: [&str; ENCODER_CHANNELS] = [
        "enc_00", "enc_01", "enc_02", "enc_03", "enc_04", "enc_05", "enc_06", "enc_07", "enc_08",
        "enc_09", "enc_10", "enc_11", "enc_12", "enc_13", "enc_14", "enc_15",
    ];
    let enc = calibration.apply(frame);
    for (v, name) in enc.iter().zip(NAMES) {
        finite(*v, name)?;
    }
    let g = geometry;
    let mut raw = [0.0; JOINT_CHANNELS];
    let mut clamped = [false; JOINT_CHANNELS];
    let mut q = [0.0; JOINT_CHANNELS];

    raw[0] = channels
        .thumb_tm_bend
        .to_joint(enc[EncoderFrame::THUMB_TM_BEND], g.rg);
    raw[1] = channels
        .thumb_tm_splay
        .to_joint(enc[EncoderFrame::THUMB_TM_SPLAY], g.rg);
    raw[2] = channels
        .thumb_mcp
        .to_joint(enc[EncoderFrame::THUMB_MCP], g.rg);
    raw[3] = thumb_ip(enc[EncoderFrame::THUMB_IP], raw[2], g);

    for finger in Finger::LONG {
        let (em, ed, splay) = EncoderFrame::finger_channels(finger).expect("long finger");
        let out = solve_finger(&FingerSolveInput::calibrated(enc[em], enc[ed]), g, limits)?;
        let base = 4 * finger.index();
        raw[base..base + 3].copy_from_slice(&out.raw);
        raw[base + 3] = channels.splay.to_joint(enc[splay], g.rg);
    }

    for i in 0..JOINT_CHANNELS {
        let iv = limits.for_channel(crate::model::JointChannel(i));
        clamp_into(iv, raw[i], &mut q[i], &mut clamped[i]);
    }
    for finger in Finger::LONG {
        let pip = 4 * finger.index() + 1;
        q[pip] = limits.pip.clamp(g.pip_from_dip(q[pip + 1])).0;
        clamped[pip] = q[pip] != raw[pip];
    }

    Ok(HandSolution {
        joints: JointState::from_array(&q),
        raw,
        clamped,
    })
}

/// A pose whose PIP angles are made consistent with its DIP angles.
pub fn coupled(state: &JointState, geometry: &GloveGeometry) -> JointState {
    let mut s = *state;
    for f in s.fingers.iter_mut() {
        *f = FingerJoints {
            theta2: geometry.pip_from_dip(f.theta3),
            ..*f
        };
    }
    s
}

/// Thumb joints helper for building poses in tests and trajectories.
pub fn thumb(tm_bend: f64, tm_splay: f64, mcp_bend: f64, ip_bend: f64) -> ThumbJoints {
    ThumbJoints {
        tm_bend,
        tm_splay,
        mcp_bend,
        ip_bend,
    }
}
