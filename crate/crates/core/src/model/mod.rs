//! Domain types shared by every other module: glove geometry, encoder
//! frames, joint states, force samples and feedback commands, plus the
//! configuration schema.

mod config;
mod encoder;
mod geometry;

pub use config::{
    BusConfig, Config, ConfigError, ContactModel, FeedbackPolicy, NoiseModel, SimConfig,
    StageLatencies, TrajectorySpec,
};
pub use encoder::{
    decode_counts, Calibration, ChannelMap, DirectChannel, EncoderError, EncoderFrame,
    EncoderResolution, EncoderSettings, ENCODER_CHANNELS,
};
pub use geometry::{
    GloveGeometry, Interval, JointLimits, RoutingPath, RoutingPoint, ROUTING_POINTS,
};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Number of named joint angles in a [`JointState`].
pub const JOINT_CHANNELS: usize = 20;

/// Number of fingers, thumb included.
pub const FINGERS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Finger {
    Thumb,
    Index,
    Middle,
    Ring,
    Pinky,
}

impl Finger {
    pub const ALL: [Finger; FINGERS] = [
        Finger::Thumb,
        Finger::Index,
        Finger::Middle,
        Finger::Ring,
        Finger::Pinky,
    ];

    /// The four fingers that carry the MCP/DIP two-cable measurement.
    pub const LONG: [Finger; 4] = [Finger::Index, Finger::Middle, Finger::Ring, Finger::Pinky];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Finger> {
        Finger::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Finger::Thumb => "thumb",
            Finger::Index => "index",
            Finger::Middle => "middle",
            Finger::Ring => "ring",
            Finger::Pinky => "pinky",
        }
    }

    /// Joint channel holding the distal bend of this finger (DIP, or IP for
    /// the thumb).
    pub fn distal_channel(self) -> JointChannel {
        match self {
            Finger::Thumb => JointChannel::THUMB_IP,
            f => JointChannel(4 * f.index() + 2),
        }
    }
}

impl fmt::Display for Finger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Finger {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Finger::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown finger `{s}`"))
    }
}

/// Index into the 20-angle joint vector.
///
/// Layout: thumb `tm_bend, tm_splay, mcp, ip`, then for index, middle, ring
/// and pinky in turn `mcp, pip, dip, splay`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointChannel(pub usize);

const CHANNEL_NAMES: [&str; JOINT_CHANNELS] = [
    "thumb.tm_bend",
    "thumb.tm_splay",
    "thumb.mcp",
    "thumb.ip",
    "index.mcp",
    "index.pip",
    "index.dip",
    "index.splay",
    "middle.mcp",
    "middle.pip",
    "middle.dip",
    "middle.splay",
    "ring.mcp",
    "ring.pip",
    "ring.dip",
    "ring.splay",
    "pinky.mcp",
    "pinky.pip",
    "pinky.dip",
    "pinky.splay",
];

impl JointChannel {
    pub const THUMB_TM_BEND: JointChannel = JointChannel(0);
    pub const THUMB_TM_SPLAY: JointChannel = JointChannel(1);
    pub const THUMB_MCP: JointChannel = JointChannel(2);
    pub const THUMB_IP: JointChannel = JointChannel(3);

    pub fn all() -> impl Iterator<Item = JointChannel> {
        (0..JOINT_CHANNELS).map(JointChannel)
    }

    pub fn name(self) -> &'static str {
        CHANNEL_NAMES[self.0]
    }

    pub fn from_name(name: &str) -> Option<JointChannel> {
        CHANNEL_NAMES
            .iter()
            .position(|n| *n == name)
            .map(JointChannel)
    }

    pub fn finger(self) -> Finger {
        if self.0 < 4 {
            Finger::Thumb
        } else {
            Finger::ALL[self.0 / 4]
        }
    }

    /// PIP channel of a long finger, if this is one.
    pub fn is_pip(self) -> bool {
        self.0 >= 4 && self.0 % 4 == 1
    }

    pub fn is_splay(self) -> bool {
        self == Self::THUMB_TM_SPLAY || (self.0 >= 4 && self.0 % 4 == 3)
    }
}

impl fmt::Display for JointChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bend and splay angles of one long finger, radians.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FingerJoints {
    /// MCP bend.
    pub theta1: f64,
    /// PIP bend (coupled, never measured).
    pub theta2: f64,
    /// DIP bend.
    pub theta3: f64,
    /// MCP abduction.
    pub splay: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ThumbJoints {
    pub tm_bend: f64,
    pub tm_splay: f64,
    pub mcp_bend: f64,
    pub ip_bend: f64,
}

/// The glove's 20-DoF pose: 16 measured angles and 4 coupled PIP values.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct JointState {
    pub thumb: ThumbJoints,
    /// Index, middle, ring, pinky.
    pub fingers: [FingerJoints; 4],
}

impl JointState {
    pub fn to_array(&self) -> [f64; JOINT_CHANNELS] {
        let mut out = [0.0; JOINT_CHANNELS];
        out[0] = self.thumb.tm_bend;
        out[1] = self.thumb.tm_splay;
        out[2] = self.thumb.mcp_bend;
        out[3] = self.thumb.ip_bend;
        for (i, f) in self.fingers.iter().enumerate() {
            let base = 4 * (i + 1);
            out[base] = f.theta1;
            out[base + 1] = f.theta2;
            out[base + 2] = f.theta3;
            out[base + 3] = f.splay;
        }
        out
    }

    pub fn from_array(q: &[f64; JOINT_CHANNELS]) -> Self {
        let mut fingers = [FingerJoints::default(); 4];
        for (i, f) in fingers.iter_mut().enumerate() {
            let base = 4 * (i + 1);
            *f = FingerJoints {
                theta1: q[base],
                theta2: q[base + 1],
                theta3: q[base + 2],
                splay: q[base + 3],
            };
        }
        JointState {
            thumb: ThumbJoints {
                tm_bend: q[0],
                tm_splay: q[1],
                mcp_bend: q[2],
                ip_bend: q[3],
            },
            fingers,
        }
    }

    pub fn get(&self, channel: JointChannel) -> f64 {
        self.to_array()[channel.0]
    }

    /// Joints of a long finger; `None` for the thumb.
    pub fn finger(&self, finger: Finger) -> Option<&FingerJoints> {
        match finger {
            Finger::Thumb => None,
            f => Some(&self.fingers[f.index() - 1]),
        }
    }

    /// The three bend angles that drive a finger's feedback-cable path.
    /// For the thumb these are TM bend, MCP bend and IP bend.
    pub fn bend_chain(&self, finger: Finger) -> [f64; 3] {
        match finger {
            Finger::Thumb => [self.thumb.tm_bend, self.thumb.mcp_bend, self.thumb.ip_bend],
            f => {
                let j = &self.fingers[f.index() - 1];
                [j.theta1, j.theta2, j.theta3]
            }
        }
    }
}

/// One force reading from the robot hand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSample {
    pub finger: Finger,
    /// Motor current, mA.
    pub current: f64,
    /// Contact force, N.
    pub force: f64,
    pub timestamp_us: u64,
}

/// LRA drive waveform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Waveform {
    #[default]
    Off,
    Waveform1,
    Waveform2,
}

impl Waveform {
    /// Register encoding: 0 off, 1 and 2 for the two waveforms.
    pub fn id(self) -> u16 {
        match self {
            Waveform::Off => 0,
            Waveform::Waveform1 => 1,
            Waveform::Waveform2 => 2,
        }
    }

    pub fn from_id(id: u16) -> Option<Waveform> {
        match id {
            0 => Some(Waveform::Off),
            1 => Some(Waveform::Waveform1),
            2 => Some(Waveform::Waveform2),
            _ => None,
        }
    }
}

/// Per-finger actuator command emitted by the feedback policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackCommand {
    pub finger: Finger,
    pub waveform: Waveform,
    /// Servo target, radians.
    pub servo_target: f64,
    /// Cable tensioned against flexion.
    pub force_feedback_active: bool,
}

impl FeedbackCommand {
    /// Vibration and cable tension never run together.
    pub fn is_exclusive(&self) -> bool {
        !(self.force_feedback_active && self.waveform != Waveform::Off)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_names_are_unique_and_resolve() {
        for ch in JointChannel::all() {
            assert_eq!(JointChannel::from_name(ch.name()), Some(ch));
        }
        assert_eq!(
            JointChannel::from_name("index.dip"),
            Some(Finger::Index.distal_channel())
        );
        assert_eq!(
            JointChannel::from_name("thumb.ip"),
            Some(Finger::Thumb.distal_channel())
        );
        assert_eq!(JointChannel::from_name("wrist"), None);
    }

    #[test]
    fn joint_state_array_layout() {
        let mut q = [0.0; JOINT_CHANNELS];
        for (i, v) in q.iter_mut().enumerate() {
            *v = i as f64;
        }
        let s = JointState::from_array(&q);
        assert_eq!(s.to_array(), q);
        assert_eq!(s.fingers[0].theta3, 6.0);
        assert_eq!(s.thumb.ip_bend, 3.0);
        assert_eq!(s.bend_chain(Finger::Ring), [12.0, 13.0, 14.0]);
        assert_eq!(s.bend_chain(Finger::Thumb), [0.0, 2.0, 3.0]);
        assert_eq!(JointChannel(13).finger(), Finger::Ring);
        assert!(JointChannel(13).is_pip());
        assert!(JointChannel(19).is_splay());
    }

    #[test]
    fn waveform_ids_round_trip() {
        for w in [Waveform::Off, Waveform::Waveform1, Waveform::Waveform2] {
            assert_eq!(Waveform::from_id(w.id()), Some(w));
        }
        assert_eq!(Waveform::from_id(3), None);
    }
}
