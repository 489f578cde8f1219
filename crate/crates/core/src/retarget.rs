//! Joint-space retargeting of the glove pose onto robot hands.
//!
//! A hand model is a list of joints, each reading one glove channel with a
//! gain and an offset and clamping to its limits. Models are TOML data
//! files; three presets (6, 15 and 24 DoF) ship with the crate.

use crate::model::{Interval, JointChannel, JointState};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RetargetError {
    #[error("joint `{joint}`: unknown glove channel `{source_name}`")]
    DanglingChannel { joint: String, source_name: String },
    #[error("joint `{joint}`: {message}")]
    InvalidJoint { joint: String, message: String },
    #[error("hand model has no joints")]
    Empty,
    #[error("hand model parse error: {0}")]
    Parse(String),
    #[error("cannot read hand model {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown hand model preset `{0}`")]
    UnknownPreset(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandJoint {
    pub name: String,
    pub limits: Interval,
    pub source: JointChannel,
    pub scale: f64,
    /// radians
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandModel {
    pub name: String,
    pub joints: Vec<HandJoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandCommand {
    pub model: String,
    /// radians, one per joint
    pub targets: Vec<f64>,
    pub clamp_mask: Vec<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HandModelFile {
    name: String,
    joints: Vec<HandJointFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HandJointFile {
    name: String,
    source: String,
    /// degrees
    limits: [f64; 2],
    #[serde(default = "unit")]
    scale: f64,
    /// degrees
    #[serde(default)]
    offset: f64,
}

fn unit() -> f64 {
    1.0
}

const PRESETS: [(&str, &str); 3] = [
    ("6dof", include_str!("../models/hand_6dof.toml")),
    ("15dof", include_str!("../models/hand_15dof.toml")),
    ("24dof", include_str!("../models/hand_24dof.toml")),
];

/// The bundled 6-, 15- and 24-DoF hand models.
pub fn builtin_models() -> Vec<HandModel> {
    PRESETS
        .iter()
        .map(|(_, text)| HandModel::from_toml(text).expect("bundled hand model is valid"))
        .collect()
}

impl HandModel {
    pub fn preset(name: &str) -> Result<HandModel, RetargetError> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| HandModel::from_toml(text).expect("bundled hand model is valid"))
            .ok_or_else(|| RetargetError::UnknownPreset(name.to_string()))
    }

    /// Preset name or path to a model file.
    pub fn resolve(name_or_path: &str) -> Result<HandModel, RetargetError> {
        match Self::preset(name_or_path) {
            Ok(m) => Ok(m),
            Err(RetargetError::UnknownPreset(_)) if Path::new(name_or_path).exists() => {
                Self::load(name_or_path)
            }
            Err(e) => Err(e),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<HandModel, RetargetError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| RetargetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<HandModel, RetargetError> {
        let file: HandModelFile =
            toml::from_str(text).map_err(|e| RetargetError::Parse(e.to_string()))?;
        let joints = file
            .joints
            .into_iter()
            .map(|j| {
                let source = JointChannel::from_name(&j.source).ok_or_else(|| {
                    RetargetError::DanglingChannel {
                        joint: j.name.clone(),
                        source_name: j.source.clone(),
                    }
                })?;
                Ok(HandJoint {
                    limits: Interval::degrees(j.limits[0], j.limits[1]),
                    source,
                    scale: j.scale,
                    offset: j.offset.to_radians(),
                    name: j.name,
                })
            })
            .collect::<Result<Vec<_>, RetargetError>>()?;
        let model = HandModel {
            name: file.name,
            joints,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn to_toml(&self) -> String {
        let file = HandModelFile {
            name: self.name.clone(),
            joints: self
                .joints
                .iter()
                .map(|j| HandJointFile {
                    name: j.name.clone(),
                    source: j.source.name().to_string(),
                    limits: [j.limits.lo.to_degrees(), j.limits.hi.to_degrees()],
                    scale: j.scale,
                    offset: j.offset.to_degrees(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("hand model serializes")
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn validate(&self) -> Result<(), RetargetError> {
        if self.joints.is_empty() {
            return Err(RetargetError::Empty);
        }
        for j in &self.joints {
            let bad = |message: &str| RetargetError::InvalidJoint {
                joint: j.name.clone(),
                message: message.to_string(),
            };
            if j.source.0 >= crate::model::JOINT_CHANNELS {
                return Err(RetargetError::DanglingChannel {
                    joint: j.name.clone(),
                    source_name: format!("#{}", j.source.0),
                });
            }
            if !(j.limits.lo.is_finite() && j.limits.hi.is_finite() && j.limits.lo <= j.limits.hi) {
                return Err(bad("limits must be finite and ordered"));
            }
            if !(j.scale.is_finite() && j.offset.is_finite()) {
                return Err(bad("scale and offset must be finite"));
            }
        }
        Ok(())
    }

    pub fn sources(&self) -> impl Iterator<Item = JointChannel> + '_ {
        self.joints.iter().map(|j| j.source)
    }
}

/// Maps a glove pose onto `model`: `clamp(scale * source + offset)`.
pub fn retarget(state: &JointState, model: &HandModel) -> HandCommand {
    let q = state.to_array();
    let mut targets = Vec::with_capacity(model.dof());
    let mut clamp_mask = Vec::with_capacity(model.dof());
    for j in &model.joints {
        let (t, clamped) = j.limits.clamp(j.scale * q[j.source.0] + j.offset);
        targets.push(t);
        clamp_mask.push(clamped);
    }
    HandCommand {
        model: model.name.clone(),
        targets,
        clamp_mask,
    }
}

impl HandCommand {
    /// Target of the first joint driven by `channel`.
    pub fn target_for(&self, model: &HandModel, channel: JointChannel) -> Option<f64> {
        model
            .joints
            .iter()
            .position(|j| j.source == channel)
            .map(|i| self.targets[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::pip_from_dip;
    use crate::model::{Finger, JOINT_CHANNELS};

    #[test]
    fn preset_dof_counts() {
        let dofs: Vec<usize> = builtin_models().iter().map(HandModel::dof).collect();
        assert_eq!(dofs, vec![6, 15, 24]);
    }

    #[test]
    fn six_dof_wiring() {
        let m = HandModel::preset("6dof").unwrap();
        let mut sources: Vec<&str> = m.sources().map(JointChannel::name).collect();
        sources.sort();
        let mut expected = vec![
            "index.dip",
            "middle.dip",
            "ring.dip",
            "pinky.dip",
            "thumb.ip",
            "thumb.tm_splay",
        ];
        expected.sort();
        assert_eq!(sources, expected);
    }

    #[test]
    fn zero_state_zero_command() {
        let m = HandModel::preset("6dof").unwrap();
        let cmd = retarget(&JointState::default(), &m);
        assert!(cmd.targets.iter().all(|&t| t == 0.0));
        assert!(cmd.clamp_mask.iter().all(|&c| !c));
    }

    #[test]
    fn clamps_at_upper_limit() {
        let text = r#"
            name = "one"
            [[joints]]
            name = "dip"
            source = "index.dip"
            limits = [0.0, 90.0]
        "#;
        let mut m = HandModel::from_toml(text).unwrap();
        m.joints[0].limits.hi = 1.571;
        let mut q = [0.0; JOINT_CHANNELS];
        q[Finger::Index.distal_channel().0] = 2.0;
        let cmd = retarget(&JointState::from_array(&q), &m);
        assert_eq!(cmd.targets, vec![1.571]);
        assert_eq!(cmd.clamp_mask, vec![true]);
    }

    #[test]
    fn dangling_source_rejected() {
        let text = r#"
            name = "bad"
            [[joints]]
            name = "x"
            source = "index.wrist"
            limits = [0.0, 1.0]
        "#;
        assert!(matches!(
            HandModel::from_toml(text).unwrap_err(),
            RetargetError::DanglingChannel { .. }
        ));
    }

    #[test]
    fn unordered_limits_rejected() {
        let text = r#"
            name = "bad"
            [[joints]]
            name = "x"
            source = "index.dip"
            limits = [10.0, 1.0]
        "#;
        assert!(matches!(
            HandModel::from_toml(text).unwrap_err(),
            RetargetError::InvalidJoint { .. }
        ));
    }

    #[test]
    fn twenty_four_dof_pip_tracks_dip() {
        let m = HandModel::preset("24dof").unwrap();
        let mut q = [0.0; JOINT_CHANNELS];
        for f in Finger::LONG {
            let dip = 0.1 * f.index() as f64;
            q[f.distal_channel().0] = dip;
            q[f.distal_channel().0 - 1] = pip_from_dip(dip);
        }
        let cmd = retarget(&JointState::from_array(&q), &m);
        for f in Finger::LONG {
            let dip = cmd.target_for(&m, f.distal_channel()).unwrap();
            let pip = cmd
                .target_for(&m, JointChannel(f.distal_channel().0 - 1))
                .unwrap();
            assert_eq!(pip, pip_from_dip(dip));
        }
    }

    #[test]
    fn model_text_round_trip() {
        for m in builtin_models() {
            let back = HandModel::from_toml(&m.to_toml()).unwrap();
            assert_eq!(back.dof(), m.dof());
            assert_eq!(back.name, m.name);
            for (a, b) in back.joints.iter().zip(&m.joints) {
                assert_eq!(a.source, b.source);
                assert!((a.limits.hi - b.limits.hi).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(
            HandModel::resolve("no-such-hand").unwrap_err(),
            RetargetError::UnknownPreset(_)
        ));
    }
}
