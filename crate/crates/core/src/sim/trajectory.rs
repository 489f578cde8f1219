use super::SimError;
use crate::model::{JointChannel, JointState, TrajectorySpec, JOINT_CHANNELS};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::Read;
use std::path::Path;

/// Operator motion over time. Returned poses carry measured channels only;
/// the simulator derives PIP from DIP.
pub trait Trajectory {
    fn pose_at(&self, t_us: u64) -> Option<JointState>;
    /// Last time the trajectory is defined at, or `None` if unbounded.
    fn duration_us(&self) -> Option<u64>;
}

fn pose_from_map(map: &BTreeMap<JointChannel, f64>) -> [f64; JOINT_CHANNELS] {
    let mut q = [0.0; JOINT_CHANNELS];
    for (ch, v) in map {
        q[ch.0] = *v;
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaticPose(pub JointState);

impl Trajectory for StaticPose {
    fn pose_at(&self, _t_us: u64) -> Option<JointState> {
        Some(self.0)
    }

    fn duration_us(&self) -> Option<u64> {
        None
    }
}

/// Raised-cosine motion `from -> to -> from`, repeating every `period_us`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclePose {
    pub period_us: u64,
    pub from: [f64; JOINT_CHANNELS],
    pub to: [f64; JOINT_CHANNELS],
}

impl CyclePose {
    pub fn new(period_us: u64, from: JointState, to: JointState) -> Self {
        CyclePose {
            period_us,
            from: from.to_array(),
            to: to.to_array(),
        }
    }
}

impl Trajectory for CyclePose {
    fn pose_at(&self, t_us: u64) -> Option<JointState> {
        let phase = (t_us % self.period_us) as f64 / self.period_us as f64;
        let w = 0.5 * (1.0 - (TAU * phase).cos());
        let q: [f64; JOINT_CHANNELS] =
            std::array::from_fn(|i| self.from[i] + (self.to[i] - self.from[i]) * w);
        Some(JointState::from_array(&q))
    }

    fn duration_us(&self) -> Option<u64> {
        None
    }
}

/// Sampled joint angles, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedPose {
    samples: Vec<(u64, [f64; JOINT_CHANNELS])>,
}

impl RecordedPose {
    pub fn new(samples: Vec<(u64, [f64; JOINT_CHANNELS])>) -> Result<Self, SimError> {
        if samples.is_empty() {
            return Err(SimError::Trajectory("recorded trajectory is empty".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SimError::Trajectory(
                "recorded timestamps must be strictly increasing".into(),
            ));
        }
        Ok(RecordedPose { samples })
    }

    /// Reads `timestamp_us, q_00..q_19` (degrees); `#` lines are comments.
    pub fn from_csv(reader: impl Read) -> Result<Self, SimError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| SimError::Trajectory(format!("missing column `{name}`")))
        };
        let t_col = col("timestamp_us")?;
        let q_cols: Vec<usize> = (0..JOINT_CHANNELS)
            .map(|i| col(&format!("q_{i:02}")))
            .collect::<Result<_, _>>()?;
        let mut samples = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |c: usize| -> Result<f64, SimError> {
                record[c].parse::<f64>().map_err(|e| {
                    SimError::Trajectory(format!("row {}: column {}: {e}", line + 1, &headers[c]))
                })
            };
            let t = record[t_col].parse::<u64>().map_err(|e| {
                SimError::Trajectory(format!("row {}: timestamp_us: {e}", line + 1))
            })?;
            let mut q = [0.0; JOINT_CHANNELS];
            for (i, &c) in q_cols.iter().enumerate() {
                q[i] = parse(c)?.to_radians();
            }
            samples.push((t, q));
        }
        Self::new(samples)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let file = std::fs::File::open(path.as_ref()).map_err(|e| {
            SimError::Trajectory(format!("cannot open {}: {e}", path.as_ref().display()))
        })?;
        Self::from_csv(file)
    }
}

impl Trajectory for RecordedPose {
    fn pose_at(&self, t_us: u64) -> Option<JointState> {
        let i = self.samples.partition_point(|(t, _)| *t <= t_us);
        if i == 0 {
            return None;
        }
        let (t0, q0) = &self.samples[i - 1];
        if *t0 == t_us || i == self.samples.len() {
            return (*t0 == t_us).then(|| JointState::from_array(q0));
        }
        let (t1, q1) = &self.samples[i];
        let w = (t_us - t0) as f64 / (t1 - t0) as f64;
        let q: [f64; JOINT_CHANNELS] = std::array::from_fn(|k| q0[k] + (q1[k] - q0[k]) * w);
        Some(JointState::from_array(&q))
    }

    fn duration_us(&self) -> Option<u64> {
        self.samples.last().map(|(t, _)| *t)
    }
}

/// Builds the trajectory a configuration describes.
pub fn from_spec(spec: &TrajectorySpec) -> Result<Box<dyn Trajectory + Send + Sync>, SimError> {
    Ok(match spec {
        TrajectorySpec::Static { pose } => {
            Box::new(StaticPose(JointState::from_array(&pose_from_map(pose))))
        }
        TrajectorySpec::Cycle {
            period_us,
            from,
            to,
        } => Box::new(CyclePose {
            period_us: *period_us,
            from: pose_from_map(from),
            to: pose_from_map(to),
        }),
        TrajectorySpec::Recorded { path } => Box::new(RecordedPose::load(path)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_hits_endpoints() {
        let mut to = JointState::default();
        to.fingers[0].theta3 = 1.0;
        let c = CyclePose::new(1000, JointState::default(), to);
        assert_eq!(c.pose_at(0).unwrap().fingers[0].theta3, 0.0);
        assert_eq!(c.pose_at(500).unwrap().fingers[0].theta3, 1.0);
        assert_eq!(c.pose_at(1000).unwrap().fingers[0].theta3, 0.0);
        assert_eq!(c.pose_at(250).unwrap(), c.pose_at(1250).unwrap());
    }

    #[test]
    fn recorded_interpolates_and_ends() {
        let mut a = [0.0; JOINT_CHANNELS];
        let mut b = [0.0; JOINT_CHANNELS];
        a[6] = 0.0;
        b[6] = 1.0;
        let r = RecordedPose::new(vec![(0, a), (100, b)]).unwrap();
        assert_eq!(r.pose_at(25).unwrap().fingers[0].theta3, 0.25);
        assert_eq!(r.pose_at(100).unwrap().fingers[0].theta3, 1.0);
        assert!(r.pose_at(101).is_none());
        assert_eq!(r.duration_us(), Some(100));
    }

    #[test]
    fn recorded_from_csv_in_degrees() {
        let mut text = String::from("# joint angles in degrees\ntimestamp_us");
        for i in 0..JOINT_CHANNELS {
            text.push_str(&format!(",q_{i:02}"));
        }
        text.push('\n');
        for (t, dip) in [(0, 0.0), (10_000, 90.0)] {
            text.push_str(&t.to_string());
            for i in 0..JOINT_CHANNELS {
                text.push_str(&format!(",{}", if i == 6 { dip } else { 0.0 }));
            }
            text.push('\n');
        }
        let r = RecordedPose::from_csv(text.as_bytes()).unwrap();
        let mid = r.pose_at(5_000).unwrap().fingers[0].theta3;
        assert!((mid - 45f64.to_radians()).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_recording_rejected() {
        let q = [0.0; JOINT_CHANNELS];
        assert!(RecordedPose::new(vec![(10, q), (10, q)]).is_err());
        assert!(RecordedPose::new(vec![]).is_err());
    }
}
