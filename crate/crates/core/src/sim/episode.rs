use super::trace::{Trace, TraceRow};
use super::trajectory::{from_spec, Trajectory};
use super::SimError;
use crate::bus::client::Master;
use crate::bus::registers::{servo_to_register, ENCODER_BASE, LRA_BASE, SERVO_BASE};
use crate::bus::transport::DirectLink;
use crate::bus::GloveDevice;
use crate::cable::{CableFollower, FingerPose};
use crate::feedback::{current_to_force, step_with_follow, FeedbackMode, FeedbackState};
use crate::kinematics::{coupled, hand_encoders_from_angles, solve_hand, HandSolution};
use crate::model::{
    Calibration, Config, EncoderFrame, FeedbackCommand, Finger, ForceSample, JointState,
    ENCODER_CHANNELS, FINGERS,
};
use crate::retarget::{retarget, HandModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
enum Event {
    /// A force sample reaches the controller.
    ForceArrives(ForceSample),
    /// A feedback command reaches the glove; vibration switches now.
    GloveReceives(FeedbackCommand),
    /// The servo has moved to the commanded target.
    ServoSettles(FeedbackCommand),
}

#[derive(Debug)]
struct Scheduled {
    at_us: u64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.at_us, self.seq) == (other.at_us, other.seq)
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.at_us, self.seq).cmp(&(other.at_us, other.seq))
    }
}

/// Glove-side state the trace reports.
#[derive(Debug, Clone, Copy, Default)]
struct Rendered {
    waveform_mode: [FeedbackMode; FINGERS],
    tensioned: [bool; FINGERS],
    servo: [f64; FINGERS],
}

impl Rendered {
    fn modes(&self) -> [FeedbackMode; FINGERS] {
        std::array::from_fn(|i| {
            if self.tensioned[i] {
                FeedbackMode::ForceFeedback
            } else {
                self.waveform_mode[i]
            }
        })
    }
}

/// One closed-loop episode in progress.
pub struct Simulator<'a> {
    config: &'a Config,
    model: &'a HandModel,
    trajectory: &'a dyn Trajectory,
    follower: CableFollower,
    calibration: Calibration,
    device: GloveDevice,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    queue: BinaryHeap<Reverse<Scheduled>>,
    seq: u64,
    controller: FeedbackState,
    latest: Option<HandSolution>,
    rendered: Rendered,
}

impl<'a> Simulator<'a> {
    pub fn new(
        config: &'a Config,
        trajectory: &'a dyn Trajectory,
        model: &'a HandModel,
    ) -> Result<Self, SimError> {
        config.validate()?;
        model.validate()?;
        let sim = &config.sim;
        if let Some(end) = trajectory.duration_us() {
            let needed = last_tick(sim.duration_us, sim.tick_us);
            if end < needed {
                return Err(SimError::TrajectoryTooShort {
                    needed_us: needed,
                    available_us: end,
                });
            }
        }
        let noise = (sim.noise.encoder_std > 0.0)
            .then(|| Normal::new(0.0, sim.noise.encoder_std).expect("validated std"));
        Ok(Simulator {
            config,
            model,
            trajectory,
            follower: CableFollower::new(config.geometry.clone())?,
            calibration: Calibration::mount_zero(&config.encoders),
            device: GloveDevice::new(config.bus.address),
            rng: ChaCha8Rng::seed_from_u64(sim.seed),
            noise,
            queue: BinaryHeap::new(),
            seq: 0,
            controller: FeedbackState::default(),
            latest: None,
            rendered: Rendered::default(),
        })
    }

    fn schedule(&mut self, at_us: u64, event: Event) {
        self.seq += 1;
        self.queue.push(Reverse(Scheduled {
            at_us,
            seq: self.seq,
            event,
        }));
    }

    fn drain(&mut self, now_us: u64) -> Result<(), SimError> {
        while self
            .queue
            .peek()
            .is_some_and(|Reverse(s)| s.at_us <= now_us)
        {
            let Reverse(s) = self.queue.pop().expect("peeked");
            self.handle(s.at_us, s.event)?;
        }
        Ok(())
    }

    fn handle(&mut self, at_us: u64, event: Event) -> Result<(), SimError> {
        let lat = self.config.sim.latencies;
        match event {
            Event::ForceArrives(sample) => {
                let f = sample.finger;
                let pose = self
                    .latest
                    .map(|s| s.joints.bend_chain(f))
                    .unwrap_or([0.0; 3]);
                let follow = self.follower.delta_target(f, &FingerPose { theta: pose });
                let (state, cmd) = step_with_follow(
                    &self.controller,
                    &sample,
                    &self.config.feedback,
                    follow,
                    self.config.geometry.rs,
                );
                self.controller = state;
                self.schedule(
                    at_us + lat.compute + lat.bus_down,
                    Event::GloveReceives(cmd),
                );
            }
            Event::GloveReceives(cmd) => {
                let i = cmd.finger.index();
                let mut master =
                    Master::new(DirectLink::new(&mut self.device), self.config.bus.address);
                master.write_multiple(LRA_BASE + i as u16, &[cmd.waveform.id()])?;
                master.write_multiple(
                    SERVO_BASE + i as u16,
                    &[servo_to_register(cmd.servo_target)],
                )?;
                self.rendered.waveform_mode[i] = match cmd.waveform.id() {
                    1 => FeedbackMode::Waveform1,
                    2 => FeedbackMode::Waveform2,
                    _ => FeedbackMode::None,
                };
                if !cmd.force_feedback_active {
                    self.rendered.tensioned[i] = false;
                }
                self.schedule(at_us + lat.servo_mech, Event::ServoSettles(cmd));
            }
            Event::ServoSettles(cmd) => {
                let i = cmd.finger.index();
                self.rendered.servo[i] = cmd.servo_target;
                self.rendered.tensioned[i] = cmd.force_feedback_active;
            }
        }
        Ok(())
    }

    /// Encoder angles (offset included) for the operator pose at `t_us`.
    fn sense(&mut self, pose: &JointState, t_us: u64) -> [f64; ENCODER_CHANNELS] {
        let cfg = self.config;
        let ideal = hand_encoders_from_angles(pose, &cfg.geometry, &cfg.encoders.channels);
        let drift = cfg.sim.noise.drift * t_us as f64 * 1e-6;
        let zero = cfg.encoders.zero_angle();
        let mut out = [0.0; ENCODER_CHANNELS];
        for (o, a) in out.iter_mut().zip(ideal) {
            let n = match &self.noise {
                Some(d) => d.sample(&mut self.rng),
                None => 0.0,
            };
            *o = a + zero + drift + n;
        }
        out
    }

    /// Advances to tick time `t_us` and returns its trace row.
    pub fn tick(&mut self, t_us: u64) -> Result<TraceRow, SimError> {
        let cfg = self.config;
        self.drain(t_us)?;
        let truth = self
            .trajectory
            .pose_at(t_us)
            .ok_or(SimError::TrajectoryTooShort {
                needed_us: t_us,
                available_us: self.trajectory.duration_us().unwrap_or(0),
            })?;
        let truth = coupled(&truth, &cfg.geometry);
        let angles = self.sense(&truth, t_us);
        let res = cfg.encoders.resolution;
        let counts = angles.map(|a| res.quantize(a));
        self.device
            .inject_counts(&counts.map(|c| u16::try_from(c).unwrap_or(u16::MAX)));
        let mut master = Master::new(DirectLink::new(&mut self.device), cfg.bus.address);
        let polled = master.read_input(ENCODER_BASE, ENCODER_CHANNELS as u16)?;
        let polled: [u32; ENCODER_CHANNELS] = std::array::from_fn(|i| polled[i] as u32);
        let frame = if cfg.sim.quantize {
            EncoderFrame::from_counts(t_us, polled, res)
                .map_err(|e| SimError::Trajectory(e.to_string()))?
        } else {
            EncoderFrame::ideal(t_us, angles, res)
        };
        let solution = solve_hand(
            &frame,
            &cfg.geometry,
            &cfg.limits,
            &cfg.encoders.channels,
            &self.calibration,
        )?;
        self.latest = Some(solution);
        let command = retarget(&solution.joints, self.model);

        let lat = cfg.sim.latencies;
        let mut currents = [0u16; FINGERS];
        let mut sensed = [0.0; FINGERS];
        for f in Finger::ALL {
            let ch = f.distal_channel();
            let distal = command
                .target_for(self.model, ch)
                .unwrap_or(solution.joints.to_array()[ch.0]);
            let current = cfg.sim.contact.force(distal) * cfg.feedback.current_per_newton;
            currents[f.index()] = current.round().clamp(0.0, u16::MAX as f64) as u16;
            // The controller only sees the current; log the force it derives.
            let force = current_to_force(current, &cfg.feedback)
                .map_err(|e| SimError::Trajectory(e.to_string()))?;
            sensed[f.index()] = force;
            let sample = ForceSample {
                finger: f,
                current,
                force,
                timestamp_us: t_us,
            };
            self.schedule(t_us + lat.sensor + lat.bus_up, Event::ForceArrives(sample));
        }
        self.device.inject_currents(&currents);
        self.drain(t_us)?;

        Ok(TraceRow {
            timestamp_us: t_us,
            counts: frame.raw_counts,
            q: solution.joints.to_array(),
            cmd: command.targets,
            force: sensed,
            mode: self.rendered.modes(),
            servo: self.rendered.servo,
        })
    }

    /// Runs every tick of the episode and returns the full-rate trace.
    pub fn run(mut self) -> Result<Trace, SimError> {
        let sim = &self.config.sim;
        let mut rows = Vec::new();
        let mut t = 0;
        while t < sim.duration_us {
            rows.push(self.tick(t)?);
            t += sim.tick_us;
        }
        Ok(Trace {
            hand_model: self.model.name.clone(),
            row_period_us: sim.tick_us,
            rows,
        })
    }
}

fn last_tick(duration_us: u64, tick_us: u64) -> u64 {
    if duration_us == 0 {
        0
    } else {
        (duration_us - 1) / tick_us * tick_us
    }
}

/// Full-rate trace of one episode.
pub fn run_episode(
    config: &Config,
    trajectory: &dyn Trajectory,
    model: &HandModel,
) -> Result<Trace, SimError> {
    Simulator::new(config, trajectory, model)?.run()
}

/// Seed of episode `index` in a batch started from `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64
    let mut z = base.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `episodes` independent episodes run on worker threads. Episode `i` uses
/// `derive_seed(config.sim.seed, i)`; results come back in index order.
pub fn run_episodes(config: &Config, episodes: usize) -> Result<Vec<Trace>, SimError> {
    let model = HandModel::resolve(&config.sim.hand_model)?;
    let trajectory = from_spec(&config.sim.trajectory)?;
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(episodes.max(1));
    let mut results: Vec<Option<Result<Trace, SimError>>> = (0..episodes).map(|_| None).collect();
    std::thread::scope(|scope| {
        let chunks: Vec<_> = results
            .chunks_mut(episodes.div_ceil(workers).max(1))
            .collect();
        let mut start = 0;
        for chunk in chunks {
            let first = start;
            start += chunk.len();
            let (model, trajectory) = (&model, &trajectory);
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    let mut cfg = config.clone();
                    cfg.sim.seed = derive_seed(config.sim.seed, (first + k) as u64);
                    *slot = Some(run_episode(&cfg, trajectory.as_ref(), model));
                }
            });
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("every episode ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::StaticPose;

    fn short_config() -> Config {
        let mut c = Config::default();
        c.sim.duration_us = 500_000;
        c
    }

    #[test]
    fn flat_hand_stays_quiet() {
        let c = short_config();
        let m = HandModel::preset("6dof").unwrap();
        let t = run_episode(&c, &StaticPose(JointState::default()), &m).unwrap();
        assert_eq!(t.rows.len(), 50);
        let truth = coupled(&JointState::default(), &c.geometry).to_array();
        for r in &t.rows {
            assert_eq!(r.q, t.rows[0].q);
            assert_eq!(r.counts, t.rows[0].counts);
            for (a, b) in r.q.iter().zip(truth) {
                assert!((a - b).abs() < 0.01);
            }
            assert!(r.mode.iter().all(|&m| m == FeedbackMode::None));
        }
    }

    #[test]
    fn timestamps_strictly_increase() {
        let c = short_config();
        let m = HandModel::preset("6dof").unwrap();
        let traj = from_spec(&c.sim.trajectory).unwrap();
        let t = run_episode(&c, traj.as_ref(), &m).unwrap();
        assert!(t
            .rows
            .windows(2)
            .all(|w| w[1].timestamp_us > w[0].timestamp_us));
    }

    #[test]
    fn queue_orders_by_time_then_insertion() {
        let mut h = BinaryHeap::new();
        for (seq, at_us) in [(1, 30), (2, 10), (3, 10), (4, 20)] {
            h.push(Reverse(Scheduled {
                at_us,
                seq,
                event: Event::ServoSettles(FeedbackCommand {
                    finger: Finger::Index,
                    waveform: crate::model::Waveform::Off,
                    servo_target: 0.0,
                    force_feedback_active: false,
                }),
            }));
        }
        let order: Vec<u64> = std::iter::from_fn(|| h.pop().map(|Reverse(s)| s.seq)).collect();
        assert_eq!(order, vec![2, 3, 4, 1]);
    }

    #[test]
    fn short_recording_rejected() {
        let c = short_config();
        let m = HandModel::preset("6dof").unwrap();
        let rec =
            crate::sim::RecordedPose::new(vec![(0, [0.0; 20]), (100_000, [0.0; 20])]).unwrap();
        assert!(matches!(
            Simulator::new(&c, &rec, &m).err().unwrap(),
            SimError::TrajectoryTooShort { .. }
        ));
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::BTreeSet<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        assert_eq!(s.len(), 100);
    }
}
