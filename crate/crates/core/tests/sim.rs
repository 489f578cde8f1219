use glovekit::feedback::{FeedbackMode, FeedbackPolicy};
use glovekit::kinematics::{coupled, hand_encoders_from_angles, solve_hand};
use glovekit::model::{
    Calibration, Config, EncoderFrame, Finger, JointChannel, JointState, StageLatencies,
    TrajectorySpec,
};
use glovekit::retarget::{retarget, HandModel};
use glovekit::sim::{
    from_spec, latency_report, repeatability_from_angles, repeatability_report, run_episode,
    run_episodes, CyclePose, SimError, StaticPose, Trace, Trajectory,
};
use std::collections::BTreeMap;

fn default_run(config: &Config) -> Trace {
    let model = HandModel::resolve(&config.sim.hand_model).unwrap();
    let traj = from_spec(&config.sim.trajectory).unwrap();
    run_episode(config, traj.as_ref(), &model).unwrap()
}

#[test]
fn default_budget_gives_200_ms() {
    let c = Config::default();
    let r = latency_report(&default_run(&c), &c.feedback).unwrap();
    assert!(!r.events.is_empty());
    assert!((r.mean_ms - 200.0).abs() <= 10.0, "{}", r.mean_ms);
    for e in &r.events {
        assert!(e.action_us > e.trigger_us);
    }
}

#[test]
fn zero_latency_within_one_tick() {
    let mut c = Config::default();
    c.sim.latencies = StageLatencies::ZERO;
    let r = latency_report(&default_run(&c), &c.feedback).unwrap();
    assert!(r.max_ms <= c.sim.tick_us as f64 / 1000.0);
}

#[test]
fn latency_is_linear_in_budget() {
    let mut c = Config::default();
    let a = latency_report(&default_run(&c), &c.feedback).unwrap();
    c.sim.latencies.servo_mech -= 80_000;
    let b = latency_report(&default_run(&c), &c.feedback).unwrap();
    assert_eq!(a.events.len(), b.events.len());
    for (x, y) in a.events.iter().zip(&b.events) {
        assert_eq!(x.latency_us() - y.latency_us(), 80_000);
    }
}

#[test]
fn servo_actions_follow_their_triggers() {
    let mut c = Config::default();
    c.sim.noise.encoder_std = 0.2f64.to_radians();
    let trace = default_run(&c);
    let r = latency_report(&trace, &c.feedback).unwrap();
    for e in &r.events {
        assert!(e.action_us >= e.trigger_us);
    }
    // Any tensioned row must be preceded by a force above the top threshold.
    for f in 0..5 {
        if let Some(k) = trace
            .rows
            .iter()
            .position(|r| r.mode[f] == FeedbackMode::ForceFeedback)
        {
            assert!(trace.rows[..k]
                .iter()
                .any(|r| r.force[f] > c.feedback.thresholds[2]));
        }
    }
}

#[test]
fn zero_noise_repeatability_is_exact() {
    let c = Config::default();
    let r = repeatability_report(&default_run(&c), Finger::Index, &c.feedback).unwrap();
    assert_eq!(r.per_cycle_deg.len(), 3);
    assert_eq!(r.std_deg, 0.0);
}

#[test]
fn noisy_repeatability_matches_external_statistics() {
    let mut c = Config::default();
    c.sim.noise.encoder_std = 0.3f64.to_radians();
    c.sim.duration_us = 20_000_000;
    let trace = default_run(&c);
    let r = repeatability_report(&trace, Finger::Index, &c.feedback).unwrap();
    // Recompute from the raw columns.
    let ch = Finger::Index.distal_channel().0;
    let mut prev = 0.0;
    let mut xs = vec![];
    for row in &trace.rows {
        if row.force[1] >= 0.1 && prev < 0.1 {
            xs.push(row.q[ch].to_degrees());
        }
        prev = row.force[1];
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!(xs.len() >= 3);
    assert!((r.mean_deg - mean).abs() < 1e-9);
    assert!((r.std_deg - std).abs() < 1e-9);
    assert!(r.std_deg > 0.0);
}

#[test]
fn three_cycle_methodology_example() {
    let r = repeatability_from_angles(Finger::Index, &[63.0, 63.2, 63.25]).unwrap();
    assert!((r.mean_deg - 63.15).abs() < 1e-6);
    assert!((r.std_deg - 0.1322875655532295).abs() < 1e-6);
}

#[test]
fn no_contact_means_no_report() {
    let mut c = Config::default();
    c.sim.trajectory = TrajectorySpec::Static {
        pose: BTreeMap::new(),
    };
    let trace = default_run(&c);
    assert!(matches!(
        latency_report(&trace, &c.feedback).unwrap_err(),
        SimError::NoActivation
    ));
    assert!(matches!(
        repeatability_report(&trace, Finger::Index, &c.feedback).unwrap_err(),
        SimError::NotEnoughContacts { found: 0 }
    ));
}

#[test]
fn noise_free_unquantized_is_exact() {
    let mut c = Config::default();
    c.sim.quantize = false;
    c.sim.latencies = StageLatencies::ZERO;
    let model = HandModel::preset("24dof").unwrap();
    let traj = from_spec(&c.sim.trajectory).unwrap();
    let trace = run_episode(&c, traj.as_ref(), &model).unwrap();
    for row in &trace.rows {
        let truth = coupled(&traj.pose_at(row.timestamp_us).unwrap(), &c.geometry).to_array();
        for (a, b) in row.q.iter().zip(truth) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn static_pose_gives_constant_trace() {
    let mut c = Config::default();
    c.sim.quantize = false;
    c.sim.latencies = StageLatencies::ZERO;
    c.sim.duration_us = 300_000;
    let mut pose = JointState::default();
    pose.fingers[1].theta1 = 0.4;
    pose.fingers[1].theta3 = 0.7;
    pose.thumb.tm_splay = 0.2;
    let model = HandModel::preset("15dof").unwrap();
    let trace = run_episode(&c, &StaticPose(pose), &model).unwrap();
    let truth = coupled(&pose, &c.geometry).to_array();
    for row in &trace.rows {
        assert_eq!(row.cmd, trace.rows[0].cmd);
        for (a, b) in row.q.iter().zip(truth) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn loop_matches_straight_line_reevaluation() {
    let mut c = Config::default();
    c.sim.duration_us = 2_000_000;
    let mut to = JointState::default();
    to.fingers[2].theta3 = 75f64.to_radians();
    to.fingers[2].theta1 = 20f64.to_radians();
    let traj = CyclePose::new(900_000, JointState::default(), to);
    let model = HandModel::preset("24dof").unwrap();
    let trace = run_episode(&c, &traj, &model).unwrap();

    let res = c.encoders.resolution;
    let cal = Calibration::mount_zero(&c.encoders);
    for row in &trace.rows {
        let t = row.timestamp_us;
        let truth = coupled(&traj.pose_at(t).unwrap(), &c.geometry);
        let enc = hand_encoders_from_angles(&truth, &c.geometry, &c.encoders.channels);
        let counts = enc.map(|a| res.quantize(a + c.encoders.zero_angle()));
        let frame = EncoderFrame::from_counts(t, counts, res).unwrap();
        let sol = solve_hand(&frame, &c.geometry, &c.limits, &c.encoders.channels, &cal).unwrap();
        let cmd = retarget(&sol.joints, &model);
        assert_eq!(row.counts, counts);
        assert_eq!(row.q, sol.joints.to_array());
        assert_eq!(row.cmd, cmd.targets);
        let dip = cmd
            .target_for(&model, Finger::Ring.distal_channel())
            .unwrap();
        let expected = c.sim.contact.force(dip) * c.feedback.current_per_newton
            / c.feedback.current_per_newton;
        assert_eq!(row.force[Finger::Ring.index()], expected);
    }
}

#[test]
fn same_seed_same_bytes() {
    let mut c = Config::default();
    c.sim.noise.encoder_std = 0.1f64.to_radians();
    c.sim.noise.drift = 0.01f64.to_radians();
    c.sim.seed = 99;
    let a = default_run(&c).to_csv_bytes();
    let b = default_run(&c).to_csv_bytes();
    assert_eq!(a, b);
    c.sim.seed = 100;
    assert_ne!(a, default_run(&c).to_csv_bytes());
}

#[test]
fn batch_matches_serial_runs() {
    let mut c = Config::default();
    c.sim.duration_us = 500_000;
    c.sim.noise.encoder_std = 0.05f64.to_radians();
    let batch = run_episodes(&c, 5).unwrap();
    for (i, t) in batch.iter().enumerate() {
        let mut ci = c.clone();
        ci.sim.seed = glovekit::sim::derive_seed(c.sim.seed, i as u64);
        assert_eq!(t, &default_run(&ci));
    }
}

#[test]
fn trace_file_round_trip_keeps_reports() {
    let c = Config::default();
    let trace = default_run(&c);
    let back = Trace::read_csv(trace.to_csv_bytes().as_slice()).unwrap();
    let p = FeedbackPolicy::default();
    assert_eq!(
        latency_report(&back, &p).unwrap().events,
        latency_report(&trace, &p).unwrap().events
    );
    let a = repeatability_report(&back, Finger::Index, &p).unwrap();
    let b = repeatability_report(&trace, Finger::Index, &p).unwrap();
    assert!((a.mean_deg - b.mean_deg).abs() < 1e-9);
}

#[test]
fn recorded_trajectory_drives_the_loop() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.csv");
    let mut text = String::from("# degrees\ntimestamp_us");
    for i in 0..20 {
        text.push_str(&format!(",q_{i:02}"));
    }
    text.push('\n');
    let dip = JointChannel::from_name("index.dip").unwrap().0;
    for (t, a) in [(0u64, 0.0), (1_000_000, 80.0)] {
        text.push_str(&t.to_string());
        for i in 0..20 {
            text.push_str(&format!(",{}", if i == dip { a } else { 0.0 }));
        }
        text.push('\n');
    }
    std::fs::write(&path, text).unwrap();
    let mut c = Config::default();
    c.sim.duration_us = 1_000_001;
    c.sim.trajectory = TrajectorySpec::Recorded { path: path.clone() };
    let model = HandModel::preset("6dof").unwrap();
    let traj = from_spec(&c.sim.trajectory).unwrap();
    let trace = run_episode(&c, traj.as_ref(), &model).unwrap();
    let last = trace.rows.last().unwrap();
    assert!((last.q[dip].to_degrees() - 80.0).abs() < 0.1);

    c.sim.duration_us = 1_100_000;
    assert!(matches!(
        run_episode(&c, traj.as_ref(), &model).unwrap_err(),
        SimError::TrajectoryTooShort { .. }
    ));
}

#[test]
fn bundled_demo_config_loads_and_runs() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/demo.toml");
    let c = Config::load(path).unwrap();
    assert_eq!(c.sim.hand_model, "24dof");
    let trace = default_run(&c);
    assert_eq!(trace.rows.len(), 600);
    let lat = latency_report(&trace, &c.feedback).unwrap();
    assert!((lat.mean_ms - 200.0).abs() <= 10.0);
    let rep = repeatability_report(&trace, Finger::Index, &c.feedback).unwrap();
    assert_eq!(rep.per_cycle_deg.len(), 3);
}
