use crate::error::CliError;
use crate::io::{
    calibration_text, open_input, open_output, read_calibration, read_frames, write_out,
};
use crate::Ctx;
use clap::Args;
use glovekit::kinematics::{
    coupled, encoders_from_angles, hand_encoders_from_angles, solve_finger, solve_hand,
    FingerSolveInput,
};
use glovekit::model::{
    Calibration, EncoderFrame, JointChannel, JointState, ENCODER_CHANNELS, JOINT_CHANNELS,
};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Calibrated MCP-cable encoder angle of one finger.
    #[arg(long, requires = "theta_ed", conflicts_with = "frames")]
    theta_em: Option<f64>,
    /// Calibrated DIP-cable encoder angle of one finger.
    #[arg(long, requires = "theta_em")]
    theta_ed: Option<f64>,
    /// Frame CSV (`timestamp_us, enc_00..enc_15`, raw counts); `-` for stdin.
    #[arg(long, required_unless_present = "theta_em")]
    frames: Option<PathBuf>,
    /// Calibration file from `glovekit calibrate`. Defaults to the
    /// encoders' mount zero.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Output CSV; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn warn_clamped(what: &str, names: &[&str]) {
    if !names.is_empty() {
        eprintln!(
            "warning: {what}: clamped to joint limits: {}",
            names.join(", ")
        );
    }
}

pub fn solve(ctx: &Ctx, a: SolveArgs) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let u = ctx.units;
    let mut out = open_output(a.out.as_deref())?;
    if let (Some(em), Some(ed)) = (a.theta_em, a.theta_ed) {
        let r = solve_finger(
            &FingerSolveInput::calibrated(u.to_rad(em), u.to_rad(ed)),
            &cfg.geometry,
            &cfg.limits,
        )?;
        let names: Vec<&str> = ["theta1", "theta2", "theta3"]
            .into_iter()
            .zip(r.clamped)
            .filter_map(|(n, c)| c.then_some(n))
            .collect();
        warn_clamped("finger", &names);
        let text = format!(
            "# joint angles in {}\ntheta1,theta2,theta3\n{},{},{}\n",
            u.name(),
            u.from_rad(r.theta1),
            u.from_rad(r.theta2),
            u.from_rad(r.theta3)
        );
        return write_out(&mut out, &text);
    }

    let path = a.frames.expect("clap requires frames");
    let frames = read_frames(open_input(&path)?)?;
    let cal = match &a.calibration {
        Some(p) => read_calibration(p)?,
        None => Calibration::mount_zero(&cfg.encoders),
    };
    let mut text = format!("# joint angles in {}\n#", u.name());
    for i in 0..JOINT_CHANNELS {
        let _ = write!(text, " q_{i:02}={}", JointChannel(i).name());
    }
    text.push_str("\ntimestamp_us");
    for i in 0..JOINT_CHANNELS {
        let _ = write!(text, ",q_{i:02}");
    }
    text.push('\n');
    let mut clamped_frames = 0;
    for (t, counts) in frames {
        let frame = EncoderFrame::from_counts(t, counts, cfg.encoders.resolution)
            .map_err(|e| CliError::input(format!("frame at {t} us: {e}")))?;
        let sol = solve_hand(
            &frame,
            &cfg.geometry,
            &cfg.limits,
            &cfg.encoders.channels,
            &cal,
        )?;
        if sol.any_clamped() {
            clamped_frames += 1;
            if clamped_frames <= 10 {
                let names: Vec<&str> = (0..JOINT_CHANNELS)
                    .filter(|&i| sol.clamped[i])
                    .map(|i| JointChannel(i).name())
                    .collect();
                warn_clamped(&format!("t={t} us"), &names);
            }
        }
        let _ = write!(text, "{t}");
        for v in sol.joints.to_array() {
            let _ = write!(text, ",{}", u.from_rad(v));
        }
        text.push('\n');
    }
    if clamped_frames > 10 {
        eprintln!("warning: {} more frames clamped", clamped_frames - 10);
    }
    write_out(&mut out, &text)
}

#[derive(Args, Debug)]
pub struct InverseArgs {
    /// MCP bend.
    #[arg(long)]
    theta1: f64,
    /// DIP bend; PIP follows from the coupling.
    #[arg(long)]
    theta3: f64,
}

pub fn inverse(ctx: &Ctx, a: InverseArgs) -> Result<(), CliError> {
    let u = ctx.units;
    if !(a.theta1.is_finite() && a.theta3.is_finite()) {
        return Err(CliError::input("angles must be finite"));
    }
    let (em, ed) =
        encoders_from_angles(u.to_rad(a.theta1), u.to_rad(a.theta3), &ctx.config.geometry);
    let text = format!(
        "# calibrated encoder angles in {}\ntheta_em,theta_ed\n{},{}\n",
        u.name(),
        u.from_rad(em),
        u.from_rad(ed)
    );
    write_out(&mut open_output(None)?, &text)
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Frame CSV recorded with the hand flat. Readings are averaged and the
    /// model's own flat-hand cable readings subtracted, so the flat hand
    /// solves to zero bend.
    #[arg(long)]
    frames: PathBuf,
    /// Calibration file to write; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn calibrate(ctx: &Ctx, a: CalibrateArgs) -> Result<(), CliError> {
    let frames = read_frames(open_input(&a.frames)?)?;
    if frames.is_empty() {
        return Err(CliError::input("no frames to calibrate from"));
    }
    let res = ctx.config.encoders.resolution;
    let mut sum = [0.0; ENCODER_CHANNELS];
    for (t, counts) in &frames {
        let f = EncoderFrame::from_counts(*t, *counts, res)
            .map_err(|e| CliError::input(format!("frame at {t} us: {e}")))?;
        for (s, r) in sum.iter_mut().zip(f.readings) {
            *s += r;
        }
    }
    // A flat hand still has the DIP cable stretched by the coupled PIP
    // bend; keep that part out of the offset so the flat hand solves to
    // zero instead of a clamped DIP.
    let cfg = &ctx.config;
    let flat = coupled(&JointState::default(), &cfg.geometry);
    let expected = hand_encoders_from_angles(&flat, &cfg.geometry, &cfg.encoders.channels);
    let n = frames.len() as f64;
    let cal = Calibration {
        offsets: std::array::from_fn(|i| sum[i] / n - expected[i]),
    };
    write_out(&mut open_output(a.out.as_deref())?, &calibration_text(&cal))
}
