use crate::error::CliError;
use crate::io::{open_input, open_output, write_out};
use crate::{Ctx, FingerArg};
use clap::Args;
use glovekit::cable::FingerPose;
use glovekit::feedback::{current_to_force, step_feedback, FeedbackState};
use glovekit::model::{Finger, ForceSample};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct FeedbackArgs {
    /// Contact force samples in N, applied in order.
    #[arg(long = "force", value_delimiter = ',', conflicts_with_all = ["currents", "input"])]
    forces: Vec<f64>,
    /// Motor current samples in mA, applied in order.
    #[arg(long = "current", value_delimiter = ',', conflicts_with = "input")]
    currents: Vec<f64>,
    /// CSV with `timestamp_us, finger, current_ma`; `-` for stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    finger: FingerArg,
    /// Finger pose `theta1,theta2,theta3` the cable follows.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 0.0])]
    pose: Vec<f64>,
    /// Plain threshold classification without the release band.
    #[arg(long)]
    no_hysteresis: bool,
    /// Time between inline samples, µs.
    #[arg(long, default_value_t = 10_000)]
    period_us: u64,
}

pub fn feedback(ctx: &Ctx, a: FeedbackArgs) -> Result<(), CliError> {
    let cfg = &ctx.config;
    let u = ctx.units;
    let mut policy = cfg.feedback;
    if a.no_hysteresis {
        policy = policy.without_hysteresis();
    }
    let to_force = |current: f64| {
        current_to_force(current, &policy).map_err(|e| CliError::input(e.to_string()))
    };
    let finger = a.finger.finger;
    let mut samples: Vec<ForceSample> = Vec::new();
    let inline_time = |i: usize| i as u64 * a.period_us;
    for (i, &force) in a.forces.iter().enumerate() {
        if force.is_nan() || force < 0.0 {
            return Err(CliError::input(format!(
                "force must be a non-negative number, got {force}"
            )));
        }
        samples.push(ForceSample {
            finger,
            current: force * policy.current_per_newton,
            force,
            timestamp_us: inline_time(i),
        });
    }
    for (i, &current) in a.currents.iter().enumerate() {
        samples.push(ForceSample {
            finger,
            current,
            force: to_force(current)?,
            timestamp_us: inline_time(i),
        });
    }
    if let Some(path) = &a.input {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(open_input(path)?);
        let headers = rdr.headers()?.clone();
        let col = |n: &str| {
            headers
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| CliError::input(format!("missing column `{n}`")))
        };
        let (tc, fc, cc) = (col("timestamp_us")?, col("finger")?, col("current_ma")?);
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = n + 1;
            let t = rec[tc]
                .parse()
                .map_err(|_| CliError::input(format!("row {row}: bad timestamp_us")))?;
            let finger: Finger = rec[fc]
                .parse()
                .map_err(|e| CliError::input(format!("row {row}: {e}")))?;
            let current: f64 = rec[cc]
                .parse()
                .map_err(|_| CliError::input(format!("row {row}: bad current_ma")))?;
            samples.push(ForceSample {
                finger,
                current,
                force: to_force(current).map_err(|e| CliError::input(format!("row {row}: {e}")))?,
                timestamp_us: t,
            });
        }
    }
    if samples.is_empty() {
        return Err(CliError::input(
            "no samples: give --force, --current or --input",
        ));
    }
    let pose = FingerPose {
        theta: [a.pose[0], a.pose[1], a.pose[2]].map(|v| u.to_rad(v)),
    };
    let mut state = FeedbackState::default();
    let mut text = format!(
        "# force N; current mA; servo target {} from zero pose\n\
         timestamp_us,finger,current_ma,force_n,mode,waveform,force_feedback,servo_target\n",
        u.name()
    );
    for s in &samples {
        let (next, cmd) = step_feedback(&state, s, &policy, &pose, &cfg.geometry)
            .map_err(|e| CliError::new(crate::error::ExitKind::Config, e.to_string()))?;
        state = next;
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            s.timestamp_us,
            s.finger,
            s.current,
            s.force,
            state.mode(s.finger),
            cmd.waveform.id(),
            cmd.force_feedback_active,
            u.from_rad(cmd.servo_target)
        );
    }
    write_out(&mut open_output(None)?, &text)
}
