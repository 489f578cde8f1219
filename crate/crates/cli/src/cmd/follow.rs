use crate::error::CliError;
use crate::io::{open_output, write_out};
use crate::{Ctx, FingerArg};
use clap::Args;
use glovekit::cable::{cable_length, FingerPose};
use std::fmt::Write as _;

#[derive(Args, Debug)]
pub struct FollowArgs {
    /// Proximal joint bend (MCP; thumb TM bend).
    #[arg(long, default_value_t = 0.0)]
    theta1: f64,
    /// Middle joint bend (PIP; thumb MCP).
    #[arg(long, default_value_t = 0.0)]
    theta2: f64,
    /// Distal joint bend (DIP; thumb IP).
    #[arg(long, default_value_t = 0.0)]
    theta3: f64,
    #[command(flatten)]
    finger: FingerArg,
    /// Report the servo angle relative to the zero pose.
    #[arg(long)]
    delta: bool,
    /// Also print the seven routing points in the base frame.
    #[arg(long)]
    points: bool,
}

pub fn follow(ctx: &Ctx, a: FollowArgs) -> Result<(), CliError> {
    let u = ctx.units;
    let g = &ctx.config.geometry;
    let f = a.finger.finger;
    let theta = [a.theta1, a.theta2, a.theta3];
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(CliError::input("angles must be finite"));
    }
    let pose = FingerPose {
        theta: theta.map(|v| u.to_rad(v)),
    };
    let cable = |p: &FingerPose| {
        cable_length(p, g, f)
            .map_err(|e| CliError::new(crate::error::ExitKind::Config, e.to_string()))
    };
    let path = cable(&pose)?;
    let servo = if a.delta {
        path.servo_angle - cable(&FingerPose::zero())?.servo_angle
    } else {
        path.servo_angle
    };
    let mut text = format!(
        "# cable length mm; servo angle {} ({})\nfinger,length_mm,servo\n{f},{},{}\n",
        u.name(),
        if a.delta {
            "from zero pose"
        } else {
            "absolute"
        },
        path.length,
        u.from_rad(servo)
    );
    if a.points {
        text.push_str("# routing points in the base frame, mm\npoint,x,y,z\n");
        for (name, p) in ["O1", "A1", "A2", "B1", "B2", "C1", "C2"]
            .iter()
            .zip(&path.global_points)
        {
            let _ = writeln!(text, "{name},{},{},{}", p.x, p.y, p.z);
        }
    }
    write_out(&mut open_output(None)?, &text)
}
