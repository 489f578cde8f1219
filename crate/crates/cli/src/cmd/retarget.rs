use crate::error::CliError;
use crate::io::{open_input, open_output, read_poses, write_out};
use crate::Ctx;
use clap::Args;
use glovekit::kinematics::coupled;
use glovekit::model::{JointChannel, JointState, JOINT_CHANNELS};
use glovekit::retarget::{retarget as map, HandModel};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct RetargetArgs {
    /// Preset (6dof, 15dof, 24dof) or hand-model file. Defaults to
    /// `sim.hand_model` from the configuration.
    #[arg(long)]
    model: Option<String>,
    /// Glove joint value, e.g. `index.dip=45`; repeatable. Unset joints are
    /// zero and unset PIP joints follow their DIP.
    #[arg(long = "joint", value_name = "CHANNEL=ANGLE", conflicts_with = "input")]
    joints: Vec<String>,
    /// Joint-angle CSV (`timestamp_us, q_00..q_19`), e.g. `glovekit solve` output.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Print the resolved hand model as TOML and exit.
    #[arg(long)]
    show_model: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

pub fn retarget(ctx: &Ctx, a: RetargetArgs) -> Result<(), CliError> {
    let u = ctx.units;
    let name = a.model.as_deref().unwrap_or(&ctx.config.sim.hand_model);
    let model = HandModel::resolve(name)?;
    let mut out = open_output(a.out.as_deref())?;
    if a.show_model {
        return write_out(&mut out, &model.to_toml());
    }

    if let Some(path) = &a.input {
        let poses = read_poses(open_input(path)?, u)?;
        let mut text = format!(
            "# {} joint targets in {}\ntimestamp_us",
            model.name,
            u.name()
        );
        for j in &model.joints {
            let _ = write!(text, ",{}", j.name);
        }
        text.push('\n');
        let mut clamped = 0;
        for (t, q) in poses {
            let cmd = map(&JointState::from_array(&q), &model);
            clamped += cmd.clamp_mask.iter().filter(|&&c| c).count();
            let _ = write!(text, "{t}");
            for v in cmd.targets {
                let _ = write!(text, ",{}", u.from_rad(v));
            }
            text.push('\n');
        }
        if clamped > 0 {
            eprintln!("warning: {clamped} targets clamped to hand joint limits");
        }
        return write_out(&mut out, &text);
    }

    let mut q = [0.0; JOINT_CHANNELS];
    let mut given = [false; JOINT_CHANNELS];
    for kv in &a.joints {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--joint expects CHANNEL=ANGLE, got `{kv}`")))?;
        let ch = JointChannel::from_name(k.trim())
            .ok_or_else(|| CliError::input(format!("unknown glove channel `{k}`")))?;
        let x: f64 = v
            .trim()
            .parse()
            .ok()
            .filter(|x: &f64| x.is_finite())
            .ok_or_else(|| CliError::input(format!("bad angle `{v}`")))?;
        q[ch.0] = u.to_rad(x);
        given[ch.0] = true;
    }
    let derived = coupled(&JointState::from_array(&q), &ctx.config.geometry).to_array();
    for i in 0..JOINT_CHANNELS {
        if JointChannel(i).is_pip() && !given[i] {
            q[i] = derived[i];
        }
    }
    let cmd = map(&JointState::from_array(&q), &model);
    let mut text = format!(
        "# {} joint targets in {}\njoint,source,target,clamped\n",
        model.name,
        u.name()
    );
    for ((j, t), c) in model.joints.iter().zip(&cmd.targets).zip(&cmd.clamp_mask) {
        let _ = writeln!(
            text,
            "{},{},{},{}",
            j.name,
            j.source.name(),
            u.from_rad(*t),
            c
        );
    }
    let n = cmd.clamp_mask.iter().filter(|&&c| c).count();
    if n > 0 {
        eprintln!("warning: {n} targets clamped to hand joint limits");
    }
    write_out(&mut out, &text)
}
