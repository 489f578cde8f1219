//! `glovekit` command-line tool.

mod cmd;
mod error;
mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::CliError;
use glovekit::model::{Config, Finger};
use std::path::PathBuf;

const UNITS_HELP: &str = "\
Units: angles are degrees on the command line and in files unless --units rad \
is given (the library works in radians). Lengths are mm, times are \
microseconds, forces are N and motor currents are mA.

Exit codes: 0 success, 2 usage, 3 configuration, 4 malformed input, \
5 computation (non-finite values, missing events), 6 file or network I/O, \
7 bus protocol.";

#[derive(Parser, Debug)]
#[command(name = "glovekit", version, about = "Cable-driven force-feedback glove toolkit", after_help = UNITS_HELP)]
struct Cli {
    /// Configuration file (TOML). Built-in defaults when omitted.
    #[arg(long, global = true, env = "GLOVEKIT_CONFIG")]
    config: Option<PathBuf>,

    /// Override a configuration value, e.g. `--set geometry.rg=6.5`.
    /// Keys are dotted paths in file units; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Angle unit for command-line values and outputs.
    #[arg(long, value_enum, default_value_t = Units::Deg, global = true)]
    units: Units,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    Deg,
    Rad,
}

impl Units {
    pub fn to_rad(self, v: f64) -> f64 {
        match self {
            Units::Deg => v.to_radians(),
            Units::Rad => v,
        }
    }

    pub fn from_rad(self, v: f64) -> f64 {
        match self {
            Units::Deg => v.to_degrees(),
            Units::Rad => v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Deg => "degrees",
            Units::Rad => "radians",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Joint angles from encoder readings.
    #[command(after_help = UNITS_HELP)]
    Solve(cmd::solve::SolveArgs),
    /// Encoder readings a finger pose produces.
    #[command(after_help = UNITS_HELP)]
    Inverse(cmd::solve::InverseArgs),
    /// Force-feedback cable length and servo angle for a finger pose.
    #[command(after_help = UNITS_HELP)]
    Follow(cmd::follow::FollowArgs),
    /// Run force samples through the haptic feedback policy.
    #[command(after_help = UNITS_HELP)]
    Feedback(cmd::feedback::FeedbackArgs),
    /// Map glove joint angles onto a robot-hand model.
    #[command(after_help = UNITS_HELP)]
    Retarget(cmd::retarget::RetargetArgs),
    /// Modbus-RTU frame tools and the glove emulator.
    #[command(subcommand)]
    Bus(cmd::bus::BusCommand),
    /// Run closed-loop simulation episodes.
    #[command(after_help = UNITS_HELP)]
    Simulate(cmd::simulate::SimulateArgs),
    /// Latency or repeatability report from a trace file.
    #[command(after_help = UNITS_HELP)]
    Report(cmd::simulate::ReportArgs),
    /// Encoder offsets from flat-hand frames.
    #[command(after_help = UNITS_HELP)]
    Calibrate(cmd::solve::CalibrateArgs),
    /// Print the effective configuration.
    #[command(after_help = UNITS_HELP)]
    Config,
}

/// Options shared by subcommands that read a finger name.
#[derive(Args, Debug, Clone)]
pub struct FingerArg {
    /// thumb, index, middle, ring or pinky.
    #[arg(long, default_value = "index")]
    pub finger: Finger,
}

pub struct Ctx {
    pub config: Config,
    pub units: Units,
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let overrides = cli
        .overrides
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| {
                    CliError::new(
                        error::ExitKind::Config,
                        format!("--set expects KEY=VALUE, got `{kv}`"),
                    )
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let config = match &cli.config {
        Some(path) => Config::load_with_overrides(path, &overrides)?,
        None => Config::from_toml_with_overrides("", &overrides)?,
    };
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Ctx {
        config: load_config(&cli)?,
        units: cli.units,
    };
    match cli.command {
        Command::Solve(a) => cmd::solve::solve(&ctx, a),
        Command::Inverse(a) => cmd::solve::inverse(&ctx, a),
        Command::Follow(a) => cmd::follow::follow(&ctx, a),
        Command::Feedback(a) => cmd::feedback::feedback(&ctx, a),
        Command::Retarget(a) => cmd::retarget::retarget(&ctx, a),
        Command::Bus(c) => cmd::bus::bus(&ctx, c),
        Command::Simulate(a) => cmd::simulate::simulate(&ctx, a),
        Command::Report(a) => cmd::simulate::report(&ctx, a),
        Command::Calibrate(a) => cmd::solve::calibrate(&ctx, a),
        Command::Config => {
            print!("{}", ctx.config.to_toml());
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
