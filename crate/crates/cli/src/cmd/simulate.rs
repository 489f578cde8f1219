use crate::error::{CliError, ExitKind};
use crate::io::{open_input, write_out};
use crate::{Ctx, FingerArg};
use clap::{Args, ValueEnum};
use glovekit::model::Finger;
use glovekit::sim::{latency_report, repeatability_report, run_episodes, Trace};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Latency,
    Repeatability,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Trace CSV. With several episodes, episode i goes to `<stem>_<i>.<ext>`.
    #[arg(long, short, default_value = "trace.csv")]
    out: PathBuf,
    /// Overrides `sim.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of episodes; each gets a seed derived from the base seed.
    #[arg(long, default_value_t = 1)]
    episodes: usize,
    /// Record every tick instead of every `sim.record_divider`-th.
    #[arg(long)]
    full_rate: bool,
    /// Reports computed on the full-rate trace; repeatable.
    #[arg(long = "report", value_enum)]
    reports: Vec<ReportKind>,
    #[command(flatten)]
    finger: FingerArg,
    /// Directory for report CSVs; reports are only summarized when omitted.
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(value_enum)]
    kind: ReportKind,
    /// Trace CSV written by `simulate`.
    #[arg(long)]
    trace: PathBuf,
    #[command(flatten)]
    finger: FingerArg,
    /// Per-event CSV instead of the summary.
    #[arg(long)]
    csv: bool,
}

fn episode_path(base: &Path, i: usize, n: usize) -> PathBuf {
    if n == 1 {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map_or("trace".into(), |s| s.to_string_lossy());
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{i}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{i}"),
    };
    base.with_file_name(name)
}

fn render(
    ctx: &Ctx,
    trace: &Trace,
    kind: ReportKind,
    finger: Finger,
) -> Result<(String, String), CliError> {
    Ok(match kind {
        ReportKind::Latency => {
            let r = latency_report(trace, &ctx.config.feedback)?;
            (r.summary(), r.to_csv())
        }
        ReportKind::Repeatability => {
            let r = repeatability_report(trace, finger, &ctx.config.feedback)?;
            (r.summary(), r.to_csv())
        }
    })
}

fn kind_name(kind: ReportKind) -> &'static str {
    match kind {
        ReportKind::Latency => "latency",
        ReportKind::Repeatability => "repeatability",
    }
}

pub fn simulate(ctx: &Ctx, a: SimulateArgs) -> Result<(), CliError> {
    if a.episodes == 0 {
        return Err(CliError::input("--episodes must be at least 1"));
    }
    let mut config = ctx.config.clone();
    if let Some(seed) = a.seed {
        config.sim.seed = seed;
    }
    let traces = if a.episodes == 1 {
        // A single episode keeps the configured seed as is.
        let model = glovekit::retarget::HandModel::resolve(&config.sim.hand_model)?;
        let traj = glovekit::sim::from_spec(&config.sim.trajectory)?;
        vec![glovekit::sim::run_episode(&config, traj.as_ref(), &model)?]
    } else {
        run_episodes(&config, a.episodes)?
    };
    if let Some(dir) = &a.report_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    }
    for (i, full) in traces.iter().enumerate() {
        let path = episode_path(&a.out, i, a.episodes);
        let recorded = if a.full_rate {
            full.clone()
        } else {
            full.downsample(config.sim.record_divider)
        };
        let bytes = recorded.to_csv_bytes();
        std::fs::write(&path, &bytes).map_err(|e| CliError::io(path.display(), e))?;
        println!("trace={}", path.display());
        println!("rows={}", recorded.rows.len());
        println!("trace_sha256={}", hex::encode(Sha256::digest(&bytes)));
        for &kind in &a.reports {
            let (summary, csv) = render(ctx, full, kind, a.finger.finger)?;
            print!("{summary}");
            if let Some(dir) = &a.report_dir {
                let name = if a.episodes == 1 {
                    format!("{}.csv", kind_name(kind))
                } else {
                    format!("{}_{i}.csv", kind_name(kind))
                };
                let p = dir.join(name);
                std::fs::write(&p, csv).map_err(|e| CliError::io(p.display(), e))?;
            }
        }
    }
    Ok(())
}

pub fn report(ctx: &Ctx, a: ReportArgs) -> Result<(), CliError> {
    let trace = Trace::read_csv(open_input(&a.trace)?)
        .map_err(|e| CliError::new(ExitKind::Input, e.to_string()))?;
    let (summary, csv) = render(ctx, &trace, a.kind, a.finger.finger)?;
    let text = if a.csv { csv } else { summary };
    write_out(&mut std::io::stdout(), &text)
}
