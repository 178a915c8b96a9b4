use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand};
use gaitphase::commands::{self, CmdResult, Failure};
use gaitphase::config::{parse_grid, parse_models, RunConfig};
use gaitphase::synthetic::SyntheticSpec;
use gaitphase_core::evaluation::{Protocol, SweepGrid};

/// Gait-phase detection from a single rectus-femoris EMG channel.
#[derive(Parser)]
#[command(name = "gaitphase", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// INI configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset root directory.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Comma-separated models: nb, dt, rf, gbm, svm, knn or all.
    #[arg(long, global = true)]
    models: Option<String>,
    /// WINDOWSxDELAYS in ms, e.g. 300x40, 275,300x0,10 or 50:400:25x0:100:10.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    stride_ms: Option<f64>,
    /// Random-search draws per cell.
    #[arg(long, global = true)]
    budget: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use the reduced 4 x 4 grid (windows 275-375 ms, delays 0-40 ms).
    #[arg(long, global = true)]
    quick: bool,
    /// Screening threshold on the 95th percentile of |EMG|.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Allow subjects excluded by screening.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Per-subject EMG quantiles and the exclusion list.
    Screen,
    /// Evaluate every (window, delay, model) cell.
    Sweep {
        /// Choose hyperparameters per fold with an inner subject-wise search.
        #[arg(long)]
        nested: bool,
        /// Shuffle labels within each subject first (null-data check).
        #[arg(long, value_name = "SEED")]
        permute_labels: Option<u64>,
    },
    /// Train on all other subjects at one cell and stream one subject through.
    Replay {
        #[arg(long)]
        subject: u32,
    },
    /// Write the feature matrix of one cell as CSV.
    Features {
        #[arg(long)]
        subject: Option<u32>,
    },
    /// Write a synthetic dataset in the dataset's text layout to --out.
    Synth {
        #[arg(long, default_value_t = 11)]
        subjects: u32,
        #[arg(long, default_value_t = 30.0)]
        seconds: f64,
    },
}

fn resolve(c: &Common) -> CmdResult<RunConfig> {
    let usage = |e: String| Failure::Usage(anyhow!(e));
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p).map_err(|e| Failure::Usage(e.into()))?,
        None => RunConfig::default(),
    };
    if c.quick {
        let q = SweepGrid::quick();
        cfg.grid.windows_ms = q.windows_ms;
        cfg.grid.delays_ms = q.delays_ms;
    }
    if let Some(g) = &c.grid {
        let (w, d) = parse_grid(g).map_err(usage)?;
        cfg.grid.windows_ms = w;
        cfg.grid.delays_ms = d;
    }
    if let Some(s) = c.stride_ms {
        cfg.grid.stride_ms = s;
    }
    if let Some(m) = &c.models {
        cfg.models = parse_models(m).map_err(usage)?;
    }
    if let Some(d) = &c.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(b) = c.budget {
        cfg.eval.budget = b;
    }
    if let Some(s) = c.seed {
        cfg.eval.seed = s;
    }
    if let Some(j) = c.jobs {
        cfg.jobs = j;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    if let Some(t) = c.threshold {
        cfg.p95_threshold = t;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CmdResult {
    let mut cfg = resolve(&cli.common)?;
    match cli.command {
        Command::Screen => commands::screen(&cfg).map(drop),
        Command::Sweep { nested, permute_labels } => {
            if nested {
                cfg.eval.protocol = Protocol::Nested;
            }
            if permute_labels.is_some() {
                cfg.eval.permute_labels = permute_labels;
            }
            commands::sweep(&cfg).map(drop)
        }
        Command::Replay { subject } => commands::replay(&cfg, subject, cli.common.force).map(drop),
        Command::Features { subject } => commands::features(&cfg, subject, cli.common.force).map(drop),
        Command::Synth { subjects, seconds } => {
            let spec = SyntheticSpec { subjects, seconds, seed: cfg.eval.seed, ..SyntheticSpec::default() };
            commands::synth(&cfg.out_dir, &spec).map(drop)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.exit_code())
        }
    }
}
