//! `falqon-lab`: graph generation, feedback runs and the ensemble studies.
//!
//! Settings come from built-in defaults, then `--config <file.toml>`, then
//! flags. Each command writes its resolved settings to `<out>/config.toml`.

mod commands;
mod config;
mod exit;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use falqon_core::feedback::LawKind;

use config::{set, FileConfig};

#[derive(Parser, Debug)]
#[command(
    name = "falqon-lab",
    version,
    about = "Feedback-based quantum optimization for MAX-CUT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample random 3-regular graphs and write edge lists plus a manifest.
    GenGraphs {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        ens: EnsembleArgs,
        /// Keep duplicate isomorphism classes.
        #[arg(long)]
        no_dedup: bool,
        /// Draw budget for deduplicated sampling.
        #[arg(long)]
        max_draws: Option<usize>,
    },
    /// Run the feedback loop on each input graph and write trace CSVs.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Ensemble mean curves over a list of time steps.
    SweepDt {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        study: StudyArgs,
    },
    /// Critical time step and depth-to-target per size, with slope fits.
    Scaling {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        study: StudyArgs,
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Comma-separated laws to study.
        #[arg(long, value_delimiter = ',')]
        laws: Option<Vec<LawKind>>,
        /// Coarser settings: sizes 8, 10, 12, ten graphs per size.
        #[arg(long)]
        quick: bool,
    },
    /// Paired pure second-order and hybrid curves on one ensemble.
    Appendix {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        ens: EnsembleArgs,
        #[command(flatten)]
        study: StudyArgs,
    },
    /// Oracle, norm, Taylor-order and replay checks.
    Selfcheck {
        /// Offset one fast scalar by 1e-6 before the oracle comparison.
        #[arg(long, hide = true, value_enum)]
        debug_perturb: Option<selfcheck::Perturb>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config file; flags take precedence over its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Edge-list file or directory of `*.edges` files.
    #[arg(long)]
    graphs: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    dt: Option<f64>,
    /// Number of layers per run.
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    law: Option<LawKind>,
    /// Threshold below which `|B|` counts as zero.
    #[arg(long)]
    eps_b: Option<f64>,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    /// Vertex count of generated graphs.
    #[arg(long)]
    n: Option<usize>,
    /// Number of generated graphs.
    #[arg(long)]
    count: Option<usize>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    /// Comma-separated time steps.
    #[arg(long, value_delimiter = ',')]
    dt_list: Option<Vec<f64>>,
    /// Slack of the monotonicity predicate.
    #[arg(long)]
    eta: Option<f64>,
    /// Grid spacing of the critical time step search.
    #[arg(long)]
    resolution: Option<f64>,
    /// Approximation ratio that defines the required depth.
    #[arg(long)]
    r_target: Option<f64>,
}

impl Common {
    fn load(self) -> anyhow::Result<FileConfig> {
        let mut cfg = FileConfig::load(self.config.as_deref())?;
        set(&mut cfg.seed, self.seed);
        set(&mut cfg.graphs, self.graphs);
        set(&mut cfg.out, self.out);
        Ok(cfg)
    }
}

impl RunArgs {
    fn apply(self, cfg: &mut FileConfig) {
        set(&mut cfg.run.dt, self.dt);
        set(&mut cfg.run.layers, self.layers);
        set(&mut cfg.run.law, self.law);
        set(&mut cfg.run.eps_b, self.eps_b);
    }
}

impl EnsembleArgs {
    fn apply(self, cfg: &mut FileConfig) {
        set(&mut cfg.ensemble.n, self.n);
        set(&mut cfg.ensemble.count, self.count);
    }
}

impl StudyArgs {
    fn apply(self, cfg: &mut FileConfig) {
        set(&mut cfg.study.dt_list, self.dt_list);
        set(&mut cfg.study.eta, self.eta);
        set(&mut cfg.study.resolution, self.resolution);
        set(&mut cfg.study.r_target, self.r_target);
    }
}

/// Caps the worker pool when `FALQON_LAB_THREADS` is set.
fn init_threads() -> anyhow::Result<()> {
    let Ok(value) = std::env::var("FALQON_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        value.parse().ok().filter(|&t| t > 0).ok_or_else(|| {
            exit::ConfigError(format!("FALQON_LAB_THREADS must be a positive integer, got {value:?}"))
        })?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    init_threads()?;
    match command {
        Command::GenGraphs {
            common,
            ens,
            no_dedup,
            max_draws,
        } => {
            let mut cfg = common.load()?;
            ens.apply(&mut cfg);
            if no_dedup {
                cfg.ensemble.dedup = Some(false);
            }
            set(&mut cfg.ensemble.max_draws, max_draws);
            commands::gen_graphs(cfg)
        }
        Command::Run { common, run } => {
            let mut cfg = common.load()?;
            run.apply(&mut cfg);
            commands::run(cfg)
        }
        Command::SweepDt {
            common,
            run,
            ens,
            study,
        } => {
            let mut cfg = common.load()?;
            run.apply(&mut cfg);
            ens.apply(&mut cfg);
            study.apply(&mut cfg);
            commands::sweep_dt(cfg)
        }
        Command::Scaling {
            common,
            run,
            ens,
            study,
            n_list,
            laws,
            quick,
        } => {
            let mut cfg = common.load()?;
            run.apply(&mut cfg);
            ens.apply(&mut cfg);
            study.apply(&mut cfg);
            set(&mut cfg.study.n_list, n_list);
            set(&mut cfg.study.laws, laws);
            if quick {
                cfg.study.quick = Some(true);
            }
            commands::scaling(cfg)
        }
        Command::Appendix {
            common,
            run,
            ens,
            study,
        } => {
            let mut cfg = common.load()?;
            run.apply(&mut cfg);
            ens.apply(&mut cfg);
            study.apply(&mut cfg);
            commands::appendix(cfg)
        }
        Command::Selfcheck { debug_perturb } => selfcheck::selfcheck(debug_perturb),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit::code_for(&err)
        }
    }
}
