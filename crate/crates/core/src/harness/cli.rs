//! Command-line front end. Exit codes: 0 success, 1 configuration or usage
//! error, 2 failure while running.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::output::{render_bound_table, write_text, BoundTableOptions};
use super::{
    fit_rate, monte_carlo, render_csv, run_trial, sweep, Experiment, ExperimentConfig, Mode,
};
use crate::bounds::BoundParams;
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "proxagg",
    version,
    about = "Prox-function aggregation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Default)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 1 runs trials sequentially.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the mode named in the config (or `--mode`).
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
    },
    /// Single trials, one line per solver.
    Trial {
        #[command(flatten)]
        common: Common,
        /// Solver label; all solvers when absent.
        #[arg(long)]
        solver: Option<String>,
        /// Budget; the largest grid value when absent.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        trial_index: usize,
    },
    /// Monte Carlo summary of every solver at one budget.
    Mc {
        #[command(flatten)]
        common: Common,
        /// Budget; the largest grid value when absent.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Monte Carlo summaries over the whole grid, with rate fits.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Table of closed-form rates and high-probability thresholds.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bounds: BoundFlags,
    },
}

#[derive(Debug, Args, Clone)]
#[allow(non_snake_case)]
struct BoundFlags {
    #[arg(long = "G")]
    G: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long = "Gtilde")]
    Gtilde: Option<f64>,
    #[arg(long = "D")]
    D: Option<f64>,
    /// Comma-separated budgets.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    /// `f(x1)` for the bundle column.
    #[arg(long)]
    fx1: Option<f64>,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown mode `{s}` (expected sweep, mc, bounds or trial)"))
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

fn config_err(e: Error) -> Failure {
    Failure::Config(e)
}

fn runtime_err(e: Error) -> Failure {
    Failure::Runtime(e)
}

type CliResult<T> = std::result::Result<T, Failure>;

pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ExperimentConfig::from_json(&text)
}

fn load(common: &Common) -> CliResult<ExperimentConfig> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required".into()))
        .map_err(config_err)?;
    let mut cfg = read_config(path).map_err(config_err)?;
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(t) = common.threads {
        cfg.threads = Some(t);
    }
    if let Some(o) = &common.out {
        cfg.output = Some(o.display().to_string());
    }
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn emit(output: Option<&str>, text: &str) -> CliResult<()> {
    match output {
        Some(p) => write_text(Path::new(p), text).map_err(runtime_err),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Run { common, mode } => {
            let cfg = load(&common)?;
            match mode.unwrap_or(cfg.mode) {
                Mode::Sweep => run_sweep(cfg),
                Mode::Mc => run_mc(cfg, None),
                Mode::Trial => run_trials(cfg, None, None, 0),
                Mode::Bounds => run_bounds(&common, Some(cfg), BoundFlags::default()),
            }
        }
        Command::Trial {
            common,
            solver,
            n,
            trial_index,
        } => run_trials(load(&common)?, solver, n, trial_index),
        Command::Mc { common, n } => run_mc(load(&common)?, n),
        Command::Sweep { common } => run_sweep(load(&common)?),
        Command::Bounds { common, bounds } => {
            let cfg = match &common.config {
                Some(_) => Some(load(&common)?),
                None => None,
            };
            run_bounds(&common, cfg, bounds)
        }
    }
}

impl Default for BoundFlags {
    fn default() -> Self {
        BoundFlags {
            G: None,
            lambda: None,
            sigma2: None,
            Gtilde: None,
            D: None,
            n: None,
            eta: BoundTableOptions::default().eta,
            fx1: None,
        }
    }
}

fn experiment(cfg: ExperimentConfig) -> CliResult<Experiment> {
    Experiment::new(cfg).map_err(config_err)
}

fn budget(cfg: &ExperimentConfig, n: Option<usize>) -> CliResult<usize> {
    let n = n.unwrap_or(*cfg.n_grid.last().expect("validated grid is nonempty"));
    if n < 1 {
        return Err(config_err(Error::Config("--n must be at least 1".into())));
    }
    Ok(n)
}

fn run_trials(
    cfg: ExperimentConfig,
    solver: Option<String>,
    n: Option<usize>,
    trial: usize,
) -> CliResult<()> {
    let n = budget(&cfg, n)?;
    let exp = experiment(cfg)?;
    let solvers: Vec<_> = match &solver {
        Some(label) => vec![exp
            .solver(label)
            .ok_or_else(|| config_err(Error::Config(format!("no solver labelled `{label}`"))))?],
        None => exp.config.solvers.iter().collect(),
    };
    let mut text = String::from("solver,n,trial,subopt\n");
    for s in solvers {
        let v = run_trial(&exp, s, n, trial).map_err(runtime_err)?;
        text.push_str(&format!(
            "{},{n},{trial},{}\n",
            s.label(),
            super::output::fmt_float(v)
        ));
    }
    emit(exp.config.output.as_deref(), &text)
}

fn run_mc(cfg: ExperimentConfig, n: Option<usize>) -> CliResult<()> {
    let n = budget(&cfg, n)?;
    let exp = experiment(cfg)?;
    let rows = exp
        .config
        .solvers
        .iter()
        .map(|s| monte_carlo(&exp, s, n))
        .collect::<Result<Vec<_>>>()
        .map_err(runtime_err)?;
    emit(exp.config.output.as_deref(), &render_csv(&rows))
}

fn run_sweep(cfg: ExperimentConfig) -> CliResult<()> {
    let exp = experiment(cfg)?;
    let rows = sweep(&exp).map_err(runtime_err)?;
    emit(exp.config.output.as_deref(), &render_csv(&rows))?;
    if exp.config.n_grid.len() >= 3 {
        for s in &exp.config.solvers {
            let label = s.label();
            match fit_rate(&rows, &label) {
                Ok(fit) => {
                    for n in &fit.excluded {
                        eprintln!(
                            "warning: {label} at n={n} has nonpositive mean, excluded from fit"
                        );
                    }
                    eprintln!(
                        "fit {label}: slope {:.4}, intercept {:.4} over {} budgets",
                        fit.slope, fit.intercept, fit.points
                    );
                }
                Err(e) => eprintln!("warning: {e}"),
            }
        }
    }
    Ok(())
}

fn run_bounds(common: &Common, cfg: Option<ExperimentConfig>, flags: BoundFlags) -> CliResult<()> {
    let missing = |name: &str| {
        config_err(Error::Config(format!(
            "--{name} is required without --config"
        )))
    };
    let (base, grid, output) = match cfg {
        Some(cfg) => {
            let exp = experiment(cfg)?;
            let p = BoundParams::for_problem(&exp.problem, None).map_err(config_err)?;
            (
                Some(p),
                Some(exp.config.n_grid.clone()),
                exp.config.output.clone(),
            )
        }
        None => (
            None,
            None,
            common.out.as_ref().map(|p| p.display().to_string()),
        ),
    };
    let params = BoundParams {
        lambda: flags
            .lambda
            .or(base.map(|p| p.lambda))
            .ok_or_else(|| missing("lambda"))?,
        G: flags.G.or(base.map(|p| p.G)).ok_or_else(|| missing("G"))?,
        Gtilde: flags.Gtilde.or(base.map(|p| p.Gtilde)).unwrap_or(0.0),
        sigma2: flags.sigma2.or(base.map(|p| p.sigma2)).unwrap_or(0.0),
        D: flags.D.or(base.map(|p| p.D)).ok_or_else(|| missing("D"))?,
    };
    params.validate().map_err(config_err)?;
    let grid = flags.n.or(grid).ok_or_else(|| missing("n"))?;
    if grid.iter().any(|&n| n < 1) {
        return Err(config_err(Error::Config(
            "budgets must be at least 1".into(),
        )));
    }
    let opts = BoundTableOptions {
        eta: flags.eta,
        f_x1: flags.fx1,
    };
    if !(opts.eta > 0.0 && opts.eta < 1.0) {
        return Err(config_err(Error::Config("--eta must lie in (0, 1)".into())));
    }
    let text = render_bound_table(&params, &grid, opts).map_err(config_err)?;
    emit(output.as_deref(), &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mode_names() {
        assert_eq!(parse_mode("mc"), Ok(Mode::Mc));
        assert!(parse_mode("fast").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(cli_main(["proxagg", "nonsense"]), 1);
        assert_eq!(cli_main(["proxagg", "sweep"]), 1);
        assert_eq!(cli_main(["proxagg", "bounds", "--G", "1"]), 1);
        assert_eq!(cli_main(["proxagg", "--help"]), 0);
    }
}
