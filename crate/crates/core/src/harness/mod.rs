//! Experiment harness: single trials, Monte Carlo cells, rate fits, and
//! CSV output.

pub mod cli;
pub mod config;
pub mod output;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundParams};
use crate::error::{invalid, Error, Result};
use crate::oracles::rng::{derive_stream, label_id};
use crate::oracles::{Problem, RngStream};
use crate::solvers::{algorithm1, epoch_gd, erm, sgd, Algo1Config, EpochGdParams, TraceMode};
use crate::vecdom::Point;

pub use config::{canonical_config, ExperimentConfig, Mode, SolverKind, SolverSpec};
pub use output::{emit_bound_table, emit_csv, render_bound_table, render_csv, BoundTableOptions};

/// A validated configuration together with its built problem.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub problem: Problem,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let problem = config.problem.build()?;
        Ok(Experiment { config, problem })
    }

    pub fn solver(&self, label: &str) -> Option<&SolverSpec> {
        self.config.solvers.iter().find(|s| s.label() == label)
    }
}

/// RNG stream of one `(solver, n, trial)` cell. Streams never overlap
/// between cells, so results do not depend on scheduling.
pub fn trial_rng(master_seed: u64, label: &str, n: usize, trial: usize) -> RngStream {
    RngStream::new(
        master_seed,
        derive_stream(&[label_id(label), n as u64, trial as u64]),
    )
}

/// Output point of one solver run with budget `n`.
pub fn run_solver(
    problem: &Problem,
    kind: &SolverKind,
    n: usize,
    rng: &mut RngStream,
) -> Result<Point> {
    Ok(match kind {
        SolverKind::Algorithm1 {
            schedule,
            grad_bound,
        } => {
            let cfg = Algo1Config {
                n,
                schedule: *schedule,
                grad_bound_override: *grad_bound,
                trace: TraceMode::Streaming,
                checkpoints: Vec::new(),
            };
            algorithm1(problem, &cfg, rng)?.output
        }
        SolverKind::Sgd { average } => sgd(problem, n, rng, *average)?.output().clone(),
        SolverKind::EpochGd { t1, eta1 } => {
            epoch_gd(
                problem,
                n,
                rng,
                EpochGdParams {
                    t1: *t1,
                    eta1: *eta1,
                },
            )?
            .output
        }
        SolverKind::Erm => erm(problem, n, rng)?.output,
        SolverKind::Start => problem.x1().clone(),
    })
}

/// Suboptimality `F(y) - F*`, floored at zero. Values below
/// `-(1e-12 max(1, |F*|) + certificate gap)` mean the reference optimum is
/// wrong and are reported as errors.
pub fn floored_suboptimality(problem: &Problem, y: &Point) -> Result<f64> {
    let s = problem.suboptimality(y)?;
    let m = problem.true_minimizer();
    let slack = 1e-12 * m.optimum.abs().max(1.0) + m.gap;
    if s < -slack {
        return Err(invalid(
            "suboptimality",
            format!("{s} is below the certified optimum (slack {slack})"),
        ));
    }
    Ok(s.max(0.0))
}

pub fn run_trial(exp: &Experiment, solver: &SolverSpec, n: usize, trial: usize) -> Result<f64> {
    let label = solver.label();
    let wrap = |e: Error| Error::Trial {
        solver: label.clone(),
        n,
        trial,
        source: Box::new(e),
    };
    let mut rng = trial_rng(exp.config.master_seed, &label, n, trial);
    let y = run_solver(&exp.problem, &solver.kind, n, &mut rng).map_err(wrap)?;
    floored_suboptimality(&exp.problem, &y).map_err(wrap)
}

/// Theoretical bound for a solver at budget `n`, where one exists.
pub fn solver_bound(problem: &Problem, kind: &SolverKind, n: usize) -> Result<Option<f64>> {
    let params = |g| BoundParams::for_problem(problem, g);
    Ok(match kind {
        SolverKind::Algorithm1 { grad_bound, .. } => {
            Some(bounds::algo1_rate(n, &params(*grad_bound)?)?)
        }
        SolverKind::Sgd { average: true } if n >= 2 => Some(bounds::sgd_rate(n, &params(None)?)?),
        SolverKind::Sgd { .. } => None,
        SolverKind::EpochGd { .. } => Some(bounds::epoch_gd_rate(n, &params(None)?)?),
        SolverKind::Erm => Some(bounds::erm_rate(n, &params(None)?)?),
        SolverKind::Start => None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub solver: String,
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    /// `NaN` for a single trial.
    pub stderr: f64,
    pub q50: f64,
    pub q90: f64,
    pub q95: f64,
    pub q99: f64,
    pub bound: Option<f64>,
    pub bound_satisfied: Option<bool>,
}

/// Nearest-rank quantile of sorted data: element `ceil(p M) - 1`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    // guard against p*M landing a hair above an integer
    let rank = (p * m as f64 - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(m) - 1]
}

pub fn summarize(solver: &str, n: usize, values: &[f64], bound: Option<f64>) -> SummaryRow {
    let m = values.len();
    let mean = values.iter().sum::<f64>() / m as f64;
    let stderr = if m > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        (var / m as f64).sqrt()
    } else {
        f64::NAN
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    SummaryRow {
        solver: solver.to_string(),
        n,
        trials: m,
        mean,
        stderr,
        q50: nearest_rank(&sorted, 0.50),
        q90: nearest_rank(&sorted, 0.90),
        q95: nearest_rank(&sorted, 0.95),
        q99: nearest_rank(&sorted, 0.99),
        bound,
        bound_satisfied: bound.map(|b| mean <= b),
    }
}

/// Suboptimality of every trial of one cell, in trial order.
pub fn trial_values(exp: &Experiment, solver: &SolverSpec, n: usize) -> Result<Vec<f64>> {
    let trials = exp.config.trials;
    let run = || -> Result<Vec<f64>> {
        if exp.config.threads == Some(1) {
            (0..trials).map(|t| run_trial(exp, solver, n, t)).collect()
        } else {
            (0..trials)
                .into_par_iter()
                .map(|t| run_trial(exp, solver, n, t))
                .collect()
        }
    };
    match exp.config.threads {
        Some(k) if k > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        _ => run(),
    }
}

pub fn monte_carlo(exp: &Experiment, solver: &SolverSpec, n: usize) -> Result<SummaryRow> {
    let values = trial_values(exp, solver, n)?;
    let bound = solver_bound(&exp.problem, &solver.kind, n)?;
    Ok(summarize(&solver.label(), n, &values, bound))
}

/// Every solver at every budget of the grid.
pub fn sweep(exp: &Experiment) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for solver in &exp.config.solvers {
        for &n in &exp.config.n_grid {
            rows.push(monte_carlo(exp, solver, n)?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub solver: String,
    /// Slope of `ln mean` against `ln n`.
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
    /// Budgets dropped because their mean was not positive.
    pub excluded: Vec<usize>,
}

/// Least-squares fit of `ln mean = intercept + slope ln n` over the rows of
/// one solver, skipping nonpositive means.
pub fn fit_rate(rows: &[SummaryRow], solver: &str) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for r in rows.iter().filter(|r| r.solver == solver) {
        if r.mean > 0.0 && r.mean.is_finite() {
            xs.push((r.n as f64).ln());
            ys.push(r.mean.ln());
        } else {
            excluded.push(r.n);
        }
    }
    if xs.len() < 3 {
        return Err(invalid(
            "rows",
            format!(
                "rate fit for `{solver}` needs 3 positive means, found {}",
                xs.len()
            ),
        ));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(RateFit {
        solver: solver.to_string(),
        slope,
        intercept: my - slope * mx,
        points: xs.len(),
        excluded,
    })
}
