//! Prox-function aggregation.
//!
//! Each iteration queries the oracle at the minimizer of the current
//! aggregate model, mixes the new prox-function in with weight
//! `u_{i-1}/2` (or the adaptive weight `lambda * Uhat_{i-1} / G^2`), and
//! moves the output `y` toward the query point by the same weight. The
//! scalar `u` follows `u <- u - u^2 / 4` from `u_1 = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::oracles::{Problem, RngStream};
use crate::proxmodel::{AggregatedProxModel, ProxTerm};
use crate::vecdom::Point;

/// Traces above this many iterations keep scalars only under
/// [`TraceMode::Auto`].
pub const STREAMING_THRESHOLD: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    #[default]
    WorstCase,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMode {
    Full,
    Streaming,
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Algo1Config {
    pub n: usize,
    pub schedule: Schedule,
    pub grad_bound_override: Option<f64>,
    pub trace: TraceMode,
    /// Iterations at which `S(y_i)` is recorded.
    pub checkpoints: Vec<usize>,
}

impl Algo1Config {
    pub fn new(n: usize) -> Self {
        Algo1Config {
            n,
            schedule: Schedule::WorstCase,
            grad_bound_override: None,
            trace: TraceMode::Auto,
            checkpoints: Vec::new(),
        }
    }

    pub fn adaptive(mut self) -> Self {
        self.schedule = Schedule::Adaptive;
        self
    }

    pub fn with_trace(mut self, trace: TraceMode) -> Self {
        self.trace = trace;
        self
    }
}

/// Scalars recorded at every iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub u: f64,
    /// Weight given to `x_i`; `1` at `i = 1`.
    pub step: f64,
    /// `sum_j alpha_j f~_j(x_j)` under the current weights.
    pub fhat_running: f64,
    /// `fhat_running - min P_i`.
    pub uhat: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub x: Point,
    pub y: Point,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub iteration: usize,
    pub suboptimality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub schedule: Schedule,
    pub steps: Vec<StepRecord>,
    /// `None` in streaming mode.
    pub points: Option<Vec<PointRecord>>,
    pub checkpoints: Vec<Checkpoint>,
    pub last_x: Point,
    pub output: Point,
    pub grad_bound: f64,
    /// Set when the override is below the problem's certified bound.
    pub grad_bound_underestimated: bool,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// `u - u^2 / 4` for `u in (0, 1]`.
pub fn u_next(u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(invalid("u", format!("must lie in (0, 1], got {u}")));
    }
    Ok(u - 0.25 * u * u)
}

pub fn algorithm1(problem: &Problem, cfg: &Algo1Config, rng: &mut RngStream) -> Result<Trace> {
    if cfg.n < 1 {
        return Err(invalid("n", "oracle budget must be at least 1"));
    }
    let certified = problem.grad_bound();
    let grad_bound = match cfg.grad_bound_override {
        Some(g) if !(g.is_finite() && g > 0.0) => {
            return Err(invalid("grad_bound_override", "must be positive"))
        }
        Some(g) => g,
        None => certified,
    };
    let full = match cfg.trace {
        TraceMode::Full => true,
        TraceMode::Streaming => false,
        TraceMode::Auto => cfg.n <= STREAMING_THRESHOLD,
    };
    let domain = problem.domain();
    let lambda = problem.lambda();
    let g2 = grad_bound * grad_bound;

    let mut steps = Vec::with_capacity(cfg.n);
    let mut points = full.then(|| Vec::with_capacity(cfg.n));
    let mut checkpoints = Vec::new();
    let mut record_checkpoint = |i: usize, y: &Point| -> Result<()> {
        if cfg.checkpoints.contains(&i) {
            checkpoints.push(Checkpoint {
                iteration: i,
                suboptimality: problem.suboptimality(y)?,
            });
        }
        Ok(())
    };

    let x1 = problem.x1().clone();
    let first = problem.sample(&x1, rng)?;
    let mut fhat = first.value;
    let mut model = AggregatedProxModel::from_term(&ProxTerm::new(x1.clone(), first, lambda));
    let mut uhat = fhat - model.min_value(domain)?;
    let mut u = 1.0;
    let mut y = x1.clone();
    let mut x = x1;
    steps.push(StepRecord {
        u,
        step: 1.0,
        fhat_running: fhat,
        uhat,
    });
    if let Some(p) = points.as_mut() {
        p.push(PointRecord {
            x: x.clone(),
            y: y.clone(),
        });
    }
    record_checkpoint(1, &y)?;

    for i in 2..=cfg.n {
        let step = match cfg.schedule {
            Schedule::WorstCase => 0.5 * u,
            Schedule::Adaptive => {
                if uhat > 0.0 {
                    (lambda * uhat / g2).min(1.0)
                } else {
                    0.5 * u
                }
            }
        };
        x = model.argmin(domain)?;
        let sample = problem.sample(&x, rng)?;
        fhat = (1.0 - step) * fhat + step * sample.value;
        model = model.mix(step, &ProxTerm::new(x.clone(), sample, lambda))?;
        y = y.mix(step, &x);
        u = u_next(u)?;
        uhat = fhat - model.min_value(domain)?;
        steps.push(StepRecord {
            u,
            step,
            fhat_running: fhat,
            uhat,
        });
        if let Some(p) = points.as_mut() {
            p.push(PointRecord {
                x: x.clone(),
                y: y.clone(),
            });
        }
        record_checkpoint(i, &y)?;
    }

    Ok(Trace {
        schedule: cfg.schedule,
        steps,
        points,
        checkpoints,
        last_x: x,
        output: y,
        grad_bound,
        grad_bound_underestimated: grad_bound < certified,
    })
}

/// Final weights `alpha_i` of every query point in the output, rebuilt by
/// replaying the recorded mixing steps backwards:
/// `alpha_i = step_i * prod_{j > i} (1 - step_j)`.
pub fn reconstruct_weights(trace: &Trace) -> Result<Vec<f64>> {
    let first = trace
        .steps
        .first()
        .ok_or_else(|| Error::MalformedTrace("empty trace".into()))?;
    if first.step != 1.0 {
        return Err(Error::MalformedTrace(
            "first step must carry full weight".into(),
        ));
    }
    if let Some(i) = trace
        .steps
        .iter()
        .position(|s| !(0.0..=1.0).contains(&s.step))
    {
        return Err(Error::MalformedTrace(format!(
            "step {} outside [0, 1] at iteration {}",
            trace.steps[i].step,
            i + 1
        )));
    }
    let n = trace.steps.len();
    let mut alpha = vec![0.0; n];
    let mut tail = 1.0;
    for i in (0..n).rev() {
        alpha[i] = trace.steps[i].step * tail;
        tail *= 1.0 - trace.steps[i].step;
    }
    Ok(alpha)
}
