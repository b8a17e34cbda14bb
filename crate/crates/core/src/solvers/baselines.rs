//! Baseline methods: projected SGD with step `1/(lambda t)`, Epoch-GD,
//! and empirical risk minimization.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::oracles::finite_sum::CERT_TOL;
use crate::oracles::{Problem, RngStream};
use crate::vecdom::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct SgdResult {
    /// `w_{n+1}`.
    pub last: Point,
    /// Uniform average of the queried points `w_1..w_n`.
    pub average: Point,
    pub averaged: bool,
    pub oracle_calls: usize,
}

impl SgdResult {
    pub fn output(&self) -> &Point {
        if self.averaged {
            &self.average
        } else {
            &self.last
        }
    }
}

pub fn sgd(problem: &Problem, n: usize, rng: &mut RngStream, average: bool) -> Result<SgdResult> {
    if n < 1 {
        return Err(invalid("n", "oracle budget must be at least 1"));
    }
    let domain = problem.domain();
    let lambda = problem.lambda();
    let mut w = problem.x1().clone();
    let mut avg = w.clone();
    for t in 1..=n {
        if t > 1 {
            avg = avg.mix(1.0 / t as f64, &w);
        }
        let g = problem.sample(&w, rng)?.subgradient;
        w = domain.project(&w.axpy(-1.0 / (lambda * t as f64), &g))?;
    }
    Ok(SgdResult {
        last: w,
        average: avg,
        averaged: average,
        oracle_calls: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochGdParams {
    /// Length of the first epoch.
    pub t1: usize,
    /// Step of the first epoch; `None` means `1 / lambda`.
    pub eta1: Option<f64>,
}

impl Default for EpochGdParams {
    fn default() -> Self {
        EpochGdParams { t1: 4, eta1: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochGdResult {
    pub output: Point,
    /// Average of each completed epoch, in order.
    pub epoch_outputs: Vec<Point>,
    pub epoch_lengths: Vec<usize>,
    pub oracle_calls: usize,
}

/// Epochs of doubling length and halving step. Only full epochs are run,
/// so up to half the budget can go unused.
pub fn epoch_gd(
    problem: &Problem,
    n: usize,
    rng: &mut RngStream,
    params: EpochGdParams,
) -> Result<EpochGdResult> {
    if params.t1 < 1 {
        return Err(invalid("t1", "initial epoch length must be at least 1"));
    }
    if n < params.t1 {
        return Err(invalid(
            "n",
            format!("budget {n} is smaller than the first epoch ({})", params.t1),
        ));
    }
    let domain = problem.domain();
    let mut eta = params.eta1.unwrap_or(1.0 / problem.lambda());
    if !(eta.is_finite() && eta > 0.0) {
        return Err(invalid("eta1", "initial step must be positive"));
    }
    let mut len = params.t1;
    let mut used = 0usize;
    let mut start = problem.x1().clone();
    let mut epoch_outputs = Vec::new();
    let mut epoch_lengths = Vec::new();
    while used.checked_add(len).is_some_and(|total| total <= n) {
        let mut w = start.clone();
        let mut avg = w.clone();
        for s in 1..=len {
            if s > 1 {
                avg = avg.mix(1.0 / s as f64, &w);
            }
            let g = problem.sample(&w, rng)?.subgradient;
            w = domain.project(&w.axpy(-eta, &g))?;
        }
        used += len;
        epoch_lengths.push(len);
        epoch_outputs.push(avg.clone());
        start = avg;
        len *= 2;
        eta *= 0.5;
    }
    Ok(EpochGdResult {
        output: start,
        epoch_outputs,
        epoch_lengths,
        oracle_calls: used,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErmResult {
    pub output: Point,
    /// Empirical objective at `output`.
    pub empirical_value: f64,
    pub gap: f64,
}

/// Exact minimizer of the average of `n` fully revealed sampled functions.
pub fn erm(problem: &Problem, n: usize, rng: &mut RngStream) -> Result<ErmResult> {
    let sol = problem.empirical_minimizer(n, rng)?;
    if sol.gap > CERT_TOL * sol.value.abs().max(1.0) {
        return Err(Error::Certificate {
            gap: sol.gap,
            iterations: sol.iterations,
        });
    }
    Ok(ErmResult {
        output: sol.point,
        empirical_value: sol.value,
        gap: sol.gap,
    })
}
