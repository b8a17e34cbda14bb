//! Quadratic prox-functions and their running convex combination.
//!
//! A single oracle answer at `x_i` induces the lower model
//! `p_i(x) = f_i + <g_i, x - x_i> + lambda/2 ||x - x_i||^2`. A convex
//! combination of such models with a common `lambda` is again
//! `lambda/2 <x, x> + <l, x> + c`, so the aggregate is stored as `(l, c)`
//! and mixing is an affine update of those two values.

use crate::error::{invalid, Result};
use crate::oracles::OracleSample;
use crate::vecdom::{Domain, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct ProxTerm {
    pub anchor: Point,
    pub value: f64,
    pub grad: Point,
    pub lambda: f64,
}

impl ProxTerm {
    pub fn new(anchor: Point, sample: OracleSample, lambda: f64) -> Self {
        ProxTerm {
            anchor,
            value: sample.value,
            grad: sample.subgradient,
            lambda,
        }
    }

    /// Direct evaluation in anchored form.
    pub fn eval(&self, x: &Point) -> f64 {
        let d = x.sub(&self.anchor);
        self.value + self.grad.dot(&d) + 0.5 * self.lambda * d.norm_sq()
    }
}

/// `P(x) = lambda/2 <x, x> + <lin, x> + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedProxModel {
    lambda: f64,
    lin: Point,
    constant: f64,
}

impl AggregatedProxModel {
    pub fn from_parts(lambda: f64, lin: Point, constant: f64) -> Self {
        AggregatedProxModel {
            lambda,
            lin,
            constant,
        }
    }

    pub fn from_term(term: &ProxTerm) -> Self {
        let lambda = term.lambda;
        let lin = term.grad.axpy(-lambda, &term.anchor);
        let constant =
            term.value - term.grad.dot(&term.anchor) + 0.5 * lambda * term.anchor.norm_sq();
        AggregatedProxModel {
            lambda,
            lin,
            constant,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lin(&self) -> &Point {
        &self.lin
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn dim(&self) -> usize {
        self.lin.dim()
    }

    /// `(1 - step) * self + step * term`.
    pub fn mix(&self, step: f64, term: &ProxTerm) -> Result<Self> {
        if !(0.0..=1.0).contains(&step) {
            return Err(invalid(
                "step",
                format!("mixing step {step} outside [0, 1]"),
            ));
        }
        if term.lambda != self.lambda {
            return Err(invalid(
                "lambda",
                format!("term has {} but model has {}", term.lambda, self.lambda),
            ));
        }
        term.anchor.check_dim(self.dim())?;
        term.grad.check_dim(self.dim())?;
        let t = AggregatedProxModel::from_term(term);
        Ok(AggregatedProxModel {
            lambda: self.lambda,
            lin: self.lin.mix(step, &t.lin),
            constant: (1.0 - step) * self.constant + step * t.constant,
        })
    }

    pub fn evaluate(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim())?;
        Ok(0.5 * self.lambda * x.norm_sq() + self.lin.dot(x) + self.constant)
    }

    /// Minimizer over `domain`: the Hessian is `lambda * I`, so it is the
    /// projection of the stationary point `-lin / lambda`.
    pub fn argmin(&self, domain: &Domain) -> Result<Point> {
        domain.project(&self.lin.scale(-1.0 / self.lambda))
    }

    pub fn min_value(&self, domain: &Domain) -> Result<f64> {
        let x = self.argmin(domain)?;
        self.evaluate(&x)
    }
}

pub fn model_from_term(term: &ProxTerm) -> AggregatedProxModel {
    AggregatedProxModel::from_term(term)
}

pub fn mix(model: &AggregatedProxModel, step: f64, term: &ProxTerm) -> Result<AggregatedProxModel> {
    model.mix(step, term)
}

pub fn model_argmin(model: &AggregatedProxModel, domain: &Domain) -> Result<Point> {
    model.argmin(domain)
}

pub fn model_min_value(model: &AggregatedProxModel, domain: &Domain) -> Result<f64> {
    model.min_value(domain)
}

pub fn evaluate(model: &AggregatedProxModel, x: &Point) -> Result<f64> {
    model.evaluate(x)
}
