//! Stochastic first-order oracles and the synthetic strongly convex
//! problems they sample from.
//!
//! Every problem carries analytic certificates: `grad_bound` (G) dominates
//! every realizable sampled subgradient norm on the domain, `noise_bound`
//! (G~) dominates the norm of the sampled-minus-true subgradient, and
//! `noise_variance` (sigma^2) dominates `E||g - E g||^2`.

pub mod finite_sum;
pub mod rng;

use serde::{Deserialize, Serialize};

use crate::bounds::resolve_domain;
use crate::error::{invalid, Error, Result};
use crate::vecdom::{Domain, Point};

pub use finite_sum::{FiniteSum, Loss, Row, Solution};
pub use rng::RngStream;

/// Relative inflation on analytic certificates so that rounding in the
/// per-sample norm never exceeds them.
const CERT_SLACK: f64 = 1e-14;

/// One oracle answer `{f~(x), grad f~(x)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub value: f64,
    pub subgradient: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProblemKind {
    /// `f(w) = lambda/2 ||w - w*||^2`, sampled as
    /// `f(w) + <xi, w - w*> + nu` with `xi ~ U[-s, s]^d`, `nu ~ U[-a, a]`.
    NoisyQuadratic {
        w_star: Point,
        grad_noise: f64,
        value_noise: f64,
    },
    /// Regularized hinge loss, one uniformly drawn row per sample.
    FiniteSumHinge { rows: Vec<Row> },
    /// Regularized logistic loss, one uniformly drawn row per sample.
    FiniteSumLogistic { rows: Vec<Row> },
}

impl ProblemKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemKind::NoisyQuadratic { .. } => "noisy_quadratic",
            ProblemKind::FiniteSumHinge { .. } => "finite_sum_hinge",
            ProblemKind::FiniteSumLogistic { .. } => "finite_sum_logistic",
        }
    }

    fn finite_sum(&self) -> Option<(Loss, &[Row])> {
        match self {
            ProblemKind::FiniteSumHinge { rows } => Some((Loss::Hinge, rows)),
            ProblemKind::FiniteSumLogistic { rows } => Some((Loss::Logistic, rows)),
            ProblemKind::NoisyQuadratic { .. } => None,
        }
    }
}

/// `w*` of the deterministic objective over the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub point: Point,
    pub optimum: f64,
    /// Certified bound on `optimum - true minimum` (0 for closed forms).
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    kind: ProblemKind,
    dim: usize,
    lambda: f64,
    domain: Domain,
    x1: Point,
    grad_bound: f64,
    noise_bound: f64,
    base_noise_variance: f64,
    averaging: usize,
    minimizer: Minimizer,
}

impl Problem {
    /// Validates the payload, resolves an unbounded domain, derives the
    /// certificates and computes the true minimizer.
    ///
    /// An [`Domain::Unbounded`] input is resolved to the ball of radius
    /// `G_1 / lambda` around `x1`, where `G_1` bounds the subgradient norm
    /// at `x1` alone; that ball contains the minimizer by strong convexity.
    pub fn new(kind: ProblemKind, lambda: f64, domain: Domain, x1: Point) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid("lambda", format!("must be positive, got {lambda}")));
        }
        let dim = x1.dim();
        domain.validate()?;
        if let Some(d) = domain.dim() {
            x1.check_dim(d)?;
        }
        kind_check(&kind, dim)?;

        let domain = if domain.is_bounded() {
            domain
        } else {
            let g1 = match &kind {
                ProblemKind::NoisyQuadratic {
                    w_star, grad_noise, ..
                } => lambda * x1.distance(w_star) + grad_noise * (dim as f64).sqrt(),
                ProblemKind::FiniteSumHinge { rows } | ProblemKind::FiniteSumLogistic { rows } => {
                    lambda * x1.norm() + max_norm(rows)
                }
            };
            if g1 <= 0.0 {
                return Err(Error::InvalidDomain(
                    "cannot resolve unbounded domain: zero gradient bound at x1".into(),
                ));
            }
            resolve_domain(&Domain::Unbounded, g1, lambda, &x1)?
        };
        if !domain.contains(&x1) {
            return Err(Error::OutsideDomain);
        }

        let sqrt_d = (dim as f64).sqrt();
        let (grad_bound, noise_bound, variance) = match &kind {
            ProblemKind::NoisyQuadratic {
                w_star, grad_noise, ..
            } => {
                let far = domain.max_distance_from(w_star)?;
                (
                    lambda * far + grad_noise * sqrt_d,
                    grad_noise * sqrt_d,
                    dim as f64 * grad_noise * grad_noise / 3.0,
                )
            }
            ProblemKind::FiniteSumHinge { rows } | ProblemKind::FiniteSumLogistic { rows } => {
                let r = max_norm(rows);
                let far = domain.max_distance_from(&Point::zeros(dim))?;
                (lambda * far + r, 2.0 * r, r * r)
            }
        };

        let mut problem = Problem {
            kind,
            dim,
            lambda,
            domain,
            x1,
            grad_bound: grad_bound * (1.0 + CERT_SLACK),
            noise_bound: noise_bound * (1.0 + CERT_SLACK),
            base_noise_variance: variance,
            averaging: 1,
            minimizer: Minimizer {
                point: Point::zeros(dim),
                optimum: 0.0,
                gap: 0.0,
            },
        };
        problem.minimizer = problem.solve_minimizer()?;
        Ok(problem)
    }

    fn solve_minimizer(&self) -> Result<Minimizer> {
        match &self.kind {
            ProblemKind::NoisyQuadratic { w_star, .. } => {
                let point = self.domain.project(w_star)?;
                let optimum = 0.5 * self.lambda * point.sub(w_star).norm_sq();
                Ok(Minimizer {
                    point,
                    optimum,
                    gap: 0.0,
                })
            }
            ProblemKind::FiniteSumHinge { .. } | ProblemKind::FiniteSumLogistic { .. } => {
                let sol = self.objective().unwrap().minimize(&self.domain, &self.x1)?;
                Ok(Minimizer {
                    point: sol.point,
                    optimum: sol.value,
                    gap: sol.gap,
                })
            }
        }
    }

    pub fn kind(&self) -> &ProblemKind {
        &self.kind
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    /// Always bounded.
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn x1(&self) -> &Point {
        &self.x1
    }
    /// Certified `G`.
    pub fn grad_bound(&self) -> f64 {
        self.grad_bound
    }
    /// Certified `G~`.
    pub fn noise_bound(&self) -> f64 {
        self.noise_bound
    }
    /// Certified `sigma^2`, divided by the averaging factor.
    pub fn noise_variance(&self) -> f64 {
        self.base_noise_variance / self.averaging as f64
    }
    pub fn averaging(&self) -> usize {
        self.averaging
    }

    /// The full finite-sum objective, if this is a finite-sum kind.
    pub fn objective(&self) -> Option<FiniteSum<'_>> {
        self.kind.finite_sum().map(|(loss, rows)| FiniteSum {
            loss,
            lambda: self.lambda,
            rows,
        })
    }

    fn check_feasible(&self, x: &Point) -> Result<()> {
        x.check_dim(self.dim)?;
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain)
        }
    }

    /// Oracle answer at `x`: the mean of `averaging` independent base draws.
    pub fn sample(&self, x: &Point, rng: &mut RngStream) -> Result<OracleSample> {
        self.check_feasible(x)?;
        let first = self.sample_base(x, rng)?;
        if self.averaging == 1 {
            return Ok(first);
        }
        let k = self.averaging;
        let mut value = first.value;
        let mut grad = first.subgradient;
        for _ in 1..k {
            let s = self.sample_base(x, rng)?;
            value += s.value;
            grad.axpy_assign(1.0, &s.subgradient);
        }
        let inv = 1.0 / k as f64;
        Ok(OracleSample {
            value: value * inv,
            subgradient: grad.scale(inv),
        })
    }

    fn sample_base(&self, x: &Point, rng: &mut RngStream) -> Result<OracleSample> {
        match &self.kind {
            ProblemKind::NoisyQuadratic {
                w_star,
                grad_noise,
                value_noise,
            } => {
                let diff = x.sub(w_star);
                let mut xi = Vec::with_capacity(self.dim);
                for _ in 0..self.dim {
                    xi.push(rng.symmetric(*grad_noise)?);
                }
                let xi = Point::from_vec_unchecked(xi);
                let nu = rng.symmetric(*value_noise)?;
                let value = 0.5 * self.lambda * diff.norm_sq() + xi.dot(&diff) + nu;
                let subgradient = diff.scale(self.lambda).add(&xi);
                Ok(OracleSample { value, subgradient })
            }
            ProblemKind::FiniteSumHinge { rows } | ProblemKind::FiniteSumLogistic { rows } => {
                let loss = self.kind.finite_sum().unwrap().0;
                let row = &rows[rng.index(rows.len())?];
                let (value, subgradient) = finite_sum::component(loss, self.lambda, row, x);
                Ok(OracleSample { value, subgradient })
            }
        }
    }

    /// Deterministic `f(x)`.
    pub fn true_value(&self, x: &Point) -> Result<f64> {
        self.check_feasible(x)?;
        Ok(match &self.kind {
            ProblemKind::NoisyQuadratic { w_star, .. } => {
                0.5 * self.lambda * x.sub(w_star).norm_sq()
            }
            _ => self.objective().unwrap().value(x),
        })
    }

    /// A subgradient of `f` at `x`, the expectation of sampled subgradients.
    pub fn true_subgradient(&self, x: &Point) -> Result<Point> {
        self.check_feasible(x)?;
        Ok(match &self.kind {
            ProblemKind::NoisyQuadratic { w_star, .. } => x.sub(w_star).scale(self.lambda),
            _ => self.objective().unwrap().gradient(x),
        })
    }

    pub fn true_minimizer(&self) -> &Minimizer {
        &self.minimizer
    }

    /// Suboptimality `S(y) = f(y) - min f`, unfloored.
    pub fn suboptimality(&self, y: &Point) -> Result<f64> {
        Ok(self.true_value(y)? - self.minimizer.optimum)
    }

    /// Problem whose oracle averages `k` independent base samples.
    pub fn averaged_oracle(&self, k: usize) -> Result<Problem> {
        if k < 1 {
            return Err(invalid("k", "averaging factor must be at least 1"));
        }
        let mut p = self.clone();
        p.averaging = self
            .averaging
            .checked_mul(k)
            .ok_or_else(|| invalid("k", "averaging factor overflows"))?;
        Ok(p)
    }

    /// Minimizes the average of `n` fully revealed sampled functions
    /// (each itself an average of `averaging` base draws).
    pub fn empirical_minimizer(&self, n: usize, rng: &mut RngStream) -> Result<Solution> {
        if n < 1 {
            return Err(invalid("n", "need at least one sampled function"));
        }
        let draws = n
            .checked_mul(self.averaging)
            .ok_or_else(|| invalid("n", "sample count overflows"))?;
        match &self.kind {
            ProblemKind::NoisyQuadratic {
                w_star,
                grad_noise,
                value_noise,
            } => {
                // average of sampled quadratics: lambda/2 ||w - (w* - xi_bar/lambda)||^2 + const
                let mut xi_bar = Point::zeros(self.dim);
                let mut nu_bar = 0.0;
                let inv = 1.0 / draws as f64;
                let mut xi = vec![0.0; self.dim];
                for _ in 0..draws {
                    for c in xi.iter_mut() {
                        *c = rng.symmetric(*grad_noise)?;
                    }
                    xi_bar.axpy_assign(inv, &Point::from_vec_unchecked(xi.clone()));
                    nu_bar += inv * rng.symmetric(*value_noise)?;
                }
                let center = w_star.axpy(-1.0 / self.lambda, &xi_bar);
                let point = self.domain.project(&center)?;
                let diff = point.sub(w_star);
                let value = 0.5 * self.lambda * diff.norm_sq() + xi_bar.dot(&diff) + nu_bar;
                let grad = diff.scale(self.lambda).add(&xi_bar);
                let gap = finite_sum::prox_gap(&self.domain, &point, &grad, self.lambda)?;
                Ok(Solution {
                    point,
                    value,
                    gap,
                    iterations: 0,
                })
            }
            ProblemKind::FiniteSumHinge { rows } | ProblemKind::FiniteSumLogistic { rows } => {
                let loss = self.kind.finite_sum().unwrap().0;
                let mut drawn = Vec::with_capacity(draws);
                for _ in 0..draws {
                    drawn.push(rows[rng.index(rows.len())?].clone());
                }
                FiniteSum {
                    loss,
                    lambda: self.lambda,
                    rows: &drawn,
                }
                .minimize(&self.domain, &self.x1)
            }
        }
    }
}

fn max_norm(rows: &[Row]) -> f64 {
    rows.iter().map(|r| r.features.norm()).fold(0.0, f64::max)
}

fn kind_check(kind: &ProblemKind, dim: usize) -> Result<()> {
    match kind {
        ProblemKind::NoisyQuadratic {
            w_star,
            grad_noise,
            value_noise,
        } => {
            w_star.check_dim(dim)?;
            if !(grad_noise.is_finite() && *grad_noise >= 0.0) {
                return Err(invalid("grad_noise", "must be finite and nonnegative"));
            }
            if !(value_noise.is_finite() && *value_noise >= 0.0) {
                return Err(invalid("value_noise", "must be finite and nonnegative"));
            }
        }
        ProblemKind::FiniteSumHinge { rows } | ProblemKind::FiniteSumLogistic { rows } => {
            if rows.is_empty() {
                return Err(invalid("rows", "finite sum needs at least one row"));
            }
            for r in rows {
                r.features.check_dim(dim)?;
                if r.label != 1.0 && r.label != -1.0 {
                    return Err(invalid(
                        "label",
                        format!("must be +1 or -1, got {}", r.label),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Synthetic separable-with-noise classification rows: features uniform in
/// `[-1, 1]^d / sqrt(d)` (so `||x|| <= 1`), labels from a random hyperplane,
/// each flipped with probability `flip`.
pub fn generate_rows(dim: usize, m: usize, seed: u64, flip: f64) -> Result<Vec<Row>> {
    if dim < 1 || m < 1 {
        return Err(invalid("rows", "need dim >= 1 and m >= 1"));
    }
    if !(0.0..=1.0).contains(&flip) {
        return Err(invalid("flip", "must be a probability"));
    }
    let mut rng = RngStream::new(seed, rng::derive_stream(&[0xDA7A, dim as u64, m as u64]));
    let scale = 1.0 / (dim as f64).sqrt();
    let mut normal = Vec::with_capacity(dim);
    for _ in 0..dim {
        normal.push(rng.symmetric(1.0)?);
    }
    let normal = Point::from_vec_unchecked(normal);
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let mut x = Vec::with_capacity(dim);
        for _ in 0..dim {
            x.push(scale * rng.symmetric(1.0)?);
        }
        let features = Point::from_vec_unchecked(x);
        let mut label = if features.dot(&normal) >= 0.0 {
            1.0
        } else {
            -1.0
        };
        if rng.unit()? < flip {
            label = -label;
        }
        rows.push(Row { features, label });
    }
    Ok(rows)
}

/// Noisy quadratic used throughout the acceptance experiments: `d = 10`,
/// `lambda = 1`, unit ball at the origin, `x1 = e_1`, `w* = -e_1`,
/// gradient noise `s = 1/sqrt(10)` (so `s sqrt(d) = 1` and `G = 3`),
/// value noise `a = 1`.
pub fn canonical_noisy_quadratic() -> Problem {
    let d = 10;
    let kind = ProblemKind::NoisyQuadratic {
        w_star: Point::axis(d, 0, -1.0),
        grad_noise: 1.0 / (d as f64).sqrt(),
        value_noise: 1.0,
    };
    let domain = Domain::ball(Point::zeros(d), 1.0).unwrap();
    Problem::new(kind, 1.0, domain, Point::axis(d, 0, 1.0)).unwrap()
}
