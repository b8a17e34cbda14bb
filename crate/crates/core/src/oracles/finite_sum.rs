//! Regularized finite-sum objectives
//! `F(w) = lambda/2 ||w||^2 + (1/m) sum_i loss(y_i <w, x_i>)` and the
//! deterministic solvers that minimize them over a bounded domain with a
//! certified suboptimality gap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecdom::{Domain, Point};

/// One labeled example. Labels are `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub features: Point,
    pub label: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    Hinge,
    Logistic,
}

impl Loss {
    /// Loss as a function of the margin `y <w, x>`.
    pub fn value(self, margin: f64) -> f64 {
        match self {
            Loss::Hinge => (1.0 - margin).max(0.0),
            Loss::Logistic => {
                if margin > 0.0 {
                    (-margin).exp().ln_1p()
                } else {
                    -margin + margin.exp().ln_1p()
                }
            }
        }
    }

    /// Derivative with respect to the margin; at the hinge kink the
    /// subgradient `0` is used.
    pub fn slope(self, margin: f64) -> f64 {
        match self {
            Loss::Hinge => {
                if margin < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Loss::Logistic => {
                if margin > 0.0 {
                    let e = (-margin).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + margin.exp())
                }
            }
        }
    }
}

/// Value and subgradient of a single regularized component.
pub fn component(loss: Loss, lambda: f64, row: &Row, w: &Point) -> (f64, Point) {
    let margin = row.label * w.dot(&row.features);
    let value = 0.5 * lambda * w.norm_sq() + loss.value(margin);
    let grad = w
        .scale(lambda)
        .axpy(loss.slope(margin) * row.label, &row.features);
    (value, grad)
}

/// Uniform average of regularized components over `rows` (repeats allowed).
#[derive(Debug, Clone, Copy)]
pub struct FiniteSum<'a> {
    pub loss: Loss,
    pub lambda: f64,
    pub rows: &'a [Row],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: Point,
    pub value: f64,
    /// Certified upper bound on `value - min F`.
    pub gap: f64,
    pub iterations: usize,
}

const HINGE_MAX_EPOCHS: usize = 200_000;
const LOGISTIC_MAX_ITERS: usize = 2_000_000;

/// Relative certificate target: `gap <= CERT_TOL * max(1, |value|)`.
pub const CERT_TOL: f64 = 1e-10;

impl<'a> FiniteSum<'a> {
    pub fn value(&self, w: &Point) -> f64 {
        let m = self.rows.len() as f64;
        let loss: f64 = self
            .rows
            .iter()
            .map(|r| self.loss.value(r.label * w.dot(&r.features)))
            .sum();
        0.5 * self.lambda * w.norm_sq() + loss / m
    }

    pub fn gradient(&self, w: &Point) -> Point {
        let m = self.rows.len() as f64;
        let mut g = w.scale(self.lambda);
        for r in self.rows {
            let s = self.loss.slope(r.label * w.dot(&r.features));
            if s != 0.0 {
                g.axpy_assign(s * r.label / m, &r.features);
            }
        }
        g
    }

    pub fn max_row_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.features.norm())
            .fold(0.0, f64::max)
    }

    pub fn minimize(&self, domain: &Domain, start: &Point) -> Result<Solution> {
        if self.rows.is_empty() {
            return Err(Error::InvalidParameter {
                name: "rows",
                reason: "finite sum needs at least one row".into(),
            });
        }
        match self.loss {
            Loss::Hinge => self.minimize_hinge(domain),
            Loss::Logistic => self.minimize_smooth(domain, start),
        }
    }

    /// Dual coordinate ascent. For `alpha in [0,1]^m`, with
    /// `v = (1/m) sum alpha_i y_i x_i` and `w = proj(v / lambda)`,
    /// `D(alpha) = mean(alpha) + lambda/2 ||w||^2 - <w, v>` lower-bounds
    /// `min_domain F`, so `F(w) - D(alpha)` certifies `w`.
    fn minimize_hinge(&self, domain: &Domain) -> Result<Solution> {
        let m = self.rows.len();
        let inv_m = 1.0 / m as f64;
        let lambda = self.lambda;
        let dim = self.rows[0].features.dim();
        let mut alpha = vec![0.0; m];
        let mut v = Point::zeros(dim);
        let project = |v: &Point| domain.project(&v.scale(1.0 / lambda));
        let mut gap = f64::INFINITY;

        for epoch in 1..=HINGE_MAX_EPOCHS {
            for (i, row) in self.rows.iter().enumerate() {
                let x = &row.features;
                let y = row.label;
                let q = x.norm_sq();
                if q == 0.0 {
                    alpha[i] = 1.0;
                    continue;
                }
                let coef = y * inv_m;
                let lo = -alpha[i];
                let hi = 1.0 - alpha[i];
                // sign of the directional derivative along e_i
                let deriv = |t: f64| -> Result<f64> {
                    let w = project(&v.axpy(t * coef, x))?;
                    Ok(1.0 - y * w.dot(x))
                };
                let free = ((1.0 - y * v.dot(x) / lambda) * lambda / (q * inv_m)).clamp(lo, hi);
                let t = if domain.contains_exact(&v.axpy(free * coef, x).scale(1.0 / lambda)) {
                    free
                } else if deriv(lo)? <= 0.0 {
                    lo
                } else if deriv(hi)? >= 0.0 {
                    hi
                } else {
                    let (mut a, mut b) = (lo, hi);
                    for _ in 0..200 {
                        let mid = 0.5 * (a + b);
                        if mid <= a || mid >= b {
                            break;
                        }
                        if deriv(mid)? > 0.0 {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    0.5 * (a + b)
                };
                if t != 0.0 {
                    alpha[i] += t;
                    v.axpy_assign(t * coef, x);
                }
            }

            // rebuild v to keep incremental drift out of the certificate
            let mut fresh = Point::zeros(dim);
            for (a, r) in alpha.iter().zip(self.rows) {
                if *a != 0.0 {
                    fresh.axpy_assign(a * r.label * inv_m, &r.features);
                }
            }
            v = fresh;
            let w = project(&v)?;
            let primal = self.value(&w);
            let dual = alpha.iter().sum::<f64>() * inv_m + 0.5 * lambda * w.norm_sq() - w.dot(&v);
            gap = (primal - dual).max(0.0);
            if gap <= CERT_TOL * primal.abs().max(1.0) {
                return Ok(Solution {
                    point: w,
                    value: primal,
                    gap,
                    iterations: epoch,
                });
            }
        }
        Err(Error::Certificate {
            gap,
            iterations: HINGE_MAX_EPOCHS,
        })
    }

    /// Projected gradient descent with step `1/L`; stops on the
    /// strong-convexity prox gap.
    fn minimize_smooth(&self, domain: &Domain, start: &Point) -> Result<Solution> {
        let r = self.max_row_norm();
        let smooth = self.lambda + 0.25 * r * r;
        let mut w = domain.project(start)?;
        let mut gap = f64::INFINITY;
        for it in 0..LOGISTIC_MAX_ITERS {
            let g = self.gradient(&w);
            let value = self.value(&w);
            gap = prox_gap(domain, &w, &g, self.lambda)?;
            if gap <= CERT_TOL * value.abs().max(1.0) {
                return Ok(Solution {
                    point: w,
                    value,
                    gap,
                    iterations: it,
                });
            }
            w = domain.project(&w.axpy(-1.0 / smooth, &g))?;
        }
        Err(Error::Certificate {
            gap,
            iterations: LOGISTIC_MAX_ITERS,
        })
    }
}

/// Upper bound on `F(w) - min_domain F` for a `lambda`-strongly convex `F`
/// with subgradient `g` at `w`:
/// `max_{v in domain} <g, w - v> - lambda/2 ||w - v||^2`. Equals
/// `||g||^2 / (2 lambda)` when the unconstrained maximizer is feasible.
pub fn prox_gap(domain: &Domain, w: &Point, g: &Point, lambda: f64) -> Result<f64> {
    let v = domain.project(&w.axpy(-1.0 / lambda, g))?;
    let d = w.sub(&v);
    Ok((g.dot(&d) - 0.5 * lambda * d.norm_sq()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(x: &[f64], y: f64) -> Row {
        Row {
            features: Point::new(x.to_vec()).unwrap(),
            label: y,
        }
    }

    #[test]
    fn logistic_is_stable_for_large_margins() {
        assert!((Loss::Logistic.value(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(Loss::Logistic.value(800.0) >= 0.0);
        assert!((Loss::Logistic.value(-800.0) - 800.0).abs() < 1e-9);
        assert!((Loss::Logistic.slope(0.0) + 0.5).abs() < 1e-15);
        assert!(Loss::Logistic.slope(-800.0).is_finite());
    }

    #[test]
    fn two_row_hinge_value() {
        let rows = [row(&[1.0], 1.0), row(&[-1.0], 1.0)];
        let f = FiniteSum {
            loss: Loss::Hinge,
            lambda: 1.0,
            rows: &rows,
        };
        assert_eq!(f.value(&Point::zeros(1)), 1.0);
    }

    #[test]
    fn singleton_hinge_matches_grid() {
        let rows = [row(&[1.0], 1.0)];
        let f = FiniteSum {
            loss: Loss::Hinge,
            lambda: 1.0,
            rows: &rows,
        };
        let dom = Domain::ball(Point::zeros(1), 2.0).unwrap();
        let sol = f.minimize(&dom, &Point::zeros(1)).unwrap();
        let (mut best_w, mut best) = (0.0, f64::INFINITY);
        for k in 0..=40_000 {
            let w = -2.0 + 1e-4 * k as f64;
            let v = f.value(&Point::new(vec![w]).unwrap());
            if v < best {
                best = v;
                best_w = w;
            }
        }
        assert!((sol.point[0] - best_w).abs() <= 1e-4);
        assert!(sol.value <= best + 1e-10);
        assert!(sol.gap <= 1e-10);
    }

    #[test]
    fn prox_gap_interior_is_gradient_norm() {
        let dom = Domain::ball(Point::zeros(2), 10.0).unwrap();
        let w = Point::new(vec![0.5, 0.5]).unwrap();
        let g = Point::new(vec![0.3, -0.4]).unwrap();
        let gap = prox_gap(&dom, &w, &g, 2.0).unwrap();
        assert!((gap - 0.25 / 4.0).abs() < 1e-15);
    }
}
