//! Closed-form convergence rates, high-probability tail bounds, domain
//! defaulting, and the lower/upper sandwich used to check solvers.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::oracles::Problem;
use crate::proxmodel::ProxTerm;
use crate::vecdom::{Domain, Point};

/// Constants every bound is stated in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct BoundParams {
    pub lambda: f64,
    pub G: f64,
    pub Gtilde: f64,
    pub sigma2: f64,
    pub D: f64,
}

#[allow(non_snake_case)]
impl BoundParams {
    pub fn new(lambda: f64, G: f64, Gtilde: f64, sigma2: f64, D: f64) -> Result<Self> {
        let p = BoundParams {
            lambda,
            G,
            Gtilde,
            sigma2,
            D,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        let nonneg = |name, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be nonnegative, got {v}")))
            }
        };
        pos("lambda", self.lambda)?;
        pos("G", self.G)?;
        pos("D", self.D)?;
        nonneg("Gtilde", self.Gtilde)?;
        nonneg("sigma2", self.sigma2)?;
        if self.Gtilde > 2.0 * self.G {
            return Err(invalid("Gtilde", "must not exceed 2 G"));
        }
        if self.sigma2 > self.G * self.G {
            return Err(invalid("sigma2", "must not exceed G^2"));
        }
        Ok(())
    }

    /// Certified constants of a problem; `G` may be overridden.
    pub fn for_problem(problem: &Problem, grad_bound_override: Option<f64>) -> Result<Self> {
        let g = grad_bound_override.unwrap_or(problem.grad_bound());
        let mut p = BoundParams {
            lambda: problem.lambda(),
            G: g,
            Gtilde: problem.noise_bound(),
            sigma2: problem.noise_variance(),
            D: problem.domain().diameter()?,
        };
        // an undersized override is allowed for stress runs; keep the
        // noise constants consistent with it
        if grad_bound_override.is_some() {
            p.Gtilde = p.Gtilde.min(2.0 * g);
            p.sigma2 = p.sigma2.min(g * g);
        }
        p.validate()?;
        Ok(p)
    }
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n >= min {
        Ok(())
    } else {
        Err(invalid("n", format!("must be at least {min}, got {n}")))
    }
}

/// `2 G^2 / (lambda (n + 3))`.
pub fn algo1_rate(n: usize, p: &BoundParams) -> Result<f64> {
    check_n(n, 1)?;
    Ok(2.0 * p.G * p.G / (p.lambda * (n as f64 + 3.0)))
}

/// `8 G^2 / (lambda n)`.
pub fn epoch_gd_rate(n: usize, p: &BoundParams) -> Result<f64> {
    check_n(n, 1)?;
    Ok(8.0 * p.G * p.G / (p.lambda * n as f64))
}

/// `ln(n) G^2 / (2 lambda n)`, `n >= 2`.
pub fn sgd_rate(n: usize, p: &BoundParams) -> Result<f64> {
    check_n(n, 2)?;
    let n = n as f64;
    Ok(n.ln() * p.G * p.G / (2.0 * p.lambda * n))
}

/// `8 G^2 / (lambda [n + 2 - log2(lambda f(x1) / (4 G^2))])`.
pub fn bundle_rate(n: usize, p: &BoundParams, f_x1: f64) -> Result<f64> {
    check_n(n, 1)?;
    let ratio = p.lambda * f_x1 / (4.0 * p.G * p.G);
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(invalid("f_x1", "lambda f(x1) / (4 G^2) must be positive"));
    }
    let denom = n as f64 + 2.0 - ratio.log2();
    if denom <= 0.0 {
        return Err(invalid("f_x1", "bundle rate denominator is not positive"));
    }
    Ok(8.0 * p.G * p.G / (p.lambda * denom))
}

/// `sigma^2 / (2 lambda n)`.
pub fn erm_rate(n: usize, p: &BoundParams) -> Result<f64> {
    check_n(n, 1)?;
    Ok(p.sigma2 / (2.0 * p.lambda * n as f64))
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(invalid("eta", format!("must lie in (0, 1), got {eta}")))
    }
}

/// Threshold with `Pr(S >= threshold) <= eta` from Markov's inequality.
pub fn hp_markov(n: usize, p: &BoundParams, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(algo1_rate(n, p)? / eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailKind {
    Chernoff,
    Azuma,
    Bennett,
}

impl TailKind {
    pub const ALL: [TailKind; 3] = [TailKind::Chernoff, TailKind::Azuma, TailKind::Bennett];

    pub fn name(self) -> &'static str {
        match self {
            TailKind::Chernoff => "chernoff",
            TailKind::Azuma => "azuma",
            TailKind::Bennett => "bennett",
        }
    }

    fn check(self, p: &BoundParams) -> Result<()> {
        let need_sigma = matches!(self, TailKind::Chernoff | TailKind::Bennett);
        let need_gtilde = matches!(self, TailKind::Azuma | TailKind::Bennett);
        if need_sigma && p.sigma2 <= 0.0 {
            return Err(invalid(
                "sigma2",
                format!("{} bound needs sigma2 > 0", self.name()),
            ));
        }
        if need_gtilde && p.Gtilde <= 0.0 {
            return Err(invalid(
                "Gtilde",
                format!("{} bound needs Gtilde > 0", self.name()),
            ));
        }
        Ok(())
    }
}

/// Bound on `Pr(S(y_n) >= t + 2 G^2 / (lambda (n + 3)))`.
pub fn hp_tail(kind: TailKind, t: f64, n: usize, p: &BoundParams) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(
            "t",
            format!("must be finite and nonnegative, got {t}"),
        ));
    }
    check_n(n, 1)?;
    kind.check(p)?;
    let m = n as f64 + 2.0;
    let d = p.D;
    Ok(match kind {
        TailKind::Chernoff => (-t * t * m / (16.0 * d * d * p.sigma2)).exp(),
        TailKind::Azuma => {
            (0.5 * (-t * t * m / (8.0 * p.Gtilde * p.Gtilde * d * d)).exp()).min(1.0)
        }
        TailKind::Bennett => {
            let rate = t * m / (4.0 * p.Gtilde * d);
            (-rate * (t * p.Gtilde / (2.0 * d * p.sigma2)).ln_1p()).exp()
        }
    })
}

const BISECTION_STEPS: usize = 200;

/// Smallest `t` with `hp_tail(kind, t, n, p) <= eta`, to `1e-10` relative.
/// Returns `0` when `eta` is already at or above the bound at `t = 0`.
pub fn hp_invert(kind: TailKind, eta: f64, n: usize, p: &BoundParams) -> Result<f64> {
    check_eta(eta)?;
    let tail = |t: f64| hp_tail(kind, t, n, p);
    if tail(0.0)? <= eta {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = p.D.max(f64::MIN_POSITIVE);
    let mut doublings = 0;
    while tail(hi)? > eta {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::NoConvergence(doublings));
        }
    }
    for _ in 0..BISECTION_STEPS {
        if hi - lo <= 1e-10 * hi {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if tail(mid)? <= eta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi - lo <= 1e-10 * hi {
        Ok(hi)
    } else {
        Err(Error::NoConvergence(BISECTION_STEPS))
    }
}

/// Unbounded domains default to `{||x - x1|| <= G / lambda}`, of
/// diameter `2 G / lambda`.
pub fn resolve_domain(domain: &Domain, grad_bound: f64, lambda: f64, x1: &Point) -> Result<Domain> {
    match domain {
        Domain::Unbounded => Domain::ball(x1.clone(), grad_bound / lambda),
        other => Ok(other.clone()),
    }
}

/// `max_i p_i(x)`; a lower bound on `f(x)` when the terms come from exact
/// oracles.
pub fn cutting_plane_lower(terms: &[ProxTerm], x: &Point) -> Result<f64> {
    let first = terms
        .first()
        .ok_or_else(|| invalid("terms", "need at least one prox term"))?;
    for t in terms {
        t.anchor.check_dim(x.dim())?;
        if t.lambda != first.lambda {
            return Err(invalid("lambda", "prox terms disagree on lambda"));
        }
    }
    Ok(terms
        .iter()
        .map(|t| t.eval(x))
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JensenBound {
    pub y: Point,
    pub bound: f64,
}

/// `y = sum a_i x_i`, `bound = sum a_i f(x_i) - lambda/2 sum a_i ||x_i - y||^2`.
pub fn jensen_upper(
    anchors: &[Point],
    fvals: &[f64],
    weights: &[f64],
    lambda: f64,
) -> Result<JensenBound> {
    if anchors.is_empty() || anchors.len() != fvals.len() || anchors.len() != weights.len() {
        return Err(invalid(
            "anchors",
            "lists must be nonempty and of equal length",
        ));
    }
    if weights.iter().any(|w| w.is_nan() || *w < 0.0) {
        return Err(invalid("weights", "must be nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(invalid("weights", format!("must sum to 1, got {total}")));
    }
    let dim = anchors[0].dim();
    let mut y = Point::zeros(dim);
    for (a, w) in anchors.iter().zip(weights) {
        a.check_dim(dim)?;
        y.axpy_assign(*w, a);
    }
    let mut bound = 0.0;
    for ((a, f), w) in anchors.iter().zip(fvals).zip(weights) {
        bound += w * (f - 0.5 * lambda * a.sub(&y).norm_sq());
    }
    Ok(JensenBound { y, bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g: f64, lambda: f64) -> BoundParams {
        BoundParams::new(lambda, g, 0.5 * g, 0.25 * g * g, 2.0 * g / lambda).unwrap()
    }

    #[test]
    fn algo1_rate_examples() {
        let p = params(1.0, 1.0);
        assert_eq!(algo1_rate(1, &p).unwrap(), 0.5);
        assert!((algo1_rate(997, &p).unwrap() - 0.002).abs() < 1e-18);
        let r = algo1_rate(1_000_000, &p).unwrap() / epoch_gd_rate(1_000_000, &p).unwrap();
        assert!((r - 0.25).abs() < 1e-3);
    }

    #[test]
    fn baseline_rate_examples() {
        let p = params(1.0, 1.0);
        assert_eq!(epoch_gd_rate(1000, &p).unwrap(), 0.008);
        assert!((sgd_rate(100, &p).unwrap() - 0.023_025_850_929_940_46).abs() < 1e-15);
        let q = BoundParams::new(1.0, 1.0, 0.5, 0.1, 2.0).unwrap();
        assert!((erm_rate(1000, &q).unwrap() - 5e-5).abs() < 1e-18);
        assert!(sgd_rate(1, &p).is_err());
        assert!(bundle_rate(10, &p, 0.0).is_err());
        // lambda f / 4G^2 = 1/8 -> denominator n + 5
        assert!((bundle_rate(5, &p, 0.5).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn markov_examples() {
        let p = params(1.0, 1.0);
        assert!((hp_markov(997, &p, 0.1).unwrap() - 0.02).abs() < 1e-15);
        assert_eq!(
            hp_markov(50, &p, 0.5).unwrap(),
            2.0 * algo1_rate(50, &p).unwrap()
        );
        assert!(hp_markov(10, &p, 1.0).is_err());
        assert!(hp_markov(10, &p, 0.0).is_err());
    }

    #[test]
    fn tails_at_zero() {
        let p = params(1.0, 1.0);
        assert_eq!(hp_tail(TailKind::Azuma, 0.0, 10, &p).unwrap(), 0.5);
        assert_eq!(hp_tail(TailKind::Chernoff, 0.0, 10, &p).unwrap(), 1.0);
        assert_eq!(hp_tail(TailKind::Bennett, 0.0, 10, &p).unwrap(), 1.0);
    }

    #[test]
    fn chernoff_example() {
        let p = BoundParams::new(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        let v = hp_tail(TailKind::Chernoff, 1.0, 2, &p).unwrap();
        assert!((v - (-0.0625f64).exp()).abs() < 1e-15);
        assert!((v - 0.93941).abs() < 1e-5);
    }

    #[test]
    fn azuma_inverse_closed_form() {
        // Gtilde D = 1, n = 2: 1/2 exp(-t^2/2) = 0.05
        let p = BoundParams::new(1.0, 1.0, 0.5, 0.25, 2.0).unwrap();
        let t = hp_invert(TailKind::Azuma, 0.05, 2, &p).unwrap();
        let exact = (2.0 * 10f64.ln()).sqrt();
        assert!((t - exact).abs() <= 1e-9 * exact);
        assert!((t - 2.14597).abs() < 1e-5);
        assert_eq!(hp_invert(TailKind::Azuma, 0.5, 2, &p).unwrap(), 0.0);
        assert_eq!(hp_invert(TailKind::Azuma, 0.7, 2, &p).unwrap(), 0.0);
    }

    #[test]
    fn invert_brackets_every_kind() {
        let p = params(3.0, 1.0);
        for kind in TailKind::ALL {
            for &eta in &[0.4, 0.1, 1e-3, 1e-8] {
                for &n in &[1usize, 10, 500, 100_000] {
                    let t = hp_invert(kind, eta, n, &p).unwrap();
                    if t == 0.0 {
                        continue;
                    }
                    assert!(hp_tail(kind, t, n, &p).unwrap() <= eta);
                    assert!(eta <= hp_tail(kind, t * (1.0 - 1e-6), n, &p).unwrap() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn tail_parameter_errors() {
        let p = BoundParams::new(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(hp_tail(TailKind::Chernoff, 1.0, 5, &p).is_err());
        assert!(hp_tail(TailKind::Azuma, 1.0, 5, &p).is_err());
        assert!(hp_tail(TailKind::Bennett, 1.0, 5, &p).is_err());
        let q = params(1.0, 1.0);
        assert!(hp_tail(TailKind::Azuma, -1.0, 5, &q).is_err());
    }

    #[test]
    fn params_invariants() {
        assert!(BoundParams::new(1.0, 1.0, 2.5, 0.1, 1.0).is_err());
        assert!(BoundParams::new(1.0, 1.0, 1.5, 0.1, 1.0).is_ok());
        assert!(BoundParams::new(1.0, 1.0, 0.5, 1.5, 1.0).is_err());
        assert!(BoundParams::new(0.0, 1.0, 0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn monotone_in_n() {
        let p = params(2.0, 0.5);
        let mut prev = [f64::INFINITY; 4];
        for n in (1..2000).chain((2000..1_000_000).step_by(997)) {
            let cur = [
                algo1_rate(n, &p).unwrap(),
                epoch_gd_rate(n, &p).unwrap(),
                bundle_rate(n, &p, 3.0).unwrap(),
                erm_rate(n, &p).unwrap(),
            ];
            for (c, q) in cur.iter().zip(prev) {
                assert!(*c < q);
            }
            prev = cur;
        }
        // ln(n)/n peaks at e, so the SGD rate decreases only from n = 3
        let mut last = f64::INFINITY;
        for n in 3..5000 {
            let r = sgd_rate(n, &p).unwrap();
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn tails_nonincreasing_in_t() {
        let p = params(3.0, 1.0);
        for kind in TailKind::ALL {
            let mut prev = f64::INFINITY;
            for k in 0..500 {
                let v = hp_tail(kind, 0.01 * k as f64, 100, &p).unwrap();
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn azuma_supersedes_markov_at_small_eta() {
        // canonical constants: G = 3, Gtilde = 1, sigma^2 = 1/3, D = 2
        let p = BoundParams::new(1.0, 3.0, 1.0, 1.0 / 3.0, 2.0).unwrap();
        let n = 1000;
        let hp = hp_invert(TailKind::Azuma, 1e-3, n, &p).unwrap() + algo1_rate(n, &p).unwrap();
        assert!(hp <= hp_markov(n, &p, 1e-3).unwrap());
    }

    #[test]
    fn resolve_domain_cases() {
        let x1 = Point::zeros(3);
        let ball = Domain::ball(Point::zeros(3), 1.5).unwrap();
        assert_eq!(resolve_domain(&ball, 1.0, 1.0, &x1).unwrap(), ball);
        let r = resolve_domain(&Domain::Unbounded, 1.0, 0.5, &x1).unwrap();
        assert_eq!(r, Domain::ball(Point::zeros(3), 2.0).unwrap());
        assert_eq!(r.diameter().unwrap(), 4.0);
        let unit = resolve_domain(&Domain::Unbounded, 0.7, 0.7, &x1).unwrap();
        assert_eq!(unit, Domain::ball(Point::zeros(3), 1.0).unwrap());
    }

    #[test]
    fn cutting_plane_basics() {
        let t = ProxTerm {
            anchor: Point::new(vec![0.5, 0.5]).unwrap(),
            value: 1.7,
            grad: Point::new(vec![1.0, -2.0]).unwrap(),
            lambda: 1.0,
        };
        assert_eq!(
            cutting_plane_lower(std::slice::from_ref(&t), &t.anchor).unwrap(),
            1.7
        );
        let x = Point::new(vec![-0.3, 0.9]).unwrap();
        assert_eq!(
            cutting_plane_lower(&[t.clone(), t.clone()], &x).unwrap(),
            cutting_plane_lower(std::slice::from_ref(&t), &x).unwrap()
        );
        assert!(cutting_plane_lower(&[], &x).is_err());
    }

    #[test]
    fn jensen_cases() {
        let x = Point::new(vec![0.2, -1.0]).unwrap();
        let one = jensen_upper(std::slice::from_ref(&x), &[3.0], &[1.0], 2.0).unwrap();
        assert_eq!(one.y, x);
        assert_eq!(one.bound, 3.0);
        // f(x) = x^2/2 at +-1, equal weights: tight at 0
        let pts = [
            Point::new(vec![1.0]).unwrap(),
            Point::new(vec![-1.0]).unwrap(),
        ];
        let j = jensen_upper(&pts, &[0.5, 0.5], &[0.5, 0.5], 1.0).unwrap();
        assert_eq!(j.y, Point::new(vec![0.0]).unwrap());
        assert_eq!(j.bound, 0.0);
        assert!(jensen_upper(&pts, &[0.5, 0.5], &[0.6, 0.6], 1.0).is_err());
        assert!(jensen_upper(&pts, &[0.5, 0.5], &[1.5, -0.5], 1.0).is_err());
        assert!(jensen_upper(&pts, &[0.5], &[1.0], 1.0).is_err());
    }
}
