//! Dense real vectors and the convex domains the solvers work over.
//!
//! Projection onto a [`Domain::Ball`] is constructed so that the returned
//! point satisfies `||q - center|| <= radius` in floating point, which makes
//! projection exactly idempotent.

use serde::{Deserialize, Serialize};
use std::ops::Index;

use crate::error::{Error, Result};

/// Relative slack used by [`Domain::contains`]. Convex combinations of
/// feasible points (averaged iterates) can land one ulp outside a ball.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// A point in `R^d`, `d >= 1`, with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyPoint);
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Point(vec![0.0; dim])
    }

    /// Unit vector along `axis`, scaled by `scale`.
    pub fn axis(dim: usize, axis: usize, scale: f64) -> Self {
        let mut p = Self::zeros(dim);
        p.0[axis] = scale;
        p
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Point(coords)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            })
        }
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// In-place `self += s * other`.
    pub fn axpy_assign(&mut self, s: f64, other: &Point) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += s * b;
        }
    }

    /// `(1 - step) * self + step * other`, coordinatewise.
    pub fn mix(&self, step: f64, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        let keep = 1.0 - step;
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| keep * a + step * b)
                .collect(),
        )
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

/// A closed convex set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Ball {
        center: Point,
        radius: f64,
    },
    Box {
        lower: Point,
        upper: Point,
    },
    /// User-facing only; see [`crate::bounds::resolve_domain`].
    Unbounded,
}

impl Domain {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        let d = Domain::Ball { center, radius };
        d.validate()?;
        Ok(d)
    }

    pub fn boxed(lower: Point, upper: Point) -> Result<Self> {
        let d = Domain::Box { lower, upper };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Ball { center, radius } => {
                if !center.is_finite() {
                    return Err(Error::InvalidDomain("non-finite ball center".into()));
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidDomain(format!(
                        "ball radius must be positive, got {radius}"
                    )));
                }
                Ok(())
            }
            Domain::Box { lower, upper } => {
                upper.check_dim(lower.dim())?;
                if !lower.is_finite() || !upper.is_finite() {
                    return Err(Error::InvalidDomain("non-finite box bound".into()));
                }
                for (i, (l, u)) in lower.as_slice().iter().zip(upper.as_slice()).enumerate() {
                    if l > u {
                        return Err(Error::InvalidDomain(format!(
                            "box lower > upper at coordinate {i}"
                        )));
                    }
                }
                Ok(())
            }
            Domain::Unbounded => Ok(()),
        }
    }

    /// `None` for [`Domain::Unbounded`].
    pub fn dim(&self) -> Option<usize> {
        match self {
            Domain::Ball { center, .. } => Some(center.dim()),
            Domain::Box { lower, .. } => Some(lower.dim()),
            Domain::Unbounded => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Domain::Unbounded)
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        match self.dim() {
            Some(d) => p.check_dim(d),
            None => Err(Error::UnresolvedDomain),
        }
    }

    /// Euclidean projection. Points inside are returned unchanged.
    pub fn project(&self, p: &Point) -> Result<Point> {
        self.check_point(p)?;
        Ok(match self {
            Domain::Ball { center, radius } => {
                let diff = p.sub(center);
                let dist = diff.norm();
                if dist <= *radius {
                    return Ok(p.clone());
                }
                // shrink until the rounded result is inside
                let mut scale = radius / dist;
                loop {
                    let q = center.axpy(scale, &diff);
                    if q.sub(center).norm() <= *radius {
                        break q;
                    }
                    scale *= 1.0 - f64::EPSILON;
                }
            }
            Domain::Box { lower, upper } => Point::from_vec_unchecked(
                p.as_slice()
                    .iter()
                    .zip(lower.as_slice().iter().zip(upper.as_slice()))
                    .map(|(x, (l, u))| x.clamp(*l, *u))
                    .collect(),
            ),
            Domain::Unbounded => unreachable!(),
        })
    }

    /// `max_{a, b in domain} ||a - b||`.
    pub fn diameter(&self) -> Result<f64> {
        match self {
            Domain::Ball { radius, .. } => Ok(2.0 * radius),
            Domain::Box { lower, upper } => Ok(upper.sub(lower).norm()),
            Domain::Unbounded => Err(Error::UnresolvedDomain),
        }
    }

    /// `max_{w in domain} ||w - q||`.
    pub fn max_distance_from(&self, q: &Point) -> Result<f64> {
        self.check_point(q)?;
        match self {
            Domain::Ball { center, radius } => Ok(center.distance(q) + radius),
            Domain::Box { lower, upper } => {
                let s: f64 = lower
                    .as_slice()
                    .iter()
                    .zip(upper.as_slice())
                    .zip(q.as_slice())
                    .map(|((l, u), x)| {
                        let a = (l - x).abs();
                        let b = (u - x).abs();
                        a.max(b).powi(2)
                    })
                    .sum();
                Ok(s.sqrt())
            }
            Domain::Unbounded => unreachable!(),
        }
    }

    /// Strict membership test, no slack.
    pub fn contains_exact(&self, p: &Point) -> bool {
        if self.check_point(p).is_err() {
            return false;
        }
        match self {
            Domain::Ball { center, radius } => p.sub(center).norm() <= *radius,
            Domain::Box { lower, upper } => p
                .as_slice()
                .iter()
                .zip(lower.as_slice().iter().zip(upper.as_slice()))
                .all(|(x, (l, u))| l <= x && x <= u),
            Domain::Unbounded => unreachable!(),
        }
    }

    /// Membership up to [`FEASIBILITY_TOL`] relative slack.
    pub fn contains(&self, p: &Point) -> bool {
        if self.check_point(p).is_err() {
            return false;
        }
        match self {
            Domain::Ball { center, radius } => {
                p.sub(center).norm() <= radius * (1.0 + FEASIBILITY_TOL)
            }
            Domain::Box { lower, upper } => p
                .as_slice()
                .iter()
                .zip(lower.as_slice().iter().zip(upper.as_slice()))
                .all(|(x, (l, u))| {
                    *x >= l - FEASIBILITY_TOL * l.abs().max(1.0)
                        && *x <= u + FEASIBILITY_TOL * u.abs().max(1.0)
                }),
            Domain::Unbounded => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn unit_ball(d: usize) -> Domain {
        Domain::ball(Point::zeros(d), 1.0).unwrap()
    }

    #[test]
    fn point_rejects_nan_and_empty() {
        assert_eq!(Point::new(vec![]), Err(Error::EmptyPoint));
        assert_eq!(Point::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(1)));
        assert_eq!(Point::new(vec![f64::INFINITY]), Err(Error::NonFinite(0)));
    }

    #[test]
    fn ball_projection_examples() {
        let b = unit_ball(2);
        assert_eq!(b.project(&pt(&[0.5, 0.0])).unwrap(), pt(&[0.5, 0.0]));
        assert_eq!(b.project(&pt(&[2.0, 0.0])).unwrap(), pt(&[1.0, 0.0]));
        // exactly on the boundary is left alone
        assert_eq!(b.project(&pt(&[0.6, 0.8])).unwrap(), pt(&[0.6, 0.8]));
    }

    #[test]
    fn box_projection_clamps() {
        let b = Domain::boxed(pt(&[0.0, 0.0]), pt(&[1.0, 1.0])).unwrap();
        assert_eq!(b.project(&pt(&[2.0, -1.0])).unwrap(), pt(&[1.0, 0.0]));
    }

    #[test]
    fn diameters() {
        assert_eq!(unit_ball(3).diameter().unwrap(), 2.0);
        let b = Domain::boxed(pt(&[0.0, 0.0]), pt(&[3.0, 4.0])).unwrap();
        assert_eq!(b.diameter().unwrap(), 5.0);
        assert_eq!(Domain::Unbounded.diameter(), Err(Error::UnresolvedDomain));
    }

    #[test]
    fn projection_errors() {
        assert!(matches!(
            unit_ball(2).project(&pt(&[1.0, 2.0, 3.0])),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
        assert_eq!(
            Domain::Unbounded.project(&pt(&[1.0])),
            Err(Error::UnresolvedDomain)
        );
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(Domain::ball(Point::zeros(2), 0.0).is_err());
        assert!(Domain::ball(Point::zeros(2), -1.0).is_err());
        assert!(Domain::boxed(pt(&[1.0, 0.0]), pt(&[0.0, 0.0])).is_err());
        assert!(Domain::boxed(pt(&[0.0]), pt(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn max_distance_box_uses_far_corner() {
        let b = Domain::boxed(pt(&[0.0, 0.0]), pt(&[3.0, 4.0])).unwrap();
        assert!((b.max_distance_from(&pt(&[0.0, 0.0])).unwrap() - 5.0).abs() < 1e-15);
        let c = b.max_distance_from(&pt(&[1.0, 1.0])).unwrap();
        assert!((c - (4.0f64 + 9.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn serde_shape() {
        let d: Domain =
            serde_json::from_str(r#"{"type":"ball","center":[0.0,1.0],"radius":2.0}"#).unwrap();
        assert_eq!(d, Domain::ball(pt(&[0.0, 1.0]), 2.0).unwrap());
        let u: Domain = serde_json::from_str(r#"{"type":"unbounded"}"#).unwrap();
        assert_eq!(u, Domain::Unbounded);
        assert!(serde_json::from_str::<Point>("[1.0, null]").is_err());
    }

    fn coords(d: usize) -> impl Strategy<Value = Point> {
        proptest::collection::vec(-5.0f64..5.0, d).prop_map(|v| Point::new(v).unwrap())
    }

    fn domains() -> impl Strategy<Value = Domain> {
        prop_oneof![
            (coords(3), 0.1f64..3.0).prop_map(|(c, r)| Domain::ball(c, r).unwrap()),
            (coords(3), proptest::collection::vec(0.0f64..3.0, 3)).prop_map(|(l, w)| {
                let u =
                    Point::new(l.as_slice().iter().zip(&w).map(|(a, b)| a + b).collect()).unwrap();
                Domain::boxed(l, u).unwrap()
            }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn projection_is_idempotent_and_feasible(d in domains(), p in coords(3)) {
            let q = d.project(&p).unwrap();
            prop_assert!(d.contains_exact(&q));
            prop_assert_eq!(d.project(&q).unwrap(), q);
        }

        #[test]
        fn projection_is_nearest(d in domains(), p in coords(3), z in coords(3)) {
            // any feasible q: project an arbitrary point to get one
            let q = d.project(&z).unwrap();
            let pp = d.project(&p).unwrap();
            prop_assert!(pp.distance(&p) <= q.distance(&p) + 1e-12);
        }

        #[test]
        fn projection_is_nonexpansive(d in domains(), a in coords(3), b in coords(3)) {
            let pa = d.project(&a).unwrap();
            let pb = d.project(&b).unwrap();
            prop_assert!(pa.distance(&pb) <= a.distance(&b) + 1e-12);
        }
    }
}
