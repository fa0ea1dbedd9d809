//! Convex functions on closed intervals together with their one-sided
//! derivative oracles.

pub mod catalog;
mod check;
pub mod estimate;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::interval::Interval;

pub use check::{ConvexityReport, DEFAULT_CONVEXITY_TOL};

/// Which one-sided derivative (or limit) is requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// Source of values (and optionally exact slopes) for a convex function.
///
/// Implementations must be pure: the same input always produces the same
/// output and no observable state changes.
pub trait ConvexOracle: Send + Sync + fmt::Debug {
    fn eval(&self, t: f64) -> f64;

    /// Exact one-sided derivative, or `None` when the oracle only knows values.
    fn one_sided_derivative(&self, _t: f64, _side: Side) -> Option<ExtendedReal> {
        None
    }

    /// Whether `one_sided_derivative` is closed-form (certified) everywhere.
    fn has_closed_form_derivatives(&self) -> bool {
        false
    }

    /// A closed-form antiderivative, continuous on the natural domain.
    fn antiderivative(&self, _t: f64) -> Option<f64> {
        None
    }

    /// Points where the function is known not to be differentiable.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Checks that `domain` lies inside the set where the oracle is defined and
    /// convex.
    fn check_domain(&self, _domain: &Interval) -> Result<()> {
        Ok(())
    }

    fn describe(&self) -> String {
        format!("{self:?}")
    }
}

/// Plain closure with no derivative information; slopes are estimated.
struct BlackBox<F> {
    f: F,
    label: String,
}

impl<F> fmt::Debug for BlackBox<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlackBox({})", self.label)
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> ConvexOracle for BlackBox<F> {
    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `A = f'+(lo)` and `B = f'-(hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EndpointSlopes {
    #[serde(rename = "A")]
    pub a: ExtendedReal,
    #[serde(rename = "B")]
    pub b: ExtendedReal,
}

impl EndpointSlopes {
    /// Both slopes as finite numbers, or `UnboundedSlope`.
    pub fn finite(&self) -> Result<(f64, f64)> {
        match (self.a, self.b) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => Ok((a, b)),
            _ => Err(Error::UnboundedSlope),
        }
    }
}

/// A convex function restricted to a closed interval.
#[derive(Clone)]
pub struct ConvexFunction {
    domain: Interval,
    oracle: Arc<dyn ConvexOracle>,
    certified: bool,
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexFunction")
            .field("domain", &self.domain)
            .field("oracle", &self.oracle.describe())
            .field("certified", &self.certified)
            .finish()
    }
}

impl ConvexFunction {
    pub fn new(domain: Interval, oracle: Arc<dyn ConvexOracle>) -> Result<Self> {
        oracle.check_domain(&domain)?;
        let certified = oracle.has_closed_form_derivatives();
        Ok(ConvexFunction {
            domain,
            oracle,
            certified,
        })
    }

    /// Wraps a bare closure; its slopes are estimated from samples and the
    /// function is flagged as not certified.
    pub fn from_fn<F>(domain: Interval, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ConvexFunction {
            domain,
            oracle: Arc::new(BlackBox {
                f,
                label: label.into(),
            }),
            certified: false,
        }
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn oracle(&self) -> &Arc<dyn ConvexOracle> {
        &self.oracle
    }

    pub fn describe(&self) -> String {
        self.oracle.describe()
    }

    /// Same function on a sub-interval.
    pub fn restrict(&self, sub: Interval) -> Result<Self> {
        if !self.domain.contains_interval(&sub) {
            return Err(Error::Precondition(format!(
                "[{}, {}] is not inside the domain [{}, {}]",
                sub.lo(),
                sub.hi(),
                self.domain.lo(),
                self.domain.hi()
            )));
        }
        Ok(ConvexFunction {
            domain: sub,
            oracle: Arc::clone(&self.oracle),
            certified: self.certified,
        })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.domain.check(t)?;
        Ok(self.oracle.eval(t))
    }

    /// Evaluation without the domain check, for hot loops whose points are
    /// inside the domain by construction.
    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        self.oracle.eval(t)
    }

    pub fn right_derivative(&self, t: f64) -> Result<ExtendedReal> {
        self.domain.check(t)?;
        if t == self.domain.hi() {
            return Err(Error::UndefinedSide { t, side: "right" });
        }
        Ok(self.slope(t, Side::Right))
    }

    pub fn left_derivative(&self, t: f64) -> Result<ExtendedReal> {
        self.domain.check(t)?;
        if t == self.domain.lo() {
            return Err(Error::UndefinedSide { t, side: "left" });
        }
        Ok(self.slope(t, Side::Left))
    }

    pub fn derivative(&self, t: f64, side: Side) -> Result<ExtendedReal> {
        match side {
            Side::Left => self.left_derivative(t),
            Side::Right => self.right_derivative(t),
        }
    }

    fn slope(&self, t: f64, side: Side) -> ExtendedReal {
        if let Some(d) = self.oracle.one_sided_derivative(t, side) {
            return d;
        }
        let oracle = &self.oracle;
        let f = |s: f64| oracle.eval(s);
        estimate::one_sided_slope(&f, &self.domain, t, side).value
    }

    pub fn endpoint_slopes(&self) -> EndpointSlopes {
        EndpointSlopes {
            a: self.slope(self.domain.lo(), Side::Right),
            b: self.slope(self.domain.hi(), Side::Left),
        }
    }

    /// Closed-form antiderivative if the oracle has one.
    pub fn antiderivative(&self, t: f64) -> Option<f64> {
        self.oracle.antiderivative(t)
    }

    /// Known kinks strictly inside the domain, sorted.
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .oracle
            .breakpoints()
            .into_iter()
            .filter(|&c| self.domain.contains_interior(c))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Falsification test for convexity on sampled point pairs.
    pub fn check_convexity(&self, n_samples: usize, tol: f64) -> Result<ConvexityReport> {
        check::check_convexity(self, n_samples, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::catalog;
    use super::*;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let abs = catalog::abs_shift(0.5).on(unit()).unwrap();
        assert_eq!(abs.eval(0.5).unwrap(), 0.0);
        let sq = catalog::power(2.0).unwrap().on(unit()).unwrap();
        assert_eq!(sq.eval(0.5).unwrap(), 0.25);
        let e = std::f64::consts::E;
        let nl = catalog::neg_log().on(Interval::new(1.0, e).unwrap()).unwrap();
        assert!((nl.eval(e).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(sq.eval(1.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn right_derivative_examples() {
        let f0 = catalog::abs_shift(0.5).on(unit()).unwrap();
        assert_eq!(f0.right_derivative(0.5).unwrap(), ExtendedReal::Finite(1.0));
        let aff = catalog::affine(3.0, 1.0).on(unit()).unwrap();
        for t in [0.0, 0.3, 0.99] {
            assert_eq!(aff.right_derivative(t).unwrap(), ExtendedReal::Finite(3.0));
        }
        let ns = catalog::neg_sqrt().on(unit()).unwrap();
        assert_eq!(ns.right_derivative(0.0).unwrap(), ExtendedReal::NegInf);
        assert!(matches!(
            ns.right_derivative(1.0),
            Err(Error::UndefinedSide { .. })
        ));
    }

    #[test]
    fn left_derivative_examples() {
        let f0 = catalog::abs_shift(0.5).on(unit()).unwrap();
        assert_eq!(f0.left_derivative(0.5).unwrap(), ExtendedReal::Finite(-1.0));
        let sq = catalog::power(2.0).unwrap().on(unit()).unwrap();
        assert_eq!(sq.left_derivative(1.0).unwrap(), ExtendedReal::Finite(2.0));
        let hinge = catalog::hinge(0.5).on(unit()).unwrap();
        assert_eq!(hinge.left_derivative(0.5).unwrap(), ExtendedReal::Finite(0.0));
        assert!(matches!(
            hinge.left_derivative(0.0),
            Err(Error::UndefinedSide { .. })
        ));
        // Same value from difference quotients of the bare closure.
        let bb = ConvexFunction::from_fn(unit(), "max(0,t-1/2)", |t| (t - 0.5f64).max(0.0));
        assert!(!bb.is_certified());
        assert!(bb.left_derivative(0.5).unwrap().to_f64().abs() < 1e-9);
    }

    #[test]
    fn endpoint_slope_examples() {
        let f0 = catalog::abs_shift(0.5).on(unit()).unwrap();
        let s = f0.endpoint_slopes();
        assert_eq!((s.a, s.b), (ExtendedReal::Finite(-1.0), ExtendedReal::Finite(1.0)));
        let sq = catalog::power(2.0).unwrap().on(unit()).unwrap();
        let s = sq.endpoint_slopes();
        assert_eq!((s.a, s.b), (ExtendedReal::Finite(0.0), ExtendedReal::Finite(2.0)));
        let ns = catalog::neg_sqrt().on(unit()).unwrap();
        let s = ns.endpoint_slopes();
        assert_eq!((s.a, s.b), (ExtendedReal::NegInf, ExtendedReal::Finite(-0.5)));
        assert!(s.a <= s.b);
    }

    #[test]
    fn restrict_keeps_oracle() {
        let sq = catalog::power(2.0).unwrap().on(unit()).unwrap();
        let sub = sq.restrict(Interval::new(0.25, 0.5).unwrap()).unwrap();
        assert_eq!(sub.endpoint_slopes().b, ExtendedReal::Finite(1.0));
        assert!(sq.restrict(Interval::new(0.5, 2.0).unwrap()).is_err());
    }
}
