//! Built-in convex functions with closed-form values, one-sided slopes and
//! antiderivatives.
//!
//! A [`CatalogFunction`] is a nonnegative combination of basic shapes plus an
//! affine part, which keeps it convex by construction. Divergence kernels such
//! as `(t-1)^2` or `-ln t + t - 1` are built the same way.

use std::fmt;
use std::sync::Arc;

use crate::convex::{ConvexFunction, ConvexOracle, Side};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::interval::Interval;

/// Basic convex shapes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// `t^p` for `p <= 0` or `p >= 1`.
    Power(f64),
    /// `-ln t`.
    NegLog,
    /// `t ln t`, extended by 0 at `t = 0`.
    XLogX,
    Exp,
    /// `|t - c|`.
    AbsShift(f64),
    /// `max(0, t - c)`.
    Hinge(f64),
    /// `-sqrt(t)`.
    NegSqrt,
}

fn is_int(p: f64) -> bool {
    p.fract() == 0.0 && p.abs() < f64::from(i32::MAX)
}

fn pow(t: f64, p: f64) -> f64 {
    if is_int(p) {
        t.powi(p as i32)
    } else {
        t.powf(p)
    }
}

/// Lower end of the natural domain and whether that end is included.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Lower {
    Unbounded,
    Closed(f64),
    Open(f64),
}

impl Shape {
    fn lower(&self) -> Lower {
        match *self {
            Shape::Power(p) if p == 0.0 || p == 1.0 => Lower::Unbounded,
            Shape::Power(p) if p > 0.0 && is_int(p) && (p as i64) % 2 == 0 => Lower::Unbounded,
            Shape::Power(p) if p > 0.0 => Lower::Closed(0.0),
            Shape::Power(_) | Shape::NegLog => Lower::Open(0.0),
            Shape::XLogX | Shape::NegSqrt => Lower::Closed(0.0),
            Shape::Exp | Shape::AbsShift(_) | Shape::Hinge(_) => Lower::Unbounded,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            Shape::Power(p) => pow(t, p),
            Shape::NegLog => -t.ln(),
            Shape::XLogX => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t.ln()
                }
            }
            Shape::Exp => t.exp(),
            Shape::AbsShift(c) => (t - c).abs(),
            Shape::Hinge(c) => (t - c).max(0.0),
            Shape::NegSqrt => -t.sqrt(),
        }
    }

    fn slope(&self, t: f64, side: Side) -> ExtendedReal {
        let v = match *self {
            Shape::Power(0.0) => 0.0,
            Shape::Power(p) => p * pow(t, p - 1.0),
            Shape::NegLog => -1.0 / t,
            Shape::XLogX => t.ln() + 1.0,
            Shape::Exp => t.exp(),
            Shape::AbsShift(c) => {
                if t > c || (t == c && side == Side::Right) {
                    1.0
                } else {
                    -1.0
                }
            }
            Shape::Hinge(c) => {
                if t > c || (t == c && side == Side::Right) {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::NegSqrt => -0.5 / t.sqrt(),
        };
        ExtendedReal::from_f64(v).unwrap_or(ExtendedReal::ZERO)
    }

    fn antiderivative(&self, t: f64) -> f64 {
        match *self {
            Shape::Power(-1.0) => t.ln(),
            Shape::Power(p) => pow(t, p + 1.0) / (p + 1.0),
            Shape::NegLog => {
                if t == 0.0 {
                    0.0
                } else {
                    t - t * t.ln()
                }
            }
            Shape::XLogX => {
                if t == 0.0 {
                    0.0
                } else {
                    0.5 * t * t * t.ln() - 0.25 * t * t
                }
            }
            Shape::Exp => t.exp(),
            Shape::AbsShift(c) => 0.5 * (t - c) * (t - c).abs(),
            Shape::Hinge(c) => {
                let u = (t - c).max(0.0);
                0.5 * u * u
            }
            Shape::NegSqrt => -2.0 / 3.0 * t * t.sqrt(),
        }
    }

    fn breakpoint(&self) -> Option<f64> {
        match *self {
            Shape::AbsShift(c) | Shape::Hinge(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Shape::Power(p) => write!(f, "t^{}", fmt_num(p)),
            Shape::NegLog => f.write_str("-ln(t)"),
            Shape::XLogX => f.write_str("t*ln(t)"),
            Shape::Exp => f.write_str("exp(t)"),
            Shape::AbsShift(c) => write!(f, "abs(t - {})", fmt_num(c)),
            Shape::Hinge(c) => write!(f, "max(0, t - {})", fmt_num(c)),
            Shape::NegSqrt => f.write_str("-sqrt(t)"),
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x < 0.0 {
        format!("({x})")
    } else {
        format!("{x}")
    }
}

/// `sum_i w_i * shape_i(t) + slope * t + intercept` with every `w_i > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogFunction {
    terms: Vec<(f64, Shape)>,
    slope: f64,
    intercept: f64,
}

fn single(shape: Shape) -> CatalogFunction {
    CatalogFunction {
        terms: vec![(1.0, shape)],
        slope: 0.0,
        intercept: 0.0,
    }
}

/// `t^p`; exponents in `(0, 1)` give concave functions and are rejected.
pub fn power(p: f64) -> Result<CatalogFunction> {
    if !p.is_finite() || (p > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!(
            "t^{p} is not convex (need p <= 0 or p >= 1)"
        )));
    }
    Ok(single(Shape::Power(p)))
}

pub fn neg_log() -> CatalogFunction {
    single(Shape::NegLog)
}

pub fn x_log_x() -> CatalogFunction {
    single(Shape::XLogX)
}

pub fn exp() -> CatalogFunction {
    single(Shape::Exp)
}

pub fn abs_shift(c: f64) -> CatalogFunction {
    single(Shape::AbsShift(c))
}

pub fn hinge(c: f64) -> CatalogFunction {
    single(Shape::Hinge(c))
}

pub fn neg_sqrt() -> CatalogFunction {
    single(Shape::NegSqrt)
}

pub fn affine(slope: f64, intercept: f64) -> CatalogFunction {
    CatalogFunction {
        terms: Vec::new(),
        slope,
        intercept,
    }
}

impl CatalogFunction {
    /// Multiplies by `k >= 0`.
    pub fn scale(mut self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Error::Precondition(format!(
                "scale factor {k} must be finite and nonnegative"
            )));
        }
        if k == 0.0 {
            self.terms.clear();
        }
        for (w, _) in &mut self.terms {
            *w *= k;
        }
        self.slope *= k;
        self.intercept *= k;
        Ok(self)
    }

    pub fn plus(mut self, other: CatalogFunction) -> Self {
        self.terms.extend(other.terms);
        self.slope += other.slope;
        self.intercept += other.intercept;
        self
    }

    pub fn plus_affine(mut self, slope: f64, intercept: f64) -> Self {
        self.slope += slope;
        self.intercept += intercept;
        self
    }

    pub fn terms(&self) -> &[(f64, Shape)] {
        &self.terms
    }

    /// Restricts to `domain` after checking it against the natural domain.
    pub fn on(self, domain: Interval) -> Result<ConvexFunction> {
        ConvexFunction::new(domain, Arc::new(self))
    }

    pub fn into_oracle(self) -> Arc<dyn ConvexOracle> {
        Arc::new(self)
    }
}

impl ConvexOracle for CatalogFunction {
    fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, s)| w * s.eval(t))
            .fold(self.slope * t + self.intercept, |acc, v| acc + v)
    }

    fn one_sided_derivative(&self, t: f64, side: Side) -> Option<ExtendedReal> {
        let mut acc = ExtendedReal::Finite(self.slope);
        for (w, s) in &self.terms {
            acc = acc.checked_add(s.slope(t, side).scale(*w)).ok()?;
        }
        Some(acc)
    }

    fn has_closed_form_derivatives(&self) -> bool {
        true
    }

    fn antiderivative(&self, t: f64) -> Option<f64> {
        let base = 0.5 * self.slope * t * t + self.intercept * t;
        Some(
            self.terms
                .iter()
                .map(|(w, s)| w * s.antiderivative(t))
                .fold(base, |acc, v| acc + v),
        )
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.terms.iter().filter_map(|(_, s)| s.breakpoint()).collect()
    }

    fn check_domain(&self, domain: &Interval) -> Result<()> {
        for (_, s) in &self.terms {
            let ok = match s.lower() {
                Lower::Unbounded => true,
                Lower::Closed(l) => domain.lo() >= l,
                Lower::Open(l) => domain.lo() > l,
            };
            if !ok {
                return Err(Error::Precondition(format!(
                    "{s} is not defined and convex on [{}, {}]",
                    domain.lo(),
                    domain.hi()
                )));
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CatalogFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, s)| {
                if *w == 1.0 {
                    s.to_string()
                } else {
                    format!("{w}*({s})")
                }
            })
            .collect();
        if self.slope != 0.0 {
            parts.push(format!("{}*t", fmt_num(self.slope)));
        }
        if self.intercept != 0.0 || parts.is_empty() {
            parts.push(fmt_num(self.intercept));
        }
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_concave_powers_and_bad_domains() {
        assert!(power(0.5).is_err());
        assert!(power(2.0).is_ok());
        assert!(power(-0.5).unwrap().on(Interval::new(0.0, 1.0).unwrap()).is_err());
        assert!(neg_log().on(Interval::new(0.0, 1.0).unwrap()).is_err());
        assert!(power(3.0).unwrap().on(Interval::new(-1.0, 1.0).unwrap()).is_err());
        assert!(power(2.0).unwrap().on(Interval::new(-1.0, 1.0).unwrap()).is_ok());
        assert!(x_log_x().on(Interval::new(0.0, 1.0).unwrap()).is_ok());
    }

    #[test]
    fn antiderivatives_differentiate_back() {
        let fns = [
            power(2.0).unwrap(),
            power(-1.0).unwrap(),
            power(-0.5).unwrap(),
            power(2.5).unwrap(),
            neg_log(),
            x_log_x(),
            exp(),
            abs_shift(1.3),
            hinge(1.1),
            neg_sqrt(),
            affine(3.0, -2.0),
            power(2.0).unwrap().plus_affine(-2.0, 1.0),
        ];
        for f in &fns {
            for &t in &[0.4, 0.9, 1.7, 2.6] {
                let h = 1e-5;
                let numeric =
                    (f.antiderivative(t + h).unwrap() - f.antiderivative(t - h).unwrap()) / (2.0 * h);
                assert!(
                    (numeric - f.eval(t)).abs() < 1e-7 * f.eval(t).abs().max(1.0),
                    "{f} at {t}"
                );
            }
        }
    }

    #[test]
    fn slopes_are_monotone_across_a_kink() {
        let f = abs_shift(0.5).scale(2.0).unwrap().plus(hinge(0.5));
        let l = f.one_sided_derivative(0.5, Side::Left).unwrap();
        let r = f.one_sided_derivative(0.5, Side::Right).unwrap();
        assert_eq!(l, ExtendedReal::Finite(-2.0));
        assert_eq!(r, ExtendedReal::Finite(3.0));
        assert_eq!(f.breakpoints(), vec![0.5, 0.5]);
    }

    #[test]
    fn display_reads_as_an_expression() {
        assert_eq!(power(2.0).unwrap().to_string(), "t^2");
        assert_eq!(abs_shift(0.5).plus_affine(0.0, -0.25).to_string(), "abs(t - 0.5) + (-0.25)");
        assert_eq!(affine(3.0, 1.0).to_string(), "3*t + 1");
    }
}
