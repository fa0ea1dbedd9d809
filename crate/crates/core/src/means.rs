//! Comparison of the integral mean over `[a, b]` with the mean over a
//! sub-interval `[c, d]`, and its specialization to the logarithmic, identric
//! and p-logarithmic means.

use serde::Serialize;

use crate::convex::{catalog, ConvexFunction};
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::interval::Interval;
use crate::oracle::reference_mean;

/// Relative slack used when asserting the sandwich.
pub const SANDWICH_SLACK: f64 = 1e-10;

/// `lower <= mean_[a,b](f) - mean_[c,d](f) <= upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanComparison {
    pub lower: f64,
    /// The mean difference itself, from the reference oracle.
    pub gap: f64,
    pub upper: ExtendedReal,
}

impl MeanComparison {
    pub fn holds(&self, rel_slack: f64) -> bool {
        let s = rel_slack * self.gap.abs().max(1.0);
        self.lower - s <= self.gap && ExtendedReal::Finite(self.gap - s) <= self.upper
    }
}

/// Bounds the difference of the two integral means.
///
/// lower = ((a+b)/2)(f(d) - f(c))/(d-c) - (d f(d) - c f(c))/(d-c) + mean_[c,d](f)
/// upper = [B((b-d)^2 + (b-d)(b-c) + (b-c)^2) - A((d-a)^2 + (d-a)(c-a) + (c-a)^2)] / (6(b-a))
pub fn mean_comparison(f: &ConvexFunction, sub: Interval) -> Result<MeanComparison> {
    let dom = f.domain();
    if !dom.contains_interval(&sub) {
        return Err(Error::Precondition(format!(
            "[{}, {}] is not inside [{}, {}]",
            sub.lo(),
            sub.hi(),
            dom.lo(),
            dom.hi()
        )));
    }
    let (a, b) = (dom.lo(), dom.hi());
    let (c, d) = (sub.lo(), sub.hi());
    let (fc, fd) = (f.eval(c)?, f.eval(d)?);
    let mean_sub = reference_mean(f, sub)?;
    let mean_all = reference_mean(f, dom)?;

    let lower = dom.midpoint() * (fd - fc) / (d - c) - (d * fd - c * fc) / (d - c) + mean_sub;

    let s = f.endpoint_slopes();
    let right_weight = ((b - d).powi(2) + (b - d) * (b - c) + (b - c).powi(2)) / (6.0 * (b - a));
    let left_weight = ((d - a).powi(2) + (d - a) * (c - a) + (c - a).powi(2)) / (6.0 * (b - a));
    let upper = s.b.scale(right_weight).checked_sub(s.a.scale(left_weight))?;

    Ok(MeanComparison {
        lower,
        gap: mean_all - mean_sub,
        upper,
    })
}

/// Arithmetic, logarithmic, identric and p-logarithmic means of `0 < a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpecialMeans {
    #[serde(rename = "A")]
    pub arithmetic: f64,
    #[serde(rename = "L")]
    pub logarithmic: f64,
    #[serde(rename = "I")]
    pub identric: f64,
    #[serde(rename = "L_p")]
    pub p_logarithmic: f64,
    pub p: f64,
}

fn check_pair(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && a < b && b.is_finite() {
        Ok(())
    } else {
        Err(Error::Precondition(format!("need 0 < a < b, got a = {a}, b = {b}")))
    }
}

pub fn logarithmic_mean(a: f64, b: f64) -> Result<f64> {
    check_pair(a, b)?;
    Ok((b - a) / (b.ln() - a.ln()))
}

/// `I(a, b) = (1/e)(b^b / a^a)^(1/(b-a))`, evaluated in logs.
pub fn identric_mean(a: f64, b: f64) -> Result<f64> {
    check_pair(a, b)?;
    Ok(((b * b.ln() - a * a.ln()) / (b - a) - 1.0).exp())
}

/// `L_p(a, b) = [(b^(p+1) - a^(p+1)) / ((p+1)(b-a))]^(1/p)` for `p ∉ {-1, 0}`.
pub fn p_logarithmic_mean(a: f64, b: f64, p: f64) -> Result<f64> {
    check_pair(a, b)?;
    if p == -1.0 || p == 0.0 || !p.is_finite() {
        return Err(Error::ExcludedExponent(p));
    }
    let inner = (b.powf(p + 1.0) - a.powf(p + 1.0)) / ((p + 1.0) * (b - a));
    Ok(inner.powf(1.0 / p))
}

pub fn special_means(a: f64, b: f64, p: f64) -> Result<SpecialMeans> {
    check_pair(a, b)?;
    Ok(SpecialMeans {
        arithmetic: 0.5 * (a + b),
        logarithmic: logarithmic_mean(a, b)?,
        identric: identric_mean(a, b)?,
        p_logarithmic: p_logarithmic_mean(a, b, p)?,
        p,
    })
}

/// One kernel's sandwich together with the gap expressed through special
/// means.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanKernelCheck {
    pub kernel: String,
    pub comparison: MeanComparison,
    /// The gap written through special means: `L_p(a,b)^p - L_p(c,d)^p`,
    /// `1/L(a,b) - 1/L(c,d)` or `ln I(c,d) - ln I(a,b)`.
    pub closed_form_gap: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanInequalityReport {
    pub outer: Interval,
    pub inner: Interval,
    pub p: f64,
    pub checks: Vec<MeanKernelCheck>,
}

/// Runs [`mean_comparison`] for `t^p`, `1/t` and `-ln t` on `[c, d] ⊆ [a, b]`
/// and asserts each sandwich.
pub fn verify_mean_inequalities(a: f64, b: f64, c: f64, d: f64, p: f64) -> Result<MeanInequalityReport> {
    check_pair(a, b)?;
    if p == -1.0 || p == 0.0 {
        return Err(Error::ExcludedExponent(p));
    }
    let outer = Interval::new(a, b)?;
    let inner = Interval::new(c, d)?;
    if !outer.contains_interval(&inner) {
        return Err(Error::Precondition(format!(
            "[{c}, {d}] is not inside [{a}, {b}]"
        )));
    }

    let kernels: Vec<(String, ConvexFunction, f64)> = vec![
        (
            format!("t^{p}"),
            catalog::power(p)?.on(outer)?,
            p_logarithmic_mean(a, b, p)?.powf(p) - p_logarithmic_mean(c, d, p)?.powf(p),
        ),
        (
            "1/t".to_string(),
            catalog::power(-1.0)?.on(outer)?,
            1.0 / logarithmic_mean(a, b)? - 1.0 / logarithmic_mean(c, d)?,
        ),
        (
            "-ln(t)".to_string(),
            catalog::neg_log().on(outer)?,
            identric_mean(c, d)?.ln() - identric_mean(a, b)?.ln(),
        ),
    ];

    let mut checks = Vec::with_capacity(kernels.len());
    for (kernel, f, closed_form_gap) in kernels {
        let comparison = mean_comparison(&f, inner)?;
        let holds = comparison.holds(SANDWICH_SLACK);
        if !holds {
            return Err(Error::InternalInconsistency(format!(
                "mean sandwich fails for {kernel}: {} <= {} <= {}",
                comparison.lower, comparison.gap, comparison.upper
            )));
        }
        checks.push(MeanKernelCheck {
            kernel,
            comparison,
            closed_form_gap,
            holds,
        });
    }
    Ok(MeanInequalityReport {
        outer,
        inner,
        p,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Interval {
        Interval::new(a, b).unwrap()
    }

    #[test]
    fn comparison_examples() {
        let id = catalog::affine(1.0, 0.0).on(iv(0.0, 2.0)).unwrap();
        let m = mean_comparison(&id, iv(0.0, 1.0)).unwrap();
        assert_eq!((m.lower, m.gap, m.upper), (0.5, 0.5, ExtendedReal::Finite(0.5)));

        let sq = catalog::power(2.0).unwrap().on(iv(0.0, 2.0)).unwrap();
        let m = mean_comparison(&sq, iv(0.0, 1.0)).unwrap();
        assert!((m.lower - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.gap - 1.0).abs() < 1e-15);
        assert!((m.upper.to_f64() - 7.0 / 3.0).abs() < 1e-15);

        let f0 = catalog::abs_shift(0.5).on(iv(0.0, 1.0)).unwrap();
        let m = mean_comparison(&f0, iv(0.0, 1.0)).unwrap();
        assert_eq!(m.gap, 0.0);
        assert!((m.lower + 0.25).abs() < 1e-15);
        assert!(m.upper.to_f64() >= 0.0);
    }

    #[test]
    fn infinite_slope_gives_unbounded_upper() {
        let ns = catalog::neg_sqrt().on(iv(0.0, 1.0)).unwrap();
        let m = mean_comparison(&ns, iv(0.25, 0.5)).unwrap();
        assert_eq!(m.upper, ExtendedReal::PosInf);
        assert!(m.holds(0.0));
    }

    #[test]
    fn special_mean_examples() {
        let e = std::f64::consts::E;
        let m = special_means(1.0, e, 1.0).unwrap();
        assert!((m.logarithmic - (e - 1.0)).abs() < 1e-15);
        assert!((m.identric - (1.0 / (e - 1.0)).exp()).abs() < 1e-15);
        assert!((m.identric - 1.7895724).abs() < 1e-7);
        assert!((m.p_logarithmic - m.arithmetic).abs() < 1e-15);
        for (a, b) in [(0.5, 3.0), (2.0, 2.5)] {
            let m = special_means(a, b, 1.0).unwrap();
            assert!((m.p_logarithmic - m.arithmetic).abs() < 1e-14);
        }
    }

    #[test]
    fn special_mean_errors() {
        assert!(special_means(0.0, 1.0, 2.0).is_err());
        assert!(special_means(2.0, 1.0, 2.0).is_err());
        assert!(matches!(special_means(1.0, 2.0, -1.0), Err(Error::ExcludedExponent(_))));
        assert!(matches!(special_means(1.0, 2.0, 0.0), Err(Error::ExcludedExponent(_))));
    }

    #[test]
    fn verification_report() {
        let r = verify_mean_inequalities(1.0, 4.0, 1.5, 2.5, 2.0).unwrap();
        assert_eq!(r.checks.len(), 3);
        for c in &r.checks {
            assert!(c.holds);
            assert!(
                (c.comparison.gap - c.closed_form_gap).abs() < 1e-12,
                "{}: {} vs {}",
                c.kernel,
                c.comparison.gap,
                c.closed_form_gap
            );
        }
        let same = verify_mean_inequalities(1.0, 2.0, 1.0, 2.0, 2.0).unwrap();
        for c in &same.checks {
            assert_eq!(c.comparison.gap, 0.0);
            assert!(c.comparison.lower <= 0.0 && c.comparison.upper >= ExtendedReal::ZERO);
        }
        // t^p with p in (0, 1) is concave.
        assert!(verify_mean_inequalities(1.0, 2.0, 1.2, 1.5, 0.5).is_err());
    }
}
