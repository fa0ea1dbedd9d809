//! Independent ground truth for integrals.
//!
//! Closed-form antiderivatives where the function has one, otherwise adaptive
//! Simpson with the domain split at every known kink. Nothing here touches
//! the slope-based bound formulas, so comparing the two is a genuine check.

use serde::Serialize;

use crate::convex::ConvexFunction;
use crate::divergence::{DiscreteDistribution, DivergenceKernel};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// Recursion limit for adaptive Simpson.
pub const MAX_DEPTH: usize = 60;
/// Default tolerance, relative to `1 + |integral|`.
pub const DEFAULT_REL_TOL: f64 = 1e-13;
/// Equal panels per smooth piece before adaptive refinement starts.
const INITIAL_PANELS: usize = 16;
/// Halving the tolerance at every level stops after this many levels;
/// deeper panels sit next to a singular derivative and keep the floor.
const TOL_HALVINGS: i32 = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    ClosedForm,
    AdaptiveSimpson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub est_error: f64,
    pub method: OracleMethod,
}

/// `∫ f` over `iv`: closed form when available, adaptive Simpson otherwise.
pub fn reference_integral(f: &ConvexFunction, iv: Interval, tol: f64) -> Result<OracleResult> {
    check_sub(f, &iv)?;
    if let (Some(hi), Some(lo)) = (f.antiderivative(iv.hi()), f.antiderivative(iv.lo())) {
        let value = hi - lo;
        if value.is_finite() {
            return Ok(OracleResult {
                value,
                est_error: 0.0,
                method: OracleMethod::ClosedForm,
            });
        }
    }
    simpson_integral(f, iv, tol)
}

/// [`reference_integral`] at the default tolerance `1e-13 * (1 + |result|)`.
pub fn reference_integral_auto(f: &ConvexFunction, iv: Interval) -> Result<OracleResult> {
    check_sub(f, &iv)?;
    if f.antiderivative(iv.lo()).is_some() {
        return reference_integral(f, iv, DEFAULT_REL_TOL);
    }
    simpson_integral_auto(f, iv)
}

/// Adaptive Simpson regardless of any closed form.
pub fn simpson_integral(f: &ConvexFunction, iv: Interval, tol: f64) -> Result<OracleResult> {
    check_sub(f, &iv)?;
    let oracle = f.oracle();
    let g = |t: f64| oracle.eval(t);
    adaptive_simpson(&g, iv, &f.interior_breakpoints(), tol)
}

/// Adaptive Simpson at the default relative tolerance.
pub fn simpson_integral_auto(f: &ConvexFunction, iv: Interval) -> Result<OracleResult> {
    check_sub(f, &iv)?;
    let oracle = f.oracle();
    let g = |t: f64| oracle.eval(t);
    adaptive_simpson_auto(&g, iv, &f.interior_breakpoints())
}

/// Integral mean `(1/|iv|) ∫ f` at the default tolerance.
pub fn reference_mean(f: &ConvexFunction, iv: Interval) -> Result<f64> {
    Ok(reference_integral_auto(f, iv)?.value / iv.width())
}

fn check_sub(f: &ConvexFunction, iv: &Interval) -> Result<()> {
    if f.domain().contains_interval(iv) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "integration interval [{}, {}] leaves the domain [{}, {}]",
            iv.lo(),
            iv.hi(),
            f.domain().lo(),
            f.domain().hi()
        )))
    }
}

/// Adaptive Simpson of `g` on `iv` to absolute error `tol`, splitting first at
/// the given breakpoints.
pub fn adaptive_simpson(
    g: &dyn Fn(f64) -> f64,
    iv: Interval,
    breakpoints: &[f64],
    tol: f64,
) -> Result<OracleResult> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    let mut cuts = vec![iv.lo()];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&c| iv.contains_interior(c))
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(iv.hi());

    let total = iv.width();
    let mut value = 0.0;
    let mut est_error = 0.0;
    for piece in cuts.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let h = (b - a) / INITIAL_PANELS as f64;
        for k in 0..INITIAL_PANELS {
            let lo = a + h * k as f64;
            let hi = if k + 1 == INITIAL_PANELS { b } else { a + h * (k + 1) as f64 };
            let panel_tol = tol * (hi - lo) / total;
            let (v, e) = simpson_panel(g, lo, hi, panel_tol)?;
            value += v;
            est_error += e;
        }
    }
    Ok(OracleResult {
        value,
        est_error,
        method: OracleMethod::AdaptiveSimpson,
    })
}

/// [`adaptive_simpson`] with tolerance `1e-13 * (1 + |result|)`, the magnitude
/// taken from a coarse first pass.
pub fn adaptive_simpson_auto(
    g: &dyn Fn(f64) -> f64,
    iv: Interval,
    breakpoints: &[f64],
) -> Result<OracleResult> {
    let n = 64;
    let h = iv.width() / n as f64;
    let coarse: f64 = (0..n)
        .map(|k| {
            let a = iv.lo() + h * k as f64;
            let b = a + h;
            h / 6.0 * (g(a) + 4.0 * g(0.5 * (a + b)) + g(b))
        })
        .sum();
    if !coarse.is_finite() {
        return Err(Error::OracleFailure(format!(
            "integrand is not finite on [{}, {}]",
            iv.lo(),
            iv.hi()
        )));
    }
    adaptive_simpson(g, iv, breakpoints, DEFAULT_REL_TOL * (1.0 + coarse.abs()))
}

fn simpson_panel(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let fa = g(a);
    let fb = g(b);
    let m = 0.5 * (a + b);
    let fm = g(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let floor = tol * 2f64.powi(-TOL_HALVINGS);
    refine(g, a, b, fa, fm, fb, whole, tol, floor, 0)
}

#[allow(clippy::too_many_arguments)]
fn refine(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    floor: f64,
    depth: usize,
) -> Result<(f64, f64)> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    if !(flm.is_finite() && frm.is_finite() && fa.is_finite() && fb.is_finite()) {
        return Err(Error::OracleFailure(format!(
            "integrand is not finite near [{a}, {b}]"
        )));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok((left + right + delta / 15.0, delta.abs() / 15.0));
    }
    if depth + 1 >= MAX_DEPTH || lm <= a || rm >= b || m <= lm || rm <= m {
        return Err(Error::OracleFailure(format!(
            "adaptive Simpson did not converge on [{a}, {b}] (depth {depth}, error {:e} > {:e})",
            delta.abs() / 15.0,
            tol
        )));
    }
    let half = (0.5 * tol).max(floor);
    let (lv, le) = refine(g, a, m, fa, flm, fm, left, half, floor, depth + 1)?;
    let (rv, re) = refine(g, m, b, fm, frm, fb, right, half, floor, depth + 1)?;
    Ok((lv + rv, le + re))
}

/// The HH-divergence computed term by term with every inner integral done by
/// adaptive Simpson, as a cross-check for the divergence module.
pub fn brute_force_hh(
    kernel: &DivergenceKernel,
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    tol: f64,
) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    let oracle = kernel.oracle();
    let g = |t: f64| oracle.eval(t);
    let breaks = oracle.breakpoints();
    let mut total = 0.0;
    for (&pi, &qi) in p.weights().iter().zip(q.weights()) {
        if pi == qi {
            continue;
        }
        let r = qi / pi;
        let iv = Interval::new(r.min(1.0), r.max(1.0))?;
        let integral = adaptive_simpson(&g, iv, &breaks, tol)?.value;
        // ∫_1^r f = ±∫ over [min, max].
        let signed = if r >= 1.0 { integral } else { -integral };
        total += pi * pi / (qi - pi) * signed;
    }
    Ok(total)
}
