//! Pointwise bounds on the Ostrowski difference `∫_a^b f - (b-a) f(x)` for a
//! convex `f`, and the Hermite-Hadamard refinements that follow from them.
//!
//! Lower bounds use the slopes at `x`; upper bounds use the endpoint slopes
//! `A = f'+(a)` and `B = f'-(b)`. Both carry the constant 1/2, which the
//! family `k|t - (a+b)/2|` attains on either side.

use serde::Serialize;

use crate::convex::ConvexFunction;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::interval::Interval;

/// Slopes that differ by less than this (relative) count as equal when a
/// point of differentiability is required.
const CERTIFIED_DIFF_TOL: f64 = 1e-12;
const SAMPLED_DIFF_TOL: f64 = 1e-6;

fn require_interior(f: &ConvexFunction, x: f64) -> Result<()> {
    if f.domain().contains_interior(x) {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "x = {x} must lie strictly inside ({}, {})",
            f.domain().lo(),
            f.domain().hi()
        )))
    }
}

fn interior_slopes(f: &ConvexFunction, x: f64) -> Result<(f64, f64)> {
    let left = f.left_derivative(x)?;
    let right = f.right_derivative(x)?;
    // A finite convex function has finite slopes at interior points.
    match (left.finite(), right.finite()) {
        (Some(l), Some(r)) => Ok((l, r)),
        _ => Err(Error::InternalInconsistency(format!(
            "infinite one-sided slope ({left}, {right}) at interior point {x}"
        ))),
    }
}

/// `(1/2)[(b-x)^2 f'+(x) - (x-a)^2 f'-(x)]`, a lower bound for the Ostrowski
/// difference at an interior point `x`.
pub fn ostrowski_lower(f: &ConvexFunction, x: f64) -> Result<ExtendedReal> {
    require_interior(f, x)?;
    let (a, b) = (f.domain().lo(), f.domain().hi());
    let (left, right) = interior_slopes(f, x)?;
    Ok(ExtendedReal::Finite(
        0.5 * ((b - x).powi(2) * right - (x - a).powi(2) * left),
    ))
}

/// `(1/2)[(b-x)^2 B - (x-a)^2 A]`, an upper bound for the Ostrowski difference
/// at any `x` in `[a, b]`. Infinite endpoint slopes give `+inf` unless their
/// weight vanishes.
pub fn ostrowski_upper(f: &ConvexFunction, x: f64) -> Result<ExtendedReal> {
    f.domain().check(x)?;
    let (a, b) = (f.domain().lo(), f.domain().hi());
    let s = f.endpoint_slopes();
    let right_part = s.b.scale(0.5 * (b - x).powi(2));
    let left_part = s.a.scale(0.5 * (x - a).powi(2));
    right_part.checked_sub(left_part)
}

/// Both bounds at an interior `x`.
pub fn ostrowski_enclosure(f: &ConvexFunction, x: f64) -> Result<Enclosure> {
    Enclosure::new(ostrowski_lower(f, x)?, ostrowski_upper(f, x)?)
}

/// Encloses the Hermite-Hadamard gap `mean(f) - f((a+b)/2)` in
/// `[(1/8)(f'+(m) - f'-(m))(b-a), (1/8)(B - A)(b-a)]`.
pub fn hh_refinement(f: &ConvexFunction) -> Result<Enclosure> {
    let dom = f.domain();
    let m = dom.midpoint();
    let (left, right) = interior_slopes(f, m)?;
    let lo = 0.125 * (right - left) * dom.width();
    let s = f.endpoint_slopes();
    let hi = s.b.checked_sub(s.a)?.scale(0.125 * dom.width());
    Enclosure::new(ExtendedReal::Finite(lo), hi)
}

/// `((a+b)/2 - x) f'(x)`, a lower bound for `mean(f) - f(x)` at a point of
/// differentiability.
pub fn differentiable_lower(f: &ConvexFunction, x: f64) -> Result<f64> {
    require_interior(f, x)?;
    let slope = common_slope(f, x)?;
    Ok((f.domain().midpoint() - x) * slope)
}

/// The derivative at `x` when both one-sided slopes agree.
pub(crate) fn common_slope(f: &ConvexFunction, x: f64) -> Result<f64> {
    let dom = f.domain();
    let left = if x > dom.lo() { Some(f.left_derivative(x)?) } else { None };
    let right = if x < dom.hi() { Some(f.right_derivative(x)?) } else { None };
    let tol = if f.is_certified() {
        CERTIFIED_DIFF_TOL
    } else {
        SAMPLED_DIFF_TOL
    };
    match (left, right) {
        (Some(ExtendedReal::Finite(l)), Some(ExtendedReal::Finite(r))) => {
            if (r - l).abs() <= tol * l.abs().max(r.abs()).max(1.0) {
                Ok(0.5 * (l + r))
            } else {
                Err(Error::NotDifferentiable { t: x, left: l, right: r })
            }
        }
        (Some(ExtendedReal::Finite(d)), None) | (None, Some(ExtendedReal::Finite(d))) => Ok(d),
        (l, r) => Err(Error::NotDifferentiable {
            t: x,
            left: l.map_or(f64::NAN, ExtendedReal::to_f64),
            right: r.map_or(f64::NAN, ExtendedReal::to_f64),
        }),
    }
}

/// Encloses `∫_{x-h/2}^{x+h/2} f - h f(x)` in
/// `[(1/8)h^2 (f'+(x) - f'-(x)), (1/8)h^2 (f'-(x+h/2) - f'+(x-h/2))]`.
pub fn window_enclosure(f: &ConvexFunction, x: f64, h: f64) -> Result<Enclosure> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Precondition(format!("window width must be positive, got {h}")));
    }
    let dom = f.domain();
    // Window ends within round-off of the domain ends snap onto them.
    let snap = |t: f64, end: f64| {
        if (t - end).abs() <= 4.0 * f64::EPSILON * end.abs().max(h) {
            end
        } else {
            t
        }
    };
    let wlo = snap(x - 0.5 * h, dom.lo());
    let whi = snap(x + 0.5 * h, dom.hi());
    if !(dom.contains(wlo) && dom.contains(whi)) {
        return Err(Error::OutOfDomain {
            t: if dom.contains(wlo) { whi } else { wlo },
            lo: dom.lo(),
            hi: dom.hi(),
        });
    }
    let window = f.restrict(Interval::new(wlo, whi)?)?;
    let (left, right) = interior_slopes(&window, x)?;
    let lo = 0.125 * h * h * (right - left);
    let s = window.endpoint_slopes();
    let hi = s.b.checked_sub(s.a)?.scale(0.125 * h * h);
    Enclosure::new(ExtendedReal::Finite(lo), hi)
}

/// The upper bound rewritten as a shifted square:
/// `(1/2)(B-A)[(x - x0)^2 - AB(b-a)^2/(B-A)^2]`, `x0 = (bB - aA)/(B - A)`.
pub fn quadratic_form_upper(f: &ConvexFunction, x: f64) -> Result<f64> {
    f.domain().check(x)?;
    let (a, b) = (f.domain().lo(), f.domain().hi());
    let (sa, sb) = f.endpoint_slopes().finite()?;
    if sb == sa {
        return Err(Error::DegenerateSlopes(sa));
    }
    let spread = sb - sa;
    let x0 = (b * sb - a * sa) / spread;
    Ok(0.5 * spread * ((x - x0).powi(2) - sa * sb * (b - a).powi(2) / spread.powi(2)))
}

/// Minimizer of the upper bound over `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BestPoint {
    pub x: f64,
    pub bound: f64,
}

/// Exact minimizer of `x ↦ (1/2)[(b-x)^2 B - (x-a)^2 A]` on `[a, b]`: the
/// clamped vertex when `B > A`, otherwise the better endpoint of the linear
/// form.
pub fn best_evaluation_point(f: &ConvexFunction) -> Result<BestPoint> {
    let (a, b) = (f.domain().lo(), f.domain().hi());
    let (sa, sb) = f.endpoint_slopes().finite()?;
    let bound = |x: f64| 0.5 * ((b - x).powi(2) * sb - (x - a).powi(2) * sa);
    let x = if sb > sa {
        ((b * sb - a * sa) / (sb - sa)).clamp(a, b)
    } else if bound(b) < bound(a) {
        b
    } else {
        a
    };
    Ok(BestPoint { x, bound: bound(x) })
}

/// The classical Lipschitz-type bound on `|f(x) - mean(f)|`,
/// `[1/4 + (x - (a+b)/2)^2/(b-a)^2](b-a) M` with `M = max(|A|, |B|)`.
pub fn classical_ostrowski_bound(f: &ConvexFunction, x: f64) -> Result<f64> {
    f.domain().check(x)?;
    let dom = f.domain();
    let (sa, sb) = f.endpoint_slopes().finite()?;
    let m = sa.abs().max(sb.abs());
    let centred = (x - dom.midpoint()) / dom.width();
    Ok((0.25 + centred * centred) * dom.width() * m)
}

/// Quantities around the vertex `x0 = (bB - aA)/(B - A)`, reported for
/// inspection only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VertexDiagnostic {
    pub x0: f64,
    pub x0_in_domain: bool,
    /// `(1/2) AB (b-a)/(B-A)`.
    pub scaled_slope_product: f64,
    /// `f(x0) - mean(f)` when `x0` is in the domain and a mean is supplied.
    pub vertex_gap: Option<f64>,
}

pub fn vertex_diagnostic(f: &ConvexFunction, mean: Option<f64>) -> Result<VertexDiagnostic> {
    let (a, b) = (f.domain().lo(), f.domain().hi());
    let (sa, sb) = f.endpoint_slopes().finite()?;
    if sb == sa {
        return Err(Error::DegenerateSlopes(sa));
    }
    let x0 = (b * sb - a * sa) / (sb - sa);
    let inside = f.domain().contains(x0);
    let vertex_gap = match (inside, mean) {
        (true, Some(m)) => Some(f.eval(x0)? - m),
        _ => None,
    };
    Ok(VertexDiagnostic {
        x0,
        x0_in_domain: inside,
        scaled_slope_product: 0.5 * sa * sb * (b - a) / (sb - sa),
        vertex_gap,
    })
}
