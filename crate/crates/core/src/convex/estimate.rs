//! One-sided limits of sampled functions.
//!
//! Both slopes of a convex function and one-sided values of a monotone density
//! are limits of a monotone sequence sampled at `h_k = h0 * 2^-k`. Raw
//! quotients converge only linearly in `h` and drown in cancellation long
//! before reaching 1e-9, so the sequence is accelerated with a short
//! Richardson table (the sampled quantity has an expansion in integer powers
//! of `h` on a side where the function is smooth).

use crate::convex::Side;
use crate::extended::ExtendedReal;
use crate::interval::Interval;

/// Successive estimates closer than this (relative to `max(1, |value|)`) stop
/// the refinement.
pub const CONVERGENCE_TOL: f64 = 1e-9;
/// Number of halvings of the initial step.
pub const MAX_HALVINGS: usize = 40;
/// Highest Richardson column used.
const MAX_ORDER: usize = 4;

/// Outcome of a limit estimation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitEstimate {
    pub value: ExtendedReal,
    pub converged: bool,
    pub halvings: usize,
}

fn initial_step(domain: &Interval, t: f64, side: Side) -> f64 {
    let room = match side {
        Side::Right => domain.hi() - t,
        Side::Left => t - domain.lo(),
    };
    (domain.width() / 16.0).min(room)
}

/// Drives the accelerated sequence `sample(h)` for `h = h0 * 2^-k`.
fn accelerate(h0: f64, mut sample: impl FnMut(f64) -> f64) -> LimitEstimate {
    let mut raw: Vec<f64> = Vec::with_capacity(MAX_HALVINGS + 1);
    let mut prev_row: Vec<f64> = Vec::new();
    let mut prev_best: Option<f64> = None;

    for k in 0..=MAX_HALVINGS {
        let h = h0 * (0.5f64).powi(k as i32);
        let q = sample(h);
        if !q.is_finite() {
            // Sampling hit an infinite value; the limit follows its sign.
            let value = if q > 0.0 {
                ExtendedReal::PosInf
            } else if q < 0.0 {
                ExtendedReal::NegInf
            } else {
                break;
            };
            return LimitEstimate {
                value,
                converged: false,
                halvings: k,
            };
        }
        raw.push(q);

        let mut row = Vec::with_capacity(MAX_ORDER + 1);
        row.push(q);
        for j in 1..=MAX_ORDER.min(k) {
            let factor = f64::from(1u32 << j) - 1.0;
            let refined = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / factor;
            row.push(refined);
        }
        let best = *row.last().unwrap();

        if k >= 2 {
            if let Some(p) = prev_best {
                if (best - p).abs() < CONVERGENCE_TOL * best.abs().max(1.0) {
                    return LimitEstimate {
                        value: ExtendedReal::Finite(best),
                        converged: true,
                        halvings: k,
                    };
                }
            }
        }
        prev_best = Some(best);
        prev_row = row;
    }

    let last = *raw.last().unwrap_or(&0.0);
    // A sequence whose magnitude keeps growing geometrically has no finite
    // limit (a vertical tangent); anything else reports the last estimate.
    if raw.len() > 10 {
        let earlier = raw[raw.len() - 11];
        let tail = &raw[raw.len() - 11..];
        let monotone_growth = tail.windows(2).all(|w| w[1].abs() >= w[0].abs());
        let same_sign = tail.iter().all(|v| v.signum() == last.signum());
        if monotone_growth && same_sign && last.abs() >= 16.0 * earlier.abs().max(1.0) {
            let value = if last > 0.0 {
                ExtendedReal::PosInf
            } else {
                ExtendedReal::NegInf
            };
            return LimitEstimate {
                value,
                converged: false,
                halvings: MAX_HALVINGS,
            };
        }
    }
    LimitEstimate {
        value: ExtendedReal::Finite(prev_best.unwrap_or(last)),
        converged: false,
        halvings: MAX_HALVINGS,
    }
}

/// One-sided derivative of `f` at `t` from difference quotients over
/// `h_k = h0 * 2^-k`, `h0 = min(width / 16, room to the boundary)`.
///
/// The caller guarantees that the requested side exists (`t < hi` for the
/// right side, `t > lo` for the left side).
pub fn one_sided_slope(
    f: &dyn Fn(f64) -> f64,
    domain: &Interval,
    t: f64,
    side: Side,
) -> LimitEstimate {
    let h0 = initial_step(domain, t, side);
    let ft = f(t);
    match side {
        Side::Right => accelerate(h0, |h| (f(t + h) - ft) / h),
        Side::Left => accelerate(h0, |h| (ft - f(t - h)) / h),
    }
}

/// One-sided limit `g(t+)` or `g(t-)` of a function that is monotone near `t`.
pub fn one_sided_limit(
    g: &dyn Fn(f64) -> f64,
    domain: &Interval,
    t: f64,
    side: Side,
) -> LimitEstimate {
    let h0 = initial_step(domain, t, side);
    match side {
        Side::Right => accelerate(h0, |h| g(t + h)),
        Side::Left => accelerate(h0, |h| g(t - h)),
    }
}
