use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex::ConvexFunction;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

/// Default tolerance, relative to the sampled range of the function.
pub const DEFAULT_CONVEXITY_TOL: f64 = 1e-9;

/// Floor on the slope tolerance for functions whose slopes are estimated.
const SAMPLED_SLOPE_TOL: f64 = 1e-6;

const PAIR_SEED: u64 = 0x00c0_ffee_5eed;

/// Summary of a passed convexity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub pairs_checked: usize,
    pub slope_points_checked: usize,
    /// Largest violation found, normalized by its scale (0 when none).
    pub worst_violation: f64,
    pub worst_pair: Option<(f64, f64)>,
    pub worst_kind: Option<&'static str>,
    pub tolerance: f64,
}

struct Worst {
    violation: f64,
    pair: Option<(f64, f64)>,
    kind: Option<&'static str>,
}

impl Worst {
    fn record(&mut self, violation: f64, s: f64, t: f64, kind: &'static str) {
        if violation > self.violation {
            self.violation = violation;
            self.pair = Some((s, t));
            self.kind = Some(kind);
        }
    }
}

fn excess(lhs: ExtendedReal, rhs: ExtendedReal) -> f64 {
    // How far `lhs <= rhs` fails; infinite mismatches count as infinite.
    match (lhs, rhs) {
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a - b,
        _ if lhs <= rhs => 0.0,
        _ => f64::INFINITY,
    }
}

pub(crate) fn check_convexity(f: &ConvexFunction, n: usize, tol: f64) -> Result<ConvexityReport> {
    if n < 3 {
        return Err(Error::Precondition(format!(
            "convexity check needs at least 3 samples, got {n}"
        )));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::Precondition(format!("invalid tolerance {tol}")));
    }
    let dom = f.domain();
    let step = dom.width() / (n - 1) as f64;
    let grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { dom.hi() } else { dom.lo() + step * i as f64 })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| f.eval_unchecked(t)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Precondition(format!(
            "function is not finite at t = {}",
            grid[i]
        )));
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    let scale = if range > 0.0 { range } else { 1.0 };

    let mut worst = Worst {
        violation: 0.0,
        pair: None,
        kind: None,
    };
    let mut pairs = 0usize;
    let midpoint_test = |s: f64, fs: f64, t: f64, ft: f64, worst: &mut Worst| {
        let mid = f.eval_unchecked(0.5 * (s + t));
        let v = (mid - 0.5 * (fs + ft)) / scale;
        worst.record(v, s, t, "midpoint convexity");
    };

    for i in 0..n {
        for j in (i + 2)..n {
            midpoint_test(grid[i], values[i], grid[j], values[j], &mut worst);
            pairs += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SEED);
    for _ in 0..4 * n {
        let s = rng.gen_range(dom.lo()..=dom.hi());
        let t = rng.gen_range(dom.lo()..=dom.hi());
        midpoint_test(s, f.eval_unchecked(s), t, f.eval_unchecked(t), &mut worst);
        pairs += 1;
    }

    // Slope monotonicity: left(t) <= right(t) and right(s) <= left(t) for s < t.
    let lefts: Vec<Option<ExtendedReal>> = grid.iter().map(|&t| f.left_derivative(t).ok()).collect();
    let rights: Vec<Option<ExtendedReal>> =
        grid.iter().map(|&t| f.right_derivative(t).ok()).collect();
    let slope_scale = lefts
        .iter()
        .chain(rights.iter())
        .flatten()
        .filter_map(|d| d.finite())
        .fold(1.0f64, |m, d| m.max(d.abs()));
    let slope_tol = if f.is_certified() {
        tol
    } else {
        tol.max(SAMPLED_SLOPE_TOL)
    };
    let mut slope_worst = Worst {
        violation: 0.0,
        pair: None,
        kind: None,
    };
    for i in 0..n {
        if let (Some(l), Some(r)) = (lefts[i], rights[i]) {
            let v = excess(l, r) / slope_scale;
            slope_worst.record(v, grid[i], grid[i], "left slope <= right slope");
        }
        if i + 1 < n {
            if let (Some(r), Some(l)) = (rights[i], lefts[i + 1]) {
                let v = excess(r, l) / slope_scale;
                slope_worst.record(v, grid[i], grid[i + 1], "slope monotonicity");
            }
        }
    }

    if worst.violation > tol {
        return Err(Error::NonConvex {
            s: worst.pair.unwrap().0,
            t: worst.pair.unwrap().1,
            kind: worst.kind.unwrap(),
            violation: worst.violation,
        });
    }
    if slope_worst.violation > slope_tol {
        return Err(Error::NonConvex {
            s: slope_worst.pair.unwrap().0,
            t: slope_worst.pair.unwrap().1,
            kind: slope_worst.kind.unwrap(),
            violation: slope_worst.violation,
        });
    }
    let overall = if slope_worst.violation > worst.violation {
        slope_worst
    } else {
        worst
    };
    Ok(ConvexityReport {
        pairs_checked: pairs,
        slope_points_checked: n,
        worst_violation: overall.violation,
        worst_pair: overall.pair,
        worst_kind: overall.kind,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use crate::convex::catalog;
    use crate::convex::ConvexFunction;
    use crate::error::Error;
    use crate::interval::Interval;

    #[test]
    fn square_passes() {
        let f = catalog::power(2.0).unwrap().on(Interval::new(0.0, 1.0).unwrap()).unwrap();
        let report = f.check_convexity(33, 1e-12).unwrap();
        assert!(report.worst_violation <= 1e-12);
    }

    #[test]
    fn sine_fails_with_witness() {
        let f = ConvexFunction::from_fn(Interval::new(0.0, 3.0).unwrap(), "sin(t)", f64::sin);
        match f.check_convexity(33, 1e-12) {
            Err(Error::NonConvex { s, t, violation, .. }) => {
                assert!(violation > 1e-3);
                assert!((0.0..=3.0).contains(&s) && (0.0..=3.0).contains(&t));
            }
            other => panic!("expected a non-convex rejection, got {other:?}"),
        }
    }

    #[test]
    fn abs_passes() {
        let f = catalog::abs_shift(0.0).on(Interval::new(-1.0, 1.0).unwrap()).unwrap();
        f.check_convexity(33, 1e-12).unwrap();
        let bb = ConvexFunction::from_fn(Interval::new(-1.0, 1.0).unwrap(), "abs", f64::abs);
        bb.check_convexity(33, 1e-12).unwrap();
    }

    #[test]
    fn needs_three_samples() {
        let f = catalog::exp().on(Interval::new(0.0, 1.0).unwrap()).unwrap();
        assert!(matches!(f.check_convexity(2, 1e-9), Err(Error::Precondition(_))));
    }

    #[test]
    fn concave_kink_caught_by_slopes() {
        // -|t| has a midpoint violation too, but the slope test must also see it.
        let f = ConvexFunction::from_fn(Interval::new(-1.0, 1.0).unwrap(), "-abs", |t: f64| -t.abs());
        assert!(f.check_convexity(5, 1e-9).is_err());
    }
}
