//! Fixtures shared by the benchmarks.

use convex_enclose::convex::catalog;
use convex_enclose::{ConvexFunction, DiscreteDistribution, Interval};

/// Catalog functions with closed-form slopes, on domains where they are finite.
pub fn functions() -> Vec<(&'static str, ConvexFunction)> {
    let unit = Interval::new(0.0, 1.0).expect("valid interval");
    let positive = Interval::new(0.5, 2.0).expect("valid interval");
    vec![
        ("exp", catalog::exp().on(unit).expect("exp on [0, 1]")),
        ("square", catalog::power(2.0).and_then(|f| f.on(unit)).expect("t^2 on [0, 1]")),
        ("neg_log", catalog::neg_log().on(positive).expect("-ln t on [0.5, 2]")),
        ("abs_shift", catalog::abs_shift(0.3).on(unit).expect("|t - 0.3| on [0, 1]")),
    ]
}

/// A pair of strictly positive distributions on `n` points.
pub fn distributions(n: usize) -> (DiscreteDistribution, DiscreteDistribution) {
    let norm = |w: Vec<f64>| {
        let s: f64 = w.iter().sum();
        DiscreteDistribution::new(w.into_iter().map(|x| x / s).collect()).expect("normalized weights")
    };
    let p = norm((1..=n).map(|i| i as f64).collect());
    let q = norm((1..=n).map(|i| (n + 1 - i) as f64 + 0.5).collect());
    (p, q)
}
