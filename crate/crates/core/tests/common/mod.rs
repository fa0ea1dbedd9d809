//! Seeded generators shared by the property and acceptance tests.

#![allow(dead_code)]

use convex_enclose::catalog::{self, CatalogFunction};
use convex_enclose::divergence::DiscreteDistribution;
use convex_enclose::probability::DensityFamily;
use convex_enclose::{ConvexFunction, Interval, Partition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn iv(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

/// A catalog function together with a domain it is convex on.
#[derive(Clone, Debug)]
pub struct Case {
    pub label: String,
    pub func: CatalogFunction,
    pub domain: Interval,
    /// True when the function is differentiable everywhere inside the domain.
    pub smooth: bool,
}

impl Case {
    pub fn f(&self) -> ConvexFunction {
        self.func.clone().on(self.domain).unwrap()
    }
}

fn lower_end(rng: &mut TestRng, lo: f64, hi: f64, zero_prob: f64) -> f64 {
    if rng.gen_bool(zero_prob) {
        0.0
    } else {
        rng.gen_range(lo..hi)
    }
}

/// Picks a shape, a domain inside its natural domain and, for kinked shapes,
/// a kink that may or may not fall inside the domain.
pub fn random_case(rng: &mut TestRng) -> Case {
    let width = rng.gen_range(0.1..3.0);
    let k = rng.gen_range(0.2..3.0);
    let (label, func, a, smooth) = match rng.gen_range(0..10) {
        0 => {
            let p = [2.0, 3.0, 4.0, 1.5, 2.5][rng.gen_range(0..5)];
            let a = lower_end(rng, 0.0, 2.0, 0.2);
            (format!("{k}*t^{p}"), catalog::power(p).unwrap(), a, true)
        }
        1 => {
            let p = [-1.0, -0.5, -2.0][rng.gen_range(0..3)];
            (format!("{k}*t^{p}"), catalog::power(p).unwrap(), rng.gen_range(0.2..2.0), true)
        }
        2 => ("-ln t".into(), catalog::neg_log(), rng.gen_range(0.2..2.0), true),
        3 => ("t ln t".into(), catalog::x_log_x(), lower_end(rng, 0.0, 2.0, 0.2), true),
        4 => ("e^t".into(), catalog::exp(), rng.gen_range(-2.0..2.0), true),
        5 => {
            let a = rng.gen_range(-2.0..2.0);
            let c = a + rng.gen_range(-0.2..1.2) * width;
            (format!("|t - {c}|"), catalog::abs_shift(c), a, false)
        }
        6 => {
            let a = rng.gen_range(-2.0..2.0);
            let c = a + rng.gen_range(-0.2..1.2) * width;
            (format!("max(0, t - {c})"), catalog::hinge(c), a, false)
        }
        7 => ("-sqrt t".into(), catalog::neg_sqrt(), lower_end(rng, 0.0, 2.0, 0.3), true),
        8 => {
            let (s, c) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            (format!("{s}*t + {c}"), catalog::affine(s, 0.0).plus_affine(0.0, c), rng.gen_range(-2.0..2.0), true)
        }
        _ => {
            let a = rng.gen_range(0.2..2.0);
            let c = a + rng.gen_range(0.0..1.0) * width;
            let f = catalog::exp()
                .plus(catalog::abs_shift(c).scale(rng.gen_range(0.1..2.0)).unwrap())
                .plus(catalog::power(-1.0).unwrap())
                .plus_affine(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (format!("e^t + k|t - {c}| + 1/t + affine"), f, a, false)
        }
    };
    Case {
        label: format!("{label} on [{a}, {}]", a + width),
        func: func.scale(k).unwrap(),
        domain: iv(a, a + width),
        smooth,
    }
}

/// A random point strictly inside the domain.
pub fn interior_point(rng: &mut TestRng, domain: Interval) -> f64 {
    loop {
        let x = domain.lo() + rng.gen_range(0.0..1.0) * domain.width();
        if domain.contains_interior(x) {
            return x;
        }
    }
}

/// Random nodes with `n` cells; tags uniform in each cell, sometimes placed
/// on a cell end.
pub fn random_partition(rng: &mut TestRng, domain: Interval, n: usize) -> Partition {
    let mut inner: Vec<f64> = (0..n - 1)
        .map(|_| domain.lo() + rng.gen_range(0.01..0.99) * domain.width())
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut nodes = vec![domain.lo()];
    nodes.extend(inner);
    nodes.push(domain.hi());
    let tags = nodes
        .windows(2)
        .map(|w| match rng.gen_range(0..10) {
            0 => w[0],
            1 => w[1],
            _ => w[0] + rng.gen_range(0.0..1.0) * (w[1] - w[0]),
        })
        .collect();
    Partition::new(nodes, tags).unwrap()
}

/// Tags strictly inside each cell and away from kinks.
pub fn interior_tag_partition(rng: &mut TestRng, domain: Interval, n: usize) -> Partition {
    let p = random_partition(rng, domain, n);
    let nodes = p.nodes().to_vec();
    let tags = nodes
        .windows(2)
        .map(|w| w[0] + rng.gen_range(0.05..0.95) * (w[1] - w[0]))
        .collect();
    Partition::new(nodes, tags).unwrap()
}

pub fn random_distribution(rng: &mut TestRng, n: usize) -> DiscreteDistribution {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DiscreteDistribution::new(raw.iter().map(|w| w / total).collect()).unwrap()
}

/// A nondecreasing density family member, its support, and an independent
/// CDF written out by hand.
pub fn random_density(rng: &mut TestRng, which: usize) -> (DensityFamily, Interval, Box<dyn Fn(f64) -> f64>) {
    match which % 4 {
        0 => {
            let a = rng.gen_range(-3.0..3.0);
            let b = a + rng.gen_range(0.1..4.0);
            (DensityFamily::Uniform, iv(a, b), Box::new(move |x: f64| (x - a) / (b - a)))
        }
        1 => {
            let k = rng.gen_range(0.0..4.0);
            let a = lower_end(rng, 0.0, 2.0, 0.3);
            let b = a + rng.gen_range(0.1..3.0);
            let cdf = move |x: f64| {
                (x.powf(k + 1.0) - a.powf(k + 1.0)) / (b.powf(k + 1.0) - a.powf(k + 1.0))
            };
            (DensityFamily::Power { k }, iv(a, b), Box::new(cdf))
        }
        2 => {
            let r = rng.gen_range(0.1..4.0);
            let a = rng.gen_range(-2.0..2.0);
            let b = a + rng.gen_range(0.1..3.0);
            let cdf = move |x: f64| ((r * x).exp() - (r * a).exp()) / ((r * b).exp() - (r * a).exp());
            (DensityFamily::Exponential { rate: r }, iv(a, b), Box::new(cdf))
        }
        _ => {
            let a = rng.gen_range(-2.0..2.0);
            let b = a + rng.gen_range(0.5..3.0);
            let pieces = rng.gen_range(1..5);
            let mut breaks: Vec<f64> = (0..pieces - 1).map(|_| a + rng.gen_range(0.05..0.95) * (b - a)).collect();
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let mut values: Vec<f64> = (0..=breaks.len()).map(|_| rng.gen_range(0.0..2.0)).collect();
            values.sort_by(f64::total_cmp);
            if values.iter().all(|&v| v == 0.0) {
                values[breaks.len()] = 1.0;
            }
            let mut edges = vec![a];
            edges.extend(breaks.iter().copied());
            edges.push(b);
            let mass: f64 = edges.windows(2).zip(&values).map(|(w, v)| v * (w[1] - w[0])).sum();
            let (e2, v2) = (edges.clone(), values.clone());
            let cdf = move |x: f64| {
                e2.windows(2)
                    .zip(&v2)
                    .map(|(w, v)| v * (x.min(w[1]) - w[0]).max(0.0))
                    .sum::<f64>()
                    / mass
            };
            (DensityFamily::Step { breaks, values }, iv(a, b), Box::new(cdf))
        }
    }
}
