//! Seeded randomized battery run by `--self-test`.

use convex_enclose::convex::catalog;
use convex_enclose::divergence;
use convex_enclose::oracle;
use convex_enclose::pointwise;
use convex_enclose::quadrature;
use convex_enclose::{ConvexFunction, DiscreteDistribution, DivergenceKernel, Interval, Partition, Side};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::expr::parse_expression;
use crate::output::Report;
use crate::Failure;

pub const SEED_VAR: &str = "CONVEX_ENCLOSE_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed;
const SLACK: f64 = 1e-10;
const DERIVATIVE_TOL: f64 = 1e-6;

pub fn seed_from_env() -> Result<u64, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{SEED_VAR} must be an unsigned integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    cases: usize,
    failures: usize,
    first_failure: Option<String>,
}

impl Check {
    fn run(name: &'static str, cases: usize, mut case: impl FnMut(usize) -> Result<(), String>) -> Check {
        let mut failures = 0;
        let mut first_failure = None;
        for i in 0..cases {
            if let Err(msg) = case(i) {
                failures += 1;
                first_failure.get_or_insert(format!("case {i}: {msg}"));
            }
        }
        Check {
            name,
            cases,
            failures,
            first_failure,
        }
    }
}

pub fn run(seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        Check::run("pointwise_containment", 200, |_| pointwise_case(&mut rng)),
        Check::run("remainder_containment", 100, |_| remainder_case(&mut rng)),
        Check::run("divergence_sandwich", 100, |_| divergence_case(&mut rng)),
        Check::run("expression_round_trip", 200, |_| round_trip_case(&mut rng)),
        Check::run("symbolic_vs_sampled", SMOOTH.len(), |i| derivative_case(&mut rng, i)),
    ];
    let failed: usize = checks.iter().map(|c| c.failures).sum();
    let mut report = Report::new("self-test", json!({ "seed": seed }));
    report.result = json!({ "passed": failed == 0, "failures": failed, "checks": checks });
    report
}

pub fn passed(report: &Report) -> bool {
    report.result["passed"] == json!(true)
}

fn random_function(rng: &mut ChaCha8Rng) -> Result<ConvexFunction, String> {
    let lo = rng.gen_range(0.1..3.0);
    let dom = Interval::new(lo, lo + rng.gen_range(0.1..3.0)).map_err(|e| e.to_string())?;
    let inside = |rng: &mut ChaCha8Rng| rng.gen_range(dom.lo()..dom.hi());
    let shape = match rng.gen_range(0..7) {
        0 => catalog::power(2.0),
        1 => catalog::power(3.0),
        2 => catalog::power(-0.5),
        3 => Ok(catalog::exp()),
        4 => Ok(catalog::neg_log()),
        5 => Ok(catalog::abs_shift(inside(rng))),
        _ => Ok(catalog::hinge(inside(rng))),
    }
    .map_err(|e| e.to_string())?;
    let k = rng.gen_range(0.1..5.0);
    shape
        .scale(k)
        .and_then(|s| s.plus_affine(rng.gen_range(-2.0..2.0), 0.0).on(dom))
        .map_err(|e| e.to_string())
}

fn pointwise_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = random_function(rng)?;
    let dom = f.domain();
    let x = dom.lo() + dom.width() * rng.gen_range(0.01..0.99);
    let enc = pointwise::ostrowski_enclosure(&f, x).map_err(|e| e.to_string())?;
    let r = oracle::reference_integral_auto(&f, dom).map_err(|e| e.to_string())?;
    let gap = r.value - dom.width() * f.eval(x).map_err(|e| e.to_string())?;
    if enc.contains_with_slack(gap, SLACK) {
        Ok(())
    } else {
        Err(format!("{} at x = {x}: gap {gap} outside {enc}", f.describe()))
    }
}

fn remainder_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let f = random_function(rng)?;
    let dom = f.domain();
    let n = rng.gen_range(1..=16);
    let mut inner: Vec<f64> = (1..n).map(|_| rng.gen_range(dom.lo()..dom.hi())).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut nodes = vec![dom.lo()];
    nodes.extend(inner);
    nodes.push(dom.hi());
    let tags = nodes.windows(2).map(|w| rng.gen_range(w[0]..=w[1])).collect();
    let p = Partition::new(nodes, tags).map_err(|e| e.to_string())?;
    let enc = quadrature::remainder_enclosure(&f, &p).map_err(|e| e.to_string())?;
    let r = oracle::reference_integral_auto(&f, dom).map_err(|e| e.to_string())?;
    let rem = r.value - quadrature::riemann_sum(&f, &p).map_err(|e| e.to_string())?;
    if enc.contains_with_slack(rem, SLACK) {
        Ok(())
    } else {
        Err(format!("{} with {} cells: remainder {rem} outside {enc}", f.describe(), p.cells()))
    }
}

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Result<DiscreteDistribution, String> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    DiscreteDistribution::new(w.into_iter().map(|x| x / total).collect()).map_err(|e| e.to_string())
}

fn divergence_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let n = rng.gen_range(2..=8);
    let p = random_distribution(rng, n)?;
    let q = random_distribution(rng, n)?;
    for name in ["chi2", "kl", "tv", "hellinger"] {
        let k = DivergenceKernel::by_name(name).map_err(|e| e.to_string())?;
        let s = divergence::hh_sandwich(&k, &p, &q).map_err(|e| format!("{name}: {e}"))?;
        let gap = divergence::hh_gap_bounds(&k, &p, &q).map_err(|e| format!("{name}: {e}"))?;
        if !gap.contains_with_slack(s.hh - s.lw, SLACK) {
            return Err(format!("{name}: hh - lw = {} outside {gap}", s.hh - s.lw));
        }
    }
    Ok(())
}

/// Random source text over the expression grammar.
pub fn random_source(rng: &mut impl Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..6) {
            0 | 1 => "t".into(),
            2 => "e".into(),
            3 => "pi".into(),
            4 => format!("{}", rng.gen_range(0..100)),
            _ => format!("{}", rng.gen_range(0.0..10.0)),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..9) {
        0 => format!("-{}", random_source(rng, d)),
        1 => format!("({})", random_source(rng, d)),
        2..=6 => {
            let op = ["+", "-", "*", "/", "^"][rng.gen_range(0..5)];
            format!("{} {op} {}", random_source(rng, d), random_source(rng, d))
        }
        7 => format!("max({}, {})", random_source(rng, d), random_source(rng, d)),
        _ => {
            let f = ["abs", "ln", "exp", "sqrt"][rng.gen_range(0..4)];
            format!("{f}({})", random_source(rng, d))
        }
    }
}

fn round_trip_case(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let src = random_source(rng, 5);
    let first = parse_expression(&src).map_err(|e| format!("{src:?}: {e}"))?;
    let printed = first.to_string();
    let second = parse_expression(&printed).map_err(|e| format!("{printed:?}: {e}"))?;
    if first == second {
        Ok(())
    } else {
        Err(format!("{src:?} printed as {printed:?} parses differently"))
    }
}

/// Smooth convex expressions with a domain on which they stay smooth.
pub const SMOOTH: [(&str, f64, f64); 8] = [
    ("t^2", -2.0, 2.0),
    ("exp(t)", -1.0, 2.0),
    ("t*ln(t)", 0.2, 3.0),
    ("-ln(t)", 0.2, 3.0),
    ("1/t", 0.3, 4.0),
    ("-sqrt(t)", 0.2, 4.0),
    ("t^4 - 3*t + 1", -1.0, 1.5),
    ("exp(2*t) + (t - 1)^2", -1.0, 1.0),
];

fn derivative_case(rng: &mut ChaCha8Rng, i: usize) -> Result<(), String> {
    let (src, lo, hi) = SMOOTH[i];
    let expr = parse_expression(src).map_err(|e| e.to_string())?;
    let dom = Interval::new(lo, hi).map_err(|e| e.to_string())?;
    let sampled_expr = expr.clone();
    let sampled = ConvexFunction::from_fn(dom, src, move |t| sampled_expr.eval(t));
    for _ in 0..100 {
        let t = rng.gen_range(lo..hi);
        for side in [Side::Right, Side::Left] {
            let symbolic = expr.one_sided_derivative(t, side);
            let est = sampled
                .derivative(t, side)
                .map_err(|e| e.to_string())?
                .to_f64();
            if (symbolic - est).abs() > DERIVATIVE_TOL * symbolic.abs().max(1.0) {
                return Err(format!("{src} at t = {t} ({}): symbolic {symbolic}, sampled {est}", side.name()));
            }
        }
    }
    Ok(())
}
