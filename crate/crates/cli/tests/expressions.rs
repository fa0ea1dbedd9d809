use convex_enclose::{ConvexFunction, Interval, Side};
use convex_enclose_cli::expr::{parse_expression, Kind};
use convex_enclose_cli::selftest::{random_source, SMOOTH};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn power_parses_to_a_power_node() {
    let e = parse_expression("t^2").unwrap();
    assert!(matches!(e.kind, Kind::Bin(convex_enclose_cli::expr::BinOp::Pow, _, _)));
    assert_eq!(e.eval(3.0), 9.0);
}

#[test]
fn shifted_abs_has_its_kink_and_both_slopes() {
    let e = parse_expression("abs(t - 1/2)").unwrap();
    assert_eq!(e.kinks(), vec![0.5]);
    assert_eq!(e.one_sided_derivative(0.5, Side::Right), 1.0);
    assert_eq!(e.one_sided_derivative(0.5, Side::Left), -1.0);
}

#[test]
fn square_is_smooth_at_interior_points() {
    let e = parse_expression("t^2").unwrap();
    for side in [Side::Left, Side::Right] {
        assert!((e.one_sided_derivative(0.3, side) - 0.6).abs() < 1e-15);
    }
}

#[test]
fn entropy_kernel_on_its_interval() {
    let e = parse_expression("t*ln(t)").unwrap();
    for t in [0.5, 1.0, 1.7, 2.0] {
        assert!((e.eval(t) - t * t.ln()).abs() < 1e-15);
        assert!((e.one_sided_derivative(t, Side::Right) - (t.ln() + 1.0)).abs() < 1e-14);
    }
}

#[test]
fn max_takes_the_steeper_side_at_a_tie() {
    let e = parse_expression("max(t, 2 - t)").unwrap();
    assert_eq!(e.one_sided_derivative(1.0, Side::Right), 1.0);
    assert_eq!(e.one_sided_derivative(1.0, Side::Left), -1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>(), depth in 1u32..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = random_source(&mut rng, depth);
        let first = parse_expression(&src).unwrap();
        let printed = first.to_string();
        let second = parse_expression(&printed).unwrap();
        prop_assert_eq!(&first, &second, "{} printed as {}", src, printed);
        prop_assert_eq!(second.to_string(), printed);
    }
}

/// Symbolic one-sided derivatives against the sampled estimator at 100 random
/// smooth points per expression.
#[test]
fn symbolic_matches_sampled() {
    let kinked: [(&str, f64, f64, &[f64]); 3] = [
        ("abs(t - 0.3) + t^2", -1.0, 1.0, &[0.3]),
        ("max(exp(t), 2 - t)", -1.0, 1.0, &[]),
        ("max(t, 0)^2 + abs(2*t + 1)", -2.0, 2.0, &[-0.5]),
    ];
    let mut cases: Vec<(&str, f64, f64, &[f64])> = SMOOTH.iter().map(|&(s, a, b)| (s, a, b, &[][..])).collect();
    cases.extend(kinked);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (src, lo, hi, kinks) in cases {
        let e = parse_expression(src).unwrap();
        let g = e.clone();
        let sampled = ConvexFunction::from_fn(Interval::new(lo, hi).unwrap(), src, move |t| g.eval(t));
        let mut checked = 0;
        while checked < 100 {
            let t = rand::Rng::gen_range(&mut rng, lo..hi);
            let near_kink = kinks.iter().chain(e.kinks().iter()).any(|k| (t - k).abs() < 1e-3 * (hi - lo));
            if near_kink {
                continue;
            }
            for side in [Side::Left, Side::Right] {
                let sym = e.one_sided_derivative(t, side);
                let est = sampled.derivative(t, side).unwrap().to_f64();
                assert!(
                    (sym - est).abs() <= 1e-6 * sym.abs().max(1.0),
                    "{src} at {t} ({side:?}): symbolic {sym}, sampled {est}"
                );
            }
            checked += 1;
        }
    }
}

/// At a kink the estimator sees the one-sided limit the symbolic rule gives.
#[test]
fn symbolic_matches_sampled_at_kinks() {
    for (src, k) in [("abs(t - 0.3) + t^2", 0.3), ("max(t, 1 - t)", 0.5), ("abs(2*t + 1)", -0.5)] {
        let e = parse_expression(src).unwrap();
        let g = e.clone();
        let sampled = ConvexFunction::from_fn(Interval::new(-1.0, 1.0).unwrap(), src, move |t| g.eval(t));
        for side in [Side::Left, Side::Right] {
            let sym = e.one_sided_derivative(k, side);
            let est = sampled.derivative(k, side).unwrap().to_f64();
            assert!((sym - est).abs() <= 1e-6, "{src} ({side:?}): {sym} vs {est}");
        }
    }
}
