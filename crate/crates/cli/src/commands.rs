//! One function per subcommand, each building a [`Report`].

use std::sync::Arc;

use convex_enclose::convex::DEFAULT_CONVEXITY_TOL;
use convex_enclose::divergence::{self, KERNEL_NAMES};
use convex_enclose::means::{self, SANDWICH_SLACK};
use convex_enclose::oracle;
use convex_enclose::pointwise;
use convex_enclose::probability::{self, EXPECTATION_TOL};
use convex_enclose::quadrature;
use convex_enclose::{
    ConvexFunction, DensityFamily, DiscreteDistribution, DivergenceKernel, Enclosure, Error, ExtendedReal,
    Interval, RandomVariableModel,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    Command, DivergenceArgs, EncloseArgs, FnArgs, IntegrateArgs, MeansArgs, ProbArgs, SpecialMeansArgs,
};
use crate::expr::{parse_expression, Expr, ExprDensity, ExprOracle};
use crate::output::Report;
use crate::Failure;

/// Sample count for the convexity check of user functions.
pub const CONVEXITY_SAMPLES: usize = 257;
/// Relative slack when cross-checking against the reference integrator.
pub const ORACLE_SLACK: f64 = 1e-10;
/// Tolerance of reference integrals requested by `--oracle`.
const ORACLE_TOL: f64 = 1e-12;

pub fn dispatch(cmd: &Command, with_oracle: bool) -> Result<Report, Failure> {
    match cmd {
        Command::Enclose(a) => enclose(a, with_oracle),
        Command::Integrate(a) => integrate(a, with_oracle),
        Command::Means(a) => means(a, with_oracle),
        Command::SpecialMeans(a) => special_means(a),
        Command::Prob(a) => prob(a, with_oracle),
        Command::Divergence(a) => divergence(a, with_oracle),
    }
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn pair(e: &Enclosure) -> Value {
    json!([e.lo, e.hi])
}

fn parse(src: &str, flag: &str) -> Result<Expr, Failure> {
    parse_expression(src).map_err(|e| Failure::Input(format!("cannot parse {flag}\n{}", e.render(src))))
}

/// A user function together with the oracle that records sampled fallbacks.
struct Loaded {
    f: ConvexFunction,
    oracle: Arc<ExprOracle>,
}

fn load(args: &FnArgs, report: &mut Report) -> Result<Loaded, Failure> {
    let expr = parse(&args.func, "--fn")?;
    let dom = Interval::new(args.a, args.b)?;
    let oracle = Arc::new(ExprOracle::new(expr));
    let f = ConvexFunction::new(dom, oracle.clone())?;
    let conv = f.check_convexity(CONVEXITY_SAMPLES, DEFAULT_CONVEXITY_TOL)?;
    report.certificates["function"] = json!(oracle.expr().to_string());
    report.certificates["convexity"] = value(&conv);
    Ok(Loaded { f, oracle })
}

impl Loaded {
    fn finish(&self, report: &mut Report) {
        let sampled = self.oracle.fell_back();
        report.certificates["derivatives"] = json!(if sampled { "sampled" } else { "symbolic" });
        report.certificates["certified"] = json!(!sampled);
        if sampled {
            report.warnings.push(format!(
                "some one-sided derivatives of {} were estimated from samples, not computed symbolically",
                self.oracle.expr()
            ));
        }
    }
}

fn check_contained(what: &str, e: &Enclosure, v: f64) -> Result<(), Failure> {
    if e.contains_with_slack(v, ORACLE_SLACK) {
        Ok(())
    } else {
        Err(Failure::Numerical(format!(
            "reference value {v} of the {what} lies outside the computed bounds {e}"
        )))
    }
}

pub fn enclose(args: &EncloseArgs, with_oracle: bool) -> Result<Report, Failure> {
    let mut report = Report::new("enclose", value(args));
    let loaded = load(&args.f, &mut report)?;
    let f = &loaded.f;
    let dom = f.domain();
    let x = args.x;

    let upper = pointwise::ostrowski_upper(f, x)?;
    let lower = if dom.contains_interior(x) {
        pointwise::ostrowski_lower(f, x)?
    } else {
        report
            .warnings
            .push(format!("x = {x} is an endpoint; only the upper bound applies"));
        ExtendedReal::NegInf
    };
    let gap = Enclosure::new(lower, upper)?;
    let hh = pointwise::hh_refinement(f)?;

    let classical = match pointwise::classical_ostrowski_bound(f, x) {
        Ok(v) => json!(v),
        Err(Error::UnboundedSlope) => {
            report
                .warnings
                .push("the classical bound needs finite endpoint slopes".into());
            Value::Null
        }
        Err(e) => return Err(e.into()),
    };
    let best = match pointwise::best_evaluation_point(f) {
        Ok(p) => value(&p),
        Err(Error::UnboundedSlope) => Value::Null,
        Err(e) => return Err(e.into()),
    };

    report.result = json!({
        "x": x,
        "lower": lower,
        "upper": upper,
        "hh_lower": hh.lo,
        "hh_upper": hh.hi,
        "classical_bound": classical,
        "best_point": best,
        "endpoint_slopes": value(&f.endpoint_slopes()),
    });
    if let Some(h) = args.h {
        let w = pointwise::window_enclosure(f, x, h)?;
        report.result["window"] = json!({ "h": h, "lower": w.lo, "upper": w.hi });
    }

    if with_oracle {
        let r = oracle::reference_integral(f, dom, ORACLE_TOL)?;
        let fx = f.eval(x)?;
        let ostrowski_gap = r.value - dom.width() * fx;
        let hh_gap = r.value / dom.width() - f.eval(dom.midpoint())?;
        check_contained("Ostrowski difference", &gap, ostrowski_gap)?;
        check_contained("midpoint gap", &hh, hh_gap)?;
        report.certificates["oracle"] = json!({
            "integral": value(&r),
            "ostrowski_gap": ostrowski_gap,
            "hh_gap": hh_gap,
            "contained": true,
        });
    }
    loaded.finish(&mut report);
    Ok(report)
}

pub fn integrate(args: &IntegrateArgs, with_oracle: bool) -> Result<Report, Failure> {
    let mut report = Report::new("integrate", value(args));
    let loaded = load(&args.f, &mut report)?;
    let f = &loaded.f;
    let res = match quadrature::integrate_adaptive(f, args.tol, args.max_cells) {
        Ok(r) => r,
        Err(Error::BudgetExceeded { max_cells, best }) => {
            let iv = best.certified_interval();
            return Err(Failure::Numerical(format!(
                "no certificate of width {} within {max_cells} cells; best interval {iv} (width {}) at {} cells",
                args.tol,
                iv.width(),
                best.cells
            )));
        }
        Err(e) => return Err(e.into()),
    };
    let iv = res.certified_interval();
    report.result = json!({
        "estimate": res.estimate,
        "remainder": pair(&res.remainder),
        "interval": pair(&iv),
        "width": iv.width(),
        "cells": res.cells,
    });
    if with_oracle {
        let r = oracle::reference_integral(f, f.domain(), ORACLE_TOL)?;
        check_contained("integral", &iv, r.value)?;
        report.certificates["oracle"] = json!({ "integral": value(&r), "contained": true });
    }
    loaded.finish(&mut report);
    Ok(report)
}

pub fn means(args: &MeansArgs, with_oracle: bool) -> Result<Report, Failure> {
    let mut report = Report::new("means", value(args));
    let loaded = load(&args.f, &mut report)?;
    let f = &loaded.f;
    let sub = Interval::new(args.c, args.d)?;
    let mc = means::mean_comparison(f, sub)?;
    let holds = mc.holds(SANDWICH_SLACK);
    report.result = json!({
        "lower": mc.lower,
        "gap": mc.gap,
        "upper": mc.upper,
        "holds": holds,
    });
    if !holds {
        return Err(Failure::Numerical(format!(
            "mean gap {} escapes [{}, {}]",
            mc.gap, mc.lower, mc.upper
        )));
    }
    if with_oracle {
        let outer = oracle::simpson_integral(f, f.domain(), ORACLE_TOL)?.value / f.domain().width();
        let inner = oracle::simpson_integral(f, sub, ORACLE_TOL)?.value / sub.width();
        let gap = outer - inner;
        check_contained("mean gap", &Enclosure::new(ExtendedReal::Finite(mc.lower), mc.upper)?, gap)?;
        report.certificates["oracle"] = json!({ "simpson_gap": gap, "contained": true });
    }
    loaded.finish(&mut report);
    Ok(report)
}

pub fn special_means(args: &SpecialMeansArgs) -> Result<Report, Failure> {
    let mut report = Report::new("special-means", value(args));
    report.result = value(&means::special_means(args.a, args.b, args.p)?);
    if let (Some(c), Some(d)) = (args.c, args.d) {
        let checks = means::verify_mean_inequalities(args.a, args.b, c, d, args.p)?;
        report.certificates["inequalities"] = value(&checks);
    }
    Ok(report)
}

fn require(v: Option<f64>, flag: &str, density: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Input(format!("the {density} density needs {flag}")))
}

fn build_model(args: &ProbArgs) -> Result<RandomVariableModel, Failure> {
    let support = Interval::new(args.a, args.b)?;
    let family = match args.density.as_str() {
        "uniform" => DensityFamily::Uniform,
        "power" => DensityFamily::Power {
            k: require(args.k, "--k", "power")?,
        },
        "exponential" => DensityFamily::Exponential {
            rate: require(args.rate, "--rate", "exponential")?,
        },
        "step" => DensityFamily::Step {
            breaks: args.breaks.clone(),
            values: args.values.clone(),
        },
        src => {
            let expr = parse(src, "--density")?;
            return Ok(RandomVariableModel::new(support, Arc::new(ExprDensity(expr)))?);
        }
    };
    Ok(RandomVariableModel::from_family(family, support)?)
}

pub fn prob(args: &ProbArgs, with_oracle: bool) -> Result<Report, Failure> {
    let mut report = Report::new("prob", value(args));
    let model = build_model(args)?;
    let support = model.support();
    report.certificates["density"] = json!(model.describe());

    let median = probability::median_point_probability(&model)?;
    report.result = json!({
        "expectation": model.expectation(),
        "median_probability": pair(&median),
    });
    if (support.width() - 1.0).abs() > f64::EPSILON {
        report.warnings.push(format!(
            "median bounds use the form divided by b - a = {}; without the divisor they only hold for unit-width supports",
            support.width()
        ));
    }
    if let Some(x) = args.x {
        let gap = probability::cdf_gap_enclosure(&model, x)?;
        let cdf = probability::cdf_enclosure(&model, x)?;
        report.result["x"] = json!(x);
        report.result["cdf"] = pair(&cdf);
        report.result["gap"] = pair(&gap);
    }

    if with_oracle {
        let from_cdf = probability::expectation_from_cdf(&model)?;
        let diff = (from_cdf - model.expectation()).abs();
        if diff > EXPECTATION_TOL * model.expectation().abs().max(1.0) {
            return Err(Failure::Numerical(format!(
                "expectation {} disagrees with b - ∫F = {from_cdf}",
                model.expectation()
            )));
        }
        let mut oracle_cert = json!({ "expectation_from_cdf": from_cdf });
        if let Some(x) = args.x.filter(|&x| x > support.lo()) {
            let density = model.density();
            let g = |t: f64| density.eval(t);
            let fx = oracle::adaptive_simpson(&g, Interval::new(support.lo(), x)?, &density.breakpoints(), ORACLE_TOL)?;
            check_contained("CDF", &probability::cdf_enclosure(&model, x)?, fx.value)?;
            oracle_cert["cdf_at_x"] = json!(fx.value);
        }
        oracle_cert["contained"] = json!(true);
        report.certificates["oracle"] = oracle_cert;
    }
    Ok(report)
}

fn kernel(src: &str) -> Result<DivergenceKernel, Failure> {
    if KERNEL_NAMES.contains(&src) {
        return Ok(DivergenceKernel::by_name(src)?);
    }
    let expr = parse(src, "--kernel")?;
    Ok(DivergenceKernel::new(expr.to_string(), Arc::new(ExprOracle::new(expr)))?)
}

pub fn divergence(args: &DivergenceArgs, with_oracle: bool) -> Result<Report, Failure> {
    let mut report = Report::new("divergence", value(args));
    let k = kernel(&args.kernel)?;
    let p = DiscreteDistribution::new(args.p.clone())?;
    let q = DiscreteDistribution::new(args.q.clone())?;

    let sandwich = divergence::hh_sandwich(&k, &p, &q)?;
    let gap = divergence::hh_gap_bounds(&k, &p, &q)?;
    report.result = json!({
        "csiszar": divergence::csiszar_divergence(&k, &p, &q)?,
        "lin_wong": sandwich.lw,
        "hh": sandwich.hh,
        "gap_bounds": pair(&gap),
    });
    report.certificates["sandwich"] = value(&sandwich);
    check_contained("HH minus Lin-Wong gap", &gap, sandwich.hh - sandwich.lw)?;

    if with_oracle {
        let brute = oracle::brute_force_hh(&k, &p, &q, ORACLE_TOL)?;
        let diff = (brute - sandwich.hh).abs();
        if diff > 1e-9 * sandwich.hh.abs().max(1.0) {
            return Err(Failure::Numerical(format!(
                "HH divergence {} disagrees with the term-by-term reference {brute}",
                sandwich.hh
            )));
        }
        report.certificates["oracle"] = json!({ "brute_force_hh": brute, "agrees": true });
    }
    Ok(report)
}
