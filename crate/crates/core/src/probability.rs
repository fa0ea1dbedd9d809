//! CDF enclosures for random variables on `[a, b]` whose density is
//! nondecreasing.
//!
//! Such a density makes the CDF `F(x) = ∫_a^x f` convex, and
//! `∫_a^b F = b - E(X)`, so the pointwise Ostrowski bounds applied to `F`
//! turn into two-sided bounds on `F(x)` itself.

use std::fmt;
use std::sync::Arc;

use crate::convex::{estimate, ConvexFunction, ConvexOracle, Side};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::interval::Interval;
use crate::oracle::{adaptive_simpson_auto, simpson_integral_auto};
use crate::pointwise::{ostrowski_lower, ostrowski_upper};

/// Allowed deviation of `∫ pdf` from 1.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Allowed disagreement between the stored expectation and `b - ∫F`.
pub const EXPECTATION_TOL: f64 = 1e-8;
/// Grid size for the monotonicity check of a density.
const MONOTONE_GRID: usize = 513;

/// Source of density values on the support.
pub trait DensityOracle: Send + Sync + fmt::Debug {
    fn eval(&self, t: f64) -> f64;

    /// Exact one-sided limit `f(t+)` or `f(t-)`, if known.
    fn one_sided_limit(&self, _t: f64, _side: Side) -> Option<f64> {
        None
    }

    /// Closed-form CDF, if known.
    fn cdf(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Closed-form expectation, if known.
    fn mean(&self) -> Option<f64> {
        None
    }

    /// Jump points of the density.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn describe(&self) -> String {
        format!("{self:?}")
    }
}

/// Built-in nondecreasing densities; each is normalized over its support.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityFamily {
    Uniform,
    /// Proportional to `t^k`, `k >= 0`, on a support inside `[0, inf)`.
    Power { k: f64 },
    /// Proportional to `exp(rate * t)`, `rate > 0`.
    Exponential { rate: f64 },
    /// Piecewise constant: `values[j]` on the j-th piece between consecutive
    /// `breaks` (interior points). Right-continuous at the breaks.
    Step { breaks: Vec<f64>, values: Vec<f64> },
}

/// A [`DensityFamily`] member on a concrete support.
#[derive(Clone, Debug, PartialEq)]
pub struct CatalogDensity {
    support: Interval,
    family: DensityFamily,
    norm: f64,
}

impl CatalogDensity {
    pub fn new(family: DensityFamily, support: Interval) -> Result<Self> {
        let (a, b) = (support.lo(), support.hi());
        let norm = match &family {
            DensityFamily::Uniform => b - a,
            DensityFamily::Power { k } => {
                if !(*k >= 0.0 && k.is_finite()) || a < 0.0 {
                    return Err(Error::InvalidDensity(format!(
                        "t^{k} needs k >= 0 and a support inside [0, inf)"
                    )));
                }
                (b.powf(k + 1.0) - a.powf(k + 1.0)) / (k + 1.0)
            }
            DensityFamily::Exponential { rate } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(Error::InvalidDensity(format!(
                        "exponential rate must be positive, got {rate}"
                    )));
                }
                (rate * (b - a)).exp_m1() / rate
            }
            DensityFamily::Step { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::InvalidDensity(format!(
                        "{} breaks need {} values, got {}",
                        breaks.len(),
                        breaks.len() + 1,
                        values.len()
                    )));
                }
                let mut edges = vec![a];
                edges.extend(breaks.iter().copied());
                edges.push(b);
                if edges.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidDensity(
                        "step breaks must increase strictly inside the support".into(),
                    ));
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
                    || values.windows(2).any(|w| w[1] < w[0])
                {
                    return Err(Error::InvalidDensity(
                        "step values must be nonnegative and nondecreasing".into(),
                    ));
                }
                edges
                    .windows(2)
                    .zip(values)
                    .map(|(w, v)| v * (w[1] - w[0]))
                    .sum()
            }
        };
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidDensity(format!("cannot normalize (mass {norm})")));
        }
        Ok(CatalogDensity {
            support,
            family,
            norm,
        })
    }

    fn edges(&self) -> Vec<f64> {
        let mut edges = vec![self.support.lo()];
        if let DensityFamily::Step { breaks, .. } = &self.family {
            edges.extend(breaks.iter().copied());
        }
        edges.push(self.support.hi());
        edges
    }

    fn step_value(&self, t: f64, side: Side) -> f64 {
        let DensityFamily::Step { breaks, values } = &self.family else {
            unreachable!()
        };
        let idx = match side {
            Side::Right => breaks.iter().take_while(|&&c| c <= t).count(),
            Side::Left => breaks.iter().take_while(|&&c| c < t).count(),
        };
        values[idx] / self.norm
    }
}

impl DensityOracle for CatalogDensity {
    fn eval(&self, t: f64) -> f64 {
        let a = self.support.lo();
        match &self.family {
            DensityFamily::Uniform => 1.0 / self.norm,
            DensityFamily::Power { k } => t.powf(*k) / self.norm,
            DensityFamily::Exponential { rate } => (rate * (t - a)).exp() / self.norm,
            DensityFamily::Step { .. } => self.step_value(t, Side::Right),
        }
    }

    fn one_sided_limit(&self, t: f64, side: Side) -> Option<f64> {
        Some(match &self.family {
            DensityFamily::Step { .. } => self.step_value(t, side),
            _ => self.eval(t),
        })
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        let a = self.support.lo();
        let x = x.clamp(a, self.support.hi());
        Some(match &self.family {
            DensityFamily::Uniform => (x - a) / self.norm,
            DensityFamily::Power { k } => {
                (x.powf(k + 1.0) - a.powf(k + 1.0)) / ((k + 1.0) * self.norm)
            }
            DensityFamily::Exponential { rate } => (rate * (x - a)).exp_m1() / (rate * self.norm),
            DensityFamily::Step { values, .. } => self
                .edges()
                .windows(2)
                .zip(values)
                .map(|(w, v)| v * (x.min(w[1]) - w[0]).max(0.0))
                .sum::<f64>()
                / self.norm,
        })
    }

    fn mean(&self) -> Option<f64> {
        let (a, b) = (self.support.lo(), self.support.hi());
        Some(match &self.family {
            DensityFamily::Uniform => 0.5 * (a + b),
            DensityFamily::Power { k } => {
                (b.powf(k + 2.0) - a.powf(k + 2.0)) / ((k + 2.0) * self.norm)
            }
            DensityFamily::Exponential { rate } => {
                // E = b - ∫F = b - 1/r + (b - a)/(e^{r(b-a)} - 1)
                b - 1.0 / rate + (b - a) / (rate * (b - a)).exp_m1()
            }
            DensityFamily::Step { values, .. } => {
                self.edges()
                    .windows(2)
                    .zip(values)
                    .map(|(w, v)| v * 0.5 * (w[1] * w[1] - w[0] * w[0]))
                    .sum::<f64>()
                    / self.norm
            }
        })
    }

    fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            DensityFamily::Step { breaks, .. } => breaks.clone(),
            _ => Vec::new(),
        }
    }

    fn describe(&self) -> String {
        let shape = match &self.family {
            DensityFamily::Uniform => "1".to_string(),
            DensityFamily::Power { k } => format!("t^{k}"),
            DensityFamily::Exponential { rate } => format!("exp({rate}*(t - {}))", self.support.lo()),
            DensityFamily::Step { breaks, values } => format!("step(breaks {breaks:?}, values {values:?})"),
        };
        format!("{shape} / {} on [{}, {}]", self.norm, self.support.lo(), self.support.hi())
    }
}

struct FnDensity<F> {
    f: F,
    label: String,
}

impl<F> fmt::Debug for FnDensity<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnDensity({})", self.label)
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> DensityOracle for FnDensity<F> {
    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// The CDF of a model, seen as a convex function.
#[derive(Debug)]
struct CdfOracle {
    density: Arc<dyn DensityOracle>,
    support: Interval,
}

impl CdfOracle {
    fn limit(&self, t: f64, side: Side) -> f64 {
        if let Some(v) = self.density.one_sided_limit(t, side) {
            return v;
        }
        let d = &self.density;
        let g = |s: f64| d.eval(s);
        estimate::one_sided_limit(&g, &self.support, t, side)
            .value
            .to_f64()
    }
}

impl ConvexOracle for CdfOracle {
    fn eval(&self, x: f64) -> f64 {
        if let Some(v) = self.density.cdf(x) {
            return v;
        }
        if x <= self.support.lo() {
            return 0.0;
        }
        let d = &self.density;
        let g = |s: f64| d.eval(s);
        let iv = Interval::new(self.support.lo(), x.min(self.support.hi()))
            .expect("x is inside the support");
        adaptive_simpson_auto(&g, iv, &self.density.breakpoints())
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    fn one_sided_derivative(&self, t: f64, side: Side) -> Option<ExtendedReal> {
        ExtendedReal::from_f64(self.limit(t, side))
    }

    fn has_closed_form_derivatives(&self) -> bool {
        self.density
            .one_sided_limit(self.support.midpoint(), Side::Right)
            .is_some()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.density.breakpoints()
    }

    fn describe(&self) -> String {
        format!("cdf of {}", self.density.describe())
    }
}

/// A random variable on `[a, b]` with a nondecreasing density.
#[derive(Clone, Debug)]
pub struct RandomVariableModel {
    support: Interval,
    density: Arc<dyn DensityOracle>,
    expectation: f64,
    cdf: ConvexFunction,
}

impl RandomVariableModel {
    /// Validates the density (nonnegative, nondecreasing on a grid, unit
    /// mass) and derives the CDF and expectation.
    pub fn new(support: Interval, density: Arc<dyn DensityOracle>) -> Result<Self> {
        let (a, b) = (support.lo(), support.hi());
        let step = support.width() / (MONOTONE_GRID - 1) as f64;
        let grid: Vec<f64> = (0..MONOTONE_GRID)
            .map(|i| if i + 1 == MONOTONE_GRID { b } else { a + step * i as f64 })
            .collect();
        let values: Vec<f64> = grid.iter().map(|&t| density.eval(t)).collect();
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidDensity(format!(
                "density is negative or not finite at t = {}",
                grid[i]
            )));
        }
        let scale = values.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        if let Some(i) = values
            .windows(2)
            .position(|w| w[1] < w[0] - 1e-12 * scale)
        {
            return Err(Error::InvalidDensity(format!(
                "density decreases between t = {} and t = {}",
                grid[i],
                grid[i + 1]
            )));
        }

        let g = |t: f64| density.eval(t);
        let breaks = density.breakpoints();
        let mass = match density.cdf(b) {
            Some(m) => m,
            None => adaptive_simpson_auto(&g, support, &breaks)?.value,
        };
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDensity(format!(
                "density integrates to {mass}, not 1"
            )));
        }
        let expectation = match density.mean() {
            Some(m) => m,
            None => {
                let tg = |t: f64| t * density.eval(t);
                adaptive_simpson_auto(&tg, support, &breaks)?.value
            }
        };

        let cdf = ConvexFunction::new(
            support,
            Arc::new(CdfOracle {
                density: Arc::clone(&density),
                support,
            }),
        )?;
        Ok(RandomVariableModel {
            support,
            density,
            expectation,
            cdf,
        })
    }

    pub fn from_family(family: DensityFamily, support: Interval) -> Result<Self> {
        let density = CatalogDensity::new(family, support)?;
        RandomVariableModel::new(support, Arc::new(density))
    }

    pub fn from_fn<F>(support: Interval, label: impl Into<String>, pdf: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RandomVariableModel::new(
            support,
            Arc::new(FnDensity {
                f: pdf,
                label: label.into(),
            }),
        )
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn expectation(&self) -> f64 {
        self.expectation
    }

    /// The convex CDF `F(x) = ∫_a^x f`.
    pub fn cdf(&self) -> &ConvexFunction {
        &self.cdf
    }

    pub fn density(&self) -> &Arc<dyn DensityOracle> {
        &self.density
    }

    pub fn describe(&self) -> String {
        self.density.describe()
    }
}

/// Encloses `b - E(X) - (b-a)F(x)` in
/// `[(1/2)((b-x)^2 f(x+) - (x-a)^2 f(x-)), (1/2)((b-x)^2 f(b-) - (x-a)^2 f(a+))]`.
/// At `x = a` or `x = b` only the upper line holds and the lower bound is
/// `-inf`.
pub fn cdf_gap_enclosure(m: &RandomVariableModel, x: f64) -> Result<Enclosure> {
    m.support.check(x)?;
    let upper = ostrowski_upper(&m.cdf, x)?;
    let lower = if m.support.contains_interior(x) {
        ostrowski_lower(&m.cdf, x)?
    } else {
        ExtendedReal::NegInf
    };
    Enclosure::new(lower, upper)
}

/// `F(x) ∈ [(b - E - U)/(b-a), (b - E - L)/(b-a)]` with `[L, U]` from
/// [`cdf_gap_enclosure`], clipped to `[0, 1]`.
pub fn cdf_enclosure(m: &RandomVariableModel, x: f64) -> Result<Enclosure> {
    let gap = cdf_gap_enclosure(m, x)?;
    let (b, w) = (m.support.hi(), m.support.width());
    let base = ExtendedReal::Finite(b - m.expectation);
    let lo = base.checked_sub(gap.hi)?.scale(1.0 / w);
    let hi = base.checked_sub(gap.lo)?.scale(1.0 / w);
    Ok(Enclosure::new(lo, hi)?.clip(0.0, 1.0))
}

/// Encloses `Pr(X <= (a+b)/2)` in
/// `[(b-E)/(b-a) - (1/8)(b-a)(f(b-) - f(a+)), (b-E)/(b-a) - (1/8)(b-a)(f(m+) - f(m-))]`,
/// which is [`cdf_enclosure`] at the midpoint.
pub fn median_point_probability(m: &RandomVariableModel) -> Result<Enclosure> {
    cdf_enclosure(m, m.support.midpoint())
}

/// `b - ∫_a^b F`, checked against the stored expectation.
pub fn expectation_from_cdf(m: &RandomVariableModel) -> Result<f64> {
    let integral = match m.density.cdf(m.support.lo()) {
        // Closed-form CDF: integrate it directly with Simpson.
        Some(_) => simpson_integral_auto(&m.cdf, m.support)?.value,
        None => {
            let f = &m.cdf;
            let g = |x: f64| f.eval_unchecked(x);
            adaptive_simpson_auto(&g, m.support, &m.density.breakpoints())?.value
        }
    };
    let recomputed = m.support.hi() - integral;
    if (recomputed - m.expectation).abs() > EXPECTATION_TOL {
        return Err(Error::InconsistentModel {
            stored: m.expectation,
            recomputed,
        });
    }
    Ok(recomputed)
}
