//! Csiszár, Lin-Wong and Hermite-Hadamard divergences between finite
//! discrete distributions.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::convex::{catalog, ConvexFunction, ConvexOracle, Side, DEFAULT_CONVEXITY_TOL};
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::interval::Interval;
use crate::quadrature::{integrate_adaptive, DEFAULT_MAX_CELLS};

/// Allowed deviation of the total mass from 1.
pub const MASS_TOL: f64 = 1e-12;
/// Allowed `|f(1)|` for a kernel.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Relative slack when asserting `lw <= hh <= csiszar / 2`.
pub const SANDWICH_SLACK: f64 = 1e-10;
/// Below this `|r - 1|` the closed-form inner mean loses too many digits and
/// composite Simpson takes over.
const NEAR_ONE: f64 = 1e-3;
/// Tolerance for inner integrals without a closed form.
const INNER_TOL: f64 = 1e-12;
/// Range on which a kernel's convexity is sampled.
const KERNEL_CHECK_RANGE: (f64, f64) = (0.01, 100.0);

/// Strictly positive weights summing to 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no weights".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
        {
            return Err(Error::InvalidDistribution(format!(
                "weight {i} is {w}; all weights must be strictly positive"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(DiscreteDistribution { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// A convex function on `(0, inf)` with `f(1) = 0`.
#[derive(Clone)]
pub struct DivergenceKernel {
    name: String,
    oracle: Arc<dyn ConvexOracle>,
}

impl fmt::Debug for DivergenceKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DivergenceKernel({}: {})", self.name, self.oracle.describe())
    }
}

/// Names accepted by [`DivergenceKernel::by_name`].
pub const KERNEL_NAMES: [&str; 5] = ["chi2", "kl", "tv", "reverse-kl", "hellinger"];

impl DivergenceKernel {
    /// Checks `f(1) = 0` and samples convexity on `[0.01, 100]`.
    pub fn new(name: impl Into<String>, oracle: Arc<dyn ConvexOracle>) -> Result<Self> {
        let name = name.into();
        let at_one = oracle.eval(1.0);
        if !(at_one.abs() <= NORMALIZATION_TOL) {
            return Err(Error::InvalidKernel(format!(
                "{name}: f(1) = {at_one}, expected 0"
            )));
        }
        let range = Interval::new(KERNEL_CHECK_RANGE.0, KERNEL_CHECK_RANGE.1)?;
        ConvexFunction::new(range, Arc::clone(&oracle))?
            .check_convexity(257, DEFAULT_CONVEXITY_TOL)?;
        Ok(DivergenceKernel { name, oracle })
    }

    /// `chi2 = (t-1)^2`, `kl = t ln t`, `tv = |t-1|`,
    /// `reverse-kl = -ln t + t - 1`, `hellinger = (sqrt t - 1)^2`.
    pub fn by_name(name: &str) -> Result<Self> {
        let f = match name {
            "chi2" => catalog::power(2.0)?.plus_affine(-2.0, 1.0),
            "kl" => catalog::x_log_x(),
            "tv" => catalog::abs_shift(1.0),
            "reverse-kl" => catalog::neg_log().plus_affine(1.0, -1.0),
            "hellinger" => catalog::neg_sqrt().scale(2.0)?.plus_affine(1.0, 1.0),
            _ => {
                return Err(Error::InvalidKernel(format!(
                    "unknown kernel '{name}' (expected one of {})",
                    KERNEL_NAMES.join(", ")
                )))
            }
        };
        DivergenceKernel::new(name, f.into_oracle())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn oracle(&self) -> &Arc<dyn ConvexOracle> {
        &self.oracle
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.oracle.eval(t)
    }

    /// The kernel restricted to a compact interval inside `(0, inf)`.
    pub fn on(&self, domain: Interval) -> Result<ConvexFunction> {
        ConvexFunction::new(domain, Arc::clone(&self.oracle))
    }

    /// Mean of `f` over the segment between 1 and `r`; `f(1) = 0` at `r = 1`.
    fn inner_mean(&self, r: f64) -> Result<f64> {
        if r == 1.0 {
            return Ok(0.0);
        }
        let (lo, hi) = (r.min(1.0), r.max(1.0));
        let iv = Interval::new(lo, hi)?;
        if (r - 1.0).abs() > NEAR_ONE {
            if let (Some(fr), Some(f1)) = (self.oracle.antiderivative(r), self.oracle.antiderivative(1.0)) {
                return Ok((fr - f1) / (r - 1.0));
            }
        }
        if (r - 1.0).abs() <= NEAR_ONE {
            return Ok(self.composite_simpson(iv) / iv.width());
        }
        let f = self.on(iv)?;
        let res = match integrate_adaptive(&f, INNER_TOL, DEFAULT_MAX_CELLS) {
            Ok(r) => r,
            Err(Error::BudgetExceeded { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        let mid = 0.5 * (res.remainder.lo.to_f64() + res.remainder.hi.to_f64());
        Ok((res.estimate + mid) / iv.width())
    }

    /// Eight-panel composite Simpson per smooth piece, for short segments.
    fn composite_simpson(&self, iv: Interval) -> f64 {
        let mut cuts = vec![iv.lo()];
        let mut inner: Vec<f64> = self
            .oracle
            .breakpoints()
            .into_iter()
            .filter(|&c| iv.contains_interior(c))
            .collect();
        inner.sort_by(f64::total_cmp);
        cuts.extend(inner);
        cuts.push(iv.hi());
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let n = 8;
            let h = (w[1] - w[0]) / n as f64;
            for k in 0..n {
                let a = w[0] + h * k as f64;
                let b = if k + 1 == n { w[1] } else { a + h };
                total += (b - a) / 6.0
                    * (self.eval(a) + 4.0 * self.eval(0.5 * (a + b)) + self.eval(b));
            }
        }
        total
    }
}

fn check_pair(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.len() == q.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(p.len(), q.len()))
    }
}

/// `Σ p_i f(q_i / p_i)`.
pub fn csiszar_divergence(f: &DivergenceKernel, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_pair(p, q)?;
    Ok(p.weights
        .iter()
        .zip(&q.weights)
        .map(|(&pi, &qi)| pi * f.eval(qi / pi))
        .sum())
}

/// `Σ p_i f((p_i + q_i) / (2 p_i))`.
pub fn lin_wong_divergence(f: &DivergenceKernel, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_pair(p, q)?;
    Ok(p.weights
        .iter()
        .zip(&q.weights)
        .map(|(&pi, &qi)| pi * f.eval((pi + qi) / (2.0 * pi)))
        .sum())
}

/// `Σ p_i^2 / (q_i - p_i) ∫_1^{q_i/p_i} f`, i.e. `Σ p_i` times the mean of `f`
/// between 1 and `q_i / p_i`; atoms with `q_i = p_i` contribute 0.
pub fn hh_divergence(f: &DivergenceKernel, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    check_pair(p, q)?;
    let mut total = 0.0;
    for (&pi, &qi) in p.weights.iter().zip(&q.weights) {
        if pi != qi {
            total += pi * f.inner_mean(qi / pi)?;
        }
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HhSandwich {
    pub lw: f64,
    pub hh: f64,
    pub half_csiszar: f64,
}

/// `(lw, hh, csiszar / 2)`, asserting `lw <= hh <= csiszar / 2`.
pub fn hh_sandwich(f: &DivergenceKernel, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<HhSandwich> {
    let s = HhSandwich {
        lw: lin_wong_divergence(f, p, q)?,
        hh: hh_divergence(f, p, q)?,
        half_csiszar: 0.5 * csiszar_divergence(f, p, q)?,
    };
    let slack = SANDWICH_SLACK * s.half_csiszar.abs().max(1.0);
    if s.lw > s.hh + slack || s.hh > s.half_csiszar + slack {
        return Err(Error::InternalInconsistency(format!(
            "{}: expected lw <= hh <= csiszar/2, got {} <= {} <= {}",
            f.name, s.lw, s.hh, s.half_csiszar
        )));
    }
    Ok(s)
}

/// Slopes of the kernel at the points the gap bounds need, on one compact
/// interval covering all of them.
struct Slopes {
    f: ConvexFunction,
}

impl Slopes {
    fn covering(f: &DivergenceKernel, points: &[f64]) -> Result<Self> {
        let lo = points.iter().cloned().fold(1.0, f64::min);
        let hi = points.iter().cloned().fold(1.0, f64::max);
        Ok(Slopes {
            f: f.on(Interval::new(0.5 * lo, 2.0 * hi)?)?,
        })
    }

    fn at(&self, t: f64, side: Side) -> Result<ExtendedReal> {
        self.f.derivative(t, side)
    }
}

/// Encloses `hh - lw` in
/// `[(1/8) Σ (f'+(m_i) - f'-(m_i)) |q_i - p_i|, (1/8) Σ (f'-(r_i) - f'+(1)) (q_i - p_i)]`
/// with `m_i = (p_i + q_i) / (2 p_i)` and `r_i = q_i / p_i`.
pub fn hh_gap_bounds(f: &DivergenceKernel, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<Enclosure> {
    check_pair(p, q)?;
    let mut points = Vec::with_capacity(2 * p.len());
    for (&pi, &qi) in p.weights.iter().zip(&q.weights) {
        points.push(qi / pi);
        points.push((pi + qi) / (2.0 * pi));
    }
    let slopes = Slopes::covering(f, &points)?;
    let right_at_one = slopes.at(1.0, Side::Right)?;
    let mut lower = ExtendedReal::ZERO;
    let mut upper = ExtendedReal::ZERO;
    for (&pi, &qi) in p.weights.iter().zip(&q.weights) {
        if pi == qi {
            continue;
        }
        let m = (pi + qi) / (2.0 * pi);
        let jump = slopes
            .at(m, Side::Right)?
            .checked_sub(slopes.at(m, Side::Left)?)?;
        lower = lower.checked_add(jump.scale((qi - pi).abs() / 8.0))?;
        let spread = slopes.at(qi / pi, Side::Left)?.checked_sub(right_at_one)?;
        upper = upper.checked_add(spread.scale((qi - pi) / 8.0))?;
    }
    Enclosure::new(lower, upper)
}

/// `(1/8) Σ f'-(r_i) (q_i - p_i)`: the same upper bound with the `f'+(1)` term
/// dropped, which changes nothing because `Σ (q_i - p_i) = 0`.
pub fn hh_gap_upper_reduced(f: &DivergenceKernel, p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<ExtendedReal> {
    check_pair(p, q)?;
    let points: Vec<f64> = p.weights.iter().zip(&q.weights).map(|(&pi, &qi)| qi / pi).collect();
    let slopes = Slopes::covering(f, &points)?;
    let mut upper = ExtendedReal::ZERO;
    for (&pi, &qi) in p.weights.iter().zip(&q.weights) {
        upper = upper.checked_add(slopes.at(qi / pi, Side::Left)?.scale((qi - pi) / 8.0))?;
    }
    Ok(upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pq() -> (DiscreteDistribution, DiscreteDistribution) {
        (
            DiscreteDistribution::new(vec![0.5, 0.5]).unwrap(),
            DiscreteDistribution::new(vec![0.25, 0.75]).unwrap(),
        )
    }

    fn shifted_abs() -> DivergenceKernel {
        let f = catalog::abs_shift(1.25).plus_affine(0.0, -0.25);
        DivergenceKernel::new("shifted-abs", f.into_oracle()).unwrap()
    }

    fn near(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14
    }

    #[test]
    fn chi2_examples() {
        let (p, q) = pq();
        let k = DivergenceKernel::by_name("chi2").unwrap();
        assert!(near(csiszar_divergence(&k, &p, &q).unwrap(), 0.25));
        assert!(near(lin_wong_divergence(&k, &p, &q).unwrap(), 0.0625));
        assert!(near(hh_divergence(&k, &p, &q).unwrap(), 1.0 / 12.0));
        let g = hh_gap_bounds(&k, &p, &q).unwrap();
        assert!(near(g.lo.to_f64(), 0.0) && near(g.hi.to_f64(), 1.0 / 16.0));
        let s = hh_sandwich(&k, &p, &q).unwrap();
        assert!(near(s.half_csiszar, 0.125));
    }

    #[test]
    fn kl_example() {
        let (p, q) = pq();
        let k = DivergenceKernel::by_name("kl").unwrap();
        let want = 0.25 * 0.5f64.ln() + 0.75 * 1.5f64.ln();
        assert!(near(csiszar_divergence(&k, &p, &q).unwrap(), want));
        let s = hh_sandwich(&k, &p, &q).unwrap();
        assert!(s.lw <= s.hh && s.hh <= s.half_csiszar);
    }

    #[test]
    fn kinked_kernel_is_tight() {
        let (p, q) = pq();
        let k = shifted_abs();
        assert!(near(lin_wong_divergence(&k, &p, &q).unwrap(), 0.0));
        assert!(near(hh_divergence(&k, &p, &q).unwrap(), 1.0 / 16.0));
        let g = hh_gap_bounds(&k, &p, &q).unwrap();
        assert!(near(g.lo.to_f64(), 1.0 / 16.0) && near(g.hi.to_f64(), 1.0 / 16.0));
    }

    #[test]
    fn self_divergence_is_zero() {
        let p = DiscreteDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        for name in KERNEL_NAMES {
            let k = DivergenceKernel::by_name(name).unwrap();
            assert_eq!(csiszar_divergence(&k, &p, &p).unwrap().abs(), 0.0);
            assert_eq!(lin_wong_divergence(&k, &p, &p).unwrap().abs(), 0.0);
            assert_eq!(hh_divergence(&k, &p, &p).unwrap(), 0.0);
            assert_eq!(hh_gap_bounds(&k, &p, &p).unwrap(), Enclosure::point(0.0));
            let s = hh_sandwich(&k, &p, &p).unwrap();
            assert_eq!((s.lw.abs(), s.hh, s.half_csiszar.abs()), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn near_one_ratios_use_simpson() {
        let p = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        let q = DiscreteDistribution::new(vec![0.5 + 1e-5, 0.5 - 1e-5]).unwrap();
        let k = DivergenceKernel::by_name("chi2").unwrap();
        // Exact: (1/3) Σ (q-p)^2 / p. Evaluating t^2 - 2t + 1 near 1 costs
        // about 1e-16 absolute, which is all that can be asked here.
        let want = (2.0 * 1e-10 / 0.5) / 3.0;
        let got = hh_divergence(&k, &p, &q).unwrap();
        assert!((got - want).abs() <= 1e-15, "{got} vs {want}");
    }

    #[test]
    fn invalid_inputs() {
        assert!(DiscreteDistribution::new(vec![0.5, 0.5, 0.0]).is_err());
        assert!(DiscreteDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(vec![]).is_err());
        let k = DivergenceKernel::by_name("chi2").unwrap();
        let p = DiscreteDistribution::new(vec![0.5, 0.5]).unwrap();
        let r = DiscreteDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(
            csiszar_divergence(&k, &p, &r),
            Err(Error::DimensionMismatch(2, 3))
        ));
        assert!(DivergenceKernel::by_name("nope").is_err());
        // Not normalized.
        assert!(DivergenceKernel::new("t^2", catalog::power(2.0).unwrap().into_oracle()).is_err());
        // Not convex.
        #[derive(Debug)]
        struct Cap;
        impl ConvexOracle for Cap {
            fn eval(&self, t: f64) -> f64 {
                -(t - 1.0) * (t - 1.0)
            }
        }
        assert!(matches!(
            DivergenceKernel::new("cap", Arc::new(Cap)),
            Err(Error::NonConvex { .. })
        ));
    }
}
