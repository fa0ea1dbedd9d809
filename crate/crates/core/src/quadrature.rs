//! Composite Riemann sums and the mid-point rule with certified remainder
//! enclosures, plus a uniform-doubling driver that refines until the
//! enclosure is narrow enough.

use serde::Serialize;

use crate::convex::ConvexFunction;
use crate::enclosure::Enclosure;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::interval::Interval;
use crate::pointwise::common_slope;

/// Default cell budget for [`integrate_adaptive`].
pub const DEFAULT_MAX_CELLS: usize = 1 << 20;

/// Where the tag sits inside each cell of a uniform partition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TagRule {
    Left,
    Midpoint,
    Right,
    /// `x_i + θ h_i` for `θ` in `[0, 1]`.
    Fraction(f64),
}

/// Nodes `a = x_0 < ... < x_n = b` with one tag per cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    nodes: Vec<f64>,
    tags: Vec<f64>,
}

impl Partition {
    pub fn new(nodes: Vec<f64>, tags: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Precondition("a partition needs at least one cell".into()));
        }
        if tags.len() + 1 != nodes.len() {
            return Err(Error::Precondition(format!(
                "{} nodes need {} tags, got {}",
                nodes.len(),
                nodes.len() - 1,
                tags.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Precondition("partition nodes must be finite".into()));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(Error::Precondition(format!(
                    "nodes must increase strictly (x_{i} = {}, x_{} = {})",
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
            if !(w[0] <= tags[i] && tags[i] <= w[1]) {
                return Err(Error::Precondition(format!(
                    "tag {} lies outside its cell [{}, {}]",
                    tags[i], w[0], w[1]
                )));
            }
        }
        Ok(Partition { nodes, tags })
    }

    pub fn uniform(domain: Interval, n: usize, rule: TagRule) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("a partition needs at least one cell".into()));
        }
        let h = domain.width() / n as f64;
        let nodes: Vec<f64> = (0..=n)
            .map(|i| if i == n { domain.hi() } else { domain.lo() + h * i as f64 })
            .collect();
        let tags = nodes
            .windows(2)
            .map(|w| match rule {
                TagRule::Left => w[0],
                TagRule::Right => w[1],
                TagRule::Midpoint => 0.5 * (w[0] + w[1]),
                TagRule::Fraction(theta) => (w[0] + theta * (w[1] - w[0])).clamp(w[0], w[1]),
            })
            .collect();
        Partition::new(nodes, tags)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    pub fn cells(&self) -> usize {
        self.tags.len()
    }

    /// Splits every cell at its midpoint, tagging both halves at their own
    /// midpoints.
    pub fn bisect(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(*self.nodes.last().unwrap());
        let tags = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        Partition { nodes, tags }
    }

    fn check_spans(&self, f: &ConvexFunction) -> Result<()> {
        let dom = f.domain();
        if self.nodes[0] == dom.lo() && *self.nodes.last().unwrap() == dom.hi() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "partition [{}, {}] does not span the domain [{}, {}]",
                self.nodes[0],
                self.nodes.last().unwrap(),
                dom.lo(),
                dom.hi()
            )))
        }
    }
}

/// A rule value together with a certified enclosure of `∫ f - estimate`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub estimate: f64,
    pub remainder: Enclosure,
    pub cells: usize,
    pub partition: Partition,
}

impl QuadratureResult {
    /// `[estimate + remainder.lo, estimate + remainder.hi]`, which contains the
    /// integral.
    pub fn certified_interval(&self) -> Enclosure {
        self.remainder.shift(self.estimate)
    }
}

/// `Σ h_i f(ξ_i)`.
pub fn riemann_sum(f: &ConvexFunction, p: &Partition) -> Result<f64> {
    p.check_spans(f)?;
    Ok(p.nodes
        .windows(2)
        .zip(&p.tags)
        .map(|(w, &xi)| (w[1] - w[0]) * f.eval_unchecked(xi))
        .sum())
}

/// Per-cell form of the remainder bounds:
///
/// lower = (1/2) Σ [(x_{i+1} - ξ_i)^2 f'+(ξ_i) - (ξ_i - x_i)^2 f'-(ξ_i)]
/// upper = (1/2) Σ [(x_{i+1} - ξ_i)^2 f'-(x_{i+1}) - (ξ_i - x_i)^2 f'+(x_i)]
///
/// A tag on a cell end only uses the slope on the side that has positive
/// weight, so the rule stays defined when the other side does not exist.
pub fn remainder_enclosure(f: &ConvexFunction, p: &Partition) -> Result<Enclosure> {
    p.check_spans(f)?;
    let mut lo = ExtendedReal::ZERO;
    let mut hi = ExtendedReal::ZERO;
    for (w, &xi) in p.nodes.windows(2).zip(&p.tags) {
        let (xl, xr) = (w[0], w[1]);
        let after = 0.5 * (xr - xi).powi(2);
        let before = 0.5 * (xi - xl).powi(2);
        if after > 0.0 {
            lo = lo.checked_add(f.right_derivative(xi)?.scale(after))?;
            hi = hi.checked_add(f.left_derivative(xr)?.scale(after))?;
        }
        if before > 0.0 {
            lo = lo.checked_sub(f.left_derivative(xi)?.scale(before))?;
            hi = hi.checked_sub(f.right_derivative(xl)?.scale(before))?;
        }
    }
    Enclosure::new(lo, hi)
}

/// The same bounds with the upper sum regrouped around the interior nodes:
///
/// upper = (1/2)[(b - ξ_{n-1})^2 f'-(b)
///               + Σ_{i=1}^{n-1} ((x_i - ξ_{i-1})^2 f'-(x_i) - (ξ_i - x_i)^2 f'+(x_i))
///               - (ξ_0 - a)^2 f'+(a)]
pub fn remainder_enclosure_regrouped(f: &ConvexFunction, p: &Partition) -> Result<Enclosure> {
    p.check_spans(f)?;
    let n = p.cells();
    let x = &p.nodes;
    let xi = &p.tags;
    let mut lo = ExtendedReal::ZERO;
    for i in 0..n {
        let after = 0.5 * (x[i + 1] - xi[i]).powi(2);
        let before = 0.5 * (xi[i] - x[i]).powi(2);
        if after > 0.0 {
            lo = lo.checked_add(f.right_derivative(xi[i])?.scale(after))?;
        }
        if before > 0.0 {
            lo = lo.checked_sub(f.left_derivative(xi[i])?.scale(before))?;
        }
    }

    let mut hi = ExtendedReal::ZERO;
    let last = 0.5 * (x[n] - xi[n - 1]).powi(2);
    if last > 0.0 {
        hi = hi.checked_add(f.left_derivative(x[n])?.scale(last))?;
    }
    for i in 1..n {
        let incoming = 0.5 * (x[i] - xi[i - 1]).powi(2);
        let outgoing = 0.5 * (xi[i] - x[i]).powi(2);
        if incoming > 0.0 {
            hi = hi.checked_add(f.left_derivative(x[i])?.scale(incoming))?;
        }
        if outgoing > 0.0 {
            hi = hi.checked_sub(f.right_derivative(x[i])?.scale(outgoing))?;
        }
    }
    let first = 0.5 * (xi[0] - x[0]).powi(2);
    if first > 0.0 {
        hi = hi.checked_sub(f.right_derivative(x[0])?.scale(first))?;
    }
    Enclosure::new(lo, hi)
}

/// `Σ ((x_i + x_{i+1})/2 - ξ_i) h_i f'(ξ_i)`, the lower bound for functions
/// differentiable at every tag.
pub fn differentiable_lower_form(f: &ConvexFunction, p: &Partition) -> Result<f64> {
    p.check_spans(f)?;
    let mut sum = 0.0;
    for (w, &xi) in p.nodes.windows(2).zip(&p.tags) {
        let d = common_slope(f, xi)?;
        sum += (0.5 * (w[0] + w[1]) - xi) * (w[1] - w[0]) * d;
    }
    Ok(sum)
}

/// Mid-point rule on `n` equal cells with remainder enclosure
/// `[(1/8) Σ (f'+(m_i) - f'-(m_i)) h_i^2, (1/8) Σ (f'-(x_{i+1}) - f'+(x_i)) h_i^2]`.
pub fn midpoint_rule(f: &ConvexFunction, n: usize) -> Result<QuadratureResult> {
    let partition = Partition::uniform(f.domain(), n, TagRule::Midpoint)?;
    let mut estimate = 0.0;
    let mut lo = 0.0;
    let mut hi = ExtendedReal::ZERO;
    for (w, &m) in partition.nodes.windows(2).zip(&partition.tags) {
        let h = w[1] - w[0];
        let weight = 0.125 * h * h;
        estimate += h * f.eval_unchecked(m);
        let jump = f.right_derivative(m)?.checked_sub(f.left_derivative(m)?)?;
        lo += jump.finite().ok_or_else(|| {
            Error::InternalInconsistency(format!("infinite slope jump at interior point {m}"))
        })? * weight;
        let spread = f.left_derivative(w[1])?.checked_sub(f.right_derivative(w[0])?)?;
        hi = hi.checked_add(spread.scale(weight))?;
    }
    Ok(QuadratureResult {
        estimate,
        remainder: Enclosure::new(ExtendedReal::Finite(lo), hi)?,
        cells: n,
        partition,
    })
}

/// Doubles the number of mid-point cells, starting from one, until the
/// remainder enclosure is at most `tol` wide.
pub fn integrate_adaptive(f: &ConvexFunction, tol: f64, max_cells: usize) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!("tolerance must be positive, got {tol}")));
    }
    f.endpoint_slopes().finite()?;
    let mut n = 1usize;
    loop {
        let result = midpoint_rule(f, n)?;
        if result.remainder.width() <= tol {
            return Ok(result);
        }
        match n.checked_mul(2) {
            Some(next) if next <= max_cells => n = next,
            _ => {
                return Err(Error::BudgetExceeded {
                    max_cells,
                    best: Box::new(result),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::catalog;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }
    fn sq() -> ConvexFunction {
        catalog::power(2.0).unwrap().on(unit()).unwrap()
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0.0], vec![]).is_err());
        assert!(Partition::new(vec![0.0, 0.5, 0.5, 1.0], vec![0.0, 0.5, 0.7]).is_err());
        assert!(Partition::new(vec![0.0, 0.5, 1.0], vec![0.6, 0.7]).is_err());
        assert!(Partition::new(vec![0.0, 0.5, 1.0], vec![0.5]).is_err());
        assert!(Partition::uniform(unit(), 0, TagRule::Left).is_err());
        let p = Partition::uniform(unit(), 3, TagRule::Right).unwrap();
        assert_eq!(p.nodes().last(), Some(&1.0));
        assert_eq!(p.tags()[2], 1.0);
    }

    #[test]
    fn riemann_examples() {
        let id = catalog::affine(1.0, 0.0).on(unit()).unwrap();
        let p = Partition::uniform(unit(), 1, TagRule::Left).unwrap();
        assert_eq!(riemann_sum(&id, &p).unwrap(), 0.0);
        let p = Partition::uniform(unit(), 2, TagRule::Midpoint).unwrap();
        assert_eq!(riemann_sum(&sq(), &p).unwrap(), 0.3125);
        let f0 = catalog::abs_shift(0.5).on(unit()).unwrap();
        let p = Partition::uniform(unit(), 1, TagRule::Midpoint).unwrap();
        assert_eq!(riemann_sum(&f0, &p).unwrap(), 0.0);
        let wrong = Partition::uniform(Interval::new(0.0, 2.0).unwrap(), 2, TagRule::Left).unwrap();
        assert!(riemann_sum(&sq(), &wrong).is_err());
    }

    #[test]
    fn remainder_examples() {
        let p = Partition::uniform(unit(), 2, TagRule::Midpoint).unwrap();
        let e = remainder_enclosure(&sq(), &p).unwrap();
        assert_eq!(e, Enclosure::finite(0.0, 1.0 / 16.0).unwrap());
        assert!(e.contains(1.0 / 48.0));

        let id = catalog::affine(1.0, 0.0).on(unit()).unwrap();
        let p = Partition::uniform(unit(), 1, TagRule::Left).unwrap();
        assert_eq!(remainder_enclosure(&id, &p).unwrap(), Enclosure::point(0.5));

        let f0 = catalog::abs_shift(0.5).on(unit()).unwrap();
        let p = Partition::uniform(unit(), 1, TagRule::Midpoint).unwrap();
        assert_eq!(remainder_enclosure(&f0, &p).unwrap(), Enclosure::point(0.25));
    }

    #[test]
    fn infinite_endpoint_slope_at_a_tag() {
        // Tag at a = 0 where f'+(0) = -inf: the lower sum is unbounded, the
        // upper sum drops the zero-weight term and stays finite.
        let ns = catalog::neg_sqrt().on(unit()).unwrap();
        let p = Partition::uniform(unit(), 4, TagRule::Left).unwrap();
        let e = remainder_enclosure(&ns, &p).unwrap();
        assert_eq!(e.lo, ExtendedReal::NegInf);
        assert!(e.hi.is_finite());
        let exact = -2.0 / 3.0 - riemann_sum(&ns, &p).unwrap();
        assert!(e.contains(exact));
        // A positive weight on f'+(a) pushes the upper sum to +inf instead.
        let p = Partition::uniform(unit(), 4, TagRule::Midpoint).unwrap();
        assert_eq!(remainder_enclosure(&ns, &p).unwrap().hi, ExtendedReal::PosInf);
    }

    #[test]
    fn lower_form_examples() {
        let e = catalog::exp().on(unit()).unwrap();
        let p = Partition::uniform(unit(), 4, TagRule::Midpoint).unwrap();
        assert_eq!(differentiable_lower_form(&e, &p).unwrap(), 0.0);

        let p = Partition::new(vec![0.0, 1.0], vec![0.25]).unwrap();
        assert_eq!(differentiable_lower_form(&sq(), &p).unwrap(), 0.125);

        let p = Partition::uniform(unit(), 2, TagRule::Left).unwrap();
        let v = differentiable_lower_form(&e, &p).unwrap();
        assert!((v - 0.125 * (1.0 + 0.5f64.exp())).abs() < 1e-15);
        assert!((v - 0.3310902).abs() < 1e-7);

        let f0 = catalog::abs_shift(0.5).on(unit()).unwrap();
        let p = Partition::uniform(unit(), 1, TagRule::Midpoint).unwrap();
        assert!(matches!(
            differentiable_lower_form(&f0, &p),
            Err(Error::NotDifferentiable { .. })
        ));
    }

    #[test]
    fn midpoint_examples() {
        let r = midpoint_rule(&sq(), 2).unwrap();
        assert_eq!(r.estimate, 0.3125);
        assert_eq!(r.remainder, Enclosure::finite(0.0, 0.0625).unwrap());
        assert!(r.remainder.contains(1.0 / 48.0));

        let f0 = catalog::abs_shift(0.5).on(unit()).unwrap();
        let r = midpoint_rule(&f0, 1).unwrap();
        assert_eq!(r.estimate, 0.0);
        assert_eq!(r.remainder, Enclosure::point(0.25));

        let aff = catalog::affine(-3.0, 2.0).on(unit()).unwrap();
        for n in [1, 3, 8] {
            assert_eq!(midpoint_rule(&aff, n).unwrap().remainder, Enclosure::point(0.0));
        }
    }

    #[test]
    fn adaptive_examples() {
        let e = catalog::exp().on(unit()).unwrap();
        let r = integrate_adaptive(&e, 1e-6, DEFAULT_MAX_CELLS).unwrap();
        assert!(r.certified_interval().contains(std::f64::consts::E - 1.0));
        assert!(r.remainder.width() <= 1e-6);
        assert!(r.cells <= 1024);

        let aff = catalog::affine(2.0, 1.0).on(unit()).unwrap();
        let r = integrate_adaptive(&aff, 1e-300, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(r.cells, 1);
        assert_eq!(r.remainder.width(), 0.0);

        let kink = catalog::abs_shift(0.3).on(unit()).unwrap();
        let r = integrate_adaptive(&kink, 1e-4, DEFAULT_MAX_CELLS).unwrap();
        assert!(r.certified_interval().contains_with_slack(0.29, 1e-14));
        assert!(r.remainder.width() <= 1e-4);
    }

    #[test]
    fn adaptive_errors() {
        let ns = catalog::neg_sqrt().on(unit()).unwrap();
        assert!(matches!(
            integrate_adaptive(&ns, 1e-6, DEFAULT_MAX_CELLS),
            Err(Error::UnboundedSlope)
        ));
        let e = catalog::exp().on(unit()).unwrap();
        match integrate_adaptive(&e, 1e-12, 64) {
            Err(Error::BudgetExceeded { best, .. }) => {
                assert_eq!(best.cells, 64);
                assert!(best.certified_interval().contains(std::f64::consts::E - 1.0));
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(integrate_adaptive(&e, 0.0, 64).is_err());
    }
}
