use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;

/// Relative size of an inversion `lo > hi` still attributed to round-off.
const ROUNDOFF_INVERSION: f64 = 1e-12;

/// A certified pair of bounds `lo <= value <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: ExtendedReal,
    pub hi: ExtendedReal,
}

impl Enclosure {
    /// Builds an enclosure, swapping the bounds when they cross by no more
    /// than floating-point round-off (the swapped pair is the hull of both
    /// values, so it still contains the target). A genuine inversion is an
    /// internal error.
    pub fn new(lo: ExtendedReal, hi: ExtendedReal) -> Result<Self> {
        if lo <= hi {
            return Ok(Enclosure { lo, hi });
        }
        match (lo, hi) {
            (ExtendedReal::Finite(l), ExtendedReal::Finite(h))
                if l - h <= ROUNDOFF_INVERSION * l.abs().max(h.abs()).max(1.0) =>
            {
                Ok(Enclosure { lo: hi, hi: lo })
            }
            _ => Err(Error::InternalInconsistency(format!(
                "enclosure bounds inverted: [{lo}, {hi}]"
            ))),
        }
    }

    pub fn finite(lo: f64, hi: f64) -> Result<Self> {
        Enclosure::new(lo.into(), hi.into())
    }

    pub fn point(v: f64) -> Self {
        Enclosure {
            lo: v.into(),
            hi: v.into(),
        }
    }

    /// `hi - lo`, or `+inf` when either side is unbounded.
    pub fn width(&self) -> f64 {
        match (self.lo, self.hi) {
            (ExtendedReal::Finite(l), ExtendedReal::Finite(h)) => h - l,
            _ => f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= ExtendedReal::Finite(v) && ExtendedReal::Finite(v) <= self.hi
    }

    /// Containment with a slack of `rel * max(1, |v|)` on both sides.
    pub fn contains_with_slack(&self, v: f64, rel: f64) -> bool {
        let s = rel * v.abs().max(1.0);
        self.lo.to_f64() - s <= v && v <= self.hi.to_f64() + s
    }

    /// Shifts both bounds by a finite offset.
    pub fn shift(&self, by: f64) -> Self {
        let add = |e: ExtendedReal| match e {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(x + by),
            inf => inf,
        };
        Enclosure {
            lo: add(self.lo),
            hi: add(self.hi),
        }
    }

    /// Intersects with `[lo, hi]`; used to clip probabilities into `[0, 1]`.
    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        let l = self.lo.max(lo.into()).min(hi.into());
        let h = self.hi.min(hi.into()).max(lo.into());
        Enclosure { lo: l, hi: h.max(l) }
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
