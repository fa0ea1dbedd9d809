//! Extended reals: finite values plus the two infinities.
//!
//! One-sided derivatives of a convex function at the ends of its domain may be
//! infinite (`-sqrt(t)` at 0 has a vertical tangent), and every bound that
//! consumes them has to carry that through instead of producing a sentinel.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    /// Maps `f64` infinities to the matching variant. NaN has no extended-real
    /// meaning and yields `None`.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(ExtendedReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(ExtendedReal::NegInf)
        } else {
            Some(ExtendedReal::Finite(x))
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::NegInf => f64::NEG_INFINITY,
            ExtendedReal::Finite(x) => x,
            ExtendedReal::PosInf => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self> {
        use ExtendedReal::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => Ok(Finite(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::Indeterminate("+inf + -inf")),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
        }
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self> {
        self.checked_add(-rhs)
    }

    /// Multiplies by a finite scalar. A zero factor gives zero even against an
    /// infinity: every caller uses this for a vanishing integration weight, where
    /// the weighted term is an integral over an empty set.
    pub fn scale(self, k: f64) -> Self {
        debug_assert!(k.is_finite());
        match self {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(k * x),
            _ if k == 0.0 => ExtendedReal::ZERO,
            inf if k > 0.0 => inf,
            inf => -inf,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl From<f64> for ExtendedReal {
    /// Panics on NaN.
    fn from(x: f64) -> Self {
        ExtendedReal::from_f64(x).expect("NaN is not an extended real")
    }
}

impl Neg for ExtendedReal {
    type Output = Self;

    fn neg(self) -> Self {
        match self {
            ExtendedReal::NegInf => ExtendedReal::PosInf,
            ExtendedReal::Finite(x) => ExtendedReal::Finite(-x),
            ExtendedReal::PosInf => ExtendedReal::NegInf,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInf => f.write_str("-inf"),
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInf => f.write_str("+inf"),
        }
    }
}

/// Finite values serialize as numbers, infinities as the strings `"+inf"` and
/// `"-inf"` (JSON has no infinite literal).
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => serializer.serialize_f64(*x),
            ExtendedReal::PosInf => serializer.serialize_str("+inf"),
            ExtendedReal::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ExtendedReal::*;

    #[test]
    fn total_order() {
        assert!(NegInf < Finite(-1e300));
        assert!(Finite(1e300) < PosInf);
        assert!(Finite(1.0) < Finite(2.0));
        assert_eq!(PosInf.max(Finite(3.0)), PosInf);
        assert_eq!(NegInf.min(Finite(3.0)), NegInf);
    }

    #[test]
    fn infinity_arithmetic() {
        assert_eq!(PosInf.checked_add(Finite(-5.0)).unwrap(), PosInf);
        assert_eq!(Finite(2.0).checked_sub(PosInf).unwrap(), NegInf);
        assert!(PosInf.checked_sub(PosInf).is_err());
        assert!(NegInf.checked_add(PosInf).is_err());
        assert_eq!(NegInf.scale(-2.0), PosInf);
        assert_eq!(PosInf.scale(0.5), PosInf);
        assert_eq!(NegInf.scale(0.0), Finite(0.0));
    }

    #[test]
    fn nan_is_rejected() {
        assert!(ExtendedReal::from_f64(f64::NAN).is_none());
        assert_eq!(ExtendedReal::from_f64(f64::INFINITY), Some(PosInf));
    }
}
