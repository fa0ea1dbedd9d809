//! Certified two-sided enclosures built from one-sided derivatives of convex
//! functions: pointwise integral-mean bounds, quadrature remainders, mean
//! comparisons, CDF bounds and divergence sandwiches.

pub mod convex;
pub mod divergence;
pub mod enclosure;
pub mod error;
pub mod extended;
pub mod interval;
pub mod means;
pub mod oracle;
pub mod pointwise;
pub mod probability;
pub mod quadrature;

pub use convex::{catalog, ConvexFunction, ConvexOracle, ConvexityReport, EndpointSlopes, Side};
pub use divergence::{DiscreteDistribution, DivergenceKernel};
pub use enclosure::Enclosure;
pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use interval::Interval;
pub use means::{MeanComparison, SpecialMeans};
pub use oracle::{OracleMethod, OracleResult};
pub use pointwise::BestPoint;
pub use probability::{DensityFamily, DensityOracle, RandomVariableModel};
pub use quadrature::{Partition, QuadratureResult, TagRule};
