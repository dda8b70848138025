//! Multiplicative zeta functions `Z_log` of varieties and motives over finite
//! fields, and their analytic continuation.

pub mod abel_plana_verify;
pub mod algebra;
pub mod continuation;
pub mod error;
pub mod expansion;
pub mod hp;
pub mod motive_data;
pub mod point_counts;
pub mod pseudo_divisor;
pub mod quadrature;
pub mod recurrence;
pub mod scalar;
pub mod series;

pub use error::{Error, Result};
pub use motive_data::{SpectralData, SpectralDatum, TruncationParams, WeilNumberSet};
pub use pseudo_divisor::{PseudoDivisor, Window};
pub use series::{PowerSeries, RealPowerSeries};

/// Exact series over the rationals.
pub type ExactPowerSeries = PowerSeries<num_rational::BigRational>;
/// Complex-coefficient series.
pub type ComplexPowerSeries = PowerSeries<num_complex::Complex64>;
