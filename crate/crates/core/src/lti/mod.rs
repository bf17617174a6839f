//! Polynomial and rational transfer-function algebra for continuous-time
//! SISO systems: state-space realization, frequency response, and the
//! Routh-Hurwitz stability test.
//!
//! Time is in minutes, so `s` has units of rad/min. Compositions never
//! cancel common factors; whatever algebra produces is kept verbatim.

mod poly;
mod routh;
mod ss;
mod tf;

pub use poly::Polynomial;
pub use routh::is_hurwitz;
pub use ss::StateSpaceModel;
pub use tf::{FrequencyPoint, TransferFunction};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtiError {
    #[error("polynomial must have at least one coefficient")]
    EmptyPolynomial,
    #[error("polynomial coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("transfer function has a pole at the origin: dc gain is infinite")]
    InfiniteDcGain,
    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    Improper { num: usize, den: usize },
    #[error("feedback interconnection is degenerate: return difference is the zero polynomial")]
    DegenerateLoop,
    #[error("frequency must be strictly positive, got {0}")]
    NonPositiveFrequency(f64),
    #[error("evaluation point jw with w = {0} is a pole of the transfer function")]
    PoleOnImaginaryAxis(f64),
    #[error("stability test requires degree >= 1")]
    DegreeTooLow,
}
