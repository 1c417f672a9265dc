//! Arbitrary-precision scalars and the special functions the point-matching
//! method needs.
//!
//! Scalars are backed by MPFR (through `rug`). Everything above the
//! elementary functions (Gamma, Bessel J of real order, zeta, Bessel zeros) is
//! implemented here on top of that arithmetic.

pub(crate) mod bessel;
pub(crate) mod bigreal;
mod elementary;
pub(crate) mod gamma;
mod zeta;

pub use bessel::{bessel_j, bessel_j_rational, bessel_j_zero, BesselSeries};
pub use bigreal::BigReal;
pub use elementary::{elementary, Elementary};
pub use gamma::{gamma, gamma_rational, GammaCache};
pub use zeta::zeta;

use crate::error::{Error, Result};

/// Smallest supported working precision in decimal digits.
pub const MIN_DIGITS: u32 = 10;
/// Largest supported working precision in decimal digits.
pub const MAX_DIGITS: u32 = 200_000;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Binary precision (bits) that carries `digits` significant decimal digits.
pub fn digits_to_bits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32 + 4
}

/// Number of decimal digits represented by a binary precision.
pub fn bits_to_digits(bits: u32) -> u32 {
    ((bits.saturating_sub(4)) as f64 / LOG2_10).floor() as u32
}

/// Working precision plus the guard digits used for internal evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    pub working_digits: u32,
    pub guard_digits: u32,
}

impl PrecisionContext {
    pub fn new(working_digits: u32) -> Result<Self> {
        Self::with_guard(working_digits, 10)
    }

    pub fn with_guard(working_digits: u32, guard_digits: u32) -> Result<Self> {
        if working_digits < MIN_DIGITS {
            return Err(Error::Precision(format!(
                "working precision {working_digits} below minimum {MIN_DIGITS}"
            )));
        }
        if working_digits > MAX_DIGITS {
            return Err(Error::Precision(format!(
                "working precision {working_digits} above supported maximum {MAX_DIGITS}"
            )));
        }
        if guard_digits == 0 {
            return Err(Error::Precision("guard digits must be positive".into()));
        }
        Ok(PrecisionContext {
            working_digits,
            guard_digits,
        })
    }

    /// Digits used for internal evaluation.
    pub fn internal_digits(&self) -> u32 {
        self.working_digits + self.guard_digits
    }

    pub fn internal_bits(&self) -> u32 {
        digits_to_bits(self.internal_digits())
    }

    pub fn working_bits(&self) -> u32 {
        digits_to_bits(self.working_digits)
    }

    /// Series term cap shared by every series in this module.
    pub fn term_cap(&self) -> usize {
        100 * self.working_digits as usize
    }
}
