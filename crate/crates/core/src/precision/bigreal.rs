use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::Float;

use super::{digits_to_bits, MAX_DIGITS, MIN_DIGITS};
use crate::error::{Error, Result};

/// Arbitrary-precision real number tagged with its decimal working precision.
///
/// Binary operations produce a result at the smaller of the two operand
/// precisions.
#[derive(Clone, Debug)]
pub struct BigReal {
    value: Float,
    digits: u32,
}

fn check_digits(digits: u32) -> Result<()> {
    if !(MIN_DIGITS..=MAX_DIGITS).contains(&digits) {
        return Err(Error::Precision(format!(
            "precision {digits} outside supported range {MIN_DIGITS}..={MAX_DIGITS}"
        )));
    }
    Ok(())
}

impl BigReal {
    /// Wraps `value`, rounding it to `digits` decimal digits.
    pub fn from_float(value: Float, digits: u32) -> Self {
        let bits = digits_to_bits(digits);
        let mut value = value;
        if value.prec() != bits {
            value.set_prec(bits);
        }
        BigReal { value, digits }
    }

    pub fn try_from_float(value: Float, digits: u32) -> Result<Self> {
        check_digits(digits)?;
        if !value.is_finite() {
            return Err(Error::Domain("non-finite value".into()));
        }
        Ok(Self::from_float(value, digits))
    }

    pub fn from_i64(v: i64, digits: u32) -> Self {
        BigReal {
            value: Float::with_val(digits_to_bits(digits), v),
            digits,
        }
    }

    pub fn from_f64(v: f64, digits: u32) -> Self {
        BigReal {
            value: Float::with_val(digits_to_bits(digits), v),
            digits,
        }
    }

    /// `num / den` rounded once.
    pub fn from_ratio(num: i64, den: i64, digits: u32) -> Self {
        let mut value = Float::with_val(digits_to_bits(digits), num);
        value /= den;
        BigReal { value, digits }
    }

    pub fn zero(digits: u32) -> Self {
        Self::from_i64(0, digits)
    }

    pub fn one(digits: u32) -> Self {
        Self::from_i64(1, digits)
    }

    pub fn pi(digits: u32) -> Self {
        BigReal {
            value: Float::with_val(digits_to_bits(digits), Constant::Pi),
            digits,
        }
    }

    /// Parses `[+-]digits[.digits][e[+-]k]`.
    pub fn parse(s: &str, digits: u32) -> Result<Self> {
        check_digits(digits)?;
        let t = s.trim();
        if !is_decimal_literal(t) {
            return Err(Error::Domain(format!("malformed decimal literal {s:?}")));
        }
        let parsed =
            Float::parse(t).map_err(|e| Error::Domain(format!("cannot parse {s:?}: {e}")))?;
        Ok(BigReal {
            value: Float::with_val(digits_to_bits(digits), parsed),
            digits,
        })
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn as_float(&self) -> &Float {
        &self.value
    }

    pub fn into_float(self) -> Float {
        self.value
    }

    pub fn bits(&self) -> u32 {
        self.value.prec()
    }

    /// Same value re-rounded to another decimal precision.
    pub fn with_digits(&self, digits: u32) -> Self {
        Self::from_float(self.value.clone(), digits)
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.value.cmp0() {
            Some(Ordering::Less) => -1,
            Some(Ordering::Greater) => 1,
            _ => 0,
        }
    }

    pub fn abs(&self) -> Self {
        BigReal {
            value: self.value.clone().abs(),
            digits: self.digits,
        }
    }

    /// Decimal string with exactly `self.digits()` significant digits.
    pub fn to_decimal(&self) -> String {
        format_decimal(&self.value, self.digits as usize)
    }

    /// Decimal string with `n` significant digits (round to nearest).
    pub fn to_decimal_digits(&self, n: usize) -> String {
        format_decimal(&self.value, n.max(1))
    }

    fn binary(&self, other: &BigReal, f: impl FnOnce(&Float, &Float, u32) -> Float) -> BigReal {
        let digits = self.digits.min(other.digits);
        let bits = digits_to_bits(digits);
        BigReal {
            value: f(&self.value, &other.value, bits),
            digits,
        }
    }
}

fn is_decimal_literal(t: &str) -> bool {
    let b = t.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut ndigits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        ndigits += i - frac_start;
    }
    if ndigits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

/// Formats `v` with `n` significant digits, fixed-point for moderate
/// exponents and `d.ddde±k` otherwise.
pub(crate) fn format_decimal(v: &Float, n: usize) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    let (neg, digits, exp) = v.to_sign_string_exp_round(10, Some(n), Round::Nearest);
    let exp = exp.unwrap_or(0) as i64;
    let sign = if neg { "-" } else { "" };
    // value = 0.d1d2d3... * 10^exp
    if exp > 0 && exp as usize <= n.max(40) {
        let e = exp as usize;
        if e >= digits.len() {
            let zeros = "0".repeat(e - digits.len());
            format!("{sign}{digits}{zeros}")
        } else {
            format!("{sign}{}.{}", &digits[..e], &digits[e..])
        }
    } else if exp <= 0 && exp > -10 {
        let zeros = "0".repeat((-exp) as usize);
        format!("{sign}0.{zeros}{digits}")
    } else {
        let mant = if digits.len() > 1 {
            format!("{}.{}", &digits[..1], &digits[1..])
        } else {
            digits.clone()
        };
        format!("{sign}{mant}e{}", exp - 1)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                self.binary(rhs, |a, b, bits| Float::with_val(bits, a $op b))
            }
        }
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &'a BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal {
            value: -self.value,
            digits: self.digits,
        }
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn result_takes_min_precision() {
        let a = BigReal::from_i64(1, 40);
        let b = BigReal::from_i64(3, 20);
        let c = &a / &b;
        assert_eq!(c.digits(), 20);
        assert_eq!(c.to_decimal(), "0.33333333333333333333");
    }

    #[test]
    fn parse_grammar() {
        for ok in ["1", "-2.5", "+.5", "3.", "1e10", "-1.25E-3", "0.000"] {
            assert!(BigReal::parse(ok, 20).is_ok(), "{ok}");
        }
        for bad in ["", "e5", ".", "1e", "abc", "inf", "nan", "1.2.3", "--1", "1e+"] {
            assert!(BigReal::parse(bad, 20).is_err(), "{bad}");
        }
    }

    #[test]
    fn decimal_output_has_requested_digits() {
        let x = BigReal::parse("123.456", 12).unwrap();
        assert_eq!(x.to_decimal(), "123.456000000");
        let y = BigReal::parse("-0.00012345", 10).unwrap();
        assert_eq!(y.to_decimal(), "-0.0001234500000");
        let z = BigReal::parse("6.02e-30", 10).unwrap();
        assert_eq!(z.to_decimal(), "6.020000000e-30");
        assert_eq!(BigReal::zero(10).to_decimal(), "0");
    }

    #[test]
    fn precision_bounds_enforced() {
        assert!(BigReal::parse("1", 5).is_err());
        assert!(BigReal::try_from_float(Float::with_val(64, 1), 9).is_err());
        assert!(BigReal::try_from_float(Float::with_val(64, f64::NAN), 20).is_err());
    }
}
