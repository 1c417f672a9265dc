use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use super::{BigReal, PrecisionContext};
use crate::error::{Error, Result};

/// Elementary functions available through [`elementary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
    Power,
    Pi,
    Atan2,
}

impl Elementary {
    fn arity(self) -> usize {
        match self {
            Elementary::Pi => 0,
            Elementary::Power | Elementary::Atan2 => 2,
            _ => 1,
        }
    }
}

/// Evaluates an elementary function at `ctx.internal_digits()` and reports the
/// result at `ctx.working_digits`.
pub fn elementary(f: Elementary, args: &[BigReal], ctx: &PrecisionContext) -> Result<BigReal> {
    if args.len() != f.arity() {
        return Err(Error::Dimension {
            expected: f.arity(),
            got: args.len(),
        });
    }
    let bits = ctx.internal_bits();
    let a = |i: usize| Float::with_val(bits, args[i].as_float());
    let v = match f {
        Elementary::Pi => Float::with_val(bits, Constant::Pi),
        Elementary::Sin => a(0).sin(),
        Elementary::Cos => a(0).cos(),
        Elementary::Exp => a(0).exp(),
        Elementary::Ln => {
            if args[0].signum() <= 0 {
                return Err(Error::Domain("ln requires a positive argument".into()));
            }
            a(0).ln()
        }
        Elementary::Sqrt => {
            if args[0].signum() < 0 {
                return Err(Error::Domain("sqrt requires a non-negative argument".into()));
            }
            a(0).sqrt()
        }
        Elementary::Power => {
            let (x, y) = (a(0), a(1));
            if x.is_sign_negative() && !x.is_zero() && !y.is_integer() {
                return Err(Error::Domain(
                    "power with negative base requires an integer exponent".into(),
                ));
            }
            if x.is_zero() && y.is_sign_negative() {
                return Err(Error::Domain("zero raised to a negative power".into()));
            }
            x.pow(&y)
        }
        Elementary::Atan2 => {
            let (y, x) = (a(0), a(1));
            if x.is_zero() && y.is_zero() {
                return Err(Error::Domain("atan2(0, 0) is undefined".into()));
            }
            y.atan2(&x)
        }
    };
    if !v.is_finite() {
        return Err(Error::Domain(format!("{f:?} overflowed")));
    }
    Ok(BigReal::from_float(v, ctx.working_digits))
}

impl BigReal {
    fn unary(&self, f: impl FnOnce(Float) -> Float) -> BigReal {
        BigReal::from_float(f(self.as_float().clone()), self.digits())
    }

    pub fn sin(&self) -> BigReal {
        self.unary(Float::sin)
    }

    pub fn cos(&self) -> BigReal {
        self.unary(Float::cos)
    }

    pub fn exp(&self) -> BigReal {
        self.unary(Float::exp)
    }

    pub fn ln(&self) -> Result<BigReal> {
        if self.signum() <= 0 {
            return Err(Error::Domain("ln requires a positive argument".into()));
        }
        Ok(self.unary(Float::ln))
    }

    pub fn sqrt(&self) -> Result<BigReal> {
        if self.signum() < 0 {
            return Err(Error::Domain("sqrt requires a non-negative argument".into()));
        }
        Ok(self.unary(Float::sqrt))
    }

    pub fn powi(&self, n: i32) -> BigReal {
        self.unary(|x| x.pow(n))
    }

    pub fn atan2(&self, x: &BigReal) -> BigReal {
        let digits = self.digits().min(x.digits());
        let v = self.as_float().clone().atan2(x.as_float());
        BigReal::from_float(v, digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Integer;

    fn ctx(p: u32) -> PrecisionContext {
        PrecisionContext::new(p).unwrap()
    }

    // Machin's formula with exact integer arithmetic: pi = 16 atan(1/5) - 4 atan(1/239).
    fn machin_pi(digits: u32) -> String {
        let scale = Integer::from(10).pow(digits + 10);
        let atan_inv = |x: u32| {
            let mut sum = Integer::new();
            let x2 = Integer::from(x * x);
            let mut power = scale.clone() / x;
            let mut k = 0u32;
            while power != 0 {
                let term = power.clone() / (2 * k + 1);
                if k.is_multiple_of(2) {
                    sum += term;
                } else {
                    sum -= term;
                }
                power /= &x2;
                k += 1;
            }
            sum
        };
        let pi = atan_inv(5) * 16u32 - atan_inv(239) * 4u32;
        let s = pi.to_string();
        format!("{}.{}", &s[..1], &s[1..digits as usize])
    }

    #[test]
    fn pi_matches_machin_series() {
        let p = elementary(Elementary::Pi, &[], &ctx(30)).unwrap();
        let s = p.to_decimal();
        let oracle = machin_pi(40);
        assert_eq!(s, "3.14159265358979323846264338328");
        assert!(oracle.starts_with(&s[..30]));
    }

    #[test]
    fn sin_zero_is_exact() {
        let z = BigReal::zero(20);
        assert!(elementary(Elementary::Sin, &[z], &ctx(20)).unwrap().is_zero());
    }

    #[test]
    fn sqrt_inverse_identity() {
        let c = ctx(50);
        let two = BigReal::from_i64(2, 50);
        let r = elementary(Elementary::Sqrt, std::slice::from_ref(&two), &c).unwrap();
        let d = &(&r * &r) - &two;
        assert!(d.abs().to_f64() < 1e-48);
    }

    #[test]
    fn domain_errors() {
        let c = ctx(20);
        let neg = BigReal::from_i64(-1, 20);
        let half = BigReal::from_ratio(1, 2, 20);
        assert!(matches!(
            elementary(Elementary::Ln, std::slice::from_ref(&neg), &c),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            elementary(Elementary::Sqrt, std::slice::from_ref(&neg), &c),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            elementary(Elementary::Power, &[neg.clone(), half], &c),
            Err(Error::Domain(_))
        ));
        let sq = elementary(Elementary::Power, &[neg, BigReal::from_i64(2, 20)], &c).unwrap();
        assert_eq!(sq.to_f64(), 1.0);
        assert!(matches!(
            elementary(Elementary::Sin, &[], &c),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn atan2_quadrants() {
        let c = ctx(20);
        let one = BigReal::one(20);
        let m1 = BigReal::from_i64(-1, 20);
        let t = elementary(Elementary::Atan2, &[one, m1], &c).unwrap();
        assert!((t.to_f64() - 3.0 * std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }
}
