use crate::error::{Error, Result};
use crate::precision::{bessel_j_zero, zeta, BigReal, PrecisionContext};

/// Large-σ expansion of λ₁ for the regular σ-gon of area π:
/// j²·[1 + 4ζ(3)/σ³ + (12 − 2j²)ζ(5)/σ⁵ + (8 + 4j²)ζ(3)²/σ⁶], j = j₀,₁.
pub fn asymptotic_lambda1(sigma: u32, ctx: &PrecisionContext) -> Result<BigReal> {
    if sigma < 3 {
        return Err(Error::Domain(format!("a polygon needs at least 3 sides, got {sigma}")));
    }
    let d = ctx.internal_digits();
    let wide = PrecisionContext::with_guard(d, ctx.guard_digits)?;
    let j = bessel_j_zero(&BigReal::zero(d), 1, &wide)?;
    let j2 = &j * &j;
    let z3 = zeta(3, &wide)?;
    let z5 = zeta(5, &wide)?;
    let s = BigReal::from_i64(sigma as i64, d);
    let s3 = &(&s * &s) * &s;
    let s5 = &(&s3 * &s) * &s;
    let s6 = &s5 * &s;
    let int = |v: i64| BigReal::from_i64(v, d);
    let t3 = &(&int(4) * &z3) / &s3;
    let t5 = &(&(int(12) - &(&int(2) * &j2)) * &z5) / &s5;
    let t6 = &(&(int(8) + &(&int(4) * &j2)) * &(&z3 * &z3)) / &s6;
    let bracket = int(1) + &t3 + &t5 + &t6;
    Ok((&j2 * &bracket).with_digits(ctx.working_digits))
}

/// The σ → ∞ limit j₀,₁².
pub fn disk_lambda1(ctx: &PrecisionContext) -> Result<BigReal> {
    let j = bessel_j_zero(&BigReal::zero(ctx.internal_digits()), 1, ctx)?;
    Ok((&j * &j).with_digits(ctx.working_digits))
}
