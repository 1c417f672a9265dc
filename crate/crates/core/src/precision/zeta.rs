use rug::ops::PowAssign;
use rug::Float;

use super::{BigReal, PrecisionContext};
use crate::error::{Error, Result};

/// Riemann ζ(s) for integer s ≥ 2 by Borwein's accelerated alternating
/// (eta) series.
pub fn zeta(s: u32, ctx: &PrecisionContext) -> Result<BigReal> {
    if s < 2 {
        return Err(Error::Domain(format!("zeta requires s >= 2, got {s}")));
    }
    let bits = ctx.internal_bits() + 16;
    // error ≈ 3 / (3 + √8)^n
    let n = (ctx.internal_digits() as f64 / (3.0 + 8f64.sqrt()).log10()).ceil() as u64 + 2;
    // d_k = n Σ_{i≤k} (n+i−1)! 4^i / ((n−i)! (2i)!), built from the term ratio
    let mut d = Vec::with_capacity(n as usize + 1);
    let mut term = Float::with_val(bits, 1u32);
    let mut acc = Float::with_val(bits, 1u32);
    d.push(acc.clone());
    for i in 1..=n {
        term *= 2 * (n + i - 1) * (n - i + 1);
        term /= i * (2 * i - 1);
        acc += &term;
        d.push(acc.clone());
    }
    let dn = &d[n as usize];
    let mut sum = Float::with_val(bits, 0u32);
    for k in 0..n {
        let mut t = Float::with_val(bits, &d[k as usize] - dn);
        let mut pw = Float::with_val(bits, k + 1);
        pw.pow_assign(s);
        t /= &pw;
        if k % 2 == 0 {
            sum += &t;
        } else {
            sum -= &t;
        }
    }
    // η(s) = −sum/d_n, ζ(s) = η(s)/(1 − 2^{1−s})
    let mut eta = -sum / dn;
    let mut factor = Float::with_val(bits, 1u32);
    factor >>= s - 1;
    let denom = Float::with_val(bits, 1u32) - factor;
    eta /= denom;
    Ok(BigReal::from_float(eta, ctx.working_digits))
}
