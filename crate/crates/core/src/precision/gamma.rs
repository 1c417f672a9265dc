use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

use super::{bits_to_digits, BigReal, PrecisionContext};
use crate::error::{Error, Result};

/// Arguments above this are handed to the Spouge sum directly instead of
/// recurring up from the fractional part.
const RECURRENCE_LIMIT: u32 = 400;

/// Γ(1 + x) for 0 ≤ x, by Spouge's approximation, correct to `bits`.
pub(crate) fn spouge_gamma1p(x: &Float, bits: u32) -> Float {
    let digits = bits_to_digits(bits) as f64 + 3.0;
    // relative error < a^{-1/2} (2π)^{-(a+1/2)}
    let a = (digits * std::f64::consts::LN_10 / (2.0 * std::f64::consts::PI).ln()).ceil() as u32 + 1;
    // the alternating coefficient sum loses roughly a·log2(2π)/... bits; be generous
    let wp = 2 * bits + 64;
    let z = Float::with_val(wp, x);
    let mut sum = Float::with_val(wp, Constant::Pi) * 2u32;
    sum.sqrt_mut();
    let mut fact = Float::with_val(wp, 1u32); // (k-1)!
    for k in 1..a {
        if k > 1 {
            fact *= k - 1;
        }
        let base = Float::with_val(wp, a - k);
        let mut c = base.clone().pow(Float::with_val(wp, k) - 0.5f64);
        c *= Float::with_val(wp, a - k).exp();
        c /= &fact;
        if k % 2 == 0 {
            c = -c;
        }
        c /= Float::with_val(wp, &z + k);
        sum += c;
    }
    let za = Float::with_val(wp, &z + a);
    let mut lead = za.clone().pow(Float::with_val(wp, &z + 0.5f64));
    lead *= (-za).exp();
    Float::with_val(bits, lead * sum)
}

/// Γ(x) for x > 0 at `bits` precision.
pub(crate) fn gamma_float(x: &Float, bits: u32) -> Result<Float> {
    if !x.is_finite() || x.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Domain("gamma requires a positive argument".into()));
    }
    let wp = bits + 32;
    let n = x.clone().floor();
    let f = Float::with_val(wp, x - &n);
    let n = n.to_u32_saturating().unwrap_or(u32::MAX);
    if f.is_zero() {
        if n <= RECURRENCE_LIMIT {
            let fact = Integer::from(Integer::factorial(n - 1));
            return Ok(Float::with_val(bits, fact));
        }
        let xm1 = Float::with_val(wp, x - 1u32);
        return Ok(Float::with_val(bits, spouge_gamma1p(&xm1, wp)));
    }
    if n > RECURRENCE_LIMIT {
        let xm1 = Float::with_val(wp, x - 1u32);
        return Ok(Float::with_val(bits, spouge_gamma1p(&xm1, wp)));
    }
    // Γ(f) = Γ(1+f)/f, then Γ(n+f) = Γ(f)·f(f+1)…(f+n-1)
    let mut g = spouge_gamma1p(&f, wp);
    if n == 0 {
        g /= &f;
    } else {
        for i in 1..n {
            g *= Float::with_val(wp, &f + i);
        }
    }
    Ok(Float::with_val(bits, g))
}

/// Memo of Γ(1 + r/q) for fractional parts r/q ∈ [0, 1), keyed by precision.
#[derive(Default, Debug)]
pub struct GammaCache {
    map: Mutex<HashMap<(i64, i64, u32), Float>>,
}

impl GammaCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache shared by [`gamma_rational`].
    pub fn global() -> &'static GammaCache {
        static CACHE: OnceLock<GammaCache> = OnceLock::new();
        CACHE.get_or_init(GammaCache::new)
    }

    /// Γ(1 + r/q) with 0 ≤ r < q.
    pub fn gamma1p_fraction(&self, r: i64, q: i64, bits: u32) -> Float {
        let key = (r, q, bits);
        if let Some(v) = self.map.lock().unwrap().get(&key) {
            return v.clone();
        }
        let f = Float::with_val(bits + 32, r) / q;
        let v = if r == 0 {
            Float::with_val(bits, 1u32)
        } else {
            Float::with_val(bits, spouge_gamma1p(&f, bits + 32))
        };
        self.map.lock().unwrap().insert(key, v.clone());
        v
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn reduce(p: i64, q: i64) -> Result<(i64, i64)> {
    if q == 0 {
        return Err(Error::Domain("zero denominator".into()));
    }
    let (mut p, mut q) = if q < 0 { (-p, -q) } else { (p, q) };
    let g = num_gcd(p.abs(), q);
    p /= g;
    q /= g;
    Ok((p, q))
}

fn num_gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

/// Γ(1 + p/q) for p/q ≥ 0 at `bits`, built from the cached fractional part
/// and upward recurrence.
pub(crate) fn gamma1p_rational_float(p: i64, q: i64, bits: u32, cache: &GammaCache) -> Result<Float> {
    let (p, q) = reduce(p, q)?;
    if p < 0 {
        return Err(Error::Domain("gamma requires a positive argument".into()));
    }
    let n = p / q;
    let r = p % q;
    let wp = bits + 32;
    if n > RECURRENCE_LIMIT as i64 {
        let x = Float::with_val(wp, p) / q;
        return Ok(Float::with_val(bits, spouge_gamma1p(&x, wp)));
    }
    let mut g = Float::with_val(wp, cache.gamma1p_fraction(r, q, wp));
    // Γ(1 + r/q + n) = Γ(1 + r/q)·∏_{i=1..n} (r + i q)/q
    for i in 1..=n {
        g *= r + i * q;
        g /= q;
    }
    Ok(Float::with_val(bits, g))
}

/// Γ(x) for x > 0, evaluated at the internal precision of `ctx`.
pub fn gamma(x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let v = gamma_float(x.as_float(), ctx.internal_bits())?;
    Ok(BigReal::from_float(v, ctx.working_digits))
}

/// Γ(p/q) for p/q > 0 using the shared fractional-part cache.
pub fn gamma_rational(p: i64, q: i64, ctx: &PrecisionContext) -> Result<BigReal> {
    let (p, q) = reduce(p, q)?;
    if p <= 0 {
        return Err(Error::Domain("gamma requires a positive argument".into()));
    }
    let bits = ctx.internal_bits();
    // Γ(p/q) = Γ(1 + (p-q)/q) when p ≥ q, else Γ(1 + p/q)·q/p
    let v = if p >= q {
        gamma1p_rational_float(p - q, q, bits, GammaCache::global())?
    } else {
        let mut g = gamma1p_rational_float(p, q, bits + 8, GammaCache::global())?;
        g *= q;
        g /= p;
        g
    };
    Ok(BigReal::from_float(v, ctx.working_digits))
}
