use std::cmp::Ordering;

use rug::{Assign, Float};

use super::gamma::{gamma1p_rational_float, gamma_float, GammaCache};
use super::{digits_to_bits, BigReal, PrecisionContext};
use crate::error::{Error, Result};

/// Extra decimal digits needed to absorb cancellation in the ascending series
/// at argument `x`.
pub fn cancellation_guard_digits(x: f64) -> u32 {
    (0.45 * x.max(0.0)).ceil() as u32
}

/// The normalized ascending series S_m(z) = Σ_j (−z)^j / (j! (m+1)_j) for a
/// rational order m = p/q, so that J_m(x) = (x/2)^m / Γ(m+1) · S_m(x²/4).
///
/// Each term costs one full-precision multiply and two small-integer
/// operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BesselSeries {
    p: i64,
    q: i64,
}

impl BesselSeries {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q <= 0 || p < 0 {
            return Err(Error::Domain(format!("invalid Bessel order {p}/{q}")));
        }
        Ok(BesselSeries { p, q })
    }

    /// Series with order raised by one.
    pub fn next_order(&self) -> Self {
        BesselSeries {
            p: self.p + self.q,
            q: self.q,
        }
    }

    pub fn order_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// S_m(z) at `bits` precision, truncated once a term falls `tol_bits` below
    /// the largest term seen and the tail is provably smaller.
    pub fn sum(&self, z: &Float, bits: u32, tol_bits: u32, cap: usize) -> Result<Float> {
        let mut s = Float::with_val(bits, 1u32);
        if z.is_zero() {
            return Ok(s);
        }
        let zf = z.to_f64();
        let mut t = Float::with_val(bits, 1u32);
        let mut max_exp = 1i64;
        let (p, q) = (self.p as u64, self.q as u64);
        for j in 1u64.. {
            if j as usize > cap {
                return Err(Error::Convergence(format!(
                    "Bessel series for order {}/{} did not converge in {cap} terms",
                    self.p, self.q
                )));
            }
            // t_j = −t_{j−1} · z q / (j (p + q j))
            t *= z;
            let den = j * (p + q * j);
            if q != 1 {
                t *= q;
            }
            t /= den;
            t = -t;
            s += &t;
            let e = t.get_exp().map(i64::from).unwrap_or(i64::MIN);
            if e > max_exp {
                max_exp = e;
            }
            let ratio = zf * q as f64 / den as f64;
            if ratio <= 0.5 && (t.is_zero() || e < max_exp - tol_bits as i64) {
                break;
            }
        }
        Ok(s)
    }
}

fn check_args(m: &Float, x: &Float) -> Result<()> {
    if m.is_sign_negative() && !m.is_zero() {
        return Err(Error::Domain("Bessel order must be non-negative".into()));
    }
    if x.is_sign_negative() && !x.is_zero() {
        return Err(Error::Domain("Bessel argument must be non-negative".into()));
    }
    if !m.is_finite() || !x.is_finite() {
        return Err(Error::Domain("non-finite Bessel input".into()));
    }
    Ok(())
}

/// J_m(x) for real m ≥ 0 at `bits` relative precision (before cancellation
/// guard), general-order path.
pub(crate) fn bessel_j_float(m: &Float, x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    check_args(m, x)?;
    let out_bits = ctx.internal_bits();
    if x.is_zero() {
        return Ok(Float::with_val(out_bits, if m.is_zero() { 1u32 } else { 0u32 }));
    }
    let guard = ctx.guard_digits + cancellation_guard_digits(x.to_f64());
    let wp = digits_to_bits(ctx.working_digits + guard);
    let tol = wp;
    let half = Float::with_val(wp, x) / 2u32;
    let z = Float::with_val(wp, half.square_ref());
    let mut lead = Float::with_val(wp, half.ln_ref());
    lead *= m;
    lead.exp_mut();
    let g = gamma_float(&Float::with_val(wp, m + 1u32), wp)?;
    lead /= g;
    let s = general_sum(m, &z, wp, tol, ctx.term_cap())?;
    Ok(Float::with_val(out_bits, lead * s))
}

fn general_sum(m: &Float, z: &Float, bits: u32, tol_bits: u32, cap: usize) -> Result<Float> {
    let mut s = Float::with_val(bits, 1u32);
    if z.is_zero() {
        return Ok(s);
    }
    let zf = z.to_f64();
    let mf = m.to_f64();
    let mut t = Float::with_val(bits, 1u32);
    let mut max_exp = 1i64;
    let mut den = Float::new(bits);
    for j in 1u64.. {
        if j as usize > cap {
            return Err(Error::Convergence(format!(
                "Bessel series did not converge in {cap} terms"
            )));
        }
        den.assign(m + j);
        t *= z;
        t /= &den;
        t /= j;
        t = -t;
        s += &t;
        let e = t.get_exp().map(i64::from).unwrap_or(i64::MIN);
        max_exp = max_exp.max(e);
        let ratio = zf / (j as f64 * (mf + j as f64));
        if ratio <= 0.5 && (t.is_zero() || e < max_exp - tol_bits as i64) {
            break;
        }
    }
    Ok(s)
}

/// J_{p/q}(x) at `ctx`, using the cached Γ of the fractional part and the
/// integer-ratio series.
pub(crate) fn bessel_j_rational_float(
    p: i64,
    q: i64,
    x: &Float,
    ctx: &PrecisionContext,
) -> Result<Float> {
    let series = BesselSeries::new(p, q)?;
    if x.is_sign_negative() && !x.is_zero() {
        return Err(Error::Domain("Bessel argument must be non-negative".into()));
    }
    let out_bits = ctx.internal_bits();
    if x.is_zero() {
        return Ok(Float::with_val(out_bits, if p == 0 { 1u32 } else { 0u32 }));
    }
    let guard = ctx.guard_digits + cancellation_guard_digits(x.to_f64());
    let wp = digits_to_bits(ctx.working_digits + guard);
    let tol = wp;
    let half = Float::with_val(wp, x) / 2u32;
    let z = Float::with_val(wp, half.square_ref());
    let mut lead = Float::with_val(wp, half.ln_ref());
    lead *= p;
    lead /= q;
    lead.exp_mut();
    lead /= gamma1p_rational_float(p, q, wp, GammaCache::global())?;
    let s = series.sum(&z, wp, tol, ctx.term_cap())?;
    Ok(Float::with_val(out_bits, lead * s))
}

/// Bessel function of the first kind J_m(x), m ≥ 0, x ≥ 0, via the ascending
/// series.
pub fn bessel_j(m: &BigReal, x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let v = bessel_j_float(m.as_float(), x.as_float(), ctx)?;
    Ok(BigReal::from_float(v, ctx.working_digits))
}

/// J_{p/q}(x) for a rational order.
pub fn bessel_j_rational(p: i64, q: i64, x: &BigReal, ctx: &PrecisionContext) -> Result<BigReal> {
    let v = bessel_j_rational_float(p, q, x.as_float(), ctx)?;
    Ok(BigReal::from_float(v, ctx.working_digits))
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn refine_bracket(
    mut f: impl FnMut(&Float) -> Result<Float>,
    mut a: Float,
    mut b: Float,
    bits: u32,
    tol_bits: u32,
    max_iter: usize,
) -> Result<Float> {
    let mut fa = f(&a)?;
    let mut fb = f(&b)?;
    let mut side = 0i32;
    for _ in 0..max_iter {
        let width = Float::with_val(bits, &b - &a).abs();
        let scale = Float::with_val(bits, &a + &b).abs();
        if width.is_zero() || width < Float::with_val(bits, &scale >> (tol_bits as i32 + 1)) {
            break;
        }
        let denom = Float::with_val(bits, &fb - &fa);
        let mut c = if denom.is_zero() {
            Float::with_val(bits, &a + &b) / 2u32
        } else {
            let step = Float::with_val(bits, &fb * Float::with_val(bits, &b - &a)) / &denom;
            Float::with_val(bits, &b - &step)
        };
        let (lo, hi) = if a < b { (&a, &b) } else { (&b, &a) };
        if !(c > *lo && c < *hi) {
            c = Float::with_val(bits, &a + &b) / 2u32;
        }
        let fc = f(&c)?;
        if fc.is_zero() {
            return Ok(c);
        }
        if (fc.is_sign_negative()) == (fb.is_sign_negative()) {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2u32;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2u32;
            }
            side = 1;
        }
    }
    let mid = Float::with_val(bits, &a + &b) / 2u32;
    let width = Float::with_val(bits, &b - &a).abs();
    if width > Float::with_val(bits, mid.clone().abs() >> (tol_bits as i32 - 2)) {
        return Err(Error::Convergence("zero refinement did not converge".into()));
    }
    Ok(mid)
}

/// The `index`-th positive zero of J_m.
pub fn bessel_j_zero(m: &BigReal, index: u32, ctx: &PrecisionContext) -> Result<BigReal> {
    if index == 0 {
        return Err(Error::Domain("zero index starts at 1".into()));
    }
    check_args(m.as_float(), &Float::with_val(8, 1))?;
    let mf = m.to_f64();
    let span = (index as f64 + mf / 2.0 + 2.0) * std::f64::consts::PI + 20.0;
    let scan_ctx = PrecisionContext::with_guard(ctx.working_digits.min(30), ctx.guard_digits)?;
    let bits = ctx.internal_bits();
    let eval_scan = |x: f64| -> Result<Float> {
        bessel_j_float(m.as_float(), &Float::with_val(bits, x), &scan_ctx)
    };
    let step = 0.5;
    let mut x0 = step;
    let mut f0 = eval_scan(x0)?;
    let mut found = 0;
    while x0 < span {
        let x1 = x0 + step;
        let f1 = eval_scan(x1)?;
        if f1.is_zero() || f0.cmp0() != f1.cmp0() && f0.cmp0() != Some(Ordering::Equal) {
            found += 1;
            if found == index {
                let root = refine_bracket(
                    |x| bessel_j_float(m.as_float(), x, ctx),
                    Float::with_val(bits, x0),
                    Float::with_val(bits, x1),
                    bits,
                    ctx.working_bits() + 4,
                    60 + 4 * ctx.working_digits as usize,
                )?;
                return Ok(BigReal::from_float(root, ctx.working_digits));
            }
        }
        x0 = x1;
        f0 = f1;
    }
    Err(Error::Convergence(format!(
        "zero {index} of J_{mf} not bracketed below x = {span:.1}"
    )))
}
