//! Bound notation: shared leading digits, then a rounded-down subscript
//! tail and a rounded-up superscript tail, as in `9.6397238_{43}^{55}`.

use rug::float::Round;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::BigReal;

/// The value as the decimal it denotes at its own precision, so that an
/// input parsed from "9.639723843" is not floored to ...842999.
fn exact(v: &BigReal) -> Rational {
    if v.is_zero() {
        return Rational::new();
    }
    let (neg, digits, exp) = v
        .as_float()
        .to_sign_string_exp_round(10, Some(v.digits() as usize), Round::Nearest);
    let mant: Integer = digits.parse().expect("decimal digits");
    let r = Rational::from(mant) * pow10(exp.unwrap_or(0) as i64 - digits.len() as i64);
    if neg {
        -r
    } else {
        r
    }
}

fn pow10(k: i64) -> Rational {
    let p = Integer::from(Integer::u_pow_u(10, k.unsigned_abs() as u32));
    if k >= 0 {
        Rational::from(p)
    } else {
        Rational::from((Integer::from(1), p))
    }
}

/// Digits of floor(x·10^k) or ceil(x·10^k) for x ≥ 0.
fn scaled(x: &Rational, k: i64, up: bool) -> Integer {
    let s = Rational::from(x * &pow10(k));
    let (fl, rem) = {
        let (n, d) = s.into_numer_denom();
        let (q, r) = n.div_rem_floor(d);
        (q, r)
    };
    if up && rem != 0 {
        fl + 1u32
    } else {
        fl
    }
}

/// Places a decimal point `k` digits from the right of `digits`.
fn with_point(digits: &str, k: usize) -> String {
    if k == 0 {
        return digits.to_string();
    }
    let padded = if digits.len() <= k {
        format!("{}{}", "0".repeat(k + 1 - digits.len()), digits)
    } else {
        digits.to_string()
    };
    let split = padded.len() - k;
    format!("{}.{}", &padded[..split], &padded[split..])
}

/// `prefix_{lo}^{hi}` with `tail` digits after the shared prefix; the low
/// tail is rounded down and the high tail up, so the printed interval
/// always encloses [lo, hi]. When the two numbers share no leading digit
/// the integer parts are printed, as in `_{1}^{2}`.
pub fn format_bound(lo: &BigReal, hi: &BigReal, tail: usize) -> String {
    let tail = tail.max(1);
    if lo.signum() < 0 || hi <= lo {
        return format!("[{}, {}]", lo, hi);
    }
    let (l, h) = (exact(lo), exact(hi));
    // decimal exponent of hi: hi < 10^e
    let mut e: i64 = 0;
    while Rational::from(&h / &pow10(e)) >= 1 {
        e += 1;
    }
    while e > -400 && Rational::from(&h / &pow10(e - 1)) < 1 {
        e -= 1;
    }
    // find the shared prefix length on the exact values
    let mut shared = 0i64;
    loop {
        let k = shared + 1 - e;
        if scaled(&l, k, false) != scaled(&h, k, false) || shared > 4000 {
            break;
        }
        shared += 1;
    }
    if shared == 0 {
        let a = scaled(&l, 0, false);
        let b = scaled(&h, 0, true);
        return format!("_{{{a}}}^{{{b}}}");
    }
    // k decimals keep `tail` digits beyond the shared prefix
    let k = (shared + tail as i64 - e).max(0);
    let a = with_point(&scaled(&l, k, false).to_string(), k as usize);
    let b = with_point(&scaled(&h, k, true).to_string(), k as usize);
    let width = a.len().max(b.len());
    let a = format!("{}{}", "0".repeat(width - a.len()), a);
    let b = format!("{}{}", "0".repeat(width - b.len()), b);
    let common = a.bytes().zip(b.bytes()).take_while(|(x, y)| x == y).count();
    // at least one digit stays in each tail
    let common = common.min(width - 1);
    format!("{}_{{{}}}^{{{}}}", &a[..common], &a[common..], &b[common..])
}

/// Inverse of [`format_bound`]: the interval the notation denotes.
pub fn parse_bound(s: &str, digits: u32) -> Result<(BigReal, BigReal)> {
    let bad = || Error::Domain(format!("malformed bound {s:?}"));
    let (prefix, rest) = s.split_once("_{").ok_or_else(bad)?;
    let (lo_tail, rest) = rest.split_once("}^{").ok_or_else(bad)?;
    let hi_tail = rest.strip_suffix('}').ok_or_else(bad)?;
    let join = |t: &str| {
        let v = format!("{prefix}{t}");
        if v.is_empty() {
            "0".to_string()
        } else {
            v
        }
    };
    Ok((BigReal::parse(&join(lo_tail), digits)?, BigReal::parse(&join(hi_tail), digits)?))
}
