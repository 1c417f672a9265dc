use std::cmp::Ordering;

use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;

use crate::assembly::PointMatchMatrix;
use crate::precision::{bits_to_digits, BigReal};

/// det M as sign and log10 magnitude, plus the value itself.
#[derive(Clone, Debug)]
pub struct DetValue {
    pub sign: i32,
    pub log10_magnitude: BigReal,
    /// The determinant. MPFR's exponent range is wide enough that this
    /// neither overflows nor underflows for any matrix this crate builds.
    pub value: Float,
}

impl DetValue {
    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }
}

/// Rows below this size are eliminated serially.
const PARALLEL_MIN: usize = 24;

/// Gaussian elimination with partial pivoting on a row-major n×n array at
/// the entries' precision.
pub fn det_entries(n: usize, entries: &[Float]) -> DetValue {
    assert_eq!(entries.len(), n * n, "matrix must be square");
    let bits = entries.iter().map(Float::prec).max().unwrap_or(64);
    let digits = bits_to_digits(bits).max(10);
    let mut rows: Vec<Vec<Float>> = (0..n)
        .map(|i| entries[i * n..(i + 1) * n].iter().map(|v| Float::with_val(bits, v)).collect())
        .collect();
    let mut sign = 1i32;
    // running product = mant · 2^exp
    let mut mant = Float::with_val(bits, 1u32);
    let mut exp: i64 = 0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| {
                rows[a][col]
                    .cmp_abs(&rows[b][col])
                    .unwrap_or(Ordering::Equal)
                    // prefer the earliest row among equals
                    .then(b.cmp(&a))
            })
            .unwrap();
        if rows[piv][col].is_zero() {
            return DetValue {
                sign: 0,
                log10_magnitude: BigReal::from_float(Float::with_val(bits, rug::float::Special::NegInfinity), digits),
                value: Float::with_val(bits, 0u32),
            };
        }
        if piv != col {
            rows.swap(piv, col);
            sign = -sign;
        }
        let (top, rest) = rows.split_at_mut(col + 1);
        let prow = &top[col];
        let p = &prow[col];
        if p.is_sign_negative() {
            sign = -sign;
        }
        mant *= p;
        if let Some(e) = mant.get_exp() {
            mant >>= e;
            exp += e as i64;
        }
        let eliminate = |row: &mut Vec<Float>| {
            if row[col].is_zero() {
                return;
            }
            let f = Float::with_val(bits, &row[col] / p);
            for j in col + 1..n {
                row[j] -= &f * &prow[j];
            }
        };
        if n - col > PARALLEL_MIN {
            rest.par_iter_mut().for_each(eliminate);
        } else {
            rest.iter_mut().for_each(eliminate);
        }
    }
    let abs_mant = Float::with_val(bits, mant.abs_ref());
    let ln2 = Float::with_val(bits, Constant::Log2);
    let mut lg = Float::with_val(bits, abs_mant.ln_ref());
    lg += Float::with_val(bits, &ln2 * exp);
    lg /= Float::with_val(bits, 10u32).ln();
    // row swaps enter through `sign` only
    let mut value = Float::with_val(bits, &abs_mant);
    if sign < 0 {
        value = -value;
    }
    value <<= exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    DetValue {
        sign,
        log10_magnitude: BigReal::from_float(lg, digits),
        value,
    }
}

/// Sign and log-magnitude of det M.
pub fn det_sign(matrix: &PointMatchMatrix) -> DetValue {
    det_entries(matrix.n, &matrix.entries)
}
