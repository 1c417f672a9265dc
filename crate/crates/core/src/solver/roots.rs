use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use super::det::{det_sign, DetValue};
use crate::assembly::MatrixBuilder;
use crate::error::{Error, Result};
use crate::geometry::{wavelength_gap_check, MatchingSet};
use crate::precision::{digits_to_bits, BigReal, PrecisionContext};
use crate::shapes::ShapeClassDescriptor;

/// λ ↦ det M^[N](λ) for one descriptor, N and precision, counting calls.
pub struct DetFunction {
    builder: MatrixBuilder,
    evals: AtomicUsize,
    points: Option<MatchingSet>,
}

impl DetFunction {
    pub fn new(descriptor: &ShapeClassDescriptor, n: usize, ctx: PrecisionContext) -> Result<Self> {
        let builder = descriptor.builder(n, ctx)?;
        let points = descriptor.matching_set(n, ctx.internal_digits()).ok();
        Ok(DetFunction {
            builder,
            evals: AtomicUsize::new(0),
            points,
        })
    }

    pub fn from_builder(builder: MatrixBuilder) -> Self {
        DetFunction {
            builder,
            evals: AtomicUsize::new(0),
            points: None,
        }
    }

    pub fn builder(&self) -> &MatrixBuilder {
        &self.builder
    }

    pub fn context(&self) -> &PrecisionContext {
        self.builder.context()
    }

    pub fn n(&self) -> usize {
        self.builder.n()
    }

    pub fn eval(&self, lambda: &BigReal) -> Result<DetValue> {
        self.evals.fetch_add(1, Ordering::Relaxed);
        let m = self.builder.assemble(lambda)?;
        Ok(det_sign(&m))
    }

    pub fn evals(&self) -> usize {
        self.evals.load(Ordering::Relaxed)
    }
}

/// Weyl-density sweep step: a quarter of the mean level spacing 4π/Area.
pub fn weyl_step(area: f64) -> f64 {
    0.25 * 4.0 * std::f64::consts::PI / area
}

/// How the sweep grid is spaced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepPolicy {
    Weyl { area: f64 },
    Fixed(f64),
}

impl StepPolicy {
    pub fn step(&self) -> f64 {
        match self {
            StepPolicy::Weyl { area } => weyl_step(*area),
            StepPolicy::Fixed(s) => *s,
        }
    }
}

/// All sign changes of det on a uniform grid over [lo, hi]. Grid points
/// are evaluated in parallel; the result does not depend on scheduling.
pub fn bracket_roots(
    f: &DetFunction,
    lo: f64,
    hi: f64,
    policy: StepPolicy,
) -> Result<Vec<(BigReal, BigReal)>> {
    let step = policy.step();
    if !(lo > 0.0 && hi > lo && step > 0.0) {
        return Err(Error::Config(format!("invalid sweep range [{lo}, {hi}] with step {step}")));
    }
    let digits = f.context().working_digits;
    let count = ((hi - lo) / step).ceil().max(1.0) as usize;
    let grid: Vec<BigReal> = (0..=count)
        .map(|i| {
            
            BigReal::from_f64(lo, digits)
                + BigReal::from_f64(hi - lo, digits) * BigReal::from_ratio(i as i64, count as i64, digits)
        })
        .collect();
    if let Some(points) = &f.points {
        if !wavelength_gap_check(points, &grid[count], 0.5) {
            log::warn!(
                "matching-point gaps exceed half a wavelength at λ = {hi}; roots near the top of the sweep may be missed"
            );
        }
    }
    let signs: Vec<Result<i32>> = grid.par_iter().map(|l| f.eval(l).map(|d| d.sign)).collect();
    let signs = signs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..count {
        if signs[i] == 0 {
            out.push((grid[i].clone(), grid[i].clone()));
        } else if signs[i] * signs[i + 1] < 0 {
            out.push((grid[i].clone(), grid[i + 1].clone()));
        }
    }
    Ok(out)
}

/// A refined root of det M^[N].
#[derive(Clone, Debug)]
pub struct RootEstimate {
    pub lambda: BigReal,
    pub n: usize,
    pub bracket: (BigReal, BigReal),
    pub refined_digits: u32,
}

const MAX_ITER: usize = 400;

fn det_ratio_step(a: &Float, fa: &Float, b: &Float, fb: &Float, bits: u32) -> Option<Float> {
    // secant through (a, fa), (b, fb)
    let den = Float::with_val(bits, fb - fa);
    if den.is_zero() {
        return None;
    }
    let mut t = Float::with_val(bits, b - a);
    t *= fb;
    t /= &den;
    Some(Float::with_val(bits, b - &t))
}

/// Secant iteration safeguarded by the bracket, falling back to bisection
/// whenever a secant step leaves the bracket or stalls. Stops when the
/// bracket or the last step is below 10^(−target_digits) relative.
pub fn refine_root(f: &DetFunction, bracket: (&BigReal, &BigReal), target_digits: u32) -> Result<RootEstimate> {
    let ctx = *f.context();
    if target_digits + 3 > ctx.working_digits {
        return Err(Error::Precision(format!(
            "target of {target_digits} digits needs more than the {} working digits",
            ctx.working_digits
        )));
    }
    let digits = ctx.working_digits;
    let bits = digits_to_bits(digits);
    let mut a = Float::with_val(bits, bracket.0.as_float());
    let mut b = Float::with_val(bits, bracket.1.as_float());
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let wrap = |x: &Float| BigReal::from_float(x.clone(), digits);
    let mut fa = f.eval(&wrap(&a))?;
    let mut fb = f.eval(&wrap(&b))?;
    let done = |x: &Float| RootEstimate {
        lambda: wrap(x),
        n: f.n(),
        bracket: (bracket.0.clone(), bracket.1.clone()),
        refined_digits: target_digits,
    };
    if fa.is_zero() {
        return Ok(done(&a));
    }
    if fb.is_zero() {
        return Ok(done(&b));
    }
    if fa.sign == fb.sign {
        return Err(Error::Convergence("bracket endpoints have equal determinant signs".into()));
    }
    let tol_rel = Float::with_val(bits, 10u32).pow(-(target_digits as i32));
    // the two most recent iterates drive the secant
    let (mut x0, mut f0) = (a.clone(), fa.value.clone());
    let (mut x1, mut f1) = (b.clone(), fb.value.clone());
    let mut since_halving = 0usize;
    let mut width_at_halving = Float::with_val(bits, &b - &a);
    for _ in 0..MAX_ITER {
        let width = Float::with_val(bits, &b - &a);
        let scale = Float::with_val(bits, a.abs_ref()).max(&Float::with_val(bits, b.abs_ref()));
        let tol = Float::with_val(bits, &scale * &tol_rel);
        if width <= tol {
            let mid = Float::with_val(bits, &a + &b) / 2u32;
            return Ok(done(&mid));
        }
        let mut x = det_ratio_step(&x0, &f0, &x1, &f1, bits);
        // keep secant steps strictly inside the bracket and make sure the
        // bracket halves at least every three steps
        since_halving += 1;
        if let Some(ref xs) = x {
            let inside = xs > &a && xs < &b;
            if !inside || since_halving > 3 {
                x = None;
            }
        }
        let x = x.unwrap_or_else(|| Float::with_val(bits, &a + &b) / 2u32);
        let fx = f.eval(&wrap(&x))?;
        if fx.is_zero() {
            return Ok(done(&x));
        }
        let step = Float::with_val(bits, &x - &x1).abs();
        if fx.sign == fa.sign {
            a = x.clone();
            fa = fx.clone();
        } else {
            b = x.clone();
            fb = fx.clone();
        }
        let new_width = Float::with_val(bits, &b - &a);
        if new_width <= Float::with_val(bits, &width_at_halving / 2u32) {
            width_at_halving = new_width;
            since_halving = 0;
        }
        x0 = std::mem::replace(&mut x1, x.clone());
        f0 = std::mem::replace(&mut f1, fx.value.clone());
        // secant convergence: the last correction is already below tolerance
        if step <= Float::with_val(bits, &tol / 4u32) && step.is_finite() {
            let root = x.clone();
            // confirm the root is bracketed by stepping past it
            let probe = if fx.sign == fa.sign {
                Float::with_val(bits, &root + &tol)
            } else {
                Float::with_val(bits, &root - &tol)
            };
            if probe > a && probe < b {
                let fp = f.eval(&wrap(&probe))?;
                if fp.sign != fx.sign {
                    return Ok(done(&root));
                }
                if fp.sign == fa.sign {
                    a = probe;
                    fa = fp;
                } else {
                    b = probe;
                    fb = fp;
                }
            }
        }
    }
    let _ = fb;
    Err(Error::Convergence(format!(
        "root refinement did not reach {target_digits} digits in {MAX_ITER} iterations"
    )))
}
