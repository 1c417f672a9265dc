//! Proper-increment loop: follow one root of det M^[N] as N grows and read
//! two-sided bounds off the alternating extrema of the root sequence.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rug::ops::Pow;

use super::roots::{bracket_roots, refine_root, DetFunction, StepPolicy};
use crate::error::{Error, Result};
use crate::precision::{BigReal, PrecisionContext, MIN_DIGITS};
use crate::shapes::ShapeClassDescriptor;

/// ceil(multiplier·N) digits; the context adds its guard digits on top.
pub fn working_precision(n: usize, multiplier: f64) -> u32 {
    let m = multiplier.max(1.0);
    // the small offset keeps 1.2·100 from rounding up to 121
    ((m * n as f64) - 1e-9).ceil().max(1.0) as u32
}

/// The properly incremented N values N_start, N_start + ΔN, …, ≤ N_max.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IncrementSchedule {
    pub n_start: usize,
    pub delta_n: usize,
    pub n_max: usize,
}

impl IncrementSchedule {
    pub fn new(n_start: usize, delta_n: usize, n_max: usize) -> Result<Self> {
        if delta_n == 0 || n_start == 0 || n_max < n_start {
            return Err(Error::Config(format!(
                "bad schedule start {n_start}, step {delta_n}, max {n_max}"
            )));
        }
        Ok(IncrementSchedule { n_start, delta_n, n_max })
    }

    pub fn values(&self) -> Vec<usize> {
        (self.n_start..=self.n_max).step_by(self.delta_n).collect()
    }
}

/// Where the tracked root starts.
#[derive(Clone, Debug)]
pub enum Seed {
    /// A bracket with opposite determinant signs at N_start.
    Bracket(BigReal, BigReal),
    /// An approximate eigenvalue; a window around it is searched.
    Estimate(BigReal),
    /// The k-th root (1-based) of a sweep at N_start.
    Index(usize),
}

/// Options for [`bound_driver`].
#[derive(Clone, Debug)]
pub struct DriverConfig {
    pub schedule: IncrementSchedule,
    /// Stop once ε < 10^(−target_digits).
    pub target_digits: u32,
    /// Digits each λ^[N] is refined to; defaults to target + 4.
    pub refine_digits: Option<u32>,
    /// Overrides the descriptor's precision multiplier.
    pub multiplier: Option<f64>,
    pub guard_digits: u32,
    /// Keep going through N_max even after the target is met.
    pub run_to_end: bool,
    /// Append-only checkpoint; existing records are replayed.
    pub checkpoint: Option<PathBuf>,
}

impl DriverConfig {
    pub fn new(schedule: IncrementSchedule, target_digits: u32) -> Self {
        DriverConfig {
            schedule,
            target_digits,
            refine_digits: None,
            multiplier: None,
            guard_digits: 10,
            run_to_end: false,
            checkpoint: None,
        }
    }

    fn refine(&self) -> u32 {
        self.refine_digits.unwrap_or(self.target_digits + 4)
    }

    fn natural(&self, descriptor: &ShapeClassDescriptor, n: usize) -> u32 {
        working_precision(n, self.multiplier.unwrap_or(descriptor.precision_multiplier))
    }

    /// Digits λ^[N] is refined to: the configured floor, raised to resolve
    /// the last step of the history so that slow alternation stays
    /// visible, but never beyond what the N-rule precision supports.
    fn refine_at(&self, descriptor: &ShapeClassDescriptor, n: usize, h: &[(usize, BigReal)]) -> u32 {
        let base = self.refine();
        match step_digits(h) {
            Some(d) => {
                let want = (d.ceil() as u32).saturating_add(6);
                let cap = self.natural(descriptor, n).saturating_sub(6).max(base);
                want.clamp(base, cap)
            }
            None => base,
        }
    }

    /// Working digits used at N for a given refinement target.
    pub fn digits_at(&self, descriptor: &ShapeClassDescriptor, n: usize, refine: u32) -> u32 {
        self.natural(descriptor, n).max(refine + 8).max(MIN_DIGITS)
    }
}

/// One step of the root history.
#[derive(Clone, Debug, PartialEq)]
pub struct HistoryEntry {
    pub n: usize,
    pub lambda: BigReal,
    pub det_evals: usize,
    pub digits: u32,
}

/// A pair of adjacent extrema of the root history and its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub lambda_lo: BigReal,
    pub lambda_hi: BigReal,
    pub n_down: usize,
    pub n_up: usize,
    pub epsilon: BigReal,
    pub digits_d: BigReal,
    pub rho: BigReal,
    /// ε reached the requested target.
    pub converged: bool,
    pub history: Vec<(usize, BigReal)>,
}

impl BoundResult {
    pub fn n_hat(&self) -> usize {
        self.n_up.max(self.n_down)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Extremum {
    Min,
    Max,
}

/// Strict local extrema of the λ sequence as (history index, kind).
fn extrema(h: &[(usize, BigReal)]) -> Vec<(usize, Extremum)> {
    let mut out = Vec::new();
    for i in 1..h.len().saturating_sub(1) {
        let (a, b, c) = (&h[i - 1].1, &h[i].1, &h[i + 1].1);
        if b > a && b > c {
            out.push((i, Extremum::Max));
        } else if b < a && b < c {
            out.push((i, Extremum::Min));
        }
    }
    out
}

fn diagnostics(h: &[(usize, BigReal)], i_lo: usize, i_hi: usize, target: u32) -> BoundResult {
    let lo = h[i_lo].1.clone();
    let hi = h[i_hi].1.clone();
    let digits = lo.digits().min(hi.digits());
    let mid = (&lo + &hi) / BigReal::from_i64(2, digits);
    let eps = (&hi - &lo) / mid;
    let d = BigReal::from_float(-eps.as_float().clone().log10(), digits);
    let (n_down, n_up) = (h[i_lo].0, h[i_hi].0);
    let n_hat = n_down.max(n_up);
    let rho = &d / &BigReal::from_i64(n_hat as i64, digits);
    let tol = BigReal::from_f64(10f64, digits);
    let tol = BigReal::from_float(tol.into_float().pow(-(target as i32)), digits);
    BoundResult {
        converged: eps < tol,
        lambda_lo: lo,
        lambda_hi: hi,
        n_down,
        n_up,
        epsilon: eps,
        digits_d: d,
        rho,
        history: h.to_vec(),
    }
}

/// Every confirmed bound pair of a history, oldest first. A pair of
/// adjacent extrema counts only once a later maximum and a later minimum
/// exist and both stay inside it.
pub fn confirmed_pairs(h: &[(usize, BigReal)], target_digits: u32) -> Vec<BoundResult> {
    let ex = extrema(h);
    let mut out = Vec::new();
    for w in 0..ex.len().saturating_sub(1) {
        let (i, ki) = ex[w];
        let (j, kj) = ex[w + 1];
        if ki == kj {
            continue;
        }
        let (i_lo, i_hi) = if ki == Extremum::Min { (i, j) } else { (j, i) };
        let later = &ex[w + 2..];
        let later_max = later.iter().find(|e| e.1 == Extremum::Max);
        let later_min = later.iter().find(|e| e.1 == Extremum::Min);
        let (Some(&(a, _)), Some(&(b, _))) = (later_max, later_min) else {
            continue;
        };
        if h[a].1 <= h[i_hi].1 && h[b].1 >= h[i_lo].1 {
            out.push(diagnostics(h, i_lo, i_hi, target_digits));
        }
    }
    out
}

/// The newest confirmed pair of a finished history.
pub fn bounds_from_history(h: &[(usize, BigReal)], target_digits: u32) -> Result<BoundResult> {
    confirmed_pairs(h, target_digits).pop().ok_or_else(|| {
        Error::NoAlternation(format!(
            "no confirmed alternation in {} root estimates (N = {}..{})",
            h.len(),
            h.first().map_or(0, |e| e.0),
            h.last().map_or(0, |e| e.0)
        ))
    })
}

const WINDOW_EXPANSIONS: usize = 6;

/// −log10 of the relative change between the last two estimates.
fn step_digits(h: &[(usize, BigReal)]) -> Option<f64> {
    if h.len() < 2 {
        return None;
    }
    let (a, b) = (&h[h.len() - 2].1, &h[h.len() - 1].1);
    let rel = ((a - b) / b.clone()).abs();
    Some(if rel.is_zero() { 1e6 } else { -rel.as_float().clone().log10().to_f64() })
}

/// Relative tracking half-width 10^(−max(2, D/2)) from the last step.
fn window_digits(h: &[(usize, BigReal)]) -> f64 {
    step_digits(h).map_or(2.0, |d| (d / 2.0).max(2.0))
}

/// Finds a sign change of det within a window around `center`, widening
/// it by ×4 up to six times.
fn track(f: &DetFunction, center: &BigReal, window_digits: f64) -> Result<(BigReal, BigReal)> {
    let digits = f.context().working_digits;
    let c = center.with_digits(digits);
    let window_digits = window_digits.min(digits as f64 - 6.0);
    let mut w = BigReal::from_float(
        rug::Float::with_val(crate::precision::digits_to_bits(digits), 10u32).pow(-window_digits),
        digits,
    ) * c.abs();
    let four = BigReal::from_i64(4, digits);
    for _ in 0..=WINDOW_EXPANSIONS {
        let lo = &c - &w;
        let hi = &c + &w;
        if lo.signum() > 0 {
            let a = f.eval(&lo)?;
            let b = f.eval(&hi)?;
            if a.sign == 0 {
                return Ok((lo.clone(), lo));
            }
            if b.sign == 0 {
                return Ok((hi.clone(), hi));
            }
            if a.sign != b.sign {
                return Ok((lo, hi));
            }
        }
        w = w * four.clone();
    }
    Err(Error::LostRoot(format!(
        "no determinant sign change near λ = {} at N = {}",
        center.to_decimal_digits(20),
        f.n()
    )))
}

fn round_trip(v: &BigReal) -> String {
    // enough decimal digits to parse back to the same binary value
    let n = (v.bits() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    v.to_decimal_digits(n)
}

const CHECKPOINT_HEADER: &str = "# polyeig checkpoint";

fn read_checkpoint(path: &Path, label: &str) -> Result<Vec<HistoryEntry>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::Io(format!("{}: {e}", path.display()))),
    };
    let mut out = Vec::new();
    for (ln, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::Io(e.to_string()))?;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix(CHECKPOINT_HEADER) {
            if rest.trim() != label {
                return Err(Error::Config(format!(
                    "checkpoint {} belongs to {}, not {label}",
                    path.display(),
                    rest.trim()
                )));
            }
            continue;
        }
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let bad = || Error::Io(format!("{}:{}: malformed record {t:?}", path.display(), ln + 1));
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad());
        }
        let n = f[0].parse().map_err(|_| bad())?;
        let det_evals = f[2].parse().map_err(|_| bad())?;
        let digits = f[3].parse().map_err(|_| bad())?;
        let lambda = BigReal::parse(f[1], digits).map_err(|_| bad())?;
        out.push(HistoryEntry { n, lambda, det_evals, digits });
    }
    Ok(out)
}

fn append_checkpoint(path: &Path, label: &str, e: &HistoryEntry) -> Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rec = String::new();
    if fresh {
        rec.push_str(&format!("{CHECKPOINT_HEADER} {label}\n# N lambda det_evals precision\n"));
    }
    rec.push_str(&format!("{} {} {} {}\n", e.n, round_trip(&e.lambda), e.det_evals, e.digits));
    f.write_all(rec.as_bytes())
        .and_then(|_| f.sync_data())
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Roots of det M^[N] over [lo, hi], refined to `refine_digits`.
pub fn sweep(
    descriptor: &ShapeClassDescriptor,
    n: usize,
    lo: f64,
    hi: f64,
    policy: Option<StepPolicy>,
    ctx: PrecisionContext,
    refine_digits: u32,
) -> Result<Vec<super::RootEstimate>> {
    descriptor.check_n(n)?;
    let f = DetFunction::new(descriptor, n, ctx)?;
    let policy = match policy {
        Some(p) => p,
        None => StepPolicy::Weyl { area: descriptor.region_area()? },
    };
    bracket_roots(&f, lo, hi, policy)?
        .iter()
        .map(|(a, b)| refine_root(&f, (a, b), refine_digits))
        .collect()
}

fn seed_bracket(
    descriptor: &ShapeClassDescriptor,
    f: &DetFunction,
    index: usize,
) -> Result<(BigReal, BigReal)> {
    if index == 0 {
        return Err(Error::Config("eigenvalue indices start at 1".into()));
    }
    let area = descriptor.region_area()?;
    let policy = StepPolicy::Weyl { area };
    let step = policy.step();
    // Weyl: about area·λ/(4π) levels below λ in the full domain
    let mut hi = (4.0 * std::f64::consts::PI * (index as f64 + 2.0) / area).max(8.0 * step);
    for _ in 0..8 {
        let br = bracket_roots(f, step / 4.0, hi, policy)?;
        if br.len() >= index {
            return Ok(br[index - 1].clone());
        }
        hi *= 2.0;
    }
    Err(Error::Convergence(format!("could not locate root {index} at N = {}", f.n())))
}

/// Tracks one root through the schedule and returns the newest confirmed
/// alternation bound. Stops early when ε < 10^(−target_digits).
pub fn bound_driver(descriptor: &ShapeClassDescriptor, seed: Seed, cfg: &DriverConfig) -> Result<BoundResult> {
    let (history, _) = track_history(descriptor, seed, cfg)?;
    let h: Vec<(usize, BigReal)> = history.iter().map(|e| (e.n, e.lambda.clone())).collect();
    bounds_from_history(&h, cfg.target_digits)
}

/// The root history behind [`bound_driver`], plus whether it stopped early.
pub fn track_history(
    descriptor: &ShapeClassDescriptor,
    seed: Seed,
    cfg: &DriverConfig,
) -> Result<(Vec<HistoryEntry>, bool)> {
    let label = descriptor.label();
    let ns = cfg.schedule.values();
    for &n in &ns {
        descriptor.check_n(n)?;
    }
    let mut history: Vec<HistoryEntry> = match &cfg.checkpoint {
        Some(p) => read_checkpoint(p, &label)?,
        None => Vec::new(),
    };
    if history.len() > ns.len() || history.iter().zip(&ns).any(|(e, &n)| e.n != n) {
        return Err(Error::Config("checkpoint does not follow the requested schedule".into()));
    }
    let pairs = |h: &[HistoryEntry]| {
        let v: Vec<(usize, BigReal)> = h.iter().map(|e| (e.n, e.lambda.clone())).collect();
        v
    };
    let done = |h: &[HistoryEntry]| {
        !cfg.run_to_end
            && confirmed_pairs(&pairs(h), cfg.target_digits)
                .last()
                .is_some_and(|b| b.converged)
    };
    // a replayed history may already be finished
    for k in 1..=history.len() {
        if done(&history[..k]) {
            history.truncate(k);
            return Ok((history, true));
        }
    }
    for &n in &ns[history.len()..] {
        let refine = cfg.refine_at(descriptor, n, &pairs(&history));
        let digits = cfg.digits_at(descriptor, n, refine);
        let ctx = PrecisionContext::with_guard(digits, cfg.guard_digits)?;
        let f = DetFunction::new(descriptor, n, ctx)?;
        let bracket = match (history.last(), &seed) {
            (Some(prev), _) => track(&f, &prev.lambda, window_digits(&pairs(&history)))?,
            (None, Seed::Bracket(a, b)) => (a.with_digits(digits), b.with_digits(digits)),
            (None, Seed::Estimate(l)) => track(&f, l, 2.0)?,
            (None, Seed::Index(k)) => seed_bracket(descriptor, &f, *k)?,
        };
        let root = refine_root(&f, (&bracket.0, &bracket.1), refine)?;
        let entry = HistoryEntry {
            n,
            lambda: root.lambda,
            det_evals: f.evals(),
            digits,
        };
        // the history must not depend on whether it was replayed
        let entry = HistoryEntry {
            lambda: BigReal::parse(&round_trip(&entry.lambda), digits)?,
            ..entry
        };
        log::info!(
            "{label}: N = {n}, λ = {}, {} det evaluations at {digits} digits",
            entry.lambda.to_decimal_digits(refine as usize),
            entry.det_evals
        );
        if let Some(p) = &cfg.checkpoint {
            append_checkpoint(p, &label, &entry)?;
        }
        history.push(entry);
        if done(&history) {
            return Ok((history, true));
        }
    }
    Ok((history, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(v: &[f64]) -> Vec<(usize, BigReal)> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| (4 + 2 * i, BigReal::from_f64(x, 30)))
            .collect()
    }

    #[test]
    fn precision_rule() {
        assert_eq!(working_precision(100, 1.2), 120);
        assert_eq!(working_precision(40, 1.7), 68);
        assert_eq!(working_precision(37, 1.0), 37);
    }

    #[test]
    fn schedule_values() {
        let s = IncrementSchedule::new(4, 2, 11).unwrap();
        assert_eq!(s.values(), vec![4, 6, 8, 10]);
        assert!(IncrementSchedule::new(4, 0, 10).is_err());
    }

    #[test]
    fn constant_history_has_no_alternation() {
        let h = hist(&[1.0; 10]);
        assert!(matches!(bounds_from_history(&h, 5), Err(Error::NoAlternation(_))));
        let h = hist(&[1.0, 0.9, 0.8, 0.7, 0.6]);
        assert!(matches!(bounds_from_history(&h, 5), Err(Error::NoAlternation(_))));
    }

    #[test]
    fn alternating_history() {
        // the 8/10 pair is confirmed by the maximum at 12 and minimum at 14
        let h = hist(&[1.5, 0.5, 1.2, 0.8, 1.1, 0.9, 1.05]);
        let all = confirmed_pairs(&h, 1);
        assert!(!all.is_empty());
        let b = &all[0];
        assert_eq!((b.n_up, b.n_down), (8, 6));
        let b = bounds_from_history(&h, 1).unwrap();
        assert_eq!((b.n_up, b.n_down), (8, 10));
        assert!((b.epsilon.to_f64() - 0.4 / 1.0).abs() < 1e-12);
        assert!((b.digits_d.to_f64() + 0.4f64.log10()).abs() < 1e-12);
        assert!((b.rho.to_f64() - b.digits_d.to_f64() / 10.0).abs() < 1e-12);
    }

    #[test]
    fn non_nested_pair_is_not_confirmed() {
        // the later maximum exceeds the candidate upper bound
        let h = hist(&[1.5, 0.5, 1.2, 0.8, 1.3, 0.9, 1.0]);
        for b in confirmed_pairs(&h, 1) {
            assert!(!(b.n_up == 8 && b.n_down == 10));
        }
    }
}
