//! End-to-end acceptance runs. Each criterion prints one PASS/FAIL line
//! with its measured runtime; the runs execute one after another so the
//! timings are not distorted by sharing the CPU.

use std::time::Instant;

use rug::Float;

use polyeig::eigenfunction::{
    coefficient_pattern_report, coefficients, cutsquare_offquadrant_residual, CoefficientVector, Eigenfunction,
};
use polyeig::geometry::{Distribution, EdgeLine, Vertex};
use polyeig::precision::{bessel_j, digits_to_bits, gamma_rational};
use polyeig::shapes::{descriptor, BoundaryKind, ShapeClassDescriptor};
use polyeig::solver::{
    asymptotic_lambda1, confirmed_pairs, det_entries, format_bound, refine_root, track_history, BoundResult,
    DetFunction, DriverConfig, HistoryEntry, IncrementSchedule, Seed,
};
use polyeig::{BigReal, PrecisionContext, Result};

const DIR: BoundaryKind = BoundaryKind::Dirichlet;
const NEU: BoundaryKind = BoundaryKind::Neumann;
const REF_DIGITS: u32 = 110;

const LSHAPE: &str = "9.6397238440219410527114592623648231562672895258219";
const CUTSQUARE_D: [&str; 3] = [
    "35.631519517191723095205486142077656984096719323704",
    "54.193108444246291974119785856470407689147834351054",
    "73.633308125603834594838286745669500260837320383040",
];
const CUTSQUARE_N: [&str; 3] = [
    "4.8725276926560441293995845626382232443560835019173",
    "11.689012467975646418560663032887456850668757229760",
    "18.413553664057643462436578641928746549080932393352",
];
const STAR_D1: &str = "38.164677849021956120706440125449093027617878759405";
const STAR_N1: &str = "8.1427909641219464723347929848146929523024540073157";
const POLYGON_PI: [(u32, &str); 6] = [
    (5, "6.0221379320426338782980087100542429670053053404485"),
    (6, "5.9174178316136612156885745768389615450082860040929"),
    (7, "5.8664493126559858577124749417588410842427349136980"),
    (8, "5.8384914335924428505166403795638157848367571520259"),
    (9, "5.8218268022702657317355464437169459216717867646205"),
    (10, "5.8112603592191160227888164688111646234421581749002"),
];
const PENTAGON_UNIT: &str = "10.996427084559806648";
const HEXAGON_UNIT: &str = "7.1553391339260551282";
const POLYGON_TABLE: [(u32, &str); 5] = [
    (126, "5.7831998639169811697955997275"),
    (127, "5.7831995381236804121745520138"),
    (128, "5.78319922243209895698523832013"),
    (129, "5.78319891645372682901545245421"),
    (130, "5.78319861981784749432269771828"),
];
const FHM_TABLE: [(usize, &str); 15] = [
    (4, "9.658161723"),
    (6, "9.639624491"),
    (8, "9.6397266319"),
    (10, "9.63972370221"),
    (12, "9.639723854826"),
    (14, "9.6397238430369"),
    (16, "9.63972384412442"),
    (18, "9.639723844010281"),
    (20, "9.6397238440233611"),
    (22, "9.63972384402175875"),
    (24, "9.639723844021965466"),
    (26, "9.639723844021937668"),
    (28, "9.6397238440219415358"),
    (30, "9.6397238440219409820"),
    (32, "9.639723844021941063271"),
];

fn r(s: &str) -> BigReal {
    BigReal::parse(s, REF_DIGITS).expect("reference literal")
}

/// Correct significant digits of `v` against `reference`.
fn correct_digits(v: &BigReal, reference: &BigReal) -> f64 {
    let err = (v.with_digits(REF_DIGITS) - reference).abs().to_f64() / reference.abs().to_f64();
    if err == 0.0 {
        f64::INFINITY
    } else {
        -err.log10()
    }
}

struct Outcome {
    pass: usize,
    fail: usize,
    /// (run label, confirmed pairs nest and bracket the reference)
    nesting: Vec<(String, bool)>,
}

impl Outcome {
    fn line(&mut self, id: &str, ok: bool, detail: &str, seconds: f64) {
        println!("{} [{id}] {detail} ({seconds:.1} s)", if ok { "PASS" } else { "FAIL" });
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
    }

    fn error(&mut self, id: &str, e: polyeig::Error, seconds: f64) {
        self.line(id, false, &format!("error: {e}"), seconds);
    }
}

struct Run {
    desc: ShapeClassDescriptor,
    history: Vec<HistoryEntry>,
    bound: BoundResult,
    seconds: f64,
}

impl Run {
    fn brackets(&self, reference: &BigReal) -> bool {
        // table values are truncated, so the exact value lies just above them
        let slack = r("1e-95");
        self.bound.lambda_lo <= reference + &slack && self.bound.lambda_hi >= *reference
    }

    fn summary(&self) -> String {
        format!(
            "{} eps {:.2e} at N = {}/{}",
            format_bound(&self.bound.lambda_lo, &self.bound.lambda_hi, 2),
            self.bound.epsilon.to_f64(),
            self.bound.n_down,
            self.bound.n_up
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn solve(
    out: &mut Outcome,
    shape: &str,
    class: &str,
    bc: BoundaryKind,
    dist: Option<Distribution>,
    schedule: Option<(usize, usize, usize)>,
    target: u32,
    reference: Option<&BigReal>,
) -> Result<Run> {
    let t = Instant::now();
    let mut desc = descriptor(shape, class, bc)?;
    if let Some(d) = dist {
        desc = desc.with_distribution(d)?;
    }
    let (n0, dn, nmax) = match schedule {
        Some(s) => s,
        None => ((10..).find(|&n| desc.check_n(n).is_ok()).unwrap(), desc.delta_n, 300),
    };
    let cfg = DriverConfig::new(IncrementSchedule::new(n0, dn, nmax)?, target);
    let (history, _) = track_history(&desc, Seed::Index(1), &cfg)?;
    let h: Vec<(usize, BigReal)> = history.iter().map(|e| (e.n, e.lambda.clone())).collect();
    let pairs = confirmed_pairs(&h, target);
    let bound = pairs
        .last()
        .cloned()
        .ok_or_else(|| polyeig::Error::NoAlternation(format!("{}: no confirmed pair", desc.label())))?;
    let run = Run {
        desc,
        history,
        bound,
        seconds: t.elapsed().as_secs_f64(),
    };
    if let Some(reference) = reference {
        let nested = pairs.windows(2).all(|w| w[1].lambda_lo >= w[0].lambda_lo && w[1].lambda_hi <= w[0].lambda_hi);
        out.nesting.push((run.desc.label(), nested && run.brackets(reference)));
    }
    Ok(run)
}

fn reference_decimals(s: &str) -> usize {
    s.split_once('.').map_or(0, |(_, f)| f.len())
}

fn rounded_like(v: &BigReal, printed: &str) -> String {
    let (int, frac) = printed.split_once('.').unwrap();
    v.to_decimal_digits(int.len() + frac.len())
}

fn shared_digits(a: &str, b: &str) -> usize {
    let digits = |s: &str| s.chars().filter(char::is_ascii_digit).collect::<Vec<_>>();
    digits(a).iter().zip(digits(b).iter()).take_while(|(x, y)| x == y).count()
}

/// Low-order equal-spacing L-shape runs: the table rows and the two
/// bounds read off by inspection.
fn fhm(out: &mut Outcome) {
    let t = Instant::now();
    let run = || -> Result<Vec<HistoryEntry>> {
        let desc = descriptor("lshape", "lowest_dirichlet_sym", DIR)?.with_distribution(Distribution::EqualSpaced)?;
        let mut cfg = DriverConfig::new(IncrementSchedule::new(4, 2, 32)?, 22);
        cfg.refine_digits = Some(26);
        cfg.run_to_end = true;
        Ok(track_history(&desc, Seed::Estimate(r("9.64")), &cfg)?.0)
    };
    let history = match run() {
        Ok(h) => h,
        Err(e) => {
            let s = t.elapsed().as_secs_f64();
            out.error("1a", e.clone(), s);
            out.error("1b", e.clone(), s);
            out.error("2", e, s);
            return;
        }
    };
    let secs = t.elapsed().as_secs_f64();
    let lambda = |n: usize| history.iter().find(|e| e.n == n).map(|e| e.lambda.clone());
    let mut exact_bad = Vec::new();
    let mut loose_bad = Vec::new();
    for (n, printed) in FHM_TABLE {
        let Some(v) = lambda(n) else {
            exact_bad.push(format!("N = {n} missing"));
            continue;
        };
        let ours = rounded_like(&v, printed);
        if n <= 12 && ours != printed {
            exact_bad.push(format!("N = {n}: {ours} vs printed {printed}"));
        }
        if shared_digits(&ours, printed) < 10 {
            loose_bad.push(format!("N = {n}: {ours} vs {printed}"));
        }
    }
    let detail = |bad: &[String], what: &str| {
        if bad.is_empty() {
            what.to_string()
        } else {
            format!("{what}; mismatches: {}", bad.join(", "))
        }
    };
    out.line(
        "1a",
        exact_bad.is_empty() && secs < 600.0,
        &detail(&exact_bad, "equal-spacing rows N = 4..12 match every printed digit"),
        secs,
    );
    out.line(
        "1b",
        loose_bad.is_empty() && secs < 600.0,
        &detail(&loose_bad, "rows N = 4..32 agree to at least 10 significant digits"),
        secs,
    );
    let bound = |a: usize, b: usize| -> Option<String> {
        let (x, y) = (lambda(a)?, lambda(b)?);
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        Some(format_bound(&lo, &hi, 2))
    };
    let b1 = bound(12, 14).unwrap_or_default();
    let b2 = bound(20, 22).unwrap_or_default();
    out.line(
        "2",
        b1 == "9.6397238_{43}^{55}" && b2 == "9.63972384402_{17}^{34}",
        &format!("N = 12/14 gives {b1}, N = 20/22 gives {b2}"),
        secs,
    );
}

fn lshape30(out: &mut Outcome) {
    let t = Instant::now();
    let reference = r(LSHAPE);
    match solve(out, "lshape", "lowest_dirichlet_sym", DIR, None, Some((10, 2, 120)), 30, Some(&reference)) {
        Ok(run) => {
            let ok = run.brackets(&reference) && run.bound.epsilon.to_f64() < 1e-30 && run.seconds < 1800.0;
            out.line("3", ok, &format!("L-shape Chebyshev {}", run.summary()), run.seconds);
        }
        Err(e) => out.error("3", e, t.elapsed().as_secs_f64()),
    }
}

fn cutsquare(out: &mut Outcome) -> Vec<(Run, String)> {
    // class A at a single N = 50
    let t = Instant::now();
    let single = || -> Result<BigReal> {
        let desc = descriptor("cutsquare", "A", DIR)?;
        let mut cfg = DriverConfig::new(IncrementSchedule::new(50, 2, 50)?, 30);
        cfg.refine_digits = Some(36);
        let (h, _) = track_history(&desc, Seed::Estimate(r("35.6315")), &cfg)?;
        Ok(h[0].lambda.clone())
    };
    match single() {
        Ok(v) => {
            let secs = t.elapsed().as_secs_f64();
            let d = correct_digits(&v, &r(CUTSQUARE_D[0]));
            out.line(
                "4a",
                d >= 30.0 && secs < 60.0,
                &format!("cut-square class A at N = 50: {} has {d:.1} correct digits", v.to_decimal_digits(34)),
                secs,
            );
        }
        Err(e) => out.error("4a", e, t.elapsed().as_secs_f64()),
    }
    let t = Instant::now();
    let mut runs = Vec::new();
    let mut notes = Vec::new();
    let mut ok = true;
    for (bc, refs) in [(DIR, CUTSQUARE_D), (NEU, CUTSQUARE_N)] {
        for (class, reference) in ["A", "B", "C"].into_iter().zip(refs) {
            let reference = r(reference);
            match solve(out, "cutsquare", class, bc, None, Some((10, 2, 140)), 30, Some(&reference)) {
                Ok(run) => {
                    let good = run.brackets(&reference) && run.bound.epsilon.to_f64() < 1e-30;
                    ok &= good;
                    notes.push(format!(
                        "{class}/{} {} N = {} {:.0} s",
                        bc.name(),
                        if good { "ok" } else { "BAD" },
                        run.bound.n_hat(),
                        run.seconds
                    ));
                    if bc == DIR {
                        runs.push((run, class.to_string()));
                    }
                }
                Err(e) => {
                    ok = false;
                    notes.push(format!("{class}/{}: {e}", bc.name()));
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    out.line(
        "4b",
        ok && secs < 600.0,
        &format!("cut-square three Dirichlet and three Neumann to 30 digits: {}", notes.join("; ")),
        secs,
    );
    runs
}

/// The whole cut square with Chebyshev points on its four matched edges
/// and no class reduction.
fn cutsquare_full(out: &mut Outcome) {
    let t = Instant::now();
    let reference = r(CUTSQUARE_D[0]);
    let run = || -> Result<Option<BoundResult>> {
        let desc = descriptor("cutsquare", "full", DIR)?;
        let mut cfg = DriverConfig::new(IncrementSchedule::new(21, 7, 91)?, 9);
        cfg.run_to_end = true;
        let (h, _) = track_history(&desc, Seed::Index(1), &cfg)?;
        let pairs: Vec<(usize, BigReal)> = h.iter().map(|e| (e.n, e.lambda.clone())).collect();
        Ok(confirmed_pairs(&pairs, 9).into_iter().find(|b| b.n_down == 49 || b.n_up == 49))
    };
    match run() {
        Ok(Some(b)) => {
            let secs = t.elapsed().as_secs_f64();
            let s = format_bound(&b.lambda_lo, &b.lambda_hi, 2);
            let ok = b.lambda_lo <= reference
                && b.lambda_hi >= reference
                && s.starts_with("35.6315195")
                && secs < 60.0;
            out.line("5", ok, &format!("full cut-square N = {}/{} bound {s}", b.n_down, b.n_up), secs);
        }
        Ok(None) => out.line("5", false, "no confirmed pair involving N = 49", t.elapsed().as_secs_f64()),
        Err(e) => out.error("5", e, t.elapsed().as_secs_f64()),
    }
}

fn star(out: &mut Outcome) {
    for (id, class, bc, reference, schedule) in
        [("6a", "S", DIR, STAR_D1, None), ("6b", "B_e", NEU, STAR_N1, Some((40, 2, 200)))]
    {
        let t = Instant::now();
        let reference = r(reference);
        match solve(out, "star", class, bc, None, schedule, 20, Some(&reference)) {
            Ok(run) => {
                let ok = run.brackets(&reference) && run.bound.epsilon.to_f64() < 1e-20 && run.seconds < 1800.0;
                out.line(id, ok, &format!("star {class} {}: {}", bc.name(), run.summary()), run.seconds);
            }
            Err(e) => out.error(id, e, t.elapsed().as_secs_f64()),
        }
    }
}

fn polygons(out: &mut Outcome) {
    let t = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (sigma, reference) in POLYGON_PI {
        let reference = r(reference);
        match solve(out, &format!("polygon{sigma}pi"), "S", DIR, None, None, 30, Some(&reference)) {
            Ok(run) => {
                let good = run.brackets(&reference) && run.bound.epsilon.to_f64() < 1e-30;
                ok &= good;
                notes.push(format!(
                    "σ = {sigma} {} N = {} {:.0} s",
                    if good { "ok" } else { "BAD" },
                    run.bound.n_hat(),
                    run.seconds
                ));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("σ = {sigma}: {e}"));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    out.line(
        "7a",
        ok && secs < 3600.0,
        &format!("area-π polygons to 30 digits: {}", notes.join("; ")),
        secs,
    );
    let t = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (sigma, reference_text) in [(5, PENTAGON_UNIT), (6, HEXAGON_UNIT)] {
        let reference = r(reference_text);
        match solve(out, &format!("polygon{sigma}"), "S", DIR, None, None, 20, None) {
            Ok(run) => {
                // the truncated reference pins λ to [ref, ref + one unit in its last place]
                let ulp = r(&format!("1e-{}", reference_decimals(reference_text)));
                let good = run.bound.lambda_hi >= reference
                    && run.bound.lambda_lo <= &reference + &ulp
                    && run.bound.epsilon.to_f64() < 1e-20;
                ok &= good;
                notes.push(format!("σ = {sigma} {}", run.summary()));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("σ = {sigma}: {e}"));
            }
        }
    }
    out.line(
        "7b",
        ok,
        &format!("unit-edged pentagon and hexagon to 20 digits: {}", notes.join("; ")),
        t.elapsed().as_secs_f64(),
    );
}

fn asymptotics(out: &mut Outcome) {
    let t = Instant::now();
    let ctx = PrecisionContext::new(40).unwrap();
    match asymptotic_lambda1(256, &ctx) {
        Ok(v) => {
            let s = v.to_decimal_digits(20);
            out.line(
                "8a",
                s.starts_with("5.78318762036894"),
                &format!("asymptotic λ₁(256) = {s}"),
                t.elapsed().as_secs_f64(),
            );
        }
        Err(e) => out.error("8a", e, t.elapsed().as_secs_f64()),
    }
    let t = Instant::now();
    let mut worst = 0f64;
    for (sigma, table) in POLYGON_TABLE {
        let Ok(v) = asymptotic_lambda1(sigma, &ctx) else {
            worst = f64::INFINITY;
            continue;
        };
        let reference = r(table);
        worst = worst.max((v.with_digits(REF_DIGITS) - &reference).abs().to_f64() / reference.to_f64());
    }
    out.line(
        "8b",
        worst < 1e-11,
        &format!("asymptotic vs table for σ = 126..130: worst relative error {worst:.2e}"),
        t.elapsed().as_secs_f64(),
    );
}

fn recurrences() -> Result<bool> {
    let ctx = PrecisionContext::new(50)?;
    let x = r("7.3");
    let m = &BigReal::from_i64(5, 60) / &BigReal::from_i64(3, 60);
    let one = BigReal::from_i64(1, 60);
    let lhs = &bessel_j(&(&m - &one), &x, &ctx)? + &bessel_j(&(&m + &one), &x, &ctx)?;
    let rhs = &(&(&m + &m) / &x) * &bessel_j(&m, &x, &ctx)?;
    let bessel = (&lhs - &rhs).abs().to_f64() < 1e-45;
    // Γ(4/3) = Γ(1/3)/3
    let g1 = gamma_rational(1, 3, &ctx)?;
    let g4 = gamma_rational(4, 3, &ctx)?;
    let gamma = (&(&g1 / &BigReal::from_i64(3, 60)) - &g4).abs().to_f64() < 1e-45;
    Ok(bessel && gamma)
}

/// ∂Ψ/∂n against a central difference of Ψ for the converged L-shape mode.
fn derivative_check() -> Result<f64> {
    let (desc, c, ctx) = lshape_mode(24, 50)?;
    let f = Eigenfunction::new(&desc, &c, ctx)?;
    let d = 60;
    let dir = EdgeLine {
        a: r("0.6").with_digits(d),
        b: r("0.8").with_digits(d),
        c: BigReal::zero(d),
    };
    let p = Vertex::new(r("0.4").with_digits(d), r("0.7").with_digits(d));
    let h = r("1e-12").with_digits(d);
    let step = |s: &BigReal| {
        Vertex::new(&p.x + &(&dir.a * s), &p.y + &(&dir.b * s))
    };
    let fd = &(&f.value(&step(&h))? - &f.value(&step(&-h.clone()))?) / &(&h + &h);
    let nd = f.normal_derivative(&p, &dir)?;
    Ok((&fd - &nd).abs().to_f64() / nd.abs().to_f64().max(1e-300))
}

fn lshape_mode(n: usize, digits: u32) -> Result<(ShapeClassDescriptor, CoefficientVector, PrecisionContext)> {
    let desc = descriptor("lshape", "lowest_dirichlet_sym", DIR)?;
    let ctx = PrecisionContext::new(digits)?;
    let f = DetFunction::new(&desc, n, ctx)?;
    let root = refine_root(&f, (&r("9.63").with_digits(digits), &r("9.65").with_digits(digits)), digits - 6)?;
    let m = f.builder().assemble(&root.lambda)?;
    Ok((desc, coefficients(&m)?, ctx))
}

/// Gaussian elimination against cofactor expansion on a 4×4 matrix.
fn cofactor_check() -> bool {
    fn cof(n: usize, a: &[Float], bits: u32) -> Float {
        if n == 1 {
            return a[0].clone();
        }
        let mut acc = Float::with_val(bits, 0);
        for c in 0..n {
            let minor: Vec<Float> = (1..n)
                .flat_map(|i| (0..n).filter(move |&j| j != c).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j].clone())
                .collect();
            let t = Float::with_val(bits, &a[c] * cof(n - 1, &minor, bits));
            if c % 2 == 0 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        acc
    }
    let bits = digits_to_bits(40);
    let vals = [3, -7, 2, 11, 5, 1, -4, 6, -2, 9, 8, -3, 7, 4, -6, 10];
    let a: Vec<Float> = vals.iter().map(|&v| Float::with_val(bits, v) / 13u32).collect();
    let exact = cof(4, &a, 2 * bits);
    let got = det_entries(4, &a).value;
    let diff = Float::with_val(2 * bits, &got - &exact);
    let rel = Float::with_val(bits, &diff / &exact).abs().to_f64();
    rel < 1e-36
}

/// The root of det M does not move when the columns are rescaled.
fn column_scaling_check() -> Result<f64> {
    let desc = descriptor("star", "S", DIR)?;
    let ctx = PrecisionContext::new(50)?;
    let plain = DetFunction::new(&desc, 30, ctx)?;
    let scaled = DetFunction::from_builder(desc.builder(30, ctx)?.with_column_normalization(true));
    let (lo, hi) = (r("38.1").with_digits(50), r("38.3").with_digits(50));
    let a = refine_root(&plain, (&lo, &hi), 40)?.lambda;
    let b = refine_root(&scaled, (&lo, &hi), 40)?.lambda;
    Ok((&a - &b).abs().to_f64())
}

fn offquadrant(runs: &[(Run, String)]) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    for (run, class) in runs {
        let last = run.history.last().expect("non-empty history");
        let ctx = PrecisionContext::new(last.digits)?;
        let f = DetFunction::new(&run.desc, last.n, ctx)?;
        let c = coefficients(&f.builder().assemble(&last.lambda)?)?;
        let res = cutsquare_offquadrant_residual(&run.desc, &c, 40, ctx)?.to_f64();
        let d = run.bound.digits_d.to_f64();
        let ok = res < 10f64.powf(5.0 - d);
        notes.push(format!("{class} {res:.1e} vs 1e{:.1} {}", 5.0 - d, if ok { "ok" } else { "BAD" }));
    }
    Ok(notes)
}

/// Modes of the unreduced cut square at N = 49; the coefficients must
/// split into the three quadrant classes by index modulo 7.
fn pattern_check() -> Result<(bool, String)> {
    let desc = descriptor("cutsquare", "full", DIR)?.with_distribution(Distribution::CutsquarePieces)?;
    let ctx = PrecisionContext::new(70)?;
    let f = DetFunction::new(&desc, 49, ctx)?;
    let mut modes = Vec::new();
    for (lo, hi) in [("35.5", "35.7"), ("54.1", "54.3"), ("73.5", "73.7")] {
        let root = refine_root(&f, (&r(lo).with_digits(70), &r(hi).with_digits(70)), 60)?;
        modes.push(coefficients(&f.builder().assemble(&root.lambda)?)?);
    }
    let report = coefficient_pattern_report(&modes)?;
    let residue_of = |mode: usize| match mode {
        0 => [1, 6],
        1 => [2, 5],
        _ => [3, 4],
    };
    let active = report.active_groups();
    let mut ok = active.len() == 3;
    for g in &active {
        let on: Vec<usize> = (0..3).filter(|&k| g.pattern[k]).collect();
        ok &= on.len() == 1 && g.indices.iter().all(|i| residue_of(on[0]).contains(&(i % 7)));
    }
    let covered: usize = active.iter().map(|g| g.indices.len()).sum();
    ok &= covered == 49 - 7;
    Ok((ok, format!("{} active groups covering {covered} of 49 coefficients", active.len())))
}

fn properties(out: &mut Outcome, cut_runs: &[(Run, String)]) {
    let t = Instant::now();
    match recurrences() {
        Ok(ok) => out.line("9a", ok, "Bessel three-term and Gamma shift recurrences", t.elapsed().as_secs_f64()),
        Err(e) => out.error("9a", e, t.elapsed().as_secs_f64()),
    }
    let t = Instant::now();
    match derivative_check() {
        Ok(rel) => out.line(
            "9b",
            rel < 1e-15,
            &format!("directional derivative vs central difference: relative gap {rel:.1e}"),
            t.elapsed().as_secs_f64(),
        ),
        Err(e) => out.error("9b", e, t.elapsed().as_secs_f64()),
    }
    let t = Instant::now();
    out.line("9c", cofactor_check(), "4×4 determinant vs cofactor expansion", t.elapsed().as_secs_f64());
    let t = Instant::now();
    match column_scaling_check() {
        Ok(gap) => out.line(
            "9d",
            gap < 1e-38,
            &format!("star root with and without column scaling differs by {gap:.1e}"),
            t.elapsed().as_secs_f64(),
        ),
        Err(e) => out.error("9d", e, t.elapsed().as_secs_f64()),
    }
    let bad: Vec<&str> = out.nesting.iter().filter(|(_, ok)| !ok).map(|(l, _)| l.as_str()).collect();
    let detail = format!(
        "confirmed bounds nest and bracket the reference on {} of {} runs{}",
        out.nesting.len() - bad.len(),
        out.nesting.len(),
        if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(", ")) }
    );
    if out.nesting.is_empty() {
        println!("SKIP [9e] no solver runs selected");
    } else {
        out.line("9e", bad.is_empty(), &detail, 0.0);
    }
    let t = Instant::now();
    match offquadrant(cut_runs) {
        Ok(_) if cut_runs.is_empty() => println!("SKIP [9f] no cut-square runs selected"),
        Ok(notes) => out.line(
            "9f",
            notes.len() == 3 && notes.iter().all(|n| n.ends_with("ok")),
            &format!("cut-square off-quadrant residual below 10^(5-D): {}", notes.join("; ")),
            t.elapsed().as_secs_f64(),
        ),
        Err(e) => out.error("9f", e, t.elapsed().as_secs_f64()),
    }
    let t = Instant::now();
    match pattern_check() {
        Ok((ok, detail)) => out.line("9g", ok, &format!("coefficient pattern A/B/C discovery: {detail}"), t.elapsed().as_secs_f64()),
        Err(e) => out.error("9g", e, t.elapsed().as_secs_f64()),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    // optional group names select a subset: fhm lshape cutsquare full star polygons asym properties
    let want = |g: &str| args.is_empty() || args.iter().any(|a| a == g);
    let t = Instant::now();
    let mut out = Outcome {
        pass: 0,
        fail: 0,
        nesting: Vec::new(),
    };
    if want("fhm") {
        fhm(&mut out);
    }
    if want("lshape") {
        lshape30(&mut out);
    }
    let cut_runs = if want("cutsquare") { cutsquare(&mut out) } else { Vec::new() };
    if want("full") {
        cutsquare_full(&mut out);
    }
    if want("star") {
        star(&mut out);
    }
    if want("polygons") {
        polygons(&mut out);
    }
    if want("asym") {
        asymptotics(&mut out);
    }
    if want("properties") {
        properties(&mut out, &cut_runs);
    }
    println!(
        "acceptance: {} passed, {} failed in {:.0} s",
        out.pass,
        out.fail,
        t.elapsed().as_secs_f64()
    );
    if out.fail > 0 {
        std::process::exit(1);
    }
}
