//! Expansion coefficients at a converged eigenvalue, evaluation of Ψ,
//! boundary residuals, contour-grid export and coefficient zero-patterns.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use crate::assembly::{reduce_theta, row_even, row_periodic, PointMatchMatrix};
use crate::error::{Error, Result};
use crate::expansion::{angular, ExpansionSpec, Parity};
use crate::geometry::{edge_line, point_in_polygon, CanonicalPolygon, EdgeLine, EdgeRole, Vertex};
use crate::precision::{bessel_j_rational, bits_to_digits, BigReal, PrecisionContext};
use crate::shapes::{RegionKind, ShapeClassDescriptor};

/// Null vector of M(λ) with one coefficient fixed to 1.
#[derive(Clone, Debug)]
pub struct CoefficientVector {
    pub c: Vec<BigReal>,
    /// Index of the coefficient equal to 1 (the largest in magnitude).
    pub normalization: usize,
    pub lambda: BigReal,
    /// ‖M·c‖∞ divided by the largest row norm of M.
    pub residual: BigReal,
    /// Largest |M_μν| in each column: the size of ψ_ν at the matching points.
    pub column_scale: Vec<BigReal>,
    /// Digits the coefficients carry: the working digits less log10 of the
    /// spread of the nonsingular pivots and of the accumulated rounding.
    pub reliable_digits: u32,
}

impl CoefficientVector {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn digits(&self) -> u32 {
        self.lambda.digits()
    }

    /// |c_ν|·column_scale_ν: how much each term contributes on the boundary.
    pub fn contributions(&self) -> Vec<BigReal> {
        self.c
            .iter()
            .enumerate()
            .map(|(i, v)| match self.column_scale.get(i) {
                Some(s) => (v * s).abs(),
                None => v.abs(),
            })
            .collect()
    }
}

/// Solves M·c = 0 by Gaussian elimination with complete pivoting. The
/// column eliminated last carries the null direction; its coefficient is
/// set to 1, the rest follow by back substitution, and the vector is then
/// rescaled so that its largest entry is exactly 1. The matrix must hold
/// plain basis values, as [`crate::assembly::MatrixBuilder`] produces by
/// default.
pub fn coefficients(matrix: &PointMatchMatrix) -> Result<CoefficientVector> {
    let n = matrix.n;
    if n == 0 || matrix.entries.len() != n * n {
        return Err(Error::Dimension {
            expected: n * n,
            got: matrix.entries.len(),
        });
    }
    let bits = matrix.entries.iter().map(Float::prec).max().unwrap_or(64);
    let digits = bits_to_digits(bits).max(10);
    if n == 1 {
        let one = BigReal::one(digits);
        return Ok(CoefficientVector {
            c: vec![one],
            normalization: 0,
            lambda: matrix.lambda.clone(),
            residual: BigReal::from_float(Float::with_val(bits, matrix.entries[0].abs_ref()), digits),
            column_scale: vec![BigReal::one(digits)],
            reliable_digits: digits,
        });
    }
    // equilibrate columns so pivot sizes do not reflect the basis scaling
    let scales: Vec<Float> = (0..n)
        .map(|j| {
            let m = (0..n)
                .map(|i| Float::with_val(bits, matrix.entry(i, j).abs_ref()))
                .fold(Float::with_val(bits, 0u32), |a, b| a.max(&b));
            if m.is_zero() {
                Float::with_val(bits, 1u32)
            } else {
                m
            }
        })
        .collect();
    let mut a: Vec<Vec<Float>> = (0..n)
        .map(|i| {
            matrix
                .row(i)
                .iter()
                .zip(&scales)
                .map(|(v, s)| Float::with_val(bits, v / s))
                .collect()
        })
        .collect();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut pivots: Vec<Float> = Vec::with_capacity(n);
    for k in 0..n {
        let (mut pi, mut pj) = (k, k);
        let mut best = Float::with_val(bits, 0u32);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if v.cmp_abs(&best) == Some(std::cmp::Ordering::Greater) {
                    best = Float::with_val(bits, v.abs_ref());
                    pi = i;
                    pj = j;
                }
            }
        }
        a.swap(k, pi);
        if pj != k {
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            cols.swap(k, pj);
        }
        pivots.push(best);
        if k + 1 == n || a[k][k].is_zero() {
            continue;
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let prow = &top[k];
        rest.par_iter_mut().for_each(|row| {
            if row[k].is_zero() {
                return;
            }
            let f = Float::with_val(bits, &row[k] / &prow[k]);
            row[k] = Float::with_val(bits, 0u32);
            for j in k + 1..n {
                row[j] -= Float::with_val(bits, &f * &prow[j]);
            }
        });
    }
    let max_pivot = pivots[0].clone();
    if max_pivot.is_zero() {
        return Err(Error::RankDeficiency("the matrix is identically zero".into()));
    }
    let threshold = Float::with_val(bits, &max_pivot * Float::with_val(bits, 10u32).pow(5 - digits as i32));
    let tiny = pivots.iter().filter(|p| **p <= threshold).count();
    log::debug!(
        "pivot range {:.3e} .. {:.3e}",
        max_pivot.to_f64(),
        pivots[n - 1].to_f64()
    );
    if tiny > 1 {
        return Err(Error::RankDeficiency(format!(
            "{tiny} pivots below 10^(5 − {digits}) of the largest; the null space is not one-dimensional"
        )));
    }
    let spread = Float::with_val(bits, &max_pivot / &pivots[n - 2]).log10().to_f64();
    // the entries are only as good as the working precision of λ
    let base = matrix.lambda.digits().min(digits) as f64;
    // rounding accumulates over n terms per entry, worth one more digit
    let reliable_digits = (base - spread.max(0.0) - (n as f64).log10() - 1.0).floor().max(1.0) as u32;
    // back substitution with the last permuted unknown fixed to 1
    let mut y = vec![Float::with_val(bits, 0u32); n];
    y[n - 1] = Float::with_val(bits, 1u32);
    for k in (0..n - 1).rev() {
        let mut s = Float::with_val(bits, 0u32);
        for j in k + 1..n {
            s += Float::with_val(bits, &a[k][j] * &y[j]);
        }
        y[k] = -s / &a[k][k];
    }
    let mut c = vec![Float::with_val(bits, 0u32); n];
    for (k, &col) in cols.iter().enumerate() {
        c[col] = Float::with_val(bits, &y[k] / &scales[col]);
    }
    let normalization = (0..n)
        .max_by(|&i, &j| c[i].cmp_abs(&c[j]).unwrap_or(std::cmp::Ordering::Equal).then(j.cmp(&i)))
        .unwrap();
    let scale = c[normalization].clone();
    for v in c.iter_mut() {
        *v /= &scale;
    }
    c[normalization] = Float::with_val(bits, 1u32);
    // relative residual ‖M c‖∞ / max row norm
    let mut res = Float::with_val(bits, 0u32);
    let mut norm = Float::with_val(bits, 0u32);
    for i in 0..n {
        let mut s = Float::with_val(bits, 0u32);
        let mut rn = Float::with_val(bits, 0u32);
        for (m, cj) in matrix.row(i).iter().zip(&c) {
            s += Float::with_val(bits, m * cj);
            rn += Float::with_val(bits, m.abs_ref());
        }
        res = res.max(&s.abs());
        norm = norm.max(&rn);
    }
    let residual = if norm.is_zero() { res } else { res / norm };
    Ok(CoefficientVector {
        c: c.into_iter().map(|v| BigReal::from_float(v, digits)).collect(),
        normalization,
        lambda: matrix.lambda.clone(),
        residual: BigReal::from_float(residual, digits),
        column_scale: scales.into_iter().map(|v| BigReal::from_float(v, digits)).collect(),
        reliable_digits,
    })
}

/// Ψ = Σ c_ν ψ_ν for one descriptor, evaluated anywhere in the expansion
/// wedge.
pub struct Eigenfunction {
    spec: ExpansionSpec,
    c: Vec<BigReal>,
    ctx: PrecisionContext,
}

impl Eigenfunction {
    pub fn new(descriptor: &ShapeClassDescriptor, coeffs: &CoefficientVector, ctx: PrecisionContext) -> Result<Self> {
        let poly = descriptor.region_at(ctx.internal_digits())?;
        let spec = ExpansionSpec::from_lambda(descriptor.m_sequence(), coeffs.len(), &coeffs.lambda, poly.phi1)?;
        Ok(Eigenfunction {
            spec,
            c: coeffs.c.clone(),
            ctx,
        })
    }

    pub fn spec(&self) -> &ExpansionSpec {
        &self.spec
    }

    /// Ψ at p (canonical coordinates of Ω).
    pub fn value(&self, p: &Vertex) -> Result<BigReal> {
        let bits = self.ctx.internal_bits();
        let x = Float::with_val(bits, p.x.as_float());
        let y = Float::with_val(bits, p.y.as_float());
        let r = Float::with_val(bits, x.hypot_ref(&y));
        let t = Float::with_val(bits, y.atan2_ref(&x));
        let phi1 = Float::with_val(bits, self.spec.phi1.as_float());
        let tt = reduce_theta(&t, &phi1, self.spec.m_sequence.delta_phi_over_pi);
        let kr = BigReal::from_float(Float::with_val(bits, self.spec.k.as_float() * &r), self.ctx.internal_digits());
        let sin = self.spec.m_sequence.parity.uses_sin();
        let mut acc = Float::with_val(bits, 0u32);
        for (i, ci) in self.c.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            let m = self.spec.m_sequence.m(i + 1);
            let j = bessel_j_rational(*m.numer(), *m.denom(), &kr, &self.ctx)?;
            let mf = Float::with_val(bits, *m.numer()) / *m.denom();
            let (ang, _) = angular(&mf, &tt, sin);
            acc += Float::with_val(bits, j.as_float() * &ang) * ci.as_float();
        }
        Ok(BigReal::from_float(acc, self.ctx.working_digits))
    }

    /// ∂Ψ/∂n along the unit normal of `line` (zero at the origin).
    pub fn normal_derivative(&self, p: &Vertex, line: &EdgeLine) -> Result<BigReal> {
        let d = self.ctx.working_digits;
        match row_even(&self.spec, p, line, &self.ctx) {
            Ok(row) => {
                let r2 = &(&p.x * &p.x) + &(&p.y * &p.y);
                Ok(&dot(&row, &self.c, d) / &r2)
            }
            Err(Error::DegenerateRow(_)) | Err(Error::Geometry(_)) => Ok(BigReal::zero(d)),
            Err(e) => Err(e),
        }
    }

    /// Ψ(r, Δφ − θ̃) − cos(γα)·Ψ(r, θ̃) up to sign, as imposed by periodic rows.
    pub fn periodic_defect(&self, p: &Vertex, gamma: u32, alpha: &BigReal) -> Result<BigReal> {
        let d = self.ctx.working_digits;
        match row_periodic(&self.spec, p, gamma, alpha, &self.ctx) {
            Ok(row) => Ok(dot(&row, &self.c, d)),
            Err(Error::DegenerateRow(_)) => Ok(BigReal::zero(d)),
            Err(e) => Err(e),
        }
    }
}

fn dot(row: &[BigReal], c: &[BigReal], digits: u32) -> BigReal {
    let bits = row.iter().map(BigReal::bits).max().unwrap_or(64);
    let mut acc = Float::with_val(bits, 0u32);
    for (a, b) in row.iter().zip(c) {
        acc += Float::with_val(bits, a.as_float() * b.as_float());
    }
    BigReal::from_float(acc, digits)
}

/// A boundary piece on which Ψ must satisfy one condition.
struct Segment {
    from: Vertex,
    to: Vertex,
    line: EdgeLine,
    parity: Parity,
}

fn lerp(a: &Vertex, b: &Vertex, t: &BigReal) -> Vertex {
    Vertex::new(&a.x + &(&(&b.x - &a.x) * t), &a.y + &(&(&b.y - &a.y) * t))
}

/// Interior probe points: a grid over the bounding box of `outline`, kept
/// only when clear of every edge by 2% of the diameter.
fn interior_probes(outline: &[(f64, f64)], per_side: usize) -> Vec<(f64, f64)> {
    let (x0, y0, x1, y1) = bbox(outline);
    let margin = 0.02 * (x1 - x0).max(y1 - y0);
    let mut out = Vec::new();
    for i in 0..per_side {
        for j in 0..per_side {
            let x = x0 + (x1 - x0) * (i as f64 + 0.5) / per_side as f64;
            let y = y0 + (y1 - y0) * (j as f64 + 0.5) / per_side as f64;
            if point_in_polygon(outline, x, y, 0.0) && edge_distance(outline, x, y) > margin {
                out.push((x, y));
            }
        }
    }
    out
}

fn edge_distance(pts: &[(f64, f64)], x: f64, y: f64) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (ax, ay) = pts[i];
            let (bx, by) = pts[(i + 1) % n];
            let (dx, dy) = (bx - ax, by - ay);
            let t = (((x - ax) * dx + (y - ay) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
            (x - ax - t * dx).hypot(y - ay - t * dy)
        })
        .fold(f64::INFINITY, f64::min)
}

fn bbox(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    pts.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.min(y), c.max(x), d.max(y)),
    )
}

fn outline_f64(poly: &CanonicalPolygon) -> Vec<(f64, f64)> {
    poly.vertices.iter().map(|v| (v.x.to_f64(), v.y.to_f64())).collect()
}

/// max |Ψ| over interior probes of Ω.
fn interior_max(f: &Eigenfunction, poly: &CanonicalPolygon) -> Result<BigReal> {
    let d = f.ctx.internal_digits();
    let probes = interior_probes(&outline_f64(poly), 8);
    let vals: Vec<Result<BigReal>> = probes
        .par_iter()
        .map(|&(x, y)| f.value(&Vertex::from_f64(x, y, d)).map(|v| v.abs()))
        .collect();
    let mut best = BigReal::zero(f.ctx.working_digits);
    for v in vals {
        let v = v?;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

fn max_defect(f: &Eigenfunction, segments: &[Segment], samples: usize, periodic: Option<(u32, BigReal)>) -> Result<BigReal> {
    let d = f.ctx.internal_digits();
    let jobs: Vec<(usize, usize)> = (0..segments.len()).flat_map(|s| (0..samples).map(move |i| (s, i))).collect();
    let vals: Vec<Result<BigReal>> = jobs
        .par_iter()
        .map(|&(s, i)| {
            let seg = &segments[s];
            // midpoints of `samples` equal cells, so no sample sits on a vertex
            let t = BigReal::from_ratio(2 * i as i64 + 1, 2 * samples as i64, d);
            let p = lerp(&seg.from, &seg.to, &t);
            let mut v = match seg.parity {
                Parity::Odd => f.value(&p)?.abs(),
                Parity::Even => f.normal_derivative(&p, &seg.line)?.abs(),
            };
            if let Some((gamma, alpha)) = &periodic {
                let w = f.periodic_defect(&p, *gamma, alpha)?.abs();
                if w > v {
                    v = w;
                }
            }
            Ok(v)
        })
        .collect();
    let mut best = BigReal::zero(f.ctx.working_digits);
    for v in vals {
        let v = v?;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

fn ratio(num: BigReal, den: BigReal) -> Result<BigReal> {
    if den.is_zero() {
        return Err(Error::Domain("Ψ vanishes at every interior probe".into()));
    }
    Ok(&num / &den)
}

fn matched_segments(descriptor: &ShapeClassDescriptor, poly: &CanonicalPolygon) -> Result<Vec<Segment>> {
    let matched: Vec<usize> = (0..poly.num_edges())
        .filter(|&e| poly.edge_roles[e] == EdgeRole::PointMatched)
        .collect();
    let mut out = Vec::new();
    for (idx, &e) in matched.iter().enumerate() {
        if descriptor.gamma.is_some() && idx > 0 {
            break;
        }
        let (a, b) = poly.edge(e);
        let parity = if descriptor.gamma.is_some() {
            Parity::Even
        } else {
            descriptor.matched_parity[idx]
        };
        out.push(Segment {
            from: a.clone(),
            to: b.clone(),
            line: edge_line(poly, e)?,
            parity,
        });
    }
    Ok(out)
}

/// Largest boundary defect on the point-matched edges of Ω, relative to
/// max |Ψ| over interior probes. Odd edges contribute |Ψ|, even edges
/// |∂Ψ/∂n|, and periodic classes also the periodic relation. At least
/// 2N/edges samples are taken per edge.
pub fn boundary_residual(
    descriptor: &ShapeClassDescriptor,
    coeffs: &CoefficientVector,
    samples_per_edge: usize,
    ctx: PrecisionContext,
) -> Result<BigReal> {
    let f = Eigenfunction::new(descriptor, coeffs, ctx)?;
    let poly = descriptor.region_at(ctx.internal_digits())?;
    let segments = matched_segments(descriptor, &poly)?;
    let samples = samples_per_edge.max((2 * coeffs.len()).div_ceil(segments.len().max(1)));
    let periodic = match descriptor.gamma {
        Some(g) => {
            let info = descriptor
                .dihedral(ctx.internal_digits())
                .ok_or_else(|| Error::Config("periodic class without a dihedral group".into()))?;
            Some((g, info.alpha))
        }
        None => None,
    };
    let defect = max_defect(&f, &segments, samples, periodic)?;
    ratio(defect, interior_max(&f, &poly)?)
}

/// The cut-square hexagon in the first-quadrant frame, in units of ½.
fn cutsquare_hexagon() -> [(i64, i64); 6] {
    [(0, 0), (-1, 1), (-1, -1), (1, -1), (1, 1), (0, 1)]
}

/// For a first-quadrant cut-square class, the boundary defect on the parts
/// of the full hexagon that were never matched (the left and bottom edges
/// and the lower half of the right edge), relative to max |Ψ| over
/// interior probes of the quadrant.
pub fn cutsquare_offquadrant_residual(
    descriptor: &ShapeClassDescriptor,
    coeffs: &CoefficientVector,
    samples_per_edge: usize,
    ctx: PrecisionContext,
) -> Result<BigReal> {
    if descriptor.region_kind != RegionKind::CutsquareQuadrant {
        return Err(Error::Config("off-quadrant residual needs a first-quadrant cut-square class".into()));
    }
    let f = Eigenfunction::new(descriptor, coeffs, ctx)?;
    let poly = descriptor.region_at(ctx.internal_digits())?;
    let d = ctx.internal_digits();
    let v = |x: i64, y: i64| Vertex::new(BigReal::from_ratio(x, 2, d), BigReal::from_ratio(y, 2, d));
    let parity = descriptor.matched_parity[0];
    let line = |a: i64, b: i64, c: i64| EdgeLine {
        a: BigReal::from_i64(a, d),
        b: BigReal::from_i64(b, d),
        c: BigReal::from_ratio(c, 2, d),
    };
    let segments = vec![
        Segment {
            from: v(-1, 1),
            to: v(-1, -1),
            line: line(-1, 0, 1),
            parity,
        },
        Segment {
            from: v(-1, -1),
            to: v(1, -1),
            line: line(0, -1, 1),
            parity,
        },
        Segment {
            from: v(1, -1),
            to: v(1, 0),
            line: line(1, 0, 1),
            parity,
        },
    ];
    let samples = samples_per_edge.max(coeffs.len());
    let defect = max_defect(&f, &segments, samples, None)?;
    ratio(defect, interior_max(&f, &poly)?)
}

/// One raster point; `value` is `None` outside the shape.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub value: Option<f64>,
}

/// Raster of Ψ over Ω or, unfolded, over the whole shape.
#[derive(Clone, Debug)]
pub struct GridExport {
    pub resolution: usize,
    /// (x_min, y_min, x_max, y_max).
    pub bounding_box: (f64, f64, f64, f64),
    pub unfold: bool,
    /// Row-major, y outer.
    pub values: Vec<GridPoint>,
}

impl GridExport {
    /// Header "x y value", then one row per point at 17 significant digits
    /// with an empty value outside the shape.
    pub fn to_text(&self) -> String {
        let mut s = String::from("x y value\n");
        for p in &self.values {
            match p.value {
                Some(v) => {
                    let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", p.x, p.y, v);
                }
                None => {
                    let _ = writeln!(s, "{:.16e} {:.16e} ", p.x, p.y);
                }
            }
        }
        s
    }
}

/// x ↦ A·x + t.
#[derive(Clone, Copy, Debug)]
struct Isometry {
    a: [[f64; 2]; 2],
    t: [f64; 2],
}

impl Isometry {
    fn identity() -> Self {
        Isometry {
            a: [[1.0, 0.0], [0.0, 1.0]],
            t: [0.0, 0.0],
        }
    }

    /// Reflection in the line through p and q.
    fn reflection(p: (f64, f64), q: (f64, f64)) -> Self {
        let (dx, dy) = (q.0 - p.0, q.1 - p.1);
        let l2 = dx * dx + dy * dy;
        let (c, s) = ((dx * dx - dy * dy) / l2, 2.0 * dx * dy / l2);
        let a = [[c, s], [s, -c]];
        let t = [p.0 - (c * p.0 + s * p.1), p.1 - (s * p.0 - c * p.1)];
        Isometry { a, t }
    }

    fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (
            self.a[0][0] * x + self.a[0][1] * y + self.t[0],
            self.a[1][0] * x + self.a[1][1] * y + self.t[1],
        )
    }

    /// self ∘ other.
    fn compose(&self, other: &Isometry) -> Isometry {
        let mut a = [[0.0; 2]; 2];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.a[i][0] * other.a[0][j] + self.a[i][1] * other.a[1][j];
            }
        }
        let (tx, ty) = self.apply((other.t[0], other.t[1]));
        Isometry { a, t: [tx, ty] }
    }
}

/// A copy of Ω inside the full shape: its outline, the map back into Ω and
/// the sign Ψ picks up.
struct Piece {
    outline: Vec<(f64, f64)>,
    to_omega: Isometry,
    sign: f64,
}

fn centroid(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    (sx / n, sy / n)
}

/// Images of Ω under the group generated by reflections in its mirror
/// edges, each with the product of the mirrors' parity signs.
fn reflect_images(outline: Vec<(f64, f64)>, mirrors: &[(usize, Parity)]) -> Vec<Piece> {
    let mut pieces = vec![Piece {
        outline,
        to_omega: Isometry::identity(),
        sign: 1.0,
    }];
    let mut next = 0;
    while next < pieces.len() && pieces.len() < 512 {
        let mut fresh = Vec::new();
        for &(e, parity) in mirrors {
            let p = &pieces[next];
            let n = p.outline.len();
            let r = Isometry::reflection(p.outline[e], p.outline[(e + 1) % n]);
            let outline: Vec<(f64, f64)> = p.outline.iter().map(|&q| r.apply(q)).collect();
            let c = centroid(&outline);
            let seen = pieces.iter().chain(fresh.iter()).any(|q: &Piece| {
                let d = centroid(&q.outline);
                (d.0 - c.0).hypot(d.1 - c.1) < 1e-9
            });
            if !seen {
                let s = if parity == Parity::Odd { -1.0 } else { 1.0 };
                fresh.push(Piece {
                    outline,
                    to_omega: p.to_omega.compose(&r),
                    sign: p.sign * s,
                });
            }
        }
        pieces.extend(fresh);
        next += 1;
    }
    pieces
}

fn half_points(pts: &[(i64, i64)]) -> Vec<(f64, f64)> {
    pts.iter().map(|&(x, y)| (x as f64 / 2.0, y as f64 / 2.0)).collect()
}

fn pieces_for(descriptor: &ShapeClassDescriptor, poly: &CanonicalPolygon, unfold: bool) -> Result<Vec<Piece>> {
    let omega = outline_f64(poly);
    let single = |outline| {
        vec![Piece {
            outline,
            to_omega: Isometry::identity(),
            sign: 1.0,
        }]
    };
    if !unfold {
        return Ok(single(omega));
    }
    Ok(match descriptor.region_kind {
        // the expansion wedge covers the whole shape, so Ψ is evaluated directly
        RegionKind::LShape => single(vec![(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (0.0, -1.0)]),
        RegionKind::CutsquareQuadrant => single(half_points(&cutsquare_hexagon())),
        RegionKind::CutsquareFull => single(omega),
        RegionKind::PolygonTriangle => reflect_images(
            omega,
            &[(1, descriptor.matched_parity[0]), (2, descriptor.parity.last_adjacent)],
        ),
        RegionKind::StarTriangle => reflect_images(
            omega,
            &[(0, descriptor.parity.first_adjacent), (1, descriptor.matched_parity[0])],
        ),
        RegionKind::PolygonKite | RegionKind::StarArrowhead => {
            return Err(Error::Config(
                "a two-dimensional class cannot be unfolded from one coefficient vector; its partner function is also needed"
                    .into(),
            ))
        }
    })
}

/// Ψ on a resolution × resolution raster over Ω, or over the whole shape
/// when `unfold` is set. Exterior points carry no value.
pub fn grid_export(
    descriptor: &ShapeClassDescriptor,
    coeffs: &CoefficientVector,
    resolution: usize,
    unfold: bool,
    ctx: PrecisionContext,
) -> Result<GridExport> {
    if resolution < 16 {
        return Err(Error::Config(format!("grid resolution must be at least 16, got {resolution}")));
    }
    let f = Eigenfunction::new(descriptor, coeffs, ctx)?;
    let poly = descriptor.region_at(ctx.internal_digits())?;
    let pieces = pieces_for(descriptor, &poly, unfold)?;
    let all: Vec<(f64, f64)> = pieces.iter().flat_map(|p| p.outline.iter().copied()).collect();
    let (x0, y0, x1, y1) = bbox(&all);
    if !(x1 > x0 && y1 > y0) {
        return Err(Error::Geometry("shape has an empty bounding box".into()));
    }
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (resolution - 1) as f64;
    let d = ctx.internal_digits();
    let rows: Vec<Result<Vec<GridPoint>>> = (0..resolution)
        .into_par_iter()
        .map(|j| {
            let y = step(y0, y1, j);
            (0..resolution)
                .map(|i| {
                    let x = step(x0, x1, i);
                    let hit = pieces.iter().find(|p| point_in_polygon(&p.outline, x, y, 1e-12));
                    let value = match hit {
                        Some(p) => {
                            let (u, v) = p.to_omega.apply((x, y));
                            let psi = f.value(&Vertex::from_f64(u, v, d))?.to_f64() * p.sign;
                            if !psi.is_finite() {
                                return Err(Error::Geometry(format!("non-finite Ψ at ({x}, {y})")));
                            }
                            Some(psi)
                        }
                        None => None,
                    };
                    Ok(GridPoint { x, y, value })
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(resolution * resolution);
    for r in rows {
        values.extend(r?);
    }
    Ok(GridExport {
        resolution,
        bounding_box: (x0, y0, x1, y1),
        unfold,
        values,
    })
}

/// Indices sharing one dominant/negligible pattern across the modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternGroup {
    /// `true` where the index is dominant in that mode.
    pub pattern: Vec<bool>,
    /// One-based coefficient indices ν.
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct PatternReport {
    /// Per mode, the cut-off exponent: |c_ν| < 10^e·max |c| is negligible.
    pub thresholds: Vec<i32>,
    pub groups: Vec<PatternGroup>,
}

impl PatternReport {
    /// Groups in which at least one mode is dominant.
    pub fn active_groups(&self) -> Vec<&PatternGroup> {
        self.groups.iter().filter(|g| g.pattern.iter().any(|&b| b)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("pattern indices\n");
        for g in &self.groups {
            let pat: String = g.pattern.iter().map(|&b| if b { 'X' } else { '.' }).collect();
            let idx: Vec<String> = g.indices.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "{pat} {}", idx.join(","));
        }
        s
    }
}

/// Classifies every coefficient of every mode as dominant or negligible
/// and groups the indices by their pattern across modes. A term is
/// negligible when its boundary contribution |c_ν|·max_μ|ψ_ν| is below
/// 10^(6−P) of the mode's largest, P the digits the coefficients are good
/// to ([`CoefficientVector::reliable_digits`]); weighting by the
/// column size keeps the growth of raw high-order coefficients from
/// masking the pattern.
pub fn coefficient_pattern_report(modes: &[CoefficientVector]) -> Result<PatternReport> {
    if modes.is_empty() {
        return Err(Error::Config("pattern report needs at least one coefficient vector".into()));
    }
    let n = modes.iter().map(CoefficientVector::len).max().unwrap_or(0);
    let mut thresholds = Vec::with_capacity(modes.len());
    let mut flags: Vec<Vec<bool>> = vec![Vec::with_capacity(modes.len()); n];
    for mode in modes {
        let p = mode.reliable_digits as i32;
        let e = 6 - p;
        thresholds.push(e);
        let w = mode.contributions();
        let d = mode.digits();
        let max = w.iter().cloned().fold(BigReal::zero(d), |a, b| if b > a { b } else { a });
        let cut = &max * &BigReal::from_float(Float::with_val(max.bits(), 10u32).pow(e), d);
        for (i, f) in flags.iter_mut().enumerate() {
            f.push(w.get(i).is_some_and(|v| *v >= cut && !v.is_zero()));
        }
    }
    let mut by_pattern: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for (i, f) in flags.into_iter().enumerate() {
        by_pattern.entry(f).or_default().push(i + 1);
    }
    let mut groups: Vec<PatternGroup> = by_pattern
        .into_iter()
        .map(|(pattern, indices)| PatternGroup { pattern, indices })
        .collect();
    groups.sort_by_key(|g| g.indices[0]);
    Ok(PatternReport { thresholds, groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{descriptor, BoundaryKind};
    use crate::solver::{refine_root, DetFunction};

    fn fl(v: f64) -> BigReal {
        BigReal::from_f64(v, 40)
    }

    fn cv(c: &[f64]) -> CoefficientVector {
        CoefficientVector {
            c: c.iter().map(|&v| fl(v)).collect(),
            normalization: 0,
            lambda: fl(1.0),
            residual: fl(0.0),
            column_scale: vec![fl(1.0); c.len()],
            reliable_digits: 40,
        }
    }

    #[test]
    fn one_by_one() {
        let m = PointMatchMatrix::from_rows(vec![vec![fl(0.0)]], fl(2.0)).unwrap();
        let c = coefficients(&m).unwrap();
        assert_eq!(c.c.len(), 1);
        assert_eq!(c.c[0].to_f64(), 1.0);
        assert_eq!(c.normalization, 0);
    }

    #[test]
    fn two_by_two_null_vector() {
        let (a, b) = (3.0, -5.0);
        let m = PointMatchMatrix::from_rows(vec![vec![fl(a), fl(b)], vec![fl(2.0 * a), fl(2.0 * b)]], fl(2.0)).unwrap();
        let c = coefficients(&m).unwrap();
        // ∝ (b, −a) = (−5, −3), scaled so the largest entry is 1
        assert_eq!(c.normalization, 0);
        assert!((c.c[1].to_f64() - 0.6).abs() < 1e-30);
        assert!(c.residual.to_f64() < 1e-35);
    }

    #[test]
    fn rank_two_deficiency_is_reported() {
        let z = || fl(0.0);
        let m = PointMatchMatrix::from_rows(
            vec![vec![fl(1.0), z(), z()], vec![z(), z(), z()], vec![z(), z(), z()]],
            fl(2.0),
        )
        .unwrap();
        assert!(matches!(coefficients(&m), Err(Error::RankDeficiency(_))));
    }

    #[test]
    fn pattern_groups() {
        let single = coefficient_pattern_report(&[cv(&[1.0, 0.5, 0.25])]).unwrap();
        assert_eq!(single.groups.len(), 1);
        let alt = coefficient_pattern_report(&[cv(&[1.0, 0.0, 0.5, 1e-39]), cv(&[0.0, 1.0, 1e-38, 0.3])]).unwrap();
        assert_eq!(alt.groups.len(), 2);
        assert_eq!(alt.groups[0].indices, vec![1, 3]);
        assert_eq!(alt.groups[1].indices, vec![2, 4]);
        assert!(coefficient_pattern_report(&[]).is_err());
        assert!(alt.to_text().contains("X. 1,3"));
    }

    #[test]
    fn isometry_reflection() {
        let r = Isometry::reflection((0.0, 0.0), (1.0, 1.0));
        let (x, y) = r.apply((1.0, 0.0));
        assert!((x - 0.0).abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
        let rr = r.compose(&r);
        let (x, y) = rr.apply((0.3, -0.7));
        assert!((x - 0.3).abs() < 1e-15 && (y + 0.7).abs() < 1e-15);
    }

    /// Lowest mode of the L-shape at N with a refined λ.
    fn lshape_mode(n: usize, digits: u32) -> (ShapeClassDescriptor, CoefficientVector, PrecisionContext) {
        let d = descriptor("lshape", "lowest_dirichlet_sym", BoundaryKind::Dirichlet).unwrap();
        let ctx = PrecisionContext::new(digits).unwrap();
        let f = DetFunction::new(&d, n, ctx).unwrap();
        let lo = BigReal::parse("9.63", digits).unwrap();
        let hi = BigReal::parse("9.65", digits).unwrap();
        let r = refine_root(&f, (&lo, &hi), digits - 6).unwrap();
        let m = f.builder().assemble(&r.lambda).unwrap();
        (d, coefficients(&m).unwrap(), ctx)
    }

    #[test]
    fn lshape_residuals() {
        let (d, c, ctx) = lshape_mode(30, 40);
        assert!(c.residual.to_f64() < 1e-30, "{}", c.residual);
        let res = boundary_residual(&d, &c, 40, ctx).unwrap().to_f64();
        assert!(res < 1e-12, "converged residual {res}");
        // scaling c leaves the normalized residual unchanged
        let mut scaled = c.clone();
        for v in scaled.c.iter_mut() {
            *v = &*v * &BigReal::from_i64(7, 40);
        }
        let res2 = boundary_residual(&d, &scaled, 40, ctx).unwrap().to_f64();
        assert!((res - res2).abs() <= 1e-25 + 1e-9 * res);
        // a λ that is not an eigenvalue leaves an O(1) defect
        let f = DetFunction::new(&d, 30, ctx).unwrap();
        let m = f.builder().assemble(&BigReal::parse("11.3", 40).unwrap()).unwrap();
        let mut rows = Vec::new();
        for i in 0..29 {
            rows.push(m.row(i).iter().map(|v| BigReal::from_float(v.clone(), 40)).collect::<Vec<_>>());
        }
        // drop the last row so a null vector exists away from an eigenvalue
        let mut last = rows[0].clone();
        for v in last.iter_mut() {
            *v = BigReal::zero(40);
        }
        rows.push(last);
        let off = coefficients(&PointMatchMatrix::from_rows(rows, m.lambda.clone()).unwrap()).unwrap();
        let bad = boundary_residual(&d, &off, 40, ctx).unwrap().to_f64();
        assert!(bad > 1e-4, "off-eigenvalue residual {bad}");
    }

    #[test]
    fn helmholtz_by_finite_differences() {
        let (d, c, ctx) = lshape_mode(16, 40);
        let f = Eigenfunction::new(&d, &c, ctx).unwrap();
        let h = BigReal::parse("1e-10", 50).unwrap();
        let p = |x: &BigReal, y: &BigReal| f.value(&Vertex::new(x.clone(), y.clone())).unwrap();
        let (x, y) = (BigReal::parse("0.4", 50).unwrap(), BigReal::parse("0.7", 50).unwrap());
        let centre = p(&x, &y);
        let lap = &(&(&(&p(&(&x + &h), &y) + &p(&(&x - &h), &y)) + &p(&x, &(&y + &h))) + &p(&x, &(&y - &h)))
            - &(&centre * &BigReal::from_i64(4, 50));
        let lap = &lap / &(&h * &h);
        let rel = (&(&lap + &(&c.lambda * &centre)) / &(&c.lambda * &centre)).abs().to_f64();
        assert!(rel < 1e-10, "{rel}");
    }

    #[test]
    fn grid_export_lshape() {
        let (d, c, ctx) = lshape_mode(12, 30);
        let g = grid_export(&d, &c, 16, false, ctx).unwrap();
        assert_eq!(g.values.len(), 256);
        assert!(g.values.iter().all(|p| p.value.is_some_and(f64::is_finite)));
        let full = grid_export(&d, &c, 17, true, ctx).unwrap();
        // the missing quadrant x > 0, y < 0 is blank
        assert!(full.values.iter().any(|p| p.value.is_none()));
        assert!(full
            .values
            .iter()
            .filter(|p| p.x > 1e-9 && p.y < -1e-9)
            .all(|p| p.value.is_none()));
        let text = full.to_text();
        assert!(text.starts_with("x y value\n"));
        assert_eq!(text.lines().count(), 17 * 17 + 1);
        assert!(grid_export(&d, &c, 8, false, ctx).is_err());
        let zero = CoefficientVector {
            c: vec![BigReal::zero(30); c.len()],
            ..c.clone()
        };
        let z = grid_export(&d, &zero, 16, true, ctx).unwrap();
        assert!(z.values.iter().all(|p| p.value.is_none_or(|v| v == 0.0)));
    }

    #[test]
    fn unfolded_polygon_parity() {
        // pentagon class A: odd about both mirrors
        let d = descriptor("polygon5", "A", BoundaryKind::Dirichlet).unwrap();
        let ctx = PrecisionContext::new(30).unwrap();
        let c = CoefficientVector {
            c: vec![BigReal::one(30), BigReal::from_f64(0.3, 30), BigReal::from_f64(-0.1, 30)],
            normalization: 0,
            lambda: BigReal::from_f64(40.0, 30),
            residual: BigReal::zero(30),
            column_scale: vec![BigReal::one(30); 3],
            reliable_digits: 30,
        };
        let g = grid_export(&d, &c, 21, true, ctx).unwrap();
        let r = g.resolution;
        let (x0, _, x1, _) = g.bounding_box;
        let axis = 0.5;
        assert!((x0 + x1 - 2.0 * axis).abs() < 1e-12);
        let mut pairs = 0;
        for j in 0..r {
            for i in 0..r {
                let a = &g.values[j * r + i];
                let b = &g.values[j * r + (r - 1 - i)];
                if 2 * i + 1 == r {
                    continue;
                }
                if let (Some(u), Some(v)) = (a.value, b.value) {
                    assert!((u + v).abs() < 1e-12, "({}, {}): {u} {v}", a.x, a.y);
                    pairs += 1;
                }
            }
        }
        assert!(pairs > 100);
        let kite = descriptor("polygon5", "B_e", BoundaryKind::Dirichlet).unwrap();
        assert!(grid_export(&kite, &c, 16, true, ctx).is_err());
    }
}
