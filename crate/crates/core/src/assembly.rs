//! The N×N point-matching matrix M(λ).
//!
//! Every entry is written as C_ν·(a_μν·S_m(z_μ) + b_μν·z_μ·S_{m+1}(z_μ)) with
//! z_μ = (k r_μ)²/4, C_ν = (k/2)^m/Γ(m+1) and S_m the normalized ascending
//! Bessel series. The coefficients a and b depend only on the matching points,
//! so [`MatrixBuilder`] computes them once per N and precision and each new λ
//! costs only the series.

use std::fmt::Write as _;

use num_rational::Rational64;
use rayon::prelude::*;
use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};
use crate::expansion::{angular, ExpansionSpec, MSequence};
use crate::geometry::{EdgeLine, Vertex};
use crate::precision::bessel::cancellation_guard_digits;
use crate::precision::gamma::{gamma1p_rational_float, GammaCache};
use crate::precision::{bessel_j_rational, digits_to_bits, BesselSeries, BigReal, PrecisionContext};
use crate::shapes::ShapeClassDescriptor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// Ψ = 0 at the point.
    OddValue,
    /// ∂Ψ/∂n = 0 at the point (r² factor dropped).
    EvenNormalDerivative,
    /// Ψ(r, Δφ−θ̃) − cos(γα)Ψ(r, θ̃) = 0 with α = 2π/σ.
    PeriodicPair { gamma: u32, sigma: u32 },
    /// ∂Ψ/∂θ = 0 at a vertex.
    VertexThetaDerivative,
}

impl RowKind {
    pub fn name(&self) -> &'static str {
        match self {
            RowKind::OddValue => "odd_value",
            RowKind::EvenNormalDerivative => "even_normal_derivative",
            RowKind::PeriodicPair { .. } => "periodic_pair",
            RowKind::VertexThetaDerivative => "vertex_theta_derivative",
        }
    }
}

/// One row of the matrix: its condition and the point it is imposed at.
#[derive(Clone, Debug, PartialEq)]
pub struct RowSpec {
    pub kind: RowKind,
    pub point: Vertex,
    /// Edge line, required for normal-derivative rows.
    pub line: Option<EdgeLine>,
    /// Zero-based edge index the point lies on, if any.
    pub edge: Option<usize>,
}

/// θ̃ = θ − φ1 reduced to the branch nearest the wedge [0, Δφ].
pub fn reduce_theta(theta: &Float, phi1: &Float, delta_phi_over_pi: Rational64) -> Float {
    let bits = theta.prec().max(phi1.prec());
    let pi = Float::with_val(bits, Constant::Pi);
    let two_pi = Float::with_val(bits, &pi * 2u32);
    let dphi = Float::with_val(bits, &pi * *delta_phi_over_pi.numer()) / *delta_phi_over_pi.denom();
    let mut t = Float::with_val(bits, theta - phi1);
    // lower edge of the branch sits halfway through the gap below the wedge
    let gap = Float::with_val(bits, &two_pi - &dphi) / 2u32;
    let low = -gap;
    while t < low {
        t += &two_pi;
    }
    let high = Float::with_val(bits, &low + &two_pi);
    while t >= high {
        t -= &two_pi;
    }
    t
}

fn polar_float(p: &Vertex, bits: u32) -> (Float, Float) {
    let x = Float::with_val(bits, p.x.as_float());
    let y = Float::with_val(bits, p.y.as_float());
    let r = Float::with_val(bits, x.hypot_ref(&y));
    let t = Float::with_val(bits, y.atan2_ref(&x));
    (r, t)
}

fn rational_float(m: Rational64, bits: u32) -> Float {
    Float::with_val(bits, *m.numer()) / *m.denom()
}

fn is_zero_row(row: &[BigReal]) -> bool {
    row.iter().all(BigReal::is_zero)
}

fn degenerate(kind: &str, p: &Vertex) -> Error {
    Error::DegenerateRow(format!("{kind} row at ({p}) is identically zero"))
}

struct PointData {
    r: Float,
    theta_tilde: Float,
}

fn point_data(spec: &ExpansionSpec, p: &Vertex, bits: u32) -> PointData {
    let (r, t) = polar_float(p, bits);
    let phi1 = Float::with_val(bits, spec.phi1.as_float());
    PointData {
        theta_tilde: reduce_theta(&t, &phi1, spec.m_sequence.delta_phi_over_pi),
        r,
    }
}

fn bessel_pair(
    spec: &ExpansionSpec,
    nu: usize,
    kr: &BigReal,
    ctx: &PrecisionContext,
    need_next: bool,
) -> Result<(Rational64, BigReal, Option<BigReal>)> {
    let m = spec.m_sequence.m(nu);
    let j = bessel_j_rational(*m.numer(), *m.denom(), kr, ctx)?;
    let j1 = if need_next {
        Some(bessel_j_rational(*m.numer() + *m.denom(), *m.denom(), kr, ctx)?)
    } else {
        None
    };
    Ok((m, j, j1))
}

/// Row of Ψ-values: J_{m_ν}(k r)·{sin | cos}(m_ν θ̃).
pub fn row_odd(spec: &ExpansionSpec, point: &Vertex, ctx: &PrecisionContext) -> Result<Vec<BigReal>> {
    let bits = ctx.internal_bits();
    let pd = point_data(spec, point, bits);
    let kr = BigReal::from_float(Float::with_val(bits, spec.k.as_float() * &pd.r), ctx.internal_digits());
    let sin = spec.m_sequence.parity.uses_sin();
    let row = (1..=spec.n)
        .map(|nu| {
            let (m, j, _) = bessel_pair(spec, nu, &kr, ctx, false)?;
            let (ang, _) = angular(&rational_float(m, bits), &pd.theta_tilde, sin);
            Ok(BigReal::from_float(Float::with_val(bits, j.as_float() * &ang), ctx.working_digits))
        })
        .collect::<Result<Vec<_>>>()?;
    if is_zero_row(&row) {
        return Err(degenerate("odd", point));
    }
    Ok(row)
}

/// Row of r²·∂Ψ/∂n = A·r²∂Ψ/∂x + B·r²∂Ψ/∂y.
pub fn row_even(
    spec: &ExpansionSpec,
    point: &Vertex,
    line: &EdgeLine,
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>> {
    let bits = ctx.internal_bits();
    let pd = point_data(spec, point, bits);
    if pd.r.is_zero() {
        return Err(Error::Geometry("normal-derivative row at the origin".into()));
    }
    let kr_f = Float::with_val(bits, spec.k.as_float() * &pd.r);
    let kr = BigReal::from_float(kr_f.clone(), ctx.internal_digits());
    let sin = spec.m_sequence.parity.uses_sin();
    let x = Float::with_val(bits, point.x.as_float());
    let y = Float::with_val(bits, point.y.as_float());
    let a = Float::with_val(bits, line.a.as_float());
    let b = Float::with_val(bits, line.b.as_float());
    let row = (1..=spec.n)
        .map(|nu| {
            let (m, j, j1) = bessel_pair(spec, nu, &kr, ctx, true)?;
            let mf = rational_float(m, bits);
            let (g1, g2) = even_geometry(&mf, &pd.theta_tilde, &x, &y, &a, &b, sin);
            let mut e = Float::with_val(bits, &mf * &g1) * j.as_float();
            e -= Float::with_val(bits, &kr_f * &g2) * j1.unwrap().as_float();
            Ok(BigReal::from_float(e, ctx.working_digits))
        })
        .collect::<Result<Vec<_>>>()?;
    if is_zero_row(&row) {
        return Err(degenerate("even", point));
    }
    Ok(row)
}

/// The two angular factors of an even row: g1 multiplies m·J_m and g2
/// multiplies −kr·J_{m+1}.
fn even_geometry(
    m: &Float,
    theta_tilde: &Float,
    x: &Float,
    y: &Float,
    a: &Float,
    b: &Float,
    sin: bool,
) -> (Float, Float) {
    let bits = theta_tilde.prec();
    let arg = Float::with_val(bits, m * theta_tilde);
    let (s, c) = arg.sin_cos(Float::new(bits));
    let xs = Float::with_val(bits, x * &s);
    let xc = Float::with_val(bits, x * &c);
    let ys = Float::with_val(bits, y * &s);
    let yc = Float::with_val(bits, y * &c);
    let ax_by = Float::with_val(bits, a * x) + Float::with_val(bits, b * y);
    if sin {
        let g1 = Float::with_val(bits, a * Float::with_val(bits, &xs - &yc))
            + Float::with_val(bits, b * Float::with_val(bits, &xc + &ys));
        (g1, ax_by * &s)
    } else {
        let g1 = Float::with_val(bits, a * Float::with_val(bits, &xc + &ys))
            + Float::with_val(bits, b * Float::with_val(bits, &yc - &xs));
        (g1, ax_by * &c)
    }
}

/// {(−1)^ν + cos(γα)}·J_{m_ν}(k r)·{sin | cos}(m_ν θ̃).
pub fn row_periodic(
    spec: &ExpansionSpec,
    point: &Vertex,
    gamma: u32,
    alpha: &BigReal,
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>> {
    let bits = ctx.internal_bits();
    let pd = point_data(spec, point, bits);
    let kr = BigReal::from_float(Float::with_val(bits, spec.k.as_float() * &pd.r), ctx.internal_digits());
    let sin = spec.m_sequence.parity.uses_sin();
    let cga = Float::with_val(bits, alpha.as_float() * gamma).cos();
    let row = (1..=spec.n)
        .map(|nu| {
            let (m, j, _) = bessel_pair(spec, nu, &kr, ctx, false)?;
            let (ang, _) = angular(&rational_float(m, bits), &pd.theta_tilde, sin);
            let sign = if nu % 2 == 0 { 1i32 } else { -1 };
            let factor = Float::with_val(bits, &cga + sign);
            Ok(BigReal::from_float(factor * j.as_float() * ang, ctx.working_digits))
        })
        .collect::<Result<Vec<_>>>()?;
    if is_zero_row(&row) {
        return Err(degenerate("periodic", point));
    }
    Ok(row)
}

/// m_ν·J_{m_ν}(k r)·{cos | −sin}(m_ν θ̃): the angular derivative.
pub fn row_vertex_theta_derivative(
    spec: &ExpansionSpec,
    point: &Vertex,
    ctx: &PrecisionContext,
) -> Result<Vec<BigReal>> {
    let bits = ctx.internal_bits();
    let pd = point_data(spec, point, bits);
    if pd.r.is_zero() {
        return Err(Error::Geometry("angular-derivative row at the origin".into()));
    }
    let kr = BigReal::from_float(Float::with_val(bits, spec.k.as_float() * &pd.r), ctx.internal_digits());
    let sin = spec.m_sequence.parity.uses_sin();
    let row = (1..=spec.n)
        .map(|nu| {
            let (m, j, _) = bessel_pair(spec, nu, &kr, ctx, false)?;
            let (_, dang) = angular(&rational_float(m, bits), &pd.theta_tilde, sin);
            Ok(BigReal::from_float(Float::with_val(bits, j.as_float() * &dang), ctx.working_digits))
        })
        .collect::<Result<Vec<_>>>()?;
    if is_zero_row(&row) {
        return Err(degenerate("vertex derivative", point));
    }
    Ok(row)
}

/// The assembled matrix at one λ.
#[derive(Clone, Debug)]
pub struct PointMatchMatrix {
    pub n: usize,
    pub lambda: BigReal,
    /// Row-major entries.
    pub entries: Vec<Float>,
    pub row_plan: Vec<(RowKind, Vertex)>,
}

impl PointMatchMatrix {
    pub fn from_rows(rows: Vec<Vec<BigReal>>, lambda: BigReal) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in &rows {
            if r.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: r.len(),
                });
            }
            entries.extend(r.iter().map(|v| v.as_float().clone()));
        }
        let d = lambda.digits();
        Ok(PointMatchMatrix {
            n,
            lambda,
            entries,
            row_plan: vec![(RowKind::OddValue, Vertex::from_f64(0.0, 0.0, d)); n],
        })
    }

    pub fn entry(&self, i: usize, j: usize) -> &Float {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Float] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Text dump: one row per line, entries as decimals.
    pub fn dump(&self, digits: usize) -> String {
        let mut s = String::new();
        for i in 0..self.n {
            let line: Vec<String> = self
                .row(i)
                .iter()
                .map(|v| crate::precision::bigreal::format_decimal(v, digits))
                .collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }
}

struct Column {
    series: BesselSeries,
    series_next: BesselSeries,
    m: Rational64,
    gamma1p: Float,
}

/// λ-independent tables for one matching plan at one precision.
pub struct MatrixBuilder {
    n: usize,
    ctx: PrecisionContext,
    rows: Vec<RowSpec>,
    columns: Vec<Column>,
    quarter_r2: Vec<Float>,
    r_max: f64,
    a: Vec<Float>,
    b: Vec<Option<Vec<Float>>>,
    normalize_columns: bool,
}

impl MatrixBuilder {
    pub fn new(
        seq: MSequence,
        phi1: &BigReal,
        rows: Vec<RowSpec>,
        ctx: PrecisionContext,
    ) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Config("empty row plan".into()));
        }
        let bits = ctx.internal_bits();
        let cache = GammaCache::global();
        let columns = (1..=n)
            .map(|nu| {
                let m = seq.m(nu);
                let (p, q) = (*m.numer(), *m.denom());
                Ok(Column {
                    series: BesselSeries::new(p, q)?,
                    series_next: BesselSeries::new(p + q, q)?,
                    m,
                    gamma1p: gamma1p_rational_float(p, q, bits, cache)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let phi1f = Float::with_val(bits, phi1.as_float());
        let sin = seq.parity.uses_sin();
        let per_row: Vec<Result<(Float, Vec<Float>, Option<Vec<Float>>)>> = rows
            .par_iter()
            .map(|row| {
                let (r, t) = polar_float(&row.point, bits);
                let tt = reduce_theta(&t, &phi1f, seq.delta_phi_over_pi);
                let needs_r = matches!(
                    row.kind,
                    RowKind::EvenNormalDerivative | RowKind::VertexThetaDerivative
                );
                if needs_r && r.is_zero() {
                    return Err(Error::Geometry("derivative row at the origin".into()));
                }
                let lnr = if r.is_zero() { None } else { Some(Float::with_val(bits, r.ln_ref())) };
                let mut a_row = Vec::with_capacity(n);
                let mut b_row = if row.kind == RowKind::EvenNormalDerivative {
                    Some(Vec::with_capacity(n))
                } else {
                    None
                };
                let (x, y) = (
                    Float::with_val(bits, row.point.x.as_float()),
                    Float::with_val(bits, row.point.y.as_float()),
                );
                for (idx, col) in columns.iter().enumerate() {
                    let nu = idx + 1;
                    let mf = rational_float(col.m, bits);
                    // r^m, with 0^0 = 1
                    let rm = match &lnr {
                        Some(l) => Float::with_val(bits, l * &mf).exp(),
                        None => Float::with_val(bits, if col.m == Rational64::from_integer(0) { 1 } else { 0 }),
                    };
                    match row.kind {
                        RowKind::OddValue => {
                            let (ang, _) = angular(&mf, &tt, sin);
                            a_row.push(rm * ang);
                        }
                        RowKind::PeriodicPair { gamma, sigma } => {
                            let (ang, _) = angular(&mf, &tt, sin);
                            let mut cga = Float::with_val(bits, Constant::Pi) * 2u32 * gamma;
                            cga /= sigma;
                            let cga = cga.cos();
                            let sign = if nu % 2 == 0 { 1i32 } else { -1 };
                            a_row.push(rm * ang * (cga + sign));
                        }
                        RowKind::VertexThetaDerivative => {
                            let (_, dang) = angular(&mf, &tt, sin);
                            a_row.push(rm * dang);
                        }
                        RowKind::EvenNormalDerivative => {
                            let line = row.line.as_ref().ok_or_else(|| {
                                Error::Config("normal-derivative row without an edge line".into())
                            })?;
                            let la = Float::with_val(bits, line.a.as_float());
                            let lb = Float::with_val(bits, line.b.as_float());
                            let (g1, g2) = even_geometry(&mf, &tt, &x, &y, &la, &lb, sin);
                            a_row.push(Float::with_val(bits, &rm * &mf) * g1);
                            // −kr·J_{m+1} = −C r^m · 2z/(m+1) · S_{m+1}
                            let mut bb = Float::with_val(bits, &rm * &g2) * 2u32;
                            bb /= Float::with_val(bits, &mf + 1u32);
                            b_row.as_mut().unwrap().push(-bb);
                        }
                    }
                }
                let q = Float::with_val(bits, r.square_ref()) / 4u32;
                Ok((q, a_row, b_row))
            })
            .collect();
        let mut quarter_r2 = Vec::with_capacity(n);
        let mut a = Vec::with_capacity(n * n);
        let mut b = Vec::with_capacity(n);
        let mut r_max = 0f64;
        for item in per_row {
            let (q, ar, br) = item?;
            r_max = r_max.max((q.to_f64() * 4.0).sqrt());
            quarter_r2.push(q);
            a.extend(ar);
            b.push(br);
        }
        Ok(MatrixBuilder {
            n,
            ctx,
            rows,
            columns,
            quarter_r2,
            r_max,
            a,
            b,
            normalize_columns: false,
        })
    }

    /// Drops the positive column factors (k/2)^m/Γ(m+1). Root locations are
    /// unchanged; determinant magnitudes are not comparable with the default.
    pub fn with_column_normalization(mut self, on: bool) -> Self {
        self.normalize_columns = on;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn rows(&self) -> &[RowSpec] {
        &self.rows
    }

    /// M(λ).
    pub fn assemble(&self, lambda: &BigReal) -> Result<PointMatchMatrix> {
        if lambda.signum() <= 0 {
            return Err(Error::Domain("λ must be positive".into()));
        }
        let bits = self.ctx.internal_bits();
        let k2 = Float::with_val(bits, lambda.as_float());
        let kf = k2.to_f64().sqrt();
        let guard = self.ctx.guard_digits + cancellation_guard_digits(kf * self.r_max);
        let wp = digits_to_bits(self.ctx.working_digits + guard);
        let cap = self.ctx.term_cap();
        let col_factor: Vec<Option<Float>> = if self.normalize_columns {
            vec![None; self.n]
        } else {
            let half_k = Float::with_val(bits, k2.sqrt_ref()) / 2u32;
            let ln_half_k = Float::with_val(bits, half_k.ln_ref());
            self.columns
                .iter()
                .map(|c| {
                    let mf = rational_float(c.m, bits);
                    let mut v = Float::with_val(bits, &ln_half_k * &mf).exp();
                    v /= &c.gamma1p;
                    Some(v)
                })
                .collect()
        };
        let n = self.n;
        let rows: Vec<Result<Vec<Float>>> = (0..n)
            .into_par_iter()
            .map(|mu| {
                let z = Float::with_val(wp, &k2 * &self.quarter_r2[mu]);
                let mut out = Vec::with_capacity(n);
                for (nu, col) in self.columns.iter().enumerate() {
                    let a = &self.a[mu * n + nu];
                    let s = col.series.sum(&z, wp, wp, cap)?;
                    let mut e = Float::with_val(bits, a * &s);
                    if let Some(brow) = &self.b[mu] {
                        let s1 = col.series_next.sum(&z, wp, wp, cap)?;
                        let t = Float::with_val(wp, &z * &s1);
                        e += Float::with_val(bits, &brow[nu] * &t);
                    }
                    if let Some(c) = &col_factor[nu] {
                        e *= c;
                    }
                    out.push(e);
                }
                Ok(out)
            })
            .collect();
        let mut entries = Vec::with_capacity(n * n);
        for (mu, r) in rows.into_iter().enumerate() {
            let r = r?;
            if r.iter().all(Float::is_zero) {
                return Err(degenerate(self.rows[mu].kind.name(), &self.rows[mu].point));
            }
            entries.extend(r);
        }
        Ok(PointMatchMatrix {
            n,
            lambda: lambda.clone(),
            entries,
            row_plan: self.rows.iter().map(|r| (r.kind, r.point.clone())).collect(),
        })
    }
}

/// Assembles M^[N](λ) for a catalog descriptor.
pub fn assemble(
    descriptor: &ShapeClassDescriptor,
    n: usize,
    lambda: &BigReal,
    ctx: &PrecisionContext,
) -> Result<PointMatchMatrix> {
    let builder = descriptor.builder(n, *ctx)?;
    builder.assemble(lambda)
}
