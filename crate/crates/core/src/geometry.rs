//! Symmetry-reduced polygons in canonical position, edge lines, and the
//! matching-point distributions.

use std::fmt;

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{digits_to_bits, BigReal};

/// A point in the plane.
#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub x: BigReal,
    pub y: BigReal,
}

impl Vertex {
    pub fn new(x: BigReal, y: BigReal) -> Self {
        Vertex { x, y }
    }

    pub fn from_f64(x: f64, y: f64, digits: u32) -> Self {
        Vertex::new(BigReal::from_f64(x, digits), BigReal::from_f64(y, digits))
    }

    pub fn digits(&self) -> u32 {
        self.x.digits().min(self.y.digits())
    }

    /// Polar form (r, θ) with θ ∈ (−π, π].
    pub fn polar(&self) -> (BigReal, BigReal) {
        let bits = digits_to_bits(self.digits());
        let r = Float::with_val(bits, self.x.as_float().hypot_ref(self.y.as_float()));
        let t = Float::with_val(bits, self.y.as_float().atan2_ref(self.x.as_float()));
        (
            BigReal::from_float(r, self.digits()),
            BigReal::from_float(t, self.digits()),
        )
    }

    pub fn with_digits(&self, digits: u32) -> Vertex {
        Vertex::new(self.x.with_digits(digits), self.y.with_digits(digits))
    }

    fn sub(&self, o: &Vertex) -> Vertex {
        Vertex::new(&self.x - &o.x, &self.y - &o.y)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.x, self.y)
    }
}

/// The line A·x + B·y = C with (A, B) the outward unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeLine {
    pub a: BigReal,
    pub b: BigReal,
    pub c: BigReal,
}

impl EdgeLine {
    /// A·x + B·y − C.
    pub fn residual(&self, p: &Vertex) -> BigReal {
        &(&(&self.a * &p.x) + &(&self.b * &p.y)) - &self.c
    }
}

/// How an edge of Ω enters the calculation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeRole {
    /// Lies on a ray of the expansion wedge; satisfied exactly by every basis
    /// function.
    Adjacent,
    /// Conditions imposed at matching points.
    PointMatched,
    /// Symmetry line or phantom edge whose condition follows from the others.
    Implied,
}

/// Ω in canonical position: V1 at the origin, the edge V2V3 vertical at
/// positive x, vertices counter-clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalPolygon {
    pub vertices: Vec<Vertex>,
    pub edge_roles: Vec<EdgeRole>,
    pub phi1: BigReal,
    pub phis: BigReal,
    pub delta_phi: BigReal,
}

fn two_pi(digits: u32) -> BigReal {
    BigReal::pi(digits) * BigReal::from_i64(2, digits)
}

fn signed_area2(v: &[Vertex]) -> BigReal {
    let d = v[0].digits();
    let mut s = BigReal::zero(d);
    for i in 0..v.len() {
        let j = (i + 1) % v.len();
        s = &s + &(&(&v[i].x * &v[j].y) - &(&v[j].x * &v[i].y));
    }
    s
}

fn tolerance(digits: u32) -> f64 {
    // geometric comparisons need only a coarse threshold relative to unit size
    10f64.powi(2 - digits.min(300) as i32).max(1e-290)
}

impl CanonicalPolygon {
    pub fn digits(&self) -> u32 {
        self.vertices[0].digits()
    }

    pub fn num_edges(&self) -> usize {
        self.vertices.len()
    }

    /// Endpoints of edge `i` (from V_{i+1} to V_{i+2} in one-based labels).
    pub fn edge(&self, i: usize) -> (&Vertex, &Vertex) {
        let n = self.vertices.len();
        (&self.vertices[i % n], &self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> BigReal {
        let (p, q) = self.edge(i);
        let d = q.sub(p);
        (&(&d.x * &d.x) + &(&d.y * &d.y)).sqrt().expect("non-negative")
    }

    /// Overrides the expansion wedge. Used when Ω is a symmetry cell lying
    /// strictly inside the sector of the non-analytic vertex.
    pub fn with_wedge(mut self, phi1: BigReal, delta_phi: BigReal) -> Result<Self> {
        let two_pi = two_pi(self.digits());
        if delta_phi.signum() <= 0 || delta_phi >= two_pi {
            return Err(Error::Geometry("wedge angle must lie in (0, 2π)".into()));
        }
        self.phis = &phi1 + &delta_phi;
        self.phi1 = phi1;
        self.delta_phi = delta_phi;
        Ok(self)
    }

    pub fn with_roles(mut self, roles: Vec<EdgeRole>) -> Result<Self> {
        if roles.len() != self.vertices.len() {
            return Err(Error::Dimension {
                expected: self.vertices.len(),
                got: roles.len(),
            });
        }
        self.edge_roles = roles;
        Ok(self)
    }

    /// θ̃ = θ − φ1 on the branch nearest the wedge [0, Δφ].
    pub fn theta_tilde(&self, theta: &BigReal) -> BigReal {
        let d = theta.digits().min(self.phi1.digits());
        let tp = two_pi(d);
        let mut t = theta - &self.phi1;
        while t.signum() < 0 {
            t = &t + &tp;
        }
        while t >= tp {
            t = &t - &tp;
        }
        // past the wedge by more than half the gap: take the negative branch
        let gap_mid = &self.delta_phi + &((&tp - &self.delta_phi) / BigReal::from_i64(2, d));
        if t > gap_mid {
            t = &t - &tp;
        }
        t
    }

    pub fn centroid(&self) -> Vertex {
        let d = self.digits();
        let a2 = signed_area2(&self.vertices);
        let mut cx = BigReal::zero(d);
        let mut cy = BigReal::zero(d);
        let n = self.vertices.len();
        for i in 0..n {
            let (p, q) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
            let cross = &(&p.x * &q.y) - &(&q.x * &p.y);
            cx = &cx + &(&(&p.x + &q.x) * &cross);
            cy = &cy + &(&(&p.y + &q.y) * &cross);
        }
        let six_a = &a2 * &BigReal::from_i64(3, d);
        Vertex::new(&cx / &six_a, &cy / &six_a)
    }

    pub fn area(&self) -> BigReal {
        signed_area2(&self.vertices) / BigReal::from_i64(2, self.digits())
    }

    /// Point-in-polygon test with boundary tolerance `tol` (convex or not).
    pub fn contains(&self, p: &Vertex, tol: f64) -> bool {
        let (x, y) = (p.x.to_f64(), p.y.to_f64());
        let pts: Vec<(f64, f64)> = self
            .vertices
            .iter()
            .map(|v| (v.x.to_f64(), v.y.to_f64()))
            .collect();
        point_in_polygon(&pts, x, y, tol)
    }

    /// Plain-text vertex list, one "x y" pair per line.
    pub fn to_text(&self) -> String {
        self.vertices.iter().map(|v| format!("{v}\n")).collect()
    }

    /// Parses the plain-text vertex list written by [`to_text`](Self::to_text).
    pub fn parse_vertices(text: &str, digits: u32) -> Result<Vec<Vertex>> {
        let mut out = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::Geometry(format!("line {}: expected \"x y\"", ln + 1)));
            }
            out.push(Vertex::new(
                BigReal::parse(parts[0], digits)?,
                BigReal::parse(parts[1], digits)?,
            ));
        }
        Ok(out)
    }
}

/// Even-odd point-in-polygon with points within `tol` of an edge counted as
/// inside.
pub fn point_in_polygon(pts: &[(f64, f64)], x: f64, y: f64, tol: f64) -> bool {
    let n = pts.len();
    for i in 0..n {
        let (x1, y1) = pts[i];
        let (x2, y2) = pts[(i + 1) % n];
        let (dx, dy) = (x2 - x1, y2 - y1);
        let len2 = dx * dx + dy * dy;
        let t = (((x - x1) * dx + (y - y1) * dy) / len2).clamp(0.0, 1.0);
        let (px, py) = (x1 + t * dx - x, y1 + t * dy - y);
        if (px * px + py * py).sqrt() <= tol {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = pts[i];
        let (xj, yj) = pts[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Translates V1 to the origin, rotates the edge V2V3 onto a vertical line at
/// positive x and mirrors to counter-clockwise order. The wedge is spanned by
/// the two edges meeting at V1.
pub fn canonicalize(raw: &[Vertex]) -> Result<CanonicalPolygon> {
    if raw.len() < 3 {
        return Err(Error::Geometry("a polygon needs at least three vertices".into()));
    }
    let d = raw.iter().map(Vertex::digits).min().unwrap();
    let tol = tolerance(d);
    for i in 0..raw.len() {
        let e = raw[(i + 1) % raw.len()].sub(&raw[i]);
        if e.x.abs().to_f64().max(e.y.abs().to_f64()) <= tol {
            return Err(Error::Geometry(format!("edge {} has zero length", i + 1)));
        }
    }
    let origin = raw[0].clone();
    let shifted: Vec<Vertex> = raw.iter().map(|v| v.sub(&origin)).collect();
    let dir = shifted[2].sub(&shifted[1]);
    let len = (&(&dir.x * &dir.x) + &(&dir.y * &dir.y)).sqrt()?;
    let (ux, uy) = (&dir.x / &len, &dir.y / &len);
    // R = [[uy, −ux], [ux, uy]] maps the edge direction to +y
    let rot = |v: &Vertex, s: &BigReal| {
        Vertex::new(
            s * &(&(&uy * &v.x) - &(&ux * &v.y)),
            s * &(&(&ux * &v.x) + &(&uy * &v.y)),
        )
    };
    let one = BigReal::one(d);
    let mut sign = one.clone();
    let x2 = rot(&shifted[1], &sign).x;
    if x2.to_f64().abs() <= tol {
        return Err(Error::Geometry(
            "edge V2V3 passes through V1 and cannot be made vertical at positive x".into(),
        ));
    }
    if x2.signum() < 0 {
        sign = -one;
    }
    let mut verts: Vec<Vertex> = shifted.iter().map(|v| rot(v, &sign)).collect();
    let area = signed_area2(&verts);
    if area.to_f64().abs() <= tol {
        return Err(Error::Geometry("degenerate polygon with zero area".into()));
    }
    if area.signum() < 0 {
        for v in &mut verts {
            v.y = -v.y.clone();
        }
    }
    // exact zeros for the pinned coordinates
    verts[0] = Vertex::new(BigReal::zero(d), BigReal::zero(d));
    let (_, phi1) = verts[1].polar();
    let (_, phis_raw) = verts[verts.len() - 1].polar();
    let tp = two_pi(d);
    let mut delta = &phis_raw - &phi1;
    while delta.signum() <= 0 {
        delta = &delta + &tp;
    }
    while delta >= tp {
        delta = &delta - &tp;
    }
    let n = verts.len();
    let mut roles = vec![EdgeRole::PointMatched; n];
    roles[0] = EdgeRole::Adjacent;
    roles[n - 1] = EdgeRole::Adjacent;
    let phis = &phi1 + &delta;
    Ok(CanonicalPolygon {
        vertices: verts,
        edge_roles: roles,
        phi1,
        phis,
        delta_phi: delta,
    })
}

/// Outward unit normal line of edge `i` (zero-based; edge 0 is ∂Ω_1).
pub fn edge_line(poly: &CanonicalPolygon, i: usize) -> Result<EdgeLine> {
    if i >= poly.num_edges() {
        return Err(Error::Geometry(format!("edge index {i} out of range")));
    }
    let (p, q) = poly.edge(i);
    let d = q.sub(p);
    let len = (&(&d.x * &d.x) + &(&d.y * &d.y)).sqrt()?;
    if len.to_f64() <= tolerance(poly.digits()) {
        return Err(Error::Geometry(format!("edge {} has zero length", i + 1)));
    }
    // counter-clockwise boundary: outward normal is the direction turned right
    let mut a = &d.y / &len;
    let mut b = -(&d.x / &len);
    let mut c = &(&a * &p.x) + &(&b * &p.y);
    let cen = poly.centroid();
    if &(&(&a * &cen.x) + &(&b * &cen.y)) - &c > BigReal::zero(poly.digits()) {
        a = -a;
        b = -b;
        c = -c;
    }
    Ok(EdgeLine { a, b, c })
}

/// Identifies how a matching set was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Distribution {
    CanonicalChebyshev,
    EqualSpaced,
    HalfSine,
    StarChebyshev,
    Cutsquare,
    /// Canonical Chebyshev nodes on every half-unit piece of the full cut
    /// square's boundary.
    CutsquarePieces,
}

impl Distribution {
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::CanonicalChebyshev => "canonical_chebyshev",
            Distribution::EqualSpaced => "equal_spaced",
            Distribution::HalfSine => "half_sine",
            Distribution::StarChebyshev => "star_chebyshev",
            Distribution::Cutsquare => "cutsquare",
            Distribution::CutsquarePieces => "cutsquare_pieces",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "canonical_chebyshev" | "chebyshev" => Distribution::CanonicalChebyshev,
            "equal_spaced" | "equal" => Distribution::EqualSpaced,
            "half_sine" => Distribution::HalfSine,
            "star_chebyshev" | "star" => Distribution::StarChebyshev,
            "cutsquare" => Distribution::Cutsquare,
            "cutsquare_pieces" | "pieces" => Distribution::CutsquarePieces,
            _ => return Err(Error::Config(format!("unknown distribution {s:?}"))),
        })
    }
}

/// N matching points with the edge each lies on.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchingSet {
    pub points: Vec<Vertex>,
    /// Zero-based edge index for each point.
    pub edges: Vec<usize>,
    pub per_edge_counts: Vec<usize>,
    pub distribution: Distribution,
}

impl MatchingSet {
    pub fn new(points: Vec<Vertex>, edges: Vec<usize>, distribution: Distribution) -> Self {
        let n_edges = edges.iter().copied().max().map_or(0, |m| m + 1);
        let mut per_edge_counts = vec![0; n_edges];
        for &e in &edges {
            per_edge_counts[e] += 1;
        }
        MatchingSet {
            points,
            edges,
            per_edge_counts,
            distribution,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Checks the set against the polygon: points on their edge lines,
    /// pairwise distinct, and away from the vertices.
    pub fn validate(&self, poly: &CanonicalPolygon) -> Result<()> {
        let d = self.points.iter().map(Vertex::digits).min().unwrap_or(poly.digits());
        let line_tol = 10f64.powi(2 - d.min(300) as i32).max(1e-290);
        for (p, &e) in self.points.iter().zip(&self.edges) {
            let line = edge_line(poly, e)?;
            if line.residual(p).abs().to_f64() >= line_tol {
                return Err(Error::Geometry(format!("matching point {p} is off edge {}", e + 1)));
            }
        }
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| (p.x.to_f64(), p.y.to_f64()))
            .collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if pts[i] == pts[j] {
                    return Err(Error::Geometry(format!(
                        "matching points {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// s_μ = (ℓ/2)[1 − cos((μ − ½)π/n)], μ = 1..n.
pub fn canonical_chebyshev(length: &BigReal, n: usize) -> Vec<BigReal> {
    let d = length.digits();
    let bits = digits_to_bits(d) + 16;
    let pi = Float::with_val(bits, Constant::Pi);
    (1..=n)
        .map(|mu| {
            let mut t = Float::with_val(bits, 2 * mu - 1) * &pi;
            t /= 2 * n as u64;
            let v = (Float::with_val(bits, 1u32) - t.cos()) * length.as_float() / 2u32;
            BigReal::from_float(v, d)
        })
        .collect()
}

/// y_ν = y_max·sin(νπ/(2(N+1))), ν = 1..N: the quarter-wave sine ramp, which
/// runs monotonically from the right-angle vertex and crowds toward the far
/// acute vertex.
pub fn half_sine_nodes(y_max: &BigReal, n: usize) -> Vec<BigReal> {
    let d = y_max.digits();
    let bits = digits_to_bits(d) + 16;
    let pi = Float::with_val(bits, Constant::Pi);
    (1..=n)
        .map(|nu| {
            let mut t = Float::with_val(bits, nu) * &pi;
            t /= 2 * (n as u64 + 1);
            BigReal::from_float(t.sin() * y_max.as_float(), d)
        })
        .collect()
}

/// The literal y_max·sin(νπ/(N+1)), which folds back on itself past ν = N/2.
pub fn half_sine_nodes_literal(y_max: &BigReal, n: usize) -> Vec<BigReal> {
    let d = y_max.digits();
    let bits = digits_to_bits(d) + 16;
    let pi = Float::with_val(bits, Constant::Pi);
    (1..=n)
        .map(|nu| {
            let mut t = Float::with_val(bits, nu) * &pi;
            t /= n as u64 + 1;
            BigReal::from_float(t.sin() * y_max.as_float(), d)
        })
        .collect()
}

/// y_ν = ½{(y_C + y_B) + (y_C − y_B)·cos(νπ/(n2+1))}, ν = 1..n2.
pub fn star_nodes(y_b: &BigReal, y_c: &BigReal, n2: usize) -> Vec<BigReal> {
    let d = y_b.digits().min(y_c.digits());
    let bits = digits_to_bits(d) + 16;
    let pi = Float::with_val(bits, Constant::Pi);
    let sum = Float::with_val(bits, y_c.as_float() + y_b.as_float());
    let diff = Float::with_val(bits, y_c.as_float() - y_b.as_float());
    (1..=n2)
        .map(|nu| {
            let mut t = Float::with_val(bits, nu) * &pi;
            t /= n2 as u64 + 1;
            let v = (Float::with_val(bits, &diff * t.cos()) + &sum) / 2u32;
            BigReal::from_float(v, d)
        })
        .collect()
}

/// Chebyshev-like nodes on the two outer edges of the quarter square
/// [0, ½]²: N/2 on x = ½ running up from y = 0, then N/2 on y = ½ running
/// from the corner (½, ½) toward x = 0.
pub fn cutsquare_nodes(n: usize, digits: u32) -> Result<Vec<Vertex>> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Config(format!("cut-square point count must be even, got {n}")));
    }
    let bits = digits_to_bits(digits) + 16;
    let pi = Float::with_val(bits, Constant::Pi);
    let half = BigReal::from_ratio(1, 2, digits);
    let h = n / 2;
    let mut out = Vec::with_capacity(n);
    for mu in 1..=h {
        let mut t = Float::with_val(bits, 2 * mu - 1) * &pi;
        t /= 2 * h as u64;
        let y = (Float::with_val(bits, 1u32) - t.cos()) / 4u32;
        out.push(Vertex::new(half.clone(), BigReal::from_float(y, digits)));
    }
    for mu in h + 1..=n {
        let mut t = Float::with_val(bits, 2 * mu - 1) * &pi;
        t /= 2 * n as u64;
        let x = t.sin() / 2u32;
        out.push(Vertex::new(BigReal::from_float(x, digits), half.clone()));
    }
    Ok(out)
}

/// Uniform arclength positions on a path of length `total`. With endpoints
/// the spacing is total/(N−1), otherwise total/(N+1).
pub fn equal_spaced_nodes(total: &BigReal, n: usize, include_endpoints: bool) -> Vec<BigReal> {
    let d = total.digits();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![total / &BigReal::from_i64(2, d)];
    }
    if include_endpoints {
        (0..n)
            .map(|i| &(total * &BigReal::from_i64(i as i64, d)) / &BigReal::from_i64(n as i64 - 1, d))
            .collect()
    } else {
        (1..=n)
            .map(|i| &(total * &BigReal::from_i64(i as i64, d)) / &BigReal::from_i64(n as i64 + 1, d))
            .collect()
    }
}

/// True when every consecutive gap is below `fraction` of the free
/// wavelength 2π/√λ.
pub fn wavelength_gap_check(points: &MatchingSet, lambda: &BigReal, fraction: f64) -> bool {
    if points.len() < 2 {
        return true;
    }
    let wavelength = 2.0 * std::f64::consts::PI / lambda.to_f64().sqrt();
    let limit = fraction * wavelength;
    points.points.windows(2).all(|w| {
        let dx = w[1].x.to_f64() - w[0].x.to_f64();
        let dy = w[1].y.to_f64() - w[0].y.to_f64();
        (dx * dx + dy * dy).sqrt() < limit
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: u32 = 40;

    fn v(x: f64, y: f64) -> Vertex {
        Vertex::from_f64(x, y, D)
    }

    fn close(a: &BigReal, b: f64) -> bool {
        (a.to_f64() - b).abs() < 1e-15_f64.max(b.abs() * 1e-15)
    }

    #[test]
    fn clockwise_square_is_normalized() {
        let raw = vec![v(1.0, 1.0), v(1.0, 0.0), v(0.0, 0.0), v(0.0, 1.0)];
        let p = canonicalize(&raw).unwrap();
        assert!(p.vertices[0].x.is_zero() && p.vertices[0].y.is_zero());
        assert!(close(&p.vertices[1].x, 1.0));
        assert!(close(&p.vertices[2].x, 1.0));
        assert!(p.area().signum() > 0);
        assert!(close(&p.delta_phi, std::f64::consts::FRAC_PI_2));
        let l = edge_line(&p, 1).unwrap();
        assert!(close(&l.a, 1.0) && close(&l.c, 1.0) && l.b.to_f64().abs() < 1e-30);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let raw = vec![v(0.3, -0.2), v(2.0, 0.5), v(1.1, 2.2), v(-0.4, 1.0)];
        let p = canonicalize(&raw).unwrap();
        let q = canonicalize(&p.vertices).unwrap();
        for (a, b) in p.vertices.iter().zip(&q.vertices) {
            assert!((&a.x - &b.x).abs().to_f64() < 1e-38);
            assert!((&a.y - &b.y).abs().to_f64() < 1e-38);
        }
        assert!((&p.delta_phi - &q.delta_phi).abs().to_f64() < 1e-38);
    }

    #[test]
    fn kite_wedge_is_vertex_angle() {
        // regular pentagon kite: vertex, edge midpoint, centre, other midpoint
        let s = 5.0f64;
        let a = 1.0;
        let h = a / (2.0 * (std::f64::consts::PI / s).tan());
        let beta = (s - 2.0) * std::f64::consts::PI / s;
        let m2 = (a / 2.0 * beta.cos(), a / 2.0 * beta.sin());
        let c = (a / 2.0, h);
        let raw = vec![v(0.0, 0.0), v(a / 2.0, 0.0), v(c.0, c.1), v(m2.0, m2.1)];
        let p = canonicalize(&raw).unwrap();
        assert!((p.delta_phi.to_f64() - 3.0 * std::f64::consts::PI / 5.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        let dup = vec![v(0.0, 0.0), v(1.0, 0.0), v(1.0, 0.0), v(0.0, 1.0)];
        assert!(matches!(canonicalize(&dup), Err(Error::Geometry(_))));
        let line = vec![v(0.0, 0.0), v(1.0, 0.0), v(2.0, 0.0)];
        assert!(matches!(canonicalize(&line), Err(Error::Geometry(_))));
    }

    #[test]
    fn edge_lines_point_outward() {
        let raw = vec![v(0.0, 0.0), v(0.5, 0.0), v(0.5, 0.5), v(0.0, 0.5)];
        let p = canonicalize(&raw).unwrap();
        let c = p.centroid();
        for i in 0..4 {
            let l = edge_line(&p, i).unwrap();
            let n2 = &(&l.a * &l.a) + &(&l.b * &l.b);
            assert!((n2.to_f64() - 1.0).abs() < 1e-38);
            assert!(l.residual(&c).signum() < 0);
        }
        let l = edge_line(&p, 2).unwrap();
        assert!(close(&l.b, 1.0) && close(&l.c, 0.5));
        assert!(edge_line(&p, 7).is_err());
    }

    #[test]
    fn theta_tilde_wraps_into_wedge() {
        let raw = vec![v(0.0, 0.0), v(0.5, 0.0), v(0.5, 0.5), v(0.0, 0.5)];
        let pi = std::f64::consts::PI;
        let p = canonicalize(&raw)
            .unwrap()
            .with_wedge(
                BigReal::pi(D) * BigReal::from_ratio(3, 4, D),
                BigReal::pi(D) * BigReal::from_ratio(7, 4, D),
            )
            .unwrap();
        let t = p.theta_tilde(&BigReal::zero(D));
        assert!((t.to_f64() - 5.0 * pi / 4.0).abs() < 1e-14);
        let t = p.theta_tilde(&BigReal::from_f64(pi / 2.0, D));
        assert!((t.to_f64() - 7.0 * pi / 4.0).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_positions() {
        let one = BigReal::one(D);
        let s = canonical_chebyshev(&one, 1);
        assert!(close(&s[0], 0.5));
        let s = canonical_chebyshev(&one, 2);
        assert!(close(&s[0], (2.0 - 2f64.sqrt()) / 4.0));
        assert!(close(&s[1], (2.0 + 2f64.sqrt()) / 4.0));
        let s = canonical_chebyshev(&one, 10);
        for mu in 0..10 {
            let sum = &s[mu] + &s[9 - mu];
            assert!((sum.to_f64() - 1.0).abs() < 1e-38);
        }
        let end_gap = s[1].to_f64() - s[0].to_f64();
        let mid_gap = s[5].to_f64() - s[4].to_f64();
        assert!(end_gap / mid_gap < 1.0 / 3.0);
    }

    #[test]
    fn half_sine_positions() {
        let y = BigReal::one(D);
        let lit = half_sine_nodes_literal(&y, 3);
        assert!(close(&lit[0], 0.5f64.sqrt()) && close(&lit[1], 1.0) && close(&lit[2], 0.5f64.sqrt()));
        let lit1 = half_sine_nodes_literal(&y, 1);
        assert!(close(&lit1[0], 1.0));
        let ymax = BigReal::from_f64((std::f64::consts::PI / 16.0).cos(), D);
        let s = half_sine_nodes(&ymax, 40);
        for w in s.windows(2) {
            assert!(w[1] > w[0]);
        }
        assert!(s[0].signum() > 0 && s[39] <= ymax);
        // crowding toward the far end
        assert!(s[39].to_f64() - s[38].to_f64() < s[1].to_f64() - s[0].to_f64());
    }

    #[test]
    fn star_positions() {
        let yb = BigReal::from_f64(0.2, D);
        let yc = BigReal::from_f64(1.4, D);
        let s = star_nodes(&yb, &yc, 1);
        assert!((s[0].to_f64() - 0.8).abs() < 1e-15);
        let s = star_nodes(&yb, &yc, 5);
        assert!((s[2].to_f64() - 0.8).abs() < 1e-15);
        let s = star_nodes(&yb, &yc, 10);
        for p in &s {
            assert!(p.to_f64() > 0.2 && p.to_f64() < 1.4);
        }
        let end = (s[0].to_f64() - s[1].to_f64()).abs();
        let mid = (s[4].to_f64() - s[5].to_f64()).abs();
        assert!(mid / end > 2.0);
    }

    #[test]
    fn cutsquare_positions() {
        let pts = cutsquare_nodes(8, D).unwrap();
        let pi = std::f64::consts::PI;
        assert!((pts[0].y.to_f64() - (1.0 - (pi / 8.0).cos()) / 4.0).abs() < 1e-15);
        assert!((pts[7].x.to_f64() - 0.5 * (15.0 * pi / 16.0).sin()).abs() < 1e-15);
        for p in &pts {
            let m = if p.x > p.y { &p.x } else { &p.y };
            assert_eq!(m.to_decimal(), BigReal::from_ratio(1, 2, D).to_decimal());
        }
        assert!(matches!(cutsquare_nodes(7, D), Err(Error::Config(_))));
    }

    #[test]
    fn equal_spacing() {
        let t = BigReal::from_i64(3, D);
        let s = equal_spaced_nodes(&t, 3, false);
        let want = [0.75, 1.5, 2.25];
        for (a, b) in s.iter().zip(want) {
            assert!(close(a, b));
        }
        assert!(close(&equal_spaced_nodes(&t, 1, false)[0], 1.5));
        let e = equal_spaced_nodes(&t, 4, true);
        assert!(e[0].is_zero() && close(&e[3], 3.0));
    }

    #[test]
    fn wavelength_gaps() {
        let lambda = BigReal::from_i64(100, D);
        let wl = 2.0 * std::f64::consts::PI / 10.0;
        let pts = vec![v(0.0, 0.0), v(wl / 10.0, 0.0)];
        let set = MatchingSet::new(pts, vec![0, 0], Distribution::EqualSpaced);
        assert!(wavelength_gap_check(&set, &lambda, 0.5));
        let single = MatchingSet::new(vec![v(0.0, 0.0)], vec![0], Distribution::EqualSpaced);
        assert!(wavelength_gap_check(&single, &lambda, 0.5));
        let big = BigReal::from_i64(100_001, D);
        let sparse = MatchingSet::new(
            vec![v(0.0, 0.0), v(0.05, 0.0), v(0.1, 0.0)],
            vec![0, 0, 0],
            Distribution::EqualSpaced,
        );
        assert!(!wavelength_gap_check(&sparse, &big, 0.5));
    }

    #[test]
    fn vertex_text_round_trip() {
        let raw = vec![v(0.0, 0.0), v(0.5, 0.0), v(0.5, 0.5), v(0.0, 0.5)];
        let p = canonicalize(&raw).unwrap();
        let back = CanonicalPolygon::parse_vertices(&p.to_text(), D).unwrap();
        assert_eq!(back.len(), 4);
        assert!(close(&back[2].y, 0.5));
        assert!(CanonicalPolygon::parse_vertices("1 2 3", D).is_err());
    }
}
