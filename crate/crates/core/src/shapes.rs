//! The shapes the solver ships with: their symmetry-reduced regions,
//! parities, m-rules, matching-point plans and precision multipliers.

use std::fmt;

use num_rational::Rational64;
use rug::float::Constant;
use rug::Float;

use crate::assembly::{MatrixBuilder, RowKind, RowSpec};
use crate::error::{Error, Result};
use crate::expansion::{MRule, MSequence, Parity, ParityPair};
use crate::geometry::{
    canonical_chebyshev, canonicalize, cutsquare_nodes, edge_line, equal_spaced_nodes,
    half_sine_nodes, star_nodes, CanonicalPolygon, Distribution, EdgeRole, MatchingSet, Vertex,
};
use crate::precision::{digits_to_bits, BigReal, PrecisionContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShapeId {
    LShape,
    Cutsquare,
    Star,
    RegularPolygon(u32),
}

impl fmt::Display for ShapeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeId::LShape => write!(f, "lshape"),
            ShapeId::Cutsquare => write!(f, "cutsquare"),
            ShapeId::Star => write!(f, "star"),
            ShapeId::RegularPolygon(s) => write!(f, "polygon{s}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

impl BoundaryKind {
    pub fn name(&self) -> &'static str {
        match self {
            BoundaryKind::Dirichlet => "dirichlet",
            BoundaryKind::Neumann => "neumann",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "d" => Ok(BoundaryKind::Dirichlet),
            "neumann" | "n" => Ok(BoundaryKind::Neumann),
            _ => Err(Error::Config(format!("unknown boundary kind {s:?}"))),
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            BoundaryKind::Dirichlet => Parity::Odd,
            BoundaryKind::Neumann => Parity::Even,
        }
    }
}

/// Which values of N a row plan accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NConstraint {
    Any,
    Even,
    MultipleOf(usize),
}

impl NConstraint {
    pub fn check(&self, n: usize) -> Result<()> {
        let ok = match self {
            NConstraint::Any => n >= 1,
            NConstraint::Even => n >= 2 && n.is_multiple_of(2),
            NConstraint::MultipleOf(d) => n >= *d && n.is_multiple_of(*d),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("N = {n} violates constraint {self:?}")))
        }
    }
}

/// Polygon size convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolygonScale {
    UnitEdge,
    AreaPi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionKind {
    /// Unit square with the 3π/2 wedge of the L's re-entrant corner.
    LShape,
    /// First-quadrant square [0, ½]² of the cut square.
    CutsquareQuadrant,
    /// The whole cut-square hexagon.
    CutsquareFull,
    PolygonTriangle,
    PolygonKite,
    StarTriangle,
    StarArrowhead,
}

/// Dihedral bookkeeping for D_σ.
#[derive(Clone, Debug, PartialEq)]
pub struct DihedralInfo {
    pub sigma: u32,
    pub alpha: BigReal,
    pub beta: BigReal,
    pub eta1: u32,
    pub eta2: u32,
}

impl DihedralInfo {
    pub fn new(sigma: u32, digits: u32) -> Result<Self> {
        if sigma < 3 {
            return Err(Error::Config(format!("dihedral order must be at least 3, got {sigma}")));
        }
        let pi = BigReal::pi(digits);
        let s = BigReal::from_i64(sigma as i64, digits);
        let alpha = &(&pi * &BigReal::from_i64(2, digits)) / &s;
        let beta = &(&pi * &BigReal::from_i64(sigma as i64 - 2, digits)) / &s;
        let eta1 = if sigma.is_multiple_of(2) { 4 } else { 2 };
        Ok(DihedralInfo {
            sigma,
            alpha,
            beta,
            eta1,
            eta2: (2 * sigma - eta1) / 4,
        })
    }

    /// Labels of the non-degenerate classes.
    pub fn simple_classes(&self) -> Vec<&'static str> {
        if self.sigma.is_multiple_of(2) {
            vec!["S", "A", "S'", "A'"]
        } else {
            vec!["S", "A"]
        }
    }

    /// Label of degenerate tower γ (B for γ = 1, C for γ = 2, …).
    pub fn degenerate_label(gamma: u32) -> String {
        if (1..=24).contains(&gamma) {
            ((b'A' + gamma as u8) as char).to_string()
        } else {
            format!("G{gamma}")
        }
    }

    fn gamma_of(&self, label: &str) -> Option<u32> {
        (1..=self.eta2).find(|&g| Self::degenerate_label(g) == label)
    }
}

/// Everything needed to build M(λ) for one shape, class and boundary kind.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeClassDescriptor {
    pub shape_id: ShapeId,
    pub class_id: String,
    pub boundary_kind: BoundaryKind,
    pub region_kind: RegionKind,
    pub parity: ParityPair,
    /// Parity of each point-matched edge, in edge order.
    pub matched_parity: Vec<Parity>,
    pub m_rule: MRule,
    pub delta_phi_over_pi: Rational64,
    pub distribution: Distribution,
    pub gamma: Option<u32>,
    pub precision_multiplier: f64,
    pub n_constraint: NConstraint,
    /// Proper increment.
    pub delta_n: usize,
    pub scale: PolygonScale,
    /// θ-derivative rows at V2 and V3 (equal-spaced L-shape only).
    pub vertex_rows: bool,
}

fn pol_mult(sigma: u32) -> f64 {
    if sigma <= 10 {
        1.7
    } else {
        1.4
    }
}

fn parse_shape(shape: &str) -> Result<(ShapeId, PolygonScale)> {
    let s = shape.trim().to_ascii_lowercase();
    match s.as_str() {
        "lshape" | "l-shape" | "l" => return Ok((ShapeId::LShape, PolygonScale::UnitEdge)),
        "cutsquare" | "cut-square" => return Ok((ShapeId::Cutsquare, PolygonScale::UnitEdge)),
        "star" => return Ok((ShapeId::Star, PolygonScale::UnitEdge)),
        _ => {}
    }
    let body = s
        .strip_prefix("regular_polygon(")
        .and_then(|b| b.strip_suffix(')'))
        .map(|b| (b.to_string(), false))
        .or_else(|| {
            s.strip_prefix("polygon").map(|b| match b.strip_suffix("pi") {
                Some(core) => (core.to_string(), true),
                None => (b.to_string(), false),
            })
        });
    if let Some((num, area_pi)) = body {
        let num = num.trim_start_matches(':');
        if let Ok(sigma) = num.parse::<u32>() {
            if sigma >= 3 {
                let scale = if area_pi { PolygonScale::AreaPi } else { PolygonScale::UnitEdge };
                return Ok((ShapeId::RegularPolygon(sigma), scale));
            }
        }
    }
    Err(Error::NotInCatalog(format!("unknown shape {shape:?}")))
}

fn not_in_catalog(shape: &str, class: &str, bc: BoundaryKind) -> Error {
    Error::NotInCatalog(format!("no class {class:?} for shape {shape} with {} conditions", bc.name()))
}

/// Looks up a catalog entry. Shapes: `lshape`, `cutsquare`, `star`,
/// `polygon<σ>` (unit edge) and `polygon<σ>pi` (area π).
pub fn descriptor(shape: &str, class: &str, bc: BoundaryKind) -> Result<ShapeClassDescriptor> {
    let (shape_id, scale) = parse_shape(shape)?;
    let bp = bc.parity();
    let base = |region_kind, parity, matched_parity, m_rule, dphi, distribution| ShapeClassDescriptor {
        shape_id,
        class_id: class.to_string(),
        boundary_kind: bc,
        region_kind,
        parity,
        matched_parity,
        m_rule,
        delta_phi_over_pi: dphi,
        distribution,
        gamma: None,
        precision_multiplier: 1.2,
        n_constraint: NConstraint::Any,
        delta_n: 1,
        scale,
        vertex_rows: false,
    };
    match shape_id {
        ShapeId::LShape => {
            if class != "lowest_dirichlet_sym" || bc != BoundaryKind::Dirichlet {
                return Err(not_in_catalog(shape, class, bc));
            }
            let pp = ParityPair::new(Parity::Odd, Parity::Odd);
            let mut d = base(
                RegionKind::LShape,
                pp,
                vec![Parity::Odd, Parity::Odd],
                MRule::LShape,
                Rational64::new(3, 2),
                Distribution::CanonicalChebyshev,
            );
            d.n_constraint = NConstraint::Even;
            d.delta_n = 2;
            Ok(d)
        }
        ShapeId::Cutsquare => {
            let pp = ParityPair::new(bp, bp);
            if class == "full" {
                let mut d = base(
                    RegionKind::CutsquareFull,
                    pp,
                    vec![bp; 4],
                    MRule::General,
                    Rational64::new(7, 4),
                    Distribution::CanonicalChebyshev,
                );
                d.n_constraint = NConstraint::MultipleOf(7);
                d.delta_n = 7;
                return Ok(d);
            }
            let rule = match class {
                "A" => MRule::CutsquareA,
                "B" => MRule::CutsquareB,
                "C" => MRule::CutsquareC,
                _ => return Err(not_in_catalog(shape, class, bc)),
            };
            let mut d = base(
                RegionKind::CutsquareQuadrant,
                pp,
                vec![bp, bp],
                rule,
                Rational64::new(7, 4),
                Distribution::Cutsquare,
            );
            d.n_constraint = NConstraint::Even;
            d.delta_n = 2;
            Ok(d)
        }
        ShapeId::Star => {
            // the triangle's adjacent edges: inner vertex to centre (a symmetry
            // line), then the star boundary; O–P is matched
            let (region, sym, gamma) = match class {
                "S" => (RegionKind::StarTriangle, Parity::Even, None),
                "A" => (RegionKind::StarTriangle, Parity::Odd, None),
                "B_e" | "B_o" | "B" => (RegionKind::StarArrowhead, Parity::Even, Some(1)),
                "C_e" | "C_o" | "C" => (RegionKind::StarArrowhead, Parity::Even, Some(2)),
                _ => return Err(not_in_catalog(shape, class, bc)),
            };
            let mut d = if region == RegionKind::StarTriangle {
                base(
                    region,
                    ParityPair::new(sym, bp),
                    vec![sym],
                    MRule::General,
                    Rational64::new(7, 10),
                    Distribution::StarChebyshev,
                )
            } else {
                base(
                    region,
                    ParityPair::new(bp, bp),
                    vec![Parity::Even],
                    MRule::General,
                    Rational64::new(7, 5),
                    Distribution::StarChebyshev,
                )
            };
            d.gamma = gamma;
            if gamma.is_some() {
                d.n_constraint = NConstraint::Even;
                d.delta_n = 2;
            }
            Ok(d)
        }
        ShapeId::RegularPolygon(sigma) => {
            let info = DihedralInfo::new(sigma, 20)?;
            let tri_dphi = Rational64::new(sigma as i64 - 2, 2 * sigma as i64);
            let (apothem, circum) = match class {
                "S" => (Parity::Even, Parity::Even),
                "A" => (Parity::Odd, Parity::Odd),
                "S'" | "Sp" if sigma % 2 == 0 => (Parity::Even, Parity::Odd),
                "A'" | "Ap" if sigma % 2 == 0 => (Parity::Odd, Parity::Even),
                _ => {
                    let (label, suffix) = class
                        .rsplit_once('_')
                        .map(|(l, s)| (l, Some(s)))
                        .unwrap_or((class, None));
                    if !matches!(suffix, None | Some("e") | Some("o")) {
                        return Err(not_in_catalog(shape, class, bc));
                    }
                    let gamma = info
                        .gamma_of(label)
                        .ok_or_else(|| not_in_catalog(shape, class, bc))?;
                    let mut d = base(
                        RegionKind::PolygonKite,
                        ParityPair::new(bp, bp),
                        vec![Parity::Even],
                        MRule::General,
                        Rational64::new(sigma as i64 - 2, sigma as i64),
                        // half-sine points leave the kite classes without
                        // alternation; canonical Chebyshev restores it
                        Distribution::CanonicalChebyshev,
                    );
                    d.gamma = Some(gamma);
                    d.n_constraint = NConstraint::Even;
                    d.delta_n = 2;
                    d.precision_multiplier = pol_mult(sigma);
                    return Ok(d);
                }
            };
            let mut d = base(
                RegionKind::PolygonTriangle,
                ParityPair::new(bp, circum),
                vec![apothem],
                MRule::General,
                tri_dphi,
                Distribution::HalfSine,
            );
            d.precision_multiplier = pol_mult(sigma);
            Ok(d)
        }
    }
}

/// Every catalog entry, in a fixed order. Polygons are listed for σ = 5..10.
pub fn list_catalog() -> Vec<(String, String, BoundaryKind)> {
    let mut out = vec![(
        "lshape".to_string(),
        "lowest_dirichlet_sym".to_string(),
        BoundaryKind::Dirichlet,
    )];
    for bc in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
        for c in ["A", "B", "C", "full"] {
            out.push(("cutsquare".into(), c.into(), bc));
        }
    }
    for bc in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
        for c in ["S", "A", "B_e", "C_e"] {
            out.push(("star".into(), c.into(), bc));
        }
    }
    for sigma in 5..=10u32 {
        let info = DihedralInfo::new(sigma, 20).expect("σ ≥ 3");
        for bc in [BoundaryKind::Dirichlet, BoundaryKind::Neumann] {
            for c in info.simple_classes() {
                out.push((format!("polygon{sigma}"), c.to_string(), bc));
            }
            for g in 1..=info.eta2 {
                let l = DihedralInfo::degenerate_label(g);
                out.push((format!("polygon{sigma}"), format!("{l}_e"), bc));
                out.push((format!("polygon{sigma}"), format!("{l}_o"), bc));
            }
        }
    }
    out
}

/// Plain-text dump of the catalog, one entry per line.
pub fn catalog_text() -> String {
    let mut s = String::from("shape class bc delta_phi/pi parity m_rule distribution multiplier\n");
    for (shape, class, bc) in list_catalog() {
        let d = descriptor(&shape, &class, bc).expect("listed entries resolve");
        s.push_str(&format!(
            "{} {} {} {} {}{} {} {} {}\n",
            shape,
            class,
            bc.name(),
            d.delta_phi_over_pi,
            d.parity.first_adjacent.symbol(),
            d.parity.last_adjacent.symbol(),
            d.m_rule.name(),
            d.distribution.name(),
            d.precision_multiplier
        ));
    }
    s
}

fn fl(bits: u32, v: i64) -> Float {
    Float::with_val(bits, v)
}

fn vtx(x: Float, y: Float, digits: u32) -> Vertex {
    Vertex::new(BigReal::from_float(x, digits), BigReal::from_float(y, digits))
}

/// Point at arclength `s` along edge `e` of `poly`.
fn point_on_edge(poly: &CanonicalPolygon, e: usize, s: &BigReal) -> Vertex {
    let (p, q) = poly.edge(e);
    let len = poly.edge_length(e);
    let t = s / &len;
    Vertex::new(
        &p.x + &(&t * &(&q.x - &p.x)),
        &p.y + &(&t * &(&q.y - &p.y)),
    )
}

impl ShapeClassDescriptor {
    pub fn m_sequence(&self) -> MSequence {
        MSequence::new(self.m_rule, self.parity, self.delta_phi_over_pi)
    }

    pub fn dihedral(&self, digits: u32) -> Option<DihedralInfo> {
        match self.shape_id {
            ShapeId::RegularPolygon(s) => DihedralInfo::new(s, digits).ok(),
            ShapeId::Star => DihedralInfo::new(5, digits).ok(),
            _ => None,
        }
    }

    /// Switches the matching-point distribution. For the L-shape, equal
    /// spacing selects the replication scheme with vertex θ-derivative rows.
    pub fn with_distribution(mut self, d: Distribution) -> Result<Self> {
        let ok = match self.region_kind {
            RegionKind::LShape => {
                matches!(d, Distribution::CanonicalChebyshev | Distribution::EqualSpaced)
            }
            RegionKind::CutsquareQuadrant => matches!(
                d,
                Distribution::Cutsquare | Distribution::CanonicalChebyshev | Distribution::EqualSpaced
            ),
            RegionKind::CutsquareFull => matches!(
                d,
                Distribution::CanonicalChebyshev | Distribution::EqualSpaced | Distribution::CutsquarePieces
            ),
            RegionKind::PolygonTriangle | RegionKind::PolygonKite => matches!(
                d,
                Distribution::HalfSine | Distribution::CanonicalChebyshev | Distribution::EqualSpaced
            ),
            RegionKind::StarTriangle | RegionKind::StarArrowhead => matches!(
                d,
                Distribution::StarChebyshev | Distribution::CanonicalChebyshev | Distribution::EqualSpaced
            ),
        };
        if !ok {
            return Err(Error::Config(format!(
                "distribution {} is not available for {}",
                d.name(),
                self.shape_id
            )));
        }
        self.distribution = d;
        if self.region_kind == RegionKind::LShape {
            self.vertex_rows = d == Distribution::EqualSpaced;
            self.n_constraint = if self.vertex_rows { NConstraint::Any } else { NConstraint::Even };
        }
        Ok(self)
    }

    pub fn with_scale(mut self, scale: PolygonScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        self.n_constraint.check(n)?;
        if self.vertex_rows && n < 3 {
            return Err(Error::Config("the vertex-row scheme needs N ≥ 3".into()));
        }
        Ok(())
    }

    /// Ω in canonical position at `digits` precision, with the expansion
    /// wedge and edge roles set.
    pub fn region_at(&self, digits: u32) -> Result<CanonicalPolygon> {
        let bits = digits_to_bits(digits) + 32;
        let pi = Float::with_val(bits, Constant::Pi);
        let d = digits;
        let adj = EdgeRole::Adjacent;
        let pm = EdgeRole::PointMatched;
        let imp = EdgeRole::Implied;
        let bpi = |num: i64, den: i64| BigReal::from_float(Float::with_val(bits, &pi * num) / den, d);
        match self.region_kind {
            RegionKind::LShape => {
                let raw = [(0, 0), (1, 0), (1, 1), (0, 1)]
                    .map(|(x, y)| vtx(fl(bits, x), fl(bits, y), d));
                canonicalize(&raw)?
                    .with_wedge(BigReal::zero(d), bpi(3, 2))?
                    .with_roles(vec![adj, pm, pm, imp])
            }
            RegionKind::CutsquareQuadrant => {
                let h = Float::with_val(bits, 0.5);
                let z = fl(bits, 0);
                let raw = [
                    vtx(z.clone(), z.clone(), d),
                    vtx(h.clone(), z.clone(), d),
                    vtx(h.clone(), h.clone(), d),
                    vtx(z, h, d),
                ];
                canonicalize(&raw)?
                    .with_wedge(bpi(3, 4), bpi(7, 4))?
                    .with_roles(vec![imp, pm, pm, adj])
            }
            RegionKind::CutsquareFull => {
                let raw = [(0, 0), (-1, 1), (-1, -1), (1, -1), (1, 1), (0, 1)]
                    .map(|(x, y)| vtx(Float::with_val(bits, x) / 2u32, Float::with_val(bits, y) / 2u32, d));
                canonicalize(&raw)?.with_roles(vec![adj, pm, pm, pm, pm, adj])
            }
            RegionKind::PolygonTriangle | RegionKind::PolygonKite => {
                let ShapeId::RegularPolygon(sigma) = self.shape_id else {
                    unreachable!()
                };
                let a = self.polygon_edge(sigma, bits);
                let half = Float::with_val(bits, &a / 2u32);
                let t = Float::with_val(bits, &pi / sigma).tan();
                let h = Float::with_val(bits, &half / &t);
                let z = fl(bits, 0);
                let v1 = vtx(z.clone(), z.clone(), d);
                let m = vtx(half.clone(), z, d);
                let o = vtx(half.clone(), h, d);
                if self.region_kind == RegionKind::PolygonTriangle {
                    canonicalize(&[v1, m, o])?.with_roles(vec![adj, pm, adj])
                } else {
                    let beta = Float::with_val(bits, &pi * (sigma as i64 - 2)) / sigma;
                    let (s, c) = beta.sin_cos(Float::new(bits));
                    let mp = vtx(Float::with_val(bits, &half * &c), Float::with_val(bits, &half * &s), d);
                    canonicalize(&[v1, m, o, mp])?.with_roles(vec![adj, pm, imp, adj])
                }
            }
            RegionKind::StarTriangle | RegionKind::StarArrowhead => {
                let (i, o, p, pp) = star_points(bits, d);
                if self.region_kind == RegionKind::StarTriangle {
                    canonicalize(&[i, o, p])?.with_roles(vec![adj, pm, adj])
                } else {
                    canonicalize(&[i, pp, o, p])?.with_roles(vec![adj, pm, imp, adj])
                }
            }
        }
    }

    fn polygon_edge(&self, sigma: u32, bits: u32) -> Float {
        match self.scale {
            PolygonScale::UnitEdge => fl(bits, 1),
            PolygonScale::AreaPi => {
                // area = σ a² / (4 tan(π/σ)) = π
                let pi = Float::with_val(bits, Constant::Pi);
                let t = Float::with_val(bits, &pi / sigma).tan();
                (pi * 4u32 * t / sigma).sqrt()
            }
        }
    }

    /// Matching points for N, in row order.
    pub fn matching_set(&self, n: usize, digits: u32) -> Result<MatchingSet> {
        self.check_n(n)?;
        let poly = self.region_at(digits)?;
        self.matching_on(&poly, n, digits)
    }

    fn matching_on(&self, poly: &CanonicalPolygon, n: usize, digits: u32) -> Result<MatchingSet> {
        let d = digits;
        let mut pts = Vec::with_capacity(n);
        let mut edges = Vec::with_capacity(n);
        let matched: Vec<usize> = (0..poly.num_edges())
            .filter(|&e| poly.edge_roles[e] == EdgeRole::PointMatched)
            .collect();
        match (self.region_kind, self.distribution) {
            (RegionKind::LShape, Distribution::EqualSpaced) => {
                // N − 2 values over the two unit edges, V3 and V4 included
                let k = n - 2;
                let two = BigReal::from_i64(2, d);
                for i in 1..=k {
                    let s = &(&two * &BigReal::from_i64(i as i64, d)) / &BigReal::from_i64(k as i64, d);
                    if s <= BigReal::one(d) {
                        pts.push(point_on_edge(poly, 1, &s));
                        edges.push(1);
                    } else {
                        pts.push(point_on_edge(poly, 2, &(&s - &BigReal::one(d))));
                        edges.push(2);
                    }
                }
            }
            (RegionKind::CutsquareQuadrant, Distribution::Cutsquare) => {
                let nodes = cutsquare_nodes(n, d)?;
                for (i, p) in nodes.into_iter().enumerate() {
                    edges.push(if i < n / 2 { 1 } else { 2 });
                    pts.push(p);
                }
            }
            (RegionKind::PolygonTriangle | RegionKind::PolygonKite, Distribution::HalfSine) => {
                let count = if self.gamma.is_some() { n / 2 } else { n };
                let (m, o) = poly.edge(1);
                let y_max = &o.y - &m.y;
                for y in half_sine_nodes(&y_max, count) {
                    pts.push(Vertex::new(m.x.clone(), &m.y + &y));
                    edges.push(1);
                }
            }
            (RegionKind::StarTriangle | RegionKind::StarArrowhead, Distribution::StarChebyshev) => {
                let count = if self.gamma.is_some() { n / 2 } else { n };
                let (b, c) = poly.edge(1);
                for y in star_nodes(&b.y, &c.y, count) {
                    pts.push(Vertex::new(b.x.clone(), y));
                    edges.push(1);
                }
            }
            (_, dist @ (Distribution::CanonicalChebyshev | Distribution::EqualSpaced | Distribution::CutsquarePieces)) => {
                // per-edge split in proportion to length (for the periodic
                // regions only ∂Ω_2 carries points, N/2 of them)
                let used: Vec<usize> = if self.gamma.is_some() {
                    vec![matched[0]]
                } else {
                    matched.clone()
                };
                let total = if self.gamma.is_some() { n / 2 } else { n };
                let counts = self.split_counts(poly, &used, total)?;
                // the full cut square's boundary splits into seven half-unit
                // pieces that the octant reflections permute; the same nodes
                // on every piece keep the A/B/C classes exactly decoupled
                let pieces = |e: usize| {
                    if dist == Distribution::CutsquarePieces {
                        (poly.edge_length(e).to_f64() * 2.0).round().max(1.0) as usize
                    } else {
                        1
                    }
                };
                for (&e, &c) in used.iter().zip(&counts) {
                    let len = poly.edge_length(e);
                    let k = pieces(e);
                    if c % k != 0 {
                        return Err(Error::Config(format!("N = {n} does not split evenly over the edge pieces")));
                    }
                    let piece = &len / &BigReal::from_i64(k as i64, d);
                    let mut pos = Vec::with_capacity(c);
                    for i in 0..k {
                        let offset = &piece * &BigReal::from_i64(i as i64, d);
                        let local = if dist == Distribution::EqualSpaced {
                            equal_spaced_nodes(&piece, c / k, false)
                        } else {
                            canonical_chebyshev(&piece, c / k)
                        };
                        pos.extend(local.into_iter().map(|s| &offset + &s));
                    }
                    for s in pos {
                        pts.push(point_on_edge(poly, e, &s));
                        edges.push(e);
                    }
                }
            }
            (_, dist) => {
                return Err(Error::Config(format!(
                    "distribution {} is not available here",
                    dist.name()
                )))
            }
        }
        let set = MatchingSet::new(pts, edges, self.distribution);
        set.validate(poly)?;
        Ok(set)
    }

    /// Splits `total` points over edges in proportion to their lengths. The
    /// lengths must be commensurate at the requested N.
    fn split_counts(&self, poly: &CanonicalPolygon, edges: &[usize], total: usize) -> Result<Vec<usize>> {
        let lens: Vec<f64> = edges.iter().map(|&e| poly.edge_length(e).to_f64()).collect();
        let sum: f64 = lens.iter().sum();
        let counts: Vec<usize> = lens.iter().map(|l| (total as f64 * l / sum).round() as usize).collect();
        if counts.iter().sum::<usize>() != total || counts.contains(&0) {
            return Err(Error::Config(format!(
                "N = {total} cannot be split over the matched edges in proportion to length"
            )));
        }
        Ok(counts)
    }

    /// The rows of M for N: matched-edge rows in edge order, then vertex
    /// rows.
    pub fn row_plan(&self, n: usize, digits: u32) -> Result<Vec<RowSpec>> {
        self.check_n(n)?;
        let poly = self.region_at(digits)?;
        let set = self.matching_on(&poly, n, digits)?;
        let mut rows = Vec::with_capacity(n);
        let matched: Vec<usize> = (0..poly.num_edges())
            .filter(|&e| poly.edge_roles[e] == EdgeRole::PointMatched)
            .collect();
        let parity_of = |e: usize| {
            let idx = matched.iter().position(|&m| m == e).expect("matched edge");
            self.matched_parity[idx]
        };
        if let Some(gamma) = self.gamma {
            let sigma = self.dihedral(20).expect("dihedral shape").sigma;
            for p in &set.points {
                rows.push(RowSpec {
                    kind: RowKind::PeriodicPair { gamma, sigma },
                    point: p.clone(),
                    line: None,
                    edge: Some(1),
                });
            }
            let line = edge_line(&poly, 1)?;
            for p in &set.points {
                rows.push(RowSpec {
                    kind: RowKind::EvenNormalDerivative,
                    point: p.clone(),
                    line: Some(line.clone()),
                    edge: Some(1),
                });
            }
        } else {
            for (p, &e) in set.points.iter().zip(&set.edges) {
                let (kind, line) = match parity_of(e) {
                    Parity::Odd => (RowKind::OddValue, None),
                    Parity::Even => (RowKind::EvenNormalDerivative, Some(edge_line(&poly, e)?)),
                };
                rows.push(RowSpec {
                    kind,
                    point: p.clone(),
                    line,
                    edge: Some(e),
                });
            }
            if self.vertex_rows {
                for v in [1usize, 2] {
                    rows.push(RowSpec {
                        kind: RowKind::VertexThetaDerivative,
                        point: poly.vertices[v].clone(),
                        line: None,
                        edge: None,
                    });
                }
            }
        }
        if rows.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: rows.len(),
            });
        }
        Ok(rows)
    }

    /// λ-independent matrix tables for N at the precision of `ctx`.
    pub fn builder(&self, n: usize, ctx: PrecisionContext) -> Result<MatrixBuilder> {
        let digits = ctx.internal_digits() + 5;
        let rows = self.row_plan(n, digits)?;
        let poly = self.region_at(digits)?;
        MatrixBuilder::new(self.m_sequence(), &poly.phi1, rows, ctx)
    }

    /// Area of Ω, used by the sweep step policy.
    pub fn region_area(&self) -> Result<f64> {
        Ok(self.region_at(30)?.area().to_f64())
    }

    /// Short label such as `star/S/dirichlet`.
    pub fn label(&self) -> String {
        format!("{}/{}/{}", self.shape_id, self.class_id, self.boundary_kind.name())
    }
}

/// Inner vertex I, centre O, star point P and the reflected point P′ of the
/// five-pointed star built on the unit-edged pentagon.
fn star_points(bits: u32, d: u32) -> (Vertex, Vertex, Vertex, Vertex) {
    let pi = Float::with_val(bits, Constant::Pi);
    let big_r = Float::with_val(bits, 1u32) / (Float::with_val(bits, &pi / 5u32).sin() * 2u32);
    let golden = (Float::with_val(bits, 5u32).sqrt() + 1u32) / 2u32;
    let inner = Float::with_val(bits, &big_r / Float::with_val(bits, golden.square_ref()));
    let polar = |r: &Float, deg: u32| {
        let t = Float::with_val(bits, &pi * deg) / 180u32;
        let (s, c) = t.sin_cos(Float::new(bits));
        vtx(Float::with_val(bits, r * &c), Float::with_val(bits, r * &s), d)
    };
    let z = Float::with_val(bits, 0u32);
    (
        polar(&inner, 54),
        vtx(z.clone(), z, d),
        polar(&big_r, 90),
        polar(&big_r, 18),
    )
}
