//! m-value sequences and the Fourier-Bessel basis.

use num_rational::Rational64;
use rug::Float;

use crate::error::{Error, Result};
use crate::precision::{bessel_j_rational, digits_to_bits, BigReal, PrecisionContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn symbol(&self) -> char {
        match self {
            Parity::Odd => 'o',
            Parity::Even => 'e',
        }
    }
}

/// Parities of the two wedge edges ∂Ω_1 and ∂Ω_s.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParityPair {
    pub first_adjacent: Parity,
    pub last_adjacent: Parity,
}

impl ParityPair {
    pub fn new(first_adjacent: Parity, last_adjacent: Parity) -> Self {
        ParityPair {
            first_adjacent,
            last_adjacent,
        }
    }

    /// Sine basis iff ∂Ω_1 is odd.
    pub fn uses_sin(&self) -> bool {
        self.first_adjacent == Parity::Odd
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MRule {
    General,
    LShape,
    CutsquareA,
    CutsquareB,
    CutsquareC,
}

impl MRule {
    pub fn name(&self) -> &'static str {
        match self {
            MRule::General => "general",
            MRule::LShape => "lshape",
            MRule::CutsquareA => "cutsquare_A",
            MRule::CutsquareB => "cutsquare_B",
            MRule::CutsquareC => "cutsquare_C",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Ok(match s {
            "general" => MRule::General,
            "lshape" => MRule::LShape,
            "cutsquare_A" => MRule::CutsquareA,
            "cutsquare_B" => MRule::CutsquareB,
            "cutsquare_C" => MRule::CutsquareC,
            _ => return Err(Error::Config(format!("unknown m-value rule {s:?}"))),
        })
    }

    fn cutsquare_residues(&self) -> Option<[i64; 2]> {
        match self {
            MRule::CutsquareA => Some([1, 6]),
            MRule::CutsquareB => Some([2, 5]),
            MRule::CutsquareC => Some([3, 4]),
            _ => None,
        }
    }
}

/// Cut-square class (A, B or C) of the index j in m = 4j/7; `None` for
/// multiples of seven.
pub fn cutsquare_class(j: i64) -> Option<MRule> {
    match j.rem_euclid(7) {
        1 | 6 => Some(MRule::CutsquareA),
        2 | 5 => Some(MRule::CutsquareB),
        3 | 4 => Some(MRule::CutsquareC),
        _ => None,
    }
}

/// The sequence m_1 < m_2 < … for one symmetry class. The wedge angle is
/// stored as the rational Δφ/π.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MSequence {
    pub rule: MRule,
    pub parity: ParityPair,
    pub delta_phi_over_pi: Rational64,
}

impl MSequence {
    pub fn new(rule: MRule, parity: ParityPair, delta_phi_over_pi: Rational64) -> Self {
        MSequence {
            rule,
            parity,
            delta_phi_over_pi,
        }
    }

    /// m_ν as an exact rational (ν ≥ 1).
    pub fn m(&self, nu: usize) -> Rational64 {
        m_value(self.rule, self.parity, self.delta_phi_over_pi, nu).expect("ν ≥ 1")
    }

    pub fn values(&self, n: usize) -> Vec<Rational64> {
        (1..=n).map(|nu| self.m(nu)).collect()
    }
}

/// m_ν for the given rule. Δφ enters only the general rule.
pub fn m_value(
    rule: MRule,
    parity: ParityPair,
    delta_phi_over_pi: Rational64,
    nu: usize,
) -> Result<Rational64> {
    if nu == 0 {
        return Err(Error::Config("m-values are indexed from ν = 1".into()));
    }
    let nu = nu as i64;
    Ok(match rule {
        MRule::General => {
            if *delta_phi_over_pi.numer() <= 0 {
                return Err(Error::Config("wedge angle must be positive".into()));
            }
            let scale = delta_phi_over_pi.recip();
            let base = match (parity.first_adjacent, parity.last_adjacent) {
                (Parity::Even, Parity::Even) => Rational64::from_integer(nu - 1),
                (Parity::Odd, Parity::Odd) => Rational64::from_integer(nu),
                _ => Rational64::new(2 * nu - 1, 2),
            };
            scale * base
        }
        MRule::LShape => Rational64::new(2 * (2 * ((3 * nu) / 2) - 1), 3),
        _ => {
            let res = rule.cutsquare_residues().unwrap();
            // two residues per block of seven, in increasing order
            let block = (nu - 1) / 2;
            let j = 7 * block + res[((nu - 1) % 2) as usize];
            Rational64::new(4 * j, 7)
        }
    })
}

/// Parameters of one truncated expansion Σ c_ν ψ_ν.
#[derive(Clone, Debug)]
pub struct ExpansionSpec {
    pub m_sequence: MSequence,
    pub n: usize,
    pub k: BigReal,
    pub phi1: BigReal,
}

impl ExpansionSpec {
    pub fn new(m_sequence: MSequence, n: usize, k: BigReal, phi1: BigReal) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("expansion needs N ≥ 1".into()));
        }
        if k.signum() <= 0 {
            return Err(Error::Domain("wavenumber must be positive".into()));
        }
        Ok(ExpansionSpec {
            m_sequence,
            n,
            k,
            phi1,
        })
    }

    pub fn from_lambda(m_sequence: MSequence, n: usize, lambda: &BigReal, phi1: BigReal) -> Result<Self> {
        Self::new(m_sequence, n, lambda.sqrt()?, phi1)
    }
}

/// sin(m θ̃) or cos(m θ̃), plus the derivative d/dθ̃.
pub(crate) fn angular(m: &Float, theta_tilde: &Float, sin: bool) -> (Float, Float) {
    let bits = theta_tilde.prec().max(m.prec());
    let arg = Float::with_val(bits, m * theta_tilde);
    let (s, c) = arg.sin_cos(Float::new(bits));
    let mc = Float::with_val(bits, m * &c);
    let ms = Float::with_val(bits, m * &s);
    if sin {
        (s, mc)
    } else {
        (c, -ms)
    }
}

/// ψ_ν(r, θ) = J_{m_ν}(k r)·{sin | cos}(m_ν θ̃), θ̃ already reduced.
pub fn basis_eval(
    spec: &ExpansionSpec,
    nu: usize,
    r: &BigReal,
    theta_tilde: &BigReal,
    ctx: &PrecisionContext,
) -> Result<BigReal> {
    if nu == 0 || nu > spec.n {
        return Err(Error::Config(format!("basis index {nu} outside 1..={}", spec.n)));
    }
    let m = spec.m_sequence.m(nu);
    let kr = &spec.k * r;
    let j = bessel_j_rational(*m.numer(), *m.denom(), &kr, ctx)?;
    let bits = ctx.internal_bits();
    let mf = Float::with_val(bits, *m.numer()) / *m.denom();
    let (ang, _) = angular(&mf, &Float::with_val(bits, theta_tilde.as_float()), spec.m_sequence.parity.uses_sin());
    Ok(BigReal::from_float(Float::with_val(bits, j.as_float() * &ang), ctx.working_digits))
}

/// Σ c_ν ψ_ν at one point.
pub fn expansion_eval(
    spec: &ExpansionSpec,
    c: &[BigReal],
    r: &BigReal,
    theta_tilde: &BigReal,
    ctx: &PrecisionContext,
) -> Result<BigReal> {
    if c.len() != spec.n {
        return Err(Error::Dimension {
            expected: spec.n,
            got: c.len(),
        });
    }
    let bits = digits_to_bits(ctx.working_digits + ctx.guard_digits);
    let mut acc = Float::with_val(bits, 0u32);
    for (i, ci) in c.iter().enumerate() {
        if ci.is_zero() {
            continue;
        }
        let psi = basis_eval(spec, i + 1, r, theta_tilde, ctx)?;
        acc += Float::with_val(bits, ci.as_float() * psi.as_float());
    }
    Ok(BigReal::from_float(acc, ctx.working_digits))
}
