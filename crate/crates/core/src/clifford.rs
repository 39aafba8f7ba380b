//! Gamma-matrix representations of the Dirac algebra.
//!
//! All representations share the metric `g = diag(+1, −1, −1, −1)` and the
//! Levi-Civita symbol with `ε₀₁₂₃ = +1`. Gammas are stored with upper index,
//! `γ^μ`; lower-index matrices are `γ_μ = g_{μν}γ^ν`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, blocks, max_abs_diff, pauli, unitarity_residual, CMat2, CMat4, C64, I, ONE};
use crate::tol;

/// Metric signature and orientation shared by every representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Conventions {
    pub metric: [f64; 4],
    pub epsilon0123: f64,
}

pub const CONVENTIONS: Conventions = Conventions {
    metric: [1.0, -1.0, -1.0, -1.0],
    epsilon0123: 1.0,
};

/// Diagonal metric entry `g_{μμ} = g^{μμ}`.
#[inline]
pub fn metric(mu: usize) -> f64 {
    CONVENTIONS.metric[mu]
}

/// Lower-index Levi-Civita symbol `ε_{μνρσ}` with `ε₀₁₂₃ = +1`.
pub fn levi_civita(idx: [usize; 4]) -> f64 {
    let mut p = idx;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if p[i] == p[j] {
                return 0.0;
            }
        }
    }
    let mut sign = CONVENTIONS.epsilon0123;
    for i in 0..4 {
        while p[i] != i {
            let t = p[i];
            p.swap(i, t);
            sign = -sign;
        }
    }
    sign
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepKind {
    Majorana,
    Standard,
    Chiral,
    Custom,
}

impl RepKind {
    pub const BUILT_IN: [RepKind; 3] = [RepKind::Majorana, RepKind::Standard, RepKind::Chiral];

    pub fn as_str(self) -> &'static str {
        match self {
            RepKind::Majorana => "majorana",
            RepKind::Standard => "standard",
            RepKind::Chiral => "chiral",
            RepKind::Custom => "custom",
        }
    }
}

impl fmt::Display for RepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majorana" => Ok(RepKind::Majorana),
            "standard" => Ok(RepKind::Standard),
            "chiral" => Ok(RepKind::Chiral),
            "custom" => Ok(RepKind::Custom),
            other => Err(Error::InvalidInput(format!("unknown representation `{other}`"))),
        }
    }
}

/// A concrete set of four gamma matrices.
///
/// `change_of_basis` is the unitary `U` with `γ^μ = U γ^μ_st U⁻¹` relative to
/// the standard representation; spinor components transform as `ψ ↦ Uψ`.
/// `u` and `sigma` are `U⁻¹γ₀U` and `U⁻¹γ₁₂U`: the two commuting matrices
/// whose joint eigenprojectors are the canonical `P_k` in every
/// representation, `P_k = ½(1 ± u)·½(1 ± iσ)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaRep {
    kind: RepKind,
    #[serde(with = "gamma_array")]
    gammas: [CMat4; 4],
    #[serde(with = "linalg::serde_cmat4")]
    change_of_basis: CMat4,
    #[serde(with = "linalg::serde_cmat4")]
    u: CMat4,
    #[serde(with = "linalg::serde_cmat4")]
    sigma: CMat4,
    #[serde(skip, default = "CMat4::identity")]
    g0123: CMat4,
}

mod gamma_array {
    use super::CMat4;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct M(#[serde(with = "crate::linalg::serde_cmat4")] CMat4);

    pub fn serialize<S: Serializer>(g: &[CMat4; 4], s: S) -> Result<S::Ok, S::Error> {
        g.iter().map(|m| M(*m)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[CMat4; 4], D::Error> {
        let v: Vec<M> = Vec::deserialize(d)?;
        if v.len() != 4 {
            return Err(serde::de::Error::custom("expected four gamma matrices"));
        }
        Ok([v[0].0, v[1].0, v[2].0, v[3].0])
    }
}

impl GammaRep {
    fn assemble(kind: RepKind, gammas: [CMat4; 4], change_of_basis: CMat4) -> Self {
        let g0123 = lower(&gammas, 0) * lower(&gammas, 1) * lower(&gammas, 2) * lower(&gammas, 3);
        let u_inv = change_of_basis.adjoint();
        let u = u_inv * gammas[0] * change_of_basis;
        // γ₁₂ = γ₁γ₂ with lower indices
        let g12 = lower(&gammas, 1) * lower(&gammas, 2);
        let sigma = u_inv * g12 * change_of_basis;
        GammaRep { kind, gammas, change_of_basis, u, sigma, g0123 }
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    /// Upper-index `γ^μ`.
    pub fn gamma(&self, mu: usize) -> &CMat4 {
        &self.gammas[mu]
    }

    pub fn gammas(&self) -> &[CMat4; 4] {
        &self.gammas
    }

    /// Lower-index `γ_μ`.
    pub fn gamma_lower(&self, mu: usize) -> CMat4 {
        lower(&self.gammas, mu)
    }

    /// `γ₀₁₂₃ = γ₀γ₁γ₂γ₃`.
    pub fn gamma_0123(&self) -> &CMat4 {
        &self.g0123
    }

    /// `γ^{μν} = ½[γ^μ, γ^ν]`.
    pub fn gamma_pair(&self, mu: usize, nu: usize) -> CMat4 {
        (self.gammas[mu] * self.gammas[nu] - self.gammas[nu] * self.gammas[mu]) * C64::new(0.5, 0.0)
    }

    pub fn change_of_basis(&self) -> &CMat4 {
        &self.change_of_basis
    }

    pub fn u(&self) -> &CMat4 {
        &self.u
    }

    pub fn sigma(&self) -> &CMat4 {
        &self.sigma
    }

    /// Max over μ, ν of `‖{γ^μ, γ^ν} − 2g^{μν}I‖`.
    pub fn clifford_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = self.gammas[mu] * self.gammas[nu] + self.gammas[nu] * self.gammas[mu];
                let target = if mu == nu {
                    CMat4::identity() * C64::new(2.0 * metric(mu), 0.0)
                } else {
                    CMat4::zeros()
                };
                worst = worst.max(max_abs_diff(&anti, &target));
            }
        }
        worst
    }

    /// Max deviation from `γ⁰† = γ⁰`, `γ^k† = −γ^k`.
    pub fn hermiticity_residual(&self) -> f64 {
        (0..4)
            .map(|mu| {
                let s = C64::new(metric(mu), 0.0);
                max_abs_diff(&self.gammas[mu].adjoint(), &(self.gammas[mu] * s))
            })
            .fold(0.0, f64::max)
    }

    /// Residual of `γ^μ = U γ^μ_st U⁻¹`.
    pub fn basis_change_residual(&self) -> f64 {
        let st = standard_gammas();
        (0..4)
            .map(|mu| {
                let rebuilt = self.change_of_basis * st[mu] * self.change_of_basis.adjoint();
                max_abs_diff(&rebuilt, &self.gammas[mu])
            })
            .fold(unitarity_residual(&self.change_of_basis), f64::max)
    }
}

fn lower(gammas: &[CMat4; 4], mu: usize) -> CMat4 {
    gammas[mu] * C64::new(metric(mu), 0.0)
}

fn standard_gammas() -> [CMat4; 4] {
    let s = pauli();
    let z = CMat2::zeros();
    [
        blocks(&s[0], &z, &z, &(-s[0])),
        blocks(&z, &s[1], &(-s[1]), &z),
        blocks(&z, &s[2], &(-s[2]), &z),
        blocks(&z, &s[3], &(-s[3]), &z),
    ]
}

fn chiral_gammas() -> [CMat4; 4] {
    let s = pauli();
    let z = CMat2::zeros();
    [
        blocks(&z, &s[0], &s[0], &z),
        blocks(&z, &s[1], &(-s[1]), &z),
        blocks(&z, &s[2], &(-s[2]), &z),
        blocks(&z, &s[3], &(-s[3]), &z),
    ]
}

/// Upper-index Majorana gammas. Lowering gives the printed blocks
/// `γ₀ = [[0,σ₂],[σ₂,0]]`, `γ₁ = diag(−iσ₃,−iσ₃)`, `γ₂ = [[0,σ₂],[−σ₂,0]]`,
/// `γ₃ = diag(iσ₁, iσ₁)`.
fn majorana_gammas() -> [CMat4; 4] {
    let s = pauli();
    let z = CMat2::zeros();
    let is3 = s[3] * I;
    let is1 = s[1] * I;
    [
        blocks(&z, &s[2], &s[2], &z),
        blocks(&is3, &z, &z, &is3),
        blocks(&z, &(-s[2]), &s[2], &z),
        blocks(&(-is1), &z, &z, &(-is1)),
    ]
}

/// Products `γ^{μ₁}⋯γ^{μₙ}` over the sixteen ordered index subsets.
fn subset_products(gammas: &[CMat4; 4]) -> Vec<CMat4> {
    (0u8..16)
        .map(|mask| {
            (0..4)
                .filter(|b| mask & (1 << b) != 0)
                .fold(CMat4::identity(), |acc, b| acc * gammas[b])
        })
        .collect()
}

/// Unitary `U` with `to[μ] = U·from[μ]·U⁻¹`.
///
/// Averages `Γ_A(to)·X·Γ_A(from)⁻¹` over the sixteen basis products; by
/// Schur's lemma the result is an intertwiner for any `X` that does not
/// average to zero. The overall phase is fixed so that the largest entry is
/// real and positive.
pub fn intertwiner(from: &[CMat4; 4], to: &[CMat4; 4]) -> CMat4 {
    let pf = subset_products(from);
    let pt = subset_products(to);
    for seed in 0..16 {
        let mut x = CMat4::zeros();
        x[(seed / 4, seed % 4)] = ONE;
        let mut u = CMat4::zeros();
        for (a, b) in pt.iter().zip(&pf) {
            let b_inv = b.try_inverse().expect("gamma products are invertible");
            u += a * x * b_inv;
        }
        let scale = (u.adjoint() * u).trace().re / 4.0;
        if scale < 1e-6 {
            continue;
        }
        u /= C64::new(scale.sqrt(), 0.0);
        return fix_phase(u);
    }
    unreachable!("some elementary matrix always yields a nonzero intertwiner")
}

fn fix_phase(u: CMat4) -> CMat4 {
    let max = linalg::max_abs(&u);
    let pivot = u
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-9))
        .copied()
        .unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    u * phase
}

/// Builds one of the built-in representations.
pub fn make_representation(kind: RepKind) -> Result<GammaRep> {
    let st = standard_gammas();
    let gammas = match kind {
        RepKind::Standard => return Ok(GammaRep::assemble(kind, st, CMat4::identity())),
        RepKind::Majorana => majorana_gammas(),
        RepKind::Chiral => chiral_gammas(),
        RepKind::Custom => return Err(Error::UnsupportedRep(kind.to_string())),
    };
    let u = intertwiner(&st, &gammas);
    Ok(GammaRep::assemble(kind, gammas, u))
}

/// Returns the representation `γ'^μ = U γ^μ U⁻¹`.
pub fn conjugate_representation(base: &GammaRep, u: &CMat4) -> Result<GammaRep> {
    let residual = unitarity_residual(u);
    if residual > tol::ALG {
        return Err(Error::NonUnitary { residual });
    }
    let u_inv = u.adjoint();
    let gammas = [0, 1, 2, 3].map(|mu| u * base.gammas[mu] * u_inv);
    Ok(GammaRep::assemble(RepKind::Custom, gammas, u * base.change_of_basis))
}

/// Dirac conjugate of a matrix, `Ā = γ₀A†γ₀`.
pub fn dirac_bar(a: &CMat4, rep: &GammaRep) -> CMat4 {
    let g0 = rep.gamma(0);
    g0 * a.adjoint() * g0
}

/// `(A, B) = ¼ tr(A B̄)`.
pub fn trace_inner_product(a: &CMat4, b: &CMat4, rep: &GammaRep) -> C64 {
    (a * dirac_bar(b, rep)).trace() * 0.25
}

/// Names of the sixteen covariant slots, in basis order.
pub const SLOT_LABELS: [&str; 16] = [
    "omega1", "J0", "J1", "J2", "J3", "S01", "S02", "S03", "S12", "S23", "S31", "K0", "K1", "K2",
    "K3", "omega2",
];

/// Antisymmetric index pairs in storage order.
pub const S_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 1)];

/// The sixteen matrices `Γᵃ` whose Dirac expectation values are the
/// bilinear covariants: `1`, `γ^μ`, `iγ^{μν}`, `iγ₀₁₂₃γ^μ`, `−γ₀₁₂₃`.
#[derive(Clone, Debug)]
pub struct GammaBasis {
    elements: [CMat4; 16],
}

impl GammaBasis {
    pub fn new(rep: &GammaRep) -> Self {
        let mut elements = [CMat4::zeros(); 16];
        elements[0] = CMat4::identity();
        for mu in 0..4 {
            elements[1 + mu] = rep.gammas[mu];
            elements[11 + mu] = rep.g0123 * rep.gammas[mu] * I;
        }
        for (slot, &(mu, nu)) in S_PAIRS.iter().enumerate() {
            elements[5 + slot] = rep.gamma_pair(mu, nu) * I;
        }
        elements[15] = -rep.g0123;
        GammaBasis { elements }
    }

    pub fn elements(&self) -> &[CMat4; 16] {
        &self.elements
    }

    pub fn labels(&self) -> &'static [&'static str; 16] {
        &SLOT_LABELS
    }

    /// Gram matrix `G_ab = (Γᵃ, Γᵇ)`.
    pub fn gram(&self, rep: &GammaRep) -> DMatrix<C64> {
        DMatrix::from_fn(16, 16, |a, b| trace_inner_product(&self.elements[a], &self.elements[b], rep))
    }

    /// Coefficients `c` with `m = Σ_a c_a Γᵃ`.
    pub fn expand(&self, m: &CMat4, rep: &GammaRep) -> [C64; 16] {
        let gram = self.gram(rep);
        let rhs = DMatrix::from_fn(16, 1, |a, _| trace_inner_product(m, &self.elements[a], rep));
        // (m, Γᵃ) = Σ_b c_b (Γᵇ, Γᵃ), i.e. Gᵀc = rhs
        let sol = gram
            .transpose()
            .lu()
            .solve(&rhs)
            .expect("gamma basis Gram matrix is invertible");
        std::array::from_fn(|a| sol[(a, 0)])
    }
}

/// Sign pairs `(s₁, s₂)` of `P_k = ½(1 + s₁A)·½(1 + s₂B)` for `k = 1..4`.
pub fn factorization_signs(kind: RepKind) -> Result<[(f64, f64); 4]> {
    match kind {
        RepKind::Majorana | RepKind::Standard => {
            Ok([(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)])
        }
        RepKind::Chiral => Ok([(-1.0, 1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)]),
        RepKind::Custom => Err(Error::UnsupportedRep(kind.to_string())),
    }
}

/// The two commuting factors `(A, B)` of the projector factorization:
/// Majorana `(γ₂₀, iγ₁)`, standard `(γ₀, iγ₁₂)`, chiral `(γ₃₀, iγ₀₁₂₃)`.
pub fn factorization_generators(rep: &GammaRep) -> Result<(CMat4, CMat4)> {
    let g = |mu| rep.gamma_lower(mu);
    match rep.kind {
        RepKind::Majorana => Ok((g(2) * g(0), g(1) * I)),
        RepKind::Standard => Ok((g(0), g(1) * g(2) * I)),
        RepKind::Chiral => Ok((g(3) * g(0), rep.g0123 * I)),
        RepKind::Custom => Err(Error::UnsupportedRep(rep.kind.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub kind: RepKind,
    pub signs: [(f64, f64); 4],
    /// Max elementwise deviation from `P_k` for each k.
    pub deviations: [f64; 4],
}

impl FactorizationReport {
    pub fn max(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

fn half_product(a: &CMat4, b: &CMat4, s1: f64, s2: f64) -> CMat4 {
    let one = CMat4::identity();
    (one + a * C64::new(s1, 0.0)) * (one + b * C64::new(s2, 0.0)) * C64::new(0.25, 0.0)
}

/// Compares the representation's projector factorization against the
/// canonical diagonal projectors.
pub fn projector_factorization_check(rep: &GammaRep) -> Result<FactorizationReport> {
    let signs = factorization_signs(rep.kind)?;
    let (a, b) = factorization_generators(rep)?;
    let deviations = std::array::from_fn(|k| {
        let (s1, s2) = signs[k];
        max_abs_diff(&half_product(&a, &b, s1, s2), &canonical_projector(k))
    });
    Ok(FactorizationReport { kind: rep.kind, signs, deviations })
}

/// Same check through `u` and `σ`, valid for any representation:
/// `P_k = ½(1 ± u)·½(1 ± iσ)` in the standard sign order.
pub fn basis_change_factorization_check(rep: &GammaRep) -> [f64; 4] {
    let signs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let b = rep.sigma * I;
    std::array::from_fn(|k| {
        let (s1, s2) = signs[k];
        max_abs_diff(&half_product(&rep.u, &b, s1, s2), &canonical_projector(k))
    })
}

/// `P_k = e_k e_kᵀ` (zero-based k).
pub fn canonical_projector(k: usize) -> CMat4 {
    let mut p = CMat4::zeros();
    p[(k, k)] = ONE;
    p
}
