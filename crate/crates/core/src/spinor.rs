//! Dirac spinors, their bilinear covariants and reconstruction from `ρ`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::clifford::{levi_civita, metric, GammaBasis, GammaRep, SLOT_LABELS, S_PAIRS};
use crate::error::{Error, Result};
use crate::linalg::{CMat4, CVec4, C64, I, ONE};
use crate::tol;
use rand::Rng;
use rand_distr::StandardNormal;

/// A four-component Dirac spinor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracSpinor {
    components: CVec4,
}

impl DiracSpinor {
    pub fn new(components: [C64; 4]) -> Self {
        DiracSpinor { components: CVec4::from(components) }
    }

    pub fn from_vector(components: CVec4) -> Self {
        DiracSpinor { components }
    }

    /// `[re₁, im₁, …, re₄, im₄]`.
    pub fn from_reals(x: [f64; 8]) -> Self {
        Self::new(std::array::from_fn(|k| C64::new(x[2 * k], x[2 * k + 1])))
    }

    pub fn to_reals(&self) -> [f64; 8] {
        std::array::from_fn(|i| {
            let z = self.components[i / 2];
            if i % 2 == 0 {
                z.re
            } else {
                z.im
            }
        })
    }

    pub fn zero() -> Self {
        DiracSpinor { components: CVec4::zeros() }
    }

    /// Canonical basis vector `e_{k+1}` (zero-based `k`).
    pub fn basis(k: usize) -> Self {
        let mut v = CVec4::zeros();
        v[k] = ONE;
        DiracSpinor { components: v }
    }

    /// Eight independent standard normals, normalized: the uniform measure
    /// on the unit 7-sphere.
    pub fn random_normalized<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let x: [f64; 8] = std::array::from_fn(|_| rng.sample(StandardNormal));
        Self::from_reals(x).normalized()
    }

    pub fn components(&self) -> &CVec4 {
        &self.components
    }

    pub fn component(&self, k: usize) -> C64 {
        self.components[k]
    }

    /// `ψ†ψ`.
    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return *self;
        }
        self.scale(C64::new(1.0 / n, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: C64) -> Self {
        DiracSpinor { components: self.components * s }
    }

    pub fn apply(&self, m: &CMat4) -> Self {
        DiracSpinor { components: m * self.components }
    }

    /// Componentwise complex conjugate.
    pub fn conj(&self) -> Self {
        DiracSpinor { components: self.components.map(|z| z.conj()) }
    }

    /// Hermitian product `⟨self|other⟩`.
    pub fn inner(&self, other: &DiracSpinor) -> C64 {
        self.components.dotc(&other.components)
    }

    /// Dirac pairing `⟨ψ̄|φ⟩ = ψ†γ₀φ`.
    pub fn dirac_pairing(&self, other: &DiracSpinor, rep: &GammaRep) -> C64 {
        self.components.dotc(&(rep.gamma(0) * other.components))
    }

    /// `⟨ψ̄|M|ψ⟩`.
    pub fn expectation(&self, m: &CMat4, rep: &GammaRep) -> C64 {
        self.dirac_pairing(&self.apply(m), rep)
    }

    /// Multiplies by the phase that makes the largest-magnitude component
    /// real and positive. Ties go to the lowest index.
    pub fn with_canonical_phase(&self) -> Self {
        let max = self.components.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return *self;
        }
        let pivot = self
            .components
            .iter()
            .find(|z| z.norm() >= max * (1.0 - 1e-12))
            .copied()
            .unwrap_or(ONE);
        self.scale(pivot.conj() / pivot.norm())
    }
}

impl Serialize for DiracSpinor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_reals().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiracSpinor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let x = <[f64; 8]>::deserialize(d)?;
        Ok(DiracSpinor::from_reals(x))
    }
}

/// The sixteen real bilinear covariants, upper-index storage.
///
/// `s` holds `S^{01}, S^{02}, S^{03}, S^{12}, S^{23}, S^{31}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BilinearSet {
    pub omega1: f64,
    pub j: [f64; 4],
    pub s: [f64; 6],
    pub k: [f64; 4],
    pub omega2: f64,
}

impl BilinearSet {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Flattens in basis order (`Ω₁, J^μ, S^{μν}, K^μ, Ω₂`).
    pub fn to_array(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        out[0] = self.omega1;
        out[1..5].copy_from_slice(&self.j);
        out[5..11].copy_from_slice(&self.s);
        out[11..15].copy_from_slice(&self.k);
        out[15] = self.omega2;
        out
    }

    pub fn from_array(a: &[f64; 16]) -> Self {
        BilinearSet {
            omega1: a[0],
            j: [a[1], a[2], a[3], a[4]],
            s: [a[5], a[6], a[7], a[8], a[9], a[10]],
            k: [a[11], a[12], a[13], a[14]],
            omega2: a[15],
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_array(&self.to_array().map(|x| x * c))
    }

    pub fn max_abs_diff(&self, other: &BilinearSet) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `S^{μν}` for any index pair.
    pub fn s_upper(&self, mu: usize, nu: usize) -> f64 {
        self.s_tensor()[mu][nu]
    }

    pub fn s_tensor(&self) -> [[f64; 4]; 4] {
        let mut t = [[0.0; 4]; 4];
        for (slot, &(mu, nu)) in S_PAIRS.iter().enumerate() {
            t[mu][nu] = self.s[slot];
            t[nu][mu] = -self.s[slot];
        }
        t
    }

    pub fn set_s_tensor(&mut self, t: &[[f64; 4]; 4]) {
        for (slot, &(mu, nu)) in S_PAIRS.iter().enumerate() {
            self.s[slot] = t[mu][nu];
        }
    }

    pub fn j_lower(&self) -> [f64; 4] {
        std::array::from_fn(|mu| metric(mu) * self.j[mu])
    }

    pub fn k_lower(&self) -> [f64; 4] {
        std::array::from_fn(|mu| metric(mu) * self.k[mu])
    }

    pub fn s_lower(&self, mu: usize, nu: usize) -> f64 {
        metric(mu) * metric(nu) * self.s_upper(mu, nu)
    }

    /// `(*S)_{μν} = −½ ε_{μναβ} S^{αβ}`.
    pub fn dual_s_lower(&self) -> [[f64; 4]; 4] {
        let s = self.s_tensor();
        let mut d = [[0.0; 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                let mut acc = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        acc += levi_civita([mu, nu, a, b]) * s[a][b];
                    }
                }
                d[mu][nu] = -0.5 * acc;
            }
        }
        d
    }

    /// `J_μJ^μ`.
    pub fn j_square(&self) -> f64 {
        minkowski(&self.j, &self.j)
    }

    pub fn k_square(&self) -> f64 {
        minkowski(&self.k, &self.k)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// `a_μ b^μ` for two upper-index vectors.
pub fn minkowski(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|mu| metric(mu) * a[mu] * b[mu]).sum()
}

/// `⟨ψ̄|Γᵃ|ψ⟩` for all sixteen basis elements.
pub fn bilinears(psi: &DiracSpinor, rep: &GammaRep) -> Result<BilinearSet> {
    let basis = GammaBasis::new(rep);
    let scale = psi.norm_sqr().max(1.0);
    let mut out = [0.0; 16];
    for (a, gamma) in basis.elements().iter().enumerate() {
        let raw = psi.expectation(gamma, rep);
        if raw.im.abs() > tol::NON_REAL * scale {
            return Err(Error::NonRealCovariant { slot: SLOT_LABELS[a], imag: raw.im });
        }
        out[a] = raw.re;
    }
    Ok(BilinearSet::from_array(&out))
}

/// Residuals of the nine Fierz identities.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FierzResiduals(pub [f64; 9]);

impl FierzResiduals {
    pub const LABELS: [&'static str; 9] =
        ["2a", "2b", "2c", "2d_01", "2d_02", "2d_03", "2d_12", "2d_23", "2d_31"];

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Residuals divided by `max(1, ‖ψ‖⁴)`, using `J⁰ = ψ†ψ`.
    pub fn scaled_for(&self, b: &BilinearSet) -> FierzResiduals {
        let s = (b.j[0] * b.j[0]).max(1.0);
        FierzResiduals(self.0.map(|x| x / s))
    }
}

/// Evaluates
/// `J_μJ^μ − Ω₁² − Ω₂²`, `J_μJ^μ + K_μK^μ`, `J_μK^μ` and the six independent
/// components of `J_μK_ν − K_μJ_ν + Ω₂S_{μν} + Ω₁·½ε_{μναβ}S^{αβ}`.
pub fn fierz_residuals(b: &BilinearSet) -> FierzResiduals {
    let jj = b.j_square();
    let mut r = [0.0; 9];
    r[0] = jj - b.omega1 * b.omega1 - b.omega2 * b.omega2;
    r[1] = jj + b.k_square();
    r[2] = minkowski(&b.j, &b.k);
    let jl = b.j_lower();
    let kl = b.k_lower();
    let dual = b.dual_s_lower();
    for (slot, &(mu, nu)) in S_PAIRS.iter().enumerate() {
        // ½ε_{μναβ}S^{αβ} = −(*S)_{μν}
        r[3 + slot] = jl[mu] * kl[nu] - kl[mu] * jl[nu]
            + b.omega2 * b.s_lower(mu, nu)
            - b.omega1 * dual[mu][nu];
    }
    FierzResiduals(r)
}

/// The operator `ρ = Σ_a ρᵃΓ_a`, together with the anchor and scale used
/// when it was last inverted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoOperator {
    #[serde(with = "crate::linalg::serde_cmat4")]
    pub matrix: CMat4,
    pub anchor: Option<DiracSpinor>,
    pub scale: Option<f64>,
}

impl RhoOperator {
    pub fn new(matrix: CMat4) -> Self {
        RhoOperator { matrix, anchor: None, scale: None }
    }

    /// Recovers the covariants as `ρᵃ = ¼ tr(Γᵃρ)`.
    pub fn coefficients(&self, rep: &GammaRep) -> Result<BilinearSet> {
        let basis = GammaBasis::new(rep);
        let scale = crate::linalg::max_abs(&self.matrix).max(1.0);
        let mut out = [0.0; 16];
        for (a, gamma) in basis.elements().iter().enumerate() {
            let raw = (gamma * self.matrix).trace() * 0.25;
            if raw.im.abs() > tol::NON_REAL * scale {
                return Err(Error::NonRealCovariant { slot: SLOT_LABELS[a], imag: raw.im });
            }
            out[a] = raw.re;
        }
        Ok(BilinearSet::from_array(&out))
    }
}

/// `ρ = 4|ψ⟩⟨ψ̄|`.
pub fn rho_from_spinor(psi: &DiracSpinor, rep: &GammaRep) -> RhoOperator {
    let col = psi.components();
    let row = col.adjoint() * rep.gamma(0);
    RhoOperator::new(col * row * C64::new(4.0, 0.0))
}

/// `ρ = Ω₁ + J^μγ_μ + i·½S^{μν}γ_{μν} + iK^μγ_μγ₀₁₂₃ + Ω₂γ₀₁₂₃`.
pub fn rho_from_bilinears(b: &BilinearSet, rep: &GammaRep) -> RhoOperator {
    let g5 = rep.gamma_0123();
    let mut m = CMat4::identity() * C64::new(b.omega1, 0.0);
    for mu in 0..4 {
        let gl = rep.gamma_lower(mu);
        m += gl * C64::new(b.j[mu], 0.0);
        m += gl * g5 * (I * b.k[mu]);
    }
    for (slot, &(mu, nu)) in S_PAIRS.iter().enumerate() {
        // the pair (μν) and (νμ) both contribute ½S^{μν}γ_{μν}
        let pair = lower_pair(rep, mu, nu);
        m += pair * (I * b.s[slot]);
    }
    m += g5 * C64::new(b.omega2, 0.0);
    RhoOperator::new(m)
}

fn lower_pair(rep: &GammaRep, mu: usize, nu: usize) -> CMat4 {
    let a = rep.gamma_lower(mu);
    let b = rep.gamma_lower(nu);
    (a * b - b * a) * C64::new(0.5, 0.0)
}

/// `⟨η̄|ρ|η⟩`, real for any genuine `ρ`.
pub fn anchor_weight(rho: &RhoOperator, rep: &GammaRep, eta: &DiracSpinor) -> f64 {
    eta.dirac_pairing(&eta.apply(&rho.matrix), rep).re
}

fn anchor_threshold(rho: &RhoOperator, rep: &GammaRep) -> f64 {
    // ¼ tr(γ⁰ρ) = J⁰ = ψ†ψ sets the trace scale
    let j0 = ((rep.gamma(0) * rho.matrix).trace() * 0.25).re.abs();
    tol::ANCHOR * j0.max(f64::MIN_POSITIVE)
}

/// Rebuilds `ψ` (up to a global phase) as `ωρ|η⟩` with
/// `ω = (4⟨η̄|ρ|η⟩)^{-1/2}`. The result carries the canonical phase.
pub fn crawford_reconstruct(rho: &RhoOperator, rep: &GammaRep, eta: &DiracSpinor) -> Result<DiracSpinor> {
    let value = anchor_weight(rho, rep, eta);
    if !(value > anchor_threshold(rho, rep)) {
        return Err(Error::DegenerateAnchor { value });
    }
    let omega = 1.0 / (4.0 * value).sqrt();
    Ok(eta.apply(&rho.matrix).scale(C64::new(omega, 0.0)).with_canonical_phase())
}

/// Tries the anchors `e₁, e₂, e₃, e₄` in order and returns the first
/// reconstruction that succeeds, with the anchor recorded on the returned
/// operator.
pub fn crawford_with_fallback(rho: &RhoOperator, rep: &GammaRep) -> Result<(DiracSpinor, RhoOperator)> {
    let mut last = Error::DegenerateAnchor { value: 0.0 };
    for k in 0..4 {
        let eta = DiracSpinor::basis(k);
        match crawford_reconstruct(rho, rep, &eta) {
            Ok(psi) => {
                let value = anchor_weight(rho, rep, &eta);
                let mut used = rho.clone();
                used.anchor = Some(eta);
                used.scale = Some(1.0 / (4.0 * value).sqrt());
                return Ok((psi, used));
            }
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Uses the basis anchor with the largest weight `⟨η̄|ρ|η⟩`, which keeps the
/// reconstruction well conditioned when `ρ` is only approximately rank one.
pub fn crawford_best_anchor(rho: &RhoOperator, rep: &GammaRep) -> Result<(DiracSpinor, RhoOperator)> {
    let (k, value) = (0..4)
        .map(|k| (k, anchor_weight(rho, rep, &DiracSpinor::basis(k))))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let eta = DiracSpinor::basis(k);
    let psi = crawford_reconstruct(rho, rep, &eta)?;
    let mut used = rho.clone();
    used.anchor = Some(eta);
    used.scale = Some(1.0 / (4.0 * value).sqrt());
    Ok((psi, used))
}

/// `min_α ‖a − e^{iα}b‖`.
///
/// Evaluated as `‖a − e^{iα}b‖` at the optimal `e^{iα} = ⟨b|a⟩/|⟨b|a⟩|`, which
/// avoids the cancellation of the closed form `√(‖a‖² + ‖b‖² − 2|⟨a|b⟩|)`.
pub fn phase_distance(a: &DiracSpinor, b: &DiracSpinor) -> f64 {
    let overlap = b.inner(a);
    let n = overlap.norm();
    let phase = if n > 0.0 { overlap / n } else { ONE };
    (a.components() - b.components() * phase).norm()
}
