use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::clifford::{make_representation, RepKind};
use crate::error::{Error, Result};
use crate::linalg::{least_squares, CMat4};
use crate::spinor::{fierz_residuals, rho_from_bilinears, BilinearSet, FierzResiduals};
use crate::tol;

/// Algebraic class of the covariants seen by the completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariantClass {
    /// `J_μJ^μ > 0`: `Ω₁, Ω₂, K` fixed up to a global sign.
    Regular,
    /// `J_μJ^μ ≈ 0`, `S ≠ 0`: `Ω₁ = Ω₂ = 0`, `K = λJ` with `λ` from `ρ² = 0`.
    Null,
    /// `J_μJ^μ ≈ 0`, `S ≈ 0`: `K = ±J`.
    Weyl,
    /// `J = S = 0`.
    Zero,
}

impl fmt::Display for CovariantClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CovariantClass::Regular => "regular",
            CovariantClass::Null => "null (singular class, Ω₁ = Ω₂ = 0)",
            CovariantClass::Weyl => "null with S = 0 (Weyl class)",
            CovariantClass::Zero => "zero covariants",
        })
    }
}

/// Candidate completions of a `(J, S)` pair to full covariant sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub class: CovariantClass,
    pub candidates: Vec<BilinearSet>,
    pub fierz: Vec<FierzResiduals>,
}

fn lower(v: &[f64; 4]) -> [f64; 4] {
    [v[0], -v[1], -v[2], -v[3]]
}

fn dot_lower(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    // both lower: a_μ b^μ = a_0b_0 − a_kb_k
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
}

/// `a_ν = J^μ(*S)_{μν}` and `b_ν = −J^μS_{μν}`, lower index.
pub fn contractions(b: &BilinearSet) -> ([f64; 4], [f64; 4]) {
    let dual = b.dual_s_lower();
    let a = std::array::from_fn(|nu| (0..4).map(|mu| b.j[mu] * dual[mu][nu]).sum());
    let c = std::array::from_fn(|nu| -(0..4).map(|mu| b.j[mu] * b.s_lower(mu, nu)).sum::<f64>());
    (a, c)
}

/// Completes `(J, S)` (upper index) with `Ω₁, Ω₂, K` from
/// `Ω₁K_ν = J^μ(*S)_{μν}`, `Ω₂K_ν = −J^μS_{μν}`, `Ω₁² + Ω₂² = J_μJ^μ`.
///
/// Fails with `InconsistentInput` when `a` and `b` are not parallel (relative
/// deviation above 1e−6).
pub fn fierz_completion(j: [f64; 4], s: [f64; 6]) -> Result<Completion> {
    fierz_completion_with(j, s, 1e-6)
}

/// As [`fierz_completion`] with an explicit consistency tolerance
/// (`f64::INFINITY` disables the check, as needed for noisy data).
pub fn fierz_completion_with(j: [f64; 4], s: [f64; 6], consistency: f64) -> Result<Completion> {
    let base = BilinearSet { j, s, ..Default::default() };
    let scale = j.iter().chain(&s).fold(0.0f64, |m, x| m.max(x.abs()));
    if !base.is_finite() {
        return Err(Error::InconsistentInput("non-finite covariants".into()));
    }
    if scale < f64::MIN_POSITIVE {
        return Ok(finish(CovariantClass::Zero, vec![base]));
    }
    let norm2 = (j[0] * j[0]).max(scale * scale);
    let m2 = base.j_square();
    if m2 < tol::NULL * norm2 {
        return null_completion(base, norm2);
    }

    let (a, b) = contractions(&base);
    let m11 = (-dot_lower(&a, &a) / m2).max(0.0);
    let m22 = (-dot_lower(&b, &b) / m2).max(0.0);
    let m12 = -dot_lower(&a, &b) / m2;
    let (o1, o2) = if m11 >= m22 {
        let o1 = m11.sqrt();
        (o1, if o1 > 0.0 { m12 / o1 } else { 0.0 })
    } else {
        let o2 = m22.sqrt();
        (if o2 > 0.0 { m12 / o2 } else { 0.0 }, o2)
    };
    let denom = o1 * o1 + o2 * o2;
    if denom <= 0.0 {
        return Err(Error::InconsistentInput("J is timelike but J·(*S) and J·S vanish".into()));
    }
    let k_lower: [f64; 4] = std::array::from_fn(|nu| (o1 * a[nu] + o2 * b[nu]) / denom);
    let mismatch = (0..4)
        .map(|nu| (o1 * k_lower[nu] - a[nu]).abs().max((o2 * k_lower[nu] - b[nu]).abs()))
        .fold(0.0, f64::max);
    if mismatch > consistency * norm2 {
        return Err(Error::InconsistentInput(format!(
            "J·(*S) and J·S are not parallel (relative mismatch {:.3e})",
            mismatch / norm2
        )));
    }
    let plus = BilinearSet { omega1: o1, omega2: o2, k: lower(&k_lower), ..base };
    let minus = BilinearSet { omega1: -o1, omega2: -o2, k: lower(&k_lower).map(|x| -x), ..base };
    Ok(finish(CovariantClass::Regular, vec![plus, minus]))
}

fn frob_dot(x: &CMat4, y: &CMat4) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

fn null_completion(base: BilinearSet, norm2: f64) -> Result<Completion> {
    // With Ω₁ = Ω₂ = 0 and K = λJ, ρ(λ) = A + λB must be rank one, so
    // ρ(λ)γ⁰ρ(λ) = tr(γ⁰ρ)ρ = 4J⁰ρ(λ). The residual P + λQ + λ²R is
    // minimized over λ; every zero (two of them, ±1, for S = 0) is kept.
    let rep = make_representation(RepKind::Standard)?;
    let a = rho_from_bilinears(&base, &rep).matrix;
    let b = rho_from_bilinears(&BilinearSet { k: base.j, ..Default::default() }, &rep).matrix;
    let g0 = rep.gamma(0);
    let four_j0 = crate::linalg::c(4.0 * base.j[0], 0.0);
    let p = a * g0 * a - a * four_j0;
    let q = a * g0 * b + b * g0 * a - b * four_j0;
    let r = b * g0 * b;
    let coeffs = [
        frob_dot(&p, &p),
        2.0 * frob_dot(&p, &q),
        frob_dot(&q, &q) + 2.0 * frob_dot(&p, &r),
        2.0 * frob_dot(&q, &r),
        frob_dot(&r, &r),
    ];
    let f = |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let df = |x: f64| 4.0 * coeffs[4] * x.powi(3) + 3.0 * coeffs[3] * x * x + 2.0 * coeffs[2] * x + coeffs[1];
    let d2f = |x: f64| 12.0 * coeffs[4] * x * x + 6.0 * coeffs[3] * x + 2.0 * coeffs[2];

    // |λ| ≤ 1 for genuine spinors; scan a slightly wider interval
    const N: usize = 2400;
    let grid: Vec<f64> = (0..=N).map(|i| -1.2 + 2.4 * i as f64 / N as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut minima = Vec::new();
    for i in 0..=N {
        let left = if i > 0 { values[i - 1] } else { f64::INFINITY };
        let right = if i < N { values[i + 1] } else { f64::INFINITY };
        if values[i] <= left && values[i] < right {
            let mut x = grid[i];
            for _ in 0..50 {
                let h = d2f(x);
                if h <= 0.0 {
                    break;
                }
                let step = df(x) / h;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            minima.push((x, f(x).max(0.0)));
        }
    }
    let best = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let accept = (100.0 * best).max(1e-20 * norm2 * norm2 * norm2);
    let mut lambdas: Vec<f64> = minima.iter().filter(|m| m.1 <= accept).map(|m| m.0).collect();
    lambdas.dedup_by(|x, y| (*x - *y).abs() < 1e-9);
    let s_scale = base.s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let class = if s_scale < 1e-8 * norm2.sqrt() { CovariantClass::Weyl } else { CovariantClass::Null };
    let candidates = lambdas
        .into_iter()
        .map(|l| BilinearSet { k: base.j.map(|x| l * x), ..base })
        .collect();
    Ok(finish(class, candidates))
}

fn finish(class: CovariantClass, candidates: Vec<BilinearSet>) -> Completion {
    let fierz = candidates.iter().map(|c| fierz_residuals(c).scaled_for(c)).collect();
    Completion { class, candidates, fierz }
}

/// Residuals linear in `x = (S^{01}, S^{02}, S^{03}, Ω₂)` once `Ω₁`, `J`, `K`
/// and the spatial part of `S` are fixed: `Ω₁K_ν − J^μ(*S)_{μν}`,
/// `Ω₂K_ν + J^μS_{μν}` and the spatial components of the last Fierz identity.
fn boost_part_residuals(b: &BilinearSet) -> Vec<f64> {
    let (a, c) = contractions(b);
    let kl = b.k_lower();
    let mut r = Vec::with_capacity(11);
    r.extend((0..4).map(|nu| b.omega1 * kl[nu] - a[nu]));
    r.extend((0..4).map(|nu| b.omega2 * kl[nu] - c[nu]));
    let f = fierz_residuals(b).0;
    r.extend_from_slice(&f[6..9]);
    r
}

/// Fills `S^{0k}` and `Ω₂` by linear least squares from the Fierz identities,
/// given measured `Ω₁, J, K, S^{12}, S^{23}, S^{31}`. Returns the completed
/// set and the RMS residual relative to `(J⁰)²`.
pub fn complete_boost_part(partial: &BilinearSet) -> (BilinearSet, f64) {
    let with = |x: &[f64; 4]| {
        let mut b = *partial;
        b.s[0] = x[0];
        b.s[1] = x[1];
        b.s[2] = x[2];
        b.omega2 = x[3];
        b
    };
    let r0 = DVector::from_vec(boost_part_residuals(&with(&[0.0; 4])));
    let mut m = DMatrix::zeros(r0.len(), 4);
    for i in 0..4 {
        let mut e = [0.0; 4];
        e[i] = 1.0;
        let col = DVector::from_vec(boost_part_residuals(&with(&e))) - &r0;
        m.set_column(i, &col);
    }
    let x = least_squares(&m, &(-&r0)).unwrap_or_else(|| DVector::zeros(4));
    let out = with(&[x[0], x[1], x[2], x[3]]);
    let res = DVector::from_vec(boost_part_residuals(&out));
    let scale = (partial.j[0] * partial.j[0]).max(f64::MIN_POSITIVE);
    (out, res.norm() / (res.len() as f64).sqrt() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinor::{bilinears, DiracSpinor};
    use crate::linalg::c;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s_slot(mu: usize, nu: usize) -> usize {
        crate::clifford::S_PAIRS.iter().position(|&p| p == (mu, nu)).expect("stored pair")
    }

    #[test]
    fn e1_example() {
        let mut s = [0.0; 6];
        s[s_slot(1, 2)] = 1.0;
        let (a, b) = contractions(&BilinearSet { j: [1.0, 0.0, 0.0, 0.0], s, ..Default::default() });
        assert_eq!(a, [0.0, 0.0, 0.0, -1.0]);
        assert_eq!(b, [0.0; 4]);
        let out = fierz_completion([1.0, 0.0, 0.0, 0.0], s).unwrap();
        assert_eq!(out.class, CovariantClass::Regular);
        assert_eq!(out.candidates.len(), 2);
        let first = &out.candidates[0];
        assert_eq!((first.omega1, first.omega2), (1.0, 0.0));
        assert_eq!(first.k, [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(out.candidates[1].omega1, -1.0);
        assert!(out.fierz.iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn zero_input() {
        let out = fierz_completion([0.0; 4], [0.0; 6]).unwrap();
        assert_eq!(out.class, CovariantClass::Zero);
        assert_eq!(out.candidates, vec![BilinearSet::zero()]);
    }

    #[test]
    fn recovers_random_spinors() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for kind in RepKind::BUILT_IN {
            let rep = make_representation(kind).unwrap();
            for _ in 0..200 {
                let b = bilinears(&DiracSpinor::random_normalized(&mut rng), &rep).unwrap();
                let out = fierz_completion(b.j, b.s).unwrap();
                let best = out.candidates.iter().map(|c| c.max_abs_diff(&b)).fold(f64::INFINITY, f64::min);
                assert!(best < 1e-10, "{best}");
                assert!(out.fierz.iter().all(|f| f.max_abs() < 1e-9));
            }
        }
    }

    #[test]
    fn null_classes() {
        let rep = make_representation(RepKind::Chiral).unwrap();
        // left-handed Weyl spinor: S = 0, K = ±J
        let weyl = DiracSpinor::new([c(0.6, 0.1), c(-0.3, 0.7), c(0.0, 0.0), c(0.0, 0.0)]);
        let b = bilinears(&weyl, &rep).unwrap();
        let out = fierz_completion(b.j, b.s).unwrap();
        assert_eq!(out.class, CovariantClass::Weyl);
        assert!(out.candidates.iter().any(|c| c.max_abs_diff(&b) < 1e-12));

        // Majorana-class spinor (ψ = Cψ*): Ω₁ = Ω₂ = 0, K = 0, S ≠ 0
        let mj = make_representation(RepKind::Majorana).unwrap();
        let real = DiracSpinor::from_reals([0.3, 0.0, -0.5, 0.0, 0.7, 0.0, 0.1, 0.0]);
        let b = bilinears(&real, &mj).unwrap();
        assert!(b.j_square().abs() < 1e-14);
        let out = fierz_completion(b.j, b.s).unwrap();
        assert_eq!(out.class, CovariantClass::Null);
        assert!(out.candidates[0].max_abs_diff(&b) < 1e-12);

        // flagpole-dipole: superposition of a Weyl spinor and a Majorana-class spinor
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let st = make_representation(RepKind::Standard).unwrap();
        for _ in 0..20 {
            let x: [f64; 8] = std::array::from_fn(|_| rand::Rng::random_range(&mut rng, -1.0..1.0));
            let r = DiracSpinor::from_reals([x[0], 0.0, x[1], 0.0, x[2], 0.0, x[3], 0.0]);
            let psi = r.apply(&rep_to(&mj, &st));
            let b = bilinears(&psi, &st).unwrap();
            let out = fierz_completion(b.j, b.s).unwrap();
            assert!(out.candidates.iter().any(|c| c.max_abs_diff(&b) < 1e-10));
        }
    }

    fn rep_to(from: &crate::clifford::GammaRep, to: &crate::clifford::GammaRep) -> CMat4 {
        to.change_of_basis() * from.change_of_basis().adjoint()
    }

    #[test]
    fn rejects_inconsistent_covariants() {
        let mut s = [0.0; 6];
        s[s_slot(1, 2)] = 1.0;
        s[s_slot(0, 1)] = 0.7;
        s[s_slot(2, 3)] = -0.4;
        assert!(matches!(fierz_completion([1.0, 0.1, 0.0, 0.2], s), Err(Error::InconsistentInput(_))));
        assert!(fierz_completion_with([1.0, 0.1, 0.0, 0.2], s, f64::INFINITY).is_ok());
    }

    #[test]
    fn boost_part_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rep = make_representation(RepKind::Standard).unwrap();
        for _ in 0..100 {
            let b = bilinears(&DiracSpinor::random_normalized(&mut rng), &rep).unwrap();
            let mut partial = b;
            partial.s[0] = 0.0;
            partial.s[1] = 0.0;
            partial.s[2] = 0.0;
            partial.omega2 = 0.0;
            let (out, res) = complete_boost_part(&partial);
            assert!(out.max_abs_diff(&b) < 1e-10, "{}", out.max_abs_diff(&b));
            assert!(res < 1e-12);
        }
    }
}
