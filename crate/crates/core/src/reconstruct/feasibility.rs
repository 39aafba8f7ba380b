use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{make_representation, GammaBasis, GammaRep, RepKind, SLOT_LABELS};
use crate::error::{Error, Result};
use crate::linalg::{CMat4, CVec4, C64};
use crate::lorentz::{spinor_lift, LorentzFrame};
use crate::spinor::DiracSpinor;
use crate::tomography::{frame_set, projectors, Protocol};

/// Transformations available to the experimenter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Rotations,
    #[serde(alias = "full")]
    FullRestrictedLorentz,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Rotations, Group::FullRestrictedLorentz];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Rotations => "rotations",
            Group::FullRestrictedLorentz => "full",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "rotations" | "rotation" | "su2" => Ok(Group::Rotations),
            "full" | "lorentz" | "full_restricted_lorentz" => Ok(Group::FullRestrictedLorentz),
            _ => Err(Error::InvalidInput(format!("unknown group `{s}`"))),
        }
    }
}

/// Family of spinors over which local identifiability is assessed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinorClass {
    /// All of `ℂ⁴` (generic spinors are massive: `Ω₁² + Ω₂² > 0`).
    Generic,
    /// One chirality: the `−1` eigenspace of `iγ₀₁₂₃`.
    Weyl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Complete,
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub rep_kind: RepKind,
    pub group: Group,
    pub class: SpinorClass,
    /// Covariants whose gradient lies in the span of the marginal gradients
    /// at every base point.
    pub recoverable_slots: Vec<String>,
    pub span_rank: usize,
    /// Real dimension of the class modulo the global phase.
    pub max_rank: usize,
    pub verdict: Verdict,
    pub base_points: usize,
    pub frames: usize,
}

const BASE_POINTS: usize = 4;
const RANDOM_FRAMES: usize = 60;

/// Discrete protocol frames followed by `count` random group elements.
pub(crate) fn group_frames(group: Group, count: usize, seed: u64) -> Vec<LorentzFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = frame_set(Protocol::DiscreteMajorana).expect("fixed protocol");
    for _ in 0..count {
        let r = LorentzFrame::random_rotation(&mut rng);
        frames.push(match group {
            Group::Rotations => r,
            Group::FullRestrictedLorentz => r.compose(&LorentzFrame::random_boost(&mut rng, 1.5)),
        });
    }
    frames
}

/// `M = L†P_kL`, so that `w_k = ψ†Mψ`.
pub(crate) fn marginal_operators(frames: &[LorentzFrame], rep: &GammaRep) -> Result<Vec<CMat4>> {
    let p = projectors();
    let mut out = Vec::with_capacity(4 * frames.len());
    for f in frames {
        let l = spinor_lift(f, rep)?.l;
        for pk in &p.p {
            out.push(l.adjoint() * pk * l);
        }
    }
    Ok(out)
}

/// Gradient of `ψ ↦ ψ†Mψ` in the real coordinates `(Re ψ, Im ψ)`.
pub(crate) fn quadratic_gradient(m: &CMat4, psi: &CVec4) -> [f64; 8] {
    let v = m * psi;
    std::array::from_fn(|i| if i < 4 { 2.0 * v[i].re } else { 2.0 * v[i - 4].im })
}

pub(crate) fn to_real(psi: &CVec4) -> DVector<f64> {
    DVector::from_fn(8, |i, _| if i < 4 { psi[i].re } else { psi[i - 4].im })
}

pub(crate) fn from_real(x: &DVector<f64>) -> CVec4 {
    CVec4::from_fn(|i, _| C64::new(x[i], x[i + 4]))
}

/// Real 8×d basis of the tangent space of the class.
fn class_basis(class: SpinorClass, rep: &GammaRep) -> DMatrix<f64> {
    match class {
        SpinorClass::Generic => DMatrix::identity(8, 8),
        SpinorClass::Weyl => {
            let g5 = rep.gamma_0123() * C64::new(0.0, 1.0);
            let proj = (CMat4::identity() - g5) * C64::new(0.5, 0.0);
            let mut cols: Vec<CVec4> = Vec::new();
            for k in 0..4 {
                let mut v: CVec4 = proj.column(k).into();
                for c in &cols {
                    v -= c * c.dotc(&v);
                }
                if v.norm() > 1e-8 {
                    cols.push(v.normalize());
                }
            }
            let mut basis = DMatrix::zeros(8, 2 * cols.len());
            for (j, c) in cols.iter().enumerate() {
                basis.set_column(2 * j, &to_real(c));
                basis.set_column(2 * j + 1, &to_real(&(c * C64::new(0.0, 1.0))));
            }
            basis
        }
    }
}

fn class_point(class: SpinorClass, basis: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> CVec4 {
    let psi = DiracSpinor::random_normalized(rng);
    match class {
        SpinorClass::Generic => *psi.components(),
        SpinorClass::Weyl => {
            let coeffs = basis.transpose() * to_real(psi.components());
            from_real(&(basis * coeffs)).normalize()
        }
    }
}

fn rank(m: &DMatrix<f64>) -> (usize, DMatrix<f64>) {
    let svd = m.clone().svd(false, true);
    let s_max = svd.singular_values.max();
    let v_t = svd.v_t.expect("requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > 1e-8 * s_max)
        .collect();
    let row_space = DMatrix::from_fn(keep.len(), m.ncols(), |r, c| v_t[(keep[r], c)]);
    (keep.len(), row_space)
}

/// Generic rank of the marginal gradients over the group, with the fixed
/// internal seed `0`.
pub fn representation_feasibility(kind: RepKind, group: Group) -> Result<FeasibilityReport> {
    representation_feasibility_for(kind, group, SpinorClass::Generic, 0)
}

/// Rank of the span of `∇w_k^{(Λ)}` over a sample of group elements,
/// restricted to the tangent space of `class` and maximized over random base
/// points. The gradients are orthogonal to the phase direction, so the rank is
/// at most the class dimension minus one.
pub fn representation_feasibility_for(
    kind: RepKind,
    group: Group,
    class: SpinorClass,
    seed: u64,
) -> Result<FeasibilityReport> {
    let rep = make_representation(kind)?;
    let frames = group_frames(group, RANDOM_FRAMES, seed);
    let ops = marginal_operators(&frames, &rep)?;
    let basis = class_basis(class, &rep);
    let max_rank = basis.ncols() - 1;
    let gamma0 = rep.gamma(0);
    let covariant_ops: Vec<CMat4> = GammaBasis::new(&rep).elements().iter().map(|g| gamma0 * g).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut best = 0;
    let mut recoverable = vec![true; 16];
    for _ in 0..BASE_POINTS {
        let psi = class_point(class, &basis, &mut rng);
        let grads = DMatrix::from_fn(ops.len(), 8, |r, c| quadratic_gradient(&ops[r], &psi)[c]) * &basis;
        let (r, row_space) = rank(&grads);
        best = best.max(r);
        for (a, op) in covariant_ops.iter().enumerate() {
            let g = DVector::from_row_slice(&quadratic_gradient(op, &psi));
            let g = basis.transpose() * g;
            let proj = row_space.transpose() * (&row_space * &g);
            if (&g - proj).norm() > 1e-7 * g.norm().max(1.0) {
                recoverable[a] = false;
            }
        }
    }
    Ok(FeasibilityReport {
        rep_kind: kind,
        group,
        class,
        recoverable_slots: SLOT_LABELS
            .iter()
            .zip(&recoverable)
            .filter(|(_, &ok)| ok)
            .map(|(l, _)| l.to_string())
            .collect(),
        span_rank: best,
        max_rank,
        verdict: if best == max_rank { Verdict::Complete } else { Verdict::Incomplete },
        base_points: BASE_POINTS,
        frames: frames.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_table() {
        let cases = [
            (RepKind::Majorana, Group::Rotations, 7),
            (RepKind::Majorana, Group::FullRestrictedLorentz, 7),
            (RepKind::Standard, Group::Rotations, 6),
            (RepKind::Standard, Group::FullRestrictedLorentz, 7),
            (RepKind::Chiral, Group::Rotations, 6),
            (RepKind::Chiral, Group::FullRestrictedLorentz, 6),
        ];
        for (kind, group, expected) in cases {
            let r = representation_feasibility(kind, group).unwrap();
            assert_eq!(r.span_rank, expected, "{kind} {group}");
            assert_eq!(r.verdict == Verdict::Complete, expected == 7);
        }
    }

    #[test]
    fn weyl_class_is_complete_for_chiral() {
        let r = representation_feasibility_for(RepKind::Chiral, Group::FullRestrictedLorentz, SpinorClass::Weyl, 0)
            .unwrap();
        assert_eq!((r.span_rank, r.max_rank, r.verdict), (3, 3, Verdict::Complete));
    }

    #[test]
    fn stable_across_seeds() {
        for seed in [1, 2, 3] {
            let r = representation_feasibility_for(RepKind::Standard, Group::Rotations, SpinorClass::Generic, seed)
                .unwrap();
            assert_eq!(r.span_rank, 6);
        }
    }

    #[test]
    fn recoverable_slots() {
        let chiral = representation_feasibility(RepKind::Chiral, Group::FullRestrictedLorentz).unwrap();
        assert_eq!(chiral.recoverable_slots, ["J0", "J1", "J2", "J3", "K0", "K1", "K2", "K3"]);
        let mj = representation_feasibility(RepKind::Majorana, Group::Rotations).unwrap();
        assert_eq!(mj.recoverable_slots.len(), 16);
    }

    #[test]
    fn group_names() {
        assert_eq!("full".parse::<Group>().unwrap(), Group::FullRestrictedLorentz);
        assert_eq!("rotations".parse::<Group>().unwrap(), Group::Rotations);
        assert!("boosts".parse::<Group>().is_err());
    }
}
