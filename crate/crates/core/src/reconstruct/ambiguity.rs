use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::feasibility::{from_real, group_frames, marginal_operators, quadratic_gradient, to_real};
use super::Group;
use crate::clifford::{make_representation, GammaRep, RepKind};
use crate::error::Result;
use crate::linalg::{CMat4, C64};
use crate::spinor::{bilinears, crawford_best_anchor, phase_distance, rho_from_bilinears, DiracSpinor};

/// A spinor inequivalent to the probe whose marginals agree on every
/// sampled frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub psi_prime: DiracSpinor,
    pub phase_distance: f64,
    pub marginal_residual: f64,
    pub seed: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityReport {
    pub rep_kind: RepKind,
    pub group: Group,
    pub psi: DiracSpinor,
    pub frames: usize,
    pub seeds_tried: usize,
    /// Smallest marginal residual among refined seeds that stayed at least
    /// `FAR` away from `ψ`.
    pub best_far_residual: f64,
    pub found: Option<Counterexample>,
}

const FRAMES: usize = 44;
const FAR: f64 = 0.1;
const MATCH: f64 = 1e-9;

fn residual_vector(ops: &[CMat4], target: &[f64], x: &DVector<f64>) -> DVector<f64> {
    let psi = from_real(x);
    DVector::from_fn(ops.len(), |r, _| (psi.dotc(&(ops[r] * psi))).re - target[r])
}

/// Levenberg–Marquardt on `Σ (w(ψ′) − w(ψ))²` over the sampled frames.
fn refine(ops: &[CMat4], target: &[f64], start: &DVector<f64>) -> DVector<f64> {
    let mut x = start.clone();
    let mut r = residual_vector(ops, target, &x);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..300 {
        if cost < 1e-28 {
            break;
        }
        let psi = from_real(&x);
        let jac = DMatrix::from_fn(ops.len(), 8, |row, c| quadratic_gradient(&ops[row], &psi)[c]);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        for _ in 0..20 {
            let damped = &jtj + DMatrix::identity(8, 8) * (mu * jtj.diagonal().max().max(1e-12));
            let Some(step) = damped.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let trial = &x + step;
            let tr = residual_vector(ops, target, &trial);
            let tc = tr.norm_squared();
            if tc < cost {
                x = trial;
                r = tr;
                cost = tc;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    x
}

fn seeds(psi: &DiracSpinor, rep: &GammaRep) -> Vec<(String, DiracSpinor)> {
    let mut out = Vec::new();
    if let Ok(b) = bilinears(psi, rep) {
        let flipped = crate::spinor::BilinearSet {
            omega1: -b.omega1,
            omega2: -b.omega2,
            k: b.k.map(|x| -x),
            ..b
        };
        if let Ok((p, _)) = crawford_best_anchor(&rho_from_bilinears(&flipped, rep), rep) {
            out.push(("fierz sign flip".to_string(), p.scale(C64::new(psi.norm(), 0.0) / p.norm().max(1e-300))));
        }
    }
    let half = C64::new(0.5, 0.0);
    let id = CMat4::identity();
    let splits = [
        ("γ⁰ eigenspaces", rep.gamma(0) * C64::new(1.0, 0.0)),
        ("chirality eigenspaces", rep.gamma_0123() * C64::new(0.0, 1.0)),
    ];
    for (name, op) in splits {
        let plus = (id + op) * half;
        let minus = (id - op) * half;
        for alpha in [FRAC_PI_2, PI, 3.0 * FRAC_PI_2] {
            let m = plus + minus * C64::from_polar(1.0, alpha);
            out.push((format!("relative phase {alpha:.4} between {name}"), psi.apply(&m)));
        }
    }
    out.push(("complex conjugate".into(), psi.conj()));
    for k in 0..4 {
        let mut m = CMat4::identity();
        m[(k, k)] = C64::new(-1.0, 0.0);
        out.push((format!("sign flip of component {}", k + 1), psi.apply(&m)));
    }
    out
}

/// Searches for `ψ′` with `phase_distance(ψ′, ψ) > 0.1` whose marginals agree
/// with those of `ψ` (to 1e−9) on the discrete frames plus 44 sampled group
/// elements. Seeds come from the Fierz sign flip, relative phases between
/// `γ⁰` and chirality eigenspaces, conjugation and component sign flips; each
/// is refined by Levenberg–Marquardt.
pub fn ambiguity_probe(psi: &DiracSpinor, rep_kind: RepKind, group: Group) -> Result<AmbiguityReport> {
    let rep = make_representation(rep_kind)?;
    let frames = group_frames(group, FRAMES, 0xa3b1);
    let ops = marginal_operators(&frames, &rep)?;
    let base = psi.components();
    let target: Vec<f64> = ops.iter().map(|m| base.dotc(&(m * base)).re).collect();
    let scale = psi.norm().max(1e-300);

    let candidates = seeds(psi, &rep);
    let mut report = AmbiguityReport {
        rep_kind,
        group,
        psi: *psi,
        frames: frames.len(),
        seeds_tried: candidates.len(),
        best_far_residual: f64::INFINITY,
        found: None,
    };
    for (name, seed) in candidates {
        let x = refine(&ops, &target, &to_real(seed.components()));
        let cand = DiracSpinor::from_vector(from_real(&x));
        let residual = residual_vector(&ops, &target, &x).amax();
        let distance = phase_distance(&cand, psi) / scale;
        if distance <= FAR {
            continue;
        }
        report.best_far_residual = report.best_far_residual.min(residual);
        if residual < MATCH && report.found.is_none() {
            report.found = Some(Counterexample {
                psi_prime: cand.with_canonical_phase(),
                phase_distance: distance,
                marginal_residual: residual,
                seed: name,
            });
        }
    }
    Ok(report)
}
