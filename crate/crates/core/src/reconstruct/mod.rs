//! Reconstruction of a spinor from marginal datasets, plus the feasibility
//! and ambiguity analyses of the measurement schemes.
//!
//! All protocols share the same tail: complete the measured covariants with
//! the Fierz identities, build `ρ`, invert it with an anchor spinor and keep
//! the candidates that reproduce every measured marginal.

mod ambiguity;
mod combined;
mod completion;
mod continuous;
mod dataset;
mod feasibility;
mod majorana;

pub use ambiguity::{ambiguity_probe, AmbiguityReport, Counterexample};
pub use combined::{omega1_from_standard, reconstruct_combined, recover_combined_slots};
pub use completion::{
    complete_boost_part, contractions, fierz_completion, fierz_completion_with, Completion, CovariantClass,
};
pub use continuous::{continuous_covariants, reconstruct_continuous};
pub use dataset::{rep_transfer, simulate_dataset, DatasetRecord, MarginalDataset, ShotModel};
pub use feasibility::{
    representation_feasibility, representation_feasibility_for, FeasibilityReport, Group, SpinorClass, Verdict,
};
pub use majorana::{constraint_residuals, majorana_local, reconstruct_majorana, recover_js_majorana};

use serde::{Deserialize, Serialize};

use crate::clifford::{make_representation, GammaRep, RepKind};
use crate::error::{Error, Result};
use crate::linalg::CMat4;
use crate::lorentz::{spinor_lift, LorentzFrame, SpinorLift};
use crate::spinor::{crawford_best_anchor, phase_distance, rho_from_bilinears, BilinearSet, DiracSpinor, FierzResiduals};
use crate::tomography::Protocol;
use crate::tol;

/// Outcome of a reconstruction, candidates sorted by marginal residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub protocol: Protocol,
    /// Representation the candidate spinors are expressed in.
    pub rep_kind: RepKind,
    pub candidates: Vec<DiracSpinor>,
    pub covariants: Vec<BilinearSet>,
    /// Largest `|w_pred − w_data|` over all records, per candidate.
    pub marginal_residuals: Vec<f64>,
    pub constraint_residuals: Vec<f64>,
    pub fierz_residuals: Vec<FierzResiduals>,
    pub class: CovariantClass,
    pub ambiguity_flag: bool,
    pub diagnostics: String,
}

impl ReconstructionReport {
    pub fn best(&self) -> &DiracSpinor {
        &self.candidates[0]
    }

    /// Smallest phase distance from any candidate to `psi`.
    pub fn distance_to(&self, psi: &DiracSpinor) -> f64 {
        self.candidates.iter().map(|c| phase_distance(c, psi)).fold(f64::INFINITY, f64::min)
    }
}

/// Predicts the marginals of every record of a dataset for a spinor given in
/// the primary representation.
pub(crate) struct MarginalPredictor {
    entries: Vec<(CMat4, SpinorLift, [f64; 4])>,
}

impl MarginalPredictor {
    pub(crate) fn new(data: &MarginalDataset, primary: &GammaRep) -> Result<Self> {
        let mut reps: Vec<(RepKind, GammaRep, CMat4)> = Vec::new();
        let mut entries = Vec::with_capacity(data.records.len());
        for r in &data.records {
            if !reps.iter().any(|(k, _, _)| *k == r.rep_kind) {
                let rep = make_representation(r.rep_kind)?;
                let transfer = rep_transfer(primary, &rep);
                reps.push((r.rep_kind, rep, transfer));
            }
            let (_, rep, transfer) = reps.iter().find(|(k, _, _)| *k == r.rep_kind).expect("inserted above");
            let frame: LorentzFrame = r.record.frame.parse()?;
            entries.push((*transfer, spinor_lift(&frame, rep)?, r.record.w));
        }
        Ok(MarginalPredictor { entries })
    }

    pub(crate) fn residual(&self, psi: &DiracSpinor) -> f64 {
        let mut worst = 0.0f64;
        for (transfer, lift, w) in &self.entries {
            let moved = psi.apply(&(lift.l * transfer));
            for k in 0..4 {
                worst = worst.max((moved.component(k).norm_sqr() - w[k]).abs());
            }
        }
        worst
    }
}

/// Turns completed covariant sets into validated spinor candidates.
pub(crate) fn finish(
    data: &MarginalDataset,
    primary: &GammaRep,
    completion: Completion,
    constraint_residuals: Vec<f64>,
    mut diagnostics: Vec<String>,
    strict: bool,
) -> Result<ReconstructionReport> {
    let predictor = MarginalPredictor::new(data, primary)?;
    let mut found: Vec<(f64, DiracSpinor, BilinearSet, FierzResiduals)> = Vec::new();
    for (cov, fierz) in completion.candidates.iter().zip(&completion.fierz) {
        let rho = rho_from_bilinears(cov, primary);
        match crawford_best_anchor(&rho, primary) {
            Ok((psi, _)) => found.push((predictor.residual(&psi), psi, *cov, *fierz)),
            Err(e) => diagnostics.push(format!("candidate dropped: {e}")),
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let best = found.first().map(|f| f.0).unwrap_or(f64::INFINITY);
    let scale = data.records.iter().map(|r| r.record.total()).fold(1.0f64, f64::max);
    let tau = if strict {
        tol::RECON * scale
    } else {
        let shot_tol = data.shots().map(tol::shots).unwrap_or(tol::RECON);
        (shot_tol * scale).max(2.0 * best)
    };
    if strict && !(best <= tau) {
        return Err(Error::NoValidCandidate { best });
    }
    if !strict && best > tol::RECON * scale {
        diagnostics.push(format!("approximate data: best marginal residual {best:.3e}"));
    }

    let mut report = ReconstructionReport {
        protocol: data.protocol,
        rep_kind: primary.kind(),
        candidates: Vec::new(),
        covariants: Vec::new(),
        marginal_residuals: Vec::new(),
        constraint_residuals,
        fierz_residuals: Vec::new(),
        class: completion.class,
        ambiguity_flag: false,
        diagnostics: String::new(),
    };
    for (res, psi, cov, fierz) in found {
        if res > tau {
            diagnostics.push(format!("candidate rejected: marginal residual {res:.3e}"));
            continue;
        }
        let duplicate = report
            .candidates
            .iter()
            .any(|c| phase_distance(c, &psi) <= 1e-6 * psi.norm().max(1e-300));
        if duplicate {
            continue;
        }
        report.candidates.push(psi);
        report.covariants.push(cov);
        report.marginal_residuals.push(res);
        report.fierz_residuals.push(fierz);
    }
    if report.candidates.is_empty() {
        return Err(Error::NoValidCandidate { best });
    }
    report.ambiguity_flag = report.candidates.len() > 1;
    if report.ambiguity_flag {
        diagnostics.push("several inequivalent spinors reproduce the marginals".into());
    }
    if completion.class != CovariantClass::Regular {
        diagnostics.push(format!("covariant class: {}", completion.class));
    }
    report.diagnostics = diagnostics.join("; ");
    Ok(report)
}

pub(crate) fn require_kind(rep: &GammaRep, kind: RepKind) -> Result<()> {
    if rep.kind() != kind {
        return Err(Error::UnsupportedRep(format!("{} (expected {kind})", rep.kind())));
    }
    Ok(())
}

pub(crate) fn require_protocol(data: &MarginalDataset, ok: bool, expected: &str) -> Result<()> {
    if !ok {
        return Err(Error::InvalidInput(format!("dataset protocol {} is not {expected}", data.protocol)));
    }
    Ok(())
}
