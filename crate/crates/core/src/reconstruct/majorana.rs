use super::{finish, require_kind, require_protocol, MarginalDataset, ReconstructionReport};
use crate::clifford::{GammaRep, RepKind};
use crate::error::Result;
use crate::reconstruct::completion::fierz_completion_with;
use crate::tomography::Protocol;

/// Frame-local lower-index `(J₀, J₂, S₀₁, S₁₂)` from one Majorana record.
pub fn majorana_local(w: &[f64; 4]) -> [f64; 4] {
    [
        w[0] + w[1] + w[2] + w[3],
        -w[0] - w[1] + w[2] + w[3],
        w[0] - w[1] + w[2] - w[3],
        w[0] - w[1] - w[2] + w[3],
    ]
}

fn locals(data: &MarginalDataset) -> Result<[[f64; 4]; 4]> {
    let mut out = [[0.0; 4]; 4];
    for (slot, label) in ["I", "Rx", "Ry", "Rz"].iter().enumerate() {
        out[slot] = majorana_local(&data.get(RepKind::Majorana, label)?.w);
    }
    Ok(out)
}

/// `J^μ` and `S^{μν}` (upper index) from the sixteen marginals of the
/// discrete protocol. Each component is read from the first frame where it
/// appears:
///
/// ```text
/// I : J₀, J₂, S₀₁, S₁₂     Rx: J₃ = J₂′, S₃₁ = −S₁₂′
/// Ry: S₀₃ = −S₀₁′, S₂₃ = S₁₂′     Rz: J₁ = −J₂′, S₀₂ = S₀₁′
/// ```
pub fn recover_js_majorana(data: &MarginalDataset) -> Result<([f64; 4], [f64; 6])> {
    let [id, rx, ry, rz] = locals(data)?;
    let j_lower = [id[0], -rz[1], id[1], rx[1]];
    // lower S₀₁, S₀₂, S₀₃, S₁₂, S₂₃, S₃₁
    let s_lower = [id[2], rz[2], -ry[2], id[3], ry[3], -rx[3]];
    let j = [j_lower[0], -j_lower[1], -j_lower[2], -j_lower[3]];
    let s = [-s_lower[0], -s_lower[1], -s_lower[2], s_lower[3], s_lower[4], s_lower[5]];
    Ok((j, s))
}

/// The six redundancies of the sixteen marginals: `J₀` seen from `Rx`, `Ry`,
/// `Rz` against `I`, then `S₀₁` (invariant under `Rx`), `J₂` (under `Ry`) and
/// `S₁₂` (under `Rz`) against `I`.
pub fn constraint_residuals(data: &MarginalDataset) -> Result<[f64; 6]> {
    let [id, rx, ry, rz] = locals(data)?;
    Ok([rx[0] - id[0], ry[0] - id[0], rz[0] - id[0], rx[2] - id[2], ry[1] - id[1], rz[3] - id[3]])
}

/// Discrete protocol in the Majorana representation.
pub fn reconstruct_majorana(data: &MarginalDataset, rep: &GammaRep) -> Result<ReconstructionReport> {
    require_kind(rep, RepKind::Majorana)?;
    require_protocol(data, data.protocol == Protocol::DiscreteMajorana, "discrete_majorana")?;
    data.validate()?;
    let (j, s) = recover_js_majorana(data)?;
    let constraints = constraint_residuals(data)?;
    let exact = data.is_exact();
    let completion = fierz_completion_with(j, s, if exact { 1e-6 } else { f64::INFINITY })?;
    let mut diag = Vec::new();
    let worst = constraints.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if exact && worst > 1e-9 {
        diag.push(format!("constraint residual {worst:.3e} on exact data"));
    }
    finish(data, rep, completion, constraints.to_vec(), diag, exact)
}
