use nalgebra::{DMatrix, DVector};

use super::{finish, require_protocol, Completion, CovariantClass, MarginalDataset, ReconstructionReport};
use crate::clifford::{make_representation, RepKind};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::lorentz::{transform_bilinears, LorentzFrame};
use crate::reconstruct::completion::complete_boost_part;
use crate::spinor::{fierz_residuals, BilinearSet};
use crate::tomography::{marginal_formula, Protocol};

/// Positions (in the 16-slot array) of the covariants visible to rotated
/// standard and chiral measurements: `Ω₁, J^μ, S^{12}, S^{23}, S^{31}, K^μ`.
const VISIBLE: [usize; 12] = [0, 1, 2, 3, 4, 8, 9, 10, 11, 12, 13, 14];

/// `Ω₁ = w₁ + w₂ − w₃ − w₄` in the standard representation.
pub fn omega1_from_standard(w: &[f64; 4]) -> f64 {
    w[0] + w[1] - w[2] - w[3]
}

/// Least-squares fit of the twelve visible covariants to every record of a
/// standard/chiral dataset. Returns the partial covariant set (`S^{0k}` and
/// `Ω₂` zero) and the RMS fit residual.
pub fn recover_combined_slots(data: &MarginalDataset) -> Result<(BilinearSet, f64)> {
    let mut rows: Vec<[f64; 12]> = Vec::new();
    let mut rhs = Vec::new();
    let mut kinds_seen = [false; 2];
    for r in &data.records {
        let slot = match r.rep_kind {
            RepKind::Standard => 0,
            RepKind::Chiral => 1,
            other => return Err(Error::UnsupportedRep(format!("{other} record in combined dataset"))),
        };
        kinds_seen[slot] = true;
        let formula = marginal_formula(r.rep_kind)?;
        let frame: LorentzFrame = r.record.frame.parse()?;
        let columns: [[f64; 4]; 12] = std::array::from_fn(|i| {
            let mut e = [0.0; 16];
            e[VISIBLE[i]] = 1.0;
            formula.evaluate(&transform_bilinears(&BilinearSet::from_array(&e), &frame))
        });
        for k in 0..4 {
            rows.push(std::array::from_fn(|i| columns[i][k]));
            rhs.push(r.record.w[k]);
        }
    }
    if !kinds_seen[0] {
        return Err(Error::MissingFrame("standard:*".into()));
    }
    if !kinds_seen[1] {
        return Err(Error::MissingFrame("chiral:*".into()));
    }
    let a = DMatrix::from_fn(rows.len(), 12, |r, c| rows[r][c]);
    let b = DVector::from_vec(rhs);
    let x = least_squares(&a, &b)
        .ok_or_else(|| Error::InconsistentInput("rank-deficient marginal system".into()))?;
    let residual = (&a * &x - &b).norm() / (b.len() as f64).sqrt();
    let mut full = [0.0; 16];
    for (i, &slot) in VISIBLE.iter().enumerate() {
        full[slot] = x[i];
    }
    Ok((BilinearSet::from_array(&full), residual))
}

/// Combined standard + chiral rotation protocol. `Ω₁` and `K` are measured
/// directly, so the completion is single-valued.
pub fn reconstruct_combined(data: &MarginalDataset) -> Result<ReconstructionReport> {
    require_protocol(data, data.protocol == Protocol::CombinedStChiral, "combined_st_chiral")?;
    let (partial, fit) = recover_combined_slots(data)?;
    data.validate()?;
    let (completed, closure) = complete_boost_part(&partial);
    let fierz = fierz_residuals(&completed).scaled_for(&completed);
    let class = if completed.j_square() < crate::tol::NULL * completed.j[0].powi(2) {
        CovariantClass::Null
    } else {
        CovariantClass::Regular
    };
    let completion = Completion { class, candidates: vec![completed], fierz: vec![fierz] };
    let primary = make_representation(RepKind::Standard)?;
    let diag = vec![format!("linear fit residual {fit:.3e}, Fierz closure residual {closure:.3e}")];
    finish(data, &primary, completion, vec![fit, closure], diag, data.is_exact())
}
