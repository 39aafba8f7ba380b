use std::collections::HashMap;

use super::{finish, majorana_local, require_kind, MarginalDataset, ReconstructionReport};
use crate::clifford::{GammaRep, RepKind};
use crate::error::{Error, Result};
use crate::lorentz::{kernel_vector_recon, DirectionChannel, DirectionSample};
use crate::quadrature::SphereQuadrature;
use crate::reconstruct::completion::fierz_completion_with;
use crate::tomography::{MarginalRecord, Protocol};

/// `J^μ` and `S^{μν}` (upper index) from a continuous-grid dataset.
///
/// For every node `n`, the frame with `e₃′ = n` exposes the axial vector
/// `a = (S^{23}, S^{31}, S^{12})` through `S′₁₂`, the frame with `e₂′ = n`
/// exposes `J⃗` through `−J′₂`, and the frame with `e₁′ = n` the polar vector
/// `S^{0k}` through `−S′₀₁`. Each is inverted with the kernel integral; `J⁰`
/// is the mean of `Σw` over all frames.
pub fn continuous_covariants(data: &MarginalDataset) -> Result<([f64; 4], [f64; 6])> {
    let Protocol::ContinuousGrid { n_theta, n_phi } = data.protocol else {
        return Err(Error::InvalidInput(format!("dataset protocol {} is not continuous_grid", data.protocol)));
    };
    let q = SphereQuadrature::gauss_trapezoid(n_theta, n_phi)?;
    let index: HashMap<&str, &MarginalRecord> = data
        .records
        .iter()
        .filter(|r| r.rep_kind == RepKind::Majorana)
        .map(|r| (r.record.frame.as_str(), &r.record))
        .collect();

    let mut j0_sum = 0.0;
    let mut count = 0usize;
    let mut channel = |ch: DirectionChannel, pick: fn(&[f64; 4]) -> f64| -> Result<[f64; 3]> {
        let mut samples = Vec::with_capacity(q.len());
        for node in q.nodes() {
            let label = format!("{}({},{})", ch.label_head(), node.theta, node.phi);
            let rec = index
                .get(label.as_str())
                .ok_or_else(|| Error::GridMismatch(format!("no record for frame {label}")))?;
            let local = majorana_local(&rec.w);
            j0_sum += local[0];
            count += 1;
            samples.push(DirectionSample { theta: node.theta, phi: node.phi, nu: pick(&local) });
        }
        kernel_vector_recon(&samples, &q)
    };
    let axial = channel(DirectionChannel::E3, |l| l[3])?;
    let polar = channel(DirectionChannel::E1, |l| -l[2])?;
    let jvec = channel(DirectionChannel::E2, |l| -l[1])?;
    let j0 = j0_sum / count as f64;
    let j = [j0, jvec[0], jvec[1], jvec[2]];
    let s = [polar[0], polar[1], polar[2], axial[2], axial[0], axial[1]];
    Ok((j, s))
}

/// Continuous protocol in the Majorana representation. Quadrature error
/// makes the data approximate, so candidates are accepted relative to the
/// best residual and a coarse grid degrades accuracy rather than failing.
pub fn reconstruct_continuous(data: &MarginalDataset, rep: &GammaRep) -> Result<ReconstructionReport> {
    require_kind(rep, RepKind::Majorana)?;
    let (j, s) = continuous_covariants(data)?;
    let completion = fierz_completion_with(j, s, f64::INFINITY)?;
    let q = data.protocol.quadrature().expect("continuous protocol")?;
    let diag = vec![format!("kernel quadrature {}", q.id())];
    finish(data, rep, completion, Vec::new(), diag, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::make_representation;
    use crate::reconstruct::{simulate_dataset, ShotModel};
    use crate::spinor::{bilinears, DiracSpinor};
    use crate::tomography::frame_set;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_marginals_give_zero_vectors() {
        let protocol = Protocol::ContinuousGrid { n_theta: 8, n_phi: 16 };
        let mut data = MarginalDataset::new(protocol);
        for f in frame_set(protocol).unwrap() {
            data.push(RepKind::Majorana, MarginalRecord::exact(f.label, [0.25; 4]));
        }
        let (j, s) = continuous_covariants(&data).unwrap();
        assert!((j[0] - 1.0).abs() < 1e-14);
        assert!(j[1..].iter().chain(&s).all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn covariants_match_generator() {
        let rep = make_representation(RepKind::Majorana).unwrap();
        let psi = DiracSpinor::random_normalized(&mut ChaCha8Rng::seed_from_u64(60));
        let data = simulate_dataset(&psi, Protocol::ContinuousGrid { n_theta: 12, n_phi: 24 }, &ShotModel::Exact).unwrap();
        let (j, s) = continuous_covariants(&data).unwrap();
        let b = bilinears(&psi, &rep).unwrap();
        for k in 0..4 {
            assert!((j[k] - b.j[k]).abs() < 1e-12);
        }
        for k in 0..6 {
            assert!((s[k] - b.s[k]).abs() < 1e-12);
        }
        let report = reconstruct_continuous(&data, &rep).unwrap();
        assert!(report.distance_to(&psi) < 1e-10);
    }

    #[test]
    fn coarse_grid_degrades_without_error() {
        let rep = make_representation(RepKind::Majorana).unwrap();
        let psi = DiracSpinor::random_normalized(&mut ChaCha8Rng::seed_from_u64(61));
        let mut errors = Vec::new();
        for n in [2usize, 3, 4, 12] {
            let data = simulate_dataset(&psi, Protocol::ContinuousGrid { n_theta: n, n_phi: 2 * n }, &ShotModel::Exact)
                .unwrap();
            let report = reconstruct_continuous(&data, &rep).unwrap();
            errors.push(report.distance_to(&psi));
        }
        assert!(errors[0] > 1e-4, "{errors:?}");
        assert!(errors[3] < 1e-8, "{errors:?}");
    }

    #[test]
    fn missing_frames() {
        let psi = DiracSpinor::basis(0);
        let data = simulate_dataset(&psi, Protocol::ContinuousGrid { n_theta: 4, n_phi: 4 }, &ShotModel::Exact).unwrap();
        let label = data.records[5].record.frame.clone();
        assert!(matches!(continuous_covariants(&data.without_frame(&label)), Err(Error::GridMismatch(_))));
    }
}
