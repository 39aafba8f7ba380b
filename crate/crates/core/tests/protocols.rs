use dirac_tomography::prelude::*;
use dirac_tomography::reconstruct::{representation_feasibility_for, Verdict};
use dirac_tomography::tomography::MarginalRecord;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn majorana() -> GammaRep {
    make_representation(RepKind::Majorana).unwrap()
}

#[test]
fn discrete_majorana_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let psi = DiracSpinor::random_normalized(&mut rng);
        let data = simulate_dataset(&psi, Protocol::DiscreteMajorana, &ShotModel::Exact).unwrap();
        let report = reconstruct_majorana(&data, &majorana()).unwrap();
        assert!(report.distance_to(&psi) < 1e-9);
        assert!(report.marginal_residuals.iter().all(|&r| r < 1e-10));
        let (j, s) = recover_js_majorana(&data).unwrap();
        let b = bilinears(&psi, &majorana()).unwrap();
        for mu in 0..4 {
            assert!((j[mu] - b.j[mu]).abs() < 1e-11);
        }
        for i in 0..6 {
            assert!((s[i] - b.s[i]).abs() < 1e-11);
        }
    }
}

#[test]
fn discrete_majorana_shot_noise() {
    let psi = DiracSpinor::random_normalized(&mut ChaCha8Rng::seed_from_u64(2));
    let shots = ShotModel::Shots { n: 1_000_000, seed: 9, trial: 0 };
    let data = simulate_dataset(&psi, Protocol::DiscreteMajorana, &shots).unwrap();
    let report = reconstruct_majorana(&data, &majorana()).unwrap();
    let d = report.distance_to(&psi);
    assert!(d > 1e-5 && d < 2e-2, "{d}");
    // constraints hold only up to the sampling error
    let c = constraint_residuals(&data).unwrap();
    assert!(c.iter().all(|r| r.abs() < 1e-2));
}

#[test]
fn corrupted_marginal_breaks_constraints() {
    let psi = DiracSpinor::random_normalized(&mut ChaCha8Rng::seed_from_u64(3));
    let mut data = simulate_dataset(&psi, Protocol::DiscreteMajorana, &ShotModel::Exact).unwrap();
    assert!(constraint_residuals(&data).unwrap().iter().all(|r| r.abs() < 1e-11));
    data.get_mut(RepKind::Majorana, "Rx").unwrap().w[0] += 0.1;
    assert!(constraint_residuals(&data).unwrap().iter().any(|r| r.abs() > 0.05));
}

#[test]
fn missing_frames_are_reported() {
    let psi = DiracSpinor::basis(0);
    let data = simulate_dataset(&psi, Protocol::DiscreteMajorana, &ShotModel::Exact).unwrap();
    let err = reconstruct_majorana(&data.without_frame("Ry"), &majorana()).unwrap_err();
    assert!(matches!(err, Error::MissingFrame(_)), "{err}");

    let data = simulate_dataset(&psi, Protocol::CombinedStChiral, &ShotModel::Exact).unwrap();
    let mut only_standard = MarginalDataset::new(Protocol::CombinedStChiral);
    for r in data.records.iter().filter(|r| r.rep_kind == RepKind::Standard) {
        only_standard.push(r.rep_kind, r.record.clone());
    }
    assert!(matches!(reconstruct_combined(&only_standard), Err(Error::MissingFrame(_))));
}

#[test]
fn combined_protocol_is_unique_for_massive_spinors() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let st = make_representation(RepKind::Standard).unwrap();
    let mut checked = 0;
    while checked < 50 {
        let psi = DiracSpinor::random_normalized(&mut rng);
        let b = bilinears(&psi, &st).unwrap();
        if b.omega1 * b.omega1 + b.omega2 * b.omega2 <= 0.1 {
            continue;
        }
        let data = simulate_dataset(&psi, Protocol::CombinedStChiral, &ShotModel::Exact).unwrap();
        let report = reconstruct_combined(&data).unwrap();
        assert!(!report.ambiguity_flag);
        assert_eq!(report.candidates.len(), 1);
        assert!(report.distance_to(&psi) < 1e-9);
        checked += 1;
    }
}

#[test]
fn continuous_protocol_exact() {
    let psi = DiracSpinor::random_normalized(&mut ChaCha8Rng::seed_from_u64(5));
    let data = simulate_dataset(&psi, Protocol::DEFAULT_GRID, &ShotModel::Exact).unwrap();
    let report = reconstruct_continuous(&data, &majorana()).unwrap();
    assert!(report.distance_to(&psi) < 1e-8);
}

#[test]
fn continuous_uniform_marginals_have_no_vector_part() {
    let protocol = Protocol::ContinuousGrid { n_theta: 8, n_phi: 16 };
    let mut data = MarginalDataset::new(protocol);
    for f in frame_set(protocol).unwrap() {
        data.push(RepKind::Majorana, MarginalRecord::exact(f.label, [0.25; 4]));
    }
    let (j, s) = dirac_tomography::reconstruct::continuous_covariants(&data).unwrap();
    assert!((j[0] - 1.0).abs() < 1e-12);
    assert!(j[1..].iter().chain(s.iter()).all(|x| x.abs() < 1e-12));
}

#[test]
fn coarse_grid_degrades_without_error() {
    let psi = DiracSpinor::random_normalized(&mut ChaCha8Rng::seed_from_u64(6));
    let protocol = Protocol::ContinuousGrid { n_theta: 4, n_phi: 4 };
    let data = simulate_dataset(&psi, protocol, &ShotModel::Exact).unwrap();
    let report = reconstruct_continuous(&data, &majorana()).unwrap();
    assert!(!report.candidates.is_empty());
}

#[test]
fn feasibility_table() {
    let rank = |k, g| representation_feasibility(k, g).unwrap();
    let r = rank(RepKind::Majorana, Group::Rotations);
    assert_eq!((r.span_rank, r.verdict), (7, Verdict::Complete));
    let r = rank(RepKind::Standard, Group::Rotations);
    assert!(r.span_rank < 7 && r.verdict == Verdict::Incomplete);
    assert_eq!(rank(RepKind::Standard, Group::FullRestrictedLorentz).span_rank, 7);
    let r = rank(RepKind::Chiral, Group::FullRestrictedLorentz);
    assert!(r.span_rank <= 6 && r.verdict == Verdict::Incomplete);

    let weyl = representation_feasibility_for(RepKind::Chiral, Group::FullRestrictedLorentz, SpinorClass::Weyl, 3)
        .unwrap();
    assert_eq!(weyl.span_rank, weyl.max_rank);
    assert_eq!(weyl.verdict, Verdict::Complete);
}

#[test]
fn feasibility_is_seed_independent() {
    for seed in [0, 1, 99] {
        for kind in [RepKind::Majorana, RepKind::Standard, RepKind::Chiral] {
            for group in Group::ALL {
                let a = representation_feasibility_for(kind, group, SpinorClass::Generic, seed).unwrap();
                let b = representation_feasibility(kind, group).unwrap();
                assert_eq!((a.span_rank, a.verdict), (b.span_rank, b.verdict));
            }
        }
    }
}

#[test]
fn standard_rotations_are_ambiguous() {
    let psi = DiracSpinor::random_normalized(&mut ChaCha8Rng::seed_from_u64(7));
    let report = ambiguity_probe(&psi, RepKind::Standard, Group::Rotations).unwrap();
    let found = report.found.expect("relative-phase partner");
    assert!(found.phase_distance > 0.1 && found.marginal_residual < 1e-9);
}

#[test]
fn dataset_csv_is_deterministic() {
    let psi = DiracSpinor::random_normalized(&mut ChaCha8Rng::seed_from_u64(8));
    let shots = ShotModel::Shots { n: 1000, seed: 5, trial: 2 };
    let write = || {
        let data = simulate_dataset(&psi, Protocol::CombinedStChiral, &shots).unwrap();
        let mut out = Vec::new();
        data.write_csv(&mut out).unwrap();
        out
    };
    let a = write();
    assert_eq!(a, write());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("rep,frame,k,w,N"));
    assert_eq!(text.lines().count(), 1 + 2 * 4 * 4);
}
