//! Tomographic reconstruction of the internal state of a Dirac spinor.
//!
//! A Dirac spinor `ψ ∈ ℂ⁴` is probed through the four marginal probabilities
//! `w_k = |(Lψ)_k|²`, where `L` is the spin lift of a restricted Lorentz
//! transformation. The marginals are linear in the sixteen bilinear
//! covariants of `ψ`; collecting them over a set of frames recovers enough
//! covariants to complete the rest through the Fierz identities and rebuild
//! `ψ` (up to a global phase) from the operator `ρ = 4|ψ⟩⟨ψ̄|`.
//!
//! # Layout
//!
//! - [`clifford`]: gamma-matrix representations, the sixteen-element algebra
//!   basis and the Dirac-conjugate inner product.
//! - [`spinor`]: spinors, bilinear covariants, Fierz residuals and the
//!   anchor-based reconstruction of `ψ` from `ρ`.
//! - [`lorentz`]: frames of the restricted Lorentz group, their spin lifts,
//!   tensor transformation of covariants and vector reconstruction from
//!   projections.
//! - [`quadrature`]: product Gauss–Legendre × trapezoid rules on the sphere.
//! - [`tomography`]: projectors, exact and shot-sampled marginals, protocol
//!   frame sets.
//! - [`reconstruct`]: the discrete Majorana, combined standard/chiral and
//!   continuous protocols, plus feasibility and ambiguity analysis.
//!
//! # Quick start
//!
//! ```
//! use dirac_tomography::prelude::*;
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let psi = DiracSpinor::random_normalized(&mut rng);
//! let data = simulate_dataset(&psi, Protocol::DiscreteMajorana, &ShotModel::Exact).unwrap();
//! let rep = make_representation(RepKind::Majorana).unwrap();
//! let report = reconstruct_majorana(&data, &rep).unwrap();
//! let best = report
//!     .candidates
//!     .iter()
//!     .map(|c| phase_distance(c, &psi))
//!     .fold(f64::INFINITY, f64::min);
//! assert!(best < 1e-9);
//! ```

pub mod clifford;
pub mod error;
pub mod linalg;
pub mod lorentz;
pub mod quadrature;
pub mod reconstruct;
pub mod spinor;
pub mod tol;
pub mod tomography;

pub use error::{Error, Result};

/// Library version, embedded in every experiment output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Commonly used types and operations.
pub mod prelude {
    pub use crate::clifford::{
        conjugate_representation, dirac_bar, make_representation, projector_factorization_check,
        trace_inner_product, GammaBasis, GammaRep, RepKind,
    };
    pub use crate::error::{Error, Result};
    pub use crate::lorentz::{
        discrete_vector_recon, kernel_vector_recon, lift_check, spinor_lift, transform_bilinears,
        DirectionSample, LorentzFrame, SpinorLift,
    };
    pub use crate::quadrature::SphereQuadrature;
    pub use crate::reconstruct::{
        ambiguity_probe, constraint_residuals, fierz_completion, reconstruct_combined,
        reconstruct_continuous, reconstruct_majorana, recover_js_majorana,
        representation_feasibility, simulate_dataset, FeasibilityReport, Group,
        MarginalDataset, ReconstructionReport, ShotModel, SpinorClass,
    };
    pub use crate::spinor::{
        bilinears, crawford_reconstruct, fierz_residuals, phase_distance, rho_from_bilinears,
        rho_from_spinor, BilinearSet, DiracSpinor, RhoOperator,
    };
    pub use crate::tomography::{
        frame_set, marginal_formula_check, marginals, projectors, sample_shots, MarginalRecord,
        Protocol,
    };
}
