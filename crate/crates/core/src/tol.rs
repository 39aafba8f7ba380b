//! Numerical tolerances shared across the crate.

/// Algebraic identities on 4×4 double-precision products.
pub const ALG: f64 = 1e-12;

/// Relative tolerance for Fierz residuals, after scaling by `max(1, ‖ψ‖⁴)`.
pub const FIERZ: f64 = 1e-10;

/// Marginal reproduction on exact data.
pub const RECON: f64 = 1e-10;

/// Relative threshold on `J_μJ^μ` below which a covariant set is null.
pub const NULL: f64 = 1e-10;

/// Relative threshold on `⟨η̄|ρ|η⟩` below which an anchor is rejected.
pub const ANCHOR: f64 = 1e-10;

/// Imaginary parts of raw covariant traces above this are an error.
pub const NON_REAL: f64 = 1e-9;

/// Lift relation `L⁻¹γ^μL = Λ^μ_ν γ^ν`.
pub const LIFT: f64 = 1e-11;

/// Restricted-group membership of a frame matrix, relative to `max(1, ‖Λ‖²)`.
pub const FRAME: f64 = 1e-12;

/// Marginal reproduction tolerance for shot data with `n` shots per frame.
pub fn shots(n: u64) -> f64 {
    3.0 / (n as f64).sqrt()
}
