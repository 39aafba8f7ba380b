//! Reconstruction of a spatial 3-vector from its projections `ν(θ, φ) = n·v`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::SphereQuadrature;

/// Projection `ν` of a vector onto the direction `(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionSample {
    pub theta: f64,
    pub phi: f64,
    pub nu: f64,
}

/// Inputs are `ν(π/2, 0)`, `ν(π/2, π/2)` and `ν(0, 0)`: the projections
/// onto the coordinate axes are the components.
pub fn discrete_vector_recon(nu_x: f64, nu_y: f64, nu_z: f64) -> [f64; 3] {
    [nu_x, nu_y, nu_z]
}

/// Unit vector `n(θ, φ)`.
pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Samples `ν = n·v` on every node of the rule.
pub fn sample_directions(v: [f64; 3], quadrature: &SphereQuadrature) -> Vec<DirectionSample> {
    quadrature
        .nodes()
        .map(|node| {
            let n = direction(node.theta, node.phi);
            DirectionSample { theta: node.theta, phi: node.phi, nu: n[0] * v[0] + n[1] * v[1] + n[2] * v[2] }
        })
        .collect()
}

/// `∫ dΩ A(θ, φ) ν(θ, φ)` with `A = (2/π² cos φ, 2/π² sin φ, 3/(4π) cos θ)`.
///
/// Samples must be given on the nodes of `quadrature`, in its order.
pub fn kernel_vector_recon(samples: &[DirectionSample], quadrature: &SphereQuadrature) -> Result<[f64; 3]> {
    if samples.len() != quadrature.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a {}-node grid",
            samples.len(),
            quadrature.len()
        )));
    }
    let a_xy = 2.0 / (PI * PI);
    let a_z = 3.0 / (4.0 * PI);
    let mut out = [0.0; 3];
    for (i, (s, node)) in samples.iter().zip(quadrature.nodes()).enumerate() {
        if (s.theta - node.theta).abs() > 1e-12 || (s.phi - node.phi).abs() > 1e-12 {
            return Err(Error::GridMismatch(format!(
                "sample {i} at ({}, {}) is off node ({}, {})",
                s.theta, s.phi, node.theta, node.phi
            )));
        }
        let wn = node.weight * s.nu;
        out[0] += a_xy * s.phi.cos() * wn;
        out[1] += a_xy * s.phi.sin() * wn;
        out[2] += a_z * s.theta.cos() * wn;
    }
    Ok(out)
}
