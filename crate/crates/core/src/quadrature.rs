//! Product quadrature on the unit sphere: Gauss–Legendre in `θ ∈ [0, π]`
//! times the trapezoid rule in `φ ∈ [0, 2π)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        let weight = 2.0 / ((1.0 - z * z) * d * d);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Product rule with `n_theta × n_phi` nodes, θ-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    pub n_theta: usize,
    pub n_phi: usize,
    theta: Vec<f64>,
    theta_weights: Vec<f64>,
}

/// One node: angles and the `dΩ` weight (the `sin θ` Jacobian included).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereNode {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
}

impl SphereQuadrature {
    pub fn gauss_trapezoid(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 2 {
            return Err(Error::InvalidInput(format!("quadrature grid {n_theta}×{n_phi} too small")));
        }
        let (x, w) = gauss_legendre(n_theta);
        Ok(SphereQuadrature {
            n_theta,
            n_phi,
            theta: x.iter().map(|x| 0.5 * PI * (x + 1.0)).collect(),
            theta_weights: w.iter().map(|w| 0.5 * PI * w).collect(),
        })
    }

    /// Scheme id, e.g. `gl32x64`.
    pub fn id(&self) -> String {
        format!("gl{}x{}", self.n_theta, self.n_phi)
    }

    pub fn from_id(id: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("unknown quadrature scheme `{id}`"));
        let rest = id.strip_prefix("gl").ok_or_else(bad)?;
        let (a, b) = rest.split_once('x').ok_or_else(bad)?;
        Self::gauss_trapezoid(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_phi as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = SphereNode> + '_ {
        let dphi = TAU / self.n_phi as f64;
        self.theta.iter().zip(&self.theta_weights).flat_map(move |(&theta, &wt)| {
            (0..self.n_phi).map(move |j| SphereNode {
                theta,
                phi: self.phi(j),
                weight: wt * theta.sin() * dphi,
            })
        })
    }

    /// `∫_{S²} f dΩ`.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.nodes().map(|n| n.weight * f(n.theta, n.phi)).sum()
    }
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        Self::gauss_trapezoid(32, 64).expect("valid default grid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rules_integrate_polynomials() {
        for n in [2, 3, 8, 32] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // exact up to degree 2n − 1
            for deg in 0..2 * n {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn sphere_area_and_moments() {
        let q = SphereQuadrature::default();
        assert_eq!(q.len(), 2048);
        assert!((q.integrate(|_, _| 1.0) - 4.0 * PI).abs() < 1e-12);
        let z2 = q.integrate(|t, _| t.cos().powi(2));
        assert!((z2 - 4.0 * PI / 3.0).abs() < 1e-12);
        let x2 = q.integrate(|t, p| (t.sin() * p.cos()).powi(2));
        assert!((x2 - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ids_round_trip() {
        let q = SphereQuadrature::from_id("gl8x16").unwrap();
        assert_eq!(q.id(), "gl8x16");
        assert!(SphereQuadrature::from_id("trap8x16").is_err());
        assert!(SphereQuadrature::gauss_trapezoid(1, 16).is_err());
    }
}
