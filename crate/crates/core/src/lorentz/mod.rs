//! Restricted Lorentz frames, their spin lifts and the tensor action on
//! bilinear covariants.
//!
//! Frames are *passive*: `Λ` maps the coordinates of a vector in the old
//! frame to its coordinates in the new one. A rotation by `θ` about `n`
//! therefore has spatial block `R(n, θ)ᵀ`, and a boost of rapidity `χ` along
//! `d` has `Λ⁰ⱼ = −sinh χ dⱼ`. With this choice
//!
//! ```text
//! J₃ = J₂^(Rx)    J₁ = −J₂^(Rz)    S₃₁ = −S₁₂^(Rx)
//! S₀₃ = −S₀₁^(Ry)  S₀₂ = S₀₁^(Rz)   S₂₃ = S₁₂^(Ry)
//! ```
//!
//! hold for the quarter turns `Rx`, `Ry`, `Rz`.

mod label;
mod vector;

pub use vector::{discrete_vector_recon, kernel_vector_recon, sample_directions, DirectionSample};

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::clifford::{metric, GammaRep, RepKind, S_PAIRS};
use crate::error::{Error, Result};
use crate::linalg::{CMat4, RMat4, C64};
use crate::spinor::{BilinearSet, DiracSpinor};
use crate::tol;

const G: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Which axis of the new frame a direction frame aligns with `n(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DirectionChannel {
    /// `e₃′ = n`
    E3,
    /// `e₁′ = n`
    E1,
    /// `e₂′ = n`
    E2,
}

impl DirectionChannel {
    pub const ALL: [DirectionChannel; 3] = [DirectionChannel::E3, DirectionChannel::E1, DirectionChannel::E2];

    pub fn label_head(self) -> &'static str {
        match self {
            DirectionChannel::E3 => "dir",
            DirectionChannel::E1 => "dir1",
            DirectionChannel::E2 => "dir2",
        }
    }
}

/// A restricted Lorentz transformation `Λ^μ_ν`.
///
/// `factors` holds generators `X₁, …, X_n` with `Λ = exp(X₁)⋯exp(X_n)`; the
/// spin lift exponentiates each one, which keeps track of the double cover
/// (a full turn lifts to `−I`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzFrame {
    pub lambda: RMat4,
    pub label: String,
    pub factors: Vec<RMat4>,
}

fn unit_axis(axis: [f64; 3]) -> Result<Vector3<f64>> {
    let v = Vector3::from(axis);
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
        return Err(Error::BadAxis { norm });
    }
    Ok(v)
}

fn cross_matrix(n: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -n.z, n.y, n.z, 0.0, -n.x, -n.y, n.x, 0.0)
}

fn rotation_generator(n: &Vector3<f64>, angle: f64) -> RMat4 {
    let mut x = RMat4::zeros();
    x.fixed_view_mut::<3, 3>(1, 1).copy_from(&(cross_matrix(n) * -angle));
    x
}

fn boost_generator(d: &Vector3<f64>, rapidity: f64) -> RMat4 {
    let mut x = RMat4::zeros();
    for j in 0..3 {
        x[(0, j + 1)] = -rapidity * d[j];
        x[(j + 1, 0)] = -rapidity * d[j];
    }
    x
}

fn rotation_matrix(n: &Vector3<f64>, angle: f64) -> RMat4 {
    let active = Rotation3::from_axis_angle(&Unit::new_unchecked(*n), angle);
    let mut m = RMat4::identity();
    m.fixed_view_mut::<3, 3>(1, 1).copy_from(&active.matrix().transpose());
    m
}

fn boost_matrix(d: &Vector3<f64>, rapidity: f64) -> RMat4 {
    let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
    let mut m = RMat4::identity();
    m[(0, 0)] = ch;
    for i in 0..3 {
        m[(0, i + 1)] = -sh * d[i];
        m[(i + 1, 0)] = -sh * d[i];
        for j in 0..3 {
            m[(i + 1, j + 1)] += (ch - 1.0) * d[i] * d[j];
        }
    }
    m
}

/// Deviation of `ΛᵀgΛ` from `g`, relative to `max(1, ‖Λ‖²)`.
pub fn metric_residual(lambda: &RMat4) -> f64 {
    let g = RMat4::from_diagonal(&G.into());
    let r = lambda.transpose() * g * lambda - g;
    let scale = lambda.iter().fold(0.0f64, |a, x| a.max(x.abs())).powi(2).max(1.0);
    r.iter().fold(0.0f64, |a, x| a.max(x.abs())) / scale
}

/// Checks `ΛᵀgΛ = g`, `det Λ = +1` and `Λ⁰₀ ≥ 1`.
pub fn validate(lambda: &RMat4) -> Result<()> {
    if lambda.iter().any(|x| !x.is_finite()) {
        return Err(Error::NotConnected("non-finite entries".into()));
    }
    let r = metric_residual(lambda);
    if r > tol::FRAME {
        return Err(Error::NotConnected(format!("ΛᵀgΛ − g = {r:.3e}")));
    }
    if lambda.determinant() <= 0.0 {
        return Err(Error::NotConnected("det Λ = −1".into()));
    }
    if lambda[(0, 0)] < 1.0 - 1e-12 {
        return Err(Error::NotConnected(format!("Λ⁰₀ = {}", lambda[(0, 0)])));
    }
    Ok(())
}

impl LorentzFrame {
    pub fn identity() -> Self {
        LorentzFrame { lambda: RMat4::identity(), label: "I".into(), factors: Vec::new() }
    }

    /// Passive rotation by `angle` about the unit vector `axis`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = unit_axis(axis)?;
        Ok(LorentzFrame {
            lambda: rotation_matrix(&n, angle),
            label: format!("rot({},{},{};{})", axis[0], axis[1], axis[2], angle),
            factors: vec![rotation_generator(&n, angle)],
        })
    }

    /// Pure boost of the given rapidity along the unit vector `direction`.
    pub fn boost(direction: [f64; 3], rapidity: f64) -> Result<Self> {
        let d = unit_axis(direction)?;
        Ok(LorentzFrame {
            lambda: boost_matrix(&d, rapidity),
            label: format!("boost({},{},{};{})", direction[0], direction[1], direction[2], rapidity),
            factors: vec![boost_generator(&d, rapidity)],
        })
    }

    fn quarter(axis: [f64; 3], label: &str) -> Self {
        let mut f = Self::rotation(axis, FRAC_PI_2).expect("unit axis");
        f.label = label.into();
        f
    }

    pub fn rx() -> Self {
        Self::quarter([1.0, 0.0, 0.0], "Rx")
    }

    pub fn ry() -> Self {
        Self::quarter([0.0, 1.0, 0.0], "Ry")
    }

    pub fn rz() -> Self {
        Self::quarter([0.0, 0.0, 1.0], "Rz")
    }

    /// Frame whose chosen axis (`e₃′`, `e₁′` or `e₂′`) points along
    /// `n = (sin θ cos φ, sin θ sin φ, cos θ)`. The `e₃′` frame is the passive
    /// form of `Rz(φ)Ry(θ)`; the others append a quarter turn.
    pub fn direction(theta: f64, phi: f64, channel: DirectionChannel) -> Self {
        let y = [0.0, 1.0, 0.0];
        let z = [0.0, 0.0, 1.0];
        let base = Self::rotation(y, theta)
            .unwrap()
            .compose(&Self::rotation(z, phi).unwrap());
        let mut f = match channel {
            DirectionChannel::E3 => base,
            DirectionChannel::E2 => Self::rotation([1.0, 0.0, 0.0], FRAC_PI_2).unwrap().compose(&base),
            DirectionChannel::E1 => Self::rotation(y, -FRAC_PI_2).unwrap().compose(&base),
        };
        f.label = format!("{}({},{})", channel.label_head(), theta, phi);
        f
    }

    /// Builds a frame from a bare matrix. The generator factors come from the
    /// polar decomposition `Λ = B·R`, which fixes the lift up to sign.
    pub fn from_matrix(lambda: RMat4, label: impl Into<String>) -> Result<Self> {
        validate(&lambda)?;
        let ch = lambda[(0, 0)].max(1.0);
        let sh_d = Vector3::new(-lambda[(1, 0)], -lambda[(2, 0)], -lambda[(3, 0)]);
        let rapidity = ch.acosh();
        let mut factors = Vec::new();
        let boost = if sh_d.norm() > 1e-15 {
            let d = sh_d.normalize();
            factors.push(boost_generator(&d, rapidity));
            boost_matrix(&d, rapidity)
        } else {
            RMat4::identity()
        };
        let boost_inv = RMat4::from_diagonal(&G.into()) * boost * RMat4::from_diagonal(&G.into());
        let rot = boost_inv * lambda;
        let spatial: Matrix3<f64> = rot.fixed_view::<3, 3>(1, 1).into();
        let active = Rotation3::from_matrix(&spatial.transpose());
        if let Some((axis, angle)) = active.axis_angle() {
            factors.push(rotation_generator(&axis.into_inner(), angle));
        }
        Ok(LorentzFrame { lambda, label: label.into(), factors })
    }

    /// `self ∘ other`: the frame reached by applying `other` first, then
    /// `self` (`Λ = Λ_self Λ_other`).
    pub fn compose(&self, other: &LorentzFrame) -> LorentzFrame {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        LorentzFrame {
            lambda: self.lambda * other.lambda,
            label: format!("{}*{}", self.label, other.label),
            factors,
        }
    }

    pub fn inverse(&self) -> LorentzFrame {
        let g = RMat4::from_diagonal(&G.into());
        LorentzFrame {
            lambda: g * self.lambda.transpose() * g,
            label: format!("inv({})", self.label),
            factors: self.factors.iter().rev().map(|x| -x).collect(),
        }
    }

    pub fn is_rotation(&self) -> bool {
        (self.lambda[(0, 0)] - 1.0).abs() < 1e-12
    }

    pub fn validate(&self) -> Result<()> {
        validate(&self.lambda)
    }

    /// Uniform random axis, angle uniform in `[0, 2π)`.
    pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let axis = random_unit(rng);
        let angle = rng.sample(Uniform::new(0.0, std::f64::consts::TAU).unwrap());
        Self::rotation(axis, angle).unwrap()
    }

    /// Uniform random direction, rapidity uniform in `[-max, max]`.
    pub fn random_boost<R: Rng + ?Sized>(rng: &mut R, max_rapidity: f64) -> Self {
        let d = random_unit(rng);
        let chi = rng.sample(Uniform::new_inclusive(-max_rapidity, max_rapidity).unwrap());
        Self::boost(d, chi).unwrap()
    }
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = Vector3::<f64>::from_fn(|_, _| rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            // renormalize twice so the BadAxis check (1e−12) never trips
            let u = v / n;
            let u = u / u.norm();
            return [u.x, u.y, u.z];
        }
    }
}

impl std::str::FromStr for LorentzFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        label::parse(s)
    }
}

/// A frame together with its spin lift `L` in a given representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinorLift {
    #[serde(with = "crate::linalg::serde_cmat4")]
    pub l: CMat4,
    pub frame: LorentzFrame,
    pub rep_kind: RepKind,
}

impl SpinorLift {
    pub fn apply(&self, psi: &DiracSpinor) -> DiracSpinor {
        psi.apply(&self.l)
    }

    /// `‖L†L − I‖`, zero exactly for rotations.
    pub fn unitarity_residual(&self) -> f64 {
        crate::linalg::unitarity_residual(&self.l)
    }

    /// `‖L̄L − I‖` with `L̄ = γ⁰L†γ⁰`.
    pub fn dirac_unitarity_residual(&self, rep: &GammaRep) -> f64 {
        let bar = crate::clifford::dirac_bar(&self.l, rep);
        crate::linalg::max_abs_diff(&(bar * self.l), &CMat4::identity())
    }
}

/// `¼ ω_{αβ} γ^α γ^β` with `ω_{αβ} = g_{αλ} X^λ_β`.
fn spin_generator(x: &RMat4, rep: &GammaRep) -> CMat4 {
    let mut m = CMat4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            let omega = metric(a) * x[(a, b)];
            if omega != 0.0 {
                m += rep.gamma(a) * rep.gamma(b) * C64::new(0.25 * omega, 0.0);
            }
        }
    }
    m
}

/// `L = Π exp(¼ ω_{αβ} γ^α γ^β)` over the frame's generator factors, so that
/// `L⁻¹γ^μL = Λ^μ_ν γ^ν`.
pub fn spinor_lift(frame: &LorentzFrame, rep: &GammaRep) -> Result<SpinorLift> {
    frame.validate()?;
    let mut l = CMat4::identity();
    for x in &frame.factors {
        l *= spin_generator(x, rep).exp();
    }
    Ok(SpinorLift { l, frame: frame.clone(), rep_kind: rep.kind() })
}

/// `max_μ ‖L⁻¹γ^μL − Λ^μ_ν γ^ν‖`, entrywise maximum.
pub fn lift_check(lift: &SpinorLift, rep: &GammaRep) -> Result<f64> {
    let inv = lift.l.try_inverse().ok_or(Error::Singular)?;
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular);
    }
    let lambda = &lift.frame.lambda;
    let mut worst = 0.0f64;
    for mu in 0..4 {
        let lhs = inv * rep.gamma(mu) * lift.l;
        let mut rhs = CMat4::zeros();
        for nu in 0..4 {
            rhs += rep.gamma(nu) * C64::new(lambda[(mu, nu)], 0.0);
        }
        worst = worst.max(crate::linalg::max_abs_diff(&lhs, &rhs));
    }
    Ok(worst)
}

/// Covariants in the new frame: scalars fixed, `J`, `K` with one `Λ`, `S`
/// with two.
pub fn transform_bilinears(b: &BilinearSet, frame: &LorentzFrame) -> BilinearSet {
    let l = &frame.lambda;
    let vec = |v: &[f64; 4]| -> [f64; 4] {
        std::array::from_fn(|mu| (0..4).map(|nu| l[(mu, nu)] * v[nu]).sum())
    };
    let s = b.s_tensor();
    let s_new: [f64; 6] = std::array::from_fn(|slot| {
        let (mu, nu) = S_PAIRS[slot];
        let mut acc = 0.0;
        for a in 0..4 {
            for c in 0..4 {
                acc += l[(mu, a)] * l[(nu, c)] * s[a][c];
            }
        }
        acc
    });
    BilinearSet { omega1: b.omega1, j: vec(&b.j), s: s_new, k: vec(&b.k), omega2: b.omega2 }
}
