//! Small dense complex matrix helpers on top of `nalgebra`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat4 = Matrix4<C64>;
pub type CVec4 = Vector4<C64>;
pub type RMat4 = Matrix4<f64>;
pub type CMat2 = Matrix2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Pauli matrices `σ₀ = I, σ₁, σ₂, σ₃`.
pub fn pauli() -> [CMat2; 4] {
    [
        CMat2::identity(),
        CMat2::new(ZERO, ONE, ONE, ZERO),
        CMat2::new(ZERO, -I, I, ZERO),
        CMat2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// Assembles `[[a, b], [c, d]]` from 2×2 blocks.
pub fn blocks(a: &CMat2, b: &CMat2, c: &CMat2, d: &CMat2) -> CMat4 {
    let mut m = CMat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(d);
    m
}

pub fn max_abs(m: &CMat4) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat4, b: &CMat4) -> f64 {
    max_abs(&(a - b))
}

pub fn real_max_abs(m: &RMat4) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// `‖U†U − I‖` elementwise.
pub fn unitarity_residual(u: &CMat4) -> f64 {
    max_abs_diff(&(u.adjoint() * u), &CMat4::identity())
}

pub fn to_complex(m: &RMat4) -> CMat4 {
    m.map(|x| C64::new(x, 0.0))
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix, with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> CMat4 {
    let g = CMat4::from_fn(|_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..4 {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..4 {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Serde adapter: a 4×4 complex matrix as a row-major array of `[re, im]` pairs.
pub mod serde_cmat4 {
    use super::{CMat4, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat4, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..4)
            .map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat4, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(serde::de::Error::custom("expected a 4x4 array of [re, im] pairs"));
        }
        Ok(CMat4::from_fn(|i, j| C64::new(rows[i][j][0], rows[i][j][1])))
    }
}

/// Dense real least squares `min ‖a x − b‖` via Householder QR plus one step
/// of iterative refinement. `None` when `a` has (numerically) dependent columns.
pub fn least_squares(a: &nalgebra::DMatrix<f64>, b: &nalgebra::DVector<f64>) -> Option<nalgebra::DVector<f64>> {
    if a.nrows() < a.ncols() {
        return None;
    }
    let qr = a.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let r_max = r.diagonal().amax();
    if r_max == 0.0 || r.diagonal().iter().any(|d| d.abs() <= 1e-12 * r_max) {
        return None;
    }
    let solve = |rhs: &nalgebra::DVector<f64>| r.solve_upper_triangular(&(q.transpose() * rhs));
    let mut x = solve(b)?;
    x += solve(&(b - a * &x))?;
    Some(x)
}
