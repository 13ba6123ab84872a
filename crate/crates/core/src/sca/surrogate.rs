//! Affine lower bound of the position covariance and the convex upper bound
//! of the geometry factor built from it.

use nalgebra::{Matrix2, Matrix3, Matrix3x2, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{apv_covariance, cross_covariance, AngleVector};

/// `R_p B R' + R B R_p' - R_p B R_p'`: the linearization of `U` at `R_p`.
/// It is tight at `R = R_p` and never exceeds `U(R)` in the PSD order.
pub fn surrogate_covariance(r: &[Vector3<f64>], r_prev: &[Vector3<f64>]) -> Result<Matrix3<f64>> {
    if r.len() != r_prev.len() || r.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "trajectories with {} and {} samples",
            r.len(),
            r_prev.len()
        )));
    }
    let c = cross_covariance(r_prev, r);
    Ok(c + c.transpose() - apv_covariance(r_prev).matrix())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateValue {
    /// `Tr((Phi' U_bar Phi)^-1)`, `+inf` outside the positive definite cone.
    pub value: f64,
    /// Gradient with respect to each position. When `value` is infinite this
    /// is minus the gradient of the smallest eigenvalue of `Phi' U_bar Phi`,
    /// so a step along `-gradient` heads back towards the domain.
    pub gradient: Vec<Vector3<f64>>,
}

/// Convex majorizer of the geometry factor at `chi` and its gradient in `R`.
pub fn surrogate_objective(
    r: &[Vector3<f64>],
    r_prev: &[Vector3<f64>],
    chi: AngleVector,
) -> Result<SurrogateValue> {
    let u_bar = surrogate_covariance(r, r_prev)?;
    let frame = chi.tangent_frame();
    let phi = Matrix3x2::from_columns(&[frame.f, frame.g]);
    let m: Matrix2<f64> = phi.transpose() * u_bar * phi;
    let m = (m + m.transpose()) * 0.5;
    let n = r_prev.len() as f64;
    let mean = r_prev.iter().sum::<Vector3<f64>>() / n;
    let pd = m[(0, 0)] > 0.0 && m.determinant() > 0.0;
    let (value, p) = match m.try_inverse().filter(|_| pd) {
        Some(k) => (k.trace(), phi * k * k * phi.transpose()),
        None => {
            let eig = SymmetricEigen::new(m);
            let i = eig.eigenvalues.imin();
            let v = phi * eig.eigenvectors.column(i);
            (f64::INFINITY, -(v * v.transpose()))
        }
    };
    let gradient = r_prev
        .iter()
        .map(|rp| p * (rp - mean) * (-2.0 / n))
        .collect();
    Ok(SurrogateValue { value, gradient })
}
