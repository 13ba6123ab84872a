//! Second-moment statistics of antenna position samples.
//!
//! `U = R B R^T` with `B = I/N - 11^T/N^2` is the covariance of the position
//! coordinates. `B` is never formed; everything here runs in `O(N)`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};

use super::trajectory::Positions;

/// Symmetric PSD 3x3 covariance of position samples (m^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix3<f64>);

impl CovarianceMatrix {
    /// Wraps `u`, symmetrizing it. Callers are responsible for PSD-ness.
    pub fn new(u: Matrix3<f64>) -> Self {
        Self((u + u.transpose()) * 0.5)
    }

    pub fn isotropic(tau: f64) -> Self {
        Self(Matrix3::identity() * tau)
    }

    pub fn from_diagonal(d: Vector3<f64>) -> Self {
        Self(Matrix3::from_diagonal(&d))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vector3<f64> {
        let mut ev = SymmetricEigen::new(self.0).eigenvalues;
        ev.as_mut_slice().sort_by(f64::total_cmp);
        ev
    }

    /// `a^T U b`.
    pub fn form(&self, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        a.dot(&(self.0 * b))
    }

    /// `Q U Q^T`: the covariance of the rotated samples `Q r_n`.
    pub fn rotated(&self, q: &Matrix3<f64>) -> Self {
        Self::new(q * self.0 * q.transpose())
    }

    /// Upper-left 2x2 block.
    pub fn planar_block(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }
}

/// Covariance of the sample positions (centered two-pass form).
pub fn apv_covariance<P: Positions + ?Sized>(samples: &P) -> CovarianceMatrix {
    let pts = samples.positions();
    let n = pts.len() as f64;
    let mean = pts.iter().sum::<Vector3<f64>>() / n;
    let mut u = Matrix3::zeros();
    for p in pts {
        let d = p - mean;
        u += d * d.transpose();
    }
    CovarianceMatrix::new(u / n)
}

/// Covariance via the quadratic form `R B R^T`, expanded as raw moments
/// `N^-1 sum r r^T - mu mu^T`.
pub fn apv_covariance_quadratic<P: Positions + ?Sized>(samples: &P) -> CovarianceMatrix {
    let pts = samples.positions();
    let n = pts.len() as f64;
    let mut second = Matrix3::zeros();
    let mut sum = Vector3::zeros();
    for p in pts {
        second += p * p.transpose();
        sum += p;
    }
    let mean = sum / n;
    CovarianceMatrix::new(second / n - mean * mean.transpose())
}

/// Cross-covariance `X B Y^T` of two equally long sample sets.
pub fn cross_covariance(x: &[Vector3<f64>], y: &[Vector3<f64>]) -> Matrix3<f64> {
    assert_eq!(x.len(), y.len(), "cross-covariance needs matching lengths");
    let n = x.len() as f64;
    let mx = x.iter().sum::<Vector3<f64>>() / n;
    let my = y.iter().sum::<Vector3<f64>>() / n;
    let mut c = Matrix3::zeros();
    for (a, b) in x.iter().zip(y) {
        c += (a - mx) * (b - my).transpose();
    }
    c / n
}
