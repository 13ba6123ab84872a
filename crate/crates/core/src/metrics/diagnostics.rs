use crate::error::{Error, Result};
use crate::geometry::CovarianceMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyReport {
    pub is_isotropic: bool,
    /// `Tr(U) / 3`.
    pub tau: f64,
    /// `||U - tau I||_F / tau`.
    pub deviation: f64,
}

/// How far `U` is from a multiple of the identity. Only an isotropic
/// covariance gives a bound that is the same in every direction.
pub fn isotropy_report(u: &CovarianceMatrix, tol: f64) -> IsotropyReport {
    let tau = u.trace() / 3.0;
    if !(tau > 0.0) {
        return IsotropyReport {
            is_isotropic: false,
            tau,
            deviation: f64::INFINITY,
        };
    }
    let deviation = (u.matrix() - nalgebra::Matrix3::identity() * tau).norm() / tau;
    IsotropyReport {
        is_isotropic: deviation <= tol,
        tau,
        deviation,
    }
}

/// `F(theta, phi) = a / cos^2(theta) + b` for a trajectory confined to the
/// `x`-`y` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarDecomposition {
    pub a: f64,
    pub b: f64,
}

impl PlanarDecomposition {
    pub fn reconstruct(&self, theta: f64) -> f64 {
        let c2 = theta.cos().powi(2);
        if c2 == 0.0 {
            f64::INFINITY
        } else {
            self.a / c2 + self.b
        }
    }
}

/// Relative size of the out-of-plane entries tolerated as rounding noise.
pub const PLANAR_TOL: f64 = 1e-12;

/// Splits the geometry factor of a planar covariance into its elevation-free
/// coefficients at azimuth `phi`.
pub fn planar_decomposition(u: &CovarianceMatrix, phi: f64) -> Result<PlanarDecomposition> {
    let m = u.matrix();
    let off_plane = m[(0, 2)].abs().max(m[(1, 2)].abs()).max(m[(2, 2)].abs());
    if off_plane > PLANAR_TOL * u.trace().abs() || u.trace() <= 0.0 {
        return Err(Error::NotPlanar(off_plane));
    }
    let (vx, vy, cxy) = (m[(0, 0)], m[(1, 1)], m[(0, 1)]);
    let (s, c) = phi.sin_cos();
    let u_gg = s * s * vx + c * c * vy - 2.0 * s * c * cxy;
    let u_ff = c * c * vx + s * s * vy + 2.0 * s * c * cxy;
    let u_fg = -s * c * vx + s * c * vy + (c * c - s * s) * cxy;
    let d = u_ff * u_gg - u_fg * u_fg;
    if !(d > 0.0) {
        return Ok(PlanarDecomposition {
            a: f64::INFINITY,
            b: f64::INFINITY,
        });
    }
    Ok(PlanarDecomposition {
        a: u_gg / d,
        b: u_ff / d,
    })
}
