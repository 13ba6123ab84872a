//! Closed-form Cramér–Rao bounds and the mean-square angular error bound.

use nalgebra::{Matrix2, Matrix3x2};

use super::scenario::SensingScenario;
use crate::error::{Error, Result};
use crate::geometry::{apv_covariance, AngleVector, CovarianceMatrix, Positions, TangentFrame};

/// Below this absolute value (m^4) the tangent-plane determinant counts as zero.
pub const DEGENERATE_ABS: f64 = 1e-30;
/// Determinants below this fraction of `(f'Uf + g'Ug)^2` count as zero, which
/// catches rank-deficient covariances whose determinant is pure roundoff.
pub const DEGENERATE_REL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsaebResult {
    /// `rho * F` (rad^2).
    pub msaeb: f64,
    pub crb_theta: f64,
    /// Infinite at the poles, where azimuth is meaningless but `msaeb` is not.
    pub crb_phi: f64,
    /// Geometry factor `F` (1/m^2).
    pub f_value: f64,
}

impl MsaebResult {
    fn degenerate() -> Self {
        Self {
            msaeb: f64::INFINITY,
            crb_theta: f64::INFINITY,
            crb_phi: f64::INFINITY,
            f_value: f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.msaeb.is_finite()
    }
}

/// `(f'Uf, g'Ug, f'Ug)` at `chi`.
fn tangent_moments(u: &CovarianceMatrix, frame: &TangentFrame) -> (f64, f64, f64) {
    (
        u.form(&frame.f, &frame.f),
        u.form(&frame.g, &frame.g),
        u.form(&frame.f, &frame.g),
    )
}

fn is_degenerate(uff: f64, ugg: f64, den: f64) -> bool {
    !(den > DEGENERATE_ABS && den > DEGENERATE_REL * (uff + ugg).powi(2))
}

/// From the rotated moments `var(x), var(y), cov(x, y)`.
fn bound_from_moments(uff: f64, ugg: f64, ufg: f64, sin_theta: f64, rho: f64) -> MsaebResult {
    let den = uff * ugg - ufg * ufg;
    if is_degenerate(uff, ugg, den) {
        return MsaebResult::degenerate();
    }
    let f_value = (uff + ugg) / den;
    let crb_theta = rho * ugg / den;
    let s2 = sin_theta * sin_theta;
    let crb_phi = if s2 > 0.0 {
        rho * uff / (s2 * den)
    } else {
        f64::INFINITY
    };
    MsaebResult {
        msaeb: rho * f_value,
        crb_theta,
        crb_phi,
        f_value,
    }
}

/// `F = (g'Ug + f'Uf) / ((f'Uf)(g'Ug) - (f'Ug)^2)`, or `+inf` when the
/// tangent-plane projection of `U` is singular.
pub fn geometry_factor(u: &CovarianceMatrix, chi: AngleVector) -> f64 {
    let (uff, ugg, ufg) = tangent_moments(u, &chi.tangent_frame());
    let den = uff * ugg - ufg * ufg;
    if is_degenerate(uff, ugg, den) {
        f64::INFINITY
    } else {
        (uff + ugg) / den
    }
}

/// `Tr((Phi' U Phi)^-1)` with `Phi = [f g]`, via an explicit 2x2 inverse.
pub fn geometry_factor_trace(u: &CovarianceMatrix, chi: AngleVector) -> f64 {
    let TangentFrame { f, g } = chi.tangent_frame();
    let phi = Matrix3x2::from_columns(&[f, g]);
    let m: Matrix2<f64> = phi.transpose() * u.matrix() * phi;
    let den = m.determinant();
    if is_degenerate(m[(0, 0)], m[(1, 1)], den) {
        return f64::INFINITY;
    }
    m.try_inverse().map_or(f64::INFINITY, |inv| inv.trace())
}

/// Bounds for a known covariance and scale factor `rho`.
pub fn msaeb_from_covariance(u: &CovarianceMatrix, chi: AngleVector, rho: f64) -> MsaebResult {
    let (uff, ugg, ufg) = tangent_moments(u, &chi.tangent_frame());
    bound_from_moments(uff, ugg, ufg, chi.theta().sin(), rho)
}

fn check_count<P: Positions + ?Sized>(samples: &P, scen: &SensingScenario) -> Result<()> {
    if samples.sample_count() != scen.snapshots() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples but the scenario has N = {}",
            samples.sample_count(),
            scen.snapshots()
        )));
    }
    Ok(())
}

/// CRBs of elevation and azimuth and the MSAEB for a trajectory or sample set.
///
/// Degenerate geometry gives `+inf` in every field, not an error.
pub fn msaeb<P: Positions + ?Sized>(
    samples: &P,
    chi: AngleVector,
    scen: &SensingScenario,
) -> Result<MsaebResult> {
    check_count(samples, scen)?;
    Ok(msaeb_from_covariance(&apv_covariance(samples), chi, scen.rho()))
}

/// Same bound computed in the frame where the target sits on the `z` axis.
///
/// Only the two coordinates orthogonal to `eta` enter; motion along `eta` is
/// ignored entirely.
pub fn msaeb_single_direction_rotated<P: Positions + ?Sized>(
    samples: &P,
    chi: AngleVector,
    scen: &SensingScenario,
) -> Result<MsaebResult> {
    check_count(samples, scen)?;
    let TangentFrame { f, g } = chi.tangent_frame();
    let pts = samples.positions();
    let n = pts.len() as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for p in pts {
        mx += f.dot(p);
        my += g.dot(p);
    }
    mx /= n;
    my /= n;
    let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
    for p in pts {
        let x = f.dot(p) - mx;
        let y = g.dot(p) - my;
        vx += x * x;
        vy += y * y;
        cxy += x * y;
    }
    Ok(bound_from_moments(vx / n, vy / n, cxy / n, chi.theta().sin(), scen.rho()))
}
