//! Numeric Fisher information for the direction of a single LoS target.
//!
//! Unknowns are `(theta, phi, Re b, Im b)` with `b = beta * s`. The mean of the
//! observation is `u = b * alpha(R, eta)` and the noise is white complex
//! Gaussian, so `J[p, q] = (2 / sigma^2) Re(sum conj(du/dp) du/dq)`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use super::scenario::SensingScenario;
use crate::geometry::{raw_direction, AngleVector, Positions};

/// Central-difference step for the angle derivatives (rad).
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FimBlocks {
    pub j_chichi: Matrix2<f64>,
    pub j_chibeta: Matrix2<f64>,
    pub j_betabeta: Matrix2<f64>,
    /// Inverse Schur complement: the CRB matrix of `(theta, phi)`. Infinite
    /// on the diagonal when the complement is singular.
    pub lambda: Matrix2<f64>,
}

impl FimBlocks {
    pub fn crb_theta(&self) -> f64 {
        self.lambda[(0, 0)]
    }

    pub fn crb_phi(&self) -> f64 {
        self.lambda[(1, 1)]
    }

    /// `CRB_theta + sin^2(theta) CRB_phi`.
    pub fn msae_bound(&self, chi: AngleVector) -> f64 {
        self.crb_theta() + chi.theta().sin().powi(2) * self.crb_phi()
    }
}

/// FIM blocks from the analytic derivatives `d alpha / d theta = j k (f'r) alpha`
/// and `d alpha / d phi = j k sin(theta) (g'r) alpha`.
pub fn fim_oracle<P: Positions + ?Sized>(
    samples: &P,
    chi: AngleVector,
    beta_tilde: Complex64,
    scen: &SensingScenario,
) -> FimBlocks {
    let k = scen.wavenumber();
    let eta = *chi.direction().as_vector();
    let frame = chi.tangent_frame();
    let st = chi.theta().sin();
    let j = Complex64::i();
    let cols = samples.positions().iter().map(|r| {
        let alpha = Complex64::cis(k * eta.dot(r));
        let u = beta_tilde * alpha;
        [
            j * k * frame.f.dot(r) * u,
            j * k * st * frame.g.dot(r) * u,
            alpha,
            j * alpha,
        ]
    });
    assemble(cols, scen.noise_power())
}

/// Same blocks with `du/dtheta` and `du/dphi` taken by central differences of
/// the steering vector.
pub fn fim_oracle_finite_difference<P: Positions + ?Sized>(
    samples: &P,
    chi: AngleVector,
    beta_tilde: Complex64,
    scen: &SensingScenario,
) -> FimBlocks {
    let k = scen.wavenumber();
    let (t, p) = (chi.theta(), chi.phi());
    let h = FD_STEP;
    let dirs = [
        raw_direction(t + h, p),
        raw_direction(t - h, p),
        raw_direction(t, p + h),
        raw_direction(t, p - h),
    ];
    let eta = raw_direction(t, p);
    let u_at = |d: &nalgebra::Vector3<f64>, r: &nalgebra::Vector3<f64>| beta_tilde * Complex64::cis(k * d.dot(r));
    let cols = samples.positions().iter().map(|r| {
        let alpha = Complex64::cis(k * eta.dot(r));
        [
            (u_at(&dirs[0], r) - u_at(&dirs[1], r)) / (2.0 * h),
            (u_at(&dirs[2], r) - u_at(&dirs[3], r)) / (2.0 * h),
            alpha,
            Complex64::i() * alpha,
        ]
    });
    assemble(cols, scen.noise_power())
}

fn assemble(cols: impl Iterator<Item = [Complex64; 4]>, sigma2: f64) -> FimBlocks {
    let mut fim = Matrix4::<f64>::zeros();
    for d in cols {
        for a in 0..4 {
            for b in a..4 {
                fim[(a, b)] += (d[a].conj() * d[b]).re;
            }
        }
    }
    for a in 0..4 {
        for b in 0..a {
            fim[(a, b)] = fim[(b, a)];
        }
    }
    fim *= 2.0 / sigma2;
    let j_chichi: Matrix2<f64> = fim.fixed_view::<2, 2>(0, 0).into_owned();
    let j_chibeta: Matrix2<f64> = fim.fixed_view::<2, 2>(0, 2).into_owned();
    let j_betabeta: Matrix2<f64> = fim.fixed_view::<2, 2>(2, 2).into_owned();
    let schur = j_betabeta
        .try_inverse()
        .map(|inv| j_chichi - j_chibeta * inv * j_chibeta.transpose());
    let lambda = schur
        .filter(|s| s.determinant() > 1e-14 * s.trace().powi(2) && s.trace() > 0.0)
        .and_then(|s| s.try_inverse())
        .map(|l| (l + l.transpose()) * 0.5)
        .unwrap_or_else(|| Matrix2::from_diagonal_element(f64::INFINITY));
    FimBlocks {
        j_chichi,
        j_chibeta,
        j_betabeta,
        lambda,
    }
}
