//! Physical angles, unit directions and the tangent frame of the unit sphere.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Elevation/azimuth pair `(theta, phi)` in radians.
///
/// Values outside `[0, pi] x [0, 2pi]` are rejected instead of wrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleVector {
    theta: f64,
    phi: f64,
}

impl AngleVector {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::ElevationOutOfRange(theta));
        }
        if !(0.0..=2.0 * PI).contains(&phi) {
            return Err(Error::AzimuthOutOfRange(phi));
        }
        Ok(Self { theta, phi })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// Angles of a unit vector. The azimuth is folded into `[0, 2pi)`.
    pub fn from_direction(eta: &DirectionVector) -> Self {
        let v = eta.as_vector();
        let theta = v.z.clamp(-1.0, 1.0).acos();
        let mut phi = v.y.atan2(v.x);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        // atan2 can return exactly 2pi after the shift for tiny negative zeros
        if phi > 2.0 * PI {
            phi = 2.0 * PI;
        }
        Self { theta, phi }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn phi_deg(&self) -> f64 {
        self.phi.to_degrees()
    }

    pub fn direction(&self) -> DirectionVector {
        direction_from_angles(*self)
    }

    pub fn tangent_frame(&self) -> TangentFrame {
        tangent_frame(*self)
    }
}

/// Unit direction vector on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionVector(Vector3<f64>);

impl DirectionVector {
    /// Normalizes `v`. Returns `None` for the zero vector.
    pub fn normalize(v: Vector3<f64>) -> Option<Self> {
        let n = v.norm();
        (n > 0.0 && n.is_finite()).then(|| Self(v / n))
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Vector3<f64> {
        self.0
    }
}

/// Orthonormal basis `(f, g)` of the tangent plane at `eta`, with
/// `f = d eta / d theta` and `g sin(theta) = d eta / d phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub f: Vector3<f64>,
    pub g: Vector3<f64>,
}

/// `eta = [sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)]`.
pub fn direction_from_angles(chi: AngleVector) -> DirectionVector {
    DirectionVector(raw_direction(chi.theta, chi.phi))
}

pub fn tangent_frame(chi: AngleVector) -> TangentFrame {
    let (st, ct) = chi.theta.sin_cos();
    let (sp, cp) = chi.phi.sin_cos();
    TangentFrame {
        f: Vector3::new(ct * cp, ct * sp, -st),
        g: Vector3::new(-sp, cp, 0.0),
    }
}

/// Rotation with rows `[f; g; eta]`; maps `eta` onto the `+z` axis.
pub fn rotation_to_target(chi: AngleVector) -> Matrix3<f64> {
    let TangentFrame { f, g } = tangent_frame(chi);
    let eta = raw_direction(chi.theta, chi.phi);
    Matrix3::from_rows(&[f.transpose(), g.transpose(), eta.transpose()])
}

/// Direction for unchecked angles. Used by search grids and finite differences
/// that step slightly outside the validated domain.
pub(crate) fn raw_direction(theta: f64, phi: f64) -> Vector3<f64> {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vector3::new(st * cp, st * sp, ct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_out_of_domain() {
        assert!(matches!(
            AngleVector::new(-1e-9, 0.0),
            Err(Error::ElevationOutOfRange(_))
        ));
        assert!(matches!(
            AngleVector::new(0.0, 2.0 * PI + 1e-9),
            Err(Error::AzimuthOutOfRange(_))
        ));
        assert!(AngleVector::new(PI, 2.0 * PI).is_ok());
        assert!(AngleVector::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn pole_and_axis_directions() {
        for phi in [0.0, 1.0, 4.0] {
            let eta = direction_from_angles(AngleVector::new(0.0, phi).unwrap());
            assert_abs_diff_eq!(*eta.as_vector(), Vector3::z(), epsilon = 1e-15);
        }
        let eta = direction_from_angles(AngleVector::new(PI / 2.0, 0.0).unwrap());
        assert_abs_diff_eq!(*eta.as_vector(), Vector3::x(), epsilon = 1e-15);
    }

    #[test]
    fn forty_five_degree_direction() {
        let eta = AngleVector::from_degrees(45.0, 45.0).unwrap().direction();
        assert_abs_diff_eq!(
            *eta.as_vector(),
            Vector3::new(0.5, 0.5, 0.5f64.sqrt()),
            epsilon = 1e-15
        );
    }

    #[test]
    fn tangent_frames_at_reference_points() {
        let t = tangent_frame(AngleVector::new(0.0, 0.0).unwrap());
        assert_abs_diff_eq!(t.f, Vector3::x(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.g, Vector3::y(), epsilon = 1e-15);
        let t = tangent_frame(AngleVector::new(PI / 2.0, 0.0).unwrap());
        assert_abs_diff_eq!(t.f, -Vector3::z(), epsilon = 1e-15);
        assert_abs_diff_eq!(t.g, Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn rotation_maps_target_to_z() {
        assert_abs_diff_eq!(
            rotation_to_target(AngleVector::new(0.0, 0.0).unwrap()),
            Matrix3::identity(),
            epsilon = 1e-15
        );
        let q = rotation_to_target(AngleVector::from_degrees(45.0, 45.0).unwrap());
        let v = q * Vector3::new(0.5, 0.5, 0.5f64.sqrt());
        assert_abs_diff_eq!(v, Vector3::z(), epsilon = 1e-12);
    }

    #[test]
    fn angles_round_trip_through_direction() {
        let chi = AngleVector::new(1.1, 5.9).unwrap();
        let back = AngleVector::from_direction(&chi.direction());
        assert!((back.theta() - chi.theta()).abs() < 1e-12);
        assert!((back.phi() - chi.phi()).abs() < 1e-12);
    }
}
