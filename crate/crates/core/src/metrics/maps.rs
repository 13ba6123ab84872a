//! Steering vectors, beam correlation maps and MSAEB maps over angle grids.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use super::bounds::msaeb_from_covariance;
use super::scenario::SensingScenario;
use crate::error::{invalid, Error, Result};
use crate::geometry::{apv_covariance, io::fmt_f64, AngleVector, DirectionVector, Positions};

/// `alpha[n] = exp(j 2pi/lambda eta' r_n)`.
pub fn steering_vector<P: Positions + ?Sized>(
    samples: &P,
    eta: &DirectionVector,
    wavelength: f64,
) -> Vec<Complex64> {
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let e = eta.as_vector();
    samples
        .positions()
        .iter()
        .map(|r| Complex64::cis(k * e.dot(r)))
        .collect()
}

/// Row-major `(theta, phi)` product grid, theta outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    thetas: Vec<f64>,
    phis: Vec<f64>,
}

impl AngleGrid {
    /// Inclusive, evenly spaced grid in degrees. A count of one picks the
    /// lower end.
    pub fn from_degrees(theta: (f64, f64, usize), phi: (f64, f64, usize)) -> Result<Self> {
        let axis = |(lo, hi, n): (f64, f64, usize), name| -> Result<Vec<f64>> {
            if n == 0 || !(hi >= lo) {
                return Err(invalid(name, "need a non-empty increasing range"));
            }
            Ok((0..n)
                .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
                .map(f64::to_radians)
                .collect())
        };
        let g = Self {
            thetas: axis(theta, "theta")?,
            phis: axis(phi, "phi")?,
        };
        for &t in &g.thetas {
            AngleVector::new(t, 0.0)?;
        }
        for &p in &g.phis {
            AngleVector::new(0.0, p)?;
        }
        Ok(g)
    }

    /// 181 x 361 grid at 1 degree over the whole sphere.
    pub fn full_sphere_1deg() -> Self {
        Self::from_degrees((0.0, 180.0, 181), (0.0, 360.0, 361)).expect("static grid")
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn len(&self) -> usize {
        self.thetas.len() * self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<AngleVector> {
        self.thetas
            .iter()
            .flat_map(|&t| {
                self.phis
                    .iter()
                    .map(move |&p| AngleVector::new(t, p).expect("validated grid"))
            })
            .collect()
    }
}

/// Normalized correlation `|alpha(eta)^H alpha(eta_bar)|^2 / N^2` for each
/// candidate direction.
///
/// Uses the phase difference `(eta_bar - eta)' r` so the self term is exactly 1.
pub fn correlation_map<P: Positions + Sync + ?Sized>(
    samples: &P,
    eta_true: &DirectionVector,
    grid: &[AngleVector],
    wavelength: f64,
) -> Vec<f64> {
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let pts = samples.positions();
    let n = pts.len() as f64;
    let e0 = *eta_true.as_vector();
    grid.par_iter()
        .map(|chi| {
            let d = chi.direction().into_inner() - e0;
            let mut acc = Complex64::new(0.0, 0.0);
            for r in pts {
                acc += Complex64::cis(k * d.dot(r));
            }
            (acc.norm_sqr() / (n * n)).min(1.0)
        })
        .collect()
}

/// MSAEB at every grid point.
pub fn msaeb_map<P: Positions + ?Sized>(
    samples: &P,
    grid: &[AngleVector],
    scen: &SensingScenario,
) -> Result<Vec<f64>> {
    if samples.sample_count() != scen.snapshots() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples but the scenario has N = {}",
            samples.sample_count(),
            scen.snapshots()
        )));
    }
    let u = apv_covariance(samples);
    let rho = scen.rho();
    Ok(grid.iter().map(|chi| msaeb_from_covariance(&u, *chi, rho).msaeb).collect())
}

pub const MAP_HEADER: [&str; 3] = ["theta_deg", "phi_deg", "value"];

/// `theta_deg,phi_deg,value`, one row per grid point in grid order.
pub fn write_map_csv<W: Write>(grid: &[AngleVector], values: &[f64], out: W) -> Result<()> {
    if grid.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} grid points but {} values",
            grid.len(),
            values.len()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MAP_HEADER)?;
    for (chi, v) in grid.iter().zip(values) {
        w.write_record([fmt_f64(chi.theta_deg()), fmt_f64(chi.phi_deg()), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_map_csv<R: Read>(input: R) -> Result<Vec<(f64, f64, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(MAP_HEADER.iter().copied()) {
        return Err(Error::Parse("unexpected map header".into()));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let num = |k: usize| rec[k].parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
            Ok((num(0)?, num(1)?, num(2)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn steering_examples() {
        let eta = DirectionVector::normalize(Vector3::x()).unwrap();
        let origin = vec![Vector3::zeros(); 4];
        assert!(steering_vector(&origin, &eta, 0.1).iter().all(|a| *a == Complex64::new(1.0, 0.0)));
        let lam = 0.1;
        let half: Vec<_> = (0..6).map(|n| Vector3::x() * (lam / 2.0 * n as f64)).collect();
        let a = steering_vector(&half, &eta, lam);
        for (n, v) in a.iter().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - Complex64::new(sign, 0.0)).norm() < 1e-12);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_examples() {
        let pts: Vec<_> = (0..40)
            .map(|i| Vector3::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos(), 0.2 * i as f64) * 0.03)
            .collect();
        let chi0 = AngleVector::from_degrees(40.0, 100.0).unwrap();
        let grid = AngleGrid::from_degrees((0.0, 180.0, 19), (0.0, 360.0, 37)).unwrap();
        let mut points = grid.points();
        points.push(chi0);
        let map = correlation_map(&pts, &chi0.direction(), &points, 0.05);
        assert_eq!(*map.last().unwrap(), 1.0);
        assert!(map.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));

        let still = vec![Vector3::new(0.1, 0.2, 0.3); 10];
        let flat = correlation_map(&still, &chi0.direction(), &points, 0.05);
        assert!(flat.iter().all(|v| (*v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn map_csv_round_trip() {
        let grid = AngleGrid::from_degrees((10.0, 20.0, 3), (0.0, 90.0, 2)).unwrap().points();
        let values: Vec<f64> = (0..grid.len()).map(|i| i as f64 / 3.0).collect();
        let mut buf = Vec::new();
        write_map_csv(&grid, &values, &mut buf).unwrap();
        let back = read_map_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), 6);
        for (row, v) in back.iter().zip(&values) {
            assert_eq!(row.2, *v);
        }
        assert!((back[5].0 - 20.0).abs() < 1e-12 && (back[5].1 - 90.0).abs() < 1e-12);
    }

    #[test]
    fn default_grid_shape() {
        let g = AngleGrid::full_sphere_1deg();
        assert_eq!(g.len(), 181 * 361);
    }
}
