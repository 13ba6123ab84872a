//! Maximum-likelihood direction estimation by grid search.
//!
//! The objective `|y^H alpha(R, eta)|^2` is maximized over a coarse grid, then
//! over successively finer local grids around the running argmax.

use nalgebra::{SymmetricEigen, Vector3};
use num_complex::Complex64;

use super::signal::ReceivedSignal;
use crate::error::{invalid, Result};
use crate::geometry::{apv_covariance, raw_direction, AngleVector, DirectionVector, Positions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleGrid {
    /// Coarse step in degrees, used for both angles.
    pub resolution_deg: f64,
    /// Local passes, each ten times finer and spanning one cell of the
    /// previous pass on either side.
    pub refinements: usize,
    pub theta_deg: (f64, f64),
    pub phi_deg: (f64, f64),
}

impl Default for MleGrid {
    fn default() -> Self {
        Self {
            resolution_deg: 1.0,
            refinements: 2,
            theta_deg: (0.0, 180.0),
            phi_deg: (0.0, 360.0),
        }
    }
}

impl MleGrid {
    pub fn with_resolution(resolution_deg: f64) -> Self {
        Self {
            resolution_deg,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution_deg > 0.0 && self.resolution_deg.is_finite()) {
            return Err(invalid("grid_resolution", "must be positive"));
        }
        AngleVector::from_degrees(self.theta_deg.0, self.phi_deg.0)?;
        AngleVector::from_degrees(self.theta_deg.1, self.phi_deg.1)?;
        if self.theta_deg.1 < self.theta_deg.0 || self.phi_deg.1 < self.phi_deg.0 {
            return Err(invalid("grid", "empty search range"));
        }
        Ok(())
    }

    /// Step of the last refinement pass.
    pub fn final_step_deg(&self) -> f64 {
        self.resolution_deg / 10f64.powi(self.refinements as i32)
    }

    fn full_turn(&self) -> bool {
        self.phi_deg.1 - self.phi_deg.0 >= 360.0 - 1e-9
    }

    /// Coarse candidates in degrees, theta outermost.
    pub fn coarse_points(&self) -> Vec<(f64, f64)> {
        let h = self.resolution_deg;
        let axis = |lo: f64, hi: f64, open: bool| {
            let mut v = Vec::new();
            let mut i = 0usize;
            loop {
                let x = lo + h * i as f64;
                if x > hi + 1e-9 || (open && x >= hi - 1e-9) {
                    break;
                }
                v.push(x.min(hi));
                i += 1;
            }
            if !open && v.last().is_some_and(|&x| x < hi - 1e-9) {
                v.push(hi);
            }
            v
        };
        let thetas = axis(self.theta_deg.0, self.theta_deg.1, false);
        let phis = axis(self.phi_deg.0, self.phi_deg.1, self.full_turn());
        thetas
            .iter()
            .flat_map(|&t| phis.iter().map(move |&p| (t, p)))
            .collect()
    }

    fn local_points(&self, center: (f64, f64), step: f64) -> Vec<(f64, f64)> {
        let wrap = self.full_turn();
        let mut out = Vec::with_capacity(441);
        for i in -10i32..=10 {
            let t = (center.0 + step * i as f64).clamp(self.theta_deg.0, self.theta_deg.1);
            for j in -10i32..=10 {
                let p = center.1 + step * j as f64;
                let p = if wrap {
                    (p - self.phi_deg.0).rem_euclid(360.0) + self.phi_deg.0
                } else {
                    p.clamp(self.phi_deg.0, self.phi_deg.1)
                };
                out.push((t, p.min(360.0)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleEstimate {
    pub chi: AngleVector,
    pub eta: DirectionVector,
    /// `|y^H alpha|^2` at the estimate.
    pub objective: f64,
}

/// Normal of a planar sample set, oriented towards `+z` (then `+y`, `+x`).
/// A planar aperture cannot tell a direction from its mirror image, so the
/// search is restricted to the half-space this normal points into.
pub fn front_normal<P: Positions + ?Sized>(samples: &P) -> Option<Vector3<f64>> {
    let pts = samples.positions();
    if pts.iter().all(|p| *p == pts[0]) {
        return None;
    }
    let u = apv_covariance(samples);
    let tr = u.trace();
    let eig = SymmetricEigen::new(*u.matrix());
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let [i, mid, _] = order;
    // a line leaves a whole cone of ambiguity, which one half-space cannot fix
    if eig.eigenvalues[i] > 1e-12 * tr || eig.eigenvalues[mid] <= 1e-12 * tr {
        return None;
    }
    let mut n: Vector3<f64> = eig.eigenvectors.column(i).into();
    let key = [n.z, n.y, n.x].into_iter().find(|c| c.abs() > 1e-9).unwrap_or(1.0);
    if key < 0.0 {
        n = -n;
    }
    Some(n)
}

struct Searcher {
    /// Positions relative to the first sample; this only changes the phase
    /// of `y^H alpha`, not its modulus.
    pts: Vec<Vector3<f64>>,
    k: f64,
    front: Option<Vector3<f64>>,
    buf: Vec<Complex64>,
}

impl Searcher {
    fn new(pts: &[Vector3<f64>], wavelength: f64, front: Option<Vector3<f64>>) -> Self {
        Self {
            pts: pts.iter().map(|p| p - pts[0]).collect(),
            k: std::f64::consts::TAU / wavelength,
            front,
            buf: vec![Complex64::new(0.0, 0.0); pts.len()],
        }
    }

    /// Updates `best[t]` with the first maximizer over `cands` for each of the
    /// conjugated signals `yc[t]`.
    fn scan(&mut self, cands: &[(f64, f64)], yc: &[&[Complex64]], best: &mut [Option<(f64, f64, f64)>]) {
        for &(t, p) in cands {
            let eta = raw_direction(t.to_radians(), p.to_radians());
            if let Some(n) = self.front {
                if n.dot(&eta) < -1e-12 {
                    continue;
                }
            }
            for (a, r) in self.buf.iter_mut().zip(&self.pts) {
                *a = Complex64::cis(self.k * eta.dot(r));
            }
            for (y, b) in yc.iter().zip(best.iter_mut()) {
                let mut acc = Complex64::new(0.0, 0.0);
                for (yv, a) in y.iter().zip(&self.buf) {
                    acc += yv * a;
                }
                let v = acc.norm_sqr();
                if b.is_none_or(|(_, _, bv)| v > bv) {
                    *b = Some((t, p, v));
                }
            }
        }
    }
}

fn finish(b: Option<(f64, f64, f64)>) -> MleEstimate {
    let (t, p, v) = b.expect("search grid has at least one admissible point");
    let chi = AngleVector::from_degrees(t, p).expect("grid inside the angle ranges");
    MleEstimate {
        chi,
        eta: chi.direction(),
        objective: v,
    }
}

/// Estimates for many signals received along the same samples. Identical to
/// calling [`mle_estimate`] on each.
pub fn mle_estimate_batch<P: Positions + ?Sized>(
    signals: &[Vec<Complex64>],
    samples: &P,
    wavelength: f64,
    grid: &MleGrid,
) -> Result<Vec<MleEstimate>> {
    grid.validate()?;
    let pts = samples.positions();
    if pts.is_empty() {
        return Err(invalid("samples", "need at least one antenna position"));
    }
    if let Some(y) = signals.iter().find(|y| y.len() != pts.len()) {
        return Err(crate::Error::DimensionMismatch(format!(
            "signal of length {} for {} samples",
            y.len(),
            pts.len()
        )));
    }
    let conj: Vec<Vec<Complex64>> = signals.iter().map(|y| y.iter().map(|v| v.conj()).collect()).collect();
    let mut search = Searcher::new(pts, wavelength, front_normal(samples));
    let coarse = grid.coarse_points();
    let views: Vec<&[Complex64]> = conj.iter().map(|v| v.as_slice()).collect();
    let mut best = vec![None; signals.len()];
    search.scan(&coarse, &views, &mut best);
    for (y, b) in views.iter().zip(best.iter_mut()) {
        let mut step = grid.resolution_deg;
        for _ in 0..grid.refinements {
            let (t, p, _) = b.expect("coarse pass found a point");
            step /= 10.0;
            let local = grid.local_points((t, p), step);
            search.scan(&local, std::slice::from_ref(y), std::slice::from_mut(b));
        }
    }
    Ok(best.into_iter().map(finish).collect())
}

/// Grid-search maximum-likelihood estimate of the direction of `signal`.
/// Ties resolve to the earliest candidate.
pub fn mle_estimate<P: Positions + ?Sized>(
    signal: &ReceivedSignal,
    samples: &P,
    grid: &MleGrid,
) -> Result<MleEstimate> {
    let wavelength = signal.scenario.wavelength();
    Ok(mle_estimate_batch(std::slice::from_ref(&signal.samples), samples, wavelength, grid)?[0])
}

/// Angle between two unit vectors (rad).
///
/// Evaluated as `2 atan2(|a - b|, |a + b|)`, which equals the arccosine of
/// the inner product but stays accurate for nearly parallel vectors.
pub fn angular_error(eta_true: &DirectionVector, eta_hat: &DirectionVector) -> f64 {
    let (a, b) = (eta_true.as_vector(), eta_hat.as_vector());
    2.0 * (a - b).norm().atan2((a + b).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{synthesize_signal, SignalOptions};
    use crate::geometry::Trajectory;
    use crate::metrics::SensingScenario;
    use crate::trajectories::{gen_circle, gen_circle3};
    use proptest::prelude::*;

    fn clean(traj: &Trajectory, chi: AngleVector) -> ReceivedSignal {
        let scen = SensingScenario::from_snr_db(1.0, 0.0, 1e-3, traj.snapshots()).unwrap();
        synthesize_signal(traj, chi, &scen, 0, SignalOptions { noiseless: true, ..Default::default() }).unwrap()
    }

    #[test]
    fn recovers_on_grid_direction_exactly() {
        let t = gen_circle3(120, 0.3, 1e-3).unwrap();
        let chi = AngleVector::from_degrees(40.0, 130.0).unwrap();
        let grid = MleGrid { refinements: 0, ..MleGrid::default() };
        let est = mle_estimate(&clean(&t, chi), &t, &grid).unwrap();
        assert_eq!(angular_error(&chi.direction(), &est.eta), 0.0);
    }

    #[test]
    fn off_grid_error_within_final_cell() {
        let t = gen_circle3(120, 0.3, 1e-3).unwrap();
        let chi = AngleVector::from_degrees(40.437, 130.281).unwrap();
        let grid = MleGrid::with_resolution(2.0);
        let est = mle_estimate(&clean(&t, chi), &t, &grid).unwrap();
        let cell = grid.final_step_deg().to_radians() * 2f64.sqrt();
        assert!(angular_error(&chi.direction(), &est.eta) <= cell);
    }

    #[test]
    fn stationary_antenna_returns_first_candidate() {
        let t = Trajectory::stationary(Vector3::new(0.1, 0.2, 0.3), 16, 1e-3).unwrap();
        let chi = AngleVector::from_degrees(60.0, 10.0).unwrap();
        let grid = MleGrid { resolution_deg: 5.0, refinements: 0, ..MleGrid::default() };
        let est = mle_estimate(&clean(&t, chi), &t, &grid).unwrap();
        assert_eq!((est.chi.theta(), est.chi.phi()), (0.0, 0.0));
    }

    #[test]
    fn planar_search_stays_in_front() {
        let t = gen_circle(60, 0.5, 1e-3).unwrap();
        assert!(front_normal(&t).unwrap().z > 0.99);
        let chi = AngleVector::from_degrees(30.0, 75.0).unwrap();
        let est = mle_estimate(&clean(&t, chi), &t, &MleGrid::with_resolution(2.0)).unwrap();
        assert!(est.chi.theta_deg() <= 90.0);
        assert!(angular_error(&chi.direction(), &est.eta) < 0.01);
    }

    #[test]
    fn batch_equals_single() {
        let t = gen_circle3(60, 0.4, 1e-3).unwrap();
        let scen = SensingScenario::from_snr_db(1.0, -5.0, 1e-3, 60).unwrap();
        let chi = AngleVector::from_degrees(100.0, 300.0).unwrap();
        let sigs: Vec<_> = (0..4)
            .map(|s| synthesize_signal(&t, chi, &scen, s, SignalOptions::default()).unwrap())
            .collect();
        let grid = MleGrid::with_resolution(3.0);
        let ys: Vec<_> = sigs.iter().map(|s| s.samples.clone()).collect();
        let batch = mle_estimate_batch(&ys, &t, 1.0, &grid).unwrap();
        for (s, b) in sigs.iter().zip(&batch) {
            assert_eq!(mle_estimate(s, &t, &grid).unwrap(), *b);
        }
    }

    #[test]
    fn angular_error_special_cases() {
        let e = AngleVector::from_degrees(20.0, 50.0).unwrap().direction();
        let perp = DirectionVector::normalize(e.as_vector().cross(&Vector3::z())).unwrap();
        let neg = DirectionVector::normalize(-e.as_vector()).unwrap();
        assert_eq!(angular_error(&e, &e), 0.0);
        assert!((angular_error(&e, &perp) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((angular_error(&e, &neg) - std::f64::consts::PI).abs() < 1e-7);
    }

    fn unit() -> impl Strategy<Value = DirectionVector> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter_map("non-zero", |(x, y, z)| DirectionVector::normalize(Vector3::new(x, y, z)))
    }

    proptest! {
        #[test]
        fn angular_error_is_a_metric(a in unit(), b in unit(), c in unit()) {
            prop_assert_eq!(angular_error(&a, &b), angular_error(&b, &a));
            prop_assert!(angular_error(&a, &c) <= angular_error(&a, &b) + angular_error(&b, &c) + 1e-10);
        }

        #[test]
        fn global_phase_does_not_move_the_estimate(seed in 0u64..1000, c in 0.0..std::f64::consts::TAU) {
            let t = gen_circle3(36, 0.4, 1e-3).unwrap();
            let scen = SensingScenario::from_snr_db(1.0, 0.0, 1e-3, 36).unwrap();
            let chi = AngleVector::from_degrees(70.0, 20.0).unwrap();
            let mut sig = synthesize_signal(&t, chi, &scen, seed, SignalOptions::default()).unwrap();
            let grid = MleGrid { resolution_deg: 6.0, refinements: 1, ..MleGrid::default() };
            let a = mle_estimate(&sig, &t, &grid).unwrap();
            for v in sig.samples.iter_mut() {
                *v *= Complex64::cis(c);
            }
            let b = mle_estimate(&sig, &t, &grid).unwrap();
            prop_assert!(angular_error(&a.eta, &b.eta) < 1e-9);
        }
    }
}
