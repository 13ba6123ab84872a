//! Antenna trajectories, static sample sets and the movement region.

use nalgebra::Vector3;

use crate::error::{invalid, Result};

/// Anything that exposes a set of antenna sample positions (meters).
pub trait Positions {
    fn positions(&self) -> &[Vector3<f64>];

    fn sample_count(&self) -> usize {
        self.positions().len()
    }
}

impl Positions for [Vector3<f64>] {
    fn positions(&self) -> &[Vector3<f64>] {
        self
    }
}

impl Positions for Vec<Vector3<f64>> {
    fn positions(&self) -> &[Vector3<f64>] {
        self
    }
}

/// A movable-antenna trajectory sampled at `N` snapshots.
///
/// The state is the start point, the `N - 1` inter-snapshot velocities and the
/// sampling period. Positions are always derived from them as
/// `r_n = r_1 + Ts * sum_{m < n} v_m`, so they cannot drift out of sync.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    start: Vector3<f64>,
    velocities: Vec<Vector3<f64>>,
    sampling_period: f64,
    positions: Vec<Vector3<f64>>,
}

impl Trajectory {
    pub fn from_velocities(
        start: Vector3<f64>,
        velocities: Vec<Vector3<f64>>,
        sampling_period: f64,
    ) -> Result<Self> {
        if !(sampling_period > 0.0 && sampling_period.is_finite()) {
            return Err(invalid("sampling_period", "must be positive and finite"));
        }
        if velocities.is_empty() {
            return Err(invalid("velocities", "need at least two snapshots"));
        }
        let positions = integrate(start, &velocities, sampling_period);
        Ok(Self {
            start,
            velocities,
            sampling_period,
            positions,
        })
    }

    /// Builds the velocities that connect `waypoints` in `sampling_period` steps.
    ///
    /// The stored positions are re-integrated from those velocities, so they
    /// match the waypoints only up to rounding.
    pub fn through_points(waypoints: &[Vector3<f64>], sampling_period: f64) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(invalid("waypoints", "need at least two snapshots"));
        }
        let velocities = waypoints
            .windows(2)
            .map(|w| (w[1] - w[0]) / sampling_period)
            .collect();
        Self::from_velocities(waypoints[0], velocities, sampling_period)
    }

    /// A trajectory that never moves.
    pub fn stationary(at: Vector3<f64>, snapshots: usize, sampling_period: f64) -> Result<Self> {
        if snapshots < 2 {
            return Err(invalid("snapshots", "need at least two snapshots"));
        }
        Self::from_velocities(at, vec![Vector3::zeros(); snapshots - 1], sampling_period)
    }

    pub fn start(&self) -> Vector3<f64> {
        self.start
    }

    pub fn velocities(&self) -> &[Vector3<f64>] {
        &self.velocities
    }

    pub fn sampling_period(&self) -> f64 {
        self.sampling_period
    }

    pub fn snapshots(&self) -> usize {
        self.positions.len()
    }

    pub fn duration(&self) -> f64 {
        self.sampling_period * (self.snapshots() - 1) as f64
    }

    pub fn path_length(&self) -> f64 {
        self.velocities.iter().map(|v| v.norm()).sum::<f64>() * self.sampling_period
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Same motion shifted by `offset`.
    pub fn translated(&self, offset: Vector3<f64>) -> Self {
        Self::from_velocities(self.start + offset, self.velocities.clone(), self.sampling_period)
            .expect("translation keeps a valid trajectory valid")
    }

    /// Axis-aligned bounding box `(min, max)` of the sample positions.
    pub fn bounding_box(&self) -> (Vector3<f64>, Vector3<f64>) {
        bounding_box(&self.positions)
    }
}

impl Positions for Trajectory {
    fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }
}

fn integrate(start: Vector3<f64>, velocities: &[Vector3<f64>], ts: f64) -> Vec<Vector3<f64>> {
    let mut positions = Vec::with_capacity(velocities.len() + 1);
    positions.push(start);
    let mut sum = Vector3::zeros();
    for v in velocities {
        sum += v;
        positions.push(start + sum * ts);
    }
    positions
}

pub fn bounding_box(points: &[Vector3<f64>]) -> (Vector3<f64>, Vector3<f64>) {
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

/// Static antenna positions observed over several snapshots (fixed arrays).
///
/// An `M`-element array seen for `N` snapshots is stored as `M * N` samples,
/// so closed-form bounds apply with `M * N` in place of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    positions: Vec<Vector3<f64>>,
    elements: usize,
    snapshots: usize,
}

impl SampleSet {
    pub fn replicated(elements: &[Vector3<f64>], snapshots: usize) -> Result<Self> {
        if elements.is_empty() {
            return Err(invalid("elements", "array has no elements"));
        }
        if snapshots == 0 {
            return Err(invalid("snapshots", "need at least one snapshot"));
        }
        let positions = (0..snapshots).flat_map(|_| elements.iter().copied()).collect();
        Ok(Self {
            positions,
            elements: elements.len(),
            snapshots,
        })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    /// Positions of one snapshot's worth of elements.
    pub fn element_positions(&self) -> &[Vector3<f64>] {
        &self.positions[..self.elements]
    }
}

impl Positions for SampleSet {
    fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }
}

/// Axis-aligned box the antenna must stay in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovementRegion {
    center: Vector3<f64>,
    half_extent: Vector3<f64>,
}

impl MovementRegion {
    pub fn new(center: Vector3<f64>, half_extent: Vector3<f64>) -> Result<Self> {
        if half_extent.iter().any(|h| h.is_nan() || *h <= 0.0) {
            return Err(invalid("half_extent", "must be positive on every axis"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(invalid("center", "must be finite"));
        }
        Ok(Self {
            center,
            half_extent,
        })
    }

    /// Cube of side `side` centered at the origin.
    pub fn cube(side: f64) -> Result<Self> {
        Self::new(Vector3::zeros(), Vector3::repeat(side / 2.0))
    }

    /// A region whose walls are never active.
    pub fn unbounded() -> Self {
        Self {
            center: Vector3::zeros(),
            half_extent: Vector3::repeat(f64::INFINITY),
        }
    }

    pub fn center(&self) -> Vector3<f64> {
        self.center
    }

    pub fn half_extent(&self) -> Vector3<f64> {
        self.half_extent
    }

    pub fn is_bounded(&self) -> bool {
        self.half_extent.iter().all(|h| h.is_finite())
    }

    /// Distance by which `p` sticks out of the box along its worst axis
    /// (non-positive inside).
    pub fn excess(&self, p: &Vector3<f64>) -> f64 {
        (p - self.center)
            .abs()
            .iter()
            .zip(self.half_extent.iter())
            .map(|(d, h)| d - h)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        self.excess(p) <= 0.0
    }
}

/// Relative slack granted on the speed and wall checks so that trajectories
/// built at exactly the speed limit are not rejected over the last ulp.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityReport {
    /// `(velocity index, ||v|| - vmax)` for every speeding step.
    pub speed_violations: Vec<(usize, f64)>,
    /// `(snapshot index, distance outside the box)` for every escaping sample.
    pub region_violations: Vec<(usize, f64)>,
    pub worst_speed_excess: f64,
    pub worst_region_excess: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.speed_violations.is_empty() && self.region_violations.is_empty()
    }
}

/// Checks the speed limit and the movement box. Boundaries are inclusive.
pub fn check_feasibility(traj: &Trajectory, region: &MovementRegion, vmax: f64) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    let speed_tol = FEASIBILITY_RTOL * vmax.abs();
    for (i, v) in traj.velocities().iter().enumerate() {
        let excess = v.norm() - vmax;
        if excess > speed_tol {
            report.speed_violations.push((i, excess));
            report.worst_speed_excess = report.worst_speed_excess.max(excess);
        }
    }
    let wall_tol = FEASIBILITY_RTOL * region.half_extent.min();
    for (i, p) in traj.positions().iter().enumerate() {
        let excess = region.excess(p);
        if excess > wall_tol {
            report.region_violations.push((i, excess));
            report.worst_region_excess = report.worst_region_excess.max(excess);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_velocity_stays_put() {
        let r1 = Vector3::new(0.1, -0.2, 0.3);
        let t = Trajectory::from_velocities(r1, vec![Vector3::zeros(); 5], 1e-3).unwrap();
        assert!(t.positions().iter().all(|p| *p == r1));
    }

    #[test]
    fn single_and_repeated_steps() {
        let t = Trajectory::from_velocities(Vector3::zeros(), vec![Vector3::x()], 1.0).unwrap();
        assert_eq!(t.positions()[1], Vector3::x());
        let v = Vector3::new(0.0, 0.0, 2.0);
        let t = Trajectory::from_velocities(Vector3::zeros(), vec![v, v], 0.5).unwrap();
        assert_eq!(t.positions()[2], Vector3::new(0.0, 0.0, 2.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Trajectory::from_velocities(Vector3::zeros(), vec![], 1.0).is_err());
        assert!(Trajectory::from_velocities(Vector3::zeros(), vec![Vector3::x()], 0.0).is_err());
        assert!(MovementRegion::new(Vector3::zeros(), Vector3::new(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn stationary_at_center_is_feasible() {
        let region = MovementRegion::cube(1.0).unwrap();
        let t = Trajectory::stationary(Vector3::zeros(), 10, 1e-3).unwrap();
        assert!(check_feasibility(&t, &region, 1.0).is_feasible());
    }

    #[test]
    fn speed_boundary_is_inclusive() {
        let vmax = 10.0;
        let ts = 1e-3;
        let region = MovementRegion::cube(1.0).unwrap();
        let t = Trajectory::from_velocities(Vector3::zeros(), vec![Vector3::x() * vmax], ts).unwrap();
        assert!(check_feasibility(&t, &region, vmax).is_feasible());

        let t = Trajectory::from_velocities(Vector3::zeros(), vec![Vector3::x() * 1.01 * vmax], ts)
            .unwrap();
        let report = check_feasibility(&t, &region, vmax);
        assert!(!report.is_feasible());
        assert_eq!(report.speed_violations.len(), 1);
        assert_eq!(report.speed_violations[0].0, 0);
        assert_abs_diff_eq!(report.worst_speed_excess, 0.01 * vmax, epsilon = 1e-12);
    }

    #[test]
    fn wall_violation_is_reported_per_snapshot() {
        let region = MovementRegion::cube(2.0).unwrap();
        let t = Trajectory::from_velocities(
            Vector3::zeros(),
            vec![Vector3::x(), Vector3::x()],
            1.0,
        )
        .unwrap();
        let report = check_feasibility(&t, &region, 5.0);
        assert_eq!(report.region_violations.len(), 1);
        assert_eq!(report.region_violations[0].0, 2);
        assert_abs_diff_eq!(report.worst_region_excess, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn replicated_sample_set_layout() {
        let el = [Vector3::zeros(), Vector3::x()];
        let s = SampleSet::replicated(&el, 3).unwrap();
        assert_eq!(s.sample_count(), 6);
        assert_eq!(s.positions()[3], Vector3::x());
        assert_eq!(s.element_positions(), &el);
    }
}
