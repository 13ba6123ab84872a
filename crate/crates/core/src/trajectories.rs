//! Benchmark trajectories and fixed arrays.
//!
//! Every generator is centered at the origin and moves exactly `delta` per
//! snapshot, i.e. at the speed limit `delta / Ts`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::error::{invalid, Error, Result};
use crate::geometry::{bounding_box, Positions, SampleSet, Trajectory};

/// Number of elements of the 4 x 4 fixed arrays.
pub const FPA_ELEMENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    Upg,
    Circle,
    Circle3,
    FpaUpa,
    FpaCpa,
}

impl BenchmarkKind {
    pub const ALL: [BenchmarkKind; 5] = [
        BenchmarkKind::Upg,
        BenchmarkKind::Circle,
        BenchmarkKind::Circle3,
        BenchmarkKind::FpaUpa,
        BenchmarkKind::FpaCpa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::Upg => "upg",
            BenchmarkKind::Circle => "circle",
            BenchmarkKind::Circle3 => "circle3",
            BenchmarkKind::FpaUpa => "fpa-upa",
            BenchmarkKind::FpaCpa => "fpa-cpa",
        }
    }

    pub fn is_fixed_array(self) -> bool {
        matches!(self, BenchmarkKind::FpaUpa | BenchmarkKind::FpaCpa)
    }

    /// Whether all samples lie in the `x`-`y` plane.
    pub fn is_planar(self) -> bool {
        !matches!(self, BenchmarkKind::Circle3)
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key || (key == "upa" && *k == Self::FpaUpa) || (key == "cpa" && *k == Self::FpaCpa))
            .ok_or_else(|| invalid("kind", format!("unknown benchmark `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSpec {
    pub kind: BenchmarkKind,
    /// Snapshots.
    pub n: usize,
    /// Step length per snapshot (m).
    pub delta: f64,
    pub wavelength: f64,
    pub sampling_period: f64,
}

/// A generated benchmark: a moving antenna or a replicated fixed array.
#[derive(Debug, Clone, PartialEq)]
pub enum Benchmark {
    Moving(Trajectory),
    Fixed(SampleSet),
}

impl Benchmark {
    pub fn trajectory(&self) -> Option<&Trajectory> {
        match self {
            Benchmark::Moving(t) => Some(t),
            Benchmark::Fixed(_) => None,
        }
    }
}

impl Positions for Benchmark {
    fn positions(&self) -> &[Vector3<f64>] {
        match self {
            Benchmark::Moving(t) => t.positions(),
            Benchmark::Fixed(s) => s.positions(),
        }
    }
}

impl BenchmarkSpec {
    pub fn generate(&self) -> Result<Benchmark> {
        match self.kind {
            BenchmarkKind::Upg => gen_upg(self.n, self.delta, self.sampling_period).map(Benchmark::Moving),
            BenchmarkKind::Circle => {
                gen_circle(self.n, self.delta, self.sampling_period).map(Benchmark::Moving)
            }
            BenchmarkKind::Circle3 => {
                gen_circle3(self.n, self.delta, self.sampling_period).map(Benchmark::Moving)
            }
            kind => gen_fpa(kind, self.n, self.wavelength).map(Benchmark::Fixed),
        }
    }

    /// Sample count seen by the bound (`M N` for fixed arrays).
    pub fn effective_samples(&self) -> usize {
        if self.kind.is_fixed_array() {
            FPA_ELEMENTS * self.n
        } else {
            self.n
        }
    }
}

fn check_step(delta: f64, ts: f64) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", "must be positive"));
    }
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(invalid("sampling_period", "must be positive"));
    }
    Ok(())
}

/// Serpentine walk over a `sqrt(N) x sqrt(N)` grid of pitch `delta` in the
/// `x`-`y` plane.
pub fn gen_upg(n: usize, delta: f64, ts: f64) -> Result<Trajectory> {
    check_step(delta, ts)?;
    let side = (n as f64).sqrt().round() as usize;
    if side * side != n || n < 4 {
        return Err(invalid("n", format!("{n} is not a perfect square of at least 4")));
    }
    let mid = (side - 1) as f64 / 2.0;
    let mut pts = Vec::with_capacity(n);
    for row in 0..side {
        for col in 0..side {
            let c = if row % 2 == 0 { col } else { side - 1 - col };
            pts.push(Vector3::new((c as f64 - mid) * delta, (row as f64 - mid) * delta, 0.0));
        }
    }
    Trajectory::through_points(&pts, ts)
}

/// `sqrt(N) * delta`: the side of a square grid holding `N` cells of pitch
/// `delta`, defined for any `N`.
pub fn upg_nominal_aperture(n: usize, delta: f64) -> f64 {
    (n as f64).sqrt() * delta
}

/// `delta / (2 sin(pi / N))`.
pub fn circle_radius(n: usize, delta: f64) -> f64 {
    delta / (2.0 * (PI / n as f64).sin())
}

/// `delta / (2 sin(3 pi / N))`.
pub fn circle3_radius(n: usize, delta: f64) -> f64 {
    delta / (2.0 * (3.0 * PI / n as f64).sin())
}

/// `N` evenly spaced points on a circle in the `x`-`y` plane whose chord is
/// `delta`.
pub fn gen_circle(n: usize, delta: f64, ts: f64) -> Result<Trajectory> {
    check_step(delta, ts)?;
    if n < 3 {
        return Err(invalid("n", "circle needs at least 3 snapshots"));
    }
    let r = circle_radius(n, delta);
    let pts: Vec<_> = (0..n)
        .map(|k| {
            let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
            Vector3::new(r * c, r * s, 0.0)
        })
        .collect();
    Trajectory::through_points(&pts, ts)
}

fn circle3_points(n: usize, delta: f64) -> Result<Vec<Vector3<f64>>> {
    if n == 0 || !n.is_multiple_of(12) {
        return Err(invalid("n", format!("{n} is not a positive multiple of 12")));
    }
    let r = circle3_radius(n, delta);
    let m = n / 3;
    let at = |k: usize| (2.0 * PI * k as f64 / m as f64).sin_cos();
    let mut pts = Vec::with_capacity(n + 1);
    // x-z loop from +x
    pts.extend((0..m).map(|k| {
        let (s, c) = at(k);
        Vector3::new(r * c, 0.0, r * s)
    }));
    // x-y plane, clockwise from +x; three quarters reach +y
    let xy = |k: usize| {
        let (s, c) = at(k);
        Vector3::new(r * c, -r * s, 0.0)
    };
    pts.extend((0..3 * m / 4).map(xy));
    // y-z loop from +y
    pts.extend((0..m).map(|k| {
        let (s, c) = at(k);
        Vector3::new(0.0, r * c, r * s)
    }));
    // last quarter of the x-y loop
    pts.extend((3 * m / 4..m).map(xy));
    Ok(pts)
}

/// Three orthogonal circles of chord `delta`, `N / 3` samples each, traversed
/// as one continuous path starting on the `+x` axis. The sample covariance is
/// exactly `(r^2 / 3) I`.
pub fn gen_circle3(n: usize, delta: f64, ts: f64) -> Result<Trajectory> {
    check_step(delta, ts)?;
    Trajectory::through_points(&circle3_points(n, delta)?, ts)
}

/// The same path with the final step back to the start appended (`N + 1`
/// snapshots).
pub fn gen_circle3_closed(n: usize, delta: f64, ts: f64) -> Result<Trajectory> {
    check_step(delta, ts)?;
    let mut pts = circle3_points(n, delta)?;
    pts.push(pts[0]);
    Trajectory::through_points(&pts, ts)
}

/// Element positions of a 4 x 4 fixed array, centered, in the `x`-`y` plane.
pub fn fpa_elements(kind: BenchmarkKind, wavelength: f64) -> Result<Vec<Vector3<f64>>> {
    let coords: [f64; 4] = match kind {
        BenchmarkKind::FpaUpa => [0.0, 1.0, 2.0, 3.0],
        BenchmarkKind::FpaCpa => [0.0, 2.0, 3.0, 4.0],
        _ => return Err(invalid("kind", "not a fixed array")),
    };
    if !(wavelength > 0.0) {
        return Err(invalid("wavelength", "must be positive"));
    }
    let half = wavelength / 2.0;
    let mean = coords.iter().sum::<f64>() / 4.0;
    let mut out = Vec::with_capacity(FPA_ELEMENTS);
    for p in coords {
        for q in coords {
            out.push(Vector3::new((p - mean) * half, (q - mean) * half, 0.0));
        }
    }
    Ok(out)
}

/// A fixed array observed for `n` snapshots, as `16 n` samples.
pub fn gen_fpa(kind: BenchmarkKind, n: usize, wavelength: f64) -> Result<SampleSet> {
    SampleSet::replicated(&fpa_elements(kind, wavelength)?, n)
}

/// Per-axis extent `max - min` of a sample set.
pub fn aperture<P: Positions + ?Sized>(samples: &P) -> Vector3<f64> {
    let (lo, hi) = bounding_box(samples.positions());
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{apv_covariance, check_feasibility, MovementRegion};
    use crate::metrics::isotropy_report;

    fn chords(t: &Trajectory) -> Vec<f64> {
        t.positions().windows(2).map(|w| (w[1] - w[0]).norm()).collect()
    }

    #[test]
    fn small_upg() {
        let t = gen_upg(4, 1.0, 1.0).unwrap();
        assert!(chords(&t).iter().all(|c| (c - 1.0).abs() < 1e-15));
        assert_eq!(aperture(&t), Vector3::new(1.0, 1.0, 0.0));
        let u = apv_covariance(&gen_upg(49, 0.3, 1.0).unwrap());
        let m = u.matrix();
        assert_eq!((m[(2, 2)], m[(0, 2)], m[(1, 2)]), (0.0, 0.0, 0.0));
        assert!(gen_upg(5, 1.0, 1.0).is_err());
    }

    #[test]
    fn square_circle() {
        let t = gen_circle(4, 2f64.sqrt(), 1.0).unwrap();
        let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, w) in t.positions().iter().zip(want) {
            assert!((p.x - w.0).abs() < 1e-12 && (p.y - w.1).abs() < 1e-12);
        }
        let r = circle_radius(64, 0.01);
        let u = apv_covariance(&gen_circle(64, 0.01, 1.0).unwrap());
        let want = nalgebra::Matrix3::from_diagonal(&Vector3::new(r * r / 2.0, r * r / 2.0, 0.0));
        assert!((u.matrix() - want).norm() < 1e-12);
        assert!(gen_circle(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn circle3_is_isotropic_and_closed() {
        let delta = 1e-3;
        let t = gen_circle3(1200, delta, 1e-4).unwrap();
        assert_eq!(t.snapshots(), 1200);
        let rep = isotropy_report(&apv_covariance(&t), 1e-9);
        assert!(rep.deviation < 1e-9, "deviation {}", rep.deviation);
        assert!(chords(&t).iter().all(|c| (c - delta).abs() < 1e-12));
        let closed = gen_circle3_closed(1200, delta, 1e-4).unwrap();
        let p = closed.positions();
        assert!((p[p.len() - 1] - p[0]).norm() < 1e-12);
        assert!(chords(&closed).iter().all(|c| (c - delta).abs() < 1e-12));
        assert!(gen_circle3(1201, delta, 1.0).is_err());
    }

    #[test]
    fn full_scale_radii() {
        let lam = 0.05;
        let delta = 2e-3 * lam;
        assert!((circle_radius(16000, delta) / lam - 5.09).abs() < 0.01);
        assert!((circle3_radius(16000, delta) / lam - 1.70).abs() < 0.01);
        assert!((upg_nominal_aperture(16000, delta) / lam - 0.253).abs() < 1e-3);
    }

    #[test]
    fn fixed_arrays() {
        let lam = 0.05;
        let upa = gen_fpa(BenchmarkKind::FpaUpa, 10, lam).unwrap();
        assert_eq!(upa.sample_count(), 160);
        assert!((aperture(&upa) - Vector3::new(1.5 * lam, 1.5 * lam, 0.0)).norm() < 1e-15);
        let cpa = gen_fpa(BenchmarkKind::FpaCpa, 1, lam).unwrap();
        assert!((aperture(&cpa) - Vector3::new(2.0 * lam, 2.0 * lam, 0.0)).norm() < 1e-15);
        let u1 = apv_covariance(&gen_fpa(BenchmarkKind::FpaCpa, 1, lam).unwrap());
        let u7 = apv_covariance(&gen_fpa(BenchmarkKind::FpaCpa, 7, lam).unwrap());
        assert!((u1.matrix() - u7.matrix()).norm() < 1e-15);
        assert!(gen_fpa(BenchmarkKind::Circle, 1, lam).is_err());
    }

    #[test]
    fn generators_are_feasible_for_their_own_box() {
        let delta = 2e-4;
        let ts = 1e-5;
        for t in [
            gen_upg(144, delta, ts).unwrap(),
            gen_circle(144, delta, ts).unwrap(),
            gen_circle3(144, delta, ts).unwrap(),
            gen_circle3_closed(144, delta, ts).unwrap(),
        ] {
            let (lo, hi) = t.bounding_box();
            let half = ((hi - lo) / 2.0).map(|h| h.max(1e-9));
            let region = MovementRegion::new((lo + hi) / 2.0, half).unwrap();
            assert!(check_feasibility(&t, &region, delta / ts).is_feasible());
            assert!((t.max_speed() - delta / ts).abs() < 1e-9 * delta / ts);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("circle3".parse::<BenchmarkKind>().unwrap(), BenchmarkKind::Circle3);
        assert_eq!("FPA_UPA".parse::<BenchmarkKind>().unwrap(), BenchmarkKind::FpaUpa);
        assert!("helix".parse::<BenchmarkKind>().is_err());
    }
}
