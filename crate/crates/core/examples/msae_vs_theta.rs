//! MSAE against elevation for the three-circle path and a planar circle of
//! the same radius, written as CSV to stdout.

use masense::estimation::{sweep, Experiment, McConfig, MleGrid, Source, SweepConfig};
use masense::geometry::AngleVector;
use masense::metrics::AngleGrid;
use masense::trajectories::{gen_circle, gen_circle3};

fn main() -> masense::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let radius = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(2004);
    let res = args.next().and_then(|s| s.parse().ok()).unwrap_or(4.0);
    let (wavelength, ts) = (1.0, 1e-3);
    // step lengths that give both paths the same radius
    let circle_step = 2.0 * radius * (std::f64::consts::PI / n as f64).sin();
    let circle3_step = 2.0 * radius * (3.0 * std::f64::consts::PI / n as f64).sin();
    let mut mc = McConfig::new(trials, 3);
    mc.grid = MleGrid::with_resolution(res);
    let cfg = SweepConfig {
        sources: vec![
            Source::new("circle3", &gen_circle3(n, circle3_step, ts)?),
            Source::new("circle", &gen_circle(n, circle_step, ts)?),
        ],
        wavelength,
        sampling_period: ts,
        target: AngleVector::from_degrees(45.0, 0.0)?,
        theta_deg: vec![5.0, 25.0, 45.0, 65.0, 85.0],
        phi_deg: 0.0,
        snr_db: -15.0,
        mc,
        correlation_grid: AngleGrid::from_degrees((0.0, 180.0, 2), (0.0, 360.0, 2))?,
    };
    sweep(Experiment::MsaeVsTheta, &cfg)?.write_csv(std::io::stdout())
}
