//! MSAEB over the whole sphere for a planar circle, written as CSV. The
//! bound grows without limit towards the circle's plane.

use masense::geometry::AngleVector;
use masense::metrics::{msaeb_map, write_map_csv, AngleGrid, SensingScenario};
use masense::trajectories::gen_circle;

fn main() -> masense::Result<()> {
    let (wavelength, ts, n) = (0.05, 1e-5, 2000);
    let t = gen_circle(n, 1e-4, ts)?;
    let scen = SensingScenario::from_snr_db(wavelength, -15.0, ts, n)?;
    let grid: Vec<AngleVector> = AngleGrid::from_degrees((0.0, 180.0, 37), (0.0, 360.0, 73))?.points();
    let values = msaeb_map(&t, &grid, &scen)?;
    for theta in [0.0, 45.0, 80.0, 89.0, 90.0] {
        let v = msaeb_map(&t, &[AngleVector::from_degrees(theta, 0.0)?], &scen)?[0];
        eprintln!("theta {theta:>4.0} deg: {v:.4e} rad^2");
    }
    write_map_csv(&grid, &values, std::io::stdout())
}
