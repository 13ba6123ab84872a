//! Steering-vector correlation around a target for the planar circle and
//! the three-circle path, with the strongest response away from the target.

use masense::geometry::AngleVector;
use masense::metrics::{correlation_map, AngleGrid};
use masense::trajectories::{gen_circle, gen_circle3};

fn main() -> masense::Result<()> {
    let (wavelength, ts, n) = (1.0, 1e-3, 1200);
    let target = AngleVector::from_degrees(60.0, 30.0)?;
    let grid = AngleGrid::from_degrees((0.0, 180.0, 181), (0.0, 360.0, 361))?.points();
    let radius = 1.0;
    let paths = [
        ("circle", gen_circle(n, 2.0 * radius * (std::f64::consts::PI / n as f64).sin(), ts)?),
        ("circle3", gen_circle3(n, 2.0 * radius * (3.0 * std::f64::consts::PI / n as f64).sin(), ts)?),
    ];
    for (name, t) in &paths {
        let map = correlation_map(t, &target.direction(), &grid, wavelength);
        let eta = target.direction();
        let (mut best, mut at) = (0.0, target);
        for (chi, v) in grid.iter().zip(&map) {
            let sep = masense::estimation::angular_error(&chi.direction(), &eta);
            if sep > 20f64.to_radians() && *v > best {
                best = *v;
                at = *chi;
            }
        }
        let mirror = AngleVector::from_degrees(180.0 - target.theta_deg(), target.phi_deg())?;
        let i = grid.iter().position(|c| (c.theta_deg() - mirror.theta_deg()).abs() < 1e-9 && (c.phi_deg() - mirror.phi_deg()).abs() < 1e-9);
        println!(
            "{name:>8}: strongest response beyond 20 deg {best:.3} at ({:.0}, {:.0}) deg; mirror direction {:.3}",
            at.theta_deg(),
            at.phi_deg(),
            i.map_or(f64::NAN, |i| map[i])
        );
    }
    Ok(())
}
