//! Optimizes a trajectory for the worst direction inside an elevation cap
//! and compares it with the three-circle starting point.

use masense::geometry::MovementRegion;
use masense::sca::{optimize, AngularRegion, GridLayout, OptimizationProblem, DENSE_GRID_COUNT};

fn main() -> masense::Result<()> {
    let layout: GridLayout = std::env::args().nth(1).map_or(Ok(GridLayout::Product), |s| s.parse())?;
    let problem = OptimizationProblem {
        region: MovementRegion::cube(0.25)?,
        vmax: 10.0,
        ts: 1e-5,
        n: 600,
        angular: AngularRegion::from_degrees((0.0, 80.0), (0.0, 360.0), 20, layout)?,
        velocity_block: 25,
        epsilon: 1e-4,
        max_outer_iters: 30,
        dense_count: DENSE_GRID_COUNT,
    };
    let out = optimize(&problem)?;
    for it in &out.trace.iterations {
        println!(
            "iter {:>2}  grid {:.6e}  dense {:.6e}  {:>7.3}s  newton {}",
            it.iter, it.delta_grid, it.delta_dense, it.seconds, it.newton_steps
        );
    }
    for d in &out.trace.diagnostics {
        println!("note: {d}");
    }
    println!("path length {:.4} m, max speed {:.4} m/s", out.trajectory.path_length(), out.trajectory.max_speed());
    let dense = masense::sca::dense_grid(&problem.angular.with_count(1000)?, 1000)?;
    let pd = AngularRegion::from_degrees((0.0, 80.0), (0.0, 360.0), 1000, GridLayout::Product)?.discretize();
    let u = masense::geometry::apv_covariance(&out.trajectory);
    let w = |g: &[masense::geometry::AngleVector]| g.iter().map(|c| masense::metrics::geometry_factor(&u, *c)).fold(0.0, f64::max);
    println!("dense same-layout {:.6e} product {:.6e}", w(&dense), w(&pd));
    Ok(())
}
