//! Monte Carlo MSAE of the grid-search MLE against the closed-form bound for
//! a trajectory optimized towards one direction.

use masense::estimation::{monte_carlo_msae, McConfig, MleGrid};
use masense::geometry::{AngleVector, MovementRegion};
use masense::metrics::SensingScenario;
use masense::sca::{optimize_single_direction, AngularRegion, OptimizationProblem};

fn main() -> masense::Result<()> {
    let (wavelength, n, ts) = (1.0, 400, 1e-3);
    let chi = AngleVector::from_degrees(45.0, 45.0)?;
    let problem = OptimizationProblem {
        region: MovementRegion::unbounded(),
        vmax: 0.08 * wavelength / ts,
        ts,
        n,
        angular: AngularRegion::single(chi),
        velocity_block: 8,
        epsilon: 1e-4,
        max_outer_iters: 50,
        dense_count: 1,
    };
    let traj = optimize_single_direction(&problem, chi)?.trajectory;
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let res = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let mut mc = McConfig::new(trials, 7);
    mc.grid = MleGrid::with_resolution(res);
    for snr in [-5.0, 0.0] {
        let scen = SensingScenario::from_snr_db(wavelength, snr, ts, n)?;
        let start = std::time::Instant::now();
        let r = monte_carlo_msae(&traj, chi, &scen, &mc)?;
        println!(
            "SNR {snr:>5.1} dB: msae {:.4e} [{:.4e}, {:.4e}]  msaeb {:.4e}  ratio {:.3}  ({:.1}s)",
            r.msae,
            r.ci95.0,
            r.ci95.1,
            r.msaeb,
            r.msae / r.msaeb,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
