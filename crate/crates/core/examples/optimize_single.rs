//! Optimizes for one target direction and compares the bound against the
//! benchmark trajectories and fixed arrays.

use masense::geometry::{apv_covariance, AngleVector, MovementRegion};
use masense::metrics::{msaeb, SensingScenario};
use masense::sca::{optimize_single_direction, AngularRegion, OptimizationProblem};
use masense::trajectories::{BenchmarkKind, BenchmarkSpec};

fn main() -> masense::Result<()> {
    let wavelength = 1.0;
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().expect("integer argument"));
    let (n, ts) = (args.next().unwrap_or(408), 1e-3);
    let block = args.next().unwrap_or(8);
    let delta = 0.08 * wavelength;
    let chi = AngleVector::from_degrees(45.0, 45.0)?;
    let problem = OptimizationProblem {
        region: MovementRegion::unbounded(),
        vmax: delta / ts,
        ts,
        n,
        angular: AngularRegion::single(chi),
        velocity_block: block,
        epsilon: 1e-4,
        max_outer_iters: 100,
        dense_count: 1,
    };
    let out = optimize_single_direction(&problem, chi)?;
    for it in &out.trace.iterations {
        println!("  iter {:>3}  F {:.6e}", it.iter, it.delta_grid);
    }
    for d in &out.trace.diagnostics {
        println!("  note: {d}");
    }
    let scen = SensingScenario::from_snr_db(wavelength, 0.0, ts, n)?;
    let opt = msaeb(&out.trajectory, chi, &scen)?.msaeb;
    let u = apv_covariance(&out.trajectory);
    let eta = chi.direction();
    println!(
        "optimized: msaeb {opt:.4e}  iterations {}  out-of-plane share {:.2e}",
        out.trace.outer_iterations(),
        u.form(eta.as_vector(), eta.as_vector()) / u.trace()
    );
    for kind in BenchmarkKind::ALL {
        let spec = BenchmarkSpec { kind, n, delta, wavelength, sampling_period: ts };
        let b = spec.generate()?;
        let m = msaeb(&b, chi, &scen.with_snapshots(spec.effective_samples())?)?.msaeb;
        println!("{:>8}: msaeb {m:.4e}  ratio {:.2}", kind.name(), m / opt);
    }
    Ok(())
}
