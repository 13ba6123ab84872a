//! Closed-form direction bounds for a random trajectory, checked against the
//! full Fisher information matrix.

use masense::geometry::{apv_covariance, AngleVector, Trajectory};
use masense::metrics::{fim_oracle, msaeb, SensingScenario};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> masense::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (wavelength, ts, n) = (0.05, 1e-5, 48);
    let waypoints: Vec<_> = (0..n)
        .map(|_| Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 0.02)
        .collect();
    let traj = Trajectory::through_points(&waypoints, ts)?;
    let scen = SensingScenario::from_snr_db(wavelength, 0.0, ts, n)?;
    println!("U eigenvalues (m^2): {:?}", apv_covariance(&traj).eigenvalues().as_slice());
    println!("{:>6} {:>6} {:>12} {:>12} {:>12} {:>10}", "theta", "phi", "crb_theta", "crb_phi", "msaeb", "oracle err");
    for (t, p) in [(10.0, 0.0), (45.0, 45.0), (80.0, 200.0), (120.0, 300.0)] {
        let chi = AngleVector::from_degrees(t, p)?;
        let b = msaeb(&traj, chi, &scen)?;
        let fim = fim_oracle(&traj, chi, scen.channel_gain() * scen.tx_power().sqrt(), &scen);
        let err = ((b.crb_theta - fim.crb_theta()) / fim.crb_theta()).abs().max(((b.crb_phi - fim.crb_phi()) / fim.crb_phi()).abs());
        println!("{t:>6.1} {p:>6.1} {:>12.4e} {:>12.4e} {:>12.4e} {err:>10.2e}", b.crb_theta, b.crb_phi, b.msaeb);
    }
    Ok(())
}
