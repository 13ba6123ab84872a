//! The five benchmark geometries at full scale: aperture, isotropy
//! and the bound at a few directions.

use masense::geometry::{apv_covariance, AngleVector};
use masense::metrics::{isotropy_report, msaeb, SensingScenario};
use masense::trajectories::{aperture, BenchmarkKind, BenchmarkSpec};

fn main() -> masense::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(15876);
    let (wavelength, ts) = (0.05, 1e-5);
    let delta = 10.0 * ts;
    let dirs = [(10.0, 0.0), (45.0, 45.0), (85.0, 90.0)];
    println!("N = {n}, step {:.1e} lambda", delta / wavelength);
    for kind in BenchmarkKind::ALL {
        let spec = BenchmarkSpec { kind, n, delta, wavelength, sampling_period: ts };
        let b = match spec.generate() {
            Ok(b) => b,
            Err(e) => {
                println!("{:>8}: {e}", kind.name());
                continue;
            }
        };
        let scen = SensingScenario::from_snr_db(wavelength, -15.0, ts, spec.effective_samples())?;
        let iso = isotropy_report(&apv_covariance(&b), 1e-9);
        let ap = aperture(&b) / wavelength;
        let bounds: Vec<String> = dirs
            .iter()
            .map(|&(t, p)| Ok(format!("{:.3e}", msaeb(&b, AngleVector::from_degrees(t, p)?, &scen)?.msaeb)))
            .collect::<masense::Result<_>>()?;
        println!(
            "{:>8}: aperture {:.3} x {:.3} x {:.3} lambda, isotropic {:<5}  msaeb at 10/45/85 deg: {}",
            kind.name(),
            ap.x,
            ap.y,
            ap.z,
            iso.is_isotropic,
            bounds.join("  ")
        );
    }
    Ok(())
}
