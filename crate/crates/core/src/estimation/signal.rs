//! Received signal synthesis.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{AngleVector, Positions};
use crate::metrics::{steering_vector, SensingScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignalOptions {
    /// Omit the noise term.
    pub noiseless: bool,
    /// Draw the pilot phase uniformly at random instead of using `sqrt(P)`.
    pub random_symbol_phase: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub samples: Vec<Complex64>,
    pub scenario: SensingScenario,
    pub true_chi: AngleVector,
    pub seed: u64,
}

/// Generator for trial `trial` of a run seeded with `seed`. Each trial has
/// its own stream, so trials can be drawn in any order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `y = beta s alpha(R, eta) + n` with `n ~ CN(0, sigma^2 I)`.
pub fn synthesize_signal<P: Positions + ?Sized>(
    samples: &P,
    chi: AngleVector,
    scen: &SensingScenario,
    seed: u64,
    opts: SignalOptions,
) -> Result<ReceivedSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    synthesize_with(samples, chi, scen, &mut rng, opts).map(|samples| ReceivedSignal {
        samples,
        scenario: *scen,
        true_chi: chi,
        seed,
    })
}

pub(crate) fn synthesize_with<P: Positions + ?Sized, R: Rng>(
    samples: &P,
    chi: AngleVector,
    scen: &SensingScenario,
    rng: &mut R,
    opts: SignalOptions,
) -> Result<Vec<Complex64>> {
    if samples.sample_count() != scen.snapshots() {
        return Err(Error::DimensionMismatch(format!(
            "{} samples but the scenario has N = {}",
            samples.sample_count(),
            scen.snapshots()
        )));
    }
    let mut s = Complex64::new(scen.tx_power().sqrt(), 0.0);
    if opts.random_symbol_phase {
        s *= Complex64::cis(rng.random_range(0.0..std::f64::consts::TAU));
    }
    let b = scen.channel_gain() * s;
    let sd = (scen.noise_power() / 2.0).sqrt();
    let alpha = steering_vector(samples, &chi.direction(), scen.wavelength());
    Ok(alpha
        .into_iter()
        .map(|a| {
            let clean = b * a;
            if opts.noiseless {
                clean
            } else {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                clean + Complex64::new(re, im) * sd
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectories::gen_circle3;

    fn setup(n: usize, snr: f64) -> (crate::geometry::Trajectory, SensingScenario) {
        let t = gen_circle3(n, 0.1, 1e-3).unwrap();
        (t, SensingScenario::from_snr_db(1.0, snr, 1e-3, n).unwrap())
    }

    #[test]
    fn noiseless_has_constant_modulus() {
        let (t, scen) = setup(120, 10.0);
        let chi = AngleVector::from_degrees(30.0, 20.0).unwrap();
        let opts = SignalOptions { noiseless: true, ..Default::default() };
        let y = synthesize_signal(&t, chi, &scen, 1, opts).unwrap();
        for v in &y.samples {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn seeded_output_is_reproducible() {
        let (t, scen) = setup(120, 0.0);
        let chi = AngleVector::from_degrees(30.0, 20.0).unwrap();
        let a = synthesize_signal(&t, chi, &scen, 9, SignalOptions::default()).unwrap();
        let b = synthesize_signal(&t, chi, &scen, 9, SignalOptions::default()).unwrap();
        assert_eq!(a, b);
        let c = synthesize_signal(&t, chi, &scen, 10, SignalOptions::default()).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn noise_variance_matches_sigma2() {
        let n = 100_008;
        let t = gen_circle3(n, 1e-3, 1e-3).unwrap();
        let scen = SensingScenario::from_snr_db(1.0, -3.0, 1e-3, n).unwrap();
        let chi = AngleVector::from_degrees(70.0, 200.0).unwrap();
        let clean = synthesize_signal(&t, chi, &scen, 3, SignalOptions { noiseless: true, ..Default::default() }).unwrap();
        let noisy = synthesize_signal(&t, chi, &scen, 3, SignalOptions::default()).unwrap();
        let var = noisy
            .samples
            .iter()
            .zip(&clean.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((var / scen.noise_power() - 1.0).abs() < 0.02, "{var}");
    }
}
