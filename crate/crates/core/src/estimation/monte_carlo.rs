//! Monte Carlo estimation of the mean square angular error.

use rayon::prelude::*;

use super::mle::{angular_error, mle_estimate_batch, MleGrid};
use super::signal::{synthesize_with, trial_rng, SignalOptions};
use crate::error::{invalid, Result};
use crate::geometry::{AngleVector, Positions};
use crate::metrics::{msaeb, SensingScenario};

/// Trials whose estimates share one pass over the coarse grid.
const TRIAL_CHUNK: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub trials: usize,
    /// SNR points for sweeps (dB).
    pub snr_db: Vec<f64>,
    pub grid: MleGrid,
    pub seed: u64,
    pub signal: SignalOptions,
}

impl McConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            snr_db: Vec::new(),
            grid: MleGrid::default(),
            seed,
            signal: SignalOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        self.grid.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    /// Mean of the squared angular errors (rad^2).
    pub msae: f64,
    /// Normal-approximation 95% interval for `msae`.
    pub ci95: (f64, f64),
    /// Closed-form bound for the same scenario (rad^2).
    pub msaeb: f64,
    pub trials: usize,
}

/// Squared angular errors of the maximum-likelihood estimate, one per trial,
/// in trial order.
pub fn squared_errors<P: Positions + Sync + ?Sized>(
    samples: &P,
    chi: AngleVector,
    scen: &SensingScenario,
    mc: &McConfig,
) -> Result<Vec<f64>> {
    mc.validate()?;
    let eta = chi.direction();
    let chunks: Vec<(usize, usize)> = (0..mc.trials)
        .step_by(TRIAL_CHUNK)
        .map(|s| (s, (s + TRIAL_CHUNK).min(mc.trials)))
        .collect();
    let parts = chunks
        .par_iter()
        .map(|&(lo, hi)| -> Result<Vec<f64>> {
            let ys = (lo..hi)
                .map(|t| synthesize_with(samples, chi, scen, &mut trial_rng(mc.seed, t as u64), mc.signal))
                .collect::<Result<Vec<_>>>()?;
            let est = mle_estimate_batch(&ys, samples, scen.wavelength(), &mc.grid)?;
            Ok(est.iter().map(|e| angular_error(&eta, &e.eta).powi(2)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

pub fn summarize(errors: &[f64], bound: f64) -> McResult {
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let var = if errors.len() > 1 {
        errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let half = 1.96 * (var / n).sqrt();
    McResult {
        msae: mean,
        ci95: (mean - half, mean + half),
        msaeb: bound,
        trials: errors.len(),
    }
}

/// MSAE of the grid-search MLE over `mc.trials` independent noise draws,
/// next to the closed-form bound. Results do not depend on the thread count.
pub fn monte_carlo_msae<P: Positions + Sync + ?Sized>(
    samples: &P,
    chi: AngleVector,
    scen: &SensingScenario,
    mc: &McConfig,
) -> Result<McResult> {
    let bound = msaeb(samples, chi, scen)?.msaeb;
    Ok(summarize(&squared_errors(samples, chi, scen, mc)?, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectories::{gen_circle, gen_circle3};

    #[test]
    fn high_snr_error_is_resolution_limited() {
        let t = gen_circle3(60, 0.5, 1e-3).unwrap();
        let scen = SensingScenario::from_snr_db(1.0, 200.0, 1e-3, 60).unwrap();
        let chi = AngleVector::from_degrees(33.3, 77.7).unwrap();
        let mut mc = McConfig::new(4, 1);
        mc.grid = MleGrid::with_resolution(3.0);
        let r = monte_carlo_msae(&t, chi, &scen, &mc).unwrap();
        let cell = (mc.grid.final_step_deg().to_radians() * 2f64.sqrt()).powi(2);
        assert!(r.msae <= cell);
    }

    #[test]
    fn deterministic_and_chunk_independent() {
        let t = gen_circle3(36, 0.4, 1e-3).unwrap();
        let scen = SensingScenario::from_snr_db(1.0, 0.0, 1e-3, 36).unwrap();
        let chi = AngleVector::from_degrees(50.0, 10.0).unwrap();
        let mut mc = McConfig::new(TRIAL_CHUNK + 5, 42);
        mc.grid = MleGrid { resolution_deg: 6.0, refinements: 1, ..MleGrid::default() };
        let a = squared_errors(&t, chi, &scen, &mc).unwrap();
        let b = squared_errors(&t, chi, &scen, &mc).unwrap();
        assert_eq!(a, b);
        let mut head = mc.clone();
        head.trials = 3;
        assert_eq!(squared_errors(&t, chi, &scen, &head).unwrap(), a[..3]);
    }

    #[test]
    fn planar_circle_degrades_towards_endfire() {
        let t = gen_circle(64, 0.5, 1e-3).unwrap();
        let scen = SensingScenario::from_snr_db(1.0, 0.0, 1e-3, 64).unwrap();
        let mut mc = McConfig::new(60, 5);
        mc.grid = MleGrid { resolution_deg: 2.0, ..MleGrid::default() };
        let lo = monte_carlo_msae(&t, AngleVector::from_degrees(10.0, 0.0).unwrap(), &scen, &mc).unwrap();
        let hi = monte_carlo_msae(&t, AngleVector::from_degrees(85.0, 0.0).unwrap(), &scen, &mc).unwrap();
        assert!(hi.msae > 10.0 * lo.msae, "{} vs {}", hi.msae, lo.msae);
    }

    #[test]
    fn interval_brackets_mean() {
        let r = summarize(&[1.0, 2.0, 3.0, 4.0], 0.5);
        assert_eq!(r.msae, 2.5);
        assert!(r.ci95.0 < 2.5 && r.ci95.1 > 2.5);
        assert_eq!(summarize(&[2.0], 0.0).ci95, (2.0, 2.0));
    }
}
