use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Physical constants of one sensing experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingScenario {
    wavelength: f64,
    tx_power: f64,
    noise_power: f64,
    channel_gain: Complex64,
    sampling_period: f64,
    snapshots: usize,
}

impl SensingScenario {
    pub fn new(
        wavelength: f64,
        tx_power: f64,
        noise_power: f64,
        channel_gain: Complex64,
        sampling_period: f64,
        snapshots: usize,
    ) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(invalid("wavelength", "must be positive"));
        }
        if !(tx_power > 0.0 && tx_power.is_finite()) {
            return Err(invalid("tx_power", "must be positive"));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(invalid("noise_power", "must be positive"));
        }
        if !(channel_gain.norm_sqr() > 0.0) {
            return Err(invalid("channel_gain", "must be non-zero"));
        }
        if !(sampling_period > 0.0) {
            return Err(invalid("sampling_period", "must be positive"));
        }
        if snapshots < 2 {
            return Err(invalid("snapshots", "need at least two"));
        }
        Ok(Self {
            wavelength,
            tx_power,
            noise_power,
            channel_gain,
            sampling_period,
            snapshots,
        })
    }

    /// Unit power and unit gain, noise set from `P|beta|^2 / sigma^2` in dB.
    pub fn from_snr_db(wavelength: f64, snr_db: f64, sampling_period: f64, snapshots: usize) -> Result<Self> {
        let noise = 10f64.powf(-snr_db / 10.0);
        Self::new(wavelength, 1.0, noise, Complex64::new(1.0, 0.0), sampling_period, snapshots)
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn channel_gain(&self) -> Complex64 {
        self.channel_gain
    }

    pub fn sampling_period(&self) -> f64 {
        self.sampling_period
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.tx_power * self.channel_gain.norm_sqr() / self.noise_power).log10()
    }

    /// Wavenumber `2 pi / lambda`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// `rho = sigma^2 lambda^2 / (8 pi^2 P N |beta|^2)`.
    pub fn rho(&self) -> f64 {
        self.noise_power * self.wavelength.powi(2)
            / (8.0 * PI * PI * self.tx_power * self.snapshots as f64 * self.channel_gain.norm_sqr())
    }

    pub fn with_snapshots(self, snapshots: usize) -> Result<Self> {
        Self::new(
            self.wavelength,
            self.tx_power,
            self.noise_power,
            self.channel_gain,
            self.sampling_period,
            snapshots,
        )
    }

    pub fn with_noise_power(self, noise_power: f64) -> Result<Self> {
        Self::new(
            self.wavelength,
            self.tx_power,
            noise_power,
            self.channel_gain,
            self.sampling_period,
            self.snapshots,
        )
    }

    pub fn with_snr_db(self, snr_db: f64) -> Result<Self> {
        let noise = self.tx_power * self.channel_gain.norm_sqr() * 10f64.powf(-snr_db / 10.0);
        self.with_noise_power(noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_formula() {
        let s = SensingScenario::new(0.05, 2.0, 0.5, Complex64::new(0.0, 2.0), 1e-5, 100).unwrap();
        let expected = 0.5 * 0.0025 / (8.0 * PI * PI * 2.0 * 100.0 * 4.0);
        assert!((s.rho() - expected).abs() < 1e-18);
        assert!((s.snr_db() - 10.0 * 16f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn snr_round_trip() {
        let s = SensingScenario::from_snr_db(0.05, -15.0, 1e-5, 10).unwrap();
        assert!((s.snr_db() + 15.0).abs() < 1e-12);
        assert!((s.with_snr_db(7.0).unwrap().snr_db() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid() {
        assert!(SensingScenario::new(0.0, 1.0, 1.0, Complex64::new(1.0, 0.0), 1.0, 4).is_err());
        assert!(SensingScenario::new(1.0, 1.0, 1.0, Complex64::new(0.0, 0.0), 1.0, 4).is_err());
        assert!(SensingScenario::new(1.0, 1.0, 1.0, Complex64::new(1.0, 0.0), 1.0, 1).is_err());
    }
}
