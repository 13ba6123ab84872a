//! Named experiments that produce CSV datasets.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use nalgebra::Vector3;

use super::monte_carlo::{monte_carlo_msae, McConfig};
use super::mle::{angular_error, mle_estimate_batch};
use super::signal::{synthesize_with, trial_rng, SignalOptions};
use crate::error::{Error, Result};
use crate::geometry::{io::fmt_f64, AngleVector, Positions};
use crate::metrics::{correlation_map, AngleGrid, SensingScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    MsaeVsSnr,
    MsaeVsTheta,
    CorrelationFig,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::MsaeVsSnr => "msae_vs_snr",
            Experiment::MsaeVsTheta => "msae_vs_theta",
            Experiment::CorrelationFig => "correlation_fig",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            Experiment::MsaeVsSnr => &["snr_db", "source", "msae_rad2", "msaeb_rad2", "ci95_lo", "ci95_hi", "trials"],
            Experiment::MsaeVsTheta => &["theta_deg", "source", "msae_rad2", "msaeb_rad2"],
            Experiment::CorrelationFig => &["theta_deg", "phi_deg", "value", "source"],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace('-', "_").as_str() {
            "msae_vs_snr" => Ok(Experiment::MsaeVsSnr),
            "msae_vs_theta" => Ok(Experiment::MsaeVsTheta),
            "correlation_fig" => Ok(Experiment::CorrelationFig),
            _ => Err(Error::UnknownExperiment(s.to_string())),
        }
    }
}

/// A named set of antenna positions (a trajectory or a replicated array).
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    pub name: String,
    pub positions: Vec<Vector3<f64>>,
}

impl Source {
    pub fn new<P: Positions + ?Sized>(name: impl Into<String>, samples: &P) -> Self {
        Self {
            name: name.into(),
            positions: samples.positions().to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub sources: Vec<Source>,
    pub wavelength: f64,
    pub sampling_period: f64,
    /// Target for the SNR sweep and the correlation maps.
    pub target: AngleVector,
    /// Elevations for the theta sweep (deg).
    pub theta_deg: Vec<f64>,
    /// Azimuth for the theta sweep (deg).
    pub phi_deg: f64,
    /// SNR for the theta sweep (dB).
    pub snr_db: f64,
    /// Trials, seed, search grid and the SNR list of the SNR sweep.
    pub mc: McConfig,
    pub correlation_grid: AngleGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrRow {
    /// `inf` for the noise-free anchor.
    pub snr_db: f64,
    pub source: String,
    pub msae: f64,
    pub msaeb: f64,
    pub ci95: (f64, f64),
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRow {
    pub theta_deg: f64,
    pub source: String,
    pub msae: f64,
    pub msaeb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub value: f64,
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Snr(Vec<SnrRow>),
    Theta(Vec<ThetaRow>),
    Correlation(Vec<CorrelationRow>),
}

impl Dataset {
    pub fn experiment(&self) -> Experiment {
        match self {
            Dataset::Snr(_) => Experiment::MsaeVsSnr,
            Dataset::Theta(_) => Experiment::MsaeVsTheta,
            Dataset::Correlation(_) => Experiment::CorrelationFig,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Snr(r) => r.len(),
            Dataset::Theta(r) => r.len(),
            Dataset::Correlation(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.experiment().header())?;
        match self {
            Dataset::Snr(rows) => {
                for r in rows {
                    w.write_record([
                        fmt_f64(r.snr_db),
                        r.source.clone(),
                        fmt_f64(r.msae),
                        fmt_f64(r.msaeb),
                        fmt_f64(r.ci95.0),
                        fmt_f64(r.ci95.1),
                        r.trials.to_string(),
                    ])?;
                }
            }
            Dataset::Theta(rows) => {
                for r in rows {
                    w.write_record([fmt_f64(r.theta_deg), r.source.clone(), fmt_f64(r.msae), fmt_f64(r.msaeb)])?;
                }
            }
            Dataset::Correlation(rows) => {
                for r in rows {
                    w.write_record([fmt_f64(r.theta_deg), fmt_f64(r.phi_deg), fmt_f64(r.value), r.source.clone()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(experiment: Experiment, input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        if rd.headers()?.iter().ne(experiment.header().iter().copied()) {
            return Err(Error::Parse(format!("unexpected header for {experiment}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        let mut snr = Vec::new();
        let mut theta = Vec::new();
        let mut corr = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            match experiment {
                Experiment::MsaeVsSnr => snr.push(SnrRow {
                    snr_db: num(&rec[0])?,
                    source: rec[1].to_string(),
                    msae: num(&rec[2])?,
                    msaeb: num(&rec[3])?,
                    ci95: (num(&rec[4])?, num(&rec[5])?),
                    trials: rec[6].parse().map_err(|e| Error::Parse(format!("trials: {e}")))?,
                }),
                Experiment::MsaeVsTheta => theta.push(ThetaRow {
                    theta_deg: num(&rec[0])?,
                    source: rec[1].to_string(),
                    msae: num(&rec[2])?,
                    msaeb: num(&rec[3])?,
                }),
                Experiment::CorrelationFig => corr.push(CorrelationRow {
                    theta_deg: num(&rec[0])?,
                    phi_deg: num(&rec[1])?,
                    value: num(&rec[2])?,
                    source: rec[3].to_string(),
                }),
            }
        }
        Ok(match experiment {
            Experiment::MsaeVsSnr => Dataset::Snr(snr),
            Experiment::MsaeVsTheta => Dataset::Theta(theta),
            Experiment::CorrelationFig => Dataset::Correlation(corr),
        })
    }
}

fn scenario(cfg: &SweepConfig, src: &Source, snr_db: f64) -> Result<SensingScenario> {
    SensingScenario::from_snr_db(cfg.wavelength, snr_db, cfg.sampling_period, src.positions.len())
}

/// Noise-free squared error of each source, listed first with `snr_db = inf`.
fn anchor_row(cfg: &SweepConfig, src: &Source) -> Result<SnrRow> {
    let scen = scenario(cfg, src, 0.0)?;
    let opts = SignalOptions { noiseless: true, ..cfg.mc.signal };
    let y = synthesize_with(&src.positions, cfg.target, &scen, &mut trial_rng(cfg.mc.seed, 0), opts)?;
    let est = mle_estimate_batch(&[y], &src.positions, cfg.wavelength, &cfg.mc.grid)?;
    let e2 = angular_error(&cfg.target.direction(), &est[0].eta).powi(2);
    Ok(SnrRow {
        snr_db: f64::INFINITY,
        source: src.name.clone(),
        msae: e2,
        msaeb: 0.0,
        ci95: (e2, e2),
        trials: 1,
    })
}

pub fn msae_vs_snr(cfg: &SweepConfig) -> Result<Vec<SnrRow>> {
    let mut rows = cfg
        .sources
        .iter()
        .map(|s| anchor_row(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    for &snr in &cfg.mc.snr_db {
        for src in &cfg.sources {
            let r = monte_carlo_msae(&src.positions, cfg.target, &scenario(cfg, src, snr)?, &cfg.mc)?;
            rows.push(SnrRow {
                snr_db: snr,
                source: src.name.clone(),
                msae: r.msae,
                msaeb: r.msaeb,
                ci95: r.ci95,
                trials: r.trials,
            });
        }
    }
    Ok(rows)
}

pub fn msae_vs_theta(cfg: &SweepConfig) -> Result<Vec<ThetaRow>> {
    let mut rows = Vec::new();
    for src in &cfg.sources {
        let scen = scenario(cfg, src, cfg.snr_db)?;
        for &theta in &cfg.theta_deg {
            let chi = AngleVector::from_degrees(theta, cfg.phi_deg)?;
            let r = monte_carlo_msae(&src.positions, chi, &scen, &cfg.mc)?;
            rows.push(ThetaRow {
                theta_deg: theta,
                source: src.name.clone(),
                msae: r.msae,
                msaeb: r.msaeb,
            });
        }
    }
    Ok(rows)
}

pub fn correlation_fig(cfg: &SweepConfig) -> Vec<CorrelationRow> {
    let grid = cfg.correlation_grid.points();
    let eta = cfg.target.direction();
    let mut rows = Vec::with_capacity(grid.len() * cfg.sources.len());
    for src in &cfg.sources {
        let values = correlation_map(&src.positions, &eta, &grid, cfg.wavelength);
        rows.extend(grid.iter().zip(values).map(|(chi, value)| CorrelationRow {
            theta_deg: chi.theta_deg(),
            phi_deg: chi.phi_deg(),
            value,
            source: src.name.clone(),
        }));
    }
    rows
}

pub fn sweep(experiment: Experiment, cfg: &SweepConfig) -> Result<Dataset> {
    cfg.mc.validate()?;
    match experiment {
        Experiment::MsaeVsSnr => msae_vs_snr(cfg).map(Dataset::Snr),
        Experiment::MsaeVsTheta => msae_vs_theta(cfg).map(Dataset::Theta),
        Experiment::CorrelationFig => Ok(Dataset::Correlation(correlation_fig(cfg))),
    }
}

/// Runs the experiment called `name`.
pub fn sweep_named(name: &str, cfg: &SweepConfig) -> Result<Dataset> {
    sweep(name.parse()?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::MleGrid;
    use crate::trajectories::{gen_circle, gen_circle3};

    fn config() -> SweepConfig {
        let mut mc = McConfig::new(6, 11);
        mc.grid = MleGrid { resolution_deg: 6.0, refinements: 1, ..MleGrid::default() };
        mc.snr_db = vec![0.0, 10.0];
        SweepConfig {
            sources: vec![
                Source::new("circle3", &gen_circle3(48, 0.4, 1e-3).unwrap()),
                Source::new("circle", &gen_circle(48, 0.4, 1e-3).unwrap()),
            ],
            wavelength: 1.0,
            sampling_period: 1e-3,
            target: AngleVector::from_degrees(30.0, 40.0).unwrap(),
            theta_deg: vec![10.0, 45.0, 80.0],
            phi_deg: 0.0,
            snr_db: 0.0,
            mc,
            correlation_grid: AngleGrid::from_degrees((0.0, 180.0, 7), (0.0, 360.0, 9)).unwrap(),
        }
    }

    #[test]
    fn unknown_experiment_is_an_error() {
        assert!(matches!(sweep_named("fig99", &config()), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn every_dataset_round_trips() {
        let cfg = config();
        for exp in [Experiment::MsaeVsSnr, Experiment::MsaeVsTheta, Experiment::CorrelationFig] {
            let d = sweep(exp, &cfg).unwrap();
            let mut buf = Vec::new();
            d.write_csv(&mut buf).unwrap();
            assert_eq!(Dataset::read_csv(exp, buf.as_slice()).unwrap(), d);
            let mut again = Vec::new();
            sweep(exp, &cfg).unwrap().write_csv(&mut again).unwrap();
            assert_eq!(buf, again);
        }
    }

    #[test]
    fn snr_sweep_starts_with_anchor_rows() {
        let Dataset::Snr(rows) = sweep(Experiment::MsaeVsSnr, &config()).unwrap() else {
            unreachable!()
        };
        assert_eq!(rows.len(), 2 + 2 * 2);
        assert!(rows[..2].iter().all(|r| r.snr_db == f64::INFINITY && r.msaeb == 0.0));
        assert!(rows[2..].iter().all(|r| r.snr_db.is_finite()));
    }

    #[test]
    fn theta_sweep_bounds_are_flat_for_circle3() {
        let mut cfg = config();
        cfg.theta_deg = (1..=17).map(|i| 5.0 * i as f64).collect();
        cfg.mc.trials = 1;
        let Dataset::Theta(rows) = sweep(Experiment::MsaeVsTheta, &cfg).unwrap() else {
            unreachable!()
        };
        let spread = |name: &str| {
            let b: Vec<f64> = rows.iter().filter(|r| r.source == name).map(|r| r.msaeb).collect();
            b.iter().copied().fold(0.0, f64::max) / b.iter().copied().fold(f64::INFINITY, f64::min)
        };
        assert!(spread("circle3") < 1.01);
        assert!(spread("circle") > 50.0);
    }
}
