//! Flat `key = value` parameter files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimation::{Experiment, MleGrid};
use crate::geometry::{AngleVector, MovementRegion};
use crate::sca::{AngularRegion, GridLayout, OptimizationProblem};
use crate::trajectories::BenchmarkKind;

/// Every accepted key with its default, in manifest order.
const KEYS: &[(&str, &str)] = &[
    ("N", "600"),
    ("Ts", "1e-5"),
    ("vmax", "10"),
    ("wavelength", "0.05"),
    ("region_A", "0.25"),
    ("theta_lo_deg", "0"),
    ("theta_hi_deg", "80"),
    ("phi_lo_deg", "0"),
    ("phi_hi_deg", "360"),
    ("Q", "20"),
    ("grid_layout", "fibonacci"),
    ("dense_Q", "1000"),
    ("velocity_block", "25"),
    ("epsilon", "1e-4"),
    ("max_iters", "30"),
    ("seed", "1"),
    ("target_theta_deg", "45"),
    ("target_phi_deg", "45"),
    ("kind", "circle3"),
    ("delta", "auto"),
    ("trajectory_file", ""),
    ("map_resolution_deg", "2"),
    ("experiment", "msae_vs_snr"),
    ("sources", "optimized-single,circle3,circle,upg,fpa-upa,fpa-cpa"),
    ("snr_db", "-15"),
    ("snr_list_db", "-20,-15,-10,-5,0"),
    ("theta_list_deg", "5,15,25,35,45,55,65,75,85"),
    ("sweep_phi_deg", "0"),
    ("trials", "200"),
    ("mle_resolution_deg", "1"),
    ("mle_refinements", "2"),
    ("random_phase", "false"),
];

/// Resolved parameters: defaults overlaid with a file and then overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl Params {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v.trim())
                .map_err(|e| match e {
                    Error::Config(m) => Error::Config(format!("line {}: {m}", i + 1)),
                    other => other,
                })?;
        }
        Ok(())
    }

    pub fn load(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.parse_str(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(Error::Config(format!("unknown key `{key}`"))),
        }
    }

    /// `key=value` from the command line.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{pair}`")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("known key")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .parse()
            .map_err(|e| Error::Config(format!("`{key}` = `{}`: {e}", self.raw(key))))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| Error::Config(format!("`{key}` item `{s}`: {e}"))))
            .collect()
    }

    /// One `key = value` line per key in a stable order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, _) in KEYS {
            let _ = writeln!(out, "{k} = {}", self.raw(k));
        }
        out
    }

    pub fn n(&self) -> Result<usize> {
        self.get("N")
    }

    pub fn seed(&self) -> Result<u64> {
        self.get("seed")
    }

    pub fn step(&self) -> Result<f64> {
        if self.raw("delta") == "auto" {
            Ok(self.get::<f64>("vmax")? * self.get::<f64>("Ts")?)
        } else {
            self.get("delta")
        }
    }

    pub fn target(&self) -> Result<AngleVector> {
        AngleVector::from_degrees(self.get("target_theta_deg")?, self.get("target_phi_deg")?)
    }

    pub fn kind(&self) -> Result<BenchmarkKind> {
        self.raw("kind").parse()
    }

    pub fn experiment(&self) -> Result<Experiment> {
        self.raw("experiment").parse()
    }

    pub fn region(&self) -> Result<MovementRegion> {
        let a: f64 = self.get("region_A")?;
        if a.is_infinite() {
            Ok(MovementRegion::unbounded())
        } else {
            MovementRegion::cube(a)
        }
    }

    pub fn angular(&self) -> Result<AngularRegion> {
        AngularRegion::from_degrees(
            (self.get("theta_lo_deg")?, self.get("theta_hi_deg")?),
            (self.get("phi_lo_deg")?, self.get("phi_hi_deg")?),
            self.get("Q")?,
            self.get::<GridLayout>("grid_layout")?,
        )
    }

    pub fn problem(&self) -> Result<OptimizationProblem> {
        let p = OptimizationProblem {
            region: self.region()?,
            vmax: self.get("vmax")?,
            ts: self.get("Ts")?,
            n: self.n()?,
            angular: self.angular()?,
            velocity_block: self.get("velocity_block")?,
            epsilon: self.get("epsilon")?,
            max_outer_iters: self.get("max_iters")?,
            dense_count: self.get("dense_Q")?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn mle_grid(&self) -> Result<MleGrid> {
        let g = MleGrid {
            resolution_deg: self.get("mle_resolution_deg")?,
            refinements: self.get("mle_refinements")?,
            ..MleGrid::default()
        };
        g.validate()?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut p = Params::default();
        p.parse_str("# elevation cap\nN = 1200   # snapshots\n\nQ=8\ngrid_layout = fibonacci\n")
            .unwrap();
        assert_eq!(p.n().unwrap(), 1200);
        assert_eq!(p.angular().unwrap().grid_count(), 8);
        assert_eq!(p.angular().unwrap().layout(), GridLayout::Fibonacci);
        assert!((p.step().unwrap() - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut p = Params::default();
        let err = p.parse_str("N = 10\nvmx = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("line 2") && m.contains("vmx")));
        assert!(p.parse_str("just words").is_err());
    }

    #[test]
    fn dump_round_trips() {
        let mut p = Params::default();
        p.set("seed", "77").unwrap();
        let mut q = Params::default();
        q.parse_str(&p.dump()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn unbounded_region_and_lists() {
        let mut p = Params::default();
        p.set("region_A", "inf").unwrap();
        assert!(!p.region().unwrap().is_bounded());
        assert_eq!(p.list::<f64>("snr_list_db").unwrap(), vec![-20.0, -15.0, -10.0, -5.0, 0.0]);
    }
}
