//! Angular regions and their discretization.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::geometry::AngleVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridLayout {
    /// `n_theta x n_phi` product grid with `n_theta n_phi = Q`.
    #[default]
    Product,
    /// Area-uniform golden-angle spiral.
    Fibonacci,
}

impl fmt::Display for GridLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridLayout::Product => "product",
            GridLayout::Fibonacci => "fibonacci",
        })
    }
}

impl FromStr for GridLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "product" => Ok(GridLayout::Product),
            "fibonacci" => Ok(GridLayout::Fibonacci),
            other => Err(invalid("grid_layout", format!("unknown layout `{other}`"))),
        }
    }
}

/// Rectangle `[theta_lo, theta_hi] x [phi_lo, phi_hi]` of target directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularRegion {
    theta: (f64, f64),
    phi: (f64, f64),
    q: usize,
    layout: GridLayout,
}

const FULL_TURN_TOL: f64 = 1e-12;

impl AngularRegion {
    pub fn new(theta: (f64, f64), phi: (f64, f64), q: usize, layout: GridLayout) -> Result<Self> {
        if q == 0 {
            return Err(invalid("Q", "need at least one grid point"));
        }
        AngleVector::new(theta.0, phi.0)?;
        AngleVector::new(theta.1, phi.1)?;
        if theta.1 < theta.0 || phi.1 < phi.0 {
            return Err(Error::EmptyRegion);
        }
        Ok(Self { theta, phi, q, layout })
    }

    pub fn from_degrees(theta: (f64, f64), phi: (f64, f64), q: usize, layout: GridLayout) -> Result<Self> {
        Self::new(
            (theta.0.to_radians(), theta.1.to_radians()),
            (phi.0.to_radians(), phi.1.to_radians()),
            q,
            layout,
        )
    }

    /// The single direction `chi`.
    pub fn single(chi: AngleVector) -> Self {
        Self {
            theta: (chi.theta(), chi.theta()),
            phi: (chi.phi(), chi.phi()),
            q: 1,
            layout: GridLayout::Product,
        }
    }

    pub fn theta_range(&self) -> (f64, f64) {
        self.theta
    }

    pub fn phi_range(&self) -> (f64, f64) {
        self.phi
    }

    pub fn grid_count(&self) -> usize {
        self.q
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    /// Same rectangle with a different point count.
    pub fn with_count(&self, q: usize) -> Result<Self> {
        Self::new(self.theta, self.phi, q, self.layout)
    }

    pub fn center(&self) -> AngleVector {
        AngleVector::new(
            (self.theta.0 + self.theta.1) / 2.0,
            (self.phi.0 + self.phi.1) / 2.0,
        )
        .expect("midpoint of a valid range")
    }

    fn phi_wraps(&self) -> bool {
        self.phi.1 - self.phi.0 >= 2.0 * PI - FULL_TURN_TOL
    }

    /// Grid points, theta outermost. `Q = 1` gives the center.
    pub fn discretize(&self) -> Vec<AngleVector> {
        if self.q == 1 {
            return vec![self.center()];
        }
        match self.layout {
            GridLayout::Product => self.product_grid(),
            GridLayout::Fibonacci => self.fibonacci_grid(),
        }
    }

    /// Factorization `n_theta x n_phi = Q` with the smallest worst-case spacing,
    /// measuring azimuth steps as arc length at the widest circle of latitude.
    pub fn product_shape(&self) -> (usize, usize) {
        let span_t = self.theta.1 - self.theta.0;
        let span_p = self.phi.1 - self.phi.0;
        let wrap = self.phi_wraps();
        let widest = if self.theta.0 <= PI / 2.0 && self.theta.1 >= PI / 2.0 {
            1.0
        } else {
            self.theta.0.sin().max(self.theta.1.sin())
        };
        let mut best = (1, self.q);
        let mut best_cost = f64::INFINITY;
        for nt in 1..=self.q {
            if !self.q.is_multiple_of(nt) {
                continue;
            }
            let np = self.q / nt;
            let dt = if nt == 1 { span_t } else { span_t / (nt - 1) as f64 };
            let dp = if wrap {
                span_p / np as f64
            } else if np == 1 {
                span_p
            } else {
                span_p / (np - 1) as f64
            };
            let cost = dt.max(dp * widest);
            if cost < best_cost - 1e-15 {
                best_cost = cost;
                best = (nt, np);
            }
        }
        best
    }

    fn product_grid(&self) -> Vec<AngleVector> {
        let (nt, np) = self.product_shape();
        let axis = |lo: f64, hi: f64, n: usize, wrap: bool| -> Vec<f64> {
            if n == 1 {
                return vec![(lo + hi) / 2.0];
            }
            let steps = if wrap { n } else { n - 1 };
            (0..n).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
        };
        let thetas = axis(self.theta.0, self.theta.1, nt, false);
        let phis = axis(self.phi.0, self.phi.1, np, self.phi_wraps());
        thetas
            .iter()
            .flat_map(|&t| phis.iter().map(move |&p| AngleVector::new(t, p).expect("inside region")))
            .collect()
    }

    fn fibonacci_grid(&self) -> Vec<AngleVector> {
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let (c_hi, c_lo) = (self.theta.0.cos(), self.theta.1.cos());
        (0..self.q)
            .map(|i| {
                let z = c_hi - (c_hi - c_lo) * (i as f64 + 0.5) / self.q as f64;
                let theta = z.clamp(-1.0, 1.0).acos().clamp(self.theta.0, self.theta.1);
                let frac = (i as f64 * golden).fract();
                let phi = self.phi.0 + frac * (self.phi.1 - self.phi.0);
                AngleVector::new(theta, phi).expect("inside region")
            })
            .collect()
    }

    pub fn contains(&self, chi: &AngleVector) -> bool {
        (self.theta.0..=self.theta.1).contains(&chi.theta()) && (self.phi.0..=self.phi.1).contains(&chi.phi())
    }
}

/// Points of `region` with `count` samples, for reporting the true worst case.
pub fn dense_grid(region: &AngularRegion, count: usize) -> Result<Vec<AngleVector>> {
    Ok(region.with_count(count)?.discretize())
}
