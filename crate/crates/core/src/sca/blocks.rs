//! Trajectories whose velocity is constant over runs of consecutive steps.
//!
//! With `B` blocks of velocities `w_b`, the positions are
//! `r_n = r_1 + Ts sum_b c[n, b] w_b`, where `c[n, b]` counts the steps of
//! block `b` taken before snapshot `n`. The covariance is then `W G W'` with
//! the `B x B` Gram matrix `G = Ts^2 C' B C`, so nothing downstream needs
//! the `N` individual positions.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{invalid, Result};
use crate::geometry::{CovarianceMatrix, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    snapshots: usize,
    lens: Vec<usize>,
    starts: Vec<usize>,
}

impl BlockPartition {
    /// Splits the `N - 1` steps into runs of `block` steps; the last run may
    /// be shorter.
    pub fn new(snapshots: usize, block: usize) -> Result<Self> {
        if snapshots < 2 {
            return Err(invalid("N", "need at least two snapshots"));
        }
        if block == 0 {
            return Err(invalid("velocity_block", "must be at least 1"));
        }
        let steps = snapshots - 1;
        let mut lens = Vec::new();
        let mut starts = Vec::new();
        let mut s = 0;
        while s < steps {
            starts.push(s);
            lens.push(block.min(steps - s));
            s += block;
        }
        Ok(Self { snapshots, lens, starts })
    }

    pub fn snapshots(&self) -> usize {
        self.snapshots
    }

    pub fn block_count(&self) -> usize {
        self.lens.len()
    }

    pub fn lens(&self) -> &[usize] {
        &self.lens
    }

    /// Steps of block `b` completed before snapshot `n` (0-based).
    pub fn steps_before(&self, n: usize, b: usize) -> usize {
        n.saturating_sub(self.starts[b]).min(self.lens[b])
    }

    /// `G[b, b'] = Ts^2 cov(c_b, c_b')` over the snapshots.
    pub fn gram(&self, ts: f64) -> DMatrix<f64> {
        let nb = self.block_count();
        let n = self.snapshots;
        let mut means = vec![0.0; nb];
        for (b, m) in means.iter_mut().enumerate() {
            *m = (0..n).map(|k| self.steps_before(k, b) as f64).sum::<f64>() / n as f64;
        }
        let mut g = DMatrix::zeros(nb, nb);
        let mut row = vec![0.0; nb];
        for k in 0..n {
            for (b, r) in row.iter_mut().enumerate() {
                *r = self.steps_before(k, b) as f64 - means[b];
            }
            for a in 0..nb {
                if row[a] == 0.0 {
                    continue;
                }
                for b in a..nb {
                    g[(a, b)] += row[a] * row[b];
                }
            }
        }
        let scale = ts * ts / n as f64;
        for a in 0..nb {
            for b in a..nb {
                g[(a, b)] *= scale;
                g[(b, a)] = g[(a, b)];
            }
        }
        g
    }

    /// Collapses a trajectory onto the partition by averaging the velocities
    /// inside each block. Block boundary positions are unchanged, and the
    /// averaged speeds never exceed the original maximum.
    pub fn project(&self, traj: &Trajectory) -> Result<BlockTrajectory> {
        if traj.snapshots() != self.snapshots {
            return Err(invalid("trajectory", "snapshot count differs from the partition"));
        }
        let v = traj.velocities();
        let w = self
            .starts
            .iter()
            .zip(&self.lens)
            .map(|(&s, &l)| v[s..s + l].iter().sum::<Vector3<f64>>() / l as f64)
            .collect();
        BlockTrajectory::new(self.clone(), traj.start(), w, traj.sampling_period())
    }
}

/// A block-constant trajectory: start point plus one velocity per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTrajectory {
    partition: BlockPartition,
    start: Vector3<f64>,
    velocities: Vec<Vector3<f64>>,
    sampling_period: f64,
}

impl BlockTrajectory {
    pub fn new(
        partition: BlockPartition,
        start: Vector3<f64>,
        velocities: Vec<Vector3<f64>>,
        sampling_period: f64,
    ) -> Result<Self> {
        if velocities.len() != partition.block_count() {
            return Err(invalid("velocities", "one velocity per block required"));
        }
        if !(sampling_period > 0.0) {
            return Err(invalid("sampling_period", "must be positive"));
        }
        Ok(Self {
            partition,
            start,
            velocities,
            sampling_period,
        })
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn start(&self) -> Vector3<f64> {
        self.start
    }

    pub fn block_velocities(&self) -> &[Vector3<f64>] {
        &self.velocities
    }

    pub fn sampling_period(&self) -> f64 {
        self.sampling_period
    }

    /// Positions at the block boundaries, `B + 1` of them.
    pub fn vertices(&self) -> Vec<Vector3<f64>> {
        let mut out = Vec::with_capacity(self.velocities.len() + 1);
        let mut p = self.start;
        out.push(p);
        for (w, &l) in self.velocities.iter().zip(self.partition.lens()) {
            p += w * (l as f64 * self.sampling_period);
            out.push(p);
        }
        out
    }

    /// `W G W'` for a precomputed Gram matrix.
    pub fn covariance_with(&self, gram: &DMatrix<f64>) -> CovarianceMatrix {
        covariance_from_blocks(&self.velocities, gram)
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }

    /// Expands to one velocity per step.
    pub fn to_trajectory(&self) -> Result<Trajectory> {
        let mut v = Vec::with_capacity(self.partition.snapshots - 1);
        for (w, &l) in self.velocities.iter().zip(self.partition.lens()) {
            v.extend(std::iter::repeat_n(*w, l));
        }
        Trajectory::from_velocities(self.start, v, self.sampling_period)
    }

    pub fn with_velocities(&self, start: Vector3<f64>, velocities: Vec<Vector3<f64>>) -> Result<Self> {
        Self::new(self.partition.clone(), start, velocities, self.sampling_period)
    }
}

pub(crate) fn covariance_from_blocks(w: &[Vector3<f64>], gram: &DMatrix<f64>) -> CovarianceMatrix {
    let mut u = Matrix3::zeros();
    for (a, wa) in w.iter().enumerate() {
        let mut acc = Vector3::zeros();
        for (b, wb) in w.iter().enumerate() {
            acc += wb * gram[(a, b)];
        }
        u += wa * acc.transpose();
    }
    CovarianceMatrix::new(u)
}
