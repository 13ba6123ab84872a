//! Worst-case trajectory optimization by successive convex approximation.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::time::Instant;

use nalgebra::{DMatrix, Vector3};

use super::blocks::{covariance_from_blocks, BlockPartition, BlockTrajectory};
use super::region::{dense_grid, AngularRegion};
use super::subproblem::{solve_subproblem, SolveStatus, Subproblem};
use crate::error::{invalid, Error, Result};
use crate::geometry::{
    bounding_box, check_feasibility, io::fmt_f64, AngleVector, MovementRegion, Trajectory,
};
use crate::metrics::geometry_factor;

/// Size of the reporting grid used for the true worst case.
pub const DENSE_GRID_COUNT: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationProblem {
    pub region: MovementRegion,
    /// Speed limit (m/s).
    pub vmax: f64,
    /// Sampling period (s).
    pub ts: f64,
    /// Snapshots.
    pub n: usize,
    pub angular: AngularRegion,
    /// Consecutive steps sharing one velocity.
    pub velocity_block: usize,
    /// Stop once an iteration improves the worst case by less than this
    /// fraction of its previous value.
    pub epsilon: f64,
    pub max_outer_iters: usize,
    pub dense_count: usize,
}

impl OptimizationProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.vmax > 0.0 && self.vmax.is_finite()) {
            return Err(invalid("vmax", "must be positive"));
        }
        if !(self.ts > 0.0 && self.ts.is_finite()) {
            return Err(invalid("Ts", "must be positive"));
        }
        if self.n < 2 {
            return Err(invalid("N", "need at least two snapshots"));
        }
        if self.velocity_block == 0 {
            return Err(invalid("velocity_block", "must be at least 1"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid("epsilon", "must be non-negative"));
        }
        if self.max_outer_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        Ok(())
    }

    /// Distance covered in one snapshot at full speed.
    pub fn step(&self) -> f64 {
        self.vmax * self.ts
    }

    pub fn partition(&self) -> Result<BlockPartition> {
        BlockPartition::new(self.n, self.velocity_block)
    }

    /// True when the box cannot hold even one full-speed step.
    pub fn region_too_small(&self) -> bool {
        self.region.is_bounded() && 2.0 * self.region.half_extent().min() < self.step()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaIteration {
    pub iter: usize,
    /// Worst geometry factor over the optimization grid.
    pub delta_grid: f64,
    /// Worst geometry factor over the dense reporting grid.
    pub delta_dense: f64,
    /// Wall time since the start of the run.
    pub seconds: f64,
    pub status: Option<SolveStatus>,
    pub newton_steps: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScaTrace {
    pub iterations: Vec<ScaIteration>,
    pub converged: bool,
    pub diagnostics: Vec<String>,
}

impl ScaTrace {
    pub fn final_delta(&self) -> f64 {
        self.iterations.last().map_or(f64::INFINITY, |r| r.delta_grid)
    }

    pub fn final_dense(&self) -> f64 {
        self.iterations.last().map_or(f64::INFINITY, |r| r.delta_dense)
    }

    /// Outer iterations performed (the initial point is not counted).
    pub fn outer_iterations(&self) -> usize {
        self.iterations.len().saturating_sub(1)
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.iterations
            .windows(2)
            .all(|w| w[1].delta_grid <= w[0].delta_grid * (1.0 + slack))
    }
}

pub const TRACE_HEADER: [&str; 4] = ["iter", "delta_grid", "delta_dense", "seconds"];

pub fn write_trace_csv<W: Write>(trace: &ScaTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &trace.iterations {
        w.write_record([
            r.iter.to_string(),
            fmt_f64(r.delta_grid),
            fmt_f64(r.delta_dense),
            format!("{:.6}", r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<(usize, f64, f64, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Parse("unexpected trace header".into()));
    }
    r.records()
        .map(|rec| {
            let rec = rec?;
            let f = |k: usize| rec[k].parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
            let iter = rec[0].parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?;
            Ok((iter, f(1)?, f(2)?, f(3)?))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ScaOutcome {
    pub trajectory: Trajectory,
    pub blocks: Option<BlockTrajectory>,
    pub trace: ScaTrace,
    pub grid: Vec<AngleVector>,
}

fn worst(w: &[Vector3<f64>], gram: &DMatrix<f64>, grid: &[AngleVector]) -> f64 {
    let u = covariance_from_blocks(w, gram);
    grid.iter().map(|chi| geometry_factor(&u, *chi)).fold(0.0, f64::max)
}

/// Position along three orthogonal circles of radius `r` traversed in the
/// isotropic order, at arc length `s` in `[0, 6 pi r]`.
fn circle3_path(s: f64, r: f64) -> Vector3<f64> {
    let a = s / r;
    let xy = |b: f64| Vector3::new(r * b.cos(), -r * b.sin(), 0.0);
    if a < 2.0 * PI {
        Vector3::new(r * a.cos(), 0.0, r * a.sin())
    } else if a < 3.5 * PI {
        xy(a - 2.0 * PI)
    } else if a < 5.5 * PI {
        let b = a - 3.5 * PI;
        Vector3::new(0.0, r * b.cos(), r * b.sin())
    } else {
        xy(a - 4.0 * PI)
    }
}

/// Block velocities that follow `path` (parameterized by arc length) at full
/// speed, shrunk if needed to fit the box and centered in it.
fn blocks_along(
    problem: &OptimizationProblem,
    partition: BlockPartition,
    path: impl Fn(f64) -> Vector3<f64>,
) -> Result<BlockTrajectory> {
    let step = problem.step();
    let mut s = 0.0;
    let mut prev = path(0.0);
    let mut w = Vec::with_capacity(partition.block_count());
    for &len in partition.lens() {
        s += step * len as f64;
        let next = path(s);
        w.push((next - prev) / (len as f64 * problem.ts));
        prev = next;
    }
    let draft = BlockTrajectory::new(partition.clone(), Vector3::zeros(), w.clone(), problem.ts)?;
    let (lo, hi) = bounding_box(&draft.vertices());
    let extent = hi - lo;
    let mut factor: f64 = 1.0;
    if problem.region.is_bounded() {
        let h = problem.region.half_extent();
        for a in 0..3 {
            if extent[a] > 0.0 {
                factor = factor.min(2.0 * h[a] * (1.0 - 1e-3) / extent[a]);
            }
        }
    }
    let w: Vec<_> = w.into_iter().map(|v| v * factor).collect();
    let start = problem.region.center() - (lo + hi) * (factor / 2.0);
    BlockTrajectory::new(partition, start, w, problem.ts)
}

/// Three orthogonal circles whose total length is the distance available at
/// full speed, sampled at the block boundaries.
pub fn initial_blocks(problem: &OptimizationProblem) -> Result<BlockTrajectory> {
    problem.validate()?;
    let partition = problem.partition()?;
    let total = problem.step() * (problem.n - 1) as f64;
    let r = total / (6.0 * PI);
    blocks_along(problem, partition, |s| circle3_path(s.min(6.0 * PI * r), r))
}

/// One full-length circle in the plane orthogonal to `chi`.
pub fn initial_blocks_planar(problem: &OptimizationProblem, chi: AngleVector) -> Result<BlockTrajectory> {
    problem.validate()?;
    let partition = problem.partition()?;
    let total = problem.step() * (problem.n - 1) as f64;
    let r = total / (2.0 * PI);
    let fr = chi.tangent_frame();
    blocks_along(problem, partition, |s| {
        let a = s / r;
        (fr.f * a.cos() + fr.g * a.sin()) * r
    })
}

fn stationary_outcome(problem: &OptimizationProblem, grid: Vec<AngleVector>) -> Result<ScaOutcome> {
    let trajectory = Trajectory::stationary(problem.region.center(), problem.n, problem.ts)?;
    let trace = ScaTrace {
        iterations: vec![ScaIteration {
            iter: 0,
            delta_grid: f64::INFINITY,
            delta_dense: f64::INFINITY,
            seconds: 0.0,
            status: None,
            newton_steps: 0,
        }],
        converged: true,
        diagnostics: vec![format!(
            "movement region ({:.3e} m across) is smaller than one step ({:.3e} m); returning a stationary antenna",
            2.0 * problem.region.half_extent().min(),
            problem.step()
        )],
    };
    Ok(ScaOutcome {
        trajectory,
        blocks: None,
        trace,
        grid,
    })
}

fn run_sca(
    problem: &OptimizationProblem,
    grid: Vec<AngleVector>,
    dense: &[AngleVector],
    basis: &[Vector3<f64>],
    init: BlockTrajectory,
) -> Result<ScaOutcome> {
    let clock = Instant::now();
    let gram = init.partition().gram(problem.ts);
    let init_traj = init.to_trajectory()?;
    let report = check_feasibility(&init_traj, &problem.region, problem.vmax);
    if !report.is_feasible() {
        return Err(Error::InfeasibleStart(format!(
            "worst speed excess {:.3e} m/s, worst wall excess {:.3e} m",
            report.worst_speed_excess, report.worst_region_excess
        )));
    }
    let mut current = init;
    let mut delta = worst(current.block_velocities(), &gram, &grid);
    if !delta.is_finite() {
        return Err(Error::InfeasibleStart(
            "initial trajectory leaves a grid direction unidentifiable".into(),
        ));
    }
    let mut trace = ScaTrace::default();
    trace.iterations.push(ScaIteration {
        iter: 0,
        delta_grid: delta,
        delta_dense: worst(current.block_velocities(), &gram, dense),
        seconds: clock.elapsed().as_secs_f64(),
        status: None,
        newton_steps: 0,
    });
    for iter in 1..=problem.max_outer_iters {
        let sp = Subproblem {
            basis,
            directions: &grid,
            gram: &gram,
            region: &problem.region,
            vmax: problem.vmax,
            prev: &current,
        };
        let sol = solve_subproblem(&sp)?;
        if sol.status == SolveStatus::IterationLimit {
            trace
                .diagnostics
                .push(format!("iteration {iter}: subproblem hit the Newton budget"));
        }
        let mut cand = sol.trajectory;
        let mut cand_delta = worst(cand.block_velocities(), &gram, &grid);
        // the surrogate is solved only to a finite gap; back off along the
        // segment to the previous iterate if that overshoots
        let mut tau = 1.0;
        while !(cand_delta <= delta) && tau > 1e-3 {
            tau *= 0.5;
            let w: Vec<_> = current
                .block_velocities()
                .iter()
                .zip(cand.block_velocities())
                .map(|(a, b)| a + (b - a) * tau)
                .collect();
            let start = current.start() + (cand.start() - current.start()) * tau;
            cand = current.with_velocities(start, w)?;
            cand_delta = worst(cand.block_velocities(), &gram, &grid);
        }
        if !(cand_delta <= delta) {
            trace.converged = true;
            trace
                .diagnostics
                .push(format!("iteration {iter}: no improving step, stopping"));
            break;
        }
        let improvement = delta - cand_delta;
        current = cand;
        delta = cand_delta;
        trace.iterations.push(ScaIteration {
            iter,
            delta_grid: delta,
            delta_dense: worst(current.block_velocities(), &gram, dense),
            seconds: clock.elapsed().as_secs_f64(),
            status: Some(sol.status),
            newton_steps: sol.newton_steps,
        });
        if improvement <= problem.epsilon * (delta + improvement) {
            trace.converged = true;
            break;
        }
    }
    let trajectory = current.to_trajectory()?;
    let report = check_feasibility(&trajectory, &problem.region, problem.vmax);
    if !report.is_feasible() {
        return Err(Error::Numerical(format!(
            "optimized trajectory infeasible: speed excess {:.3e}, wall excess {:.3e}",
            report.worst_speed_excess, report.worst_region_excess
        )));
    }
    Ok(ScaOutcome {
        trajectory,
        blocks: Some(current),
        trace,
        grid,
    })
}

fn full_basis() -> [Vector3<f64>; 3] {
    [Vector3::x(), Vector3::y(), Vector3::z()]
}

/// Minimizes the worst-case geometry factor over the problem's angular grid,
/// starting from the three-circle initialization.
pub fn optimize(problem: &OptimizationProblem) -> Result<ScaOutcome> {
    problem.validate()?;
    let grid = problem.angular.discretize();
    if problem.region_too_small() {
        return stationary_outcome(problem, grid);
    }
    let dense = dense_grid(&problem.angular, problem.dense_count)?;
    let init = initial_blocks(problem)?;
    run_sca(problem, grid, &dense, &full_basis(), init)
}

/// Same as [`optimize`] from a caller-supplied feasible trajectory. The
/// trajectory is first averaged onto the velocity blocks.
pub fn sca_optimize(problem: &OptimizationProblem, init: &Trajectory) -> Result<ScaOutcome> {
    problem.validate()?;
    let grid = problem.angular.discretize();
    let dense = dense_grid(&problem.angular, problem.dense_count)?;
    let blocks = problem.partition()?.project(init)?;
    run_sca(problem, grid, &dense, &full_basis(), blocks)
}

/// Optimizes for the single direction `chi` with motion restricted to the
/// plane orthogonal to it, where the bound only depends on the in-plane
/// covariance. The out-of-plane coordinate stays fixed.
pub fn optimize_single_direction(problem: &OptimizationProblem, chi: AngleVector) -> Result<ScaOutcome> {
    problem.validate()?;
    let grid = vec![chi];
    if problem.region_too_small() {
        return stationary_outcome(problem, grid);
    }
    let init = initial_blocks_planar(problem, chi)?;
    optimize_single_direction_from(problem, chi, init)
}

pub fn optimize_single_direction_from(
    problem: &OptimizationProblem,
    chi: AngleVector,
    init: BlockTrajectory,
) -> Result<ScaOutcome> {
    let fr = chi.tangent_frame();
    let eta = *chi.direction().as_vector();
    let w: Vec<_> = init
        .block_velocities()
        .iter()
        .map(|v| v - eta * eta.dot(v))
        .collect();
    let init = init.with_velocities(init.start(), w)?;
    let grid = vec![chi];
    run_sca(problem, grid.clone(), &grid, &[fr.f, fr.g], init)
}

/// Problem with a single target direction, used by the planar optimizer.
pub fn single_direction_problem(base: &OptimizationProblem, chi: AngleVector) -> OptimizationProblem {
    OptimizationProblem {
        angular: AngularRegion::single(chi),
        ..base.clone()
    }
}
