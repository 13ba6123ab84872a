//! Min-max trajectory optimization over an angular region.

mod blocks;
mod optimizer;
mod region;
mod subproblem;
mod surrogate;

pub use blocks::{BlockPartition, BlockTrajectory};
pub use optimizer::{
    initial_blocks, initial_blocks_planar, optimize, optimize_single_direction,
    optimize_single_direction_from, read_trace_csv, sca_optimize, single_direction_problem,
    write_trace_csv, OptimizationProblem, ScaIteration, ScaOutcome, ScaTrace, DENSE_GRID_COUNT,
    TRACE_HEADER,
};
pub use region::{dense_grid, AngularRegion, GridLayout};
pub use subproblem::{solve_subproblem, SolveStatus, Subproblem, SubproblemSolution, SUBPROBLEM_GAP};
pub use surrogate::{surrogate_covariance, surrogate_objective, SurrogateValue};
