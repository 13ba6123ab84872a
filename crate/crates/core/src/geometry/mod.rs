//! Angles, trajectories and position covariance.

mod angles;
mod covariance;
pub mod io;
mod trajectory;

pub use angles::{
    direction_from_angles, rotation_to_target, tangent_frame, AngleVector, DirectionVector,
    TangentFrame,
};
pub(crate) use angles::raw_direction;
pub use covariance::{apv_covariance, apv_covariance_quadratic, cross_covariance, CovarianceMatrix};
pub use trajectory::{
    bounding_box, check_feasibility, FeasibilityReport, MovementRegion, Positions, SampleSet,
    Trajectory, FEASIBILITY_RTOL,
};
