//! Direction-estimation error bounds and their diagnostics.

mod bounds;
mod diagnostics;
mod fim;
mod maps;
mod scenario;

pub use bounds::{
    geometry_factor, geometry_factor_trace, msaeb, msaeb_from_covariance,
    msaeb_single_direction_rotated, MsaebResult, DEGENERATE_ABS, DEGENERATE_REL,
};
pub use diagnostics::{isotropy_report, planar_decomposition, IsotropyReport, PlanarDecomposition, PLANAR_TOL};
pub use fim::{fim_oracle, fim_oracle_finite_difference, FimBlocks, FD_STEP};
pub use maps::{
    correlation_map, msaeb_map, read_map_csv, steering_vector, write_map_csv, AngleGrid, MAP_HEADER,
};
pub use scenario::SensingScenario;
