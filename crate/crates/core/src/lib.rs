//! Direction-sensing with a single movable antenna.
//!
//! A receiver that moves during reception synthesizes an aperture whose
//! direction-finding accuracy depends only on the covariance of the sampled
//! positions. This crate evaluates the resulting error bounds, generates the
//! usual benchmark trajectories and arrays, optimizes trajectories for the
//! worst case over an angular region, and checks it all by Monte Carlo.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod metrics;
pub mod sca;
pub mod trajectories;

pub use error::{Error, Result};
