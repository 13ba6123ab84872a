//! Signal synthesis, grid-search maximum-likelihood estimation and Monte
//! Carlo error statistics.

mod mle;
mod monte_carlo;
mod signal;
mod sweep;

pub use mle::{angular_error, front_normal, mle_estimate, mle_estimate_batch, MleEstimate, MleGrid};
pub use monte_carlo::{monte_carlo_msae, squared_errors, summarize, McConfig, McResult};
pub use signal::{synthesize_signal, trial_rng, ReceivedSignal, SignalOptions};
pub use sweep::{
    correlation_fig, msae_vs_snr, msae_vs_theta, sweep, sweep_named, CorrelationRow, Dataset, Experiment,
    SnrRow, Source, SweepConfig, ThetaRow,
};
