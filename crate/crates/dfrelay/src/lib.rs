//! Monte Carlo simulation, parameter sweeps, file output and the `dfrelay`
//! command-line tool, on top of [`dfrelay_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod montecarlo;
pub mod output;
pub mod sweep;

pub use error::{AppError, AppResult};
pub use montecarlo::{
    effectiveness, effectiveness_row, estimate_rate, estimate_sum_rate_multiuser, RateEstimate,
};
