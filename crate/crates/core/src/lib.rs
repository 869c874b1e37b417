//! Rank single-hidden-layer LSTM architectures by the probability that
//! randomly drawn weights already reach a low mean absolute error, and
//! validate that ranking against Adam-trained networks.
//!
//! The pieces, bottom-up:
//!
//! - [`timeseries`]: sine generation, CSV ingestion, min-max scaling,
//!   windowing and chronological splits.
//! - [`rnn`]: architecture description, flat weight layout, N(0, 1) weight
//!   draws and the forward pass.
//! - [`stats`]: truncated-normal fitting, correlations, deciles and OLS.
//! - [`sampling`]: MAE random sampling of an architecture and ranking by
//!   `p_t`.
//! - [`trainer`]: backpropagation through time and Adam.
//! - [`experiment`]: the full sample, rank, train, correlate and predict
//!   pipeline.
//! - [`cli`]: the `mae-sampling` command line.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod rnn;
pub mod seed;
pub mod stats;
pub mod sampling;
pub mod timeseries;
pub mod trainer;

pub use error::{Error, Result};
