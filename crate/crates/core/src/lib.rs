//! Emotional dynamics of sports fandoms: event-series extraction from
//! per-post emotion distributions, burstiness and memory statistics,
//! DTW-based clustering of daily emotion signals, and rank regression.

pub mod clustering;
pub mod error;
pub mod ingest;
pub mod model;
pub mod pipeline;
pub mod regression;
pub mod simulate;
pub mod synthetic;
pub mod temporal;

pub use error::{Error, Result};
