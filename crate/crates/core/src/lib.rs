//! Granule fusion density-based clustering with evidential assignment of
//! the samples that land between clusters.

pub mod dataset;
pub mod density;
pub mod error;
pub mod evidence;
pub mod export;
pub mod fusion;
pub mod granulation;
pub mod metrics;
pub mod pipeline;
pub mod plot;
pub mod synth;

pub use error::{GfdcError, Result};
pub use pipeline::{Fit, Gfdc};
