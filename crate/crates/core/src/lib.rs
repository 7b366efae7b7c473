//! Analysis and simulation of three-tier cache-enabled heterogeneous networks
//! (base stations, relays and device-to-device links).
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: network configuration and Zipf content popularity.
//! * [`geometry`]: tier ordering and association probabilities, serving
//!   distance densities, the user state matrix and the active D2D density.
//! * [`specfun`]: `2F1`, interference kernels and adaptive quadrature.
//! * [`rate`] / [`outage`]: closed-form ergodic rates and outage probabilities.
//! * [`queueing`]: multiclass processor-sharing metrics, steady ruler,
//!   CTMC simulation and the no-caching baseline.
//! * [`montecarlo`]: spatial Poisson simulation used to validate the analysis.
//!
//! Data-parallel loops (topology replications, CTMC replications, parameter
//! grids) run on rayon when the `parallel` feature is enabled; see [`exec`].

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod geometry;
pub mod model;
pub mod montecarlo;
pub mod network;
pub mod outage;
pub mod queueing;
pub mod rate;
pub mod specfun;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{NetworkConfig, PopularityModel, Tier};
