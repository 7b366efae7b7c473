//! Spatial Monte Carlo oracle: Poisson topologies with Rayleigh fading,
//! measured directly against the association and SINR definitions.

mod grid;
mod measure;
mod topology;

pub use measure::{
    measure_realization, simulate, ActiveD2dRule, LinkEstimate, McReport, McSettings, SinrSample, TopologyTally,
};
pub use topology::{sample_topology, BoundaryMode, Point, SpatialRealization};
