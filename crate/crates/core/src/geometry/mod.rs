//! Tier association, serving-distance densities, user state probabilities and
//! the active D2D density.

mod activity;
mod state;
mod tiers;

pub use activity::{active_d2d_density, d2d_h, D2DActivity};
pub use state::{row_state, state_matrix, state_row, AccessCase, Backhaul, Server, StateMatrix, SERVERS, STATE_ROWS};
pub use tiers::{
    first_association_probability, joint_distance_pdf_case3, nearest_distance_pdf, ordering_probability,
    pairwise_association_probability, TierSpec,
};
