//! Non-coherent differential PSK: transceiver operations and closed-form
//! SINR analysis for both channel models.

mod dpsk;
mod geometric;
mod moments;

pub use dpsk::{
    decide_psk, decompose_terms, diff_decode, diff_encode, diff_encode_frequency, dpsk_constellation, Decision,
    FrameGrid, Grid,
};
pub(crate) use dpsk::check_order;
pub use geometric::{
    exact_cascaded_moments, joint_correlation, moments_geometric, tuple_bounds, GeometricMethod, TupleBoundReport,
};
pub use moments::{moments_iid, sinr_empirical, sinr_from_moments, MomentAccumulator, MomentEstimate, MomentSet};
