//! Coherent baseline: cascaded-channel sounding, alternating combiner and
//! RIS optimization, coherent detection and the training-efficiency model.

mod efficiency;
mod optimize;
mod sounding;

pub use efficiency::{
    coherence_symbols, efficiency_factor, efficiency_table, CoherenceModel, TABLE_RIS_SIZES, TABLE_SPEEDS_KMH,
};
pub use optimize::{coherent_demodulate, coherent_snr, mrc, optimize_w_psi, CdsSolution};
pub use sounding::{cascaded_columns, sound_cascaded, CascadedEstimate};
