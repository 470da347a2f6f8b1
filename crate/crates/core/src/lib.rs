//! Simulation and closed-form analysis of differential PSK over
//! RIS-assisted SIMO-OFDM uplinks, with a coherent baseline.

pub mod error;
pub mod harness;
pub mod cds;
pub mod channel;
pub mod mathkit;
pub mod ncds;
pub mod ris;
pub mod sep;

pub use error::{Error, Result};
