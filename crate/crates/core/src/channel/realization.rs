use crate::mathkit::{CMatrix, C64};

/// Propagation direction of one ray, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    /// Wrapped to `(-pi, pi]`.
    pub azimuth: f64,
    /// In `[0, pi]`.
    pub zenith: f64,
}

/// One ray of a cluster: departure and arrival directions plus the complex
/// gain at the first symbol of the frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub departure: Direction,
    pub arrival: Direction,
    pub coefficient: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Delay in samples relative to the first cluster (fractional).
    pub delay: f64,
    /// Normalized cluster power; the powers of one link sum to 1.
    pub power: f64,
    pub rays: Vec<Ray>,
}

/// Ground truth of the geometric model for both links.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTruth {
    pub bs_ris: Vec<Cluster>,
    pub ris_ue: Vec<Cluster>,
}

/// BS-RIS matrices and RIS-UE vectors for the simulated subcarriers of one
/// frame.
///
/// The BS-RIS link is quasi-static, so one matrix per subcarrier serves all
/// symbols of the frame.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub subcarriers: Vec<usize>,
    pub symbols: usize,
    pub bs_antennas: usize,
    pub ris_elements: usize,
    pub(crate) bs_ris: Vec<CMatrix>,
    /// Flattened `[subcarrier][symbol][element]`.
    pub(crate) ris_ue: Vec<C64>,
    pub clusters: Option<ClusterTruth>,
    /// Average link gains (statistical, not realized).
    pub sigma_h2: f64,
    pub sigma_g2: f64,
}

impl ChannelRealization {
    /// BS-RIS matrix (`B x M`) of simulated subcarrier `k_idx` at symbol
    /// `n`; identical for every `n`.
    pub fn bs_ris(&self, k_idx: usize, _n: usize) -> &CMatrix {
        &self.bs_ris[k_idx]
    }

    /// RIS-UE vector (length `M`) of simulated subcarrier `k_idx` at symbol `n`.
    pub fn ris_ue(&self, k_idx: usize, n: usize) -> &[C64] {
        let m = self.ris_elements;
        let start = (k_idx * self.symbols + n) * m;
        &self.ris_ue[start..start + m]
    }

    pub fn num_subcarriers(&self) -> usize {
        self.subcarriers.len()
    }
}
