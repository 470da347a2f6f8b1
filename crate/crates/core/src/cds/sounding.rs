use crate::channel::ChannelRealization;
use crate::error::{invalid, Result};
use crate::mathkit::{CMatrix, RngStream, C64};

/// Least-squares estimate of the per-element cascaded channels
/// `c_m = H[:, m] g_m` on every simulated subcarrier.
#[derive(Debug, Clone)]
pub struct CascadedEstimate {
    /// `B x M` per simulated subcarrier; column `m` estimates `c_m`.
    pub columns: Vec<CMatrix>,
    /// Known RIS phases used while sounding.
    pub sounding_phases: Vec<f64>,
    pub pilot: C64,
    pub noise_var: f64,
}

/// Exact cascaded columns at symbol `n`.
pub fn cascaded_columns(channel: &ChannelRealization, k_idx: usize, n: usize) -> CMatrix {
    let h = channel.bs_ris(k_idx, n);
    let g = channel.ris_ue(k_idx, n);
    CMatrix::from_fn(h.rows(), h.cols(), |r, c| h[(r, c)] * g[c])
}

/// Sounds element `m` during symbol `m` with pilot `p` and RIS phase
/// `psi~_m`: `c^_m = c_m + v / (p e^{j psi~_m})`, fresh noise `v` per
/// symbol. The sounding phases are drawn once, uniformly.
pub fn sound_cascaded(
    channel: &ChannelRealization,
    pilot_power: f64,
    noise_var: f64,
    rng: &mut RngStream,
) -> Result<CascadedEstimate> {
    let m = channel.ris_elements;
    if channel.symbols < m {
        return Err(invalid(
            "frame",
            format!("sounding needs {m} symbols but the frame has {}", channel.symbols),
        ));
    }
    if !(pilot_power > 0.0 && pilot_power.is_finite()) {
        return Err(invalid("pilot_power", "must be finite and > 0"));
    }
    if !(noise_var >= 0.0 && noise_var.is_finite()) {
        return Err(invalid("noise_var", "must be finite and >= 0"));
    }
    let pilot = C64::new(pilot_power.sqrt(), 0.0);
    let sounding_phases: Vec<f64> = (0..m).map(|_| 2.0 * std::f64::consts::PI * rng.uniform()).collect();
    let noise_std = noise_var.sqrt();
    let b = channel.bs_antennas;
    let columns = (0..channel.num_subcarriers())
        .map(|k| {
            let mut est = CMatrix::zeros(b, m);
            for (e, &phase) in sounding_phases.iter().enumerate() {
                let h = channel.bs_ris(k, e);
                let g = channel.ris_ue(k, e)[e];
                let gain = pilot * C64::from_polar(1.0, phase);
                for r in 0..b {
                    let noise = if noise_std > 0.0 { rng.complex_normal(noise_std) } else { C64::new(0.0, 0.0) };
                    est[(r, e)] = h[(r, e)] * g + noise / gain;
                }
            }
            est
        })
        .collect();
    Ok(CascadedEstimate {
        columns,
        sounding_phases,
        pilot,
        noise_var,
    })
}
