//! RIS phase configurations and the cascaded BS-RIS-UE channel.

use std::f64::consts::PI;

use crate::error::{check_len, invalid, Result};
use crate::mathkit::{CMatrix, RngStream, C64};

const TAU: f64 = 2.0 * PI;

/// Phase configuration for a frame. Either one vector shared by all
/// symbols (per-frame refresh) or one vector per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct RisConfig {
    phases: Vec<Vec<f64>>,
    symbols: usize,
    pub bits: Option<u32>,
}

impl RisConfig {
    /// Frame-constant configuration.
    pub fn constant(phases: Vec<f64>, symbols: usize) -> Self {
        Self {
            phases: vec![phases],
            symbols,
            bits: None,
        }
    }

    pub fn per_symbol(phases: Vec<Vec<f64>>) -> Self {
        let symbols = phases.len();
        Self {
            phases,
            symbols,
            bits: None,
        }
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn elements(&self) -> usize {
        self.phases.first().map_or(0, Vec::len)
    }

    pub fn is_frame_constant(&self) -> bool {
        self.phases.len() == 1
    }

    /// Phases applied during symbol `n`.
    pub fn phases_at(&self, n: usize) -> &[f64] {
        if self.phases.len() == 1 {
            &self.phases[0]
        } else {
            &self.phases[n]
        }
    }

    /// `exp(j psi)` for symbol `n`.
    pub fn phasors_at(&self, n: usize) -> Vec<C64> {
        self.phases_at(n).iter().map(|&p| C64::from_polar(1.0, p)).collect()
    }
}

/// Uniform random phases on `[0, 2 pi)`. With `per_frame` one draw serves
/// all `symbols`; otherwise every symbol gets a fresh draw.
pub fn random_config(elements: usize, symbols: usize, rng: &mut RngStream, per_frame: bool) -> Result<RisConfig> {
    if elements == 0 || symbols == 0 {
        return Err(invalid("ris config", "M and N must be >= 1"));
    }
    let mut draw = || (0..elements).map(|_| TAU * rng.uniform()).collect::<Vec<_>>();
    Ok(if per_frame {
        RisConfig::constant(draw(), symbols)
    } else {
        RisConfig::per_symbol((0..symbols).map(|_| draw()).collect())
    })
}

/// Snaps a phase to the nearest of `2^bits` levels `2 pi i / 2^bits`;
/// an exact tie goes to the lower level.
pub fn quantize_phase(psi: f64, bits: u32) -> f64 {
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let x = psi.rem_euclid(TAU) / step;
    let lower = x.floor();
    let idx = if x - lower > 0.5 { lower as u64 + 1 } else { lower as u64 };
    (idx % levels) as f64 * step
}

pub fn quantize_config(cfg: &RisConfig, bits: u32) -> Result<RisConfig> {
    if bits == 0 {
        return Err(invalid("bits", "must be >= 1"));
    }
    if bits > 16 {
        return Err(invalid("bits", format!("{bits} bits is not a realistic phase shifter")));
    }
    Ok(RisConfig {
        phases: cfg
            .phases
            .iter()
            .map(|v| v.iter().map(|&p| quantize_phase(p, bits)).collect())
            .collect(),
        symbols: cfg.symbols,
        bits: Some(bits),
    })
}

/// `q = sum_m exp(j psi_m) H[:, m] g_m`.
pub fn cascaded_channel(h: &CMatrix, g: &[C64], psi: &[f64]) -> Result<Vec<C64>> {
    check_len("ris-ue vector", h.cols(), g.len())?;
    check_len("ris phases", h.cols(), psi.len())?;
    let phasors: Vec<C64> = psi.iter().map(|&p| C64::from_polar(1.0, p)).collect();
    Ok(cascaded_with_phasors(h, g, &phasors))
}

/// [`cascaded_channel`] with precomputed `exp(j psi)`; lengths unchecked.
pub fn cascaded_with_phasors(h: &CMatrix, g: &[C64], phasors: &[C64]) -> Vec<C64> {
    let weighted: Vec<C64> = g.iter().zip(phasors).map(|(a, b)| a * b).collect();
    (0..h.rows())
        .map(|r| h.row(r).iter().zip(&weighted).map(|(a, b)| a * b).sum())
        .collect()
}
