use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mathkit::AngleFamily;

const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Complete description of one link-level experiment: node geometry,
/// array sizes, OFDM numerology, channel statistics and powers.
///
/// Defaults follow the reference factory deployment (BS at (0,0,3), RIS
/// at (3,0,3), UE at (6,1,1), 3.5 GHz, 30 kHz spacing, 1024 subcarriers)
/// with the high angular-spread setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub bs_pos: [f64; 3],
    pub ris_pos: [f64; 3],
    pub ue_pos: [f64; 3],
    /// Carrier frequency in Hz.
    pub fc: f64,
    /// Subcarrier spacing in Hz.
    pub delta_f: f64,
    /// Number of subcarriers `K`.
    pub subcarriers: usize,
    /// Cyclic prefix length in samples.
    pub cp_len: usize,
    /// OFDM symbols per frame `N`.
    pub symbols: usize,
    pub bs_h: usize,
    pub bs_v: usize,
    pub ris_h: usize,
    pub ris_v: usize,
    /// Element spacings in wavelengths.
    pub bs_spacing_h: f64,
    pub bs_spacing_v: f64,
    pub ris_spacing_h: f64,
    pub ris_spacing_v: f64,
    /// Large-scale gain of the BS-RIS link in dB.
    pub bs_ris_gain_db: f64,
    /// Large-scale gain of the RIS-UE link in dB.
    pub ris_ue_gain_db: f64,
    /// Small-scale variances for the IID model.
    pub bs_ris_variance: f64,
    pub ris_ue_variance: f64,
    pub bs_ris_clusters: usize,
    pub bs_ris_rays: usize,
    pub ris_ue_clusters: usize,
    pub ris_ue_rays: usize,
    /// Delay spread in seconds, used as configured.
    pub delay_spread_s: f64,
    pub asd_deg: f64,
    pub asa_deg: f64,
    pub zsd_deg: f64,
    pub zsa_deg: f64,
    pub azimuth_family: AngleFamily,
    pub zenith_family: AngleFamily,
    pub speed_kmh: f64,
    pub noise_dbw: f64,
    pub px_dbw: f64,
    /// How many subcarriers are actually generated per frame. They are
    /// spread evenly over the band; see [`Scenario::simulated_subcarriers`].
    pub simulated_subcarriers: usize,
    /// IID model: reuse one draw across all subcarriers.
    pub iid_flat_in_k: bool,
    /// Use signed `J0` for the temporal correlation instead of `|J0|`.
    pub signed_doppler: bool,
    /// Refresh the RIS phases every symbol instead of once per frame.
    pub ris_per_symbol: bool,
    /// Apply differential encoding across subcarriers instead of time.
    pub encode_in_frequency: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            bs_pos: [0.0, 0.0, 3.0],
            ris_pos: [3.0, 0.0, 3.0],
            ue_pos: [6.0, 1.0, 1.0],
            fc: 3.5e9,
            delta_f: 30e3,
            subcarriers: 1024,
            cp_len: 72,
            symbols: 140,
            bs_h: 2,
            bs_v: 2,
            ris_h: 8,
            ris_v: 8,
            bs_spacing_h: 0.5,
            bs_spacing_v: 0.5,
            ris_spacing_h: 0.5,
            ris_spacing_v: 0.5,
            bs_ris_gain_db: -48.0,
            ris_ue_gain_db: -59.0,
            bs_ris_variance: 1.0,
            ris_ue_variance: 1.0,
            bs_ris_clusters: 12,
            bs_ris_rays: 20,
            ris_ue_clusters: 12,
            ris_ue_rays: 20,
            delay_spread_s: 0.15e-3,
            asd_deg: 30.0,
            asa_deg: 50.0,
            zsd_deg: 130.0,
            zsa_deg: 150.0,
            azimuth_family: AngleFamily::WrappedGaussian,
            zenith_family: AngleFamily::Laplacian,
            speed_kmh: 3.0,
            noise_dbw: -116.0,
            px_dbw: -20.0,
            simulated_subcarriers: 4,
            iid_flat_in_k: false,
            signed_doppler: false,
            ris_per_symbol: false,
            encode_in_frequency: false,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl Scenario {
    /// Low angular-spread variant of the defaults.
    pub fn low_as() -> Self {
        Self {
            asd_deg: 7.0,
            asa_deg: 12.0,
            zsd_deg: 25.0,
            zsa_deg: 30.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("subcarriers", self.subcarriers),
            ("bs_h", self.bs_h),
            ("bs_v", self.bs_v),
            ("ris_h", self.ris_h),
            ("ris_v", self.ris_v),
            ("bs_ris_clusters", self.bs_ris_clusters),
            ("bs_ris_rays", self.bs_ris_rays),
            ("ris_ue_clusters", self.ris_ue_clusters),
            ("ris_ue_rays", self.ris_ue_rays),
            ("simulated_subcarriers", self.simulated_subcarriers),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(invalid(name, "must be >= 1"));
            }
        }
        if self.symbols < 2 {
            return Err(invalid("symbols", "need at least 2 OFDM symbols per frame"));
        }
        if self.simulated_subcarriers > self.subcarriers {
            return Err(invalid("simulated_subcarriers", "exceeds subcarrier count"));
        }
        let reals = [
            ("fc", self.fc),
            ("delta_f", self.delta_f),
            ("bs_spacing_h", self.bs_spacing_h),
            ("bs_spacing_v", self.bs_spacing_v),
            ("ris_spacing_h", self.ris_spacing_h),
            ("ris_spacing_v", self.ris_spacing_v),
            ("bs_ris_variance", self.bs_ris_variance),
            ("ris_ue_variance", self.ris_ue_variance),
        ];
        for (name, v) in reals {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [
            ("delay_spread_s", self.delay_spread_s),
            ("asd_deg", self.asd_deg),
            ("asa_deg", self.asa_deg),
            ("zsd_deg", self.zsd_deg),
            ("zsa_deg", self.zsa_deg),
            ("speed_kmh", self.speed_kmh),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("bs_ris_gain_db", self.bs_ris_gain_db),
            ("ris_ue_gain_db", self.ris_ue_gain_db),
            ("px_dbw", self.px_dbw),
        ] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        // -inf noise is the noiseless limit.
        if self.noise_dbw.is_nan() || self.noise_dbw == f64::INFINITY {
            return Err(invalid("noise_dbw", "must be < +inf"));
        }
        for (name, p) in [("bs_pos", self.bs_pos), ("ris_pos", self.ris_pos), ("ue_pos", self.ue_pos)] {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn bs_antennas(&self) -> usize {
        self.bs_h * self.bs_v
    }

    pub fn ris_elements(&self) -> usize {
        self.ris_h * self.ris_v
    }

    /// Maximum Doppler shift `v fc / c` in Hz.
    pub fn doppler_hz(&self) -> f64 {
        self.speed_kmh / 3.6 * self.fc / SPEED_OF_LIGHT
    }

    pub fn noise_var(&self) -> f64 {
        db_to_linear(self.noise_dbw)
    }

    pub fn px(&self) -> f64 {
        db_to_linear(self.px_dbw)
    }

    pub fn bs_ris_gain(&self) -> f64 {
        db_to_linear(self.bs_ris_gain_db)
    }

    pub fn ris_ue_gain(&self) -> f64 {
        db_to_linear(self.ris_ue_gain_db)
    }

    /// Delay spread in samples at the sampling rate `K * delta_f`.
    pub fn delay_spread_samples(&self) -> f64 {
        self.delay_spread_s * self.subcarriers as f64 * self.delta_f
    }

    /// Indices of the generated subcarriers, `floor((2i+1) K / (2S))`.
    pub fn simulated_subcarriers(&self) -> Vec<usize> {
        let s = self.simulated_subcarriers;
        (0..s).map(|i| (2 * i + 1) * self.subcarriers / (2 * s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let s = Scenario::default();
        s.validate().unwrap();
        assert_eq!(s.bs_antennas(), 4);
        assert_eq!(s.ris_elements(), 64);
        assert!((s.doppler_hz() - 9.7222).abs() < 1e-3);
        assert!((s.delay_spread_samples() - 4608.0).abs() < 1e-9);
        assert_eq!(Scenario { simulated_subcarriers: 1, ..s }.simulated_subcarriers(), vec![512]);
    }

    #[test]
    fn invalid_counts_rejected() {
        assert!(Scenario { symbols: 1, ..Scenario::default() }.validate().is_err());
        assert!(Scenario { ris_h: 0, ..Scenario::default() }.validate().is_err());
        assert!(Scenario { asd_deg: -1.0, ..Scenario::default() }.validate().is_err());
    }

    #[test]
    fn noiseless_is_allowed() {
        let s = Scenario {
            noise_dbw: f64::NEG_INFINITY,
            ..Scenario::default()
        };
        s.validate().unwrap();
        assert_eq!(s.noise_var(), 0.0);
    }
}
