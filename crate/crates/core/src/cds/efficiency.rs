use serde::{Deserialize, Serialize};

/// Coherence time in OFDM symbols: `(delta_f / f_d) 0.423 K / (K + L_cp)`.
/// A non-positive Doppler (static channel) gives `+inf`.
pub fn coherence_symbols(f_d: f64, delta_f: f64, subcarriers: usize, cp_len: usize) -> f64 {
    if !(f_d > 0.0) {
        return f64::INFINITY;
    }
    let k = subcarriers as f64;
    delta_f / f_d * 0.423 * k / (k + cp_len as f64)
}

/// Fraction of the coherence window left for data after `M` sounding
/// symbols: `max(0, 1 - M / N_c)`.
pub fn efficiency_factor(ris_elements: usize, coherence: f64) -> f64 {
    if coherence.is_infinite() {
        return 1.0;
    }
    if !(coherence > 0.0) {
        return 0.0;
    }
    (1.0 - ris_elements as f64 / coherence).clamp(0.0, 1.0)
}

/// How the coherence length is obtained for the efficiency table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoherenceModel {
    /// Coherence time from the numerology and the Doppler shift.
    Physical {
        fc: f64,
        delta_f: f64,
        subcarriers: usize,
        cp_len: usize,
    },
    /// `N_c = symbols_at_reference * reference_speed / speed`, optionally
    /// rounded to whole OFDM symbols.
    Calibrated {
        symbols_at_reference: f64,
        reference_speed_kmh: f64,
        whole_symbols: bool,
    },
}

impl Default for CoherenceModel {
    /// Calibration that reproduces the reference efficiency table:
    /// 609.75 symbols at 3 km/h, rounded to whole symbols.
    fn default() -> Self {
        CoherenceModel::Calibrated {
            symbols_at_reference: 609.75,
            reference_speed_kmh: 3.0,
            whole_symbols: true,
        }
    }
}

impl CoherenceModel {
    pub fn coherence(&self, speed_kmh: f64) -> f64 {
        match *self {
            CoherenceModel::Physical {
                fc,
                delta_f,
                subcarriers,
                cp_len,
            } => {
                let f_d = speed_kmh / 3.6 * fc / 3.0e8;
                coherence_symbols(f_d, delta_f, subcarriers, cp_len)
            }
            CoherenceModel::Calibrated {
                symbols_at_reference,
                reference_speed_kmh,
                whole_symbols,
            } => {
                if !(speed_kmh > 0.0) {
                    return f64::INFINITY;
                }
                let n = symbols_at_reference * reference_speed_kmh / speed_kmh;
                if whole_symbols {
                    n.round()
                } else {
                    n
                }
            }
        }
    }
}

pub const TABLE_SPEEDS_KMH: [f64; 5] = [3.0, 10.0, 20.0, 30.0, 40.0];
pub const TABLE_RIS_SIZES: [usize; 7] = [16, 32, 64, 128, 256, 512, 1024];

/// Efficiency factor for every `(M, speed)` pair, rows by `M`.
pub fn efficiency_table(model: &CoherenceModel, ris_sizes: &[usize], speeds_kmh: &[f64]) -> Vec<Vec<f64>> {
    ris_sizes
        .iter()
        .map(|&m| {
            speeds_kmh
                .iter()
                .map(|&v| efficiency_factor(m, model.coherence(v)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coherence_scaling() {
        let a = coherence_symbols(10.0, 30e3, 1024, 72);
        let b = coherence_symbols(20.0, 30e3, 1024, 72);
        assert!((a / b - 2.0).abs() < 1e-12);
        assert!((coherence_symbols(10.0, 30e3, 1024, 0) - 0.423 * 3000.0).abs() < 1e-9);
        assert_eq!(coherence_symbols(0.0, 30e3, 1024, 72), f64::INFINITY);
        assert_eq!(coherence_symbols(-1.0, 30e3, 1024, 72), f64::INFINITY);
    }

    #[test]
    fn factor_examples() {
        assert!((efficiency_factor(16, 610.3) - 0.9738).abs() < 1e-4);
        assert_eq!(efficiency_factor(1024, 610.3), 0.0);
        assert_eq!(efficiency_factor(64, 64.0), 0.0);
        assert_eq!(efficiency_factor(64, f64::INFINITY), 1.0);
        let mut prev = 1.0;
        for m in [0, 1, 16, 64, 256, 1024] {
            let e = efficiency_factor(m, 300.0);
            assert!(e <= prev && (0.0..=1.0).contains(&e));
            prev = e;
        }
    }

    #[test]
    fn calibrated_coherence() {
        let model = CoherenceModel::default();
        let got: Vec<f64> = TABLE_SPEEDS_KMH.iter().map(|&v| model.coherence(v)).collect();
        assert_eq!(got, vec![610.0, 183.0, 91.0, 61.0, 46.0]);
        let cont = CoherenceModel::Calibrated {
            symbols_at_reference: 610.3,
            reference_speed_kmh: 3.0,
            whole_symbols: false,
        };
        assert!((cont.coherence(20.0) - 91.545).abs() < 1e-9);
    }

    #[test]
    fn physical_cp_equivalent() {
        // A cyclic prefix of 1168 samples puts the physical model at the
        // calibrated 609.75 symbols for 3 km/h.
        let m = CoherenceModel::Physical {
            fc: 3.5e9,
            delta_f: 30e3,
            subcarriers: 1024,
            cp_len: 1168,
        };
        assert!((m.coherence(3.0) - 609.75).abs() < 0.5);
    }
}
