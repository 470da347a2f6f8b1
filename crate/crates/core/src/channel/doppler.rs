use crate::error::{invalid, Result};
use crate::mathkit::{bessel_j0, cholesky_jittered, clip_to_psd_correlation, RngStream, C64};

/// `|J0(2 pi f_d (dn / delta_f) (1 + L_cp / K))|`: correlation between
/// channel samples `dn` OFDM symbols apart.
pub fn doppler_correlation(delta_n: i64, f_d: f64, delta_f: f64, k: usize, cp_len: usize) -> Result<f64> {
    signed_doppler_correlation(delta_n, f_d, delta_f, k, cp_len).map(f64::abs)
}

/// Same as [`doppler_correlation`] without the absolute value (Jakes).
pub fn signed_doppler_correlation(delta_n: i64, f_d: f64, delta_f: f64, k: usize, cp_len: usize) -> Result<f64> {
    if !(delta_f > 0.0) || k == 0 {
        return Err(invalid("numerology", "delta_f and K must be positive"));
    }
    let symbol_time = (1.0 + cp_len as f64 / k as f64) / delta_f;
    bessel_j0(2.0 * std::f64::consts::PI * f_d * delta_n as f64 * symbol_time)
}

/// Generates length-`N` complex Gaussian series with the Toeplitz lag
/// correlation of the Doppler model, via its Cholesky factor.
#[derive(Debug, Clone)]
pub struct TemporalColoring {
    len: usize,
    /// Lower-triangular factor, row-major. `None` for a static channel.
    factor: Option<Vec<f64>>,
    jitter: f64,
}

impl TemporalColoring {
    pub fn new(len: usize, f_d: f64, delta_f: f64, k: usize, cp_len: usize, signed: bool) -> Result<Self> {
        if f_d == 0.0 {
            return Ok(Self {
                len,
                factor: None,
                jitter: 0.0,
            });
        }
        let mut lag = Vec::with_capacity(len);
        for d in 0..len {
            let r = if signed {
                signed_doppler_correlation(d as i64, f_d, delta_f, k, cp_len)?
            } else {
                doppler_correlation(d as i64, f_d, delta_f, k, cp_len)?
            };
            lag.push(r);
        }
        let mut r = vec![0.0; len * len];
        for i in 0..len {
            for j in 0..len {
                r[i * len + j] = lag[i.abs_diff(j)];
            }
        }
        // |J0| is not a valid correlation function once the lags reach the
        // negative lobes of J0; fall back to the nearest PSD correlation.
        let (factor, jitter) = match cholesky_jittered(&r, len) {
            Ok(f) => f,
            Err(_) => cholesky_jittered(&clip_to_psd_correlation(&r, len)?, len)?,
        };
        Ok(Self {
            len,
            factor: Some(factor),
            jitter,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Diagonal regularization that the factorization needed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn is_static(&self) -> bool {
        self.factor.is_none()
    }

    /// Writes one correlated series with per-sample variance `var` into
    /// `out[0], out[stride], ...`.
    pub fn draw_into(&self, rng: &mut RngStream, var: f64, out: &mut [C64], stride: usize) {
        let std = var.sqrt();
        match &self.factor {
            None => {
                let z = rng.complex_normal(std);
                for n in 0..self.len {
                    out[n * stride] = z;
                }
            }
            Some(l) => {
                let w: Vec<C64> = (0..self.len).map(|_| rng.complex_normal(std)).collect();
                for n in 0..self.len {
                    let row = &l[n * self.len..n * self.len + n + 1];
                    out[n * stride] = row.iter().zip(&w).map(|(a, z)| z * *a).sum();
                }
            }
        }
    }

    pub fn draw(&self, rng: &mut RngStream, var: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len];
        self.draw_into(rng, var, &mut out, 1);
        out
    }
}
