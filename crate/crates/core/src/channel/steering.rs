use num_complex::Complex64;

use crate::error::{invalid, Result};

/// Uniform rectangular array response.
///
/// Element `(h, v)` (0-based) sits at index `n_h * v + h` and carries
/// `exp(j 2 pi (h d_h sin(zenith) cos(azimuth) + v d_v sin(zenith) sin(azimuth)))`.
pub fn steering_vector(
    n_h: usize,
    n_v: usize,
    d_h: f64,
    d_v: f64,
    azimuth: f64,
    zenith: f64,
) -> Result<Vec<Complex64>> {
    if n_h == 0 || n_v == 0 {
        return Err(invalid("array size", "both dimensions must be >= 1"));
    }
    let (kh, kv) = phase_steps(d_h, d_v, azimuth, zenith);
    let mut out = Vec::with_capacity(n_h * n_v);
    for v in 0..n_v {
        for h in 0..n_h {
            out.push(Complex64::from_polar(1.0, kh * h as f64 + kv * v as f64));
        }
    }
    Ok(out)
}

/// Per-element phase increments along the two array axes.
pub(crate) fn phase_steps(d_h: f64, d_v: f64, azimuth: f64, zenith: f64) -> (f64, f64) {
    let tau = 2.0 * std::f64::consts::PI;
    let s = zenith.sin();
    (tau * d_h * s * azimuth.cos(), tau * d_v * s * azimuth.sin())
}
