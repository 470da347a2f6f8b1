use crate::error::{invalid, Result};
use crate::mathkit::C64;

/// Second-order statistics of the four terms of the differential decision
/// variable plus the resulting SINR. All values are in the normalized
/// power convention `Px = 1` with noise variance `sigma_v^2 / Px`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub e_i1_sq: f64,
    pub e_i2_sq: f64,
    pub e_i3_sq: f64,
    pub e_i4_sq: f64,
    /// `Re E[conj(s) I1]`.
    pub e_s_i1: f64,
    pub sinr: f64,
}

impl MomentSet {
    /// Assembles a set from its moments and computes
    /// `1 / (1 + sum E|I_i|^2 / (MB)^2 - 2 E[s* I1] / (MB))`.
    pub fn from_moments(e_i1_sq: f64, e_i2_sq: f64, e_i3_sq: f64, e_i4_sq: f64, e_s_i1: f64, mb: f64) -> Self {
        let sinr = sinr_from_moments(e_i1_sq + e_i2_sq + e_i3_sq + e_i4_sq, e_s_i1, mb);
        Self {
            e_i1_sq,
            e_i2_sq,
            e_i3_sq,
            e_i4_sq,
            e_s_i1,
            sinr,
        }
    }

    /// `E|I2|^2 + E|I3|^2 + E|I4|^2`.
    pub fn noise_variance(&self) -> f64 {
        self.e_i2_sq + self.e_i3_sq + self.e_i4_sq
    }

    pub fn sinr_db(&self) -> f64 {
        10.0 * self.sinr.log10()
    }
}

pub fn sinr_from_moments(total_sq: f64, e_s_i1: f64, mb: f64) -> f64 {
    1.0 / (1.0 + total_sq / (mb * mb) - 2.0 * e_s_i1 / mb)
}

/// Closed-form moments for IID Rayleigh links (internally `Px = 1`):
///
/// - `E[s* I1] = B sh M sg`
/// - `E|I1|^2 = (1+B) B sh^2 (1+M) M sg^2`
/// - `E|I2|^2 = E|I3|^2 = s' B sh M sg`, `E|I4|^2 = B s'^2`
///
/// with `sh, sg` the link gains and `s' = sigma_v^2 / Px`.
pub fn moments_iid(
    bs_antennas: usize,
    ris_elements: usize,
    sigma_h2: f64,
    sigma_g2: f64,
    px: f64,
    sigma_v2: f64,
) -> Result<MomentSet> {
    if bs_antennas == 0 || ris_elements == 0 {
        return Err(invalid("array size", "B and M must be >= 1"));
    }
    for (name, v) in [("sigma_h2", sigma_h2), ("sigma_g2", sigma_g2), ("px", px)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, format!("must be finite and > 0, got {v}")));
        }
    }
    if !(sigma_v2.is_finite() && sigma_v2 >= 0.0) {
        return Err(invalid("sigma_v2", format!("must be finite and >= 0, got {sigma_v2}")));
    }
    let (b, m) = (bs_antennas as f64, ris_elements as f64);
    let noise = sigma_v2 / px;
    let power = b * sigma_h2 * m * sigma_g2;
    Ok(MomentSet::from_moments(
        (1.0 + b) * b * sigma_h2 * sigma_h2 * (1.0 + m) * m * sigma_g2 * sigma_g2,
        noise * power,
        noise * power,
        b * noise * noise,
        power,
        m * b,
    ))
}

/// Five per-sample quantities: `|I1|^2 .. |I4|^2`, `Re(conj(s) I1)`, plus
/// the per-sample excess of the inverse SINR.
const QUANTITIES: usize = 6;

/// Streaming Monte Carlo estimator of a [`MomentSet`].
///
/// Samples are grouped in batches (one batch per trial); standard errors
/// come from the spread of the batch means, which accounts for the
/// correlation of samples sharing a channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentAccumulator {
    mb: f64,
    samples: u64,
    sums: [f64; QUANTITIES],
    batch: [f64; QUANTITIES],
    batch_samples: u64,
    batches: u64,
    batch_mean_sums: [f64; QUANTITIES],
    batch_mean_squares: [f64; QUANTITIES],
}

/// Estimated moments with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub moments: MomentSet,
    /// Standard errors of `e_i1_sq, e_i2_sq, e_i3_sq, e_i4_sq, e_s_i1`.
    pub stderr: [f64; 5],
    /// Standard error of the SINR in dB (delta method on `1 / sinr`).
    pub sinr_db_stderr: f64,
    pub samples: u64,
    /// Fewer than 1000 samples.
    pub low_sample: bool,
}

impl MomentAccumulator {
    pub fn new(ris_elements: usize, bs_antennas: usize) -> Self {
        Self {
            mb: (ris_elements * bs_antennas) as f64,
            samples: 0,
            sums: [0.0; QUANTITIES],
            batch: [0.0; QUANTITIES],
            batch_samples: 0,
            batches: 0,
            batch_mean_sums: [0.0; QUANTITIES],
            batch_mean_squares: [0.0; QUANTITIES],
        }
    }

    /// Adds one decision: the four terms and the transmitted data symbol.
    pub fn push(&mut self, terms: &[C64; 4], s: C64) {
        let sq = [terms[0].norm_sqr(), terms[1].norm_sqr(), terms[2].norm_sqr(), terms[3].norm_sqr()];
        let cross = (s.conj() * terms[0]).re;
        let excess = (sq[0] + sq[1] + sq[2] + sq[3]) / (self.mb * self.mb) - 2.0 * cross / self.mb;
        let vals = [sq[0], sq[1], sq[2], sq[3], cross, excess];
        for (b, v) in self.batch.iter_mut().zip(vals) {
            *b += v;
        }
        self.batch_samples += 1;
    }

    /// Closes the current batch.
    pub fn end_batch(&mut self) {
        if self.batch_samples == 0 {
            return;
        }
        let n = self.batch_samples as f64;
        for i in 0..QUANTITIES {
            let mean = self.batch[i] / n;
            self.sums[i] += self.batch[i];
            self.batch_mean_sums[i] += mean;
            self.batch_mean_squares[i] += mean * mean;
            self.batch[i] = 0.0;
        }
        self.samples += self.batch_samples;
        self.batch_samples = 0;
        self.batches += 1;
    }

    /// Combines two accumulators (both with closed batches).
    pub fn merge(&mut self, other: &MomentAccumulator) {
        self.samples += other.samples;
        self.batches += other.batches;
        for i in 0..QUANTITIES {
            self.sums[i] += other.sums[i];
            self.batch_mean_sums[i] += other.batch_mean_sums[i];
            self.batch_mean_squares[i] += other.batch_mean_squares[i];
        }
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn estimate(&self) -> MomentEstimate {
        let mut acc = self.clone();
        acc.end_batch();
        let n = acc.samples.max(1) as f64;
        let mean = |i: usize| acc.sums[i] / n;
        let se = |i: usize| {
            if acc.batches < 2 {
                return f64::NAN;
            }
            let b = acc.batches as f64;
            let m = acc.batch_mean_sums[i] / b;
            let var = (acc.batch_mean_squares[i] / b - m * m).max(0.0) * b / (b - 1.0);
            (var / b).sqrt()
        };
        let moments = MomentSet::from_moments(mean(0), mean(1), mean(2), mean(3), mean(4), acc.mb);
        let sinr_db_stderr = 10.0 / std::f64::consts::LN_10 * se(5) * moments.sinr;
        MomentEstimate {
            moments,
            stderr: [se(0), se(1), se(2), se(3), se(4)],
            sinr_db_stderr,
            samples: acc.samples,
            low_sample: acc.samples < 1000,
        }
    }
}

/// Moment estimate from a list of `(terms, s)` samples treated as one batch
/// per `batch_len` consecutive entries.
pub fn sinr_empirical(
    samples: &[([C64; 4], C64)],
    ris_elements: usize,
    bs_antennas: usize,
    batch_len: usize,
) -> MomentEstimate {
    let mut acc = MomentAccumulator::new(ris_elements, bs_antennas);
    for chunk in samples.chunks(batch_len.max(1)) {
        for (t, s) in chunk {
            acc.push(t, *s);
        }
        acc.end_batch();
    }
    acc.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_single_element() {
        let m = moments_iid(1, 1, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(m.e_i1_sq, 4.0);
        assert_eq!(m.e_s_i1, 1.0);
        assert_eq!(m.e_i2_sq + m.e_i3_sq + m.e_i4_sq, 0.0);
    }

    #[test]
    fn high_power_limit() {
        let m = moments_iid(4, 64, 1.0, 1.0, 1e12, 1.0).unwrap();
        assert!((m.sinr - 256.0 / 69.0).abs() < 1e-9);
        assert!((m.sinr_db() - 5.694).abs() < 1e-3);
        let m = moments_iid(16, 1 << 20, 1.0, 1.0, 1e12, 1.0).unwrap();
        assert!((m.sinr_db() - 12.04).abs() < 0.01);
    }

    #[test]
    fn sinr_consistent_with_fields() {
        let m = moments_iid(4, 16, 0.7, 1.3, 2.0, 0.4).unwrap();
        let (mb, px) = (64.0, 1.0);
        let direct = px * px
            / (px * px + (m.e_i1_sq + m.e_i2_sq + m.e_i3_sq + m.e_i4_sq) / (mb * mb) - 2.0 * m.e_s_i1 / mb);
        assert!((m.sinr - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn monotone_in_array_sizes() {
        let sizes: Vec<usize> = (0..=10).map(|e| 1 << e).collect();
        for &b in &sizes {
            for w in sizes.windows(2) {
                let lo = moments_iid(b, w[0], 1.0, 1.0, 1.0, 0.1).unwrap().sinr;
                let hi = moments_iid(b, w[1], 1.0, 1.0, 1.0, 0.1).unwrap().sinr;
                assert!(hi >= lo, "M {} -> {}: {lo} {hi}", w[0], w[1]);
                let lo = moments_iid(w[0], b, 1.0, 1.0, 1.0, 0.1).unwrap().sinr;
                let hi = moments_iid(w[1], b, 1.0, 1.0, 1.0, 0.1).unwrap().sinr;
                assert!(hi >= lo);
            }
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(moments_iid(0, 1, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(moments_iid(1, 1, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(moments_iid(1, 1, 1.0, 1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn noiseless_samples_have_zero_noise_moments() {
        let s = C64::new(0.0, 1.0);
        let samples: Vec<([C64; 4], C64)> = (0..2000)
            .map(|i| ([s * (1.0 + i as f64), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)], s))
            .collect();
        let est = sinr_empirical(&samples, 2, 2, 100);
        assert_eq!(est.moments.e_i2_sq, 0.0);
        assert_eq!(est.moments.e_i3_sq, 0.0);
        assert_eq!(est.moments.e_i4_sq, 0.0);
        assert!(!est.low_sample);
        assert!(sinr_empirical(&samples[..10], 2, 2, 5).low_sample);
    }

    #[test]
    fn merge_equals_sequential() {
        let samples: Vec<([C64; 4], C64)> = (0..40)
            .map(|i| {
                let z = C64::new(i as f64, 1.0);
                ([z, z * 0.5, z * 0.1, z * 0.2], C64::new(1.0, 0.0))
            })
            .collect();
        let whole = sinr_empirical(&samples, 4, 2, 10);
        let mut a = MomentAccumulator::new(4, 2);
        let mut b = MomentAccumulator::new(4, 2);
        for (i, chunk) in samples.chunks(10).enumerate() {
            let acc = if i < 2 { &mut a } else { &mut b };
            for (t, s) in chunk {
                acc.push(t, *s);
            }
            acc.end_batch();
        }
        a.merge(&b);
        let merged = a.estimate();
        assert!((merged.moments.e_i1_sq - whole.moments.e_i1_sq).abs() < 1e-9 * whole.moments.e_i1_sq);
        assert!((merged.stderr[0] - whole.stderr[0]).abs() < 1e-9 * whole.stderr[0]);
    }
}
