//! Seeded random streams and the variate generators used by the channel
//! and transceiver models.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Monte Carlo trial `t` owns `RngStream::new(seed, t)`, so serial and
/// parallel runs consume identical sequences.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Independent child stream for one purpose (channel, noise, ...) within
    /// the same trial. Depends only on `(seed, stream_id, tag)`.
    pub fn fork(&self, tag: u64) -> RngStream {
        let child_seed = splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x5851_F42D_4C95_7F2D)));
        RngStream::new(child_seed, self.stream_id)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Circularly-symmetric complex normal with the given standard deviation
    /// of the complex variable (`E|z|^2 = std^2`). No argument checking.
    #[inline]
    pub fn complex_normal(&mut self, std: f64) -> Complex64 {
        let s = std * std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.standard_normal() * s, self.standard_normal() * s)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One draw from CN(0, variance): real and imaginary parts are independent
/// N(0, variance/2).
pub fn sample_complex_gaussian(rng: &mut RngStream, variance: f64) -> Result<Complex64> {
    if !variance.is_finite() {
        return Err(Error::NonFinite("variance"));
    }
    if variance < 0.0 {
        return Err(invalid("variance", format!("must be >= 0, got {variance}")));
    }
    Ok(rng.complex_normal(variance.sqrt()))
}

/// Angular distribution families used for cluster and ray angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleFamily {
    WrappedGaussian,
    Laplacian,
}

impl std::str::FromStr for AngleFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wrapped-gaussian" => Ok(Self::WrappedGaussian),
            "laplacian" => Ok(Self::Laplacian),
            other => Err(invalid("family", format!("unknown angle family `{other}`"))),
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Draws `count` angles around `mean` with standard deviation `spread`.
///
/// Wrapped Gaussian: normal draw then wrap. Laplacian: inverse CDF with
/// scale `spread / sqrt(2)`, then wrap.
pub fn sample_angles(
    rng: &mut RngStream,
    mean: f64,
    spread: f64,
    family: AngleFamily,
    count: usize,
) -> Result<Vec<f64>> {
    if !mean.is_finite() || !spread.is_finite() {
        return Err(Error::NonFinite("angle parameters"));
    }
    if spread < 0.0 {
        return Err(invalid("spread", format!("must be >= 0, got {spread}")));
    }
    Ok((0..count).map(|_| sample_angle(rng, mean, spread, family)).collect())
}

pub(crate) fn sample_angle(rng: &mut RngStream, mean: f64, spread: f64, family: AngleFamily) -> f64 {
    if spread == 0.0 {
        return wrap_angle(mean);
    }
    let offset = match family {
        AngleFamily::WrappedGaussian => spread * rng.standard_normal(),
        AngleFamily::Laplacian => {
            let scale = spread * std::f64::consts::FRAC_1_SQRT_2;
            // u uniform on (-1/2, 1/2)
            let mut u = rng.uniform() - 0.5;
            if u == -0.5 {
                u = 0.0;
            }
            -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
        }
    };
    wrap_angle(mean + offset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_is_degenerate() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..10 {
            assert_eq!(sample_complex_gaussian(&mut rng, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        }
        assert!(sample_complex_gaussian(&mut rng, -1.0).is_err());
    }

    #[test]
    fn complex_gaussian_moments() {
        let mut rng = RngStream::new(3, 0);
        let n = 1_000_000;
        let mut mean = Complex64::new(0.0, 0.0);
        let mut power = 0.0;
        let mut re2 = 0.0;
        for _ in 0..n {
            let z = sample_complex_gaussian(&mut rng, 2.0).unwrap();
            mean += z;
            power += z.norm_sqr();
            re2 += z.re * z.re;
        }
        let n = n as f64;
        assert!((mean / n).norm() < 0.01);
        assert!((1.99..=2.01).contains(&(power / n)));
        assert!((re2 / n - 1.0).abs() < 0.01);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let draw = |seed, stream| {
            let mut r = RngStream::new(seed, stream);
            (0..16).map(|_| r.uniform()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 0), draw(7, 0));
        assert_ne!(draw(7, 0), draw(7, 1));
        assert_ne!(draw(7, 0), draw(8, 0));
        let base = RngStream::new(7, 3);
        let a: Vec<f64> = {
            let mut f = base.fork(1);
            (0..8).map(|_| f.uniform()).collect()
        };
        let b: Vec<f64> = {
            let mut f = base.fork(2);
            (0..8).map(|_| f.uniform()).collect()
        };
        assert_ne!(a, b);
        let mut again = RngStream::new(7, 3).fork(1);
        assert_eq!(a, (0..8).map(|_| again.uniform()).collect::<Vec<_>>());
    }

    #[test]
    fn zero_spread_returns_mean() {
        let mut rng = RngStream::new(1, 0);
        for fam in [AngleFamily::WrappedGaussian, AngleFamily::Laplacian] {
            assert_eq!(sample_angles(&mut rng, 0.3, 0.0, fam, 5).unwrap(), vec![0.3; 5]);
        }
    }

    #[test]
    fn wrapped_gaussian_circular_std() {
        let mut rng = RngStream::new(5, 0);
        let a = sample_angles(&mut rng, 0.0, 0.2, AngleFamily::WrappedGaussian, 100_000).unwrap();
        let (s, c) = a.iter().fold((0.0, 0.0), |(s, c), x| (s + x.sin(), c + x.cos()));
        let r = (s * s + c * c).sqrt() / a.len() as f64;
        let circ_std = (-2.0 * r.ln()).sqrt();
        assert!((0.195..=0.205).contains(&circ_std), "{circ_std}");
        assert!(a.iter().all(|&x| x > -PI && x <= PI));
    }

    #[test]
    fn laplacian_std() {
        let mut rng = RngStream::new(6, 0);
        let a = sample_angles(&mut rng, 0.0, 0.2, AngleFamily::Laplacian, 100_000).unwrap();
        let m = a.iter().sum::<f64>() / a.len() as f64;
        let sd = (a.iter().map(|x| (x - m).powi(2)).sum::<f64>() / a.len() as f64).sqrt();
        assert!((0.19..=0.21).contains(&sd), "{sd}");
    }

    #[test]
    fn unknown_family_rejected() {
        assert!("von-mises".parse::<AngleFamily>().is_err());
        assert_eq!("laplacian".parse::<AngleFamily>().unwrap(), AngleFamily::Laplacian);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5 + 4.0 * PI) - 0.5).abs() < 1e-12);
    }
}
