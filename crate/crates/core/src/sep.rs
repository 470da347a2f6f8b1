//! Analytic symbol error probability of the differential detector and its
//! Monte Carlo counterpart.
//!
//! The decision variable is modelled as `z = I1 + n` with `I1` real
//! (Gamma for IID links, Gaussian for geometric links) and `n` circular
//! complex Gaussian. The error probability for the wedge of width
//! `2 pi / Mq` around the positive real axis is
//!
//! `Pe = int f(r) [Phi(-r/s) + int_0^inf phi_s(u - r) 2 Phi(-u tan(pi/Mq) / s) du] dr`
//!
//! where `s^2` is the per-dimension noise variance; the integral over the
//! imaginary axis has been done in closed form.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::channel::ChannelModel;
use crate::error::{invalid, Result};
use crate::mathkit::{integrate_1d, integrate_2d, Quadrature, Region2D};
use crate::ncds::{check_order, MomentSet};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Distribution of the useful term `I1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum I1Family {
    Gamma { shape: f64, scale: f64 },
    Gaussian { mean: f64, variance: f64 },
}

/// Parameterization of the Gamma law for IID links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GammaFit {
    /// Shape and scale matched to the mean and variance of `I1`.
    #[default]
    MomentMatched,
    /// Shape `B`, scale `E|I1|^2`.
    Literal,
}

/// How the noise variance enters the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    /// One variance `E|I2|^2 + E|I3|^2 + E|I4|^2` for every channel state.
    #[default]
    Pooled,
    /// Variance conditioned on `I1 = r`: the signal-noise cross terms scale
    /// with the channel power, `(E|I2|^2 + E|I3|^2) r / E[I1] + E|I4|^2`.
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SepOptions {
    pub gamma_fit: GammaFit,
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionPdfModel {
    pub i1: I1Family,
    /// Pooled complex noise variance `sigma_s^2`.
    pub noise_variance: f64,
    /// Complex noise variance as `slope * r + intercept` (pooled: slope 0).
    pub noise_slope: f64,
    pub noise_intercept: f64,
    pub order: usize,
}

impl DecisionPdfModel {
    /// Complex noise variance given `I1 = r`.
    pub fn noise_at(&self, r: f64) -> f64 {
        (self.noise_slope * r.max(0.0) + self.noise_intercept).max(0.0)
    }

    pub fn i1_mean(&self) -> f64 {
        match self.i1 {
            I1Family::Gamma { shape, scale } => shape * scale,
            I1Family::Gaussian { mean, .. } => mean,
        }
    }

    pub fn i1_variance(&self) -> f64 {
        match self.i1 {
            I1Family::Gamma { shape, scale } => shape * scale * scale,
            I1Family::Gaussian { variance, .. } => variance,
        }
    }

    /// Density of `I1`.
    pub fn i1_pdf(&self, r: f64) -> f64 {
        match self.i1 {
            I1Family::Gamma { shape, scale } => {
                if r <= 0.0 {
                    return 0.0;
                }
                ((shape - 1.0) * r.ln() - r / scale - ln_gamma(shape) - shape * scale.ln()).exp()
            }
            I1Family::Gaussian { mean, variance } => {
                let sd = variance.sqrt();
                INV_SQRT_2PI / sd * (-0.5 * ((r - mean) / sd).powi(2)).exp()
            }
        }
    }

    /// Integration range for `I1`: `[0, mean + 12 sd]` (Gamma) or
    /// `mean +- 8 sd` (Gaussian).
    pub fn i1_support(&self) -> (f64, f64) {
        let (m, sd) = (self.i1_mean(), self.i1_variance().sqrt());
        match self.i1 {
            I1Family::Gamma { .. } => (0.0, m + 12.0 * sd),
            I1Family::Gaussian { .. } => (m - 8.0 * sd, m + 8.0 * sd),
        }
    }
}

/// Builds the decision-variable model from a moment set.
pub fn build_pdf_model(
    moments: &MomentSet,
    channel: ChannelModel,
    bs_antennas: usize,
    order: usize,
    options: SepOptions,
) -> Result<DecisionPdfModel> {
    check_order(order)?;
    let mean = moments.e_s_i1;
    let variance = moments.e_i1_sq - mean * mean;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(invalid("moments", "E[s* I1] must be positive"));
    }
    let i1 = match (channel, options.gamma_fit) {
        (ChannelModel::Iid, GammaFit::MomentMatched) => {
            if !(variance > 0.0) {
                return Err(invalid("moments", format!("non-positive I1 variance {variance}")));
            }
            I1Family::Gamma {
                shape: mean * mean / variance,
                scale: variance / mean,
            }
        }
        (ChannelModel::Iid, GammaFit::Literal) => I1Family::Gamma {
            shape: bs_antennas as f64,
            scale: moments.e_i1_sq,
        },
        (ChannelModel::Geometric, _) => {
            if !(variance > 0.0) {
                return Err(invalid("moments", format!("non-positive I1 variance {variance}")));
            }
            I1Family::Gaussian { mean, variance }
        }
    };
    let noise_variance = moments.noise_variance();
    let (noise_slope, noise_intercept) = match options.noise {
        NoiseModel::Pooled => (0.0, noise_variance),
        NoiseModel::Conditional => ((moments.e_i2_sq + moments.e_i3_sq) / mean, moments.e_i4_sq),
    };
    Ok(DecisionPdfModel {
        i1,
        noise_variance,
        noise_slope,
        noise_intercept,
        order,
    })
}

fn upper_normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Probability that the conditional decision falls outside the correct
/// wedge, given `I1 = r` and per-dimension noise deviation `s`, for `Mq = 2`
/// or via the `u` integrand otherwise.
fn wedge_miss_integrand(u: f64, r: f64, s: f64, slope: f64) -> f64 {
    let d = (u - r) / s;
    INV_SQRT_2PI / s * (-0.5 * d * d).exp() * 2.0 * upper_normal_tail(u * slope / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SepValue {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Analytic symbol error probability.
pub fn sep_analytic(model: &DecisionPdfModel, tol: f64) -> SepValue {
    let (lo, hi) = model.i1_support();
    let sd = |r: f64| (0.5 * model.noise_at(r)).sqrt();
    // Left half-plane term: the real part of z falls below zero.
    let half_plane = integrate_1d(
        |r| {
            let s = sd(r);
            let p = if s > 0.0 {
                upper_normal_tail(r / s)
            } else if r < 0.0 {
                1.0
            } else {
                0.0
            };
            model.i1_pdf(r) * p
        },
        lo,
        hi,
        tol,
    );
    let sides = if model.order == 2 {
        Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            converged: true,
        }
    } else {
        let slope = (std::f64::consts::PI / model.order as f64).tan();
        let region = Region2D::new(lo, hi, |r: f64| {
            let s = sd(r);
            ((r - 8.0 * s).max(0.0), (r + 8.0 * s).max(0.0))
        });
        integrate_2d(
            |r, u| {
                let s = sd(r);
                if s == 0.0 {
                    return 0.0;
                }
                model.i1_pdf(r) * wedge_miss_integrand(u, r, s, slope)
            },
            &region,
            tol,
        )
    };
    SepValue {
        value: (half_plane.value + sides.value).clamp(0.0, 1.0),
        error_estimate: half_plane.error_estimate + sides.error_estimate,
        converged: half_plane.converged && sides.converged,
    }
}

/// Density of `z` at `(u, v)` (real, imaginary parts).
pub fn density(model: &DecisionPdfModel, u: f64, v: f64, tol: f64) -> f64 {
    let (lo, hi) = model.i1_support();
    integrate_1d(
        |r| {
            let var = 0.5 * model.noise_at(r);
            if var == 0.0 {
                return 0.0;
            }
            let g = INV_SQRT_2PI * INV_SQRT_2PI / var * (-0.5 * ((u - r).powi(2) + v * v) / var).exp();
            model.i1_pdf(r) * g
        },
        lo,
        hi,
        tol,
    )
    .value
}

/// Symbol error counter with a binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorCounter {
    pub errors: u64,
    pub symbols: u64,
}

impl ErrorCounter {
    pub fn push(&mut self, decided: usize, truth: usize) {
        self.symbols += 1;
        if decided != truth {
            self.errors += 1;
        }
    }

    pub fn merge(&mut self, other: &ErrorCounter) {
        self.errors += other.errors;
        self.symbols += other.symbols;
    }

    pub fn pe(&self) -> f64 {
        if self.symbols == 0 {
            return f64::NAN;
        }
        self.errors as f64 / self.symbols as f64
    }

    pub fn stderr(&self) -> f64 {
        let p = self.pe();
        (p * (1.0 - p) / self.symbols as f64).sqrt()
    }
}

/// `(error rate, binomial standard error)` of `decided` against `truth`.
pub fn sep_empirical(decided: &[usize], truth: &[usize]) -> Result<(f64, f64)> {
    crate::error::check_len("decisions", truth.len(), decided.len())?;
    if decided.is_empty() {
        return Err(invalid("decisions", "need at least one decision"));
    }
    let mut c = ErrorCounter::default();
    for (d, t) in decided.iter().zip(truth) {
        c.push(*d, *t);
    }
    Ok((c.pe(), c.stderr()))
}
