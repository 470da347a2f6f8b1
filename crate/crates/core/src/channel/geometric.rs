use std::f64::consts::PI;

use super::doppler::TemporalColoring;
use super::realization::{ChannelRealization, Cluster, ClusterTruth, Direction, Ray};
use super::scenario::Scenario;
use super::steering::steering_vector;
use crate::error::Result;
use crate::mathkit::random::sample_angle;
use crate::mathkit::{wrap_angle, CMatrix, RngStream, C64};

/// Direction of `to` as seen from `from`.
pub fn line_of_sight(from: [f64; 3], to: [f64; 3]) -> Direction {
    let d = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if r == 0.0 {
        return Direction {
            azimuth: 0.0,
            zenith: 0.0,
        };
    }
    Direction {
        azimuth: wrap_angle(d[1].atan2(d[0])),
        zenith: (d[2] / r).clamp(-1.0, 1.0).acos(),
    }
}

/// Maps any angle onto a zenith in `[0, pi]` by reflection.
fn fold_zenith(z: f64) -> f64 {
    wrap_angle(z).abs()
}

struct Spreads {
    azimuth: f64,
    zenith: f64,
}

/// Clustered geometric (CDL-style) generator.
///
/// Each link has `C` clusters with exponentially distributed delays and an
/// exponential power-delay profile normalized to unit total power. Cluster
/// mean directions are the line-of-sight direction plus an offset drawn with
/// the configured spread; rays scatter around the cluster mean with a tenth
/// of that spread. Ray gains are `CN(0, L sigma_c^2 / R)`. The BS-RIS link
/// is quasi-static; RIS-UE ray gains evolve over the frame with the Doppler
/// correlation.
#[derive(Debug, Clone)]
pub struct GeometricGenerator {
    scenario: Scenario,
    coloring: TemporalColoring,
    bs_from_ris: Direction,
    ris_to_bs: Direction,
    ris_from_ue: Direction,
    ue_to_ris: Direction,
}

impl GeometricGenerator {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let coloring = TemporalColoring::new(
            scenario.symbols,
            scenario.doppler_hz(),
            scenario.delta_f,
            scenario.subcarriers,
            scenario.cp_len,
            scenario.signed_doppler,
        )?;
        Ok(Self {
            scenario: scenario.clone(),
            coloring,
            bs_from_ris: line_of_sight(scenario.bs_pos, scenario.ris_pos),
            ris_to_bs: line_of_sight(scenario.ris_pos, scenario.bs_pos),
            ris_from_ue: line_of_sight(scenario.ris_pos, scenario.ue_pos),
            ue_to_ris: line_of_sight(scenario.ue_pos, scenario.ris_pos),
        })
    }

    /// Draws cluster delays, powers, ray directions and first-symbol ray
    /// gains for both links.
    pub fn draw_clusters(&self, rng: &mut RngStream) -> ClusterTruth {
        let s = &self.scenario;
        let dep = Spreads {
            azimuth: s.asd_deg.to_radians(),
            zenith: s.zsd_deg.to_radians(),
        };
        let arr = Spreads {
            azimuth: s.asa_deg.to_radians(),
            zenith: s.zsa_deg.to_radians(),
        };
        let bs_ris = self.draw_link(
            rng,
            s.bs_ris_clusters,
            s.bs_ris_rays,
            s.bs_ris_gain(),
            (self.ris_to_bs, &dep),
            (self.bs_from_ris, &arr),
        );
        let ris_ue = self.draw_link(
            rng,
            s.ris_ue_clusters,
            s.ris_ue_rays,
            s.ris_ue_gain(),
            (self.ue_to_ris, &dep),
            (self.ris_from_ue, &arr),
        );
        ClusterTruth { bs_ris, ris_ue }
    }

    fn draw_link(
        &self,
        rng: &mut RngStream,
        clusters: usize,
        rays: usize,
        gain: f64,
        departure: (Direction, &Spreads),
        arrival: (Direction, &Spreads),
    ) -> Vec<Cluster> {
        let s = &self.scenario;
        let ds = s.delay_spread_samples();
        let mut delays: Vec<f64> = (0..clusters)
            .map(|_| {
                if ds > 0.0 {
                    // 1 - u lies in (0, 1].
                    -ds * (1.0 - rng.uniform()).ln()
                } else {
                    0.0
                }
            })
            .collect();
        delays.sort_by(f64::total_cmp);
        let first = delays[0];
        for d in delays.iter_mut() {
            *d -= first;
        }
        let weights: Vec<f64> = delays
            .iter()
            .map(|&d| if ds > 0.0 { (-d / ds).exp() } else { 1.0 })
            .collect();
        let total: f64 = weights.iter().sum();

        let draw_dir = |rng: &mut RngStream, mean: Direction, spread: &Spreads| Direction {
            azimuth: sample_angle(rng, mean.azimuth, spread.azimuth, s.azimuth_family),
            zenith: fold_zenith(sample_angle(rng, mean.zenith, spread.zenith, s.zenith_family)),
        };
        let narrow = |sp: &Spreads| Spreads {
            azimuth: sp.azimuth / 10.0,
            zenith: sp.zenith / 10.0,
        };

        delays
            .into_iter()
            .zip(weights)
            .map(|(delay, w)| {
                let power = w / total;
                let dep_mean = draw_dir(rng, departure.0, departure.1);
                let arr_mean = draw_dir(rng, arrival.0, arrival.1);
                let ray_std = (gain * power / rays as f64).sqrt();
                let rays = (0..rays)
                    .map(|_| Ray {
                        departure: draw_dir(rng, dep_mean, &narrow(departure.1)),
                        arrival: draw_dir(rng, arr_mean, &narrow(arrival.1)),
                        coefficient: rng.complex_normal(ray_std),
                    })
                    .collect();
                Cluster { delay, power, rays }
            })
            .collect()
    }

    pub fn generate(&self, rng: &mut RngStream) -> ChannelRealization {
        let mut truth = self.draw_clusters(rng);
        let s = &self.scenario;
        let (b, m, n) = (s.bs_antennas(), s.ris_elements(), s.symbols);
        let k_total = s.subcarriers as f64;
        let subcarriers = s.simulated_subcarriers();

        let ris_vec = |d: Direction| {
            steering_vector(s.ris_h, s.ris_v, s.ris_spacing_h, s.ris_spacing_v, d.azimuth, d.zenith)
                .expect("array dimensions validated")
        };
        let bs_vec = |d: Direction| {
            steering_vector(s.bs_h, s.bs_v, s.bs_spacing_h, s.bs_spacing_v, d.azimuth, d.zenith)
                .expect("array dimensions validated")
        };

        // Per-cluster BS-RIS matrices.
        let per_cluster_h: Vec<CMatrix> = truth
            .bs_ris
            .iter()
            .map(|c| {
                let mut acc = CMatrix::zeros(b, m);
                for ray in &c.rays {
                    let ab = bs_vec(ray.arrival);
                    let ar = ris_vec(ray.departure);
                    for (i, x) in ab.iter().enumerate() {
                        let scaled = ray.coefficient * x;
                        for (j, y) in ar.iter().enumerate() {
                            acc[(i, j)] += scaled * y.conj();
                        }
                    }
                }
                acc
            })
            .collect();

        // Per-cluster RIS-UE vectors for every symbol, [cluster][symbol][element].
        let mut series = vec![C64::new(0.0, 0.0); n];
        let per_cluster_g: Vec<Vec<C64>> = truth
            .ris_ue
            .iter_mut()
            .map(|c| {
                let mut acc = vec![C64::new(0.0, 0.0); n * m];
                let ray_var = s.ris_ue_gain() * c.power / c.rays.len() as f64;
                for ray in c.rays.iter_mut() {
                    self.coloring.draw_into(rng, ray_var, &mut series, 1);
                    ray.coefficient = series[0];
                    let ar = ris_vec(ray.arrival);
                    for (t, beta) in series.iter().enumerate() {
                        for (a, y) in acc[t * m..(t + 1) * m].iter_mut().zip(&ar) {
                            *a += beta * y;
                        }
                    }
                }
                acc
            })
            .collect();

        let ramp = |k: usize, delay: f64| C64::from_polar(1.0, -2.0 * PI * k as f64 * delay / k_total);
        let mut bs_ris = Vec::with_capacity(subcarriers.len());
        let mut ris_ue = vec![C64::new(0.0, 0.0); subcarriers.len() * n * m];
        for (ki, &k) in subcarriers.iter().enumerate() {
            let mut h = CMatrix::zeros(b, m);
            for (c, hc) in truth.bs_ris.iter().zip(&per_cluster_h) {
                let r = ramp(k, c.delay);
                for i in 0..b {
                    for j in 0..m {
                        h[(i, j)] += r * hc[(i, j)];
                    }
                }
            }
            bs_ris.push(h);
            let block = &mut ris_ue[ki * n * m..(ki + 1) * n * m];
            for (c, gc) in truth.ris_ue.iter().zip(&per_cluster_g) {
                let r = ramp(k, c.delay);
                for (o, x) in block.iter_mut().zip(gc) {
                    *o += r * x;
                }
            }
        }

        let (sigma_h2, sigma_g2) = super::average_gains(s, super::ChannelModel::Geometric);
        ChannelRealization {
            subcarriers,
            symbols: n,
            bs_antennas: b,
            ris_elements: m,
            bs_ris,
            ris_ue,
            clusters: Some(truth),
            sigma_h2,
            sigma_g2,
        }
    }
}

/// One geometric realization (builds the generator each call).
pub fn gen_geometric(scenario: &Scenario, rng: &mut RngStream) -> Result<ChannelRealization> {
    Ok(GeometricGenerator::new(scenario)?.generate(rng))
}
