use super::doppler::TemporalColoring;
use super::realization::ChannelRealization;
use super::scenario::Scenario;
use crate::error::Result;
use crate::mathkit::{CMatrix, RngStream, C64};

/// IID Rayleigh generator: BS-RIS entries `CN(0, L_a s_a^2)`, quasi-static;
/// RIS-UE entries `CN(0, L_b s_b^2)` correlated across symbols by the
/// Doppler model.
#[derive(Debug, Clone)]
pub struct IidGenerator {
    scenario: Scenario,
    coloring: TemporalColoring,
}

impl IidGenerator {
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
        })
    }

    pub fn generate(&self, rng: &mut RngStream) -> ChannelRealization {
        let s = &self.scenario;
        let (b, m, n) = (s.bs_antennas(), s.ris_elements(), s.symbols);
        let subcarriers = s.simulated_subcarriers();
        let var_h = s.bs_ris_gain() * s.bs_ris_variance;
        let var_g = s.ris_ue_gain() * s.ris_ue_variance;
        let std_h = var_h.sqrt();

        let mut bs_ris: Vec<CMatrix> = Vec::with_capacity(subcarriers.len());
        let mut ris_ue = vec![C64::new(0.0, 0.0); subcarriers.len() * n * m];
        for ki in 0..subcarriers.len() {
            if s.iid_flat_in_k && ki > 0 {
                bs_ris.push(bs_ris[0].clone());
                let (head, tail) = ris_ue.split_at_mut(ki * n * m);
                tail[..n * m].copy_from_slice(&head[..n * m]);
                continue;
            }
            bs_ris.push(CMatrix::from_fn(b, m, |_, _| rng.complex_normal(std_h)));
            let block = &mut ris_ue[ki * n * m..(ki + 1) * n * m];
            for e in 0..m {
                self.coloring.draw_into(rng, var_g, &mut block[e..], m);
            }
        }
        ChannelRealization {
            subcarriers,
            symbols: n,
            bs_antennas: b,
            ris_elements: m,
            bs_ris,
            ris_ue,
            clusters: None,
            sigma_h2: var_h,
            sigma_g2: var_g,
        }
    }
}

/// One IID realization (builds the generator each call).
pub fn gen_iid(scenario: &Scenario, rng: &mut RngStream) -> Result<ChannelRealization> {
    Ok(IidGenerator::new(scenario)?.generate(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::doppler::doppler_correlation;

    fn small() -> Scenario {
        Scenario {
            bs_h: 2,
            bs_v: 1,
            ris_h: 2,
            ris_v: 2,
            symbols: 6,
            simulated_subcarriers: 2,
            ..Scenario::default()
        }
    }

    #[test]
    fn static_ue_gives_constant_ris_ue() {
        let s = Scenario { speed_kmh: 0.0, ..small() };
        let mut rng = RngStream::new(1, 0);
        let c = gen_iid(&s, &mut rng).unwrap();
        for k in 0..2 {
            for n in 1..s.symbols {
                assert_eq!(c.ris_ue(k, n), c.ris_ue(k, 0));
            }
        }
    }

    #[test]
    fn bs_ris_variance() {
        let s = Scenario {
            bs_ris_gain_db: 0.0,
            bs_ris_variance: 1.5,
            ..small()
        };
        let g = IidGenerator::new(&s).unwrap();
        let mut rng = RngStream::new(2, 0);
        let mut acc = 0.0;
        let mut count = 0usize;
        while count < 100_000 {
            let c = g.generate(&mut rng);
            for k in 0..c.num_subcarriers() {
                for z in c.bs_ris(k, 0).as_slice() {
                    acc += z.norm_sqr();
                    count += 1;
                }
            }
        }
        let var = acc / count as f64;
        assert!((var / 1.5 - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn lag_one_correlation() {
        let s = Scenario {
            speed_kmh: 70.0,
            fc: 28e9,
            ris_ue_gain_db: 0.0,
            ..small()
        };
        let g = IidGenerator::new(&s).unwrap();
        let mut rng = RngStream::new(3, 0);
        let (mut cross, mut p) = (0.0, 0.0);
        for _ in 0..10_000 {
            let c = g.generate(&mut rng);
            let (a, b) = (c.ris_ue(0, 2)[0], c.ris_ue(0, 3)[0]);
            cross += (a.conj() * b).re;
            p += 0.5 * (a.norm_sqr() + b.norm_sqr());
        }
        let expect = doppler_correlation(1, s.doppler_hz(), s.delta_f, s.subcarriers, s.cp_len).unwrap();
        assert!(expect < 0.99);
        assert!((cross / p - expect).abs() < 0.02, "{} vs {expect}", cross / p);
    }

    #[test]
    fn flat_in_k_reuses_draw() {
        let s = Scenario {
            iid_flat_in_k: true,
            simulated_subcarriers: 3,
            ..small()
        };
        let c = gen_iid(&s, &mut RngStream::new(4, 0)).unwrap();
        assert_eq!(c.bs_ris(0, 0), c.bs_ris(2, 0));
        assert_eq!(c.ris_ue(0, 3), c.ris_ue(2, 3));
        let c = gen_iid(&small(), &mut RngStream::new(4, 0)).unwrap();
        assert_ne!(c.bs_ris(0, 0), c.bs_ris(1, 0));
    }
}
