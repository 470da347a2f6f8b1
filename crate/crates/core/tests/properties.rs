use proptest::prelude::*;
use risdpsk_core::cds::{coherence_symbols, efficiency_factor};
use risdpsk_core::channel::ChannelModel;
use risdpsk_core::harness::pairwise_reduce;
use risdpsk_core::mathkit::{wrap_angle, C64};
use risdpsk_core::ncds::{decide_psk, diff_decode, diff_encode, dpsk_constellation, moments_iid, Grid};
use risdpsk_core::ris::quantize_phase;
use risdpsk_core::sep::{build_pdf_model, sep_analytic, SepOptions};
use std::f64::consts::PI;

proptest! {
    #[test]
    fn wrapped_angles_stay_equivalent(a in -100.0f64..100.0) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        let turns = (a - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn quantized_phase_is_nearest_level(psi in 0.0f64..(2.0 * PI), bits in 1u32..6) {
        let q = quantize_phase(psi, bits);
        let step = 2.0 * PI / (1u64 << bits) as f64;
        let level = q / step;
        prop_assert!((level - level.round()).abs() < 1e-9);
        let d = wrap_angle(psi - q).abs();
        prop_assert!(d <= step / 2.0 + 1e-12);
    }

    #[test]
    fn perturbed_points_decode_to_themselves(order_log in 1u32..5, i in 0usize..16, frac in -0.99f64..0.99) {
        let order = 1usize << order_log;
        let i = i % order;
        let pts = dpsk_constellation(order).unwrap();
        let z = pts[i] * C64::from_polar(2.5, frac * PI / order as f64);
        prop_assert_eq!(decide_psk(z, order).index, i);
    }

    #[test]
    fn differential_chain_roundtrip(idx in prop::collection::vec(0usize..8, 2..20), gain_re in -2.0f64..2.0, gain_im in 0.1f64..2.0) {
        let pts = dpsk_constellation(8).unwrap();
        let row: Vec<C64> = idx.iter().map(|&i| pts[i]).collect();
        let s = Grid::from_rows(vec![row]).unwrap();
        let x = diff_encode(&s, 3.0).unwrap();
        let h = C64::new(gain_re, gain_im);
        for n in 1..idx.len() {
            let z = diff_decode(&[h * x.get(0, n - 1)], &[h * x.get(0, n)], 1, 1).unwrap();
            prop_assert_eq!(decide_psk(z, 8).index, idx[n]);
        }
    }

    #[test]
    fn efficiency_monotone(m in 0usize..2048, extra in 1usize..64, f_d in 0.1f64..500.0, scale in 1.01f64..4.0) {
        let n_c = coherence_symbols(f_d, 30e3, 1024, 72);
        let a = efficiency_factor(m, n_c);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(efficiency_factor(m + extra, n_c) <= a);
        prop_assert!(efficiency_factor(m, coherence_symbols(f_d * scale, 30e3, 1024, 72)) <= a);
    }

    #[test]
    fn pairwise_matches_sequential(v in prop::collection::vec(0u64..1000, 1..50)) {
        prop_assert_eq!(pairwise_reduce(v.clone(), |a, b| a + b).unwrap(), v.iter().sum::<u64>());
    }

    #[test]
    fn iid_sinr_below_limit(b in 1usize..32, m in 1usize..512, noise in 0.0f64..100.0) {
        let s = moments_iid(b, m, 1.0, 1.0, 1.0, noise).unwrap();
        let limit = (m * b) as f64 / (b + m + 1) as f64;
        prop_assert!(s.sinr > 0.0 && s.sinr <= limit * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sep_is_probability_and_orders_by_constellation(b in 1usize..16, m in 1usize..64, noise in 0.01f64..50.0) {
        let set = moments_iid(b, m, 1.0, 1.0, 1.0, noise).unwrap();
        let mut prev = 0.0;
        for order in [2, 4, 8] {
            let model = build_pdf_model(&set, ChannelModel::Iid, b, order, SepOptions::default()).unwrap();
            let pe = sep_analytic(&model, 1e-8).value;
            prop_assert!((0.0..=1.0).contains(&pe));
            prop_assert!(pe >= prev - 1e-7);
            prev = pe;
        }
    }
}
