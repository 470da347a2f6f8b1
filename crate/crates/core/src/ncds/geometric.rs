use serde::{Deserialize, Serialize};

use super::moments::MomentSet;
use crate::channel::{steering_vector, ClusterTruth, Scenario};
use crate::error::{invalid, Result};
use crate::mathkit::{vdot, C64};

/// How the geometric-channel moments are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GeometricMethod {
    /// Exact second and fourth moments of the cascaded channel, averaged
    /// over the ray gains and uniform RIS phases for the given ray
    /// directions (Gaussian moment factorization).
    #[default]
    Exact,
    /// Ray-by-ray superposition of the joint correlation vector
    /// `a_BS (a_RIS_dep^H a_RIS_arr)`, without cross-ray terms and without
    /// averaging over the RIS phases.
    PerRay,
}

struct RayPowers {
    power: f64,
    /// Phase increments of the RIS steering vector along both axes.
    ris_steps: (f64, f64),
    ris_vector: Vec<C64>,
    bs_vector: Vec<C64>,
}

fn link_rays(truth_link: &[crate::channel::Cluster], gain: f64, scenario: &Scenario, bs_side: bool) -> Vec<RayPowers> {
    let s = scenario;
    let mut out = Vec::new();
    for c in truth_link {
        let per_ray = gain * c.power / c.rays.len() as f64;
        for r in &c.rays {
            // BS-RIS: RIS side is the departure, BS side the arrival.
            // RIS-UE: RIS side is the arrival.
            let ris_dir = if bs_side { r.departure } else { r.arrival };
            let ris_steps = crate::channel::steering::phase_steps(
                s.ris_spacing_h,
                s.ris_spacing_v,
                ris_dir.azimuth,
                ris_dir.zenith,
            );
            let ris_vector =
                steering_vector(s.ris_h, s.ris_v, s.ris_spacing_h, s.ris_spacing_v, ris_dir.azimuth, ris_dir.zenith)
                    .expect("validated array");
            let bs_vector = if bs_side {
                steering_vector(s.bs_h, s.bs_v, s.bs_spacing_h, s.bs_spacing_v, r.arrival.azimuth, r.arrival.zenith)
                    .expect("validated array")
            } else {
                Vec::new()
            };
            out.push(RayPowers {
                power: per_ray,
                ris_steps,
                ris_vector,
                bs_vector,
            });
        }
    }
    out
}

/// Moments of the decision variable for a geometric realization, in the
/// normalized convention `Px = 1`, noise `sigma_v^2 / Px`. Large-scale gains
/// come from `scenario`; only cluster powers and ray directions of `truth`
/// are used (ray gains are averaged out).
pub fn moments_geometric(
    truth: &ClusterTruth,
    scenario: &Scenario,
    px: f64,
    sigma_v2: f64,
    method: GeometricMethod,
) -> Result<MomentSet> {
    scenario.validate()?;
    if !(px.is_finite() && px > 0.0) {
        return Err(invalid("px", "must be finite and > 0"));
    }
    if !(sigma_v2.is_finite() && sigma_v2 >= 0.0) {
        return Err(invalid("sigma_v2", "must be finite and >= 0"));
    }
    if truth.bs_ris.is_empty() || truth.ris_ue.is_empty() {
        return Err(invalid("clusters", "both links need at least one cluster"));
    }
    let (second, fourth) = match method {
        GeometricMethod::Exact => exact_cascaded_moments(truth, scenario),
        GeometricMethod::PerRay => per_ray_moments(truth, scenario),
    };
    let b = scenario.bs_antennas() as f64;
    let mb = (scenario.ris_elements() * scenario.bs_antennas()) as f64;
    let noise = sigma_v2 / px;
    Ok(MomentSet::from_moments(
        fourth,
        noise * second,
        noise * second,
        b * noise * noise,
        second,
        mb,
    ))
}

/// `(E|q|^2, E|q|^4)` for the cascaded channel `q = H diag(e^{j psi}) g`.
///
/// With `h_m` the m-th column of `H` and `P_ik = pa_i pa_k |a_i^H a_k|^2`
/// (BS steering overlaps), Isserlis' theorem and uniform independent RIS
/// phases give
///
/// `E|q|^4 = sum_{m,m'} E|g_m|^2|g_m'|^2 (E|h_m|^2|h_m'|^2 + E|h_m^H h_m'|^2)
///          - sum_m E|g_m|^4 E|h_m|^4`.
///
/// Every factor depends on `(m, m')` only through the RIS element
/// displacement, so the double sum runs over displacements with their
/// multiplicities.
pub fn exact_cascaded_moments(truth: &ClusterTruth, scenario: &Scenario) -> (f64, f64) {
    let s = scenario;
    let alpha = link_rays(&truth.bs_ris, s.bs_ris_gain(), s, true);
    let beta = link_rays(&truth.ris_ue, s.ris_ue_gain(), s, false);
    let b = s.bs_antennas() as f64;
    let m = s.ris_elements() as f64;
    let sh: f64 = alpha.iter().map(|r| r.power).sum();
    let sg: f64 = beta.iter().map(|r| r.power).sum();

    let n = alpha.len();
    let mut overlap = vec![0.0; n * n];
    for i in 0..n {
        for k in i..n {
            let g = vdot(&alpha[i].bs_vector, &alpha[k].bs_vector).norm_sqr();
            let v = alpha[i].power * alpha[k].power * g;
            overlap[i * n + k] = v;
            overlap[k * n + i] = v;
        }
    }
    let overlap_sum: f64 = overlap.iter().sum();
    let base = b * b * sh * sh;

    let (mh, mv) = (s.ris_h as i64, s.ris_v as i64);
    let mut fourth = 0.0;
    let mut z = vec![C64::new(0.0, 0.0); n];
    for dv in -(mv - 1)..mv {
        for dh in -(mh - 1)..mh {
            let count = ((mh - dh.abs()) * (mv - dv.abs())) as f64;
            let phase = |st: (f64, f64)| C64::from_polar(1.0, st.0 * dh as f64 + st.1 * dv as f64);
            let mut rh = C64::new(0.0, 0.0);
            for (zi, r) in z.iter_mut().zip(&alpha) {
                *zi = phase(r.ris_steps);
                rh += *zi * r.power;
            }
            let rg: C64 = beta.iter().map(|r| phase(r.ris_steps) * r.power).sum();
            // sum_ik P_ik z_i conj(z_k)
            let mut quad = 0.0;
            for i in 0..n {
                let row = &overlap[i * n..(i + 1) * n];
                let y: C64 = row.iter().zip(&z).map(|(p, zk)| zk.conj() * *p).sum();
                quad += (z[i] * y).re;
            }
            let g_term = sg * sg + rg.norm_sqr();
            let h_term = base + quad + b * b * rh.norm_sqr() + overlap_sum;
            fourth += count * g_term * h_term;
        }
    }
    fourth -= 2.0 * sg * sg * m * (base + overlap_sum);
    (m * b * sh * sg, fourth)
}

/// Ray-by-ray superposition of the joint correlation vector.
fn per_ray_moments(truth: &ClusterTruth, scenario: &Scenario) -> (f64, f64) {
    let s = scenario;
    let alpha = link_rays(&truth.bs_ris, s.bs_ris_gain(), s, true);
    let beta = link_rays(&truth.ris_ue, s.ris_ue_gain(), s, false);
    let b = s.bs_antennas() as f64;
    let (mut second, mut fourth) = (0.0, 0.0);
    for a in &alpha {
        for g in &beta {
            let corr_sq = b * vdot(&a.ris_vector, &g.ris_vector).norm_sqr();
            second += a.power * g.power * corr_sq;
            fourth += 4.0 * a.power * a.power * g.power * g.power * corr_sq * corr_sq;
        }
    }
    (second, fourth)
}

/// Joint spatial correlation vector `a_BS(bs arrival) * (a_RIS(dep)^H a_RIS(arr))`
/// for one BS-RIS ray and one RIS-UE ray.
pub fn joint_correlation(
    scenario: &Scenario,
    bs_ris_ray: &crate::channel::Ray,
    ris_ue_ray: &crate::channel::Ray,
) -> Result<Vec<C64>> {
    let s = scenario;
    let a_bs = steering_vector(
        s.bs_h,
        s.bs_v,
        s.bs_spacing_h,
        s.bs_spacing_v,
        bs_ris_ray.arrival.azimuth,
        bs_ris_ray.arrival.zenith,
    )?;
    let dep = steering_vector(
        s.ris_h,
        s.ris_v,
        s.ris_spacing_h,
        s.ris_spacing_v,
        bs_ris_ray.departure.azimuth,
        bs_ris_ray.departure.zenith,
    )?;
    let arr = steering_vector(
        s.ris_h,
        s.ris_v,
        s.ris_spacing_h,
        s.ris_spacing_v,
        ris_ue_ray.arrival.azimuth,
        ris_ue_ray.arrival.zenith,
    )?;
    let inner = vdot(&dep, &arr);
    Ok(a_bs.into_iter().map(|x| x * inner).collect())
}

/// Worst-case ratios of the per-tuple spatial-correlation bounds
/// `|a|^2 / (MB) <= 1` and `4 |a|^4 / (MB)^2 <= 1 + (B+M+1)/(MB)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TupleBoundReport {
    pub tuples: usize,
    pub max_second_ratio: f64,
    pub max_fourth_ratio: f64,
    pub fourth_limit: f64,
    pub second_violations: usize,
    pub fourth_violations: usize,
    pub max_norm_ratio: f64,
}

pub fn tuple_bounds(truth: &ClusterTruth, scenario: &Scenario) -> Result<TupleBoundReport> {
    let b = scenario.bs_antennas() as f64;
    let m = scenario.ris_elements() as f64;
    let mb = m * b;
    let fourth_limit = 1.0 + (b + m + 1.0) / mb;
    let mut r = TupleBoundReport {
        tuples: 0,
        max_second_ratio: 0.0,
        max_fourth_ratio: 0.0,
        fourth_limit,
        second_violations: 0,
        fourth_violations: 0,
        max_norm_ratio: 0.0,
    };
    for ca in &truth.bs_ris {
        for ra in &ca.rays {
            for cb in &truth.ris_ue {
                for rb in &cb.rays {
                    let a = joint_correlation(scenario, ra, rb)?;
                    let sq = crate::mathkit::norm_sqr(&a);
                    let second = sq / mb;
                    let fourth = 4.0 * sq * sq / (mb * mb);
                    r.tuples += 1;
                    r.max_second_ratio = r.max_second_ratio.max(second);
                    r.max_fourth_ratio = r.max_fourth_ratio.max(fourth);
                    r.max_norm_ratio = r.max_norm_ratio.max(sq.sqrt() / (b.sqrt() * m));
                    if second > 1.0 + 1e-12 {
                        r.second_violations += 1;
                    }
                    if fourth > fourth_limit * (1.0 + 1e-12) {
                        r.fourth_violations += 1;
                    }
                }
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Cluster, Direction, GeometricGenerator, Ray};
    use crate::mathkit::RngStream;
    use crate::ncds::moments::moments_iid;

    fn ray(dep: (f64, f64), arr: (f64, f64)) -> Ray {
        Ray {
            departure: Direction {
                azimuth: dep.0,
                zenith: dep.1,
            },
            arrival: Direction {
                azimuth: arr.0,
                zenith: arr.1,
            },
            coefficient: C64::new(1.0, 0.0),
        }
    }

    fn single_ray_truth() -> ClusterTruth {
        let c = |r| Cluster {
            delay: 0.0,
            power: 1.0,
            rays: vec![r],
        };
        ClusterTruth {
            bs_ris: vec![c(ray((0.3, 1.0), (0.2, 1.4)))],
            ris_ue: vec![c(ray((1.0, 1.0), (-0.5, 0.8)))],
        }
    }

    fn scenario(bh: usize, bv: usize, mh: usize, mv: usize) -> Scenario {
        Scenario {
            bs_h: bh,
            bs_v: bv,
            ris_h: mh,
            ris_v: mv,
            bs_ris_gain_db: -3.0,
            ris_ue_gain_db: -7.0,
            ..Scenario::default()
        }
    }

    #[test]
    fn single_ray_scalar_arrays() {
        let s = scenario(1, 1, 1, 1);
        let (la, lb) = (s.bs_ris_gain(), s.ris_ue_gain());
        for method in [GeometricMethod::Exact, GeometricMethod::PerRay] {
            let m = moments_geometric(&single_ray_truth(), &s, 1.0, 0.0, method).unwrap();
            assert!((m.e_s_i1 - la * lb).abs() < 1e-15);
            assert!((m.e_i1_sq - 4.0 * la * la * lb * lb).abs() < 1e-15);
        }
    }

    #[test]
    fn single_ray_general_arrays() {
        let s = scenario(2, 2, 3, 2);
        let (la, lb) = (s.bs_ris_gain(), s.ris_ue_gain());
        let (second, fourth) = exact_cascaded_moments(&single_ray_truth(), &s);
        let (b, m) = (4.0, 6.0);
        assert!((second - m * b * la * lb).abs() < 1e-12 * second);
        let expect = 4.0 * b * b * la * la * lb * lb * (2.0 * m * m - m);
        assert!((fourth - expect).abs() < 1e-12 * expect);
    }

    /// Direct evaluation over all element pairs, independent of the
    /// displacement bookkeeping.
    fn brute_force(truth: &ClusterTruth, s: &Scenario) -> f64 {
        let alpha = link_rays(&truth.bs_ris, s.bs_ris_gain(), s, true);
        let beta = link_rays(&truth.ris_ue, s.ris_ue_gain(), s, false);
        let (bb, mm) = (s.bs_antennas(), s.ris_elements());
        // Covariances of the columns of H: C(m, m')[p][q] = E[conj(h_mp) h_m'q].
        let cov_h = |m1: usize, m2: usize, p: usize, q: usize| -> C64 {
            alpha
                .iter()
                .map(|r| r.bs_vector[p].conj() * r.bs_vector[q] * r.ris_vector[m1] * r.ris_vector[m2].conj() * r.power)
                .sum()
        };
        let cov_g = |m1: usize, m2: usize| -> C64 {
            beta.iter().map(|r| r.ris_vector[m1].conj() * r.ris_vector[m2] * r.power).sum()
        };
        let mut total = 0.0;
        for m1 in 0..mm {
            for m2 in 0..mm {
                let g = cov_g(m1, m1).re * cov_g(m2, m2).re + cov_g(m1, m2).norm_sqr();
                let mut p1 = 0.0;
                let mut p2a = C64::new(0.0, 0.0);
                let mut p2b = 0.0;
                let mut e1 = 0.0;
                let mut e2 = 0.0;
                for p in 0..bb {
                    e1 += cov_h(m1, m1, p, p).re;
                    e2 += cov_h(m2, m2, p, p).re;
                    p2a += cov_h(m1, m2, p, p);
                    for q in 0..bb {
                        p1 += cov_h(m1, m2, p, q).norm_sqr();
                        p2b += (cov_h(m1, m1, p, q) * cov_h(m2, m2, q, p)).re;
                    }
                }
                let h_pair = e1 * e2 + p1 + p2a.norm_sqr() + p2b;
                total += g * h_pair;
                if m1 == m2 {
                    total -= g * (e1 * e1 + p1);
                }
            }
        }
        total
    }

    #[test]
    fn displacement_sum_matches_pairwise_sum() {
        let s = Scenario {
            bs_ris_clusters: 2,
            bs_ris_rays: 3,
            ris_ue_clusters: 2,
            ris_ue_rays: 2,
            ..scenario(2, 1, 3, 2)
        };
        let gen = GeometricGenerator::new(&s).unwrap();
        let truth = gen.draw_clusters(&mut RngStream::new(5, 0));
        let (_, fourth) = exact_cascaded_moments(&truth, &s);
        let oracle = brute_force(&truth, &s);
        assert!((fourth - oracle).abs() < 1e-10 * oracle, "{fourth} vs {oracle}");
    }

    #[test]
    fn exact_moments_match_monte_carlo() {
        let s = Scenario {
            bs_ris_clusters: 2,
            bs_ris_rays: 3,
            ris_ue_clusters: 2,
            ris_ue_rays: 3,
            bs_ris_gain_db: 0.0,
            ris_ue_gain_db: 0.0,
            asd_deg: 7.0,
            asa_deg: 12.0,
            zsd_deg: 25.0,
            zsa_deg: 30.0,
            ..scenario(2, 1, 2, 2)
        };
        let gen = GeometricGenerator::new(&s).unwrap();
        let truth = gen.draw_clusters(&mut RngStream::new(6, 0));
        let (second, fourth) = exact_cascaded_moments(&truth, &s);
        let alpha = link_rays(&truth.bs_ris, 1.0, &s, true);
        let beta = link_rays(&truth.ris_ue, 1.0, &s, false);
        let mut rng = RngStream::new(7, 0);
        let trials = 400_000;
        let (mut a2, mut a4) = (0.0, 0.0);
        for _ in 0..trials {
            let mut q = [C64::new(0.0, 0.0); 2];
            let g: Vec<C64> = {
                let mut g = vec![C64::new(0.0, 0.0); 4];
                for r in &beta {
                    let c = rng.complex_normal(r.power.sqrt());
                    for (x, a) in g.iter_mut().zip(&r.ris_vector) {
                        *x += c * a;
                    }
                }
                g
            };
            let psi: Vec<C64> = (0..4).map(|_| C64::from_polar(1.0, std::f64::consts::TAU * rng.uniform())).collect();
            for r in &alpha {
                let c = rng.complex_normal(r.power.sqrt());
                let proj: C64 = r.ris_vector.iter().zip(&g).zip(&psi).map(|((a, x), p)| a.conj() * x * p).sum();
                for (qb, ab) in q.iter_mut().zip(&r.bs_vector) {
                    *qb += c * ab * proj;
                }
            }
            let p = q[0].norm_sqr() + q[1].norm_sqr();
            a2 += p;
            a4 += p * p;
        }
        let (m2, m4) = (a2 / trials as f64, a4 / trials as f64);
        assert!((m2 / second - 1.0).abs() < 0.01, "{m2} vs {second}");
        assert!((m4 / fourth - 1.0).abs() < 0.03, "{m4} vs {fourth}");
    }

    #[test]
    fn geometric_not_better_than_iid() {
        let s = Scenario {
            bs_ris_gain_db: 0.0,
            ris_ue_gain_db: 0.0,
            ..Scenario::default()
        };
        let gen = GeometricGenerator::new(&s).unwrap();
        let iid = moments_iid(4, 64, 1.0, 1.0, 1.0, 0.5).unwrap();
        let mut rng = RngStream::new(8, 0);
        for _ in 0..3 {
            let truth = gen.draw_clusters(&mut rng);
            let geo = moments_geometric(&truth, &s, 1.0, 0.5, GeometricMethod::Exact).unwrap();
            assert!(geo.sinr <= iid.sinr + 1e-12);
            assert!((geo.e_s_i1 - iid.e_s_i1).abs() < 1e-9 * iid.e_s_i1);
        }
    }

    #[test]
    fn joint_correlation_norm_bound() {
        let s = scenario(2, 2, 4, 4);
        let gen = GeometricGenerator::new(&s).unwrap();
        let truth = gen.draw_clusters(&mut RngStream::new(9, 0));
        let rep = tuple_bounds(&truth, &s).unwrap();
        assert_eq!(rep.tuples, 240 * 240);
        assert!(rep.max_norm_ratio <= 1.0 + 1e-12);
    }
}
