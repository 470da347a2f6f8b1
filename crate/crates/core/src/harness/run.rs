use std::io::Write;

use rayon::prelude::*;

use super::config::{CdsPenalty, ExperimentConfig};
use super::record::{create_output, write_records, MetricsRecord};
use super::reduce::pairwise_reduce;
use crate::cds::{
    coherent_demodulate, efficiency_factor, mrc, optimize_w_psi, sound_cascaded, CascadedEstimate,
};
use crate::channel::{average_gains, ChannelGenerator, ChannelModel, ChannelRealization, Scenario};
use crate::error::{Error, Result};
use crate::mathkit::{vdot, CMatrix, RngStream, C64};
use crate::ncds::{
    decide_psk, decompose_terms, diff_decode, diff_encode, diff_encode_frequency, dpsk_constellation, moments_geometric,
    moments_iid, Grid, MomentAccumulator, MomentEstimate, MomentSet,
};
use crate::ris::{quantize_config, quantize_phase, random_config};
use crate::sep::{build_pdf_model, sep_analytic, ErrorCounter};

const TAG_CHANNEL: u64 = 1;
const TAG_RIS: u64 = 2;
const TAG_DATA: u64 = 3;
const TAG_NOISE: u64 = 4;
const TAG_SOUNDING: u64 = 5;
const TAG_OPTIMIZER: u64 = 6;

/// Switches for the expensive parts of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub sep_analytic: bool,
    /// Per-realization closed-form moments of the geometric model. Without
    /// them a geometric point reports no analytic SINR or SEP.
    pub geometric_moments: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            sep_analytic: true,
            geometric_moments: true,
        }
    }
}

impl RunOptions {
    /// Monte Carlo only.
    pub fn simulation_only() -> Self {
        Self {
            sep_analytic: false,
            geometric_moments: false,
        }
    }
}

/// A sweep point after automatic gain control: unit link gains, unit
/// transmit power and the noise variance referred to the receiver input.
struct Point {
    actual: Scenario,
    normalized: Scenario,
    noise: f64,
    sweep_value: f64,
}

fn prepare(cfg: &ExperimentConfig, value: f64) -> Result<Point> {
    let actual = cfg.sweep.parameter.apply(&cfg.scenario, value)?;
    let (sh, sg) = average_gains(&actual, cfg.experiment.channel_model);
    let noise = actual.noise_var() / (actual.px() * sh * sg);
    if !noise.is_finite() {
        return Err(Error::Config(format!("referred noise variance is {noise}")));
    }
    let normalized = Scenario {
        bs_ris_gain_db: 0.0,
        ris_ue_gain_db: 0.0,
        bs_ris_variance: 1.0,
        ris_ue_variance: 1.0,
        ..actual.clone()
    };
    Ok(Point {
        actual,
        normalized,
        noise,
        sweep_value: value,
    })
}

fn base_record(cfg: &ExperimentConfig, p: &Point, scheme: &str, constellation: usize) -> MetricsRecord {
    MetricsRecord {
        scheme: scheme.to_string(),
        channel_model: cfg.experiment.channel_model.as_str().to_string(),
        sweep_param: cfg.sweep.parameter.as_str().to_string(),
        sweep_value: p.sweep_value,
        px_dbw: p.actual.px_dbw,
        b: p.actual.bs_antennas(),
        m: p.actual.ris_elements(),
        speed_kmh: p.actual.speed_kmh,
        constellation,
        phase_bits: cfg.experiment.phase_bits,
        sinr_db_analytic: f64::NAN,
        sinr_db_mc: f64::NAN,
        sinr_db_mc_stderr: f64::NAN,
        sep_analytic: f64::NAN,
        sep_mc: f64::NAN,
        sep_mc_stderr: f64::NAN,
        eta: 1.0,
        trials: cfg.experiment.trials,
        seed: cfg.experiment.seed,
        flag: String::new(),
    }
}

fn push_flag(flags: &mut Vec<&'static str>, cond: bool, name: &'static str) {
    if cond {
        flags.push(name);
    }
}

/// Runs `trial` for every index in parallel and reduces in index order.
fn run_trials<T: Send>(
    trials: usize,
    trial: impl Fn(u64) -> Result<T> + Sync,
    merge: impl Fn(T, T) -> T,
) -> Result<T> {
    let out: Vec<T> = (0..trials as u64).into_par_iter().map(&trial).collect::<Result<_>>()?;
    Ok(pairwise_reduce(out, merge).expect("trials >= 1"))
}

struct NcdsTally {
    errors: ErrorCounter,
    moments: MomentAccumulator,
    degenerate: u64,
    /// Sum of per-realization analytic moments (geometric only).
    analytic: Option<[f64; 5]>,
}

fn merge_ncds(mut a: NcdsTally, b: NcdsTally) -> NcdsTally {
    a.errors.merge(&b.errors);
    a.moments.merge(&b.moments);
    a.degenerate += b.degenerate;
    a.analytic = match (a.analytic, b.analytic) {
        (Some(x), Some(y)) => Some(std::array::from_fn(|i| x[i] + y[i])),
        (x, y) => x.or(y),
    };
    a
}

fn moment_array(m: &MomentSet) -> [f64; 5] {
    [m.e_i1_sq, m.e_i2_sq, m.e_i3_sq, m.e_i4_sq, m.e_s_i1]
}

fn ncds_trial(
    cfg: &ExperimentConfig,
    p: &Point,
    generator: &ChannelGenerator,
    opts: RunOptions,
    trial: u64,
) -> Result<NcdsTally> {
    let scen = &p.normalized;
    let base = RngStream::new(cfg.experiment.seed, trial);
    let ch = generator.generate(&mut base.fork(TAG_CHANNEL));
    let (k_count, n_count) = (ch.num_subcarriers(), ch.symbols);
    let (m, b) = (ch.ris_elements, ch.bs_antennas);
    let order = cfg.experiment.constellation;

    let mut ris = random_config(m, n_count, &mut base.fork(TAG_RIS), !scen.ris_per_symbol)?;
    if let Some(bits) = cfg.experiment.phase_bits {
        ris = quantize_config(&ris, bits)?;
    }
    let phasors: Vec<Vec<C64>> = if ris.is_frame_constant() {
        vec![ris.phasors_at(0)]
    } else {
        (0..n_count).map(|n| ris.phasors_at(n)).collect()
    };

    // The first symbol of every differential chain is the reference.
    let freq = scen.encode_in_frequency;
    let points = dpsk_constellation(order)?;
    let mut data_rng = base.fork(TAG_DATA);
    let mut idx = Grid::filled(k_count, n_count, 0usize);
    let mut s = Grid::filled(k_count, n_count, C64::new(1.0, 0.0));
    for k in 0..k_count {
        for n in 0..n_count {
            if (freq && k == 0) || (!freq && n == 0) {
                continue;
            }
            let i = data_rng.index(order);
            idx.set(k, n, i);
            s.set(k, n, points[i]);
        }
    }
    let x = if freq { diff_encode_frequency(&s, 1.0)? } else { diff_encode(&s, 1.0)? };

    let mut noise_rng = base.fork(TAG_NOISE);
    let noise_std = p.noise.sqrt();
    let mut q = Vec::with_capacity(k_count * n_count);
    let mut v = Vec::with_capacity(k_count * n_count);
    let mut y = Vec::with_capacity(k_count * n_count);
    for k in 0..k_count {
        let h = ch.bs_ris(k, 0);
        for n in 0..n_count {
            let ph = &phasors[if phasors.len() == 1 { 0 } else { n }];
            let g = ch.ris_ue(k, n);
            let eff: Vec<C64> = g.iter().zip(ph).map(|(a, b)| a * b).collect();
            let qk = h.mul_vec(&eff)?;
            let vk: Vec<C64> = (0..b).map(|_| noise_rng.complex_normal(noise_std)).collect();
            let xk = *x.get(k, n);
            y.push(qk.iter().zip(&vk).map(|(a, w)| a * xk + w).collect::<Vec<C64>>());
            q.push(qk);
            v.push(vk);
        }
    }

    let at = |k: usize, n: usize| k * n_count + n;
    let mut tally = NcdsTally {
        errors: ErrorCounter::default(),
        moments: MomentAccumulator::new(m, b),
        degenerate: 0,
        analytic: None,
    };
    for k in 0..k_count {
        for n in 0..n_count {
            let prev = match (freq, k, n) {
                (true, 0, _) | (false, _, 0) => continue,
                (true, _, _) => at(k - 1, n),
                (false, _, _) => at(k, n - 1),
            };
            let cur = at(k, n);
            let z = diff_decode(&y[prev], &y[cur], m, b)?;
            let d = decide_psk(z, order);
            tally.degenerate += d.degenerate as u64;
            tally.errors.push(d.index, *idx.get(k, n));
            let (xp, xc) = (x.data[prev], x.data[cur]);
            let terms = decompose_terms(&q[prev], &q[cur], xp, xc, &v[prev], &v[cur]);
            tally.moments.push(&terms, *s.get(k, n));
        }
    }
    tally.moments.end_batch();

    if let (Some(truth), true) = (&ch.clusters, opts.geometric_moments) {
        let set = moments_geometric(truth, scen, 1.0, p.noise, cfg.experiment.geometric_method)?;
        tally.analytic = Some(moment_array(&set));
    }
    Ok(tally)
}

/// Aggregated non-coherent Monte Carlo results at one point.
#[derive(Debug, Clone)]
pub struct NcdsPoint {
    pub record: MetricsRecord,
    /// Closed-form moments (IID) or their average over the simulated
    /// geometric realizations; absent when skipped.
    pub analytic: Option<MomentSet>,
    pub estimate: MomentEstimate,
    pub errors: ErrorCounter,
}

/// Non-coherent receiver at one sweep value.
pub fn run_ncds_point(cfg: &ExperimentConfig, value: f64, opts: RunOptions) -> Result<NcdsPoint> {
    cfg.validate()?;
    let p = prepare(cfg, value)?;
    let generator = ChannelGenerator::new(&p.normalized, cfg.experiment.channel_model)?;
    let tally = run_trials(cfg.experiment.trials, |t| ncds_trial(cfg, &p, &generator, opts, t), merge_ncds)?;

    let (b, m) = (p.normalized.bs_antennas(), p.normalized.ris_elements());
    let mb = (m * b) as f64;
    let analytic = match (cfg.experiment.channel_model, tally.analytic) {
        (ChannelModel::Geometric, Some(sum)) => {
            let n = cfg.experiment.trials as f64;
            Some(MomentSet::from_moments(sum[0] / n, sum[1] / n, sum[2] / n, sum[3] / n, sum[4] / n, mb))
        }
        (ChannelModel::Geometric, None) => None,
        (ChannelModel::Iid, _) => Some(moments_iid(b, m, 1.0, 1.0, 1.0, p.noise)?),
    };
    let estimate = tally.moments.estimate();

    let mut flags = Vec::new();
    let mut rec = base_record(cfg, &p, "ncds", cfg.experiment.constellation);
    rec.sinr_db_analytic = analytic.map_or(f64::NAN, |a| a.sinr_db());
    rec.sinr_db_mc = estimate.moments.sinr_db();
    rec.sinr_db_mc_stderr = estimate.sinr_db_stderr;
    rec.sep_mc = tally.errors.pe();
    rec.sep_mc_stderr = tally.errors.stderr();
    if let (true, Some(analytic)) = (opts.sep_analytic, &analytic) {
        match build_pdf_model(
            analytic,
            cfg.experiment.channel_model,
            b,
            cfg.experiment.constellation,
            cfg.experiment.sep_options(),
        ) {
            Ok(model) => {
                let sep = sep_analytic(&model, cfg.experiment.sep_tol);
                rec.sep_analytic = sep.value;
                push_flag(&mut flags, !sep.converged, "sep-unconverged");
            }
            Err(_) => flags.push("sep-model-invalid"),
        }
    }
    push_flag(&mut flags, estimate.low_sample, "low-sample");
    push_flag(&mut flags, tally.degenerate > 0, "degenerate-decisions");
    push_flag(&mut flags, p.normalized.ris_per_symbol, "ris-per-symbol");
    rec.flag = flags.join(";");
    Ok(NcdsPoint {
        record: rec,
        analytic,
        estimate,
        errors: tally.errors,
    })
}

struct CdsTally {
    errors: ErrorCounter,
    snr_sum: f64,
    snr_sq_sum: f64,
    snr_count: u64,
    not_converged: u64,
    degenerate: u64,
}

fn merge_cds(mut a: CdsTally, b: CdsTally) -> CdsTally {
    a.errors.merge(&b.errors);
    a.snr_sum += b.snr_sum;
    a.snr_sq_sum += b.snr_sq_sum;
    a.snr_count += b.snr_count;
    a.not_converged += b.not_converged;
    a.degenerate += b.degenerate;
    a
}

fn phasors_of(psi: &[f64]) -> Vec<C64> {
    psi.iter().map(|&p| C64::from_polar(1.0, p)).collect()
}

/// Truth (or estimate) `C` projected through the RIS phases.
fn through_ris(c: &CMatrix, psi: &[f64]) -> Result<Vec<C64>> {
    c.mul_vec(&phasors_of(psi))
}

fn cds_trial(
    cfg: &ExperimentConfig,
    p: &Point,
    generator: &ChannelGenerator,
    amplitude: f64,
    trial: u64,
) -> Result<CdsTally> {
    let settings = &cfg.cds;
    let base = RngStream::new(cfg.experiment.seed, trial);
    let ch: ChannelRealization = generator.generate(&mut base.fork(TAG_CHANNEL));
    let (k_count, m) = (ch.num_subcarriers(), ch.ris_elements);
    let sounding_noise = if settings.perfect_csi { 0.0 } else { p.noise };
    let est: CascadedEstimate = sound_cascaded(&ch, 1.0, sounding_noise, &mut base.fork(TAG_SOUNDING))?;
    let scale = if p.noise > 0.0 { 1.0 / p.noise } else { 1.0 };
    let mut opt_rng = base.fork(TAG_OPTIMIZER);
    let quantize = |psi: Vec<f64>| match cfg.experiment.phase_bits {
        Some(bits) => psi.into_iter().map(|x| quantize_phase(x, bits)).collect(),
        None => psi,
    };

    let mut not_converged = 0;
    let mut psi_k: Vec<Vec<f64>> = Vec::with_capacity(k_count);
    if settings.psi_per_subcarrier_oracle {
        for c in &est.columns {
            let sol = optimize_w_psi(c, settings.max_iters, settings.tol, scale, &mut opt_rng)?;
            not_converged += !sol.converged as u64;
            psi_k.push(quantize(sol.psi));
        }
    } else {
        let sol = optimize_w_psi(&est.columns[k_count / 2], settings.max_iters, settings.tol, scale, &mut opt_rng)?;
        not_converged += !sol.converged as u64;
        psi_k = vec![quantize(sol.psi); k_count];
    }

    // Combiner matched to the estimated post-RIS channel per subcarrier.
    let mut combiners = Vec::with_capacity(k_count);
    let mut refs = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let h_est = through_ris(&est.columns[k], &psi_k[k])?;
        let w = mrc(&h_est);
        refs.push(vdot(&w, &h_est) * amplitude);
        combiners.push(w);
    }

    let order = settings.constellation;
    let points = dpsk_constellation(order)?;
    let data = ch.symbols - m;
    let mut data_rng = base.fork(TAG_DATA);
    let mut noise_rng = base.fork(TAG_NOISE);
    let noise_std = p.noise.sqrt();
    let mut tally = CdsTally {
        errors: ErrorCounter::default(),
        snr_sum: 0.0,
        snr_sq_sum: 0.0,
        snr_count: 0,
        not_converged,
        degenerate: 0,
    };
    for k in 0..k_count {
        let phasors = phasors_of(&psi_k[k]);
        let h = ch.bs_ris(k, 0);
        for n in m..m + data {
            let g = ch.ris_ue(k, n);
            let eff: Vec<C64> = g.iter().zip(&phasors).map(|(a, b)| a * b).collect();
            let q = h.mul_vec(&eff)?;
            let i = data_rng.index(order);
            let x = points[i] * amplitude;
            let y: Vec<C64> = q.iter().map(|qq| qq * x + noise_rng.complex_normal(noise_std)).collect();
            let d = coherent_demodulate(&y, &combiners[k], refs[k], order);
            tally.degenerate += d.degenerate as u64;
            tally.errors.push(d.index, i);
            if n == m {
                let snr = amplitude * amplitude * vdot(&combiners[k], &q).norm_sqr() * scale;
                tally.snr_sum += snr;
                tally.snr_sq_sum += snr * snr;
                tally.snr_count += 1;
            }
        }
    }
    Ok(tally)
}

/// Coherent baseline at one sweep value. Sounding takes `M` symbols of
/// the frame, then `cds.data_symbols` data symbols follow.
pub fn run_cds_point(cfg: &ExperimentConfig, value: f64) -> Result<MetricsRecord> {
    cfg.validate()?;
    let mut p = prepare(cfg, value)?;
    let m = p.normalized.ris_elements();
    let data = cfg.cds.data_symbols.unwrap_or(p.normalized.symbols.saturating_sub(1).max(1));
    p.normalized.symbols = m + data;
    if cfg.cds.block_fading {
        p.normalized.speed_kmh = 0.0;
    }
    let eta = efficiency_factor(m, cfg.cds.coherence.coherence(p.actual.speed_kmh));
    let mut rec = base_record(cfg, &p, "cds", cfg.cds.constellation);
    rec.eta = eta;
    let mut flags = Vec::new();
    push_flag(&mut flags, cfg.cds.perfect_csi, "perfect-csi");
    push_flag(&mut flags, cfg.cds.penalty == CdsPenalty::None, "no-penalty");
    push_flag(&mut flags, cfg.cds.psi_per_subcarrier_oracle, "psi-per-subcarrier-oracle");
    push_flag(&mut flags, !cfg.cds.block_fading, "channel-aging");
    if eta == 0.0 && cfg.cds.penalty == CdsPenalty::Energy {
        // No data symbol fits in the coherence window.
        rec.sep_mc = 1.0;
        rec.sep_mc_stderr = 0.0;
        flags.push("eta-zero");
        rec.flag = flags.join(";");
        return Ok(rec);
    }
    let amplitude = match cfg.cds.penalty {
        CdsPenalty::Energy => eta.sqrt(),
        CdsPenalty::None => 1.0,
    };
    let generator = ChannelGenerator::new(&p.normalized, cfg.experiment.channel_model)?;
    let tally = run_trials(cfg.experiment.trials, |t| cds_trial(cfg, &p, &generator, amplitude, t), merge_cds)?;
    rec.sep_mc = tally.errors.pe();
    rec.sep_mc_stderr = tally.errors.stderr();
    let n = tally.snr_count as f64;
    let mean = tally.snr_sum / n;
    rec.sinr_db_mc = 10.0 * mean.log10();
    if tally.snr_count > 1 {
        let var = (tally.snr_sq_sum / n - mean * mean).max(0.0) * n / (n - 1.0);
        rec.sinr_db_mc_stderr = 10.0 / std::f64::consts::LN_10 * (var / n).sqrt() / mean;
    }
    push_flag(&mut flags, tally.not_converged > 0, "optimizer-not-converged");
    push_flag(&mut flags, tally.degenerate > 0, "degenerate-decisions");
    rec.flag = flags.join(";");
    Ok(rec)
}

/// Every `(sweep value, scheme)` record, NCDS before CDS at each value.
pub fn run_points(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<MetricsRecord>> {
    cfg.validate()?;
    let scheme = cfg.experiment.scheme;
    let mut out = Vec::new();
    for &v in &cfg.sweep.values {
        if scheme.includes_ncds() {
            out.push(run_ncds_point(cfg, v, opts)?.record);
        }
        if scheme.includes_cds() {
            out.push(run_cds_point(cfg, v)?);
        }
    }
    Ok(out)
}

/// Runs the whole sweep and writes the CSV to `experiment.output` when set.
/// The output file is created before any simulation starts.
pub fn run_sweep(cfg: &ExperimentConfig, opts: RunOptions) -> Result<Vec<MetricsRecord>> {
    cfg.validate()?;
    let file = match &cfg.experiment.output {
        Some(path) => Some(create_output(path)?),
        None => None,
    };
    let records = run_points(cfg, opts)?;
    if let Some(f) = file {
        let mut w = std::io::BufWriter::new(f);
        write_records(&mut w, &records)?;
        w.flush()?;
    }
    Ok(records)
}

/// Closed-form and Monte Carlo moments side by side.
#[derive(Debug, Clone)]
pub struct MomentReport {
    pub channel_model: ChannelModel,
    pub analytic: MomentSet,
    pub estimate: MomentEstimate,
}

impl MomentReport {
    /// `(name, analytic, monte carlo, stderr)` for every moment.
    pub fn rows(&self) -> [(&'static str, f64, f64, f64); 5] {
        let a = moment_array(&self.analytic);
        let e = moment_array(&self.estimate.moments);
        let names = ["E|I1|^2", "E|I2|^2", "E|I3|^2", "E|I4|^2", "E[s* I1]"];
        std::array::from_fn(|i| (names[i], a[i], e[i], self.estimate.stderr[i]))
    }
}

impl std::fmt::Display for MomentReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "channel model: {}", self.channel_model.as_str())?;
        writeln!(f, "samples: {}", self.estimate.samples)?;
        writeln!(f, "{:<10} {:>14} {:>14} {:>12} {:>9}", "moment", "analytic", "monte carlo", "stderr", "rel err")?;
        for (name, a, e, se) in self.rows() {
            writeln!(f, "{name:<10} {a:>14.6e} {e:>14.6e} {se:>12.3e} {:>8.3}%", 100.0 * (e / a - 1.0))?;
        }
        writeln!(
            f,
            "{:<10} {:>14.4} {:>14.4} {:>12.4}",
            "SINR dB",
            self.analytic.sinr_db(),
            self.estimate.moments.sinr_db(),
            self.estimate.sinr_db_stderr
        )
    }
}

/// Compares the closed-form moments with Monte Carlo at one sweep value.
pub fn validate_moments(cfg: &ExperimentConfig, value: f64) -> Result<MomentReport> {
    let opts = RunOptions {
        sep_analytic: false,
        geometric_moments: true,
    };
    let point = run_ncds_point(cfg, value, opts)?;
    Ok(MomentReport {
        channel_model: cfg.experiment.channel_model,
        analytic: point.analytic.expect("moments requested"),
        estimate: point.estimate,
    })
}
