use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cds::CoherenceModel;
use crate::channel::{ChannelModel, Scenario};
use crate::error::{Error, Result};
use crate::ncds::GeometricMethod;
use crate::sep::{GammaFit, NoiseModel, SepOptions};

/// Which receivers a run simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Ncds,
    Cds,
    Both,
}

impl Scheme {
    pub fn includes_ncds(self) -> bool {
        matches!(self, Scheme::Ncds | Scheme::Both)
    }

    pub fn includes_cds(self) -> bool {
        matches!(self, Scheme::Cds | Scheme::Both)
    }
}

/// Scenario field varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    PxDbw,
    NoiseDbw,
    /// RIS elements; laid out as the most square `h x v` grid.
    M,
    /// BS antennas; laid out as the most square `h x v` grid.
    B,
    SpeedKmh,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::PxDbw => "px_dbw",
            SweepParameter::NoiseDbw => "noise_dbw",
            SweepParameter::M => "m",
            SweepParameter::B => "b",
            SweepParameter::SpeedKmh => "speed_kmh",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = base.clone();
        match self {
            SweepParameter::PxDbw => s.px_dbw = value,
            SweepParameter::NoiseDbw => s.noise_dbw = value,
            SweepParameter::SpeedKmh => s.speed_kmh = value,
            SweepParameter::M => (s.ris_h, s.ris_v) = grid_shape(self, value)?,
            SweepParameter::B => (s.bs_h, s.bs_v) = grid_shape(self, value)?,
        }
        s.validate()?;
        Ok(s)
    }
}

fn grid_shape(param: SweepParameter, value: f64) -> Result<(usize, usize)> {
    if !(value >= 1.0 && value.fract() == 0.0 && value <= 1e9) {
        return Err(Error::Config(format!(
            "sweep over `{}` needs positive integers, got {value}",
            param.as_str()
        )));
    }
    let n = value as usize;
    let mut v = (n as f64).sqrt() as usize;
    while !n.is_multiple_of(v) {
        v -= 1;
    }
    Ok((n / v, v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Experiment {
    pub scheme: Scheme,
    pub channel_model: ChannelModel,
    /// DPSK order of the non-coherent scheme.
    pub constellation: usize,
    /// Quantize RIS phases to this many bits.
    pub phase_bits: Option<u32>,
    pub trials: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub geometric_method: GeometricMethod,
    pub gamma_fit: GammaFit,
    pub noise_model: NoiseModel,
    /// Absolute tolerance of the analytic SEP quadrature.
    pub sep_tol: f64,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            scheme: Scheme::Ncds,
            channel_model: ChannelModel::Iid,
            constellation: 4,
            phase_bits: None,
            trials: 100,
            seed: 1,
            output: None,
            geometric_method: GeometricMethod::Exact,
            gamma_fit: GammaFit::MomentMatched,
            noise_model: NoiseModel::Pooled,
            sep_tol: 1e-7,
        }
    }
}

impl Experiment {
    pub fn sep_options(&self) -> SepOptions {
        SepOptions {
            gamma_fit: self.gamma_fit,
            noise: self.noise_model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// How the training overhead reaches the coherent data symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CdsPenalty {
    /// Data energy scaled by the efficiency factor.
    #[default]
    Energy,
    /// Efficiency reported but not applied.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdsSettings {
    /// PSK order of the coherent scheme.
    pub constellation: usize,
    pub max_iters: usize,
    pub tol: f64,
    /// Data symbols after sounding; defaults to `symbols - 1`, the number
    /// of differential decisions per subcarrier in a frame.
    pub data_symbols: Option<usize>,
    pub penalty: CdsPenalty,
    pub coherence: CoherenceModel,
    /// Sound without noise.
    pub perfect_csi: bool,
    /// Optimize the RIS separately on every subcarrier.
    pub psi_per_subcarrier_oracle: bool,
    /// Hold the channel fixed over sounding and data (one coherence
    /// block). When false the channel keeps evolving with the Doppler
    /// spectrum, so late data symbols see an aged estimate.
    pub block_fading: bool,
}

impl Default for CdsSettings {
    fn default() -> Self {
        Self {
            constellation: 4,
            max_iters: 20,
            tol: 1e-6,
            data_symbols: None,
            penalty: CdsPenalty::Energy,
            coherence: CoherenceModel::default(),
            perfect_csi: false,
            psi_per_subcarrier_oracle: false,
            block_fading: true,
        }
    }
}

/// Everything a run needs. Read from TOML with `[scenario]`,
/// `[experiment]`, `[sweep]` and `[cds]` tables; unknown keys are errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub experiment: Experiment,
    pub sweep: Sweep,
    #[serde(default)]
    pub cds: CdsSettings,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, sweep: Sweep) -> Self {
        Self {
            scenario,
            experiment: Experiment::default(),
            sweep,
            cds: CdsSettings::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        let e = &self.experiment;
        if self.sweep.values.is_empty() {
            return Err(Error::Config("sweep values must be non-empty".into()));
        }
        if self.sweep.values.iter().any(|v| v.is_nan()) {
            return Err(Error::Config("sweep values must not be NaN".into()));
        }
        if e.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if !(e.sep_tol > 0.0) {
            return Err(Error::Config("sep_tol must be > 0".into()));
        }
        if let Some(b) = e.phase_bits {
            if b == 0 || b > 16 {
                return Err(Error::Config(format!("phase_bits must be in 1..=16, got {b}")));
            }
        }
        crate::ncds::check_order(e.constellation)?;
        crate::ncds::check_order(self.cds.constellation)?;
        if self.cds.max_iters == 0 {
            return Err(Error::Config("cds.max_iters must be >= 1".into()));
        }
        if self.cds.data_symbols == Some(0) {
            return Err(Error::Config("cds.data_symbols must be >= 1".into()));
        }
        for v in &self.sweep.values {
            self.sweep.parameter.apply(&self.scenario, *v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[scenario]
ris_h = 4
ris_v = 4
px_dbw = -20.0

[experiment]
scheme = "both"
channel_model = "geometric"
constellation = 8
phase_bits = 1
trials = 10
seed = 7

[sweep]
parameter = "px_dbw"
values = [-30.0, -20.0]

[cds]
max_iters = 5

[cds.coherence]
mode = "physical"
fc = 3.5e9
delta_f = 30e3
subcarriers = 1024
cp_len = 72
"#;

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.scenario.ris_elements(), 16);
        assert_eq!(cfg.experiment.scheme, Scheme::Both);
        assert_eq!(cfg.experiment.channel_model, ChannelModel::Geometric);
        assert_eq!(cfg.experiment.phase_bits, Some(1));
        assert_eq!(cfg.sweep.values, vec![-30.0, -20.0]);
        assert_eq!(cfg.cds.max_iters, 5);
        assert!(matches!(cfg.cds.coherence, CoherenceModel::Physical { cp_len: 72, .. }));
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        for (from, to) in [
            ("seed = 7", "seed = 7\nsede = 8"),
            ("ris_v = 4", "ris_v = 4\nris_w = 4"),
            ("max_iters = 5", "max_iters = 5\niters = 5"),
            ("cp_len = 72", "cp_len = 72\nextra = 1"),
        ] {
            let text = SAMPLE.replace(from, to);
            assert!(ExperimentConfig::from_toml_str(&text).is_err(), "{to}");
        }
        assert!(ExperimentConfig::from_toml_str(&format!("{SAMPLE}\n[extra]\na = 1\n")).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ExperimentConfig::from_toml_str(&SAMPLE.replace("values = [-30.0, -20.0]", "values = []")).is_err());
        assert!(ExperimentConfig::from_toml_str(&SAMPLE.replace("trials = 10", "trials = 0")).is_err());
        assert!(ExperimentConfig::from_toml_str(&SAMPLE.replace("constellation = 8", "constellation = 6")).is_err());
        assert!(ExperimentConfig::from_toml_str(&SAMPLE.replace("phase_bits = 1", "phase_bits = 0")).is_err());
        let m = SAMPLE.replace("parameter = \"px_dbw\"", "parameter = \"m\"");
        assert!(ExperimentConfig::from_toml_str(&m).is_err());
        let m = m.replace("values = [-30.0, -20.0]", "values = [64.0, 12.0]");
        assert!(ExperimentConfig::from_toml_str(&m).is_ok());
    }

    #[test]
    fn grid_shapes() {
        let base = Scenario::default();
        for (m, shape) in [(1.0, (1, 1)), (16.0, (4, 4)), (32.0, (8, 4)), (12.0, (4, 3)), (7.0, (7, 1))] {
            let s = SweepParameter::M.apply(&base, m).unwrap();
            assert_eq!((s.ris_h, s.ris_v), shape);
        }
        let s = SweepParameter::B.apply(&base, 16.0).unwrap();
        assert_eq!(s.bs_antennas(), 16);
    }
}
