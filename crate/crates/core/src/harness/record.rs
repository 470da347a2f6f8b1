use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One simulated point. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub scheme: String,
    pub channel_model: String,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub px_dbw: f64,
    pub b: usize,
    pub m: usize,
    pub speed_kmh: f64,
    pub constellation: usize,
    pub phase_bits: Option<u32>,
    pub sinr_db_analytic: f64,
    pub sinr_db_mc: f64,
    pub sinr_db_mc_stderr: f64,
    pub sep_analytic: f64,
    pub sep_mc: f64,
    pub sep_mc_stderr: f64,
    pub eta: f64,
    pub trials: usize,
    pub seed: u64,
    /// `;`-separated warnings, empty when clean.
    pub flag: String,
}

pub const CSV_COLUMNS: [&str; 20] = [
    "scheme",
    "channel_model",
    "sweep_param",
    "sweep_value",
    "px_dbw",
    "b",
    "m",
    "speed_kmh",
    "constellation",
    "phase_bits",
    "sinr_db_analytic",
    "sinr_db_mc",
    "sinr_db_mc_stderr",
    "sep_analytic",
    "sep_mc",
    "sep_mc_stderr",
    "eta",
    "trials",
    "seed",
    "flag",
];

/// Opens `path` for writing, failing early on unwritable locations.
pub fn create_output(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() && !parent.is_dir() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("output directory {} does not exist", parent.display()),
            )
            .into());
        }
    }
    Ok(File::create(path)?)
}

pub fn write_records<W: std::io::Write>(out: W, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// One cell of the training-efficiency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub m: usize,
    pub speed_kmh: f64,
    pub coherence_symbols: f64,
    pub eta: f64,
}

pub fn efficiency_rows(model: &crate::cds::CoherenceModel, ris_sizes: &[usize], speeds_kmh: &[f64]) -> Vec<EfficiencyRow> {
    let mut out = Vec::with_capacity(ris_sizes.len() * speeds_kmh.len());
    for &m in ris_sizes {
        for &v in speeds_kmh {
            let n_c = model.coherence(v);
            out.push(EfficiencyRow {
                m,
                speed_kmh: v,
                coherence_symbols: n_c,
                eta: crate::cds::efficiency_factor(m, n_c),
            });
        }
    }
    out
}

pub fn write_efficiency<W: std::io::Write>(out: W, rows: &[EfficiencyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
