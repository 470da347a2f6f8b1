use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use risdpsk_core::cds::{CoherenceModel, TABLE_RIS_SIZES, TABLE_SPEEDS_KMH};
use risdpsk_core::channel::{ChannelModel, Scenario};
use risdpsk_core::harness::{
    create_output, efficiency_rows, run_sweep, validate_moments, write_efficiency, write_records, ExperimentConfig,
    RunOptions, Scheme, Sweep, SweepParameter,
};

#[derive(Parser)]
#[command(name = "risdpsk", version, about = "Differential PSK over RIS-assisted SIMO-OFDM uplinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Non-coherent SINR versus the swept parameter.
    SinrSweep(Common),
    /// Symbol error probability, analytic and Monte Carlo.
    SepSweep(Common),
    /// Non-coherent against the coherent baseline at each sweep value.
    Compare(Common),
    /// Training efficiency of the coherent baseline over RIS size and speed.
    EfficiencyTable(TableArgs),
    /// Closed-form moments against Monte Carlo at the first sweep value.
    ValidateMoments(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file with [scenario], [experiment], [sweep] and [cds] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    channel: Option<ChannelModel>,
    #[arg(long)]
    phase_bits: Option<u32>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coherence time from the scenario numerology instead of the
    /// calibrated table.
    #[arg(long)]
    physical: bool,
    /// Scenario numerology for `--physical`.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::new(
            Scenario::default(),
            Sweep {
                parameter: SweepParameter::PxDbw,
                values: vec![-30.0, -25.0, -20.0, -15.0, -10.0],
            },
        ),
    };
    let e = &mut cfg.experiment;
    if let Some(seed) = common.seed {
        e.seed = seed;
    }
    if let Some(trials) = common.trials {
        e.trials = trials;
    }
    if let Some(channel) = common.channel {
        e.channel_model = channel;
    }
    if common.phase_bits.is_some() {
        e.phase_bits = common.phase_bits;
    }
    if common.out.is_some() {
        e.output = common.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep(mut cfg: ExperimentConfig, scheme: Option<Scheme>, opts: RunOptions) -> Result<()> {
    if let Some(s) = scheme {
        cfg.experiment.scheme = s;
    }
    let to_stdout = cfg.experiment.output.is_none();
    let records = run_sweep(&cfg, opts)?;
    if to_stdout {
        write_records(std::io::stdout().lock(), &records)?;
    } else {
        eprintln!(
            "wrote {} rows to {}",
            records.len(),
            cfg.experiment.output.as_ref().expect("output set").display()
        );
    }
    Ok(())
}

fn efficiency(args: &TableArgs) -> Result<()> {
    let model = if args.physical {
        let s = match &args.config {
            Some(path) => ExperimentConfig::load(path)?.scenario,
            None => Scenario::default(),
        };
        CoherenceModel::Physical {
            fc: s.fc,
            delta_f: s.delta_f,
            subcarriers: s.subcarriers,
            cp_len: s.cp_len,
        }
    } else {
        if args.config.is_some() {
            bail!("--config only applies together with --physical");
        }
        CoherenceModel::default()
    };
    let rows = efficiency_rows(&model, &TABLE_RIS_SIZES, &TABLE_SPEEDS_KMH);
    if let Some(path) = &args.out {
        write_efficiency(create_output(path)?, &rows)?;
    }
    let mut out = std::io::stdout().lock();
    write!(out, "{:>6}", "M")?;
    for v in TABLE_SPEEDS_KMH {
        write!(out, " {:>9}", format!("{v} km/h"))?;
    }
    writeln!(out)?;
    for chunk in rows.chunks(TABLE_SPEEDS_KMH.len()) {
        write!(out, "{:>6}", chunk[0].m)?;
        for r in chunk {
            write!(out, " {:>9.4}", r.eta)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::SinrSweep(c) => sweep(
            load(&c)?,
            Some(Scheme::Ncds),
            RunOptions {
                sep_analytic: false,
                geometric_moments: true,
            },
        ),
        Command::SepSweep(c) => sweep(load(&c)?, None, RunOptions::default()),
        Command::Compare(c) => sweep(load(&c)?, Some(Scheme::Both), RunOptions::default()),
        Command::EfficiencyTable(t) => efficiency(&t),
        Command::ValidateMoments(c) => {
            let cfg = load(&c)?;
            if cfg.experiment.output.is_some() {
                bail!("validate-moments prints a report and takes no --out");
            }
            let report = validate_moments(&cfg, cfg.sweep.values[0])?;
            print!("{report}");
            Ok(())
        }
    }
}
