use std::path::PathBuf;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand};
use onebit_sense::analytic::AnalyticModel;
use onebit_sense::{CfarBasis, Quantizer, RssiMode, SensingConfigBuilder, SignalModel};

use crate::plot::Axis;
use crate::preset::PresetName;

/// Seed used when `--seed` is not given. Always echoed to stderr.
pub const DEFAULT_SEED: u64 = 20_140_101;

#[derive(Debug, Parser)]
#[command(name = "onebit-sense", version, about = "Wideband energy-detection sensing: closed-form ROC analytics and Monte Carlo validation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form ROC curves.
    Analytic(AnalyticArgs),
    /// Monte Carlo estimates of false-alarm and detection rates.
    Simulate(SimulateArgs),
    /// Detection-probability gaps between curves in CSV files.
    Compare(CompareArgs),
    /// Run a figure preset end to end (analytic, simulated, comparison, plot).
    Preset(PresetArgs),
}

fn parse_model(s: &str) -> Result<AnalyticModel, String> {
    s.parse().map_err(|e: onebit_sense::AnalyticError| e.to_string())
}

/// `lo:hi:points`, log-spaced false-alarm targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfaGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

fn parse_pfa_grid(s: &str) -> Result<PfaGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, points] = parts.as_slice() else {
        return Err("expected lo:hi:points".into());
    };
    let lo: f64 = lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    let points: usize = points.parse().map_err(|_| format!("bad point count `{points}`"))?;
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) || points == 0 || (points > 1 && lo == hi) {
        return Err("need 0 < lo < hi <= 1 and at least one point".into());
    }
    Ok(PfaGrid { lo, hi, points })
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or("expected lo:hi")?;
    let a: f64 = a.parse().map_err(|_| format!("bad bound `{a}`"))?;
    let b: f64 = b.parse().map_err(|_| format!("bad bound `{b}`"))?;
    if !(0.0 < a && a < b && b <= 1.0) {
        return Err("need 0 < lo < hi <= 1".into());
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// key=value scenario file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of sub-bands N (power of two for simulation).
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of occupied sub-bands M.
    #[arg(long)]
    pub m: Option<usize>,
    /// Captures averaged per window, L.
    #[arg(long = "avg")]
    pub avg: Option<usize>,
    /// Per-band SNR in dB; comma-separated for several curves.
    #[arg(long = "snr-db", value_delimiter = ',', allow_hyphen_values = true)]
    pub snr_db: Vec<f64>,
    /// Noise variance per sub-band.
    #[arg(long = "noise-var")]
    pub noise_var: Option<f64>,
    /// One-bit leakage constant α.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["none", "one-bit"]).map(|s| s.parse::<Quantizer>().unwrap()))]
    pub quantizer: Option<Quantizer>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["ideal", "estimated"]).map(|s| s.parse::<RssiMode>().unwrap()))]
    pub rssi: Option<RssiMode>,
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["cscg", "qam4"]).map(|s| s.parse::<SignalModel>().unwrap()))]
    pub signal: Option<SignalModel>,
}

impl ScenarioArgs {
    /// Flag values layered over the optional config file.
    pub fn builder(&self) -> Result<SensingConfigBuilder, crate::CliError> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| crate::CliError::Usage(format!("{}: {e}", path.display())))?;
                SensingConfigBuilder::parse_kv(&text)?
            }
            None => SensingConfigBuilder::default(),
        };
        let mut flags = SensingConfigBuilder::default();
        if let Some(v) = self.n {
            flags = flags.n_subbands(v);
        }
        if let Some(v) = self.m {
            flags = flags.m_occupied(v);
        }
        if let Some(v) = self.avg {
            flags = flags.avg_captures(v);
        }
        if let Some(v) = self.noise_var {
            flags = flags.noise_var(v);
        }
        if let Some(v) = self.alpha {
            flags = flags.leakage_alpha(v);
        }
        if let Some(v) = self.quantizer {
            flags = flags.quantizer(v);
        }
        if let Some(v) = self.rssi {
            flags = flags.rssi_mode(v);
        }
        if let Some(v) = self.signal {
            flags = flags.signal_model(v);
        }
        Ok(base.merge(&flags))
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// False-alarm targets as lo:hi:points (log-spaced).
    #[arg(long = "pfa-grid", value_parser = parse_pfa_grid)]
    pub pfa_grid: Option<PfaGrid>,
    /// Use the dense 128-point false-alarm grid.
    #[arg(long)]
    pub dense: bool,
    /// Variance the quantized-case thresholds are derived from.
    #[arg(long = "cfar-basis", default_value = "quantized", value_parser = clap::builder::PossibleValuesParser::new(["quantized", "raw"]).map(|s| s.parse::<CfarBasis>().unwrap()))]
    pub cfar_basis: CfarBasis,
}

impl GridArgs {
    pub fn pfa_targets(&self) -> Vec<f64> {
        match self.pfa_grid {
            Some(g) => onebit_sense::analytic::log_spaced(g.lo, g.hi, g.points),
            None => onebit_sense::montecarlo::default_pfa_targets(self.dense),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot of the curves.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// exact, normal or onebit; comma-separated for several.
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_value = "exact")]
    pub model: Vec<AnalyticModel>,
    /// Emit the analytic part of a figure preset instead.
    #[arg(long)]
    pub preset: Option<PresetName>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Windows simulated per curve.
    #[arg(long, default_value_t = onebit_sense::montecarlo::DEFAULT_TRIALS, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Master seed of all random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
}

impl RunArgs {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Run the simulated part of a figure preset instead.
    #[arg(long)]
    pub preset: Option<PresetName>,
    /// Write the first generated window as a binary dump.
    #[arg(long = "dump-window")]
    pub dump_window: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Reference CSV followed by one or more CSVs to compare against it.
    #[arg(required = true, num_args = 2..)]
    pub files: Vec<PathBuf>,
    /// Exit with status 1 when the largest gap exceeds this value.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// False-alarm range of the comparison, lo:hi.
    #[arg(long = "pfa-range", value_parser = parse_range, default_value = "0.01:0.99")]
    pub pfa_range: (f64, f64),
    /// SVG of all curves.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Plot axes: roc (P_FA vs P_D) or snr (SNR vs P_D).
    #[arg(long, default_value = "roc")]
    pub axis: Axis,
}

#[derive(Debug, Clone, Args)]
pub struct PresetArgs {
    pub name: PresetName,
    /// Output directory for CSV files and the plot.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
    /// Use 128 false-alarm targets instead of 50.
    #[arg(long)]
    pub dense: bool,
    #[arg(long = "cfar-basis", default_value = "quantized", value_parser = clap::builder::PossibleValuesParser::new(["quantized", "raw"]).map(|s| s.parse::<CfarBasis>().unwrap()))]
    pub cfar_basis: CfarBasis,
}
