//! Figure presets: fixed scenario sets that regenerate one figure each.

use std::fmt;
use std::str::FromStr;

use onebit_sense::analytic::AnalyticModel;
use onebit_sense::montecarlo::default_pfa_targets;
use onebit_sense::{Quantizer, SensingConfig};

use crate::plot::Axis;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetName {
    /// Unquantized ROC, exact vs Normal vs simulation.
    Fig2,
    /// Quantized detection probability against the number of occupied bands.
    Fig3,
    /// Quantized and unquantized ROC side by side.
    Fig4,
    /// Detection probability against SNR at a fixed false-alarm rate.
    Fig5,
}

impl PresetName {
    pub const ALL: [PresetName; 4] = [PresetName::Fig2, PresetName::Fig3, PresetName::Fig4, PresetName::Fig5];

    pub fn as_str(&self) -> &'static str {
        match self {
            PresetName::Fig2 => "fig2",
            PresetName::Fig3 => "fig3",
            PresetName::Fig4 => "fig4",
            PresetName::Fig5 => "fig5",
        }
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected fig2, fig3, fig4 or fig5)"))
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct AnalyticJob {
    pub config: SensingConfig,
    pub model: AnalyticModel,
    pub pfas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimulationJob {
    pub config: SensingConfig,
    pub pfas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: PresetName,
    pub title: &'static str,
    pub axis: Axis,
    pub analytic: Vec<AnalyticJob>,
    pub simulations: Vec<SimulationJob>,
}

/// False-alarm rates of the fixed-rate figures.
pub const FIG3_PFAS: [f64; 3] = [0.1, 0.3, 0.5];
pub const FIG5_PFA: f64 = 0.1;
pub const ROC_SNRS_DB: [f64; 3] = [-3.0, 0.0, 3.0];

fn scenario(m: usize, l: usize, snr_db: f64, quantizer: Quantizer) -> Result<SensingConfig, CliError> {
    Ok(SensingConfig::builder()
        .n_subbands(1024)
        .m_occupied(m)
        .avg_captures(l)
        .snr_db(snr_db)
        .quantizer(quantizer)
        .build()?)
}

pub fn build(name: PresetName, dense: bool) -> Result<Preset, CliError> {
    let roc_pfas = default_pfa_targets(dense);
    let mut analytic = Vec::new();
    let mut simulations = Vec::new();
    let (title, axis) = match name {
        PresetName::Fig2 => {
            for snr in ROC_SNRS_DB {
                let cfg = scenario(100, 8, snr, Quantizer::None)?;
                for model in [AnalyticModel::Exact, AnalyticModel::Normal] {
                    analytic.push(AnalyticJob { config: cfg.clone(), model, pfas: roc_pfas.clone() });
                }
                simulations.push(SimulationJob { config: cfg, pfas: roc_pfas.clone() });
            }
            ("Unquantized ROC, N=1024, M=100, L=8", Axis::Roc)
        }
        PresetName::Fig3 => {
            let pfas = if dense { roc_pfas.clone() } else { FIG3_PFAS.to_vec() };
            for m in (50..=500).step_by(50) {
                let cfg = scenario(m, 4, 0.0, Quantizer::OneBit)?;
                analytic.push(AnalyticJob { config: cfg.clone(), model: AnalyticModel::OneBit, pfas: pfas.clone() });
                simulations.push(SimulationJob { config: cfg, pfas: pfas.clone() });
            }
            ("One-bit detection vs occupancy, N=1024, L=4, SNR=0 dB", Axis::Roc)
        }
        PresetName::Fig4 => {
            for snr in ROC_SNRS_DB {
                let plain = scenario(100, 8, snr, Quantizer::None)?;
                let quant = scenario(100, 8, snr, Quantizer::OneBit)?;
                analytic.push(AnalyticJob { config: plain.clone(), model: AnalyticModel::Exact, pfas: roc_pfas.clone() });
                analytic.push(AnalyticJob { config: quant.clone(), model: AnalyticModel::OneBit, pfas: roc_pfas.clone() });
                simulations.push(SimulationJob { config: plain, pfas: roc_pfas.clone() });
                simulations.push(SimulationJob { config: quant, pfas: roc_pfas.clone() });
            }
            ("Quantized vs unquantized ROC, N=1024, M=100, L=8", Axis::Roc)
        }
        PresetName::Fig5 => {
            for l in [4, 8, 16] {
                for snr in -10..=10 {
                    let snr = snr as f64;
                    let plain = scenario(100, l, snr, Quantizer::None)?;
                    let quant = scenario(100, l, snr, Quantizer::OneBit)?;
                    analytic.push(AnalyticJob { config: plain, model: AnalyticModel::Exact, pfas: vec![FIG5_PFA] });
                    analytic.push(AnalyticJob { config: quant.clone(), model: AnalyticModel::OneBit, pfas: vec![FIG5_PFA] });
                    simulations.push(SimulationJob { config: quant, pfas: vec![FIG5_PFA] });
                }
            }
            ("Detection vs SNR at PFA=0.1, N=1024, M=100", Axis::Snr)
        }
    };
    Ok(Preset { name, title, axis, analytic, simulations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in PresetName::ALL {
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
        }
        assert!("fig9".parse::<PresetName>().is_err());
    }

    #[test]
    fn curve_counts() {
        let count = |n| {
            let p = build(n, false).unwrap();
            (p.analytic.len(), p.simulations.len())
        };
        assert_eq!(count(PresetName::Fig2), (6, 3));
        assert_eq!(count(PresetName::Fig3), (10, 10));
        assert_eq!(count(PresetName::Fig4), (6, 6));
        assert_eq!(count(PresetName::Fig5), (126, 63));
    }
}
