//! Subcommand implementations.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use onebit_sense::analytic::{self, required_snr_db, roc_analytic, thresholds_for_pfas, AnalyticModel};
use onebit_sense::montecarlo::{self, lambda_grid_for_pfas, CompareOptions, CurveGap};
use onebit_sense::{
    dump, CfarBasis, Provenance, Quantizer, RocCurve, RocPoint, SensingConfig, SignalEngine, SimRng,
    SimulationResult, TrialPlan, VarianceModel,
};

use crate::args::{AnalyticArgs, CompareArgs, PresetArgs, RunArgs, ScenarioArgs, SimulateArgs};
use crate::csvio::{self, AnalyticRows, CurveKey, CurvePoint, LoadedCurves, SimulatedRows};
use crate::plot::{self, Axis, Series};
use crate::preset::{self, AnalyticJob, PresetName, SimulationJob};
use crate::CliError;

/// One configuration per requested SNR, or a single one when none is given.
pub fn scenario_configs(args: &ScenarioArgs) -> Result<Vec<SensingConfig>, CliError> {
    let builder = args.builder()?;
    if args.snr_db.is_empty() {
        return Ok(vec![builder.build()?]);
    }
    args.snr_db
        .iter()
        .map(|&db| Ok(builder.clone().snr_db(db).build()?))
        .collect()
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// H0 variance an analytic curve places its thresholds with.
fn threshold_var(config: &SensingConfig, model: AnalyticModel, basis: CfarBasis) -> Result<f64, CliError> {
    Ok(match (model, basis) {
        (AnalyticModel::OneBit, CfarBasis::Quantized) => {
            analytic::hypothesis_variances(config, VarianceModel::OneBitLeakage)?.var_h0()
        }
        _ => config.noise_var(),
    })
}

pub struct AnalyticCurve {
    pub model: AnalyticModel,
    pub curve: RocCurve,
    pub variances: onebit_sense::HypothesisVariances,
}

pub fn analytic_curve(job: &AnalyticJob, basis: CfarBasis) -> Result<AnalyticCurve, CliError> {
    let var0 = threshold_var(&job.config, job.model, basis)?;
    let grid = thresholds_for_pfas(&job.pfas, job.config.avg_captures(), var0)?;
    let curve = roc_analytic(&job.config, job.model, &grid)?;
    let variances = analytic::hypothesis_variances(&job.config, job.model.variance_model())?;
    Ok(AnalyticCurve { model: job.model, curve, variances })
}

pub fn write_analytic_curves<W: Write>(out: W, curves: &[AnalyticCurve]) -> Result<(), CliError> {
    let with_variances = curves.iter().any(|c| c.model == AnalyticModel::OneBit);
    let rows: Vec<AnalyticRows<'_>> = curves
        .iter()
        .map(|c| AnalyticRows { model: c.model.as_str(), curve: &c.curve, variances: Some(c.variances) })
        .collect();
    csvio::write_analytic(out, &rows, with_variances)
}

pub fn sim_label(config: &SensingConfig) -> &'static str {
    match config.quantizer() {
        Quantizer::None => "sim-unquantized",
        Quantizer::OneBit => "sim-onebit",
    }
}

pub struct SimulatedCurve {
    pub config: SensingConfig,
    pub result: SimulationResult,
}

pub fn simulate_job(job: &SimulationJob, run: &RunArgs, basis: CfarBasis) -> Result<SimulatedCurve, CliError> {
    let grid = lambda_grid_for_pfas(&job.config, &job.pfas, basis)?;
    let plan = TrialPlan::new(job.config.clone(), run.trials, run.seed(), grid)?;
    let result = match run.workers {
        Some(w) => montecarlo::run_with_workers(&plan, w as usize)?,
        None => montecarlo::run(&plan)?,
    };
    Ok(SimulatedCurve { config: job.config.clone(), result })
}

pub fn write_simulated_curves<W: Write>(out: W, curves: &[SimulatedCurve], run: &RunArgs) -> Result<(), CliError> {
    let rows: Vec<SimulatedRows<'_>> = curves
        .iter()
        .map(|c| SimulatedRows {
            model: sim_label(&c.config),
            config: &c.config,
            trials: run.trials,
            seed: run.seed(),
            rates: &c.result.rates,
        })
        .collect();
    csvio::write_simulated(out, &rows)
}

fn roc_series(label: String, curve: &RocCurve, dashed: bool) -> Series {
    let mut points: Vec<(f64, f64)> = curve.points().iter().map(|p| (p.pfa, p.pd)).collect();
    points.reverse();
    Series { label, points, dashed }
}

pub fn cmd_analytic(args: &AnalyticArgs) -> Result<(), CliError> {
    let jobs: Vec<AnalyticJob> = match args.preset {
        Some(name) => preset::build(name, args.grid.dense)?.analytic,
        None => {
            let pfas = args.grid.pfa_targets();
            let mut jobs = Vec::new();
            for cfg in scenario_configs(&args.scenario)? {
                for &model in &args.model {
                    jobs.push(AnalyticJob { config: cfg.clone(), model, pfas: pfas.clone() });
                }
            }
            jobs
        }
    };
    let curves = jobs
        .iter()
        .map(|j| analytic_curve(j, args.grid.cfar_basis))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = open_output(args.output.out.as_deref())?;
    write_analytic_curves(&mut out, &curves)?;
    out.flush()?;
    if let Some(path) = &args.output.plot {
        let series: Vec<Series> = curves
            .iter()
            .map(|c| roc_series(format!("{} {} dB", c.model, csvio::fmt_real(c.curve.config().snr_db())), &c.curve, false))
            .collect();
        plot::write_svg(path, "Analytic ROC", Axis::Roc, &series)?;
    }
    Ok(())
}

fn dump_first_window(path: &Path, config: &SensingConfig, seed: u64) -> Result<(), CliError> {
    let engine = SignalEngine::new(config.clone())?;
    // Same draws as trial 0 of the run.
    let mut rng = SimRng::substream(seed, 0);
    let occupancy = engine.draw_occupancy(&mut rng);
    let window = engine.generate_window(&occupancy, 0, &mut rng)?;
    let mut out = BufWriter::new(File::create(path)?);
    dump::write_window(&mut out, &window, seed)?;
    out.flush()?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let jobs: Vec<SimulationJob> = match args.preset {
        Some(name) => preset::build(name, args.grid.dense)?.simulations,
        None => {
            let pfas = args.grid.pfa_targets();
            scenario_configs(&args.scenario)?
                .into_iter()
                .map(|config| SimulationJob { config, pfas: pfas.clone() })
                .collect()
        }
    };
    eprintln!("seed = {}", args.run.seed());
    if let Some(path) = &args.dump_window {
        dump_first_window(path, &jobs[0].config, args.run.seed())?;
    }
    let curves = jobs
        .iter()
        .map(|j| simulate_job(j, &args.run, args.grid.cfar_basis))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = open_output(args.output.out.as_deref())?;
    write_simulated_curves(&mut out, &curves, &args.run)?;
    out.flush()?;
    if let Some(path) = &args.output.plot {
        let series: Vec<Series> = curves
            .iter()
            .map(|c| {
                let label = format!("{} {} dB", sim_label(&c.config), csvio::fmt_real(c.config.snr_db()));
                roc_series(label, &c.result.roc, true)
            })
            .collect();
        plot::write_svg(path, "Simulated ROC", Axis::Roc, &series)?;
    }
    Ok(())
}

/// Which closed form a curve is checked against: simulated curves pair with
/// the analytic model of the same front end.
pub fn model_family(model: &str) -> &str {
    match model {
        "exact" | "sim-unquantized" => "unquantized",
        "onebit" | "sim-onebit" => "onebit",
        other => other,
    }
}

pub fn load_csv(path: &Path) -> Result<LoadedCurves, CliError> {
    let file = File::open(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    csvio::read_curves(file).map_err(|e| match e {
        CliError::Usage(msg) => CliError::Usage(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn loaded_roc(key: &CurveKey, points: &[CurvePoint]) -> Result<RocCurve, CliError> {
    let snr = key.snr_db_value();
    let mut b = SensingConfig::builder().n_subbands(key.n).m_occupied(key.m).avg_captures(key.l);
    b = if snr == f64::NEG_INFINITY { b.signal_var(0.0) } else { b.snr_db(snr) };
    let config = b.build()?;
    let pts = points.iter().map(|p| RocPoint { threshold: p.lambda, pfa: p.pfa, pd: p.pd }).collect();
    RocCurve::new(pts, Provenance::Simulated, config)
        .map_err(|e| CliError::Usage(format!("curve {}: {e}", key.label())))
}

/// Largest and mean |ΔP_D| over thresholds present in both curves.
fn pointwise_gap(label: &str, a: &[CurvePoint], b: &[CurvePoint]) -> Option<CurveGap> {
    let mut gaps = Vec::new();
    for p in a {
        if let Some(q) = b.iter().find(|q| (q.lambda - p.lambda).abs() <= 1e-9 * p.lambda.abs().max(1.0)) {
            gaps.push(((p.pd - q.pd).abs(), p.pfa));
        }
    }
    if gaps.is_empty() {
        return None;
    }
    let (max_gap, pfa_at_max) = gaps.iter().copied().fold((0.0, gaps[0].1), |m, g| if g.0 > m.0 { g } else { m });
    let mean_gap = gaps.iter().map(|g| g.0).sum::<f64>() / gaps.len() as f64;
    let lo = gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    Some(CurveGap { label: label.to_string(), max_gap, mean_gap, pfa_at_max, pfa_range: (lo, hi) })
}

#[derive(Debug, Clone)]
pub struct PairGap {
    pub reference: String,
    pub gap: CurveGap,
}

/// Pairs every curve of `other` with the reference curve of the same
/// scenario (and model family when several share it) and measures the gap.
pub fn compare_curves(reference: &LoadedCurves, other: &LoadedCurves, opts: CompareOptions) -> Result<Vec<PairGap>, CliError> {
    let mut out = Vec::new();
    for (key, pts) in &other.curves {
        let same: Vec<&(CurveKey, Vec<CurvePoint>)> =
            reference.curves.iter().filter(|(k, _)| k.scenario() == key.scenario()).collect();
        let partner = match same.as_slice() {
            [] => continue,
            [only] => *only,
            many => match many.iter().find(|(k, _)| k.model == key.model) {
                Some(hit) => *hit,
                None => match many.iter().find(|(k, _)| model_family(&k.model) == model_family(&key.model)) {
                    Some(hit) => *hit,
                    None => continue,
                },
            },
        };
        let (rkey, rpts) = partner;
        let (rlabel, label) = (rkey.label(), key.label());
        let gap = if rpts.len() >= 2 && pts.len() >= 2 {
            let rc = loaded_roc(rkey, rpts)?;
            let oc = loaded_roc(key, pts)?;
            match montecarlo::roc_compare((&rlabel, &rc), &[(&label, &oc)], opts) {
                Ok(report) => report.gaps.into_iter().next(),
                Err(onebit_sense::McError::NoOverlap(..)) => pointwise_gap(&label, rpts, pts),
                Err(e) => return Err(e.into()),
            }
        } else {
            pointwise_gap(&label, rpts, pts)
        };
        if let Some(gap) = gap {
            out.push(PairGap { reference: rlabel, gap });
        }
    }
    Ok(out)
}

pub fn print_gaps<W: Write>(mut out: W, gaps: &[PairGap]) -> io::Result<f64> {
    let mut worst = 0.0f64;
    for g in gaps {
        writeln!(
            out,
            "{} vs {}: max |dPD| = {:.6} at PFA = {:.4}, mean |dPD| = {:.6}",
            g.reference, g.gap.label, g.gap.max_gap, g.gap.pfa_at_max, g.gap.mean_gap
        )?;
        worst = worst.max(g.gap.max_gap);
    }
    writeln!(out, "max |dPD| over {} pair(s) = {:.6}", gaps.len(), worst)?;
    Ok(worst)
}

/// P_D of a curve at the point whose P_FA is closest to `pfa`.
fn pd_near(points: &[CurvePoint], pfa: f64) -> f64 {
    points
        .iter()
        .min_by(|a, b| (a.pfa - pfa).abs().total_cmp(&(b.pfa - pfa).abs()))
        .map_or(f64::NAN, |p| p.pd)
}

/// Model and scenario of a curve, minus its SNR.
type SweepId = (String, usize, usize, usize);

/// Series for plotting loaded curves. On the SNR axis curves that differ only
/// in SNR are joined, each contributing P_D near P_FA = 0.1.
pub fn loaded_series(files: &[(String, LoadedCurves)], axis: Axis) -> Vec<Series> {
    let many = files.len() > 1;
    let prefix = |name: &str| if many { format!("{name}: ") } else { String::new() };
    let mut series = Vec::new();
    for (name, loaded) in files {
        match axis {
            Axis::Roc => {
                for (key, pts) in &loaded.curves {
                    let mut points: Vec<(f64, f64)> = pts.iter().map(|p| (p.pfa, p.pd)).collect();
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                    series.push(Series {
                        label: format!("{}{}", prefix(name), key.label()),
                        points,
                        dashed: key.model.starts_with("sim-"),
                    });
                }
            }
            Axis::Snr => {
                let mut groups: Vec<(SweepId, Vec<(f64, f64)>)> = Vec::new();
                for (key, pts) in &loaded.curves {
                    let id = (key.model.clone(), key.n, key.m, key.l);
                    let point = (key.snr_db_value(), pd_near(pts, preset::FIG5_PFA));
                    match groups.iter_mut().find(|(g, _)| *g == id) {
                        Some((_, v)) => v.push(point),
                        None => groups.push((id, vec![point])),
                    }
                }
                for ((model, n, m, l), mut points) in groups {
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                    series.push(Series {
                        label: format!("{}{model} N={n} M={m} L={l}", prefix(name)),
                        dashed: model.starts_with("sim-"),
                        points,
                    });
                }
            }
        }
    }
    series
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let files: Vec<(String, LoadedCurves)> = args
        .files
        .iter()
        .map(|p| Ok((p.display().to_string(), load_csv(p)?)))
        .collect::<Result<_, CliError>>()?;
    let opts = CompareOptions { pfa_lo: args.pfa_range.0, pfa_hi: args.pfa_range.1, ..CompareOptions::default() };
    let reference = &files[0].1;
    let mut gaps = Vec::new();
    for (_, other) in &files[1..] {
        gaps.extend(compare_curves(reference, other, opts)?);
    }
    if gaps.is_empty() {
        return Err(CliError::Usage("no curves share a scenario with the reference file".into()));
    }
    let worst = print_gaps(io::stdout().lock(), &gaps)?;
    if let Some(path) = &args.plot {
        plot::write_svg(path, "Curve comparison", args.axis, &loaded_series(&files, args.axis))?;
    }
    match args.tolerance {
        Some(tolerance) if worst > tolerance => Err(CliError::Tolerance { max_gap: worst, tolerance }),
        _ => Ok(()),
    }
}

/// Quantization penalty in dB at P_D = 0.9, P_FA = 0.1 for each L of the
/// SNR-sweep figure.
pub fn quantization_penalties() -> Result<Vec<(usize, f64, f64)>, CliError> {
    let cfg = SensingConfig::builder().build()?;
    let (m, n, alpha) = (cfg.m_occupied(), cfg.n_subbands(), cfg.leakage_alpha());
    [4, 8, 16]
        .into_iter()
        .map(|l| {
            let plain = required_snr_db(VarianceModel::ExactUnquantized, 0.9, preset::FIG5_PFA, l, m, n, alpha)?;
            let quant = required_snr_db(VarianceModel::OneBitLeakage, 0.9, preset::FIG5_PFA, l, m, n, alpha)?;
            Ok((l, plain, quant))
        })
        .collect()
}

pub struct PresetOutputs {
    pub analytic_csv: PathBuf,
    pub simulated_csv: PathBuf,
    pub plot: PathBuf,
    pub gaps: Vec<PairGap>,
}

pub fn run_preset(name: PresetName, out_dir: &Path, run: &RunArgs, dense: bool, basis: CfarBasis) -> Result<PresetOutputs, CliError> {
    let preset = preset::build(name, dense)?;
    std::fs::create_dir_all(out_dir)?;
    let analytic_csv = out_dir.join(format!("{name}_analytic.csv"));
    let simulated_csv = out_dir.join(format!("{name}_simulated.csv"));
    let plot_path = out_dir.join(format!("{name}.svg"));

    let curves = preset
        .analytic
        .iter()
        .map(|j| analytic_curve(j, basis))
        .collect::<Result<Vec<_>, _>>()?;
    let mut f = BufWriter::new(File::create(&analytic_csv)?);
    write_analytic_curves(&mut f, &curves)?;
    f.flush()?;

    eprintln!("seed = {}", run.seed());
    let mut sims = Vec::with_capacity(preset.simulations.len());
    for (i, job) in preset.simulations.iter().enumerate() {
        eprintln!(
            "[{}/{}] {} M={} L={} snr={} dB, {} trials",
            i + 1,
            preset.simulations.len(),
            sim_label(&job.config),
            job.config.m_occupied(),
            job.config.avg_captures(),
            csvio::fmt_real(job.config.snr_db()),
            run.trials
        );
        sims.push(simulate_job(job, run, basis)?);
    }
    let mut f = BufWriter::new(File::create(&simulated_csv)?);
    write_simulated_curves(&mut f, &sims, run)?;
    f.flush()?;

    let analytic_loaded = load_csv(&analytic_csv)?;
    let simulated_loaded = load_csv(&simulated_csv)?;
    let gaps = compare_curves(&analytic_loaded, &simulated_loaded, CompareOptions::default())?;
    let files = [("analytic".to_string(), analytic_loaded), ("simulated".to_string(), simulated_loaded)];
    plot::write_svg(&plot_path, preset.title, preset.axis, &loaded_series(&files, preset.axis))?;
    Ok(PresetOutputs { analytic_csv, simulated_csv, plot: plot_path, gaps })
}

pub fn cmd_preset(args: &PresetArgs) -> Result<(), CliError> {
    let outputs = run_preset(args.name, &args.out, &args.run, args.dense, args.cfar_basis)?;
    let mut stdout = io::stdout().lock();
    print_gaps(&mut stdout, &outputs.gaps)?;
    if args.name == PresetName::Fig5 {
        for (l, plain, quant) in quantization_penalties()? {
            writeln!(
                stdout,
                "L={l}: required SNR for PD=0.9 at PFA=0.1: unquantized {plain:.3} dB, one-bit {quant:.3} dB, penalty {:.3} dB",
                quant - plain
            )?;
        }
    }
    for p in [&outputs.analytic_csv, &outputs.simulated_csv, &outputs.plot] {
        writeln!(stdout, "wrote {}", p.display())?;
    }
    Ok(())
}
