//! CSV schemas for analytic and simulated curves.
//!
//! Files always use a fixed column order, `\n` line endings and 12
//! significant digits for real values.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use onebit_sense::montecarlo::EmpiricalRates;
use onebit_sense::{HypothesisVariances, RocCurve, SensingConfig};

use crate::CliError;

pub const ANALYTIC_HEADER: [&str; 8] = ["model", "N", "M", "L", "snr_db", "lambda", "pfa", "pd"];
pub const VARIANCE_COLUMNS: [&str; 2] = ["var_h0", "var_h1"];
pub const SIMULATED_HEADER: [&str; 12] = [
    "model", "N", "M", "L", "snr_db", "trials", "seed", "lambda", "pfa_hat", "pd_hat", "pfa_se", "pd_se",
];

/// Formats `x` with 12 significant digits, switching to exponent notation
/// for very large or very small magnitudes.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..=14).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // The rounding may have carried into an extra digit; that is still
        // 12 significant digits or fewer after trimming.
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// One analytic curve plus its labelling columns.
pub struct AnalyticRows<'a> {
    pub model: &'a str,
    pub curve: &'a RocCurve,
    pub variances: Option<HypothesisVariances>,
}

fn scenario_columns(cfg: &SensingConfig) -> [String; 4] {
    [
        cfg.n_subbands().to_string(),
        cfg.m_occupied().to_string(),
        cfg.avg_captures().to_string(),
        fmt_real(cfg.snr_db()),
    ]
}

pub fn write_analytic<W: Write>(out: W, curves: &[AnalyticRows<'_>], with_variances: bool) -> Result<(), CliError> {
    let mut w = writer(out);
    let mut header: Vec<&str> = ANALYTIC_HEADER.to_vec();
    if with_variances {
        header.extend(VARIANCE_COLUMNS);
    }
    w.write_record(&header)?;
    for rows in curves {
        let scenario = scenario_columns(rows.curve.config());
        for p in rows.curve.points() {
            let mut rec = vec![rows.model.to_string()];
            rec.extend(scenario.iter().cloned());
            rec.extend([fmt_real(p.threshold), fmt_real(p.pfa), fmt_real(p.pd)]);
            if with_variances {
                let v = rows.variances.expect("variance columns requested");
                rec.extend([fmt_real(v.var_h0()), fmt_real(v.var_h1())]);
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub struct SimulatedRows<'a> {
    pub model: &'a str,
    pub config: &'a SensingConfig,
    pub trials: u64,
    pub seed: u64,
    pub rates: &'a EmpiricalRates,
}

pub fn write_simulated<W: Write>(out: W, runs: &[SimulatedRows<'_>]) -> Result<(), CliError> {
    let mut w = writer(out);
    w.write_record(SIMULATED_HEADER)?;
    for run in runs {
        let scenario = scenario_columns(run.config);
        for (lambda, c) in run.rates.iter() {
            let mut rec = vec![run.model.to_string()];
            rec.extend(scenario.iter().cloned());
            rec.extend([run.trials.to_string(), run.seed.to_string()]);
            rec.extend([lambda, c.pfa_hat(), c.pd_hat(), c.pfa_se(), c.pd_se()].map(fmt_real));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Identifies one curve within a results file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveKey {
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub snr_db: String,
}

impl CurveKey {
    /// Scenario part of the key, ignoring the model.
    pub fn scenario(&self) -> (usize, usize, usize, &str) {
        (self.n, self.m, self.l, &self.snr_db)
    }

    pub fn snr_db_value(&self) -> f64 {
        self.snr_db.parse().unwrap_or(f64::NAN)
    }

    pub fn label(&self) -> String {
        format!("{} N={} M={} L={} snr={}dB", self.model, self.n, self.m, self.l, self.snr_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub lambda: f64,
    pub pfa: f64,
    pub pd: f64,
}

/// Curves read back from either schema, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedCurves {
    pub curves: Vec<(CurveKey, Vec<CurvePoint>)>,
}

pub fn read_curves<R: Read>(input: R) -> Result<LoadedCurves, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (pfa_name, pd_name) = if col("pfa_hat").is_some() { ("pfa_hat", "pd_hat") } else { ("pfa", "pd") };
    let need = |name: &str| col(name).ok_or_else(|| CliError::Usage(format!("CSV is missing column `{name}`")));
    let idx = [need("model")?, need("N")?, need("M")?, need("L")?, need("snr_db")?, need("lambda")?, need(pfa_name)?, need(pd_name)?];

    let mut order: Vec<CurveKey> = Vec::new();
    let mut by_key: BTreeMap<CurveKey, Vec<CurvePoint>> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(idx[i]).unwrap_or("").trim();
        let bad = |what: &str| CliError::Usage(format!("row {}: invalid {what}", line + 2));
        let key = CurveKey {
            model: field(0).to_string(),
            n: field(1).parse().map_err(|_| bad("N"))?,
            m: field(2).parse().map_err(|_| bad("M"))?,
            l: field(3).parse().map_err(|_| bad("L"))?,
            snr_db: field(4).to_string(),
        };
        let real = |i: usize, what: &str| -> Result<f64, CliError> {
            let v: f64 = field(i).parse().map_err(|_| bad(what))?;
            if v.is_nan() {
                return Err(bad(what));
            }
            Ok(v)
        };
        let point = CurvePoint { lambda: real(5, "lambda")?, pfa: real(6, "pfa")?, pd: real(7, "pd")? };
        if !(0.0..=1.0).contains(&point.pfa) || !(0.0..=1.0).contains(&point.pd) {
            return Err(bad("probability"));
        }
        if !by_key.contains_key(&key) {
            order.push(key.clone());
        }
        by_key.entry(key).or_default().push(point);
    }
    if order.is_empty() {
        return Err(CliError::Usage("CSV contains no data rows".into()));
    }
    let curves = order
        .into_iter()
        .map(|k| {
            let mut pts = by_key.remove(&k).unwrap_or_default();
            pts.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            (k, pts)
        })
        .collect();
    Ok(LoadedCurves { curves })
}
