//! Scenario configuration.
//!
//! A [`SensingConfig`] can only be obtained through [`SensingConfigBuilder::build`],
//! which checks every invariant, so holders of a config never re-validate it.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("number of sub-bands must be positive")]
    NoSubbands,
    #[error("occupied sub-bands M={m} must be strictly less than N={n}")]
    TooManyOccupied { m: usize, n: usize },
    #[error("averaging depth L must be at least 1")]
    NoCaptures,
    #[error("noise variance must be positive and finite, got {0}")]
    NonPositiveNoise(f64),
    #[error("signal variance must be non-negative and finite, got {0}")]
    NegativeSignal(f64),
    #[error("sub-band bandwidth must be positive and finite, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("sample rate {given} Hz does not equal N*B = {expected} Hz")]
    SampleRateMismatch { given: f64, expected: f64 },
    #[error("leakage alpha must lie in (0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("SNR must be finite, got {0}")]
    BadSnr(f64),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: expected `key=value`, got `{text}`")]
    MalformedLine { line: usize, text: String },
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantizer {
    None,
    OneBit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RssiMode {
    /// Power reading equals the model value M*σ_S² + N*σ_W².
    Ideal,
    /// Power reading is estimated from the raw window samples.
    Estimated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalModel {
    Cscg,
    Qam4BlockFading,
}

macro_rules! keyword_enum {
    ($ty:ident { $($variant:ident => [$($name:literal),+]),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(&self) -> &'static str {
                match self {
                    $($ty::$variant => keyword_enum!(@first $($name),+),)+
                }
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($($name)|+ => Ok($ty::$variant),)+
                    other => Err(format!("unknown {} `{}`", stringify!($ty), other)),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
    (@first $first:literal $(, $rest:literal)*) => { $first };
}

keyword_enum!(Quantizer { None => ["none", "unquantized"], OneBit => ["one-bit", "onebit", "1bit"] });
keyword_enum!(RssiMode { Ideal => ["ideal"], Estimated => ["estimated"] });
keyword_enum!(SignalModel { Cscg => ["cscg"], Qam4BlockFading => ["qam4", "qam4-block-fading"] });

/// All scenario parameters for one sensing experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingConfig {
    n_subbands: usize,
    subband_bandwidth: f64,
    m_occupied: usize,
    avg_captures: usize,
    noise_var: f64,
    signal_var: f64,
    quantizer: Quantizer,
    rssi_mode: RssiMode,
    signal_model: SignalModel,
    leakage_alpha: f64,
}

impl SensingConfig {
    pub fn builder() -> SensingConfigBuilder {
        SensingConfigBuilder::default()
    }

    /// Re-opens this config for modification.
    pub fn to_builder(&self) -> SensingConfigBuilder {
        SensingConfigBuilder {
            n_subbands: Some(self.n_subbands),
            subband_bandwidth: Some(self.subband_bandwidth),
            sample_rate: None,
            m_occupied: Some(self.m_occupied),
            avg_captures: Some(self.avg_captures),
            noise_var: Some(self.noise_var),
            signal: Some(SignalLevel::Variance(self.signal_var)),
            quantizer: Some(self.quantizer),
            rssi_mode: Some(self.rssi_mode),
            signal_model: Some(self.signal_model),
            leakage_alpha: Some(self.leakage_alpha),
        }
    }

    pub fn n_subbands(&self) -> usize {
        self.n_subbands
    }
    pub fn subband_bandwidth(&self) -> f64 {
        self.subband_bandwidth
    }
    pub fn sample_rate(&self) -> f64 {
        self.n_subbands as f64 * self.subband_bandwidth
    }
    pub fn m_occupied(&self) -> usize {
        self.m_occupied
    }
    pub fn avg_captures(&self) -> usize {
        self.avg_captures
    }
    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
    pub fn signal_var(&self) -> f64 {
        self.signal_var
    }
    /// Per-sub-band SNR γ = σ_S²/σ_W² (linear).
    pub fn snr(&self) -> f64 {
        self.signal_var / self.noise_var
    }
    /// SNR in dB; `-inf` when there is no signal.
    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr())
    }
    pub fn quantizer(&self) -> Quantizer {
        self.quantizer
    }
    pub fn rssi_mode(&self) -> RssiMode {
        self.rssi_mode
    }
    pub fn signal_model(&self) -> SignalModel {
        self.signal_model
    }
    pub fn leakage_alpha(&self) -> f64 {
        self.leakage_alpha
    }
    /// Fraction of occupied sub-bands, M/N.
    pub fn utilization(&self) -> f64 {
        self.m_occupied as f64 / self.n_subbands as f64
    }
    /// Total received power M*σ_S² + N*σ_W², the ideal RSSI reading.
    pub fn total_power(&self) -> f64 {
        self.m_occupied as f64 * self.signal_var + self.n_subbands as f64 * self.noise_var
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SignalLevel {
    Variance(f64),
    SnrLinear(f64),
    SnrDb(f64),
}

/// Collects scenario parameters; unset fields take the defaults of the
/// reference experiment (N=1024, M=100, L=8, σ_W²=1, 0 dB, α=e⁻¹).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensingConfigBuilder {
    n_subbands: Option<usize>,
    subband_bandwidth: Option<f64>,
    sample_rate: Option<f64>,
    m_occupied: Option<usize>,
    avg_captures: Option<usize>,
    noise_var: Option<f64>,
    signal: Option<SignalLevel>,
    quantizer: Option<Quantizer>,
    rssi_mode: Option<RssiMode>,
    signal_model: Option<SignalModel>,
    leakage_alpha: Option<f64>,
}

impl SensingConfigBuilder {
    pub fn n_subbands(mut self, n: usize) -> Self {
        self.n_subbands = Some(n);
        self
    }
    pub fn subband_bandwidth(mut self, hz: f64) -> Self {
        self.subband_bandwidth = Some(hz);
        self
    }
    /// Optional; if given it must equal N*B exactly.
    pub fn sample_rate(mut self, hz: f64) -> Self {
        self.sample_rate = Some(hz);
        self
    }
    pub fn m_occupied(mut self, m: usize) -> Self {
        self.m_occupied = Some(m);
        self
    }
    pub fn avg_captures(mut self, l: usize) -> Self {
        self.avg_captures = Some(l);
        self
    }
    pub fn noise_var(mut self, v: f64) -> Self {
        self.noise_var = Some(v);
        self
    }
    /// Sets σ_S² directly. Overrides any earlier SNR setting.
    pub fn signal_var(mut self, v: f64) -> Self {
        self.signal = Some(SignalLevel::Variance(v));
        self
    }
    /// Sets σ_S² = γ·σ_W². Overrides any earlier signal setting.
    pub fn snr(mut self, gamma: f64) -> Self {
        self.signal = Some(SignalLevel::SnrLinear(gamma));
        self
    }
    /// Sets σ_S² from an SNR in dB. Overrides any earlier signal setting.
    pub fn snr_db(mut self, db: f64) -> Self {
        self.signal = Some(SignalLevel::SnrDb(db));
        self
    }
    pub fn quantizer(mut self, q: Quantizer) -> Self {
        self.quantizer = Some(q);
        self
    }
    pub fn rssi_mode(mut self, r: RssiMode) -> Self {
        self.rssi_mode = Some(r);
        self
    }
    pub fn signal_model(mut self, s: SignalModel) -> Self {
        self.signal_model = Some(s);
        self
    }
    pub fn leakage_alpha(mut self, a: f64) -> Self {
        self.leakage_alpha = Some(a);
        self
    }

    /// Applies every field set in `other` on top of `self`.
    pub fn merge(mut self, other: &SensingConfigBuilder) -> Self {
        macro_rules! take {
            ($($f:ident),+) => { $(if other.$f.is_some() { self.$f = other.$f; })+ };
        }
        take!(
            n_subbands,
            subband_bandwidth,
            sample_rate,
            m_occupied,
            avg_captures,
            noise_var,
            signal,
            quantizer,
            rssi_mode,
            signal_model,
            leakage_alpha
        );
        self
    }

    /// Parses flat `key=value` text. Keys are the config field names; blank
    /// lines and `#` comments are ignored. `snr` is linear, `snr_db` is dB.
    pub fn parse_kv(text: &str) -> Result<Self, ConfigError> {
        let mut b = SensingConfigBuilder::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::MalformedLine { line: idx + 1, text: raw.to_string() });
            };
            b = b.set_kv(key.trim(), value.trim())?;
        }
        Ok(b)
    }

    fn set_kv(self, key: &str, value: &str) -> Result<Self, ConfigError> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.parse().map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
        Ok(match key {
            "n_subbands" => self.n_subbands(parse(key, value)?),
            "subband_bandwidth" => self.subband_bandwidth(parse(key, value)?),
            "sample_rate" => self.sample_rate(parse(key, value)?),
            "m_occupied" => self.m_occupied(parse(key, value)?),
            "avg_captures" => self.avg_captures(parse(key, value)?),
            "noise_var" => self.noise_var(parse(key, value)?),
            "signal_var" => self.signal_var(parse(key, value)?),
            "snr" => self.snr(parse(key, value)?),
            "snr_db" => self.snr_db(parse(key, value)?),
            "quantizer" => self.quantizer(parse(key, value)?),
            "rssi_mode" => self.rssi_mode(parse(key, value)?),
            "signal_model" => self.signal_model(parse(key, value)?),
            "leakage_alpha" => self.leakage_alpha(parse(key, value)?),
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        })
    }

    pub fn build(&self) -> Result<SensingConfig, ConfigError> {
        let n_subbands = self.n_subbands.unwrap_or(1024);
        let m_occupied = self.m_occupied.unwrap_or(100);
        let avg_captures = self.avg_captures.unwrap_or(8);
        let noise_var = self.noise_var.unwrap_or(1.0);
        let subband_bandwidth = self.subband_bandwidth.unwrap_or(1.0e6);
        let leakage_alpha = self.leakage_alpha.unwrap_or((-1f64).exp());

        if n_subbands == 0 {
            return Err(ConfigError::NoSubbands);
        }
        if m_occupied >= n_subbands {
            return Err(ConfigError::TooManyOccupied { m: m_occupied, n: n_subbands });
        }
        if avg_captures == 0 {
            return Err(ConfigError::NoCaptures);
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(ConfigError::NonPositiveNoise(noise_var));
        }
        if !(subband_bandwidth > 0.0 && subband_bandwidth.is_finite()) {
            return Err(ConfigError::NonPositiveBandwidth(subband_bandwidth));
        }
        let expected = n_subbands as f64 * subband_bandwidth;
        if let Some(given) = self.sample_rate {
            if given != expected {
                return Err(ConfigError::SampleRateMismatch { given, expected });
            }
        }
        if !(leakage_alpha > 0.0 && leakage_alpha <= 1.0) {
            return Err(ConfigError::AlphaOutOfRange(leakage_alpha));
        }
        let signal_var = match self.signal.unwrap_or(SignalLevel::SnrDb(0.0)) {
            SignalLevel::Variance(v) => v,
            SignalLevel::SnrLinear(g) => {
                if !g.is_finite() {
                    return Err(ConfigError::BadSnr(g));
                }
                g * noise_var
            }
            SignalLevel::SnrDb(db) => {
                // -inf dB is a legitimate "no signal" request.
                if db.is_nan() || db == f64::INFINITY {
                    return Err(ConfigError::BadSnr(db));
                }
                db_to_linear(db) * noise_var
            }
        };
        if !(signal_var >= 0.0 && signal_var.is_finite()) {
            return Err(ConfigError::NegativeSignal(signal_var));
        }

        Ok(SensingConfig {
            n_subbands,
            subband_bandwidth,
            m_occupied,
            avg_captures,
            noise_var,
            signal_var,
            quantizer: self.quantizer.unwrap_or(Quantizer::None),
            rssi_mode: self.rssi_mode.unwrap_or(RssiMode::Ideal),
            signal_model: self.signal_model.unwrap_or(SignalModel::Cscg),
            leakage_alpha,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_experiment_is_accepted() {
        let cfg = SensingConfig::builder()
            .n_subbands(1024)
            .m_occupied(100)
            .avg_captures(8)
            .snr_db(0.0)
            .build()
            .unwrap();
        assert_eq!(cfg.n_subbands(), 1024);
        assert_eq!(cfg.m_occupied(), 100);
        assert_eq!(cfg.avg_captures(), 8);
    }

    #[test]
    fn zero_db_means_equal_variances() {
        let cfg = SensingConfig::builder().noise_var(2.5).snr_db(0.0).build().unwrap();
        assert_eq!(cfg.signal_var(), cfg.noise_var());
        assert_eq!(cfg.snr(), 1.0);
    }

    #[test]
    fn each_violation_has_its_own_diagnostic() {
        let b = SensingConfig::builder;
        assert_eq!(
            b().n_subbands(16).m_occupied(16).build(),
            Err(ConfigError::TooManyOccupied { m: 16, n: 16 })
        );
        assert_eq!(b().avg_captures(0).build(), Err(ConfigError::NoCaptures));
        assert_eq!(b().noise_var(0.0).build(), Err(ConfigError::NonPositiveNoise(0.0)));
        assert_eq!(b().noise_var(-1.0).build(), Err(ConfigError::NonPositiveNoise(-1.0)));
        assert_eq!(b().signal_var(-0.5).build(), Err(ConfigError::NegativeSignal(-0.5)));
        assert_eq!(b().n_subbands(0).m_occupied(0).build(), Err(ConfigError::NoSubbands));
        assert_eq!(b().leakage_alpha(0.0).build(), Err(ConfigError::AlphaOutOfRange(0.0)));
        assert_eq!(b().leakage_alpha(1.5).build(), Err(ConfigError::AlphaOutOfRange(1.5)));
        assert_eq!(
            b().subband_bandwidth(0.0).build(),
            Err(ConfigError::NonPositiveBandwidth(0.0))
        );
        assert!(matches!(
            b().n_subbands(8).m_occupied(1).subband_bandwidth(1.0).sample_rate(9.0).build(),
            Err(ConfigError::SampleRateMismatch { .. })
        ));
        assert!(matches!(b().snr_db(f64::NAN).build(), Err(ConfigError::BadSnr(_))));
    }

    #[test]
    fn sample_rate_is_exact_product() {
        let cfg = SensingConfig::builder()
            .n_subbands(1024)
            .subband_bandwidth(1.0e6)
            .sample_rate(1.024e9)
            .build()
            .unwrap();
        assert_eq!(cfg.sample_rate(), 1024.0 * 1.0e6);
    }

    #[test]
    fn no_signal_from_minus_infinity_db() {
        let cfg = SensingConfig::builder().snr_db(f64::NEG_INFINITY).build().unwrap();
        assert_eq!(cfg.signal_var(), 0.0);
    }

    #[test]
    fn kv_file_parses_and_merges() {
        let text = "# scenario\nn_subbands = 256\nm_occupied=20\navg_captures=4\n\
                    snr_db=3\nquantizer=one-bit\nrssi_mode=estimated\nsignal_model=qam4\n";
        let file = SensingConfigBuilder::parse_kv(text).unwrap();
        let cfg = SensingConfig::builder().avg_captures(16).merge(&file).build().unwrap();
        assert_eq!(cfg.n_subbands(), 256);
        assert_eq!(cfg.avg_captures(), 4);
        assert_eq!(cfg.quantizer(), Quantizer::OneBit);
        assert_eq!(cfg.rssi_mode(), RssiMode::Estimated);
        assert_eq!(cfg.signal_model(), SignalModel::Qam4BlockFading);
        assert!(rel(cfg.snr(), db_to_linear(3.0)) < 1e-12);

        let flags = SensingConfig::builder().m_occupied(10);
        let cfg = file.merge(&flags).build().unwrap();
        assert_eq!(cfg.m_occupied(), 10);
    }

    #[test]
    fn kv_errors() {
        assert!(matches!(
            SensingConfigBuilder::parse_kv("bogus=1"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(
            SensingConfigBuilder::parse_kv("n_subbands 12"),
            Err(ConfigError::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            SensingConfigBuilder::parse_kv("quantizer=two-bit"),
            Err(ConfigError::BadValue { .. })
        ));
    }

    #[test]
    fn round_trip_through_builder() {
        let cfg = SensingConfig::builder().snr_db(-3.0).quantizer(Quantizer::OneBit).build().unwrap();
        assert_eq!(cfg.to_builder().build().unwrap(), cfg);
    }

    proptest! {
        #[test]
        fn db_round_trip(db in -80.0f64..80.0) {
            let back = linear_to_db(db_to_linear(db));
            prop_assert!((back - db).abs() <= 1e-12 * db.abs().max(1.0));
            let lin = db_to_linear(db);
            prop_assert!(rel(db_to_linear(linear_to_db(lin)), lin) < 1e-12);
        }

        #[test]
        fn snr_matches_variance_ratio(noise in 1e-3f64..1e3, db in -30.0f64..30.0) {
            let cfg = SensingConfig::builder().noise_var(noise).snr_db(db).build().unwrap();
            prop_assert!(rel(cfg.snr(), cfg.signal_var() / cfg.noise_var()) < 1e-12);
            prop_assert!(rel(cfg.snr(), db_to_linear(db)) < 1e-12);
        }
    }
}
