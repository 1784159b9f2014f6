//! Strict TOML run configuration. Unknown keys are fatal and every range
//! violation is reported with the offending field by name, because a silent
//! typo in alpha or r changes which regime a run is probing.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Deserializer, IntoDeserializer, MapAccess, Visitor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Command {
    /// Time-step the equation and monitor the blow-up criterion.
    Simulate,
    /// Run the contraction-mapping construction of the mild solution.
    Picard,
    /// Certify the global decay inequality for small data.
    CertifySmallData,
    /// Fuzz the interpolation and product inequalities over random fields.
    VerifyLemmas,
    /// Check exact criticality of the norm under the scaling symmetry.
    ScalingCheck,
    /// Evolve a perturbed pair and check the difference envelope.
    Perturb,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Picard => "picard",
            Command::CertifySmallData => "certify-small-data",
            Command::VerifyLemmas => "verify-lemmas",
            Command::ScalingCheck => "scaling-check",
            Command::Perturb => "perturb",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    SingleMode,
    RandomBand,
    GaussianVortexPair,
    Shear,
}

/// Initial-data recipe. In the config file either a bare kind string
/// (`init = "single_mode"`) or a table with per-kind fields; unused fields
/// keep their defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitSpec {
    pub kind: InitKind,
    pub amplitude: f64,
    /// Mode excited by single_mode.
    pub wavevector: (i64, i64),
    /// Physical shell bounds for random_band; the band is additionally
    /// clipped to the dealiased cutoff.
    pub band_lo: f64,
    pub band_hi: f64,
    /// When set, the generated field is rescaled so its critical norm hits
    /// this value exactly.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_norm: Option<f64>,
}

impl InitSpec {
    pub fn of_kind(kind: InitKind) -> Self {
        InitSpec {
            kind,
            amplitude: 1.0,
            wavevector: (1, 0),
            band_lo: 0.0,
            band_hi: f64::INFINITY,
            target_norm: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InitTable {
    kind: InitKind,
    amplitude: Option<f64>,
    wavevector: Option<(i64, i64)>,
    band_lo: Option<f64>,
    band_hi: Option<f64>,
    target_norm: Option<f64>,
}

impl From<InitTable> for InitSpec {
    fn from(t: InitTable) -> InitSpec {
        let mut spec = InitSpec::of_kind(t.kind);
        if let Some(v) = t.amplitude {
            spec.amplitude = v;
        }
        if let Some(v) = t.wavevector {
            spec.wavevector = v;
        }
        if let Some(v) = t.band_lo {
            spec.band_lo = v;
        }
        if let Some(v) = t.band_hi {
            spec.band_hi = v;
        }
        spec.target_norm = t.target_norm;
        spec
    }
}

impl<'de> Deserialize<'de> for InitSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<InitSpec, D::Error> {
        struct InitVisitor;

        impl<'de> Visitor<'de> for InitVisitor {
            type Value = InitSpec;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an init kind string or an init table")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<InitSpec, E> {
                let kind = InitKind::deserialize(s.into_deserializer())?;
                Ok(InitSpec::of_kind(kind))
            }

            fn visit_map<A: MapAccess<'de>>(self, map: A) -> Result<InitSpec, A::Error> {
                let table = InitTable::deserialize(de::value::MapAccessDeserializer::new(map))?;
                Ok(table.into())
            }
        }

        d.deserialize_any(InitVisitor)
    }
}

fn d_alpha() -> f64 {
    0.75
}
fn d_n() -> usize {
    128
}
fn d_period() -> f64 {
    std::f64::consts::TAU
}
fn d_t_end() -> f64 {
    5.0
}
fn d_r() -> f64 {
    0.04
}
fn d_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn d_record_every() -> usize {
    10
}
fn d_steps() -> usize {
    64
}
fn d_max_iter() -> usize {
    50
}
fn d_tol() -> f64 {
    1e-9
}
fn d_trials() -> usize {
    1000
}
fn d_lambda() -> u32 {
    2
}
fn d_delta_ratio() -> f64 {
    1e-3
}

/// One experiment, fully resolved. `dt = None` means the diffusive default
/// for the grid; the runner fills it in before echoing the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_n")]
    pub n: usize,
    #[serde(rename = "L", default = "d_period")]
    pub period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "d_t_end")]
    pub t_end: f64,
    #[serde(default = "d_r")]
    pub r: f64,
    #[serde(default)]
    pub seed: u64,
    pub init: InitSpec,
    #[serde(default = "d_out_dir")]
    pub out_dir: PathBuf,
    /// Steps between trace samples (simulate-family commands).
    #[serde(default = "d_record_every")]
    pub record_every: usize,
    /// Disable the nonlinear term; simulate then reproduces the heat flow.
    #[serde(default)]
    pub linear_only: bool,
    /// Time nodes of the contraction solve.
    #[serde(default = "d_steps")]
    pub steps: usize,
    #[serde(default = "d_max_iter")]
    pub max_iter: usize,
    #[serde(default = "d_tol")]
    pub tol: f64,
    /// Seeds fuzzed by verify-lemmas.
    #[serde(default = "d_trials")]
    pub trials: usize,
    /// Scaling factor checked by scaling-check.
    #[serde(default = "d_lambda")]
    pub lambda: u32,
    /// Perturbation size relative to the data norm; zero asks for the
    /// bitwise-identity check.
    #[serde(default = "d_delta_ratio")]
    pub delta_ratio: f64,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |msg: String| Err(ConfigError(msg));
        if !(self.alpha > 0.5 && self.alpha <= 1.0) {
            return err(format!(
                "alpha must satisfy 1/2 < alpha <= 1, got {}",
                self.alpha
            ));
        }
        if !(self.r > 0.0 && self.r < 0.05) {
            return err(format!("r must satisfy 0 < r < 1/20, got {}", self.r));
        }
        if self.n < 4 || self.n % 2 != 0 {
            return err(format!(
                "n must be an even number of at least 4, got {}",
                self.n
            ));
        }
        if !(self.period > 0.0) || !self.period.is_finite() {
            return err(format!(
                "L must be positive and finite, got {}",
                self.period
            ));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return err(format!("dt must be positive and finite, got {dt}"));
            }
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return err(format!(
                "t_end must be positive and finite, got {}",
                self.t_end
            ));
        }
        if self.record_every == 0 {
            return err("record_every must be at least 1".to_string());
        }
        if self.steps == 0 {
            return err("steps must be at least 1".to_string());
        }
        if self.max_iter == 0 {
            return err("max_iter must be at least 1".to_string());
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return err(format!("tol must be positive and finite, got {}", self.tol));
        }
        if self.trials == 0 {
            return err("trials must be at least 1".to_string());
        }
        if self.lambda == 0 {
            return err("lambda must be a positive integer".to_string());
        }
        if !(self.delta_ratio >= 0.0 && self.delta_ratio <= 1e-3) {
            return err(format!(
                "delta_ratio must satisfy 0 <= delta_ratio <= 1e-3, got {}",
                self.delta_ratio
            ));
        }
        if !self.init.amplitude.is_finite() {
            return err(format!(
                "init.amplitude must be finite, got {}",
                self.init.amplitude
            ));
        }
        if !(self.init.band_lo >= 0.0) {
            return err(format!(
                "init.band_lo must be nonnegative, got {}",
                self.init.band_lo
            ));
        }
        if self.init.band_hi < self.init.band_lo {
            return err(format!(
                "init.band_hi must be at least band_lo, got {} < {}",
                self.init.band_hi, self.init.band_lo
            ));
        }
        if let Some(t) = self.init.target_norm {
            if !(t >= 0.0) || !t.is_finite() {
                return err(format!(
                    "init.target_norm must be nonnegative and finite, got {t}"
                ));
            }
        }
        Ok(())
    }
}

/// Parse and validate a config document. Rejects unknown keys.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
    config.validate()?;
    Ok(config)
}
