//! Run configuration: JSON document, flag overlay, and resolution into
//! the typed pieces the runners consume.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use egkcap::capacity::{CombinerSpec, QuadMapping, QuadratureSpec, Scheme};
use egkcap::egk::{named_special_case, EgkParams, NamedCase};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Mean-SNR grid in dB. `start <= stop`, `step > 0`; a single point is
/// `start == stop`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn single(value: f64) -> Self {
        GridSpec {
            start: value,
            stop: value,
            step: 1.0,
        }
    }

    pub fn check(&self) -> Result<(), String> {
        for (name, v) in [("start", self.start), ("stop", self.stop), ("step", self.step)] {
            if !v.is_finite() {
                return Err(format!("snr_db.{name} must be finite, got {v}"));
            }
        }
        if self.start > self.stop {
            return Err(format!(
                "snr_db.start {} exceeds snr_db.stop {}",
                self.start, self.stop
            ));
        }
        if self.step <= 0.0 {
            return Err(format!("snr_db.step must be positive, got {}", self.step));
        }
        Ok(())
    }

    /// Grid points, stop-inclusive up to a half-step tolerance against
    /// accumulated rounding.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    /// Accepts `start:stop:step` or a single dB value.
    fn from_str(text: &str) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |part: &str, name: &str| -> Result<f64, String> {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("snr_db {name} {part:?} is not a number"))
        };
        match parts.as_slice() {
            [single] => Ok(GridSpec::single(num(single, "value")?)),
            [start, stop, step] => Ok(GridSpec {
                start: num(start, "start")?,
                stop: num(stop, "stop")?,
                step: num(step, "step")?,
            }),
            _ => Err(format!(
                "snr_db {text:?} must be a single value or start:stop:step"
            )),
        }
    }
}

/// One branch's fading description: a named scenario or raw parameters.
/// The mean SNR is supplied separately by the grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingSpec {
    Named(NamedCase),
    Raw { m: f64, xi: f64, m_s: f64, xi_s: f64 },
}

impl FadingSpec {
    pub fn at_mean_snr(&self, mean_snr: f64) -> egkcap::Result<EgkParams> {
        match *self {
            FadingSpec::Named(case) => named_special_case(case, mean_snr),
            FadingSpec::Raw { m, xi, m_s, xi_s } => {
                EgkParams::new(m, xi, m_s, xi_s, mean_snr)
            }
        }
    }
}

fn numbers_in_parens(inner: &str, label: &str, want: usize) -> Result<Vec<f64>, String> {
    let values: Result<Vec<f64>, String> = inner
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("{label}: {part:?} is not a number"))
        })
        .collect();
    let values = values?;
    if values.len() != want {
        return Err(format!(
            "{label} takes {want} argument(s), got {}",
            values.len()
        ));
    }
    Ok(values)
}

impl FromStr for FadingSpec {
    type Err = String;

    /// Grammar: `rayleigh`, `nakagami_m(M)`, `generalized_nakagami(M,XI)`,
    /// `generalized_k(M,MS)`, `egk(M,XI,MS,XIS)`, or a raw key=value list
    /// `m=..,xi=..,m_s=..,xi_s=..`.
    fn from_str(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if text.contains('=') {
            let mut m = None;
            let mut xi = None;
            let mut m_s = None;
            let mut xi_s = None;
            for pair in text.split(',') {
                let (key, value) = pair
                    .split_once('=')
                    .ok_or_else(|| format!("fading entry {pair:?} is not key=value"))?;
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| format!("fading {key}: {value:?} is not a number"))?;
                let slot = match key.trim() {
                    "m" => &mut m,
                    "xi" => &mut xi,
                    "m_s" => &mut m_s,
                    "xi_s" => &mut xi_s,
                    other => return Err(format!("unknown fading key {other:?}")),
                };
                if slot.replace(value).is_some() {
                    return Err(format!("fading key {} given twice", key.trim()));
                }
            }
            let get = |slot: Option<f64>, name: &str| {
                slot.ok_or_else(|| format!("fading is missing key {name}"))
            };
            return Ok(FadingSpec::Raw {
                m: get(m, "m")?,
                xi: get(xi, "xi")?,
                m_s: get(m_s, "m_s")?,
                xi_s: get(xi_s, "xi_s")?,
            });
        }
        let (name, args) = match text.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| format!("fading {text:?} is missing a closing parenthesis"))?;
                (name.trim(), Some(inner))
            }
            None => (text, None),
        };
        match (name.to_ascii_lowercase().as_str(), args) {
            ("rayleigh", None) => Ok(FadingSpec::Named(NamedCase::Rayleigh)),
            ("nakagami_m", Some(inner)) => {
                let v = numbers_in_parens(inner, "nakagami_m", 1)?;
                Ok(FadingSpec::Named(NamedCase::NakagamiM { m: v[0] }))
            }
            ("generalized_nakagami", Some(inner)) => {
                let v = numbers_in_parens(inner, "generalized_nakagami", 2)?;
                Ok(FadingSpec::Named(NamedCase::GeneralizedNakagami {
                    m: v[0],
                    xi: v[1],
                }))
            }
            ("generalized_k", Some(inner)) => {
                let v = numbers_in_parens(inner, "generalized_k", 2)?;
                Ok(FadingSpec::Named(NamedCase::GeneralizedK {
                    m: v[0],
                    m_s: v[1],
                }))
            }
            ("egk", Some(inner)) => {
                let v = numbers_in_parens(inner, "egk", 4)?;
                Ok(FadingSpec::Named(NamedCase::Egk {
                    m: v[0],
                    xi: v[1],
                    m_s: v[2],
                    xi_s: v[3],
                }))
            }
            _ => Err(format!(
                "unknown fading {text:?}; expected rayleigh, nakagami_m(m), \
                 generalized_nakagami(m,xi), generalized_k(m,m_s), \
                 egk(m,xi,m_s,xi_s), or m=..,xi=..,m_s=..,xi_s=.."
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(text: &str) -> Result<Self, String> {
        match text.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("format must be csv or json, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub enabled: bool,
    pub samples: u64,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            enabled: false,
            samples: 200_000,
            seed: 1,
        }
    }
}

fn default_bandwidth() -> f64 {
    1.0
}
fn default_nodes() -> usize {
    QuadratureSpec::default().node_count
}
fn default_tolerance() -> f64 {
    QuadratureSpec::default().tolerance
}

/// The full run description. A JSON config file deserializes into this;
/// command-line flags overwrite individual fields afterwards.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: String,
    pub branches: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate_order: Option<u32>,
    /// One descriptor per branch, or a single descriptor applied to all.
    pub fading: Vec<String>,
    pub snr_db: GridSpec,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub monte_carlo: McConfig,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config file: {e}")))
    }

    pub fn resolve(&self) -> Result<ResolvedConfig, CliError> {
        let err = CliError::Config;
        let scheme: Scheme = self
            .scheme
            .parse()
            .map_err(|e: egkcap::Error| err(format!("scheme: {e}")))?;
        if self.branches == 0 {
            return Err(err("branches must be at least 1".into()));
        }
        let mut combiner = CombinerSpec::new(scheme, self.branches);
        combiner.surrogate_order = self.surrogate_order;
        combiner
            .params()
            .map_err(|e| err(format!("surrogate_order: {e}")))?;
        if self.fading.is_empty() {
            return Err(err("fading needs at least one descriptor".into()));
        }
        if self.fading.len() != 1 && self.fading.len() != self.branches {
            return Err(err(format!(
                "fading lists {} descriptors for {} branches; give one shared \
                 descriptor or one per branch",
                self.fading.len(),
                self.branches
            )));
        }
        let mut fadings = Vec::with_capacity(self.branches);
        for (index, text) in self.fading.iter().enumerate() {
            let spec: FadingSpec = text
                .parse()
                .map_err(|e| err(format!("fading[{index}]: {e}")))?;
            // Instantiation checks parameter positivity once, up front.
            spec.at_mean_snr(1.0)
                .map_err(|e| err(format!("fading[{index}]: {e}")))?;
            fadings.push(spec);
        }
        if fadings.len() == 1 {
            fadings = vec![fadings[0]; self.branches];
        }
        self.snr_db.check().map_err(err)?;
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(err(format!(
                "bandwidth must be positive and finite, got {}",
                self.bandwidth
            )));
        }
        let quadrature = QuadratureSpec {
            node_count: self.nodes,
            mapping: QuadMapping::Auto,
            tolerance: self.tolerance,
        };
        quadrature.check().map_err(|e| err(format!("{e}")))?;
        if self.monte_carlo.enabled && self.monte_carlo.samples < 2 {
            return Err(err(format!(
                "monte_carlo.samples must be at least 2, got {}",
                self.monte_carlo.samples
            )));
        }
        Ok(ResolvedConfig {
            combiner,
            fadings,
            grid: self.snr_db,
            bandwidth: self.bandwidth,
            quadrature,
            monte_carlo: self.monte_carlo,
            format: self.format,
            output: self.output.as_ref().map(PathBuf::from),
        })
    }
}

/// Validated, typed view of a RunConfig.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub combiner: CombinerSpec,
    pub fadings: Vec<FadingSpec>,
    pub grid: GridSpec,
    pub bandwidth: f64,
    pub quadrature: QuadratureSpec,
    pub monte_carlo: McConfig,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
}

impl ResolvedConfig {
    /// Branch parameter sets at one grid point's mean SNR.
    pub fn branches_at(&self, mean_snr: f64) -> egkcap::Result<Vec<EgkParams>> {
        self.fadings
            .iter()
            .map(|f| f.at_mean_snr(mean_snr))
            .collect()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
