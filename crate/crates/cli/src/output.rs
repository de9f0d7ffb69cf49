//! Table rendering. CSV and JSON are both emitted deterministically:
//! fixed column order, LF line endings, shortest round-trip floats with
//! a dot decimal separator regardless of locale.

use serde::Serialize;

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

/// Plain float column: shortest decimal form that parses back exactly.
fn num(x: f64) -> String {
    format!("{x}")
}

/// Magnitude column: scientific form keeps tiny estimates readable.
fn mag(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CapacityRow {
    pub snr_db: f64,
    pub capacity_bits_per_hz: f64,
    pub error_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_ci95_low: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_ci95_high: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_diff: Option<f64>,
}

impl CapacityRow {
    fn outside_ci(&self) -> bool {
        match (self.mc_ci95_low, self.mc_ci95_high) {
            (Some(lo), Some(hi)) => {
                self.capacity_bits_per_hz < lo || self.capacity_bits_per_hz > hi
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CapacitySummary {
    pub rows: usize,
    pub outside_ci95: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CapacityDocument {
    pub config: RunConfig,
    pub rows: Vec<CapacityRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<CapacitySummary>,
}

impl CapacityDocument {
    pub fn new(config: RunConfig, rows: Vec<CapacityRow>) -> Self {
        let mc_present = rows.iter().any(|r| r.mc_estimate.is_some());
        let summary = mc_present.then(|| CapacitySummary {
            rows: rows.len(),
            outside_ci95: rows.iter().filter(|r| r.outside_ci()).count(),
        });
        CapacityDocument {
            config,
            rows,
            summary,
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from(
                    "snr_db,capacity_bits_per_hz,error_estimate,mc_estimate,\
                     mc_ci95_low,mc_ci95_high,abs_diff\n",
                );
                let opt = |v: Option<f64>, f: fn(f64) -> String| {
                    v.map(f).unwrap_or_default()
                };
                for r in &self.rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        num(r.snr_db),
                        num(r.capacity_bits_per_hz),
                        mag(r.error_estimate),
                        opt(r.mc_estimate, num),
                        opt(r.mc_ci95_low, num),
                        opt(r.mc_ci95_high, num),
                        opt(r.abs_diff, mag),
                    ));
                }
                if let Some(s) = &self.summary {
                    out.push_str(&format!(
                        "# analytic value outside mc_ci95 in {} of {} rows\n",
                        s.outside_ci95, s.rows
                    ));
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AuxRow {
    pub s: f64,
    pub aux_general: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aux_closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_diff: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuxDocument {
    pub scheme: String,
    pub branches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surrogate_order: Option<u32>,
    pub rows: Vec<AuxRow>,
}

impl AuxDocument {
    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from("s,aux_general,aux_closed_form,abs_diff\n");
                for r in &self.rows {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        num(r.s),
                        num(r.aux_general),
                        r.aux_closed_form.map(num).unwrap_or_default(),
                        r.abs_diff.map(mag).unwrap_or_default(),
                    ));
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MgfRow {
    pub snr_db: f64,
    pub power: f64,
    pub s: f64,
    pub mgf: f64,
    pub mgf_derivative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MgfDocument {
    pub fading: String,
    pub rows: Vec<MgfRow>,
}

impl MgfDocument {
    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from("snr_db,power,s,mgf,mgf_derivative\n");
                for r in &self.rows {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        num(r.snr_db),
                        num(r.power),
                        num(r.s),
                        num(r.mgf),
                        num(r.mgf_derivative),
                    ));
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateRow {
    pub snr_db: f64,
    pub mc_estimate: f64,
    pub mc_std_error: f64,
    pub mc_ci95_low: f64,
    pub mc_ci95_high: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateDocument {
    pub config: RunConfig,
    pub rows: Vec<SimulateRow>,
}

impl SimulateDocument {
    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => {
                let mut out = String::from(
                    "snr_db,mc_estimate,mc_std_error,mc_ci95_low,mc_ci95_high,samples\n",
                );
                for r in &self.rows {
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        num(r.snr_db),
                        num(r.mc_estimate),
                        mag(r.mc_std_error),
                        num(r.mc_ci95_low),
                        num(r.mc_ci95_high),
                        r.samples,
                    ));
                }
                Ok(out)
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("serialization: {e}")))?;
    text.push('\n');
    Ok(text)
}
