//! Grid runners behind the subcommands. Grid points are dispatched to
//! the worker pool and collected back in grid order; failures surface
//! the first offending point by its dB value.

use egkcap::capacity::{aux_closed_form, ergodic_capacity_inid, AuxEvaluator, CombinerSpec};
use egkcap::egk::{egk_generalized_mgf, egk_generalized_mgf_derivative};
use egkcap::mc::{simulate_capacity, SimulationPlan};
use rayon::prelude::*;

use crate::config::{db_to_linear, FadingSpec, GridSpec, ResolvedConfig};
use crate::output::{AuxRow, CapacityRow, MgfRow, SimulateRow};
use crate::CliError;

/// Per-row seed: rows get decorrelated substreams while the row order
/// stays irrelevant to any single row's draw.
fn row_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn first_error<T>(results: Vec<Result<T, (f64, egkcap::Error)>>) -> Result<Vec<T>, CliError> {
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err((db, e)) => {
                return Err(CliError::Numerical(format!("grid point snr_db={db}: {e}")))
            }
        }
    }
    Ok(rows)
}

pub fn capacity_rows(cfg: &ResolvedConfig) -> Result<Vec<CapacityRow>, CliError> {
    let points = cfg.grid.points();
    let results: Vec<Result<CapacityRow, (f64, egkcap::Error)>> = points
        .par_iter()
        .enumerate()
        .map(|(index, &db)| {
            let branches = cfg.branches_at(db_to_linear(db)).map_err(|e| (db, e))?;
            let cap =
                ergodic_capacity_inid(&branches, &cfg.combiner, cfg.bandwidth, &cfg.quadrature)
                    .map_err(|e| (db, e))?;
            let mut row = CapacityRow {
                snr_db: db,
                capacity_bits_per_hz: cap.capacity_bits_per_hz,
                // Reported per unit bandwidth, like the capacity column.
                error_estimate: cap.error_estimate / cfg.bandwidth,
                mc_estimate: None,
                mc_ci95_low: None,
                mc_ci95_high: None,
                abs_diff: None,
            };
            if cfg.monte_carlo.enabled {
                let plan = SimulationPlan::new(branches, cfg.combiner.scheme)
                    .with_samples(cfg.monte_carlo.samples)
                    .with_seed(row_seed(cfg.monte_carlo.seed, index));
                let est = simulate_capacity(&plan).map_err(|e| (db, e))?;
                let (lo, hi) = est.ci95();
                row.mc_estimate = Some(est.mean);
                row.mc_ci95_low = Some(lo);
                row.mc_ci95_high = Some(hi);
                row.abs_diff = Some((row.capacity_bits_per_hz - est.mean).abs());
            }
            Ok(row)
        })
        .collect();
    first_error(results)
}

pub fn simulate_rows(cfg: &ResolvedConfig) -> Result<Vec<SimulateRow>, CliError> {
    let points = cfg.grid.points();
    let results: Vec<Result<SimulateRow, (f64, egkcap::Error)>> = points
        .par_iter()
        .enumerate()
        .map(|(index, &db)| {
            let branches = cfg.branches_at(db_to_linear(db)).map_err(|e| (db, e))?;
            let plan = SimulationPlan::new(branches, cfg.combiner.scheme)
                .with_samples(cfg.monte_carlo.samples)
                .with_seed(row_seed(cfg.monte_carlo.seed, index));
            let est = simulate_capacity(&plan).map_err(|e| (db, e))?;
            let (lo, hi) = est.ci95();
            Ok(SimulateRow {
                snr_db: db,
                mc_estimate: est.mean,
                mc_std_error: est.std_error,
                mc_ci95_low: lo,
                mc_ci95_high: hi,
                samples: est.samples,
            })
        })
        .collect();
    first_error(results)
}

/// Kernel table: the engine route in every row so the closed-form
/// column, where one exists for the combiner's order, is a genuine
/// cross-check rather than an echo.
pub fn aux_rows(combiner: &CombinerSpec, s_values: &[f64]) -> Result<Vec<AuxRow>, CliError> {
    let params = combiner
        .params()
        .map_err(|e| CliError::Config(format!("{e}")))?;
    let span = s_values
        .iter()
        .map(|s| s.ln().abs())
        .fold(4.0, f64::max);
    let general = AuxEvaluator::general(params.eta, params.q, combiner.branch_count, span)
        .map_err(|e| CliError::Numerical(format!("kernel construction: {e}")))?;
    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let value = general
            .eval(s)
            .map_err(|e| CliError::Numerical(format!("kernel at s={s}: {e}")))?
            .0;
        let closed = aux_closed_form(params.eta, params.q, combiner.branch_count, s)
            .map_err(|e| CliError::Numerical(format!("closed form at s={s}: {e}")))?;
        rows.push(AuxRow {
            s,
            aux_general: value,
            aux_closed_form: closed,
            abs_diff: closed.map(|c| (value - c).abs()),
        });
    }
    Ok(rows)
}

pub fn mgf_rows(
    fading: &FadingSpec,
    grid: &GridSpec,
    power: f64,
    s_values: &[f64],
) -> Result<Vec<MgfRow>, CliError> {
    let mut rows = Vec::with_capacity(grid.points().len() * s_values.len());
    for db in grid.points() {
        let params = fading
            .at_mean_snr(db_to_linear(db))
            .map_err(|e| CliError::Config(format!("fading: {e}")))?;
        for &s in s_values {
            let fail = |e: egkcap::Error| {
                CliError::Numerical(format!("snr_db={db} power={power} s={s}: {e}"))
            };
            rows.push(MgfRow {
                snr_db: db,
                power,
                s,
                mgf: egk_generalized_mgf(&params, power, s).map_err(fail)?,
                mgf_derivative: egk_generalized_mgf_derivative(&params, power, s)
                    .map_err(fail)?,
            });
        }
    }
    Ok(rows)
}
