//! Monte-Carlo oracle for ergodic capacity.
//!
//! Draws per-branch EGK SNRs, combines them with the exact nonlinear rule
//! of each scheme (true max, min, product, harmonic form), and averages
//! W log2(1 + gamma_end). Shares nothing with the transform machinery, so
//! the two routes check each other.

use crate::capacity::{CombinerSpec, Scheme};
use crate::egk::{EgkParams, EgkSampler};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::LN_2;

/// Sampling request: branch fading, the exact combiner, and draw count.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub branches: Vec<EgkParams>,
    pub scheme: Scheme,
    pub sample_count: u64,
    pub seed: u64,
    pub bandwidth: f64,
}

impl SimulationPlan {
    pub fn new(branches: Vec<EgkParams>, scheme: Scheme) -> Self {
        SimulationPlan {
            branches,
            scheme,
            sample_count: 200_000,
            seed: 1,
            bandwidth: 1.0,
        }
    }

    pub fn with_samples(mut self, sample_count: u64) -> Self {
        self.sample_count = sample_count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<()> {
        if self.branches.is_empty() {
            return Err(Error::InvalidParams(
                "simulation needs at least one branch".into(),
            ));
        }
        if self.sample_count < 1_000 {
            return Err(Error::InvalidParams(format!(
                "sample count {} is below the minimum of 1000",
                self.sample_count
            )));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth > 0.0) {
            return Err(Error::InvalidParams(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }
}

/// Sample-mean estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl McEstimate {
    /// Central 95% interval under the normal approximation.
    pub fn ci95(&self) -> (f64, f64) {
        (
            self.mean - 1.96 * self.std_error,
            self.mean + 1.96 * self.std_error,
        )
    }

    fn from_moments(sum: f64, sum_sq: f64, n: u64, scale: f64) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = ((sum_sq - sum * sum / nf) / (nf - 1.0)).max(0.0);
        McEstimate {
            mean: scale * mean,
            std_error: scale * (var / nf).sqrt(),
            samples: n,
        }
    }
}

/// Exact combiner vs finite power-mean surrogate on one common sample
/// stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasReport {
    pub exact: McEstimate,
    pub surrogate: McEstimate,
    pub abs_gap: f64,
    pub rel_gap: f64,
}

fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Each sample owns the substream keyed by (seed, index), so estimates
/// cannot depend on how samples are partitioned across workers.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(mix64(seed) ^ index))
}

/// Exact per-sample combining rules, not the power-mean surrogates.
pub fn combine_snr(scheme: Scheme, snrs: &[f64]) -> Result<f64> {
    if snrs.is_empty() {
        return Err(Error::InvalidParams(
            "need at least one branch SNR to combine".into(),
        ));
    }
    if let Some(bad) = snrs.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
        return Err(Error::Domain(format!(
            "branch SNRs must be positive and finite, got {bad}"
        )));
    }
    Ok(combine_positive(scheme, snrs))
}

fn combine_positive(scheme: Scheme, snrs: &[f64]) -> f64 {
    let l = snrs.len() as f64;
    match scheme {
        Scheme::Mrc => snrs.iter().sum(),
        Scheme::Egc => snrs.iter().map(|g| g.sqrt()).sum::<f64>().powi(2) / l,
        Scheme::Sc => snrs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
        Scheme::Rmsc => snrs.iter().map(|g| g * g).sum::<f64>().sqrt(),
        Scheme::Cascaded => snrs.iter().product(),
        Scheme::GeometricMean => (snrs.iter().map(|g| g.ln()).sum::<f64>() / l).exp(),
        Scheme::AfMultihop => 1.0 / snrs.iter().map(|g| 1.0 / g).sum::<f64>(),
        Scheme::MinBound => snrs.iter().fold(f64::INFINITY, |a, &b| a.min(b)),
    }
}

const BLOCK: u64 = 4096;

/// Pairwise reduction whose shape depends only on the block count, so the
/// rounded total is independent of thread scheduling.
fn tree_fold<const N: usize>(parts: &[[f64; N]]) -> [f64; N] {
    match parts.len() {
        0 => [0.0; N],
        1 => parts[0],
        n => {
            let (a, b) = parts.split_at(n / 2);
            let (x, y) = (tree_fold(a), tree_fold(b));
            std::array::from_fn(|i| x[i] + y[i])
        }
    }
}

fn fold_samples<const N: usize>(
    plan: &SimulationPlan,
    per_sample: impl Fn(&mut ChaCha8Rng) -> [f64; N] + Sync,
) -> [f64; N] {
    let blocks = plan.sample_count.div_ceil(BLOCK);
    let parts: Vec<[f64; N]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(plan.sample_count);
            let mut acc = [0.0; N];
            for i in lo..hi {
                let mut rng = sample_rng(plan.seed, i);
                let v = per_sample(&mut rng);
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
            }
            acc
        })
        .collect();
    tree_fold(&parts)
}

/// Mean of W log2(1 + gamma_end) over the plan's sample stream.
pub fn simulate_capacity(plan: &SimulationPlan) -> Result<McEstimate> {
    plan.check()?;
    let samplers = plan
        .branches
        .iter()
        .map(EgkSampler::new)
        .collect::<Result<Vec<_>>>()?;
    let scheme = plan.scheme;
    let [sum, sum_sq] = fold_samples(plan, |rng| {
        let snrs: Vec<f64> = samplers.iter().map(|s| s.sample(rng)).collect();
        let c = combine_positive(scheme, &snrs).ln_1p() / LN_2;
        [c, c * c]
    });
    Ok(McEstimate::from_moments(
        sum,
        sum_sq,
        plan.sample_count,
        plan.bandwidth,
    ))
}

/// Exact combiner vs the (eta, p, q) power-mean surrogate of a limit
/// scheme, both capacities estimated from the same draws.
pub fn simulate_surrogate_bias(plan: &SimulationPlan, spec: &CombinerSpec) -> Result<BiasReport> {
    plan.check()?;
    if !spec.scheme.uses_surrogate_order() {
        return Err(Error::InvalidParams(format!(
            "{} is exact; surrogate bias applies only to the limit schemes",
            spec.scheme
        )));
    }
    if spec.scheme != plan.scheme {
        return Err(Error::InvalidParams(format!(
            "plan simulates {} but the surrogate describes {}",
            plan.scheme, spec.scheme
        )));
    }
    if spec.branch_count != plan.branches.len() {
        return Err(Error::InvalidParams(format!(
            "surrogate declares {} branches but the plan carries {}",
            spec.branch_count,
            plan.branches.len()
        )));
    }
    let params = spec.params()?;
    let samplers = plan
        .branches
        .iter()
        .map(EgkSampler::new)
        .collect::<Result<Vec<_>>>()?;
    let scheme = plan.scheme;
    let [se, se2, ss, ss2] = fold_samples(plan, |rng| {
        let snrs: Vec<f64> = samplers.iter().map(|s| s.sample(rng)).collect();
        let ce = combine_positive(scheme, &snrs).ln_1p() / LN_2;
        let cs = params.end_snr(&snrs).ln_1p() / LN_2;
        [ce, ce * ce, cs, cs * cs]
    });
    let exact = McEstimate::from_moments(se, se2, plan.sample_count, plan.bandwidth);
    let surrogate = McEstimate::from_moments(ss, ss2, plan.sample_count, plan.bandwidth);
    let abs_gap = (exact.mean - surrogate.mean).abs();
    let rel_gap = abs_gap / exact.mean.abs().max(f64::MIN_POSITIVE);
    Ok(BiasReport {
        exact,
        surrogate,
        abs_gap,
        rel_gap,
    })
}
