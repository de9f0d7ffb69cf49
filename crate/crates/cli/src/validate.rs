//! Built-in validation suite: nine numbered criteria with pinned
//! tolerances. Each criterion reports pass/fail, a one-line detail, and
//! its wall-clock cost; the suite passes only when every criterion does.
//!
//! The checks deliberately cross implementation boundaries: closed forms
//! against the contour engine, three capacity routes against each other,
//! the analytic pipeline against the sampling oracle, and the emitted
//! artifacts against their own determinism contract.

use std::path::Path;
use std::time::Instant;

use egkcap::capacity::{
    aux_closed_form, capacity_mrc_baselines, ergodic_capacity_iid, AuxEvaluator, CombinerSpec,
    QuadratureSpec, Scheme,
};
use egkcap::egk::{
    egk_generalized_mgf, egk_generalized_mgf_derivative, egk_pdf, named_special_case,
    named_special_case_with_surrogate, EgkParams, EgkSampler, NamedCase,
};
use egkcap::mc::{simulate_capacity, SimulationPlan};
use egkcap::quad::{gl32_panel, integrate_adaptive};
use egkcap::special::exp_integral_e1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::db_to_linear;

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {} {}: {} ({:.1} s) {}",
            self.index,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

fn timed(
    index: usize,
    name: &'static str,
    body: impl FnOnce() -> Result<(bool, String), String>,
) -> CriterionReport {
    let start = Instant::now();
    let (passed, detail) = match body() {
        Ok(outcome) => outcome,
        Err(msg) => (false, format!("aborted: {msg}")),
    };
    CriterionReport {
        index,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn fail<T: std::fmt::Display>(e: T) -> String {
    e.to_string()
}

/// The parameter grid shared by the transform and distribution checks.
fn fading_grid() -> Vec<EgkParams> {
    let mut grid = Vec::new();
    for (m, m_s) in [
        (0.5, 1.0),
        (0.5, 3.0),
        (0.5, 50.0),
        (1.0, 1.0),
        (1.0, 3.0),
        (1.0, 50.0),
        (2.5, 1.0),
        (2.5, 3.0),
        (2.5, 50.0),
    ] {
        for (xi, xi_s) in [(1.0, 1.0), (2.0, 0.75)] {
            grid.push(EgkParams::new(m, xi, m_s, xi_s, 1.0).unwrap());
        }
    }
    grid
}

/// Closed-form kernels against the contour engine, 1e-6 relative, on
/// s in {0.01, 0.1, 1, 10, 100}.
pub fn criterion_1() -> CriterionReport {
    timed(1, "closed-form kernel agreement", || {
        let cases = [
            ("MRC", CombinerSpec::new(Scheme::Mrc, 2)),
            ("EGC L=2", CombinerSpec::new(Scheme::Egc, 2)),
            ("EGC L=4", CombinerSpec::new(Scheme::Egc, 4)),
            ("AF_MULTIHOP", CombinerSpec::new(Scheme::AfMultihop, 2)),
        ];
        let s_grid = [0.01, 0.1, 1.0, 10.0, 100.0];
        let mut worst = 0.0f64;
        let mut worst_at = String::new();
        for (label, combiner) in &cases {
            let params = combiner.params().map_err(fail)?;
            let span = s_grid
                .iter()
                .map(|s: &f64| s.ln().abs())
                .fold(4.0, f64::max);
            let general =
                AuxEvaluator::general(params.eta, params.q, combiner.branch_count, span)
                    .map_err(fail)?;
            for &s in &s_grid {
                let engine = general.eval(s).map_err(fail)?.0;
                let closed = aux_closed_form(params.eta, params.q, combiner.branch_count, s)
                    .map_err(fail)?
                    .ok_or_else(|| format!("{label} lost its closed form"))?;
                let rel = (engine - closed).abs() / closed.abs();
                if rel > worst {
                    worst = rel;
                    worst_at = format!("{label} s={s}");
                }
            }
        }
        Ok((
            worst < 1e-6,
            format!("worst relative deviation {worst:.2e} at {worst_at}"),
        ))
    })
}

/// Survival, derivative, and kernel capacity routes for MRC agree to
/// 1e-6 relative over L in {1,2,3}, Nakagami m in {1,2}, mean SNR in
/// {0, 10, 20} dB.
pub fn criterion_2() -> CriterionReport {
    timed(2, "baseline route equivalence", || {
        let quad = QuadratureSpec::default();
        let mut worst = 0.0f64;
        let mut worst_at = String::new();
        for l in [1usize, 2, 3] {
            for m in [1.0, 2.0] {
                for db in [0.0, 10.0, 20.0] {
                    let branch =
                        named_special_case(NamedCase::NakagamiM { m }, db_to_linear(db))
                            .map_err(fail)?;
                    let branches = vec![branch.clone(); l];
                    let (survival, derivative) =
                        capacity_mrc_baselines(&branches, 1.0, &quad).map_err(fail)?;
                    let kernel = ergodic_capacity_iid(
                        &branch,
                        &CombinerSpec::new(Scheme::Mrc, l),
                        1.0,
                        &quad,
                    )
                    .map_err(fail)?;
                    let c = kernel.capacity_bits_per_hz;
                    for (route, value) in [
                        ("survival", survival.capacity_bits_per_hz),
                        ("derivative", derivative.capacity_bits_per_hz),
                    ] {
                        let rel = (value - c).abs() / c;
                        if rel > worst {
                            worst = rel;
                            worst_at = format!("{route} L={l} m={m} {db} dB");
                        }
                    }
                }
            }
        }
        Ok((
            worst < 1e-6,
            format!("worst relative spread {worst:.2e} at {worst_at}"),
        ))
    })
}

/// Single-branch capacity at 10 dB against the classical exponential
/// reference, within 2%, and the residual must shrink as the shadow-free
/// surrogate shape is raised 50 -> 100 -> 200.
pub fn criterion_3() -> CriterionReport {
    timed(3, "classical single-branch reference", || {
        let mean = db_to_linear(10.0);
        let reference = (1.0 / std::f64::consts::LN_2)
            * (1.0 / mean).exp()
            * exp_integral_e1(1.0 / mean).map_err(fail)?;
        let quad = QuadratureSpec::default();
        let combiner = CombinerSpec::new(Scheme::Mrc, 1);
        let mut residuals = Vec::new();
        for m_s in [50.0, 100.0, 200.0] {
            let branch =
                named_special_case_with_surrogate(NamedCase::Rayleigh, mean, m_s)
                    .map_err(fail)?;
            let cap = ergodic_capacity_iid(&branch, &combiner, 1.0, &quad).map_err(fail)?;
            residuals.push((cap.capacity_bits_per_hz - reference).abs());
        }
        let within = residuals[0] / reference < 0.02;
        let shrinking = residuals[0] > residuals[1] && residuals[1] > residuals[2];
        Ok((
            within && shrinking,
            format!(
                "reference {reference:.6}, relative residual {:.2e} at the default \
                 surrogate, residuals {:.2e} > {:.2e} > {:.2e}",
                residuals[0] / reference,
                residuals[0],
                residuals[1],
                residuals[2]
            ),
        ))
    })
}

/// Analytic capacity within 3 standard errors of a 1e6-sample oracle
/// over schemes x fadings x SNRs x branch counts.
pub fn criterion_4() -> CriterionReport {
    timed(4, "analytic capacity vs sampling oracle", || {
        let schemes = [
            Scheme::Mrc,
            Scheme::Egc,
            Scheme::Rmsc,
            Scheme::AfMultihop,
            Scheme::Cascaded,
        ];
        let fadings = [
            ("rayleigh", NamedCase::Rayleigh),
            ("nakagami_m(2)", NamedCase::NakagamiM { m: 2.0 }),
            ("generalized_k(2,3)", NamedCase::GeneralizedK { m: 2.0, m_s: 3.0 }),
        ];
        let quad = QuadratureSpec::default();
        let mut total = 0usize;
        let mut passed = 0usize;
        let mut other_failures: Vec<String> = Vec::new();
        let mut cascaded_failures = 0usize;
        let mut cascaded_error = String::new();
        let mut seed = 0x04_00u64;
        for scheme in schemes {
            for (label, case) in &fadings {
                for db in [0.0, 10.0, 20.0] {
                    for l in [2usize, 3] {
                        total += 1;
                        seed += 1;
                        let branch =
                            named_special_case(*case, db_to_linear(db)).map_err(fail)?;
                        let plan = SimulationPlan::new(vec![branch.clone(); l], scheme)
                            .with_samples(1_000_000)
                            .with_seed(seed);
                        let mc = simulate_capacity(&plan).map_err(fail)?;
                        let outcome = ergodic_capacity_iid(
                            &branch,
                            &CombinerSpec::new(scheme, l),
                            1.0,
                            &quad,
                        );
                        match outcome {
                            Ok(cap) => {
                                let pulls = (cap.capacity_bits_per_hz - mc.mean).abs()
                                    / mc.std_error;
                                if pulls <= 3.0 {
                                    passed += 1;
                                } else if scheme == Scheme::Cascaded {
                                    cascaded_failures += 1;
                                } else {
                                    other_failures.push(format!(
                                        "{scheme} {label} {db} dB L={l}: {pulls:.1} SE"
                                    ));
                                }
                            }
                            Err(e) => {
                                if scheme == Scheme::Cascaded {
                                    cascaded_failures += 1;
                                    if cascaded_error.is_empty() {
                                        cascaded_error = e.to_string();
                                    }
                                } else {
                                    other_failures.push(format!(
                                        "{scheme} {label} {db} dB L={l}: {e}"
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut detail = format!("{passed} of {total} combinations within 3 SE");
        if cascaded_failures > 0 {
            // Measure the best convergent order so the report carries the
            // size of the bias, not just the refusal.
            let branch = named_special_case(NamedCase::Rayleigh, 10.0).map_err(fail)?;
            let plan = SimulationPlan::new(vec![branch.clone(); 2], Scheme::Cascaded)
                .with_samples(1_000_000)
                .with_seed(0x04_FF);
            let mc = simulate_capacity(&plan).map_err(fail)?;
            let order2 = ergodic_capacity_iid(
                &branch,
                &CombinerSpec::new(Scheme::Cascaded, 2).with_surrogate_order(2),
                1.0,
                &quad,
            )
            .map_err(fail)?;
            let pulls = (order2.capacity_bits_per_hz - mc.mean).abs() / mc.std_error;
            detail.push_str(&format!(
                "; all {cascaded_failures} failures are CASCADED: {cascaded_error}; \
                 its largest convergent order (2) still sits {pulls:.0} SE from the \
                 product oracle at rayleigh 10 dB L=2, so no order satisfies this \
                 criterion"
            ));
        }
        if !other_failures.is_empty() {
            detail.push_str(&format!("; other failures: {}", other_failures.join(", ")));
        }
        Ok((passed == total, detail))
    })
}

/// SC and MIN_BOUND order-8 surrogates within 2% of exact max/min
/// combining, with the gap shrinking across orders {2, 4, 8, 16}.
pub fn criterion_5() -> CriterionReport {
    timed(5, "limit-scheme surrogate gap", || {
        let branch = named_special_case(NamedCase::Rayleigh, db_to_linear(10.0))
            .map_err(fail)?;
        let quad = QuadratureSpec::default();
        let mut all_within = true;
        let mut all_shrinking = true;
        let mut details = Vec::new();
        for (scheme, seed) in [(Scheme::Sc, 0x05_01u64), (Scheme::MinBound, 0x05_02)] {
            let plan = SimulationPlan::new(vec![branch.clone(); 2], scheme)
                .with_samples(1_000_000)
                .with_seed(seed);
            let mc = simulate_capacity(&plan).map_err(fail)?;
            let mut gaps = Vec::new();
            for order in [2u32, 4, 8, 16] {
                let cap = ergodic_capacity_iid(
                    &branch,
                    &CombinerSpec::new(scheme, 2).with_surrogate_order(order),
                    1.0,
                    &quad,
                )
                .map_err(|e| format!("{scheme} order {order}: {e}"))?;
                gaps.push((cap.capacity_bits_per_hz - mc.mean).abs());
            }
            let rel8 = gaps[2] / mc.mean;
            let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);
            all_within &= rel8 <= 0.02;
            all_shrinking &= shrinking;
            details.push(format!(
                "{scheme}: order-8 gap {:.2}% ({}), order gaps {:.4} > {:.4} > {:.4} > {:.4} ({})",
                100.0 * rel8,
                if rel8 <= 0.02 { "within 2%" } else { "above 2%" },
                gaps[0],
                gaps[1],
                gaps[2],
                gaps[3],
                if shrinking { "monotone" } else { "not monotone" },
            ));
        }
        Ok((all_within && all_shrinking, details.join("; ")))
    })
}

/// Transform derivative against a central finite difference of the
/// transform itself, 1e-5 relative, over the shared fading grid.
pub fn criterion_6() -> CriterionReport {
    timed(6, "transform derivative consistency", || {
        let mut worst = 0.0f64;
        let mut worst_at = String::new();
        for params in fading_grid() {
            for p in [-1.0, 0.5, 1.0, 2.0] {
                for s in [0.3, 1.0, 3.0] {
                    let h = 3e-4 * s;
                    let above = egk_generalized_mgf(&params, p, s + h).map_err(fail)?;
                    let below = egk_generalized_mgf(&params, p, s - h).map_err(fail)?;
                    let analytic =
                        egk_generalized_mgf_derivative(&params, p, s).map_err(fail)?;
                    let fd = (above - below) / (2.0 * h);
                    let rel = (analytic - fd).abs() / analytic.abs();
                    if rel > worst {
                        worst = rel;
                        worst_at = format!(
                            "m={} xi={} m_s={} xi_s={} p={p} s={s}",
                            params.m(),
                            params.xi(),
                            params.m_s(),
                            params.xi_s()
                        );
                    }
                }
            }
        }
        Ok((
            worst < 1e-5,
            format!("worst relative deviation {worst:.2e} at {worst_at}"),
        ))
    })
}

/// Four-point Gauss-Legendre panel, enough for the near-degenerate gaps
/// between consecutive order statistics (error scales with width^8).
fn gl4_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 2] = [0.3399810435848563, 0.8611363115940526];
    const W: [f64; 2] = [0.6521451548625461, 0.34785484513745385];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for i in 0..2 {
        acc += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
    }
    acc * half
}

/// Kolmogorov-Smirnov distance of `sorted` draws from the model CDF,
/// built by cumulative panel integration of the density between
/// consecutive order statistics.
fn ks_statistic(params: &EgkParams, sorted: &[f64]) -> Result<f64, String> {
    let pdf = |g: f64| egk_pdf(params, g).unwrap_or(f64::NAN);
    let n = sorted.len() as f64;
    let wide = 0.01 * (sorted[sorted.len() - 1] - sorted[0]);
    let (head, _) =
        integrate_adaptive(&pdf, 1e-12, sorted[0], 1e-10, 1e-6).map_err(fail)?;
    let mut cdf = head;
    let mut prev = sorted[0];
    let mut worst = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        if x > prev {
            cdf += if x - prev > wide {
                gl32_panel(&pdf, prev, x)
            } else {
                gl4_panel(&pdf, prev, x)
            };
            prev = x;
        }
        if !cdf.is_finite() {
            return Err(format!("cumulative density lost finiteness at {x}"));
        }
        let below = i as f64 / n;
        let above = (i as f64 + 1.0) / n;
        worst = worst.max((cdf - below).abs()).max((above - cdf).abs());
    }
    Ok(worst)
}

/// Density normalization to 1e-6 over the fading grid; sampler KS below
/// the 1% critical value at 1e5 draws; sample mean within 3 standard
/// errors of the configured mean SNR.
pub fn criterion_7() -> CriterionReport {
    timed(7, "distribution integrity", || {
        let mut worst_norm = 0.0f64;
        for params in fading_grid() {
            let f = |x: f64| {
                let gamma = x * x * x * x;
                egk_pdf(&params, gamma).unwrap_or(f64::NAN) * 4.0 * x * x * x
            };
            let upper = 600.0f64.powf(0.25);
            let (mass, _) =
                integrate_adaptive(&f, 1e-4, upper, 1e-9, 1e-3).map_err(fail)?;
            worst_norm = worst_norm.max((mass - 1.0).abs());
        }
        let cases = [
            ("rayleigh", named_special_case(NamedCase::Rayleigh, 2.5)),
            (
                "nakagami_m(2)",
                named_special_case(NamedCase::NakagamiM { m: 2.0 }, 1.0),
            ),
            (
                "generalized_k(2,3)",
                named_special_case(NamedCase::GeneralizedK { m: 2.0, m_s: 3.0 }, 5.0),
            ),
            (
                "egk",
                EgkParams::new(1.5, 2.0, 2.5, 0.75, 1.0),
            ),
        ];
        let draws = 100_000usize;
        let critical = 1.628 / (draws as f64).sqrt();
        let mut worst_ks = 0.0f64;
        let mut worst_pulls = 0.0f64;
        for (index, (label, params)) in cases.into_iter().enumerate() {
            let params = params.map_err(fail)?;
            let sampler = EgkSampler::new(&params).map_err(fail)?;
            let mut rng = ChaCha8Rng::seed_from_u64(0x07_00 + index as u64);
            let mut samples: Vec<f64> =
                (0..draws).map(|_| sampler.sample(&mut rng)).collect();
            samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ks = ks_statistic(&params, &samples)?;
            if ks > worst_ks {
                worst_ks = ks;
            }
            let mean: f64 = samples.iter().sum::<f64>() / draws as f64;
            let var: f64 = samples
                .iter()
                .map(|x| (x - mean) * (x - mean))
                .sum::<f64>()
                / (draws as f64 - 1.0);
            let se = (var / draws as f64).sqrt();
            let pulls = (mean - params.mean_snr()).abs() / se;
            if pulls > worst_pulls {
                worst_pulls = pulls;
            }
            if ks >= critical || pulls > 3.0 {
                return Ok((
                    false,
                    format!("{label}: KS {ks:.4} (critical {critical:.4}), mean {pulls:.1} SE off"),
                ));
            }
        }
        Ok((
            worst_norm < 1e-6,
            format!(
                "worst normalization defect {worst_norm:.2e}, worst KS {worst_ks:.4} \
                 (critical {critical:.4}), worst mean offset {worst_pulls:.1} SE"
            ),
        ))
    })
}

/// MIN_BOUND <= SC <= MRC at every grid point, and capacity strictly
/// grows along the SNR grid for every scheme.
pub fn criterion_8() -> CriterionReport {
    timed(8, "ordering and monotonic growth", || {
        // The order-2 product-channel kernel oscillates slowly at low SNR
        // and needs a deeper node ladder than the default grid.
        let quad = QuadratureSpec {
            node_count: 1024,
            ..QuadratureSpec::default()
        };
        let grid = [0.0, 5.0, 10.0, 15.0, 20.0];
        let combiners = [
            CombinerSpec::new(Scheme::Mrc, 2),
            CombinerSpec::new(Scheme::Egc, 2),
            CombinerSpec::new(Scheme::Sc, 2).with_surrogate_order(8),
            CombinerSpec::new(Scheme::Rmsc, 2),
            CombinerSpec::new(Scheme::Cascaded, 2).with_surrogate_order(2),
            CombinerSpec::new(Scheme::AfMultihop, 2),
            CombinerSpec::new(Scheme::GeometricMean, 2).with_surrogate_order(2),
            CombinerSpec::new(Scheme::MinBound, 2).with_surrogate_order(8),
        ];
        let mut curves: Vec<(Scheme, Vec<f64>, Vec<f64>)> = Vec::new();
        for combiner in &combiners {
            let mut caps = Vec::new();
            let mut ests = Vec::new();
            for &db in &grid {
                let branch = named_special_case(NamedCase::Rayleigh, db_to_linear(db))
                    .map_err(fail)?;
                let cap = ergodic_capacity_iid(&branch, combiner, 1.0, &quad)
                    .map_err(|e| format!("{} at {db} dB: {e}", combiner.scheme))?;
                caps.push(cap.capacity_bits_per_hz);
                ests.push(cap.error_estimate);
            }
            curves.push((combiner.scheme, caps, ests));
        }
        let curve = |scheme: Scheme| {
            curves
                .iter()
                .find(|(s, _, _)| *s == scheme)
                .map(|(_, caps, ests)| (caps.clone(), ests.clone()))
                .unwrap()
        };
        let (min_caps, min_ests) = curve(Scheme::MinBound);
        let (sc_caps, sc_ests) = curve(Scheme::Sc);
        let (mrc_caps, mrc_ests) = curve(Scheme::Mrc);
        for i in 0..grid.len() {
            if min_caps[i] > sc_caps[i] + min_ests[i] + sc_ests[i] {
                return Ok((
                    false,
                    format!("MIN_BOUND above SC at {} dB", grid[i]),
                ));
            }
            if sc_caps[i] > mrc_caps[i] + sc_ests[i] + mrc_ests[i] {
                return Ok((false, format!("SC above MRC at {} dB", grid[i])));
            }
        }
        for (scheme, caps, _) in &curves {
            for w in caps.windows(2) {
                if w[1] <= w[0] {
                    return Ok((
                        false,
                        format!("{scheme} capacity does not grow along the grid: {caps:?}"),
                    ));
                }
            }
        }
        Ok((
            true,
            format!(
                "8 schemes over {} grid points ordered and strictly increasing",
                grid.len()
            ),
        ))
    })
}

/// The capacity command emits byte-identical files across repeated runs
/// and across worker counts 1 and 4, for both output formats.
pub fn criterion_9(bin: &Path) -> CriterionReport {
    timed(9, "deterministic emission", || {
        let dir = std::env::temp_dir().join(format!(
            "egkcap-determinism-{}",
            std::process::id()
        ));
        std::fs::create_dir_all(&dir).map_err(fail)?;
        let mut outputs: Vec<Vec<u8>> = Vec::new();
        let mut runs = Vec::new();
        for format in ["csv", "json"] {
            for (tag, workers) in [("a", "1"), ("b", "1"), ("c", "4")] {
                runs.push((format, tag, workers));
            }
        }
        for (format, tag, workers) in &runs {
            let path = dir.join(format!("{format}-{tag}.{format}"));
            let status = std::process::Command::new(bin)
                .args([
                    "capacity",
                    "--scheme",
                    "MRC",
                    "--branches",
                    "2",
                    "--fading",
                    "rayleigh",
                    "--snr-db",
                    "0:10:5",
                    "--mc-samples",
                    "20000",
                    "--seed",
                    "42",
                    "--format",
                    format,
                    "--workers",
                    workers,
                    "--output",
                    path.to_str().ok_or("temp path is not valid UTF-8")?,
                ])
                .status()
                .map_err(fail)?;
            if !status.success() {
                return Err(format!("capacity run ({format}, workers {workers}) exited {status}"));
            }
            outputs.push(std::fs::read(&path).map_err(fail)?);
        }
        std::fs::remove_dir_all(&dir).ok();
        let csv_equal = outputs[0] == outputs[1] && outputs[1] == outputs[2];
        let json_equal = outputs[3] == outputs[4] && outputs[4] == outputs[5];
        Ok((
            csv_equal && json_equal,
            format!(
                "csv {} bytes {}, json {} bytes {}",
                outputs[0].len(),
                if csv_equal { "identical across runs and worker counts" } else { "DIFFER" },
                outputs[3].len(),
                if json_equal { "identical across runs and worker counts" } else { "DIFFER" },
            ),
        ))
    })
}

pub fn run_one(index: usize, bin: &Path) -> Option<CriterionReport> {
    Some(match index {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(bin),
        _ => return None,
    })
}

pub fn run_all(bin: &Path) -> Vec<CriterionReport> {
    (1..=9).map(|i| run_one(i, bin).unwrap()).collect()
}
