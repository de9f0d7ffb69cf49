//! Ergodic capacity of diversity receivers and transmission techniques.
//!
//! Every supported scheme reports the end SNR eta * ((1/L) sum gamma^p)^q
//! for scheme-specific (eta, p, q), either exactly or as a large-order
//! surrogate of a limit form (selection, minimum, geometric mean). The
//! capacity then reduces to one integral of an auxiliary kernel A(s),
//! fixed by (eta, q, L) alone, against the derivative of the product of
//! per-branch generalized MGFs.

use crate::egk::{EgkParams, MgfEvaluator};
use crate::error::{Error, Result};
use crate::foxh::{eval_foxh_auto, validate_foxh, FoxHSpec, PreparedSweep, ValidatedFoxH};
use crate::quad::{GL32_NODES, GL32_WEIGHTS};
use crate::special::{
    cosine_integral, exp_integral_ei, ln_gamma, ln_gamma_complex, EULER_MASCHERONI,
};
use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

/// Surrogate order used for limit schemes when none is given.
pub const DEFAULT_SURROGATE_ORDER: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Mrc,
    Egc,
    Sc,
    Rmsc,
    Cascaded,
    AfMultihop,
    GeometricMean,
    MinBound,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::Mrc,
        Scheme::Egc,
        Scheme::Sc,
        Scheme::Rmsc,
        Scheme::Cascaded,
        Scheme::AfMultihop,
        Scheme::GeometricMean,
        Scheme::MinBound,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Mrc => "MRC",
            Scheme::Egc => "EGC",
            Scheme::Sc => "SC",
            Scheme::Rmsc => "RMSC",
            Scheme::Cascaded => "CASCADED",
            Scheme::AfMultihop => "AF_MULTIHOP",
            Scheme::GeometricMean => "GEOMETRIC_MEAN",
            Scheme::MinBound => "MIN_BOUND",
        }
    }

    /// True when the scheme is a finite-order surrogate of a limit form.
    pub fn uses_surrogate_order(&self) -> bool {
        matches!(
            self,
            Scheme::Sc | Scheme::Cascaded | Scheme::GeometricMean | Scheme::MinBound
        )
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MRC" => Ok(Scheme::Mrc),
            "EGC" => Ok(Scheme::Egc),
            "SC" => Ok(Scheme::Sc),
            "RMSC" => Ok(Scheme::Rmsc),
            "CASCADED" => Ok(Scheme::Cascaded),
            "AF_MULTIHOP" => Ok(Scheme::AfMultihop),
            "GEOMETRIC_MEAN" => Ok(Scheme::GeometricMean),
            "MIN_BOUND" => Ok(Scheme::MinBound),
            other => Err(Error::InvalidParams(format!(
                "unknown scheme {other:?}; expected one of MRC, EGC, SC, RMSC, CASCADED, AF_MULTIHOP, GEOMETRIC_MEAN, MIN_BOUND"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinerSpec {
    pub scheme: Scheme,
    pub branch_count: usize,
    /// Order of the surrogate for limit schemes; must be absent for the
    /// exact ones.
    pub surrogate_order: Option<u32>,
}

impl CombinerSpec {
    pub fn new(scheme: Scheme, branch_count: usize) -> Self {
        CombinerSpec {
            scheme,
            branch_count,
            surrogate_order: None,
        }
    }

    pub fn with_surrogate_order(mut self, order: u32) -> Self {
        self.surrogate_order = Some(order);
        self
    }

    pub fn params(&self) -> Result<CombinerParams> {
        if self.branch_count == 0 {
            return Err(Error::InvalidParams("branch count must be at least 1".into()));
        }
        if !self.scheme.uses_surrogate_order() && self.surrogate_order.is_some() {
            return Err(Error::InvalidParams(format!(
                "{} is exact and takes no surrogate order",
                self.scheme
            )));
        }
        let order = match self.surrogate_order {
            Some(0) => {
                return Err(Error::InvalidParams("surrogate order must be at least 1".into()))
            }
            Some(n) => n as f64,
            None => DEFAULT_SURROGATE_ORDER as f64,
        };
        let l = self.branch_count as f64;
        let (eta, p, q) = match self.scheme {
            Scheme::Mrc => (l, 1.0, 1.0),
            Scheme::Egc => (l, 0.5, 2.0),
            Scheme::Rmsc => (l.sqrt(), 2.0, 0.5),
            Scheme::AfMultihop => (1.0 / l, -1.0, -1.0),
            Scheme::Sc => (1.0, order, 1.0 / order),
            Scheme::Cascaded => (1.0, l / order, order),
            Scheme::GeometricMean => (1.0, 1.0 / order, order),
            Scheme::MinBound => (1.0, -order, -1.0 / order),
        };
        Ok(CombinerParams { eta, p, q })
    }
}

/// End-SNR report parameters: gamma_end = eta * ((1/L) sum gamma^p)^q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinerParams {
    pub eta: f64,
    pub p: f64,
    pub q: f64,
}

impl CombinerParams {
    /// Combine per-branch SNRs through the power-mean report.
    pub fn end_snr(&self, gammas: &[f64]) -> f64 {
        let l = gammas.len() as f64;
        let mean = gammas.iter().map(|g| g.powf(self.p)).sum::<f64>() / l;
        self.eta * mean.powf(self.q)
    }
}

/// Geometric-mean report approached from below (negative order pair).
/// The standard catalogue entry approaches it from above; the two must
/// bracket the same limit.
pub fn geometric_mean_low_params(order: u32) -> Result<CombinerParams> {
    if order == 0 {
        return Err(Error::InvalidParams("surrogate order must be at least 1".into()));
    }
    let n = order as f64;
    Ok(CombinerParams {
        eta: 1.0,
        p: -1.0 / n,
        q: -n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadMapping {
    /// Power chosen from the combiner exponent and the branch parameters.
    Auto,
    /// Plain rational map u = (1+t)/(1-t), s = u.
    Rational,
    /// Power-warped rational map s = u^k.
    RationalPow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub node_count: usize,
    pub mapping: QuadMapping,
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            node_count: 256,
            mapping: QuadMapping::Auto,
            tolerance: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn check(&self) -> Result<()> {
        if !(32..=1_000_000).contains(&self.node_count) {
            return Err(Error::InvalidParams(format!(
                "node count {} outside [32, 1000000]",
                self.node_count
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 0.1) {
            return Err(Error::InvalidParams(format!(
                "tolerance {} outside (0, 0.1)",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Gauss-Chebyshev nodes mapped onto (0, inf) through s = ((1+t)/(1-t))^k,
/// in ascending s order. Weights carry the full Jacobian, so
/// integral f = sum w_i f(s_i).
pub fn map_semi_infinite(node_count: usize, warp: f64) -> Result<Vec<(f64, f64)>> {
    if node_count < 2 {
        return Err(Error::InvalidParams("need at least 2 nodes".into()));
    }
    if !warp.is_finite() || !(0.5..=64.0).contains(&warp) {
        return Err(Error::InvalidParams(format!(
            "map power {warp} outside [0.5, 64]"
        )));
    }
    let n = node_count as f64;
    let mut nodes = Vec::with_capacity(node_count);
    for i in (1..=node_count).rev() {
        let theta = (2.0 * i as f64 - 1.0) * std::f64::consts::PI / (2.0 * n);
        let t = theta.cos();
        let u = (1.0 + t) / (1.0 - t);
        let s = u.powf(warp);
        let w = (std::f64::consts::PI / n)
            * theta.sin()
            * (2.0 / ((1.0 - t) * (1.0 - t)))
            * warp
            * u.powf(warp - 1.0);
        if !(s.is_finite() && w.is_finite() && s > 0.0) {
            return Err(Error::InvalidParams(format!(
                "map power {warp} overflows the representable range at {node_count} nodes"
            )));
        }
        nodes.push((s, w));
    }
    Ok(nodes)
}

/// Auxiliary capacity kernel A(s) for a combiner family. Fixed by
/// (eta, q, L); the transform power p never enters. Closed forms cover
/// q in {1, 2, -1}; other orders run through the Mellin-Barnes engine on
/// prepared contours, or through the pole-residue series where no
/// vertical contour exists.
pub struct AuxEvaluator {
    route: AuxRoute,
    ln_z0: f64,
    q: f64,
    rel_tol: f64,
}

enum AuxRoute {
    /// q = 1: A = Ei(-1/z).
    LogShifted,
    /// q = 2: A = 2 Ci(z^{-1/2}).
    Oscillatory,
    /// q = -2: A = 2 Ci(z^{1/2}) - 2 gamma - ln z.
    OscillatoryLow,
    /// q = -1: A = Ei(-z) - ln z - gamma.
    Relaying,
    Swept(PreparedSweep, ValidatedFoxH),
    Auto(ValidatedFoxH),
    /// Residue series over one pole family; the only route once
    /// |q| > 2 removes every vertical contour.
    Series,
}

/// S(y, r) = sum_{k>=1} (-1)^{k-1} y^k / (k Gamma(1 + r k)), the residue
/// sum of the kernel transform over the pole family at the integers.
/// Converges for every finite y; the returned estimate tracks the largest
/// intermediate term because past the summand hump the alternating terms
/// cancel almost exactly.
fn kernel_residue_series(y: f64, r: f64) -> Result<(f64, f64)> {
    if y == 0.0 {
        return Ok((0.0, 0.0));
    }
    let ln_y = y.ln();
    let mut acc = 0.0f64;
    let mut peak = 0.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..20_000 {
        let lk = k as f64;
        let ln_term = lk * ln_y - ln_gamma(1.0 + r * lk)? - lk.ln();
        if ln_term > 705.0 {
            return Err(Error::Numerical(format!(
                "kernel residue series overflows at term {k} (y = {y:.3e}, step {r})"
            )));
        }
        let term = ln_term.exp();
        peak = peak.max(term);
        acc += if k % 2 == 1 { term } else { -term };
        if term < prev && term <= 1e-17 * (acc.abs() + 1e-12 * peak) + 1e-300 {
            return Ok((acc, 2e-16 * peak + term));
        }
        prev = term;
    }
    Err(Error::NonConvergent {
        terms: 20_000,
        last_step: prev,
    })
}

/// log of the kernel integrand Gamma(1+u)Gamma(1-u) z^{-u} / (u^2 Gamma(1+qu)).
fn ln_kernel_integrand(q: f64, u: Complex64, ln_z: f64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    Ok(ln_gamma_complex(one + u)? + ln_gamma_complex(one - u)?
        - ln_gamma_complex(one + q * u)?
        - 2.0 * u.ln()
        - u * ln_z)
}

/// Exp-shifted Gauss-Legendre panel of the kernel integrand along the
/// vertical line Re u = c, t in [t_lo, t_hi].
fn kernel_panel(
    q: f64,
    ln_z: f64,
    c: f64,
    t_lo: f64,
    t_hi: f64,
) -> Result<(f64, Complex64)> {
    let half = 0.5 * (t_hi - t_lo);
    let mid = 0.5 * (t_hi + t_lo);
    let mut ln_terms = [Complex64::new(0.0, 0.0); 32];
    let mut max_re = f64::NEG_INFINITY;
    for (i, (x, w)) in GL32_NODES.iter().zip(GL32_WEIGHTS.iter()).enumerate() {
        let u = Complex64::new(c, mid + half * x);
        let ln_term = ln_kernel_integrand(q, u, ln_z)? + Complex64::new((w * half).ln(), 0.0);
        max_re = max_re.max(ln_term.re);
        ln_terms[i] = ln_term;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for ln_term in ln_terms {
        sum += (ln_term - max_re).exp();
    }
    Ok((max_re, sum))
}

/// Kernel contour integral along Re u = c using panels of the given
/// width over t in [0, T], doubled by conjugate symmetry. Returns the
/// H value together with its cancellation floor and tail size.
fn kernel_vertical_sum(
    q: f64,
    ln_z: f64,
    c: f64,
    t_half: f64,
    panel_width: f64,
) -> Result<(f64, f64)> {
    let panels = ((t_half / panel_width).ceil() as usize).max(2);
    let mut partials = Vec::with_capacity(panels);
    for k in 0..panels {
        let lo = k as f64 * panel_width;
        partials.push(kernel_panel(q, ln_z, c, lo, lo + panel_width)?);
    }
    let global_max = partials
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max);
    if global_max < -740.0 {
        return Ok((0.0, 1e-300));
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut gross = 0.0f64;
    for (m, s) in &partials {
        let scale = (m - global_max).exp();
        total += s * scale;
        gross += s.norm() * scale;
    }
    let (last_m, last_s) = &partials[panels - 1];
    let tail = last_s.norm() * (last_m - global_max).exp();
    let h = total.re / PI * global_max.exp();
    let floor = (gross * 2e-16 + tail) / PI * global_max.exp();
    Ok((h, floor))
}

/// Sum of the kernel residues at u = -1, .., -count:
/// sum_k (-1)^{k-1} z^k / (k Gamma(1 - q k)). Terms with integer q k
/// vanish; the reciprocal gamma is taken through the reflection formula.
fn left_residue_sum(q: f64, ln_z: f64, count: usize) -> Result<(f64, f64)> {
    let mut max_ln = f64::NEG_INFINITY;
    let mut scaled = 0.0f64;
    let mut peak = f64::NEG_INFINITY;
    for k in 1..=count {
        let x = q * k as f64;
        if (x - x.round()).abs() < 1e-9 * (1.0 + x) {
            continue;
        }
        let s = (PI * x).sin();
        let ln_term =
            k as f64 * ln_z - (k as f64).ln() + ln_gamma(x)? + s.abs().ln() - PI.ln();
        if ln_term > 700.0 {
            return Err(Error::Numerical(format!(
                "kernel residue correction overflows at pole {k} (q = {q}, ln z = {ln_z:.3})"
            )));
        }
        peak = peak.max(ln_term);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 } * s.signum();
        if ln_term > max_ln {
            scaled = scaled * (max_ln - ln_term).exp() + sign;
            max_ln = ln_term;
        } else {
            scaled += sign * (ln_term - max_ln).exp();
        }
    }
    if max_ln == f64::NEG_INFINITY {
        return Ok((0.0, 0.0));
    }
    let value = scaled * max_ln.exp();
    Ok((value, 2e-16 * peak.exp()))
}

/// Kernel value by a vertical contour through the real-axis magnitude
/// minimum, plus the residues of the poles crossed on the way there.
/// For q <= 1 the integrand decays along the shifted line, so the sum
/// resolves kernel values far below the cancellation floor of the
/// pole-separating contour. Returns None when no magnitude dip exists
/// within reach or the shifted line cannot avoid the gamma poles.
fn saddle_shifted_aux(q: f64, ln_z: f64) -> Result<Option<(f64, f64)>> {
    if q <= 0.0 {
        return Ok(None);
    }
    let g = |c: f64| -> f64 {
        match ln_kernel_integrand(q, Complex64::new(c, 0.0), ln_z) {
            Ok(v) => v.re,
            Err(_) => f64::INFINITY,
        }
    };
    let mut best: Option<(usize, f64, f64)> = None;
    let mut j = 1usize;
    let cap = 20_000usize;
    while j <= cap {
        let c = -(j as f64 + 0.5);
        // Keep the denominator gamma argument away from its poles.
        let x = 1.0 + q * c;
        let usable = x > 0.5 || (x - x.round()).abs() > 0.1 * q.min(1.0);
        if usable {
            let gc = g(c);
            if gc.is_finite() {
                match best {
                    Some((bj, _, bg)) => {
                        if gc < bg {
                            best = Some((j, c, gc));
                        } else if j > bj + 8 && gc > bg + 4.0 {
                            break;
                        }
                    }
                    None => best = Some((j, c, gc)),
                }
            }
        }
        j += 1;
    }
    let Some((count, c, _)) = best else {
        return Ok(None);
    };
    let t_half = (9.0 * c.abs().sqrt() + 40.0).min(400.0);
    let (h_coarse, floor_coarse) = kernel_vertical_sum(q, ln_z, c, t_half, 2.0)?;
    let (h_fine, floor_fine) = kernel_vertical_sum(q, ln_z, c, t_half, 1.0)?;
    let (residues, res_est) = left_residue_sum(q, ln_z, count)?;
    let value = -(h_fine + residues);
    let est = (h_fine - h_coarse).abs() + floor_fine.max(floor_coarse) + res_est;
    Ok(Some((value, est)))
}

fn aux_general_spec(q: f64) -> FoxHSpec {
    if q > 0.0 {
        FoxHSpec {
            m: 1,
            n: 2,
            upper: vec![(1.0, 1.0), (1.0, 1.0), (1.0, q)],
            lower: vec![(1.0, 1.0), (0.0, 1.0)],
        }
    } else {
        FoxHSpec {
            m: 1,
            n: 2,
            upper: vec![(1.0, 1.0), (1.0, 1.0)],
            lower: vec![(1.0, 1.0), (0.0, 1.0), (0.0, -q)],
        }
    }
}

impl AuxEvaluator {
    /// Preferred route: closed forms where they exist, the transform
    /// engine elsewhere.
    pub fn new(eta: f64, q: f64, branch_count: usize, ln_s_span: f64) -> Result<Self> {
        Self::build(eta, q, branch_count, ln_s_span, 1e-9, true)
    }

    /// Preferred route with an explicit per-value relative tolerance.
    pub fn with_tolerance(
        eta: f64,
        q: f64,
        branch_count: usize,
        ln_s_span: f64,
        rel_tol: f64,
    ) -> Result<Self> {
        Self::build(eta, q, branch_count, ln_s_span, rel_tol, true)
    }

    /// Forces the general transform route even where a closed form
    /// exists, so the two can be compared.
    pub fn general(eta: f64, q: f64, branch_count: usize, ln_s_span: f64) -> Result<Self> {
        Self::build(eta, q, branch_count, ln_s_span, 1e-9, false)
    }

    pub fn for_combiner(spec: &CombinerSpec, ln_s_span: f64) -> Result<Self> {
        let params = spec.params()?;
        Self::new(params.eta, params.q, spec.branch_count, ln_s_span)
    }

    /// True when eval dispatches to a closed form rather than the engine.
    pub fn is_closed_form(&self) -> bool {
        matches!(
            self.route,
            AuxRoute::LogShifted
                | AuxRoute::Oscillatory
                | AuxRoute::OscillatoryLow
                | AuxRoute::Relaying
        )
    }

    fn build(
        eta: f64,
        q: f64,
        branch_count: usize,
        ln_s_span: f64,
        rel_tol: f64,
        allow_closed: bool,
    ) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) || !(q.is_finite() && q != 0.0) || branch_count == 0 {
            return Err(Error::InvalidParams(format!(
                "auxiliary kernel needs positive eta, nonzero q and branches, got eta={eta}, q={q}, L={branch_count}"
            )));
        }
        if !(rel_tol > 0.0 && rel_tol < 0.1) {
            return Err(Error::InvalidParams(format!(
                "kernel tolerance {rel_tol} outside (0, 0.1)"
            )));
        }
        let ln_z0 = eta.ln() - q * (branch_count as f64).ln();
        let route = if allow_closed && (q - 1.0).abs() < 1e-12 {
            AuxRoute::LogShifted
        } else if allow_closed && (q - 2.0).abs() < 1e-12 {
            AuxRoute::Oscillatory
        } else if allow_closed && (q + 1.0).abs() < 1e-12 {
            AuxRoute::Relaying
        } else if allow_closed && (q + 2.0).abs() < 1e-12 {
            AuxRoute::OscillatoryLow
        } else if q.abs() > 2.0 + 1e-12 {
            // No vertical contour separates the pole families once the
            // kernel slope difference passes 2; the residue series stays
            // convergent for every argument.
            AuxRoute::Series
        } else {
            let h = validate_foxh(&aux_general_spec(q))?;
            if h.a_star() > 0.25 {
                let span = ln_z0.abs() + q.abs() * ln_s_span + 8.0;
                AuxRoute::Swept(PreparedSweep::new(&h, span)?, h)
            } else {
                AuxRoute::Auto(h)
            }
        };
        Ok(AuxEvaluator {
            route,
            ln_z0,
            q,
            rel_tol,
        })
    }

    /// Kernel value and an error estimate at transform variable s.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "kernel argument must be positive, got {s}"
            )));
        }
        let ln_z = self.ln_z0 - self.q * s.ln();
        match &self.route {
            AuxRoute::LogShifted => {
                if -ln_z > 700.0 {
                    return Ok((0.0, 1e-300));
                }
                let a = exp_integral_ei(-(-ln_z).exp())?;
                Ok((a, 1e-14 * (a.abs() + 1.0)))
            }
            AuxRoute::Oscillatory => {
                let arg = (-0.5 * ln_z).exp();
                if arg > 1e12 {
                    return Ok((0.0, 1e-12));
                }
                let a = 2.0 * cosine_integral(arg)?;
                Ok((a, 1e-13 * (a.abs() + 1.0)))
            }
            AuxRoute::OscillatoryLow => {
                // The residue sum at order 2 telescopes into the cosine
                // integral; below z = 1 the direct sum avoids cancelling
                // Ci against its logarithm.
                if ln_z > 700.0 {
                    let a = -2.0 * EULER_MASCHERONI - ln_z;
                    return Ok((a, 1e-13 * (a.abs() + 1.0)));
                }
                let z = ln_z.exp();
                let a = if z < 1.0 {
                    -kernel_residue_series(z, 2.0)?.0
                } else {
                    2.0 * cosine_integral(z.sqrt())? - 2.0 * EULER_MASCHERONI - ln_z
                };
                Ok((a, 1e-13 * (a.abs() + 1.0)))
            }
            AuxRoute::Relaying => {
                let z = ln_z.exp();
                // Small z cancels Ei(-z) against ln z + gamma; sum the
                // series tail directly instead.
                let a = if z < 0.5 {
                    let mut term = -z;
                    let mut acc = -z;
                    for k in 2..60 {
                        term *= -z / k as f64;
                        acc += term / k as f64;
                        if term.abs() < 1e-17 * acc.abs() {
                            break;
                        }
                    }
                    acc
                } else {
                    exp_integral_ei(-z)? - ln_z - EULER_MASCHERONI
                };
                Ok((a, 1e-14 * (a.abs() + 1.0)))
            }
            AuxRoute::Swept(sweep, h) => {
                let z = ln_z.exp();
                let mut hv = sweep.eval(z)?;
                if hv.error_estimate > self.rel_tol * (hv.value.abs() + 1e-6) {
                    hv = eval_foxh_auto(h, z, (self.rel_tol * 0.1).max(1e-12))?;
                }
                let mut value = -hv.value;
                let mut est = hv.error_estimate;
                // The pole-separating contour has an absolute cancellation
                // floor; once the kernel value drops below it (q <= 1 with
                // small z), a line through the magnitude minimum still
                // resolves it.
                if est > self.rel_tol * value.abs()
                    && self.q > 0.0
                    && self.q <= 1.0 + 1e-12
                    && ln_z < -2.0
                {
                    if let Some((sv, se)) = saddle_shifted_aux(self.q, ln_z)? {
                        if se < est {
                            value = sv;
                            est = se;
                        }
                    }
                }
                Ok((value, est))
            }
            AuxRoute::Auto(h) => {
                let hv = eval_foxh_auto(h, ln_z.exp(), (self.rel_tol * 0.1).max(1e-12))?;
                Ok((-hv.value, hv.error_estimate))
            }
            // Closing the contour over the integer pole family gives
            //   q > 0: A = q C - ln z - S(1/z, q)
            //   q < 0: A = -S(z, -q)
            // with S the residue series; the three closed forms above are
            // the q = 1, 2, -1 instances of the same sums.
            AuxRoute::Series => {
                if self.q > 0.0 {
                    let (sum, est) = kernel_residue_series((-ln_z).exp(), self.q)?;
                    let a = self.q * EULER_MASCHERONI - ln_z - sum;
                    Ok((a, est + 1e-15 * (a.abs() + 1.0)))
                } else {
                    let (sum, est) = kernel_residue_series(ln_z.exp(), -self.q)?;
                    Ok((-sum, est + 1e-15 * (sum.abs() + 1.0)))
                }
            }
        }
    }
}

/// Closed-form kernel value where one exists (q in {1, 2, -1, -2});
/// None for every other order.
pub fn aux_closed_form(eta: f64, q: f64, branch_count: usize, s: f64) -> Result<Option<f64>> {
    let aux = AuxEvaluator::new(eta, q, branch_count, s.ln().abs().max(4.0))?;
    if !aux.is_closed_form() {
        return Ok(None);
    }
    Ok(Some(aux.eval(s)?.0))
}

/// One-shot kernel evaluation for a combiner specification.
pub fn aux_c(spec: &CombinerSpec, s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!(
            "kernel argument must be positive, got {s}"
        )));
    }
    let aux = AuxEvaluator::for_combiner(spec, s.ln().abs().max(4.0))?;
    Ok(aux.eval(s)?.0)
}

/// Power-mean triple standing in for a limit combiner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateParams {
    pub order: u32,
    pub eta: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// Bandwidth-scaled capacity in bits/s.
    pub capacity: f64,
    /// Capacity per unit bandwidth.
    pub capacity_bits_per_hz: f64,
    /// Node-doubling difference plus accumulated evaluator estimates,
    /// scaled like `capacity`.
    pub error_estimate: f64,
    /// Node count of the reported (finest) pass.
    pub nodes: usize,
    pub warnings: Vec<String>,
    /// Present when a limit scheme was computed through its power-mean
    /// stand-in.
    pub surrogate: Option<SurrogateParams>,
}

/// One quadrature pass of sum w K(s) D(s): the raw total (nats), the
/// accumulated evaluator estimate, and the single worst node.
struct Pass {
    total: f64,
    component_est: f64,
    mass: f64,
    worst_node: (f64, f64),
}

fn run_pass(
    nodes: &[(f64, f64)],
    mut kernel: impl FnMut(f64) -> Result<(f64, f64)>,
    mut transform_part: impl FnMut(f64) -> Result<(f64, f64)>,
) -> Result<Pass> {
    let mut total = 0.0;
    let mut est = 0.0;
    let mut mass = 0.0;
    let mut worst = (f64::NAN, 0.0);
    for &(s, w) in nodes {
        let (a, a_est) = kernel(s)?;
        let (dp, dp_est) = transform_part(s)?;
        let term = w * a * dp;
        if !term.is_finite() {
            return Err(Error::Numerical(format!(
                "capacity integrand is not finite at s = {s:.6e}"
            )));
        }
        total += term;
        mass += term.abs();
        let node_est = w.abs() * (a_est * dp.abs() + a.abs() * dp_est);
        if node_est > worst.1 {
            worst = (s, node_est);
        }
        est += node_est;
    }
    Ok(Pass {
        total,
        component_est: est + 1e-14 * mass,
        mass,
        worst_node: worst,
    })
}

/// Runs the integral at the requested node count and at double that
/// count; their difference is the quadrature part of the error estimate.
/// Up to three further doublings with tightened inner tolerances are
/// attempted before giving up. The difference bounds the coarser pass,
/// so the reported finer value is usually well inside the estimate.
fn integrate_with_doubling(
    quad: &QuadratureSpec,
    bandwidth: f64,
    surrogate: Option<SurrogateParams>,
    mut pass_at: impl FnMut(usize, f64) -> Result<Pass>,
) -> Result<CapacityResult> {
    let mut warnings: Vec<String> = Vec::new();
    let coarse = pass_at(quad.node_count, 1.0)?;
    let mut nodes_used = 2 * quad.node_count;
    let mut reported = pass_at(nodes_used, 1.0)?;
    let mut est = ((coarse.total - reported.total).abs() + reported.component_est) / LN_2;
    let mut tol_scale = 1.0;
    for _ in 0..3 {
        if est <= quad.tolerance {
            break;
        }
        tol_scale *= 0.1;
        warnings.push(format!(
            "estimate {est:.3e} at {nodes_used} nodes exceeded the tolerance {:.1e}; doubled to {}",
            quad.tolerance,
            2 * nodes_used
        ));
        let finer = pass_at(2 * nodes_used, tol_scale)?;
        est = ((reported.total - finer.total).abs() + finer.component_est) / LN_2;
        reported = finer;
        nodes_used *= 2;
    }
    if est > quad.tolerance {
        return Err(Error::Numerical(format!(
            "capacity quadrature did not converge: estimate {est:.3e} above tolerance {:.1e} at {nodes_used} nodes",
            quad.tolerance
        )));
    }
    if reported.worst_node.1 / LN_2 > quad.tolerance {
        warnings.push(format!(
            "node s = {:.6e} carries an estimate of {:.3e} on its own",
            reported.worst_node.0,
            reported.worst_node.1 / LN_2
        ));
    }
    let mut per_hz = reported.total / LN_2;
    if per_hz < -(1e-6 * (reported.mass / LN_2).max(1.0)) {
        return Err(Error::Numerical(format!(
            "capacity integral produced {per_hz}, negative beyond the numerical slack"
        )));
    }
    if per_hz < 0.0 {
        warnings.push(format!("clamped a residual of {per_hz:.3e} to zero"));
        per_hz = 0.0;
    }
    Ok(CapacityResult {
        capacity: bandwidth * per_hz,
        capacity_bits_per_hz: per_hz,
        error_estimate: bandwidth * est,
        nodes: nodes_used,
        warnings,
        surrogate,
    })
}

fn check_bandwidth(bandwidth: f64) -> Result<()> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::InvalidParams(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    Ok(())
}

/// For |q| > 2 the kernel oscillates with amplitude growing like
/// exp(cos(pi/|q|) L s / eta^{1/|q|}) while the transform derivative
/// decays only algebraically, so the capacity integral diverges even
/// though the kernel itself stays computable.
fn divergence_gate(params: &CombinerParams) -> Result<()> {
    if params.q.abs() > 2.0 + 1e-12 {
        return Err(Error::Divergent(format!(
            "kernel order |q| = {} grows exponentially in s against an algebraically decaying \
             transform product; the capacity integral diverges for |q| > 2 (cap the surrogate \
             order at 2 or use the sampling oracle)",
            params.q.abs()
        )));
    }
    Ok(())
}

/// Largest |ln u| the map reaches for a given node count.
fn map_ln_u_max(node_count: usize) -> f64 {
    let theta = std::f64::consts::PI / (2.0 * node_count as f64);
    let t = theta.cos();
    ((1.0 + t) / (1.0 - t)).ln()
}

/// The transform derivative behaves like s^{min_mxi/|p| - 1} at the origin
/// (p < 0) or the far end (p > 0); warping by k turns that into
/// u^{k min_mxi/|p| - 1}, so k >= 3|p|/min_mxi keeps the integrand twice
/// differentiable at the endpoint. The cap keeps u^k inside f64 range.
fn mapping_power(mapping: QuadMapping, p: f64, min_mxi: f64, node_count: usize) -> f64 {
    match mapping {
        QuadMapping::Rational => 1.0,
        QuadMapping::RationalPow(k) => k,
        QuadMapping::Auto => {
            let k = 4.0f64.max(3.0 * p.abs() / min_mxi);
            k.min((600.0 / map_ln_u_max(node_count)).max(2.0)).min(64.0)
        }
    }
}

fn branch_groups(branches: &[EgkParams]) -> (Vec<&EgkParams>, Vec<usize>) {
    let mut groups: Vec<(&EgkParams, usize)> = Vec::new();
    for b in branches {
        match groups.iter_mut().find(|(g, _)| *g == b) {
            Some((_, count)) => *count += 1,
            None => groups.push((b, 1)),
        }
    }
    groups.into_iter().unzip()
}

fn span_of(nodes: &[(f64, f64)]) -> f64 {
    nodes
        .first()
        .zip(nodes.last())
        .map(|(a, b)| a.0.ln().abs().max(b.0.ln().abs()))
        .unwrap_or(34.0)
}

/// Derivative of the product of per-group transforms, with each group's
/// value raised to its multiplicity.
fn product_derivative(
    evaluators: &[MgfEvaluator],
    counts: &[usize],
    mgf_tol: f64,
    s: f64,
    values: &mut [f64],
    derivs: &mut [f64],
) -> Result<(f64, f64)> {
    for (i, ev) in evaluators.iter().enumerate() {
        values[i] = ev.value(s)?;
        derivs[i] = ev.derivative(s)?;
    }
    let mut dp = 0.0;
    for j in 0..counts.len() {
        let mut term = counts[j] as f64 * derivs[j] * values[j].powi(counts[j] as i32 - 1);
        for (k, &v) in values.iter().enumerate() {
            if k != j {
                term *= v.powi(counts[k] as i32);
            }
        }
        dp += term;
    }
    // Every summand carries the same sign, so per-factor relative errors
    // add without cancellation and the bound needs no absolute floor
    // (a floor would blow up under the far-end mapped weights).
    let dp_est = 2.0 * mgf_tol * counts.iter().sum::<usize>() as f64 * dp.abs();
    Ok((dp, dp_est))
}

/// Ergodic capacity for independent, not necessarily identical branches.
pub fn ergodic_capacity_inid(
    branches: &[EgkParams],
    combiner: &CombinerSpec,
    bandwidth: f64,
    quad: &QuadratureSpec,
) -> Result<CapacityResult> {
    let params = combiner.params()?;
    if branches.len() != combiner.branch_count {
        return Err(Error::InvalidParams(format!(
            "combiner declares {} branches but {} parameter sets were given",
            combiner.branch_count,
            branches.len()
        )));
    }
    let surrogate = combiner.scheme.uses_surrogate_order().then(|| SurrogateParams {
        order: combiner.surrogate_order.unwrap_or(DEFAULT_SURROGATE_ORDER),
        eta: params.eta,
        p: params.p,
        q: params.q,
    });
    capacity_from_params(branches, &params, surrogate, bandwidth, quad)
}

/// Capacity for an explicit (eta, p, q) triple; the catalogue-driven entry
/// points delegate here.
pub fn ergodic_capacity_custom(
    branches: &[EgkParams],
    params: &CombinerParams,
    bandwidth: f64,
    quad: &QuadratureSpec,
) -> Result<CapacityResult> {
    capacity_from_params(branches, params, None, bandwidth, quad)
}

fn capacity_from_params(
    branches: &[EgkParams],
    params: &CombinerParams,
    surrogate: Option<SurrogateParams>,
    bandwidth: f64,
    quad: &QuadratureSpec,
) -> Result<CapacityResult> {
    quad.check()?;
    check_bandwidth(bandwidth)?;
    divergence_gate(params)?;
    if branches.is_empty() {
        return Err(Error::InvalidParams("at least one branch is required".into()));
    }
    let min_mxi = branches
        .iter()
        .map(|b| b.m() * b.xi())
        .fold(f64::INFINITY, f64::min);
    let (groups, counts) = branch_groups(branches);
    integrate_with_doubling(quad, bandwidth, surrogate, |node_count, tol_scale| {
        let mgf_tol = (quad.tolerance * 0.02 * tol_scale).clamp(1e-13, 1e-7);
        let warp = mapping_power(quad.mapping, params.p, min_mxi, node_count);
        let nodes = map_semi_infinite(node_count, warp)?;
        let ln_s_span = span_of(&nodes);
        let aux = AuxEvaluator::with_tolerance(
            params.eta,
            params.q,
            branches.len(),
            ln_s_span,
            mgf_tol.max(1e-12),
        )?;
        let evaluators = groups
            .iter()
            .map(|g| MgfEvaluator::with_ln_s_span(g, params.p, mgf_tol, ln_s_span))
            .collect::<Result<Vec<_>>>()?;
        let mut values = vec![0.0; counts.len()];
        let mut derivs = vec![0.0; counts.len()];
        run_pass(
            &nodes,
            |s| aux.eval(s),
            |s| product_derivative(&evaluators, &counts, mgf_tol, s, &mut values, &mut derivs),
        )
    })
}

/// Capacity for identically distributed branches.
pub fn ergodic_capacity_iid(
    branch: &EgkParams,
    combiner: &CombinerSpec,
    bandwidth: f64,
    quad: &QuadratureSpec,
) -> Result<CapacityResult> {
    let branches = vec![branch.clone(); combiner.branch_count];
    ergodic_capacity_inid(&branches, combiner, bandwidth, quad)
}

/// Capacity from a caller-supplied joint transform of the branch vector:
/// M(s) = E[exp(-s sum gamma_k^p)] and its s-derivative. Values outside
/// (0, 1] or positive derivatives beyond slack are rejected.
pub fn ergodic_capacity_joint(
    combiner: &CombinerSpec,
    bandwidth: f64,
    quad: &QuadratureSpec,
    mgf: impl Fn(f64) -> Result<f64>,
    mgf_derivative: impl Fn(f64) -> Result<f64>,
) -> Result<CapacityResult> {
    let params = combiner.params()?;
    quad.check()?;
    check_bandwidth(bandwidth)?;
    divergence_gate(&params)?;
    integrate_with_doubling(quad, bandwidth, None, |node_count, tol_scale| {
        let warp = mapping_power(quad.mapping, params.p, 1.0, node_count);
        let nodes = map_semi_infinite(node_count, warp)?;
        let ln_s_span = span_of(&nodes);
        let rel_tol = (quad.tolerance * 0.02 * tol_scale).clamp(1e-12, 1e-7);
        let aux = AuxEvaluator::with_tolerance(
            params.eta,
            params.q,
            combiner.branch_count,
            ln_s_span,
            rel_tol,
        )?;
        run_pass(
            &nodes,
            |s| aux.eval(s),
            |s| {
                let m = mgf(s)?;
                if !(-1e-6..=1.0 + 1e-6).contains(&m) {
                    return Err(Error::MgfContract(format!(
                        "joint transform value {m} at s={s} is outside (0, 1]"
                    )));
                }
                let dm = mgf_derivative(s)?;
                if dm > 1e-9 {
                    return Err(Error::MgfContract(format!(
                        "joint transform derivative {dm} at s={s} is positive"
                    )));
                }
                Ok((dm.min(0.0), 1e-12 * (dm.abs() + 1.0)))
            },
        )
    })
}

/// Maximal-ratio capacity through both single-integral forms: the survival
/// form int exp(-s)(1 - M(s))/s ds and the derivative form
/// int Ei(-s) dM/ds ds. The pair must agree wherever the transforms are
/// accurate, which makes it a cheap end-to-end consistency probe.
pub fn capacity_mrc_baselines(
    branches: &[EgkParams],
    bandwidth: f64,
    quad: &QuadratureSpec,
) -> Result<(CapacityResult, CapacityResult)> {
    quad.check()?;
    check_bandwidth(bandwidth)?;
    if branches.is_empty() {
        return Err(Error::InvalidParams("at least one branch is required".into()));
    }
    let min_mxi = branches
        .iter()
        .map(|b| b.m() * b.xi())
        .fold(f64::INFINITY, f64::min);
    let (groups, counts) = branch_groups(branches);
    let build = |node_count: usize, tol_scale: f64| -> Result<(Vec<(f64, f64)>, Vec<MgfEvaluator>, f64)> {
        let mgf_tol = (quad.tolerance * 0.02 * tol_scale).clamp(1e-13, 1e-7);
        let warp = mapping_power(quad.mapping, 1.0, min_mxi, node_count);
        let nodes = map_semi_infinite(node_count, warp)?;
        let ln_s_span = span_of(&nodes);
        let evaluators = groups
            .iter()
            .map(|g| MgfEvaluator::with_ln_s_span(g, 1.0, mgf_tol, ln_s_span))
            .collect::<Result<Vec<_>>>()?;
        Ok((nodes, evaluators, mgf_tol))
    };
    let branch_total = counts.iter().sum::<usize>() as f64;
    let survival = integrate_with_doubling(quad, bandwidth, None, |node_count, tol_scale| {
        let (nodes, evaluators, mgf_tol) = build(node_count, tol_scale)?;
        run_pass(
            &nodes,
            |s| Ok(((-s).exp() / s, 2.2e-16 * ((-s).exp() / s).abs())),
            |s| {
                let mut m = 1.0;
                for (ev, &c) in evaluators.iter().zip(&counts) {
                    m *= ev.value(s)?.powi(c as i32);
                }
                Ok((1.0 - m, mgf_tol * branch_total * (m.abs() + 1e-3) + 1e-16))
            },
        )
    })?;
    let derivative = integrate_with_doubling(quad, bandwidth, None, |node_count, tol_scale| {
        let (nodes, evaluators, mgf_tol) = build(node_count, tol_scale)?;
        let mut values = vec![0.0; counts.len()];
        let mut derivs = vec![0.0; counts.len()];
        run_pass(
            &nodes,
            |s| {
                let e = exp_integral_ei(-s)?;
                Ok((e, 1e-15 * (e.abs() + 1.0)))
            },
            |s| product_derivative(&evaluators, &counts, mgf_tol, s, &mut values, &mut derivs),
        )
    })?;
    Ok((survival, derivative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egk::{named_special_case, NamedCase};

    fn rayleigh(mean_snr: f64) -> EgkParams {
        named_special_case(NamedCase::Rayleigh, mean_snr).unwrap()
    }

    #[test]
    fn map_normalizes_the_exponential() {
        let nodes = map_semi_infinite(128, 2.0).unwrap();
        let total: f64 = nodes.iter().map(|&(s, w)| w * (-s).exp()).sum();
        assert!((total - 1.0).abs() < 1e-8, "squared map: {total}");
        let plain = map_semi_infinite(128, 1.0).unwrap();
        let total: f64 = plain.iter().map(|&(s, w)| w * (-s).exp()).sum();
        assert!((total - 1.0).abs() < 1e-4, "plain map: {total}");
        // e * E1(1)
        let nodes = map_semi_infinite(128, 2.0).unwrap();
        let total: f64 = nodes.iter().map(|&(s, w)| w * (-s).exp() / (1.0 + s)).sum();
        assert!((total - 0.59634736232319407).abs() < 1e-6, "shifted: {total}");
    }

    #[test]
    fn map_error_shrinks_with_node_count() {
        let err = |n: usize| {
            let total: f64 = map_semi_infinite(n, 2.0)
                .unwrap()
                .iter()
                .map(|&(s, w)| w * (-s).exp())
                .sum();
            (total - 1.0).abs()
        };
        assert!(err(256) < err(64) * 0.1);
    }

    #[test]
    fn map_handles_algebraic_endpoint_singularity() {
        // integral s^{-3/4} exp(-s) = Gamma(1/4)
        let nodes = map_semi_infinite(128, 8.0).unwrap();
        let total: f64 = nodes
            .iter()
            .map(|&(s, w)| w * s.powf(-0.75) * (-s).exp())
            .sum();
        let reference = 3.6256099082219083;
        assert!(
            (total - reference).abs() < 1e-8 * reference,
            "warped map: {total}"
        );
    }

    #[test]
    fn combiner_catalogue_matches_the_report_forms() {
        let l = 4usize;
        let cases = [
            (Scheme::Mrc, None, (4.0, 1.0, 1.0)),
            (Scheme::Egc, None, (4.0, 0.5, 2.0)),
            (Scheme::Rmsc, None, (2.0, 2.0, 0.5)),
            (Scheme::AfMultihop, None, (0.25, -1.0, -1.0)),
            (Scheme::Sc, Some(8), (1.0, 8.0, 0.125)),
            (Scheme::Cascaded, Some(2), (1.0, 2.0, 2.0)),
            (Scheme::GeometricMean, Some(2), (1.0, 0.5, 2.0)),
            (Scheme::MinBound, Some(8), (1.0, -8.0, -0.125)),
        ];
        for (scheme, order, (eta, p, q)) in cases {
            let mut spec = CombinerSpec::new(scheme, l);
            if let Some(o) = order {
                spec = spec.with_surrogate_order(o);
            }
            let cp = spec.params().unwrap();
            assert_eq!((cp.eta, cp.p, cp.q), (eta, p, q), "{scheme}");
        }
        assert!(CombinerSpec::new(Scheme::Mrc, l)
            .with_surrogate_order(4)
            .params()
            .is_err());
    }

    #[test]
    fn end_snr_matches_direct_combining() {
        let gammas = [0.7, 2.3, 5.1, 1.9];
        let l = gammas.len();
        let sum: f64 = gammas.iter().sum();
        let mrc = CombinerSpec::new(Scheme::Mrc, l).params().unwrap();
        assert!((mrc.end_snr(&gammas) - sum).abs() < 1e-12 * sum);
        let egc = CombinerSpec::new(Scheme::Egc, l).params().unwrap();
        let egc_direct = gammas.iter().map(|g| g.sqrt()).sum::<f64>().powi(2) / l as f64;
        assert!((egc.end_snr(&gammas) - egc_direct).abs() < 1e-12 * egc_direct);
        let af = CombinerSpec::new(Scheme::AfMultihop, l).params().unwrap();
        let af_direct = 1.0 / gammas.iter().map(|g| 1.0 / g).sum::<f64>();
        assert!((af.end_snr(&gammas) - af_direct).abs() < 1e-12 * af_direct);
        // High-order surrogates approach their limit forms.
        let sc = CombinerSpec::new(Scheme::Sc, l)
            .with_surrogate_order(64)
            .params()
            .unwrap();
        assert!((sc.end_snr(&gammas) - 5.1).abs() < 0.15);
        let mn = CombinerSpec::new(Scheme::MinBound, l)
            .with_surrogate_order(64)
            .params()
            .unwrap();
        assert!((mn.end_snr(&gammas) - 0.7).abs() < 0.02);
        // Equal inputs collapse exactly: pq = 1 for SC, and the cascaded
        // report gives the L-fold product.
        let equal = [3.0; 4];
        assert!((sc.end_snr(&equal) - 3.0).abs() < 1e-12);
        let casc = CombinerSpec::new(Scheme::Cascaded, l)
            .with_surrogate_order(2)
            .params()
            .unwrap();
        assert!((casc.end_snr(&equal) - 81.0).abs() < 1e-9);
    }

    #[test]
    fn joint_route_reproduces_rayleigh_references() {
        // Single Rayleigh branch: E[log2(1+gamma)] = exp(1/snr) E1(1/snr) / ln 2.
        let cases = [
            (1.0, 0.8603473822708860),
            (10.0, 2.9065148084148050),
            (100.0, 5.8840482336834735),
        ];
        for (snr, reference) in cases {
            let combiner = CombinerSpec::new(Scheme::Mrc, 1);
            let quad = QuadratureSpec::default();
            let r = ergodic_capacity_joint(
                &combiner,
                1.0,
                &quad,
                |s| Ok(1.0 / (1.0 + snr * s)),
                |s| Ok(-snr / ((1.0 + snr * s) * (1.0 + snr * s))),
            )
            .unwrap();
            assert!(
                (r.capacity_bits_per_hz - reference).abs() < 1e-8,
                "snr {snr}: {} vs {reference}",
                r.capacity_bits_per_hz
            );
            assert!(r.error_estimate < quad.tolerance);
            assert_eq!(r.capacity, r.capacity_bits_per_hz);
        }
        // Bandwidth scales the bits/s field only.
        let combiner = CombinerSpec::new(Scheme::Mrc, 1);
        let r = ergodic_capacity_joint(
            &combiner,
            3.0,
            &QuadratureSpec::default(),
            |s| Ok(1.0 / (1.0 + 10.0 * s)),
            |s| Ok(-10.0 / ((1.0 + 10.0 * s) * (1.0 + 10.0 * s))),
        )
        .unwrap();
        assert!((r.capacity - 3.0 * r.capacity_bits_per_hz).abs() < 1e-12 * r.capacity);
    }

    #[test]
    fn general_kernel_matches_closed_forms() {
        let l = 2usize;
        for i in 0..17 {
            let s = 10f64.powf(-2.0 + 0.25 * i as f64);
            // q = 1 with eta = L
            let h = validate_foxh(&aux_general_spec(1.0)).unwrap();
            let z = (l as f64) / (l as f64 * s);
            let hv = eval_foxh_auto(&h, z, 1e-11).unwrap();
            let closed = exp_integral_ei(-s).unwrap();
            assert!(
                (-hv.value - closed).abs() < 1e-8 * (closed.abs() + 1.0),
                "q=1, s={s}: {} vs {closed}",
                -hv.value
            );
            // q = 2 with eta = L
            let h = validate_foxh(&aux_general_spec(2.0)).unwrap();
            let z = 1.0 / (l as f64 * s * s);
            let hv = eval_foxh_auto(&h, z, 1e-11).unwrap();
            let closed = 2.0 * cosine_integral((l as f64).sqrt() * s).unwrap();
            assert!(
                (-hv.value - closed).abs() < 1e-8 * (closed.abs() + 1.0),
                "q=2, s={s}: {} vs {closed}",
                -hv.value
            );
            // q = -1 with eta = 1/L
            let h = validate_foxh(&aux_general_spec(-1.0)).unwrap();
            let hv = eval_foxh_auto(&h, s, 1e-11).unwrap();
            let closed = exp_integral_ei(-s).unwrap() - s.ln() - EULER_MASCHERONI;
            assert!(
                (-hv.value - closed).abs() < 1e-8 * (closed.abs() + 1.0),
                "q=-1, s={s}: {} vs {closed}",
                -hv.value
            );
        }
    }

    #[test]
    fn shifted_contour_resolves_exponentially_small_kernel_values() {
        // Forced engine route at q = 1, where the kernel decays like
        // exp(-s) and a pole-separating contour bottoms out near its
        // absolute cancellation floor around 1e-16.
        let aux = AuxEvaluator::general(1.0, 1.0, 1, 100f64.ln()).unwrap();
        for (s, reference) in [
            (10.0, -4.1569689296853242774e-6),
            (30.0, -3.0215520106888125448e-15),
            (100.0, -3.6835977616820321802e-46),
        ] {
            let (a, est) = aux.eval(s).unwrap();
            assert!(
                (a - reference).abs() < 1e-8 * reference.abs(),
                "s={s}: kernel {a:e} vs reference {reference:e}"
            );
            assert!(est < 1e-8 * reference.abs(), "s={s}: estimate {est:e}");
        }
        // Fractional q crosses genuine poles on the way to the shifted
        // line; the residue corrections must keep the two routes equal.
        // ln z = -3 corresponds to s = e^6 for q = 1/2 with eta = L = 1,
        // where the standard contour is still accurate.
        let (direct, direct_est) = saddle_shifted_aux(0.5, -3.0).unwrap().unwrap();
        let aux_half = AuxEvaluator::new(1.0, 0.5, 1, 8.0).unwrap();
        let (swept, swept_est) = aux_half.eval(6.0f64.exp()).unwrap();
        assert!(
            (direct - swept).abs() < 1e-9 * swept.abs() + 10.0 * (swept_est + direct_est),
            "q=1/2: shifted {direct:e} vs swept {swept:e} (ests {direct_est:e}, {swept_est:e})"
        );
    }

    #[test]
    fn root_mean_square_kernel_matches_hypergeometric_form() {
        // q = 1/2, eta = sqrt(L): A(s) = (Ei(s) - sqrt(16 s / pi)
        // 2F2(1/2, 1; 3/2, 3/2; s)) / 2, numerically stable for moderate s.
        let l = 3usize;
        let aux = AuxEvaluator::new((l as f64).sqrt(), 0.5, l, 30.0).unwrap();
        for s in [0.25, 0.5, 1.0, 2.0, 5.0] {
            let (a, _) = aux.eval(s).unwrap();
            let f = crate::special::hyp2f2(0.5, 1.0, 1.5, 1.5, s).unwrap();
            let closed = 0.5
                * (crate::special::exp_integral_ei(s).unwrap()
                    - (16.0 * s / std::f64::consts::PI).sqrt() * f);
            assert!(
                (a - closed).abs() < 1e-7 * closed.abs().max(1.0),
                "s={s}: kernel {a} vs closed {closed}"
            );
        }
    }

    #[test]
    fn surrogate_orders_beyond_two_are_rejected_as_divergent() {
        let branches = vec![rayleigh(10.0); 2];
        let quad = QuadratureSpec::default();
        for scheme in [Scheme::Cascaded, Scheme::GeometricMean] {
            let combiner = CombinerSpec::new(scheme, 2).with_surrogate_order(8);
            match ergodic_capacity_inid(&branches, &combiner, 1.0, &quad) {
                Err(Error::Divergent(_)) => {}
                other => panic!("{scheme}: expected divergence error, got {other:?}"),
            }
            let combiner = CombinerSpec::new(scheme, 2).with_surrogate_order(2);
            let r = ergodic_capacity_inid(&branches, &combiner, 1.0, &quad).unwrap();
            assert!(r.capacity_bits_per_hz > 0.0, "{scheme} at order 2");
            let sp = r.surrogate.unwrap();
            assert_eq!(sp.order, 2);
        }
    }

    #[test]
    fn capacity_increases_with_mean_snr() {
        let combiner = CombinerSpec::new(Scheme::Mrc, 2);
        let quad = QuadratureSpec::default();
        let mut last = 0.0;
        for snr in [0.1, 1.0, 10.0] {
            let branches = vec![rayleigh(snr); 2];
            let c = ergodic_capacity_inid(&branches, &combiner, 1.0, &quad)
                .unwrap()
                .capacity_bits_per_hz;
            assert!(c > last, "snr {snr}: {c} not above {last}");
            last = c;
        }
    }

    #[test]
    fn kernel_route_agrees_across_node_counts() {
        let branches = vec![rayleigh(10.0); 2];
        let combiner = CombinerSpec::new(Scheme::Mrc, 2);
        let coarse = ergodic_capacity_inid(
            &branches,
            &combiner,
            1.0,
            &QuadratureSpec {
                node_count: 192,
                ..Default::default()
            },
        )
        .unwrap()
        .capacity_bits_per_hz;
        let fine = ergodic_capacity_inid(&branches, &combiner, 1.0, &QuadratureSpec::default())
            .unwrap()
            .capacity_bits_per_hz;
        assert!(
            (coarse - fine).abs() < 1e-8 * (1.0 + fine),
            "{coarse} vs {fine}"
        );
    }

    #[test]
    fn grouped_product_matches_joint_closure() {
        let branch = rayleigh(5.0);
        let combiner = CombinerSpec::new(Scheme::Mrc, 2);
        let quad = QuadratureSpec {
            node_count: 96,
            ..Default::default()
        };
        let grouped =
            ergodic_capacity_inid(&[branch.clone(), branch.clone()], &combiner, 1.0, &quad)
                .unwrap()
                .capacity_bits_per_hz;
        let ev = MgfEvaluator::new(&branch, 1.0, 1e-10).unwrap();
        let joint = ergodic_capacity_joint(
            &combiner,
            1.0,
            &quad,
            |s| {
                let m = ev.value(s)?;
                Ok(m * m)
            },
            |s| {
                let m = ev.value(s)?;
                let d = ev.derivative(s)?;
                Ok(2.0 * m * d)
            },
        )
        .unwrap()
        .capacity_bits_per_hz;
        assert!(
            (grouped - joint).abs() < 1e-9 * (1.0 + joint),
            "{grouped} vs {joint}"
        );
    }

    #[test]
    fn geometric_mean_directions_bracket_the_same_limit() {
        let branches = vec![rayleigh(10.0); 2];
        let quad = QuadratureSpec {
            node_count: 192,
            ..Default::default()
        };
        let above = ergodic_capacity_inid(
            &branches,
            &CombinerSpec::new(Scheme::GeometricMean, 2).with_surrogate_order(2),
            1.0,
            &quad,
        )
        .unwrap()
        .capacity_bits_per_hz;
        let below =
            ergodic_capacity_custom(&branches, &geometric_mean_low_params(2).unwrap(), 1.0, &quad)
                .unwrap()
                .capacity_bits_per_hz;
        // Power means of order 1/2 and -1/2 bracket the geometric mean.
        assert!(
            above > below && (above - below) / above < 0.2,
            "above {above}, below {below}"
        );
    }

    /// Adaptive (non-node-based) evaluation of int exp(-s)(1 - M(s))/s ds
    /// for the branch sum, as an independent check on the fixed grids.
    fn mrc_capacity_via_sum_mgf(branches: &[EgkParams]) -> Result<f64> {
        let (groups, counts) = branch_groups(branches);
        let evaluators = groups
            .iter()
            .map(|g| MgfEvaluator::new(g, 1.0, 1e-10))
            .collect::<Result<Vec<_>>>()?;
        let integrand = |s: f64| -> f64 {
            let mut product = 1.0;
            for (ev, &c) in evaluators.iter().zip(&counts) {
                product *= ev.value(s).unwrap_or(f64::NAN).powi(c as i32);
            }
            (-s).exp() * (1.0 - product) / s
        };
        let (value, _) = crate::quad::integrate_adaptive(&integrand, 1e-10, 60.0, 1e-9, 1.0)?;
        Ok(value / LN_2)
    }

    #[test]
    fn kernel_route_matches_the_sum_transform_reference() {
        let branches = vec![rayleigh(10.0), rayleigh(4.0)];
        let combiner = CombinerSpec::new(Scheme::Mrc, 2);
        let kernel = ergodic_capacity_inid(&branches, &combiner, 1.0, &QuadratureSpec::default())
            .unwrap()
            .capacity_bits_per_hz;
        let reference = mrc_capacity_via_sum_mgf(&branches).unwrap();
        assert!(
            (kernel - reference).abs() < 1e-6 * (1.0 + reference),
            "kernel {kernel} vs reference {reference}"
        );
    }

    #[test]
    fn both_baseline_forms_agree_with_the_kernel_route() {
        let branches = vec![rayleigh(10.0), rayleigh(4.0), rayleigh(1.0)];
        let quad = QuadratureSpec::default();
        let (survival, derivative) = capacity_mrc_baselines(&branches, 1.0, &quad).unwrap();
        let kernel = ergodic_capacity_inid(
            &branches,
            &CombinerSpec::new(Scheme::Mrc, 3),
            1.0,
            &quad,
        )
        .unwrap();
        let a = survival.capacity_bits_per_hz;
        let b = derivative.capacity_bits_per_hz;
        let c = kernel.capacity_bits_per_hz;
        assert!((a - b).abs() < 1e-7 * (1.0 + a), "survival {a} vs derivative {b}");
        assert!((a - c).abs() < 1e-7 * (1.0 + a), "survival {a} vs kernel {c}");
        assert!(survival.error_estimate < quad.tolerance);
        assert!(derivative.error_estimate < quad.tolerance);
    }

    #[test]
    fn kernel_series_agrees_with_contour_integration() {
        // The residue-series route and the Mellin-Barnes route overlap for
        // moderate slopes; both must produce the same kernel values.
        for (eta, q, l) in [(2.0, 1.25, 2usize), (1.7, 1.5, 3), (0.5, -1.5, 2)] {
            let contour = AuxEvaluator::general(eta, q, l, 8.0).unwrap();
            let z0 = eta * (l as f64).powf(-q);
            for s in [0.3, 1.0, 4.0] {
                let (via_contour, _) = contour.eval(s).unwrap();
                let ln_z = z0.ln() - q * s.ln();
                let via_series = if q > 0.0 {
                    let (sum, _) = kernel_residue_series((-ln_z).exp(), q).unwrap();
                    q * EULER_MASCHERONI - ln_z - sum
                } else {
                    let (sum, _) = kernel_residue_series(ln_z.exp(), -q).unwrap();
                    -sum
                };
                assert!(
                    (via_contour - via_series).abs() < 1e-9 * (via_series.abs() + 1.0),
                    "eta={eta}, q={q}, s={s}: contour {via_contour} vs series {via_series}"
                );
            }
        }
    }

    #[test]
    fn steep_kernel_orders_match_frozen_references() {
        // Arbitrary-precision residue sums, 30 digits.
        let cases = [
            (1.0, 3.0, 2usize, 0.5, 1.5656738544268349),
            (1.0, -3.0, 2, 0.5, -0.16597314027776368),
            (1.0, 2.5, 2, 1.0, 1.6028571732188053),
        ];
        for (eta, q, l, s, reference) in cases {
            let aux = AuxEvaluator::new(eta, q, l, 8.0).unwrap();
            assert!(!aux.is_closed_form());
            let (a, est) = aux.eval(s).unwrap();
            assert!(
                (a - reference).abs() < 1e-13 * reference.abs(),
                "q={q}: {a} vs {reference}"
            );
            assert!(est < 1e-12 * (reference.abs() + 1.0));
        }
        // The q = -2 shortcut, once on each side of its branch point.
        let shortcut = [
            (1.0, -2.0, 2usize, 0.7, -0.90336263285613703),
            (1.0, -2.0, 1, 0.7071067811865475, -0.24484915122914402),
        ];
        for (eta, q, l, s, reference) in shortcut {
            let aux = AuxEvaluator::new(eta, q, l, 8.0).unwrap();
            assert!(aux.is_closed_form());
            let (a, _) = aux.eval(s).unwrap();
            assert!(
                (a - reference).abs() < 1e-12 * reference.abs(),
                "q={q}, s={s}: {a} vs {reference}"
            );
        }
    }

    #[test]
    fn closed_form_shortcut_reports_only_where_it_applies() {
        // MRC triple: closed form present and equal to the general kernel.
        let spec = CombinerSpec::new(Scheme::Mrc, 2);
        let closed = aux_closed_form(2.0, 1.0, 2, 0.5).unwrap().unwrap();
        let general = aux_c(&spec, 0.5).unwrap();
        assert!((closed - general).abs() < 1e-9 * (closed.abs() + 1.0));
        assert!((closed - exp_integral_ei(-0.5).unwrap()).abs() < 1e-12);
        // Cascaded order 2 rides the q = 2 form; order 3 has no shortcut
        // but still evaluates through the residue series.
        assert!(aux_closed_form(1.0, 2.0, 2, 0.5).unwrap().is_some());
        let casc = CombinerSpec::new(Scheme::Cascaded, 2).with_surrogate_order(3);
        assert!(aux_closed_form(1.0, 3.0, 2, 0.5).unwrap().is_none());
        assert!(aux_c(&casc, 0.5).unwrap().is_finite());
        assert!(aux_c(&spec, -1.0).is_err());
    }
}
