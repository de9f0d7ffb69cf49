//! Extended generalized-K composite fading.
//!
//! The instantaneous SNR is the product of two generalized-gamma factors,
//! one for multipath (shape `m`, tail exponent `xi`) and one for shadowing
//! (shape `m_s`, tail exponent `xi_s`), normalized so `mean_snr` is the
//! first moment. This module provides the density, the generalized MGF
//! `E[exp(-s * gamma^p)]` and its s-derivative as Mellin-Barnes kernels,
//! an exact sampler, and a catalogue of named special cases.

use crate::error::{Error, Result};
use crate::foxh::{eval_foxh_auto_scaled, validate_foxh, FoxHSpec, PreparedSweep, ValidatedFoxH};
use crate::special::{extended_incomplete_gamma, ln_gamma};
use rand::Rng;
use rand_distr::{Distribution, Gamma};

/// Shadowing shape used to emulate a shadowing-free channel. At this value
/// the shadowing factor's coefficient of variation is below 2 percent and
/// capacity changes stay under the surrogate-insensitivity tolerance.
pub const NO_SHADOWING_M_S: f64 = 50.0;
/// Tail exponent paired with [`NO_SHADOWING_M_S`].
pub const NO_SHADOWING_XI_S: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EgkParams {
    m: f64,
    xi: f64,
    m_s: f64,
    xi_s: f64,
    mean_snr: f64,
    beta: f64,
    beta_s: f64,
    ln_gamma_m: f64,
    ln_gamma_m_s: f64,
}

impl EgkParams {
    pub fn new(m: f64, xi: f64, m_s: f64, xi_s: f64, mean_snr: f64) -> Result<Self> {
        for (name, v) in [
            ("m", m),
            ("xi", xi),
            ("m_s", m_s),
            ("xi_s", xi_s),
            ("mean_snr", mean_snr),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let ln_gamma_m = ln_gamma(m)?;
        let ln_gamma_m_s = ln_gamma(m_s)?;
        // Normalizers beta = Gamma(m + 1/xi)/Gamma(m) pin E[gamma] = mean_snr.
        let beta = (ln_gamma(m + 1.0 / xi)? - ln_gamma_m).exp();
        let beta_s = (ln_gamma(m_s + 1.0 / xi_s)? - ln_gamma_m_s).exp();
        Ok(EgkParams {
            m,
            xi,
            m_s,
            xi_s,
            mean_snr,
            beta,
            beta_s,
            ln_gamma_m,
            ln_gamma_m_s,
        })
    }

    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn m_s(&self) -> f64 {
        self.m_s
    }
    pub fn xi_s(&self) -> f64 {
        self.xi_s
    }
    pub fn mean_snr(&self) -> f64 {
        self.mean_snr
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn beta_s(&self) -> f64 {
        self.beta_s
    }

    /// beta * beta_s / mean_snr, the scale entering every kernel argument.
    fn arg_scale(&self) -> f64 {
        self.beta * self.beta_s / self.mean_snr
    }
}

/// SNR density. Expressed through the extended incomplete gamma function,
/// which carries the shadowing integral after the multipath factor is
/// integrated out.
pub fn egk_pdf(params: &EgkParams, gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Domain(format!(
            "density argument must be positive, got {gamma}"
        )));
    }
    let c = params.arg_scale();
    let m_xi = params.m * params.xi;
    let alpha = params.m_s - m_xi / params.xi_s;
    let b = (c * gamma).powf(params.xi);
    let tail = extended_incomplete_gamma(alpha, 0.0, b, params.xi / params.xi_s)?;
    let ln_pref = params.xi.ln() - params.ln_gamma_m - params.ln_gamma_m_s
        + m_xi * c.ln()
        + (m_xi - 1.0) * gamma.ln();
    Ok(ln_pref.exp() * tail)
}

/// One Mellin-Barnes kernel of the generalized MGF family: the validated
/// H-instance together with the s-independent prefactor pieces.
struct MgfKernel {
    h: ValidatedFoxH,
    ln_pref: f64,
    sign: f64,
    s_exponent: f64,
    inv_p: f64,
    ln_scale: f64,
}

impl MgfKernel {
    fn value(params: &EgkParams, power: f64) -> Result<Self> {
        check_power(power)?;
        let (m, n, upper, lower) = if power > 0.0 {
            (
                2,
                1,
                vec![(1.0, 1.0 / power)],
                vec![
                    (params.m, 1.0 / params.xi),
                    (params.m_s, 1.0 / params.xi_s),
                ],
            )
        } else {
            (
                3,
                0,
                vec![],
                vec![
                    (params.m, 1.0 / params.xi),
                    (params.m_s, 1.0 / params.xi_s),
                    (0.0, 1.0 / power.abs()),
                ],
            )
        };
        let h = validate_foxh(&FoxHSpec { m, n, upper, lower })?;
        Ok(MgfKernel {
            h,
            ln_pref: -params.ln_gamma_m - params.ln_gamma_m_s - power.abs().ln(),
            sign: 1.0,
            s_exponent: 0.0,
            inv_p: 1.0 / power,
            ln_scale: params.arg_scale().ln(),
        })
    }

    fn derivative(params: &EgkParams, power: f64) -> Result<Self> {
        check_power(power)?;
        let (m, n, upper, lower) = if power > 0.0 {
            (
                3,
                1,
                vec![(1.0, 1.0 / power), (0.0, 1.0)],
                vec![
                    (1.0, 1.0),
                    (params.m, 1.0 / params.xi),
                    (params.m_s, 1.0 / params.xi_s),
                ],
            )
        } else {
            (
                4,
                0,
                vec![(0.0, 1.0)],
                vec![
                    (1.0, 1.0),
                    (params.m, 1.0 / params.xi),
                    (params.m_s, 1.0 / params.xi_s),
                    (0.0, 1.0 / power.abs()),
                ],
            )
        };
        let h = validate_foxh(&FoxHSpec { m, n, upper, lower })?;
        Ok(MgfKernel {
            h,
            ln_pref: -params.ln_gamma_m - params.ln_gamma_m_s - 2.0 * power.abs().ln(),
            sign: power.signum(),
            s_exponent: -1.0,
            inv_p: 1.0 / power,
            ln_scale: params.arg_scale().ln(),
        })
    }

    fn z(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::Domain(format!(
                "transform variable must be positive, got {s}"
            )));
        }
        Ok((self.ln_scale - self.inv_p * s.ln()).exp())
    }

    /// Log of the full prefactor at this s, handed to the engine as its
    /// output shift: the raw H value scales like Gamma(m) Gamma(m_s) and
    /// overflows on its own once the shape parameters grow, while the
    /// shifted product stays of MGF size.
    fn ln_shift(&self, s: f64) -> f64 {
        self.ln_pref + self.s_exponent * s.ln()
    }
}

fn check_power(power: f64) -> Result<()> {
    if !power.is_finite() || power == 0.0 {
        return Err(Error::InvalidParams(format!(
            "transform power must be nonzero and finite, got {power}"
        )));
    }
    Ok(())
}

fn clamp_mgf_value(value: f64, slack: f64) -> Result<f64> {
    if !(-slack..=1.0 + slack).contains(&value) {
        return Err(Error::Numerical(format!(
            "transform value {value} escaped [0, 1] beyond the numerical slack"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

fn clamp_mgf_derivative(value: f64, slack: f64) -> Result<f64> {
    if value > slack {
        return Err(Error::Numerical(format!(
            "transform derivative {value} is positive beyond the numerical slack"
        )));
    }
    Ok(value.min(0.0))
}

/// Generalized MGF `E[exp(-s * gamma^p)]` for nonzero real `p`.
pub fn egk_generalized_mgf(params: &EgkParams, power: f64, s: f64) -> Result<f64> {
    let kernel = MgfKernel::value(params, power)?;
    let hv = eval_foxh_auto_scaled(&kernel.h, kernel.z(s)?, 1e-11, kernel.ln_shift(s))?;
    clamp_mgf_value(kernel.sign * hv.value, (1e-6f64).max(3.0 * hv.error_estimate))
}

/// d/ds of the generalized MGF. Always nonpositive.
pub fn egk_generalized_mgf_derivative(params: &EgkParams, power: f64, s: f64) -> Result<f64> {
    let kernel = MgfKernel::derivative(params, power)?;
    let hv = eval_foxh_auto_scaled(&kernel.h, kernel.z(s)?, 1e-11, kernel.ln_shift(s))?;
    clamp_mgf_derivative(kernel.sign * hv.value, (1e-9f64).max(3.0 * hv.error_estimate))
}

/// Prepared MGF evaluator for argument sweeps. Both kernels are baked onto
/// fixed vertical contours once; each evaluation is then a single pass of
/// exponentials. When a fixed contour is badly conditioned for a given
/// argument, the evaluation transparently falls back to the adaptive
/// single-shot router.
pub struct MgfEvaluator {
    value_kernel: MgfKernel,
    deriv_kernel: MgfKernel,
    value_prepared: PreparedSweep,
    deriv_prepared: PreparedSweep,
    rel_tol: f64,
}

impl MgfEvaluator {
    /// Contours sized for the widest argument range a default capacity grid
    /// can produce.
    pub fn new(params: &EgkParams, power: f64, rel_tol: f64) -> Result<Self> {
        Self::with_ln_s_span(params, power, rel_tol, 34.0)
    }

    /// Contours sized for |ln s| up to the given span.
    pub fn with_ln_s_span(
        params: &EgkParams,
        power: f64,
        rel_tol: f64,
        ln_s_span: f64,
    ) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 0.1) {
            return Err(Error::InvalidParams(format!(
                "relative tolerance must be in (0, 0.1), got {rel_tol}"
            )));
        }
        if !(ln_s_span.is_finite() && ln_s_span >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "ln s span must be finite and nonnegative, got {ln_s_span}"
            )));
        }
        let value_kernel = MgfKernel::value(params, power)?;
        let deriv_kernel = MgfKernel::derivative(params, power)?;
        let ln_z_span = value_kernel.ln_scale.abs() + (ln_s_span + 2.0) * value_kernel.inv_p.abs();
        let value_prepared = PreparedSweep::new(&value_kernel.h, ln_z_span)?;
        let deriv_prepared = PreparedSweep::new(&deriv_kernel.h, ln_z_span)?;
        Ok(MgfEvaluator {
            value_kernel,
            deriv_kernel,
            value_prepared,
            deriv_prepared,
            rel_tol,
        })
    }

    fn eval(&self, kernel: &MgfKernel, prepared: &PreparedSweep, s: f64) -> Result<(f64, f64)> {
        let z = kernel.z(s)?;
        let shift = kernel.ln_shift(s);
        let hv = prepared.eval_scaled(z, shift)?;
        let mut value = kernel.sign * hv.value;
        let mut est = hv.error_estimate;
        if est > self.rel_tol * (value.abs() + 1e-6) {
            let hv = eval_foxh_auto_scaled(&kernel.h, z, self.rel_tol * 0.1, shift)?;
            value = kernel.sign * hv.value;
            est = hv.error_estimate;
        }
        Ok((value, est))
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        let (value, est) = self.eval(&self.value_kernel, &self.value_prepared, s)?;
        clamp_mgf_value(value, (1e-6f64).max(3.0 * est))
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        let (value, est) = self.eval(&self.deriv_kernel, &self.deriv_prepared, s)?;
        clamp_mgf_derivative(value, (1e-9f64).max(3.0 * est))
    }
}

/// Exact sampler: gamma = coef * G1^(1/xi) * G2^(1/xi_s) with unit-scale
/// gamma variates G1, G2.
pub struct EgkSampler {
    multipath: Gamma<f64>,
    shadowing: Gamma<f64>,
    inv_xi: f64,
    inv_xi_s: f64,
    coef: f64,
}

impl EgkSampler {
    pub fn new(params: &EgkParams) -> Result<Self> {
        let multipath = Gamma::new(params.m, 1.0)
            .map_err(|e| Error::InvalidParams(format!("multipath shape: {e}")))?;
        let shadowing = Gamma::new(params.m_s, 1.0)
            .map_err(|e| Error::InvalidParams(format!("shadowing shape: {e}")))?;
        Ok(EgkSampler {
            multipath,
            shadowing,
            inv_xi: 1.0 / params.xi,
            inv_xi_s: 1.0 / params.xi_s,
            coef: params.mean_snr / (params.beta * params.beta_s),
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let g1: f64 = self.multipath.sample(rng);
        let g2: f64 = self.shadowing.sample(rng);
        self.coef * g1.powf(self.inv_xi) * g2.powf(self.inv_xi_s)
    }
}

/// Named fading scenarios that reduce to specific parameter corners.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedCase {
    Rayleigh,
    NakagamiM { m: f64 },
    GeneralizedNakagami { m: f64, xi: f64 },
    GeneralizedK { m: f64, m_s: f64 },
    Egk { m: f64, xi: f64, m_s: f64, xi_s: f64 },
}

/// Resolve a named case, filling shadow-free cases with the default
/// no-shadowing surrogate.
pub fn named_special_case(case: NamedCase, mean_snr: f64) -> Result<EgkParams> {
    named_with(case, mean_snr, NO_SHADOWING_M_S)
}

/// Resolve a shadow-free named case with an explicit surrogate shadowing
/// shape, for sensitivity sweeps. Cases that already model shadowing
/// reject an override.
pub fn named_special_case_with_surrogate(
    case: NamedCase,
    mean_snr: f64,
    surrogate_m_s: f64,
) -> Result<EgkParams> {
    match case {
        NamedCase::GeneralizedK { .. } | NamedCase::Egk { .. } => Err(Error::InvalidParams(
            "surrogate shadowing shape only applies to shadow-free cases".into(),
        )),
        _ => named_with(case, mean_snr, surrogate_m_s),
    }
}

fn named_with(case: NamedCase, mean_snr: f64, surrogate_m_s: f64) -> Result<EgkParams> {
    match case {
        NamedCase::Rayleigh => {
            EgkParams::new(1.0, 1.0, surrogate_m_s, NO_SHADOWING_XI_S, mean_snr)
        }
        NamedCase::NakagamiM { m } => {
            EgkParams::new(m, 1.0, surrogate_m_s, NO_SHADOWING_XI_S, mean_snr)
        }
        NamedCase::GeneralizedNakagami { m, xi } => {
            EgkParams::new(m, xi, surrogate_m_s, NO_SHADOWING_XI_S, mean_snr)
        }
        NamedCase::GeneralizedK { m, m_s } => EgkParams::new(m, 1.0, m_s, 1.0, mean_snr),
        NamedCase::Egk { m, xi, m_s, xi_s } => EgkParams::new(m, xi, m_s, xi_s, mean_snr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_adaptive;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rayleigh(mean_snr: f64) -> EgkParams {
        named_special_case(NamedCase::Rayleigh, mean_snr).unwrap()
    }

    #[test]
    fn params_reject_nonpositive_inputs() {
        assert!(EgkParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(EgkParams::new(1.0, -2.0, 1.0, 1.0, 1.0).is_err());
        assert!(EgkParams::new(1.0, 1.0, f64::NAN, 1.0, 1.0).is_err());
        assert!(EgkParams::new(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn normalizers_match_moment_ratios() {
        let p = EgkParams::new(1.0, 1.0, 50.0, 1.0, 1.0).unwrap();
        assert!((p.beta() - 1.0).abs() < 1e-14);
        assert!((p.beta_s() - 50.0).abs() < 1e-12 * 50.0);
        let q = EgkParams::new(0.5, 2.0, 2.0, 1.0, 1.0).unwrap();
        // Gamma(1)/Gamma(0.5) = 1/sqrt(pi)
        assert!((q.beta() - 0.5641895835477563).abs() < 1e-14);
    }

    #[test]
    fn surrogate_override_rejected_for_shadowed_cases() {
        assert!(named_special_case_with_surrogate(
            NamedCase::GeneralizedK { m: 1.0, m_s: 2.0 },
            1.0,
            200.0
        )
        .is_err());
        let p = named_special_case_with_surrogate(NamedCase::Rayleigh, 1.0, 200.0).unwrap();
        assert_eq!(p.m_s(), 200.0);
    }

    #[test]
    fn generalized_k_transform_matches_closed_form() {
        // m=1, m_s=2, xi=xi_s=1, unit mean: E[exp(-gamma)] has the closed
        // form 4*(1/2 - e^2 E_1(2)) = 0.5546855324471097.
        let p = EgkParams::new(1.0, 1.0, 2.0, 1.0, 1.0).unwrap();
        let v = egk_generalized_mgf(&p, 1.0, 1.0).unwrap();
        assert!(
            (v - 0.5546855324471097).abs() < 1e-9,
            "transform {v} off closed form"
        );
    }

    #[test]
    fn transform_tends_to_one_at_small_argument() {
        for p in [rayleigh(1.0), EgkParams::new(2.5, 2.0, 3.0, 0.75, 10.0).unwrap()] {
            let v = egk_generalized_mgf(&p, 1.0, 1e-9).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "small-s transform {v}");
        }
    }

    #[test]
    fn transform_decreases_in_s() {
        let p = EgkParams::new(1.5, 1.0, 4.0, 1.0, 5.0).unwrap();
        for power in [0.5, 1.0, 2.0, -1.0] {
            let mut last = f64::INFINITY;
            for i in 0..12 {
                let s = 10f64.powf(-3.0 + 0.5 * i as f64);
                let v = egk_generalized_mgf(&p, power, s).unwrap();
                assert!(v < last + 1e-12, "power {power}: not decreasing at s={s}");
                assert!((0.0..=1.0).contains(&v));
                last = v;
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let p = EgkParams::new(1.5, 1.0, 4.0, 1.0, 5.0).unwrap();
        for power in [0.5, 1.0, 2.0, -1.0] {
            for s in [0.3, 1.0, 4.0] {
                let h = 1e-5 * s;
                let fd = (egk_generalized_mgf(&p, power, s + h).unwrap()
                    - egk_generalized_mgf(&p, power, s - h).unwrap())
                    / (2.0 * h);
                let d = egk_generalized_mgf_derivative(&p, power, s).unwrap();
                assert!(d <= 0.0);
                assert!(
                    (d - fd).abs() < 1e-5 * fd.abs().max(1e-3),
                    "power {power}, s {s}: derivative {d} vs finite difference {fd}"
                );
            }
        }
    }

    #[test]
    fn derivative_at_small_s_recovers_mean() {
        // d/ds E[exp(-s*gamma)] at s->0 is -E[gamma] = -mean_snr.
        let p = rayleigh(7.0);
        let d = egk_generalized_mgf_derivative(&p, 1.0, 1e-8).unwrap();
        assert!((d + 7.0).abs() < 1e-4 * 7.0, "derivative {d}");
    }

    #[test]
    fn prepared_evaluator_agrees_with_single_shot() {
        let p = EgkParams::new(2.0, 1.0, 3.0, 1.0, 10.0).unwrap();
        for power in [1.0, 0.5, -1.0] {
            let ev = MgfEvaluator::new(&p, power, 1e-9).unwrap();
            for i in 0..13 {
                let s = 10f64.powf(-6.0 + i as f64);
                let a = ev.value(s).unwrap();
                let b = egk_generalized_mgf(&p, power, s).unwrap();
                assert!(
                    (a - b).abs() <= 1e-7 * b.abs() + 1e-12,
                    "power {power}, s {s}: prepared {a} vs single-shot {b}"
                );
                let da = ev.derivative(s).unwrap();
                let db = egk_generalized_mgf_derivative(&p, power, s).unwrap();
                assert!(
                    (da - db).abs() <= 1e-7 * db.abs() + 1e-12,
                    "power {power}, s {s}: prepared derivative {da} vs {db}"
                );
            }
        }
    }

    #[test]
    fn density_normalizes_and_reproduces_the_mean() {
        for p in [
            rayleigh(1.0),
            EgkParams::new(2.5, 2.0, 3.0, 0.75, 4.0).unwrap(),
        ] {
            let snr = p.mean_snr();
            let (mass, _) = integrate_adaptive(
                &|g| egk_pdf(&p, g).unwrap(),
                1e-9,
                60.0 * snr,
                1e-9,
                1.0,
            )
            .unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
            let (mean, _) = integrate_adaptive(
                &|g| g * egk_pdf(&p, g).unwrap(),
                1e-9,
                120.0 * snr,
                1e-9,
                snr,
            )
            .unwrap();
            assert!((mean - snr).abs() < 1e-5 * snr, "mean {mean} vs {snr}");
        }
    }

    #[test]
    fn transform_matches_density_quadrature() {
        let p = EgkParams::new(1.5, 1.0, 3.0, 1.0, 2.0).unwrap();
        for (power, s) in [(1.0, 0.7), (0.5, 1.3), (2.0, 0.4)] {
            let (direct, _) = integrate_adaptive(
                &|g| (-s * g.powf(power)).exp() * egk_pdf(&p, g).unwrap(),
                1e-10,
                200.0,
                1e-10,
                1.0,
            )
            .unwrap();
            let v = egk_generalized_mgf(&p, power, s).unwrap();
            assert!(
                (v - direct).abs() < 1e-7,
                "power {power}, s {s}: kernel {v} vs quadrature {direct}"
            );
        }
    }

    #[test]
    fn sampler_mean_is_unbiased() {
        let p = EgkParams::new(2.0, 1.5, 3.0, 1.0, 5.0).unwrap();
        let sampler = EgkSampler::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mean = (0..n).map(|_| sampler.sample(&mut rng)).sum::<f64>() / n as f64;
        // Loose 5-sigma band around the exact mean.
        assert!((mean - 5.0).abs() < 0.12, "sample mean {mean}");
    }
}
