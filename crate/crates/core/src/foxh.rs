//! Numeric Mellin-Barnes engine for Fox H functions of positive real
//! argument.
//!
//! A spec lists gamma-factor parameter pairs in the usual (m, n; upper,
//! lower) layout. Validation enumerates both numerator pole families,
//! discounts poles cancelled by denominator gammas, rejects specs whose
//! left and right families collide, and reports the indicator numbers
//! a*, delta and mu together with the pole-free strip.
//!
//! Evaluation integrates the kernel in log-space along either a vertical
//! line (exponential decay, a* > 0) or a tanh-bent path that picks up
//! algebraic-to-exponential decay from the delta < 0 direction when a*
//! vanishes. Kernels with delta > 0 are first mirrored through the
//! v -> -v reflection, which swaps the parameter groups and inverts the
//! argument. Offsets are placed by a one-dimensional search of the
//! integrand magnitude along the real axis, which follows the saddle
//! into deep negative territory when heavy cancellation demands it.

use crate::error::{Error, Result};
use crate::quad::{GL32_NODES, GL32_WEIGHTS};
use crate::special::ln_gamma_complex;
use num_complex::Complex64;

/// Pole coincidence closer than this invalidates a spec.
pub const POLE_SEPARATION: f64 = 1e-6;

/// Integer-detection tolerance for cancellation analysis.
const INTEGER_TOL: f64 = 1e-9;

/// Hard cap for the contour half-extent doubling loop.
const HALF_EXTENT_CAP: f64 = 640.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FoxHSpec {
    /// Number of leading lower pairs contributing Gamma(b + B v).
    pub m: usize,
    /// Number of leading upper pairs contributing Gamma(1 - a - A v).
    pub n: usize,
    /// Upper parameter pairs (a_j, A_j), slopes strictly positive.
    pub upper: Vec<(f64, f64)>,
    /// Lower parameter pairs (b_j, B_j), slopes strictly positive.
    pub lower: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    /// Real part of the vertical integration line.
    pub offset: f64,
    /// Half-extent T of the truncated line [-T, T].
    pub half_extent: f64,
    /// Total node budget along the line (>= 64).
    pub node_count: usize,
}

/// Evaluation result with its accuracy diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct HValue {
    pub value: f64,
    /// Truncation plus refinement error estimate (absolute).
    pub error_estimate: f64,
    /// Magnitude of the imaginary residual, which would be zero in exact
    /// arithmetic for real argument.
    pub imag_residual: f64,
    pub nodes: usize,
}

/// A spec that passed validation, with pole families resolved.
#[derive(Debug, Clone)]
pub struct ValidatedFoxH {
    spec: FoxHSpec,
    a_star: f64,
    delta: f64,
    mu: f64,
    strip: (f64, f64),
    left_poles: Vec<f64>,
    right_poles: Vec<f64>,
}

fn near_nonpositive_integer(x: f64) -> bool {
    x < 0.5 && (x - x.round()).abs() < INTEGER_TOL && x.round() <= 0.0
}

impl FoxHSpec {
    fn check_shape(&self) -> Result<()> {
        if self.m > self.lower.len() || self.n > self.upper.len() {
            return Err(Error::InvalidParams(format!(
                "group sizes m={} n={} exceed parameter lists ({} lower, {} upper)",
                self.m,
                self.n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        for &(c, slope) in self.upper.iter().chain(self.lower.iter()) {
            if !c.is_finite() || !slope.is_finite() || slope <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "parameter pair ({c}, {slope}) needs a finite coefficient and slope > 0"
                )));
            }
        }
        Ok(())
    }

    /// Pole order bookkeeping at a candidate position: numerator orders
    /// from the two pole-carrying groups and the zero order supplied by
    /// the denominator gammas. A pole survives only while its numerator
    /// order exceeds the denominator order, so a double pole hit by one
    /// denominator zero correctly survives as a simple pole.
    fn orders_at(&self, v: f64) -> (usize, usize, usize) {
        let mut m_order = 0;
        for &(b, bb) in &self.lower[..self.m] {
            if near_nonpositive_integer(b + bb * v) {
                m_order += 1;
            }
        }
        let mut n_order = 0;
        for &(a, aa) in &self.upper[..self.n] {
            if near_nonpositive_integer(1.0 - a - aa * v) {
                n_order += 1;
            }
        }
        let mut d_order = 0;
        for &(b, bb) in &self.lower[self.m..] {
            if near_nonpositive_integer(1.0 - b - bb * v) {
                d_order += 1;
            }
        }
        for &(a, aa) in &self.upper[self.n..] {
            if near_nonpositive_integer(a + aa * v) {
                d_order += 1;
            }
        }
        (m_order, n_order, d_order)
    }
}

/// Validate a spec: shape checks, pole bookkeeping with cancellation,
/// collision detection between the left and right families, indicator
/// numbers, and existence of a contour direction that converges for
/// positive real argument.
pub fn validate_foxh(spec: &FoxHSpec) -> Result<ValidatedFoxH> {
    spec.check_shape()?;

    // Enumerate candidate pole positions. 400 terms per family reaches
    // far deeper than any offset the evaluator will place.
    const KMAX: usize = 400;
    let mut candidates = Vec::new();
    for &(b, bb) in &spec.lower[..spec.m] {
        for k in 0..KMAX {
            candidates.push(-(b + k as f64) / bb);
        }
    }
    for &(a, aa) in &spec.upper[..spec.n] {
        for k in 0..KMAX {
            candidates.push((1.0 - a + k as f64) / aa);
        }
    }
    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());
    candidates.dedup_by(|a, b| (*a - *b).abs() < INTEGER_TOL);

    // Keep a candidate only while numerator pole order exceeds the
    // denominator zero order there. A position where both the left and
    // right groups contribute surviving order is a head-on collision.
    let mut left = Vec::new();
    let mut right = Vec::new();
    for &v in &candidates {
        let (m_order, n_order, d_order) = spec.orders_at(v);
        if m_order + n_order <= d_order {
            continue;
        }
        if m_order > 0 && n_order > 0 {
            return Err(Error::CoincidentPoles {
                left: v,
                right: v,
                gap: 0.0,
            });
        }
        if m_order > 0 {
            left.push(v);
        } else {
            right.push(v);
        }
    }
    left.sort_by(|x, y| y.partial_cmp(x).unwrap());
    right.sort_by(|x, y| x.partial_cmp(y).unwrap());

    // Near-misses between the families leave no usable gap either.
    for &vl in &left {
        if right.first().map_or(true, |&r0| vl < r0 - POLE_SEPARATION) {
            break;
        }
        for &vr in &right {
            if vr > vl + POLE_SEPARATION {
                break;
            }
            if (vl - vr).abs() < POLE_SEPARATION {
                return Err(Error::CoincidentPoles {
                    left: vl,
                    right: vr,
                    gap: (vl - vr).abs(),
                });
            }
        }
    }

    let strip_lo = left.first().copied().unwrap_or(f64::NEG_INFINITY);
    let strip_hi = right.first().copied().unwrap_or(f64::INFINITY);
    if strip_lo + POLE_SEPARATION >= strip_hi {
        return Err(Error::CoincidentPoles {
            left: strip_lo,
            right: strip_hi,
            gap: strip_hi - strip_lo,
        });
    }

    let sum_slope = |it: &[(f64, f64)]| it.iter().map(|p| p.1).sum::<f64>();
    let a_star = sum_slope(&spec.upper[..spec.n]) - sum_slope(&spec.upper[spec.n..])
        + sum_slope(&spec.lower[..spec.m])
        - sum_slope(&spec.lower[spec.m..]);
    let delta = sum_slope(&spec.lower) - sum_slope(&spec.upper);
    let mu = spec.lower.iter().map(|p| p.0).sum::<f64>()
        - spec.upper.iter().map(|p| p.0).sum::<f64>()
        + 0.5 * (spec.upper.len() as f64 - spec.lower.len() as f64);

    let trivial = spec.m == 0 && spec.n == 0;
    if !trivial && a_star <= 0.0 && delta == 0.0 {
        return Err(Error::NoConvergentSector { a_star, delta });
    }

    Ok(ValidatedFoxH {
        spec: spec.clone(),
        a_star,
        delta,
        mu,
        strip: (strip_lo, strip_hi),
        left_poles: left,
        right_poles: right,
    })
}

impl ValidatedFoxH {
    pub fn a_star(&self) -> f64 {
        self.a_star
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    /// Open interval of admissible vertical offsets.
    pub fn strip(&self) -> (f64, f64) {
        self.strip
    }
    pub fn spec(&self) -> &FoxHSpec {
        &self.spec
    }

    /// A contour that is feasible for arguments of moderate size: offset
    /// in the middle of the strip (or one unit inside a half-bounded
    /// strip) and the default extent and density.
    pub fn default_contour(&self) -> ContourSpec {
        let (lo, hi) = self.strip;
        let offset = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            (false, false) => 0.0,
        };
        let half_extent = 40.0;
        ContourSpec {
            offset,
            half_extent,
            node_count: (16.0 * 2.0 * half_extent) as usize,
        }
    }

    /// log Theta(v): sum of numerator log-gammas minus denominator ones.
    fn ln_kernel(&self, v: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(b, bb) in &self.spec.lower[..self.spec.m] {
            acc += ln_gamma_complex(Complex64::new(b, 0.0) + bb * v)?;
        }
        for &(a, aa) in &self.spec.upper[..self.spec.n] {
            acc += ln_gamma_complex(Complex64::new(1.0 - a, 0.0) - aa * v)?;
        }
        for &(b, bb) in &self.spec.lower[self.spec.m..] {
            acc -= ln_gamma_complex(Complex64::new(1.0 - b, 0.0) - bb * v)?;
        }
        for &(a, aa) in &self.spec.upper[self.spec.n..] {
            acc -= ln_gamma_complex(Complex64::new(a, 0.0) + aa * v)?;
        }
        Ok(acc)
    }

    fn nearest_pole_distance(&self, c: f64) -> f64 {
        let mut d = f64::INFINITY;
        for &p in self.left_poles.iter().take(8) {
            d = d.min((c - p).abs());
        }
        for &p in self.right_poles.iter().take(8) {
            d = d.min((c - p).abs());
        }
        d
    }

    /// Real-axis magnitude of the integrand, the objective for offset
    /// placement.
    fn ln_magnitude_on_axis(&self, c: f64, ln_z: f64) -> f64 {
        match self.ln_kernel(Complex64::new(c, 1e-30)) {
            Ok(v) => v.re - c * ln_z,
            Err(_) => f64::INFINITY,
        }
    }

    /// Characteristic radial scale of the kernel for argument z, used to
    /// size bent contours and saddle-search windows.
    fn radial_scale(&self, ln_z: f64) -> f64 {
        if self.delta == 0.0 {
            return 1.0;
        }
        let mut ln_rho = ln_z;
        for &(_, aa) in &self.spec.upper {
            ln_rho += aa * aa.ln();
        }
        for &(_, bb) in &self.spec.lower {
            ln_rho -= bb * bb.ln();
        }
        (ln_rho / self.delta).clamp(-600.0, 600.0).exp()
    }

    /// Mirror through v -> -v: swaps the roles of the upper and lower
    /// lists and inverts the argument. Used to normalize delta > 0 specs
    /// before bending the contour rightward.
    fn reflected(&self) -> Result<ValidatedFoxH> {
        let swapped = FoxHSpec {
            m: self.spec.n,
            n: self.spec.m,
            upper: self.spec.lower.iter().map(|&(b, bb)| (1.0 - b, bb)).collect(),
            lower: self.spec.upper.iter().map(|&(a, aa)| (1.0 - a, aa)).collect(),
        };
        validate_foxh(&swapped)
    }
}

/// Integration path v(t) = c + kappa t tanh(t/2) + i t. kappa = 0 is the
/// vertical line; kappa > 0 bends both tails rightward, where z^{-v}
/// supplies decay for delta < 0 kernels.
#[derive(Debug, Clone, Copy)]
struct Path {
    c: f64,
    kappa: f64,
}

impl Path {
    fn point(&self, t: f64) -> (Complex64, Complex64) {
        let th = (0.5 * t).tanh();
        let v = Complex64::new(self.c + self.kappa * t * th, t);
        let dv = Complex64::new(self.kappa * (th + 0.5 * t * (1.0 - th * th)), 1.0);
        (v, dv)
    }
}

/// One scaled panel sum: (max log magnitude, sum of exp-shifted terms).
fn panel_sum(
    h: &ValidatedFoxH,
    path: &Path,
    ln_z: f64,
    t_lo: f64,
    t_hi: f64,
) -> Result<(f64, Complex64)> {
    let half = 0.5 * (t_hi - t_lo);
    let mid = 0.5 * (t_hi + t_lo);
    let mut ln_terms = [Complex64::new(0.0, 0.0); 32];
    let mut max_re = f64::NEG_INFINITY;
    for (i, (x, w)) in GL32_NODES.iter().zip(GL32_WEIGHTS.iter()).enumerate() {
        let t = mid + half * x;
        let (v, dv) = path.point(t);
        let ln_term = h.ln_kernel(v)? - v * ln_z + (dv * (w * half)).ln();
        max_re = max_re.max(ln_term.re);
        ln_terms[i] = ln_term;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for ln_term in ln_terms {
        sum += (ln_term - max_re).exp();
    }
    Ok((max_re, sum))
}

struct SweepOutcome {
    /// Integral scaled as value = sum * exp(max_ln) / (2 pi i).
    value: Complex64,
    /// Relative size of the outermost panel pair, extrapolated.
    tail_fraction: f64,
    nodes: usize,
}

/// Sum symmetric panels of width pw = 32/npu out to (at least) t_half.
/// `ln_shift` is a caller-supplied log prefactor folded into the final
/// exponential, so values whose unscaled magnitude overflows stay
/// representable.
fn sweep(
    h: &ValidatedFoxH,
    path: &Path,
    ln_z: f64,
    t_half: f64,
    npu: f64,
    ln_shift: f64,
) -> Result<SweepOutcome> {
    let pw = 32.0 / npu;
    let per_side = ((t_half / pw).ceil() as usize).max(1);
    let mut partials = Vec::with_capacity(2 * per_side);
    for k in 0..per_side {
        let (lo, hi) = (k as f64 * pw, (k + 1) as f64 * pw);
        partials.push(panel_sum(h, path, ln_z, lo, hi)?);
        partials.push(panel_sum(h, path, ln_z, -hi, -lo)?);
    }
    let global_max = partials
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max);
    if !global_max.is_finite() {
        return Ok(SweepOutcome {
            value: Complex64::new(0.0, 0.0),
            tail_fraction: 0.0,
            nodes: 64 * per_side,
        });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (m, s) in &partials {
        total += s * (m - global_max).exp();
    }
    // geometric extrapolation of the tail from the outer two panel pairs
    let pair_mag = |k: usize| {
        let a = &partials[2 * k];
        let b = &partials[2 * k + 1];
        (a.1.norm() * (a.0 - global_max).exp()) + (b.1.norm() * (b.0 - global_max).exp())
    };
    let tail_fraction = if per_side >= 2 {
        let outer = pair_mag(per_side - 1);
        let prev = pair_mag(per_side - 2);
        let ratio = if prev > 0.0 { (outer / prev).min(0.9) } else { 0.0 };
        let denom = total.norm().max(1e-300);
        outer / denom * ratio / (1.0 - ratio) + outer / denom * 1e-3
    } else {
        1.0
    };
    let value =
        total * (global_max + ln_shift).exp() / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
    Ok(SweepOutcome { value, tail_fraction, nodes: 64 * per_side })
}

/// Run the T-doubling and node-doubling ladder on a fixed path shape.
fn integrate_on_path(
    h: &ValidatedFoxH,
    path: &Path,
    ln_z: f64,
    t_half0: f64,
    npu0: f64,
    rel_tol: f64,
    ln_shift: f64,
) -> Result<HValue> {
    let mut t_half = t_half0.min(HALF_EXTENT_CAP);
    let mut out = sweep(h, path, ln_z, t_half, npu0, ln_shift)?;
    while out.tail_fraction > rel_tol * 0.1 && t_half < HALF_EXTENT_CAP {
        t_half = (2.0 * t_half).min(HALF_EXTENT_CAP);
        out = sweep(h, path, ln_z, t_half, npu0, ln_shift)?;
    }
    let refined = sweep(h, path, ln_z, t_half, 2.0 * npu0, ln_shift)?;
    let scale = refined.value.norm();
    let refine_err = (refined.value - out.value).norm();
    let tail_err = refined.tail_fraction * scale;
    let value = refined.value;
    let imag = value.im.abs();
    let error = refine_err + tail_err + imag + 1e-15 * scale;
    if imag > 1e-3 * value.re.abs() + 1e-9 {
        return Err(Error::Numerical(format!(
            "contour integral left an imaginary residual {imag:e} against real part {:e}",
            value.re
        )));
    }
    Ok(HValue {
        value: value.re,
        error_estimate: error,
        imag_residual: imag,
        nodes: out.nodes + refined.nodes,
    })
}

fn golden_min<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    const INV_PHI: f64 = 0.6180339887498949;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Pick a vertical offset: search the integrand magnitude along the real
/// axis, clamped strictly inside the strip, with half-bounded strips
/// windowed by the kernel's radial scale so saddle points far from the
/// origin stay reachable.
fn choose_offset(h: &ValidatedFoxH, ln_z: f64) -> f64 {
    let (lo, hi) = h.strip();
    let rho = h.radial_scale(ln_z).max(10.0);
    let margin = |edge: f64| (0.02 * edge.abs()).clamp(0.02, 0.5);
    let a = if lo.is_finite() {
        lo + margin(lo).min(0.45 * (hi - lo).min(f64::MAX))
    } else {
        hi.min(0.0) - 8.0 * rho
    };
    let b = if hi.is_finite() {
        hi - margin(hi).min(0.45 * (hi - lo).min(f64::MAX))
    } else {
        lo.max(0.0) + 8.0 * rho
    };
    if !(a < b) {
        return 0.5 * (lo + hi);
    }
    golden_min(&|c| h.ln_magnitude_on_axis(c, ln_z), a, b, 80)
}

fn vertical_npu(h: &ValidatedFoxH, ln_z: f64, offset: f64) -> f64 {
    let mut npu = (1.5 * ln_z.abs()).max(16.0);
    let d = h.nearest_pole_distance(offset);
    if d < 0.75 {
        npu = npu.max(10.0 / d.max(1e-3));
    }
    npu.min(4096.0)
}

fn eval_vertical(h: &ValidatedFoxH, z: f64, contour: &ContourSpec, rel_tol: f64) -> Result<HValue> {
    let (lo, hi) = h.strip();
    if !(contour.offset > lo && contour.offset < hi) {
        return Err(Error::InvalidParams(format!(
            "contour offset {} is outside the pole-free strip ({lo}, {hi})",
            contour.offset
        )));
    }
    if contour.node_count < 64 {
        return Err(Error::InvalidParams(format!(
            "contour node count {} is below the minimum of 64",
            contour.node_count
        )));
    }
    let ln_z = z.ln();
    let path = Path { c: contour.offset, kappa: 0.0 };
    let npu_req = contour.node_count as f64 / (2.0 * contour.half_extent);
    let npu = npu_req.max(vertical_npu(h, ln_z, contour.offset));
    integrate_on_path(h, &path, ln_z, contour.half_extent, npu, rel_tol, 0.0)
}

fn eval_bent(h: &ValidatedFoxH, z: f64, rel_tol: f64, ln_shift: f64) -> Result<HValue> {
    if h.delta > 0.0 {
        let mirrored = h.reflected()?;
        return eval_bent(&mirrored, 1.0 / z, rel_tol, ln_shift);
    }
    debug_assert!(h.delta < 0.0);
    let ln_z = z.ln();
    let rho = h.radial_scale(ln_z);
    let (lo, hi) = h.strip();
    let c = if hi.is_finite() {
        let step = if lo.is_finite() { (0.45 * (hi - lo)).min(0.12) } else { 0.12 };
        hi - step
    } else if lo.is_finite() {
        lo + 0.12
    } else {
        0.0
    };
    let abs_delta = -h.delta;
    let kappa = (16.0 / (abs_delta * rho.max(1.0))).min(0.15);
    let mut t_half = (2.8 * rho).max(40.0);
    for _ in 0..4 {
        let bulge = abs_delta * kappa * t_half * (t_half / rho).max(1.5).ln();
        if bulge >= 34.0 {
            break;
        }
        t_half *= 1.4;
    }
    let npu = (3.0 * ln_z.abs()).max(32.0).min(4096.0);
    let path = Path { c, kappa };
    integrate_on_path(h, &path, ln_z, t_half, npu, rel_tol, ln_shift)
}

/// Evaluate on an explicitly given vertical contour. The offset is used
/// as stated (subject to lying inside the strip); extent and node count
/// are treated as starting values for the internal refinement ladder.
pub fn eval_foxh(h: &ValidatedFoxH, z: f64, contour: &ContourSpec, rel_tol: f64) -> Result<HValue> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("H-function argument must be positive, got {z}")));
    }
    if h.spec.m == 0 && h.spec.n == 0 {
        return Ok(HValue { value: 0.0, error_estimate: 0.0, imag_residual: 0.0, nodes: 0 });
    }
    eval_vertical(h, z, contour, rel_tol)
}

/// Evaluate with automatic route selection: vertical contour with an
/// optimized offset while the decay index allows it, tanh-bent contour
/// (after delta-normalization) otherwise.
pub fn eval_foxh_auto(h: &ValidatedFoxH, z: f64, rel_tol: f64) -> Result<HValue> {
    eval_foxh_auto_scaled(h, z, rel_tol, 0.0)
}

/// Automatic route selection with a log prefactor folded into the final
/// exponential. Returns exp(ln_shift) * H(z) without ever forming H(z)
/// itself, so ratios against large gamma factors stay inside f64 range.
pub fn eval_foxh_auto_scaled(
    h: &ValidatedFoxH,
    z: f64,
    rel_tol: f64,
    ln_shift: f64,
) -> Result<HValue> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("H-function argument must be positive, got {z}")));
    }
    if h.spec.m == 0 && h.spec.n == 0 {
        return Ok(HValue { value: 0.0, error_estimate: 0.0, imag_residual: 0.0, nodes: 0 });
    }
    if h.a_star > 0.25 {
        let ln_z = z.ln();
        let offset = choose_offset(h, ln_z);
        let t0 = (26.0 / h.a_star).max(12.0);
        let npu = vertical_npu(h, ln_z, offset);
        let path = Path { c: offset, kappa: 0.0 };
        integrate_on_path(h, &path, ln_z, t0, npu, rel_tol, ln_shift)
    } else if h.delta != 0.0 {
        eval_bent(h, z, rel_tol, ln_shift)
    } else {
        Err(Error::NoConvergentSector { a_star: h.a_star, delta: h.delta })
    }
}

/// Meijer G function: the unit-slope Fox H special case.
pub fn eval_meijer_g(
    m: usize,
    n: usize,
    upper: &[f64],
    lower: &[f64],
    z: f64,
    rel_tol: f64,
) -> Result<HValue> {
    let spec = FoxHSpec {
        m,
        n,
        upper: upper.iter().map(|&a| (a, 1.0)).collect(),
        lower: lower.iter().map(|&b| (b, 1.0)).collect(),
    };
    let h = validate_foxh(&spec)?;
    eval_foxh_auto(&h, z, rel_tol)
}

/// Prepared vertical-contour evaluator: the kernel and path weights are
/// computed once, after which each argument costs one exponential per
/// node. Used for grid sweeps where the same spec is evaluated at many
/// arguments.
pub struct VerticalEvaluator {
    /// Per node: (v, log of kernel times folded quadrature weight).
    nodes: Vec<(Complex64, Complex64)>,
    outer_start: usize,
}

impl VerticalEvaluator {
    pub fn new(h: &ValidatedFoxH, offset: f64, t_half: f64, npu: f64) -> Result<Self> {
        let (lo, hi) = h.strip();
        if !(offset > lo && offset < hi) {
            return Err(Error::InvalidParams(format!(
                "contour offset {offset} is outside the pole-free strip ({lo}, {hi})"
            )));
        }
        let path = Path { c: offset, kappa: 0.0 };
        let pw = 32.0 / npu;
        let per_side = ((t_half / pw).ceil() as usize).max(2);
        let mut nodes = Vec::with_capacity(64 * per_side);
        // inner panels first so the outermost pair can serve as a tail probe
        for k in 0..per_side {
            for side in [1.0f64, -1.0] {
                let (lo_t, hi_t) = (k as f64 * pw, (k + 1) as f64 * pw);
                let half = 0.5 * (hi_t - lo_t);
                let mid = side * 0.5 * (hi_t + lo_t);
                for (x, w) in GL32_NODES.iter().zip(GL32_WEIGHTS.iter()) {
                    let t = mid + side * half * x;
                    let (v, dv) = path.point(t);
                    let ln_w = h.ln_kernel(v)? + (dv * (w * half)).ln();
                    nodes.push((v, ln_w));
                }
            }
        }
        let outer_start = nodes.len() - 64;
        Ok(VerticalEvaluator { nodes, outer_start })
    }

    pub fn eval(&self, z: f64) -> Result<HValue> {
        self.eval_scaled(z, 0.0)
    }

    /// Evaluation with a log prefactor folded into the final exponential;
    /// returns exp(ln_shift) * H(z).
    pub fn eval_scaled(&self, z: f64, ln_shift: f64) -> Result<HValue> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("H-function argument must be positive, got {z}")));
        }
        let ln_z = z.ln();
        let mut max_re = f64::NEG_INFINITY;
        for &(v, ln_w) in &self.nodes {
            let re = ln_w.re - v.re * ln_z;
            if re > max_re {
                max_re = re;
            }
        }
        if !max_re.is_finite() {
            return Ok(HValue { value: 0.0, error_estimate: 0.0, imag_residual: 0.0, nodes: 0 });
        }
        let mut total = Complex64::new(0.0, 0.0);
        let mut outer = 0.0;
        let mut mag_sum = 0.0;
        for (i, &(v, ln_w)) in self.nodes.iter().enumerate() {
            let term = (ln_w - v * ln_z - max_re).exp();
            total += term;
            mag_sum += term.norm();
            if i >= self.outer_start {
                outer += term.norm();
            }
        }
        let out_scale = (max_re + ln_shift).exp();
        let value = total * out_scale / Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let scale = value.norm().max(1e-300);
        let tail = outer * out_scale / (2.0 * std::f64::consts::PI);
        // mag_sum/|total| is the cancellation condition number at this z;
        // a fixed offset that suits one end of an argument sweep can be
        // badly conditioned at the other, and callers re-route on it.
        let conditioning = 1e-15 * mag_sum * out_scale / (2.0 * std::f64::consts::PI);
        Ok(HValue {
            value: value.re,
            error_estimate: tail + value.im.abs() + conditioning + 1e-14 * scale,
            imag_residual: value.im.abs(),
            nodes: self.nodes.len(),
        })
    }
}

/// Two fixed contours covering an argument sweep. The low contour sits
/// near the left strip edge, where small arguments keep relative accuracy;
/// the high contour sits as far right as the strip allows, so at large
/// arguments the roundoff floor scales like z to a negative power and
/// stays below anything downstream quadrature weights can amplify.
pub struct PreparedSweep {
    low: VerticalEvaluator,
    high: VerticalEvaluator,
}

/// Hand-off argument between the two contours of a sweep.
const SWEEP_SPLIT: f64 = 4.0;

impl PreparedSweep {
    /// `ln_z_span` is the largest |ln z| the sweep is expected to reach;
    /// it sizes the node density against the oscillation of z^{-v}.
    pub fn new(h: &ValidatedFoxH, ln_z_span: f64) -> Result<Self> {
        let (lo, hi) = h.strip();
        let c_low = if lo.is_finite() && hi.is_finite() {
            lo + 0.3 * (hi - lo).min(1.0)
        } else if lo.is_finite() {
            lo + 0.3
        } else if hi.is_finite() {
            hi - 0.3
        } else {
            -0.5
        };
        let c_high = if hi.is_finite() && lo.is_finite() {
            hi - 0.1 * (hi - lo).min(1.0)
        } else if hi.is_finite() {
            hi - 0.1
        } else {
            (if lo.is_finite() { lo } else { -0.5 } + 3.0).max(2.5)
        };
        Ok(PreparedSweep {
            low: Self::contour(h, c_low, ln_z_span)?,
            high: Self::contour(h, c_high, ln_z_span)?,
        })
    }

    fn contour(h: &ValidatedFoxH, c: f64, ln_z_span: f64) -> Result<VerticalEvaluator> {
        let (lo, hi) = h.strip();
        let mut gap = f64::INFINITY;
        if lo.is_finite() {
            gap = gap.min((c - lo).abs());
        }
        if hi.is_finite() {
            gap = gap.min((hi - c).abs());
        }
        let t_half = (40.0 / h.a_star()).clamp(12.0, 120.0);
        let mut npu = (1.5 * ln_z_span).max(16.0);
        if gap.is_finite() {
            npu = npu.max(10.0 / gap);
        }
        VerticalEvaluator::new(h, c, t_half, npu)
    }

    pub fn eval(&self, z: f64) -> Result<HValue> {
        self.eval_scaled(z, 0.0)
    }

    /// See [`VerticalEvaluator::eval_scaled`].
    pub fn eval_scaled(&self, z: f64, ln_shift: f64) -> Result<HValue> {
        if z < SWEEP_SPLIT {
            self.low.eval_scaled(z, ln_shift)
        } else {
            self.high.eval_scaled(z, ln_shift)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{cosine_integral, exp_integral_ei, EULER_MASCHERONI};

    fn exp_kernel() -> ValidatedFoxH {
        validate_foxh(&FoxHSpec {
            m: 1,
            n: 0,
            upper: vec![],
            lower: vec![(0.0, 1.0)],
        })
        .unwrap()
    }

    #[test]
    fn validator_reports_indicator_numbers() {
        // kernel Gamma(1+v) Gamma(-v)^2 / (Gamma(1+v) Gamma(1-v)) layout:
        // H^{1,2}_{3,2} with upper (1,1),(1,1),(1,1); lower (1,1),(0,1)
        let h = validate_foxh(&FoxHSpec {
            m: 1,
            n: 2,
            upper: vec![(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)],
            lower: vec![(1.0, 1.0), (0.0, 1.0)],
        })
        .unwrap();
        assert!((h.a_star() - 1.0).abs() < 1e-14);
        assert!((h.delta() - (-1.0)).abs() < 1e-14);
        assert!((h.mu() - (-1.5)).abs() < 1e-14);
        // every left pole of the lower Gamma(1+v) is cancelled by the
        // denominator Gamma(1+v), so the strip is left-unbounded; right
        // poles of Gamma(-v)^2 start at 0
        assert_eq!(h.strip().0, f64::NEG_INFINITY);
        assert!((h.strip().1 - 0.0).abs() < 1e-12);
    }

    #[test]
    fn validator_rejects_colliding_pole_families() {
        // Gamma(v) (left poles 0,-1,..) against Gamma(-v) (right poles 0,1,..)
        let err = validate_foxh(&FoxHSpec {
            m: 1,
            n: 1,
            upper: vec![(1.0, 1.0)],
            lower: vec![(0.0, 1.0)],
        })
        .unwrap_err();
        assert!(matches!(err, Error::CoincidentPoles { .. }), "got {err:?}");
    }

    #[test]
    fn validator_rejects_bad_shapes_and_slopes() {
        assert!(validate_foxh(&FoxHSpec {
            m: 2,
            n: 0,
            upper: vec![],
            lower: vec![(0.0, 1.0)],
        })
        .is_err());
        assert!(validate_foxh(&FoxHSpec {
            m: 1,
            n: 0,
            upper: vec![],
            lower: vec![(0.0, -1.0)],
        })
        .is_err());
    }

    #[test]
    fn validator_accounts_for_cancelled_poles() {
        // Gamma(-v)^2 / Gamma(1-v): nominal left family absent, right poles
        // at 0,1,2..; with lower denominator, strip extends to -infinity
        let h = validate_foxh(&FoxHSpec {
            m: 0,
            n: 2,
            upper: vec![(1.0, 1.0), (1.0, 1.0)],
            lower: vec![(0.0, 1.0)],
        })
        .unwrap();
        assert_eq!(h.strip().0, f64::NEG_INFINITY);
        assert!((h.strip().1 - 0.0).abs() < 1e-12);
    }

    #[test]
    fn validator_tracks_pole_multiplicity() {
        // Gamma(1+v)^2 Gamma(50+v) Gamma(-v) / Gamma(v): the double pole at
        // v = -1 loses one order to the denominator and must still bound the
        // strip, while the right pole at v = 0 is fully cancelled.
        let h = validate_foxh(&FoxHSpec {
            m: 3,
            n: 1,
            upper: vec![(1.0, 1.0), (0.0, 1.0)],
            lower: vec![(1.0, 1.0), (1.0, 1.0), (50.0, 1.0)],
        })
        .unwrap();
        assert!((h.strip().0 + 1.0).abs() < 1e-12);
        assert!((h.strip().1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_anchor_holds_over_the_argument_range() {
        let h = exp_kernel();
        let mut worst = 0.0f64;
        for i in 0..25 {
            let z = 1e-2 * (20.0f64 / 1e-2).powf(i as f64 / 24.0);
            let got = eval_foxh_auto(&h, z, 1e-10).unwrap();
            let want = (-z).exp();
            let rel = ((got.value - want) / want).abs();
            worst = worst.max(rel);
        }
        assert!(worst < 1e-8, "worst relative error {worst:e}");
    }

    #[test]
    fn explicit_contours_agree_across_offsets() {
        let h = exp_kernel();
        for &z in &[0.5, 3.0] {
            let mut values = Vec::new();
            for &offset in &[0.4, 1.1, 2.3] {
                let contour = ContourSpec { offset, half_extent: 40.0, node_count: 1280 };
                values.push(eval_foxh(&h, z, &contour, 1e-10).unwrap().value);
            }
            for w in values.windows(2) {
                let rel = ((w[0] - w[1]) / w[0]).abs();
                assert!(rel < 1e-9, "offset dependence {rel:e} at z={z}");
            }
        }
    }

    #[test]
    fn node_doubling_stays_within_reported_estimate() {
        let h = exp_kernel();
        for &z in &[0.3, 2.0, 11.0] {
            let coarse = ContourSpec { offset: 1.0, half_extent: 40.0, node_count: 640 };
            let fine = ContourSpec { offset: 1.0, half_extent: 40.0, node_count: 1280 };
            let r1 = eval_foxh(&h, z, &coarse, 1e-10).unwrap();
            let r2 = eval_foxh(&h, z, &fine, 1e-10).unwrap();
            assert!(
                (r1.value - r2.value).abs() <= r1.error_estimate.max(1e-13),
                "z={z}: doubling moved the value by {:e}, estimate was {:e}",
                (r1.value - r2.value).abs(),
                r1.error_estimate
            );
        }
    }

    #[test]
    fn zero_term_kernel_evaluates_to_zero() {
        let h = validate_foxh(&FoxHSpec {
            m: 0,
            n: 0,
            upper: vec![(0.5, 1.0)],
            lower: vec![(0.5, 1.0)],
        })
        .unwrap();
        let v = eval_foxh_auto(&h, 1.0, 1e-10).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn meijer_g_reduces_to_the_exponential_integral() {
        // G^{0,2}_{2,1}[1/s | (1,1); (0)] = -Ei(-s)
        let mut worst = 0.0f64;
        for i in 0..17 {
            let s = 1e-2 * (1e2f64 / 1e-2).powf(i as f64 / 16.0);
            let got = eval_meijer_g(0, 2, &[1.0, 1.0], &[0.0], 1.0 / s, 1e-10).unwrap();
            let want = -exp_integral_ei(-s).unwrap();
            let rel = ((got.value - want) / want).abs();
            worst = worst.max(rel);
        }
        assert!(worst < 1e-8, "worst relative error {worst:e}");
    }

    #[test]
    fn meijer_g_reduces_to_the_cosine_integral_pair() {
        // -sqrt(pi) G^{0,2}_{3,1}[4/(L s^2) | (1,1,1/2); (0)] = 2 Ci(sqrt(L) s)
        let l = 2.0f64;
        let mut worst = 0.0f64;
        for i in 0..17 {
            let s = 1e-2 * (1e2f64 / 1e-2).powf(i as f64 / 16.0);
            let z = 4.0 / (l * s * s);
            let got = eval_meijer_g(0, 2, &[1.0, 1.0, 0.5], &[0.0], z, 1e-10).unwrap();
            let lhs = -std::f64::consts::PI.sqrt() * got.value;
            let want = 2.0 * cosine_integral(l.sqrt() * s).unwrap();
            let err = (lhs - want).abs() / want.abs().max(1e-3);
            worst = worst.max(err);
        }
        assert!(worst < 1e-8, "worst error {worst:e}");
    }

    #[test]
    fn meijer_g_reduces_to_the_relaying_kernel() {
        // G^{1,2}_{2,3}[s | (1,1); (1,0,0)] = C + ln s - Ei(-s)
        let mut worst = 0.0f64;
        for i in 0..17 {
            let s = 1e-2 * (1e2f64 / 1e-2).powf(i as f64 / 16.0);
            let got = eval_meijer_g(1, 2, &[1.0, 1.0], &[1.0, 0.0, 0.0], s, 1e-10).unwrap();
            let want = EULER_MASCHERONI + s.ln() - exp_integral_ei(-s).unwrap();
            let rel = ((got.value - want) / want).abs();
            worst = worst.max(rel);
        }
        assert!(worst < 1e-8, "worst relative error {worst:e}");
    }

    #[test]
    fn prepared_evaluator_matches_single_shot_results() {
        let h = exp_kernel();
        let ev = VerticalEvaluator::new(&h, 1.0, 24.0, 24.0).unwrap();
        for &z in &[0.2, 1.0, 4.0, 9.0] {
            let got = ev.eval(z).unwrap().value;
            let want = (-z).exp();
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "prepared evaluator at z={z}: {got} vs {want}"
            );
        }
    }
}
