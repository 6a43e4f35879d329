//! Total and radiative spontaneous decay rates by quadrature of the planar
//! mode-density integrand.
//!
//! The normalized total rate is an integral over the in-plane wave number,
//!
//! ```text
//! Γ/Γ₀ = ∫₀^∞ dk∥ Γ̃(k∥),
//! Γ̃(k∥) = (3ck∥ / 2ω_A) Re{ e^{iβ_j d_j}/(2β_j)
//!            [ w_z (2k∥²/k_j²) C^p₊ + w_∥ (C^s₊ − (β_j²/k_j²) C^p₋) ] }
//! ```
//!
//! with the multiple-reflection factors
//! `C^q± = [±e^{−iβ_j d_j} + r^q₋ e^{iβ_j(2z_A−d_j)} + r^q₊ e^{−iβ_j(2z_A−d_j)}
//! ± r^q₊ r^q₋ e^{iβ_j d_j}] / D_qj`. The radiative rate restricts the upper
//! limit to `k_n`, the wave numbers able to propagate in the outer
//! half-space.
//!
//! Quadrature strategy:
//! * `k∥ ∈ [0, k_j]` is parametrized as `k∥ = k_j sin θ`, which removes the
//!   `1/β_j` endpoint singularity analytically;
//! * the evanescent range uses `k∥ = k_j cosh u` and marches in panels of
//!   `Δu = 0.5` until five consecutive panels contribute less than 1e-12 of
//!   the running integral (hard cap `u ≤ 20`);
//! * before integrating, `|D_q|²` is scanned for resonance basins and the
//!   panel set is pre-seeded around every detected minimum (see the peak
//!   seeding in this crate), which is what makes linewidths down to the
//!   1e-12 regularization floor resolvable;
//! * exactly lossless resonant media are evaluated with the absorption
//!   linewidth regularized to `γ = 1e-12 ω₀`, so guided poles acquire a
//!   resolvable width instead of sitting on the contour.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::DispersionError;
use crate::peaks::seed_breakpoints;
use crate::quad::{self, QuadError, QuadSettings};
use crate::stack::{beta_from_ksq, LayerStack, OmegaStack, RAD_PER_LAMBDA0};

/// Absorption-linewidth floor injected into resonant materials on the
/// emission paths (units of `ω₀`).
pub(crate) const MIN_GAMMA: f64 = 1e-12;

/// Marching step in the `cosh` parameter for the evanescent tail.
const TAIL_PANEL_WIDTH: f64 = 0.5;
/// Hard cap on the `cosh` parameter.
const TAIL_U_MAX: f64 = 20.0;
/// Tail termination: this many consecutive panels below the relative floor.
const TAIL_QUIET_PANELS: usize = 5;
const TAIL_RELATIVE_FLOOR: f64 = 1e-12;

/// Samples used by the coarse `|D|²` resonance scans.
const SCAN_SAMPLES: usize = 1200;

/// Dipole orientation split `(d_Az²/d_A², d_A∥²/d_A²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub w_z: f64,
    pub w_par: f64,
}

impl Orientation {
    pub const fn parallel() -> Self {
        Orientation {
            w_z: 0.0,
            w_par: 1.0,
        }
    }

    pub const fn perpendicular() -> Self {
        Orientation {
            w_z: 1.0,
            w_par: 0.0,
        }
    }

    pub const fn isotropic() -> Self {
        Orientation {
            w_z: 1.0 / 3.0,
            w_par: 2.0 / 3.0,
        }
    }

    pub fn validate(&self) -> Result<(), DecayError> {
        let ok =
            self.w_z >= 0.0 && self.w_par >= 0.0 && (self.w_z + self.w_par - 1.0).abs() <= 1e-12;
        if ok {
            Ok(())
        } else {
            Err(DecayError::InvalidEmitter {
                reason: format!(
                    "orientation weights must be non-negative and sum to 1, \
                     got w_z={}, w_par={}",
                    self.w_z, self.w_par
                ),
            })
        }
    }
}

/// Emitter placement and transition frequency.
///
/// `omega_a` in units of `ω₀`; `z_a` is the height above the lower face of
/// the emitter layer, in units of `λ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterConfig {
    pub omega_a: f64,
    pub z_a: f64,
    pub orientation: Orientation,
}

impl EmitterConfig {
    /// Emitter at the center of the emitter layer.
    pub fn centered(stack: &LayerStack, omega_a: f64, orientation: Orientation) -> Self {
        EmitterConfig {
            omega_a,
            z_a: 0.5 * stack.emitter_thickness(),
            orientation,
        }
    }

    pub fn validate(&self, stack: &LayerStack) -> Result<(), DecayError> {
        if !(self.omega_a > 0.0) {
            return Err(DecayError::InvalidEmitter {
                reason: format!(
                    "transition frequency must be positive, got {}",
                    self.omega_a
                ),
            });
        }
        let d_j = stack.emitter_thickness();
        if !(self.z_a > 0.0 && self.z_a < d_j) {
            return Err(DecayError::InvalidEmitter {
                reason: format!(
                    "z_a must lie strictly inside the emitter layer (0, {d_j}), got {}",
                    self.z_a
                ),
            });
        }
        self.orientation.validate()
    }
}

/// Per-configuration warnings carried alongside results.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// A propagation factor ran past the deep-evanescent guard.
    pub deep_evanescent: bool,
    /// `Im ε_j / Re ε_j > 1e-3` at the transition frequency.
    pub lossy_emitter: bool,
    /// `|ε_j(ω_A) − 1| > 1e-3`; local-field corrections may be called for.
    pub emitter_eps_off_unity: bool,
    /// The two half-spaces differ; the radiative cutoff uses the upper one.
    pub halfspace_mismatch: bool,
}

impl Diagnostics {
    pub fn merge(self, other: Diagnostics) -> Diagnostics {
        Diagnostics {
            deep_evanescent: self.deep_evanescent || other.deep_evanescent,
            lossy_emitter: self.lossy_emitter || other.lossy_emitter,
            emitter_eps_off_unity: self.emitter_eps_off_unity || other.emitter_eps_off_unity,
            halfspace_mismatch: self.halfspace_mismatch || other.halfspace_mismatch,
        }
    }

    pub fn is_clear(&self) -> bool {
        *self == Diagnostics::default()
    }
}

impl std::fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        let mut put = |f: &mut std::fmt::Formatter<'_>, s: &str| -> std::fmt::Result {
            if !first {
                write!(f, ";")?;
            }
            first = false;
            write!(f, "{s}")
        };
        if self.deep_evanescent {
            put(f, "deep_evanescent")?;
        }
        if self.lossy_emitter {
            put(f, "lossy_emitter")?;
        }
        if self.emitter_eps_off_unity {
            put(f, "emitter_eps_off_unity")?;
        }
        if self.halfspace_mismatch {
            put(f, "halfspace_mismatch")?;
        }
        Ok(())
    }
}

/// Normalized decay rates of one emitter configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// `Γ/Γ₀`.
    pub gamma_total: f64,
    /// `Γ_rad/Γ₀`.
    pub gamma_rad: f64,
    /// Accumulated absolute quadrature error estimate on `Γ/Γ₀`.
    pub quadrature_error: f64,
    /// `(Γ − Γ_rad)/Γ`.
    pub guided_fraction: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecayError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error("emitter configuration invalid: {reason}")]
    InvalidEmitter { reason: String },
    #[error(
        "outer half-space permittivity must be effectively real for radiative \
         quantities, got Im eps = {im:e}"
    )]
    NonRealOuterMedium { im: f64 },
    #[error(
        "decay-rate quadrature did not converge within the panel budget; \
         partial value {partial}, error estimate {abs_error}"
    )]
    Quadrature { partial: f64, abs_error: f64 },
}

impl DecayError {
    fn from_quad(err: QuadError, accumulated: f64) -> DecayError {
        match err {
            QuadError::BudgetExhausted {
                partial, abs_error, ..
            } => DecayError::Quadrature {
                partial: accumulated + partial,
                abs_error,
            },
            QuadError::NonFiniteIntegrand { .. } => DecayError::Quadrature {
                partial: f64::NAN,
                abs_error: f64::INFINITY,
            },
        }
    }
}

/// Everything needed to evaluate `Γ̃` repeatedly at one `(stack, emitter)`.
pub(crate) struct RateEvaluator {
    pub os: OmegaStack,
    z_rad: f64,
    d_rad: f64,
    w_z: f64,
    w_par: f64,
    /// `Re k_j`: the parametrization scale for the θ and cosh substitutions.
    pub kj_re: f64,
    kj_sq: Complex64,
    /// `k_j² − (Re k_j)²`, kept separate so `β_j` never suffers the
    /// cancellation `k_j² − k∥²` near the light line of layer j.
    delta_j: Complex64,
    /// As `delta_j` with any positive rounding residue of the real part
    /// clamped to zero: `Re k_j` is a rounded square root, and a residue of
    /// order `ε·k_j²` would otherwise open a fake propagating sliver (an
    /// artificial interior `1/β_j` divergence) at the start of the
    /// evanescent tail.
    delta_j_tail: Complex64,
}

impl RateEvaluator {
    pub fn new(
        stack: &LayerStack,
        emitter: &EmitterConfig,
        min_gamma: f64,
    ) -> Result<Self, DecayError> {
        emitter.validate(stack)?;
        let os = OmegaStack::new(stack, emitter.omega_a, min_gamma)?;
        let j = os.j;
        let kj = os.k[j];
        let kj_re = kj.re;
        let kj_sq = os.k_sq[j];
        let delta_j = kj_sq - kj_re * kj_re;
        let delta_j_tail = Complex64::new(delta_j.re.min(0.0), delta_j.im);
        Ok(RateEvaluator {
            z_rad: emitter.z_a * RAD_PER_LAMBDA0,
            d_rad: os.d_j_rad(),
            w_z: emitter.orientation.w_z,
            w_par: emitter.orientation.w_par,
            kj_re,
            kj_sq,
            delta_j,
            delta_j_tail,
            os,
        })
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let eps_j = self.os.eps[self.os.j];
        let eps_top = self.os.eps[self.os.top()];
        let eps_bottom = self.os.eps[0];
        Diagnostics {
            deep_evanescent: false,
            lossy_emitter: eps_j.im.abs() > 1e-3 * eps_j.re.abs(),
            emitter_eps_off_unity: (eps_j - 1.0).norm() > 1e-3,
            halfspace_mismatch: eps_top != eps_bottom,
        }
    }

    /// `Γ̃(k∥)` with the `1/(2β_j)` factor replaced by a caller-supplied
    /// real Jacobian folded against `β_j`; used by both parametrizations.
    fn gamma_tilde_folded(&self, k_par: f64, beta_j: Complex64, jacobian: f64) -> f64 {
        let refl = self.os.reflections_both(k_par);
        let a = (Complex64::I * 2.0 * self.z_rad * beta_j).exp();
        let b = (Complex64::I * 2.0 * (self.d_rad - self.z_rad) * beta_j).exp();
        let ab = a * b;

        let d_s = 1.0 - refl.s_plus * refl.s_minus * ab;
        let d_p = 1.0 - refl.p_plus * refl.p_minus * ab;
        let e_s_plus = (1.0 + refl.s_minus * a) * (1.0 + refl.s_plus * b) / d_s;
        let e_p_plus = (1.0 + refl.p_minus * a) * (1.0 + refl.p_plus * b) / d_p;
        let e_p_minus = -(1.0 - refl.p_minus * a) * (1.0 - refl.p_plus * b) / d_p;

        let beta_sq = beta_j * beta_j;
        let bracket = self.w_z * (2.0 * k_par * k_par / self.kj_sq) * e_p_plus
            + self.w_par * (e_s_plus - beta_sq / self.kj_sq * e_p_minus);

        let folded = bracket * (jacobian / 2.0) / beta_j;
        (3.0 * k_par / (2.0 * self.os.omega)) * folded.re
    }

    /// Propagating parametrization `k∥ = Re(k_j) sin θ`, Jacobian included.
    pub fn eval_theta(&self, theta: f64) -> f64 {
        let (sin_t, cos_t) = theta.sin_cos();
        let k_par = self.kj_re * sin_t;
        let beta_j = beta_stable(self.delta_j, self.kj_re * cos_t);
        self.gamma_tilde_folded(k_par, beta_j, self.kj_re * cos_t)
    }

    /// Evanescent parametrization `k∥ = Re(k_j) cosh u`, Jacobian included.
    pub fn eval_u(&self, u: f64) -> f64 {
        let (sinh_u, cosh_u) = (u.sinh(), u.cosh());
        let k_par = self.kj_re * cosh_u;
        let beta_j = beta_stable_evanescent(self.delta_j_tail, self.kj_re * sinh_u);
        self.gamma_tilde_folded(k_par, beta_j, self.kj_re * sinh_u)
    }

    /// Raw `Γ̃(k∥)` in the plain wave-number variable.
    pub fn eval_k(&self, k_par: f64) -> f64 {
        let beta_j = beta_from_ksq(self.kj_sq, k_par);
        self.gamma_tilde_folded(k_par, beta_j, 1.0)
    }

    /// `|D_s|², |D_p|²` at a given `k∥` — the resonance-scan metric.
    pub fn denominator_metric(&self, k_par: f64, beta_j: Complex64) -> [f64; 2] {
        let refl = self.os.reflections_both(k_par);
        let ab = (Complex64::I * 2.0 * self.d_rad * beta_j).exp();
        let d_s = 1.0 - refl.s_plus * refl.s_minus * ab;
        let d_p = 1.0 - refl.p_plus * refl.p_minus * ab;
        [d_s.norm_sqr(), d_p.norm_sqr()]
    }

    fn metric_theta(&self, theta: f64) -> [f64; 2] {
        let (sin_t, cos_t) = theta.sin_cos();
        let beta_j = beta_stable(self.delta_j, self.kj_re * cos_t);
        self.denominator_metric(self.kj_re * sin_t, beta_j)
    }

    fn metric_u(&self, u: f64) -> [f64; 2] {
        let beta_j = beta_stable_evanescent(self.delta_j_tail, self.kj_re * u.sinh());
        self.denominator_metric(self.kj_re * u.cosh(), beta_j)
    }

    /// Largest propagating wave number among all layers, in `ω₀/c` units.
    fn max_layer_k(&self) -> f64 {
        self.os.k.iter().map(|k| k.re).fold(0.0, f64::max)
    }
}

/// `β_j = √(δ + x²)` with `δ = k_j² − (Re k_j)²`; exact where the naive
/// difference `k_j² − k∥²` cancels catastrophically.
#[inline]
fn beta_stable(delta: Complex64, x: f64) -> Complex64 {
    let z = (delta + x * x).sqrt();
    if z.im < 0.0 || (z.im == 0.0 && z.re < 0.0) {
        -z
    } else {
        z
    }
}

#[inline]
fn beta_stable_evanescent(delta: Complex64, x: f64) -> Complex64 {
    let z = (delta - x * x).sqrt();
    if z.im < 0.0 || (z.im == 0.0 && z.re < 0.0) {
        -z
    } else {
        z
    }
}

/// `Γ̃(k∥)`, the density under the rate integral, at a single in-plane wave
/// number (units of `ω₀/c`; the density itself carries units of `c/ω₀`).
///
/// Resonant materials with zero linewidth are evaluated with the standard
/// `γ = 1e-12 ω₀` regularization so results are consistent with
/// [`total_rate`] / [`radiative_rate`].
pub fn rate_integrand(
    stack: &LayerStack,
    emitter: &EmitterConfig,
    k_par: f64,
) -> Result<f64, DecayError> {
    if k_par < 0.0 {
        return Err(DecayError::InvalidEmitter {
            reason: format!("k_par must be non-negative, got {k_par}"),
        });
    }
    let eval = RateEvaluator::new(stack, emitter, MIN_GAMMA)?;
    Ok(eval.eval_k(k_par))
}

struct Budget {
    remaining: usize,
}

impl Budget {
    fn settings(&self, base: &QuadSettings) -> QuadSettings {
        QuadSettings {
            max_panels: self.remaining,
            ..*base
        }
    }

    fn spend(&mut self, panels: usize) {
        self.remaining = self.remaining.saturating_sub(panels.max(1));
    }
}

/// Shared implementation for the rate operations: integrates the
/// propagating region (θ parametrization) and the evanescent tail
/// (cosh parametrization), splitting the radiative part at `k_n`.
fn rates_impl(
    stack: &LayerStack,
    emitter: &EmitterConfig,
    settings: &QuadSettings,
) -> Result<RateResult, DecayError> {
    let eval = RateEvaluator::new(stack, emitter, MIN_GAMMA)?;
    let mut diagnostics = eval.diagnostics();

    let eps_top = eval.os.eps[eval.os.top()];
    if eps_top.im.abs() > 1e-6 {
        return Err(DecayError::NonRealOuterMedium { im: eps_top.im });
    }
    let kn_re = eval.os.k[eval.os.top()].re;
    let kj_re = eval.kj_re;

    let mut budget = Budget {
        remaining: settings.max_panels,
    };
    let mut total = 0.0;
    let mut err_acc = 0.0;

    // Resonance seeds for the propagating range.
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut metric = |theta: f64| eval.metric_theta(theta);
    let theta_seeds = seed_breakpoints(&mut metric, 0.0, half_pi, SCAN_SAMPLES);

    // Radiative boundary within the propagating range (θ of k_n), or the
    // full range when the outer half-space is at least as dense as layer j.
    let theta_n = if kn_re < kj_re {
        (kn_re / kj_re).asin()
    } else {
        half_pi
    };

    let integrate_theta = |lo: f64,
                           hi: f64,
                           budget: &mut Budget,
                           err_acc: &mut f64,
                           accumulated: f64|
     -> Result<f64, DecayError> {
        if !(hi > lo) {
            return Ok(0.0);
        }
        let mut bps = vec![lo];
        bps.extend(theta_seeds.iter().copied().filter(|t| *t > lo && *t < hi));
        bps.push(hi);
        let mut f = |theta: f64| eval.eval_theta(theta);
        let out = quad::integrate(&mut f, &bps, &budget.settings(settings))
            .map_err(|e| DecayError::from_quad(e, accumulated))?;
        budget.spend(out.panels);
        *err_acc += out.abs_error;
        Ok(out.value)
    };

    let prop_rad = integrate_theta(0.0, theta_n, &mut budget, &mut err_acc, total)?;
    total += prop_rad;
    let prop_guided = integrate_theta(theta_n, half_pi, &mut budget, &mut err_acc, total)?;
    total += prop_guided;

    // Evanescent tail, marched in u with resonance seeds of its own.
    let u_scan_hi = {
        let k_max = eval.max_layer_k();
        if k_max > kj_re {
            ((k_max / kj_re).acosh() + 0.5).min(TAIL_U_MAX)
        } else {
            1.0_f64.min(TAIL_U_MAX)
        }
    };
    let mut metric_u = |u: f64| eval.metric_u(u);
    let u_seeds = seed_breakpoints(&mut metric_u, 0.0, u_scan_hi, SCAN_SAMPLES);

    // If the outer half-space is denser than layer j, the radiative range
    // extends into the cosh parametrization up to u_n.
    let u_n = if kn_re > kj_re {
        (kn_re / kj_re).acosh()
    } else {
        0.0
    };

    let mut tail_rad = 0.0;
    let mut tail_total = 0.0;
    {
        let mut quiet = 0usize;
        let mut u_lo = 0.0f64;
        while u_lo < TAIL_U_MAX && quiet < TAIL_QUIET_PANELS {
            let mut u_hi = (u_lo + TAIL_PANEL_WIDTH).min(TAIL_U_MAX);
            // Keep the radiative boundary an exact panel edge.
            if u_n > u_lo && u_n < u_hi {
                u_hi = u_n;
            }
            let mut bps = vec![u_lo];
            bps.extend(u_seeds.iter().copied().filter(|u| *u > u_lo && *u < u_hi));
            bps.push(u_hi);
            let mut f = |u: f64| eval.eval_u(u);
            let out = quad::integrate(&mut f, &bps, &budget.settings(settings))
                .map_err(|e| DecayError::from_quad(e, total + tail_total))?;
            budget.spend(out.panels);
            err_acc += out.abs_error;
            tail_total += out.value;
            if u_hi <= u_n {
                tail_rad += out.value;
            }
            let running = (total + tail_total).abs().max(f64::MIN_POSITIVE);
            if out.value.abs() < TAIL_RELATIVE_FLOOR * running {
                quiet += 1;
            } else {
                quiet = 0;
            }
            u_lo = u_hi;
        }
    }

    let gamma_total = total + tail_total;
    let gamma_rad = prop_rad + tail_rad;
    // Probe the underflow guard once at a representative deep-tail point.
    diagnostics.deep_evanescent = eval.os.reflections_both(kj_re * u_scan_hi.cosh()).guard;

    Ok(RateResult {
        gamma_total,
        gamma_rad,
        quadrature_error: err_acc,
        guided_fraction: if gamma_total != 0.0 {
            (gamma_total - gamma_rad) / gamma_total
        } else {
            0.0
        },
        diagnostics,
    })
}

/// Total normalized decay rate `Γ/Γ₀` (with the radiative split included in
/// the returned [`RateResult`]).
pub fn total_rate(
    stack: &LayerStack,
    emitter: &EmitterConfig,
    settings: &QuadSettings,
) -> Result<RateResult, DecayError> {
    rates_impl(stack, emitter, settings)
}

/// Radiative normalized decay rate `Γ_rad/Γ₀` (full [`RateResult`]).
pub fn radiative_rate(
    stack: &LayerStack,
    emitter: &EmitterConfig,
    settings: &QuadSettings,
) -> Result<RateResult, DecayError> {
    rates_impl(stack, emitter, settings)
}
