//! Angular distribution `W(θ)` and total expectation value `W` of the
//! radiation energy escaping into either half-space.
//!
//! In the stationary-phase far field every observation angle maps to one
//! plane wave, `k∥ = k_side sin θ`, and the energy per unit polar angle
//! (azimuth already integrated out) is
//!
//! ```text
//! W(θ)/ħω_A = 3/(8 Γ/Γ₀) √ε_side [ w_z 2 k_side² sin²θ/|k_j|² |g_{p+}|²
//!              + w_∥ ( |β_j|²/|k_j|² |g_{p−}|² + |g_{s+}|² ) ]
//! ```
//!
//! with the side amplitudes, for observation above the stack,
//! `g_{q±} = t^q e^{iβ_j(d_j−z_A)}/D_q [1 ± r^q₋ e^{2iβ_j z_A}]`, and the
//! mirror-image substitutions (`z_A ↔ d_j − z_A`, `r₋ ↔ r₊`, lower-side
//! transmission) for observation below.
//!
//! The total energy per half-space is computed twice, by integrating
//! `sin θ · W(θ)` over `[0, π/2]` and by the equivalent in-plane
//! wave-number form; both routes must agree to 1e-8 relative and the
//! discrepancy is carried in the result as a diagnostic.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decay::{self, DecayError, Diagnostics, EmitterConfig, RateResult, MIN_GAMMA};
use crate::peaks::seed_breakpoints;
use crate::quad::{self, QuadError, QuadSettings};
use crate::stack::{LayerStack, OmegaStack, Polarization, RAD_PER_LAMBDA0};

/// Observation half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Layer `n`, above the stack.
    Above,
    /// Layer `0`, below the stack.
    Below,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Above => write!(f, "above"),
            Side::Below => write!(f, "below"),
        }
    }
}

/// Far-field plane-wave amplitudes for one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarfieldAmplitudes {
    pub g_p_plus: Complex64,
    pub g_p_minus: Complex64,
    pub g_s_plus: Complex64,
}

/// Sampled `W(θ)/ħω_A` over a polar-angle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularSpectrum {
    pub side: Side,
    pub omega_a: f64,
    pub thetas: Vec<f64>,
    /// `W(θ)/ħω_A` per grid point.
    pub values: Vec<f64>,
}

/// Escaped energy per half-space, in units of `ħω_A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyResult {
    pub w_top: f64,
    pub w_bottom: f64,
    /// `1 − W_top − W_bottom`: the share lost to guided waves and
    /// absorption.
    pub lost_fraction: f64,
    /// Largest relative disagreement between the θ-form and the
    /// wave-number-form quadratures (internal consistency check).
    pub form_discrepancy: f64,
    /// Accumulated absolute quadrature error estimate.
    pub quadrature_error: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FarfieldError {
    #[error(transparent)]
    Rate(#[from] DecayError),
    #[error("the {side} half-space is not effectively transparent (Im eps = {im:e})")]
    InvalidSide { side: Side, im: f64 },
    #[error("theta must lie in [0, pi/2), got {theta}")]
    InvalidTheta { theta: f64 },
    #[error(
        "energy quadrature did not converge within the panel budget; \
         partial value {partial}, error estimate {abs_error}"
    )]
    Quadrature { partial: f64, abs_error: f64 },
}

impl FarfieldError {
    fn from_quad(err: QuadError) -> FarfieldError {
        match err {
            QuadError::BudgetExhausted {
                partial, abs_error, ..
            } => FarfieldError::Quadrature { partial, abs_error },
            QuadError::NonFiniteIntegrand { .. } => FarfieldError::Quadrature {
                partial: f64::NAN,
                abs_error: f64::INFINITY,
            },
        }
    }
}

/// The default 721-point output grid on `[0, π/2)`.
pub fn default_theta_grid() -> Vec<f64> {
    let n = 721usize;
    let step = FRAC_PI_2 / n as f64;
    (0..n).map(|i| i as f64 * step).collect()
}

/// One emitter configuration with its cached total rate: the `Γ/Γ₀`
/// denominator of every energy quantity is always the rate of the same
/// configuration, computed once.
pub struct Emission<'a> {
    stack: &'a LayerStack,
    emitter: EmitterConfig,
    settings: QuadSettings,
    rate: OnceLock<Result<RateResult, DecayError>>,
}

impl<'a> Emission<'a> {
    pub fn new(stack: &'a LayerStack, emitter: EmitterConfig, settings: QuadSettings) -> Self {
        Emission {
            stack,
            emitter,
            settings,
            rate: OnceLock::new(),
        }
    }

    pub fn emitter(&self) -> &EmitterConfig {
        &self.emitter
    }

    pub fn stack(&self) -> &LayerStack {
        self.stack
    }

    /// Total and radiative rates, computed on first use and cached.
    pub fn rates(&self) -> Result<RateResult, DecayError> {
        self.rate
            .get_or_init(|| decay::total_rate(self.stack, &self.emitter, &self.settings))
            .clone()
    }

    pub fn amplitudes(&self, side: Side, theta: f64) -> Result<FarfieldAmplitudes, FarfieldError> {
        let eval = SideEvaluator::new(self.stack, &self.emitter, side)?;
        if !(0.0..FRAC_PI_2).contains(&theta) {
            return Err(FarfieldError::InvalidTheta { theta });
        }
        Ok(eval.amplitudes_theta(theta))
    }

    pub fn angular_energy(
        &self,
        side: Side,
        thetas: &[f64],
    ) -> Result<AngularSpectrum, FarfieldError> {
        for &theta in thetas {
            if !(0.0..FRAC_PI_2).contains(&theta) {
                return Err(FarfieldError::InvalidTheta { theta });
            }
        }
        let gamma_rel = self.rates()?.gamma_total;
        let eval = SideEvaluator::new(self.stack, &self.emitter, side)?;
        let values = thetas
            .iter()
            .map(|&theta| eval.w_theta(theta) / gamma_rel)
            .collect();
        Ok(AngularSpectrum {
            side,
            omega_a: self.emitter.omega_a,
            thetas: thetas.to_vec(),
            values,
        })
    }

    pub fn total_energy(&self) -> Result<EnergyResult, FarfieldError> {
        let rates = self.rates()?;
        let gamma_rel = rates.gamma_total;
        // Both quadrature routes are smooth after substitution; run them
        // tight so the 1e-8 form-equivalence check is meaningful.
        let settings = QuadSettings {
            rel_tol: self.settings.rel_tol.min(1e-10),
            abs_tol: 1e-15,
            max_panels: self.settings.max_panels,
        };

        let mut err_acc = 0.0;
        let mut discrepancy = 0.0f64;
        let mut sides = [0.0f64; 2];
        for (slot, side) in [(0usize, Side::Above), (1usize, Side::Below)] {
            let eval = SideEvaluator::new(self.stack, &self.emitter, side)?;
            let theta_seeds = eval.theta_seeds();

            let mut bps = vec![0.0];
            bps.extend(theta_seeds.iter().copied());
            bps.push(FRAC_PI_2);
            let mut f = |theta: f64| theta.sin() * eval.w_theta(theta);
            let by_theta =
                quad::integrate(&mut f, &bps, &settings).map_err(FarfieldError::from_quad)?;

            // Wave-number form, integrated in beta_n so the 1/β_n endpoint
            // weight disappears; seeds mapped from θ to β.
            let k_side = eval.k_side;
            let mut bps_beta = vec![0.0];
            bps_beta.extend(
                theta_seeds
                    .iter()
                    .map(|t| k_side * t.cos())
                    .filter(|b| *b > 0.0 && *b < k_side),
            );
            bps_beta.push(k_side);
            bps_beta.sort_by(f64::total_cmp);
            let mut g = |beta_n: f64| {
                let k_par = ((k_side - beta_n) * (k_side + beta_n)).max(0.0).sqrt();
                eval.w_kform(k_par)
            };
            let by_k =
                quad::integrate(&mut g, &bps_beta, &settings).map_err(FarfieldError::from_quad)?;

            let v_theta = by_theta.value / gamma_rel;
            let v_k = by_k.value / gamma_rel;
            let scale = v_theta.abs().max(v_k.abs()).max(1e-300);
            discrepancy = discrepancy.max((v_theta - v_k).abs() / scale);
            err_acc += (by_theta.abs_error + by_k.abs_error) / gamma_rel;
            sides[slot] = v_theta;
        }

        Ok(EnergyResult {
            w_top: sides[0],
            w_bottom: sides[1],
            lost_fraction: 1.0 - sides[0] - sides[1],
            form_discrepancy: discrepancy,
            quadrature_error: err_acc,
            diagnostics: rates.diagnostics,
        })
    }
}

/// Geometry and coefficients frozen for one observation side.
struct SideEvaluator {
    os: OmegaStack,
    side: Side,
    /// `Re k_side`, the far-field wave number.
    k_side: f64,
    sqrt_eps_side: f64,
    /// `k_j² − k_side²`, for cancellation-free `β_j`.
    delta_j: Complex64,
    kj_abs_sq: f64,
    z_rad: f64,
    d_rad: f64,
    w_z: f64,
    w_par: f64,
}

impl SideEvaluator {
    fn new(stack: &LayerStack, emitter: &EmitterConfig, side: Side) -> Result<Self, FarfieldError> {
        emitter.validate(stack)?;
        let os = OmegaStack::new(stack, emitter.omega_a, MIN_GAMMA).map_err(DecayError::from)?;
        let side_index = match side {
            Side::Above => os.top(),
            Side::Below => 0,
        };
        let eps_side = os.eps[side_index];
        if eps_side.im.abs() > 1e-6 {
            return Err(FarfieldError::InvalidSide {
                side,
                im: eps_side.im,
            });
        }
        let k_side = os.k[side_index].re;
        let kj_sq = os.k_sq[os.j];
        Ok(SideEvaluator {
            k_side,
            sqrt_eps_side: eps_side.re.max(0.0).sqrt(),
            delta_j: kj_sq - k_side * k_side,
            kj_abs_sq: kj_sq.norm(),
            z_rad: emitter.z_a * RAD_PER_LAMBDA0,
            d_rad: os.d_j_rad(),
            w_z: emitter.orientation.w_z,
            w_par: emitter.orientation.w_par,
            side,
            os,
        })
    }

    fn beta_j(&self, cos_theta: f64) -> Complex64 {
        let z = (self.delta_j + (self.k_side * cos_theta) * (self.k_side * cos_theta)).sqrt();
        if z.im < 0.0 || (z.im == 0.0 && z.re < 0.0) {
            -z
        } else {
            z
        }
    }

    fn beta_j_from_kpar(&self, k_par: f64) -> Complex64 {
        crate::stack::beta_from_ksq(self.os.k_sq[self.os.j], k_par)
    }

    /// `g_{q±}` for one polarization at `(k∥, β_j)`.
    fn amplitudes_for(
        &self,
        q: Polarization,
        k_par: f64,
        beta_j: Complex64,
    ) -> (Complex64, Complex64) {
        let c = self.os.coefficients(k_par, q, true);
        let (t, r_back, z_near, z_far) = match self.side {
            Side::Above => (c.t_up, c.r_minus, self.z_rad, self.d_rad - self.z_rad),
            Side::Below => (c.t_down, c.r_plus, self.d_rad - self.z_rad, self.z_rad),
        };
        // D recomputed with this β_j so numerator and denominator stay
        // consistent on resonance.
        let ab = (Complex64::I * 2.0 * self.d_rad * beta_j).exp();
        let d = 1.0 - c.r_plus * c.r_minus * ab;
        let outgoing = t * (Complex64::I * z_far * beta_j).exp() / d;
        let echo = r_back * (Complex64::I * 2.0 * z_near * beta_j).exp();
        (outgoing * (1.0 + echo), outgoing * (1.0 - echo))
    }

    fn amplitudes_theta(&self, theta: f64) -> FarfieldAmplitudes {
        let (sin_t, cos_t) = theta.sin_cos();
        let k_par = self.k_side * sin_t;
        let beta_j = self.beta_j(cos_t);
        let (g_p_plus, g_p_minus) = self.amplitudes_for(Polarization::P, k_par, beta_j);
        let (g_s_plus, _) = self.amplitudes_for(Polarization::S, k_par, beta_j);
        FarfieldAmplitudes {
            g_p_plus,
            g_p_minus,
            g_s_plus,
        }
    }

    /// Unnormalized `W(θ) · (Γ/Γ₀) / ħω_A` via the amplitude bracket.
    fn bracket(&self, k_par: f64, beta_j: Complex64) -> f64 {
        let (g_p_plus, g_p_minus) = self.amplitudes_for(Polarization::P, k_par, beta_j);
        let (g_s_plus, _) = self.amplitudes_for(Polarization::S, k_par, beta_j);
        self.w_z * 2.0 * k_par * k_par / self.kj_abs_sq * g_p_plus.norm_sqr()
            + self.w_par
                * (beta_j.norm_sqr() / self.kj_abs_sq * g_p_minus.norm_sqr() + g_s_plus.norm_sqr())
    }

    /// `W(θ) · (Γ/Γ₀) / ħω_A` — the caller divides by the cached rate.
    fn w_theta(&self, theta: f64) -> f64 {
        let (sin_t, cos_t) = theta.sin_cos();
        let k_par = self.k_side * sin_t;
        let beta_j = self.beta_j(cos_t);
        0.375 * self.sqrt_eps_side * self.bracket(k_par, beta_j)
    }

    /// Wave-number-form integrand after the `β_n` substitution (the
    /// `k∥/β_n dk∥ → dβ_n` change of variable), same normalization.
    fn w_kform(&self, k_par: f64) -> f64 {
        let beta_j = self.beta_j_from_kpar(k_par);
        let c = 3.0 / (8.0 * self.os.omega);
        c * self.bracket(k_par, beta_j)
    }

    /// Resonance seeds in θ for this side.
    fn theta_seeds(&self) -> Vec<f64> {
        let mut metric = |theta: f64| {
            let (sin_t, cos_t) = theta.sin_cos();
            let k_par = self.k_side * sin_t;
            let beta_j = self.beta_j(cos_t);
            let refl = self.os.reflections_both(k_par);
            let ab = (Complex64::I * 2.0 * self.d_rad * beta_j).exp();
            [
                (1.0 - refl.s_plus * refl.s_minus * ab).norm_sqr(),
                (1.0 - refl.p_plus * refl.p_minus * ab).norm_sqr(),
            ]
        };
        seed_breakpoints(&mut metric, 0.0, FRAC_PI_2, 1200)
    }
}

/// Far-field amplitudes `g_{p+}, g_{p−}, g_{s+}` for the requested side at
/// polar angle `theta` (free-function form of [`Emission::amplitudes`]).
pub fn farfield_amplitudes(
    stack: &LayerStack,
    emitter: &EmitterConfig,
    side: Side,
    theta: f64,
) -> Result<FarfieldAmplitudes, FarfieldError> {
    Emission::new(stack, *emitter, QuadSettings::default()).amplitudes(side, theta)
}

/// `W(θ)/ħω_A` sampled on `thetas` for the requested side.
pub fn angular_energy(
    stack: &LayerStack,
    emitter: &EmitterConfig,
    side: Side,
    thetas: &[f64],
    settings: &QuadSettings,
) -> Result<AngularSpectrum, FarfieldError> {
    Emission::new(stack, *emitter, *settings).angular_energy(side, thetas)
}

/// Escaped energy for both half-spaces, in units of `ħω_A`.
pub fn total_energy(
    stack: &LayerStack,
    emitter: &EmitterConfig,
    settings: &QuadSettings,
) -> Result<EnergyResult, FarfieldError> {
    Emission::new(stack, *emitter, *settings).total_energy()
}
