//! Complex relative permittivities of layer materials as functions of
//! angular frequency.
//!
//! Frequencies are in units of the design frequency `ω₀`. Two material
//! models are supported: a frequency-independent constant and a
//! single-resonance model
//!
//! ```text
//! ε(ω) = 1 + ω_P² / (ω_T² − ω² − iωγ)
//! ```
//!
//! with coupling strength `ω_P`, transverse resonance frequency `ω_T` and
//! absorption linewidth `γ`. For `γ > 0` the model is strictly passive
//! (`Im ε(ω) > 0` for every `ω > 0`); `γ = 0` is permitted and yields an
//! exactly real permittivity below and above the resonance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Material dispersion model, evaluated per angular frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DispersionModel {
    /// Frequency-independent complex permittivity.
    Constant { eps: Complex64 },
    /// Single-resonance model; all parameters in units of `ω₀`.
    DrudeLorentz {
        omega_p: f64,
        omega_t: f64,
        gamma: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispersionError {
    #[error("angular frequency must be positive, got {omega}")]
    NonPositiveFrequency { omega: f64 },
    #[error("invalid dispersion parameters: {reason}")]
    InvalidParameters { reason: String },
}

impl DispersionModel {
    /// Vacuum (`ε ≡ 1`).
    pub const fn vacuum() -> Self {
        DispersionModel::Constant {
            eps: Complex64::new(1.0, 0.0),
        }
    }

    /// Constant real permittivity.
    pub fn constant(eps: f64) -> Self {
        DispersionModel::Constant {
            eps: Complex64::new(eps, 0.0),
        }
    }

    /// Single-resonance model with parameters in units of `ω₀`.
    pub fn drude_lorentz(omega_p: f64, omega_t: f64, gamma: f64) -> Self {
        DispersionModel::DrudeLorentz {
            omega_p,
            omega_t,
            gamma,
        }
    }

    /// Checks the model invariants: non-negative resonance parameters and a
    /// passive constant (`Im ε ≥ 0`).
    pub fn validate(&self) -> Result<(), DispersionError> {
        match self {
            DispersionModel::Constant { eps } => {
                if eps.im < 0.0 {
                    return Err(DispersionError::InvalidParameters {
                        reason: format!("constant permittivity must have Im eps >= 0, got {eps}"),
                    });
                }
                if !eps.re.is_finite() || !eps.im.is_finite() {
                    return Err(DispersionError::InvalidParameters {
                        reason: "constant permittivity must be finite".into(),
                    });
                }
            }
            DispersionModel::DrudeLorentz {
                omega_p,
                omega_t,
                gamma,
            } => {
                if !(*omega_p >= 0.0 && *omega_t >= 0.0 && *gamma >= 0.0) {
                    return Err(DispersionError::InvalidParameters {
                        reason: format!(
                            "Drude-Lorentz parameters must be non-negative, got \
                             omega_p={omega_p}, omega_t={omega_t}, gamma={gamma}"
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Evaluates `ε(ω)`; `omega` must be positive (units of `ω₀`).
    pub fn permittivity(&self, omega: f64) -> Result<Complex64, DispersionError> {
        if !(omega > 0.0) {
            return Err(DispersionError::NonPositiveFrequency { omega });
        }
        Ok(self.permittivity_unchecked(omega))
    }

    /// As [`permittivity`](Self::permittivity) without the domain check.
    /// Used on hot paths where `omega` has already been validated.
    pub(crate) fn permittivity_unchecked(&self, omega: f64) -> Complex64 {
        match *self {
            DispersionModel::Constant { eps } => eps,
            DispersionModel::DrudeLorentz {
                omega_p,
                omega_t,
                gamma,
            } => {
                let denom = Complex64::new(omega_t * omega_t - omega * omega, -omega * gamma);
                Complex64::new(1.0, 0.0) + omega_p * omega_p / denom
            }
        }
    }

    /// Returns the model with the absorption linewidth raised to at least
    /// `min_gamma`. Constants are returned unchanged; only the resonant
    /// model carries a linewidth to regularize. Used by the decay and
    /// far-field integrators for exactly lossless resonant media, where
    /// guided poles would otherwise sit on the integration contour.
    pub(crate) fn with_min_gamma(&self, min_gamma: f64) -> Self {
        match *self {
            DispersionModel::Constant { .. } => *self,
            DispersionModel::DrudeLorentz {
                omega_p,
                omega_t,
                gamma,
            } => DispersionModel::DrudeLorentz {
                omega_p,
                omega_t,
                gamma: gamma.max(min_gamma),
            },
        }
    }
}

/// Evaluates the relative permittivity of `model` at angular frequency
/// `omega` (units of `ω₀`).
pub fn permittivity(model: &DispersionModel, omega: f64) -> Result<Complex64, DispersionError> {
    model.permittivity(omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const OMEGA_T: f64 = 20.0;

    fn eps_h(omega_p_ratio: f64, gamma: f64) -> DispersionModel {
        DispersionModel::drude_lorentz(omega_p_ratio * OMEGA_T, OMEGA_T, gamma)
    }

    #[test]
    fn drude_lorentz_fig2_low_coupling_anchor() {
        // omega_p = 1.7299 omega_t gives eps_H(omega_0) ~= 4 + i 7.5e-10
        let eps = eps_h(1.7299, 1e-7).permittivity(1.0).unwrap();
        assert_relative_eq!(eps.re, 4.0, max_relative = 1e-3);
        assert_relative_eq!(eps.im, 7.5e-10, max_relative = 5e-2);
    }

    #[test]
    fn drude_lorentz_fig2_high_coupling_anchor() {
        // omega_p = 1.7529 omega_t gives eps_H(omega_0) ~= 4.0804 + i 7.7e-10
        let eps = eps_h(1.7529, 1e-7).permittivity(1.0).unwrap();
        assert_relative_eq!(eps.re, 4.0804, max_relative = 1e-3);
        assert_relative_eq!(eps.im, 7.7e-10, max_relative = 5e-2);
    }

    #[test]
    fn vacuum_constant() {
        for omega in [0.1, 1.0, 7.3] {
            let eps = DispersionModel::vacuum().permittivity(omega).unwrap();
            assert_eq!(eps, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn rejects_non_positive_frequency() {
        let model = eps_h(1.7299, 1e-7);
        assert!(matches!(
            model.permittivity(0.0),
            Err(DispersionError::NonPositiveFrequency { .. })
        ));
        assert!(matches!(
            model.permittivity(-1.0),
            Err(DispersionError::NonPositiveFrequency { .. })
        ));
    }

    #[test]
    fn passive_below_resonance_and_monotone_loss() {
        // Im eps > 0 everywhere for gamma > 0 and strictly increasing toward
        // the resonance from below.
        let model = eps_h(1.7299, 1e-7);
        let mut last_im = 0.0;
        for i in 1..=400 {
            let omega = 0.05 * i as f64 * (OMEGA_T / 20.0); // up to omega_t
            if omega >= OMEGA_T {
                break;
            }
            let eps = model.permittivity(omega).unwrap();
            assert!(eps.im > 0.0, "Im eps must be positive at omega={omega}");
            assert!(
                eps.im > last_im,
                "Im eps must increase toward the resonance (omega={omega})"
            );
            last_im = eps.im;
        }
        // And above the resonance it stays positive.
        for omega in [OMEGA_T * 1.01, OMEGA_T * 2.0, OMEGA_T * 10.0] {
            assert!(model.permittivity(omega).unwrap().im > 0.0);
        }
    }

    #[test]
    fn small_gamma_matches_lossless_real_part() {
        // For gamma/omega_0 <= 1e-7 and omega <= 2 omega_0 the real part
        // matches the gamma = 0 expression to 1e-8 relative.
        let lossy = eps_h(1.7299, 1e-7);
        for i in 1..=40 {
            let omega = 0.05 * i as f64;
            let eps = lossy.permittivity(omega).unwrap();
            let op = 1.7299 * OMEGA_T;
            let exact = 1.0 + op * op / (OMEGA_T * OMEGA_T - omega * omega);
            assert_relative_eq!(eps.re, exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn gamma_zero_is_exactly_real() {
        let model = eps_h(1.7299, 0.0);
        let eps = model.permittivity(1.0).unwrap();
        assert_eq!(eps.im, 0.0);
    }

    #[test]
    fn validation_rejects_active_constant() {
        let model = DispersionModel::Constant {
            eps: Complex64::new(2.0, -0.1),
        };
        assert!(model.validate().is_err());
        let model = DispersionModel::drude_lorentz(-1.0, 20.0, 0.0);
        assert!(model.validate().is_err());
    }

    #[test]
    fn min_gamma_regularization() {
        let model = eps_h(1.7299, 0.0).with_min_gamma(1e-12);
        let eps = model.permittivity(1.0).unwrap();
        assert!(eps.im > 0.0 && eps.im < 1e-13);
        // Already-lossy models are untouched.
        let lossy = eps_h(1.7299, 1e-7).with_min_gamma(1e-12);
        assert_eq!(lossy, eps_h(1.7299, 1e-7));
    }
}
