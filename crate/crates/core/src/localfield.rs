//! Real-cavity local-field corrections for emitters hosted in a medium
//! with permittivity different from unity.
//!
//! Both decay rates acquire the common factor `[3ε/(2ε+1)]²`, while the
//! escaped energy and its angular distribution are unchanged (the same
//! factor enters their numerator and their rate denominator and cancels).
//! The correction is an opt-in post-processing stage and is only defined
//! for an effectively non-absorbing host.

use num_complex::Complex64;
use thiserror::Error;

use crate::decay::RateResult;
use crate::farfield::{AngularSpectrum, EnergyResult};

/// The real-cavity factor `3ε/(2ε+1)` for a host permittivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFieldFactor {
    pub eps_host: Complex64,
    pub factor: Complex64,
    /// `|3ε/(2ε+1)|²` — the rate multiplier.
    pub factor_sq_abs: f64,
}

impl LocalFieldFactor {
    pub fn new(eps_host: Complex64) -> Self {
        let factor = 3.0 * eps_host / (2.0 * eps_host + 1.0);
        LocalFieldFactor {
            eps_host,
            factor,
            factor_sq_abs: factor.norm_sqr(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalFieldError {
    #[error(
        "local-field correction is only defined for an effectively \
         non-absorbing host (|Im/Re| <= 1e-3), got eps = {eps}"
    )]
    UnsupportedRegime { eps: Complex64 },
}

fn require_nonabsorbing(eps_host: Complex64) -> Result<(), LocalFieldError> {
    if eps_host.re > 0.0 && eps_host.im.abs() <= 1e-3 * eps_host.re {
        Ok(())
    } else {
        Err(LocalFieldError::UnsupportedRegime { eps: eps_host })
    }
}

/// Applies the `[3ε/(2ε+1)]²` multiplier to both rates. The guided
/// fraction is a ratio and is carried over unchanged.
pub fn corrected_rates(
    raw: &RateResult,
    eps_host: Complex64,
) -> Result<RateResult, LocalFieldError> {
    require_nonabsorbing(eps_host)?;
    let m = LocalFieldFactor::new(eps_host).factor_sq_abs;
    Ok(RateResult {
        gamma_total: raw.gamma_total * m,
        gamma_rad: raw.gamma_rad * m,
        quadrature_error: raw.quadrature_error * m,
        guided_fraction: raw.guided_fraction,
        diagnostics: raw.diagnostics,
    })
}

/// Marker for energy quantities that are invariant under the local-field
/// correction.
pub trait LocalFieldInvariant: Clone {}
impl LocalFieldInvariant for EnergyResult {}
impl LocalFieldInvariant for AngularSpectrum {}

/// Identity on energy quantities, kept as an explicit operation so scenario
/// outputs can record that the correction stage ran. Validates the host
/// exactly like [`corrected_rates`].
pub fn corrected_energy<T: LocalFieldInvariant>(
    raw: &T,
    eps_host: Complex64,
) -> Result<T, LocalFieldError> {
    require_nonabsorbing(eps_host)?;
    Ok(raw.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::Diagnostics;
    use approx::assert_relative_eq;

    fn raw_rates() -> RateResult {
        RateResult {
            gamma_total: 0.8,
            gamma_rad: 0.6,
            quadrature_error: 1e-9,
            guided_fraction: 0.25,
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn unity_host_is_identity() {
        let factor = LocalFieldFactor::new(Complex64::new(1.0, 0.0));
        assert_eq!(factor.factor, Complex64::new(1.0, 0.0));
        assert_eq!(factor.factor_sq_abs, 1.0);
        let raw = raw_rates();
        let corrected = corrected_rates(&raw, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(corrected, raw);
    }

    #[test]
    fn eps_four_multiplier_is_sixteen_ninths() {
        let factor = LocalFieldFactor::new(Complex64::new(4.0, 0.0));
        assert_relative_eq!(factor.factor_sq_abs, 16.0 / 9.0, max_relative = 1e-15);
        let corrected = corrected_rates(&raw_rates(), Complex64::new(4.0, 0.0)).unwrap();
        assert_relative_eq!(
            corrected.gamma_total,
            0.8 * 16.0 / 9.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn ratio_is_invariant() {
        // A single common multiplier cannot move the ratio by more than the
        // last bit of the two roundings it introduces.
        let raw = raw_rates();
        let corrected = corrected_rates(&raw, Complex64::new(2.25, 0.0)).unwrap();
        let before = raw.gamma_rad / raw.gamma_total;
        let after = corrected.gamma_rad / corrected.gamma_total;
        assert!((after - before).abs() <= f64::EPSILON * before.abs());
        assert_eq!(corrected.guided_fraction, raw.guided_fraction);
    }

    #[test]
    fn energy_is_untouched() {
        let energy = EnergyResult {
            w_top: 0.37,
            w_bottom: 0.21,
            lost_fraction: 1.0 - 0.37 - 0.21,
            form_discrepancy: 1e-11,
            quadrature_error: 1e-10,
            diagnostics: Diagnostics::default(),
        };
        let corrected = corrected_energy(&energy, Complex64::new(2.25, 0.0)).unwrap();
        assert_eq!(corrected, energy);
    }

    #[test]
    fn lossy_host_is_rejected() {
        let raw = raw_rates();
        assert!(matches!(
            corrected_rates(&raw, Complex64::new(2.0, 0.1)),
            Err(LocalFieldError::UnsupportedRegime { .. })
        ));
        let energy = EnergyResult {
            w_top: 0.5,
            w_bottom: 0.5,
            lost_fraction: 0.0,
            form_discrepancy: 0.0,
            quadrature_error: 0.0,
            diagnostics: Diagnostics::default(),
        };
        assert!(corrected_energy(&energy, Complex64::new(-1.0, 0.0)).is_err());
    }
}
