//! Single-photon emission from a dipole embedded in a planar Bragg band-gap
//! multilayer.
//!
//! The library computes, for a dipole emitter inside a stack of planar
//! dielectric layers (two distributed Bragg reflectors with an optional
//! half-wave defect layer in between):
//!
//! * the total spontaneous decay rate `Γ/Γ₀` as an in-plane wave-number
//!   integral over the layered-medium mode density,
//! * the radiative decay rate `Γ_rad/Γ₀` (waves able to leave the device),
//! * the expectation value of the radiation energy escaping into either
//!   half-space, `W/ħω_A`, and its angular distribution `W(θ)`,
//! * real-cavity local-field corrections for emitters hosted in a medium
//!   with permittivity different from unity.
//!
//! All frequencies are expressed in units of a reference design frequency
//! `ω₀` and all lengths in units of the corresponding vacuum wavelength
//! `λ₀ = 2πc/ω₀`; the library is otherwise unit-agnostic.
//!
//! The [`scenario`] module adds declarative scenario files, parameter sweeps
//! and CSV/JSON emission on top of the physics kernels; the `braggem` CLI in
//! this workspace is a thin wrapper around it.

// Validation guards are written as negated comparisons (`!(x > 0.0)`) on
// purpose: they must reject NaN inputs as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay;
pub mod dispersion;
pub mod farfield;
pub mod localfield;
mod peaks;
pub mod quad;
pub mod scenario;
pub mod stack;

pub use decay::{
    radiative_rate, rate_integrand, total_rate, DecayError, Diagnostics, EmitterConfig,
    Orientation, RateResult,
};
pub use dispersion::{permittivity, DispersionError, DispersionModel};
pub use farfield::{
    angular_energy, default_theta_grid, farfield_amplitudes, total_energy, AngularSpectrum,
    Emission, EnergyResult, FarfieldAmplitudes, FarfieldError, Side,
};
pub use localfield::{corrected_energy, corrected_rates, LocalFieldError, LocalFieldFactor};
pub use quad::{QuadError, QuadOutcome, QuadSettings};
pub use scenario::{load_scenario, run, ResultTable, Scenario, ScenarioError};
pub use stack::{
    build_bragg, build_bragg_with, coefficients, wave_numbers, AdjacentMaterial, Layer, LayerStack,
    Polarization, PolarizedCoefficients, StackError, WaveNumbers,
};
