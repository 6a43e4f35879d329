//! Shared fixtures for the benchmark targets.

use braggem::{build_bragg, DispersionModel, EmitterConfig, LayerStack, Orientation};

/// The canonical defect device: 5+5 quarter-wave mirror periods around a
/// half-wave vacuum layer.
pub fn defect_device() -> LayerStack {
    build_bragg(
        5,
        5,
        true,
        DispersionModel::vacuum(),
        DispersionModel::drude_lorentz(34.598, 20.0, 1e-7),
        DispersionModel::vacuum(),
    )
    .expect("canonical device builds")
}

/// Parallel dipole at the layer center.
pub fn centered_parallel_emitter(stack: &LayerStack, omega_a: f64) -> EmitterConfig {
    EmitterConfig::centered(stack, omega_a, Orientation::parallel())
}
