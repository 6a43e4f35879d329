//! Shipped scenario presets, one per reference parameter study.
//!
//! All presets share the canonical materials (`ε_L = ε_j = 1` and a
//! single-resonance high-index material with `ω_T = 20 ω₀`,
//! `γ = 10⁻⁷ ω₀`, `ω_P = 1.7299 ω_T` unless stated otherwise) and a
//! centered emitter.

use super::schema::{load_scenario, Scenario, ScenarioError};

#[derive(Debug, Clone, Copy)]
pub struct PresetInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub source: &'static str,
}

macro_rules! presets {
    ($(($name:literal, $summary:literal, $file:literal)),+ $(,)?) => {
        &[$(PresetInfo {
            name: $name,
            summary: $summary,
            source: include_str!($file),
        }),+]
    };
}

static PRESETS: &[PresetInfo] = presets![
    (
        "vacuum",
        "All-vacuum control stack; every rate must come out at the free-space value",
        "presets/vacuum.toml"
    ),
    (
        "fig2a",
        "W_top vs omega_A, no defect, parallel dipole, 5 upper / {5,6,7} lower periods",
        "presets/fig2a.toml"
    ),
    (
        "fig2b",
        "W_top vs omega_A, half-wave defect, parallel dipole, 5 upper / {5,6,7} lower periods",
        "presets/fig2b.toml"
    ),
    (
        "fig2a_inset",
        "W_top switching near the band edge (no defect, 5+7): omega_P pair 1.7299/1.7529 omega_T",
        "presets/fig2a_inset.toml"
    ),
    (
        "fig2b_inset",
        "W_top switching near the defect resonance (5+7): omega_P pair 1.7299/1.7529 omega_T",
        "presets/fig2b_inset.toml"
    ),
    (
        "fig3a",
        "W_top vs omega_A for a perpendicular dipole, no defect, 5 upper / {5,6,7} lower periods",
        "presets/fig3a.toml"
    ),
    (
        "fig3b",
        "W_top vs omega_A for a perpendicular dipole, half-wave defect, 5 upper / {5,6,7} lower",
        "presets/fig3b.toml"
    ),
    (
        "fig4a",
        "Absorption study, no defect (5+7): gamma in {1e-7, 1e-3, 1e-2} omega_0",
        "presets/fig4a.toml"
    ),
    (
        "fig4b",
        "Absorption study with defect (5+7): gamma in {1e-7, 1e-3, 1e-2} omega_0",
        "presets/fig4b.toml"
    ),
    (
        "fig5a",
        "Rate spectra Gamma, Gamma_rad, ratio vs omega_A, no defect, 5+5, parallel dipole",
        "presets/fig5a.toml"
    ),
    (
        "fig5b",
        "Rate spectra Gamma, Gamma_rad, ratio vs omega_A with defect, 5+5, parallel dipole",
        "presets/fig5b.toml"
    ),
    (
        "fig6a",
        "Rates vs emitter position at omega_A = 1.25 omega_0, no defect, 5+5",
        "presets/fig6a.toml"
    ),
    (
        "fig6b",
        "Rates vs emitter position at omega_A = 1.01 omega_0, defect, 5+5",
        "presets/fig6b.toml"
    ),
    (
        "fig7a",
        "Angular map W(theta) vs omega_A near the band edge, no defect, 5+5, omega_P = 1.7529 omega_T",
        "presets/fig7a.toml"
    ),
    (
        "fig7b",
        "Angular map W(theta) vs omega_A near the defect resonance, 5+5, omega_P = 1.7529 omega_T",
        "presets/fig7b.toml"
    ),
];

/// Names of all shipped presets, in listing order.
pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.name).collect()
}

/// Registry entries (name, one-line summary, raw document).
pub fn preset_infos() -> &'static [PresetInfo] {
    PRESETS
}

/// Loads a preset by name.
pub fn preset(name: &str) -> Result<Scenario, ScenarioError> {
    let info =
        PRESETS
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| ScenarioError::UnknownPreset {
                name: name.to_string(),
            })?;
    load_scenario(info.source)
}
