//! Declarative scenario ingestion, sweep execution, result persistence and
//! figure-dataset emission.
//!
//! A scenario is a single TOML document describing a device structure, an
//! emitter, one or two sweep axes, the requested output quantities and the
//! quadrature tolerances. Unknown keys are errors. The exact schema is
//! documented in `docs/scenario.md`; shipped presets (one per reference
//! parameter study) live next to this module and are listed by
//! [`preset_names`].
//!
//! Runs are deterministic: identical scenario documents produce
//! byte-identical CSV output regardless of worker count, because every
//! sweep point is computed independently and results are assembled in grid
//! order.

mod emit;
mod presets;
mod run;
mod schema;

pub use emit::{emit, OutputFormat};
pub use presets::{preset, preset_infos, preset_names, PresetInfo};
pub use run::{run, Cell, PointRecord, ResultTable, TableMetadata};
pub use schema::{
    load_scenario, EmitterSpec, Quantity, Scenario, ScenarioError, StructureSpec, SweepAxis,
};

/// FNV-1a 64-bit hash, used to fingerprint canonicalized scenarios.
pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
