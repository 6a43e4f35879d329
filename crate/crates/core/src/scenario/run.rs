//! Sweep execution over the scenario grid.
//!
//! Geometry rule: plate thicknesses are always derived from the materials
//! declared in `[structure.materials]` at the design frequency. Sweep axes
//! that tune material parameters (`gamma`, `omega_p`) change the dispersion
//! only — the fabricated geometry of the device stays fixed, which is the
//! physical situation the tuning schemes describe.

use rayon::prelude::*;
use serde::Serialize;

use crate::decay::{EmitterConfig, RateResult};
use crate::dispersion::DispersionModel;
use crate::farfield::{AngularSpectrum, Emission, EnergyResult, Side};
use crate::localfield;
use crate::stack::{build_bragg_explicit, quarter_wave_thickness, LayerStack};

use super::schema::{Quantity, Scenario, ScenarioError, SweepAxis};

/// One value in an output row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Float(x) => serializer.serialize_f64(*x),
            Cell::Int(i) => serializer.serialize_i64(*i),
            Cell::Text(s) => serializer.serialize_str(s),
            Cell::Missing => serializer.serialize_none(),
        }
    }
}

/// Everything computed at one sweep point.
#[derive(Debug, Clone)]
pub struct PointRecord {
    pub coords: Vec<Cell>,
    pub rate: Option<RateResult>,
    pub energy: Option<EnergyResult>,
    pub spectrum: Option<AngularSpectrum>,
    /// Short error marker (`error:<kind>`) when the point failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableMetadata {
    pub scenario_hash: String,
    pub engine_version: String,
    pub scenario_name: Option<String>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub local_field_enabled: bool,
    pub local_field_eps: Option<[f64; 2]>,
    pub grid_points: usize,
    pub failed_points: usize,
}

/// Deterministic result table: one row per sweep point (or per
/// `(point, θ)` pair in long format), assembled in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub metadata: TableMetadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// Design thicknesses, fixed for the whole sweep (`λ₀` units).
#[derive(Debug, Clone, Copy)]
struct Design {
    d_low: f64,
    d_high: f64,
    d_emitter: f64,
}

#[derive(Debug, Clone)]
struct PointSpec {
    coords: Vec<Cell>,
    omega_a: f64,
    z_a_frac: f64,
    gamma: Option<f64>,
    omega_p: Option<f64>,
    periods_down: usize,
}

enum AxisValue {
    OmegaA(f64),
    ZAFrac(f64),
    Gamma(f64),
    OmegaP(f64),
    PeriodsDown(usize),
}

fn axis_values(axis: &SweepAxis) -> Vec<AxisValue> {
    match axis {
        SweepAxis::OmegaA(v) => v.iter().map(|&x| AxisValue::OmegaA(x)).collect(),
        SweepAxis::ZAFrac(v) => v.iter().map(|&x| AxisValue::ZAFrac(x)).collect(),
        SweepAxis::Gamma(v) => v.iter().map(|&x| AxisValue::Gamma(x)).collect(),
        SweepAxis::OmegaP(v) => v.iter().map(|&x| AxisValue::OmegaP(x)).collect(),
        SweepAxis::PeriodsDown(v) => v.iter().map(|&p| AxisValue::PeriodsDown(p)).collect(),
    }
}

fn apply_axis(spec: &mut PointSpec, value: &AxisValue, design: &Design) {
    match *value {
        AxisValue::OmegaA(x) => {
            spec.omega_a = x;
            spec.coords.push(Cell::Float(x));
        }
        AxisValue::ZAFrac(frac) => {
            spec.z_a_frac = frac;
            // The z_A coordinate is reported in λ₀ units.
            spec.coords.push(Cell::Float(frac * design.d_emitter));
        }
        AxisValue::Gamma(x) => {
            spec.gamma = Some(x);
            spec.coords.push(Cell::Float(x));
        }
        AxisValue::OmegaP(x) => {
            spec.omega_p = Some(x);
            spec.coords.push(Cell::Float(x));
        }
        AxisValue::PeriodsDown(p) => {
            spec.periods_down = p;
            spec.coords.push(Cell::Int(p as i64));
        }
    }
}

fn tuned_high_index(
    base: &DispersionModel,
    gamma_override: Option<f64>,
    omega_p_override: Option<f64>,
) -> DispersionModel {
    match *base {
        DispersionModel::DrudeLorentz {
            omega_p,
            omega_t,
            gamma,
        } => DispersionModel::DrudeLorentz {
            omega_p: omega_p_override.unwrap_or(omega_p),
            omega_t,
            gamma: gamma_override.unwrap_or(gamma),
        },
        constant => constant,
    }
}

fn realize_stack(
    scenario: &Scenario,
    design: &Design,
    spec: &PointSpec,
) -> Result<LayerStack, String> {
    let s = &scenario.structure;
    let eps_high = tuned_high_index(&s.eps_high, spec.gamma, spec.omega_p);
    build_bragg_explicit(
        s.periods_up,
        spec.periods_down,
        s.adjacent_material,
        (s.eps_low, design.d_low),
        (eps_high, design.d_high),
        (s.eps_emitter, design.d_emitter),
    )
    .map_err(|_| "error:invalid_stack".to_string())
}

fn compute_point(scenario: &Scenario, design: &Design, spec: &PointSpec) -> PointRecord {
    let mut record = PointRecord {
        coords: spec.coords.clone(),
        rate: None,
        energy: None,
        spectrum: None,
        error: None,
    };
    let stack = match realize_stack(scenario, design, spec) {
        Ok(stack) => stack,
        Err(code) => {
            record.error = Some(code);
            return record;
        }
    };
    let emitter = EmitterConfig {
        omega_a: spec.omega_a,
        z_a: spec.z_a_frac * design.d_emitter,
        orientation: scenario.emitter.orientation,
    };
    let emission = Emission::new(&stack, emitter, scenario.quad_settings());

    let rate = match emission.rates() {
        Ok(rate) => rate,
        Err(e) => {
            record.error = Some(format!("error:{}", rate_error_kind(&e)));
            return record;
        }
    };

    let wants_energy = scenario.wants(Quantity::WTop) || scenario.wants(Quantity::WBottom);
    if wants_energy {
        match emission.total_energy() {
            Ok(energy) => {
                record.energy = Some(energy);
            }
            Err(e) => {
                record.error = Some(format!("error:{}", farfield_error_kind(&e)));
                return record;
            }
        }
    }
    if scenario.wants(Quantity::WTheta) {
        let thetas = theta_grid(scenario.theta_points);
        match emission.angular_energy(Side::Above, &thetas) {
            Ok(spectrum) => record.spectrum = Some(spectrum),
            Err(e) => {
                record.error = Some(format!("error:{}", farfield_error_kind(&e)));
                return record;
            }
        }
    }

    if let Some(eps_host) = scenario.local_field_eps() {
        match localfield::corrected_rates(&rate, eps_host) {
            Ok(corrected) => record.rate = Some(corrected),
            Err(_) => {
                record.error = Some("error:local_field".to_string());
                return record;
            }
        }
        if let Some(energy) = record.energy.take() {
            match localfield::corrected_energy(&energy, eps_host) {
                Ok(e) => record.energy = Some(e),
                Err(_) => {
                    record.error = Some("error:local_field".to_string());
                    return record;
                }
            }
        }
        if let Some(spectrum) = record.spectrum.take() {
            match localfield::corrected_energy(&spectrum, eps_host) {
                Ok(s) => record.spectrum = Some(s),
                Err(_) => {
                    record.error = Some("error:local_field".to_string());
                    return record;
                }
            }
        }
    } else {
        record.rate = Some(rate);
    }

    record
}

fn rate_error_kind(err: &crate::decay::DecayError) -> &'static str {
    use crate::decay::DecayError::*;
    match err {
        Dispersion(_) => "dispersion",
        InvalidEmitter { .. } => "invalid_emitter",
        NonRealOuterMedium { .. } => "lossy_half_space",
        Quadrature { .. } => "quadrature_failure",
    }
}

fn farfield_error_kind(err: &crate::farfield::FarfieldError) -> &'static str {
    use crate::farfield::FarfieldError::*;
    match err {
        Rate(e) => rate_error_kind(e),
        InvalidSide { .. } => "lossy_half_space",
        InvalidTheta { .. } => "invalid_theta",
        Quadrature { .. } => "quadrature_failure",
    }
}

fn theta_grid(points: usize) -> Vec<f64> {
    let step = std::f64::consts::FRAC_PI_2 / points as f64;
    (0..points).map(|i| i as f64 * step).collect()
}

fn finite_cell(x: f64) -> Cell {
    if x.is_finite() {
        Cell::Float(x)
    } else {
        Cell::Missing
    }
}

/// Executes the scenario over its grid with `jobs` workers (`0` uses the
/// default pool size). Per-point failures are recorded in the table and the
/// run continues; only a fully failed grid is an error.
pub fn run(scenario: &Scenario, jobs: usize) -> Result<ResultTable, ScenarioError> {
    // Material tuning axes need a resonant high-index material.
    let tunes_material = scenario
        .sweep
        .iter()
        .any(|axis| matches!(axis, SweepAxis::Gamma(_) | SweepAxis::OmegaP(_)));
    if tunes_material
        && !matches!(
            scenario.structure.eps_high,
            DispersionModel::DrudeLorentz { .. }
        )
    {
        return Err(ScenarioError::Validation {
            field: "sweep.gamma/omega_p".to_string(),
            message: "material-tuning axes require a drude_lorentz eps_high".to_string(),
        });
    }

    let to_schema = |e: crate::stack::StackError| ScenarioError::Validation {
        field: "structure".to_string(),
        message: e.to_string(),
    };
    let design = Design {
        d_low: quarter_wave_thickness(&scenario.structure.eps_low).map_err(to_schema)?,
        d_high: quarter_wave_thickness(&scenario.structure.eps_high).map_err(to_schema)?,
        d_emitter: {
            let quarter =
                quarter_wave_thickness(&scenario.structure.eps_emitter).map_err(to_schema)?;
            if scenario.structure.defect {
                2.0 * quarter
            } else {
                quarter
            }
        },
    };

    // Cartesian grid in canonical axis order, first axis outermost.
    let base = PointSpec {
        coords: Vec::new(),
        omega_a: scenario.emitter.omega_a,
        z_a_frac: scenario.emitter.z_a_frac,
        gamma: None,
        omega_p: None,
        periods_down: scenario.structure.periods_down,
    };
    let mut points: Vec<PointSpec> = vec![base];
    for axis in &scenario.sweep {
        let values = axis_values(axis);
        let mut next = Vec::with_capacity(points.len() * values.len());
        for point in &points {
            for value in &values {
                let mut spec = point.clone();
                apply_axis(&mut spec, value, &design);
                next.push(spec);
            }
        }
        points = next;
    }

    let records: Vec<PointRecord> = if jobs == 1 {
        points
            .iter()
            .map(|spec| compute_point(scenario, &design, spec))
            .collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if jobs > 0 {
            builder = builder.num_threads(jobs);
        }
        let pool = builder.build().map_err(|e| ScenarioError::Validation {
            field: "jobs".to_string(),
            message: e.to_string(),
        })?;
        pool.install(|| {
            points
                .par_iter()
                .map(|spec| compute_point(scenario, &design, spec))
                .collect()
        })
    };

    let failed_points = records.iter().filter(|r| r.error.is_some()).count();
    if failed_points == records.len() && !records.is_empty() {
        let first_error = records[0].error.clone().unwrap_or_default();
        return Err(ScenarioError::AllPointsFailed { first_error });
    }

    let metadata = TableMetadata {
        scenario_hash: scenario.hash(),
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        scenario_name: scenario.name.clone(),
        rel_tol: scenario.rel_tol,
        abs_tol: scenario.abs_tol,
        max_panels: scenario.max_panels,
        local_field_enabled: scenario.local_field.is_some(),
        local_field_eps: scenario.local_field,
        grid_points: points.len(),
        failed_points,
    };

    let axis_columns: Vec<String> = scenario
        .sweep
        .iter()
        .map(|axis| axis.column_name().to_string())
        .collect();

    let (columns, rows) = if scenario.wants(Quantity::WTheta) {
        assemble_long(&axis_columns, &records, scenario.theta_points)
    } else {
        assemble_scalar(&axis_columns, &records, &scenario.quantities)
    };

    Ok(ResultTable {
        metadata,
        columns,
        rows,
    })
}

fn flags_cell(record: &PointRecord) -> Cell {
    if let Some(code) = &record.error {
        return Cell::Text(code.clone());
    }
    let diagnostics = record
        .rate
        .map(|r| r.diagnostics)
        .or(record.energy.map(|e| e.diagnostics))
        .unwrap_or_default();
    if diagnostics.is_clear() {
        Cell::Text(String::new())
    } else {
        Cell::Text(diagnostics.to_string())
    }
}

fn quad_err_cell(record: &PointRecord) -> Cell {
    if record.error.is_some() {
        return Cell::Missing;
    }
    let mut err = 0.0;
    if let Some(rate) = &record.rate {
        err += rate.quadrature_error;
    }
    if let Some(energy) = &record.energy {
        err += energy.quadrature_error;
    }
    finite_cell(err)
}

fn assemble_scalar(
    axis_columns: &[String],
    records: &[PointRecord],
    quantities: &[Quantity],
) -> (Vec<String>, Vec<Vec<Cell>>) {
    let mut columns = axis_columns.to_vec();
    columns.extend(quantities.iter().map(|q| q.column_name().to_string()));
    columns.push("quad_err".to_string());
    columns.push("flags".to_string());

    let rows = records
        .iter()
        .map(|record| {
            let mut row = record.coords.clone();
            for quantity in quantities {
                let value = match quantity {
                    Quantity::GammaTotal => record.rate.map(|r| r.gamma_total),
                    Quantity::GammaRad => record.rate.map(|r| r.gamma_rad),
                    Quantity::GammaRatio => record.rate.map(|r| r.gamma_rad / r.gamma_total),
                    Quantity::WTop => record.energy.map(|e| e.w_top),
                    Quantity::WBottom => record.energy.map(|e| e.w_bottom),
                    Quantity::WTheta => None,
                };
                row.push(value.map_or(Cell::Missing, finite_cell));
            }
            row.push(quad_err_cell(record));
            row.push(flags_cell(record));
            row
        })
        .collect();
    (columns, rows)
}

fn assemble_long(
    axis_columns: &[String],
    records: &[PointRecord],
    theta_points: usize,
) -> (Vec<String>, Vec<Vec<Cell>>) {
    let mut columns = axis_columns.to_vec();
    columns.push("theta".to_string());
    columns.push("W_theta".to_string());
    columns.push("quad_err".to_string());
    columns.push("flags".to_string());

    let thetas = theta_grid(theta_points);
    let mut rows = Vec::with_capacity(records.len() * theta_points);
    for record in records {
        let quad_err = quad_err_cell(record);
        let flags = flags_cell(record);
        for (i, &theta) in thetas.iter().enumerate() {
            let mut row = record.coords.clone();
            row.push(Cell::Float(theta));
            let value = record
                .spectrum
                .as_ref()
                .map(|s| s.values[i])
                .map_or(Cell::Missing, finite_cell);
            row.push(value);
            row.push(quad_err.clone());
            row.push(flags.clone());
            rows.push(row);
        }
    }
    (columns, rows)
}
