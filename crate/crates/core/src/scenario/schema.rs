//! Scenario document schema, parsing and validation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decay::Orientation;
use crate::dispersion::DispersionModel;
use crate::quad::QuadSettings;
use crate::stack::AdjacentMaterial;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario field {field}: {message}")]
    Validation { field: String, message: String },
    #[error("unknown preset {name:?}; `list-presets` shows the available names")]
    UnknownPreset { name: String },
    #[error("every sweep point failed; first error: {first_error}")]
    AllPointsFailed { first_error: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Raw document (serde DTOs, strict about unknown keys)
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    name: Option<String>,
    structure: StructureDoc,
    #[serde(default)]
    emitter: EmitterDoc,
    sweep: SweepDoc,
    #[serde(default)]
    outputs: OutputsDoc,
    #[serde(default)]
    tolerances: TolerancesDoc,
    #[serde(default)]
    local_field: Option<LocalFieldDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StructureDoc {
    periods_up: usize,
    periods_down: usize,
    defect: bool,
    adjacent_material: Option<String>,
    materials: MaterialsDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialsDoc {
    eps_low: MaterialDoc,
    eps_high: MaterialDoc,
    eps_emitter: MaterialDoc,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialDoc {
    constant: Option<ConstantDoc>,
    drude_lorentz: Option<DrudeLorentzDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ConstantDoc {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DrudeLorentzDoc {
    omega_p: f64,
    omega_t: f64,
    gamma: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmitterDoc {
    omega_a: Option<f64>,
    z_a: Option<f64>,
    orientation: Option<OrientationDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OrientationDoc {
    Named(String),
    Weights { w_z: f64, w_par: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    omega_a: Option<GridDoc>,
    z_a: Option<GridDoc>,
    gamma: Option<GridDoc>,
    omega_p: Option<GridDoc>,
    periods_down: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDoc {
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    values: Option<Vec<f64>>,
    refine: Option<RefineDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RefineDoc {
    from: f64,
    to: f64,
    factor: u32,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputsDoc {
    quantities: Option<Vec<String>>,
    theta_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolerancesDoc {
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    max_panels: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalFieldDoc {
    enabled: bool,
    eps_host: Option<ConstantDoc>,
}

// ---------------------------------------------------------------------------
// Validated scenario
// ---------------------------------------------------------------------------

/// Output quantities a scenario can request. `WTheta` yields a long-format
/// table and cannot be combined with the scalar quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    GammaTotal,
    GammaRad,
    GammaRatio,
    WTop,
    WBottom,
    WTheta,
}

impl Quantity {
    pub fn column_name(&self) -> &'static str {
        match self {
            Quantity::GammaTotal => "gamma_total",
            Quantity::GammaRad => "gamma_rad",
            Quantity::GammaRatio => "gamma_ratio",
            Quantity::WTop => "W_top",
            Quantity::WBottom => "W_bottom",
            Quantity::WTheta => "W_theta",
        }
    }

    fn parse(token: &str) -> Option<Quantity> {
        Some(match token {
            "gamma_total" => Quantity::GammaTotal,
            "gamma_rad" => Quantity::GammaRad,
            "gamma_ratio" => Quantity::GammaRatio,
            "W_top" => Quantity::WTop,
            "W_bottom" => Quantity::WBottom,
            "W_theta" => Quantity::WTheta,
            _ => return None,
        })
    }
}

/// Device structure: mirror periods, defect flag and the three materials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureSpec {
    pub periods_up: usize,
    pub periods_down: usize,
    pub defect: bool,
    pub adjacent_material: AdjacentMaterial,
    pub eps_low: DispersionModel,
    pub eps_high: DispersionModel,
    pub eps_emitter: DispersionModel,
}

/// Emitter template; `z_a_frac` is the height above the lower face of the
/// emitter layer as a fraction of its thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmitterSpec {
    pub omega_a: f64,
    pub z_a_frac: f64,
    pub orientation: Orientation,
}

/// One sweep axis with its resolved grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SweepAxis {
    OmegaA(Vec<f64>),
    /// Fractions of the emitter-layer thickness.
    ZAFrac(Vec<f64>),
    /// Absorption linewidth of the high-index material, units of `ω₀`.
    Gamma(Vec<f64>),
    /// Coupling strength of the high-index material, units of `ω₀`.
    OmegaP(Vec<f64>),
    PeriodsDown(Vec<usize>),
}

impl SweepAxis {
    pub fn column_name(&self) -> &'static str {
        match self {
            SweepAxis::OmegaA(_) => "omega_A",
            SweepAxis::ZAFrac(_) => "z_A",
            SweepAxis::Gamma(_) => "gamma",
            SweepAxis::OmegaP(_) => "omega_P",
            SweepAxis::PeriodsDown(_) => "periods_down",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::OmegaA(v)
            | SweepAxis::ZAFrac(v)
            | SweepAxis::Gamma(v)
            | SweepAxis::OmegaP(v) => v.len(),
            SweepAxis::PeriodsDown(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fully validated scenario with all defaults resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: Option<String>,
    pub structure: StructureSpec,
    pub emitter: EmitterSpec,
    /// One or two axes, in canonical column order.
    pub sweep: Vec<SweepAxis>,
    pub quantities: Vec<Quantity>,
    pub theta_points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub local_field: Option<[f64; 2]>,
}

impl Scenario {
    pub fn quad_settings(&self) -> QuadSettings {
        QuadSettings {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_panels: self.max_panels,
        }
    }

    pub fn local_field_eps(&self) -> Option<Complex64> {
        self.local_field.map(|[re, im]| Complex64::new(re, im))
    }

    /// Number of sweep points (product of the axis lengths).
    pub fn grid_size(&self) -> usize {
        self.sweep.iter().map(SweepAxis::len).product()
    }

    /// Canonical fingerprint of the validated scenario.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        format!("{:016x}", super::fnv1a64(canonical.as_bytes()))
    }

    pub fn wants(&self, quantity: Quantity) -> bool {
        self.quantities.contains(&quantity)
    }
}

/// Parses and validates a scenario document (TOML text).
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: Document = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;

    let structure = validate_structure(doc.structure)?;
    let emitter = validate_emitter(doc.emitter)?;
    let sweep = validate_sweep(doc.sweep)?;
    let (quantities, theta_points) = validate_outputs(doc.outputs)?;
    let (rel_tol, abs_tol, max_panels) = validate_tolerances(doc.tolerances)?;
    let local_field = validate_local_field(doc.local_field)?;

    Ok(Scenario {
        name: doc.name,
        structure,
        emitter,
        sweep,
        quantities,
        theta_points,
        rel_tol,
        abs_tol,
        max_panels,
        local_field,
    })
}

fn validate_material(field: &str, doc: MaterialDoc) -> Result<DispersionModel, ScenarioError> {
    let model = match (doc.constant, doc.drude_lorentz) {
        (Some(c), None) => {
            let eps = match c {
                ConstantDoc::Real(re) => Complex64::new(re, 0.0),
                ConstantDoc::Complex([re, im]) => Complex64::new(re, im),
            };
            DispersionModel::Constant { eps }
        }
        (None, Some(d)) => DispersionModel::drude_lorentz(d.omega_p, d.omega_t, d.gamma),
        _ => {
            return Err(invalid(
                field,
                "exactly one of `constant` or `drude_lorentz` must be given",
            ))
        }
    };
    model
        .validate()
        .map_err(|e| invalid(field, e.to_string()))?;
    Ok(model)
}

fn validate_structure(doc: StructureDoc) -> Result<StructureSpec, ScenarioError> {
    if doc.periods_up < 1 || doc.periods_down < 1 {
        return Err(invalid(
            "structure.periods_up/periods_down",
            "mirror periods must be >= 1",
        ));
    }
    let adjacent_material = match doc.adjacent_material.as_deref() {
        None | Some("H") => AdjacentMaterial::High,
        Some("L") => AdjacentMaterial::Low,
        Some(other) => {
            return Err(invalid(
                "structure.adjacent_material",
                format!("must be \"H\" or \"L\", got {other:?}"),
            ))
        }
    };
    Ok(StructureSpec {
        periods_up: doc.periods_up,
        periods_down: doc.periods_down,
        defect: doc.defect,
        adjacent_material,
        eps_low: validate_material("structure.materials.eps_low", doc.materials.eps_low)?,
        eps_high: validate_material("structure.materials.eps_high", doc.materials.eps_high)?,
        eps_emitter: validate_material(
            "structure.materials.eps_emitter",
            doc.materials.eps_emitter,
        )?,
    })
}

fn validate_emitter(doc: EmitterDoc) -> Result<EmitterSpec, ScenarioError> {
    let omega_a = doc.omega_a.unwrap_or(1.0);
    if !(omega_a > 0.0) {
        return Err(invalid("emitter.omega_a", "must be positive"));
    }
    let z_a_frac = doc.z_a.unwrap_or(0.5);
    if !(z_a_frac > 0.0 && z_a_frac < 1.0) {
        return Err(invalid(
            "emitter.z_a",
            format!("must lie strictly inside the layer as a fraction (0, 1), got {z_a_frac}"),
        ));
    }
    let orientation = match doc.orientation {
        None => Orientation::parallel(),
        Some(OrientationDoc::Named(name)) => match name.as_str() {
            "parallel" => Orientation::parallel(),
            "perpendicular" => Orientation::perpendicular(),
            "isotropic" => Orientation::isotropic(),
            other => {
                return Err(invalid(
                    "emitter.orientation",
                    format!(
                        "must be \"parallel\", \"perpendicular\", \"isotropic\" \
                         or {{ w_z, w_par }}, got {other:?}"
                    ),
                ))
            }
        },
        Some(OrientationDoc::Weights { w_z, w_par }) => {
            let o = Orientation { w_z, w_par };
            o.validate()
                .map_err(|e| invalid("emitter.orientation", e.to_string()))?;
            o
        }
    };
    Ok(EmitterSpec {
        omega_a,
        z_a_frac,
        orientation,
    })
}

fn build_grid(field: &str, doc: GridDoc) -> Result<Vec<f64>, ScenarioError> {
    let grid = match (doc.values, doc.start, doc.stop, doc.points) {
        (Some(values), None, None, None) => {
            if doc.refine.is_some() {
                return Err(invalid(
                    field,
                    "`refine` requires the start/stop/points form",
                ));
            }
            if values.is_empty() {
                return Err(invalid(field, "`values` must not be empty"));
            }
            values
        }
        (None, Some(start), Some(stop), Some(points)) => {
            if points < 1 {
                return Err(invalid(field, "`points` must be >= 1"));
            }
            if points == 1 {
                vec![start]
            } else {
                if !(stop > start) {
                    return Err(invalid(field, "`stop` must exceed `start`"));
                }
                let step = (stop - start) / (points - 1) as f64;
                let mut grid: Vec<f64> = (0..points).map(|i| start + step * i as f64).collect();
                if let Some(refine) = doc.refine {
                    if refine.factor < 2 {
                        return Err(invalid(field, "`refine.factor` must be >= 2"));
                    }
                    if !(refine.to > refine.from) {
                        return Err(invalid(field, "`refine.to` must exceed `refine.from`"));
                    }
                    let fine = step / refine.factor as f64;
                    let mut x = refine.from;
                    while x <= refine.to + 0.5 * fine {
                        grid.push(x);
                        x += fine;
                    }
                    grid.sort_by(f64::total_cmp);
                    grid.dedup();
                }
                grid
            }
        }
        _ => {
            return Err(invalid(
                field,
                "give either `values` or all of `start`, `stop`, `points`",
            ))
        }
    };
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(invalid(field, "grid must be strictly increasing"));
        }
    }
    if !grid.iter().all(|x| x.is_finite()) {
        return Err(invalid(field, "grid values must be finite"));
    }
    Ok(grid)
}

fn validate_sweep(doc: SweepDoc) -> Result<Vec<SweepAxis>, ScenarioError> {
    let mut axes = Vec::new();
    if let Some(grid) = doc.omega_a {
        let grid = build_grid("sweep.omega_a", grid)?;
        if grid.iter().any(|x| *x <= 0.0) {
            return Err(invalid("sweep.omega_a", "frequencies must be positive"));
        }
        axes.push(SweepAxis::OmegaA(grid));
    }
    if let Some(grid) = doc.z_a {
        let grid = build_grid("sweep.z_a", grid)?;
        if grid.iter().any(|x| *x <= 0.0 || *x >= 1.0) {
            return Err(invalid(
                "sweep.z_a",
                "positions are fractions of the emitter layer and must lie in (0, 1)",
            ));
        }
        axes.push(SweepAxis::ZAFrac(grid));
    }
    if let Some(grid) = doc.gamma {
        let grid = build_grid("sweep.gamma", grid)?;
        if grid.iter().any(|x| *x < 0.0) {
            return Err(invalid("sweep.gamma", "linewidths must be non-negative"));
        }
        axes.push(SweepAxis::Gamma(grid));
    }
    if let Some(grid) = doc.omega_p {
        let grid = build_grid("sweep.omega_p", grid)?;
        if grid.iter().any(|x| *x <= 0.0) {
            return Err(invalid(
                "sweep.omega_p",
                "coupling strengths must be positive",
            ));
        }
        axes.push(SweepAxis::OmegaP(grid));
    }
    if let Some(values) = doc.periods_down {
        if values.is_empty() {
            return Err(invalid("sweep.periods_down", "must not be empty"));
        }
        if values.iter().any(|p| *p < 1) {
            return Err(invalid("sweep.periods_down", "periods must be >= 1"));
        }
        for w in values.windows(2) {
            if w[1] <= w[0] {
                return Err(invalid(
                    "sweep.periods_down",
                    "periods must be strictly increasing",
                ));
            }
        }
        axes.push(SweepAxis::PeriodsDown(values));
    }
    match axes.len() {
        0 => Err(invalid("sweep", "at least one sweep axis is required")),
        1 | 2 => Ok(axes),
        n => Err(invalid(
            "sweep",
            format!("at most 2 sweep axes are supported, got {n}"),
        )),
    }
}

fn validate_outputs(doc: OutputsDoc) -> Result<(Vec<Quantity>, usize), ScenarioError> {
    let quantities = match doc.quantities {
        None => vec![Quantity::GammaTotal],
        Some(tokens) => {
            if tokens.is_empty() {
                return Err(invalid("outputs.quantities", "must not be empty"));
            }
            let mut quantities = Vec::with_capacity(tokens.len());
            for token in &tokens {
                let q = Quantity::parse(token).ok_or_else(|| {
                    invalid(
                        "outputs.quantities",
                        format!(
                            "unknown quantity {token:?}; expected gamma_total, gamma_rad, \
                             gamma_ratio, W_top, W_bottom or W_theta"
                        ),
                    )
                })?;
                if quantities.contains(&q) {
                    return Err(invalid(
                        "outputs.quantities",
                        format!("duplicate quantity {token:?}"),
                    ));
                }
                quantities.push(q);
            }
            if quantities.contains(&Quantity::WTheta) && quantities.len() > 1 {
                return Err(invalid(
                    "outputs.quantities",
                    "W_theta produces a long-format table and must be the only quantity",
                ));
            }
            quantities
        }
    };
    let theta_points = doc.theta_points.unwrap_or(721);
    if theta_points < 2 {
        return Err(invalid("outputs.theta_points", "must be >= 2"));
    }
    Ok((quantities, theta_points))
}

fn validate_tolerances(doc: TolerancesDoc) -> Result<(f64, f64, usize), ScenarioError> {
    let rel_tol = doc.rel_tol.unwrap_or(1e-8);
    let abs_tol = doc.abs_tol.unwrap_or(1e-14);
    let max_panels = doc.max_panels.unwrap_or(10_000);
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(invalid("tolerances.rel_tol", "must lie in (0, 1)"));
    }
    if !(abs_tol >= 0.0) {
        return Err(invalid("tolerances.abs_tol", "must be non-negative"));
    }
    if max_panels < 16 {
        return Err(invalid("tolerances.max_panels", "must be >= 16"));
    }
    Ok((rel_tol, abs_tol, max_panels))
}

fn validate_local_field(doc: Option<LocalFieldDoc>) -> Result<Option<[f64; 2]>, ScenarioError> {
    let Some(doc) = doc else { return Ok(None) };
    if !doc.enabled {
        return Ok(None);
    }
    let eps = match doc.eps_host {
        None => {
            return Err(invalid(
                "local_field.eps_host",
                "required when local_field.enabled = true",
            ))
        }
        Some(ConstantDoc::Real(re)) => [re, 0.0],
        Some(ConstantDoc::Complex(pair)) => pair,
    };
    if !(eps[0] > 0.0) || eps[1].abs() > 1e-3 * eps[0] {
        return Err(invalid(
            "local_field.eps_host",
            "host must be effectively non-absorbing (Re > 0, |Im/Re| <= 1e-3)",
        ));
    }
    Ok(Some(eps))
}
