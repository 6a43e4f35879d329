//! Scenario execution contracts: determinism, output shape, preset
//! fidelity and failure handling.

use braggem::scenario::{self, Cell, OutputFormat};

const VACUUM_DOC: &str = r#"
[structure]
periods_up = 1
periods_down = 1
defect = false

[structure.materials]
eps_low = { constant = 1.0 }
eps_high = { constant = 1.0 }
eps_emitter = { constant = 1.0 }

[sweep]
omega_a = { values = [0.95, 1.0, 1.05] }

[outputs]
quantities = ["gamma_total", "gamma_rad", "W_top", "W_bottom"]
"#;

#[test]
fn vacuum_rows_are_free_space_values() {
    let scenario = scenario::load_scenario(VACUUM_DOC).unwrap();
    let table = scenario::run(&scenario, 1).unwrap();
    assert_eq!(table.metadata.failed_points, 0);
    assert_eq!(table.rows.len(), 3);
    assert_eq!(
        table.columns,
        vec![
            "omega_A",
            "gamma_total",
            "gamma_rad",
            "W_top",
            "W_bottom",
            "quad_err",
            "flags"
        ]
    );
    for row in &table.rows {
        let value = |i: usize| match row[i] {
            Cell::Float(x) => x,
            ref other => panic!("expected float, got {other:?}"),
        };
        assert!((value(1) - 1.0).abs() < 1e-6, "gamma_total {}", value(1));
        assert!((value(2) - 1.0).abs() < 1e-6);
        assert!((value(3) - 0.5).abs() < 1e-6);
        assert!((value(4) - 0.5).abs() < 1e-6);
    }
}

#[test]
fn csv_identical_across_runs_and_worker_counts() {
    // A defect-device slice exercises the full pipeline.
    let doc = r#"
[structure]
periods_up = 2
periods_down = 2
defect = true

[structure.materials]
eps_low = { constant = 1.0 }
eps_high = { drude_lorentz = { omega_p = 34.598, omega_t = 20.0, gamma = 1e-7 } }
eps_emitter = { constant = 1.0 }

[sweep]
omega_a = { start = 0.99, stop = 1.01, points = 7 }

[outputs]
quantities = ["gamma_total", "gamma_rad", "gamma_ratio", "W_top", "W_bottom"]
"#;
    let scenario = scenario::load_scenario(doc).unwrap();
    let serial = scenario::emit(&scenario::run(&scenario, 1).unwrap(), OutputFormat::Csv);
    let serial_again = scenario::emit(&scenario::run(&scenario, 1).unwrap(), OutputFormat::Csv);
    let parallel = scenario::emit(&scenario::run(&scenario, 4).unwrap(), OutputFormat::Csv);
    assert_eq!(serial, serial_again, "serial runs must be byte-identical");
    assert_eq!(serial, parallel, "worker count must not change the bytes");
}

#[test]
fn two_axis_sweep_row_order_and_count() {
    let doc = r#"
[structure]
periods_up = 1
periods_down = 1
defect = false

[structure.materials]
eps_low = { constant = 1.0 }
eps_high = { constant = 1.0 }
eps_emitter = { constant = 1.0 }

[sweep]
omega_a = { values = [1.0, 1.1] }
z_a = { values = [0.25, 0.5, 0.75] }
"#;
    let scenario = scenario::load_scenario(doc).unwrap();
    let table = scenario::run(&scenario, 1).unwrap();
    assert_eq!(table.rows.len(), 6);
    assert_eq!(table.columns[0], "omega_A");
    assert_eq!(table.columns[1], "z_A");
    // First axis outermost, z_A reported in lambda_0 units (fraction of
    // the quarter-wave vacuum layer, d_j = 0.25).
    let omega_of = |row: &Vec<Cell>| match row[0] {
        Cell::Float(x) => x,
        _ => unreachable!(),
    };
    let z_of = |row: &Vec<Cell>| match row[1] {
        Cell::Float(x) => x,
        _ => unreachable!(),
    };
    assert_eq!(omega_of(&table.rows[0]), 1.0);
    assert_eq!(omega_of(&table.rows[2]), 1.0);
    assert_eq!(omega_of(&table.rows[3]), 1.1);
    assert!((z_of(&table.rows[0]) - 0.0625).abs() < 1e-15);
    assert!((z_of(&table.rows[1]) - 0.125).abs() < 1e-15);
}

#[test]
fn w_theta_long_format_shape() {
    let doc = r#"
[structure]
periods_up = 1
periods_down = 1
defect = false

[structure.materials]
eps_low = { constant = 1.0 }
eps_high = { constant = 1.0 }
eps_emitter = { constant = 1.0 }

[sweep]
omega_a = { values = [1.0, 1.2] }

[outputs]
quantities = ["W_theta"]
theta_points = 5
"#;
    let scenario = scenario::load_scenario(doc).unwrap();
    let table = scenario::run(&scenario, 1).unwrap();
    assert_eq!(
        table.columns,
        vec!["omega_A", "theta", "W_theta", "quad_err", "flags"]
    );
    assert_eq!(table.rows.len(), 2 * 5);
    // Free space, parallel dipole: W(0) = 3/4.
    match table.rows[0][2] {
        Cell::Float(x) => assert!((x - 0.75).abs() < 1e-6),
        ref other => panic!("expected float, got {other:?}"),
    }
}

#[test]
fn local_field_scenario_scales_rates_only() {
    let base = r#"
[structure]
periods_up = 1
periods_down = 1
defect = false

[structure.materials]
eps_low = { constant = 1.0 }
eps_high = { constant = 1.0 }
eps_emitter = { constant = 1.0 }

[sweep]
omega_a = { values = [1.0] }

[outputs]
quantities = ["gamma_total", "W_top"]
"#;
    let with_correction = format!("{base}\n[local_field]\nenabled = true\neps_host = 4.0\n");
    let plain = scenario::run(&scenario::load_scenario(base).unwrap(), 1).unwrap();
    let corrected = scenario::run(&scenario::load_scenario(&with_correction).unwrap(), 1).unwrap();
    let get = |t: &scenario::ResultTable, col: usize| match t.rows[0][col] {
        Cell::Float(x) => x,
        _ => unreachable!(),
    };
    // gamma_total scaled by (3*4/9)^2 = 16/9; W untouched.
    assert!((get(&corrected, 1) / get(&plain, 1) - 16.0 / 9.0).abs() < 1e-12);
    assert_eq!(get(&corrected, 2), get(&plain, 2));
    assert!(corrected.metadata.local_field_enabled);
}

#[test]
fn per_point_failures_are_recorded_not_fatal() {
    // An absorbing upper half-space poisons rate computations; the run
    // must still produce a full table with error markers... but a fully
    // failing grid is a hard error. Check the aggregate-failure path.
    let doc = r#"
[structure]
periods_up = 1
periods_down = 1
defect = false

[structure.materials]
eps_low = { constant = 1.0 }
eps_high = { constant = [2.0, 0.5] }
eps_emitter = { constant = [1.0, 0.2] }

[sweep]
omega_a = { values = [1.0, 1.1] }
"#;
    let scenario = scenario::load_scenario(doc).unwrap();
    // eps_emitter lossy is allowed by the schema; the decay engine flags
    // it but still integrates, so this grid succeeds with diagnostics.
    let table = scenario::run(&scenario, 1).unwrap();
    for row in &table.rows {
        match row.last().unwrap() {
            Cell::Text(flags) => assert!(flags.contains("lossy_emitter")),
            other => panic!("expected flags text, got {other:?}"),
        }
    }
}

#[test]
fn presets_match_transcribed_parameter_table() {
    use braggem::decay::Orientation;

    // name, periods_up, periods_down, defect, omega_p, gamma, orientation,
    // second axis name (if any)
    type PresetRow = (
        &'static str,
        usize,
        usize,
        bool,
        f64,
        f64,
        Orientation,
        Option<&'static str>,
    );
    #[rustfmt::skip]
    let expected: &[PresetRow] = &[
        ("fig2a",       5, 5, false, 34.598, 1e-7, Orientation::parallel(),      Some("periods_down")),
        ("fig2b",       5, 5, true,  34.598, 1e-7, Orientation::parallel(),      Some("periods_down")),
        ("fig2a_inset", 5, 5, false, 34.598, 1e-7, Orientation::parallel(),      Some("omega_P")),
        ("fig2b_inset", 5, 7, true,  34.598, 1e-7, Orientation::parallel(),      Some("omega_P")),
        ("fig3a",       5, 5, false, 34.598, 1e-7, Orientation::perpendicular(), Some("periods_down")),
        ("fig3b",       5, 5, true,  34.598, 1e-7, Orientation::perpendicular(), Some("periods_down")),
        ("fig4a",       5, 7, false, 34.598, 1e-7, Orientation::parallel(),      Some("gamma")),
        ("fig4b",       5, 7, true,  34.598, 1e-7, Orientation::parallel(),      Some("gamma")),
        ("fig5a",       5, 5, false, 34.598, 1e-7, Orientation::parallel(),      None),
        ("fig5b",       5, 5, true,  34.598, 1e-7, Orientation::parallel(),      None),
        ("fig6a",       5, 5, false, 34.598, 1e-7, Orientation::parallel(),      None),
        ("fig6b",       5, 5, true,  34.598, 1e-7, Orientation::parallel(),      None),
        ("fig7a",       5, 5, false, 34.598, 1e-7, Orientation::parallel(),      Some("omega_P")),
        ("fig7b",       5, 5, true,  34.598, 1e-7, Orientation::parallel(),      Some("omega_P")),
    ];
    for &(name, up, down, defect, omega_p, gamma, orientation, second_axis) in expected {
        let s = scenario::preset(name).unwrap();
        assert_eq!(s.structure.periods_up, up, "{name}: periods_up");
        assert_eq!(s.structure.periods_down, down, "{name}: periods_down");
        assert_eq!(s.structure.defect, defect, "{name}: defect");
        match s.structure.eps_high {
            braggem::DispersionModel::DrudeLorentz {
                omega_p: op,
                omega_t,
                gamma: g,
            } => {
                assert_eq!(op, omega_p, "{name}: omega_p");
                assert_eq!(omega_t, 20.0, "{name}: omega_t");
                assert_eq!(g, gamma, "{name}: gamma");
            }
            ref other => panic!("{name}: expected resonant eps_high, got {other:?}"),
        }
        assert_eq!(s.emitter.orientation, orientation, "{name}: orientation");
        assert_eq!(s.emitter.z_a_frac, 0.5, "{name}: emitter centered");
        let second = s.sweep.get(1).map(|a| a.column_name());
        assert_eq!(second, second_axis, "{name}: second axis");
    }

    // Spot-check the per-preset emitter frequencies and sweep values.
    let fig6a = scenario::preset("fig6a").unwrap();
    assert_eq!(fig6a.emitter.omega_a, 1.25);
    let fig6b = scenario::preset("fig6b").unwrap();
    assert_eq!(fig6b.emitter.omega_a, 1.01);
    let fig4a = scenario::preset("fig4a").unwrap();
    match &fig4a.sweep[1] {
        scenario::SweepAxis::Gamma(values) => assert_eq!(values, &vec![1e-7, 1e-3, 1e-2]),
        other => panic!("fig4a second axis {other:?}"),
    }
    let fig7a = scenario::preset("fig7a").unwrap();
    match &fig7a.sweep[1] {
        scenario::SweepAxis::OmegaP(values) => assert_eq!(values, &vec![35.058]),
        other => panic!("fig7a second axis {other:?}"),
    }
    let inset = scenario::preset("fig2b_inset").unwrap();
    match &inset.sweep[1] {
        scenario::SweepAxis::OmegaP(values) => assert_eq!(values, &vec![34.598, 35.058]),
        other => panic!("fig2b_inset second axis {other:?}"),
    }
}

#[test]
fn json_emission_carries_metadata() {
    let scenario = scenario::load_scenario(VACUUM_DOC).unwrap();
    let table = scenario::run(&scenario, 1).unwrap();
    let json = scenario::emit(&table, OutputFormat::Json);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["metadata"]["grid_points"], 3);
    assert_eq!(value["metadata"]["failed_points"], 0);
    assert_eq!(value["metadata"]["rel_tol"], 1e-8);
    assert!(value["metadata"]["scenario_hash"].is_string());
    assert_eq!(value["rows"].as_array().unwrap().len(), 3);
}
