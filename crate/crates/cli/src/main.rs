//! `braggem` — scenario runner for dipole emission in planar band-gap
//! multilayers.
//!
//! Exit codes: 0 full success, 2 run completed with per-point failures,
//! 1 fatal error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use braggem::scenario::{self, OutputFormat};

#[derive(Parser)]
#[command(
    name = "braggem",
    version,
    about = "Decay rates, escaped energy and angular emission patterns \
             for a dipole in a planar Bragg band-gap multilayer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a named preset) over its sweep grid.
    Run {
        /// Scenario document (TOML). Omit when using --preset.
        scenario: Option<PathBuf>,
        /// Run a shipped preset instead of a file.
        #[arg(long, conflicts_with = "scenario")]
        preset: Option<String>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Worker count; 0 uses all available cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Override the relative quadrature tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// List the shipped presets.
    ListPresets,
    /// Parse and validate a scenario file, echoing the resolved settings.
    Validate { scenario: PathBuf },
}

fn load(path: Option<&PathBuf>, preset: Option<&String>) -> Result<scenario::Scenario, String> {
    match (path, preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            scenario::load_scenario(&text).map_err(|e| e.to_string())
        }
        (None, Some(name)) => scenario::preset(name).map_err(|e| e.to_string()),
        (None, None) => Err("give a scenario file or --preset NAME".to_string()),
        (Some(_), Some(_)) => unreachable!("clap forbids this combination"),
    }
}

fn cmd_run(
    path: Option<PathBuf>,
    preset: Option<String>,
    out: Option<PathBuf>,
    format: String,
    jobs: usize,
    tol: Option<f64>,
) -> Result<u8, String> {
    let format: OutputFormat = format.parse()?;
    let mut scenario = load(path.as_ref(), preset.as_ref())?;
    if let Some(tol) = tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(format!("--tol must lie in (0, 1), got {tol}"));
        }
        scenario.rel_tol = tol;
    }

    let table = scenario::run(&scenario, jobs).map_err(|e| e.to_string())?;
    let document = scenario::emit(&table, format);
    match &out {
        Some(path) => fs::write(path, document)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => {
            std::io::stdout()
                .write_all(document.as_bytes())
                .map_err(|e| e.to_string())?;
        }
    }

    if table.metadata.failed_points > 0 {
        eprintln!(
            "warning: {} of {} sweep points failed (see the flags column)",
            table.metadata.failed_points, table.metadata.grid_points
        );
        Ok(2)
    } else {
        Ok(0)
    }
}

fn cmd_list_presets() -> u8 {
    for info in scenario::preset_infos() {
        println!("{:<12} {}", info.name, info.summary);
    }
    0
}

fn cmd_validate(path: PathBuf) -> Result<u8, String> {
    let text =
        fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let scenario = scenario::load_scenario(&text).map_err(|e| e.to_string())?;
    println!(
        "ok: {} sweep point(s), {} axis/axes, hash {}",
        scenario.grid_size(),
        scenario.sweep.len(),
        scenario.hash()
    );
    println!(
        "  structure: {}+{} periods, defect = {}",
        scenario.structure.periods_up, scenario.structure.periods_down, scenario.structure.defect
    );
    println!(
        "  emitter: omega_A = {} omega_0, z_A = {} d_j, w_z = {}, w_par = {}",
        scenario.emitter.omega_a,
        scenario.emitter.z_a_frac,
        scenario.emitter.orientation.w_z,
        scenario.emitter.orientation.w_par
    );
    println!(
        "  quantities: {}",
        scenario
            .quantities
            .iter()
            .map(|q| q.column_name())
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!(
        "  tolerances: rel {}, abs {}, budget {} panels",
        scenario.rel_tol, scenario.abs_tol, scenario.max_panels
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            scenario,
            preset,
            out,
            format,
            jobs,
            tol,
        } => cmd_run(scenario, preset, out, format, jobs, tol),
        Command::ListPresets => Ok(cmd_list_presets()),
        Command::Validate { scenario } => cmd_validate(scenario),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
