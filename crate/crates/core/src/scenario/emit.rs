//! Result-table serialization: CSV (RFC-4180-style quoting, floats at 17
//! significant digits so re-parsing round-trips exactly) and JSON
//! (metadata object plus row array, schema-stable).

use serde::Serialize;

use super::run::{Cell, ResultTable, TableMetadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}; expected csv or json")),
        }
    }
}

/// Serializes the table. Deterministic: identical tables yield identical
/// bytes.
pub fn emit(table: &ResultTable, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => emit_csv(table),
        OutputFormat::Json => emit_json(table),
    }
}

fn format_float(x: f64) -> String {
    // 17 significant digits: enough for exact f64 round-trips.
    format!("{x:.16e}")
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') || field.contains('\r') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        Cell::Float(x) => format_float(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => csv_escape(s),
        Cell::Missing => String::new(),
    }
}

fn emit_csv(table: &ResultTable) -> String {
    let mut out = String::new();
    out.push_str(
        &table
            .columns
            .iter()
            .map(|c| csv_escape(c))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    metadata: &'a TableMetadata,
    columns: &'a [String],
    rows: &'a [Vec<Cell>],
}

fn emit_json(table: &ResultTable) -> String {
    let doc = JsonDocument {
        metadata: &table.metadata,
        columns: &table.columns,
        rows: &table.rows,
    };
    serde_json::to_string_pretty(&doc).expect("table serializes")
}
