//! Per-iteration metric records and their CSV / JSON encodings.

use crate::error::{HarnessError, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const CSV_HEADER: [&str; 9] =
    ["seed", "iteration", "hv", "igd", "igd_plus", "fill_distance", "feasible_ratio", "wall_seconds", "flags"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    /// Evaluations after the initial design.
    pub iteration: usize,
    pub hv: f64,
    pub igd: f64,
    pub igd_plus: f64,
    pub fill_distance: f64,
    pub feasible_ratio: f64,
    pub wall_seconds: f64,
    pub flags: Vec<String>,
}

impl RunRecord {
    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "hv" => self.hv,
            "igd" => self.igd,
            "igd_plus" => self.igd_plus,
            "fill_distance" => self.fill_distance,
            "feasible_ratio" => self.feasible_ratio,
            "wall_seconds" => self.wall_seconds,
            _ => return None,
        })
    }
}

pub const METRICS: [&str; 6] = ["hv", "igd", "igd_plus", "fill_distance", "feasible_ratio", "wall_seconds"];

/// Ten significant digits in scientific notation; `NaN` for missing values.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.9e}")
    }
}

fn round_sig(v: f64) -> Option<f64> {
    if v.is_finite() {
        format_float(v).parse().ok()
    } else {
        None
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    seed: u64,
    iteration: usize,
    hv: String,
    igd: String,
    igd_plus: String,
    fill_distance: String,
    feasible_ratio: String,
    wall_seconds: String,
    flags: String,
}

/// JSON shape: every key of the CSV header; missing values are `null`.
#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct JsonRecord {
    pub seed: u64,
    pub iteration: usize,
    pub hv: Option<f64>,
    pub igd: Option<f64>,
    pub igd_plus: Option<f64>,
    pub fill_distance: Option<f64>,
    pub feasible_ratio: Option<f64>,
    pub wall_seconds: Option<f64>,
    pub flags: Vec<String>,
}

fn join_flags(flags: &[String]) -> String {
    if flags.is_empty() {
        "-".into()
    } else {
        flags.join(";")
    }
}

pub fn to_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(CsvRow {
            seed: r.seed,
            iteration: r.iteration,
            hv: format_float(r.hv),
            igd: format_float(r.igd),
            igd_plus: format_float(r.igd_plus),
            fill_distance: format_float(r.fill_distance),
            feasible_ratio: format_float(r.feasible_ratio),
            wall_seconds: format_float(r.wall_seconds),
            flags: join_flags(&r.flags),
        })
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Runtime(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| HarnessError::Runtime(format!("records: {e}")))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(HarnessError::Runtime(format!("records: unexpected header {:?}", header)));
    }
    let num = |field: &str, s: &str| -> Result<f64> {
        s.parse().map_err(|e| HarnessError::Runtime(format!("records: {field} = '{s}': {e}")))
    };
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: CsvRow = row.map_err(|e| HarnessError::Runtime(format!("records: {e}")))?;
        out.push(RunRecord {
            seed: row.seed,
            iteration: row.iteration,
            hv: num("hv", &row.hv)?,
            igd: num("igd", &row.igd)?,
            igd_plus: num("igd_plus", &row.igd_plus)?,
            fill_distance: num("fill_distance", &row.fill_distance)?,
            feasible_ratio: num("feasible_ratio", &row.feasible_ratio)?,
            wall_seconds: num("wall_seconds", &row.wall_seconds)?,
            flags: if row.flags == "-" { vec![] } else { row.flags.split(';').map(String::from).collect() },
        });
    }
    Ok(out)
}

pub fn to_json(records: &[RunRecord]) -> Result<String> {
    let rows: Vec<JsonRecord> = records
        .iter()
        .map(|r| JsonRecord {
            seed: r.seed,
            iteration: r.iteration,
            hv: round_sig(r.hv),
            igd: round_sig(r.igd),
            igd_plus: round_sig(r.igd_plus),
            fill_distance: round_sig(r.fill_distance),
            feasible_ratio: round_sig(r.feasible_ratio),
            wall_seconds: round_sig(r.wall_seconds),
            flags: r.flags.clone(),
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `records` to `path` as CSV or JSON, chosen by the extension.
pub fn export(records: &[RunRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(HarnessError::Runtime("no records to export".into()));
    }
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => to_json(records)?,
        _ => to_csv(records)?,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_csv(&text)
}
