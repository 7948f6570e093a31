//! Run reports and their serialization: CSV, JSON, and a plain-text table
//! with one row per instance and one column per algorithm.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::dp::SolveStats;
use crate::reduce::ReductionPolicy;

/// What a run produced. The optimum is present iff the run completed.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Outcome {
    Optimum(u64),
    Timeout,
    Infeasible,
    Failed(String),
}

impl Outcome {
    pub fn optimum(&self) -> Option<u64> {
        match self {
            Outcome::Optimum(w) => Some(*w),
            _ => None,
        }
    }
}

/// Everything one (instance, algorithm) run reports.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub instance: String,
    pub algorithm: ReductionPolicy,
    /// Width of the decomposition the run used; absent when the run never
    /// got that far (terminals in different components).
    pub width: Option<usize>,
    pub vertices: usize,
    pub edges: usize,
    pub terminals: usize,
    pub outcome: Outcome,
    /// Total wall time including the (shared) decomposition phases.
    pub wall_ms: u64,
    pub stats: SolveStats,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ReportFormat {
    Csv,
    Json,
    Table,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "table" | "table-text" | "text" => Ok(ReportFormat::Table),
            other => Err(format!("unknown report format `{other}`, expected csv|json|table")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportFormat::Csv => write!(f, "csv"),
            ReportFormat::Json => write!(f, "json"),
            ReportFormat::Table => write!(f, "table"),
        }
    }
}

/// CSV column names, in emission order. The trailing timing columns are the
/// ones byte-for-byte determinism checks must ignore.
pub const CSV_COLUMNS: [&str; 16] = [
    "instance",
    "algorithm",
    "width",
    "vertices",
    "edges",
    "terminals",
    "outcome",
    "optimum",
    "partial_solutions",
    "max_table_by_bag_size",
    "wall_ms",
    "decompose_ms",
    "nicify_ms",
    "dp_ms",
    "matrix_fill_ms",
    "elimination_ms",
];

/// Names of the CSV columns that hold wall-clock measurements.
pub const CSV_TIMING_COLUMNS: [&str; 6] = [
    "wall_ms",
    "decompose_ms",
    "nicify_ms",
    "dp_ms",
    "matrix_fill_ms",
    "elimination_ms",
];

fn csv_quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn outcome_cell(outcome: &Outcome) -> &'static str {
    match outcome {
        Outcome::Optimum(_) => "ok",
        Outcome::Timeout => "timeout",
        Outcome::Infeasible => "infeasible",
        Outcome::Failed(_) => "failed",
    }
}

fn table_sizes_cell(sizes: &BTreeMap<usize, u64>) -> String {
    sizes
        .iter()
        .map(|(k, v)| format!("{k}:{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn ms(d: Duration) -> u64 {
    d.as_millis() as u64
}

/// Serializes reports in the chosen format. CSV and the plain table have a
/// fixed documented layout; JSON round-trips through [`parse_reports_json`]
/// without loss.
pub fn emit_report(reports: &[RunReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(reports).expect("reports serialize")
        }
        ReportFormat::Csv => {
            let mut out = CSV_COLUMNS.join(",");
            out.push('\n');
            for r in reports {
                let row = [
                    csv_quote(&r.instance),
                    r.algorithm.to_string(),
                    r.width.map(|w| w.to_string()).unwrap_or_default(),
                    r.vertices.to_string(),
                    r.edges.to_string(),
                    r.terminals.to_string(),
                    outcome_cell(&r.outcome).to_string(),
                    r.outcome.optimum().map(|w| w.to_string()).unwrap_or_default(),
                    r.stats.partial_solutions_generated.to_string(),
                    table_sizes_cell(&r.stats.max_table_size_by_bag_size),
                    r.wall_ms.to_string(),
                    ms(r.stats.decompose_time).to_string(),
                    ms(r.stats.nicify_time).to_string(),
                    ms(r.stats.dp_time).to_string(),
                    ms(r.stats.matrix_fill_time).to_string(),
                    ms(r.stats.elimination_time).to_string(),
                ];
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        ReportFormat::Table => emit_table(reports),
    }
}

pub fn parse_reports_json(text: &str) -> Result<Vec<RunReport>, serde_json::Error> {
    serde_json::from_str(text)
}

/// One row per instance: name, width, sizes, then per-algorithm wall times
/// with `*` marking timeouts, and the optimum last.
fn emit_table(reports: &[RunReport]) -> String {
    let mut algorithms: Vec<ReductionPolicy> = Vec::new();
    let mut instances: Vec<&str> = Vec::new();
    for r in reports {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm);
        }
        if !instances.contains(&r.instance.as_str()) {
            instances.push(&r.instance);
        }
    }
    let mut header: Vec<String> = ["instance", "tw", "|V|", "|E|", "|K|"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for a in &algorithms {
        header.push(format!("{a} ms"));
    }
    header.push("optimum".to_string());
    let mut rows: Vec<Vec<String>> = vec![header];
    for name in instances {
        let of_instance: Vec<&RunReport> =
            reports.iter().filter(|r| r.instance == name).collect();
        let first = of_instance[0];
        let mut row = vec![
            name.to_string(),
            first.width.map(|w| w.to_string()).unwrap_or_else(|| "-".into()),
            first.vertices.to_string(),
            first.edges.to_string(),
            first.terminals.to_string(),
        ];
        for a in &algorithms {
            let cell = match of_instance.iter().find(|r| r.algorithm == *a) {
                Some(r) => match &r.outcome {
                    Outcome::Optimum(_) => r.wall_ms.to_string(),
                    Outcome::Timeout => "*".to_string(),
                    Outcome::Infeasible => "inf".to_string(),
                    Outcome::Failed(_) => "!".to_string(),
                },
                None => String::new(),
            };
            row.push(cell);
        }
        let optimum = of_instance
            .iter()
            .find_map(|r| r.outcome.optimum().map(|w| w.to_string()))
            .unwrap_or_else(|| {
                if of_instance.iter().any(|r| r.outcome == Outcome::Infeasible) {
                    "infeasible".to_string()
                } else {
                    "-".to_string()
                }
            });
        row.push(optimum);
        rows.push(row);
    }
    render_columns(&rows)
}

fn render_columns(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(&format!("{:<width$}", cell, width = widths[i]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_reports() -> Vec<RunReport> {
        let mut stats = SolveStats {
            partial_solutions_generated: 42,
            ..SolveStats::default()
        };
        stats.record_table(3, 15);
        stats.record_table(1, 2);
        vec![
            RunReport {
                instance: "tiny".into(),
                algorithm: ReductionPolicy::Classic,
                width: Some(2),
                vertices: 3,
                edges: 2,
                terminals: 2,
                outcome: Outcome::Optimum(5),
                wall_ms: 1,
                stats: stats.clone(),
            },
            RunReport {
                instance: "tiny".into(),
                algorithm: ReductionPolicy::ReduceWhenLarge,
                width: Some(2),
                vertices: 3,
                edges: 2,
                terminals: 2,
                outcome: Outcome::Timeout,
                wall_ms: 9,
                stats,
            },
        ]
    }

    #[test]
    fn json_round_trips() {
        let reports = sample_reports();
        let text = emit_report(&reports, ReportFormat::Json);
        assert_eq!(parse_reports_json(&text).unwrap(), reports);
    }

    #[test]
    fn csv_has_one_row_per_report() {
        let reports = sample_reports();
        let text = emit_report(&reports, ReportFormat::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + reports.len());
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert!(lines[1].starts_with("tiny,cdp,2,3,2,2,ok,5,42,1:2;3:15,"));
        assert!(lines[2].contains(",timeout,,"));
    }

    #[test]
    fn table_mirrors_the_benchmark_layout() {
        let reports = sample_reports();
        let text = emit_report(&reports, ReportFormat::Table);
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(
            header.starts_with("instance  tw  |V|  |E|  |K|  cdp ms  rbc ms"),
            "{header}"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("tiny"));
        assert!(row.contains('*'), "timeouts are starred: {row}");
    }

    #[test]
    fn csv_quoting_handles_commas() {
        assert_eq!(csv_quote("a,b"), "\"a,b\"");
        assert_eq!(csv_quote("plain"), "plain");
    }
}
