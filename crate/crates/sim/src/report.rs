//! Study reports, trajectory files and certification summaries.

use std::fs::{self, File};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use adhesive_plate_core::stepper::{BalanceCheck, EnergyRecord, SystemState};
use serde::{Deserialize, Serialize};

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// One table row; `values` follows [`StudyReport::columns`], `None` where a
/// quantity is not defined for this row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub parameter: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

/// A pass/fail flag computed from the table, with the numbers behind it.
/// Informational flags do not enter [`StudyReport::passed`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub required: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: String,
    /// Name of the parameter that keys the rows.
    pub parameter: String,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub scalars: Vec<NamedValue>,
    pub checks: Vec<Check>,
}

impl StudyReport {
    pub fn new(study: &str, parameter: &str, columns: &[&str]) -> Self {
        StudyReport {
            study: study.into(),
            parameter: parameter.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            scalars: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn push_row(&mut self, parameter: f64, values: Vec<Option<f64>>) {
        assert_eq!(values.len(), self.columns.len(), "row width must match the columns");
        self.rows.push(ReportRow { parameter, values });
    }

    pub fn push_scalar(&mut self, name: &str, value: f64) {
        self.scalars.push(NamedValue { name: name.into(), value });
    }

    pub fn push_check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, required: true, detail: detail.into() });
    }

    pub fn push_note(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, required: false, detail: detail.into() });
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|s| s.name == name).map(|s| s.value)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.required)
    }

    /// The table as CSV; missing values are empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        let header = std::iter::once(self.parameter.as_str()).chain(self.columns.iter().map(String::as_str));
        w.write_record(header).map_err(csv_error)?;
        for row in &self.rows {
            let fields = std::iter::once(row.parameter.to_string())
                .chain(row.values.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(fields).map_err(csv_error)?;
        }
        w.flush().map_err(|e| SimError::Io("report".into(), e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers")
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        serde_json::from_str(text).map_err(|e| SimError::Format("report".into(), e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> SimError {
    SimError::Format("csv".into(), e.to_string())
}

fn create(path: &Path) -> Result<File, SimError> {
    File::create(path).map_err(|e| SimError::Io(path.display().to_string(), e))
}

fn write_text(path: &Path, text: &str) -> Result<(), SimError> {
    fs::write(path, text).map_err(|e| SimError::Io(path.display().to_string(), e))
}

/// Writes `<dir>/<study>.csv` or `<dir>/<study>.json`; the CSV form also
/// writes the checks next to it as `<study>_checks.json`.
pub fn emit_report(report: &StudyReport, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    fs::create_dir_all(dir).map_err(|e| SimError::Io(dir.display().to_string(), e))?;
    match format {
        OutputFormat::Json => {
            let path = dir.join(format!("{}.json", report.study));
            write_text(&path, &report.to_json())?;
            Ok(vec![path])
        }
        OutputFormat::Csv => {
            let path = dir.join(format!("{}.csv", report.study));
            report.write_csv(create(&path)?)?;
            let checks = dir.join(format!("{}_checks.json", report.study));
            let summary = serde_json::json!({ "scalars": report.scalars, "checks": report.checks });
            write_text(&checks, &serde_json::to_string_pretty(&summary).expect("finite summary"))?;
            Ok(vec![path, checks])
        }
    }
}

// ---------------------------------------------------------------------------
// Trajectory files

/// Header of the trajectory CSV.
pub const TRAJECTORY_COLUMNS: [&str; 9] =
    ["t", "K", "V_cum", "R_cum", "E_bulk", "E_surf", "E_total", "power_cum", "balance_residual"];

fn record_fields(r: &EnergyRecord) -> [f64; 9] {
    [r.t, r.kinetic, r.viscous_cum, r.rate_independent_cum, r.bulk, r.surface, r.total, r.power_cum, r.balance_residual]
}

pub fn write_trajectory_csv<W: Write>(records: &[EnergyRecord], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_COLUMNS).map_err(csv_error)?;
    for r in records {
        w.write_record(record_fields(r).iter().map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush().map_err(|e| SimError::Io("trajectory".into(), e))
}

pub fn read_trajectory_csv<R: Read>(input: R, source: &str) -> Result<Vec<EnergyRecord>, SimError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(csv_error)?;
    if header.iter().ne(TRAJECTORY_COLUMNS) {
        return Err(SimError::Format(
            source.into(),
            format!("expected columns {}", TRAJECTORY_COLUMNS.join(",")),
        ));
    }
    let mut records = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(csv_error)?;
        let mut v = [0.0; 9];
        for (k, field) in row.iter().enumerate() {
            v[k] = field
                .trim()
                .parse()
                .map_err(|_| SimError::Format(source.into(), format!("row {}: `{field}` is not a number", line + 1)))?;
        }
        records.push(EnergyRecord {
            t: v[0],
            kinetic: v[1],
            viscous_cum: v[2],
            rate_independent_cum: v[3],
            bulk: v[4],
            surface: v[5],
            total: v[6],
            power_cum: v[7],
            balance_residual: v[8],
        });
    }
    Ok(records)
}

pub fn read_trajectory_file(path: &Path) -> Result<Vec<EnergyRecord>, SimError> {
    let file = File::open(path).map_err(|e| SimError::Io(path.display().to_string(), e))?;
    read_trajectory_csv(io::BufReader::new(file), &path.display().to_string())
}

// ---------------------------------------------------------------------------
// Certification

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceSummary {
    pub one_sided: bool,
    pub tolerance: f64,
    pub energy_scale: f64,
    pub max_abs_residual: f64,
    pub max_excess: f64,
    pub passed: bool,
}

impl From<&BalanceCheck> for BalanceSummary {
    fn from(b: &BalanceCheck) -> Self {
        BalanceSummary {
            one_sided: b.one_sided,
            tolerance: b.tolerance,
            energy_scale: b.scale,
            max_abs_residual: b.max_abs,
            max_excess: b.max_excess,
            passed: b.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemistabilitySummary {
    pub audit_times: Vec<f64>,
    pub competitors: usize,
    pub min_margin: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub balance: BalanceSummary,
    /// Absent when certifying a trajectory file, which holds no states.
    pub semistability: Option<SemistabilitySummary>,
    pub adhesion_violations: Option<usize>,
    pub passed: bool,
}

impl Certification {
    pub fn new(
        balance: BalanceSummary,
        semistability: Option<SemistabilitySummary>,
        adhesion_violations: Option<usize>,
    ) -> Self {
        let passed = balance.passed
            && semistability.as_ref().is_none_or(|s| s.passed)
            && adhesion_violations.is_none_or(|v| v == 0);
        Certification { balance, semistability, adhesion_violations, passed }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certification holds finite numbers")
    }
}

/// Writes one checkpoint JSON per state as `checkpoint_<index>.json`.
pub fn write_checkpoints(states: &[(usize, &SystemState)], dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    states
        .iter()
        .map(|(index, state)| {
            let path = dir.join(format!("checkpoint_{index:05}.json"));
            write_text(&path, &serde_json::to_string(state).expect("states hold finite numbers"))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StudyReport {
        let mut r = StudyReport::new("demo", "eps", &["a", "b"]);
        r.push_row(1.0, vec![Some(0.1), None]);
        r.push_row(0.5, vec![Some(1.0 / 3.0), Some(-2e-17)]);
        r.push_scalar("s", 0.25);
        r.push_check("ok", true, "fine");
        r
    }

    #[test]
    fn empty_report_has_header_only_csv() {
        let r = StudyReport::new("demo", "nu", &["x", "y"]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "nu,x,y\n");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        assert_eq!(StudyReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn csv_leaves_missing_values_empty() {
        let mut buf = Vec::new();
        sample().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "eps,a,b");
        assert_eq!(lines[1], "1,0.1,");
    }

    #[test]
    fn trajectory_csv_round_trip() {
        let rec = EnergyRecord {
            t: 0.1,
            kinetic: 1.5,
            viscous_cum: 0.25,
            rate_independent_cum: 0.0,
            bulk: -0.3,
            surface: 0.125,
            total: -0.175,
            power_cum: 1e-9,
            balance_residual: -3.3e-7,
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&[rec, rec], &mut buf).unwrap();
        let back = read_trajectory_csv(buf.as_slice(), "mem").unwrap();
        assert_eq!(back, vec![rec, rec]);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let text = "t,K\n0,1\n";
        assert!(matches!(read_trajectory_csv(text.as_bytes(), "mem"), Err(SimError::Format(..))));
    }
}
