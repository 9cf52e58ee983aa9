//! Tabular reports and their `table`, `csv` and `jsonl` renderings.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) so that reruns can
//! be compared byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn plain(&self) -> String {
        match self {
            Cell::Num(v) => fmt_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => fmt_float(*v),
            Cell::Num(_) | Cell::Empty => "null".to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => serde_json::to_string(s).expect("strings always serialize"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FindingKind {
    Info,
    /// An inequality failure that the theory predicts.
    Expected,
    /// A failed assertion; makes the run unsuccessful.
    Failure,
}

impl FindingKind {
    fn as_str(self) -> &'static str {
        match self {
            FindingKind::Info => "info",
            FindingKind::Expected => "expected",
            FindingKind::Failure => "failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub kind: FindingKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub findings: Vec<Finding>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            findings: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn info(&mut self, msg: impl Into<String>) {
        self.note(FindingKind::Info, msg);
    }

    pub fn expected(&mut self, msg: impl Into<String>) {
        self.note(FindingKind::Expected, msg);
    }

    pub fn fail(&mut self, msg: impl Into<String>) {
        self.note(FindingKind::Failure, msg);
    }

    fn note(&mut self, kind: FindingKind, msg: impl Into<String>) {
        self.findings.push(Finding {
            kind,
            message: msg.into(),
        });
    }

    /// No failed assertion.
    pub fn ok(&self) -> bool {
        self.findings.iter().all(|f| f.kind != FindingKind::Failure)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Jsonl,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Table => "table",
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (table, csv, jsonl)")),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header `command,<columns>`, then one line per row. Findings are not part of
/// the CSV body.
pub fn render_csv(r: &Report) -> String {
    let mut out = String::new();
    let header: Vec<String> = std::iter::once("command".to_string())
        .chain(r.columns.iter().cloned())
        .map(|c| csv_field(&c))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in &r.rows {
        let fields: Vec<String> = std::iter::once(csv_field(&r.command))
            .chain(row.iter().map(|c| csv_field(&c.plain())))
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// One JSON object per row, then a closing `{"record":"summary",...}` line.
pub fn render_jsonl(r: &Report) -> String {
    let mut out = String::new();
    let cmd = serde_json::to_string(&r.command).expect("strings always serialize");
    for row in &r.rows {
        let _ = write!(out, "{{\"record\":\"row\",\"command\":{cmd}");
        for (name, cell) in r.columns.iter().zip(row) {
            let key = serde_json::to_string(name).expect("strings always serialize");
            let _ = write!(out, ",{key}:{}", cell.json());
        }
        out.push_str("}\n");
    }
    let findings: Vec<String> = r
        .findings
        .iter()
        .map(|f| {
            format!(
                "{{\"kind\":\"{}\",\"message\":{}}}",
                f.kind.as_str(),
                serde_json::to_string(&f.message).expect("strings always serialize")
            )
        })
        .collect();
    let _ = writeln!(
        out,
        "{{\"record\":\"summary\",\"command\":{cmd},\"rows\":{},\"ok\":{},\"findings\":[{}]}}",
        r.rows.len(),
        r.ok(),
        findings.join(",")
    );
    out
}

pub fn render_table(r: &Report) -> String {
    let cells: Vec<Vec<String>> = r
        .rows
        .iter()
        .map(|row| row.iter().map(Cell::plain).collect())
        .collect();
    let widths: Vec<usize> = r
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            cells
                .iter()
                .map(|row| row[i].len())
                .chain(std::iter::once(c.len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "# {}", r.command);
    let line = |vals: &[String]| -> String {
        vals.iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    out.push_str(line(&r.columns).trim_end());
    out.push('\n');
    for row in &cells {
        out.push_str(line(row).trim_end());
        out.push('\n');
    }
    for f in &r.findings {
        let _ = writeln!(out, "[{}] {}", f.kind.as_str(), f.message);
    }
    let _ = writeln!(out, "status: {}", if r.ok() { "ok" } else { "FAILED" });
    out
}

pub fn render(r: &Report, format: Format) -> String {
    match format {
        Format::Table => render_table(r),
        Format::Csv => render_csv(r),
        Format::Jsonl => render_jsonl(r),
    }
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_report(r: &Report, format: Format, path: Option<&Path>) -> io::Result<()> {
    let text = render(r, format);
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())?;
            lock.flush()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("norm", &["method", "p", "N", "norm"]);
        r.push(vec!["eigen".into(), 2.0.into(), 3usize.into(), 1.25.into()]);
        r.info("note, with comma");
        r
    }

    #[test]
    fn float_digits() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_layout() {
        let s = render_csv(&sample());
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("command,method,p,N,norm"));
        assert_eq!(
            lines.next(),
            Some("norm,eigen,2.0000000000000000e0,3,1.2500000000000000e0")
        );
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn jsonl_parses() {
        let s = render_jsonl(&sample());
        let recs: Vec<serde_json::Value> = s
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0]["N"], 3);
        assert_eq!(recs[0]["norm"].as_f64(), Some(1.25));
        assert_eq!(recs[1]["ok"], true);
    }

    #[test]
    fn failure_flips_status() {
        let mut r = sample();
        assert!(r.ok());
        r.expected("predicted failure");
        assert!(r.ok());
        r.fail("broken");
        assert!(!r.ok());
        assert!(render_table(&r).ends_with("status: FAILED\n"));
    }
}
