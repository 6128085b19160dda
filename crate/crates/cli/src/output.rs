//! CSV tables and JSON sidecar files.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const NA: &str = "NA";

/// Grid values with one column per method or order; `None` marks a flagged value.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityResult {
    pub x: Vec<f64>,
    pub columns: Vec<(String, Vec<Option<f64>>)>,
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => format!("{v:e}"),
        _ => NA.to_string(),
    }
}

fn parse_cell(s: &str, line: usize) -> Result<Option<f64>> {
    if s == NA {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| CliError::config("csv", format!("line {line}: '{s}' is not a number")))
}

impl DensityResult {
    pub fn header(&self) -> Vec<&str> {
        std::iter::once("x").chain(self.columns.iter().map(|(n, _)| n.as_str())).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.header())?;
        for (i, &x) in self.x.iter().enumerate() {
            let row = std::iter::once(cell(Some(x))).chain(self.columns.iter().map(|(_, c)| cell(c[i])));
            out.write_record(row)?;
        }
        out.flush().map_err(|e| CliError::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("x") {
            return Err(CliError::config("csv", "first column must be x"));
        }
        let mut result = Self {
            x: Vec::new(),
            columns: header[1..].iter().map(|h| (h.clone(), Vec::new())).collect(),
        };
        for (k, rec) in reader.records().enumerate() {
            let rec = rec?;
            let line = k + 2;
            let x = parse_cell(&rec[0], line)?
                .ok_or_else(|| CliError::config("csv", format!("line {line}: x is NA")))?;
            result.x.push(x);
            for (j, (_, col)) in result.columns.iter_mut().enumerate() {
                col.push(parse_cell(&rec[j + 1], line)?);
            }
        }
        Ok(result)
    }
}

/// Sidecar written next to every output file.
#[derive(Debug, Serialize)]
pub struct Metadata<'a, T: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    pub version: &'a str,
    pub created_unix: u64,
    pub model: String,
    pub summary: T,
    pub config: &'a RunConfig,
}

impl<'a, T: Serialize> Metadata<'a, T> {
    pub fn new(command: &'a str, model: String, summary: T, config: &'a RunConfig) -> Self {
        Self {
            schema: crate::config::SCHEMA,
            command,
            version: env!("CARGO_PKG_VERSION"),
            created_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            model,
            summary,
            config,
        }
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes `body` to `out`, or to stdout when no path is configured, and the
/// metadata sidecar next to `out`.
pub fn emit<T: Serialize>(out: Option<&Path>, body: &str, meta: &Metadata<'_, T>) -> Result<()> {
    match out {
        Some(path) => {
            write_file(path, body.as_bytes())?;
            let json = serde_json::to_string_pretty(meta)?;
            write_file(&sidecar_path(path), json.as_bytes())
        }
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}
