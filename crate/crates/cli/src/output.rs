//! Rendering reports as CSV or JSON and placing the files.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, Mode, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{RunReport, Table};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Comma-separated table with a header row, LF line endings and 17
/// significant digits per value.
pub fn render_csv(table: &Table) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(&table.columns).map_err(ser)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Serialize(e.to_string()))
}

/// Parses a table written by [`render_csv`].
pub fn parse_csv(name: &str, text: &str) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    let columns: Vec<String> = r.headers().map_err(ser)?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(ser)?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| CliError::Serialize(format!("{f:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table {
        name: name.to_string(),
        columns,
        rows,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

/// Files of one report under `stem` in `dir`: `stem.json`, or `stem.csv`
/// for a single table and `stem_<table>.csv` for several.
fn report_files(report: &RunReport, format: Format, dir: &Path, stem: &str) -> Result<Vec<(PathBuf, String)>> {
    match format {
        Format::Json => Ok(vec![(dir.join(format!("{stem}.json")), report.to_json()?)]),
        Format::Csv => {
            let tables = report.results.csv_tables();
            let single = tables.len() == 1;
            tables
                .iter()
                .map(|t| {
                    let name = if single {
                        format!("{stem}.csv")
                    } else {
                        format!("{stem}_{}.csv", t.name)
                    };
                    Ok((dir.join(name), render_csv(t)?))
                })
                .collect()
        }
    }
}

fn split_path(path: &Path) -> (PathBuf, String) {
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    (dir, stem)
}

/// Writes a single-mode report to its configured destination: the output
/// path, else `<out_dir>/<mode>.<ext>`, else `stdout`. Returns the files
/// written.
pub fn emit(report: &RunReport, out_dir: Option<&Path>, stdout: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let config = &report.config;
    if config.mode == Mode::Sweep {
        return emit_sweep(report, out_dir);
    }
    let format = config.output.format;
    let target = match (&config.output.path, out_dir) {
        (Some(p), _) => Some(split_path(p)),
        (None, Some(d)) => Some((d.to_path_buf(), config.mode.as_str().to_string())),
        (None, None) => None,
    };
    match target {
        Some((dir, stem)) => {
            let files = report_files(report, format, &dir, &stem)?;
            for (p, text) in &files {
                write_file(p, text)?;
            }
            Ok(files.into_iter().map(|(p, _)| p).collect())
        }
        None => {
            let text = match format {
                Format::Json => report.to_json()? + "\n",
                Format::Csv => report
                    .results
                    .csv_tables()
                    .iter()
                    .map(render_csv)
                    .collect::<Result<Vec<_>>>()?
                    .join("\n"),
            };
            let io = |source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            };
            stdout.write_all(text.as_bytes()).map_err(io)?;
            stdout.flush().map_err(io)?;
            Ok(Vec::new())
        }
    }
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    index: usize,
    value: f64,
    status: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    parameter: &'a str,
    mode: &'a str,
    points: Vec<ManifestEntry<'a>>,
    warnings: &'a [String],
    status: u8,
}

/// File stem of a sweep point, embedding the parameter value.
pub fn sweep_stem(mode: Mode, parameter: &str, value: f64) -> String {
    format!("{}_{parameter}_{value}", mode.as_str())
}

/// One file set per sweep point plus a manifest, in the output path (taken
/// as a directory), else `out_dir`, else the working directory.
fn emit_sweep(report: &RunReport, out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let config = &report.config;
    let sweep = config.sweep.as_ref().expect("sweep report carries its sweep section");
    let dir = config
        .output
        .path
        .clone()
        .or_else(|| out_dir.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for p in &report.results.sweep {
        let mut files = Vec::new();
        if let Some(r) = &p.report {
            let stem = sweep_stem(sweep.mode, sweep.parameter.as_str(), p.value);
            for (path, text) in report_files(r, config.output.format, &dir, &stem)? {
                write_file(&path, &text)?;
                files.push(path.file_name().unwrap().to_string_lossy().into_owned());
                written.push(path);
            }
        }
        entries.push(ManifestEntry {
            index: p.index,
            value: p.value,
            status: p.status,
            error: p.error.as_deref(),
            files,
        });
    }
    let manifest = Manifest {
        config,
        parameter: sweep.parameter.as_str(),
        mode: sweep.mode.as_str(),
        points: entries,
        warnings: &report.warnings,
        status: report.status,
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Serialize(e.to_string()))?;
    let path = dir.join(MANIFEST_NAME);
    write_file(&path, &text)?;
    written.push(path);
    Ok(written)
}
