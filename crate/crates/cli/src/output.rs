//! Result files: JSON documents and flat CSV tables, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use dab_core::Pmf;
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Default output directory when `--output` is not given.
pub const OUT_DIR_ENV: &str = "DAB_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

/// Where a command's result goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

impl Destination {
    /// `--output` wins; otherwise `$DAB_OUT_DIR/<command>.<ext>`; otherwise
    /// standard output.
    pub fn resolve(
        output: Option<&Path>,
        out_dir: Option<&Path>,
        command: &str,
        format: Format,
    ) -> Self {
        match (output, out_dir) {
            (Some(p), _) if p == Path::new("-") => Destination::Stdout,
            (Some(p), _) => Destination::File(p.to_path_buf()),
            (None, Some(dir)) => {
                Destination::File(dir.join(format!("{command}.{}", format.extension())))
            }
            (None, None) => Destination::Stdout,
        }
    }

    pub fn write(&self, bytes: &[u8]) -> CliResult<()> {
        match self {
            Destination::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io(Path::new("<stdout>"), e))
            }
            Destination::File(p) => write_atomic(p, bytes),
        }
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn to_json<S: Serialize>(value: &S) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("results serialize");
    v.push(b'\n');
    v
}

/// 17 significant digits; parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// CSV table with fixed leading columns followed by `loc_i,prob_i` pairs
/// (1-based) up to the widest PMF; shorter PMFs leave trailing cells
/// empty.
pub struct Table {
    columns: &'static [&'static str],
    rows: Vec<(Vec<String>, Option<Pmf>)>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<String>, pmf: Option<&Pmf>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push((cells, pmf.cloned()));
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let width = self
            .rows
            .iter()
            .filter_map(|(_, p)| p.as_ref().map(|p| p.cardinality()))
            .max()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.columns.iter().map(|c| c.to_string()).collect();
        for i in 1..=width {
            header.push(format!("loc_{i}"));
            header.push(format!("prob_{i}"));
        }
        let csv_err = |e: csv::Error| CliError::Io {
            path: "<csv>".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(&header).map_err(csv_err)?;
        for (cells, pmf) in &self.rows {
            let mut rec = cells.clone();
            let pairs: Vec<(f64, f64)> =
                pmf.as_ref().map(|p| p.iter().collect()).unwrap_or_default();
            for i in 0..width {
                match pairs.get(i) {
                    Some((x, p)) => {
                        rec.push(num(*x));
                        rec.push(num(*p));
                    }
                    None => {
                        rec.push(String::new());
                        rec.push(String::new());
                    }
                }
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io {
            path: "<csv>".into(),
            source: e.into_error(),
        })
    }
}

/// Reads `loc_i,prob_i` pairs back from a CSV row.
pub fn pmf_from_row(headers: &csv::StringRecord, row: &csv::StringRecord) -> Result<Pmf, String> {
    let mut locs = Vec::new();
    let mut probs = Vec::new();
    for i in 1.. {
        let (lk, pk) = (format!("loc_{i}"), format!("prob_{i}"));
        let (Some(li), Some(pi)) = (
            headers.iter().position(|h| h == lk),
            headers.iter().position(|h| h == pk),
        ) else {
            break;
        };
        let (l, p) = (row.get(li).unwrap_or(""), row.get(pi).unwrap_or(""));
        if l.is_empty() && p.is_empty() {
            break;
        }
        locs.push(l.parse::<f64>().map_err(|e| format!("{lk}: {e}"))?);
        probs.push(p.parse::<f64>().map_err(|e| format!("{pk}: {e}"))?);
    }
    Pmf::new(locs, probs).map_err(|e| e.to_string())
}
