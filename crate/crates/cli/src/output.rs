//! Output files. Each one starts with the artifact version, the command,
//! the seed and the resolved configuration.

use crate::{Config, Result};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Header<'a> {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a Config,
}

impl<'a> Header<'a> {
    pub fn new(command: &'a str, cfg: &'a Config) -> Self {
        Header { artifact: "kirchhoff", version: VERSION, command, seed: cfg.seed, config: cfg }
    }
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    header: Header<'a>,
    result: &'a T,
}

fn target(dir: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(dir.join(name))
}

/// Writes `{header, result}` as pretty JSON.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, command: &str, cfg: &Config, result: &T) -> Result<PathBuf> {
    let path = target(dir, name)?;
    let doc = Document { header: Header::new(command, cfg), result };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

/// Writes a CSV whose first line is a `#` comment holding the JSON header.
pub fn write_csv(dir: &Path, name: &str, command: &str, cfg: &Config, columns: &[String], rows: &[Vec<f64>]) -> Result<PathBuf> {
    let path = target(dir, name)?;
    let mut file = fs::File::create(&path)?;
    writeln!(file, "# {}", serde_json::to_string(&Header::new(command, cfg))?)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(columns)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(path)
}

/// Reads back a CSV written by [`write_csv`]: header line, column names, rows.
pub fn read_csv(path: &Path) -> Result<(String, Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let cols = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(
            rec.iter()
                .map(|s| s.parse::<f64>().map_err(|e| crate::CliError::new(crate::Failure::Io, format!("bad cell {s}: {e}"))))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok((first.trim_start_matches("# ").to_string(), cols, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_keeps_header() {
        let dir = std::env::temp_dir().join(format!("kirchhoff-out-{}", std::process::id()));
        let cfg = Config::default();
        let p = write_csv(&dir, "x.csv", "test", &cfg, &["t".into(), "y".into()], &[vec![0.0, 1.5], vec![0.1, -2.0]]).unwrap();
        let (h, cols, rows) = read_csv(&p).unwrap();
        let v: serde_json::Value = serde_json::from_str(&h).unwrap();
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["seed"], 0);
        assert!(v["config"].get("out").is_none());
        assert_eq!(cols, vec!["t", "y"]);
        assert_eq!(rows, vec![vec![0.0, 1.5], vec![0.1, -2.0]]);
        fs::remove_dir_all(dir).ok();
    }
}
