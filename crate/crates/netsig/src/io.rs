//! Flat-text file formats.
//!
//! * Expression matrix: tab-separated. The header row holds a corner cell,
//!   the gene ids and a final `label` column; every other row holds a sample
//!   id, one value per gene and the raw label.
//! * Network: one edge per line, two whitespace-separated gene ids. Blank
//!   lines and lines starting with `#` are ignored.
//!
//! Values are written with 9 significant digits, so loading and saving a
//! file is byte-stable after the first save.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use netsig_core::model::{validate_dataset, ExpressionDataset, GeneNetwork};
use serde::Serialize;

use crate::error::{CliError, Result};

pub const LABEL_COLUMN: &str = "label";

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    fs::File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
}

pub fn load_expression(path: &Path) -> Result<ExpressionDataset> {
    read_expression(open(path)?, path)
}

/// Parses an expression table; `origin` only labels error messages.
pub fn read_expression<R: Read>(reader: R, origin: &Path) -> Result<ExpressionDataset> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line.map_err(|source| CliError::Io {
                    path: origin.to_path_buf(),
                    source,
                })?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(parse_err(origin, 1, "empty file")),
        }
    };
    let cells: Vec<&str> = header.split('\t').map(str::trim).collect();
    if cells.len() < 2 || cells[cells.len() - 1] != LABEL_COLUMN {
        return Err(parse_err(origin, 1, "no label column"));
    }
    let gene_ids: Vec<String> = cells[1..cells.len() - 1]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let width = cells.len();
    let mut sample_ids = Vec::new();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|source| CliError::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != width {
            return Err(parse_err(
                origin,
                lineno,
                format!("ragged row: {} fields, expected {width}", fields.len()),
            ));
        }
        let values = fields[1..width - 1]
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.parse::<f64>().map_err(|_| {
                    parse_err(
                        origin,
                        lineno,
                        format!("unparsable value `{s}` for gene {}", gene_ids[j]),
                    )
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        sample_ids.push(fields[0].to_string());
        rows.push(values);
        labels.push(fields[width - 1].to_string());
    }
    validate_dataset(sample_ids, gene_ids, &rows, &labels).map_err(|e| CliError::Data {
        path: origin.to_path_buf(),
        source: e,
    })
}

/// Shortest decimal that round-trips the value rounded to 9 significant
/// digits.
pub fn format_value(v: f64) -> String {
    let rounded: f64 = format!("{v:.8e}").parse().unwrap_or(v);
    let a = rounded.abs();
    if rounded != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

pub fn write_expression<W: Write>(dataset: &ExpressionDataset, mut out: W) -> std::io::Result<()> {
    write!(out, "sample")?;
    for g in dataset.gene_ids() {
        write!(out, "\t{g}")?;
    }
    writeln!(out, "\t{LABEL_COLUMN}")?;
    let x = dataset.values();
    for (i, s) in dataset.sample_ids().iter().enumerate() {
        write!(out, "{s}")?;
        for j in 0..x.ncols() {
            write!(out, "\t{}", format_value(x.get(i, j)))?;
        }
        writeln!(out, "\t{}", dataset.labels()[i])?;
    }
    Ok(())
}

pub fn load_network(path: &Path) -> Result<GeneNetwork> {
    read_network(open(path)?, path)
}

pub fn read_network<R: Read>(reader: R, origin: &Path) -> Result<GeneNetwork> {
    let mut net = GeneNetwork::default();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| CliError::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(
                origin,
                lineno,
                format!("bad edge line: expected 2 fields, found {}", fields.len()),
            ));
        }
        net.insert_edge(fields[0].to_string(), fields[1].to_string())
            .map_err(|e| parse_err(origin, lineno, e.to_string()))?;
    }
    Ok(net)
}

pub fn write_network<W: Write>(network: &GeneNetwork, mut out: W) -> std::io::Result<()> {
    for (a, b) in network.edges() {
        writeln!(out, "{a}\t{b}")?;
    }
    Ok(())
}

/// Writes through a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial file behind.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let mut tmp = PathBuf::from(path);
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    tmp.set_file_name(name);
    {
        let file = fs::File::create(&tmp).map_err(io_err)?;
        let mut w = std::io::BufWriter::new(file);
        fill(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    fs::rename(&tmp, path).map_err(io_err)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_reader(open(path)?).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}
