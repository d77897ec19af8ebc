//! Summaries and TSV curve files derived from an evaluation report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use netsig_core::evaluation::{EvaluationReport, OverlapCurve};
use serde::Serialize;

use crate::error::Result;
use crate::io::{format_value, write_atomic};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeRow {
    pub size: usize,
    pub mean_balanced_accuracy: f64,
    pub sd_balanced_accuracy: f64,
    pub mean_connectivity: Option<f64>,
    pub genes_in_all_folds: usize,
    pub overlap_histogram: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub method: String,
    pub folds: usize,
    pub seed: u64,
    pub sizes: Vec<SizeRow>,
    pub all_paths_converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_dataset_overlap: Option<OverlapCurve>,
}

pub fn summarize(report: &EvaluationReport) -> ReportSummary {
    ReportSummary {
        method: report.method.to_string(),
        folds: report.folds.len(),
        seed: report.config.seed,
        sizes: report
            .summary
            .iter()
            .map(|s| SizeRow {
                size: s.size,
                mean_balanced_accuracy: s.mean_balanced_accuracy,
                sd_balanced_accuracy: s.sd_balanced_accuracy,
                mean_connectivity: s.mean_connectivity,
                genes_in_all_folds: s.overlap_histogram.last().copied().unwrap_or(0),
                overlap_histogram: s.overlap_histogram.clone(),
            })
            .collect(),
        all_paths_converged: report.folds.iter().all(|f| f.paths_converged),
        cross_dataset_overlap: report.cross_dataset_overlap.clone(),
    }
}

fn fold_header(out: &mut String, lead: &str, k: usize) {
    out.push_str(lead);
    for f in 1..=k {
        let _ = write!(out, "\tfold{f}");
    }
    out.push('\n');
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), format_value)
}

/// Balanced accuracy per size: mean, sd and one column per fold.
pub fn accuracy_tsv(report: &EvaluationReport) -> String {
    let mut out = String::new();
    fold_header(&mut out, "size\tmean\tsd", report.folds.len());
    for (s, row) in report.summary.iter().enumerate() {
        let _ = write!(
            out,
            "{}\t{}\t{}",
            row.size,
            format_value(row.mean_balanced_accuracy),
            format_value(row.sd_balanced_accuracy)
        );
        for fold in &report.folds {
            let _ = write!(out, "\t{}", format_value(fold.sizes[s].balanced_accuracy));
        }
        out.push('\n');
    }
    out
}

/// Connectivity score per size; `NA` without a network.
pub fn connectivity_tsv(report: &EvaluationReport) -> String {
    let mut out = String::new();
    fold_header(&mut out, "size\tmean", report.folds.len());
    for (s, row) in report.summary.iter().enumerate() {
        let _ = write!(out, "{}\t{}", row.size, opt(row.mean_connectivity));
        for fold in &report.folds {
            let _ = write!(out, "\t{}", opt(fold.sizes[s].connectivity));
        }
        out.push('\n');
    }
    out
}

/// Number of genes found in exactly `c` folds, for `c = 1..k`.
pub fn overlap_tsv(report: &EvaluationReport) -> String {
    let k = report.folds.len();
    let mut out = String::from("size");
    for c in 1..=k {
        let _ = write!(out, "\tin_{c}");
    }
    out.push('\n');
    for row in &report.summary {
        let _ = write!(out, "{}", row.size);
        for c in &row.overlap_histogram {
            let _ = write!(out, "\t{c}");
        }
        out.push('\n');
    }
    out
}

pub fn cross_overlap_tsv(curve: &OverlapCurve) -> String {
    let mut out = String::from("size\toverlap\n");
    for p in &curve.points {
        let _ = writeln!(out, "{}\t{}", p.size, p.overlap);
    }
    out
}

/// Writes the curve files into `dir` and returns their paths.
pub fn write_curves(report: &EvaluationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = vec![
        ("accuracy.tsv", accuracy_tsv(report)),
        ("connectivity.tsv", connectivity_tsv(report)),
        ("overlap.tsv", overlap_tsv(report)),
    ];
    if let Some(curve) = &report.cross_dataset_overlap {
        files.push(("cross_overlap.tsv", cross_overlap_tsv(curve)));
    }
    let mut written = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        write_atomic(&path, |w| w.write_all(text.as_bytes()))?;
        written.push(path);
    }
    Ok(written)
}
