//! Manifest-driven batch comparison.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{compare_files, AnalysisConfig};
use crate::distortion::pearson;
use crate::error::{Error, Result};
use crate::export::format_sig;

const ID_COLUMN: &str = "item_id";
const REF_COLUMN: &str = "ref_path";
const SUT_COLUMN: &str = "sut_path";

/// Default name of the subjective score column correlated against DLD.
pub const DEFAULT_SCORE_COLUMN: &str = "score";

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestItem {
    pub item_id: String,
    pub ref_path: PathBuf,
    pub sut_path: PathBuf,
    /// Values of the extra columns, in [`Manifest::score_columns`] order.
    pub scores: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub score_columns: Vec<String>,
    pub items: Vec<ManifestItem>,
}

impl Manifest {
    /// Parses manifest CSV text. Relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Manifest> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| Error::Manifest(e.to_string()))?
            .clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Manifest(format!("missing required column {name:?}")))
        };
        let (id_col, ref_col, sut_col) = (find(ID_COLUMN)?, find(REF_COLUMN)?, find(SUT_COLUMN)?);
        let extra: Vec<usize> = (0..headers.len())
            .filter(|i| ![id_col, ref_col, sut_col].contains(i))
            .collect();
        let score_columns = extra.iter().map(|&i| headers[i].to_string()).collect();

        let mut seen = HashSet::new();
        let mut items = Vec::new();
        for (n, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Manifest(e.to_string()))?;
            let field = |i: usize| record.get(i).unwrap_or("").to_string();
            let (item_id, ref_path, sut_path) = (field(id_col), field(ref_col), field(sut_col));
            if item_id.is_empty() || ref_path.is_empty() || sut_path.is_empty() {
                return Err(Error::Manifest(format!(
                    "row {}: empty item_id or path",
                    n + 1
                )));
            }
            if !seen.insert(item_id.clone()) {
                return Err(Error::Manifest(format!("duplicate item_id {item_id:?}")));
            }
            items.push(ManifestItem {
                item_id,
                ref_path: base.join(ref_path),
                sut_path: base.join(sut_path),
                scores: extra.iter().map(|&i| field(i)).collect(),
            });
        }
        Ok(Manifest {
            score_columns,
            items,
        })
    }

    pub fn from_path(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Manifest::parse(&text, path.parent().unwrap_or(Path::new("")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItemScore {
    pub dld: f64,
    pub frames: usize,
}

#[derive(Debug)]
pub struct BatchRow {
    pub item_id: String,
    pub scores: Vec<String>,
    pub outcome: std::result::Result<ItemScore, Error>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub items: usize,
    pub succeeded: usize,
    pub failed: usize,
    pub score_column: Option<String>,
    pub pearson_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pearson_note: Option<String>,
}

#[derive(Debug)]
pub struct BatchOutcome {
    pub score_columns: Vec<String>,
    pub rows: Vec<BatchRow>,
    pub summary: BatchSummary,
}

/// Compares every manifest item. Rows come back in manifest order.
///
/// With `strict`, the first failing item (in manifest order) aborts the
/// batch; otherwise failures are recorded per row.
pub fn run_batch(
    manifest: &Manifest,
    cfg: &AnalysisConfig,
    score_column: &str,
    strict: bool,
) -> Result<BatchOutcome> {
    cfg.validate()?;
    let outcomes: Vec<_> = manifest
        .items
        .par_iter()
        .map(|item| {
            compare_files(&item.ref_path, &item.sut_path, cfg, false).map(|c| ItemScore {
                dld: c.report.dld,
                frames: c.report.frames,
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(outcomes.len());
    for (item, outcome) in manifest.items.iter().zip(outcomes) {
        if strict {
            if let Err(e) = outcome {
                return Err(e);
            }
        }
        rows.push(BatchRow {
            item_id: item.item_id.clone(),
            scores: item.scores.clone(),
            outcome,
        });
    }

    let summary = summarize(&manifest.score_columns, &rows, score_column);
    Ok(BatchOutcome {
        score_columns: manifest.score_columns.clone(),
        rows,
        summary,
    })
}

fn summarize(score_columns: &[String], rows: &[BatchRow], score_column: &str) -> BatchSummary {
    let succeeded = rows.iter().filter(|r| r.outcome.is_ok()).count();
    let mut summary = BatchSummary {
        items: rows.len(),
        succeeded,
        failed: rows.len() - succeeded,
        score_column: None,
        pearson_r: None,
        pearson_note: None,
    };
    let Some(col) = score_columns.iter().position(|c| c == score_column) else {
        return summary;
    };
    summary.score_column = Some(score_column.to_string());
    let (mut dlds, mut scores) = (Vec::new(), Vec::new());
    for row in rows {
        if let (Ok(item), Ok(score)) = (&row.outcome, row.scores[col].parse::<f64>()) {
            dlds.push(item.dld);
            scores.push(score);
        }
    }
    match pearson(&dlds, &scores) {
        Ok(r) => summary.pearson_r = Some(r),
        Err(e) => summary.pearson_note = Some(e.to_string()),
    }
    summary
}

/// Writes one CSV row per item: id, dld, frames, echoed score columns, error.
pub fn write_batch_csv<W: Write>(out: W, outcome: &BatchOutcome) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Manifest(e.to_string());
    let mut header = vec!["item_id".to_string(), "dld".into(), "frames".into()];
    header.extend(outcome.score_columns.iter().cloned());
    header.push("error".into());
    w.write_record(&header).map_err(err)?;
    for row in &outcome.rows {
        let (dld, frames, error) = match &row.outcome {
            Ok(s) => (format_sig(s.dld), s.frames.to_string(), String::new()),
            Err(e) => (String::new(), String::new(), e.to_string()),
        };
        let mut record = vec![row.item_id.clone(), dld, frames];
        record.extend(row.scores.iter().cloned());
        record.push(error);
        w.write_record(&record).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Manifest(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_manifest() {
        let text = "item_id,ref_path,sut_path,score,odg\na,r.wav,s.wav,80,-1.2\nb,/abs/r.wav,s2.wav,40,-3\n";
        let m = Manifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.score_columns, vec!["score", "odg"]);
        assert_eq!(m.items.len(), 2);
        assert_eq!(m.items[0].ref_path, PathBuf::from("/data/r.wav"));
        assert_eq!(m.items[1].ref_path, PathBuf::from("/abs/r.wav"));
        assert_eq!(m.items[1].scores, vec!["40", "-3"]);
    }

    #[test]
    fn rejects_bad_manifests() {
        let base = Path::new(".");
        assert!(Manifest::parse("id,ref_path,sut_path\na,b,c\n", base).is_err());
        assert!(Manifest::parse("item_id,ref_path,sut_path\na,b,c\na,d,e\n", base).is_err());
        assert!(Manifest::parse("item_id,ref_path,sut_path\na,,c\n", base).is_err());
    }

    #[test]
    fn summary_correlation() {
        let rows: Vec<BatchRow> = [(0.1, "1"), (0.2, "2"), (0.4, "4")]
            .iter()
            .map(|(d, s)| BatchRow {
                item_id: s.to_string(),
                scores: vec![s.to_string()],
                outcome: Ok(ItemScore {
                    dld: *d,
                    frames: 10,
                }),
            })
            .collect();
        let s = summarize(&["score".into()], &rows, "score");
        assert!((s.pearson_r.unwrap() - 1.0).abs() < 1e-12);
        let none = summarize(&["other".into()], &rows, "score");
        assert_eq!(none.pearson_r, None);
        assert_eq!(none.score_column, None);
    }
}
