//! Report computation, JSON schemas and aligned text tables.
//!
//! * cross-language scores: rows `b_<l1>`, columns `N_<l2>`;
//! * InBias: one row per language (plus `all` for several), one column per embedding;
//! * extrinsic bias: `l | Emb | M | F | |Diff| | f_i`, accuracies in percent.

use std::fmt::Write as _;

use debias_embed_core::extrinsic::{
    compare_runs, evaluate_gap, stratified_split, train_classifier, BioRecord, ExtrinsicResult,
    GapComparison, TrainConfig,
};
use debias_embed_core::lexicon::{GenderLexicon, PairSplit};
use debias_embed_core::metrics::{inbias, CrossScoreMatrix, InBiasResult, SeedSource};
use debias_embed_core::{EmbeddingSpace, Result as CoreResult, Warning};
use serde::{Deserialize, Serialize};

use crate::artifact::space_fingerprint;

/// Fraction of each (occupation, gender) stratum used for training.
pub const TRAIN_FRACTION: f64 = 0.8;

/// A header row plus body rows of pre-formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Columns padded to their widest cell; the first column is left-aligned,
    /// the others right-aligned.
    pub fn render(&self) -> String {
        let cols = self.header.len();
        let mut widths = vec![0usize; cols];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |row: &[String]| {
            let mut out = String::new();
            for (i, (cell, w)) in row.iter().zip(&widths).enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                let pad = w - cell.chars().count();
                if i == 0 {
                    out.push_str(cell);
                    out.extend(std::iter::repeat_n(' ', pad));
                } else {
                    out.extend(std::iter::repeat_n(' ', pad));
                    out.push_str(cell);
                }
            }
            out.truncate(out.trim_end().len());
            out
        };
        let mut out = line(&self.header);
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&rule.join("-+-"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let cell = |c: &String| {
            if c.contains([',', '"', '\n']) {
                format!("\"{}\"", c.replace('"', "\"\""))
            } else {
                c.clone()
            }
        };
        let mut out = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = row.iter().map(cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XscoreReport {
    pub label: String,
    pub embedding_sha256: String,
    pub matrix: CrossScoreMatrix,
    pub manifest: String,
}

pub fn xscore_table(m: &CrossScoreMatrix) -> Table {
    let mut header = vec!["Lang".to_string()];
    header.extend(m.languages.iter().map(|l| format!("N_{l}")));
    let rows = m
        .languages
        .iter()
        .zip(&m.values)
        .map(|(l, vals)| {
            let mut row = vec![format!("b_{l}")];
            row.extend(vals.iter().map(|v| format!("{v:.3}")));
            row
        })
        .collect();
    Table { header, rows }
}

/// Which words serve as the male and female seed sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeedMode {
    /// Male and female sides of the held-out test pairs.
    Test,
    /// The lexicon's static seed lists.
    Lexicon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InbiasEntry {
    pub language: String,
    pub result: InBiasResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InbiasColumn {
    pub label: String,
    pub embedding_sha256: String,
    pub per_language: Vec<InbiasEntry>,
    /// Pooled over every language; present with more than one language.
    pub all: Option<InBiasResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InbiasReport {
    pub languages: Vec<String>,
    pub seeds: SeedMode,
    pub train_pairs: usize,
    pub seed: u64,
    pub columns: Vec<InbiasColumn>,
    pub manifest: String,
}

/// InBias of every embedding for every language (and pooled).
pub fn compute_inbias(
    embeddings: &[(String, &EmbeddingSpace)],
    lexicon: &GenderLexicon,
    languages: &[String],
    mode: SeedMode,
    splits: &[PairSplit],
) -> CoreResult<(Vec<InbiasColumn>, Vec<Warning>)> {
    let source = match mode {
        SeedMode::Test => SeedSource::TestPairs(splits),
        SeedMode::Lexicon => SeedSource::Lexicon,
    };
    let mut warnings = Vec::new();
    let mut columns = Vec::with_capacity(embeddings.len());
    for (label, space) in embeddings {
        let mut per_language = Vec::with_capacity(languages.len());
        for lang in languages {
            let mut result = inbias(space, lexicon, std::slice::from_ref(lang), source)?;
            warnings.append(&mut result.warnings);
            per_language.push(InbiasEntry {
                language: lang.clone(),
                result,
            });
        }
        let all = if languages.len() > 1 {
            let mut r = inbias(space, lexicon, languages, source)?;
            r.warnings.clear();
            Some(r)
        } else {
            None
        };
        columns.push(InbiasColumn {
            label: label.clone(),
            embedding_sha256: space_fingerprint(space),
            per_language,
            all,
        });
    }
    Ok((columns, warnings))
}

pub fn inbias_table(columns: &[InbiasColumn]) -> Table {
    let mut header = vec!["lang".to_string()];
    header.extend(columns.iter().map(|c| c.label.clone()));
    let mut rows = Vec::new();
    if let Some(first) = columns.first() {
        for (i, entry) in first.per_language.iter().enumerate() {
            let mut row = vec![entry.language.clone()];
            row.extend(columns.iter().map(|c| format!("{:.3}", c.per_language[i].result.value)));
            rows.push(row);
        }
        if first.all.is_some() {
            let mut row = vec!["all".to_string()];
            row.extend(
                columns
                    .iter()
                    .map(|c| c.all.as_ref().map_or(String::new(), |a| format!("{:.3}", a.value))),
            );
            rows.push(row);
        }
    }
    Table { header, rows }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExbiasRow {
    pub label: String,
    pub embedding_sha256: Option<String>,
    pub result: ExtrinsicResult,
    /// Against the first row; absent for the first row itself.
    pub comparison: Option<GapComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExbiasReport {
    pub group: String,
    pub seed: u64,
    pub rows: Vec<ExbiasRow>,
    pub manifest: String,
}

/// Trains and evaluates one classifier per embedding on the same seeded
/// stratified split of `records`.
pub fn compute_exbias(
    embeddings: &[(String, &EmbeddingSpace)],
    records: &[BioRecord],
    config: &TrainConfig,
) -> CoreResult<(Vec<ExbiasRow>, Vec<Warning>)> {
    let (train, test) = stratified_split(records, TRAIN_FRACTION, config.seed);
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(embeddings.len());
    for (label, space) in embeddings {
        let trained = train_classifier(space, &train, config)?;
        warnings.extend(trained.warnings);
        let (result, w) = evaluate_gap(&trained.classifier, space, &test, config.seed)?;
        warnings.extend(w);
        rows.push(ExbiasRow {
            label: label.clone(),
            embedding_sha256: Some(space_fingerprint(space)),
            result,
            comparison: None,
        });
    }
    compare_rows(&mut rows)?;
    Ok((rows, warnings))
}

/// Fills `comparison` of every row after the first against the first.
pub fn compare_rows(rows: &mut [ExbiasRow]) -> CoreResult<()> {
    let Some((first, rest)) = rows.split_first_mut() else {
        return Ok(());
    };
    first.comparison = None;
    for row in rest {
        row.comparison = Some(compare_runs(&first.result, &row.result)?);
    }
    Ok(())
}

pub fn exbias_table(group: &str, rows: &[ExbiasRow]) -> Table {
    let header = ["l", "Emb", "M", "F", "|Diff|", "f_i"].map(String::from).to_vec();
    let pct = |x: f64| format!("{:.2}", 100.0 * x);
    let body = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                if i == 0 { group.to_string() } else { String::new() },
                r.label.clone(),
                pct(r.result.male_acc),
                pct(r.result.female_acc),
                pct(r.result.diff),
                r.comparison.as_ref().map_or(String::new(), |c| format!("{:.3}", c.f_i)),
            ]
        })
        .collect();
    Table { header, rows: body }
}
