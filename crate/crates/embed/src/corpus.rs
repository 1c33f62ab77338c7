//! Bios corpus TSV: `gender<TAB>occupation<TAB>token token …`, gender `M` or `F`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use debias_embed_core::extrinsic::{filter_min_count, BioRecord, Gender};
use log::warn;

use crate::error::{Error, Result};

/// Records plus the `(occupation, count)` pairs dropped for being too rare.
pub type Loaded = (Vec<BioRecord>, Vec<(String, usize)>);

pub fn load_corpus(
    path: impl AsRef<Path>,
    min_count: usize,
) -> Result<Loaded> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, path, min_count)
}

pub fn parse_corpus(
    text: &str,
    path: &Path,
    min_count: usize,
) -> Result<Loaded> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (g, occ, body) = (parts.next(), parts.next(), parts.next());
        let gender = g
            .and_then(Gender::parse)
            .ok_or_else(|| Error::parse(path, i + 1, format!("unknown gender `{}`", g.unwrap_or(""))))?;
        let occupation = occ
            .filter(|o| !o.trim().is_empty())
            .ok_or_else(|| Error::parse(path, i + 1, "missing occupation"))?
            .trim()
            .to_string();
        let tokens: Vec<String> = body
            .unwrap_or("")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        if tokens.is_empty() {
            return Err(Error::parse(path, i + 1, "empty text"));
        }
        records.push(BioRecord {
            gender,
            occupation,
            tokens,
        });
    }
    if records.is_empty() {
        return Err(Error::format(path, "corpus has no records"));
    }
    let (kept, dropped) = filter_min_count(records, min_count);
    for (occ, n) in &dropped {
        warn!("occupation `{occ}` has {n} records (< {min_count}); dropped");
    }
    Ok((kept, dropped))
}

pub fn save_corpus(records: &[BioRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    for r in records {
        writeln!(w, "{}\t{}\t{}", r.gender.as_str(), r.occupation, r.tokens.join(" ")).map_err(io)?;
    }
    w.flush().map_err(io)
}
