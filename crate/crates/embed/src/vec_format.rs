//! fastText-style `.vec` text embeddings: a `<count> <dim>` header, then one
//! `word v1 … vdim` line per word.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use debias_embed_core::align::MERGED_TAG_SEPARATOR;
use debias_embed_core::linalg::norm;
use debias_embed_core::space::split_tagged;
use debias_embed_core::{EmbeddingSpace, Error as CoreError, SpaceBuilder};

use crate::error::{Error, Result};

/// Precision at or above which values are written in shortest round-trip form.
pub const ROUND_TRIP_PRECISION: usize = 17;

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split([' ', '\t']).filter(|f| !f.is_empty())
}

/// Reads a `.vec` file. Vectors are kept as stored (not normalized).
pub fn load_vec(path: impl AsRef<Path>, language_tag: &str) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_vec(BufReader::new(file), path, language_tag)
}

/// Parses `.vec` content; `path` is only used in error messages.
pub fn read_vec(reader: impl BufRead, path: &Path, language_tag: &str) -> Result<EmbeddingSpace> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::parse(path, 1, "empty file, expected `<count> <dim>` header")),
    };
    let head: Vec<&str> = fields(header.trim_end_matches('\r')).collect();
    let (count, dim) = match head[..] {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(Error::parse(path, 1, format!("malformed header `{header}`"))),
        },
        _ => return Err(Error::parse(path, 1, format!("malformed header `{header}`"))),
    };

    let mut builder = SpaceBuilder::new(language_tag, dim).with_capacity(count);
    let mut values = Vec::with_capacity(dim);
    for (line_no, line) in (2..).zip(lines) {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut it = fields(line);
        let word = it.next().expect("non-blank line has a field");
        values.clear();
        for f in it {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("`{f}` is not a number")))?;
            values.push(v);
        }
        builder.push(word, &values).map_err(|e| {
            let message = match e {
                CoreError::RowArity { word, expected, found } => {
                    format!("`{word}` has {found} values, expected {expected}")
                }
                CoreError::DuplicateWord(w) => format!("duplicate word `{w}`"),
                CoreError::NonFinite(w) => format!("non-finite value for `{w}`"),
                e => e.to_string(),
            };
            Error::parse(path, line_no, message)
        })?;
    }
    if builder.len() != count {
        return Err(Error::parse(
            path,
            1,
            format!("header declares {count} words, file has {}", builder.len()),
        ));
    }
    if count == 0 {
        return Err(Error::parse(path, 1, "header declares an empty vocabulary"));
    }
    Ok(builder.build()?)
}

/// Language tag of a merged space whose words all carry a `lang:` prefix,
/// e.g. `en+hi` for `en:…` and `hi:…` entries, in order of first appearance.
pub fn infer_language_tag(space: &EmbeddingSpace) -> Option<String> {
    let mut tags: Vec<&str> = Vec::new();
    for word in space.words() {
        let (lang, rest) = split_tagged(word)?;
        let plausible = !rest.is_empty()
            && lang.len() <= 16
            && lang.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !plausible {
            return None;
        }
        if !tags.contains(&lang) {
            tags.push(lang);
        }
    }
    Some(tags.join(&MERGED_TAG_SEPARATOR.to_string()))
}

/// Loads a `.vec` file under `language_tag`, or under the tag inferred from
/// `lang:` word prefixes when none is given.
pub fn load_embedding(path: impl AsRef<Path>, language_tag: Option<&str>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    match language_tag {
        Some(tag) => load_vec(path, tag),
        None => {
            let space = load_vec(path, "")?;
            let tag = infer_language_tag(&space).ok_or_else(|| {
                Error::Usage(format!(
                    "{}: cannot infer the language; words lack `lang:` prefixes (pass --lang)",
                    path.display()
                ))
            })?;
            Ok(space.with_language_tag(tag))
        }
    }
}

/// Scales every non-zero row to unit length; zero rows stay zero.
pub fn normalize_lenient(space: &EmbeddingSpace) -> EmbeddingSpace {
    if space.is_normalized() {
        return space.clone();
    }
    space.map_rows(|_, w, dst| {
        let n = norm(w);
        if n == 0.0 || n == 1.0 {
            dst.copy_from_slice(w);
        } else {
            for (d, x) in dst.iter_mut().zip(w) {
                *d = x / n;
            }
        }
    })
}

/// Writes `space` as a `.vec` file.
///
/// With `precision >= 17` values use the shortest representation that parses
/// back to the same bits; otherwise `precision` fixed decimals.
pub fn save_vec(space: &EmbeddingSpace, path: impl AsRef<Path>, precision: usize) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_vec(space, &mut w, precision).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_vec(space: &EmbeddingSpace, w: &mut impl Write, precision: usize) -> std::io::Result<()> {
    writeln!(w, "{} {}", space.len(), space.dim())?;
    for (word, row) in space.rows() {
        w.write_all(word.as_bytes())?;
        for v in row {
            if precision >= ROUND_TRIP_PRECISION {
                write!(w, " {v}")?;
            } else {
                write!(w, " {v:.precision$}")?;
            }
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}
