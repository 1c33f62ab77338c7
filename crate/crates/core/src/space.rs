//! In-memory word embedding spaces.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix};

/// Separator between language tag and word in merged multilingual spaces.
pub const LANGUAGE_SEPARATOR: char = ':';

/// Tolerance on row norms for a space flagged as normalized.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-9;

/// A vocabulary with one dense `d`-dimensional vector per word.
///
/// Immutable once built; every operation returns a new space.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    language_tag: String,
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    data: Vec<f64>,
    dim: usize,
    normalized: bool,
}

/// A single word and a copy of its vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVector {
    pub word: String,
    pub vector: Vec<f64>,
}

/// Order-preserving partition of a lookup request.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lookup {
    pub found: Vec<WordVector>,
    pub missing: Vec<String>,
}

/// Incremental construction of an [`EmbeddingSpace`], validating each row.
#[derive(Debug)]
pub struct SpaceBuilder {
    language_tag: String,
    dim: usize,
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    data: Vec<f64>,
}

impl SpaceBuilder {
    pub fn new(language_tag: impl Into<String>, dim: usize) -> Self {
        SpaceBuilder {
            language_tag: language_tag.into(),
            dim,
            words: Vec::new(),
            index: BTreeMap::new(),
            data: Vec::new(),
        }
    }

    pub fn with_capacity(mut self, rows: usize) -> Self {
        self.words.reserve(rows);
        self.data.reserve(rows * self.dim);
        self
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn push(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<()> {
        let word = word.into();
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        if vector.len() != self.dim {
            return Err(Error::RowArity {
                word,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(word));
        }
        if self.index.contains_key(&word) {
            return Err(Error::DuplicateWord(word));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn build(self) -> Result<EmbeddingSpace> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingSpace {
            language_tag: self.language_tag,
            words: self.words,
            index: self.index,
            data: self.data,
            dim: self.dim,
            normalized: false,
        })
    }
}

impl EmbeddingSpace {
    /// Builds a space from parallel word and row lists.
    pub fn from_rows<R: AsRef<[f64]>>(
        language_tag: impl Into<String>,
        words: impl IntoIterator<Item = impl Into<String>>,
        rows: &[R],
    ) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut builder = SpaceBuilder::new(language_tag, dim);
        let mut words = words.into_iter();
        for row in rows {
            let word = words.next().ok_or(Error::DimensionMismatch {
                expected: rows.len(),
                found: builder.len(),
            })?;
            builder.push(word, row.as_ref())?;
        }
        if words.next().is_some() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: rows.len() + 1,
            });
        }
        builder.build()
    }

    pub fn language_tag(&self) -> &str {
        &self.language_tag
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: usize) -> &str {
        &self.words[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.data.chunks_exact(self.dim))
    }

    /// Row-major matrix data.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    /// Finds the row for `word` of language `language`.
    ///
    /// The language-prefixed form `lang:word` is tried first (merged spaces);
    /// the bare form is accepted only when the space itself carries `language`.
    pub fn resolve(&self, language: &str, word: &str) -> Option<usize> {
        let prefixed = tagged_word(language, word);
        self.index_of(&prefixed).or_else(|| {
            if self.language_tag == language {
                self.index_of(word)
            } else {
                None
            }
        })
    }

    pub fn resolve_vector(&self, language: &str, word: &str) -> Option<&[f64]> {
        self.resolve(language, word).map(|i| self.row(i))
    }

    pub fn lookup<S: AsRef<str>>(&self, words: &[S]) -> Lookup {
        let mut out = Lookup::default();
        for w in words {
            let w = w.as_ref();
            match self.vector(w) {
                Some(v) => out.found.push(WordVector {
                    word: w.to_string(),
                    vector: v.to_vec(),
                }),
                None => out.missing.push(w.to_string()),
            }
        }
        out
    }

    /// Scales every row to unit Euclidean norm.
    ///
    /// Already-normalized spaces are returned unchanged, which makes the
    /// operation idempotent bit for bit.
    pub fn normalize(&self) -> Result<Self> {
        if self.normalized {
            return Ok(self.clone());
        }
        let mut data = self.data.clone();
        for (i, row) in data.chunks_exact_mut(self.dim).enumerate() {
            let n = norm(row);
            if n == 0.0 {
                return Err(Error::ZeroVector(self.words[i].clone()));
            }
            if n != 1.0 {
                row.iter_mut().for_each(|x| *x /= n);
            }
        }
        Ok(EmbeddingSpace {
            data,
            normalized: true,
            ..self.clone()
        })
    }

    /// Same vocabulary, new data. `normalized` is re-derived from the rows.
    pub(crate) fn with_data(&self, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        let normalized = data
            .chunks_exact(self.dim)
            .all(|r| libm::fabs(norm(r) - 1.0) <= UNIT_NORM_TOLERANCE);
        EmbeddingSpace {
            language_tag: self.language_tag.clone(),
            words: self.words.clone(),
            index: self.index.clone(),
            data,
            dim: self.dim,
            normalized,
        }
    }

    /// Same vocabulary with new row-major data of the same shape.
    pub fn replace_data(&self, data: Vec<f64>) -> Result<Self> {
        if data.len() != self.data.len() {
            return Err(Error::DimensionMismatch {
                expected: self.data.len(),
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(self.words[i / self.dim].clone()));
        }
        Ok(self.with_data(data))
    }

    /// Applies `f` to every row, producing a space with the same vocabulary.
    pub fn map_rows(&self, mut f: impl FnMut(&str, &[f64], &mut [f64])) -> Self {
        let mut data = self.data.clone();
        for (i, out) in data.chunks_exact_mut(self.dim).enumerate() {
            f(&self.words[i], &self.data[i * self.dim..(i + 1) * self.dim], out);
        }
        self.with_data(data)
    }

    /// Same rows under a different language tag.
    pub fn with_language_tag(&self, tag: impl Into<String>) -> Self {
        EmbeddingSpace {
            language_tag: tag.into(),
            ..self.clone()
        }
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(self.len(), self.dim, self.data.clone()).expect("consistent shape")
    }

    pub(crate) fn set_language_tag(&mut self, tag: String) {
        self.language_tag = tag;
    }

    pub(crate) fn set_normalized(&mut self, normalized: bool) {
        self.normalized = normalized;
    }
}

pub fn tagged_word(language: &str, word: &str) -> String {
    format!("{language}{LANGUAGE_SEPARATOR}{word}")
}

/// Splits `lang:word` into its language tag and surface form.
pub fn split_tagged(word: &str) -> Option<(&str, &str)> {
    word.split_once(LANGUAGE_SEPARATOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn space() -> EmbeddingSpace {
        EmbeddingSpace::from_rows("en", ["cat", "dog"], &[[3.0, 4.0], [1.0, 0.0]]).unwrap()
    }

    #[test]
    fn normalize_three_four_five() {
        let n = space().normalize().unwrap();
        assert!(n.is_normalized());
        assert!((n.row(0)[0] - 0.6).abs() < 1e-15);
        assert!((n.row(0)[1] - 0.8).abs() < 1e-15);
        assert_eq!(n.row(1), &[1.0, 0.0]);
    }

    #[test]
    fn normalize_zero_row_names_word() {
        let s = EmbeddingSpace::from_rows("en", ["a", "z"], &[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert_eq!(s.normalize().unwrap_err(), Error::ZeroVector("z".into()));
    }

    #[test]
    fn normalize_idempotent() {
        let once = space().normalize().unwrap();
        assert_eq!(once.normalize().unwrap(), once);
    }

    #[test]
    fn lookup_partitions_in_order() {
        let s = space();
        let l = s.lookup(&["cat", "zebra"]);
        assert_eq!(l.found.len(), 1);
        assert_eq!(l.found[0].word, "cat");
        assert_eq!(l.missing, vec!["zebra".to_string()]);
        let empty: [&str; 0] = [];
        assert_eq!(s.lookup(&empty), Lookup::default());
        assert_eq!(s.lookup(&["dog", "cat", "dog"]).found.len(), 3);
    }

    #[test]
    fn builder_rejects_bad_rows() {
        let mut b = SpaceBuilder::new("en", 3);
        b.push("cat", &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            b.push("cat", &[1.0, 0.0, 0.0]),
            Err(Error::DuplicateWord("cat".into()))
        );
        assert!(matches!(b.push("dog", &[1.0, 0.0]), Err(Error::RowArity { .. })));
        assert!(matches!(
            b.push("eel", &[f64::NAN, 0.0, 0.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn resolve_prefers_tagged_form() {
        let s = EmbeddingSpace::from_rows("en+hi", ["en:bank", "hi:bank"], &[[1.0], [2.0]]).unwrap();
        assert_eq!(s.resolve("hi", "bank"), Some(1));
        assert_eq!(s.resolve("te", "bank"), None);
        let mono = space();
        assert_eq!(mono.resolve("en", "dog"), Some(1));
        assert_eq!(mono.resolve("hi", "dog"), None);
    }
}
