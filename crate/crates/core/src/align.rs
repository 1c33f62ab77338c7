//! Orthogonal Procrustes alignment of a source embedding into a target space.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, complete_basis, orthonormalize, Matrix};
use crate::space::{tagged_word, EmbeddingSpace, SpaceBuilder};
use crate::warning::Warning;

/// Separator between language tags of a merged space, e.g. `en+hi`.
pub const MERGED_TAG_SEPARATOR: char = '+';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilingualDictionary {
    pub source_tag: String,
    pub target_tag: String,
    entries: Vec<(String, String)>,
}

impl BilingualDictionary {
    /// Builds a dictionary, dropping repeated pairs. Returns the dropped pairs.
    pub fn new(
        source_tag: impl Into<String>,
        target_tag: impl Into<String>,
        entries: impl IntoIterator<Item = (String, String)>,
    ) -> Result<(Self, Vec<(String, String)>)> {
        let mut seen = BTreeSet::new();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for e in entries {
            if seen.insert(e.clone()) {
                kept.push(e);
            } else {
                dropped.push(e);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        Ok((
            BilingualDictionary {
                source_tag: source_tag.into(),
                target_tag: target_tag.into(),
                entries: kept,
            },
            dropped,
        ))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// An orthogonal `d × d` map applied to column vectors, `x ↦ W·x`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMap {
    pub matrix: Matrix,
    pub source_tag: String,
    pub target_tag: String,
    pub fit_pair_count: usize,
}

impl OrthogonalMap {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// The inverse map, `Wᵀ`.
    pub fn transpose(&self) -> OrthogonalMap {
        OrthogonalMap {
            matrix: self.matrix.transpose(),
            source_tag: self.target_tag.clone(),
            target_tag: self.source_tag.clone(),
            fit_pair_count: self.fit_pair_count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProcrustesFit {
    pub map: OrthogonalMap,
    /// Dictionary pairs skipped because a side is out of vocabulary.
    pub dropped: Vec<(String, String)>,
    pub warnings: Vec<Warning>,
}

fn find(space: &EmbeddingSpace, language: &str, word: &str) -> Option<usize> {
    space.resolve(language, word).or_else(|| space.index_of(word))
}

/// Fits `W` minimizing `Σ‖W·x_i − y_i‖²` over orthogonal matrices, where
/// `(x_i, y_i)` are the resolvable dictionary pairs.
///
/// With `M = Σ y_i x_iᵀ = U·Σ·Vᵀ` the minimizer is `W = U·Vᵀ`. Left singular
/// vectors of vanishing singular values are completed to an orthonormal basis,
/// so the result is orthogonal even for rank-deficient inputs.
pub fn procrustes_fit(
    source: &EmbeddingSpace,
    target: &EmbeddingSpace,
    dict: &BilingualDictionary,
) -> Result<ProcrustesFit> {
    let d = source.dim();
    if target.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: target.dim(),
        });
    }
    let mut cross = Matrix::zeros(d, d);
    let mut dropped = Vec::new();
    let mut used = 0usize;
    for (s, t) in dict.entries() {
        match (
            find(source, &dict.source_tag, s),
            find(target, &dict.target_tag, t),
        ) {
            (Some(i), Some(j)) => {
                let x = source.row(i);
                let y = target.row(j);
                for (r, &yr) in y.iter().enumerate() {
                    if yr != 0.0 {
                        linalg::axpy(yr, x, cross.row_mut(r));
                    }
                }
                used += 1;
            }
            _ => dropped.push((s.clone(), t.clone())),
        }
    }
    if used == 0 {
        return Err(Error::NoResolvablePairs);
    }
    let mut warnings = Vec::new();
    if used < d {
        warnings.push(Warning::FewAlignmentPairs { resolved: used, dim: d }.emit());
    }

    let svd = linalg::svd(&cross);
    let rank = svd.rank(1e-10);
    let lefts: Vec<Vec<f64>> = (0..rank).map(|c| svd.u.column(c)).collect();
    let lefts = match orthonormalize(&lefts) {
        Ok(l) => l,
        // numerically dependent columns: keep what is independent
        Err(_) => greedy_orthonormal(&lefts),
    };
    let u = complete_basis(lefts, d);
    let mut w = Matrix::zeros(d, d);
    for (c, ucol) in u.iter().enumerate() {
        let vcol = svd.v.column(c);
        for i in 0..d {
            if ucol[i] != 0.0 {
                linalg::axpy(ucol[i], &vcol, w.row_mut(i));
            }
        }
    }
    Ok(ProcrustesFit {
        map: OrthogonalMap {
            matrix: w,
            source_tag: dict.source_tag.clone(),
            target_tag: dict.target_tag.clone(),
            fit_pair_count: used,
        },
        dropped,
        warnings,
    })
}

fn greedy_orthonormal(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut candidate = out.clone();
        candidate.push(v.clone());
        if let Ok(o) = orthonormalize(&candidate) {
            out = o;
        }
    }
    out
}

/// Rotates every row of `space` by the map.
pub fn apply_map(map: &OrthogonalMap, space: &EmbeddingSpace) -> Result<EmbeddingSpace> {
    if map.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim(),
            found: space.dim(),
        });
    }
    let m = &map.matrix;
    let normalized = space.is_normalized();
    let mut out = space.map_rows(|_, x, y| {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = linalg::dot(m.row(r), x);
        }
    });
    // rotation preserves norms up to rounding
    out.set_normalized(normalized);
    Ok(out)
}

/// Languages carried by a space tag such as `en+hi`.
pub fn tag_languages(tag: &str) -> Vec<&str> {
    tag.split(MERGED_TAG_SEPARATOR).filter(|t| !t.is_empty()).collect()
}

/// Concatenates spaces into one common space with `lang:word` entries.
///
/// Monolingual inputs have their words prefixed with their language tag;
/// inputs that are already merged (tag contains `+`) are copied verbatim.
pub fn merge_spaces(spaces: &[&EmbeddingSpace]) -> Result<EmbeddingSpace> {
    let first = spaces.first().ok_or(Error::EmptySet("space list"))?;
    let d = first.dim();
    let mut tags: Vec<String> = Vec::new();
    let total = spaces.iter().map(|s| s.len()).sum();
    let mut builder = SpaceBuilder::new("", d).with_capacity(total);
    for s in spaces {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        let merged = s.language_tag().contains(MERGED_TAG_SEPARATOR);
        for l in tag_languages(s.language_tag()) {
            if !tags.iter().any(|t| t == l) {
                tags.push(l.to_string());
            }
        }
        for (w, row) in s.rows() {
            if merged {
                builder.push(w, row)?;
            } else {
                builder.push(tagged_word(s.language_tag(), w), row)?;
            }
        }
    }
    let mut out = builder.build()?;
    out.set_language_tag(tags.join(&MERGED_TAG_SEPARATOR.to_string()));
    out.set_normalized(spaces.iter().all(|s| s.is_normalized()));
    Ok(out)
}

/// Merge of an aligned source space and its target space.
pub fn merge_pair(aligned_source: &EmbeddingSpace, target: &EmbeddingSpace) -> Result<EmbeddingSpace> {
    merge_spaces(&[aligned_source, target])
}
