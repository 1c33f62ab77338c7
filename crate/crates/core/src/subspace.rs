//! Gender subspaces from stacked defining-pair difference vectors.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::GenderPair;
use crate::linalg::{self, canonical_sign, dot, norm, Matrix};
use crate::space::EmbeddingSpace;
use crate::warning::Warning;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Pairwise orthonormality tolerance for basis vectors.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-8;

/// Stacked difference vectors `vec(male) − vec(female)`, one row per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceMatrix {
    rows: Matrix,
    row_languages: Vec<String>,
    pairs: Vec<GenderPair>,
}

impl DifferenceMatrix {
    pub fn new(rows: Matrix, row_languages: Vec<String>) -> Result<Self> {
        if rows.rows() == 0 {
            return Err(Error::NoResolvablePairs);
        }
        if row_languages.len() != rows.rows() {
            return Err(Error::DimensionMismatch {
                expected: rows.rows(),
                found: row_languages.len(),
            });
        }
        if let Some(r) = (0..rows.rows()).find(|&r| norm(rows.row(r)) == 0.0) {
            return Err(Error::ZeroVector(alloc::format!("difference row {r}")));
        }
        Ok(DifferenceMatrix {
            rows,
            row_languages,
            pairs: Vec::new(),
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rows
    }

    pub fn row_languages(&self) -> &[String] {
        &self.row_languages
    }

    /// Pairs that produced each row (empty when built from raw rows).
    pub fn pairs(&self) -> &[GenderPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.rows.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.cols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Ppa,
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Method::Pca => "pca",
            Method::Ppa => "ppa",
        })
    }
}

/// Ordered orthonormal basis of a gender subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSubspace {
    pub method: Method,
    pub basis: Vec<Vec<f64>>,
    /// Explained-variance ratio (PCA) or excess kurtosis (PPA) per vector.
    pub scores: Vec<f64>,
    /// Language orientation per basis vector; empty until labeled.
    #[serde(default)]
    pub orientation_labels: Vec<String>,
}

impl BiasSubspace {
    /// Wraps an explicit basis, checking orthonormality.
    pub fn from_basis(method: Method, basis: Vec<Vec<f64>>, scores: Vec<f64>) -> Result<Self> {
        let s = BiasSubspace {
            method,
            basis,
            scores,
            orientation_labels: Vec::new(),
        };
        s.check()?;
        Ok(s)
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.first().map_or(0, Vec::len)
    }

    pub fn check(&self) -> Result<()> {
        if self.basis.is_empty() {
            return Err(Error::InvalidRank(0));
        }
        let d = self.dim();
        if let Some(b) = self.basis.iter().find(|b| b.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: b.len(),
            });
        }
        if self.scores.len() != self.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.len(),
                found: self.scores.len(),
            });
        }
        let dev = linalg::max_orthonormality_deviation(&self.basis);
        if dev > ORTHONORMAL_TOLERANCE {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(())
    }

    /// Subspace spanned by the first `k` vectors.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::RankDeficient {
                requested: k,
                max: self.k(),
            });
        }
        Ok(BiasSubspace {
            method: self.method,
            basis: self.basis[..k].to_vec(),
            scores: self.scores[..k].to_vec(),
            orientation_labels: self.orientation_labels.iter().take(k).cloned().collect(),
        })
    }
}

/// Builds `Q` from the pairs whose two words resolve in `space`.
///
/// Pairs with an out-of-vocabulary side, or with identical vectors, are
/// skipped with a warning.
pub fn difference_matrix(
    space: &EmbeddingSpace,
    pairs: &[GenderPair],
) -> Result<(DifferenceMatrix, Vec<Warning>)> {
    let d = space.dim();
    let mut data = Vec::new();
    let mut langs = Vec::new();
    let mut used = Vec::new();
    let mut warnings = Vec::new();
    for p in pairs {
        let male = space.resolve_vector(&p.language, &p.male);
        let female = space.resolve_vector(&p.language, &p.female);
        let (m, f) = match (male, female) {
            (Some(m), Some(f)) => (m, f),
            (m, _) => {
                let word = if m.is_none() { &p.male } else { &p.female };
                warnings.push(
                    Warning::OovSkipped {
                        context: alloc::format!("gender pair [{}]", p.language),
                        word: word.clone(),
                    }
                    .emit(),
                );
                continue;
            }
        };
        let delta: Vec<f64> = m.iter().zip(f).map(|(a, b)| a - b).collect();
        if delta.iter().all(|x| *x == 0.0) {
            warnings.push(
                Warning::ZeroDifference {
                    male: p.male.clone(),
                    female: p.female.clone(),
                }
                .emit(),
            );
            continue;
        }
        data.extend_from_slice(&delta);
        langs.push(p.language.clone());
        used.push(p.clone());
    }
    if used.is_empty() {
        return Err(Error::NoResolvablePairs);
    }
    let rows = Matrix::from_vec(used.len(), d, data)?;
    Ok((
        DifferenceMatrix {
            rows,
            row_languages: langs,
            pairs: used,
        },
        warnings,
    ))
}

pub(crate) fn centered(m: &Matrix) -> Matrix {
    let (n, d) = (m.rows(), m.cols());
    let mut mean = vec![0.0; d];
    for r in 0..n {
        linalg::axpy(1.0 / n as f64, m.row(r), &mut mean);
    }
    let mut out = m.clone();
    for r in 0..n {
        linalg::axpy(-1.0, &mean, out.row_mut(r));
    }
    out
}

/// Top-`k` right singular vectors of `Q` (optionally mean-centered).
///
/// Scores are squared singular values over their total. Each vector's first
/// non-negligible coordinate is made positive.
pub fn pca_basis(q: &DifferenceMatrix, k: usize, center: bool) -> Result<BiasSubspace> {
    pca_components(q.matrix(), k, center)
}

pub(crate) fn pca_components(m: &Matrix, k: usize, center: bool) -> Result<BiasSubspace> {
    if k == 0 {
        return Err(Error::InvalidRank(0));
    }
    let work = if center { centered(m) } else { m.clone() };
    let svd = linalg::svd(&work);
    let rank = svd.rank(RANK_TOLERANCE);
    if k > rank {
        return Err(Error::RankDeficient {
            requested: k,
            max: rank,
        });
    }
    let total: f64 = svd.s.iter().map(|s| s * s).sum();
    let mut basis = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);
    for c in 0..k {
        let mut v = svd.v.column(c);
        canonical_sign(&mut v);
        basis.push(v);
        scores.push(svd.s[c] * svd.s[c] / total);
    }
    Ok(BiasSubspace {
        method: Method::Pca,
        basis,
        scores,
        orientation_labels: Vec::new(),
    })
}

/// Number of components available from `Q` under `method`.
pub fn numerical_rank(q: &DifferenceMatrix, center: bool) -> usize {
    let work = if center {
        centered(q.matrix())
    } else {
        q.matrix().clone()
    };
    linalg::svd(&work).rank(RANK_TOLERANCE)
}

/// Ties in orientation are resolved by language order within this margin.
const ORIENTATION_TIE: f64 = 1e-12;

/// Labels each basis vector with the language whose mean difference vector
/// has the largest absolute cosine with it.
///
/// Languages are scanned in `languages` order; a later language must beat the
/// current best by more than a tiny margin to win.
pub fn language_orientation(
    subspace: &BiasSubspace,
    q: &DifferenceMatrix,
    languages: &[String],
) -> Result<(BiasSubspace, Vec<Warning>)> {
    if languages.is_empty() {
        return Err(Error::EmptySet("language list"));
    }
    if subspace.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: subspace.dim(),
            found: q.dim(),
        });
    }
    let d = q.dim();
    let mut means = Vec::with_capacity(languages.len());
    for lang in languages {
        let mut mean = vec![0.0; d];
        let mut count = 0usize;
        for (r, l) in q.row_languages().iter().enumerate() {
            if l == lang {
                linalg::axpy(1.0, q.matrix().row(r), &mut mean);
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::LanguageWithoutRows(lang.clone()));
        }
        linalg::scale(&mut mean, 1.0 / count as f64);
        means.push(mean);
    }

    let mut labels = Vec::with_capacity(subspace.k());
    let mut warnings = Vec::new();
    for (i, b) in subspace.basis.iter().enumerate() {
        let bn = norm(b);
        let mut best = 0usize;
        let mut best_cos = -1.0;
        for (li, mean) in means.iter().enumerate() {
            let mn = norm(mean);
            let c = if mn == 0.0 || bn == 0.0 {
                0.0
            } else {
                libm::fabs(dot(b, mean)) / (mn * bn)
            };
            if c > best_cos + ORIENTATION_TIE {
                best = li;
                best_cos = c;
            }
        }
        if best_cos <= ORIENTATION_TIE {
            warnings.push(
                Warning::OrientationTie {
                    index: i,
                    chosen: languages[best].clone(),
                }
                .emit(),
            );
        }
        labels.push(languages[best].clone());
    }
    let mut out = subspace.clone();
    out.orientation_labels = labels;
    Ok((out, warnings))
}

/// Picks the `k / L` best-ranked components oriented to each language.
///
/// The selection keeps pool order. The result is re-orthonormalized with
/// Gram–Schmidt in that order if it has drifted from orthonormality.
pub fn select_equal_rep(pool: &BiasSubspace, k: usize, languages: &[String]) -> Result<BiasSubspace> {
    let l = languages.len();
    if l == 0 {
        return Err(Error::EmptySet("language list"));
    }
    if k == 0 {
        return Err(Error::InvalidRank(0));
    }
    if !k.is_multiple_of(l) {
        return Err(Error::NotDivisible { k, languages: l });
    }
    if pool.orientation_labels.len() != pool.k() {
        return Err(Error::InvalidParameter(
            "candidate pool has no orientation labels".to_string(),
        ));
    }
    let per = k / l;
    let mut chosen = Vec::with_capacity(k);
    for lang in languages {
        let idx: Vec<usize> = pool
            .orientation_labels
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == lang)
            .map(|(i, _)| i)
            .take(per)
            .collect();
        if idx.len() < per {
            return Err(Error::InsufficientComponents {
                language: lang.clone(),
                needed: per,
                available: idx.len(),
            });
        }
        chosen.extend(idx);
    }
    chosen.sort_unstable();
    let mut basis: Vec<Vec<f64>> = chosen.iter().map(|&i| pool.basis[i].clone()).collect();
    if linalg::max_orthonormality_deviation(&basis) > ORTHONORMAL_TOLERANCE {
        basis = linalg::orthonormalize(&basis)?;
    }
    Ok(BiasSubspace {
        method: pool.method,
        basis,
        scores: chosen.iter().map(|&i| pool.scores[i]).collect(),
        orientation_labels: chosen
            .iter()
            .map(|&i| pool.orientation_labels[i].clone())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[&[f64]], langs: &[&str]) -> DifferenceMatrix {
        DifferenceMatrix::new(
            Matrix::from_rows(rows).unwrap(),
            langs.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn difference_of_he_she() {
        let s = EmbeddingSpace::from_rows("en", ["he", "she"], &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let (m, w) = difference_matrix(&s, &[GenderPair::new("he", "she", "en")]).unwrap();
        assert!(w.is_empty());
        assert_eq!(m.matrix().row(0), &[1.0, -1.0]);
        assert_eq!(m.row_languages(), &["en".to_string()]);
    }

    #[test]
    fn oov_pairs_skipped_then_error() {
        let s = EmbeddingSpace::from_rows("en", ["he", "she"], &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let pairs = [
            GenderPair::new("he", "she", "en"),
            GenderPair::new("king", "queen", "en"),
        ];
        let (m, w) = difference_matrix(&s, &pairs).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(w.len(), 1);
        assert_eq!(
            difference_matrix(&s, &pairs[1..]).unwrap_err(),
            Error::NoResolvablePairs
        );
    }

    #[test]
    fn pca_rank_one() {
        let m = q(&[&[2.0, 0.0, 0.0], &[2.0, 0.0, 0.0]], &["en", "en"]);
        let b = pca_basis(&m, 1, false).unwrap();
        assert_eq!(b.basis[0], vec![1.0, 0.0, 0.0]);
        assert_eq!(
            pca_basis(&m, 2, false).unwrap_err(),
            Error::RankDeficient {
                requested: 2,
                max: 1
            }
        );
    }

    #[test]
    fn pca_rank_error_reports_max() {
        let m = q(
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 1.0, 0.0]],
            &["en"; 3],
        );
        assert_eq!(
            pca_basis(&m, 3, false).unwrap_err(),
            Error::RankDeficient {
                requested: 3,
                max: 2
            }
        );
    }

    #[test]
    fn orientation_self_match_and_tie() {
        let m = q(
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 2.0, 0.0]],
            &["en", "hi", "hi"],
        );
        let langs = ["en".to_string(), "hi".to_string()];
        let sub = BiasSubspace::from_basis(
            Method::Pca,
            vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        let (labeled, w) = language_orientation(&sub, &m, &langs).unwrap();
        assert_eq!(labeled.orientation_labels, vec!["hi", "en"]);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn orientation_missing_language() {
        let m = q(&[&[1.0, 0.0]], &["en"]);
        let sub = BiasSubspace::from_basis(Method::Pca, vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        assert_eq!(
            language_orientation(&sub, &m, &["en".into(), "te".into()]).unwrap_err(),
            Error::LanguageWithoutRows("te".into())
        );
    }

    fn pool(labels: &[&str]) -> BiasSubspace {
        let n = labels.len();
        let basis = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        BiasSubspace {
            method: Method::Pca,
            basis,
            scores: (0..n).map(|i| 1.0 / (i + 1) as f64).collect(),
            orientation_labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn equal_rep_example() {
        let p = pool(&["be", "hi", "te", "hi", "en", "be", "te"]);
        let langs: Vec<String> = ["be", "hi", "te", "en"].iter().map(|s| s.to_string()).collect();
        let s = select_equal_rep(&p, 4, &langs).unwrap();
        // pool positions 1, 2, 3, 5 (one-based)
        let picked: Vec<usize> = s
            .basis
            .iter()
            .map(|b| b.iter().position(|x| *x == 1.0).unwrap())
            .collect();
        assert_eq!(picked, vec![0, 1, 2, 4]);
        assert_eq!(s.orientation_labels, vec!["be", "hi", "te", "en"]);
        assert_eq!(
            select_equal_rep(&p, 5, &langs).unwrap_err(),
            Error::NotDivisible { k: 5, languages: 4 }
        );
    }

    #[test]
    fn equal_rep_insufficient_names_language() {
        let p = pool(&["be", "hi", "te", "hi", "be", "te"]);
        let langs: Vec<String> = ["be", "hi", "te", "en"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            select_equal_rep(&p, 4, &langs).unwrap_err(),
            Error::InsufficientComponents {
                language: "en".into(),
                needed: 1,
                available: 0
            }
        );
    }
}
