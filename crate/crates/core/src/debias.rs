//! Linear-projection debiasing: remove each word's component inside the
//! gender subspace, with the monolingual, pooled multilingual and
//! equal-representation subspace variants.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{GenderLexicon, GenderPair, PairSplit};
use crate::linalg::{axpy, dot, norm, scale};
use crate::pursuit::ppa_basis;
use crate::space::{tagged_word, EmbeddingSpace};
use crate::subspace::{
    difference_matrix, language_orientation, numerical_rank, pca_basis, select_equal_rep,
    BiasSubspace, Method,
};
use crate::warning::Warning;

/// Maximum allowed `|⟨w', b_j⟩|` after debiasing.
pub const PROJECTION_TOLERANCE: f64 = 1e-6;

/// Residuals shorter than this fraction of the input norm count as zero.
const ZERO_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Mono,
    Multi,
    Eqr,
}

impl core::fmt::Display for Variant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Variant::Mono => "mono",
            Variant::Multi => "multi",
            Variant::Eqr => "eqr",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    AllWords,
    NeutralOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebiasConfig {
    pub variant: Variant,
    pub k: usize,
    pub method: Method,
    pub scope: Scope,
    pub renormalize_after: bool,
    /// Mean-center `Q` before PCA.
    pub center: bool,
    pub seed: u64,
    /// Language whose pairs build the subspace for [`Variant::Mono`].
    pub language: Option<String>,
}

impl Default for DebiasConfig {
    fn default() -> Self {
        DebiasConfig {
            variant: Variant::Mono,
            k: 4,
            method: Method::Pca,
            scope: Scope::AllWords,
            renormalize_after: false,
            center: false,
            seed: 0,
            language: None,
        }
    }
}

/// `w_B = Σ_j ⟨w, b_j⟩ b_j`.
pub fn project_component(w: &[f64], subspace: &BiasSubspace) -> Result<Vec<f64>> {
    if w.len() != subspace.dim() {
        return Err(Error::DimensionMismatch {
            expected: subspace.dim(),
            found: w.len(),
        });
    }
    let mut out = vec![0.0; w.len()];
    for b in &subspace.basis {
        axpy(dot(w, b), b, &mut out);
    }
    Ok(out)
}

/// Removes the subspace component from `row` in place (two passes).
fn remove_component(row: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(row, b);
            axpy(-c, b, row);
        }
    }
}

/// Which rows of a space are debiased.
#[derive(Debug, Clone, Default)]
pub struct DebiasOptions {
    pub renormalize_after: bool,
    /// Restrict debiasing to these words; `None` means every word.
    pub only: Option<BTreeSet<String>>,
}

#[derive(Debug, Clone)]
pub struct Debiased {
    pub space: EmbeddingSpace,
    /// Words whose vector lay inside the subspace and became zero.
    pub zeroed: Vec<String>,
    /// Largest `|⟨w', b_j⟩|` over debiased words and basis vectors.
    pub max_residual_projection: f64,
    pub warnings: Vec<Warning>,
}

/// Debiases a single vector. The flag is set when the residual vanished.
pub fn debias_vector(w: &[f64], subspace: &BiasSubspace, renormalize: bool) -> (Vec<f64>, bool) {
    let original = norm(w);
    let mut out = w.to_vec();
    remove_component(&mut out, &subspace.basis);
    let n = norm(&out);
    if n <= ZERO_RESIDUAL * original {
        out.iter_mut().for_each(|x| *x = 0.0);
        return (out, true);
    }
    if renormalize {
        scale(&mut out, 1.0 / n);
        remove_component(&mut out, &subspace.basis);
        let n2 = norm(&out);
        scale(&mut out, 1.0 / n2);
    }
    (out, false)
}

/// `w' = w − w_B` for every in-scope word; out-of-scope rows are copied verbatim.
pub fn debias_space(
    space: &EmbeddingSpace,
    subspace: &BiasSubspace,
    options: &DebiasOptions,
) -> Result<Debiased> {
    subspace.check()?;
    if subspace.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: subspace.dim(),
            found: space.dim(),
        });
    }
    let mut zeroed = Vec::new();
    let mut worst: f64 = 0.0;
    let out = space.map_rows(|word, w, dst| {
        let in_scope = options.only.as_ref().is_none_or(|s| s.contains(word));
        if !in_scope {
            dst.copy_from_slice(w);
            return;
        }
        let (v, zero) = debias_vector(w, subspace, options.renormalize_after);
        if zero {
            zeroed.push(word.to_string());
        }
        for b in &subspace.basis {
            worst = worst.max(libm::fabs(dot(&v, b)));
        }
        dst.copy_from_slice(&v);
    });
    if worst >= PROJECTION_TOLERANCE {
        return Err(Error::ProjectionInvariant(worst));
    }
    let warnings = zeroed
        .iter()
        .map(|w| Warning::ZeroResidual { word: w.clone() }.emit())
        .collect();
    Ok(Debiased {
        space: out,
        zeroed,
        max_residual_projection: worst,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct VariantOutcome {
    pub space: EmbeddingSpace,
    pub subspace: BiasSubspace,
    /// Pairs that built the subspace (after out-of-vocabulary filtering).
    pub pairs_used: Vec<GenderPair>,
    pub zeroed: Vec<String>,
    pub warnings: Vec<Warning>,
}

/// Builds a subspace of `k` vectors from `pairs` with the configured method.
pub fn build_subspace(
    space: &EmbeddingSpace,
    pairs: &[GenderPair],
    k: usize,
    config: &DebiasConfig,
) -> Result<(BiasSubspace, Vec<GenderPair>, Vec<Warning>)> {
    let (q, warnings) = difference_matrix(space, pairs)?;
    let sub = match config.method {
        Method::Pca => pca_basis(&q, k, config.center)?,
        Method::Ppa => ppa_basis(&q, k, config.seed)?,
    };
    Ok((sub, q.pairs().to_vec(), warnings))
}

/// The subspace a variant debiases with, before it is applied.
#[derive(Debug, Clone)]
pub struct VariantPlan {
    pub subspace: BiasSubspace,
    pub pairs_used: Vec<GenderPair>,
    /// Words to debias; `None` means every word.
    pub only: Option<BTreeSet<String>>,
    pub warnings: Vec<Warning>,
}

/// Builds the LP_mono, LP_multi or LP_EQR subspace and the debiasing scope.
///
/// * `Mono` builds the subspace from the training pairs of `config.language`.
/// * `Multi` pools the training pairs of every split.
/// * `Eqr` pools them too, labels every available component by language
///   orientation and keeps the top `k / L` per language.
pub fn plan_variant(
    space: &EmbeddingSpace,
    lexicon: &GenderLexicon,
    config: &DebiasConfig,
    splits: &[PairSplit],
) -> Result<VariantPlan> {
    if config.k == 0 {
        return Err(Error::InvalidRank(0));
    }
    let languages: Vec<String> = splits.iter().map(|s| s.language.clone()).collect();
    let (subspace, pairs_used, warnings) = match config.variant {
        Variant::Mono => {
            let lang = config.language.as_ref().ok_or(Error::MissingMonoLanguage)?;
            let split = splits
                .iter()
                .find(|s| &s.language == lang)
                .ok_or_else(|| Error::UnknownLanguage(lang.clone()))?;
            build_subspace(space, &split.train, config.k, config)?
        }
        Variant::Multi => {
            let pooled: Vec<GenderPair> = splits.iter().flat_map(|s| s.train.clone()).collect();
            build_subspace(space, &pooled, config.k, config)?
        }
        Variant::Eqr => {
            if languages.is_empty() {
                return Err(Error::EmptySet("language list"));
            }
            if !config.k.is_multiple_of(languages.len()) {
                return Err(Error::NotDivisible {
                    k: config.k,
                    languages: languages.len(),
                });
            }
            let pooled: Vec<GenderPair> = splits.iter().flat_map(|s| s.train.clone()).collect();
            let (q, mut warnings) = difference_matrix(space, &pooled)?;
            let center = config.center || config.method == Method::Ppa;
            let pool_size = numerical_rank(&q, center);
            if pool_size < config.k {
                return Err(Error::RankDeficient {
                    requested: config.k,
                    max: pool_size,
                });
            }
            let pool = match config.method {
                Method::Pca => pca_basis(&q, pool_size, config.center)?,
                Method::Ppa => ppa_basis(&q, pool_size, config.seed)?,
            };
            let (labeled, w) = language_orientation(&pool, &q, &languages)?;
            warnings.extend(w);
            let selected = select_equal_rep(&labeled, config.k, &languages)?;
            (selected, q.pairs().to_vec(), warnings)
        }
    };
    let only = match config.scope {
        Scope::AllWords => None,
        Scope::NeutralOnly => Some(neutral_vocabulary(space, lexicon, &languages)),
    };
    Ok(VariantPlan {
        subspace,
        pairs_used,
        only,
        warnings,
    })
}

/// Runs LP_mono, LP_multi or LP_EQR end to end; see [`plan_variant`].
pub fn run_variant(
    space: &EmbeddingSpace,
    lexicon: &GenderLexicon,
    config: &DebiasConfig,
    splits: &[PairSplit],
) -> Result<VariantOutcome> {
    let plan = plan_variant(space, lexicon, config, splits)?;
    let mut warnings = plan.warnings;
    let debiased = debias_space(
        space,
        &plan.subspace,
        &DebiasOptions {
            renormalize_after: config.renormalize_after,
            only: plan.only,
        },
    )?;
    warnings.extend(debiased.warnings);
    Ok(VariantOutcome {
        space: debiased.space,
        subspace: plan.subspace,
        pairs_used: plan.pairs_used,
        zeroed: debiased.zeroed,
        warnings,
    })
}

/// Space entries (as stored) of the neutral words of `languages`.
pub fn neutral_vocabulary(
    space: &EmbeddingSpace,
    lexicon: &GenderLexicon,
    languages: &[String],
) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for lang in languages {
        if let Ok(lex) = lexicon.language(lang) {
            for w in lex.neutral.all() {
                let tagged = tagged_word(lang, w);
                if space.index_of(&tagged).is_some() {
                    out.insert(tagged);
                } else if space.resolve(lang, w).is_some() {
                    out.insert(w.to_string());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub(basis: Vec<Vec<f64>>) -> BiasSubspace {
        let n = basis.len();
        BiasSubspace::from_basis(Method::Pca, basis, vec![0.0; n]).unwrap()
    }

    #[test]
    fn projection_examples() {
        let b = sub(vec![vec![1.0, 0.0, 0.0]]);
        assert_eq!(project_component(&[1.0, 1.0, 0.0], &b).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(project_component(&[0.0, 2.0, 3.0], &b).unwrap(), vec![0.0, 0.0, 0.0]);
        let w = [0.7, 0.0, 0.0];
        let p = project_component(&w, &b).unwrap();
        assert!(p.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(matches!(
            project_component(&[1.0, 0.0], &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn debias_examples() {
        let s = EmbeddingSpace::from_rows("en", ["w", "g"], &[[0.6, 0.8], [0.0, 1.0]]).unwrap();
        let b = sub(vec![vec![0.0, 1.0]]);
        let out = debias_space(&s, &b, &DebiasOptions::default()).unwrap();
        assert_eq!(out.space.row(0), &[0.6, 0.0]);
        assert_eq!(out.space.row(1), &[0.0, 0.0]);
        assert_eq!(out.zeroed, vec!["g".to_string()]);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn scope_restricts_rows() {
        let s = EmbeddingSpace::from_rows("en", ["a", "b"], &[[0.6, 0.8], [0.8, 0.6]]).unwrap();
        let b = sub(vec![vec![0.0, 1.0]]);
        let only = Some(["a".to_string()].into_iter().collect());
        let out = debias_space(
            &s,
            &b,
            &DebiasOptions {
                renormalize_after: false,
                only,
            },
        )
        .unwrap();
        assert_eq!(out.space.row(1), s.row(1));
        assert_eq!(out.space.row(0), &[0.6, 0.0]);
    }

    #[test]
    fn non_orthonormal_rejected() {
        let s = EmbeddingSpace::from_rows("en", ["a"], &[[0.6, 0.8]]).unwrap();
        let bad = BiasSubspace {
            method: Method::Pca,
            basis: vec![vec![1.0, 0.1]],
            scores: vec![1.0],
            orientation_labels: Vec::new(),
        };
        assert!(matches!(
            debias_space(&s, &bad, &DebiasOptions::default()),
            Err(Error::NotOrthonormal(_))
        ));
    }
}
