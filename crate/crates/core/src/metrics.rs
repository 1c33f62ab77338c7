//! Intrinsic bias measures: InBias and the cross-language debiasing score.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{GenderLexicon, PairSplit};
use crate::linalg::{dot, norm};
use crate::space::EmbeddingSpace;
use crate::subspace::{difference_matrix, pca_basis};
use crate::warning::Warning;

/// Default guard on `|⟨w, b⟩|` in the cross-language score denominator.
pub const DEFAULT_EPSILON: f64 = 1e-8;

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    (dot(a, b) / (norm(a) * norm(b))).clamp(-1.0, 1.0)
}

/// Mean cosine distance `(1/|Y|) Σ (1 − cos(x, y))`, in `[0, 2]`.
pub fn dis<Y: AsRef<[f64]>>(x: &[f64], ys: &[Y]) -> Result<f64> {
    if ys.is_empty() {
        return Err(Error::EmptySet("comparison set"));
    }
    if norm(x) == 0.0 {
        return Err(Error::ZeroVector("distance anchor".into()));
    }
    let mut acc = 0.0;
    for y in ys {
        let y = y.as_ref();
        if y.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if norm(y) == 0.0 {
            return Err(Error::ZeroVector("comparison vector".into()));
        }
        acc += 1.0 - cosine(x, y);
    }
    Ok(acc / ys.len() as f64)
}

/// Where the male and female seed words S_M, S_F come from.
#[derive(Debug, Clone, Copy)]
pub enum SeedSource<'a> {
    /// The lexicon's static seed lists.
    Lexicon,
    /// The male and female sides of each language's held-out test pairs.
    TestPairs(&'a [PairSplit]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationGap {
    pub language: String,
    pub masculine: String,
    pub feminine: String,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InBiasResult {
    pub value: f64,
    pub per_occupation: Vec<OccupationGap>,
    /// Occupation pairs `(language, masculine, feminine)` that could not be scored.
    pub skipped: Vec<(String, String, String)>,
    #[serde(skip)]
    pub warnings: Vec<Warning>,
}

fn seed_vectors<'s>(
    space: &'s EmbeddingSpace,
    language: &str,
    words: &[String],
    gender: &'static str,
    warnings: &mut Vec<Warning>,
) -> Result<Vec<&'s [f64]>> {
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        match space.resolve_vector(language, w) {
            Some(v) if norm(v) > 0.0 => out.push(v),
            _ => warnings.push(
                Warning::OovSkipped {
                    context: alloc::format!("{gender} seed [{language}]"),
                    word: w.clone(),
                }
                .emit(),
            ),
        }
    }
    if out.is_empty() {
        return Err(Error::EmptySeedSet {
            language: language.to_string(),
            gender,
        });
    }
    Ok(out)
}

/// `InBias = (1/N) Σ_i |dis(O_Mi, S_M) − dis(O_Fi, S_F)|` over the
/// resolvable occupation pairs of `languages`, each scored against the seed
/// sets of its own language.
pub fn inbias(
    space: &EmbeddingSpace,
    lexicon: &GenderLexicon,
    languages: &[String],
    seeds: SeedSource<'_>,
) -> Result<InBiasResult> {
    let mut per_occupation = Vec::new();
    let mut skipped = Vec::new();
    let mut warnings = Vec::new();
    for lang in languages {
        let lex = lexicon.language(lang)?;
        let (male_words, female_words): (Vec<String>, Vec<String>) = match seeds {
            SeedSource::Lexicon => (lex.seeds.male.clone(), lex.seeds.female.clone()),
            SeedSource::TestPairs(splits) => {
                let split = splits
                    .iter()
                    .find(|s| &s.language == lang)
                    .ok_or_else(|| Error::UnknownLanguage(lang.clone()))?;
                split
                    .test
                    .iter()
                    .map(|p| (p.male.clone(), p.female.clone()))
                    .unzip()
            }
        };
        let male = seed_vectors(space, lang, &male_words, "male", &mut warnings)?;
        let female = seed_vectors(space, lang, &female_words, "female", &mut warnings)?;
        for o in &lex.occupation_pairs {
            let m = space.resolve_vector(lang, &o.masculine).filter(|v| norm(v) > 0.0);
            let f = space.resolve_vector(lang, &o.feminine).filter(|v| norm(v) > 0.0);
            match (m, f) {
                (Some(m), Some(f)) => {
                    let gap = libm::fabs(dis(m, &male)? - dis(f, &female)?);
                    per_occupation.push(OccupationGap {
                        language: lang.clone(),
                        masculine: o.masculine.clone(),
                        feminine: o.feminine.clone(),
                        gap,
                    });
                }
                _ => skipped.push((lang.clone(), o.masculine.clone(), o.feminine.clone())),
            }
        }
    }
    if per_occupation.is_empty() {
        return Err(Error::NoResolvableOccupations);
    }
    let value = per_occupation.iter().map(|g| g.gap).sum::<f64>() / per_occupation.len() as f64;
    Ok(InBiasResult {
        value,
        per_occupation,
        skipped,
        warnings,
    })
}

/// Top-1 uncentered PCA direction of a language's defining pairs.
pub fn gender_direction(
    space: &EmbeddingSpace,
    lexicon: &GenderLexicon,
    language: &str,
) -> Result<Vec<f64>> {
    let lex = lexicon.language(language)?;
    let (q, _) = difference_matrix(space, &lex.pairs)?;
    let sub = pca_basis(&q, 1, false)?;
    Ok(sub.basis.into_iter().next().expect("k = 1"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossScore {
    pub value: f64,
    pub used: usize,
    pub guarded: usize,
    pub missing: usize,
}

/// Mean relative change of `|⟨w, b_target⟩|` over the target language's
/// neutral words after removing `b_source` from them.
///
/// `⟨w', b_t⟩` is evaluated as `⟨w, b_t⟩ − ⟨w, b_s⟩⟨b_s, b_t⟩`, which equals
/// projecting the debiased vector but avoids cancellation in `w − ⟨w, b_s⟩ b_s`.
pub fn cross_score_with_directions(
    space: &EmbeddingSpace,
    lexicon: &GenderLexicon,
    source_dir: &[f64],
    target: &str,
    target_dir: &[f64],
    epsilon: f64,
) -> Result<CrossScore> {
    let lex = lexicon.language(target)?;
    let coupling = dot(source_dir, target_dir);
    let (mut acc, mut used, mut guarded, mut missing) = (0.0, 0usize, 0usize, 0usize);
    for w in lex.neutral.all() {
        let Some(v) = space.resolve_vector(target, w) else {
            missing += 1;
            continue;
        };
        let before = dot(v, target_dir);
        if libm::fabs(before) < epsilon {
            guarded += 1;
            continue;
        }
        let after = before - dot(v, source_dir) * coupling;
        acc += libm::fabs(libm::fabs(after) - libm::fabs(before)) / libm::fabs(before);
        used += 1;
    }
    if used == 0 {
        return Err(Error::AllGuarded {
            source: String::new(),
            target: target.to_string(),
            epsilon,
        });
    }
    Ok(CrossScore {
        value: acc / used as f64,
        used,
        guarded,
        missing,
    })
}

/// `S_{l1,l2}`: how much of `l2`'s gender direction is removed from `l2`'s
/// neutral words by debiasing with `l1`'s direction. `S_{l,l} = 1`.
pub fn cross_score(
    space: &EmbeddingSpace,
    lexicon: &GenderLexicon,
    source: &str,
    target: &str,
    epsilon: f64,
) -> Result<CrossScore> {
    let bs = gender_direction(space, lexicon, source)?;
    let bt = if source == target {
        bs.clone()
    } else {
        gender_direction(space, lexicon, target)?
    };
    cross_score_with_directions(space, lexicon, &bs, target, &bt, epsilon)
        .map_err(|e| name_source(e, source))
}

fn name_source(e: Error, source: &str) -> Error {
    match e {
        Error::AllGuarded {
            target, epsilon, ..
        } => Error::AllGuarded {
            source: source.to_string(),
            target,
            epsilon,
        },
        e => e,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossScoreMatrix {
    pub languages: Vec<String>,
    /// `values[i][j] = S_{languages[i], languages[j]}`.
    pub values: Vec<Vec<f64>>,
    pub epsilon: f64,
    /// Guarded-out word count per cell.
    pub guarded: Vec<Vec<usize>>,
}

/// Every ordered pair of `languages`; failures are collected per cell.
pub fn cross_score_matrix(
    space: &EmbeddingSpace,
    lexicon: &GenderLexicon,
    languages: &[String],
    epsilon: f64,
) -> Result<(CrossScoreMatrix, Vec<Warning>)> {
    let mut directions = Vec::with_capacity(languages.len());
    for l in languages {
        directions.push(gender_direction(space, lexicon, l)?);
    }
    let n = languages.len();
    let mut values = alloc::vec![alloc::vec![0.0; n]; n];
    let mut guarded = alloc::vec![alloc::vec![0usize; n]; n];
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..n {
        for j in 0..n {
            match cross_score_with_directions(
                space,
                lexicon,
                &directions[i],
                &languages[j],
                &directions[j],
                epsilon,
            ) {
                Ok(s) => {
                    values[i][j] = s.value;
                    guarded[i][j] = s.guarded;
                    if s.guarded > 0 {
                        warnings.push(
                            Warning::GuardedWords {
                                source: languages[i].clone(),
                                target: languages[j].clone(),
                                count: s.guarded,
                            }
                            .emit(),
                        );
                    }
                }
                Err(e) => failures.push((
                    languages[i].clone(),
                    languages[j].clone(),
                    name_source(e, &languages[i]).to_string(),
                )),
            }
        }
    }
    if !failures.is_empty() {
        return Err(Error::CrossScoreCells(failures));
    }
    Ok((
        CrossScoreMatrix {
            languages: languages.to_vec(),
            values,
            epsilon,
            guarded,
        },
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dis_examples() {
        assert_eq!(dis(&[1.0, 0.0], &[[1.0, 0.0]]).unwrap(), 0.0);
        assert_eq!(dis(&[1.0, 0.0], &[[-1.0, 0.0]]).unwrap(), 2.0);
        assert!((dis(&[1.0, 0.0], &[[0.0, 1.0], [1.0, 0.0]]).unwrap() - 0.5).abs() < 1e-15);
        let empty: [[f64; 2]; 0] = [];
        assert!(dis(&[1.0, 0.0], &empty).is_err());
        assert!(dis(&[0.0, 0.0], &[[1.0, 0.0]]).is_err());
    }

    #[test]
    fn orthogonal_directions_give_zero_score() {
        use crate::lexicon::*;
        let lex = GenderLexicon::new(vec![(
            "hi".to_string(),
            LanguageLexicon {
                pairs: vec![],
                neutral: NeutralWords {
                    professions: vec!["w".into()],
                    ..Default::default()
                },
                seeds: SeedSets {
                    male: vec!["m".into()],
                    female: vec!["f".into()],
                },
                occupation_pairs: vec![],
            },
        )])
        .unwrap();
        let s = EmbeddingSpace::from_rows("hi", ["w"], &[[0.6, 0.8]]).unwrap();
        let score =
            cross_score_with_directions(&s, &lex, &[1.0, 0.0], "hi", &[0.0, 1.0], DEFAULT_EPSILON)
                .unwrap();
        assert_eq!(score.value, 0.0);
        let big = cross_score_with_directions(&s, &lex, &[1.0, 0.0], "hi", &[0.0, 1.0], 10.0);
        assert!(matches!(big, Err(Error::AllGuarded { .. })));
    }
}
