//! Extrinsic bias: occupation classification from bios with frozen
//! embeddings, scored by the per-occupation accuracy gap between genders.
//!
//! The classifier is a multinomial logistic regression over the mean of a
//! bio's token vectors, trained by full-batch gradient descent.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Matrix};
use crate::space::EmbeddingSpace;
use crate::warning::Warning;

/// Occupations with fewer records are dropped by [`filter_min_count`].
pub const DEFAULT_MIN_COUNT: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    M,
    F,
}

impl Gender {
    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "M" => Some(Gender::M),
            "F" => Some(Gender::F),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::M => "M",
            Gender::F => "F",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioRecord {
    pub gender: Gender,
    pub occupation: String,
    pub tokens: Vec<String>,
}

/// Drops occupations with fewer than `min_count` records.
///
/// Returns the kept records and the dropped `(occupation, count)` pairs.
pub fn filter_min_count(
    records: Vec<BioRecord>,
    min_count: usize,
) -> (Vec<BioRecord>, Vec<(String, usize)>) {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        *counts.entry(r.occupation.as_str()).or_default() += 1;
    }
    let dropped: Vec<(String, usize)> = counts
        .iter()
        .filter(|(_, &c)| c < min_count)
        .map(|(o, &c)| (o.to_string(), c))
        .collect();
    let small: BTreeSet<String> = dropped.iter().map(|(o, _)| o.clone()).collect();
    let kept = records
        .into_iter()
        .filter(|r| !small.contains(&r.occupation))
        .collect();
    (kept, dropped)
}

/// Seeded 80/20-style split, stratified by (occupation, gender).
///
/// Each stratum is shuffled and its first `round(train_fraction · n)` records
/// go to training. Output keeps the input order within each side.
pub fn stratified_split(
    records: &[BioRecord],
    train_fraction: f64,
    seed: u64,
) -> (Vec<BioRecord>, Vec<BioRecord>) {
    let mut strata: BTreeMap<(&str, Gender), Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        strata.entry((r.occupation.as_str(), r.gender)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_train = vec![false; records.len()];
    for idx in strata.values_mut() {
        idx.shuffle(&mut rng);
        let take = libm::round(train_fraction * idx.len() as f64) as usize;
        for &i in idx.iter().take(take) {
            is_train[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (r, t) in records.iter().zip(is_train) {
        if t {
            train.push(r.clone());
        } else {
            test.push(r.clone());
        }
    }
    (train, test)
}

/// Parameters of a synthetic bios corpus.
///
/// Each record has `tokens_per_record` slots. A slot holds one of the
/// author's gender words with probability `rho / 2`; otherwise it holds an
/// occupation-indicative word, taken from a random occupation's group with
/// probability `occupation_noise` and from the record's own group otherwise.
/// With `rho = 0` male and female bios are identically distributed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub occupations: usize,
    pub records: usize,
    pub rho: f64,
    pub tokens_per_record: usize,
    pub words_per_occupation: usize,
    pub occupation_noise: f64,
    pub male_words: Vec<String>,
    pub female_words: Vec<String>,
    /// Explicit word groups per occupation; drawn from the vocabulary in
    /// order (skipping gender words) when `None`.
    #[serde(default)]
    pub occupation_words: Option<Vec<Vec<String>>>,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            occupations: 4,
            records: 2000,
            rho: 1.0,
            tokens_per_record: 12,
            words_per_occupation: 4,
            occupation_noise: 0.5,
            male_words: Vec::new(),
            female_words: Vec::new(),
            occupation_words: None,
        }
    }
}

pub fn occupation_label(i: usize) -> String {
    format!("occupation{i:02}")
}

/// Generates a deterministic corpus with gender words mixed into bios at rate `rho`.
///
/// Records are exactly balanced over (occupation, gender) before shuffling.
pub fn synthesize_corpus(
    space: &EmbeddingSpace,
    spec: &CorpusSpec,
    seed: u64,
) -> Result<Vec<BioRecord>> {
    if !(0.0..=1.0).contains(&spec.rho) || !(0.0..=1.0).contains(&spec.occupation_noise) {
        return Err(Error::InvalidParameter(
            "rho and occupation_noise must lie in [0, 1]".into(),
        ));
    }
    if spec.occupations < 2 || spec.tokens_per_record == 0 || spec.words_per_occupation == 0 {
        return Err(Error::InvalidParameter(
            "need >= 2 occupations and non-empty bios".into(),
        ));
    }
    if spec.rho > 0.0 && (spec.male_words.is_empty() || spec.female_words.is_empty()) {
        return Err(Error::InvalidParameter(
            "gender word lists must be non-empty when rho > 0".into(),
        ));
    }
    for w in spec.male_words.iter().chain(&spec.female_words) {
        if space.index_of(w).is_none() {
            return Err(Error::InvalidParameter(format!("gender word `{w}` not in vocabulary")));
        }
    }
    let groups: Vec<Vec<String>> = match &spec.occupation_words {
        Some(g) => {
            if g.len() != spec.occupations || g.iter().any(Vec::is_empty) {
                return Err(Error::InvalidParameter(
                    "one non-empty word group per occupation required".into(),
                ));
            }
            g.clone()
        }
        None => {
            let gendered: BTreeSet<&str> = spec
                .male_words
                .iter()
                .chain(&spec.female_words)
                .map(String::as_str)
                .collect();
            let pool: Vec<&String> = space
                .words()
                .iter()
                .filter(|w| !gendered.contains(w.as_str()))
                .collect();
            let needed = spec.occupations * spec.words_per_occupation;
            if pool.len() < needed {
                return Err(Error::VocabularyTooSmall {
                    needed,
                    available: pool.len(),
                });
            }
            pool[..needed]
                .chunks(spec.words_per_occupation)
                .map(|c| c.iter().map(|w| (*w).clone()).collect())
                .collect()
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(spec.records);
    for i in 0..spec.records {
        let occ = i % spec.occupations;
        let gender = if (i / spec.occupations).is_multiple_of(2) {
            Gender::M
        } else {
            Gender::F
        };
        let gender_words = match gender {
            Gender::M => &spec.male_words,
            Gender::F => &spec.female_words,
        };
        let mut tokens = Vec::with_capacity(spec.tokens_per_record);
        for _ in 0..spec.tokens_per_record {
            if spec.rho > 0.0 && rng.random_bool(spec.rho / 2.0) {
                tokens.push(gender_words[rng.random_range(0..gender_words.len())].clone());
            } else {
                let g = if rng.random_bool(spec.occupation_noise) {
                    rng.random_range(0..spec.occupations)
                } else {
                    occ
                };
                let group = &groups[g];
                tokens.push(group[rng.random_range(0..group.len())].clone());
            }
        }
        records.push(BioRecord {
            gender,
            occupation: occupation_label(occ),
            tokens,
        });
    }
    records.shuffle(&mut rng);
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Step size before scaling by `1 / max‖x‖²` over training features.
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Minimum fraction of a record's tokens that must be in the vocabulary.
    pub min_coverage: f64,
    /// Resolve tokens as words of this language (merged spaces).
    pub language: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1.0,
            epochs: 300,
            seed: 0,
            min_coverage: 0.5,
            language: None,
        }
    }
}

/// Mean of the in-vocabulary token vectors with a trailing bias feature of 1,
/// and the fraction of tokens found.
pub fn featurize(
    space: &EmbeddingSpace,
    tokens: &[String],
    language: Option<&str>,
) -> Option<(Vec<f64>, f64)> {
    let d = space.dim();
    let mut f = vec![0.0; d + 1];
    let mut found = 0usize;
    for t in tokens {
        let v = match language {
            // bare words of `l`, or tokens already in stored form
            Some(l) => space.resolve_vector(l, t).or_else(|| space.vector(t)),
            None => space.vector(t),
        };
        if let Some(v) = v {
            axpy(1.0, v, &mut f[..d]);
            found += 1;
        }
    }
    if found == 0 {
        return None;
    }
    f[..d].iter_mut().for_each(|x| *x /= found as f64);
    f[d] = 1.0;
    Some((f, found as f64 / tokens.len() as f64))
}

/// Mean cross-entropy and its gradient for weights laid out `classes × features`.
pub fn loss_and_gradient(
    classes: usize,
    features: &Matrix,
    labels: &[usize],
    weights: &[f64],
) -> (f64, Vec<f64>) {
    let p = features.cols();
    let n = features.rows();
    let mut grad = vec![0.0; classes * p];
    let mut loss = 0.0;
    let mut logits = vec![0.0; classes];
    for r in 0..n {
        let x = features.row(r);
        for (c, l) in logits.iter_mut().enumerate() {
            *l = dot(&weights[c * p..(c + 1) * p], x);
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for l in logits.iter_mut() {
            *l = libm::exp(*l - max);
            z += *l;
        }
        let y = labels[r];
        loss -= libm::log(logits[y] / z);
        for c in 0..classes {
            let coef = logits[c] / z - if c == y { 1.0 } else { 0.0 };
            axpy(coef, x, &mut grad[c * p..(c + 1) * p]);
        }
    }
    let inv = 1.0 / n as f64;
    grad.iter_mut().for_each(|g| *g *= inv);
    (loss * inv, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub labels: Vec<String>,
    pub dim: usize,
    /// Row-major `labels.len() × (dim + 1)`; last column is the bias.
    pub weights: Vec<f64>,
    pub language: Option<String>,
}

impl Classifier {
    /// Index of the highest-scoring label; ties go to the earlier label.
    pub fn predict_features(&self, x: &[f64]) -> usize {
        let p = self.dim + 1;
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..self.labels.len() {
            let s = dot(&self.weights[c * p..(c + 1) * p], x);
            if s > best_score {
                best = c;
                best_score = s;
            }
        }
        best
    }

    pub fn predict(&self, space: &EmbeddingSpace, tokens: &[String]) -> Option<&str> {
        featurize(space, tokens, self.language.as_deref())
            .map(|(x, _)| self.labels[self.predict_features(&x)].as_str())
    }
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub classifier: Classifier,
    /// Training loss before each epoch's update, then after the last one.
    pub loss_history: Vec<f64>,
    pub training_accuracy: f64,
    pub warnings: Vec<Warning>,
}

fn feature_table(
    space: &EmbeddingSpace,
    records: &[BioRecord],
    language: Option<&str>,
    min_coverage: f64,
    warnings: &mut Vec<Warning>,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut feats = Vec::with_capacity(records.len());
    let mut kept = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        match featurize(space, &r.tokens, language) {
            Some((f, cov)) if cov >= min_coverage => {
                feats.push(f);
                kept.push(i);
            }
            Some((_, cov)) => warnings.push(
                Warning::RecordDropped {
                    index: i,
                    reason: format!("token coverage {cov:.2} below {min_coverage}"),
                }
                .emit(),
            ),
            None => warnings.push(
                Warning::RecordDropped {
                    index: i,
                    reason: "no token in vocabulary".into(),
                }
                .emit(),
            ),
        }
    }
    (feats, kept)
}

/// Trains the mean-embedding classifier; the space is only read.
pub fn train_classifier(
    space: &EmbeddingSpace,
    train: &[BioRecord],
    config: &TrainConfig,
) -> Result<Trained> {
    if train.is_empty() {
        return Err(Error::EmptySet("training set"));
    }
    if config.learning_rate <= 0.0 {
        return Err(Error::InvalidParameter("learning rate must be positive".into()));
    }
    let labels: Vec<String> = train
        .iter()
        .map(|r| r.occupation.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if labels.len() < 2 {
        return Err(Error::TooFewLabels(labels.len()));
    }
    let mut warnings = Vec::new();
    let (feats, kept) = feature_table(
        space,
        train,
        config.language.as_deref(),
        config.min_coverage,
        &mut warnings,
    );
    if feats.is_empty() {
        return Err(Error::EmptySet("training features"));
    }
    let y: Vec<usize> = kept
        .iter()
        .map(|&i| labels.binary_search(&train[i].occupation).expect("label present"))
        .collect();
    let features = Matrix::from_rows(&feats)?;
    let classes = labels.len();
    let p = features.cols();
    let max_sq = feats.iter().map(|f| dot(f, f)).fold(0.0, f64::max);
    let step = config.learning_rate / max_sq;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = Normal::new(0.0, 0.01).expect("valid normal");
    let mut weights: Vec<f64> = (0..classes * p).map(|_| init.sample(&mut rng)).collect();
    let mut history = Vec::with_capacity(config.epochs + 1);
    for _ in 0..config.epochs {
        let (loss, grad) = loss_and_gradient(classes, &features, &y, &weights);
        history.push(loss);
        axpy(-step, &grad, &mut weights);
    }
    history.push(loss_and_gradient(classes, &features, &y, &weights).0);

    let classifier = Classifier {
        labels,
        dim: space.dim(),
        weights,
        language: config.language.clone(),
    };
    let correct = (0..features.rows())
        .filter(|&r| classifier.predict_features(features.row(r)) == y[r])
        .count();
    Ok(Trained {
        classifier,
        loss_history: history,
        training_accuracy: correct as f64 / features.rows() as f64,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationAccuracy {
    pub occupation: String,
    pub acc_m: f64,
    pub acc_f: f64,
    pub gap: f64,
    pub n_m: usize,
    pub n_f: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtrinsicResult {
    pub per_occupation: Vec<OccupationAccuracy>,
    /// Mean absolute per-occupation accuracy gap, `|Diff|`.
    pub diff: f64,
    pub male_acc: f64,
    pub female_acc: f64,
    pub seed: u64,
}

/// Per-occupation accuracy split by gender and its mean absolute gap.
pub fn evaluate_gap(
    classifier: &Classifier,
    space: &EmbeddingSpace,
    test: &[BioRecord],
    seed: u64,
) -> Result<(ExtrinsicResult, Vec<Warning>)> {
    if test.is_empty() {
        return Err(Error::EmptySet("test set"));
    }
    if space.dim() != classifier.dim {
        return Err(Error::DimensionMismatch {
            expected: classifier.dim,
            found: space.dim(),
        });
    }
    let mut warnings = Vec::new();
    // (correct, total) per occupation and gender
    let mut tally: BTreeMap<&str, [(usize, usize); 2]> = BTreeMap::new();
    let mut overall = [(0usize, 0usize); 2];
    for (i, r) in test.iter().enumerate() {
        let Some((x, _)) = featurize(space, &r.tokens, classifier.language.as_deref()) else {
            warnings.push(
                Warning::RecordDropped {
                    index: i,
                    reason: "no token in vocabulary".into(),
                }
                .emit(),
            );
            continue;
        };
        let ok = classifier.labels[classifier.predict_features(&x)] == r.occupation;
        let g = r.gender as usize;
        let cell = &mut tally.entry(r.occupation.as_str()).or_default()[g];
        cell.1 += 1;
        overall[g].1 += 1;
        if ok {
            cell.0 += 1;
            overall[g].0 += 1;
        }
    }
    let mut per_occupation = Vec::new();
    for (occ, [m, f]) in tally {
        if m.1 == 0 || f.1 == 0 {
            warnings.push(
                Warning::OccupationExcluded {
                    occupation: occ.to_string(),
                }
                .emit(),
            );
            continue;
        }
        let acc_m = m.0 as f64 / m.1 as f64;
        let acc_f = f.0 as f64 / f.1 as f64;
        per_occupation.push(OccupationAccuracy {
            occupation: occ.to_string(),
            acc_m,
            acc_f,
            gap: libm::fabs(acc_m - acc_f),
            n_m: m.1,
            n_f: f.1,
        });
    }
    if per_occupation.is_empty() {
        return Err(Error::EmptySet("scored occupations"));
    }
    let ratio = |(c, t): (usize, usize)| if t == 0 { 0.0 } else { c as f64 / t as f64 };
    Ok((
        ExtrinsicResult {
            diff: per_occupation.iter().map(|o| o.gap).sum::<f64>() / per_occupation.len() as f64,
            per_occupation,
            male_acc: ratio(overall[0]),
            female_acc: ratio(overall[1]),
            seed,
        },
        warnings,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapComparison {
    /// Fraction of occupations whose gap strictly shrank.
    pub f_i: f64,
    /// `(occupation, gap_after − gap_before)`.
    pub per_occupation_delta: Vec<(String, f64)>,
}

pub fn compare_runs(before: &ExtrinsicResult, after: &ExtrinsicResult) -> Result<GapComparison> {
    let b: Vec<&str> = before.per_occupation.iter().map(|o| o.occupation.as_str()).collect();
    let a: Vec<&str> = after.per_occupation.iter().map(|o| o.occupation.as_str()).collect();
    if a != b || b.is_empty() {
        return Err(Error::OccupationMismatch);
    }
    let deltas: Vec<(String, f64)> = before
        .per_occupation
        .iter()
        .zip(&after.per_occupation)
        .map(|(x, y)| (x.occupation.clone(), y.gap - x.gap))
        .collect();
    let reduced = before
        .per_occupation
        .iter()
        .zip(&after.per_occupation)
        .filter(|(x, y)| y.gap < x.gap)
        .count();
    Ok(GapComparison {
        f_i: reduced as f64 / deltas.len() as f64,
        per_occupation_delta: deltas,
    })
}
