//! Shared fixtures and independent reference computations for the
//! integration tests. Oracles here use nalgebra or brute force only, never
//! the crate's own linear algebra.

#![allow(dead_code)]

use debias_embed_core::lexicon::{
    GenderLexicon, GenderPair, LanguageLexicon, NeutralWords, OccupationPair, SeedSets,
};
use debias_embed_core::EmbeddingSpace;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Haar-ish random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, d, d).qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..d {
        if r[(c, c)] < 0.0 {
            for i in 0..d {
                q[(i, c)] = -q[(i, c)];
            }
        }
    }
    q
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().copied().collect())
        .collect()
}

pub fn columns_of(basis: &[Vec<f64>]) -> DMatrix<f64> {
    let d = basis[0].len();
    DMatrix::from_fn(d, basis.len(), |i, j| basis[j][i])
}

/// Sine of the largest principal angle between two column spaces with
/// orthonormal columns: ‖(I − B·Bᵀ)·A‖₂.
pub fn max_principal_sine(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let residual = a - b * (b.transpose() * a);
    residual.singular_values().max()
}

pub fn word_list(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn space_from(tag: &str, words: &[String], rows: &[Vec<f64>]) -> EmbeddingSpace {
    EmbeddingSpace::from_rows(tag, words, rows).unwrap()
}

pub fn random_space(seed: u64, n: usize, d: usize) -> EmbeddingSpace {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vec(&mut r, d)).collect();
    space_from("en", &word_list("w", n), &rows)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Single-language lexicon whose defining pairs are `m{i}`/`f{i}`.
pub fn simple_lexicon(
    tag: &str,
    pairs: usize,
    neutral: &[&str],
    seeds: (&[&str], &[&str]),
    occupations: &[(&str, &str)],
) -> GenderLexicon {
    GenderLexicon::new(vec![(tag.to_string(), language_lexicon(tag, pairs, neutral, seeds, occupations))])
        .unwrap()
}

pub fn language_lexicon(
    tag: &str,
    pairs: usize,
    neutral: &[&str],
    seeds: (&[&str], &[&str]),
    occupations: &[(&str, &str)],
) -> LanguageLexicon {
    let s = |v: &[&str]| v.iter().map(|w| w.to_string()).collect::<Vec<_>>();
    LanguageLexicon {
        pairs: (0..pairs)
            .map(|i| GenderPair::new(format!("m{i}"), format!("f{i}"), tag))
            .collect(),
        neutral: NeutralWords {
            professions: s(neutral),
            ..Default::default()
        },
        seeds: SeedSets {
            male: s(seeds.0),
            female: s(seeds.1),
        },
        occupation_pairs: occupations
            .iter()
            .map(|(m, f)| OccupationPair {
                masculine: m.to_string(),
                feminine: f.to_string(),
            })
            .collect(),
    }
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
