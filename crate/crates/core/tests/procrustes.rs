mod common;

use common::*;
use debias_embed_core::align::{
    apply_map, merge_pair, merge_spaces, procrustes_fit, BilingualDictionary, OrthogonalMap,
};
use debias_embed_core::linalg::Matrix;
use debias_embed_core::{EmbeddingSpace, Error, Warning};
use nalgebra::DMatrix;
use rand::Rng;

fn identity_dict(src: &str, tgt: &str, words: &[String]) -> BilingualDictionary {
    BilingualDictionary::new(src, tgt, words.iter().map(|w| (w.clone(), w.clone())))
        .unwrap()
        .0
}

fn to_dmatrix(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

/// Source space with random rows and a target space holding `W·x` for each.
fn rotated_pair(
    r: &mut rand_chacha::ChaCha8Rng,
    w: &DMatrix<f64>,
    n: usize,
) -> (EmbeddingSpace, EmbeddingSpace, Vec<String>) {
    let d = w.nrows();
    let words = word_list("w", n);
    let x = gaussian(r, n, d);
    let y = &x * w.transpose();
    (
        space_from("en", &words, &to_rows(&x)),
        space_from("hi", &words, &to_rows(&y)),
        words,
    )
}

fn objective(w: &DMatrix<f64>, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    (x * w.transpose() - y).norm_squared()
}

#[test]
fn self_alignment_is_identity() {
    let s = random_space(1, 12, 5);
    let fit = procrustes_fit(&s, &s, &identity_dict("en", "en", s.words())).unwrap();
    let w = to_dmatrix(&fit.map.matrix);
    assert!((w - DMatrix::identity(5, 5)).abs().max() < 1e-9);
    assert_eq!(fit.map.fit_pair_count, 12);
}

#[test]
fn thirty_degree_rotation_matches_brute_force_angle() {
    let t = 30f64.to_radians();
    let truth = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
    let mut r = rng(30);
    let (src, tgt, words) = rotated_pair(&mut r, &truth, 8);
    let fit = procrustes_fit(&src, &tgt, &identity_dict("en", "hi", &words)).unwrap();
    let x = DMatrix::from_row_slice(8, 2, src.as_slice());
    let y = DMatrix::from_row_slice(8, 2, tgt.as_slice());

    // brute-force minimization over the rotation angle: coarse grid, then golden section
    let rot = |a: f64| DMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()]);
    let f = |a: f64| objective(&rot(a), &x, &y);
    let step = std::f64::consts::TAU / 3600.0;
    let coarse = (0..3600)
        .map(|i| i as f64 * step)
        .min_by(|a, b| f(*a).partial_cmp(&f(*b)).unwrap())
        .unwrap();
    let (mut lo, mut hi) = (coarse - step, coarse + step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-13 {
        let (m1, m2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let oracle = rot((lo + hi) / 2.0);
    let w = to_dmatrix(&fit.map.matrix);
    assert!((&w - &oracle).abs().max() < 1e-6);
    assert!((&w - &truth).abs().max() < 1e-6);
}

#[test]
fn recovers_random_orthogonal_maps() {
    let mut r = rng(100);
    for case in 0..100 {
        let d = r.random_range(1..=10);
        let truth = random_orthogonal(&mut r, d);
        let (src, tgt, words) = rotated_pair(&mut r, &truth, 2 * d);
        let fit = procrustes_fit(&src, &tgt, &identity_dict("en", "hi", &words)).unwrap();
        let w = to_dmatrix(&fit.map.matrix);
        let err = (&w - &truth).norm();
        assert!(err < 1e-6, "case {case} (d = {d}): ‖W − W*‖ = {err:e}");
        assert!(fit.map.matrix.orthogonality_defect() < 1e-6);
    }
}

#[test]
fn rank_deficient_inputs_still_give_orthogonal_maps() {
    let mut r = rng(7);
    for d in [3, 6, 10] {
        // all source rows inside a 2-D plane
        let plane = gaussian(&mut r, 2, d);
        let coeffs = gaussian(&mut r, 15, 2);
        let x = &coeffs * &plane;
        let truth = random_orthogonal(&mut r, d);
        let y = &x * truth.transpose();
        let words = word_list("w", 15);
        let fit = procrustes_fit(
            &space_from("en", &words, &to_rows(&x)),
            &space_from("hi", &words, &to_rows(&y)),
            &identity_dict("en", "hi", &words),
        )
        .unwrap();
        let w = to_dmatrix(&fit.map.matrix);
        assert!((w.transpose() * &w - DMatrix::identity(d, d)).norm() < 1e-6);
        // still maps the plane exactly
        assert!((&x * w.transpose() - &y).abs().max() < 1e-8);
    }
    // a single pair in 4-D, and an all-zero cross product
    let one = space_from("en", &word_list("w", 1), &[vec![1.0, 2.0, 0.0, 0.0]]);
    let fit = procrustes_fit(&one, &one, &identity_dict("en", "hi", one.words())).unwrap();
    assert!(fit.map.matrix.orthogonality_defect() < 1e-6);
    assert!(matches!(fit.warnings[..], [Warning::FewAlignmentPairs { resolved: 1, dim: 4 }]));
}

#[test]
fn fit_beats_ten_thousand_random_orthogonal_matrices() {
    let mut r = rng(10_000);
    for _ in 0..5 {
        let d = r.random_range(1..=3);
        let n = r.random_range(d..=20);
        let x = gaussian(&mut r, n, d);
        let y = gaussian(&mut r, n, d);
        let words = word_list("w", n);
        let fit = procrustes_fit(
            &space_from("en", &words, &to_rows(&x)),
            &space_from("hi", &words, &to_rows(&y)),
            &identity_dict("en", "hi", &words),
        )
        .unwrap();
        let best = objective(&to_dmatrix(&fit.map.matrix), &x, &y);
        for _ in 0..10_000 {
            let mut q = random_orthogonal(&mut r, d);
            if r.random_bool(0.5) {
                q.column_mut(0).neg_mut();
            }
            assert!(best <= objective(&q, &x, &y) + 1e-12);
        }
    }
}

#[test]
fn apply_map_is_an_isometry_and_transpose_inverts_it() {
    let mut r = rng(3);
    let s = random_space(4, 20, 6);
    let q = random_orthogonal(&mut r, 6);
    let map = OrthogonalMap {
        matrix: Matrix::from_rows(&to_rows(&q)).unwrap(),
        source_tag: "en".into(),
        target_tag: "hi".into(),
        fit_pair_count: 0,
    };
    let mapped = apply_map(&map, &s).unwrap();
    let cos = |a: &[f64], b: &[f64]| {
        let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        d / (dvec(a).norm() * dvec(b).norm())
    };
    for i in 0..20 {
        assert!((dvec(mapped.row(i)).norm() - dvec(s.row(i)).norm()).abs() < 1e-9);
        for j in 0..20 {
            assert!((cos(mapped.row(i), mapped.row(j)) - cos(s.row(i), s.row(j))).abs() < 1e-9);
        }
    }
    let back = apply_map(&map.transpose(), &mapped).unwrap();
    for i in 0..20 {
        for (a, b) in back.row(i).iter().zip(s.row(i)) {
            assert!((a - b).abs() < 1e-6);
        }
    }
    let unit = EmbeddingSpace::from_rows("en", ["u"], &[[0.6, 0.8, 0.0, 0.0, 0.0, 0.0]]).unwrap();
    let u = apply_map(&map, &unit).unwrap();
    assert!((dvec(u.row(0)).norm() - 1.0).abs() < 1e-12);
}

#[test]
fn identity_map_leaves_space_unchanged() {
    let s = random_space(8, 5, 3);
    let map = OrthogonalMap {
        matrix: Matrix::identity(3),
        source_tag: "en".into(),
        target_tag: "en".into(),
        fit_pair_count: 0,
    };
    assert_eq!(apply_map(&map, &s).unwrap().as_slice(), s.as_slice());
}

#[test]
fn fit_errors() {
    let a = random_space(1, 4, 3);
    let b = random_space(2, 4, 2);
    let dict = identity_dict("en", "hi", a.words());
    assert_eq!(
        procrustes_fit(&a, &b, &dict).unwrap_err(),
        Error::DimensionMismatch { expected: 3, found: 2 }
    );
    let none = BilingualDictionary::new("en", "hi", [("zz".to_string(), "yy".to_string())])
        .unwrap()
        .0;
    assert_eq!(procrustes_fit(&a, &a, &none).unwrap_err(), Error::NoResolvablePairs);
    assert_eq!(
        BilingualDictionary::new("en", "hi", Vec::new()).unwrap_err(),
        Error::EmptyDictionary
    );
}

#[test]
fn duplicate_dictionary_pairs_are_dropped() {
    let pairs = [("a", "x"), ("b", "y"), ("a", "x"), ("a", "z")]
        .map(|(s, t)| (s.to_string(), t.to_string()));
    let (dict, dropped) = BilingualDictionary::new("en", "hi", pairs).unwrap();
    assert_eq!(dict.len(), 3);
    assert_eq!(dropped, vec![("a".to_string(), "x".to_string())]);
}

#[test]
fn merging_prefixes_words_by_language() {
    let en = EmbeddingSpace::from_rows("en", ["bank", "river"], &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let hi = EmbeddingSpace::from_rows("hi", ["bank", "a", "b"], &[[1.0, 1.0], [2.0, 0.0], [0.0, 2.0]])
        .unwrap();
    let merged = merge_pair(&en, &hi).unwrap();
    assert_eq!(merged.len(), 5);
    assert_eq!(merged.language_tag(), "en+hi");
    assert_eq!(merged.vector("en:bank").unwrap(), &[1.0, 0.0]);
    assert_eq!(merged.vector("hi:bank").unwrap(), &[1.0, 1.0]);
    assert_eq!(merged.resolve_vector("hi", "bank").unwrap(), &[1.0, 1.0]);

    let twin = en.with_language_tag("be");
    assert_eq!(merge_spaces(&[&en, &twin]).unwrap().len(), 4);

    let wide = EmbeddingSpace::from_rows("te", ["x"], &[[1.0, 0.0, 0.0]]).unwrap();
    assert!(matches!(
        merge_pair(&en, &wide).unwrap_err(),
        Error::DimensionMismatch { .. }
    ));
}
