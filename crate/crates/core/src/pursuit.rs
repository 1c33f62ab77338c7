//! Kurtosis-based projection pursuit (PPA).
//!
//! Directions are found one at a time by maximizing the excess kurtosis of
//! the projected difference vectors, each constrained orthogonal to the ones
//! already found. The search runs in the coordinates of the centered data's
//! row space, where every direction has positive variance.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, axpy, canonical_sign, dot, norm, scale, Matrix};
use crate::subspace::{centered, BiasSubspace, DifferenceMatrix, Method, RANK_TOLERANCE};

/// Excess kurtosis needs at least this many samples.
pub const MIN_SAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PursuitConfig {
    pub starts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
}

impl Default for PursuitConfig {
    fn default() -> Self {
        PursuitConfig {
            starts: 32,
            max_iterations: 1000,
            gradient_tolerance: 1e-9,
        }
    }
}

/// Sample excess kurtosis `m4 / m2² − 3` of `values` about their mean.
pub fn excess_kurtosis(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for v in values {
        let c = v - mean;
        let c2 = c * c;
        m2 += c2;
        m4 += c2 * c2;
    }
    m2 /= n;
    m4 /= n;
    m4 / (m2 * m2) - 3.0
}

/// Kurtosis objective over the rows of a centered coordinate matrix.
struct Objective<'a> {
    data: &'a Matrix,
    proj: Vec<f64>,
}

impl<'a> Objective<'a> {
    fn new(data: &'a Matrix) -> Self {
        Objective {
            data,
            proj: vec![0.0; data.rows()],
        }
    }

    fn value(&mut self, a: &[f64]) -> f64 {
        let n = self.data.rows() as f64;
        let (mut m2, mut m4) = (0.0, 0.0);
        for r in 0..self.data.rows() {
            let p = dot(self.data.row(r), a);
            let p2 = p * p;
            m2 += p2;
            m4 += p2 * p2;
        }
        m2 /= n;
        m4 /= n;
        m4 / (m2 * m2) - 3.0
    }

    /// Value and Euclidean gradient. Rows are centered, so projections are too.
    fn value_and_gradient(&mut self, a: &[f64], grad: &mut [f64]) -> f64 {
        let n = self.data.rows() as f64;
        let (mut m2, mut m4) = (0.0, 0.0);
        for r in 0..self.data.rows() {
            let p = dot(self.data.row(r), a);
            self.proj[r] = p;
            let p2 = p * p;
            m2 += p2;
            m4 += p2 * p2;
        }
        m2 /= n;
        m4 /= n;
        // dK = (4/n) Σ p³ x / m2² − 2 m4 (2/n) Σ p x / m2³
        grad.iter_mut().for_each(|g| *g = 0.0);
        let c4 = 4.0 / (n * m2 * m2);
        let c2 = 4.0 * m4 / (n * m2 * m2 * m2);
        for r in 0..self.data.rows() {
            let p = self.proj[r];
            axpy(c4 * p * p * p - c2 * p, self.data.row(r), grad);
        }
        m4 / (m2 * m2) - 3.0
    }
}

fn project_out(v: &mut [f64], found: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in found {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Riemannian gradient ascent on the unit sphere within the orthogonal
/// complement of `found`, with Armijo backtracking.
fn ascend(
    obj: &mut Objective<'_>,
    start: Vec<f64>,
    found: &[Vec<f64>],
    cfg: &PursuitConfig,
) -> (Vec<f64>, f64) {
    let r = start.len();
    let mut a = start;
    let mut grad = vec![0.0; r];
    let mut value = obj.value_and_gradient(&a, &mut grad);
    let mut step = 1.0;
    for _ in 0..cfg.max_iterations {
        let radial = dot(&grad, &a);
        axpy(-radial, &a, &mut grad);
        project_out(&mut grad, found);
        let gnorm = norm(&grad);
        if gnorm < cfg.gradient_tolerance {
            break;
        }
        let mut accepted = false;
        while step > 1e-16 {
            let mut cand = a.clone();
            axpy(step, &grad, &mut cand);
            project_out(&mut cand, found);
            let cn = norm(&cand);
            scale(&mut cand, 1.0 / cn);
            let v = obj.value(&cand);
            if v >= value + 1e-4 * step * gnorm * gnorm {
                a = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        value = obj.value_and_gradient(&a, &mut grad);
        step = (step * 2.0).min(1e6);
    }
    (a, value)
}

/// Deflationary kurtosis-maximizing projection pursuit over the rows of `Q`.
///
/// Returns `k` orthonormal directions sorted by non-increasing excess
/// kurtosis. Each direction is the best of `cfg.starts` seeded random starts.
pub fn ppa_basis(q: &DifferenceMatrix, k: usize, seed: u64) -> Result<BiasSubspace> {
    ppa_basis_with(q, k, seed, &PursuitConfig::default())
}

pub fn ppa_basis_with(
    q: &DifferenceMatrix,
    k: usize,
    seed: u64,
    cfg: &PursuitConfig,
) -> Result<BiasSubspace> {
    if k == 0 {
        return Err(Error::InvalidRank(0));
    }
    let n = q.len();
    if n < MIN_SAMPLES {
        return Err(Error::SampleSize {
            required: MIN_SAMPLES,
            found: n,
        });
    }
    let z = centered(q.matrix());
    let svd = linalg::svd(&z);
    let rank = svd.rank(RANK_TOLERANCE);
    if k > rank {
        return Err(Error::RankDeficient {
            requested: k,
            max: rank,
        });
    }
    // coordinates of the centered rows in the leading right singular vectors
    let mut coords = Matrix::zeros(n, rank);
    for r in 0..n {
        for c in 0..rank {
            coords.set(r, c, svd.u.get(r, c) * svd.s[c]);
        }
    }
    let mut obj = Objective::new(&coords);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut scores = Vec::with_capacity(k);

    for _ in 0..k {
        let mut best: Option<(Vec<f64>, f64)> = None;
        for _ in 0..cfg.starts.max(1) {
            let mut start: Vec<f64> = (0..rank).map(|_| StandardNormal.sample(&mut rng)).collect();
            project_out(&mut start, &found);
            let sn = norm(&start);
            if sn == 0.0 {
                continue;
            }
            scale(&mut start, 1.0 / sn);
            let (a, v) = ascend(&mut obj, start, &found, cfg);
            if best.as_ref().is_none_or(|(_, bv)| v > *bv) {
                best = Some((a, v));
            }
        }
        let (a, v) = best.expect("at least one start");
        found.push(a);
        scores.push(v);
    }

    let mut directions: Vec<(Vec<f64>, f64)> = found
        .iter()
        .zip(scores)
        .map(|(a, s)| {
            let mut b = vec![0.0; q.dim()];
            for (c, &ac) in a.iter().enumerate() {
                axpy(ac, &svd.v.column(c), &mut b);
            }
            let bn = norm(&b);
            scale(&mut b, 1.0 / bn);
            canonical_sign(&mut b);
            (b, s)
        })
        .collect();
    directions.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(core::cmp::Ordering::Equal));
    let (basis, scores): (Vec<_>, Vec<_>) = directions.into_iter().unzip();
    let basis = if linalg::max_orthonormality_deviation(&basis) > 1e-12 {
        linalg::orthonormalize(&basis)?
    } else {
        basis
    };
    Ok(BiasSubspace {
        method: Method::Ppa,
        basis,
        scores,
        orientation_labels: Vec::new(),
    })
}
