//! Row-parallel debiasing. Each row is processed independently with the same
//! arithmetic as the sequential core, so results are bit-identical for any
//! thread count.

use debias_embed_core::debias::{debias_vector, DebiasOptions, Debiased, PROJECTION_TOLERANCE};
use debias_embed_core::linalg::dot;
use debias_embed_core::subspace::BiasSubspace;
use debias_embed_core::{EmbeddingSpace, Error as CoreError, Result as CoreResult, Warning};
use log::warn;
use rayon::prelude::*;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "DEBIAS_EMBED_THREADS";

/// Sizes the global pool from [`THREADS_ENV`]; a no-op when it is unset or
/// the pool already exists.
pub fn init_thread_pool() {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return;
    };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
                log::debug!("thread pool already initialised; {THREADS_ENV} ignored");
            }
        }
        _ => warn!("{THREADS_ENV}=`{value}` is not a positive integer; ignored"),
    }
}

/// Parallel equivalent of [`debias_embed_core::debias::debias_space`].
pub fn debias_space_par(
    space: &EmbeddingSpace,
    subspace: &BiasSubspace,
    options: &DebiasOptions,
) -> CoreResult<Debiased> {
    subspace.check()?;
    let d = space.dim();
    if subspace.dim() != d {
        return Err(CoreError::DimensionMismatch {
            expected: subspace.dim(),
            found: d,
        });
    }
    let mut data = space.as_slice().to_vec();
    // (residual vanished, largest |<w', b_j>|) per row
    let per_row: Vec<(bool, f64)> = data
        .par_chunks_mut(d)
        .zip(space.words().par_iter())
        .map(|(row, word)| {
            if let Some(only) = &options.only {
                if !only.contains(word) {
                    return (false, 0.0);
                }
            }
            let (v, zero) = debias_vector(row, subspace, options.renormalize_after);
            let worst = subspace
                .basis
                .iter()
                .map(|b| dot(&v, b).abs())
                .fold(0.0, f64::max);
            row.copy_from_slice(&v);
            (zero, worst)
        })
        .collect();
    let worst = per_row.iter().map(|r| r.1).fold(0.0, f64::max);
    if worst >= PROJECTION_TOLERANCE {
        return Err(CoreError::ProjectionInvariant(worst));
    }
    let zeroed: Vec<String> = per_row
        .iter()
        .zip(space.words())
        .filter(|(r, _)| r.0)
        .map(|(_, w)| w.clone())
        .collect();
    let warnings = zeroed
        .iter()
        .map(|w| {
            let warning = Warning::ZeroResidual { word: w.clone() };
            warn!("{warning}");
            warning
        })
        .collect();
    Ok(Debiased {
        space: space.replace_data(data)?,
        zeroed,
        max_residual_projection: worst,
        warnings,
    })
}
