//! Linear-projection debiasing of word embeddings across languages.
//!
//! The core is `no_std` (with `alloc`): it holds the embedding model,
//! gender lexicons, orthogonal alignment, PCA/PPA bias subspaces, the
//! projection debiasing variants and the intrinsic/extrinsic bias metrics.
//! File formats and the command line live in the `debias-embed` crate.

#![no_std]
// Dense numeric kernels read more clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod align;
pub mod debias;
pub mod error;
pub mod extrinsic;
pub mod lexicon;
pub mod linalg;
pub mod metrics;
pub mod pursuit;
pub mod space;
pub mod subspace;
pub mod warning;

pub use error::{Error, Result};
pub use space::{EmbeddingSpace, SpaceBuilder};
pub use warning::Warning;
