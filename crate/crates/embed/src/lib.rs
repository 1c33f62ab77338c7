//! File formats, provenance, reports and the command line around
//! [`debias_embed_core`].

pub mod artifact;
pub mod cli;
pub mod corpus;
pub mod dictionary;
pub mod error;
pub mod lexicon_json;
pub mod parallel;
pub mod report;
pub mod vec_format;

pub use error::{Error, Result};
