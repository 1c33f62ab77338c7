use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Non-fatal conditions collected by pipeline stages and copied into run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    OovSkipped { context: String, word: String },
    ZeroDifference { male: String, female: String },
    EmptyTestSplit { language: String },
    ZeroResidual { word: String },
    OrientationTie { index: usize, chosen: String },
    FewAlignmentPairs { resolved: usize, dim: usize },
    GuardedWords { source: String, target: String, count: usize },
    RecordDropped { index: usize, reason: String },
    OccupationExcluded { occupation: String },
    Other { message: String },
}

impl Warning {
    pub(crate) fn emit(self) -> Self {
        log::warn!("{self}");
        self
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::OovSkipped { context, word } => {
                write!(f, "{context}: `{word}` not in vocabulary, skipped")
            }
            Warning::ZeroDifference { male, female } => {
                write!(f, "pair ({male}, {female}) has a zero difference vector, skipped")
            }
            Warning::EmptyTestSplit { language } => {
                write!(f, "all pairs of `{language}` used for training; test split is empty")
            }
            Warning::ZeroResidual { word } => {
                write!(f, "`{word}` lies inside the bias subspace; left as a zero vector")
            }
            Warning::OrientationTie { index, chosen } => write!(
                f,
                "basis vector {index} has no preferred language; assigned `{chosen}` by order"
            ),
            Warning::FewAlignmentPairs { resolved, dim } => write!(
                f,
                "only {resolved} dictionary pairs resolvable for dimension {dim}"
            ),
            Warning::GuardedWords {
                source,
                target,
                count,
            } => write!(
                f,
                "S({source},{target}): {count} neutral words under the projection guard"
            ),
            Warning::RecordDropped { index, reason } => {
                write!(f, "record {index} dropped: {reason}")
            }
            Warning::OccupationExcluded { occupation } => write!(
                f,
                "occupation `{occupation}` lacks one gender in the test set; excluded"
            ),
            Warning::Other { message } => f.write_str(message),
        }
    }
}
