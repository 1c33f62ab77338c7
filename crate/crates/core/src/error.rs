use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    RowArity {
        word: String,
        expected: usize,
        found: usize,
    },
    DuplicateWord(String),
    NonFinite(String),
    ZeroVector(String),
    EmptyWord,
    InvalidPair {
        language: String,
        male: String,
        female: String,
        reason: &'static str,
    },
    MultiToken {
        language: String,
        word: String,
    },
    Overlap {
        language: String,
        word: String,
    },
    EmptySeedSet {
        language: String,
        gender: &'static str,
    },
    SeedOverlap {
        language: String,
        word: String,
    },
    DuplicateOccupationPair {
        language: String,
        masculine: String,
        feminine: String,
    },
    UnknownLanguage(String),
    TrainCountTooLarge {
        language: String,
        requested: usize,
        available: usize,
    },
    EmptyDictionary,
    NoResolvablePairs,
    InvalidRank(usize),
    RankDeficient {
        requested: usize,
        max: usize,
    },
    SampleSize {
        required: usize,
        found: usize,
    },
    LanguageWithoutRows(String),
    NotDivisible {
        k: usize,
        languages: usize,
    },
    InsufficientComponents {
        language: String,
        needed: usize,
        available: usize,
    },
    NotOrthonormal(f64),
    ProjectionInvariant(f64),
    MissingMonoLanguage,
    EmptySet(&'static str),
    NoResolvableOccupations,
    AllGuarded {
        source: String,
        target: String,
        epsilon: f64,
    },
    CrossScoreCells(Vec<(String, String, String)>),
    TooFewLabels(usize),
    InvalidParameter(String),
    VocabularyTooSmall {
        needed: usize,
        available: usize,
    },
    OccupationMismatch,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Error::*;
        match self {
            DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            RowArity {
                word,
                expected,
                found,
            } => write!(
                f,
                "row for `{word}` has {found} values, expected {expected}"
            ),
            DuplicateWord(w) => write!(f, "duplicate word `{w}`"),
            NonFinite(w) => write!(f, "non-finite value in vector of `{w}`"),
            ZeroVector(w) => write!(f, "zero vector for `{w}` cannot be normalized"),
            EmptyWord => f.write_str("empty word"),
            InvalidPair {
                language,
                male,
                female,
                reason,
            } => write!(f, "invalid gender pair ({male}, {female}) in `{language}`: {reason}"),
            MultiToken { language, word } => {
                write!(f, "multi-token entry `{word}` in `{language}`")
            }
            Overlap { language, word } => write!(
                f,
                "`{word}` is both gender-defining and neutral in `{language}`"
            ),
            EmptySeedSet { language, gender } => {
                write!(f, "empty {gender} seed set for `{language}`")
            }
            SeedOverlap { language, word } => {
                write!(f, "`{word}` is in both seed sets of `{language}`")
            }
            DuplicateOccupationPair {
                language,
                masculine,
                feminine,
            } => write!(
                f,
                "duplicate occupation pair ({masculine}, {feminine}) in `{language}`"
            ),
            UnknownLanguage(l) => write!(f, "language `{l}` not present"),
            TrainCountTooLarge {
                language,
                requested,
                available,
            } => write!(
                f,
                "train count {requested} exceeds the {available} pairs of `{language}`"
            ),
            EmptyDictionary => f.write_str("bilingual dictionary is empty"),
            NoResolvablePairs => f.write_str("no pair resolvable in the vocabulary"),
            InvalidRank(k) => write!(f, "invalid subspace rank {k}"),
            RankDeficient { requested, max } => write!(
                f,
                "requested k={requested} exceeds numerical rank; achievable k <= {max}"
            ),
            SampleSize { required, found } => write!(
                f,
                "need at least {required} difference vectors, found {found}"
            ),
            LanguageWithoutRows(l) => write!(f, "no difference vectors tagged `{l}`"),
            NotDivisible { k, languages } => write!(
                f,
                "k={k} is not divisible by the number of languages ({languages})"
            ),
            InsufficientComponents {
                language,
                needed,
                available,
            } => write!(
                f,
                "language `{language}` has {available} oriented components, needs {needed} (deficit {})",
                needed - available
            ),
            NotOrthonormal(dev) => write!(f, "basis is not orthonormal (deviation {dev:e})"),
            ProjectionInvariant(v) => write!(
                f,
                "debiased vectors keep a component of {v:e} along the subspace"
            ),
            MissingMonoLanguage => f.write_str("monolingual variant requires a language"),
            EmptySet(what) => write!(f, "empty {what}"),
            NoResolvableOccupations => f.write_str("no occupation pair resolvable"),
            AllGuarded {
                source,
                target,
                epsilon,
            } => write!(
                f,
                "S({source},{target}): every neutral word falls under the guard {epsilon:e}"
            ),
            CrossScoreCells(cells) => {
                f.write_str("cross-score failed for")?;
                for (a, b, why) in cells {
                    write!(f, " [{a}->{b}: {why}]")?;
                }
                Ok(())
            }
            TooFewLabels(n) => write!(f, "classifier needs at least 2 labels, found {n}"),
            InvalidParameter(p) => write!(f, "invalid parameter: {p}"),
            VocabularyTooSmall { needed, available } => write!(
                f,
                "vocabulary too small: need {needed} words, have {available}"
            ),
            OccupationMismatch => f.write_str("occupation sets differ between runs"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
