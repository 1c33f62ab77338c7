//! Gender-defining pairs, gender-neutral word sets and their train/test split.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warning::Warning;

/// Number of training pairs per language used for subspace construction.
pub const DEFAULT_TRAIN_PAIRS: usize = 10;

/// A (male, female) gender-defining word tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GenderPair {
    pub male: String,
    pub female: String,
    pub language: String,
}

impl GenderPair {
    pub fn new(
        male: impl Into<String>,
        female: impl Into<String>,
        language: impl Into<String>,
    ) -> Self {
        GenderPair {
            male: male.into(),
            female: female.into(),
            language: language.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NeutralWords {
    #[serde(default)]
    pub professions: Vec<String>,
    #[serde(default)]
    pub adjectives: Vec<String>,
    #[serde(default)]
    pub transliterations: Vec<String>,
}

impl NeutralWords {
    /// All neutral words (professions, adjectives, transliterations), first occurrence kept.
    pub fn all(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.professions
            .iter()
            .chain(&self.adjectives)
            .chain(&self.transliterations)
            .map(String::as_str)
            .filter(|w| seen.insert(*w))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeedSets {
    pub male: Vec<String>,
    pub female: Vec<String>,
}

/// Masculine and feminine surface forms of one occupation. Equal forms are
/// used for gender-neutral occupations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OccupationPair {
    pub masculine: String,
    pub feminine: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LanguageLexicon {
    pub pairs: Vec<GenderPair>,
    pub neutral: NeutralWords,
    pub seeds: SeedSets,
    pub occupation_pairs: Vec<OccupationPair>,
}

/// Per-category sizes for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub professions: usize,
    pub adjectives: usize,
    pub transliterations: usize,
    pub neutral: usize,
    pub pairs: usize,
}

impl LanguageLexicon {
    pub fn counts(&self) -> CategoryCounts {
        CategoryCounts {
            professions: self.neutral.professions.len(),
            adjectives: self.neutral.adjectives.len(),
            transliterations: self.neutral.transliterations.len(),
            neutral: self.neutral.all().len(),
            pairs: self.pairs.len(),
        }
    }
}

/// Validated lexicon covering one or more languages, in declaration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenderLexicon {
    languages: Vec<(String, LanguageLexicon)>,
}

fn check_token(language: &str, word: &str) -> Result<()> {
    if word.is_empty() {
        return Err(Error::EmptyWord);
    }
    if word.chars().any(char::is_whitespace) {
        return Err(Error::MultiToken {
            language: language.to_string(),
            word: word.to_string(),
        });
    }
    Ok(())
}

impl GenderLexicon {
    /// Validates and assembles a lexicon.
    pub fn new(languages: Vec<(String, LanguageLexicon)>) -> Result<Self> {
        let mut tags = BTreeSet::new();
        for (tag, lex) in &languages {
            if !tags.insert(tag.as_str()) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "language `{tag}` declared twice"
                )));
            }
            validate_language(tag, lex)?;
        }
        Ok(GenderLexicon { languages })
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.languages.iter().map(|(t, _)| t.as_str())
    }

    pub fn language(&self, tag: &str) -> Result<&LanguageLexicon> {
        self.languages
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, l)| l)
            .ok_or_else(|| Error::UnknownLanguage(tag.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LanguageLexicon)> {
        self.languages.iter().map(|(t, l)| (t.as_str(), l))
    }
}

fn validate_language(tag: &str, lex: &LanguageLexicon) -> Result<()> {
    let mut defining = BTreeSet::new();
    for p in &lex.pairs {
        check_token(tag, &p.male)?;
        check_token(tag, &p.female)?;
        if p.male == p.female {
            return Err(Error::InvalidPair {
                language: tag.to_string(),
                male: p.male.clone(),
                female: p.female.clone(),
                reason: "male and female words are identical",
            });
        }
        if p.language != tag {
            return Err(Error::InvalidPair {
                language: tag.to_string(),
                male: p.male.clone(),
                female: p.female.clone(),
                reason: "pair is tagged with another language",
            });
        }
        defining.insert(p.male.as_str());
        defining.insert(p.female.as_str());
    }
    for w in lex.neutral.all() {
        check_token(tag, w)?;
        if defining.contains(w) {
            return Err(Error::Overlap {
                language: tag.to_string(),
                word: w.to_string(),
            });
        }
    }
    if lex.seeds.male.is_empty() {
        return Err(Error::EmptySeedSet {
            language: tag.to_string(),
            gender: "male",
        });
    }
    if lex.seeds.female.is_empty() {
        return Err(Error::EmptySeedSet {
            language: tag.to_string(),
            gender: "female",
        });
    }
    let male: BTreeSet<&str> = lex.seeds.male.iter().map(String::as_str).collect();
    for w in lex.seeds.male.iter().chain(&lex.seeds.female) {
        check_token(tag, w)?;
    }
    if let Some(w) = lex.seeds.female.iter().find(|w| male.contains(w.as_str())) {
        return Err(Error::SeedOverlap {
            language: tag.to_string(),
            word: w.clone(),
        });
    }
    let mut occupations = BTreeSet::new();
    for o in &lex.occupation_pairs {
        check_token(tag, &o.masculine)?;
        check_token(tag, &o.feminine)?;
        if !occupations.insert(o) {
            return Err(Error::DuplicateOccupationPair {
                language: tag.to_string(),
                masculine: o.masculine.clone(),
                feminine: o.feminine.clone(),
            });
        }
    }
    Ok(())
}

/// Disjoint train/test partition of one language's defining pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSplit {
    pub language: String,
    pub seed: u64,
    pub train: Vec<GenderPair>,
    pub test: Vec<GenderPair>,
}

/// Seeded shuffle of `D_lang`; the first `train_count` pairs train, the rest test.
pub fn split_pairs(
    lexicon: &GenderLexicon,
    language: &str,
    train_count: usize,
    seed: u64,
) -> Result<(PairSplit, Option<Warning>)> {
    let lex = lexicon.language(language)?;
    if train_count > lex.pairs.len() {
        return Err(Error::TrainCountTooLarge {
            language: language.to_string(),
            requested: train_count,
            available: lex.pairs.len(),
        });
    }
    let mut pairs = lex.pairs.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    let test = pairs.split_off(train_count);
    let warning = test.is_empty().then(|| {
        Warning::EmptyTestSplit {
            language: language.to_string(),
        }
        .emit()
    });
    Ok((
        PairSplit {
            language: language.to_string(),
            seed,
            train: pairs,
            test,
        },
        warning,
    ))
}
