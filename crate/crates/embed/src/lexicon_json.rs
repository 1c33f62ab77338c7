//! Lexicon JSON:
//!
//! ```json
//! { "languages": { "en": {
//!     "pairs": [["he", "she"]],
//!     "neutral": { "professions": [], "adjectives": [], "transliterations": [] },
//!     "seeds": { "male": ["he"], "female": ["she"] },
//!     "occupation_pairs": [["actor", "actress"]] } } }
//! ```
//!
//! Languages keep their declaration order.

use std::fs;
use std::path::Path;

use debias_embed_core::lexicon::{
    GenderLexicon, GenderPair, LanguageLexicon, NeutralWords, OccupationPair, SeedSets,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawLanguage {
    pairs: Vec<(String, String)>,
    #[serde(default)]
    neutral: NeutralWords,
    seeds: SeedSets,
    #[serde(default)]
    occupation_pairs: Vec<(String, String)>,
}

/// Lexicon shipped with the crate: en, hi, be and te defining pairs, neutral
/// professions, adjectives and transliterations, seed lists and occupation pairs.
pub const BUNDLED_LEXICON: &str = include_str!("../data/lexicon.json");

/// Name under which the bundled lexicon appears in manifests and messages.
pub const BUNDLED_LEXICON_NAME: &str = "<bundled>/lexicon.json";

pub fn bundled_lexicon() -> GenderLexicon {
    parse_lexicon(BUNDLED_LEXICON, Path::new(BUNDLED_LEXICON_NAME)).expect("bundled lexicon is valid")
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<GenderLexicon> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(&text, path)
}

pub fn parse_lexicon(text: &str, path: &Path) -> Result<GenderLexicon> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
    let languages = root
        .get("languages")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::format(path, "expected an object with a `languages` map"))?;
    let mut out = Vec::with_capacity(languages.len());
    for (tag, body) in languages {
        let raw: RawLanguage = serde_json::from_value(body.clone())
            .map_err(|e| Error::format(path, format!("language `{tag}`: {e}")))?;
        out.push((
            tag.clone(),
            LanguageLexicon {
                pairs: raw
                    .pairs
                    .into_iter()
                    .map(|(m, f)| GenderPair::new(m, f, tag.as_str()))
                    .collect(),
                neutral: raw.neutral,
                seeds: raw.seeds,
                occupation_pairs: raw
                    .occupation_pairs
                    .into_iter()
                    .map(|(masculine, feminine)| OccupationPair { masculine, feminine })
                    .collect(),
            },
        ));
    }
    Ok(GenderLexicon::new(out)?)
}

/// Serializes a lexicon back to the JSON schema.
pub fn lexicon_to_json(lexicon: &GenderLexicon) -> Value {
    let mut langs = Map::new();
    for (tag, lex) in lexicon.iter() {
        let raw = RawLanguage {
            pairs: lex.pairs.iter().map(|p| (p.male.clone(), p.female.clone())).collect(),
            neutral: lex.neutral.clone(),
            seeds: lex.seeds.clone(),
            occupation_pairs: lex
                .occupation_pairs
                .iter()
                .map(|o| (o.masculine.clone(), o.feminine.clone()))
                .collect(),
        };
        langs.insert(tag.to_string(), serde_json::to_value(raw).expect("plain data"));
    }
    let mut root = Map::new();
    root.insert("languages".into(), Value::Object(langs));
    Value::Object(root)
}
