//! Bilingual dictionaries: one `source<TAB>target` or `source target` pair
//! per line. The separator is detected from the first non-blank line.

use std::fs;
use std::path::Path;

use debias_embed_core::align::BilingualDictionary;
use log::warn;

use crate::error::{Error, Result};

/// Loads a dictionary; returns it with the repeated pairs that were dropped.
pub fn load_dictionary(
    path: impl AsRef<Path>,
    source_tag: &str,
    target_tag: &str,
) -> Result<(BilingualDictionary, Vec<(String, String)>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dictionary(&text, path, source_tag, target_tag)
}

pub fn parse_dictionary(
    text: &str,
    path: &Path,
    source_tag: &str,
    target_tag: &str,
) -> Result<(BilingualDictionary, Vec<(String, String)>)> {
    let separator = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(|l| if l.contains('\t') { '\t' } else { ' ' })
        .ok_or_else(|| Error::format(path, "empty dictionary"))?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(separator).filter(|p| !p.is_empty()).collect();
        match parts[..] {
            [s, t] if !s.contains(char::is_whitespace) && !t.contains(char::is_whitespace) => {
                entries.push((s.to_string(), t.to_string()))
            }
            _ => {
                return Err(Error::parse(
                    path,
                    i + 1,
                    format!("expected `source{}target`, got `{line}`", if separator == '\t' { "<TAB>" } else { " " }),
                ))
            }
        }
    }
    let (dict, dropped) = BilingualDictionary::new(source_tag, target_tag, entries)?;
    for (s, t) in &dropped {
        warn!("{}: duplicate pair `{s}` → `{t}` dropped", path.display());
    }
    Ok((dict, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<(BilingualDictionary, Vec<(String, String)>)> {
        parse_dictionary(text, Path::new("d.txt"), "en", "hi")
    }

    #[test]
    fn reads_tab_and_space_files() {
        assert_eq!(parse("a\tx\nb\ty\nc\tz\n").unwrap().0.len(), 3);
        assert_eq!(parse("a x\nb y\n").unwrap().0.len(), 2);
    }

    #[test]
    fn malformed_line_reports_its_number() {
        match parse("a x\nb y z\n").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        assert!(matches!(parse("a\tx\nb y\n").unwrap_err(), Error::Parse { line: 2, .. }));
        assert!(matches!(parse("\n\n").unwrap_err(), Error::Format { .. }));
    }

    #[test]
    fn duplicates_are_dropped() {
        let (d, dropped) = parse("a x\na x\n").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(dropped.len(), 1);
    }
}
