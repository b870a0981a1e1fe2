use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{jsonl_lines, parse_line, write_jsonl, IoError};
use crate::classify::{Language, SlotScore};
use crate::metrics::MetricsDocument;

/// One system's translation of one instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranslationRecord {
    pub system: String,
    pub lang: Language,
    pub id: String,
    pub text: String,
}

/// A translation whose id is not in the suite. Kept out of scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrphanTranslation {
    pub line: usize,
    pub system: String,
    pub lang: Language,
    pub id: String,
}

#[derive(Debug, Clone, Default)]
pub struct Translations {
    pub records: Vec<TranslationRecord>,
    pub orphans: Vec<OrphanTranslation>,
}

impl Translations {
    /// Distinct (system, language) pairs in first-seen order.
    pub fn runs(&self) -> Vec<(String, Language)> {
        let mut out: Vec<(String, Language)> = Vec::new();
        for r in &self.records {
            if !out.iter().any(|(s, l)| *s == r.system && *l == r.lang) {
                out.push((r.system.clone(), r.lang));
            }
        }
        out
    }
}

/// Parses translations. With `known_ids`, records for other ids are set
/// aside as orphans rather than failing the parse.
pub fn parse_translations(text: &str, known_ids: Option<&HashSet<&str>>) -> Result<Translations, IoError> {
    let mut seen: HashMap<(String, Language, String), usize> = HashMap::new();
    let mut out = Translations::default();
    for (line, raw) in jsonl_lines(text) {
        let r: TranslationRecord = parse_line(line, raw)?;
        let key = (r.system.clone(), r.lang, r.id.clone());
        if let Some(&first) = seen.get(&key) {
            return Err(IoError::DuplicateRecord {
                key: format!("({}, {}, {})", r.system, r.lang, r.id),
                first,
                second: line,
            });
        }
        seen.insert(key, line);
        if known_ids.is_some_and(|ids| !ids.contains(r.id.as_str())) {
            out.orphans.push(OrphanTranslation {
                line,
                system: r.system,
                lang: r.lang,
                id: r.id,
            });
        } else {
            out.records.push(r);
        }
    }
    Ok(out)
}

pub fn write_translations(w: impl std::io::Write, records: &[TranslationRecord]) -> Result<(), IoError> {
    write_jsonl(w, records)
}

pub fn write_scores(w: impl std::io::Write, scores: &[SlotScore]) -> Result<(), IoError> {
    write_jsonl(w, scores)
}

/// Parses scores; an (instance, slot) pair may appear once.
pub fn parse_scores(text: &str) -> Result<Vec<SlotScore>, IoError> {
    let mut seen: HashMap<(String, usize), usize> = HashMap::new();
    let mut out = Vec::new();
    for (line, raw) in jsonl_lines(text) {
        let s: SlotScore = parse_line(line, raw)?;
        let key = (s.instance_id.clone(), s.slot_index);
        if let Some(&first) = seen.get(&key) {
            return Err(IoError::DuplicateRecord {
                key: format!("({}, slot {})", s.instance_id, s.slot_index),
                first,
                second: line,
            });
        }
        seen.insert(key, line);
        out.push(s);
    }
    Ok(out)
}

/// One metrics document per line.
pub fn write_metrics(w: impl std::io::Write, docs: &[MetricsDocument]) -> Result<(), IoError> {
    write_jsonl(w, docs)
}

pub fn parse_metrics(text: &str) -> Result<Vec<MetricsDocument>, IoError> {
    jsonl_lines(text).map(|(line, raw)| parse_line(line, raw)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE: &str = r#"{"system":"a","lang":"es","id":"T7-000001n","text":"Soy fuerte."}
{"system":"a","lang":"es","id":"T7-000002n","text":"Soy alto."}

{"system":"b","lang":"is","id":"T7-000001n","text":"Ég er varkár."}
"#;

    #[test]
    fn three_valid_lines() {
        let t = parse_translations(THREE, None).unwrap();
        assert_eq!(t.records.len(), 3);
        assert_eq!(t.runs(), vec![("a".to_string(), Language::Es), ("b".to_string(), Language::Is)]);
    }

    #[test]
    fn closed_language_set() {
        let err = parse_translations(r#"{"system":"a","lang":"fr","id":"x","text":"t"}"#, None).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn duplicate_names_both_lines() {
        let text = format!("{THREE}{}\n", THREE.lines().next().unwrap());
        match parse_translations(&text, None).unwrap_err() {
            IoError::DuplicateRecord { first, second, .. } => assert_eq!((first, second), (1, 5)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_ids_are_orphans() {
        let ids = HashSet::from(["T7-000001n"]);
        let t = parse_translations(THREE, Some(&ids)).unwrap();
        assert_eq!(t.records.len(), 2);
        assert_eq!(t.orphans.len(), 1);
        assert_eq!(t.orphans[0].line, 2);
    }
}
