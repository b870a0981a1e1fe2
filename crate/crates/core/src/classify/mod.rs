//! Dictionary-driven gender classification of translated adjectives.
//!
//! A translated slot is labeled masculine, feminine, one of five neutral
//! strategies, or unmatched, using per-language lexicon rows, annotation
//! patterns such as `stem(o/a)`, and alternative phrases.

mod lexicon;
mod matcher;
mod normalize;
mod pattern;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lexicon::{load_lexicon, AltPhraseEntry, AltPhrases, Lexicon, LexiconEntry, Resources};
pub use matcher::{classify_instance, classify_slot, RULE_PRIORITY};
pub use normalize::normalize;
pub use pattern::{MorphPattern, PatternKind};

/// Target languages. Closed set: unknown codes are rejected on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Is,
    Cs,
    Es,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::Is, Language::Cs, Language::Es];

    pub fn code(self) -> &'static str {
        match self {
            Language::Is => "is",
            Language::Cs => "cs",
            Language::Es => "es",
        }
    }

    pub fn has_neuter(self) -> bool {
        !matches!(self, Language::Es)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Language {
    type Err = ClassifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "is" => Ok(Language::Is),
            "cs" => Ok(Language::Cs),
            "es" => Ok(Language::Es),
            _ => Err(ClassifyError::UnknownLanguage(s.to_string())),
        }
    }
}

/// Gender class of one lexicon surface form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FormGender {
    #[serde(rename = "m")]
    MasculineOnly,
    #[serde(rename = "f")]
    FeminineOnly,
    #[serde(rename = "neu")]
    NeuterCase,
    /// Identical in the masculine and feminine.
    #[serde(rename = "common")]
    CommonForm,
}

impl FormGender {
    pub fn code(self) -> &'static str {
        match self {
            FormGender::MasculineOnly => "m",
            FormGender::FeminineOnly => "f",
            FormGender::NeuterCase => "neu",
            FormGender::CommonForm => "common",
        }
    }

    pub fn parse(code: &str) -> Option<Self> {
        match code {
            "m" => Some(FormGender::MasculineOnly),
            "f" => Some(FormGender::FeminineOnly),
            "neu" => Some(FormGender::NeuterCase),
            "common" => Some(FormGender::CommonForm),
            _ => None,
        }
    }

    pub fn label(self) -> GenderLabel {
        match self {
            FormGender::MasculineOnly => GenderLabel::Masculine,
            FormGender::FeminineOnly => GenderLabel::Feminine,
            FormGender::NeuterCase => GenderLabel::NeuterCase,
            FormGender::CommonForm => GenderLabel::CommonForm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderLabel {
    #[serde(rename = "M")]
    Masculine,
    #[serde(rename = "F")]
    Feminine,
    /// N1: same form in both genders.
    #[serde(rename = "N1")]
    CommonForm,
    /// N2: grammatical neuter.
    #[serde(rename = "N2")]
    NeuterCase,
    /// N3: noun phrase or other part of speech.
    #[serde(rename = "N3")]
    AltPartOfSpeech,
    /// N4: English adjective left in place.
    #[serde(rename = "N4")]
    SourceCopy,
    /// N5: annotated multi-gender form such as `musculos(o/a)`.
    #[serde(rename = "N5")]
    AltMorphology,
    Unmatched,
}

impl GenderLabel {
    pub const ALL: [GenderLabel; 8] = [
        GenderLabel::Masculine,
        GenderLabel::Feminine,
        GenderLabel::CommonForm,
        GenderLabel::NeuterCase,
        GenderLabel::AltPartOfSpeech,
        GenderLabel::SourceCopy,
        GenderLabel::AltMorphology,
        GenderLabel::Unmatched,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GenderLabel::Masculine => "M",
            GenderLabel::Feminine => "F",
            GenderLabel::CommonForm => "N1",
            GenderLabel::NeuterCase => "N2",
            GenderLabel::AltPartOfSpeech => "N3",
            GenderLabel::SourceCopy => "N4",
            GenderLabel::AltMorphology => "N5",
            GenderLabel::Unmatched => "Unmatched",
        }
    }

    /// 0-based strategy index for N1..N5.
    pub fn neutral_index(self) -> Option<usize> {
        match self {
            GenderLabel::CommonForm => Some(0),
            GenderLabel::NeuterCase => Some(1),
            GenderLabel::AltPartOfSpeech => Some(2),
            GenderLabel::SourceCopy => Some(3),
            GenderLabel::AltMorphology => Some(4),
            _ => None,
        }
    }

    pub fn is_neutral(self) -> bool {
        self.neutral_index().is_some()
    }
}

impl fmt::Display for GenderLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification of one slot of one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotScore {
    pub instance_id: String,
    pub slot_index: usize,
    pub label: GenderLabel,
    /// Translation text that triggered the label; empty when unmatched.
    pub matched_text: String,
    /// Rule that fired, e.g. `lexicon:fuerte/common` or `pattern:slash:o/a`.
    pub rule: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("unknown language {0:?} (expected is, cs or es)")]
    UnknownLanguage(String),
    #[error("lexicon conflict for {lemma:?} form {form:?}: rows {rows:?}")]
    LexiconConflict {
        lemma: String,
        form: String,
        /// (1-based row, declared gender) of every conflicting row.
        rows: Vec<(usize, FormGender)>,
    },
    #[error("invalid entry at row {row}: {reason}")]
    InvalidEntry { row: usize, reason: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}
