use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::{ClassifyError, Language};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternKind {
    /// `stem(x/y)` or `stemx/y`, e.g. `musculos(o/a)`.
    #[serde(rename = "slash")]
    SlashSuffix,
    /// `stem(s)`: the stem alone and stem + s, e.g. `huglítil(l)`.
    #[serde(rename = "paren")]
    ParenSuffix,
    /// `stem@` standing for stem + each alternative.
    #[serde(rename = "at")]
    AtSign,
}

impl PatternKind {
    pub fn code(self) -> &'static str {
        match self {
            PatternKind::SlashSuffix => "slash",
            PatternKind::ParenSuffix => "paren",
            PatternKind::AtSign => "at",
        }
    }

    pub fn parse(code: &str) -> Option<Self> {
        match code {
            "slash" => Some(PatternKind::SlashSuffix),
            "paren" => Some(PatternKind::ParenSuffix),
            "at" => Some(PatternKind::AtSign),
            _ => None,
        }
    }
}

/// A gender-annotation convention. `template` holds the suffix
/// alternatives: `o/a` for slash and at patterns, `l` or `ur` for paren.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphPattern {
    pub language: Language,
    pub kind: PatternKind,
    pub template: String,
    alternatives: Vec<String>,
}

impl MorphPattern {
    pub fn new(language: Language, kind: PatternKind, template: &str) -> Result<Self, ClassifyError> {
        let template: String = template.trim().nfc().collect::<String>().to_lowercase();
        let bad = |reason: &str| ClassifyError::InvalidEntry {
            row: 0,
            reason: format!("{} pattern {template:?}: {reason}", kind.code()),
        };
        if template.is_empty() || template.contains(['(', ')', '@']) || template.contains(char::is_whitespace) {
            return Err(bad("must be a bare suffix"));
        }
        let alternatives: Vec<String> = match kind {
            PatternKind::SlashSuffix | PatternKind::AtSign => {
                let alts: Vec<String> = template.split('/').map(str::to_string).collect();
                if alts.len() < 2 || alts.iter().any(String::is_empty) {
                    return Err(bad("needs at least two non-empty alternatives separated by '/'"));
                }
                alts
            }
            PatternKind::ParenSuffix => {
                if template.contains('/') {
                    return Err(bad("paren suffix takes a single alternative"));
                }
                vec![String::new(), template.clone()]
            }
        };
        Ok(MorphPattern {
            language,
            kind,
            template,
            alternatives,
        })
    }

    /// Candidate plain forms an annotated token stands for. `token` must
    /// already be lowercased. Empty when the token does not carry this
    /// pattern or the stem would be empty.
    pub fn expand(&self, token: &str) -> Vec<String> {
        let stem = match self.kind {
            PatternKind::SlashSuffix => {
                let paren = format!("({})", self.template);
                token
                    .strip_suffix(paren.as_str())
                    .or_else(|| token.strip_suffix(self.template.as_str()))
            }
            PatternKind::ParenSuffix => token.strip_suffix(format!("({})", self.template).as_str()),
            PatternKind::AtSign => token.strip_suffix('@'),
        };
        match stem {
            Some(stem) if stem.chars().last().is_some_and(char::is_alphabetic) => self
                .alternatives
                .iter()
                .map(|alt| format!("{stem}{alt}"))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn rule(&self) -> String {
        format!("pattern:{}:{}", self.kind.code(), self.template)
    }
}
