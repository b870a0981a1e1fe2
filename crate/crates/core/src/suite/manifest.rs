use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AdjectiveSlot, StereotypeKind, SuiteError, TemplateFamily};

/// One (family, condition) cell of the quota table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuotaKey {
    #[serde(rename = "T1-Det")]
    T1Det,
    #[serde(rename = "T2-Det")]
    T2Det,
    #[serde(rename = "T3-Det")]
    T3Det,
    #[serde(rename = "T3-Amb")]
    T3Amb,
    #[serde(rename = "T4-Det")]
    T4Det,
    #[serde(rename = "T4-Amb")]
    T4Amb,
    #[serde(rename = "T5-Det")]
    T5Det,
    #[serde(rename = "T5-Amb")]
    T5Amb,
    #[serde(rename = "T7-None")]
    T7None,
    #[serde(rename = "T7-StereoM")]
    T7StereoM,
    #[serde(rename = "T7-StereoF")]
    T7StereoF,
}

impl QuotaKey {
    pub const ALL: [QuotaKey; 11] = [
        QuotaKey::T1Det,
        QuotaKey::T2Det,
        QuotaKey::T3Det,
        QuotaKey::T3Amb,
        QuotaKey::T4Det,
        QuotaKey::T4Amb,
        QuotaKey::T5Det,
        QuotaKey::T5Amb,
        QuotaKey::T7None,
        QuotaKey::T7StereoM,
        QuotaKey::T7StereoF,
    ];

    pub fn family(self) -> TemplateFamily {
        match self {
            QuotaKey::T1Det => TemplateFamily::OnePersonKnown,
            QuotaKey::T2Det => TemplateFamily::TwoPersonKnown,
            QuotaKey::T3Det | QuotaKey::T3Amb => TemplateFamily::OnePersonPartial,
            QuotaKey::T4Det | QuotaKey::T4Amb => TemplateFamily::TwoPersonPartial,
            QuotaKey::T5Det | QuotaKey::T5Amb => TemplateFamily::CharStereotype,
            QuotaKey::T7None | QuotaKey::T7StereoM | QuotaKey::T7StereoF => {
                TemplateFamily::AdverbStereotype
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QuotaKey::T1Det => "T1-Det",
            QuotaKey::T2Det => "T2-Det",
            QuotaKey::T3Det => "T3-Det",
            QuotaKey::T3Amb => "T3-Amb",
            QuotaKey::T4Det => "T4-Det",
            QuotaKey::T4Amb => "T4-Amb",
            QuotaKey::T5Det => "T5-Det",
            QuotaKey::T5Amb => "T5-Amb",
            QuotaKey::T7None => "T7-None",
            QuotaKey::T7StereoM => "T7-StereoM",
            QuotaKey::T7StereoF => "T7-StereoF",
        }
    }

    /// The quota cell a slot counts towards. `None` for slots no template
    /// can produce (e.g. an ambiguous T1 slot).
    pub fn of_slot(family: TemplateFamily, slot: &AdjectiveSlot) -> Option<QuotaKey> {
        use TemplateFamily::*;
        let det = slot.gender.is_determined();
        Some(match (family, det) {
            (OnePersonKnown, true) => QuotaKey::T1Det,
            (TwoPersonKnown, true) => QuotaKey::T2Det,
            (OnePersonPartial, true) => QuotaKey::T3Det,
            (OnePersonPartial, false) => QuotaKey::T3Amb,
            (TwoPersonPartial, true) => QuotaKey::T4Det,
            (TwoPersonPartial, false) => QuotaKey::T4Amb,
            (CharStereotype, true) => QuotaKey::T5Det,
            (CharStereotype, false) => QuotaKey::T5Amb,
            (AdverbStereotype, false) => match slot.stereotype.kind() {
                StereotypeKind::None => QuotaKey::T7None,
                StereotypeKind::Masculine => QuotaKey::T7StereoM,
                StereotypeKind::Feminine => QuotaKey::T7StereoF,
            },
            _ => return None,
        })
    }
}

impl fmt::Display for QuotaKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub type Quotas = BTreeMap<QuotaKey, usize>;

/// A stereotyped character description, `adjective occupation`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterDescriptor {
    pub adjective: String,
    pub occupation: String,
}

impl fmt::Display for CharacterDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.adjective, self.occupation)
    }
}

/// Opposite-stereotype characters that appear together in one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorPair {
    pub feminine: CharacterDescriptor,
    pub masculine: CharacterDescriptor,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdverbLists {
    #[serde(default)]
    pub masculine: Vec<String>,
    #[serde(default)]
    pub feminine: Vec<String>,
}

/// Data a suite is generated from. Lists are used in file order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub adjectives: Vec<String>,
    #[serde(default)]
    pub descriptor_pairs: Vec<DescriptorPair>,
    #[serde(default)]
    pub adverbs: AdverbLists,
    pub quotas: Quotas,
    #[serde(default)]
    pub seed: u64,
}

impl SuiteManifest {
    pub fn from_json(text: &str) -> Result<Self, SuiteError> {
        let manifest: SuiteManifest =
            serde_json::from_str(text).map_err(|e| SuiteError::InvalidManifest(e.to_string()))?;
        manifest.check()?;
        Ok(manifest)
    }

    pub fn quota(&self, key: QuotaKey) -> usize {
        self.quotas.get(&key).copied().unwrap_or(0)
    }

    pub fn total_slots(&self) -> usize {
        self.quotas.values().sum()
    }

    /// Structural checks that do not depend on quota feasibility.
    pub fn check(&self) -> Result<(), SuiteError> {
        let invalid = |m: String| Err(SuiteError::InvalidManifest(m));
        let mut seen = BTreeSet::new();
        for adj in &self.adjectives {
            if adj.is_empty() || adj.chars().any(|c| c.is_whitespace() || c == '"') {
                return invalid(format!("adjective {adj:?} must be a single bare token"));
            }
            if !seen.insert(adj.as_str()) {
                return invalid(format!("adjective {adj:?} listed twice"));
            }
        }
        for pair in &self.descriptor_pairs {
            for d in [&pair.feminine, &pair.masculine] {
                if d.adjective.trim().is_empty() || d.occupation.trim().is_empty() {
                    return invalid(format!("descriptor {d:?} needs an adjective and an occupation"));
                }
            }
            if pair.feminine == pair.masculine {
                return invalid(format!(
                    "descriptor pair uses {} for both stereotypes",
                    pair.feminine
                ));
            }
        }
        for adverb in self.adverbs.masculine.iter().chain(&self.adverbs.feminine) {
            if adverb.trim().is_empty() {
                return invalid("empty adverb".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quota_keys_serialize_as_cell_names() {
        let mut q = Quotas::new();
        q.insert(QuotaKey::T7StereoF, 390);
        q.insert(QuotaKey::T1Det, 2400);
        assert_eq!(
            serde_json::to_string(&q).unwrap(),
            r#"{"T1-Det":2400,"T7-StereoF":390}"#
        );
        for k in QuotaKey::ALL {
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
    }

    #[test]
    fn rejects_duplicate_adjectives() {
        let err = SuiteManifest::from_json(
            r#"{"adjectives": ["fit", "fit"], "quotas": {}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SuiteError::InvalidManifest(_)));
    }

    #[test]
    fn rejects_same_descriptor_for_both_stereotypes() {
        let err = SuiteManifest::from_json(
            r#"{"adjectives": ["fit"], "quotas": {},
                "descriptor_pairs": [{"feminine": {"adjective": "tall", "occupation": "chef"},
                                      "masculine": {"adjective": "tall", "occupation": "chef"}}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, SuiteError::InvalidManifest(_)));
    }
}
