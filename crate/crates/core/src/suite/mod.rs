//! Paired determined/ambiguous test-suite generation.
//!
//! Six dialogue template families are expanded over a [`SuiteManifest`]
//! into [`TestInstance`]s. Every instance carries the adjective slots whose
//! translations get gender-scored, annotated with the gender condition of
//! the slot's referent and any stereotype cue present in the source.

mod balance;
mod generate;
mod manifest;
mod template;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use balance::{validate_balance, BalanceDiagnostics, FamilyStats, Violation, ViolationKind};
pub use generate::{generate_suite, GeneratedSuite, GenerationWarning};
pub use manifest::{
    AdverbLists, CharacterDescriptor, DescriptorPair, QuotaKey, Quotas, SuiteManifest,
};
pub use template::expand_template;

/// Template variable name to chosen value.
pub type Bindings = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateFamily {
    /// One referent, gender resolved by the narration.
    #[serde(rename = "T1_OnePersonKnown")]
    OnePersonKnown,
    /// Two referents, both resolved.
    #[serde(rename = "T2_TwoPersonKnown")]
    TwoPersonKnown,
    /// One referent; a first-person narrator may hide the referent's gender.
    #[serde(rename = "T3_OnePersonPartial")]
    OnePersonPartial,
    /// Two referents; the narrator's own adjectives are ambiguous.
    #[serde(rename = "T4_TwoPersonPartial")]
    TwoPersonPartial,
    /// Stereotyped character descriptors with a he/she/they speech tag.
    #[serde(rename = "T5_CharStereotype")]
    CharStereotype,
    /// First-person speech tag with an optional stereotyped adverb.
    #[serde(rename = "T7_AdverbStereotype")]
    AdverbStereotype,
}

impl TemplateFamily {
    pub const ALL: [TemplateFamily; 6] = [
        TemplateFamily::OnePersonKnown,
        TemplateFamily::TwoPersonKnown,
        TemplateFamily::OnePersonPartial,
        TemplateFamily::TwoPersonPartial,
        TemplateFamily::CharStereotype,
        TemplateFamily::AdverbStereotype,
    ];

    /// Short tag used in instance ids.
    pub fn tag(self) -> &'static str {
        match self {
            TemplateFamily::OnePersonKnown => "T1",
            TemplateFamily::TwoPersonKnown => "T2",
            TemplateFamily::OnePersonPartial => "T3",
            TemplateFamily::TwoPersonPartial => "T4",
            TemplateFamily::CharStereotype => "T5",
            TemplateFamily::AdverbStereotype => "T7",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.tag() == tag)
    }

    pub fn slots_per_instance(self) -> usize {
        match self {
            TemplateFamily::OnePersonKnown | TemplateFamily::OnePersonPartial => 2,
            TemplateFamily::TwoPersonKnown | TemplateFamily::TwoPersonPartial => 4,
            TemplateFamily::CharStereotype | TemplateFamily::AdverbStereotype => 1,
        }
    }

    /// Families used for the response to ambiguity by omission.
    pub fn is_omission_family(self) -> bool {
        matches!(
            self,
            TemplateFamily::OnePersonKnown
                | TemplateFamily::TwoPersonKnown
                | TemplateFamily::OnePersonPartial
                | TemplateFamily::TwoPersonPartial
        )
    }
}

impl fmt::Display for TemplateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Binary gender as declared by template bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Feminine,
    Masculine,
}

impl Gender {
    pub fn pronoun(self) -> &'static str {
        match self {
            Gender::Feminine => "she",
            Gender::Masculine => "he",
        }
    }

    pub fn noun(self) -> &'static str {
        match self {
            Gender::Feminine => "woman",
            Gender::Masculine => "man",
        }
    }

    pub fn opposite(self) -> Gender {
        match self {
            Gender::Feminine => Gender::Masculine,
            Gender::Masculine => Gender::Feminine,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Feminine => "feminine",
            Gender::Masculine => "masculine",
        }
    }

    pub fn parse(s: &str) -> Option<Gender> {
        match s {
            "feminine" | "f" => Some(Gender::Feminine),
            "masculine" | "m" => Some(Gender::Masculine),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenderKind {
    DeterminedMasculine,
    DeterminedFeminine,
    Ambiguous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AmbiguityKind {
    None,
    /// Gender hidden behind a first- or second-person pronoun.
    Omission,
    /// Gender deliberately withheld with singular "they".
    Active,
}

/// Gender condition of one slot's referent. Construct through
/// [`GenderCondition::determined`] / [`GenderCondition::ambiguous`] so that
/// `ambiguity == None` exactly when the gender is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenderCondition {
    kind: GenderKind,
    ambiguity: AmbiguityKind,
}

impl GenderCondition {
    pub fn determined(gender: Gender) -> Self {
        let kind = match gender {
            Gender::Feminine => GenderKind::DeterminedFeminine,
            Gender::Masculine => GenderKind::DeterminedMasculine,
        };
        GenderCondition {
            kind,
            ambiguity: AmbiguityKind::None,
        }
    }

    /// Returns `None` for `AmbiguityKind::None`.
    pub fn ambiguous(ambiguity: AmbiguityKind) -> Option<Self> {
        (ambiguity != AmbiguityKind::None).then_some(GenderCondition {
            kind: GenderKind::Ambiguous,
            ambiguity,
        })
    }

    /// Rebuilds a condition from its two wire fields, rejecting invalid mixes.
    pub fn from_parts(kind: GenderKind, ambiguity: AmbiguityKind) -> Option<Self> {
        match (kind, ambiguity) {
            (GenderKind::Ambiguous, AmbiguityKind::None) => None,
            (GenderKind::Ambiguous, a) => Self::ambiguous(a),
            (_, AmbiguityKind::None) => Some(GenderCondition {
                kind,
                ambiguity: AmbiguityKind::None,
            }),
            _ => None,
        }
    }

    pub fn kind(&self) -> GenderKind {
        self.kind
    }

    pub fn ambiguity(&self) -> AmbiguityKind {
        self.ambiguity
    }

    pub fn is_determined(&self) -> bool {
        self.kind != GenderKind::Ambiguous
    }

    pub fn gender(&self) -> Option<Gender> {
        match self.kind {
            GenderKind::DeterminedFeminine => Some(Gender::Feminine),
            GenderKind::DeterminedMasculine => Some(Gender::Masculine),
            GenderKind::Ambiguous => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StereotypeKind {
    None,
    Masculine,
    Feminine,
}

impl From<Gender> for StereotypeKind {
    fn from(g: Gender) -> Self {
        match g {
            Gender::Feminine => StereotypeKind::Feminine,
            Gender::Masculine => StereotypeKind::Masculine,
        }
    }
}

/// Stereotype cue attached to a slot. The cue is empty iff `kind` is `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StereotypeCondition {
    kind: StereotypeKind,
    cue: String,
}

impl StereotypeCondition {
    pub fn none() -> Self {
        StereotypeCondition {
            kind: StereotypeKind::None,
            cue: String::new(),
        }
    }

    pub fn cued(gender: Gender, cue: impl Into<String>) -> Self {
        StereotypeCondition {
            kind: gender.into(),
            cue: cue.into(),
        }
    }

    pub fn from_parts(kind: StereotypeKind, cue: String) -> Option<Self> {
        match kind {
            StereotypeKind::None if cue.is_empty() => Some(Self::none()),
            StereotypeKind::None => None,
            _ if cue.is_empty() => None,
            _ => Some(StereotypeCondition { kind, cue }),
        }
    }

    pub fn kind(&self) -> StereotypeKind {
        self.kind
    }

    pub fn cue(&self) -> &str {
        &self.cue
    }
}

/// Who an adjective describes, relative to the utterance containing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Referent {
    Speaker,
    Listener,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjectiveSlot {
    pub slot_index: usize,
    pub lemma: String,
    pub referent: Referent,
    pub gender: GenderCondition,
    pub stereotype: StereotypeCondition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestInstance {
    pub id: String,
    pub family: TemplateFamily,
    pub source_text: String,
    pub slots: Vec<AdjectiveSlot>,
    /// Shared by all members of a determined/ambiguous pairing group.
    pub pair_id: Option<String>,
    pub bindings: Bindings,
}

impl TestInstance {
    /// Pairing group key recovered from the id (`T3-000012d` -> `T3-000012`).
    pub fn group_key(&self) -> Option<&str> {
        group_key_of(&self.id)
    }
}

/// Splits `{tag}-{digits}{suffix}` and returns the `{tag}-{digits}` prefix.
pub fn group_key_of(id: &str) -> Option<&str> {
    let dash = id.find('-')?;
    let digits = id[dash + 1..]
        .bytes()
        .take_while(u8::is_ascii_digit)
        .count();
    (digits > 0).then(|| &id[..dash + 1 + digits])
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuiteError {
    #[error("{family}: missing binding `{variable}`")]
    MissingBinding {
        family: TemplateFamily,
        variable: String,
    },
    #[error("inconsistent binding `{variable}` = {value:?}: {reason}")]
    InconsistentBinding {
        variable: String,
        value: String,
        reason: String,
    },
    #[error("quota {quota} cannot be met: {reason} (limited by `{limiting}`)")]
    QuotaInfeasible {
        quota: QuotaKey,
        limiting: String,
        reason: String,
    },
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
}
