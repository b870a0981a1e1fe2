use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{jsonl_lines, parse_line, write_jsonl, IoError};
use crate::suite::{
    AdjectiveSlot, AmbiguityKind, Bindings, GenderCondition, GenderKind, Referent, StereotypeCondition,
    StereotypeKind, TemplateFamily, TestInstance,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotRecord {
    pub slot_index: usize,
    pub lemma: String,
    pub referent: Referent,
    pub gender_kind: GenderKind,
    pub ambiguity_kind: AmbiguityKind,
    pub stereotype_kind: StereotypeKind,
    pub stereotype_cue: String,
}

/// One suite line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteRecord {
    pub id: String,
    pub family: TemplateFamily,
    pub source_text: String,
    pub slots: Vec<SlotRecord>,
    pub pair_id: Option<String>,
    pub bindings: Bindings,
}

impl From<&TestInstance> for SuiteRecord {
    fn from(inst: &TestInstance) -> Self {
        SuiteRecord {
            id: inst.id.clone(),
            family: inst.family,
            source_text: inst.source_text.clone(),
            slots: inst
                .slots
                .iter()
                .map(|s| SlotRecord {
                    slot_index: s.slot_index,
                    lemma: s.lemma.clone(),
                    referent: s.referent,
                    gender_kind: s.gender.kind(),
                    ambiguity_kind: s.gender.ambiguity(),
                    stereotype_kind: s.stereotype.kind(),
                    stereotype_cue: s.stereotype.cue().to_string(),
                })
                .collect(),
            pair_id: inst.pair_id.clone(),
            bindings: inst.bindings.clone(),
        }
    }
}

impl SuiteRecord {
    pub fn into_instance(self) -> Result<TestInstance, String> {
        let slots = self
            .slots
            .into_iter()
            .map(|s| {
                let gender = GenderCondition::from_parts(s.gender_kind, s.ambiguity_kind).ok_or_else(|| {
                    format!(
                        "slot {}: {:?} with ambiguity {:?}",
                        s.slot_index, s.gender_kind, s.ambiguity_kind
                    )
                })?;
                let stereotype = StereotypeCondition::from_parts(s.stereotype_kind, s.stereotype_cue)
                    .ok_or_else(|| format!("slot {}: stereotype cue must be empty iff kind is None", s.slot_index))?;
                Ok(AdjectiveSlot {
                    slot_index: s.slot_index,
                    lemma: s.lemma,
                    referent: s.referent,
                    gender,
                    stereotype,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(TestInstance {
            id: self.id,
            family: self.family,
            source_text: self.source_text,
            slots,
            pair_id: self.pair_id,
            bindings: self.bindings,
        })
    }
}

pub fn write_suite(w: impl std::io::Write, suite: &[TestInstance]) -> Result<(), IoError> {
    write_jsonl(w, suite.iter().map(SuiteRecord::from))
}

/// Parses a suite file. Instance ids must be unique.
pub fn parse_suite(text: &str) -> Result<Vec<TestInstance>, IoError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (line, raw) in jsonl_lines(text) {
        let record: SuiteRecord = parse_line(line, raw)?;
        if let Some(&first) = seen.get(&record.id) {
            return Err(IoError::DuplicateRecord {
                key: record.id,
                first,
                second: line,
            });
        }
        seen.insert(record.id.clone(), line);
        out.push(record.into_instance().map_err(|message| IoError::Parse { line, message })?);
    }
    Ok(out)
}
