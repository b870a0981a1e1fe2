//! Independent re-check of the generator's balance contract.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{
    expand_template, group_key_of, AmbiguityKind, Gender, QuotaKey, Quotas, StereotypeKind,
    TemplateFamily, TestInstance,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationKind {
    CountMismatch,
    GenderImbalance,
    SpeakerPositionImbalance,
    StereotypeImbalance,
    UnpairedAmbiguous,
    MalformedInstance,
    Leakage,
    DuplicateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub family: Option<TemplateFamily>,
    pub instance_id: Option<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(family) = self.family {
            write!(f, " [{family}]")?;
        }
        if let Some(id) = &self.instance_id {
            write!(f, " {id}")?;
        }
        write!(f, ": {}", self.message)
    }
}

/// Per-family tallies. Gender counts are over determined slots; narrator
/// counts are instances; stereotype counts are keyed by speech-tag pronoun
/// (T5) or are the single `"-"` key (T7).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FamilyStats {
    pub instances: usize,
    pub slots: usize,
    pub by_condition: BTreeMap<QuotaKey, usize>,
    pub determined_feminine: usize,
    pub determined_masculine: usize,
    pub narrator_first: usize,
    pub narrator_second: usize,
    pub pronouns: BTreeMap<String, usize>,
    pub stereotypes: BTreeMap<String, (usize, usize)>,
}

#[derive(Debug, Clone, Default)]
pub struct BalanceDiagnostics {
    pub families: BTreeMap<TemplateFamily, FamilyStats>,
    pub violations: Vec<Violation>,
}

impl BalanceDiagnostics {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn slot_counts(&self) -> Quotas {
        let mut out = Quotas::new();
        for stats in self.families.values() {
            for (k, n) in &stats.by_condition {
                *out.entry(*k).or_default() += n;
            }
        }
        out
    }
}

const GENDERED_WORDS: [&str; 8] = ["he", "she", "him", "her", "his", "hers", "man", "woman"];

/// Checks a suite against the balance contract. With `expected` quotas,
/// every cell count must match exactly; without, only the splits are checked.
pub fn validate_balance(suite: &[TestInstance], expected: Option<&Quotas>) -> BalanceDiagnostics {
    let mut diag = BalanceDiagnostics::default();
    let mut v = Vec::new();
    let mut ids = BTreeSet::new();

    for inst in suite {
        if !ids.insert(inst.id.as_str()) {
            v.push(violation(ViolationKind::DuplicateId, inst, format!("id {} repeated", inst.id)));
        }
        check_instance(inst, &mut v);
        tally(inst, diag.families.entry(inst.family).or_default(), &mut v);
    }

    if let Some(expected) = expected {
        let actual = diag.slot_counts();
        for key in QuotaKey::ALL {
            let want = expected.get(&key).copied().unwrap_or(0);
            let got = actual.get(&key).copied().unwrap_or(0);
            if want != got {
                v.push(Violation {
                    kind: ViolationKind::CountMismatch,
                    family: Some(key.family()),
                    instance_id: None,
                    message: format!("{key}: {got} slots, expected {want}"),
                });
            }
        }
    }

    for (family, stats) in &diag.families {
        check_splits(*family, stats, &mut v);
    }
    check_pairing(suite, &mut v);

    diag.violations = v;
    diag
}

fn violation(kind: ViolationKind, inst: &TestInstance, message: String) -> Violation {
    Violation {
        kind,
        family: Some(inst.family),
        instance_id: Some(inst.id.clone()),
        message,
    }
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric() && c != '\'')
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
}

fn check_instance(inst: &TestInstance, v: &mut Vec<Violation>) {
    let malformed = |m: String| violation(ViolationKind::MalformedInstance, inst, m);
    if inst.slots.len() != inst.family.slots_per_instance() {
        v.push(malformed(format!(
            "{} slots, family has {}",
            inst.slots.len(),
            inst.family.slots_per_instance()
        )));
    }
    for (i, slot) in inst.slots.iter().enumerate() {
        if slot.slot_index != i {
            v.push(malformed(format!("slot {i} has index {}", slot.slot_index)));
        }
        if !inst.source_text.contains(slot.lemma.as_str()) {
            v.push(malformed(format!("lemma {:?} not in source text", slot.lemma)));
        }
        if QuotaKey::of_slot(inst.family, slot).is_none() {
            v.push(malformed(format!("slot {i} condition impossible for family")));
        }
        let omission_ok = matches!(
            inst.family,
            TemplateFamily::OnePersonPartial
                | TemplateFamily::TwoPersonPartial
                | TemplateFamily::AdverbStereotype
        );
        match slot.gender.ambiguity() {
            AmbiguityKind::Omission if !omission_ok => {
                v.push(malformed(format!("slot {i}: omission outside T3/T4/T7")))
            }
            AmbiguityKind::Active if inst.family != TemplateFamily::CharStereotype => {
                v.push(malformed(format!("slot {i}: active ambiguity outside T5")))
            }
            _ => {}
        }
    }
    if inst.source_text.contains(['{', '}', '[', ']']) {
        v.push(malformed("residual template syntax".into()));
    }
    if group_key_of(&inst.id).is_none() {
        v.push(malformed(format!("id {:?} has no group key", inst.id)));
    }

    check_leakage(inst, v);
}

fn check_leakage(inst: &TestInstance, v: &mut Vec<Violation>) {
    let ambiguous = inst.slots.iter().any(|s| !s.gender.is_determined());
    if !ambiguous {
        return;
    }
    match inst.family {
        TemplateFamily::CharStereotype | TemplateFamily::AdverbStereotype => {
            if let Some(w) = words(&inst.source_text).find(|w| GENDERED_WORDS.contains(&w.as_str())) {
                v.push(violation(ViolationKind::Leakage, inst, format!("gendered word {w:?}")));
            }
        }
        TemplateFamily::OnePersonPartial | TemplateFamily::TwoPersonPartial => {
            // Flipping the narrator's gender must not change a single byte.
            let Some(narrator) = inst.bindings.get("narrator") else {
                return;
            };
            let mut flipped = inst.bindings.clone();
            let key = if narrator == "first" { "first_pronoun" } else { "second_pronoun" };
            let Some(g) = flipped.get(key).and_then(|p| match p.as_str() {
                "she" => Some(Gender::Feminine),
                "he" => Some(Gender::Masculine),
                _ => None,
            }) else {
                return;
            };
            let g = g.opposite();
            flipped.insert(key.into(), g.pronoun().into());
            if narrator == "first" {
                flipped.insert("first_character".into(), g.noun().into());
            }
            match expand_template(inst.family, &flipped) {
                Ok(other) if other.source_text == inst.source_text => {}
                Ok(_) => v.push(violation(
                    ViolationKind::Leakage,
                    inst,
                    "narrator gender changes the source text".into(),
                )),
                Err(e) => v.push(violation(ViolationKind::MalformedInstance, inst, e.to_string())),
            }
        }
        _ => {}
    }
}

fn tally(inst: &TestInstance, stats: &mut FamilyStats, v: &mut Vec<Violation>) {
    stats.instances += 1;
    stats.slots += inst.slots.len();
    for slot in &inst.slots {
        if let Some(key) = QuotaKey::of_slot(inst.family, slot) {
            *stats.by_condition.entry(key).or_default() += 1;
        }
        match slot.gender.gender() {
            Some(Gender::Feminine) => stats.determined_feminine += 1,
            Some(Gender::Masculine) => stats.determined_masculine += 1,
            None => {}
        }
    }
    match inst.family {
        TemplateFamily::OnePersonPartial | TemplateFamily::TwoPersonPartial => {
            match inst.bindings.get("narrator").map(String::as_str) {
                Some("first") => stats.narrator_first += 1,
                Some("second") => stats.narrator_second += 1,
                _ => v.push(violation(
                    ViolationKind::MalformedInstance,
                    inst,
                    "missing narrator binding".into(),
                )),
            }
        }
        TemplateFamily::CharStereotype | TemplateFamily::AdverbStereotype => {
            let key = if inst.family == TemplateFamily::CharStereotype {
                inst.bindings.get("pronoun").cloned().unwrap_or_default()
            } else {
                "-".to_string()
            };
            *stats.pronouns.entry(key.clone()).or_default() += 1;
            let cell = stats.stereotypes.entry(key).or_default();
            for slot in &inst.slots {
                match slot.stereotype.kind() {
                    StereotypeKind::Masculine => cell.0 += 1,
                    StereotypeKind::Feminine => cell.1 += 1,
                    StereotypeKind::None => {}
                }
            }
        }
        _ => {}
    }
}

fn check_splits(family: TemplateFamily, stats: &FamilyStats, v: &mut Vec<Violation>) {
    let mut flag = |kind, message: String| {
        v.push(Violation {
            kind,
            family: Some(family),
            instance_id: None,
            message,
        })
    };
    // One instance's worth of determined slots of a single gender.
    let gender_unit = match family {
        TemplateFamily::OnePersonKnown | TemplateFamily::OnePersonPartial => 2,
        TemplateFamily::TwoPersonKnown | TemplateFamily::TwoPersonPartial => 4,
        _ => 1,
    };
    let (f, m) = (stats.determined_feminine, stats.determined_masculine);
    if f.abs_diff(m) > gender_unit {
        flag(
            ViolationKind::GenderImbalance,
            format!("{f} feminine vs {m} masculine determined slots"),
        );
    }
    let (first, second) = (stats.narrator_first, stats.narrator_second);
    if first.abs_diff(second) > 1 {
        flag(
            ViolationKind::SpeakerPositionImbalance,
            format!("narrator is first speaker in {first} instances, second in {second}"),
        );
    }
    if family == TemplateFamily::CharStereotype {
        let he = stats.pronouns.get("he").copied().unwrap_or(0);
        let she = stats.pronouns.get("she").copied().unwrap_or(0);
        if he.abs_diff(she) > 1 {
            flag(
                ViolationKind::GenderImbalance,
                format!("{he} \"he\" vs {she} \"she\" instances"),
            );
        }
    }
    for (key, (sm, sf)) in &stats.stereotypes {
        let tolerance = usize::from(family == TemplateFamily::CharStereotype);
        if sm.abs_diff(*sf) > tolerance {
            let scope = if key == "-" { String::new() } else { format!(" with {key:?}") };
            flag(
                ViolationKind::StereotypeImbalance,
                format!("{sm} masculine vs {sf} feminine stereotype cues{scope}"),
            );
        }
    }
}

/// Every ambiguous slot of T3/T4/T5 needs a determined slot with the same
/// index and lemma elsewhere in its pairing group.
fn check_pairing(suite: &[TestInstance], v: &mut Vec<Violation>) {
    let mut determined: BTreeSet<(&str, usize, &str)> = BTreeSet::new();
    for inst in suite {
        let Some(group) = inst.pair_id.as_deref() else { continue };
        for slot in inst.slots.iter().filter(|s| s.gender.is_determined()) {
            determined.insert((group, slot.slot_index, slot.lemma.as_str()));
        }
    }
    for inst in suite {
        if !matches!(
            inst.family,
            TemplateFamily::OnePersonPartial
                | TemplateFamily::TwoPersonPartial
                | TemplateFamily::CharStereotype
        ) {
            continue;
        }
        if inst.pair_id.is_some() && inst.pair_id.as_deref() != inst.group_key() {
            v.push(violation(
                ViolationKind::MalformedInstance,
                inst,
                "pair_id does not match the id's group key".into(),
            ));
        }
        let group = inst.pair_id.as_deref().unwrap_or("");
        for slot in inst.slots.iter().filter(|s| !s.gender.is_determined()) {
            if !determined.contains(&(group, slot.slot_index, slot.lemma.as_str())) {
                v.push(violation(
                    ViolationKind::UnpairedAmbiguous,
                    inst,
                    format!("slot {} ({}) has no determined partner", slot.slot_index, slot.lemma),
                ));
            }
        }
    }
}
