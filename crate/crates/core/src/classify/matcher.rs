use std::collections::BTreeSet;

use super::normalize::{is_annotated, normalize};
use super::{GenderLabel, Resources, SlotScore};
use crate::suite::{AdjectiveSlot, TestInstance};

/// Rule classes in the order they are tried. Within a class the earliest
/// unconsumed token position wins, then registration order.
pub const RULE_PRIORITY: [&str; 4] = ["lexicon", "pattern", "alt", "copy"];

struct Hit {
    label: GenderLabel,
    positions: std::ops::Range<usize>,
    rule: String,
}

/// Labels one slot against a normalized translation, consuming the matched
/// token positions.
pub fn classify_slot(
    instance_id: &str,
    slot: &AdjectiveSlot,
    tokens: &[String],
    res: &Resources,
    consumed: &mut BTreeSet<usize>,
) -> SlotScore {
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let free = |p: &usize| !consumed.contains(p);
    let hit = lexicon_hit(slot, &lower, res, &free)
        .or_else(|| pattern_hit(slot, &lower, res, &free))
        .or_else(|| alt_hit(slot, &lower, res, &free))
        .or_else(|| copy_hit(slot, &lower, &free));

    match hit {
        Some(hit) => {
            consumed.extend(hit.positions.clone());
            SlotScore {
                instance_id: instance_id.to_string(),
                slot_index: slot.slot_index,
                label: hit.label,
                matched_text: tokens[hit.positions].join(" "),
                rule: hit.rule,
            }
        }
        None => SlotScore {
            instance_id: instance_id.to_string(),
            slot_index: slot.slot_index,
            label: GenderLabel::Unmatched,
            matched_text: String::new(),
            rule: String::new(),
        },
    }
}

fn lexicon_hit(
    slot: &AdjectiveSlot,
    lower: &[String],
    res: &Resources,
    free: &impl Fn(&usize) -> bool,
) -> Option<Hit> {
    (0..lower.len()).filter(free).find_map(|p| {
        res.lexicon.lookup(&slot.lemma, &lower[p]).map(|e| Hit {
            label: e.gender.label(),
            positions: p..p + 1,
            rule: e.rule(),
        })
    })
}

fn pattern_hit(
    slot: &AdjectiveSlot,
    lower: &[String],
    res: &Resources,
    free: &impl Fn(&usize) -> bool,
) -> Option<Hit> {
    (0..lower.len())
        .filter(free)
        .filter(|&p| is_annotated(&lower[p]))
        .find_map(|p| {
            res.patterns.iter().find_map(|pat| {
                pat.expand(&lower[p])
                    .iter()
                    .any(|form| res.lexicon.lookup(&slot.lemma, form).is_some())
                    .then(|| Hit {
                        label: GenderLabel::AltMorphology,
                        positions: p..p + 1,
                        rule: pat.rule(),
                    })
            })
        })
}

fn alt_hit(
    slot: &AdjectiveSlot,
    lower: &[String],
    res: &Resources,
    free: &impl Fn(&usize) -> bool,
) -> Option<Hit> {
    (0..lower.len()).filter(free).find_map(|start| {
        res.alt_phrases.for_lemma(&slot.lemma).find_map(|(entry, phrase)| {
            let end = start + phrase.len();
            let fits = end <= lower.len()
                && (start..end).all(|p| free(&p))
                && lower[start..end] == *phrase;
            fits.then(|| Hit {
                label: GenderLabel::AltPartOfSpeech,
                positions: start..end,
                rule: format!("alt:{}", entry.phrase),
            })
        })
    })
}

fn copy_hit(slot: &AdjectiveSlot, lower: &[String], free: &impl Fn(&usize) -> bool) -> Option<Hit> {
    let lemma = slot.lemma.to_lowercase();
    (0..lower.len())
        .filter(free)
        .find(|&p| lower[p] == lemma)
        .map(|p| Hit {
            label: GenderLabel::SourceCopy,
            positions: p..p + 1,
            rule: format!("copy:{}", slot.lemma),
        })
}

/// One score per slot in slot order, sharing a consumed-position set so a
/// token never serves two slots.
pub fn classify_instance(instance: &TestInstance, translation: &str, res: &Resources) -> Vec<SlotScore> {
    let tokens = normalize(translation);
    let mut consumed = BTreeSet::new();
    let mut slots: Vec<&AdjectiveSlot> = instance.slots.iter().collect();
    slots.sort_by_key(|s| s.slot_index);
    slots
        .into_iter()
        .map(|slot| classify_slot(&instance.id, slot, &tokens, res, &mut consumed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{load_lexicon, AltPhraseEntry, AltPhrases, FormGender, Language, LexiconEntry, MorphPattern, PatternKind};
    use crate::suite::{AmbiguityKind, GenderCondition, Referent, StereotypeCondition};

    fn slot(lemma: &str, index: usize) -> AdjectiveSlot {
        AdjectiveSlot {
            slot_index: index,
            lemma: lemma.into(),
            referent: Referent::Speaker,
            gender: GenderCondition::ambiguous(AmbiguityKind::Omission).unwrap(),
            stereotype: StereotypeCondition::none(),
        }
    }

    fn spanish() -> Resources {
        let e = |form, g| LexiconEntry::new("fit", Language::Es, form, g);
        Resources {
            lexicon: load_lexicon(
                Language::Es,
                [
                    e("fuerte", FormGender::CommonForm),
                    e("musculoso", FormGender::MasculineOnly),
                    e("musculosa", FormGender::FeminineOnly),
                ],
            )
            .unwrap(),
            patterns: vec![MorphPattern::new(Language::Es, PatternKind::SlashSuffix, "o/a").unwrap()],
            alt_phrases: AltPhrases::new(
                Language::Es,
                [AltPhraseEntry {
                    lemma: "fit".into(),
                    language: Language::Es,
                    phrase: "en forma".into(),
                }],
            )
            .unwrap(),
        }
    }

    fn label(text: &str) -> (GenderLabel, String) {
        let s = classify_slot("x", &slot("fit", 0), &normalize(text), &spanish(), &mut BTreeSet::new());
        (s.label, s.matched_text)
    }

    #[test]
    fn each_rule_class() {
        assert_eq!(label("Creo que soy fuerte, dijo."), (GenderLabel::CommonForm, "fuerte".into()));
        assert_eq!(label("Eres musculos(o/a)."), (GenderLabel::AltMorphology, "musculos(o/a)".into()));
        assert_eq!(label("Estoy en forma."), (GenderLabel::AltPartOfSpeech, "en forma".into()));
        assert_eq!(label("Soy FIT."), (GenderLabel::SourceCopy, "FIT".into()));
        assert_eq!(label("Soy alto."), (GenderLabel::Unmatched, String::new()));
        assert_eq!(label(""), (GenderLabel::Unmatched, String::new()));
    }

    #[test]
    fn lexicon_beats_earlier_weaker_match() {
        assert_eq!(label("fit y musculosa"), (GenderLabel::Feminine, "musculosa".into()));
    }

    #[test]
    fn unknown_stem_with_annotation_is_unmatched() {
        assert_eq!(label("Soy alt(o/a)."), (GenderLabel::Unmatched, String::new()));
    }

    #[test]
    fn repeated_lemma_takes_positions_in_order() {
        let res = spanish();
        let tokens = normalize("musculoso pero musculosa");
        let mut consumed = BTreeSet::new();
        let a = classify_slot("x", &slot("fit", 0), &tokens, &res, &mut consumed);
        let b = classify_slot("x", &slot("fit", 1), &tokens, &res, &mut consumed);
        let c = classify_slot("x", &slot("fit", 2), &tokens, &res, &mut consumed);
        assert_eq!((a.label, b.label, c.label), (GenderLabel::Masculine, GenderLabel::Feminine, GenderLabel::Unmatched));
        assert_eq!(consumed, BTreeSet::from([0, 2]));
    }
}
