mod support;

use std::path::PathBuf;

use gnt_core::classify::{classify_instance, GenderLabel, Language, Resources};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lexicon_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/lexicon")
}

fn label_of(res: &Resources, adjective: &str, translation: &str) -> GenderLabel {
    let scores = classify_instance(&support::instance_for(adjective), translation, res);
    assert_eq!(scores.len(), 1);
    scores[0].label
}


#[test]
fn strategy_examples_with_demo_lexicon() {
    for (lang, adjective, translation, expected) in support::STRATEGY_CELLS {
        let res = Resources::load_dir(&lexicon_dir(), lang).unwrap();
        assert_eq!(label_of(&res, adjective, translation), expected, "{lang} {translation}");
    }
}

#[test]
fn gendered_forms_with_demo_lexicon() {
    let es = Resources::load_dir(&lexicon_dir(), Language::Es).unwrap();
    assert_eq!(label_of(&es, "fit", "Soy musculoso."), GenderLabel::Masculine);
    assert_eq!(label_of(&es, "fit", "Soy MUSCULOSA."), GenderLabel::Feminine);
    assert_eq!(label_of(&es, "fit", "Soy alto."), GenderLabel::Unmatched);
    let is = Resources::load_dir(&lexicon_dir(), Language::Is).unwrap();
    assert_eq!(label_of(&is, "cautious", "Ég er huglítill."), GenderLabel::Masculine);
    assert_eq!(label_of(&is, "cautious", "Ég er huglítil."), GenderLabel::Feminine);
}

#[test]
fn missing_lexicon_dir_is_an_error() {
    assert!(Resources::load_dir(&lexicon_dir().join("nope"), Language::Es).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn matcher_agrees_with_brute_force(seed in any::<u64>()) {
        let (spec, instance, translation) = support::random_case(&mut ChaCha8Rng::seed_from_u64(seed));
        let res = spec.resources();
        let got = classify_instance(&instance, &translation, &res);
        let want = support::oracle_classify(&spec, &instance, &translation);
        prop_assert_eq!(got, want, "translation {:?} spec {:?}", translation, spec);
    }
}
