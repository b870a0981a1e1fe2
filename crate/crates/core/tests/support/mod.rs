//! Shared by the core integration tests and the acceptance target.
#![allow(dead_code)]

use std::collections::BTreeMap;

use gnt_core::classify::{
    load_lexicon, normalize, AltPhraseEntry, AltPhrases, FormGender, GenderLabel, Language, LexiconEntry,
    MorphPattern, PatternKind, Resources, SlotScore,
};
use gnt_core::metrics::LabelCounts;
use gnt_core::suite::{
    AdjectiveSlot, AdverbLists, AmbiguityKind, CharacterDescriptor, DescriptorPair, GenderCondition, QuotaKey,
    Referent, StereotypeCondition, SuiteManifest, TemplateFamily, TestInstance,
};
use rand::seq::IndexedRandom;
use rand::{Rng, RngExt};

// ---------------------------------------------------------------------------
// Classifier cases and the brute-force oracle

/// The raw rows a [`Resources`] is built from.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub language: Language,
    pub entries: Vec<(String, String, FormGender)>,
    pub patterns: Vec<(PatternKind, String)>,
    pub phrases: Vec<(String, String)>,
}

impl CaseSpec {
    pub fn resources(&self) -> Resources {
        let lexicon = load_lexicon(
            self.language,
            self.entries
                .iter()
                .map(|(l, f, g)| LexiconEntry::new(l, self.language, f, *g)),
        )
        .expect("generated lexicon is consistent");
        let patterns = self
            .patterns
            .iter()
            .map(|(k, t)| MorphPattern::new(self.language, *k, t).expect("valid pattern"))
            .collect();
        let alt_phrases = AltPhrases::new(
            self.language,
            self.phrases.iter().map(|(l, p)| AltPhraseEntry {
                lemma: l.clone(),
                language: self.language,
                phrase: p.clone(),
            }),
        )
        .expect("valid phrases");
        Resources {
            lexicon,
            patterns,
            alt_phrases,
        }
    }
}

const LEMMAS: [&str; 4] = ["tall", "calm", "brave", "fit"];
const STEMS: [&str; 6] = ["fuert", "cansad", "alt", "tranquil", "huglítil", "valient"];
const NOISE: [&str; 8] = ["soy", "en", "forma", "de", "buen", "humor", "dijo", "Ég"];

fn lemma_stems(lemma_index: usize) -> (&'static str, &'static str) {
    // neighbouring lemmas share a stem so forms collide across lemmas
    (STEMS[lemma_index % STEMS.len()], STEMS[(lemma_index + 1) % STEMS.len()])
}

/// A random lexicon, pattern set, phrase table, instance and translation.
pub fn random_case(rng: &mut impl Rng) -> (CaseSpec, TestInstance, String) {
    let language = *[Language::Es, Language::Is, Language::Cs].choose(rng).unwrap();
    let n_lemmas = rng.random_range(1..=LEMMAS.len());
    let mut entries = Vec::new();
    for (i, lemma) in LEMMAS.iter().take(n_lemmas).enumerate() {
        let (stem, other) = lemma_stems(i + rng.random_range(0..2));
        if rng.random_bool(0.8) {
            entries.push((lemma.to_string(), format!("{stem}o"), FormGender::MasculineOnly));
        }
        if rng.random_bool(0.8) {
            entries.push((lemma.to_string(), format!("{stem}a"), FormGender::FeminineOnly));
        }
        if language.has_neuter() && rng.random_bool(0.5) {
            entries.push((lemma.to_string(), format!("{stem}um"), FormGender::NeuterCase));
        }
        if rng.random_bool(0.5) {
            entries.push((lemma.to_string(), format!("{other}e"), FormGender::CommonForm));
        }
    }
    if entries.is_empty() {
        entries.push((LEMMAS[0].to_string(), "alto".to_string(), FormGender::MasculineOnly));
    }

    let mut patterns = Vec::new();
    for (kind, template) in [
        (PatternKind::SlashSuffix, "o/a"),
        (PatternKind::AtSign, "o/a"),
        (PatternKind::ParenSuffix, "o"),
        (PatternKind::ParenSuffix, "a"),
        (PatternKind::SlashSuffix, "a/o"),
    ] {
        if rng.random_bool(0.5) {
            patterns.push((kind, template.to_string()));
        }
    }
    if rng.random_bool(0.5) {
        patterns.reverse();
    }

    let mut phrases = Vec::new();
    for lemma in LEMMAS.iter().take(n_lemmas) {
        for _ in 0..rng.random_range(0..=2) {
            let len = rng.random_range(1..=3);
            let words: Vec<String> = (0..len).map(|_| phrase_word(rng, &entries)).collect();
            phrases.push((lemma.to_string(), words.join(" ")));
        }
    }

    let spec = CaseSpec {
        language,
        entries,
        patterns,
        phrases,
    };

    let n_slots = rng.random_range(1..=4);
    let slots = (0..n_slots)
        .map(|i| AdjectiveSlot {
            slot_index: i,
            lemma: LEMMAS[rng.random_range(0..n_lemmas)].to_string(),
            referent: Referent::Speaker,
            gender: GenderCondition::ambiguous(AmbiguityKind::Omission).unwrap(),
            stereotype: StereotypeCondition::none(),
        })
        .collect();
    let instance = TestInstance {
        id: "case".into(),
        family: TemplateFamily::OnePersonPartial,
        source_text: String::new(),
        slots,
        pair_id: None,
        bindings: Default::default(),
    };

    let n_tokens = rng.random_range(0..=12);
    let tokens: Vec<String> = (0..n_tokens).map(|_| translation_token(rng, &spec)).collect();
    (spec, instance, tokens.join(" "))
}

fn phrase_word(rng: &mut impl Rng, entries: &[(String, String, FormGender)]) -> String {
    if rng.random_bool(0.3) {
        entries.choose(rng).unwrap().1.clone()
    } else {
        NOISE.choose(rng).unwrap().to_string()
    }
}

fn translation_token(rng: &mut impl Rng, spec: &CaseSpec) -> String {
    let core = match rng.random_range(0..10) {
        0..=2 => spec.entries.choose(rng).unwrap().1.clone(),
        3 | 4 => {
            let stem = STEMS.choose(rng).unwrap();
            let mark = ["(o/a)", "o/a", "@", "(o)", "(a)", "a/o", "(ur)"].choose(rng).unwrap();
            format!("{stem}{mark}")
        }
        5 => LEMMAS.choose(rng).unwrap().to_string(),
        6 | 7 => match spec.phrases.choose(rng) {
            Some((_, p)) => p.clone(),
            None => NOISE.choose(rng).unwrap().to_string(),
        },
        _ => NOISE.choose(rng).unwrap().to_string(),
    };
    let core = if rng.random_bool(0.2) { capitalize(&core) } else { core };
    let pre = ["", "", "\"", "¿", "("].choose(rng).unwrap();
    let post = ["", "", ",", ".", "\"", "?", ")"].choose(rng).unwrap();
    format!("{pre}{core}{post}")
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(first) => first.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn fold(s: &str) -> String {
    normalize(s).join(" ").to_lowercase()
}

fn oracle_expand(kind: PatternKind, template: &str, token: &str) -> Vec<String> {
    let alts: Vec<&str> = match kind {
        PatternKind::ParenSuffix => vec!["", template],
        _ => template.split('/').collect(),
    };
    let stems: Vec<&str> = match kind {
        PatternKind::SlashSuffix => [format!("({template})"), template.to_string()]
            .iter()
            .filter_map(|s| token.strip_suffix(s.as_str()))
            .take(1)
            .collect(),
        PatternKind::ParenSuffix => token.strip_suffix(&format!("({template})")).into_iter().collect(),
        PatternKind::AtSign => token.strip_suffix('@').into_iter().collect(),
    };
    stems
        .into_iter()
        .filter(|s| s.chars().last().is_some_and(char::is_alphabetic))
        .flat_map(|s| alts.iter().map(move |a| format!("{s}{a}")))
        .collect()
}

/// Enumerates every candidate match for every slot, then picks, slot by
/// slot, the least (rule class, start position, registration order) among
/// candidates whose tokens are still free.
pub fn oracle_classify(spec: &CaseSpec, instance: &TestInstance, translation: &str) -> Vec<SlotScore> {
    let tokens = normalize(translation);
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut used = vec![false; tokens.len()];
    let mut slots: Vec<&AdjectiveSlot> = instance.slots.iter().collect();
    slots.sort_by_key(|s| s.slot_index);

    // Registration order of phrases per lemma, without repeats.
    let mut phrase_table: BTreeMap<String, Vec<(String, Vec<String>)>> = BTreeMap::new();
    for (lemma, phrase) in &spec.phrases {
        let toks: Vec<String> = normalize(phrase).iter().map(|t| t.to_lowercase()).collect();
        let list = phrase_table.entry(fold(lemma)).or_default();
        if !list.iter().any(|(_, t)| *t == toks) {
            list.push((phrase.clone(), toks));
        }
    }

    let mut out = Vec::new();
    for slot in slots {
        let lemma = fold(&slot.lemma);
        let forms: Vec<(String, FormGender)> = spec
            .entries
            .iter()
            .filter(|(l, _, _)| fold(l) == lemma)
            .map(|(_, f, g)| (fold(f), *g))
            .collect();
        let mut cands: Vec<(u8, usize, usize, usize, GenderLabel, String)> = Vec::new();
        for (p, tok) in lower.iter().enumerate() {
            for (form, g) in &forms {
                if form == tok {
                    cands.push((0, p, 0, p + 1, g.label(), format!("lexicon:{}/{}", tok, g.code())));
                }
            }
            if tok.contains(['/', '(', ')', '@']) {
                for (i, (kind, template)) in spec.patterns.iter().enumerate() {
                    let hit = oracle_expand(*kind, template, tok)
                        .iter()
                        .any(|x| forms.iter().any(|(f, _)| f == x));
                    if hit {
                        cands.push((
                            1,
                            p,
                            i,
                            p + 1,
                            GenderLabel::AltMorphology,
                            format!("pattern:{}:{template}", kind.code()),
                        ));
                    }
                }
            }
            for (j, (raw, toks)) in phrase_table.get(&lemma).into_iter().flatten().enumerate() {
                if lower[p..].starts_with(toks) {
                    cands.push((2, p, j, p + toks.len(), GenderLabel::AltPartOfSpeech, format!("alt:{raw}")));
                }
            }
            if *tok == slot.lemma.to_lowercase() {
                cands.push((3, p, 0, p + 1, GenderLabel::SourceCopy, format!("copy:{}", slot.lemma)));
            }
        }
        let best = cands
            .into_iter()
            .filter(|c| (c.1..c.3).all(|p| !used[p]))
            .min_by_key(|c| (c.0, c.1, c.2));
        out.push(match best {
            Some((_, start, _, end, label, rule)) => {
                used[start..end].iter_mut().for_each(|u| *u = true);
                SlotScore {
                    instance_id: instance.id.clone(),
                    slot_index: slot.slot_index,
                    label,
                    matched_text: tokens[start..end].join(" "),
                    rule,
                }
            }
            None => SlotScore {
                instance_id: instance.id.clone(),
                slot_index: slot.slot_index,
                label: GenderLabel::Unmatched,
                matched_text: String::new(),
                rule: String::new(),
            },
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Manifests

const ADJECTIVES: [&str; 24] = [
    "able", "brave", "calm", "daring", "eager", "fit", "gentle", "happy", "idle", "jolly", "kind", "lazy", "merry",
    "nervous", "odd", "proud", "quiet", "rude", "shy", "tired", "upset", "vain", "wise", "young",
];

/// A random feasible manifest. With `exact`, every quota is a multiple of
/// the generator's full balancing cycle, so all splits come out even.
pub fn random_manifest(rng: &mut impl Rng, exact: bool) -> SuiteManifest {
    let mut q = BTreeMap::new();
    let mut set = |k: QuotaKey, v: usize| {
        q.insert(k, v);
    };
    if exact {
        set(QuotaKey::T1Det, 4 * rng.random_range(0..=6));
        set(QuotaKey::T2Det, 16 * rng.random_range(0..=3));
        let t3 = 4 * rng.random_range(0..=6);
        set(QuotaKey::T3Det, t3);
        set(QuotaKey::T3Amb, t3);
        let t4 = 16 * rng.random_range(0..=3);
        set(QuotaKey::T4Det, t4);
        set(QuotaKey::T4Amb, t4);
        let t5 = 2 * rng.random_range(0..=8);
        set(QuotaKey::T5Det, 2 * t5);
        set(QuotaKey::T5Amb, t5);
        let t7 = rng.random_range(0..=6);
        let t7s = t7 * rng.random_range(0..=3);
        set(QuotaKey::T7None, t7);
        set(QuotaKey::T7StereoM, t7s);
        set(QuotaKey::T7StereoF, t7s);
    } else {
        set(QuotaKey::T1Det, 2 * rng.random_range(0..=12));
        set(QuotaKey::T2Det, 4 * rng.random_range(0..=10));
        let t3 = rng.random_range(0..=12);
        set(QuotaKey::T3Det, 2 * t3);
        set(QuotaKey::T3Amb, 2 * rng.random_range(0..=t3));
        let t4 = 4 * rng.random_range(0..=6);
        set(QuotaKey::T4Det, t4);
        set(QuotaKey::T4Amb, t4);
        let t5 = rng.random_range(0..=20);
        set(QuotaKey::T5Det, t5);
        set(QuotaKey::T5Amb, rng.random_range(0..=t5.div_ceil(2)));
        let t7 = rng.random_range(0..=6);
        let t7s = rng.random_range(0..=12);
        set(QuotaKey::T7None, t7);
        set(QuotaKey::T7StereoM, t7s);
        set(QuotaKey::T7StereoF, t7s);
    }
    let n_adj = rng.random_range(4..=ADJECTIVES.len());
    let pairs = [
        ("pretty", "nurse", "strong", "doctor"),
        ("gentle", "secretary", "tough", "mechanic"),
        ("caring", "receptionist", "ambitious", "engineer"),
    ];
    let n_pairs = rng.random_range(1..=pairs.len());
    let n_adv = rng.random_range(1..=3);
    SuiteManifest {
        description: None,
        adjectives: ADJECTIVES[..n_adj].iter().map(|s| s.to_string()).collect(),
        descriptor_pairs: pairs[..n_pairs]
            .iter()
            .map(|(fa, fo, ma, mo)| DescriptorPair {
                feminine: CharacterDescriptor {
                    adjective: fa.to_string(),
                    occupation: fo.to_string(),
                },
                masculine: CharacterDescriptor {
                    adjective: ma.to_string(),
                    occupation: mo.to_string(),
                },
            })
            .collect(),
        adverbs: AdverbLists {
            masculine: ["brusquely", "gruffly", "curtly"][..n_adv].iter().map(|s| s.to_string()).collect(),
            feminine: ["gently", "softly", "sweetly"][..n_adv].iter().map(|s| s.to_string()).collect(),
        },
        quotas: q,
        seed: rng.random(),
    }
}

// ---------------------------------------------------------------------------
// Synthetic label counts

pub fn random_counts(rng: &mut impl Rng) -> LabelCounts {
    let mut c = LabelCounts {
        m: rng.random_range(0..200),
        f: rng.random_range(0..200),
        n: std::array::from_fn(|_| rng.random_range(0..60)),
        u: rng.random_range(0..20),
    };
    if c.classified() == 0 {
        c.m = 1;
    }
    c
}

pub fn labels_of(c: &LabelCounts) -> Vec<GenderLabel> {
    let neutral = [
        GenderLabel::CommonForm,
        GenderLabel::NeuterCase,
        GenderLabel::AltPartOfSpeech,
        GenderLabel::SourceCopy,
        GenderLabel::AltMorphology,
    ];
    let mut out = Vec::new();
    out.extend(std::iter::repeat_n(GenderLabel::Masculine, c.m as usize));
    out.extend(std::iter::repeat_n(GenderLabel::Feminine, c.f as usize));
    for (i, label) in neutral.into_iter().enumerate() {
        out.extend(std::iter::repeat_n(label, c.n[i] as usize));
    }
    out.extend(std::iter::repeat_n(GenderLabel::Unmatched, c.u as usize));
    out
}

// ---------------------------------------------------------------------------
// Demo data

/// The workspace `data/` directory. Both test crates sit two levels below
/// the workspace root.
pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").canonicalize().unwrap()
}

pub fn demo_manifest() -> SuiteManifest {
    let text = std::fs::read_to_string(data_dir().join("manifests/demo.json")).unwrap();
    SuiteManifest::from_json(&text).unwrap()
}

/// Shell command for one of the fixture backends.
pub fn fixture_backend(script: &str) -> String {
    format!("sh '{}'", data_dir().join("fixtures").join(script).display())
}

// ---------------------------------------------------------------------------
// Strategy examples

/// A one-slot instance for `adjective` in a fixed first-person frame.
pub fn instance_for(adjective: &str) -> TestInstance {
    let b: gnt_core::suite::Bindings = [("A".to_string(), adjective.to_string())].into_iter().collect();
    gnt_core::suite::expand_template(TemplateFamily::AdverbStereotype, &b).unwrap()
}

/// Every non-empty cell of the strategy-example table, embedded in a
/// plausible target sentence.
pub const STRATEGY_CELLS: [(Language, &str, &str, GenderLabel); 14] = [
    (Language::Es, "fit", "\"Creo que soy fuerte\", dije.", GenderLabel::CommonForm),
    (Language::Es, "fit", "\"Creo que estoy en forma\", dije.", GenderLabel::AltPartOfSpeech),
    (Language::Es, "fit", "\"Creo que soy fit\", dije.", GenderLabel::SourceCopy),
    (Language::Es, "fit", "\"Creo que soy musculos(o/a)\", dije.", GenderLabel::AltMorphology),
    (Language::Cs, "nonsensical", "„Myslím, že jsem absurdní,“ řekl/a jsem.", GenderLabel::CommonForm),
    (Language::Cs, "nonsensical", "„Myslím, že jsem nesmyslné,“ řekl/a jsem.", GenderLabel::NeuterCase),
    (Language::Cs, "nonsensical", "„Myslím, že nemám smysl,“ řekl/a jsem.", GenderLabel::AltPartOfSpeech),
    (Language::Cs, "nonsensical", "„Myslím, že jsem nonsensical,“ řekl/a jsem.", GenderLabel::SourceCopy),
    (Language::Cs, "nonsensical", "„Myslím, že jsem nesmysln(ý/á),“ řekl/a jsem.", GenderLabel::AltMorphology),
    (Language::Is, "cautious", "„Ég held að ég sé varkár,“ sagði ég.", GenderLabel::CommonForm),
    (Language::Is, "cautious", "„Ég held að ég sé varkárt,“ sagði ég.", GenderLabel::NeuterCase),
    (Language::Is, "cautious", "„Ég held að ég sé á varðbergi,“ sagði ég.", GenderLabel::AltPartOfSpeech),
    (Language::Is, "cautious", "„Ég held að ég sé cautious,“ sagði ég.", GenderLabel::SourceCopy),
    (Language::Is, "cautious", "„Ég held að ég sé huglítil(l),“ sagði ég.", GenderLabel::AltMorphology),
];
