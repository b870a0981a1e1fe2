//! Template expansion for the six dialogue families.
//!
//! Binding variables:
//!
//! | family | variables |
//! |--------|-----------|
//! | T1 | `first_character` (woman/man), `first_pronoun` (she/he), `second_pronoun`, `target` (self/other), `bracket` (yes/no), `A1`, `A2` |
//! | T2 | `first_character`, `first_pronoun`, `second_pronoun`, `A1`..`A4` |
//! | T3 | as T1, plus `narrator` (first/second) |
//! | T4 | as T2, plus `narrator` |
//! | T5 | `C_g`, `C_g_bar`, `stereotype` (feminine/masculine, the stereotype of `C_g`), `pronoun` (he/she/they), `A`; optional `a_g`, `occ_g` |
//! | T7 | `A`; optional `adverb` with `adverb_stereotype` |

use super::{
    AdjectiveSlot, AmbiguityKind, Bindings, Gender, GenderCondition, Referent, StereotypeCondition,
    SuiteError, TemplateFamily, TestInstance,
};

/// Expands one template into an instance. The returned instance has an
/// empty `id` and no `pair_id`; [`generate_suite`](super::generate_suite)
/// assigns both.
pub fn expand_template(
    family: TemplateFamily,
    bindings: &Bindings,
) -> Result<TestInstance, SuiteError> {
    let vars = Vars { family, bindings };
    let (source_text, slots) = match family {
        TemplateFamily::OnePersonKnown => one_person(&vars, false)?,
        TemplateFamily::OnePersonPartial => one_person(&vars, true)?,
        TemplateFamily::TwoPersonKnown => two_person(&vars, false)?,
        TemplateFamily::TwoPersonPartial => two_person(&vars, true)?,
        TemplateFamily::CharStereotype => char_stereotype(&vars)?,
        TemplateFamily::AdverbStereotype => adverb_stereotype(&vars)?,
    };
    let mut bindings = bindings.clone();
    if family == TemplateFamily::CharStereotype {
        // C_g = a_g occ_g
        let c_g = bindings["C_g"].clone();
        let (a_g, occ_g) = c_g.split_once(' ').unwrap_or(("", c_g.as_str()));
        bindings
            .entry("a_g".into())
            .or_insert_with(|| a_g.to_string());
        bindings
            .entry("occ_g".into())
            .or_insert_with(|| occ_g.to_string());
    }
    Ok(TestInstance {
        id: String::new(),
        family,
        source_text,
        slots,
        pair_id: None,
        bindings,
    })
}

struct Vars<'a> {
    family: TemplateFamily,
    bindings: &'a Bindings,
}

impl<'a> Vars<'a> {
    fn get(&self, name: &str) -> Result<&'a str, SuiteError> {
        self.bindings
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| SuiteError::MissingBinding {
                family: self.family,
                variable: name.to_string(),
            })
    }

    fn one_of(&self, name: &str, options: &[&str]) -> Result<&'a str, SuiteError> {
        let value = self.get(name)?;
        if options.contains(&value) {
            Ok(value)
        } else {
            Err(inconsistent(
                name,
                value,
                format!("expected one of {options:?}"),
            ))
        }
    }

    fn adjective(&self, name: &str) -> Result<&'a str, SuiteError> {
        let value = self.get(name)?;
        if value.trim().is_empty() || value.contains(['"', '\n', '{', '[']) {
            return Err(inconsistent(name, value, "not a usable adjective".into()));
        }
        Ok(value)
    }

    fn pronoun_gender(&self, name: &str) -> Result<Gender, SuiteError> {
        Ok(match self.one_of(name, &["she", "he"])? {
            "she" => Gender::Feminine,
            _ => Gender::Masculine,
        })
    }

    /// Genders of the two dialogue participants.
    fn participants(&self) -> Result<(Gender, Gender), SuiteError> {
        let noun = self.one_of("first_character", &["woman", "man"])?;
        let first = self.pronoun_gender("first_pronoun")?;
        if noun != first.noun() {
            return Err(inconsistent(
                "first_pronoun",
                first.pronoun(),
                format!("does not agree with first_character {noun:?}"),
            ));
        }
        Ok((first, self.pronoun_gender("second_pronoun")?))
    }

    fn narrator(&self) -> Result<Person, SuiteError> {
        Ok(match self.one_of("narrator", &["first", "second"])? {
            "first" => Person::First,
            _ => Person::Second,
        })
    }
}

fn inconsistent(variable: &str, value: &str, reason: String) -> SuiteError {
    SuiteError::InconsistentBinding {
        variable: variable.to_string(),
        value: value.to_string(),
        reason,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Person {
    First,
    Second,
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Narration frame shared by T1-T4: who smiles, says and replies.
struct Frame {
    opening: String,
    said_by: String,
    laughs: String,
    replied_by: String,
}

fn frame(first: Gender, second: Gender, narrator: Option<Person>) -> Frame {
    let described = Frame {
        opening: format!("The {}", first.noun()),
        said_by: first.pronoun().to_string(),
        laughs: capitalize(second.pronoun()),
        replied_by: second.pronoun().to_string(),
    };
    match narrator {
        None => described,
        Some(Person::First) => Frame {
            opening: "I".into(),
            said_by: "I".into(),
            ..described
        },
        Some(Person::Second) => Frame {
            laughs: "I".into(),
            replied_by: "I".into(),
            ..described
        },
    }
}

fn condition(person: Person, genders: (Gender, Gender), narrator: Option<Person>) -> GenderCondition {
    if narrator == Some(person) {
        GenderCondition::ambiguous(AmbiguityKind::Omission).expect("omission is ambiguous")
    } else {
        match person {
            Person::First => GenderCondition::determined(genders.0),
            Person::Second => GenderCondition::determined(genders.1),
        }
    }
}

fn slot(index: usize, lemma: &str, referent: Referent, gender: GenderCondition) -> AdjectiveSlot {
    AdjectiveSlot {
        slot_index: index,
        lemma: lemma.to_string(),
        referent,
        gender,
        stereotype: StereotypeCondition::none(),
    }
}

fn one_person(
    vars: &Vars<'_>,
    partial: bool,
) -> Result<(String, Vec<AdjectiveSlot>), SuiteError> {
    let genders = vars.participants()?;
    let about_self = vars.one_of("target", &["self", "other"])? == "self";
    let bracket = vars.one_of("bracket", &["yes", "no"])? == "yes";
    let narrator = if partial { Some(vars.narrator()?) } else { None };
    let a1 = vars.adjective("A1")?;
    let a2 = vars.adjective("A2")?;

    let fr = frame(genders.0, genders.1, narrator);
    let (claim, rebuttal, counter) = if about_self {
        ("I'm", "you're", "you are")
    } else {
        ("you're", "I'm", "I am")
    };
    let bracketed = if bracket {
        format!("{rebuttal} not {a1}, but ")
    } else {
        String::new()
    };
    let text = format!(
        "{} smiled. \"I think {claim} {a1},\" {} said. {} laughed back. \"No, {bracketed}{counter} {a2},\" {} replied.",
        fr.opening, fr.said_by, fr.laughs, fr.replied_by
    );

    // Both adjectives describe the same participant.
    let (person, first_role, second_role) = if about_self {
        (Person::First, Referent::Speaker, Referent::Listener)
    } else {
        (Person::Second, Referent::Listener, Referent::Speaker)
    };
    let cond = condition(person, genders, narrator);
    Ok((
        text,
        vec![slot(0, a1, first_role, cond), slot(1, a2, second_role, cond)],
    ))
}

fn two_person(
    vars: &Vars<'_>,
    partial: bool,
) -> Result<(String, Vec<AdjectiveSlot>), SuiteError> {
    let genders = vars.participants()?;
    let narrator = if partial { Some(vars.narrator()?) } else { None };
    let adjs = [
        vars.adjective("A1")?,
        vars.adjective("A2")?,
        vars.adjective("A3")?,
        vars.adjective("A4")?,
    ];
    let fr = frame(genders.0, genders.1, narrator);
    let text = format!(
        "{} smiled. \"I think I'm {} and you're {},\" {} said. {} laughed back. \"No, you're {}, but I'm {},\" {} replied.",
        fr.opening, adjs[0], adjs[1], fr.said_by, fr.laughs, adjs[2], adjs[3], fr.replied_by
    );
    let layout = [
        (Person::First, Referent::Speaker),
        (Person::Second, Referent::Listener),
        (Person::First, Referent::Listener),
        (Person::Second, Referent::Speaker),
    ];
    let slots = layout
        .iter()
        .zip(adjs)
        .enumerate()
        .map(|(i, (&(person, role), adj))| slot(i, adj, role, condition(person, genders, narrator)))
        .collect();
    Ok((text, slots))
}

fn char_stereotype(vars: &Vars<'_>) -> Result<(String, Vec<AdjectiveSlot>), SuiteError> {
    let c_g = vars.adjective("C_g")?;
    let c_g_bar = vars.adjective("C_g_bar")?;
    let stereotype = vars.get("stereotype")?;
    let stereotype = Gender::parse(stereotype).ok_or_else(|| {
        inconsistent("stereotype", stereotype, "expected feminine or masculine".into())
    })?;
    if c_g == c_g_bar {
        return Err(inconsistent(
            "C_g_bar",
            c_g_bar,
            "must be the opposite-stereotype descriptor of C_g".into(),
        ));
    }
    let pronoun = vars.get("pronoun")?;
    let gender = match pronoun {
        "he" => GenderCondition::determined(Gender::Masculine),
        "she" => GenderCondition::determined(Gender::Feminine),
        "they" => GenderCondition::ambiguous(AmbiguityKind::Active).expect("active is ambiguous"),
        other => {
            return Err(inconsistent(
                "pronoun",
                other,
                "speech-tag pronoun must be he, she or they".into(),
            ))
        }
    };
    let a = vars.adjective("A")?;
    let text = format!("The {c_g} smiled. \"I think I'm {a},\" {pronoun} said to the {c_g_bar}.");
    let slot = AdjectiveSlot {
        slot_index: 0,
        lemma: a.to_string(),
        referent: Referent::Speaker,
        gender,
        stereotype: StereotypeCondition::cued(stereotype, c_g),
    };
    Ok((text, vec![slot]))
}

fn adverb_stereotype(vars: &Vars<'_>) -> Result<(String, Vec<AdjectiveSlot>), SuiteError> {
    let a = vars.adjective("A")?;
    let adverb = vars.bindings.get("adverb").map(String::as_str).unwrap_or("");
    let (tail, stereotype) = if adverb.is_empty() {
        (String::new(), StereotypeCondition::none())
    } else {
        let coded = vars.get("adverb_stereotype")?;
        let g = Gender::parse(coded).ok_or_else(|| {
            inconsistent("adverb_stereotype", coded, "expected feminine or masculine".into())
        })?;
        (format!(" {adverb}"), StereotypeCondition::cued(g, adverb))
    };
    let text = format!("\"I think I'm {a},\" I said{tail}.");
    let slot = AdjectiveSlot {
        slot_index: 0,
        lemma: a.to_string(),
        referent: Referent::Speaker,
        gender: GenderCondition::ambiguous(AmbiguityKind::Omission).expect("omission is ambiguous"),
        stereotype,
    };
    Ok((text, vec![slot]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::{GenderKind, StereotypeKind};

    fn b(pairs: &[(&str, &str)]) -> Bindings {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn char_stereotype_they_is_active_ambiguity() {
        let inst = expand_template(
            TemplateFamily::CharStereotype,
            &b(&[
                ("C_g", "pretty nurse"),
                ("C_g_bar", "strong doctor"),
                ("stereotype", "feminine"),
                ("pronoun", "they"),
                ("A", "stubborn"),
            ]),
        )
        .unwrap();
        assert_eq!(
            inst.source_text,
            "The pretty nurse smiled. \"I think I'm stubborn,\" they said to the strong doctor."
        );
        assert_eq!(inst.slots.len(), 1);
        let s = &inst.slots[0];
        assert_eq!(s.lemma, "stubborn");
        assert_eq!(s.referent, Referent::Speaker);
        assert_eq!(s.gender.kind(), GenderKind::Ambiguous);
        assert_eq!(s.gender.ambiguity(), AmbiguityKind::Active);
        assert_eq!(s.stereotype.kind(), StereotypeKind::Feminine);
        assert_eq!(s.stereotype.cue(), "pretty nurse");
        assert_eq!(inst.bindings["a_g"], "pretty");
        assert_eq!(inst.bindings["occ_g"], "nurse");
    }

    #[test]
    fn adverb_template_without_adverb() {
        let inst = expand_template(TemplateFamily::AdverbStereotype, &b(&[("A", "fit")])).unwrap();
        assert_eq!(inst.source_text, "\"I think I'm fit,\" I said.");
        let s = &inst.slots[0];
        assert_eq!(s.gender.ambiguity(), AmbiguityKind::Omission);
        assert_eq!(s.stereotype, StereotypeCondition::none());
    }

    #[test]
    fn adverb_template_with_adverb() {
        let inst = expand_template(
            TemplateFamily::AdverbStereotype,
            &b(&[("A", "fit"), ("adverb", "gently"), ("adverb_stereotype", "feminine")]),
        )
        .unwrap();
        assert_eq!(inst.source_text, "\"I think I'm fit,\" I said gently.");
        assert_eq!(inst.slots[0].stereotype.kind(), StereotypeKind::Feminine);
        assert_eq!(inst.slots[0].stereotype.cue(), "gently");
    }

    #[test]
    fn rejects_pronoun_outside_speech_tag_set() {
        let err = expand_template(
            TemplateFamily::CharStereotype,
            &b(&[
                ("C_g", "pretty nurse"),
                ("C_g_bar", "strong doctor"),
                ("stereotype", "feminine"),
                ("pronoun", "it"),
                ("A", "stubborn"),
            ]),
        )
        .unwrap_err();
        assert!(matches!(err, SuiteError::InconsistentBinding { ref variable, .. } if variable == "pronoun"));
    }

    #[test]
    fn missing_binding_is_reported() {
        let err = expand_template(TemplateFamily::AdverbStereotype, &Bindings::new()).unwrap_err();
        assert_eq!(
            err,
            SuiteError::MissingBinding {
                family: TemplateFamily::AdverbStereotype,
                variable: "A".into()
            }
        );
    }

    fn one_person_bindings(target: &str, bracket: &str) -> Bindings {
        b(&[
            ("first_character", "woman"),
            ("first_pronoun", "she"),
            ("second_pronoun", "he"),
            ("target", target),
            ("bracket", bracket),
            ("A1", "stubborn"),
            ("A2", "lazy"),
        ])
    }

    #[test]
    fn one_person_known_with_bracket() {
        let inst = expand_template(
            TemplateFamily::OnePersonKnown,
            &one_person_bindings("self", "yes"),
        )
        .unwrap();
        assert_eq!(
            inst.source_text,
            "The woman smiled. \"I think I'm stubborn,\" she said. He laughed back. \"No, you're not stubborn, but you are lazy,\" he replied."
        );
        assert_eq!(inst.slots.len(), 2);
        assert!(inst
            .slots
            .iter()
            .all(|s| s.gender == GenderCondition::determined(Gender::Feminine)));
        assert_eq!(inst.slots[0].referent, Referent::Speaker);
        assert_eq!(inst.slots[1].referent, Referent::Listener);
    }

    #[test]
    fn one_person_known_about_listener() {
        let inst = expand_template(
            TemplateFamily::OnePersonKnown,
            &one_person_bindings("other", "no"),
        )
        .unwrap();
        assert_eq!(
            inst.source_text,
            "The woman smiled. \"I think you're stubborn,\" she said. He laughed back. \"No, I am lazy,\" he replied."
        );
        assert!(inst
            .slots
            .iter()
            .all(|s| s.gender == GenderCondition::determined(Gender::Masculine)));
    }

    #[test]
    fn one_person_partial_narrator_hides_referent() {
        let mut bind = one_person_bindings("self", "yes");
        bind.insert("narrator".into(), "first".into());
        let amb = expand_template(TemplateFamily::OnePersonPartial, &bind).unwrap();
        assert_eq!(
            amb.source_text,
            "I smiled. \"I think I'm stubborn,\" I said. He laughed back. \"No, you're not stubborn, but you are lazy,\" he replied."
        );
        assert!(amb.slots.iter().all(|s| s.gender.ambiguity() == AmbiguityKind::Omission));

        bind.insert("narrator".into(), "second".into());
        let det = expand_template(TemplateFamily::OnePersonPartial, &bind).unwrap();
        assert_eq!(
            det.source_text,
            "The woman smiled. \"I think I'm stubborn,\" she said. I laughed back. \"No, you're not stubborn, but you are lazy,\" I replied."
        );
        assert!(det
            .slots
            .iter()
            .all(|s| s.gender == GenderCondition::determined(Gender::Feminine)));
    }

    #[test]
    fn two_person_partial_splits_slots() {
        let inst = expand_template(
            TemplateFamily::TwoPersonPartial,
            &b(&[
                ("first_character", "man"),
                ("first_pronoun", "he"),
                ("second_pronoun", "she"),
                ("narrator", "second"),
                ("A1", "brave"),
                ("A2", "kind"),
                ("A3", "shy"),
                ("A4", "calm"),
            ]),
        )
        .unwrap();
        assert_eq!(
            inst.source_text,
            "The man smiled. \"I think I'm brave and you're kind,\" he said. I laughed back. \"No, you're shy, but I'm calm,\" I replied."
        );
        let kinds: Vec<_> = inst.slots.iter().map(|s| s.gender.kind()).collect();
        assert_eq!(
            kinds,
            vec![
                GenderKind::DeterminedMasculine,
                GenderKind::Ambiguous,
                GenderKind::DeterminedMasculine,
                GenderKind::Ambiguous
            ]
        );
    }

    #[test]
    fn pronoun_must_agree_with_character() {
        let mut bind = one_person_bindings("self", "no");
        bind.insert("first_pronoun".into(), "he".into());
        let err = expand_template(TemplateFamily::OnePersonKnown, &bind).unwrap_err();
        assert!(matches!(err, SuiteError::InconsistentBinding { .. }));
    }
}
