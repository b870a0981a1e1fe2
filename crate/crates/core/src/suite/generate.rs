//! Quota-driven suite generation.
//!
//! Each family walks a fixed cycle of variant combinations (genders, target,
//! optional bracket, narrator position, stereotype orientation) in lockstep
//! with a round-robin cursor over the manifest lists. Balance therefore holds
//! by construction whenever a quota is a whole number of cycles; otherwise
//! the split is off by at most one instance and a warning is emitted. The
//! finished suite is shuffled with a seeded ChaCha stream.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    expand_template, Bindings, Gender, QuotaKey, SuiteError, SuiteManifest, TemplateFamily,
    TestInstance,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationWarning {
    pub family: TemplateFamily,
    pub message: String,
}

impl std::fmt::Display for GenerationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.family, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedSuite {
    pub instances: Vec<TestInstance>,
    pub warnings: Vec<GenerationWarning>,
}

impl GeneratedSuite {
    pub fn slot_count(&self) -> usize {
        self.instances.iter().map(|i| i.slots.len()).sum()
    }
}

pub fn generate_suite(manifest: &SuiteManifest) -> Result<GeneratedSuite, SuiteError> {
    manifest.check()?;
    let mut gen = Generator {
        manifest,
        instances: Vec::with_capacity(manifest.total_slots()),
        warnings: Vec::new(),
    };
    gen.one_person_known()?;
    gen.two_person_known()?;
    gen.one_person_partial()?;
    gen.two_person_partial()?;
    gen.char_stereotype()?;
    gen.adverb_stereotype()?;

    let Generator {
        mut instances,
        warnings,
        ..
    } = gen;
    let mut rng = ChaCha8Rng::seed_from_u64(manifest.seed);
    instances.shuffle(&mut rng);
    Ok(GeneratedSuite {
        instances,
        warnings,
    })
}

const GENDERS: [Gender; 2] = [Gender::Feminine, Gender::Masculine];

/// Variant `k` of the one-referent cycle (period 8).
///
/// Referent gender runs F, M, M, F and the target self, other, self, other,
/// so every prefix is within one instance of balanced on both, and so is the
/// narrator position derived from the target.
struct OnePersonVariant {
    first: Gender,
    second: Gender,
    about_self: bool,
    bracket: bool,
}

fn one_person_variant(k: usize) -> OnePersonVariant {
    let referent = GENDERS[(k + k / 2) % 2];
    let about_self = k % 2 == 0;
    let other = GENDERS[(k / 4) % 2];
    let (first, second) = if about_self {
        (referent, other)
    } else {
        (other, referent)
    };
    OnePersonVariant {
        first,
        second,
        about_self,
        bracket: (k / 2) % 2 == 1,
    }
}

/// Participant genders for the two-referent cycle (period 4).
fn two_person_variant(k: usize) -> (Gender, Gender) {
    let first = GENDERS[k % 2];
    let second = if (k / 2) % 2 == 0 {
        first.opposite()
    } else {
        first
    };
    (first, second)
}

struct Generator<'a> {
    manifest: &'a SuiteManifest,
    instances: Vec<TestInstance>,
    warnings: Vec<GenerationWarning>,
}

fn infeasible(quota: QuotaKey, limiting: &str, reason: impl Into<String>) -> SuiteError {
    SuiteError::QuotaInfeasible {
        quota,
        limiting: limiting.to_string(),
        reason: reason.into(),
    }
}

fn bind(pairs: &[(&str, &str)]) -> Bindings {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn participant_bindings(b: &mut Bindings, first: Gender, second: Gender) {
    b.insert("first_character".into(), first.noun().into());
    b.insert("first_pronoun".into(), first.pronoun().into());
    b.insert("second_pronoun".into(), second.pronoun().into());
}

impl Generator<'_> {
    fn warn(&mut self, family: TemplateFamily, message: String) {
        self.warnings.push(GenerationWarning { family, message });
    }

    /// Instances needed to fill `key` with `per_instance` slots each.
    fn instances_for(&self, key: QuotaKey, per_instance: usize) -> Result<usize, SuiteError> {
        let quota = self.manifest.quota(key);
        if quota % per_instance != 0 {
            return Err(infeasible(
                key,
                "quotas",
                format!("{quota} slots is not a multiple of {per_instance} slots per instance"),
            ));
        }
        Ok(quota / per_instance)
    }

    fn need_adjectives(&self, key: QuotaKey, n: usize) -> Result<(), SuiteError> {
        if self.manifest.adjectives.len() < n {
            return Err(infeasible(
                key,
                "adjectives",
                format!(
                    "need at least {n} distinct adjectives, manifest has {}",
                    self.manifest.adjectives.len()
                ),
            ));
        }
        Ok(())
    }

    fn adjective(&self, cursor: usize) -> &str {
        &self.manifest.adjectives[cursor % self.manifest.adjectives.len()]
    }

    fn push(
        &mut self,
        family: TemplateFamily,
        bindings: &Bindings,
        id: String,
        pair_id: Option<String>,
    ) -> Result<(), SuiteError> {
        let mut inst = expand_template(family, bindings)?;
        inst.id = id;
        inst.pair_id = pair_id;
        self.instances.push(inst);
        Ok(())
    }

    fn one_person_known(&mut self) -> Result<(), SuiteError> {
        let family = TemplateFamily::OnePersonKnown;
        let n = self.instances_for(QuotaKey::T1Det, 2)?;
        if n == 0 {
            return Ok(());
        }
        self.need_adjectives(QuotaKey::T1Det, 2)?;
        for k in 0..n {
            let v = one_person_variant(k);
            let mut b = bind(&[
                ("target", if v.about_self { "self" } else { "other" }),
                ("bracket", if v.bracket { "yes" } else { "no" }),
                ("A1", self.adjective(2 * k)),
                ("A2", self.adjective(2 * k + 1)),
            ]);
            participant_bindings(&mut b, v.first, v.second);
            self.push(family, &b, format!("T1-{:06}d", k + 1), None)?;
        }
        if n % 2 != 0 {
            self.warn(family, format!("{n} instances: gender split differs by one instance"));
        }
        Ok(())
    }

    fn two_person_known(&mut self) -> Result<(), SuiteError> {
        let family = TemplateFamily::TwoPersonKnown;
        let n = self.instances_for(QuotaKey::T2Det, 4)?;
        if n == 0 {
            return Ok(());
        }
        self.need_adjectives(QuotaKey::T2Det, 4)?;
        for k in 0..n {
            let (first, second) = two_person_variant(k);
            let mut b = bind(&[
                ("A1", self.adjective(4 * k)),
                ("A2", self.adjective(4 * k + 1)),
                ("A3", self.adjective(4 * k + 2)),
                ("A4", self.adjective(4 * k + 3)),
            ]);
            participant_bindings(&mut b, first, second);
            self.push(family, &b, format!("T2-{:06}d", k + 1), None)?;
        }
        if n % 4 == 3 {
            self.warn(family, format!("{n} instances: gender split is uneven"));
        }
        Ok(())
    }

    /// Each group shares one dialogue; the determined member is narrated by
    /// the participant the adjectives do not describe, the ambiguous member
    /// by the described participant.
    fn one_person_partial(&mut self) -> Result<(), SuiteError> {
        let family = TemplateFamily::OnePersonPartial;
        let n_det = self.instances_for(QuotaKey::T3Det, 2)?;
        let n_amb = self.instances_for(QuotaKey::T3Amb, 2)?;
        if n_amb > n_det {
            return Err(infeasible(
                QuotaKey::T3Amb,
                "quotas",
                format!("{n_amb} ambiguous instances but only {n_det} determined partners"),
            ));
        }
        let groups = n_det;
        if groups == 0 {
            return Ok(());
        }
        self.need_adjectives(QuotaKey::T3Det, 2)?;
        for g in 0..groups {
            let v = one_person_variant(g);
            let mut b = bind(&[
                ("target", if v.about_self { "self" } else { "other" }),
                ("bracket", if v.bracket { "yes" } else { "no" }),
                ("A1", self.adjective(2 * g)),
                ("A2", self.adjective(2 * g + 1)),
            ]);
            participant_bindings(&mut b, v.first, v.second);
            let (referent_narrates, other_narrates) = if v.about_self {
                ("first", "second")
            } else {
                ("second", "first")
            };
            let group = format!("T3-{:06}", g + 1);
            if g < n_det {
                b.insert("narrator".into(), other_narrates.into());
                self.push(family, &b, format!("{group}d"), Some(group.clone()))?;
            }
            if g < n_amb {
                b.insert("narrator".into(), referent_narrates.into());
                self.push(family, &b, format!("{group}a"), Some(group.clone()))?;
            }
        }
        for (n, what) in [(n_det, "determined"), (n_amb, "ambiguous")] {
            if n % 2 != 0 {
                self.warn(family, format!("{n} {what} instances: gender/narrator split differs by one"));
            }
        }
        if n_det != n_amb {
            self.warn(
                family,
                format!("{} determined instances have no ambiguous partner", n_det - n_amb),
            );
        }
        Ok(())
    }

    /// Groups hold the same dialogue narrated by each participant in turn
    /// (suffix `n1`: narrated by the first speaker, `n2`: by the second).
    fn two_person_partial(&mut self) -> Result<(), SuiteError> {
        let family = TemplateFamily::TwoPersonPartial;
        let det = self.manifest.quota(QuotaKey::T4Det);
        let amb = self.manifest.quota(QuotaKey::T4Amb);
        if det != amb {
            return Err(infeasible(
                QuotaKey::T4Amb,
                "quotas",
                format!("every instance has two determined and two ambiguous slots, but quotas are {det} vs {amb}"),
            ));
        }
        // Each group is the same dialogue narrated by both participants, and
        // the two narrations pair each other's ambiguous slots.
        let n = 2 * self.instances_for(QuotaKey::T4Det, 4)?;
        if n == 0 {
            return Ok(());
        }
        self.need_adjectives(QuotaKey::T4Det, 4)?;
        for i in 0..n {
            let g = i / 2;
            let (first, second) = two_person_variant(g);
            let mut b = bind(&[
                ("A1", self.adjective(4 * g)),
                ("A2", self.adjective(4 * g + 1)),
                ("A3", self.adjective(4 * g + 2)),
                ("A4", self.adjective(4 * g + 3)),
                ("narrator", if i % 2 == 0 { "first" } else { "second" }),
            ]);
            participant_bindings(&mut b, first, second);
            let group = format!("T4-{:06}", g + 1);
            let id = format!("{group}n{}", i % 2 + 1);
            self.push(family, &b, id, Some(group))?;
        }
        Ok(())
    }

    /// Group `g` holds one (descriptor pair, orientation, adjective) triple
    /// rendered with he (`dm`), she (`df`) and they (`a`).
    fn char_stereotype(&mut self) -> Result<(), SuiteError> {
        let family = TemplateFamily::CharStereotype;
        let n_det = self.manifest.quota(QuotaKey::T5Det);
        let n_amb = self.manifest.quota(QuotaKey::T5Amb);
        if n_amb > n_det.div_ceil(2) {
            return Err(infeasible(
                QuotaKey::T5Amb,
                "quotas",
                format!("{n_amb} \"they\" slots need at least {} determined slots to pair with", 2 * n_amb - 1),
            ));
        }
        let groups = n_det.div_ceil(2);
        if groups == 0 {
            return Ok(());
        }
        let key = QuotaKey::T5Det;
        self.need_adjectives(key, 1)?;
        let pairs = &self.manifest.descriptor_pairs;
        if pairs.is_empty() {
            return Err(infeasible(key, "descriptor_pairs", "no character descriptor pairs"));
        }
        for g in 0..groups {
            let pair = &pairs[(g / 2) % pairs.len()];
            let stereotype = GENDERS[g % 2];
            let (c_g, c_g_bar) = match stereotype {
                Gender::Feminine => (&pair.feminine, &pair.masculine),
                Gender::Masculine => (&pair.masculine, &pair.feminine),
            };
            let c_g_text = c_g.to_string();
            let c_g_bar_text = c_g_bar.to_string();
            let mut b = bind(&[
                ("C_g", &c_g_text),
                ("C_g_bar", &c_g_bar_text),
                ("a_g", &c_g.adjective),
                ("occ_g", &c_g.occupation),
                ("stereotype", stereotype.as_str()),
                ("A", self.adjective(g)),
            ]);
            let group = format!("T5-{:06}", g + 1);
            let members = [
                (2 * g < n_det, "he", "dm"),
                (2 * g + 1 < n_det, "she", "df"),
                (g < n_amb, "they", "a"),
            ];
            for (present, pronoun, suffix) in members {
                if present {
                    b.insert("pronoun".into(), pronoun.into());
                    self.push(family, &b, format!("{group}{suffix}"), Some(group.clone()))?;
                }
            }
        }
        if n_det % 2 != 0 {
            self.warn(family, format!("{n_det} determined slots: he/she split differs by one"));
        }
        Ok(())
    }

    /// Group `g` is one adjective: the adverb-free instance (`n`) plus
    /// stereotyped rounds `m1..`, `f1..`.
    fn adverb_stereotype(&mut self) -> Result<(), SuiteError> {
        let family = TemplateFamily::AdverbStereotype;
        let n_none = self.manifest.quota(QuotaKey::T7None);
        let n_m = self.manifest.quota(QuotaKey::T7StereoM);
        let n_f = self.manifest.quota(QuotaKey::T7StereoF);
        let groups = if n_none > 0 { n_none } else { n_m.max(n_f) };
        if groups == 0 {
            return Ok(());
        }
        self.need_adjectives(QuotaKey::T7None, 1)?;
        for (count, list, key, name) in [
            (n_m, &self.manifest.adverbs.masculine, QuotaKey::T7StereoM, "adverbs.masculine"),
            (n_f, &self.manifest.adverbs.feminine, QuotaKey::T7StereoF, "adverbs.feminine"),
        ] {
            if count > 0 && list.is_empty() {
                return Err(infeasible(key, name, "no stereotyped adverbs"));
            }
        }
        for g in 0..n_none {
            let b = bind(&[("A", self.adjective(g))]);
            let group = format!("T7-{:06}", g + 1);
            self.push(family, &b, format!("{group}n"), Some(group.clone()))?;
        }
        for (count, gender, letter) in [(n_m, Gender::Masculine, 'm'), (n_f, Gender::Feminine, 'f')] {
            for j in 0..count {
                let g = j % groups;
                let round = j / groups;
                let list = match gender {
                    Gender::Masculine => &self.manifest.adverbs.masculine,
                    Gender::Feminine => &self.manifest.adverbs.feminine,
                };
                let adverb = list[(g + round) % list.len()].clone();
                let b = bind(&[
                    ("A", self.adjective(g)),
                    ("adverb", &adverb),
                    ("adverb_stereotype", gender.as_str()),
                ]);
                let group = format!("T7-{:06}", g + 1);
                self.push(family, &b, format!("{group}{letter}{}", round + 1), Some(group.clone()))?;
            }
        }
        if n_m != n_f {
            self.warn(family, format!("stereotyped quotas differ: {n_m} masculine vs {n_f} feminine"));
        }
        Ok(())
    }
}
