//! The per-(system, language) metrics document.
//!
//! Proportions are computed in exact rationals and converted to `f64` once,
//! at the end.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{
    compute_stereotype_effect, macro_average, paired_response, LabelCounts, MetricsError, ResponseReport,
    StereotypeReport, StrategyBreakdown, Threshold,
};
use crate::classify::{GenderLabel, Language, SlotScore};
use crate::scalar::{rational_from_decimal, Scalar};
use crate::suite::{AdjectiveSlot, AmbiguityKind, StereotypeKind, TemplateFamily, TestInstance};

pub const DEFAULT_THRESHOLD: f64 = 0.07;

/// A suite slot joined with its score.
#[derive(Debug, Clone, Copy)]
pub struct ScoredSlot<'a> {
    pub instance: &'a TestInstance,
    pub slot: &'a AdjectiveSlot,
    pub label: GenderLabel,
}

#[derive(Debug, Clone, Default)]
pub struct Joined<'a> {
    pub slots: Vec<ScoredSlot<'a>>,
    /// Scores naming a slot the suite does not have, or repeating one.
    pub orphan_scores: Vec<(String, usize)>,
    /// Suite slots with no score.
    pub missing: Vec<(String, usize)>,
}

/// Joins scores to suite slots by (instance id, slot index). The first
/// score for a slot wins; later ones count as orphans.
pub fn join_scores<'a>(suite: &'a [TestInstance], scores: &[SlotScore]) -> Joined<'a> {
    let mut index: BTreeMap<(&str, usize), (&TestInstance, &AdjectiveSlot)> = BTreeMap::new();
    for inst in suite {
        for slot in &inst.slots {
            index.insert((inst.id.as_str(), slot.slot_index), (inst, slot));
        }
    }
    let mut joined = Joined::default();
    let mut seen = BTreeSet::new();
    for s in scores {
        let key = (s.instance_id.as_str(), s.slot_index);
        match index.get(&key) {
            Some(&(instance, slot)) if seen.insert(key) => joined.slots.push(ScoredSlot {
                instance,
                slot,
                label: s.label,
            }),
            _ => joined.orphan_scores.push((s.instance_id.clone(), s.slot_index)),
        }
    }
    for (key, _) in index {
        if !seen.contains(&key) {
            joined.missing.push((key.0.to_string(), key.1));
        }
    }
    joined
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyBreakdown {
    pub family: TemplateFamily,
    pub breakdown: StrategyBreakdown<f64>,
}

/// Determined-gender proportions over the omission template types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub families: Vec<TemplateFamily>,
    pub n_det: f64,
    pub breakdown: StrategyBreakdown<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResponse {
    /// Families pooled into this template type; the last one carries the
    /// ambiguous slots.
    pub families: Vec<TemplateFamily>,
    pub report: ResponseReport<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseSection {
    pub template_types: Vec<FamilyResponse>,
    pub macro_average: ResponseReport<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereotypeSection {
    pub family: TemplateFamily,
    pub report: StereotypeReport<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyCoverage {
    pub family: TemplateFamily,
    pub slots: u64,
    pub unmatched: u64,
    pub missing: u64,
    pub u_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub suite_slots: u64,
    pub scored_slots: u64,
    pub unmatched: u64,
    pub u_rate: Option<f64>,
    pub missing_scores: u64,
    pub orphan_scores: u64,
    pub families: Vec<FamilyCoverage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub system: String,
    pub language: Language,
    pub threshold: f64,
    pub baseline: Option<Baseline>,
    pub strategy_breakdown: Vec<FamilyBreakdown>,
    pub omission_response: Option<ResponseSection>,
    pub active_response: Option<ResponseSection>,
    pub stereotype: Option<StereotypeSection>,
    pub coverage: Coverage,
}

type Q = BigRational;

fn to_f64(q: &Q) -> f64 {
    q.to_f64_lossy()
}

fn counts(slots: &[ScoredSlot<'_>], pred: impl Fn(&ScoredSlot<'_>) -> bool) -> LabelCounts {
    slots.iter().filter(|s| pred(s)).map(|s| s.label).collect()
}

fn breakdown(c: &LabelCounts) -> Option<StrategyBreakdown<Q>> {
    StrategyBreakdown::from_counts(c).ok()
}

fn det(s: &ScoredSlot<'_>) -> bool {
    s.slot.gender.is_determined()
}

/// Omission template types: each pools a fully determined family with its
/// partially ambiguous perturbation.
const OMISSION_TYPES: [(TemplateFamily, TemplateFamily); 2] = [
    (TemplateFamily::OnePersonKnown, TemplateFamily::OnePersonPartial),
    (TemplateFamily::TwoPersonKnown, TemplateFamily::TwoPersonPartial),
];

/// Builds the metrics document for one system and language. Scores that do
/// not join the suite are counted in coverage and otherwise ignored.
pub fn compute_metrics(
    system: &str,
    language: Language,
    suite: &[TestInstance],
    scores: &[SlotScore],
    threshold: f64,
) -> Result<MetricsDocument, MetricsError> {
    let t = Threshold::new(
        rational_from_decimal(threshold).ok_or_else(|| MetricsError::InvalidThreshold(threshold.to_string()))?,
    )?;
    let joined = join_scores(suite, scores);
    let slots = &joined.slots;

    // Omission: per template type, pooled determined vs ambiguous.
    let mut omission: Vec<(Vec<TemplateFamily>, TemplateFamily, ResponseReport<Q>)> = Vec::new();
    let mut baseline_parts: Vec<(Vec<TemplateFamily>, TemplateFamily, StrategyBreakdown<Q>)> = Vec::new();
    for (known, partial) in OMISSION_TYPES {
        let in_type = |s: &ScoredSlot<'_>| s.instance.family == known || s.instance.family == partial;
        let present: Vec<TemplateFamily> = [known, partial]
            .into_iter()
            .filter(|f| slots.iter().any(|s| s.instance.family == *f && det(s)))
            .collect();
        let Some(d) = breakdown(&counts(slots, |s| in_type(s) && det(s))) else {
            continue;
        };
        baseline_parts.push((present.clone(), partial, d.clone()));
        let amb = counts(slots, |s| {
            s.instance.family == partial && s.slot.gender.ambiguity() == AmbiguityKind::Omission
        });
        if let Some(a) = breakdown(&amb) {
            omission.push((present, partial, paired_response(d, a, &t)));
        }
    }

    let baseline = if baseline_parts.is_empty() {
        None
    } else {
        // Macro-average the determined side only, reusing macro_average with
        // a zero-delta pairing.
        let pseudo: Vec<(TemplateFamily, ResponseReport<Q>)> = baseline_parts
            .iter()
            .map(|(_, key, d)| (*key, paired_response(d.clone(), d.clone(), &t)))
            .collect();
        let avg = macro_average(&pseudo, &t)?.det;
        Some(Baseline {
            families: baseline_parts.iter().flat_map(|(f, _, _)| f.clone()).collect(),
            n_det: to_f64(&avg.n),
            breakdown: avg.map(to_f64),
        })
    };

    let omission_response = response_section(omission, &t)?;

    let active = {
        let t5 = |s: &ScoredSlot<'_>| s.instance.family == TemplateFamily::CharStereotype;
        let d = breakdown(&counts(slots, |s| t5(s) && det(s)));
        let a = breakdown(&counts(slots, |s| t5(s) && s.slot.gender.ambiguity() == AmbiguityKind::Active));
        match (d, a) {
            (Some(d), Some(a)) => vec![(
                vec![TemplateFamily::CharStereotype],
                TemplateFamily::CharStereotype,
                paired_response(d, a, &t),
            )],
            _ => Vec::new(),
        }
    };
    let active_response = response_section(active, &t)?;

    let stereotype = {
        let t7 = |k: StereotypeKind| {
            breakdown(&counts(slots, |s| {
                s.instance.family == TemplateFamily::AdverbStereotype && s.slot.stereotype.kind() == k
            }))
        };
        match (
            t7(StereotypeKind::None),
            t7(StereotypeKind::Masculine),
            t7(StereotypeKind::Feminine),
        ) {
            (Some(n), Some(m), Some(f)) => Some(StereotypeSection {
                family: TemplateFamily::AdverbStereotype,
                report: compute_stereotype_effect(n, m, f, &t).map(to_f64),
            }),
            _ => None,
        }
    };

    let strategy_breakdown = TemplateFamily::ALL
        .into_iter()
        .filter_map(|family| {
            breakdown(&counts(slots, |s| s.instance.family == family && det(s))).map(|b| FamilyBreakdown {
                family,
                breakdown: b.map(to_f64),
            })
        })
        .collect();

    Ok(MetricsDocument {
        system: system.to_string(),
        language,
        threshold,
        baseline,
        strategy_breakdown,
        omission_response,
        active_response,
        stereotype,
        coverage: coverage(suite, &joined),
    })
}

fn response_section(
    parts: Vec<(Vec<TemplateFamily>, TemplateFamily, ResponseReport<Q>)>,
    t: &Threshold<Q>,
) -> Result<Option<ResponseSection>, MetricsError> {
    if parts.is_empty() {
        return Ok(None);
    }
    let keyed: Vec<(TemplateFamily, ResponseReport<Q>)> =
        parts.iter().map(|(_, key, r)| (*key, r.clone())).collect();
    let avg = macro_average(&keyed, t)?;
    Ok(Some(ResponseSection {
        template_types: parts
            .into_iter()
            .map(|(families, _, r)| FamilyResponse {
                families,
                report: r.map(to_f64),
            })
            .collect(),
        macro_average: avg.map(to_f64),
    }))
}

fn coverage(suite: &[TestInstance], joined: &Joined<'_>) -> Coverage {
    let mut families = Vec::new();
    for family in TemplateFamily::ALL {
        let slots: u64 = suite
            .iter()
            .filter(|i| i.family == family)
            .map(|i| i.slots.len() as u64)
            .sum();
        if slots == 0 {
            continue;
        }
        let scored = joined.slots.iter().filter(|s| s.instance.family == family);
        let (n, unmatched) = scored.fold((0u64, 0u64), |(n, u), s| {
            (n + 1, u + u64::from(s.label == GenderLabel::Unmatched))
        });
        families.push(FamilyCoverage {
            family,
            slots,
            unmatched,
            missing: slots - n,
            u_rate: if n == 0 { 0.0 } else { unmatched as f64 / n as f64 },
        });
    }
    let scored = joined.slots.len() as u64;
    let unmatched = joined.slots.iter().filter(|s| s.label == GenderLabel::Unmatched).count() as u64;
    Coverage {
        suite_slots: suite.iter().map(|i| i.slots.len() as u64).sum(),
        scored_slots: scored,
        unmatched,
        u_rate: (scored > 0).then(|| unmatched as f64 / scored as f64),
        missing_scores: joined.missing.len() as u64,
        orphan_scores: joined.orphan_scores.len() as u64,
        families,
    }
}
