//! Proportion vectors over classified slots and the deltas between
//! conditions. Everything here is generic over [`Scalar`], so the same
//! code runs in `f64` or in exact rationals.

mod document;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::GenderLabel;
use crate::scalar::Scalar;
use crate::suite::TemplateFamily;

pub use document::{
    compute_metrics, join_scores, Baseline, Coverage, FamilyBreakdown, FamilyCoverage, FamilyResponse,
    Joined, MetricsDocument, ResponseSection, ScoredSlot, StereotypeSection, DEFAULT_THRESHOLD,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no classified slots in selection ({unmatched} unmatched)")]
    EmptySelection { unmatched: u64 },
    #[error("significance threshold must be a finite non-negative number, got {0}")]
    InvalidThreshold(String),
    #[error("macro average needs at least one report")]
    NoReports,
    #[error("family {0} contributes more than one report")]
    DuplicateFamily(TemplateFamily),
}

/// Raw label tallies. Merging is commutative and associative, so tallies
/// can be reduced in any order before the single division.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts {
    pub m: u64,
    pub f: u64,
    pub n: [u64; 5],
    pub u: u64,
}

impl LabelCounts {
    pub fn add(&mut self, label: GenderLabel) {
        match label {
            GenderLabel::Masculine => self.m += 1,
            GenderLabel::Feminine => self.f += 1,
            GenderLabel::Unmatched => self.u += 1,
            other => self.n[other.neutral_index().expect("neutral label")] += 1,
        }
    }

    pub fn merge(&mut self, other: &LabelCounts) {
        self.m += other.m;
        self.f += other.f;
        self.u += other.u;
        for (a, b) in self.n.iter_mut().zip(other.n) {
            *a += b;
        }
    }

    pub fn classified(&self) -> u64 {
        self.m + self.f + self.n.iter().sum::<u64>()
    }

    pub fn total(&self) -> u64 {
        self.classified() + self.u
    }
}

impl FromIterator<GenderLabel> for LabelCounts {
    fn from_iter<I: IntoIterator<Item = GenderLabel>>(iter: I) -> Self {
        let mut c = LabelCounts::default();
        for label in iter {
            c.add(label);
        }
        c
    }
}

/// Proportions of M, F and the neutral strategies over classified slots.
/// Unmatched slots are excluded from the denominator; `u` is their share of
/// all selected slots and is reported for coverage only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyBreakdown<T> {
    pub m: T,
    pub f: T,
    pub n: T,
    /// N1..N5. `None` when built from a bare (M, F, N) triplet.
    pub strategies: Option<[T; 5]>,
    pub u: T,
    pub count: u64,
    pub u_count: u64,
}

impl<T: Scalar> StrategyBreakdown<T> {
    pub fn from_counts(c: &LabelCounts) -> Result<Self, MetricsError> {
        let count = c.classified();
        if count == 0 {
            return Err(MetricsError::EmptySelection { unmatched: c.u });
        }
        let d = T::from_count(count);
        let p = |k: u64| T::from_count(k) / d.clone();
        let strategies = c.n.map(p);
        let n = p(c.n.iter().sum());
        Ok(StrategyBreakdown {
            m: p(c.m),
            f: p(c.f),
            n,
            strategies: Some(strategies),
            u: T::from_count(c.u) / T::from_count(c.total()),
            count,
            u_count: c.u,
        })
    }

    /// A breakdown known only through its rounded (M, F, N) triplet.
    pub fn from_triplet(m: T, f: T, n: T) -> Self {
        StrategyBreakdown {
            m,
            f,
            n,
            strategies: None,
            u: T::zero(),
            count: 0,
            u_count: 0,
        }
    }

    pub fn total(&self) -> T {
        self.m.clone() + self.f.clone() + self.n.clone()
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> StrategyBreakdown<U> {
        StrategyBreakdown {
            m: f(&self.m),
            f: f(&self.f),
            n: f(&self.n),
            strategies: self.strategies.as_ref().map(|s| [f(&s[0]), f(&s[1]), f(&s[2]), f(&s[3]), f(&s[4])]),
            u: f(&self.u),
            count: self.count,
            u_count: self.u_count,
        }
    }
}

/// Proportions for the slots passing `filter`.
pub fn aggregate<T: Scalar, S>(
    items: impl IntoIterator<Item = S>,
    label: impl Fn(&S) -> GenderLabel,
    filter: impl Fn(&S) -> bool,
) -> Result<StrategyBreakdown<T>, MetricsError> {
    let counts: LabelCounts = items.into_iter().filter(|s| filter(s)).map(|s| label(&s)).collect();
    if counts.total() == 0 {
        return Err(MetricsError::EmptySelection { unmatched: 0 });
    }
    StrategyBreakdown::from_counts(&counts)
}

/// Validated significance cut-off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold<T>(T);

impl<T: Scalar> Threshold<T> {
    pub fn new(value: T) -> Result<Self, MetricsError> {
        if value.is_negative() || value.to_f64_lossy().is_nan() {
            return Err(MetricsError::InvalidThreshold(format!("{value:?}")));
        }
        Ok(Threshold(value))
    }

    pub fn value(&self) -> &T {
        &self.0
    }

    pub fn flags(&self, delta: &T) -> bool {
        delta.abs() >= self.0
    }
}

/// True iff |delta| >= threshold.
pub fn flag_significance<T: Scalar>(delta: &T, threshold: &T) -> Result<bool, MetricsError> {
    Ok(Threshold::new(threshold.clone())?.flags(delta))
}

/// Change from the determined to the ambiguous condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseReport<T> {
    pub det: StrategyBreakdown<T>,
    pub amb: StrategyBreakdown<T>,
    pub delta_m: T,
    pub delta_f: T,
    pub delta_n: T,
    pub delta_strategies: Option<[T; 5]>,
    pub significant_m: bool,
    pub significant_n: bool,
}

fn sub5<T: Scalar>(a: &Option<[T; 5]>, b: &Option<[T; 5]>) -> Option<[T; 5]> {
    match (a, b) {
        (Some(a), Some(b)) => Some(std::array::from_fn(|i| a[i].clone() - b[i].clone())),
        _ => None,
    }
}

pub fn paired_response<T: Scalar>(
    det: StrategyBreakdown<T>,
    amb: StrategyBreakdown<T>,
    threshold: &Threshold<T>,
) -> ResponseReport<T> {
    let delta_m = amb.m.clone() - det.m.clone();
    let delta_f = amb.f.clone() - det.f.clone();
    let delta_n = amb.n.clone() - det.n.clone();
    let delta_strategies = sub5(&amb.strategies, &det.strategies);
    ResponseReport {
        significant_m: threshold.flags(&delta_m),
        significant_n: threshold.flags(&delta_n),
        det,
        amb,
        delta_m,
        delta_f,
        delta_n,
        delta_strategies,
    }
}

impl<T: Scalar> ResponseReport<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> ResponseReport<U> {
        ResponseReport {
            det: self.det.map(&f),
            amb: self.amb.map(&f),
            delta_m: f(&self.delta_m),
            delta_f: f(&self.delta_f),
            delta_n: f(&self.delta_n),
            delta_strategies: self
                .delta_strategies
                .as_ref()
                .map(|s| [f(&s[0]), f(&s[1]), f(&s[2]), f(&s[3]), f(&s[4])]),
            significant_m: self.significant_m,
            significant_n: self.significant_n,
        }
    }
}

fn mean<T: Scalar>(xs: impl Iterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut n = 0u64;
    for x in xs {
        sum = sum + x;
        n += 1;
    }
    sum / T::from_count(n)
}

fn mean_breakdown<T: Scalar>(bs: &[&StrategyBreakdown<T>]) -> StrategyBreakdown<T> {
    let strategies = if bs.iter().all(|b| b.strategies.is_some()) {
        Some(std::array::from_fn(|i| {
            mean(bs.iter().map(|b| b.strategies.as_ref().expect("checked")[i].clone()))
        }))
    } else {
        None
    };
    StrategyBreakdown {
        m: mean(bs.iter().map(|b| b.m.clone())),
        f: mean(bs.iter().map(|b| b.f.clone())),
        n: mean(bs.iter().map(|b| b.n.clone())),
        strategies,
        u: mean(bs.iter().map(|b| b.u.clone())),
        count: bs.iter().map(|b| b.count).sum(),
        u_count: bs.iter().map(|b| b.u_count).sum(),
    }
}

/// Unweighted mean over families of every proportion and delta; counts are
/// summed. Significance is re-flagged on the averaged deltas.
pub fn macro_average<T: Scalar>(
    reports: &[(TemplateFamily, ResponseReport<T>)],
    threshold: &Threshold<T>,
) -> Result<ResponseReport<T>, MetricsError> {
    if reports.is_empty() {
        return Err(MetricsError::NoReports);
    }
    for (i, (family, _)) in reports.iter().enumerate() {
        if reports[..i].iter().any(|(f, _)| f == family) {
            return Err(MetricsError::DuplicateFamily(*family));
        }
    }
    let dets: Vec<_> = reports.iter().map(|(_, r)| &r.det).collect();
    let ambs: Vec<_> = reports.iter().map(|(_, r)| &r.amb).collect();
    let delta_m = mean(reports.iter().map(|(_, r)| r.delta_m.clone()));
    let delta_n = mean(reports.iter().map(|(_, r)| r.delta_n.clone()));
    let delta_strategies = if reports.iter().all(|(_, r)| r.delta_strategies.is_some()) {
        Some(std::array::from_fn(|i| {
            mean(reports.iter().map(|(_, r)| r.delta_strategies.as_ref().expect("checked")[i].clone()))
        }))
    } else {
        None
    };
    Ok(ResponseReport {
        det: mean_breakdown(&dets),
        amb: mean_breakdown(&ambs),
        significant_m: threshold.flags(&delta_m),
        significant_n: threshold.flags(&delta_n),
        delta_m,
        delta_f: mean(reports.iter().map(|(_, r)| r.delta_f.clone())),
        delta_n,
        delta_strategies,
    })
}

/// Shift of binary-gender and neutral proportions under stereotype cues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereotypeReport<T> {
    pub neutral: StrategyBreakdown<T>,
    pub stereo_m: StrategyBreakdown<T>,
    pub stereo_f: StrategyBreakdown<T>,
    pub delta_g_avg: T,
    pub delta_n_avg: T,
    pub significant_g: bool,
}

/// `delta_g_avg` averages the masculine shift under masculine cues and the
/// feminine shift under feminine cues; `delta_n_avg` averages the neutral
/// shift under both.
pub fn compute_stereotype_effect<T: Scalar>(
    neutral: StrategyBreakdown<T>,
    stereo_m: StrategyBreakdown<T>,
    stereo_f: StrategyBreakdown<T>,
    threshold: &Threshold<T>,
) -> StereotypeReport<T> {
    let delta_g_avg = ((stereo_m.m.clone() - neutral.m.clone()) + (stereo_f.f.clone() - neutral.f.clone())).half();
    let delta_n_avg = ((stereo_m.n.clone() - neutral.n.clone()) + (stereo_f.n.clone() - neutral.n.clone())).half();
    StereotypeReport {
        significant_g: threshold.flags(&delta_g_avg),
        neutral,
        stereo_m,
        stereo_f,
        delta_g_avg,
        delta_n_avg,
    }
}

impl<T: Scalar> StereotypeReport<T> {
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> StereotypeReport<U> {
        StereotypeReport {
            neutral: self.neutral.map(&f),
            stereo_m: self.stereo_m.map(&f),
            stereo_f: self.stereo_f.map(&f),
            delta_g_avg: f(&self.delta_g_avg),
            delta_n_avg: f(&self.delta_n_avg),
            significant_g: self.significant_g,
        }
    }
}
