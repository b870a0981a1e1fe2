//! Generate, translate, score, measure and report in one call.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use thiserror::Error;

use crate::adapter::{translate_suite_resumable, AdapterConfig};
use crate::classify::{classify_instance, Language, Resources, SlotScore};
use crate::io::{
    parse_translations, render_report, write_metrics, write_scores, write_suite, write_translations,
    OrphanTranslation, ReportFormat, TranslationRecord,
};
use crate::metrics::{compute_metrics, MetricsDocument};
use crate::suite::{generate_suite, GenerationWarning, SuiteManifest, TestInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Generate,
    Translate,
    Score,
    Metrics,
    Report,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Translate => "translate",
            Stage::Score => "score",
            Stage::Metrics => "metrics",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

fn fail(stage: Stage) -> impl Fn(&dyn fmt::Display) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone)]
pub enum TranslationSource {
    /// A translations file; systems and languages are read from it.
    File(PathBuf),
    Records(Vec<TranslationRecord>),
    /// One live backend per (system, language).
    Adapters(Vec<AdapterConfig>),
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub manifest: SuiteManifest,
    /// Overrides the manifest seed.
    pub seed: Option<u64>,
    pub translations: TranslationSource,
    pub lexicon_dir: PathBuf,
    pub threshold: f64,
    /// When set, every intermediate file and `report.md` are written here.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub system: String,
    pub language: Language,
    pub scores: Vec<SlotScore>,
    pub metrics: MetricsDocument,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub suite: Vec<TestInstance>,
    pub warnings: Vec<GenerationWarning>,
    pub orphans: Vec<OrphanTranslation>,
    /// Ordered by language, then system.
    pub runs: Vec<RunOutput>,
    pub report: String,
}

/// Scores every translation against its instance. Instances without a
/// translation contribute no scores and show up as missing in coverage.
pub fn score_translations(suite: &[TestInstance], records: &[TranslationRecord], res: &Resources) -> Vec<SlotScore> {
    let by_id: HashMap<&str, &TestInstance> = suite.iter().map(|i| (i.id.as_str(), i)).collect();
    records
        .iter()
        .filter_map(|r| by_id.get(r.id.as_str()).map(|inst| classify_instance(inst, &r.text, res)))
        .flatten()
        .collect()
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    let mut manifest = config.manifest.clone();
    if let Some(seed) = config.seed {
        manifest.seed = seed;
    }
    let generated = generate_suite(&manifest).map_err(|e| fail(Stage::Generate)(&e))?;
    let suite = generated.instances;

    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir).map_err(|e| fail(Stage::Generate)(&e))?;
        write_file(&dir.join("suite.jsonl"), Stage::Generate, |w| write_suite(w, &suite))?;
    }

    let ids: HashSet<&str> = suite.iter().map(|i| i.id.as_str()).collect();
    let (records, orphans) = match &config.translations {
        TranslationSource::File(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| fail(Stage::Translate)(&format!("{}: {e}", path.display())))?;
            let t = parse_translations(&text, Some(&ids))
                .map_err(|e| fail(Stage::Translate)(&format!("{}: {e}", path.display())))?;
            (t.records, t.orphans)
        }
        TranslationSource::Records(records) => {
            let (known, unknown): (Vec<_>, Vec<_>) =
                records.iter().cloned().partition(|r| ids.contains(r.id.as_str()));
            let orphans = unknown
                .into_iter()
                .map(|r| OrphanTranslation {
                    line: 0,
                    system: r.system,
                    lang: r.lang,
                    id: r.id,
                })
                .collect();
            (known, orphans)
        }
        TranslationSource::Adapters(configs) => {
            let mut all = Vec::new();
            for adapter in configs {
                let checkpoint = match &config.out_dir {
                    Some(dir) => dir.join(format!("{}.partial", run_file_stem(&adapter.system, adapter.language))),
                    None => std::env::temp_dir().join(format!(
                        "gnt-{}-{}.partial",
                        std::process::id(),
                        run_file_stem(&adapter.system, adapter.language)
                    )),
                };
                let records = translate_suite_resumable(&suite, adapter, &checkpoint).map_err(|e| {
                    fail(Stage::Translate)(&format!("{} ({}): {e}", adapter.system, adapter.language))
                })?;
                let _ = fs::remove_file(&checkpoint);
                all.extend(records);
            }
            if let Some(dir) = &config.out_dir {
                write_file(&dir.join("translations.jsonl"), Stage::Translate, |w| write_translations(w, &all))?;
            }
            (all, Vec::new())
        }
    };

    let mut grouped: BTreeMap<(Language, String), Vec<TranslationRecord>> = BTreeMap::new();
    for r in records {
        grouped.entry((r.lang, r.system.clone())).or_default().push(r);
    }

    let languages: Vec<Language> = {
        let mut l: Vec<Language> = grouped.keys().map(|(l, _)| *l).collect();
        l.dedup();
        l
    };
    let mut resources: HashMap<Language, Resources> = HashMap::new();
    for lang in languages {
        let res = Resources::load_dir(&config.lexicon_dir, lang).map_err(|e| fail(Stage::Score)(&e))?;
        resources.insert(lang, res);
    }

    // Runs are independent; each one scores and measures on its own thread.
    let results: Vec<Result<RunOutput, PipelineError>> = thread::scope(|s| {
        let handles: Vec<_> = grouped
            .iter()
            .map(|((lang, system), records)| {
                let res = &resources[lang];
                let suite = &suite;
                s.spawn(move || {
                    let scores = score_translations(suite, records, res);
                    let metrics = compute_metrics(system, *lang, suite, &scores, config.threshold)
                        .map_err(|e| fail(Stage::Metrics)(&format!("{system} ({lang}): {e}")))?;
                    Ok(RunOutput {
                        system: system.clone(),
                        language: *lang,
                        scores,
                        metrics,
                    })
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    let runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let docs: Vec<MetricsDocument> = runs.iter().map(|r| r.metrics.clone()).collect();
    let report = render_report(&docs, ReportFormat::Markdown);

    if let Some(dir) = &config.out_dir {
        let scores_dir = dir.join("scores");
        fs::create_dir_all(&scores_dir).map_err(|e| fail(Stage::Score)(&e))?;
        for run in &runs {
            let path = scores_dir.join(format!("{}.jsonl", run_file_stem(&run.system, run.language)));
            write_file(&path, Stage::Score, |w| write_scores(w, &run.scores))?;
        }
        write_file(&dir.join("metrics.jsonl"), Stage::Metrics, |w| write_metrics(w, &docs))?;
        fs::write(dir.join("report.md"), &report).map_err(|e| fail(Stage::Report)(&e))?;
    }

    Ok(PipelineOutput {
        suite,
        warnings: generated.warnings,
        orphans,
        runs,
        report,
    })
}

/// `<system>.<lang>` with anything outside `[A-Za-z0-9._-]` replaced.
pub fn run_file_stem(system: &str, language: Language) -> String {
    let safe: String = system
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    format!("{safe}.{}", language.code())
}

fn write_file(
    path: &Path,
    stage: Stage,
    write: impl FnOnce(&mut std::io::BufWriter<fs::File>) -> Result<(), crate::io::IoError>,
) -> Result<(), PipelineError> {
    let file = fs::File::create(path).map_err(|e| fail(stage)(&format!("{}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    write(&mut w).map_err(|e| fail(stage)(&format!("{}: {e}", path.display())))
}
