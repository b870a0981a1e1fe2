mod support;

use std::time::Duration;

use gnt_core::adapter::{AdapterConfig, AdapterKind};
use gnt_core::classify::Language;
use gnt_core::io::TranslationRecord;
use gnt_core::pipeline::{run_pipeline, PipelineConfig, Stage, TranslationSource};

fn config(translations: TranslationSource) -> PipelineConfig {
    PipelineConfig {
        manifest: support::demo_manifest(),
        seed: None,
        translations,
        lexicon_dir: support::data_dir().join("lexicon"),
        threshold: 0.07,
        out_dir: None,
    }
}

fn adapter(script: &str, system: &str) -> AdapterConfig {
    AdapterConfig {
        kind: AdapterKind::ExternalCommand,
        target: support::fixture_backend(script),
        language: Language::Es,
        system: system.into(),
        batch_size: 16,
        timeout: Duration::from_secs(30),
        max_retries: 0,
        backoff: Duration::from_millis(1),
        concurrency: 2,
    }
}

#[test]
fn one_run_per_system_and_language() {
    let suite = run_pipeline(&config(TranslationSource::Records(Vec::new()))).unwrap().suite;
    let mut records = Vec::new();
    for (system, lang) in [("a", Language::Es), ("b", Language::Es), ("a", Language::Is), ("c", Language::Cs)] {
        records.extend(suite.iter().map(|i| TranslationRecord {
            system: system.into(),
            lang,
            id: i.id.clone(),
            text: i.source_text.clone(),
        }));
    }
    records.push(TranslationRecord {
        system: "a".into(),
        lang: Language::Es,
        id: "T9-000001x".into(),
        text: String::new(),
    });
    let out = run_pipeline(&config(TranslationSource::Records(records))).unwrap();
    let runs: Vec<(Language, &str)> = out.runs.iter().map(|r| (r.language, r.system.as_str())).collect();
    assert_eq!(
        runs,
        [(Language::Is, "a"), (Language::Cs, "c"), (Language::Es, "a"), (Language::Es, "b")]
    );
    assert_eq!(out.orphans.len(), 1);
    for run in &out.runs {
        assert_eq!(run.metrics.coverage.missing_scores, 0);
        assert_eq!(run.metrics.coverage.suite_slots, 226);
    }
}

#[test]
fn partial_translations_only_cover_their_instances() {
    let suite = run_pipeline(&config(TranslationSource::Records(Vec::new()))).unwrap().suite;
    let records = vec![TranslationRecord {
        system: "lonely".into(),
        lang: Language::Es,
        id: suite[0].id.clone(),
        text: suite[0].source_text.clone(),
    }];
    let out = run_pipeline(&config(TranslationSource::Records(records))).unwrap();
    assert_eq!(out.runs.len(), 1);
    let c = &out.runs[0].metrics.coverage;
    assert_eq!(c.scored_slots as usize, suite[0].slots.len());
    assert_eq!(c.missing_scores as usize, 226 - suite[0].slots.len());
}

#[test]
fn missing_lexicon_fails_in_score_stage() {
    let suite = run_pipeline(&config(TranslationSource::Records(Vec::new()))).unwrap().suite;
    let mut c = config(TranslationSource::Records(vec![TranslationRecord {
        system: "x".into(),
        lang: Language::Is,
        id: suite[0].id.clone(),
        text: "x".into(),
    }]));
    c.lexicon_dir = support::data_dir().join("no-such-dir");
    let err = run_pipeline(&c).unwrap_err();
    assert_eq!(err.stage, Stage::Score);
    assert!(err.to_string().starts_with("score stage failed"));
}

#[test]
fn infeasible_manifest_fails_in_generate_stage() {
    let mut c = config(TranslationSource::Records(Vec::new()));
    c.manifest.adjectives.truncate(1);
    assert_eq!(run_pipeline(&c).unwrap_err().stage, Stage::Generate);
}

#[test]
fn failing_backend_fails_in_translate_stage() {
    let mut a = adapter("echo-mt.sh", "broken");
    a.target = "exit 1".into();
    let err = run_pipeline(&config(TranslationSource::Adapters(vec![a]))).unwrap_err();
    assert_eq!(err.stage, Stage::Translate);
    assert!(err.message.contains("broken (es)"), "{err}");
}

#[test]
fn scripted_backend_moves_only_the_active_response() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(TranslationSource::Adapters(vec![
        adapter("fake-mt-es.sh", "fake"),
        adapter("echo-mt.sh", "echo"),
    ]));
    c.out_dir = Some(dir.path().to_path_buf());
    let out = run_pipeline(&c).unwrap();

    let fake = out.runs.iter().find(|r| r.system == "fake").unwrap();
    let active = &fake.metrics.active_response.as_ref().unwrap().macro_average;
    assert!((active.delta_n - 0.35).abs() < 1e-12, "{}", active.delta_n);
    assert!(active.significant_n);
    assert_eq!(active.det.n, 0.0);
    let omission = &fake.metrics.omission_response.as_ref().unwrap().macro_average;
    assert_eq!((omission.delta_m, omission.delta_n), (0.0, 0.0));
    let stereo = &fake.metrics.stereotype.as_ref().unwrap().report;
    assert_eq!((stereo.delta_g_avg, stereo.delta_n_avg), (0.0, 0.0));

    for name in [
        "suite.jsonl",
        "translations.jsonl",
        "metrics.jsonl",
        "report.md",
        "scores/fake.es.jsonl",
        "scores/echo.es.jsonl",
    ] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    assert!(!dir.path().join("fake.es.partial").exists());
    assert_eq!(std::fs::read_to_string(dir.path().join("report.md")).unwrap(), out.report);
}
