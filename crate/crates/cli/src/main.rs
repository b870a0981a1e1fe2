use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gnt_core::adapter::{translate_suite_resumable, AdapterConfig};
use gnt_core::classify::{Language, Resources};
use gnt_core::io::{
    parse_metrics, parse_scores, parse_suite, parse_translations, render_report, write_metrics, write_scores,
    write_suite, write_translations, ReportFormat,
};
use gnt_core::metrics::{compute_metrics, DEFAULT_THRESHOLD};
use gnt_core::pipeline::{run_pipeline, score_translations, PipelineConfig, TranslationSource};
use gnt_core::suite::{generate_suite, validate_balance, SuiteManifest};

#[derive(Parser)]
#[command(name = "gnt", version, about = "Gender-ambiguity test suites for MT: generate, score, measure, report")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a test suite from a manifest.
    Generate {
        #[arg(long)]
        manifest: PathBuf,
        /// Overrides the manifest seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a suite's balance properties. Exits nonzero on any violation.
    Validate {
        #[arg(long)]
        suite: PathBuf,
        /// Also check slot counts against this manifest's quotas.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Classify the adjective translations of one system.
    Score {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        translations: PathBuf,
        #[arg(long, env = "GNT_LEXICON_DIR")]
        lexicon_dir: PathBuf,
        #[arg(long)]
        lang: Language,
        /// Needed when the file holds more than one system for `--lang`.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute response metrics from scores.
    Metrics {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Defaults to the scores file name, `<system>.<lang>.jsonl`.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        lang: Option<Language>,
        /// Appends to an existing metrics file rather than replacing it.
        #[arg(long)]
        append: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render metrics as tables.
    Report {
        #[arg(long, num_args = 1..)]
        metrics: Vec<PathBuf>,
        #[arg(long, default_value = "md")]
        format: ReportFormat,
        /// Standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate, translate or read translations, score, measure and report.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, required_unless_present = "adapter", conflicts_with = "adapter")]
        translations: Option<PathBuf>,
        /// Translate live instead of reading `--translations`. Repeatable;
        /// the n-th adapter pairs with the n-th `--system` and `--lang`.
        #[arg(long)]
        adapter: Vec<String>,
        #[arg(long)]
        system: Vec<String>,
        #[arg(long)]
        lang: Vec<Language>,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long, env = "GNT_LEXICON_DIR")]
        lexicon_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Translate a suite through an external command or HTTP endpoint.
    Translate {
        #[arg(long)]
        suite: PathBuf,
        /// `cmd:<command line>` or `http:<url>`.
        #[arg(long)]
        adapter: String,
        #[arg(long)]
        lang: Language,
        #[arg(long)]
        system: String,
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BackendArgs {
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Seconds per batch attempt.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    /// Batches in flight at once.
    #[arg(long, default_value_t = 1)]
    concurrency: usize,
}

impl BackendArgs {
    fn config(&self, spec: &str, lang: Language, system: &str) -> Result<AdapterConfig> {
        let mut c = AdapterConfig::from_spec(spec, lang, system)?;
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            bail!("--timeout must be a positive number of seconds");
        }
        c.batch_size = self.batch_size;
        c.timeout = Duration::from_secs_f64(self.timeout);
        c.max_retries = self.max_retries;
        c.concurrency = self.concurrency;
        c.check()?;
        Ok(c)
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(f))
}

fn load_manifest(path: &Path) -> Result<SuiteManifest> {
    SuiteManifest::from_json(&read(path)?).with_context(|| format!("manifest {}", path.display()))
}

fn load_suite(path: &Path) -> Result<Vec<gnt_core::suite::TestInstance>> {
    parse_suite(&read(path)?).with_context(|| format!("suite {}", path.display()))
}

/// Splits `<system>.<lang>.jsonl` into its parts.
fn run_from_file_name(path: &Path) -> Option<(String, Language)> {
    let stem = path.file_stem()?.to_str()?;
    let (system, lang) = stem.rsplit_once('.')?;
    Some((system.to_string(), lang.parse().ok()?))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Cmd::Generate { manifest, seed, out } => {
            let mut m = load_manifest(&manifest)?;
            if let Some(seed) = seed {
                m.seed = seed;
            }
            let generated = generate_suite(&m)?;
            for w in &generated.warnings {
                eprintln!("warning: {w}");
            }
            write_suite(create(&out)?, &generated.instances)?;
            eprintln!(
                "{} instances, {} slots -> {}",
                generated.instances.len(),
                generated.slot_count(),
                out.display()
            );
        }
        Cmd::Validate { suite, manifest } => {
            let instances = load_suite(&suite)?;
            let expected = manifest.as_deref().map(load_manifest).transpose()?;
            let diag = validate_balance(&instances, expected.as_ref().map(|m| &m.quotas));
            for (family, stats) in &diag.families {
                println!(
                    "{family}: {} instances, {} slots, determined F/M {}/{}, narrator 1st/2nd {}/{}",
                    stats.instances,
                    stats.slots,
                    stats.determined_feminine,
                    stats.determined_masculine,
                    stats.narrator_first,
                    stats.narrator_second
                );
            }
            for v in &diag.violations {
                println!("violation: {v}");
            }
            if !diag.is_clean() {
                eprintln!("{} violations", diag.violations.len());
                return Ok(ExitCode::FAILURE);
            }
            println!("ok");
        }
        Cmd::Score {
            suite,
            translations,
            lexicon_dir,
            lang,
            system,
            out,
        } => {
            let instances = load_suite(&suite)?;
            let ids: HashSet<&str> = instances.iter().map(|i| i.id.as_str()).collect();
            let t = parse_translations(&read(&translations)?, Some(&ids))
                .with_context(|| format!("translations {}", translations.display()))?;
            if !t.orphans.is_empty() {
                eprintln!("warning: {} translations name ids outside the suite", t.orphans.len());
            }
            let systems: Vec<String> = t
                .runs()
                .into_iter()
                .filter(|(s, l)| *l == lang && system.as_ref().is_none_or(|want| want == s))
                .map(|(s, _)| s)
                .collect();
            let chosen = match systems.as_slice() {
                [one] => one.clone(),
                [] => bail!("no {lang} translations{}", system.map(|s| format!(" for {s}")).unwrap_or_default()),
                many => bail!("several {lang} systems ({}); pick one with --system", many.join(", ")),
            };
            let records: Vec<_> =
                t.records.into_iter().filter(|r| r.lang == lang && r.system == chosen).collect();
            let res = Resources::load_dir(&lexicon_dir, lang)?;
            let scores = score_translations(&instances, &records, &res);
            write_scores(create(&out)?, &scores)?;
            eprintln!("{chosen} ({lang}): {} slots scored -> {}", scores.len(), out.display());
        }
        Cmd::Metrics {
            scores,
            suite,
            threshold,
            system,
            lang,
            append,
            out,
        } => {
            let from_name = run_from_file_name(&scores);
            let system = system
                .or_else(|| from_name.as_ref().map(|(s, _)| s.clone()))
                .context("--system not given and not derivable from the scores file name")?;
            let lang = lang
                .or(from_name.map(|(_, l)| l))
                .context("--lang not given and not derivable from the scores file name")?;
            let instances = load_suite(&suite)?;
            let slot_scores =
                parse_scores(&read(&scores)?).with_context(|| format!("scores {}", scores.display()))?;
            let doc = compute_metrics(&system, lang, &instances, &slot_scores, threshold)?;
            let mut docs = if append && out.exists() { parse_metrics(&read(&out)?)? } else { Vec::new() };
            docs.retain(|d| !(d.system == doc.system && d.language == doc.language));
            docs.push(doc);
            write_metrics(create(&out)?, &docs)?;
        }
        Cmd::Report { metrics, format, out } => {
            let mut docs = Vec::new();
            for path in &metrics {
                docs.extend(parse_metrics(&read(path)?).with_context(|| format!("metrics {}", path.display()))?);
            }
            let text = render_report(&docs, format);
            match out {
                Some(path) => create(&path)?.write_all(text.as_bytes())?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
        }
        Cmd::Run {
            manifest,
            translations,
            adapter,
            system,
            lang,
            backend,
            lexicon_dir,
            out_dir,
            threshold,
            seed,
        } => {
            let source = match translations {
                Some(path) => TranslationSource::File(path),
                None => {
                    if system.len() != adapter.len() || lang.len() != adapter.len() {
                        bail!("every --adapter needs its own --system and --lang");
                    }
                    let configs = adapter
                        .iter()
                        .zip(&system)
                        .zip(&lang)
                        .map(|((spec, system), lang)| backend.config(spec, *lang, system))
                        .collect::<Result<Vec<_>>>()?;
                    TranslationSource::Adapters(configs)
                }
            };
            let config = PipelineConfig {
                manifest: load_manifest(&manifest)?,
                seed,
                translations: source,
                lexicon_dir,
                threshold,
                out_dir: Some(out_dir.clone()),
            };
            let output = run_pipeline(&config)?;
            for w in &output.warnings {
                eprintln!("warning: {w}");
            }
            if !output.orphans.is_empty() {
                eprintln!("warning: {} translations name ids outside the suite", output.orphans.len());
            }
            for r in &output.runs {
                let c = &r.metrics.coverage;
                eprintln!(
                    "{} ({}): {} of {} slots scored, {} unmatched",
                    r.system, r.language, c.scored_slots, c.suite_slots, c.unmatched
                );
            }
            eprintln!("report -> {}", out_dir.join("report.md").display());
        }
        Cmd::Translate {
            suite,
            adapter,
            lang,
            system,
            backend,
            out,
        } => {
            let instances = load_suite(&suite)?;
            let config = backend.config(&adapter, lang, &system)?;
            let mut partial = out.clone().into_os_string();
            partial.push(".partial");
            let partial = PathBuf::from(partial);
            let records = translate_suite_resumable(&instances, &config, &partial)?;
            write_translations(create(&out)?, &records)?;
            fs::remove_file(&partial).ok();
            eprintln!("{} translations -> {}", records.len(), out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
