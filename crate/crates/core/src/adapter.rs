//! Batch translation through an external command or an HTTP endpoint.
//!
//! Command contract: the command runs under `sh -c`, once per batch. It
//! reads `id<TAB>source` lines on stdin and writes `id<TAB>translation`
//! lines on stdout, in any order.
//!
//! HTTP contract: `POST <url>` with
//! `{"lang": "es", "system": "...", "items": [{"id": "...", "text": "..."}]}`
//! answered by `{"items": [{"id": "...", "text": "..."}]}`. When
//! `GNT_HTTP_TOKEN` is set it is sent as a bearer token.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use rand::RngExt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::Language;
use crate::io::TranslationRecord;
use crate::suite::TestInstance;

pub const TOKEN_ENV: &str = "GNT_HTTP_TOKEN";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdapterKind {
    ExternalCommand,
    HttpEndpoint,
}

#[derive(Debug, Clone)]
pub struct AdapterConfig {
    pub kind: AdapterKind,
    /// Shell command line or URL.
    pub target: String,
    pub language: Language,
    pub system: String,
    pub batch_size: usize,
    /// Per-attempt limit for one batch.
    pub timeout: Duration,
    pub max_retries: u32,
    /// First retry delay; doubles per attempt, plus up to as much again in
    /// jitter.
    pub backoff: Duration,
    /// Batches in flight at once.
    pub concurrency: usize,
}

impl AdapterConfig {
    /// Parses `cmd:<command line>` or `http:<url>`.
    pub fn from_spec(spec: &str, language: Language, system: &str) -> Result<Self, AdapterError> {
        let (kind, target) = if let Some(cmd) = spec.strip_prefix("cmd:") {
            (AdapterKind::ExternalCommand, cmd.to_string())
        } else if let Some(url) = spec.strip_prefix("http:") {
            // accept both http:http://host and http://host
            let url = if url.starts_with("//") { format!("http:{url}") } else { url.to_string() };
            (AdapterKind::HttpEndpoint, url)
        } else {
            return Err(AdapterError::InvalidConfig(format!(
                "adapter {spec:?} must start with cmd: or http:"
            )));
        };
        let config = AdapterConfig {
            kind,
            target,
            language,
            system: system.to_string(),
            batch_size: 32,
            timeout: Duration::from_secs(60),
            max_retries: 3,
            backoff: Duration::from_millis(500),
            concurrency: 1,
        };
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<(), AdapterError> {
        let bad = |m: &str| Err(AdapterError::InvalidConfig(m.to_string()));
        if self.target.trim().is_empty() {
            return bad("empty adapter target");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if self.timeout.is_zero() {
            return bad("timeout must be positive");
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdapterError {
    #[error("invalid adapter configuration: {0}")]
    InvalidConfig(String),
    #[error("suite is empty")]
    EmptySuite,
    #[error("instance {id}: source text contains a tab or newline")]
    UnsendableSource { id: String },
    #[error("backend reply is missing ids {missing:?}")]
    IncompleteBatch { missing: Vec<String> },
    #[error("backend protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("backend unavailable after {attempts} attempts: {last_error}")]
    BackendUnavailable { attempts: u32, last_error: String },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: String, message: String },
}

enum Failure {
    Transient(String),
    Fatal(AdapterError),
}

type Batch = Vec<(String, String)>;

/// Translates every instance once. Records come back sorted by id.
pub fn translate_suite(suite: &[TestInstance], config: &AdapterConfig) -> Result<Vec<TranslationRecord>, AdapterError> {
    run(suite, config, None)
}

/// As [`translate_suite`], appending each finished batch to `checkpoint`.
/// Records already in the checkpoint are not requested again.
pub fn translate_suite_resumable(
    suite: &[TestInstance],
    config: &AdapterConfig,
    checkpoint: &Path,
) -> Result<Vec<TranslationRecord>, AdapterError> {
    run(suite, config, Some(checkpoint))
}

fn run(
    suite: &[TestInstance],
    config: &AdapterConfig,
    checkpoint: Option<&Path>,
) -> Result<Vec<TranslationRecord>, AdapterError> {
    config.check()?;
    if suite.is_empty() {
        return Err(AdapterError::EmptySuite);
    }
    for inst in suite {
        if inst.id.contains(['\t', '\n', '\r']) || inst.source_text.contains(['\t', '\n', '\r']) {
            return Err(AdapterError::UnsendableSource { id: inst.id.clone() });
        }
    }

    let wanted: BTreeSet<&str> = suite.iter().map(|i| i.id.as_str()).collect();
    let mut done: BTreeMap<String, String> = BTreeMap::new();
    if let Some(path) = checkpoint {
        for r in read_checkpoint(path)? {
            if r.system == config.system && r.lang == config.language && wanted.contains(r.id.as_str()) {
                done.insert(r.id, r.text);
            }
        }
    }

    let pending: Vec<(String, String)> = suite
        .iter()
        .filter(|i| !done.contains_key(&i.id))
        .map(|i| (i.id.clone(), i.source_text.clone()))
        .collect();
    let batches: Vec<Batch> = pending.chunks(config.batch_size).map(<[_]>::to_vec).collect();

    let sink = match checkpoint {
        Some(path) => Some(Mutex::new(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| checkpoint_error(path, e))?,
        )),
        None => None,
    };
    let results = Mutex::new(done);
    let next = AtomicUsize::new(0);
    let first_error: Mutex<Option<AdapterError>> = Mutex::new(None);

    let worker = || loop {
        if first_error.lock().expect("poisoned").is_some() {
            return;
        }
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(batch) = batches.get(i) else { return };
        match with_retries(batch, config) {
            Ok(reply) => {
                if let (Some(sink), Some(path)) = (&sink, checkpoint) {
                    let mut f = sink.lock().expect("poisoned");
                    if let Err(e) = append_checkpoint(&mut f, config, &reply) {
                        *first_error.lock().expect("poisoned") = Some(checkpoint_error(path, e));
                        return;
                    }
                }
                results.lock().expect("poisoned").extend(reply);
            }
            Err(e) => {
                first_error.lock().expect("poisoned").get_or_insert(e);
                return;
            }
        }
    };
    thread::scope(|s| {
        for _ in 1..config.concurrency.min(batches.len().max(1)) {
            s.spawn(worker);
        }
        worker();
    });

    if let Some(e) = first_error.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(results
        .into_inner()
        .expect("poisoned")
        .into_iter()
        .map(|(id, text)| TranslationRecord {
            system: config.system.clone(),
            lang: config.language,
            id,
            text,
        })
        .collect())
}

fn checkpoint_error(path: &Path, e: impl std::fmt::Display) -> AdapterError {
    AdapterError::Checkpoint {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn read_checkpoint(path: &Path) -> Result<Vec<TranslationRecord>, AdapterError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let file = File::open(path).map_err(|e| checkpoint_error(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| checkpoint_error(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        // A torn final line from an interrupted write is dropped.
        if let Ok(r) = serde_json::from_str::<TranslationRecord>(&line) {
            out.push(r);
        }
    }
    Ok(out)
}

fn append_checkpoint(f: &mut File, config: &AdapterConfig, reply: &[(String, String)]) -> std::io::Result<()> {
    let mut buf = Vec::new();
    for (id, text) in reply {
        let r = TranslationRecord {
            system: config.system.clone(),
            lang: config.language,
            id: id.clone(),
            text: text.clone(),
        };
        serde_json::to_writer(&mut buf, &r)?;
        buf.push(b'\n');
    }
    f.write_all(&buf)?;
    f.flush()
}

fn with_retries(batch: &[(String, String)], config: &AdapterConfig) -> Result<Batch, AdapterError> {
    let mut attempt = 0u32;
    loop {
        let outcome = match config.kind {
            AdapterKind::ExternalCommand => command_batch(batch, config),
            AdapterKind::HttpEndpoint => http_batch(batch, config),
        };
        let failure = match outcome.and_then(|reply| check_reply(batch, reply)) {
            Ok(reply) => return Ok(reply),
            Err(Failure::Fatal(e)) => return Err(e),
            Err(Failure::Transient(msg)) => msg,
        };
        attempt += 1;
        if attempt > config.max_retries {
            return Err(AdapterError::BackendUnavailable {
                attempts: attempt,
                last_error: failure,
            });
        }
        thread::sleep(backoff_delay(config.backoff, attempt));
    }
}

fn backoff_delay(base: Duration, attempt: u32) -> Duration {
    let exp = base.saturating_mul(1u32 << (attempt - 1).min(16));
    let jitter_ms = exp.as_millis().min(u64::MAX as u128) as u64;
    let jitter = if jitter_ms == 0 { 0 } else { rand::rng().random_range(0..=jitter_ms) };
    exp + Duration::from_millis(jitter)
}

/// Pairs a reply with its batch by id, in batch order.
fn check_reply(batch: &[(String, String)], reply: Batch) -> Result<Batch, Failure> {
    let ids: BTreeSet<&str> = batch.iter().map(|(id, _)| id.as_str()).collect();
    let mut got: BTreeMap<String, String> = BTreeMap::new();
    for (id, text) in reply {
        if !ids.contains(id.as_str()) {
            return Err(Failure::Fatal(AdapterError::ProtocolViolation(format!(
                "reply id {id:?} was not in the batch"
            ))));
        }
        if got.insert(id.clone(), text).is_some() {
            return Err(Failure::Fatal(AdapterError::ProtocolViolation(format!(
                "reply id {id:?} repeated"
            ))));
        }
    }
    let missing: Vec<String> = batch
        .iter()
        .filter(|(id, _)| !got.contains_key(id))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Failure::Fatal(AdapterError::IncompleteBatch { missing }));
    }
    Ok(batch
        .iter()
        .map(|(id, _)| (id.clone(), got.remove(id).expect("checked")))
        .collect())
}

fn command_batch(batch: &[(String, String)], config: &AdapterConfig) -> Result<Batch, Failure> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&config.target)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Failure::Transient(format!("spawn failed: {e}")))?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");
    let input: String = batch.iter().map(|(id, text)| format!("{id}\t{text}\n")).collect();
    // Writer and reader run apart so a chatty child cannot deadlock us.
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut lines = Vec::new();
        let mut reader = BufReader::new(stdout);
        let mut buf = Vec::new();
        let result = loop {
            buf.clear();
            match reader.read_until(b'\n', &mut buf) {
                Ok(0) => break Ok(lines),
                Ok(_) => lines.push(String::from_utf8(buf.clone())),
                Err(e) => break Err(e.to_string()),
            }
        };
        let _ = tx.send(result);
    });

    let deadline = Instant::now() + config.timeout;
    let lines = match rx.recv_timeout(config.timeout) {
        Ok(Ok(lines)) => lines,
        Ok(Err(e)) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Failure::Transient(format!("reading reply: {e}")));
        }
        Err(_) => {
            let _ = child.kill();
            let _ = child.wait();
            return Err(Failure::Transient(format!("no reply within {:?}", config.timeout)));
        }
    };
    let _ = writer.join();
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
            Ok(None) => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Failure::Transient("command did not exit".into()));
            }
            Err(e) => return Err(Failure::Transient(e.to_string())),
        }
    };
    if !status.success() {
        return Err(Failure::Transient(format!("command exited with {status}")));
    }

    let mut reply = Vec::new();
    for (n, line) in lines.into_iter().enumerate() {
        let line = line.map_err(|_| {
            Failure::Fatal(AdapterError::ProtocolViolation(format!("reply line {} is not UTF-8", n + 1)))
        })?;
        let line = line.trim_end_matches(['\n', '\r']);
        if line.is_empty() {
            continue;
        }
        let Some((id, text)) = line.split_once('\t') else {
            return Err(Failure::Fatal(AdapterError::ProtocolViolation(format!(
                "reply line {} has no tab: {line:?}",
                n + 1
            ))));
        };
        reply.push((id.to_string(), text.to_string()));
    }
    Ok(reply)
}

#[derive(Serialize)]
struct HttpItem<'a> {
    id: &'a str,
    text: &'a str,
}

#[derive(Serialize)]
struct HttpRequest<'a> {
    lang: Language,
    system: &'a str,
    items: Vec<HttpItem<'a>>,
}

#[derive(Deserialize)]
struct HttpReplyItem {
    id: String,
    text: String,
}

#[derive(Deserialize)]
struct HttpReply {
    items: Vec<HttpReplyItem>,
}

fn http_batch(batch: &[(String, String)], config: &AdapterConfig) -> Result<Batch, Failure> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(config.timeout))
        .build()
        .into();
    let body = HttpRequest {
        lang: config.language,
        system: &config.system,
        items: batch.iter().map(|(id, text)| HttpItem { id, text }).collect(),
    };
    let mut request = agent.post(&config.target).header("Content-Type", "application/json");
    if let Ok(token) = std::env::var(TOKEN_ENV) {
        request = request.header("Authorization", &format!("Bearer {token}"));
    }
    let mut response = request.send_json(&body).map_err(classify_http_error)?;
    let reply: HttpReply = response
        .body_mut()
        .read_json()
        .map_err(|e| Failure::Fatal(AdapterError::ProtocolViolation(format!("reply body: {e}"))))?;
    Ok(reply.items.into_iter().map(|i| (i.id, i.text)).collect())
}

fn classify_http_error(e: ureq::Error) -> Failure {
    match e {
        ureq::Error::StatusCode(code) if code == 429 || code >= 500 => Failure::Transient(format!("HTTP {code}")),
        ureq::Error::StatusCode(code) => Failure::Fatal(AdapterError::BackendUnavailable {
            attempts: 1,
            last_error: format!("HTTP {code}"),
        }),
        other => Failure::Transient(other.to_string()),
    }
}
