//! A language model used as a black-box search operator.
//!
//! Parents are rendered into a fixed natural-language prompt, the model
//! replies with new points between `<start>` and `<end>` markers, and every
//! call is logged so the behavior can later be distilled into a linear
//! operator. Backends are swappable: scripted functions and recorded
//! fixtures make runs deterministic, the live backend talks to an
//! OpenAI-style chat-completion endpoint.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::primitives::DecisionVector;

pub const DEFAULT_DECIMAL_PLACES: usize = 3;
pub const DEFAULT_MAX_RETRIES: usize = 3;
/// Environment variable holding the live backend's bearer token.
pub const API_KEY_ENV: &str = "LLM_API_KEY";

const START: &str = "<start>";
const END: &str = "<end>";

/// Everything rendered into one prompt.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptSpec {
    pub d: usize,
    /// `(point, aggregation value)` pairs, worst (largest value) first.
    pub parents: Vec<(DecisionVector, f64)>,
    pub s: usize,
    pub decimal_places: usize,
}

impl PromptSpec {
    /// Builds a spec from parents sorted best-first, as the mating pool
    /// stores them; the prompt lists them in reverse.
    pub fn from_best_first(parents: &[&[f64]], values: &[f64], s: usize) -> Result<Self> {
        if parents.len() != values.len() {
            return Err(Error::ContractViolation(format!(
                "{} parents with {} values",
                parents.len(),
                values.len()
            )));
        }
        let d = parents.first().map(|p| p.len()).unwrap_or(0);
        let spec = Self {
            d,
            parents: parents
                .iter()
                .zip(values)
                .rev()
                .map(|(p, v)| (p.to_vec(), *v))
                .collect(),
            s,
            decimal_places: DEFAULT_DECIMAL_PLACES,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.parents.is_empty() {
            return Err(Error::InvalidArgument(
                "prompt needs at least one parent".into(),
            ));
        }
        if self.s < 1 {
            return Err(Error::InvalidArgument(
                "prompt must request s >= 1 points".into(),
            ));
        }
        if let Some((p, _)) = self.parents.iter().find(|(p, _)| p.len() != self.d) {
            return Err(Error::ContractViolation(format!(
                "parent of length {} in a {}-variable prompt",
                p.len(),
                self.d
            )));
        }
        if self.parents.windows(2).any(|w| w[0].1 < w[1].1) {
            return Err(Error::InvalidArgument(
                "prompt parents must be sorted by descending value".into(),
            ));
        }
        Ok(())
    }
}

/// Renders the prompt text.
pub fn build_prompt(spec: &PromptSpec) -> Result<String> {
    spec.validate()?;
    let prec = spec.decimal_places;
    let mut text = format!(
        "Now you will help me minimize a function with {} variables. \
         I have some points and the function values of them. \
         The points start with {START} and end with {END}. \
         The points are arranged in descending order based on their function values, \
         where lower values are better.\n",
        spec.d
    );
    for (point, value) in &spec.parents {
        let coords: Vec<String> = point.iter().map(|v| format!("{v:.prec$}")).collect();
        text.push_str(&format!(
            "point: {START}{}{END}\nvalue: {value:.prec$}\n",
            coords.join(",")
        ));
    }
    text.push_str(&format!(
        "Give me {} new points that are different from all points above, \
         and have a function value lower than any of the above. \
         Do not write code. Do not give any explanation. \
         Each output new point must start with {START} and end with {END}.",
        spec.s
    ));
    Ok(text)
}

/// Points recovered from a response.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedResponse {
    pub points: Vec<DecisionVector>,
    /// Fewer than the requested number of points were found.
    pub short: bool,
}

/// Every marker-delimited payload, in order of appearance. When markers
/// nest, the innermost `<start>` before each `<end>` wins.
fn payloads(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut cursor = 0;
    while let Some(rel_end) = text[cursor..].find(END) {
        let end = cursor + rel_end;
        if let Some(rel_start) = text[cursor..end].rfind(START) {
            out.push(&text[cursor + rel_start + START.len()..end]);
        }
        cursor = end + END.len();
    }
    out
}

fn parse_point(payload: &str) -> Option<Vec<f64>> {
    let inner = payload
        .trim()
        .trim_start_matches(['[', '('])
        .trim_end_matches([']', ')']);
    inner
        .split(',')
        .map(|tok| tok.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

/// Extracts up to `s` points of exactly `d` finite numbers. Malformed
/// payloads are skipped; no valid point at all is a [`Error::ParseFailure`].
pub fn parse_response(text: &str, d: usize, s: usize) -> Result<ParsedResponse> {
    let points: Vec<DecisionVector> = payloads(text)
        .into_iter()
        .filter_map(parse_point)
        .filter(|p| p.len() == d)
        .take(s)
        .collect();
    if points.is_empty() {
        return Err(Error::ParseFailure);
    }
    Ok(ParsedResponse {
        short: points.len() < s,
        points,
    })
}

/// Hex SHA-256 of the prompt text; names recorded fixtures.
pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// A stateless text-completion service: one prompt in, one reply out.
pub trait LlmBackend {
    fn complete(&mut self, prompt: &str) -> Result<String>;

    fn describe(&self) -> String;
}

/// Parents listed in a prompt, in prompt order (best last).
pub fn prompt_points(prompt: &str) -> Vec<Vec<f64>> {
    payloads(prompt)
        .into_iter()
        .filter_map(parse_point)
        .collect()
}

fn requested_count(prompt: &str) -> usize {
    prompt
        .split("Give me ")
        .nth(1)
        .and_then(|rest| rest.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .unwrap_or(1)
}

fn render_points(points: &[Vec<f64>]) -> String {
    points
        .iter()
        .map(|p| {
            let coords: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            format!("{START}{}{END}", coords.join(","))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

type Script = Box<dyn FnMut(&str, usize) -> String + Send>;

/// Deterministic backend driven by a function of `(prompt, call number)`.
pub struct ScriptedBackend {
    name: String,
    script: Script,
    calls: usize,
}

impl ScriptedBackend {
    pub fn new(name: &str, script: impl FnMut(&str, usize) -> String + Send + 'static) -> Self {
        Self {
            name: name.to_string(),
            script: Box::new(script),
            calls: 0,
        }
    }

    pub const NAMES: [&'static str; 3] = ["echo-best", "centroid", "malformed"];

    /// Built-in scripts:
    /// `echo-best` repeats the best parent, `centroid` answers with the mean
    /// of the best half and the mean of all parents, `malformed` never emits
    /// a marker.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "echo-best" => Ok(Self::new(name, |prompt, _| {
                let pts = prompt_points(prompt);
                let best = pts.last().cloned().unwrap_or_default();
                render_points(&vec![best; requested_count(prompt)])
            })),
            "centroid" => Ok(Self::new(name, |prompt, _| {
                let pts = prompt_points(prompt);
                if pts.is_empty() {
                    return String::new();
                }
                let mean = |set: &[Vec<f64>]| -> Vec<f64> {
                    let d = set[0].len();
                    (0..d)
                        .map(|k| set.iter().map(|p| p[k]).sum::<f64>() / set.len() as f64)
                        .collect()
                };
                let half = pts.len().div_ceil(2);
                let best_half = &pts[pts.len() - half..];
                render_points(&[mean(best_half), mean(&pts)])
            })),
            "malformed" => Ok(Self::new(name, |_, _| "I cannot help with that.".into())),
            other => Err(Error::Config(format!(
                "unknown scripted backend `{other}`; valid: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls
    }
}

impl LlmBackend for ScriptedBackend {
    fn complete(&mut self, prompt: &str) -> Result<String> {
        let reply = (self.script)(prompt, self.calls);
        self.calls += 1;
        Ok(reply)
    }

    fn describe(&self) -> String {
        format!("scripted:{}", self.name)
    }
}

/// Replays responses stored as `<dir>/<sha256 of prompt>.txt`.
pub struct RecordedBackend {
    dir: PathBuf,
}

impl RecordedBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        if !dir.is_dir() {
            return Err(Error::Config(format!(
                "fixture directory {} does not exist",
                dir.display()
            )));
        }
        Ok(Self { dir })
    }

    pub fn fixture_path(dir: &Path, prompt: &str) -> PathBuf {
        dir.join(format!("{}.txt", prompt_digest(prompt)))
    }
}

impl LlmBackend for RecordedBackend {
    fn complete(&mut self, prompt: &str) -> Result<String> {
        let path = Self::fixture_path(&self.dir, prompt);
        fs::read_to_string(&path)
            .map_err(|e| Error::Backend(format!("no fixture {}: {e}", path.display())))
    }

    fn describe(&self) -> String {
        format!("recorded:{}", self.dir.display())
    }
}

/// Wraps a backend and stores every reply as a fixture for
/// [`RecordedBackend`].
pub struct RecordingBackend<B> {
    inner: B,
    dir: PathBuf,
}

impl<B: LlmBackend> RecordingBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { inner, dir })
    }

    pub fn into_inner(self) -> B {
        self.inner
    }
}

impl<B: LlmBackend> LlmBackend for RecordingBackend<B> {
    fn complete(&mut self, prompt: &str) -> Result<String> {
        let reply = self.inner.complete(prompt)?;
        fs::write(RecordedBackend::fixture_path(&self.dir, prompt), &reply)?;
        Ok(reply)
    }

    fn describe(&self) -> String {
        format!(
            "{} (recording to {})",
            self.inner.describe(),
            self.dir.display()
        )
    }
}

/// Settings of the live chat-completion backend. The token is never part of
/// the settings; it is read from [`API_KEY_ENV`].
#[derive(Clone, Debug, PartialEq)]
pub struct LiveConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub min_interval: Duration,
    pub timeout: Duration,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-3.5-turbo".into(),
            temperature: 1.0,
            min_interval: Duration::from_millis(0),
            timeout: Duration::from_secs(60),
        }
    }
}

/// HTTP chat-completion backend. Each request carries a single user
/// message and no history.
pub struct LiveBackend {
    cfg: LiveConfig,
    token: String,
    agent: ureq::Agent,
    last_request: Option<Instant>,
}

impl LiveBackend {
    pub fn from_env(cfg: LiveConfig) -> Result<Self> {
        let token = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| Error::Config(format!("{API_KEY_ENV} is not set")))?;
        Ok(Self::with_token(cfg, token))
    }

    pub fn with_token(cfg: LiveConfig, token: String) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .build()
            .into();
        Self {
            cfg,
            token,
            agent,
            last_request: None,
        }
    }

    /// Request body for one prompt.
    pub fn request_body(&self, prompt: &str) -> serde_json::Value {
        serde_json::json!({
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
        })
    }
}

impl LlmBackend for LiveBackend {
    fn complete(&mut self, prompt: &str) -> Result<String> {
        if let Some(last) = self.last_request {
            let since = last.elapsed();
            if since < self.cfg.min_interval {
                thread::sleep(self.cfg.min_interval - since);
            }
        }
        self.last_request = Some(Instant::now());
        let body = self.request_body(prompt);
        let mut response = self
            .agent
            .post(&self.cfg.endpoint)
            .header("Authorization", &format!("Bearer {}", self.token))
            .send_json(&body)
            .map_err(|e| Error::Backend(e.to_string()))?;
        let reply: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| Error::Backend(e.to_string()))?;
        reply["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| {
                Error::Backend(format!(
                    "response without choices[0].message.content: {reply}"
                ))
            })
    }

    fn describe(&self) -> String {
        format!("live:{}@{}", self.cfg.model, self.cfg.endpoint)
    }
}

/// One operator call: what went in, what came back.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub subproblem_index: usize,
    /// Parents sorted best-first.
    pub parents: Vec<Vec<f64>>,
    pub parent_values: Vec<f64>,
    pub response: String,
    pub offspring: Vec<Vec<f64>>,
    pub attempts: usize,
    pub unix_time_ms: u64,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Calls the backend until a response yields at least one point, at most
/// `max_retries` times.
pub fn generate_with_retry(
    backend: &mut dyn LlmBackend,
    spec: &PromptSpec,
    max_retries: usize,
    subproblem_index: usize,
) -> Result<(Vec<DecisionVector>, InteractionRecord)> {
    if max_retries < 1 {
        return Err(Error::InvalidArgument("max_retries must be >= 1".into()));
    }
    let prompt = build_prompt(spec)?;
    for attempt in 1..=max_retries {
        let reply = match backend.complete(&prompt) {
            Ok(r) => r,
            Err(e) => {
                warn!("{}: attempt {attempt} failed: {e}", backend.describe());
                continue;
            }
        };
        match parse_response(&reply, spec.d, spec.s) {
            Ok(parsed) => {
                let record = InteractionRecord {
                    subproblem_index,
                    parents: spec.parents.iter().rev().map(|(p, _)| p.clone()).collect(),
                    parent_values: spec.parents.iter().rev().map(|(_, v)| *v).collect(),
                    response: reply,
                    offspring: parsed.points.clone(),
                    attempts: attempt,
                    unix_time_ms: now_ms(),
                };
                return Ok((parsed.points, record));
            }
            Err(_) => warn!(
                "{}: attempt {attempt} returned no point",
                backend.describe()
            ),
        }
    }
    Err(Error::OperatorFailure {
        attempts: max_retries,
    })
}

/// Writes records as JSON lines. Returns the count written.
pub fn log_interactions<'a, W: Write>(
    records: impl IntoIterator<Item = &'a InteractionRecord>,
    sink: &mut W,
) -> Result<usize> {
    let mut n = 0;
    for r in records {
        serde_json::to_writer(&mut *sink, r)?;
        sink.write_all(b"\n")?;
        n += 1;
    }
    sink.flush()?;
    Ok(n)
}

/// Reads JSON-lines records. Malformed lines are skipped and counted.
pub fn read_interactions<R: BufRead>(reader: R) -> Result<(Vec<InteractionRecord>, usize)> {
    let mut records = Vec::new();
    let mut skipped = 0;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => records.push(r),
            Err(_) => skipped += 1,
        }
    }
    Ok((records, skipped))
}

/// Append-only interaction log file. A write failure disables the log with
/// a warning instead of stopping the run.
pub struct InteractionSink {
    path: PathBuf,
    writer: Option<BufWriter<File>>,
    written: usize,
}

impl InteractionSink {
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            writer: Some(BufWriter::new(file)),
            written: 0,
        })
    }

    pub fn append(&mut self, record: &InteractionRecord) {
        let Some(w) = self.writer.as_mut() else {
            return;
        };
        if let Err(e) = log_interactions([record], w) {
            warn!("interaction log {} disabled: {e}", self.path.display());
            self.writer = None;
        } else {
            self.written += 1;
        }
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn is_active(&self) -> bool {
        self.writer.is_some()
    }
}
