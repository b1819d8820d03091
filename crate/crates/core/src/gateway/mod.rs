//! Chat-completion client with live providers and a record/replay
//! transcript store.

mod http;
mod transcript;

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::MessageScript;

pub use http::{forbid_network, network_requests, HttpResponse, Transport, TransportError, UreqTransport};
pub use transcript::{attempt_dir, digest, load_transcript, store_transcript, transcript_path, Transcript};

pub const BACKOFF_BASE: Duration = Duration::from_secs(1);
pub const BACKOFF_FACTOR: u32 = 2;
pub const DEFAULT_RETRY_BUDGET: u32 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("authentication failed: {reason} (environment variable {var})")]
    Auth { var: String, reason: String },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("no recorded transcript for digest {digest}")]
    ReplayMiss { digest: String },
    #[error("rate limited after {attempts} attempt(s)")]
    RateLimit { attempts: u32 },
    #[error("a transcript for digest {0} already exists")]
    DuplicateDigest(String),
    #[error("transcript {digest} is corrupt: {reason}")]
    CorruptTranscript { digest: String, reason: String },
    #[error("provider returned HTTP {status}: {body}")]
    Provider { status: u16, body: String },
    #[error("unexpected response shape: {0}")]
    MalformedResponse(String),
    #[error("network access is forbidden in this process")]
    NetworkForbidden,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid gateway configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provider {
    #[serde(rename = "openai")]
    OpenAi,
    #[serde(rename = "gemini")]
    Gemini,
    #[serde(rename = "groq")]
    Groq,
    #[serde(rename = "replay")]
    Replay,
}

impl Provider {
    pub const ALL: [Provider; 4] = [Provider::OpenAi, Provider::Gemini, Provider::Groq, Provider::Replay];

    pub fn as_str(self) -> &'static str {
        match self {
            Provider::OpenAi => "openai",
            Provider::Gemini => "gemini",
            Provider::Groq => "groq",
            Provider::Replay => "replay",
        }
    }

    pub fn key_env(self) -> Option<&'static str> {
        match self {
            Provider::OpenAi => Some("OPENAI_API_KEY"),
            Provider::Gemini => Some("GEMINI_API_KEY"),
            Provider::Groq => Some("GROQ_API_KEY"),
            Provider::Replay => None,
        }
    }

    pub fn default_model(self) -> &'static str {
        match self {
            Provider::OpenAi => "gpt-4o-2024-08-06",
            Provider::Gemini => "gemini-1.5-pro",
            Provider::Groq => "llama-3.3-70b-versatile",
            Provider::Replay => "golden",
        }
    }

    fn default_base_url(self) -> &'static str {
        match self {
            Provider::OpenAi => "https://api.openai.com/v1",
            Provider::Gemini => "https://generativelanguage.googleapis.com/v1beta",
            Provider::Groq => "https://api.groq.com/openai/v1",
            Provider::Replay => "",
        }
    }
}

impl fmt::Display for Provider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Provider {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Provider::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| GatewayError::Config(format!("unknown provider {s:?} (expected openai, gemini, groq or replay)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub provider: Provider,
    pub model: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub timeout_secs: u64,
    pub retry_budget: u32,
    /// Requests per minute allowed for this provider across the process.
    pub requests_per_minute: Option<u32>,
    /// Overrides the provider's API key variable.
    pub key_env: Option<String>,
    pub base_url: Option<String>,
}

impl ProviderConfig {
    pub fn new(provider: Provider) -> Self {
        ProviderConfig {
            provider,
            model: provider.default_model().to_string(),
            temperature: 0.0,
            max_output_tokens: 4096,
            timeout_secs: 120,
            retry_budget: DEFAULT_RETRY_BUDGET,
            requests_per_minute: None,
            key_env: None,
            base_url: None,
        }
    }

    pub fn with_model(mut self, model: &str) -> Self {
        self.model = model.to_string();
        self
    }

    /// `provider/model`, the row label in accuracy matrices.
    pub fn label(&self) -> String {
        format!("{}/{}", self.provider, self.model)
    }

    pub fn check(&self) -> Result<(), GatewayError> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(GatewayError::Config(format!("temperature must be >= 0, got {}", self.temperature)));
        }
        if self.model.is_empty() {
            return Err(GatewayError::Config("model name is empty".into()));
        }
        if self.provider != Provider::Replay && (self.retry_budget == 0 || self.timeout_secs == 0) {
            return Err(GatewayError::Config("retry budget and timeout must be positive".into()));
        }
        Ok(())
    }

    fn key_var(&self) -> Option<String> {
        self.key_env.clone().or_else(|| self.provider.key_env().map(str::to_string))
    }
}

/// Answers prompts without a provider, e.g. to author transcript sets.
pub trait Responder: Send + Sync {
    fn respond(&self, script: &MessageScript, attempt: u32) -> Result<String, GatewayError>;
}

#[derive(Clone)]
pub enum Backend {
    Live(Arc<dyn Transport>),
    /// Transcript set: `attempt_<k>/<digest>.json` overrides `<digest>.json`.
    Replay(PathBuf),
    Scripted(Arc<dyn Responder>),
}

impl fmt::Debug for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Live(_) => f.write_str("Live"),
            Backend::Replay(dir) => write!(f, "Replay({})", dir.display()),
            Backend::Scripted(_) => f.write_str("Scripted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub digest: String,
    pub response: String,
}

type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;
type KeyLookup = Arc<dyn Fn(&str) -> Option<String> + Send + Sync>;

#[derive(Clone)]
pub struct Gateway {
    config: ProviderConfig,
    backend: Backend,
    record: Option<PathBuf>,
    sleeper: Sleeper,
    key_lookup: KeyLookup,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("config", &self.config)
            .field("backend", &self.backend)
            .field("record", &self.record)
            .finish()
    }
}

impl Gateway {
    pub fn new(config: ProviderConfig, backend: Backend) -> Result<Self, GatewayError> {
        config.check()?;
        if config.provider == Provider::Replay && matches!(backend, Backend::Live(_)) {
            return Err(GatewayError::Config("the replay provider needs a transcript directory".into()));
        }
        Ok(Gateway {
            config,
            backend,
            record: None,
            sleeper: Arc::new(std::thread::sleep),
            key_lookup: Arc::new(|var| std::env::var(var).ok()),
        })
    }

    pub fn live(config: ProviderConfig) -> Result<Self, GatewayError> {
        Gateway::new(config, Backend::Live(Arc::new(UreqTransport)))
    }

    pub fn replay(config: ProviderConfig, dir: impl Into<PathBuf>) -> Result<Self, GatewayError> {
        Gateway::new(config, Backend::Replay(dir.into()))
    }

    /// Persist every fresh response under `dir/attempt_<k>/`.
    pub fn recording(mut self, dir: impl Into<PathBuf>) -> Self {
        self.record = Some(dir.into());
        self
    }

    pub fn with_sleeper(mut self, sleeper: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleeper = Arc::new(sleeper);
        self
    }

    pub fn with_key_lookup(mut self, lookup: impl Fn(&str) -> Option<String> + Send + Sync + 'static) -> Self {
        self.key_lookup = Arc::new(lookup);
        self
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    pub fn digest(&self, script: &MessageScript) -> String {
        digest(script, self.config.provider, &self.config.model)
    }

    /// Fails with [`GatewayError::Auth`] when a live provider has no key.
    pub fn check_credentials(&self) -> Result<(), GatewayError> {
        if let Backend::Live(_) = self.backend {
            self.api_key()?;
        }
        Ok(())
    }

    /// One chat completion for attempt number `attempt` (1-based).
    pub fn complete(&self, script: &MessageScript, attempt: u32) -> Result<Completion, GatewayError> {
        let digest = self.digest(script);
        let response = match &self.backend {
            Backend::Replay(dir) => return self.replay_lookup(dir, &digest, attempt),
            Backend::Scripted(responder) => responder.respond(script, attempt)?,
            Backend::Live(transport) => self.complete_live(transport.as_ref(), script)?,
        };
        if let Some(root) = &self.record {
            let t = Transcript::new(
                self.config.provider,
                &self.config.model,
                script,
                response.clone(),
                chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            );
            store_transcript(&t, &attempt_dir(root, attempt), false)?;
        }
        Ok(Completion { digest, response })
    }

    fn replay_lookup(&self, dir: &Path, digest: &str, attempt: u32) -> Result<Completion, GatewayError> {
        for d in [attempt_dir(dir, attempt), dir.to_path_buf()] {
            if let Some(t) = load_transcript(&d, digest)? {
                return Ok(Completion { digest: digest.to_string(), response: t.response });
            }
        }
        Err(GatewayError::ReplayMiss { digest: digest.to_string() })
    }

    fn api_key(&self) -> Result<String, GatewayError> {
        let var = self
            .config
            .key_var()
            .ok_or_else(|| GatewayError::Config(format!("provider {} has no key variable", self.config.provider)))?;
        match (self.key_lookup)(&var) {
            Some(key) if !key.trim().is_empty() => Ok(key.trim().to_string()),
            _ => Err(GatewayError::Auth { var, reason: "API key is not set".into() }),
        }
    }

    fn complete_live(&self, transport: &dyn Transport, script: &MessageScript) -> Result<String, GatewayError> {
        let key = self.api_key()?;
        let (url, headers, body) = http::build_request(&self.config, &key, script);
        let timeout = Duration::from_secs(self.config.timeout_secs);
        let budget = self.config.retry_budget.max(1);
        let mut last = GatewayError::Timeout { attempts: 0 };
        for k in 1..=budget {
            if k > 1 {
                (self.sleeper)(backoff_delay(k - 1));
            }
            throttle(self.config.provider, self.config.requests_per_minute, &*self.sleeper);
            last = match transport.post_json(&url, &headers, &body, timeout) {
                Ok(r) if (200..300).contains(&r.status) => return http::extract_text(self.config.provider, &r.body),
                Ok(r) if r.status == 401 || r.status == 403 => {
                    return Err(GatewayError::Auth {
                        var: self.config.key_var().unwrap_or_default(),
                        reason: format!("provider rejected the key (HTTP {})", r.status),
                    })
                }
                Ok(r) if r.status == 429 => GatewayError::RateLimit { attempts: k },
                Ok(r) if r.status >= 500 => GatewayError::Provider { status: r.status, body: r.body },
                Ok(r) => return Err(GatewayError::Provider { status: r.status, body: r.body }),
                Err(TransportError::Forbidden) => return Err(GatewayError::NetworkForbidden),
                Err(TransportError::Timeout) => GatewayError::Timeout { attempts: k },
                Err(TransportError::Io(e)) => GatewayError::Transport(e),
            };
            tracing::warn!(provider = %self.config.provider, attempt = k, error = %last, "completion attempt failed");
        }
        Err(last)
    }
}

/// Wait before retry number `retry` (1-based): base · factor^(retry − 1).
pub fn backoff_delay(retry: u32) -> Duration {
    BACKOFF_BASE * BACKOFF_FACTOR.pow(retry.saturating_sub(1))
}

fn throttle(provider: Provider, rpm: Option<u32>, sleeper: &dyn Fn(Duration)) {
    let Some(rpm) = rpm.filter(|r| *r > 0) else { return };
    static NEXT_SLOT: OnceLock<Mutex<HashMap<Provider, Instant>>> = OnceLock::new();
    let interval = Duration::from_secs(60) / rpm;
    let now = Instant::now();
    let wait = {
        let mut slots = NEXT_SLOT.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
        let slot = slots.entry(provider).or_insert(now);
        let start = (*slot).max(now);
        *slot = start + interval;
        start - now
    };
    if !wait.is_zero() {
        sleeper(wait);
    }
}
