use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::Duration;

use serde_json::{json, Value};

use super::{GatewayError, Provider, ProviderConfig};
use crate::prompt::{MessageScript, Role};

static NETWORK_FORBIDDEN: AtomicBool = AtomicBool::new(false);
static NETWORK_REQUESTS: AtomicUsize = AtomicUsize::new(0);

/// Makes every later HTTP request in this process fail without connecting.
pub fn forbid_network() {
    NETWORK_FORBIDDEN.store(true, Ordering::SeqCst);
}

/// HTTP requests attempted by [`UreqTransport`] so far, forbidden ones included.
pub fn network_requests() -> usize {
    NETWORK_REQUESTS.load(Ordering::SeqCst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransportError {
    Timeout,
    Forbidden,
    Io(String),
}

pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &Value,
        timeout: Duration,
    ) -> Result<HttpResponse, TransportError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct UreqTransport;

impl Transport for UreqTransport {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &Value,
        timeout: Duration,
    ) -> Result<HttpResponse, TransportError> {
        NETWORK_REQUESTS.fetch_add(1, Ordering::SeqCst);
        if NETWORK_FORBIDDEN.load(Ordering::SeqCst) {
            return Err(TransportError::Forbidden);
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let mut request = agent.post(url);
        for (k, v) in headers {
            request = request.header(k, v);
        }
        let map = |e: ureq::Error| match e {
            ureq::Error::Timeout(_) => TransportError::Timeout,
            other => TransportError::Io(other.to_string()),
        };
        let mut response = request.send_json(body).map_err(map)?;
        let status = response.status().as_u16();
        let body = response.body_mut().read_to_string().map_err(map)?;
        Ok(HttpResponse { status, body })
    }
}

/// Endpoint, headers and JSON body for one chat completion.
pub(super) fn build_request(
    config: &ProviderConfig,
    key: &str,
    script: &MessageScript,
) -> (String, Vec<(String, String)>, Value) {
    let base = config.base_url.clone().unwrap_or_else(|| config.provider.default_base_url().to_string());
    let base = base.trim_end_matches('/');
    match config.provider {
        Provider::OpenAi | Provider::Groq | Provider::Replay => {
            let messages: Vec<Value> = script
                .messages
                .iter()
                .map(|m| json!({"role": m.role.as_str(), "content": m.content}))
                .collect();
            let body = json!({
                "model": config.model,
                "messages": messages,
                "temperature": config.temperature,
                "max_tokens": config.max_output_tokens,
            });
            let headers = vec![("Authorization".to_string(), format!("Bearer {key}"))];
            (format!("{base}/chat/completions"), headers, body)
        }
        Provider::Gemini => {
            let system: Vec<Value> = script
                .messages
                .iter()
                .filter(|m| m.role == Role::System)
                .map(|m| json!({"text": m.content}))
                .collect();
            let contents: Vec<Value> = script
                .messages
                .iter()
                .filter(|m| m.role != Role::System)
                .map(|m| {
                    let role = if m.role == Role::Assistant { "model" } else { "user" };
                    json!({"role": role, "parts": [{"text": m.content}]})
                })
                .collect();
            let body = json!({
                "systemInstruction": {"parts": system},
                "contents": contents,
                "generationConfig": {
                    "temperature": config.temperature,
                    "maxOutputTokens": config.max_output_tokens,
                },
            });
            let headers = vec![("x-goog-api-key".to_string(), key.to_string())];
            (format!("{base}/models/{}:generateContent", config.model), headers, body)
        }
    }
}

pub(super) fn extract_text(provider: Provider, body: &str) -> Result<String, GatewayError> {
    let malformed = |what: &str| GatewayError::MalformedResponse(format!("{provider}: {what}"));
    let v: Value = serde_json::from_str(body).map_err(|e| malformed(&e.to_string()))?;
    match provider {
        Provider::Gemini => {
            let parts = v
                .pointer("/candidates/0/content/parts")
                .and_then(Value::as_array)
                .ok_or_else(|| malformed("no candidates[0].content.parts"))?;
            Ok(parts.iter().filter_map(|p| p["text"].as_str()).collect())
        }
        _ => v
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| malformed("no choices[0].message.content")),
    }
}
