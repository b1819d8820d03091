use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GatewayError, Provider};
use crate::prompt::{Message, MessageScript};

/// One recorded exchange, stored as `<digest>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transcript {
    pub digest: String,
    pub provider: Provider,
    pub model: String,
    pub messages: Vec<Message>,
    pub response: String,
    pub recorded_at: String,
}

impl Transcript {
    pub fn new(provider: Provider, model: &str, script: &MessageScript, response: String, recorded_at: String) -> Self {
        Transcript {
            digest: digest(script, provider, model),
            provider,
            model: model.to_string(),
            messages: script.messages.clone(),
            response,
            recorded_at,
        }
    }

    pub fn script(&self) -> MessageScript {
        MessageScript { messages: self.messages.clone() }
    }

    /// Checks that the stored digest matches the stored request.
    pub fn verify(&self) -> Result<(), GatewayError> {
        let expected = digest(&self.script(), self.provider, &self.model);
        if expected != self.digest {
            return Err(GatewayError::CorruptTranscript {
                digest: self.digest.clone(),
                reason: format!("content hashes to {expected}"),
            });
        }
        Ok(())
    }
}

/// SHA-256 over the compact JSON of provider, model and messages.
pub fn digest(script: &MessageScript, provider: Provider, model: &str) -> String {
    let canonical = serde_json::json!({
        "provider": provider.as_str(),
        "model": model,
        "messages": script.messages,
    });
    let bytes = serde_json::to_vec(&canonical).expect("plain data serializes");
    hex::encode(Sha256::digest(bytes))
}

pub fn transcript_path(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("{digest}.json"))
}

pub fn store_transcript(t: &Transcript, dir: &Path, overwrite: bool) -> Result<PathBuf, GatewayError> {
    let io = |e: std::io::Error| GatewayError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let path = transcript_path(dir, &t.digest);
    let text = serde_json::to_string_pretty(t).expect("plain data serializes") + "\n";
    if overwrite {
        fs::write(&path, text).map_err(io)?;
    } else {
        let mut file = fs::OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                GatewayError::DuplicateDigest(t.digest.clone())
            } else {
                io(e)
            }
        })?;
        file.write_all(text.as_bytes()).map_err(io)?;
    }
    Ok(path)
}

/// `Ok(None)` when no file exists for `digest`.
pub fn load_transcript(dir: &Path, digest: &str) -> Result<Option<Transcript>, GatewayError> {
    let path = transcript_path(dir, digest);
    let text = match fs::read_to_string(&path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(GatewayError::Io(format!("{}: {e}", path.display()))),
    };
    let t: Transcript = serde_json::from_str(&text).map_err(|e| GatewayError::CorruptTranscript {
        digest: digest.to_string(),
        reason: e.to_string(),
    })?;
    if t.digest != digest {
        return Err(GatewayError::CorruptTranscript {
            digest: digest.to_string(),
            reason: format!("file records digest {}", t.digest),
        });
    }
    t.verify()?;
    Ok(Some(t))
}

/// Directory holding attempt-specific transcripts inside a transcript set.
pub fn attempt_dir(root: &Path, attempt: u32) -> PathBuf {
    root.join(format!("attempt_{attempt}"))
}
