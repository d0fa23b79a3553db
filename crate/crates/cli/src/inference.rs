//! Zero-shot classification against a chat-completion endpoint, plus the
//! fine-tune record export. The batch driver keeps at most
//! `max_concurrency` requests in flight and preserves input order.

use crate::formats::PromptRecord;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::json;
use speechcue_core::labels::parse_label;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

pub const API_KEY_ENV: &str = "SPEECHCUE_API_KEY";

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub model_name: String,
    pub api_key: Option<String>,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub max_concurrency: usize,
    pub temperature: f64,
    /// First backoff delay; doubles per retry. Small values keep tests fast.
    pub retry_base_ms: u64,
}

impl EndpointConfig {
    pub fn new(base_url: &str, model_name: &str) -> Self {
        EndpointConfig {
            base_url: base_url.trim_end_matches('/').to_string(),
            model_name: model_name.to_string(),
            api_key: std::env::var(API_KEY_ENV).ok(),
            timeout_s: 30.0,
            max_retries: 3,
            max_concurrency: 4,
            temperature: 0.0,
            retry_base_ms: 250,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub utterance_id: String,
    pub raw_completion: String,
    pub parsed_label: Option<String>,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InferenceError {
    /// Transport failure or repeated server errors after all retries.
    EndpointUnreachable(String),
    AuthFailure(String),
    MissingGoldLabel(String),
}

impl fmt::Display for InferenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InferenceError::EndpointUnreachable(d) => write!(f, "endpoint unreachable: {d}"),
            InferenceError::AuthFailure(d) => write!(f, "authentication failed: {d}"),
            InferenceError::MissingGoldLabel(id) => {
                write!(f, "utterance {id:?} has no gold label")
            }
        }
    }
}

impl std::error::Error for InferenceError {}

fn request_completion(
    agent: &ureq::Agent,
    endpoint: &EndpointConfig,
    full_text: &str,
) -> Result<String, InferenceError> {
    let url = format!("{}/chat/completions", endpoint.base_url);
    let body = json!({
        "model": endpoint.model_name,
        "temperature": endpoint.temperature,
        "messages": [{"role": "user", "content": full_text}],
    });
    let mut last_err = String::new();
    for attempt in 0..=endpoint.max_retries {
        if attempt > 0 {
            let delay = endpoint.retry_base_ms << (attempt - 1);
            std::thread::sleep(Duration::from_millis(delay));
        }
        let mut req = agent.post(&url);
        if let Some(key) = &endpoint.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_json(body.clone()) {
            Ok(resp) => {
                let parsed: serde_json::Value = resp
                    .into_json()
                    .map_err(|e| InferenceError::EndpointUnreachable(format!("bad response body: {e}")))?;
                let content = parsed["choices"][0]["message"]["content"]
                    .as_str()
                    .unwrap_or("")
                    .to_string();
                return Ok(content);
            }
            Err(ureq::Error::Status(code, resp)) => {
                if code == 401 || code == 403 {
                    return Err(InferenceError::AuthFailure(format!("status {code}")));
                }
                // 429 and 5xx are transient; anything else won't improve
                if code != 429 && code < 500 {
                    return Err(InferenceError::EndpointUnreachable(format!(
                        "status {code}: {}",
                        resp.into_string().unwrap_or_default()
                    )));
                }
                last_err = format!("status {code}");
            }
            Err(ureq::Error::Transport(t)) => last_err = t.to_string(),
        }
    }
    Err(InferenceError::EndpointUnreachable(format!(
        "gave up after {} retries: {last_err}",
        endpoint.max_retries
    )))
}

/// Classify every prompt. Unparseable completions become predictions with
/// `parsed_label: None`; endpoint-level failures abort the batch.
pub fn classify_zero_shot(
    prompts: &[PromptRecord],
    endpoint: &EndpointConfig,
    label_set: &[String],
) -> Result<Vec<Prediction>, InferenceError> {
    assert!(endpoint.max_concurrency >= 1);
    let agent = ureq::AgentBuilder::new()
        .timeout(Duration::from_secs_f64(endpoint.timeout_s))
        .build();

    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<Option<Prediction>>> = Mutex::new(vec![None; prompts.len()]);
    let fatal: Mutex<Option<InferenceError>> = Mutex::new(None);
    let workers = endpoint.max_concurrency.min(prompts.len()).max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if abort.load(Ordering::SeqCst) {
                    return;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= prompts.len() {
                    return;
                }
                let start = Instant::now();
                match request_completion(&agent, endpoint, &prompts[i].full_text) {
                    Ok(raw) => {
                        let parsed = parse_label(&raw, label_set);
                        results.lock().unwrap()[i] = Some(Prediction {
                            utterance_id: prompts[i].utterance_id.clone(),
                            parsed_label: parsed,
                            raw_completion: raw,
                            latency_ms: start.elapsed().as_millis() as u64,
                        });
                    }
                    Err(e) => {
                        abort.store(true, Ordering::SeqCst);
                        fatal.lock().unwrap().get_or_insert(e);
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = fatal.into_inner().unwrap() {
        return Err(e);
    }
    let out: Vec<Prediction> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|p| p.expect("every slot filled when no worker aborted"))
        .collect();
    Ok(out)
}

/// Write `{"prompt": ..., "completion": ...}` lines for external trainers.
pub fn export_finetune_records(prompts: &[PromptRecord], out: &Path) -> Result<usize> {
    let mut text = String::new();
    for rec in prompts {
        let gold = rec
            .gold_label
            .as_deref()
            .ok_or_else(|| InferenceError::MissingGoldLabel(rec.utterance_id.clone()))?;
        text.push_str(&serde_json::to_string(&json!({
            "prompt": rec.full_text,
            "completion": gold,
        }))?);
        text.push('\n');
    }
    fs::write(out, text).with_context(|| format!("writing {}", out.display()))?;
    Ok(prompts.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prompt(id: &str, text: &str) -> PromptRecord {
        PromptRecord {
            utterance_id: id.to_string(),
            mode: "text_only".to_string(),
            full_text: text.to_string(),
            gold_label: Some("neutral".to_string()),
        }
    }

    fn labels() -> Vec<String> {
        ["anger", "happiness", "excitement", "sadness", "frustration", "neutral"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    /// Mock that echoes a canned completion per request, in arrival order.
    fn spawn_mock(replies: Vec<String>) -> (String, std::thread::JoinHandle<()>) {
        let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
        let url = format!("http://{}", server.server_addr());
        let handle = std::thread::spawn(move || {
            for reply in replies {
                let mut req = server.recv().unwrap();
                let mut body = String::new();
                req.as_reader().read_to_string(&mut body).unwrap();
                assert!(body.contains("\"messages\""));
                let payload =
                    json!({"choices": [{"message": {"role": "assistant", "content": reply}}]});
                let response = tiny_http::Response::from_string(payload.to_string())
                    .with_header("Content-Type: application/json".parse::<tiny_http::Header>().unwrap());
                req.respond(response).unwrap();
            }
        });
        (url, handle)
    }

    #[test]
    fn echo_mock_and_inflected_completions_parse() {
        let (url, handle) = spawn_mock(vec![
            "neutral".into(),
            "The emotion is: Sadness.".into(),
            "cheerful".into(),
        ]);
        let mut cfg = EndpointConfig::new(&url, "mock");
        cfg.max_concurrency = 1; // keep arrival order aligned with replies
        cfg.retry_base_ms = 1;
        let prompts = vec![prompt("u0", "a"), prompt("u1", "b"), prompt("u2", "c")];
        let preds = classify_zero_shot(&prompts, &cfg, &labels()).unwrap();
        handle.join().unwrap();
        assert_eq!(preds.len(), 3);
        assert_eq!(preds[0].parsed_label.as_deref(), Some("neutral"));
        assert_eq!(preds[1].parsed_label.as_deref(), Some("sadness"));
        assert_eq!(preds[2].parsed_label, None); // out of set, batch completed
        assert_eq!(preds[2].raw_completion, "cheerful");
    }

    #[test]
    fn export_round_trips_and_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ft.jsonl");
        let prompts = vec![prompt("u0", "p0"), prompt("u1", "p1"), prompt("u2", "p2")];
        assert_eq!(export_finetune_records(&prompts, &path).unwrap(), 3);
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<serde_json::Value> =
            text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1]["prompt"], "p1");
        assert_eq!(lines[1]["completion"], "neutral");
    }

    #[test]
    fn export_names_the_unlabeled_utterance() {
        let dir = tempfile::tempdir().unwrap();
        let mut p = prompt("u7", "x");
        p.gold_label = None;
        let err = export_finetune_records(&[p], &dir.path().join("ft.jsonl")).unwrap_err();
        assert!(format!("{err:#}").contains("u7"));
    }
}
