use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{l2_normalize, EmbedError, Embedder, EmbeddingVector};

#[derive(Serialize)]
struct EmbedRequest<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

/// Counting semaphore bounding concurrent HTTP requests.
#[derive(Debug)]
struct Permits {
    free: Mutex<usize>,
    cond: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cond: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cond.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut free = self.0.free.lock().unwrap_or_else(|e| e.into_inner());
        *free += 1;
        self.0.cond.notify_one();
    }
}

/// Client for a JSON embedding service:
/// `POST {model, input: [...]}` answered by `{embeddings: [[...], ...]}`.
#[derive(Debug)]
pub struct RemoteEmbedder {
    endpoint: String,
    model: Option<String>,
    dimension: usize,
    batch_size: usize,
    retry_count: u32,
    retry_delay: Duration,
    client: reqwest::blocking::Client,
    permits: Permits,
}

impl RemoteEmbedder {
    pub fn new(
        endpoint: impl Into<String>,
        model: Option<String>,
        dimension: usize,
        batch_size: usize,
        timeout: Duration,
        retry_count: u32,
        max_in_flight: usize,
    ) -> Result<Self, EmbedError> {
        if dimension == 0 || batch_size == 0 {
            return Err(EmbedError::Config(
                "dimension and batch_size must be positive".into(),
            ));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| EmbedError::Config(e.to_string()))?;
        Ok(Self {
            endpoint: endpoint.into(),
            model,
            dimension,
            batch_size,
            retry_count,
            retry_delay: Duration::from_millis(200),
            client,
            permits: Permits::new(max_in_flight),
        })
    }

    /// Base delay of the exponential backoff between attempts.
    pub fn with_retry_delay(mut self, delay: Duration) -> Self {
        self.retry_delay = delay;
        self
    }

    fn post_chunk(&self, chunk: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let body = EmbedRequest {
            model: self.model.as_deref(),
            input: chunk,
        };
        let attempts = self.retry_count + 1;
        let mut last = String::new();
        for attempt in 1..=attempts {
            if attempt > 1 {
                thread::sleep(self.retry_delay * 2u32.saturating_pow(attempt - 2));
            }
            let result = {
                let _permit = self.permits.acquire();
                self.client.post(&self.endpoint).json(&body).send()
            };
            let response = match result {
                Ok(r) => r,
                Err(e) => {
                    last = e.to_string();
                    continue;
                }
            };
            let status = response.status();
            if status.is_server_error() || status.as_u16() == 429 {
                last = format!("HTTP {status}");
                continue;
            }
            if !status.is_success() {
                return Err(EmbedError::RemoteUnavailable {
                    attempts: attempt,
                    message: format!("HTTP {status}"),
                });
            }
            let parsed: EmbedResponse = response
                .json()
                .map_err(|e| EmbedError::InvalidResponse(e.to_string()))?;
            return self.check(chunk.len(), parsed.embeddings);
        }
        Err(EmbedError::RemoteUnavailable {
            attempts,
            message: last,
        })
    }

    fn check(
        &self,
        expected: usize,
        vectors: Vec<Vec<f64>>,
    ) -> Result<Vec<EmbeddingVector>, EmbedError> {
        if vectors.len() != expected {
            return Err(EmbedError::InvalidResponse(format!(
                "expected {expected} vectors, got {}",
                vectors.len()
            )));
        }
        vectors
            .into_iter()
            .map(|mut v| {
                if v.len() != self.dimension {
                    return Err(EmbedError::DimensionMismatch {
                        expected: self.dimension,
                        found: v.len(),
                    });
                }
                l2_normalize(&mut v);
                Ok(v)
            })
            .collect()
    }
}

impl Embedder for RemoteEmbedder {
    fn id(&self) -> String {
        format!(
            "remote:{}:{}",
            self.endpoint,
            self.model.as_deref().unwrap_or("default")
        )
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, EmbedError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size) {
            out.extend(self.post_chunk(chunk)?);
        }
        Ok(out)
    }
}
