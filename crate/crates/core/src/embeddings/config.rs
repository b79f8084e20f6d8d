use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    CachedEmbedder, EmbedError, Embedder, EmbeddingVector, HashingEmbedder, RemoteEmbedder,
    DEFAULT_DIMENSION,
};

pub const ENV_EMBED_ENDPOINT: &str = "BPMNKIT_EMBED_ENDPOINT";
pub const ENV_EMBED_MODEL: &str = "BPMNKIT_EMBED_MODEL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    HashingFallback,
    RemoteHttp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub dimension: usize,
    pub batch_size: usize,
    pub timeout_ms: u64,
    pub retry_count: u32,
    pub retry_delay_ms: u64,
    pub max_in_flight: usize,
    pub cache_dir: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::HashingFallback,
            endpoint: None,
            model_name: None,
            dimension: DEFAULT_DIMENSION,
            batch_size: 64,
            timeout_ms: 30_000,
            retry_count: 3,
            retry_delay_ms: 200,
            max_in_flight: 4,
            cache_dir: None,
        }
    }
}

impl ProviderConfig {
    pub fn hashing(dimension: usize) -> Self {
        Self {
            dimension,
            ..Self::default()
        }
    }

    pub fn remote(endpoint: impl Into<String>) -> Self {
        Self {
            kind: ProviderKind::RemoteHttp,
            endpoint: Some(endpoint.into()),
            ..Self::default()
        }
    }

    /// Applies the endpoint and model overrides; an endpoint switches to the remote provider.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(endpoint) = lookup(ENV_EMBED_ENDPOINT).filter(|s| !s.is_empty()) {
            self.endpoint = Some(endpoint);
            self.kind = ProviderKind::RemoteHttp;
        }
        if let Some(model) = lookup(ENV_EMBED_MODEL).filter(|s| !s.is_empty()) {
            self.model_name = Some(model);
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dimension == 0 {
            return Err(EmbedError::Config("dimension must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(EmbedError::Config("batch_size must be positive".into()));
        }
        if self.kind == ProviderKind::RemoteHttp && self.endpoint.is_none() {
            return Err(EmbedError::Config(
                "remote-http provider requires an endpoint".into(),
            ));
        }
        Ok(())
    }
}

/// Instantiates the configured provider, wrapped in a disk cache when `cache_dir` is set.
pub fn build_provider(cfg: &ProviderConfig) -> Result<Arc<dyn Embedder>, EmbedError> {
    cfg.validate()?;
    let base: Arc<dyn Embedder> = match cfg.kind {
        ProviderKind::HashingFallback => Arc::new(HashingEmbedder::new(cfg.dimension)?),
        ProviderKind::RemoteHttp => Arc::new(
            RemoteEmbedder::new(
                cfg.endpoint.clone().unwrap_or_default(),
                cfg.model_name.clone(),
                cfg.dimension,
                cfg.batch_size,
                Duration::from_millis(cfg.timeout_ms),
                cfg.retry_count,
                cfg.max_in_flight,
            )?
            .with_retry_delay(Duration::from_millis(cfg.retry_delay_ms)),
        ),
    };
    Ok(match &cfg.cache_dir {
        Some(dir) => Arc::new(CachedEmbedder::new(base, dir.clone())),
        None => base,
    })
}

/// One-shot convenience: build the provider and embed `texts`.
pub fn embed_batch(
    texts: &[String],
    cfg: &ProviderConfig,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    build_provider(cfg)?.embed_batch(texts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remote_requires_endpoint() {
        let cfg = ProviderConfig {
            kind: ProviderKind::RemoteHttp,
            ..ProviderConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(EmbedError::Config(_))));
        assert!(ProviderConfig::remote("http://localhost:1")
            .validate()
            .is_ok());
    }

    #[test]
    fn env_overrides_switch_to_remote() {
        let mut cfg = ProviderConfig::default();
        cfg.apply_env(|k| match k {
            ENV_EMBED_ENDPOINT => Some("http://embed.local/v1".into()),
            ENV_EMBED_MODEL => Some("mini".into()),
            _ => None,
        });
        assert_eq!(cfg.kind, ProviderKind::RemoteHttp);
        assert_eq!(cfg.model_name.as_deref(), Some("mini"));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg: ProviderConfig =
            serde_json::from_str(r#"{"kind":"remote-http","endpoint":"http://x"}"#).unwrap();
        assert_eq!(cfg.dimension, DEFAULT_DIMENSION);
        let back: ProviderConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}
