use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use bpmnkit::embeddings::{build_provider, Embedder, ProviderConfig, ProviderKind};
use bpmnkit::llm::{ChatBackend, HttpChatBackend, LlmClient, LlmClientConfig, MockChatClient};
use clap::Args;
use serde::Deserialize;

pub const ENV_JOBS: &str = "BPMNKIT_JOBS";

/// Options shared by every subcommand.
#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// JSON settings file; keys mirror the long flag names
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Chat-completions endpoint URL
    #[arg(long, global = true, value_name = "URL")]
    pub llm_endpoint: Option<String>,
    #[arg(long, global = true, value_name = "NAME")]
    pub llm_model: Option<String>,
    /// Answer LLM requests from a scripted JSON file instead of a server
    #[arg(long, global = true, value_name = "FILE")]
    pub llm_mock: Option<PathBuf>,
    /// Embedding service endpoint URL
    #[arg(long, global = true, value_name = "URL")]
    pub embed_endpoint: Option<String>,
    #[arg(long, global = true, value_name = "NAME")]
    pub embed_model: Option<String>,
    /// Use the offline hashing embedder even if an endpoint is configured
    #[arg(long, global = true)]
    pub embed_fallback: bool,
    /// Directory for cached embedding vectors
    #[arg(long, global = true, value_name = "DIR")]
    pub embed_cache: Option<PathBuf>,
    /// Sampling seed forwarded to the LLM
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for batch work
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct ConfigFile {
    llm_endpoint: Option<String>,
    llm_model: Option<String>,
    llm_mock: Option<PathBuf>,
    llm_temperature: Option<f64>,
    llm_max_tokens: Option<u32>,
    llm_timeout_ms: Option<u64>,
    llm_retries: Option<u32>,
    llm_retry_delay_ms: Option<u64>,
    llm_rate_limit: Option<u32>,
    embed_endpoint: Option<String>,
    embed_model: Option<String>,
    embed_fallback: Option<bool>,
    embed_cache: Option<PathBuf>,
    embed_dimension: Option<usize>,
    embed_batch_size: Option<usize>,
    embed_retries: Option<u32>,
    seed: Option<u64>,
    jobs: Option<usize>,
}

/// Effective configuration after merging file, environment and flags.
#[derive(Debug, Clone)]
pub struct Settings {
    pub llm: LlmClientConfig,
    pub llm_mock: Option<PathBuf>,
    pub embed: ProviderConfig,
    pub jobs: usize,
}

fn load_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl Settings {
    /// Config file < environment < command-line flags.
    pub fn resolve(args: &GlobalArgs, env: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let file = match &args.config {
            Some(p) => load_file(p)?,
            None => ConfigFile::default(),
        };

        let mut llm = LlmClientConfig::default();
        if let Some(v) = file.llm_endpoint {
            llm.endpoint = Some(v);
        }
        if let Some(v) = file.llm_model {
            llm.model = v;
        }
        if let Some(v) = file.llm_temperature {
            llm.temperature = v;
        }
        if let Some(v) = file.llm_max_tokens {
            llm.max_tokens = v;
        }
        if let Some(v) = file.llm_timeout_ms {
            llm.timeout_ms = v;
        }
        if let Some(v) = file.llm_retries {
            llm.retry_count = v;
        }
        if let Some(v) = file.llm_retry_delay_ms {
            llm.retry_delay_ms = v;
        }
        llm.rate_limit = file.llm_rate_limit.or(llm.rate_limit);
        llm.seed = file.seed;
        llm.apply_env(&env);
        if let Some(v) = &args.llm_endpoint {
            llm.endpoint = Some(v.clone());
        }
        if let Some(v) = &args.llm_model {
            llm.model = v.clone();
        }
        if args.seed.is_some() {
            llm.seed = args.seed;
        }
        if llm.temperature < 0.0 {
            bail!("llm-temperature must be non-negative");
        }

        let mut embed = ProviderConfig::default();
        if let Some(v) = file.embed_endpoint {
            embed.endpoint = Some(v);
            embed.kind = ProviderKind::RemoteHttp;
        }
        if file.embed_fallback == Some(true) {
            embed.kind = ProviderKind::HashingFallback;
        }
        embed.model_name = file.embed_model.or(embed.model_name);
        embed.cache_dir = file.embed_cache;
        if let Some(v) = file.embed_dimension {
            embed.dimension = v;
        }
        if let Some(v) = file.embed_batch_size {
            embed.batch_size = v;
        }
        if let Some(v) = file.embed_retries {
            embed.retry_count = v;
        }
        embed.apply_env(&env);
        if let Some(v) = &args.embed_endpoint {
            embed.endpoint = Some(v.clone());
            embed.kind = ProviderKind::RemoteHttp;
        }
        if let Some(v) = &args.embed_model {
            embed.model_name = Some(v.clone());
        }
        if let Some(v) = &args.embed_cache {
            embed.cache_dir = Some(v.clone());
        }
        if args.embed_fallback {
            embed.kind = ProviderKind::HashingFallback;
        }

        let env_jobs = env(ENV_JOBS)
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&j| j > 0);
        let jobs = args
            .jobs
            .map(|j| j as usize)
            .or(env_jobs)
            .or(file.jobs.filter(|&j| j > 0))
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

        Ok(Self {
            llm,
            llm_mock: args.llm_mock.clone().or(file.llm_mock),
            embed,
            jobs,
        })
    }

    pub fn llm_client(&self) -> Result<LlmClient> {
        let backend: Arc<dyn ChatBackend> = match &self.llm_mock {
            Some(path) => Arc::new(
                MockChatClient::from_file(path)
                    .with_context(|| format!("loading mock script {}", path.display()))?,
            ),
            None => {
                if self.llm.endpoint.is_none() {
                    bail!("no LLM endpoint configured (use --llm-endpoint, BPMNKIT_LLM_ENDPOINT or --llm-mock)");
                }
                Arc::new(HttpChatBackend::new(&self.llm)?)
            }
        };
        Ok(LlmClient::new(backend, self.llm.clone()))
    }

    pub fn embedder(&self) -> Result<Arc<dyn Embedder>> {
        Ok(build_provider(&self.embed)?)
    }
}
