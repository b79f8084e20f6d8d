use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EvaluationReport, ModelScore, PairError, ReportError};
use crate::embeddings::Embedder;
use crate::model::build_graph;
use crate::similarity::{compare, CompareOptions};
use crate::xml;

/// A ground-truth model and its reconstruction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub id: String,
    pub ground_truth: PathBuf,
    pub reconstruction: PathBuf,
}

/// Outcome of one pair, as stored in `results/<pair-id>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairResult {
    Scored(ModelScore),
    Failed(PairError),
}

impl PairResult {
    pub fn model_id(&self) -> &str {
        match self {
            Self::Scored(s) => &s.model_id,
            Self::Failed(e) => &e.model_id,
        }
    }
}

fn load_graph(path: &Path) -> Result<crate::model::BpmnGraph, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc = xml::parse(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    build_graph(&doc)
        .map(|b| b.graph)
        .map_err(|e| format!("{}: {e}", path.display()))
}

pub fn evaluate_pair(pair: &PairSpec, embed: &dyn Embedder, opts: &CompareOptions) -> PairResult {
    let scored = load_graph(&pair.ground_truth).and_then(|a| {
        let b = load_graph(&pair.reconstruction)?;
        compare(&a, &b, embed, opts).map_err(|e| e.to_string())
    });
    match scored {
        Ok(breakdown) => PairResult::Scored(ModelScore {
            model_id: pair.id.clone(),
            breakdown,
        }),
        Err(error) => PairResult::Failed(PairError {
            model_id: pair.id.clone(),
            error,
        }),
    }
}

/// Scores every pair on a pool of `jobs` threads. Per-pair failures are
/// recorded, never fatal. The aggregate does not depend on `jobs`.
pub fn batch_evaluate(
    pairs: &[PairSpec],
    embed: &dyn Embedder,
    opts: &CompareOptions,
    jobs: usize,
    descriptions: Option<usize>,
) -> EvaluationReport {
    let results = run_pool(jobs, || {
        pairs
            .par_iter()
            .map(|p| evaluate_pair(p, embed, opts))
            .collect::<Vec<_>>()
    });
    aggregate(results, descriptions)
}

pub(crate) fn run_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

pub(crate) fn aggregate(results: Vec<PairResult>, descriptions: Option<usize>) -> EvaluationReport {
    let mut scores = Vec::new();
    let mut errors = Vec::new();
    for r in results {
        match r {
            PairResult::Scored(s) => scores.push(s),
            PairResult::Failed(e) => errors.push(e),
        }
    }
    EvaluationReport::from_results(scores, errors, descriptions)
}

/// Writes one result as `<dir>/<model_id>.json`.
pub fn write_result(dir: &Path, result: &PairResult) -> Result<PathBuf, ReportError> {
    let io = |path: &Path| {
        let p = path.display().to_string();
        move |source| ReportError::Io { path: p, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(format!("{}.json", result.model_id()));
    let text = serde_json::to_string(result).expect("result serializes") + "\n";
    fs::write(&path, text).map_err(io(&path))?;
    Ok(path)
}

/// Reads every `*.json` result in `dir`, sorted by file name.
pub fn load_results(dir: &Path) -> Result<Vec<PairResult>, ReportError> {
    let entries = fs::read_dir(dir).map_err(|source| ReportError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|source| ReportError::Io {
                path: p.display().to_string(),
                source,
            })?;
            serde_json::from_str(&text).map_err(|e| ReportError::Format {
                path: p.display().to_string(),
                message: e.to_string(),
            })
        })
        .collect()
}
