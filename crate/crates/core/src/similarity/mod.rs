//! Five-dimensional similarity between two process graphs.
//!
//! | dimension            | basis                                                   |
//! |----------------------|---------------------------------------------------------|
//! | `structural`         | size, density, degree ratios and degree correlation     |
//! | `type_distribution`  | 1 − Jensen–Shannon divergence of element-type histograms|
//! | `semantic_name`      | optimal matching of (context-augmented) label embeddings|
//! | `semantic_type`      | optimal matching of element-tag embeddings              |
//! | `semantic_name_type` | optimal matching of `label [tag]` embeddings            |
//!
//! `overall` is the arithmetic mean of the five.

mod assignment;
mod distribution;
mod structural;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assignment::max_weight_assignment;
pub use distribution::{
    distribution_similarity, js_divergence, type_distribution_similarity, TypeDistribution,
    TypeMode,
};
pub use structural::{degree_similarity, ratio_similarity, structural_similarity};

use crate::embeddings::{cosine, EmbedError, Embedder};
use crate::model::{context_label, BpmnGraph, BpmnNode, ElementCategory};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("similarity inputs must be non-negative, got {0}")]
    NegativeInput(f64),
    #[error("embedding provider failed: {0}")]
    EmbeddingProviderFailure(#[from] EmbedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareOptions {
    /// Append sorted neighbor labels to names before embedding.
    pub context: bool,
    pub type_mode: TypeMode,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            context: true,
            type_mode: TypeMode::Category,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityBreakdown {
    pub structural: f64,
    pub type_distribution: f64,
    pub semantic_name: f64,
    pub semantic_type: f64,
    pub semantic_name_type: f64,
    pub overall: f64,
}

impl SimilarityBreakdown {
    /// Builds a breakdown whose `overall` is the mean of the five dimensions.
    pub fn from_dimensions(
        structural: f64,
        type_distribution: f64,
        semantic_name: f64,
        semantic_type: f64,
        semantic_name_type: f64,
    ) -> Self {
        let overall =
            (structural + type_distribution + semantic_name + semantic_type + semantic_name_type)
                / 5.0;
        Self {
            structural,
            type_distribution,
            semantic_name,
            semantic_type,
            semantic_name_type,
            overall: overall.clamp(0.0, 1.0),
        }
    }

    pub fn dimensions(&self) -> [f64; 5] {
        [
            self.structural,
            self.type_distribution,
            self.semantic_name,
            self.semantic_type,
            self.semantic_name_type,
        ]
    }
}

/// Sum of optimally matched pairwise similarities divided by the longer list length.
///
/// Cosines are clamped into [0, 1]; textually identical strings count as 1
/// even when their embedding is the zero vector.
pub fn semantic_set_similarity(
    texts1: &[String],
    texts2: &[String],
    embed: &dyn Embedder,
) -> Result<f64, SimilarityError> {
    match (texts1.is_empty(), texts2.is_empty()) {
        (true, true) => return Ok(1.0),
        (true, false) | (false, true) => return Ok(0.0),
        _ => {}
    }
    let mut unique: Vec<String> = Vec::new();
    let slot = |t: &String, unique: &mut Vec<String>| match unique.iter().position(|u| u == t) {
        Some(i) => i,
        None => {
            unique.push(t.clone());
            unique.len() - 1
        }
    };
    let idx1: Vec<usize> = texts1.iter().map(|t| slot(t, &mut unique)).collect();
    let idx2: Vec<usize> = texts2.iter().map(|t| slot(t, &mut unique)).collect();
    let vectors = embed.embed_batch(&unique)?;
    if vectors.len() != unique.len() {
        return Err(EmbedError::InvalidResponse(format!(
            "provider returned {} vectors for {} texts",
            vectors.len(),
            unique.len()
        ))
        .into());
    }
    let mut weights = vec![vec![0.0; idx2.len()]; idx1.len()];
    for (i, &a) in idx1.iter().enumerate() {
        for (j, &b) in idx2.iter().enumerate() {
            weights[i][j] = if a == b {
                1.0
            } else {
                cosine(&vectors[a], &vectors[b])?.clamp(0.0, 1.0)
            };
        }
    }
    let (_, total) = max_weight_assignment(&weights);
    Ok((total / texts1.len().max(texts2.len()) as f64).clamp(0.0, 1.0))
}

fn named_nodes(g: &BpmnGraph) -> impl Iterator<Item = &BpmnNode> {
    g.nodes()
        .iter()
        .filter(|n| !matches!(n.category, ElementCategory::Other | ElementCategory::Flow))
}

fn name_text(g: &BpmnGraph, n: &BpmnNode, context: bool) -> String {
    if context {
        context_label(g, &n.id).unwrap_or_else(|_| n.display_label().to_owned())
    } else {
        n.display_label().to_owned()
    }
}

/// Texts embedded for the name dimension.
pub fn name_texts(g: &BpmnGraph, opts: &CompareOptions) -> Vec<String> {
    named_nodes(g)
        .map(|n| name_text(g, n, opts.context))
        .collect()
}

/// Tags of all typed nodes and all edges.
pub fn type_texts(g: &BpmnGraph) -> Vec<String> {
    g.nodes()
        .iter()
        .filter(|n| n.category != ElementCategory::Other)
        .map(|n| n.tag.clone())
        .chain(g.edges().iter().map(|e| e.tag.clone()))
        .collect()
}

/// `label [tag]`, with the neighbor context appended when enabled.
pub fn name_type_texts(g: &BpmnGraph, opts: &CompareOptions) -> Vec<String> {
    named_nodes(g)
        .map(|n| {
            let base = format!("{} [{}]", n.display_label(), n.tag);
            if opts.context {
                let ctx = name_text(g, n, true);
                match ctx.split_once(" neighbors: ") {
                    Some((_, neighbors)) => format!("{base} neighbors: {neighbors}"),
                    None => base,
                }
            } else {
                base
            }
        })
        .collect()
}

pub fn compare(
    g1: &BpmnGraph,
    g2: &BpmnGraph,
    embed: &dyn Embedder,
    opts: &CompareOptions,
) -> Result<SimilarityBreakdown, SimilarityError> {
    let structural = structural_similarity(g1, g2);
    let type_distribution = type_distribution_similarity(g1, g2, opts.type_mode);
    let semantic_name =
        semantic_set_similarity(&name_texts(g1, opts), &name_texts(g2, opts), embed)?;
    let semantic_type = semantic_set_similarity(&type_texts(g1), &type_texts(g2), embed)?;
    let semantic_name_type = semantic_set_similarity(
        &name_type_texts(g1, opts),
        &name_type_texts(g2, opts),
        embed,
    )?;
    Ok(SimilarityBreakdown::from_dimensions(
        structural,
        type_distribution,
        semantic_name,
        semantic_type,
        semantic_name_type,
    ))
}
