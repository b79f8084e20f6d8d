use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{BpmnGraph, ElementCategory};

/// Granularity of the element-type histogram.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeMode {
    /// Task, Gateway, Event, Data and Flow.
    #[default]
    Category,
    /// Raw element tag names.
    Tag,
}

/// Element counts per type and the derived probabilities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeDistribution {
    pub counts: BTreeMap<String, usize>,
    pub probabilities: BTreeMap<String, f64>,
}

impl TypeDistribution {
    pub fn from_counts(counts: BTreeMap<String, usize>) -> Self {
        let total: usize = counts.values().sum();
        let probabilities = counts
            .iter()
            .filter(|(_, &c)| total > 0 && c > 0)
            .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
            .collect();
        Self {
            counts,
            probabilities,
        }
    }

    /// Node categories (Other excluded) plus one Flow count per edge;
    /// in tag mode the raw tags of those same elements.
    pub fn from_graph(g: &BpmnGraph, mode: TypeMode) -> Self {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for n in g.nodes() {
            if n.category == ElementCategory::Other {
                continue;
            }
            let key = match mode {
                TypeMode::Category => n.category.as_str().to_owned(),
                TypeMode::Tag => n.tag.clone(),
            };
            *counts.entry(key).or_default() += 1;
        }
        for e in g.edges() {
            let key = match mode {
                TypeMode::Category => ElementCategory::Flow.as_str().to_owned(),
                TypeMode::Tag => e.tag.clone(),
            };
            *counts.entry(key).or_default() += 1;
        }
        Self::from_counts(counts)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

fn kl_term(p: f64, m: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * (p / m).log2()
    }
}

/// Jensen–Shannon divergence in bits: ½KL(P‖M) + ½KL(Q‖M), M = ½(P+Q).
/// Keys absent from both sides contribute nothing.
pub fn js_divergence(p: &BTreeMap<String, f64>, q: &BTreeMap<String, f64>) -> f64 {
    let mut js = 0.0;
    for key in p.keys().chain(q.keys().filter(|k| !p.contains_key(*k))) {
        let a = p.get(key).copied().unwrap_or(0.0);
        let b = q.get(key).copied().unwrap_or(0.0);
        let m = 0.5 * (a + b);
        if m == 0.0 {
            continue;
        }
        js += 0.5 * kl_term(a, m) + 0.5 * kl_term(b, m);
    }
    js.clamp(0.0, 1.0)
}

/// max(0, 1 − JS) between the type distributions of two graphs.
pub fn type_distribution_similarity(g1: &BpmnGraph, g2: &BpmnGraph, mode: TypeMode) -> f64 {
    let (a, b) = (
        TypeDistribution::from_graph(g1, mode),
        TypeDistribution::from_graph(g2, mode),
    );
    distribution_similarity(&a, &b)
}

pub fn distribution_similarity(a: &TypeDistribution, b: &TypeDistribution) -> f64 {
    match (a.total(), b.total()) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ => (1.0 - js_divergence(&a.probabilities, &b.probabilities)).max(0.0),
    }
}
