//! Corpus manifests, batch evaluation and aggregate reporting.

mod batch;
mod manifest;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use batch::{batch_evaluate, evaluate_pair, load_results, write_result, PairResult, PairSpec};
pub use manifest::{CorpusManifest, ManifestEntry, ModelStatus};

use crate::similarity::SimilarityBreakdown;

/// Bins of the overall-score histogram over [0, 1].
pub const HISTOGRAM_BINS: usize = 20;

/// Dimension keys in reporting order, with their table labels.
pub const DIMENSIONS: [(&str, &str); 6] = [
    ("structural", "Structural Similarity"),
    ("type_distribution", "Type Distribution Similarity"),
    ("semantic_name", "Name/Description Semantic Similarity"),
    ("semantic_type", "Type Semantic Similarity"),
    ("semantic_name_type", "Name-Type Semantic Similarity"),
    ("overall", "Overall Similarity"),
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model_id: String,
    #[serde(flatten)]
    pub breakdown: SimilarityBreakdown,
}

impl ModelScore {
    pub fn value(&self, dimension: &str) -> f64 {
        let b = &self.breakdown;
        match dimension {
            "structural" => b.structural,
            "type_distribution" => b.type_distribution,
            "semantic_name" => b.semantic_name,
            "semantic_type" => b.semantic_type,
            "semantic_name_type" => b.semantic_name_type,
            _ => b.overall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairError {
    pub model_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Process descriptions the evaluation started from.
    pub descriptions: usize,
    /// Pairs with a reconstruction available.
    pub reconstructed: usize,
    /// Pairs scored successfully.
    pub evaluated: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Sorted by `model_id`.
    pub per_model: Vec<ModelScore>,
    pub errors: Vec<PairError>,
    /// Means over successfully evaluated pairs.
    pub averages: BTreeMap<String, f64>,
    /// Sums divided by the number of descriptions, so missing or failed
    /// reconstructions count as zero.
    pub description_normalized_averages: BTreeMap<String, f64>,
    pub histogram: Vec<HistogramBin>,
    pub counts: Counts,
}

/// Bin index of a score in [0, 1]; 1.0 falls in the last bin.
pub fn histogram_bin(score: f64) -> usize {
    ((score * HISTOGRAM_BINS as f64).floor().max(0.0) as usize).min(HISTOGRAM_BINS - 1)
}

impl EvaluationReport {
    /// Aggregates results. `descriptions` defaults to the number of pairs when `None`.
    pub fn from_results(
        mut per_model: Vec<ModelScore>,
        mut errors: Vec<PairError>,
        descriptions: Option<usize>,
    ) -> Self {
        per_model.sort_by(|a, b| a.model_id.cmp(&b.model_id));
        errors.sort_by(|a, b| a.model_id.cmp(&b.model_id));
        let evaluated = per_model.len();
        let counts = Counts {
            descriptions: descriptions.unwrap_or(evaluated + errors.len()),
            reconstructed: evaluated + errors.len(),
            evaluated,
            failed: errors.len(),
        };
        let mut averages = BTreeMap::new();
        let mut description_normalized_averages = BTreeMap::new();
        for (key, _) in DIMENSIONS {
            let sum: f64 = per_model.iter().map(|m| m.value(key)).sum();
            if evaluated > 0 {
                averages.insert(key.to_owned(), sum / evaluated as f64);
            }
            if counts.descriptions > 0 {
                description_normalized_averages
                    .insert(key.to_owned(), sum / counts.descriptions as f64);
            }
        }
        let mut histogram: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
            .map(|i| HistogramBin {
                bin_low: i as f64 / HISTOGRAM_BINS as f64,
                bin_high: (i + 1) as f64 / HISTOGRAM_BINS as f64,
                count: 0,
            })
            .collect();
        for m in &per_model {
            histogram[histogram_bin(m.breakdown.overall)].count += 1;
        }
        Self {
            per_model,
            errors,
            averages,
            description_normalized_averages,
            histogram,
            counts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// Picks the format from a file extension.
    pub fn from_path(path: &std::path::Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "json" => Some(Self::Json),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

/// Renders a report: full JSON, or a metric table followed by the histogram as CSV.
pub fn render_report(report: &EvaluationReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report serializes");
            out.push(b'\n');
            out
        }
        ReportFormat::Csv => {
            let mut out = String::from("Metric,Average Score\n");
            for (key, label) in DIMENSIONS {
                if let Some(v) = report.averages.get(key) {
                    out.push_str(&format!("{label},{v:.4}\n"));
                }
            }
            out.push_str("\nbin_low,bin_high,count\n");
            for b in &report.histogram {
                out.push_str(&format!("{:.2},{:.2},{}\n", b.bin_low, b.bin_high, b.count));
            }
            out.into_bytes()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(id: &str, v: f64) -> ModelScore {
        ModelScore {
            model_id: id.into(),
            breakdown: SimilarityBreakdown::from_dimensions(v, v, v, v, v),
        }
    }

    #[test]
    fn bins() {
        assert_eq!(histogram_bin(0.0), 0);
        assert_eq!(histogram_bin(0.049), 0);
        assert_eq!(histogram_bin(0.05), 1);
        assert_eq!(histogram_bin(0.97), 19);
        assert_eq!(histogram_bin(1.0), 19);
    }

    #[test]
    fn identical_pairs_aggregate_to_one() {
        let r =
            EvaluationReport::from_results(vec![score("b", 1.0), score("a", 1.0)], vec![], None);
        assert_eq!(r.per_model[0].model_id, "a");
        assert!(r.averages.values().all(|v| *v == 1.0));
        assert_eq!(r.histogram[19].count, 2);
        assert_eq!(r.histogram.iter().map(|b| b.count).sum::<usize>(), 2);
    }

    #[test]
    fn failures_are_excluded_from_pair_average_only() {
        let err = PairError {
            model_id: "x".into(),
            error: "unparseable".into(),
        };
        let r = EvaluationReport::from_results(vec![score("a", 0.8)], vec![err], None);
        assert_eq!(r.counts.evaluated, 1);
        assert_eq!(r.counts.failed, 1);
        assert!((r.averages["overall"] - 0.8).abs() < 1e-12);
        assert!((r.description_normalized_averages["overall"] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut s = score("a", 0.805);
        s.breakdown.structural = 0.8050;
        let r = EvaluationReport::from_results(vec![s], vec![], None);
        let csv = String::from_utf8(render_report(&r, ReportFormat::Csv)).unwrap();
        assert!(csv.starts_with("Metric,Average Score\nStructural Similarity,0.8050\n"));
        assert!(csv.contains("\nbin_low,bin_high,count\n0.00,0.05,0\n"));
        assert!(csv.contains("0.80,0.85,1\n"));
    }

    #[test]
    fn empty_report() {
        let r = EvaluationReport::from_results(vec![], vec![], None);
        let csv = String::from_utf8(render_report(&r, ReportFormat::Csv)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "Metric,Average Score");
        assert_eq!(lines[1], "");
        assert_eq!(lines.len(), 2 + 1 + HISTOGRAM_BINS);
        assert!(r.histogram.iter().all(|b| b.count == 0));
    }

    #[test]
    fn json_round_trip() {
        let r = EvaluationReport::from_results(
            vec![score("a", 0.123456789), score("b", 2.0 / 3.0)],
            vec![PairError {
                model_id: "c".into(),
                error: "bad".into(),
            }],
            Some(5),
        );
        let back: EvaluationReport =
            serde_json::from_slice(&render_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }
}
