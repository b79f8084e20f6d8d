use super::SimilarityError;
use crate::model::{graph_stats, BpmnGraph};

/// min/max of two non-negative magnitudes, with 0/0 read as identical.
pub fn ratio_similarity(m1: f64, m2: f64) -> Result<f64, SimilarityError> {
    if m1 < 0.0 || m2 < 0.0 || m1.is_nan() || m2.is_nan() {
        return Err(SimilarityError::NegativeInput(m1.min(m2)));
    }
    let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
    if hi == 0.0 {
        return Ok(1.0);
    }
    Ok(lo / hi)
}

fn ratio(m1: f64, m2: f64) -> f64 {
    ratio_similarity(m1, m2).unwrap_or(0.0)
}

/// |Pearson ρ| of the two degree sequences after sorting descending and
/// zero-padding to a common length.
pub fn degree_similarity(d1: &[usize], d2: &[usize]) -> f64 {
    let n = d1.len().max(d2.len());
    if n == 0 {
        return 1.0;
    }
    let prepare = |d: &[usize]| -> Vec<f64> {
        let mut v: Vec<f64> = d.iter().map(|&x| x as f64).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.resize(n, 0.0);
        v
    };
    let (x, y) = (prepare(d1), prepare(d2));
    if x == y {
        return 1.0;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(&x), mean(&y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(&y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    match (sxx == 0.0, syy == 0.0) {
        (true, true) => ratio(x[0], y[0]),
        (true, false) | (false, true) => 0.0,
        (false, false) => (sxy / (sxx.sqrt() * syy.sqrt())).abs().min(1.0),
    }
}

/// Mean of ratio similarities over node count, edge count, density and
/// average degree, together with the degree-sequence correlation.
pub fn structural_similarity(g1: &BpmnGraph, g2: &BpmnGraph) -> f64 {
    let (a, b) = (graph_stats(g1), graph_stats(g2));
    let parts = [
        ratio(a.node_count as f64, b.node_count as f64),
        ratio(a.edge_count as f64, b.edge_count as f64),
        ratio(a.density, b.density),
        ratio(a.average_degree, b.average_degree),
        degree_similarity(&a.degree_sequence, &b.degree_sequence),
    ];
    (parts.iter().sum::<f64>() / parts.len() as f64).clamp(0.0, 1.0)
}
