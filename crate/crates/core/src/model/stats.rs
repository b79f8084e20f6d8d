use serde::{Deserialize, Serialize};

use super::graph::BpmnGraph;
use super::GraphError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub average_degree: f64,
    /// Total degrees, sorted descending.
    pub degree_sequence: Vec<usize>,
}

/// Directed density E / (N(N−1)), capped at 1 for multigraphs; total-degree statistics.
pub fn graph_stats(g: &BpmnGraph) -> GraphStats {
    let n = g.node_count();
    let e = g.edge_count();
    let density = if n >= 2 {
        (e as f64 / (n as f64 * (n as f64 - 1.0))).min(1.0)
    } else {
        0.0
    };
    let average_degree = if n > 0 {
        2.0 * e as f64 / n as f64
    } else {
        0.0
    };
    let mut degree_sequence: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    degree_sequence.sort_unstable_by(|a, b| b.cmp(a));
    GraphStats {
        node_count: n,
        edge_count: e,
        density,
        average_degree,
        degree_sequence,
    }
}

/// `label neighbors: a, b, ...` with neighbor labels sorted ascending.
/// Unlabeled nodes contribute their tag name.
pub fn context_label(g: &BpmnGraph, node_id: &str) -> Result<String, GraphError> {
    let index = g
        .index_of(node_id)
        .ok_or_else(|| GraphError::UnknownNode(node_id.to_owned()))?;
    let nodes = g.nodes();
    let mut labels: Vec<&str> = g
        .neighbors(index)
        .into_iter()
        .map(|i| nodes[i].display_label())
        .collect();
    labels.sort_unstable();
    Ok(format!(
        "{} neighbors: {}",
        nodes[index].display_label(),
        labels.join(", ")
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BpmnEdge, BpmnNode};

    fn chain(labels: &[&str]) -> BpmnGraph {
        let nodes = labels
            .iter()
            .enumerate()
            .map(|(i, l)| BpmnNode::new(format!("n{i}"), "task", *l))
            .collect();
        let edges = (1..labels.len())
            .map(|i| {
                BpmnEdge::new(
                    format!("f{i}"),
                    format!("n{}", i - 1),
                    format!("n{i}"),
                    "sequenceFlow",
                )
            })
            .collect();
        BpmnGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn three_node_chain() {
        let s = graph_stats(&chain(&["a", "b", "c"]));
        assert_eq!(s.degree_sequence, vec![2, 1, 1]);
        assert!((s.density - 2.0 / 6.0).abs() < 1e-15);
        assert!((s.average_degree - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_graphs() {
        let empty = graph_stats(&BpmnGraph::default());
        assert_eq!(
            empty,
            GraphStats {
                node_count: 0,
                edge_count: 0,
                density: 0.0,
                average_degree: 0.0,
                degree_sequence: vec![]
            }
        );
        let single = graph_stats(&chain(&["only"]));
        assert_eq!(single.node_count, 1);
        assert_eq!(single.density, 0.0);
        assert_eq!(single.average_degree, 0.0);
        assert_eq!(single.degree_sequence, vec![0]);
    }

    #[test]
    fn context_label_sorts_neighbors() {
        let g = chain(&["Check Stock", "Approve Order", "Ship Goods"]);
        assert_eq!(
            context_label(&g, "n1").unwrap(),
            "Approve Order neighbors: Check Stock, Ship Goods"
        );
        let g = chain(&["b", "Review", "a"]);
        assert_eq!(context_label(&g, "n1").unwrap(), "Review neighbors: a, b");
    }

    #[test]
    fn isolated_and_unknown_nodes() {
        let g = chain(&["Archive"]);
        assert_eq!(context_label(&g, "n0").unwrap(), "Archive neighbors: ");
        assert_eq!(
            context_label(&g, "zz"),
            Err(GraphError::UnknownNode("zz".into()))
        );
    }

    #[test]
    fn unlabeled_neighbors_use_tag() {
        let nodes = vec![
            BpmnNode::new("g", "exclusiveGateway", ""),
            BpmnNode::new("t", "task", "Pay"),
        ];
        let g = BpmnGraph::new(nodes, vec![BpmnEdge::new("f", "g", "t", "sequenceFlow")]).unwrap();
        assert_eq!(
            context_label(&g, "t").unwrap(),
            "Pay neighbors: exclusiveGateway"
        );
    }
}
