use serde::{Deserialize, Serialize};

use super::graph::{KnowledgeGraph, Object};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

/// Power iteration over a multigraph with `n` nodes. Mass at nodes without
/// out-edges is spread uniformly; teleport is uniform. Stops once the L1
/// change between iterates is at most `tol`.
pub fn pagerank_edges(n: usize, edges: &[(usize, usize)], config: &PageRankConfig) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("pagerank needs at least one node".into()));
    }
    if !(0.0..=1.0).contains(&config.damping) {
        return Err(Error::InvalidArgument(format!("damping {} outside [0, 1]", config.damping)));
    }
    let mut out_deg = vec![0usize; n];
    for &(u, _) in edges {
        out_deg[u] += 1;
    }
    let d = config.damping;
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..config.max_iter {
        let dangling: f64 = (0..n).filter(|&u| out_deg[u] == 0).map(|u| rank[u]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for &(u, v) in edges {
            next[v] += d * rank[u] / out_deg[u] as f64;
        }
        residual = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if residual <= config.tol {
            return Ok(rank);
        }
    }
    Err(Error::NoConvergence {
        iterations: config.max_iter,
        residual,
    })
}

/// Scores indexed by entity, over edges subject → object of entity-valued
/// triples.
pub fn pagerank(graph: &KnowledgeGraph, config: &PageRankConfig) -> Result<Vec<f64>> {
    let edges: Vec<(usize, usize)> = graph
        .triples
        .iter()
        .filter_map(|t| match t.object {
            Object::Entity(o) => Some((t.subject, o)),
            Object::Literal(_) => None,
        })
        .collect();
    pagerank_edges(graph.entities.len(), &edges, config)
}

/// Entity indices by descending score, ties by entity id.
pub fn rank_entities(graph: &KnowledgeGraph, scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.entities.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| graph.entities[a].id.cmp(&graph.entities[b].id))
    });
    order
}
