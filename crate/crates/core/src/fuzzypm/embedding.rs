use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Ordered list of distinct tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("vocabulary is empty".into()));
        }
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!("vocabulary token {i} is empty or contains whitespace")));
            }
            if ids.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Vocabulary { tokens, ids })
    }

    /// One token per line; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }
}

/// Unit-norm vectors for (a subset of) the vocabulary and exact k-NN lists
/// under Euclidean distance.
#[derive(Debug, Clone)]
pub struct EmbeddingIndex {
    vocab: Vocabulary,
    dim: usize,
    k: usize,
    vectors: Vec<Option<Vec<f32>>>,
    neighbors: Vec<Vec<usize>>,
    /// Tokens dropped because their vector has zero norm.
    pub zero_vectors: Vec<String>,
}

impl EmbeddingIndex {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vector(&self, id: usize) -> Option<&[f32]> {
        self.vectors[id].as_deref()
    }

    pub fn neighbor_ids(&self, id: usize) -> &[usize] {
        &self.neighbors[id]
    }

    /// Neighbor ids of `token`; empty for tokens outside the vocabulary or
    /// without a vector.
    pub fn neighbors_of(&self, token: &str) -> &[usize] {
        self.vocab.id(token).map_or(&[], |id| &self.neighbors[id])
    }

    pub fn is_neighbor(&self, token: &str, candidate: &str) -> bool {
        self.vocab
            .id(candidate)
            .is_some_and(|c| self.neighbors_of(token).contains(&c))
    }

    pub fn num_embedded(&self) -> usize {
        self.vectors.iter().filter(|v| v.is_some()).count()
    }
}

/// Parse `token f1 f2 ...` lines. Tokens outside `vocab` are ignored. A
/// leading `count dim` header line is skipped.
/// Dimension, per-token unit vectors, and tokens whose vector was zero.
type ParsedVectors = (usize, Vec<Option<Vec<f32>>>, Vec<String>);

fn parse_vectors(text: &str, source: &Path, vocab: &Vocabulary) -> Result<ParsedVectors> {
    let mut dim = None;
    let mut vectors = vec![None; vocab.len()];
    let mut zero = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();
        if i == 0 && rest.len() == 1 && token.parse::<u64>().is_ok() && rest[0].parse::<u64>().is_ok() {
            continue;
        }
        if rest.is_empty() {
            return Err(Error::parse(source, i + 1, format!("token `{token}` has no vector")));
        }
        let mut v = Vec::with_capacity(rest.len());
        for f in &rest {
            let x: f32 = f
                .parse()
                .map_err(|_| Error::parse(source, i + 1, format!("bad float `{f}`")))?;
            if !x.is_finite() {
                return Err(Error::parse(source, i + 1, format!("non-finite value `{f}`")));
            }
            v.push(x);
        }
        match dim {
            None => dim = Some(v.len()),
            Some(d) if d != v.len() => {
                return Err(Error::parse(
                    source,
                    i + 1,
                    format!("dimension {} differs from {d} on earlier lines", v.len()),
                ))
            }
            _ => {}
        }
        let Some(id) = vocab.id(token) else { continue };
        let norm = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
        if norm == 0.0 {
            log::warn!("{}: zero vector for `{token}`, excluded", source.display());
            zero.push(token.to_string());
            continue;
        }
        vectors[id] = Some(v.iter().map(|&x| (f64::from(x) / norm) as f32).collect());
    }
    Ok((dim.unwrap_or(0), vectors, zero))
}

fn sq_dist(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .sum()
}

/// Build exact k-NN lists by brute force. Ties in distance are broken by
/// vocabulary order.
pub fn build_neighbor_index(embeddings: &str, source: &Path, vocab: &Vocabulary, k: usize) -> Result<EmbeddingIndex> {
    if k == 0 {
        return Err(Error::InvalidArgument("neighbor k must be at least 1".into()));
    }
    let (dim, vectors, zero_vectors) = parse_vectors(embeddings, source, vocab)?;
    let embedded: Vec<usize> = (0..vocab.len()).filter(|&i| vectors[i].is_some()).collect();
    if embedded.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{}: no vocabulary token has a usable vector",
            source.display()
        )));
    }
    let neighbors = (0..vocab.len())
        .into_par_iter()
        .map(|i| {
            let Some(v) = vectors[i].as_deref() else {
                return Vec::new();
            };
            let mut cands: Vec<(f64, usize)> = embedded
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (sq_dist(v, vectors[j].as_deref().unwrap()), j))
                .collect();
            let by = |a: &(f64, usize), b: &(f64, usize)| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1));
            if cands.len() > k {
                cands.select_nth_unstable_by(k - 1, by);
                cands.truncate(k);
            }
            cands.sort_by(by);
            cands.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(EmbeddingIndex {
        vocab: vocab.clone(),
        dim,
        k,
        vectors,
        neighbors,
        zero_vectors,
    })
}

pub fn load_neighbor_index(path: &Path, vocab: &Vocabulary, k: usize) -> Result<EmbeddingIndex> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    build_neighbor_index(&text, path, vocab, k)
}
