use rand::Rng;
use serde::{Deserialize, Serialize};

use super::embedding::EmbeddingIndex;
use crate::converters::DEFAULT_MASK;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorruptionConfig {
    pub replace_prob: f64,
    pub neighbor_k: usize,
    pub permute_window: usize,
    pub dropout_rate: f64,
    pub mask_token: String,
}

impl Default for CorruptionConfig {
    fn default() -> Self {
        CorruptionConfig {
            replace_prob: 0.3,
            neighbor_k: 100,
            permute_window: 3,
            dropout_rate: 0.2,
            mask_token: DEFAULT_MASK.to_string(),
        }
    }
}

impl CorruptionConfig {
    /// No replacement, permutation or dropout.
    pub fn identity() -> Self {
        CorruptionConfig {
            replace_prob: 0.0,
            permute_window: 0,
            dropout_rate: 0.0,
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        for (name, p) in [("replace_prob", self.replace_prob), ("dropout_rate", self.dropout_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")));
            }
        }
        if self.neighbor_k == 0 {
            return Err(Error::InvalidArgument("neighbor_k must be at least 1".into()));
        }
        if self.mask_token.is_empty() {
            return Err(Error::InvalidArgument("mask token is empty".into()));
        }
        Ok(())
    }
}

/// What each corruption step did, for auditing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptionTrace {
    pub input: Vec<String>,
    /// `(position, original, replacement)` for every replaced token.
    pub replacements: Vec<(usize, String, String)>,
    /// After step 1.
    pub replaced: Vec<String>,
    /// `origin[j]` is the input position of the token at position `j` after
    /// step 2.
    pub origin: Vec<usize>,
    /// Parallel to `origin`: whether the token survived step 3.
    pub kept: Vec<bool>,
    pub output: Vec<String>,
}

impl CorruptionTrace {
    pub fn max_displacement(&self) -> usize {
        self.origin
            .iter()
            .enumerate()
            .map(|(j, &i)| j.abs_diff(i))
            .max()
            .unwrap_or(0)
    }
}

/// Replace, locally permute, then drop tokens. The mask token is exempt
/// from all three steps.
pub fn corrupt<R: Rng + ?Sized>(
    question: &[String],
    config: &CorruptionConfig,
    index: &EmbeddingIndex,
    rng: &mut R,
) -> Result<Vec<String>> {
    corrupt_traced(question, config, index, rng).map(|t| t.output)
}

pub fn corrupt_traced<R: Rng + ?Sized>(
    question: &[String],
    config: &CorruptionConfig,
    index: &EmbeddingIndex,
    rng: &mut R,
) -> Result<CorruptionTrace> {
    config.check()?;
    let mask = &config.mask_token;
    let masks: Vec<usize> = (0..question.len()).filter(|&i| question[i] == *mask).collect();
    if masks.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "question must contain exactly one `{mask}`, found {}",
            masks.len()
        )));
    }
    let m = masks[0];

    let mut replaced = question.to_vec();
    let mut replacements = Vec::new();
    for (i, tok) in replaced.iter_mut().enumerate() {
        if i == m {
            continue;
        }
        let nn = index.neighbors_of(tok);
        let nn = &nn[..nn.len().min(config.neighbor_k)];
        if nn.is_empty() || !rng.gen_bool(config.replace_prob) {
            continue;
        }
        let new = index.vocab().token(nn[rng.gen_range(0..nn.len())]).to_string();
        if new == *mask {
            continue;
        }
        replacements.push((i, tok.clone(), new.clone()));
        *tok = new;
    }

    let w = config.permute_window as f64;
    let mut keyed: Vec<(f64, usize)> = (0..question.len())
        .filter(|&i| i != m)
        .map(|i| (i as f64 + if w > 0.0 { rng.gen_range(0.0..w) } else { 0.0 }, i))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut origin: Vec<usize> = keyed.into_iter().map(|(_, i)| i).collect();
    origin.insert(m, m);

    let kept: Vec<bool> = origin
        .iter()
        .map(|&i| i == m || !rng.gen_bool(config.dropout_rate))
        .collect();
    let output = origin
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(&i, _)| replaced[i].clone())
        .collect();
    Ok(CorruptionTrace {
        input: question.to_vec(),
        replacements,
        replaced,
        origin,
        kept,
        output,
    })
}
