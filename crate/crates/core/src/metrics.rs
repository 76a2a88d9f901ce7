//! SQuAD v1.1 exact match.
//!
//! The normalizer mirrors the official v1.1 evaluation script: lowercase,
//! drop ASCII punctuation, drop the articles a/an/the as whole words, then
//! collapse whitespace.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qa_dataset::Split;

/// Answer strings keyed by example id, as in the official predictions file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictionSet(pub BTreeMap<String, String>);

impl PredictionSet {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    pub fn insert(&mut self, id: impl Into<String>, answer: impl Into<String>) {
        self.0.insert(id.into(), answer.into());
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub em: f64,
    pub n_total: usize,
    pub n_scored: usize,
    pub n_missing: usize,
    /// Prediction ids that match no gold example.
    pub unknown_ids: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_example: Option<BTreeMap<String, u8>>,
}

// Python's str.isspace() also treats the ASCII separators 0x1C..0x1F as space.
fn is_py_space(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

// Python 3 `\w` on str patterns.
fn is_word_char(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

pub fn normalize_answer(s: &str) -> String {
    let lowered = s.to_lowercase();
    let no_punct: String = lowered.chars().filter(|c| !c.is_ascii_punctuation()).collect();

    // `\b(a|an|the)\b` hits exactly the maximal word runs equal to an article.
    let mut no_articles = String::with_capacity(no_punct.len());
    let mut rest = no_punct.as_str();
    while let Some(c) = rest.chars().next() {
        let in_word = is_word_char(c);
        let end = rest
            .char_indices()
            .find(|&(_, ch)| is_word_char(ch) != in_word)
            .map_or(rest.len(), |(i, _)| i);
        let run = &rest[..end];
        if in_word && matches!(run, "a" | "an" | "the") {
            no_articles.push(' ');
        } else {
            no_articles.push_str(run);
        }
        rest = &rest[end..];
    }

    no_articles
        .split(is_py_space)
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

/// 1 when the normalized prediction equals any normalized gold answer.
pub fn exact_match<S: AsRef<str>>(prediction: &str, golds: &[S]) -> Result<u8> {
    if golds.is_empty() {
        return Err(Error::InvalidArgument("exact_match needs at least one gold answer".into()));
    }
    let pred = normalize_answer(prediction);
    Ok(golds.iter().any(|g| normalize_answer(g.as_ref()) == pred) as u8)
}

/// Score `predictions` against every example of `gold`.
///
/// Missing predictions score 0 and are counted in `n_missing`; with `strict`
/// the first missing id is an error instead.
pub fn evaluate(
    predictions: &PredictionSet,
    gold: &Split,
    strict: bool,
    keep_per_example: bool,
) -> Result<EvalResult> {
    let mut per_example = BTreeMap::new();
    let mut correct = 0usize;
    let mut n_total = 0usize;
    let mut n_missing = 0usize;
    let mut known = std::collections::HashSet::new();

    for (_, qa) in gold.examples() {
        n_total += 1;
        known.insert(qa.id.as_str());
        let score = match predictions.0.get(&qa.id) {
            Some(pred) => {
                let golds: Vec<&str> = qa.answers.iter().map(|a| a.text.as_str()).collect();
                exact_match(pred, &golds)?
            }
            None if strict => return Err(Error::MissingPrediction(qa.id.clone())),
            None => {
                n_missing += 1;
                0
            }
        };
        correct += score as usize;
        if keep_per_example {
            per_example.insert(qa.id.clone(), score);
        }
    }

    let unknown_ids: Vec<String> = predictions
        .0
        .keys()
        .filter(|id| !known.contains(id.as_str()))
        .cloned()
        .collect();
    for id in &unknown_ids {
        log::warn!("prediction for unknown id `{id}`");
    }
    if n_missing > 0 {
        log::warn!("{n_missing} of {n_total} examples have no prediction");
    }

    let em = if n_total == 0 {
        0.0
    } else {
        100.0 * correct as f64 / n_total as f64
    };
    Ok(EvalResult {
        em,
        n_total,
        n_scored: n_total - n_missing,
        n_missing,
        unknown_ids,
        per_example: keep_per_example.then_some(per_example),
    })
}
