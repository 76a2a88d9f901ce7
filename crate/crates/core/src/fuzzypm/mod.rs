//! FuzzyPM: a synthetic benchmark of random-token passages where each
//! question is a corrupted local window around an answer token.
//!
//! ```text
//! passage : ... Salib melanocephala Pilgrims chop Prosser draftsmanship 203 ...
//! question: Pigs corncrake XXXXX 286 airmanship Kition gracious Modernism Raul
//! answer  : chop
//! ```

mod corrupt;
mod embedding;
mod source;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use corrupt::{corrupt, corrupt_traced, CorruptionConfig, CorruptionTrace};
pub use embedding::{build_neighbor_index, load_neighbor_index, EmbeddingIndex, Vocabulary};
pub use source::{read_paragraphs, NGramModel, PassageSource, PassageSourceSpec, BOS, EOS};

use crate::error::{Error, Result};
use crate::qa_dataset::{AnswerSpan, ExtractiveBenchmark, Paragraph, QAExample, Split};
use crate::rng::{derive_seed, label_hash, stream};

/// Window of up to `window` tokens around `answer_index` (half the window to
/// the left, the rest minus the answer to the right), truncated at the
/// passage edges, with the answer replaced by `mask`. Returns the tokens and
/// the mask position.
pub fn make_cloze(passage: &[String], answer_index: usize, window: usize, mask: &str) -> Result<(Vec<String>, usize)> {
    if answer_index >= passage.len() {
        return Err(Error::InvalidArgument(format!(
            "answer index {answer_index} outside passage of {} tokens",
            passage.len()
        )));
    }
    if window == 0 {
        return Err(Error::InvalidArgument("cloze window must be at least 1".into()));
    }
    let left = window / 2;
    let right = window - left - 1;
    let lo = answer_index.saturating_sub(left);
    let hi = (answer_index + right + 1).min(passage.len());
    let mut out = passage[lo..hi].to_vec();
    let pos = answer_index - lo;
    out[pos] = mask.to_string();
    Ok((out, pos))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FuzzyPmConfig {
    pub n_passages: usize,
    pub questions_per_passage: usize,
    pub window: usize,
    pub corruption: CorruptionConfig,
    pub seed: u64,
}

impl Default for FuzzyPmConfig {
    fn default() -> Self {
        FuzzyPmConfig {
            n_passages: 2000,
            questions_per_passage: 5,
            window: 10,
            corruption: CorruptionConfig::default(),
            seed: 0,
        }
    }
}

fn passage(
    split: &str,
    idx: usize,
    config: &FuzzyPmConfig,
    source: &PassageSourceSpec,
    index: &EmbeddingIndex,
    seed: u64,
) -> Result<(Paragraph, Vec<CorruptionTrace>)> {
    let mut rng = stream(seed, &[idx as u64]);
    let tokens = source.sample(&mut rng)?;
    let mask = &config.corruption.mask_token;
    if tokens.iter().any(|t| t == mask) {
        return Err(Error::InvalidArgument(format!("passage source produced the mask token `{mask}`")));
    }
    let mut starts = Vec::with_capacity(tokens.len());
    let mut pos = 0;
    for t in &tokens {
        starts.push(pos);
        pos += t.chars().count() + 1;
    }
    let mut answers = sample(&mut rng, tokens.len(), config.questions_per_passage).into_vec();
    answers.sort_unstable();
    let mut qas = Vec::with_capacity(answers.len());
    let mut traces = Vec::with_capacity(answers.len());
    for (q, &a) in answers.iter().enumerate() {
        let (cloze, _) = make_cloze(&tokens, a, config.window, mask)?;
        let trace = corrupt_traced(&cloze, &config.corruption, index, &mut rng)?;
        qas.push(QAExample {
            id: format!("fuzzypm-{split}-{idx:06}-{q}"),
            question: trace.output.join(" "),
            answers: vec![AnswerSpan::new(tokens[a].clone(), starts[a])],
        });
        traces.push(trace);
    }
    let paragraph = Paragraph {
        title: "fuzzypm".into(),
        context: tokens.join(" "),
        qas,
    };
    Ok((paragraph, traces))
}

/// Generate one split from its own sub-seed. Passages are generated in
/// parallel from per-passage streams; output order is by passage index.
pub fn generate_split(
    split: &str,
    config: &FuzzyPmConfig,
    source: &PassageSourceSpec,
    index: &EmbeddingIndex,
) -> Result<Split> {
    generate_split_traced(split, config, source, index).map(|(s, _)| s)
}

/// Like [`generate_split`], also returning the corruption trace of every
/// question, grouped by passage.
pub fn generate_split_traced(
    split: &str,
    config: &FuzzyPmConfig,
    source: &PassageSourceSpec,
    index: &EmbeddingIndex,
) -> Result<(Split, Vec<Vec<CorruptionTrace>>)> {
    config.corruption.check()?;
    if config.questions_per_passage > source.passage_len {
        return Err(Error::InvalidArgument(format!(
            "{} questions per passage exceeds passage length {}",
            config.questions_per_passage, source.passage_len
        )));
    }
    let seed = derive_seed(config.seed, &[label_hash("fuzzypm"), label_hash(split)]);
    let (paragraphs, traces): (Vec<_>, Vec<_>) = (0..config.n_passages)
        .into_par_iter()
        .map(|i| passage(split, i, config, source, index, seed))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok((Split::new(paragraphs), traces))
}

/// Train and dev splits of identical shape from disjoint sub-seeds.
pub fn generate_fuzzypm(
    config: &FuzzyPmConfig,
    source: &PassageSourceSpec,
    index: &EmbeddingIndex,
) -> Result<ExtractiveBenchmark> {
    Ok(ExtractiveBenchmark::new(
        "fuzzypm",
        generate_split("train", config, source, index)?,
        generate_split("dev", config, source, index)?,
    ))
}

#[cfg(test)]
mod tests {
    use std::path::Path;

    use super::*;
    use crate::converters::DEFAULT_MASK;
    use crate::qa_dataset::validate;

    fn toks(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn cloze_window_mid_passage() {
        let (q, pos) = make_cloze(&toks(150), 70, 10, DEFAULT_MASK).unwrap();
        assert_eq!(q.len(), 10);
        assert_eq!(pos, 5);
        assert_eq!(q[0], "t65");
        assert_eq!(q[9], "t74");
        assert_eq!(q[5], DEFAULT_MASK);
    }

    #[test]
    fn cloze_window_edges() {
        let (q, pos) = make_cloze(&toks(150), 0, 10, DEFAULT_MASK).unwrap();
        assert_eq!((q.len(), pos), (5, 0));
        let (q, pos) = make_cloze(&toks(150), 149, 10, DEFAULT_MASK).unwrap();
        assert_eq!((q.len(), pos), (6, 5));
        let (q, _) = make_cloze(&toks(3), 1, 10, DEFAULT_MASK).unwrap();
        assert_eq!(q, vec!["t0", DEFAULT_MASK, "t2"]);
        assert!(make_cloze(&toks(3), 3, 10, DEFAULT_MASK).is_err());
    }

    fn small() -> (FuzzyPmConfig, PassageSourceSpec, EmbeddingIndex) {
        let words = toks(60);
        let emb: String = words
            .iter()
            .enumerate()
            .map(|(i, w)| format!("{w} {} {} 0.5\n", (i as f64).cos(), (i as f64 * 1.7).sin()))
            .collect();
        let v = Vocabulary::new(words).unwrap();
        let idx = build_neighbor_index(&emb, Path::new("e"), &v, 8).unwrap();
        let cfg = FuzzyPmConfig {
            n_passages: 12,
            seed: 11,
            ..Default::default()
        };
        (cfg, PassageSourceSpec::uniform(v, 30), idx)
    }

    #[test]
    fn generated_benchmark_is_valid_and_deterministic() {
        let (cfg, src, idx) = small();
        let b = generate_fuzzypm(&cfg, &src, &idx).unwrap();
        assert!(validate(&b).is_empty());
        assert_eq!(b.train.num_qas(), 60);
        assert_eq!(b.dev.num_qas(), 60);
        assert_ne!(b.train, b.dev);
        assert_eq!(generate_fuzzypm(&cfg, &src, &idx).unwrap(), b);
        for (p, qa) in b.train.examples() {
            let q: Vec<&str> = qa.question.split(' ').collect();
            assert!(q.len() <= 10);
            assert_eq!(q.iter().filter(|t| **t == DEFAULT_MASK).count(), 1);
            assert!(qa.answers[0].matches(&p.context));
        }
    }

    #[test]
    fn too_many_questions() {
        let (mut cfg, src, idx) = small();
        cfg.questions_per_passage = 31;
        assert!(generate_fuzzypm(&cfg, &src, &idx).is_err());
    }

    #[test]
    fn independent_of_thread_count() {
        let (cfg, src, idx) = small();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| generate_split("train", &cfg, &src, &idx)).unwrap();
        assert_eq!(a, generate_split("train", &cfg, &src, &idx).unwrap());
    }
}
