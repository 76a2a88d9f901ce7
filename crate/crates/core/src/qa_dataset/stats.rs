use serde::Serialize;

use super::{ExtractiveBenchmark, Split};

/// Corpus descriptors. Token counts use a plain whitespace split, so they
/// approximate (not reproduce) statistics computed with other tokenizers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkStats {
    pub n_train_qas: usize,
    pub n_dev_qas: usize,
    pub n_paragraphs: usize,
    /// Mean question length over every example in both splits.
    pub avg_question_tokens: f64,
    /// Mean passage length over every example (each example counts its own passage).
    pub avg_passage_tokens: f64,
}

pub fn stats(benchmark: &ExtractiveBenchmark) -> BenchmarkStats {
    let mut q_tokens = 0usize;
    let mut p_tokens = 0usize;
    let mut n = 0usize;
    let splits: [&Split; 2] = [&benchmark.train, &benchmark.dev];
    for split in splits {
        for p in &split.paragraphs {
            let plen = p.context.split_whitespace().count();
            for qa in &p.qas {
                q_tokens += qa.question.split_whitespace().count();
                p_tokens += plen;
                n += 1;
            }
        }
    }
    let avg = |total: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
    BenchmarkStats {
        n_train_qas: benchmark.train.num_qas(),
        n_dev_qas: benchmark.dev.num_qas(),
        n_paragraphs: benchmark.train.paragraphs.len() + benchmark.dev.paragraphs.len(),
        avg_question_tokens: avg(q_tokens),
        avg_passage_tokens: avg(p_tokens),
    }
}
