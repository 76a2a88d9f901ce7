//! Deterministic source-format → [`ExtractiveBenchmark`](crate::qa_dataset::ExtractiveBenchmark)
//! transformations.
//!
//! Every converter is total-or-reported: examples that cannot be converted
//! are dropped and listed in a [`ConversionReport`], so
//! `n_input == n_output + skipped.len()`.

mod babi;
mod cloze;
mod cnn;
mod downsample;
mod nq;
mod qamr;
mod tokens;

use serde::Serialize;

pub use babi::{babi_to_extractive, convert_babi, parse_babi, read_babi, BabiExample};
pub use cloze::{
    cloze_to_extractive, convert_cloze, parse_cbt, parse_cloze_jsonl, parse_cnn_question,
    parse_lambada, ClozeExample, DEFAULT_MASK,
};
pub use cnn::{cnn_vocab_guard, MarkerReport};
pub use downsample::{downsample, downsample_split};
pub use nq::{normalize_nq_html, normalize_nq_split};
pub use qamr::{parse_qamr_jsonl, qamr_reconstruct, QamrItem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConversionReport {
    pub n_input: usize,
    pub n_output: usize,
    pub skipped: Vec<Skipped>,
}

impl ConversionReport {
    pub(crate) fn skip(&mut self, id: impl Into<String>, reason: impl Into<String>) {
        let s = Skipped {
            id: id.into(),
            reason: reason.into(),
        };
        log::info!("skipping {}: {}", s.id, s.reason);
        self.skipped.push(s);
    }

    /// |input| == |output| + |skipped|.
    pub fn is_balanced(&self) -> bool {
        self.n_input == self.n_output + self.skipped.len()
    }
}
