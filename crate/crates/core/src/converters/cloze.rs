use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use super::tokens::find_token_span;
use super::ConversionReport;
use crate::error::{Error, Result};
use crate::qa_dataset::{byte_to_char, AnswerSpan, Paragraph, QAExample, Split};

pub const DEFAULT_MASK: &str = "XXXXX";

/// A fill-in-the-blank example. Answer choices are carried but discarded
/// on conversion.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ClozeExample {
    #[serde(default)]
    pub id: String,
    pub passage: String,
    pub question: String,
    pub answer: String,
    #[serde(default)]
    pub candidates: Vec<String>,
}

/// Passage and question verbatim; the answer span is the first whole-token
/// occurrence of the answer in the passage. `Err` carries the skip reason.
pub fn cloze_to_extractive(ex: &ClozeExample, mask: &str) -> std::result::Result<Paragraph, String> {
    let masks = ex.question.matches(mask).count();
    if masks != 1 {
        return Err(format!("question has {masks} occurrences of mask `{mask}`, expected 1"));
    }
    if ex.passage.is_empty() {
        return Err("empty passage".into());
    }
    let range = find_token_span(&ex.passage, &ex.answer)
        .ok_or_else(|| format!("answer `{}` not found as a token in passage", ex.answer))?;
    let span = AnswerSpan::new(&ex.passage[range.clone()], byte_to_char(&ex.passage, range.start));
    Ok(Paragraph {
        title: String::new(),
        context: ex.passage.clone(),
        qas: vec![QAExample {
            id: ex.id.clone(),
            question: ex.question.clone(),
            answers: vec![span],
        }],
    })
}

/// Convert a batch, one paragraph per example, preserving input order.
pub fn convert_cloze(examples: &[ClozeExample], mask: &str) -> (Split, ConversionReport) {
    let converted: Vec<_> = examples
        .par_iter()
        .map(|ex| cloze_to_extractive(ex, mask))
        .collect();
    let mut report = ConversionReport {
        n_input: examples.len(),
        ..Default::default()
    };
    let mut paragraphs = Vec::new();
    for (ex, res) in examples.iter().zip(converted) {
        match res {
            Ok(p) => paragraphs.push(p),
            Err(reason) => report.skip(&ex.id, reason),
        }
    }
    report.n_output = paragraphs.len();
    (Split::new(paragraphs), report)
}

/// One JSON object per line: `{id?, passage, question, answer, candidates?}`.
/// Missing ids become `<prefix>-<line>`.
pub fn parse_cloze_jsonl(text: &str, source: &Path, prefix: &str) -> Result<Vec<ClozeExample>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut ex: ClozeExample =
            serde_json::from_str(line).map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        if ex.id.is_empty() {
            ex.id = format!("{prefix}-{}", i + 1);
        }
        out.push(ex);
    }
    Ok(out)
}

/// Children's Book Test text format: 20 numbered context lines, then line 21
/// `question \t answer \t \t cand1|cand2|...`; stories separated by blank lines.
pub fn parse_cbt(text: &str, source: &Path, prefix: &str) -> Result<Vec<ClozeExample>> {
    let mut out = Vec::new();
    let mut context: Vec<&str> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (num, rest) = line.split_once(' ').unwrap_or((line, ""));
        if num.parse::<u32>().is_err() {
            return Err(Error::parse(source, i + 1, "line does not start with a number"));
        }
        if rest.contains('\t') {
            let mut fields = rest.split('\t');
            let question = fields.next().unwrap_or("").trim().to_string();
            let answer = fields.next().unwrap_or("").trim().to_string();
            let candidates = fields
                .filter(|f| !f.is_empty())
                .flat_map(|f| f.split('|'))
                .map(str::to_string)
                .collect();
            out.push(ClozeExample {
                id: format!("{prefix}-{}", out.len()),
                passage: context.join(" "),
                question,
                answer,
                candidates,
            });
            context.clear();
        } else if !rest.trim().is_empty() {
            context.push(rest.trim());
        }
    }
    Ok(out)
}

/// A single CNN `.question` file: url, passage, question, answer, then
/// `@entityN:name` mappings, each block separated by a blank line.
pub fn parse_cnn_question(text: &str, id: &str) -> Result<ClozeExample> {
    let blocks: Vec<&str> = text
        .split("\n\n")
        .map(|b| b.trim_matches(|c| c == '\n' || c == '\r'))
        .collect();
    if blocks.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "{id}: CNN question file needs url, passage, question and answer blocks"
        )));
    }
    let candidates = blocks
        .get(4)
        .map(|b| {
            b.lines()
                .filter_map(|l| l.split_once(':').map(|(e, _)| e.to_string()))
                .collect()
        })
        .unwrap_or_default();
    Ok(ClozeExample {
        id: id.to_string(),
        passage: blocks[1].to_string(),
        question: blocks[2].to_string(),
        answer: blocks[3].trim().to_string(),
        candidates,
    })
}

const SENTENCE_END: [&str; 5] = [".", "!", "?", "''", "\""];

/// LAMBADA lines: the last word is the target. The question is the final
/// sentence with the target replaced by `mask`; the passage is everything
/// before that sentence.
pub fn parse_lambada(text: &str, prefix: &str, mask: &str) -> Vec<ClozeExample> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 {
            continue;
        }
        let answer = toks[toks.len() - 1];
        let body = &toks[..toks.len() - 1];
        let cut = body
            .iter()
            .rposition(|t| SENTENCE_END.contains(t))
            .map_or(0, |p| p + 1);
        let (passage, question) = if cut == 0 || cut == body.len() {
            // no usable boundary: keep the whole context as passage
            (body.join(" "), mask.to_string())
        } else {
            let mut q = body[cut..].to_vec();
            q.push(mask);
            (body[..cut].join(" "), q.join(" "))
        };
        out.push(ClozeExample {
            id: format!("{prefix}-{}", i + 1),
            passage,
            question,
            answer: answer.to_string(),
            candidates: Vec::new(),
        });
    }
    out
}
