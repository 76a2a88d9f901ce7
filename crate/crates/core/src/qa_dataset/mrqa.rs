//! MRQA 2019 shared-task JSONL: a `{"header": ...}` line followed by one
//! record per line. Answers come as inclusive character spans.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{AnswerSpan, Paragraph, QAExample, Split};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct Record {
    context: String,
    qas: Vec<RecordQa>,
}

#[derive(Deserialize)]
struct RecordQa {
    #[serde(alias = "id")]
    qid: String,
    question: String,
    detected_answers: Vec<DetectedAnswer>,
}

#[derive(Deserialize)]
struct DetectedAnswer {
    char_spans: Vec<(usize, usize)>,
}

/// Parse MRQA JSONL text. `source` names the input in error messages.
/// Context text is kept verbatim (HTML markers included).
pub fn parse_mrqa_jsonl(text: &str, source: &Path) -> Result<Split> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    match lines.next() {
        Some((i, first)) => {
            let v: serde_json::Value = serde_json::from_str(first)
                .map_err(|e| Error::parse(source, i + 1, format!("bad header: {e}")))?;
            if v.get("header").is_none() {
                return Err(Error::parse(source, i + 1, "first line is not a header object"));
            }
        }
        None => return Err(Error::parse(source, 1, "missing header line")),
    }

    let mut paragraphs = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let rec: Record = serde_json::from_str(line)
            .map_err(|e| Error::parse(source, lineno, e.to_string()))?;
        let chars: Vec<(usize, char)> = rec.context.char_indices().collect();
        let mut qas = Vec::with_capacity(rec.qas.len());
        for qa in rec.qas {
            let mut answers = Vec::new();
            for det in &qa.detected_answers {
                for &(start, end) in &det.char_spans {
                    if end < start {
                        return Err(Error::parse(
                            source,
                            lineno,
                            format!("{}: char span end {end} < start {start}", qa.qid),
                        ));
                    }
                    if end >= chars.len() {
                        return Err(Error::parse(
                            source,
                            lineno,
                            format!(
                                "{}: char span [{start}, {end}] outside context of {} chars",
                                qa.qid,
                                chars.len()
                            ),
                        ));
                    }
                    let lo = chars[start].0;
                    let hi = chars.get(end + 1).map_or(rec.context.len(), |c| c.0);
                    answers.push(AnswerSpan::new(&rec.context[lo..hi], start));
                }
            }
            qas.push(QAExample {
                id: qa.qid,
                question: qa.question,
                answers,
            });
        }
        paragraphs.push(Paragraph {
            title: String::new(),
            context: rec.context,
            qas,
        });
    }

    let split = Split::new(paragraphs);
    let violations = split.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(split)
}

pub fn load_mrqa_jsonl(path: impl AsRef<Path>) -> Result<Split> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mrqa_jsonl(&text, path)
}
