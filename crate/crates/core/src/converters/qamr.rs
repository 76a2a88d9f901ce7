use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use super::ConversionReport;
use crate::error::{Error, Result};
use crate::qa_dataset::{check_span, AnswerSpan, Paragraph, QAExample, Split};

/// A question written against one sentence of a multi-sentence passage.
/// `answer.char_start` is relative to `sentence`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QamrItem {
    pub id: String,
    pub passage_id: String,
    pub sentence_index: usize,
    pub sentence: String,
    pub question: String,
    pub answer: AnswerSpan,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawItem {
    id: String,
    passage_id: String,
    sentence_index: usize,
    sentence: String,
    question: String,
    answer_text: String,
    answer_start: usize,
}

/// One item per line: `{id, passage_id, sentence_index, sentence, question,
/// answer_text, answer_start}`.
pub fn parse_qamr_jsonl(text: &str, source: &Path) -> Result<Vec<QamrItem>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: RawItem = serde_json::from_str(line).map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        out.push(QamrItem {
            id: r.id,
            passage_id: r.passage_id,
            sentence_index: r.sentence_index,
            sentence: r.sentence,
            question: r.question,
            answer: AnswerSpan::new(r.answer_text, r.answer_start),
        });
    }
    Ok(out)
}

fn question_key(q: &str) -> String {
    q.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Rebuild full passages from per-sentence items. Sentences are joined by
/// single spaces and spans shifted accordingly. A question (compared after
/// lowercasing and whitespace collapsing) asked on more than one sentence of
/// the same passage is removed everywhere in that passage.
pub fn qamr_reconstruct(items: &[QamrItem]) -> Result<(Split, ConversionReport)> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<&QamrItem>> = HashMap::new();
    for it in items {
        groups
            .entry(&it.passage_id)
            .or_insert_with(|| {
                order.push(&it.passage_id);
                Vec::new()
            })
            .push(it);
    }

    let mut report = ConversionReport {
        n_input: items.len(),
        ..Default::default()
    };
    let mut paragraphs = Vec::new();
    for pid in order {
        let group = &groups[pid];
        let mut sentences: BTreeMap<usize, &str> = BTreeMap::new();
        for it in group {
            match sentences.insert(it.sentence_index, &it.sentence) {
                Some(prev) if prev != it.sentence => {
                    return Err(Error::InvalidArgument(format!(
                        "passage {pid}: sentence {} has inconsistent text",
                        it.sentence_index
                    )));
                }
                _ => {}
            }
        }
        let first = *sentences.keys().next().unwrap();
        for (k, idx) in sentences.keys().enumerate() {
            if *idx != first + k {
                return Err(Error::InvalidArgument(format!(
                    "passage {pid}: sentence indices have a gap before {idx}"
                )));
            }
        }
        let mut shift = HashMap::new();
        let mut pos = 0;
        for (idx, s) in &sentences {
            shift.insert(*idx, pos);
            pos += s.chars().count() + 1;
        }
        let context = sentences.values().copied().collect::<Vec<_>>().join(" ");

        let mut asked_on: HashMap<String, HashSet<usize>> = HashMap::new();
        for it in group {
            asked_on.entry(question_key(&it.question)).or_default().insert(it.sentence_index);
        }

        let mut qas = Vec::new();
        for it in group {
            if asked_on[&question_key(&it.question)].len() > 1 {
                report.skip(&it.id, "question duplicated across sentences of the passage");
                continue;
            }
            if let Some(kind) = check_span(&it.sentence, &it.answer) {
                report.skip(&it.id, format!("answer span invalid within sentence: {kind:?}"));
                continue;
            }
            qas.push(QAExample {
                id: it.id.clone(),
                question: it.question.clone(),
                answers: vec![AnswerSpan::new(
                    it.answer.text.clone(),
                    it.answer.char_start + shift[&it.sentence_index],
                )],
            });
        }
        if !qas.is_empty() {
            paragraphs.push(Paragraph {
                title: pid.to_string(),
                context,
                qas,
            });
        }
    }
    report.n_output = paragraphs.iter().map(|p| p.qas.len()).sum();
    Ok((Split::new(paragraphs), report))
}
