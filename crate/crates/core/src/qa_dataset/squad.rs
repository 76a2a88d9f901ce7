//! SQuAD v1.1 JSON container: `data → paragraphs → qas → answers`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AnswerSpan, Paragraph, QAExample, Split};
use crate::error::{Error, Result};

const VERSION: &str = "1.1";

#[derive(Serialize, Deserialize)]
struct SquadFile {
    data: Vec<SquadArticle>,
    #[serde(default = "default_version")]
    version: String,
}

fn default_version() -> String {
    VERSION.to_string()
}

#[derive(Serialize, Deserialize)]
struct SquadArticle {
    #[serde(default)]
    title: String,
    paragraphs: Vec<SquadParagraph>,
}

#[derive(Serialize, Deserialize)]
struct SquadParagraph {
    context: String,
    qas: Vec<SquadQa>,
}

#[derive(Serialize, Deserialize)]
struct SquadQa {
    answers: Vec<SquadAnswer>,
    question: String,
    id: String,
}

#[derive(Serialize, Deserialize)]
struct SquadAnswer {
    answer_start: usize,
    text: String,
}

/// Parse a SQuAD v1.1 document. Any span that disagrees with its context
/// fails the whole load with the offending ids.
pub fn parse_squad_json(json: &str, context: &str) -> Result<Split> {
    let file: SquadFile = serde_json::from_str(json).map_err(|e| Error::json(context, e))?;
    let mut paragraphs = Vec::new();
    for article in file.data {
        for p in article.paragraphs {
            paragraphs.push(Paragraph {
                title: article.title.clone(),
                context: p.context,
                qas: p
                    .qas
                    .into_iter()
                    .map(|qa| QAExample {
                        id: qa.id,
                        question: qa.question,
                        answers: qa
                            .answers
                            .into_iter()
                            .map(|a| AnswerSpan::new(a.text, a.answer_start))
                            .collect(),
                    })
                    .collect(),
            });
        }
    }
    let split = Split::new(paragraphs);
    let violations = split.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(split)
}

pub fn load_squad_json(path: impl AsRef<Path>) -> Result<Split> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_squad_json(&text, &path.display().to_string())
}

/// Serialize to compact SQuAD JSON. Consecutive paragraphs that share a title
/// are grouped into one article.
pub fn to_squad_json(split: &Split) -> String {
    let mut data: Vec<SquadArticle> = Vec::new();
    for p in &split.paragraphs {
        let para = SquadParagraph {
            context: p.context.clone(),
            qas: p
                .qas
                .iter()
                .map(|qa| SquadQa {
                    answers: qa
                        .answers
                        .iter()
                        .map(|a| SquadAnswer {
                            answer_start: a.char_start,
                            text: a.text.clone(),
                        })
                        .collect(),
                    question: qa.question.clone(),
                    id: qa.id.clone(),
                })
                .collect(),
        };
        match data.last_mut() {
            Some(article) if article.title == p.title => article.paragraphs.push(para),
            _ => data.push(SquadArticle {
                title: p.title.clone(),
                paragraphs: vec![para],
            }),
        }
    }
    let file = SquadFile {
        data,
        version: VERSION.to_string(),
    };
    serde_json::to_string(&file).expect("SQuAD structures always serialize")
}

/// Write `split` after validating it; refuses to write a broken benchmark.
pub fn save_squad_json(split: &Split, path: impl AsRef<Path>) -> Result<()> {
    let violations = split.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let path = path.as_ref();
    fs::write(path, to_squad_json(split)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"data":[{"title":"T","paragraphs":[{"context":"The cat sat.","qas":[{"answers":[{"answer_start":4,"text":"cat"}],"question":"Who sat?","id":"q1"}]}]}],"version":"1.1"}"#;

    #[test]
    fn minimal_file_loads() {
        let split = parse_squad_json(MINIMAL, "minimal").unwrap();
        assert_eq!(split.paragraphs.len(), 1);
        assert_eq!(split.num_qas(), 1);
        assert_eq!(split.paragraphs[0].title, "T");
    }

    #[test]
    fn minimal_file_reserializes_identically() {
        let split = parse_squad_json(MINIMAL, "minimal").unwrap();
        assert_eq!(to_squad_json(&split), MINIMAL);
    }

    #[test]
    fn wrong_answer_start_names_qa_id() {
        let bad = MINIMAL.replace("\"answer_start\":4", "\"answer_start\":3");
        match parse_squad_json(&bad, "bad") {
            Err(Error::Validation(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].id, "q1");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_is_an_error() {
        assert!(matches!(
            parse_squad_json("{\"data\": [", "x"),
            Err(Error::Json { .. })
        ));
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let extra = MINIMAL.replace("\"id\":\"q1\"", "\"id\":\"q1\",\"is_impossible\":false");
        assert_eq!(parse_squad_json(&extra, "x").unwrap().num_qas(), 1);
    }
}
