use std::path::Path;

use rayon::prelude::*;

use super::tokens::find_token_span;
use super::ConversionReport;
use crate::error::{Error, Result};
use crate::qa_dataset::{byte_to_char, AnswerSpan, Paragraph, QAExample, Split};

/// One bAbI question with the story statements seen so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BabiExample {
    pub id: String,
    pub story: Vec<String>,
    pub question: String,
    pub answer: String,
    /// 0-based indices into `story`, in annotation order.
    pub supporting_facts: Vec<usize>,
}

/// Passage = story joined by single spaces. The answer is searched as a
/// token in the supporting facts, then as `answer+"s"`, then `answer+"es"`.
pub fn babi_to_extractive(ex: &BabiExample) -> std::result::Result<Paragraph, String> {
    if let Some(&bad) = ex.supporting_facts.iter().find(|&&i| i >= ex.story.len()) {
        return Err(format!("supporting fact {bad} out of range ({} sentences)", ex.story.len()));
    }
    if ex.supporting_facts.is_empty() {
        return Err("no supporting fact".into());
    }
    let mut offsets = Vec::with_capacity(ex.story.len());
    let mut pos = 0;
    for s in &ex.story {
        offsets.push(pos);
        pos += s.len() + 1;
    }
    let passage = ex.story.join(" ");
    let forms = [ex.answer.clone(), format!("{}s", ex.answer), format!("{}es", ex.answer)];
    for form in &forms {
        for &f in &ex.supporting_facts {
            if let Some(r) = find_token_span(&ex.story[f], form) {
                let start = offsets[f] + r.start;
                let text = &passage[start..offsets[f] + r.end];
                return Ok(Paragraph {
                    title: String::new(),
                    context: passage.clone(),
                    qas: vec![QAExample {
                        id: ex.id.clone(),
                        question: ex.question.clone(),
                        answers: vec![AnswerSpan::new(text, byte_to_char(&passage, start))],
                    }],
                });
            }
        }
    }
    Err(format!("answer `{}` and its plurals absent from supporting facts", ex.answer))
}

pub fn convert_babi(examples: &[BabiExample]) -> (Split, ConversionReport) {
    let converted: Vec<_> = examples.par_iter().map(babi_to_extractive).collect();
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

/// Parse the bAbI task format. Line ids restart at 1 for each story;
/// question lines are `question \t answer \t supporting line ids`.
/// Ids are `<prefix>-<story>-<line id>`.
pub fn parse_babi(text: &str, source: &Path, prefix: &str) -> Result<Vec<BabiExample>> {
    let mut out = Vec::new();
    let mut story: Vec<String> = Vec::new();
    // line id -> index into `story`
    let mut line_to_idx: Vec<Option<usize>> = Vec::new();
    let mut story_no = 0usize;
    let mut last_id = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let (num, rest) = line
            .split_once(' ')
            .ok_or_else(|| Error::parse(source, lineno, "expected `<id> <text>`"))?;
        let id: usize = num
            .parse()
            .map_err(|_| Error::parse(source, lineno, format!("bad line id `{num}`")))?;
        if id <= last_id || id == 1 {
            if id != 1 {
                return Err(Error::parse(source, lineno, format!("line id {id} does not start a story")));
            }
            if last_id != 0 {
                story_no += 1;
            }
            story.clear();
            line_to_idx.clear();
        }
        last_id = id;
        if line_to_idx.len() <= id {
            line_to_idx.resize(id + 1, None);
        }
        if rest.contains('\t') {
            let mut fields = rest.split('\t');
            let question = fields.next().unwrap_or("").trim().to_string();
            let answer = fields.next().unwrap_or("").trim().to_string();
            let mut supporting_facts = Vec::new();
            for tok in fields.next().unwrap_or("").split_whitespace() {
                let sid: usize = tok
                    .parse()
                    .map_err(|_| Error::parse(source, lineno, format!("bad supporting id `{tok}`")))?;
                let idx = line_to_idx.get(sid).copied().flatten().ok_or_else(|| {
                    Error::parse(source, lineno, format!("supporting id {sid} is not a story statement"))
                })?;
                supporting_facts.push(idx);
            }
            out.push(BabiExample {
                id: format!("{prefix}-{story_no}-{id}"),
                story: story.clone(),
                question,
                answer,
                supporting_facts,
            });
        } else {
            line_to_idx[id] = Some(story.len());
            story.push(rest.trim().to_string());
        }
    }
    Ok(out)
}

pub fn read_babi(path: &Path, prefix: &str) -> Result<Vec<BabiExample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_babi(&text, path, prefix)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TASK1: &str = "1 Mary moved to the bathroom.\n2 John went to the hallway.\n3 Where is Mary? \tbathroom\t1\n4 Daniel went back to the hallway.\n5 Sandra moved to the garden.\n6 Where is Daniel? \thallway\t4\n1 Sandra went to the office.\n2 Where is Sandra? \toffice\t1\n";

    #[test]
    fn parses_stories_and_questions() {
        let exs = parse_babi(TASK1, Path::new("qa1.txt"), "qa1").unwrap();
        assert_eq!(exs.len(), 3);
        assert_eq!(exs[0].id, "qa1-0-3");
        assert_eq!(exs[0].story.len(), 2);
        assert_eq!(exs[1].story.len(), 4);
        assert_eq!(exs[1].supporting_facts, vec![2]);
        assert_eq!(exs[2].id, "qa1-1-2");
        assert_eq!(exs[2].story, vec!["Sandra went to the office."]);
    }

    #[test]
    fn office_verbatim() {
        let exs = parse_babi(TASK1, Path::new("qa1.txt"), "qa1").unwrap();
        let p = babi_to_extractive(&exs[2]).unwrap();
        assert_eq!(p.qas[0].answers[0].text, "office");
        assert!(p.qas[0].answers[0].matches(&p.context));
    }

    #[test]
    fn offsets_are_passage_global() {
        let exs = parse_babi(TASK1, Path::new("qa1.txt"), "qa1").unwrap();
        let p = babi_to_extractive(&exs[1]).unwrap();
        let span = &p.qas[0].answers[0];
        assert_eq!(span.text, "hallway");
        assert_eq!(span.char_start, p.context.find("back to the hallway").unwrap() + 12);
    }

    #[test]
    fn plural_fallback() {
        let ex = BabiExample {
            id: "qa15-0-9".into(),
            story: vec![
                "Mice are afraid of cats.".into(),
                "Gertrude is a mouse.".into(),
                "Cats are afraid of wolves.".into(),
            ],
            question: "What is gertrude afraid of?".into(),
            answer: "cat".into(),
            supporting_facts: vec![1, 0],
        };
        let p = babi_to_extractive(&ex).unwrap();
        assert_eq!(p.qas[0].answers[0], AnswerSpan::new("cats", 19));
    }

    #[test]
    fn es_plural() {
        let ex = BabiExample {
            id: "x".into(),
            story: vec!["Foxes are here.".into(), "The boxes are here.".into()],
            question: "?".into(),
            answer: "box".into(),
            supporting_facts: vec![1],
        };
        let p = babi_to_extractive(&ex).unwrap();
        assert_eq!(p.qas[0].answers[0], AnswerSpan::new("boxes", 20));
    }

    #[test]
    fn yes_no_dropped() {
        let text = "1 Daniel went to the kitchen.\n2 Is Daniel in the kitchen? \tyes\t1\n";
        let exs = parse_babi(text, Path::new("qa6.txt"), "qa6").unwrap();
        let (split, report) = convert_babi(&exs);
        assert!(split.paragraphs.is_empty());
        assert_eq!(report.skipped[0].id, "qa6-0-2");
        assert!(report.is_balanced());
    }

    #[test]
    fn bad_supporting_reference() {
        let text = "1 A b.\n2 Q? \ta\t2\n";
        assert!(parse_babi(text, Path::new("bad.txt"), "t").is_err());
    }
}
