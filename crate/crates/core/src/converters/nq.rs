use std::sync::OnceLock;

use regex::Regex;

use crate::qa_dataset::{char_to_byte, AnswerSpan, Paragraph, QAExample, Split};

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<(/?)([A-Za-z0-9]+)>").unwrap())
}

/// Char positions of one rewritten tag, before and after.
struct Edit {
    old: (usize, usize),
    new: (usize, usize),
}

fn rewrite(context: &str) -> (String, Vec<Edit>) {
    let mut out = String::with_capacity(context.len() + 16);
    let mut edits = Vec::new();
    let mut last = 0;
    let (mut old_chars, mut new_chars) = (0, 0);
    for caps in tag_re().captures_iter(context) {
        let m = caps.get(0).unwrap();
        let gap = context[last..m.start()].chars().count();
        out.push_str(&context[last..m.start()]);
        old_chars += gap;
        new_chars += gap;
        let tag = &caps[2];
        let repl = if caps[1].is_empty() {
            format!("B{tag}B")
        } else {
            format!("EE{tag}E")
        };
        let old_len = m.as_str().chars().count();
        let new_len = repl.chars().count();
        edits.push(Edit {
            old: (old_chars, old_chars + old_len),
            new: (new_chars, new_chars + new_len),
        });
        out.push_str(&repl);
        old_chars += old_len;
        new_chars += new_len;
        last = m.end();
    }
    out.push_str(&context[last..]);
    (out, edits)
}

/// `<TAG>` becomes `BTAGB` and `</TAG>` becomes `EETAGE`; other text is
/// left alone.
pub fn normalize_nq_html(context: &str) -> String {
    rewrite(context).0
}

/// Map an old char position to the new string. A position strictly inside a
/// tag snaps to the start (for span starts) or end (for span ends) of its
/// replacement.
fn remap(edits: &[Edit], pos: usize, is_end: bool) -> usize {
    let mut shift: isize = 0;
    for e in edits {
        if pos >= e.old.1 {
            shift += (e.new.1 - e.new.0) as isize - (e.old.1 - e.old.0) as isize;
        } else if pos > e.old.0 {
            return if is_end { e.new.1 } else { e.new.0 };
        } else {
            break;
        }
    }
    (pos as isize + shift) as usize
}

/// Normalize every context and re-offset its answer spans. Span texts are
/// re-read from the normalized context.
pub fn normalize_nq_split(split: &Split) -> Split {
    let paragraphs = split
        .paragraphs
        .iter()
        .map(|p| {
            let (context, edits) = rewrite(&p.context);
            let qas = p
                .qas
                .iter()
                .map(|qa| QAExample {
                    id: qa.id.clone(),
                    question: qa.question.clone(),
                    answers: qa
                        .answers
                        .iter()
                        .map(|a| {
                            let end = a.char_start + a.text.chars().count();
                            let s = remap(&edits, a.char_start, false);
                            let e = remap(&edits, end, true);
                            let bs = char_to_byte(&context, s).unwrap_or(context.len());
                            let be = char_to_byte(&context, e).unwrap_or(context.len());
                            AnswerSpan::new(&context[bs..be], s)
                        })
                        .collect(),
                })
                .collect();
            Paragraph {
                title: p.title.clone(),
                context,
                qas,
            }
        })
        .collect();
    Split::new(paragraphs)
}
