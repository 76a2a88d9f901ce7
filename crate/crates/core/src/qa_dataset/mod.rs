//! Canonical extractive QA benchmark model.
//!
//! Answer offsets count Unicode scalar values from the start of the context,
//! the same unit the SQuAD v1.1 and MRQA files use. Use [`char_to_byte`] to
//! slice a Rust string.

mod mrqa;
mod squad;
mod stats;

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;

use serde::Serialize;

pub use mrqa::{load_mrqa_jsonl, parse_mrqa_jsonl};
pub use squad::{load_squad_json, parse_squad_json, save_squad_json, to_squad_json};
pub use stats::{stats, BenchmarkStats};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnswerSpan {
    pub text: String,
    /// Offset in characters (Unicode scalar values) into the owning context.
    pub char_start: usize,
}

impl AnswerSpan {
    pub fn new(text: impl Into<String>, char_start: usize) -> Self {
        AnswerSpan {
            text: text.into(),
            char_start,
        }
    }

    /// Byte range of the span inside `context`, if the start offset is in bounds.
    pub fn byte_range(&self, context: &str) -> Option<Range<usize>> {
        let start = char_to_byte(context, self.char_start)?;
        Some(start..start + self.text.len())
    }

    /// Whether `context` holds exactly `text` at `char_start`.
    pub fn matches(&self, context: &str) -> bool {
        match self.byte_range(context) {
            Some(r) => context.get(r) == Some(self.text.as_str()),
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QAExample {
    pub id: String,
    pub question: String,
    pub answers: Vec<AnswerSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph {
    /// Article title carried through SQuAD files; empty when the source has none.
    pub title: String,
    pub context: String,
    pub qas: Vec<QAExample>,
}

impl Paragraph {
    pub fn new(context: impl Into<String>) -> Self {
        Paragraph {
            title: String::new(),
            context: context.into(),
            qas: Vec::new(),
        }
    }
}

/// One side (train or dev) of a benchmark.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Split {
    pub paragraphs: Vec<Paragraph>,
}

impl Split {
    pub fn new(paragraphs: Vec<Paragraph>) -> Self {
        Split { paragraphs }
    }

    pub fn num_qas(&self) -> usize {
        self.paragraphs.iter().map(|p| p.qas.len()).sum()
    }

    /// Every example paired with its paragraph, in file order.
    pub fn examples(&self) -> impl Iterator<Item = (&Paragraph, &QAExample)> {
        self.paragraphs
            .iter()
            .flat_map(|p| p.qas.iter().map(move |qa| (p, qa)))
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        validate_into(self, "", &mut seen, &mut out);
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractiveBenchmark {
    pub name: String,
    pub train: Split,
    pub dev: Split,
}

impl ExtractiveBenchmark {
    pub fn new(name: impl Into<String>, train: Split, dev: Split) -> Self {
        ExtractiveBenchmark {
            name: name.into(),
            train,
            dev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyContext,
    NoAnswers,
    EmptyAnswerText,
    DuplicateId,
    OffsetOutOfBounds { char_start: usize, context_chars: usize },
    SpanMismatch { expected: String, found: String },
}

/// A broken invariant, tied to the example (or paragraph) that broke it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub id: String,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::EmptyContext => write!(f, "{}: empty context", self.id),
            ViolationKind::NoAnswers => write!(f, "{}: no answers", self.id),
            ViolationKind::EmptyAnswerText => write!(f, "{}: empty answer text", self.id),
            ViolationKind::DuplicateId => write!(f, "{}: duplicate id", self.id),
            ViolationKind::OffsetOutOfBounds {
                char_start,
                context_chars,
            } => write!(
                f,
                "{}: answer_start {} beyond context of {} chars",
                self.id, char_start, context_chars
            ),
            ViolationKind::SpanMismatch { expected, found } => write!(
                f,
                "{}: answer text {:?} does not match context text {:?}",
                self.id, expected, found
            ),
        }
    }
}

/// All invariant violations across both splits; ids must be unique benchmark-wide.
pub fn validate(benchmark: &ExtractiveBenchmark) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    validate_into(&benchmark.train, "train", &mut seen, &mut out);
    validate_into(&benchmark.dev, "dev", &mut seen, &mut out);
    out
}

fn validate_into<'a>(
    split: &'a Split,
    label: &str,
    seen: &mut HashSet<&'a str>,
    out: &mut Vec<Violation>,
) {
    for (pi, p) in split.paragraphs.iter().enumerate() {
        if p.context.is_empty() {
            let id = if label.is_empty() {
                format!("paragraph #{pi}")
            } else {
                format!("{label} paragraph #{pi}")
            };
            out.push(Violation {
                id,
                kind: ViolationKind::EmptyContext,
            });
        }
        for qa in &p.qas {
            if !seen.insert(qa.id.as_str()) {
                out.push(violation(&qa.id, ViolationKind::DuplicateId));
            }
            if qa.answers.is_empty() {
                out.push(violation(&qa.id, ViolationKind::NoAnswers));
            }
            for ans in &qa.answers {
                if let Some(kind) = check_span(&p.context, ans) {
                    out.push(violation(&qa.id, kind));
                }
            }
        }
    }
}

fn violation(id: &str, kind: ViolationKind) -> Violation {
    Violation {
        id: id.to_string(),
        kind,
    }
}

pub(crate) fn check_span(context: &str, ans: &AnswerSpan) -> Option<ViolationKind> {
    if ans.text.is_empty() {
        return Some(ViolationKind::EmptyAnswerText);
    }
    let Some(start) = char_to_byte(context, ans.char_start) else {
        return Some(ViolationKind::OffsetOutOfBounds {
            char_start: ans.char_start,
            context_chars: context.chars().count(),
        });
    };
    let found: String = context[start..].chars().take(ans.text.chars().count()).collect();
    if found != ans.text {
        return Some(ViolationKind::SpanMismatch {
            expected: ans.text.clone(),
            found,
        });
    }
    None
}

/// Byte offset of the `char_idx`-th character; `Some(len)` for one past the end.
pub fn char_to_byte(s: &str, char_idx: usize) -> Option<usize> {
    if s.is_ascii() {
        return (char_idx <= s.len()).then_some(char_idx);
    }
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in s.char_indices() {
        if count == char_idx {
            return Some(b);
        }
        count += 1;
    }
    (count == char_idx).then_some(s.len())
}

/// Number of characters before byte offset `byte_idx` (which must be a char boundary).
pub fn byte_to_char(s: &str, byte_idx: usize) -> usize {
    if s.is_ascii() {
        return byte_idx;
    }
    s[..byte_idx].chars().count()
}
