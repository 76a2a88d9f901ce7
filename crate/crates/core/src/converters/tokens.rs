//! Whitespace-token search used by the cloze and bAbI converters.
//!
//! A passage token matches a needle token when the raw token is equal to it,
//! or when the token stripped of leading/trailing ASCII punctuation is
//! (`"cats."` matches `cats`; `"category"` never matches `cat`).

use std::ops::Range;

struct Token<'a> {
    raw: &'a str,
    start: usize,
}

impl Token<'_> {
    /// Byte range (absolute) of the part of this token equal to `needle`.
    fn match_range(&self, needle: &str) -> Option<Range<usize>> {
        if self.raw == needle {
            return Some(self.start..self.start + self.raw.len());
        }
        let core = self.raw.trim_matches(|c: char| c.is_ascii_punctuation());
        if !core.is_empty() && core == needle {
            let lead = self.raw.len() - self.raw.trim_start_matches(|c: char| c.is_ascii_punctuation()).len();
            let s = self.start + lead;
            return Some(s..s + core.len());
        }
        None
    }
}

fn tokenize(s: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(st)) => {
                out.push(Token { raw: &s[st..i], start: st });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push(Token { raw: &s[st..], start: st });
    }
    out
}

/// First occurrence of `answer` (one or more whitespace tokens) as a whole
/// token sequence in `haystack`; returns a byte range into `haystack`.
pub(crate) fn find_token_span(haystack: &str, answer: &str) -> Option<Range<usize>> {
    let needle: Vec<&str> = answer.split_whitespace().collect();
    if needle.is_empty() {
        return None;
    }
    let toks = tokenize(haystack);
    'outer: for i in 0..toks.len() {
        if i + needle.len() > toks.len() {
            break;
        }
        let mut range: Option<Range<usize>> = None;
        for (k, want) in needle.iter().enumerate() {
            let tok = &toks[i + k];
            let r = if needle.len() == 1 {
                tok.match_range(want)
            } else if k == 0 {
                // inner edges of a multi-token answer must be exact
                tok.match_range(want).filter(|r| r.end == tok.start + tok.raw.len())
            } else if k + 1 == needle.len() {
                tok.match_range(want).filter(|r| r.start == tok.start)
            } else {
                (tok.raw == *want).then(|| tok.start..tok.start + tok.raw.len())
            };
            match r {
                Some(r) => {
                    range = Some(match range {
                        None => r,
                        Some(prev) => prev.start..r.end,
                    })
                }
                None => continue 'outer,
            }
        }
        return range;
    }
    None
}
