use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::Rng;

use super::embedding::Vocabulary;
use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

/// Split text into blank-line-separated paragraphs of whitespace tokens.
pub fn read_paragraphs(text: &str) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut cur: Vec<String> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else {
            cur.extend(line.split_whitespace().map(str::to_string));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Maximum-likelihood n-gram model. Each training paragraph is padded with
/// `order - 1` begin markers and closed with an end marker.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    table: HashMap<Vec<String>, BTreeMap<String, u64>>,
}

impl NGramModel {
    pub fn train(paragraphs: &[Vec<String>], order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
        }
        let mut table: HashMap<Vec<String>, BTreeMap<String, u64>> = HashMap::new();
        for p in paragraphs.iter().filter(|p| !p.is_empty()) {
            let mut seq: Vec<&str> = vec![BOS; order - 1];
            seq.extend(p.iter().map(String::as_str));
            seq.push(EOS);
            for w in seq.windows(order) {
                let ctx = w[..order - 1].iter().map(|s| s.to_string()).collect();
                *table.entry(ctx).or_default().entry(w[order - 1].to_string()).or_default() += 1;
            }
        }
        if table.is_empty() {
            return Err(Error::InvalidArgument("n-gram training corpus is empty".into()));
        }
        Ok(NGramModel { order, table })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Conditional distribution of the next token given `context`
    /// (`order - 1` tokens).
    pub fn continuations(&self, context: &[String]) -> Option<&BTreeMap<String, u64>> {
        self.table.get(context)
    }

    fn primed(&self) -> Vec<String> {
        vec![BOS.to_string(); self.order - 1]
    }

    /// Sample `len` tokens. An end marker restarts from the begin context and
    /// is not emitted.
    pub fn sample<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Result<Vec<String>> {
        let mut out = Vec::with_capacity(len);
        let mut ctx = self.primed();
        let mut since_emit = 0;
        while out.len() < len {
            let dist = self
                .continuations(&ctx)
                .ok_or_else(|| Error::InvalidArgument(format!("n-gram context {ctx:?} unseen")))?;
            let total: u64 = dist.values().sum();
            let mut r = rng.gen_range(0..total);
            let mut next = None;
            for (tok, &c) in dist {
                if r < c {
                    next = Some(tok);
                    break;
                }
                r -= c;
            }
            let next = next.unwrap();
            if next == EOS {
                ctx = self.primed();
                since_emit += 1;
                if since_emit > 1000 {
                    return Err(Error::InvalidArgument("n-gram model only produces empty sequences".into()));
                }
                continue;
            }
            since_emit = 0;
            out.push(next.clone());
            if self.order > 1 {
                ctx.remove(0);
                ctx.push(next.clone());
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub enum PassageSource {
    /// i.i.d. uniform draws from the vocabulary.
    Uniform(Vocabulary),
    /// Contiguous windows from paragraphs at least `passage_len` long.
    Corpus(Vec<Vec<String>>),
    NGram(NGramModel),
}

#[derive(Debug, Clone)]
pub struct PassageSourceSpec {
    pub source: PassageSource,
    pub passage_len: usize,
}

impl PassageSourceSpec {
    pub fn uniform(vocab: Vocabulary, passage_len: usize) -> Self {
        PassageSourceSpec {
            source: PassageSource::Uniform(vocab),
            passage_len,
        }
    }

    pub fn corpus(paragraphs: Vec<Vec<String>>, passage_len: usize) -> Result<Self> {
        let long: Vec<_> = paragraphs.into_iter().filter(|p| p.len() >= passage_len).collect();
        if long.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "corpus has no paragraph of at least {passage_len} tokens"
            )));
        }
        Ok(PassageSourceSpec {
            source: PassageSource::Corpus(long),
            passage_len,
        })
    }

    pub fn load_corpus(path: &Path, passage_len: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::corpus(read_paragraphs(&text), passage_len)
    }

    pub fn load_ngram(path: &Path, order: usize, passage_len: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(PassageSourceSpec {
            source: PassageSource::NGram(NGramModel::train(&read_paragraphs(&text), order)?),
            passage_len,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<String>> {
        if self.passage_len == 0 {
            return Err(Error::InvalidArgument("passage length must be at least 1".into()));
        }
        let n = self.passage_len;
        match &self.source {
            PassageSource::Uniform(v) => Ok((0..n).map(|_| v.token(rng.gen_range(0..v.len())).to_string()).collect()),
            PassageSource::Corpus(paras) => {
                let p = &paras[rng.gen_range(0..paras.len())];
                if p.len() < n {
                    return Err(Error::InvalidArgument(format!("corpus paragraph shorter than {n} tokens")));
                }
                let start = rng.gen_range(0..=p.len() - n);
                Ok(p[start..start + n].to_vec())
            }
            PassageSource::NGram(m) => m.sample(n, rng),
        }
    }
}
