//! WikidataSyntheticQA: passages realized from knowledge-graph triples
//! around a PageRank-ranked seed entity, with cloze questions over single
//! triples.
//!
//! ```text
//! passage : Mae Jemison profession astronaut . STS-47 orbits completed 126.0 . ...
//! question: Human XXXXX The River City
//! answer  : birthplace
//! ```

mod graph;
mod pagerank;
mod passage;
mod question;

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use graph::{
    load_graph, Entity, EntityRecord, KnowledgeGraph, LoadReport, Object, ObjectRecord, Property, PropertyRecord,
    Triple, TripleRecord,
};
pub use pagerank::{pagerank, pagerank_edges, rank_entities, PageRankConfig};
pub use passage::{
    build_passage, candidate_triples, select_seed_and_triples, Element, NeighborMode, Passage, RealizedTriple,
    SeedSample,
};
pub use question::{gen_question, GeneratedQuestion, QueryElement, QuestionConfig, QuestionTrace};

use crate::error::{Error, Result};
use crate::qa_dataset::{ExtractiveBenchmark, Paragraph, QAExample, Split};
use crate::rng::{derive_seed, label_hash, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WikidataConfig {
    pub n_train: usize,
    pub n_dev: usize,
    /// Inclusive range of questions per training passage.
    pub train_questions: (usize, usize),
    pub dev_questions: (usize, usize),
    pub n_triples: usize,
    pub pool: usize,
    pub neighbors: NeighborMode,
    pub delimiter: String,
    pub question: QuestionConfig,
    pub pagerank: PageRankConfig,
    /// Passages tried per requested question before giving up.
    pub max_passages_per_question: usize,
    pub seed: u64,
}

impl Default for WikidataConfig {
    fn default() -> Self {
        WikidataConfig {
            n_train: 10000,
            n_dev: 9835,
            train_questions: (1, 5),
            dev_questions: (5, 5),
            n_triples: 50,
            pool: 10000,
            neighbors: NeighborMode::Undirected,
            delimiter: ".".into(),
            question: QuestionConfig::default(),
            pagerank: PageRankConfig::default(),
            max_passages_per_question: 20,
            seed: 0,
        }
    }
}

impl WikidataConfig {
    fn check(&self) -> Result<()> {
        for (name, (lo, hi)) in [("train", self.train_questions), ("dev", self.dev_questions)] {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "{name} questions per passage range {lo}..={hi} is invalid"
                )));
            }
        }
        for (name, p) in [
            ("inverse_prob", self.question.inverse_prob),
            ("hypernym_prob", self.question.hypernym_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")));
            }
        }
        if self.n_triples == 0 {
            return Err(Error::InvalidArgument("n_triples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything generated for one passage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassageRecord {
    pub index: usize,
    pub seed: SeedSample,
    pub passage: Passage,
    pub questions: Vec<GeneratedQuestion>,
}

/// A generated split together with per-passage provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WikidataSplit {
    pub split: Split,
    pub passages: Vec<PassageRecord>,
}

fn gen_passage(
    graph: &KnowledgeGraph,
    ranked: &[usize],
    config: &WikidataConfig,
    range: (usize, usize),
    seed: u64,
    index: usize,
) -> PassageRecord {
    let mut rng = stream(seed, &[index as u64]);
    let sample = select_seed_and_triples(graph, ranked, config.pool, config.n_triples, config.neighbors, &mut rng);
    let passage = build_passage(graph, &sample.triples, &config.delimiter, &mut rng);
    let want = rng.gen_range(range.0..=range.1);
    let mut slots: Vec<(usize, Element)> = (0..passage.realized.len())
        .flat_map(|i| Element::ALL.into_iter().map(move |e| (i, e)))
        .collect();
    slots.shuffle(&mut rng);
    let mask = &config.question.mask_token;
    let mut seen = HashSet::new();
    let mut questions = Vec::new();
    for (which, element) in slots {
        if questions.len() == want {
            break;
        }
        let q = gen_question(&passage, which, element, graph, &config.question, &mut rng);
        if q.question.matches(mask.as_str()).count() != 1 {
            continue;
        }
        if seen.insert((q.question.clone(), q.answer.text.clone())) {
            questions.push(q);
        }
    }
    PassageRecord {
        index,
        seed: sample,
        passage,
        questions,
    }
}

/// Generate passages until `quota` questions exist; the last passage is
/// truncated to hit the quota exactly. Passages yielding fewer than
/// `range.0` distinct questions are discarded. Passage `i` depends only on
/// `(seed, split, i)`.
pub fn generate_split(
    graph: &KnowledgeGraph,
    ranked: &[usize],
    config: &WikidataConfig,
    split: &str,
    quota: usize,
    range: (usize, usize),
) -> Result<WikidataSplit> {
    config.check()?;
    if ranked.is_empty() {
        return Err(Error::InvalidArgument("graph has no entities".into()));
    }
    let seed = derive_seed(config.seed, &[label_hash("wikidata"), label_hash(split)]);
    let limit = quota.saturating_mul(config.max_passages_per_question).max(1);
    let batch = (quota / range.0.max(1)).clamp(1, 4096);
    let mut records = Vec::new();
    let mut total = 0;
    let mut next = 0;
    while total < quota {
        if next >= limit {
            return Err(Error::InvalidArgument(format!(
                "graph too small: {total} of {quota} {split} questions after {next} passages"
            )));
        }
        let end = (next + batch).min(limit);
        let mut chunk: Vec<PassageRecord> = (next..end)
            .into_par_iter()
            .map(|i| gen_passage(graph, ranked, config, range, seed, i))
            .collect();
        next = end;
        for mut r in chunk.drain(..) {
            if total == quota {
                break;
            }
            if r.questions.len() < range.0 {
                continue;
            }
            r.questions.truncate(quota - total);
            total += r.questions.len();
            records.push(r);
        }
    }
    let paragraphs = records
        .iter()
        .map(|r| Paragraph {
            title: "wikidata".into(),
            context: r.passage.context.clone(),
            qas: r
                .questions
                .iter()
                .enumerate()
                .map(|(j, q)| QAExample {
                    id: format!("wikidata-{split}-{:06}-{j}", r.index),
                    question: q.question.clone(),
                    answers: vec![q.answer.clone()],
                })
                .collect(),
        })
        .collect();
    Ok(WikidataSplit {
        split: Split::new(paragraphs),
        passages: records,
    })
}

/// Train and dev splits with provenance.
pub fn generate_wikidata_traced(
    graph: &KnowledgeGraph,
    config: &WikidataConfig,
) -> Result<(WikidataSplit, WikidataSplit)> {
    let scores = pagerank(graph, &config.pagerank)?;
    let ranked = rank_entities(graph, &scores);
    let train = generate_split(graph, &ranked, config, "train", config.n_train, config.train_questions)?;
    let dev = generate_split(graph, &ranked, config, "dev", config.n_dev, config.dev_questions)?;
    Ok((train, dev))
}

pub fn generate_wikidata_qa(graph: &KnowledgeGraph, config: &WikidataConfig) -> Result<ExtractiveBenchmark> {
    let (train, dev) = generate_wikidata_traced(graph, config)?;
    Ok(ExtractiveBenchmark::new("wikidata", train.split, dev.split))
}
