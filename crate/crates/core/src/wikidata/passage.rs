use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{KnowledgeGraph, Object};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NeighborMode {
    #[default]
    Undirected,
    Outgoing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSample {
    pub seed: usize,
    pub n_candidates: usize,
    /// Sampled triple indices in passage order.
    pub triples: Vec<usize>,
}

impl SeedSample {
    /// Fewer candidates than requested triples.
    pub fn is_small(&self, n_triples: usize) -> bool {
        self.n_candidates < n_triples
    }
}

/// Candidate triples of `seed`: those incident to it or to any of its
/// one-hop neighbors, ascending by triple index.
pub fn candidate_triples(graph: &KnowledgeGraph, seed: usize, mode: NeighborMode) -> Vec<usize> {
    let hop = match mode {
        NeighborMode::Undirected => graph.neighbors(seed),
        NeighborMode::Outgoing => graph.out_neighbors(seed),
    };
    let set: BTreeSet<usize> = std::iter::once(seed)
        .chain(hop)
        .flat_map(|e| graph.incident(e).iter().copied())
        .collect();
    set.into_iter().collect()
}

/// Draw a seed uniformly from the first `pool` entries of `ranked`, then
/// sample up to `n_triples` of its candidate triples without replacement.
pub fn select_seed_and_triples<R: Rng + ?Sized>(
    graph: &KnowledgeGraph,
    ranked: &[usize],
    pool: usize,
    n_triples: usize,
    mode: NeighborMode,
    rng: &mut R,
) -> SeedSample {
    let pool = pool.clamp(1, ranked.len());
    let seed = ranked[rng.gen_range(0..pool)];
    let cands = candidate_triples(graph, seed, mode);
    let m = n_triples.min(cands.len());
    let triples = sample(rng, cands.len(), m).into_iter().map(|i| cands[i]).collect();
    SeedSample {
        seed,
        n_candidates: cands.len(),
        triples,
    }
}

/// The three positions of a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Element {
    Subject,
    Predicate,
    Object,
}

impl Element {
    pub const ALL: [Element; 3] = [Element::Subject, Element::Predicate, Element::Object];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedTriple {
    pub triple: usize,
    pub surface: [String; 3],
    /// Char offsets of each surface within the passage.
    pub offsets: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    pub context: String,
    pub realized: Vec<RealizedTriple>,
    /// Triples that had an element with no surface form.
    pub skipped: Vec<usize>,
}

pub(crate) fn pick<R: Rng + ?Sized>(choices: &[String], rng: &mut R) -> Option<String> {
    (!choices.is_empty()).then(|| choices[rng.gen_range(0..choices.len())].clone())
}

/// Surface choices for every element of triple `ti`.
pub(crate) fn triple_surfaces(graph: &KnowledgeGraph, ti: usize) -> [Vec<String>; 3] {
    let t = &graph.triples[ti];
    let obj = match &t.object {
        Object::Entity(o) => graph.entities[*o].surfaces(),
        Object::Literal(v) if !v.is_empty() => vec![v.clone()],
        Object::Literal(_) => Vec::new(),
    };
    [
        graph.entities[t.subject].surfaces(),
        graph.properties[t.predicate].surfaces(),
        obj,
    ]
}

/// Realize each triple as `subject predicate object`, every element by a
/// uniform choice over its label and aliases, each followed by
/// ` <delimiter>`, all joined by spaces. Offsets are recorded as the text
/// is built.
pub fn build_passage<R: Rng + ?Sized>(graph: &KnowledgeGraph, triples: &[usize], delimiter: &str, rng: &mut R) -> Passage {
    let mut context = String::new();
    let mut chars = 0;
    let mut realized = Vec::new();
    let mut skipped = Vec::new();
    for &ti in triples {
        let choices = triple_surfaces(graph, ti);
        if choices.iter().any(Vec::is_empty) {
            log::warn!("triple {ti} has an element without label or alias, skipped");
            skipped.push(ti);
            continue;
        }
        let surface: [String; 3] = std::array::from_fn(|k| pick(&choices[k], rng).unwrap());
        let mut offsets = [0; 3];
        for k in 0..3 {
            if !context.is_empty() {
                context.push(' ');
                chars += 1;
            }
            offsets[k] = chars;
            context.push_str(&surface[k]);
            chars += surface[k].chars().count();
        }
        if !delimiter.is_empty() {
            context.push(' ');
            context.push_str(delimiter);
            chars += 1 + delimiter.chars().count();
        }
        realized.push(RealizedTriple {
            triple: ti,
            surface,
            offsets,
        });
    }
    Passage {
        context,
        realized,
        skipped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa_dataset::AnswerSpan;
    use crate::rng::stream;

    const ENTS: &str = r#"{"id": "Mae", "label": "Mae C. Jemison", "aliases": ["Mae Jemison", "Mae Carol Jemison"]}
{"id": "Decatur", "label": "Decatur", "aliases": ["The River City"]}
{"id": "astronaut", "label": "astronaut"}
{"id": "STS47", "label": "STS-47"}
{"id": "Lonely", "label": "lonely"}
{"id": "Nameless", "label": ""}"#;
    const PROPS: &str = r#"{"id": "P19", "label": "place of birth", "aliases": ["birthplace", "born in"]}
{"id": "P106", "label": "profession"}
{"id": "P1350", "label": "orbits completed"}
{"id": "P5096", "label": "crew member"}"#;
    const TRIPLES: &str = r#"{"s": "Mae", "p": "P19", "o": {"entity": "Decatur"}}
{"s": "Mae", "p": "P106", "o": {"entity": "astronaut"}}
{"s": "STS47", "p": "P1350", "o": {"literal": "126.0"}}
{"s": "STS47", "p": "P5096", "o": {"entity": "Mae"}}
{"s": "Nameless", "p": "P106", "o": {"entity": "astronaut"}}"#;

    fn graph() -> KnowledgeGraph {
        KnowledgeGraph::parse(ENTS, PROPS, TRIPLES).unwrap()
    }

    #[test]
    fn neighbor_expansion_reaches_sts47() {
        let g = graph();
        let mae = g.entity_index("Mae").unwrap();
        assert_eq!(candidate_triples(&g, mae, NeighborMode::Undirected), vec![0, 1, 2, 3, 4]);
        // out-neighbors of Mae are Decatur and astronaut only
        assert_eq!(candidate_triples(&g, mae, NeighborMode::Outgoing), vec![0, 1, 3, 4]);
    }

    #[test]
    fn exact_candidate_count_returns_all() {
        let g = graph();
        let decatur = g.entity_index("Decatur").unwrap();
        let s = select_seed_and_triples(&g, &[decatur], 1, 4, NeighborMode::Undirected, &mut stream(0, &[]));
        assert_eq!(s.seed, decatur);
        let mut got = s.triples.clone();
        got.sort_unstable();
        assert_eq!(got, vec![0, 1, 3]);
        assert!(s.is_small(4));
    }

    #[test]
    fn realization_uses_labels_and_aliases() {
        let g = graph();
        let mut seen = BTreeSet::new();
        for seed in 0..200 {
            let p = build_passage(&g, &[0], ".", &mut stream(seed, &[]));
            let r = &p.realized[0];
            assert!(g.entities[0].surfaces().contains(&r.surface[0]));
            assert!(g.properties[0].surfaces().contains(&r.surface[1]));
            for k in 0..3 {
                assert!(AnswerSpan::new(r.surface[k].clone(), r.offsets[k]).matches(&p.context));
            }
            seen.insert(p.context);
        }
        assert!(seen.contains("Mae Jemison birthplace The River City ."));
        assert_eq!(seen.len(), 3 * 3 * 2);
    }

    #[test]
    fn mae_jemison_passage_shape() {
        let g = graph();
        let p = build_passage(&g, &[1, 2], ".", &mut stream(0, &[]));
        assert!(p.context.ends_with("profession astronaut . STS-47 orbits completed 126.0 ."), "{}", p.context);
        let r = &p.realized[1];
        assert_eq!(r.surface[2], "126.0");
    }

    #[test]
    fn nameless_entity_skipped() {
        let g = graph();
        let p = build_passage(&g, &[4, 1], ".", &mut stream(0, &[]));
        assert_eq!(p.skipped, vec![4]);
        assert_eq!(p.realized.len(), 1);
    }

    #[test]
    fn offsets_exact_with_repeated_surfaces() {
        let g = graph();
        let p = build_passage(&g, &[1, 1, 1], ".", &mut stream(3, &[]));
        let starts: Vec<usize> = p.realized.iter().map(|r| r.offsets[2]).collect();
        assert_eq!(starts.len(), 3);
        assert!(starts[0] < starts[1] && starts[1] < starts[2]);
    }

    #[test]
    fn no_aliases_means_single_choice() {
        let g = graph().without_aliases();
        let a = build_passage(&g, &[0], ".", &mut stream(1, &[]));
        let b = build_passage(&g, &[0], ".", &mut stream(2, &[]));
        assert_eq!(a.context, "Mae C. Jemison place of birth Decatur .");
        assert_eq!(a, b);
    }
}
