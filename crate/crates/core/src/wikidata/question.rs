use rand::Rng;
use serde::{Deserialize, Serialize};

use super::graph::{KnowledgeGraph, Object};
use super::passage::{pick, Element, Passage};
use crate::converters::DEFAULT_MASK;
use crate::qa_dataset::AnswerSpan;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuestionConfig {
    pub inverse_prob: f64,
    pub hypernym_prob: f64,
    pub mask_token: String,
}

impl Default for QuestionConfig {
    fn default() -> Self {
        QuestionConfig {
            inverse_prob: 0.5,
            hypernym_prob: 0.5,
            mask_token: DEFAULT_MASK.to_string(),
        }
    }
}

/// One element of a cloze query before realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryElement {
    Mask,
    Entity(usize),
    Property(usize),
    Literal(String),
}

/// Record of how a question was derived from its source triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionTrace {
    pub triple: usize,
    /// Masked element of the source triple.
    pub masked: Element,
    pub inverse_applied: bool,
    /// `(original entity, hypernym)` when the hypernym transform fired.
    pub hypernym: Option<(usize, usize)>,
    pub query: [QueryElement; 3],
    pub surface: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedQuestion {
    pub question: String,
    pub answer: AnswerSpan,
    pub trace: QuestionTrace,
}

fn realizable(graph: &KnowledgeGraph, e: usize) -> bool {
    !graph.entities[e].surfaces().is_empty()
}

/// Cloze question for element `element` of the passage's `which`-th
/// realized triple. The answer is that element's passage realization at its
/// recorded offset.
///
/// When the subject or object is masked, the predicate may be replaced by
/// its inverse (swapping subject and object) and the unmasked entity by one
/// of its hypernyms. When the predicate is masked, the hypernym transform
/// applies to one entity element chosen uniformly among those that have
/// hypernyms. Unmasked elements are re-realized with fresh surface choices.
pub fn gen_question<R: Rng + ?Sized>(
    passage: &Passage,
    which: usize,
    element: Element,
    graph: &KnowledgeGraph,
    config: &QuestionConfig,
    rng: &mut R,
) -> GeneratedQuestion {
    let rt = &passage.realized[which];
    let t = &graph.triples[rt.triple];
    let answer = AnswerSpan::new(rt.surface[element.index()].clone(), rt.offsets[element.index()]);

    let object = match &t.object {
        Object::Entity(o) => QueryElement::Entity(*o),
        Object::Literal(v) => QueryElement::Literal(v.clone()),
    };
    let mut query = [QueryElement::Entity(t.subject), QueryElement::Property(t.predicate), object];
    query[element.index()] = QueryElement::Mask;

    let mut inverse_applied = false;
    if element != Element::Predicate {
        let inv = graph.properties[t.predicate]
            .inverse
            .filter(|&q| !graph.properties[q].surfaces().is_empty());
        let object_is_entity = matches!(t.object, Object::Entity(_));
        if let (Some(q), true) = (inv, object_is_entity) {
            if rng.gen_bool(config.inverse_prob) {
                query.swap(0, 2);
                query[1] = QueryElement::Property(q);
                inverse_applied = true;
            }
        }
    }

    let mut hypernym = None;
    let slots: Vec<usize> = [0, 2]
        .into_iter()
        .filter(|&k| match query[k] {
            QueryElement::Entity(e) => graph.entities[e].hypernyms.iter().any(|&h| realizable(graph, h)),
            _ => false,
        })
        .collect();
    if !slots.is_empty() && rng.gen_bool(config.hypernym_prob) {
        let k = slots[rng.gen_range(0..slots.len())];
        if let QueryElement::Entity(e) = query[k] {
            let hs: Vec<usize> = graph.entities[e]
                .hypernyms
                .iter()
                .copied()
                .filter(|&h| realizable(graph, h))
                .collect();
            let h = hs[rng.gen_range(0..hs.len())];
            query[k] = QueryElement::Entity(h);
            hypernym = Some((e, h));
        }
    }

    let surface: [String; 3] = std::array::from_fn(|k| match &query[k] {
        QueryElement::Mask => config.mask_token.clone(),
        QueryElement::Entity(e) => pick(&graph.entities[*e].surfaces(), rng).unwrap_or_default(),
        QueryElement::Property(p) => pick(&graph.properties[*p].surfaces(), rng).unwrap_or_default(),
        QueryElement::Literal(v) => v.clone(),
    });
    GeneratedQuestion {
        question: surface.join(" "),
        answer,
        trace: QuestionTrace {
            triple: rt.triple,
            masked: element,
            inverse_applied,
            hypernym,
            query,
            surface,
        },
    }
}
