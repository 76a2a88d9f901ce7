use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub instance_of: Vec<String>,
    #[serde(default)]
    pub subclass_of: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyRecord {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub inverse: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectRecord {
    Entity(String),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TripleRecord {
    pub s: String,
    pub p: String,
    pub o: ObjectRecord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: String,
    pub label: String,
    pub aliases: Vec<String>,
    /// Entity indices from instance-of then subclass-of links.
    pub hypernyms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Property {
    pub id: String,
    pub label: String,
    pub aliases: Vec<String>,
    pub inverse: Option<usize>,
}

fn surfaces_of(label: &str, aliases: &[String]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(aliases.len() + 1);
    for s in std::iter::once(label).chain(aliases.iter().map(String::as_str)) {
        if !s.is_empty() && !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

impl Entity {
    /// Label followed by distinct non-empty aliases.
    pub fn surfaces(&self) -> Vec<String> {
        surfaces_of(&self.label, &self.aliases)
    }
}

impl Property {
    pub fn surfaces(&self) -> Vec<String> {
        surfaces_of(&self.label, &self.aliases)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Object {
    Entity(usize),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: usize,
    pub predicate: usize,
    pub object: Object,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub n_entities: usize,
    pub n_properties: usize,
    pub n_triples: usize,
    pub duplicate_triples: usize,
    pub dropped_triples: usize,
    pub dropped_hypernyms: usize,
    pub dropped_inverses: usize,
}

#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    pub entities: Vec<Entity>,
    pub properties: Vec<Property>,
    pub triples: Vec<Triple>,
    entity_ids: HashMap<String, usize>,
    property_ids: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    pub report: LoadReport,
}

fn index_ids<'a>(ids: impl Iterator<Item = &'a str>, what: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id.to_string(), i).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate {what} id `{id}`")));
        }
    }
    Ok(map)
}

/// Make declared inverse links symmetric. A property whose inverse partners
/// (declared by it or pointing at it) are not unique gets no inverse, and
/// neither does anything paired with it.
fn resolve_inverses(records: &[PropertyRecord], ids: &HashMap<String, usize>, report: &mut LoadReport) -> Vec<Option<usize>> {
    let n = records.len();
    let mut partners: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (p, r) in records.iter().enumerate() {
        let Some(inv) = &r.inverse else { continue };
        match ids.get(inv) {
            Some(&q) => {
                partners[p].insert(q);
                partners[q].insert(p);
            }
            None => {
                log::warn!("property {}: unknown inverse `{inv}` dropped", r.id);
                report.dropped_inverses += 1;
            }
        }
    }
    let mut inverse: Vec<Option<usize>> = partners
        .iter()
        .enumerate()
        .map(|(p, set)| {
            if set.len() > 1 {
                log::warn!("property {}: conflicting inverses, none kept", records[p].id);
                report.dropped_inverses += 1;
                None
            } else {
                set.iter().next().copied()
            }
        })
        .collect();
    loop {
        let mut changed = false;
        for p in 0..n {
            if let Some(q) = inverse[p] {
                if inverse[q] != Some(p) {
                    inverse[p] = None;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    inverse
}

impl KnowledgeGraph {
    /// Build from parsed records. Unknown references are dropped with a
    /// warning; duplicate triples are kept once.
    pub fn from_records(
        entities: Vec<EntityRecord>,
        properties: Vec<PropertyRecord>,
        triples: Vec<TripleRecord>,
    ) -> Result<Self> {
        let entity_ids = index_ids(entities.iter().map(|e| e.id.as_str()), "entity")?;
        let property_ids = index_ids(properties.iter().map(|p| p.id.as_str()), "property")?;
        let mut report = LoadReport::default();

        let ents: Vec<Entity> = entities
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut hypernyms = Vec::new();
                for h in e.instance_of.iter().chain(&e.subclass_of) {
                    match entity_ids.get(h) {
                        Some(&j) if j != i => {
                            if !hypernyms.contains(&j) {
                                hypernyms.push(j);
                            }
                        }
                        Some(_) => {}
                        None => {
                            log::warn!("entity {}: unknown hypernym `{h}` dropped", e.id);
                            report.dropped_hypernyms += 1;
                        }
                    }
                }
                Entity {
                    id: e.id.clone(),
                    label: e.label.clone(),
                    aliases: e.aliases.clone(),
                    hypernyms,
                }
            })
            .collect();

        let inverse = resolve_inverses(&properties, &property_ids, &mut report);
        let props: Vec<Property> = properties
            .into_iter()
            .zip(inverse)
            .map(|(p, inverse)| Property {
                id: p.id,
                label: p.label,
                aliases: p.aliases,
                inverse,
            })
            .collect();

        let mut seen = HashSet::new();
        let mut resolved = Vec::new();
        for t in triples {
            let s = entity_ids.get(&t.s);
            let p = property_ids.get(&t.p);
            let o = match &t.o {
                ObjectRecord::Entity(id) => entity_ids.get(id).map(|&j| Object::Entity(j)),
                ObjectRecord::Literal(v) => Some(Object::Literal(v.clone())),
            };
            let (Some(&s), Some(&p), Some(o)) = (s, p, o) else {
                log::warn!("triple ({}, {}, {:?}) references unknown ids, dropped", t.s, t.p, t.o);
                report.dropped_triples += 1;
                continue;
            };
            let triple = Triple {
                subject: s,
                predicate: p,
                object: o,
            };
            if seen.insert(triple.clone()) {
                resolved.push(triple);
            } else {
                report.duplicate_triples += 1;
            }
        }

        let mut adjacency = vec![Vec::new(); ents.len()];
        for (ti, t) in resolved.iter().enumerate() {
            adjacency[t.subject].push(ti);
            if let Object::Entity(o) = t.object {
                if o != t.subject {
                    adjacency[o].push(ti);
                }
            }
        }
        report.n_entities = ents.len();
        report.n_properties = props.len();
        report.n_triples = resolved.len();
        Ok(KnowledgeGraph {
            entities: ents,
            properties: props,
            triples: resolved,
            entity_ids,
            property_ids,
            adjacency,
            report,
        })
    }

    pub fn parse(entities: &str, properties: &str, triples: &str) -> Result<Self> {
        Self::from_records(
            parse_jsonl(entities, Path::new("<entities>"))?,
            parse_jsonl(properties, Path::new("<properties>"))?,
            parse_jsonl(triples, Path::new("<triples>"))?,
        )
    }

    pub fn entity_index(&self, id: &str) -> Option<usize> {
        self.entity_ids.get(id).copied()
    }

    pub fn property_index(&self, id: &str) -> Option<usize> {
        self.property_ids.get(id).copied()
    }

    /// Indices of triples in which entity `e` is subject or object, ascending.
    pub fn incident(&self, e: usize) -> &[usize] {
        &self.adjacency[e]
    }

    /// Undirected one-hop entity neighbors of `e`, ascending, excluding `e`.
    pub fn neighbors(&self, e: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self.adjacency[e]
            .iter()
            .filter_map(|&ti| {
                let t = &self.triples[ti];
                match t.object {
                    Object::Entity(o) if t.subject == e => Some(o),
                    Object::Entity(_) => Some(t.subject),
                    Object::Literal(_) => None,
                }
            })
            .filter(|&x| x != e)
            .collect();
        set.into_iter().collect()
    }

    /// Entities that are objects of triples with subject `e`.
    pub fn out_neighbors(&self, e: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self.adjacency[e]
            .iter()
            .filter_map(|&ti| match self.triples[ti].object {
                Object::Entity(o) if self.triples[ti].subject == e && o != e => Some(o),
                _ => None,
            })
            .collect();
        set.into_iter().collect()
    }

    /// A copy where every entity and property is known only by its label.
    pub fn without_aliases(&self) -> Self {
        let mut g = self.clone();
        for e in &mut g.entities {
            e.aliases.clear();
        }
        for p in &mut g.properties {
            p.aliases.clear();
        }
        g
    }
}

fn parse_jsonl<T: for<'de> Deserialize<'de>>(text: &str, source: &Path) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(source, i + 1, e.to_string())))
        .collect()
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(&text, path)
}

pub fn load_graph(entities: &Path, properties: &Path, triples: &Path) -> Result<KnowledgeGraph> {
    let g = KnowledgeGraph::from_records(read_jsonl(entities)?, read_jsonl(properties)?, read_jsonl(triples)?)?;
    log::info!(
        "loaded graph: {} entities, {} properties, {} triples ({} dropped, {} duplicates)",
        g.report.n_entities,
        g.report.n_properties,
        g.report.n_triples,
        g.report.dropped_triples,
        g.report.duplicate_triples
    );
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ENTS: &str = r#"{"id": "Q1", "label": "Mae C. Jemison", "aliases": ["Mae Jemison"], "instance_of": ["Q5"]}
{"id": "Q2", "label": "Decatur", "aliases": ["The River City"], "instance_of": ["Q404"]}
{"id": "Q5", "label": "human"}"#;
    const PROPS: &str = r#"{"id": "P19", "label": "place of birth", "aliases": ["birthplace"]}
{"id": "P108", "label": "employer", "inverse": "P_emp"}
{"id": "P_emp", "label": "employee"}"#;

    fn g(triples: &str) -> KnowledgeGraph {
        KnowledgeGraph::parse(ENTS, PROPS, triples).unwrap()
    }

    #[test]
    fn two_entities_one_triple() {
        let g = g(r#"{"s": "Q1", "p": "P19", "o": {"entity": "Q2"}}"#);
        assert_eq!(g.incident(0).len(), 1);
        assert_eq!(g.incident(1).len(), 1);
        assert!(g.incident(2).is_empty());
        assert_eq!(g.neighbors(1), vec![0]);
        assert_eq!(g.out_neighbors(1), Vec::<usize>::new());
    }

    #[test]
    fn unknown_and_duplicate_triples() {
        let g = g(r#"{"s": "Q1", "p": "P19", "o": {"entity": "Q2"}}
{"s": "Q1", "p": "P19", "o": {"entity": "Q2"}}
{"s": "Q1", "p": "P999", "o": {"entity": "Q2"}}
{"s": "Q1", "p": "P19", "o": {"entity": "Q777"}}
{"s": "Q1", "p": "P19", "o": {"literal": "1956"}}"#);
        assert_eq!(g.triples.len(), 2);
        assert_eq!(g.report.duplicate_triples, 1);
        assert_eq!(g.report.dropped_triples, 2);
    }

    #[test]
    fn hypernyms_resolved_or_dropped() {
        let g = g("");
        assert_eq!(g.entities[0].hypernyms, vec![2]);
        assert!(g.entities[1].hypernyms.is_empty());
        assert_eq!(g.report.dropped_hypernyms, 1);
    }

    #[test]
    fn inverse_completed_symmetrically() {
        let g = g("");
        let emp = g.property_index("P108").unwrap();
        let ee = g.property_index("P_emp").unwrap();
        assert_eq!(g.properties[emp].inverse, Some(ee));
        assert_eq!(g.properties[ee].inverse, Some(emp));
    }

    #[test]
    fn conflicting_inverses_dropped() {
        let props = r#"{"id": "A", "label": "a", "inverse": "B"}
{"id": "B", "label": "b", "inverse": "C"}
{"id": "C", "label": "c"}
{"id": "S", "label": "sibling", "inverse": "S"}"#;
        let g = KnowledgeGraph::parse(ENTS, props, "").unwrap();
        assert!(g.properties.iter().take(3).all(|p| p.inverse.is_none()));
        assert_eq!(g.properties[3].inverse, Some(3));
    }

    #[test]
    fn surfaces_label_first_distinct() {
        let g = g("");
        assert_eq!(g.entities[0].surfaces(), vec!["Mae C. Jemison", "Mae Jemison"]);
        assert!(g.without_aliases().entities[0].aliases.is_empty());
    }

    #[test]
    fn bad_line_reports_number() {
        let err = KnowledgeGraph::parse(ENTS, PROPS, "{\"s\": \"Q1\"}\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
