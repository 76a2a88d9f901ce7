use std::path::Path;

use qaconcur::wikidata::{generate_wikidata_qa, load_graph, KnowledgeGraph, WikidataConfig};

fn graph() -> KnowledgeGraph {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/wikidata");
    load_graph(&dir.join("entities.jsonl"), &dir.join("properties.jsonl"), &dir.join("triples.jsonl")).unwrap()
}

#[test]
fn fixture_load_report() {
    let g = graph();
    assert_eq!(g.entities.len(), 225);
    assert_eq!(g.properties.len(), 22);
    assert_eq!(g.report.duplicate_triples, 1);
    assert_eq!(g.report.dropped_triples, 2);
    assert_eq!(g.triples.len(), 768 - 3);
}

#[test]
fn inverse_links_are_symmetric() {
    let g = graph();
    for (i, p) in g.properties.iter().enumerate() {
        if let Some(q) = p.inverse {
            assert_eq!(g.properties[q].inverse, Some(i), "{}", p.id);
        }
    }
    let received = g.property_index("P166").unwrap();
    let winner = g.properties[received].inverse.unwrap();
    assert_eq!(g.properties[winner].label, "winner");
    let sibling = g.property_index("P3373").unwrap();
    assert_eq!(g.properties[sibling].inverse, Some(sibling));
}

#[test]
fn mae_jemison_hypernyms() {
    let g = graph();
    let mae = g.entity_index("Q254904").unwrap();
    let human = g.entity_index("Q5").unwrap();
    assert!(g.entities[mae].hypernyms.contains(&human));
    assert!(g.entities[human].surfaces().contains(&"Human".to_string()));
}

#[test]
fn generation_is_seed_deterministic() {
    let g = graph();
    let cfg = WikidataConfig {
        n_train: 200,
        n_dev: 50,
        seed: 17,
        ..Default::default()
    };
    let a = generate_wikidata_qa(&g, &cfg).unwrap();
    assert_eq!(a, generate_wikidata_qa(&g, &cfg).unwrap());
    let b = generate_wikidata_qa(&g, &WikidataConfig { seed: 18, ..cfg }).unwrap();
    assert_ne!(a.train, b.train);
    assert_eq!(a.dev.num_qas(), 50);
    assert!(a.dev.paragraphs.iter().all(|p| p.qas.len() == 5));
}
