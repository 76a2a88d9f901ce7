use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use crate::qa_dataset::ExtractiveBenchmark;

/// Anonymized-entity markers found in a benchmark, with occurrence counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MarkerReport {
    pub markers: BTreeMap<String, usize>,
}

impl MarkerReport {
    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn contains(&self, marker: &str) -> bool {
        self.markers.contains_key(marker)
    }
}

fn marker_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@entity\d+|@placeholder").unwrap())
}

/// Lists every `@entityN` / `@placeholder` token in contexts and questions
/// of both splits. Does not modify the benchmark.
pub fn cnn_vocab_guard(bench: &ExtractiveBenchmark) -> MarkerReport {
    let re = marker_re();
    let mut report = MarkerReport::default();
    let mut scan = |s: &str| {
        for m in re.find_iter(s) {
            *report.markers.entry(m.as_str().to_string()).or_default() += 1;
        }
    };
    for split in [&bench.train, &bench.dev] {
        for p in &split.paragraphs {
            scan(&p.context);
            for qa in &p.qas {
                scan(&qa.question);
            }
        }
    }
    report
}
