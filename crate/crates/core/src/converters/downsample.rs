use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::qa_dataset::{ExtractiveBenchmark, Paragraph, Split};
use crate::rng::{label_hash, stream};

/// Keep the first `n` qas of a seeded permutation of all qas in `split`.
/// Retained qas stay in their original paragraphs and file order; paragraphs
/// left without questions are dropped. For a fixed seed the kept set for a
/// smaller `n` is a subset of the kept set for a larger one.
pub fn downsample_split(split: &Split, n: usize, seed: u64) -> Result<Split> {
    let total = split.num_qas();
    if n > total {
        return Err(Error::InvalidArgument(format!(
            "cannot downsample to {n} examples: split has only {total}"
        )));
    }
    let mut order: Vec<usize> = (0..total).collect();
    let mut rng = stream(seed, &[label_hash("downsample")]);
    order.shuffle(&mut rng);
    let mut keep = vec![false; total];
    for &i in &order[..n] {
        keep[i] = true;
    }
    let mut flat = 0;
    let mut paragraphs = Vec::new();
    for p in &split.paragraphs {
        let qas: Vec<_> = p
            .qas
            .iter()
            .filter(|_| {
                let k = keep[flat];
                flat += 1;
                k
            })
            .cloned()
            .collect();
        if !qas.is_empty() {
            paragraphs.push(Paragraph {
                title: p.title.clone(),
                context: p.context.clone(),
                qas,
            });
        }
    }
    Ok(Split::new(paragraphs))
}

/// Downsample the train split; dev is copied unchanged.
pub fn downsample(bench: &ExtractiveBenchmark, n: usize, seed: u64) -> Result<ExtractiveBenchmark> {
    Ok(ExtractiveBenchmark {
        name: format!("{}-{n}", bench.name),
        train: downsample_split(&bench.train, n, seed)?,
        dev: bench.dev.clone(),
    })
}
