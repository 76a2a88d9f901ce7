//! Tooling for measuring *concurrence* between extractive question answering
//! benchmarks and for building benchmark variants.
//!
//! Two benchmarks concur on a set of modeling approaches when they rank those
//! approaches similarly. This crate provides:
//!
//! - [`qa_dataset`]: the in-memory benchmark model with SQuAD-JSON and
//!   MRQA-JSONL readers/writers, validation, and corpus statistics.
//! - [`metrics`]: SQuAD v1.1 answer normalization and exact match.
//! - [`concurrence`]: score tables, Pearson r, Kendall τ-b, and concurrence
//!   matrices.
//! - [`converters`]: cloze, bAbI, QAMR and NaturalQuestions conversions plus
//!   seeded downsampling.
//! - [`fuzzypm`]: the fuzzy pattern-matching synthetic benchmark generator.
//! - [`wikidata`]: the knowledge-graph cloze benchmark generator.

pub mod concurrence;
pub mod converters;
pub mod error;
pub mod fuzzypm;
pub mod metrics;
pub mod qa_dataset;
pub mod rng;
pub mod wikidata;

pub use error::{Error, Result};
