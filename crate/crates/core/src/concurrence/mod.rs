//! Concurrence between benchmarks: the correlation, over a set of modeling
//! approaches, between the scores those approaches obtain on each benchmark.

mod correlation;
mod report;
mod table;

pub use correlation::{kendall_tau_b, pair_counts, pearson, Correlation, PairCounts};
pub use report::{
    concur, concurrence_matrix, export_scatter, scatter_csv, ConcurrenceMatrix, ConcurrenceReport,
    ScatterPoint, Subset,
};
pub use table::{aggregate_runs, ApproachRecord, RunPolicy, ScoreTable};
