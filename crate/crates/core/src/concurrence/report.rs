use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::correlation::{kendall_tau_b, pearson, Correlation};
use super::table::{aggregate_runs, RunPolicy, ScoreTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subset {
    #[default]
    All,
    Pretrained,
    NonPretrained,
}

impl Subset {
    pub fn admits(self, pretrained: bool) -> bool {
        match self {
            Subset::All => true,
            Subset::Pretrained => pretrained,
            Subset::NonPretrained => !pretrained,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::Pretrained => "pretrained",
            Subset::NonPretrained => "non-pretrained",
        }
    }
}

impl std::str::FromStr for Subset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Subset::All),
            "pretrained" => Ok(Subset::Pretrained),
            "non-pretrained" | "nonpretrained" => Ok(Subset::NonPretrained),
            other => Err(Error::InvalidArgument(format!("unknown subset `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub approach_id: String,
    pub pretrained: bool,
    pub em_a: f64,
    pub em_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcurrenceReport {
    pub benchmark_a: String,
    pub benchmark_b: String,
    pub pearson_r: Correlation,
    pub kendall_tau: Correlation,
    pub n: usize,
    pub subset: Subset,
    pub policy: RunPolicy,
    pub points: Vec<ScatterPoint>,
}

impl ConcurrenceReport {
    fn swapped(&self) -> ConcurrenceReport {
        ConcurrenceReport {
            benchmark_a: self.benchmark_b.clone(),
            benchmark_b: self.benchmark_a.clone(),
            points: self
                .points
                .iter()
                .map(|p| ScatterPoint {
                    em_a: p.em_b,
                    em_b: p.em_a,
                    ..p.clone()
                })
                .collect(),
            ..self.clone()
        }
    }
}

/// Concurrence of two benchmark columns: filter rows by `subset`, collapse
/// runs with `policy`, drop approaches missing either score, correlate.
pub fn concur(
    table: &ScoreTable,
    benchmark_a: &str,
    benchmark_b: &str,
    subset: Subset,
    policy: RunPolicy,
) -> Result<ConcurrenceReport> {
    let ia = table.column_index(benchmark_a)?;
    let ib = table.column_index(benchmark_b)?;
    let filtered = table.filter_rows(|r| subset.admits(r.pretrained));
    let agg = aggregate_runs(&filtered, policy);
    concur_prepared(&agg, ia, ib, subset, policy)
}

fn concur_prepared(
    agg: &ScoreTable,
    ia: usize,
    ib: usize,
    subset: Subset,
    policy: RunPolicy,
) -> Result<ConcurrenceReport> {
    let points: Vec<ScatterPoint> = agg
        .rows
        .iter()
        .zip(&agg.values)
        .filter_map(|(row, vals)| {
            Some(ScatterPoint {
                approach_id: row.approach_id.clone(),
                pretrained: row.pretrained,
                em_a: vals[ia]?,
                em_b: vals[ib]?,
            })
        })
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientData(points.len()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.em_a).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.em_b).collect();
    Ok(ConcurrenceReport {
        benchmark_a: agg.columns[ia].clone(),
        benchmark_b: agg.columns[ib].clone(),
        pearson_r: pearson(&xs, &ys)?,
        kendall_tau: kendall_tau_b(&xs, &ys)?,
        n: points.len(),
        subset,
        policy,
        points,
    })
}

/// Reports for every ordered pair of benchmarks; `cells[i][j]` compares
/// `benchmarks[i]` (as a) with `benchmarks[j]` (as b).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcurrenceMatrix {
    pub benchmarks: Vec<String>,
    pub cells: Vec<Vec<ConcurrenceReport>>,
}

impl ConcurrenceMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<&ConcurrenceReport> {
        let i = self.benchmarks.iter().position(|x| x == a)?;
        let j = self.benchmarks.iter().position(|x| x == b)?;
        Some(&self.cells[i][j])
    }

    fn grid_csv(&self, pick: impl Fn(&ConcurrenceReport) -> Correlation) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.benchmarks.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (name, row) in self.benchmarks.iter().zip(&self.cells) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|c| format!("{:.6}", pick(c))));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Heatmap of Kendall τ values.
    pub fn tau_csv(&self) -> String {
        self.grid_csv(|c| c.kendall_tau)
    }

    /// Heatmap of Pearson r values.
    pub fn r_csv(&self) -> String {
        self.grid_csv(|c| c.pearson_r)
    }
}

/// Symmetric concurrence matrix over `benchmarks` (all table columns when `None`).
pub fn concurrence_matrix(
    table: &ScoreTable,
    benchmarks: Option<&[String]>,
    subset: Subset,
    policy: RunPolicy,
) -> Result<ConcurrenceMatrix> {
    let names: Vec<String> = match benchmarks {
        Some(b) => b.to_vec(),
        None => table.columns.clone(),
    };
    if names.len() < 2 {
        return Err(Error::InvalidArgument(
            "a concurrence matrix needs at least 2 benchmarks".into(),
        ));
    }
    let idx: Vec<usize> = names
        .iter()
        .map(|n| table.column_index(n))
        .collect::<Result<_>>()?;
    let filtered = table.filter_rows(|r| subset.admits(r.pretrained));
    let agg = aggregate_runs(&filtered, policy);

    let k = names.len();
    let upper: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let computed: Vec<ConcurrenceReport> = upper
        .par_iter()
        .map(|&(i, j)| concur_prepared(&agg, idx[i], idx[j], subset, policy))
        .collect::<Result<_>>()?;

    let mut grid: Vec<Vec<Option<ConcurrenceReport>>> = vec![vec![None; k]; k];
    for (&(i, j), rep) in upper.iter().zip(computed) {
        if i != j {
            grid[j][i] = Some(rep.swapped());
        }
        grid[i][j] = Some(rep);
    }
    let cells = grid
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.expect("every cell filled")).collect())
        .collect();
    Ok(ConcurrenceMatrix {
        benchmarks: names,
        cells,
    })
}

/// Scatter CSV (`approach_id,pretrained,em_a,em_b`) sorted by approach id.
pub fn scatter_csv(report: &ConcurrenceReport) -> String {
    let mut points: Vec<&ScatterPoint> = report.points.iter().collect();
    points.sort_by(|a, b| a.approach_id.cmp(&b.approach_id));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["approach_id", "pretrained", "em_a", "em_b"]).expect("in-memory write");
    for p in points {
        w.write_record([
            p.approach_id.clone(),
            p.pretrained.to_string(),
            p.em_a.to_string(),
            p.em_b.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn export_scatter(report: &ConcurrenceReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scatter_csv(report)).map_err(|e| Error::io(path, e))
}
