use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ApproachRecord {
    pub approach_id: String,
    pub pretrained: bool,
    /// Hyperparameter setting label.
    pub run_id: String,
}

/// How several hyperparameter runs of one approach collapse into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunPolicy {
    #[default]
    Best,
    Mean,
}

impl RunPolicy {
    pub fn name(self) -> &'static str {
        match self {
            RunPolicy::Best => "best",
            RunPolicy::Mean => "mean",
        }
    }
}

impl std::str::FromStr for RunPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "best" => Ok(RunPolicy::Best),
            "mean" => Ok(RunPolicy::Mean),
            other => Err(Error::InvalidArgument(format!("unknown run policy `{other}`"))),
        }
    }
}

/// EM scores: one row per (approach, run), one column per benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub rows: Vec<ApproachRecord>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

const FIXED_COLUMNS: [&str; 3] = ["approach_id", "pretrained", "run_id"];

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "y" => Some(true),
        "false" | "0" | "no" | "n" => Some(false),
        _ => None,
    }
}

impl ScoreTable {
    pub fn new(
        rows: Vec<ApproachRecord>,
        columns: Vec<String>,
        values: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let table = ScoreTable {
            rows,
            columns,
            values,
        };
        table.check()?;
        Ok(table)
    }

    fn check(&self) -> Result<()> {
        if self.values.len() != self.rows.len() {
            return Err(Error::InvalidArgument(format!(
                "{} value rows for {} approach rows",
                self.values.len(),
                self.rows.len()
            )));
        }
        let mut cols = HashSet::new();
        for c in &self.columns {
            if !cols.insert(c.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate benchmark column `{c}`")));
            }
        }
        let mut keys = HashSet::new();
        for (row, vals) in self.rows.iter().zip(&self.values) {
            if !keys.insert((row.approach_id.as_str(), row.run_id.as_str())) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate row ({}, {})",
                    row.approach_id, row.run_id
                )));
            }
            if vals.len() != self.columns.len() {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} cells for {} columns",
                    row.approach_id,
                    vals.len(),
                    self.columns.len()
                )));
            }
            for v in vals.iter().flatten() {
                if !(0.0..=100.0).contains(v) {
                    return Err(Error::InvalidArgument(format!(
                        "row {}: EM {v} outside [0, 100]",
                        row.approach_id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Read `approach_id,pretrained,run_id,<benchmark>...`; empty cells are missing.
    pub fn from_csv_reader(reader: impl Read, source: &str) -> Result<Self> {
        let csv_err = |e| Error::Csv {
            context: source.to_string(),
            source: e,
        };
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let head: Vec<&str> = headers.iter().take(3).collect();
        if head != FIXED_COLUMNS {
            return Err(Error::parse(
                source,
                1,
                format!("header must start with {}", FIXED_COLUMNS.join(",")),
            ));
        }
        let columns: Vec<String> = headers.iter().skip(3).map(str::to_string).collect();
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(csv_err)?;
            let pretrained = parse_bool(&rec[1]).ok_or_else(|| {
                Error::parse(source, line, format!("bad pretrained flag `{}`", &rec[1]))
            })?;
            rows.push(ApproachRecord {
                approach_id: rec[0].to_string(),
                pretrained,
                run_id: rec[2].to_string(),
            });
            let mut cells = Vec::with_capacity(columns.len());
            for cell in rec.iter().skip(3) {
                if cell.is_empty() {
                    cells.push(None);
                } else {
                    let v: f64 = cell.parse().map_err(|_| {
                        Error::parse(source, line, format!("bad EM value `{cell}`"))
                    })?;
                    cells.push(Some(v));
                }
            }
            values.push(cells);
        }
        ScoreTable::new(rows, columns, values)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownBenchmark(name.to_string()))
    }

    /// Keep only rows for which `keep` holds.
    pub fn filter_rows(&self, keep: impl Fn(&ApproachRecord) -> bool) -> ScoreTable {
        let (rows, values) = self
            .rows
            .iter()
            .zip(&self.values)
            .filter(|(r, _)| keep(r))
            .map(|(r, v)| (r.clone(), v.clone()))
            .unzip();
        ScoreTable {
            rows,
            columns: self.columns.clone(),
            values,
        }
    }
}

/// Collapse runs to one row per approach (in first-appearance order). A cell
/// is missing only when every run of that approach is missing it.
pub fn aggregate_runs(table: &ScoreTable, policy: RunPolicy) -> ScoreTable {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in table.rows.iter().enumerate() {
        groups
            .entry(r.approach_id.as_str())
            .or_insert_with(|| {
                order.push(r.approach_id.as_str());
                Vec::new()
            })
            .push(i);
    }

    let mut rows = Vec::with_capacity(order.len());
    let mut values = Vec::with_capacity(order.len());
    for id in order {
        let members = &groups[id];
        let first = &table.rows[members[0]];
        if members.len() == 1 {
            rows.push(first.clone());
            values.push(table.values[members[0]].clone());
            continue;
        }
        if members.iter().any(|&m| table.rows[m].pretrained != first.pretrained) {
            log::warn!("approach `{id}` has inconsistent pretrained flags; using the first");
        }
        let cells = (0..table.columns.len())
            .map(|c| {
                let present: Vec<f64> = members.iter().filter_map(|&m| table.values[m][c]).collect();
                if present.is_empty() {
                    return None;
                }
                Some(match policy {
                    RunPolicy::Best => present.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    RunPolicy::Mean => present.iter().sum::<f64>() / present.len() as f64,
                })
            })
            .collect();
        rows.push(ApproachRecord {
            approach_id: id.to_string(),
            pretrained: first.pretrained,
            run_id: policy.name().to_string(),
        });
        values.push(cells);
    }
    ScoreTable {
        rows,
        columns: table.columns.clone(),
        values,
    }
}
