//! Union merge of two tables under a column mapping, and grouped
//! aggregation of the result into chart series.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{parse_number, ColumnKind, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    SourceOnly,
    TargetOnly,
    Merged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedTable {
    pub table: Table,
    /// One mark per column of `table`.
    pub provenance: Vec<Provenance>,
}

fn validate_pairs(source: &Table, target: &Table, pairs: &[(usize, usize)]) -> Result<()> {
    let mut seen_s = HashSet::new();
    let mut seen_t = HashSet::new();
    for &(s, t) in pairs {
        if s >= source.width() || t >= target.width() {
            return Err(Error::usage(format!(
                "mapping pair ({s}, {t}) is out of range for tables of width {} and {}",
                source.width(),
                target.width()
            )));
        }
        if !seen_s.insert(s) || !seen_t.insert(t) {
            return Err(Error::usage(format!("mapping pair ({s}, {t}) reuses a column")));
        }
    }
    Ok(())
}

/// Appends each mapped target column beneath its source column. Merged
/// columns keep the source header. With `include_unmatched`, unmapped
/// columns of either side are kept and padded with empty cells; source
/// columns come first in source order, then leftover target columns.
pub fn merge_tables(
    source: &Table,
    target: &Table,
    pairs: &[(usize, usize)],
    include_unmatched: bool,
) -> Result<MergedTable> {
    validate_pairs(source, target, pairs)?;
    let by_source: BTreeMap<usize, usize> = pairs.iter().copied().collect();
    let mapped_targets: HashSet<usize> = pairs.iter().map(|&(_, t)| t).collect();

    let blank = |n: usize| vec![String::new(); n];
    let mut columns = Vec::new();
    let mut provenance = Vec::new();

    for col in source.columns() {
        let mut cells = col.cells().to_vec();
        match by_source.get(&col.position()) {
            Some(&t) => {
                cells.extend_from_slice(target.columns()[t].cells());
                provenance.push(Provenance::Merged);
            }
            None if include_unmatched => {
                cells.extend(blank(target.row_count()));
                provenance.push(Provenance::SourceOnly);
            }
            None => continue,
        }
        columns.push((col.header().map(str::to_string), cells));
    }

    if include_unmatched {
        for col in target.columns().iter().filter(|c| !mapped_targets.contains(&c.position())) {
            let mut cells = blank(source.row_count());
            cells.extend_from_slice(col.cells());
            columns.push((col.header().map(str::to_string), cells));
            provenance.push(Provenance::TargetOnly);
        }
    }

    if columns.is_empty() {
        return Err(Error::usage("merge would produce a table without columns"));
    }
    let table = Table::from_columns(format!("{}+{}", source.name(), target.name()), columns)?;
    Ok(MergedTable { table, provenance })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateFn {
    Sum,
    Avg,
    Count,
    Min,
    Max,
}

impl std::str::FromStr for AggregateFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sum" => Ok(AggregateFn::Sum),
            "avg" => Ok(AggregateFn::Avg),
            "count" => Ok(AggregateFn::Count),
            "min" => Ok(AggregateFn::Min),
            "max" => Ok(AggregateFn::Max),
            other => Err(format!("unknown aggregate function {other:?} (expected sum, avg, count, min or max)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationSpec {
    pub x_column: usize,
    pub y_column: usize,
    #[serde(rename = "fn")]
    pub func: AggregateFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub key: String,
    pub value: f64,
}

/// `{"series": [...]}` consumed by the chart view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub series: Vec<SeriesPoint>,
}

/// Groups rows by the x cell text and folds the parseable y values of each
/// group. Unparseable y cells are skipped; `count` counts rows. Groups with
/// no parseable value are omitted for `avg`, `min` and `max`.
pub fn aggregate(table: &Table, spec: &AggregationSpec) -> Result<Vec<SeriesPoint>> {
    let x = table
        .column(spec.x_column)
        .ok_or_else(|| Error::usage(format!("x column {} does not exist", spec.x_column)))?;
    let y = table
        .column(spec.y_column)
        .ok_or_else(|| Error::usage(format!("y column {} does not exist", spec.y_column)))?;
    if spec.func != AggregateFn::Count && y.kind() != ColumnKind::Numeric {
        return Err(Error::usage(format!(
            "{:?} needs a numeric y column; column {} is {}",
            spec.func,
            y.display_name(),
            y.kind()
        )));
    }

    let mut groups: BTreeMap<&str, (usize, Vec<f64>)> = BTreeMap::new();
    for (key, value) in x.cells().iter().zip(y.cells()) {
        let entry = groups.entry(key.trim()).or_default();
        entry.0 += 1;
        if let Some(v) = parse_number(value) {
            entry.1.push(v);
        }
    }

    let points = groups
        .into_iter()
        .filter_map(|(key, (rows, values))| {
            let value = match spec.func {
                AggregateFn::Count => rows as f64,
                AggregateFn::Sum => values.iter().sum(),
                _ if values.is_empty() => return None,
                AggregateFn::Avg => values.iter().sum::<f64>() / values.len() as f64,
                AggregateFn::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
                AggregateFn::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            };
            Some(SeriesPoint { key: key.to_string(), value })
        })
        .collect();
    Ok(points)
}
