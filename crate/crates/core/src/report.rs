//! End-to-end matching of two tables into the match-output document.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matchers::{assign, match_tables, MatchCandidate, MatchConfig};
use crate::reconcile::{Reconciler, TableAnnotations};
use crate::table::Table;

/// `{"pairs": [...], "mapping": [[source, target], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub pairs: Vec<MatchCandidate>,
    pub mapping: Vec<[usize; 2]>,
}

impl MatchReport {
    pub fn from_candidates(pairs: Vec<MatchCandidate>) -> Self {
        let mapping = assign(&pairs).pairs.iter().map(|p| [p.source, p.target]).collect();
        MatchReport { pairs, mapping }
    }

    /// Canonical serialization shared by every front end.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("match report serializes");
        s.push('\n');
        s
    }
}

/// Mapping document accepted by merge: any JSON object with a `mapping`
/// array of `[source, target]` pairs, e.g. a (possibly hand-edited) match report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingDoc {
    pub mapping: Vec<[usize; 2]>,
}

impl MappingDoc {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.mapping.iter().map(|[s, t]| (*s, *t)).collect()
    }
}

/// Reconciles the text columns of both tables (when a rich-type matcher is
/// enabled), scores all column pairs and proposes a one-to-one mapping.
pub fn run_match(
    source: &Table,
    target: &Table,
    reconciler: Option<&Reconciler>,
    config: &MatchConfig,
) -> Result<MatchReport> {
    config.validate()?;
    let (src_ann, tgt_ann) = if config.needs_types() {
        let reconciler = reconciler.ok_or_else(|| Error::usage("rich-type matchers need a reconciliation provider"))?;
        (reconciler.annotate_table(source)?, reconciler.annotate_table(target)?)
    } else {
        (TableAnnotations::new(), TableAnnotations::new())
    };
    let pairs = match_tables(source, target, &src_ann, &tgt_ann, config)?;
    Ok(MatchReport::from_candidates(pairs))
}
