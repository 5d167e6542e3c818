//! Review sessions: a frozen match report plus an append-only log of user
//! decisions. The current decision per pair is always derived by replaying
//! the log over the report's candidate pairs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use typematch_core::matchers::MatchConfig;
use typematch_core::{Error, MatchReport, Result};

pub const COLLECTION: &str = "sessions";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Pending,
    Accepted,
    Rejected,
    /// A pair the matcher missed, supplied by the user. Counts as accepted.
    Added,
    /// Accepted, but pointing the source column at another target column.
    Edited(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionEntry {
    pub seq: u64,
    pub pair: [usize; 2],
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub pair: [usize; 2],
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDoc {
    pub id: String,
    pub source: String,
    pub target: String,
    pub source_width: usize,
    pub target_width: usize,
    pub config: MatchConfig,
    pub matches: MatchReport,
    pub log: Vec<DecisionEntry>,
    pub merged: Option<String>,
}

/// What clients see: the stored document plus the replayed decision state.
#[derive(Debug, Clone, Serialize)]
pub struct SessionView<'a> {
    #[serde(flatten)]
    pub doc: &'a SessionDoc,
    pub decisions: Vec<PairState>,
}

/// Folds `log` over the candidate pairs, which all start out pending.
pub fn replay(candidates: &[[usize; 2]], log: &[DecisionEntry]) -> BTreeMap<[usize; 2], Decision> {
    let mut state: BTreeMap<_, _> = candidates.iter().map(|&p| (p, Decision::Pending)).collect();
    for entry in log {
        state.insert(entry.pair, entry.decision);
    }
    state
}

impl SessionDoc {
    pub fn new(
        id: String,
        (source, source_width): (String, usize),
        (target, target_width): (String, usize),
        config: MatchConfig,
        matches: MatchReport,
    ) -> Self {
        SessionDoc { id, source, target, source_width, target_width, config, matches, log: Vec::new(), merged: None }
    }

    fn candidate_pairs(&self) -> Vec<[usize; 2]> {
        self.matches.pairs.iter().map(|p| [p.source, p.target]).collect()
    }

    pub fn state(&self) -> BTreeMap<[usize; 2], Decision> {
        replay(&self.candidate_pairs(), &self.log)
    }

    pub fn view(&self) -> SessionView<'_> {
        let decisions = self.state().into_iter().map(|(pair, decision)| PairState { pair, decision }).collect();
        SessionView { doc: self, decisions }
    }

    /// Validates and appends one decision.
    ///
    /// Only pairs already known to the session may be decided, except with
    /// [`Decision::Added`], which introduces a new pair over valid columns.
    pub fn record(&mut self, pair: [usize; 2], decision: Decision) -> Result<()> {
        let [s, t] = pair;
        if s >= self.source_width || t >= self.target_width {
            return Err(Error::Usage(format!(
                "pair [{s}, {t}] is out of range for tables of width {} and {}",
                self.source_width, self.target_width
            )));
        }
        if let Decision::Edited(to) = decision {
            if to >= self.target_width {
                return Err(Error::Usage(format!("edited target {to} does not exist")));
            }
        }
        if decision != Decision::Added && !self.state().contains_key(&pair) {
            return Err(Error::Usage(format!("pair [{s}, {t}] is not part of this session")));
        }
        let seq = self.log.last().map_or(0, |e| e.seq + 1);
        self.log.push(DecisionEntry { seq, pair, decision });
        Ok(())
    }

    /// Column pairs to merge: accepted, added and edited pairs.
    pub fn accepted_pairs(&self) -> Vec<(usize, usize)> {
        self.state()
            .into_iter()
            .filter_map(|([s, t], d)| match d {
                Decision::Accepted | Decision::Added => Some((s, t)),
                Decision::Edited(to) => Some((s, to)),
                Decision::Pending | Decision::Rejected => None,
            })
            .collect()
    }
}
