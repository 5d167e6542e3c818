use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::correlation::{pearson, spearman_with, TieStrategy};
use super::name::name_similarity;
use super::profile::{build_profile_arrays, ColumnTypeProfile};
use super::vector::{build_type_vector, cosine_similarity, TypeVector};
use crate::error::{Error, Result};
use crate::reconcile::{ColumnAnnotation, TableAnnotations};
use crate::table::Table;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matcher {
    Name,
    Cosine,
    Pearson,
    Spearman,
}

impl Matcher {
    pub const ALL: [Matcher; 4] = [Matcher::Name, Matcher::Cosine, Matcher::Pearson, Matcher::Spearman];

    pub fn as_str(self) -> &'static str {
        match self {
            Matcher::Name => "name",
            Matcher::Cosine => "cosine",
            Matcher::Pearson => "pearson",
            Matcher::Spearman => "spearman",
        }
    }

    /// Matchers that read reconciled rich types rather than headers.
    pub fn uses_types(self) -> bool {
        self != Matcher::Name
    }
}

impl std::str::FromStr for Matcher {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Matcher::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| format!("unknown matcher {s:?} (expected name, cosine, pearson or spearman)"))
    }
}

impl std::fmt::Display for Matcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A matcher's verdict for one column pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Value(f64),
    /// The matcher does not apply (unnamed header, numeric column, no types).
    Skipped,
}

impl Score {
    pub fn value(self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(v),
            Score::Skipped => None,
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Score::Value(v) => s.serialize_f64(*v),
            Score::Skipped => s.serialize_str("skipped"),
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Value(f64),
            Marker(String),
        }
        match Wire::deserialize(d)? {
            Wire::Value(v) => Ok(Score::Value(v)),
            Wire::Marker(m) if m == "skipped" => Ok(Score::Skipped),
            Wire::Marker(m) => Err(serde::de::Error::custom(format!("unexpected score marker {m:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchCandidate {
    pub source: usize,
    pub target: usize,
    pub scores: BTreeMap<Matcher, Score>,
    /// Mean of the non-skipped scores.
    pub combined: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub matchers: Vec<Matcher>,
    pub threshold: f64,
    pub ties: TieStrategy,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig { matchers: Matcher::ALL.to_vec(), threshold: DEFAULT_THRESHOLD, ties: TieStrategy::default() }
    }
}

impl MatchConfig {
    pub fn with_matchers(matchers: impl IntoIterator<Item = Matcher>) -> Self {
        MatchConfig { matchers: matchers.into_iter().collect(), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.matchers.is_empty() {
            return Err(Error::usage("at least one matcher must be enabled"));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::usage(format!("threshold {} is outside [0, 1]", self.threshold)));
        }
        Ok(())
    }

    pub fn needs_types(&self) -> bool {
        self.matchers.iter().any(|m| m.uses_types())
    }
}

/// Precomputed rich-type evidence for one text column.
#[derive(Debug, Clone)]
pub struct ColumnEvidence {
    pub vector: TypeVector,
    pub profile: ColumnTypeProfile,
}

impl ColumnEvidence {
    pub fn from_annotation(annotation: &ColumnAnnotation) -> Self {
        ColumnEvidence {
            vector: build_type_vector(annotation),
            profile: ColumnTypeProfile::from_annotation(annotation),
        }
    }
}

/// Scores a column pair with one rich-type matcher. `None` evidence stands
/// for a numeric or date column, which is always skipped, as is a column
/// whose profile is empty. Correlations map to similarities by `max(0, r)`,
/// and are skipped when the aligned arrays have fewer than two entries.
pub fn type_matcher_score(
    matcher: Matcher,
    source: Option<&ColumnEvidence>,
    target: Option<&ColumnEvidence>,
    ties: TieStrategy,
) -> Result<Score> {
    let (Some(src), Some(tgt)) = (source, target) else { return Ok(Score::Skipped) };
    if src.profile.is_empty() || tgt.profile.is_empty() {
        return Ok(Score::Skipped);
    }

    let correlate = |by_rank: bool| -> Result<Score> {
        let (x, y) = build_profile_arrays(&src.profile, &tgt.profile)?;
        if x.len() < 2 {
            return Ok(Score::Skipped);
        }
        let r = if by_rank { spearman_with(&x, &y, ties)? } else { pearson(&x, &y)? };
        Ok(Score::Value(r.clamp(0.0, 1.0)))
    };

    match matcher {
        Matcher::Cosine => Ok(Score::Value(cosine_similarity(&src.vector, &tgt.vector))),
        Matcher::Pearson => correlate(false),
        Matcher::Spearman => correlate(true),
        Matcher::Name => Err(Error::usage("the name matcher does not use rich types")),
    }
}

fn evidence_for(
    table: &Table,
    annotations: &TableAnnotations,
    needs_types: bool,
) -> Result<Vec<Option<ColumnEvidence>>> {
    table
        .columns()
        .iter()
        .map(|col| {
            if !needs_types || !col.kind().is_reconcilable() {
                return Ok(None);
            }
            let ann = annotations.get(&col.position()).ok_or_else(|| {
                Error::usage(format!("missing annotation for text column {} of {}", col.position(), table.name()))
            })?;
            Ok(Some(ColumnEvidence::from_annotation(ann)))
        })
        .collect()
}

fn ranking(a: &MatchCandidate, b: &MatchCandidate) -> std::cmp::Ordering {
    b.combined.total_cmp(&a.combined).then_with(|| a.source.cmp(&b.source)).then_with(|| a.target.cmp(&b.target))
}

/// Scores every source/target column pair with every enabled matcher.
///
/// Pairs where every matcher skipped, or whose combined score falls below
/// the threshold, are dropped. The result is ordered by combined score
/// descending, then by source and target position.
pub fn match_tables(
    source: &Table,
    target: &Table,
    source_annotations: &TableAnnotations,
    target_annotations: &TableAnnotations,
    config: &MatchConfig,
) -> Result<Vec<MatchCandidate>> {
    config.validate()?;
    let mut matchers = config.matchers.clone();
    matchers.sort();
    matchers.dedup();

    let needs_types = config.needs_types();
    let src_evidence = evidence_for(source, source_annotations, needs_types)?;
    let tgt_evidence = evidence_for(target, target_annotations, needs_types)?;

    let mut candidates = Vec::new();
    for (s, src_col) in source.columns().iter().enumerate() {
        for (t, tgt_col) in target.columns().iter().enumerate() {
            let mut scores = BTreeMap::new();
            for &m in &matchers {
                let score = match m {
                    Matcher::Name => {
                        name_similarity(src_col.header(), tgt_col.header()).map_or(Score::Skipped, Score::Value)
                    }
                    _ => type_matcher_score(m, src_evidence[s].as_ref(), tgt_evidence[t].as_ref(), config.ties)?,
                };
                scores.insert(m, score);
            }
            let applied: Vec<f64> = scores.values().filter_map(|s| s.value()).collect();
            if applied.is_empty() {
                continue;
            }
            let combined = applied.iter().sum::<f64>() / applied.len() as f64;
            if combined < config.threshold {
                continue;
            }
            candidates.push(MatchCandidate { source: s, target: t, scores, combined });
        }
    }
    candidates.sort_by(ranking);
    Ok(candidates)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingPair {
    pub source: usize,
    pub target: usize,
    pub score: f64,
}

/// One-to-one column correspondences.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    pub pairs: Vec<MappingPair>,
}

impl Mapping {
    pub fn column_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| (p.source, p.target)).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Greedy one-to-one proposal: walk candidates best-first and keep a pair
/// when neither of its columns has been taken yet.
pub fn assign(candidates: &[MatchCandidate]) -> Mapping {
    let mut ordered: Vec<&MatchCandidate> = candidates.iter().collect();
    ordered.sort_by(|a, b| ranking(a, b));

    let mut used_sources = HashSet::new();
    let mut used_targets = HashSet::new();
    let pairs = ordered
        .into_iter()
        .filter(|c| {
            if used_sources.contains(&c.source) || used_targets.contains(&c.target) {
                return false;
            }
            used_sources.insert(c.source);
            used_targets.insert(c.target);
            true
        })
        .map(|c| MappingPair { source: c.source, target: c.target, score: c.combined })
        .collect();
    Mapping { pairs }
}
