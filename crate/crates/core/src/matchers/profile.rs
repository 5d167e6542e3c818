use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::reconcile::ColumnAnnotation;

/// Per-column aggregate of candidate scores, keyed by type id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnTypeProfile {
    per_type_total: BTreeMap<String, f64>,
    scores_by_type: BTreeMap<String, Vec<f64>>,
    type_names: BTreeMap<String, String>,
}

impl ColumnTypeProfile {
    pub fn from_annotation(annotation: &ColumnAnnotation) -> Self {
        let mut profile = ColumnTypeProfile::default();
        for candidate in annotation.cells.iter().flat_map(|c| c.candidates.iter()) {
            *profile.per_type_total.entry(candidate.type_id.clone()).or_insert(0.0) += candidate.score;
            profile.scores_by_type.entry(candidate.type_id.clone()).or_default().push(candidate.score);
            profile.type_names.entry(candidate.type_id.clone()).or_insert_with(|| candidate.display_name.clone());
        }
        profile
    }

    /// Builds a profile directly from per-type totals (one observation each).
    pub fn from_totals<I, S>(totals: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut profile = ColumnTypeProfile::default();
        for (id, total) in totals {
            let id = id.into();
            *profile.per_type_total.entry(id.clone()).or_insert(0.0) += total;
            profile.scores_by_type.entry(id.clone()).or_default().push(total);
            profile.type_names.entry(id.clone()).or_insert(id);
        }
        profile
    }

    pub fn is_empty(&self) -> bool {
        self.per_type_total.is_empty()
    }

    /// Number of distinct types observed.
    pub fn type_count(&self) -> usize {
        self.per_type_total.len()
    }

    pub fn total(&self, type_id: &str) -> f64 {
        self.per_type_total.get(type_id).copied().unwrap_or(0.0)
    }

    pub fn per_type_total(&self) -> &BTreeMap<String, f64> {
        &self.per_type_total
    }

    /// Every individual candidate score observed for `type_id`.
    pub fn scores_for(&self, type_id: &str) -> &[f64] {
        self.scores_by_type.get(type_id).map_or(&[], Vec::as_slice)
    }

    pub fn scores_by_type(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.scores_by_type
    }

    /// Flat list of all candidate scores in the column.
    pub fn all_scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.scores_by_type.values().flatten().copied()
    }

    pub fn type_name(&self, type_id: &str) -> Option<&str> {
        self.type_names.get(type_id).map(String::as_str)
    }
}

/// Aligns two profiles over the lexicographically ordered union of their
/// type ids, zero-filling absent types. The profile with more distinct types
/// supplies `X` (the first argument wins ties).
pub fn build_profile_arrays(p: &ColumnTypeProfile, q: &ColumnTypeProfile) -> Result<(Vec<f64>, Vec<f64>)> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let (larger, smaller) = if q.type_count() > p.type_count() { (q, p) } else { (p, q) };

    let mut union: Vec<&str> = p.per_type_total.keys().chain(q.per_type_total.keys()).map(String::as_str).collect();
    union.sort_unstable();
    union.dedup();

    let x = union.iter().map(|id| larger.total(id)).collect();
    let y = union.iter().map(|id| smaller.total(id)).collect();
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_alignment_with_first_argument_tie_break() {
        let p = ColumnTypeProfile::from_totals([("A", 2.0), ("B", 1.0)]);
        let q = ColumnTypeProfile::from_totals([("A", 1.0), ("C", 0.3)]);
        let (x, y) = build_profile_arrays(&p, &q).unwrap();
        assert_eq!(x, vec![2.0, 1.0, 0.0]);
        assert_eq!(y, vec![1.0, 0.0, 0.3]);
    }

    #[test]
    fn identical_profiles() {
        let p = ColumnTypeProfile::from_totals([("A", 2.0), ("B", 1.0)]);
        let (x, y) = build_profile_arrays(&p, &p.clone()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn larger_type_set_supplies_x() {
        let p = ColumnTypeProfile::from_totals([("A", 1.0)]);
        let q = ColumnTypeProfile::from_totals([("A", 5.0), ("B", 4.0), ("C", 3.0)]);
        let (x, y) = build_profile_arrays(&p, &q).unwrap();
        assert_eq!(x, vec![5.0, 4.0, 3.0]);
        assert_eq!(y, vec![1.0, 0.0, 0.0]);
        let (x2, y2) = build_profile_arrays(&q, &p).unwrap();
        assert_eq!((x, y), (x2, y2));
    }

    #[test]
    fn empty_profile_is_an_error() {
        let p = ColumnTypeProfile::from_totals([("A", 1.0)]);
        let empty = ColumnTypeProfile::default();
        assert!(matches!(build_profile_arrays(&p, &empty), Err(Error::EmptyProfile)));
        assert!(matches!(build_profile_arrays(&empty, &p), Err(Error::EmptyProfile)));
    }

    #[test]
    fn keeps_individual_scores() {
        use crate::reconcile::{CellAnnotation, TypeCandidate};
        let ann = ColumnAnnotation {
            position: 0,
            cells: vec![
                CellAnnotation {
                    row: 0,
                    cell_text: "a".into(),
                    candidates: vec![TypeCandidate::new("/o", "Org", 0.9)],
                },
                CellAnnotation {
                    row: 1,
                    cell_text: "b".into(),
                    candidates: vec![TypeCandidate::new("/o", "Org", 0.5), TypeCandidate::new("/p", "Person", 0.2)],
                },
            ],
        };
        let p = ColumnTypeProfile::from_annotation(&ann);
        assert_eq!(p.scores_for("/o"), &[0.9, 0.5]);
        assert!((p.total("/o") - 1.4).abs() < 1e-12);
        assert_eq!(p.all_scores().count(), 3);
        assert_eq!(p.type_name("/p"), Some("Person"));
    }
}
