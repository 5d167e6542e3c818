use std::collections::BTreeMap;

use crate::reconcile::ColumnAnnotation;

/// Sparse non-negative weights over rich-type ids. Each distinct type id is
/// one dimension; zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeVector(BTreeMap<String, f64>);

impl TypeVector {
    /// Sums weights per type id, dropping non-positive and non-finite entries.
    pub fn from_weights<I, S>(weights: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (id, w) in weights {
            if w.is_finite() && w > 0.0 {
                *map.entry(id.into()).or_insert(0.0) += w;
            }
        }
        TypeVector(map)
    }

    pub fn get(&self, type_id: &str) -> f64 {
        self.0.get(type_id).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries in ascending type-id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn dot(&self, other: &TypeVector) -> f64 {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().map(|(id, w)| w * large.get(id)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.0.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> TypeVector {
        TypeVector::from_weights(self.iter().map(|(id, w)| (id, w * factor)))
    }
}

/// Column vector: the sum over cells of each cell's score-weighted candidate types.
pub fn build_type_vector(annotation: &ColumnAnnotation) -> TypeVector {
    TypeVector::from_weights(
        annotation.cells.iter().flat_map(|cell| cell.candidates.iter()).map(|c| (c.type_id.as_str(), c.score)),
    )
}

/// `|V·W| / (‖V‖‖W‖)`, or 0 when either vector is empty.
pub fn cosine_similarity(v: &TypeVector, w: &TypeVector) -> f64 {
    let denom = v.norm() * w.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (v.dot(w).abs() / denom).min(1.0)
}
