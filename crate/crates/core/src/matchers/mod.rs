//! Column-pair similarity: header names plus three rich-type matchers
//! (cosine over type vectors, Pearson and Spearman over aligned type
//! totals), averaged and thresholded into ranked candidates.

mod combine;
mod correlation;
mod name;
mod profile;
mod vector;

pub use combine::{
    assign, match_tables, type_matcher_score, ColumnEvidence, Mapping, MappingPair, MatchCandidate, MatchConfig,
    Matcher, Score, DEFAULT_THRESHOLD,
};
pub use correlation::{pearson, rank, spearman, spearman_with, TieStrategy};
pub use name::name_similarity;
pub use profile::{build_profile_arrays, ColumnTypeProfile};
pub use vector::{build_type_vector, cosine_similarity, TypeVector};
