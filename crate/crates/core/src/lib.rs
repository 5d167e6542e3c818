//! Schema matching for tabular data using reconciled rich types.
//!
//! Cells of text columns are resolved to ranked candidate types through a
//! [`reconcile::Provider`]; columns are then compared by header name and by
//! the distribution of their types (cosine, Pearson, Spearman). Accepted
//! correspondences drive a union merge and simple grouped aggregation, and
//! unnamed columns can be given Wilson-ranked label suggestions.

pub mod error;
pub mod labeling;
pub mod matchers;
pub mod merge;
pub mod reconcile;
pub mod report;
pub mod store;
pub mod table;

pub use error::{Error, Result};
pub use report::{run_match, MappingDoc, MatchReport};
pub use table::{load_table, Column, ColumnKind, Table};
