//! Header suggestions for unnamed columns, ranked by the lower bound of the
//! Wilson score interval over each type's normalized candidate scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matchers::ColumnTypeProfile;

/// z for a two-sided 95% interval.
pub const DEFAULT_Z: f64 = 1.96;
pub const DEFAULT_TOP_M: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelSuggestion {
    pub label: String,
    pub type_id: String,
    pub wilson: f64,
    pub support_n: usize,
    pub p_hat: f64,
}

/// Lower Wilson bound for proportion `p_hat` observed over `n` trials.
pub fn wilson_score(p_hat: f64, n: usize, z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::usage(format!("p_hat {p_hat} is outside [0, 1]")));
    }
    if n == 0 {
        return Err(Error::usage("n must be at least 1"));
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::usage(format!("z must be positive, got {z}")));
    }
    let n = n as f64;
    let z2 = z * z;
    let centre = p_hat + z2 / (2.0 * n);
    let spread = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    let w = (centre - spread) / (1.0 + z2 / n);
    Ok(w.clamp(0.0, p_hat))
}

/// Ranks the column's types as label candidates.
///
/// Scores are divided by the largest candidate score in the column so each
/// type's mean lands in [0, 1]; `n` is the number of scores seen for the type.
pub fn suggest_labels(profile: &ColumnTypeProfile, z: f64, top_m: usize) -> Result<Vec<LabelSuggestion>> {
    if profile.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let max = profile.all_scores().fold(0.0_f64, f64::max);

    let mut suggestions = profile
        .scores_by_type()
        .iter()
        .map(|(type_id, scores)| {
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            let p_hat = if max > 0.0 { (mean / max).clamp(0.0, 1.0) } else { 0.0 };
            Ok(LabelSuggestion {
                label: profile.type_name(type_id).unwrap_or(type_id).to_string(),
                type_id: type_id.clone(),
                wilson: wilson_score(p_hat, scores.len(), z)?,
                support_n: scores.len(),
                p_hat,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    suggestions.sort_by(|a, b| b.wilson.total_cmp(&a.wilson).then_with(|| a.type_id.cmp(&b.type_id)));
    suggestions.truncate(top_m);
    Ok(suggestions)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionWire {
    pub label: String,
    pub type_id: String,
    pub wilson: f64,
    pub n: usize,
}

/// `{"column": int, "suggestions": [...]}` as written by the CLI and service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub column: usize,
    pub suggestions: Vec<SuggestionWire>,
}

impl LabelReport {
    pub fn new(column: usize, suggestions: &[LabelSuggestion]) -> Self {
        LabelReport {
            column,
            suggestions: suggestions
                .iter()
                .map(|s| SuggestionWire {
                    label: s.label.clone(),
                    type_id: s.type_id.clone(),
                    wilson: s.wilson,
                    n: s.support_n,
                })
                .collect(),
        }
    }
}
