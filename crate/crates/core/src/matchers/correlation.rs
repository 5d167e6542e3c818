//! Sample correlation coefficients over aligned score arrays.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How tied values share ranks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieStrategy {
    /// Each tied value gets the mean of the ranks the group spans.
    #[default]
    Average,
    Minimum,
    Maximum,
    /// Ties are ranked in order of appearance.
    Sequential,
}

impl std::str::FromStr for TieStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "average" => Ok(TieStrategy::Average),
            "minimum" => Ok(TieStrategy::Minimum),
            "maximum" => Ok(TieStrategy::Maximum),
            "sequential" => Ok(TieStrategy::Sequential),
            other => Err(format!("unknown tie strategy {other:?}")),
        }
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::usage(format!("array lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::usage("correlation needs at least two observations"));
    }
    Ok(())
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Pearson's r via the deviation-sum form. An array with zero variance
/// carries no linear evidence, so r is 0 there.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Ok(0.0);
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;

    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Ascending ranks starting at 1.
pub fn rank(values: &[f64], ties: TieStrategy) -> Result<Vec<f64>> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::usage("cannot rank NaN values"));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps appearance order inside tie groups
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // 1-based ranks spanned by this group: start+1 ..= end+1
        for (offset, &idx) in order[start..=end].iter().enumerate() {
            ranks[idx] = match ties {
                TieStrategy::Average => (start + end) as f64 / 2.0 + 1.0,
                TieStrategy::Minimum => (start + 1) as f64,
                TieStrategy::Maximum => (end + 1) as f64,
                TieStrategy::Sequential => (start + offset + 1) as f64,
            };
        }
        start = end + 1;
    }
    Ok(ranks)
}

/// Spearman's rho: Pearson's r over average-tie ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    spearman_with(x, y, TieStrategy::Average)
}

pub fn spearman_with(x: &[f64], y: &[f64], ties: TieStrategy) -> Result<f64> {
    check_pair(x, y)?;
    pearson(&rank(x, ties)?, &rank(y, ties)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_pearson() {
        // deviation sums: x̄=1.5, ȳ=0.75 → Σdxdy=3.5, Σdx²=5, Σdy²=2.75
        let r = pearson(&[2.0, 0.0, 1.0, 3.0], &[1.0, 0.0, 0.0, 2.0]).unwrap();
        assert!((r - 0.943880).abs() < 1e-6);
    }

    #[test]
    fn pearson_identity_and_reversal() {
        let x = [1.0, 2.0, 3.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_zero() {
        assert_eq!(pearson(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(pearson(&[1.0, 2.0], &[4.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn pearson_usage_errors() {
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(Error::Usage(_))));
        assert!(matches!(pearson(&[1.0, 2.0], &[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn average_ranks() {
        assert_eq!(rank(&[1.0, 2.0, 2.0, 3.0], TieStrategy::Average).unwrap(), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(rank(&[10.0, 20.0, 30.0], TieStrategy::Average).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(rank(&[5.0, 5.0], TieStrategy::Average).unwrap(), vec![1.5, 1.5]);
        assert_eq!(rank(&[3.0, 1.0, 2.0], TieStrategy::Average).unwrap(), vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn other_tie_strategies() {
        let v = [2.0, 1.0, 2.0, 0.5];
        assert_eq!(rank(&v, TieStrategy::Minimum).unwrap(), vec![3.0, 2.0, 3.0, 1.0]);
        assert_eq!(rank(&v, TieStrategy::Maximum).unwrap(), vec![4.0, 2.0, 4.0, 1.0]);
        assert_eq!(rank(&v, TieStrategy::Sequential).unwrap(), vec![3.0, 2.0, 4.0, 1.0]);
    }

    #[test]
    fn nan_is_rejected() {
        assert!(matches!(rank(&[1.0, f64::NAN], TieStrategy::Average), Err(Error::Usage(_))));
    }

    #[test]
    fn worked_spearman() {
        let rho = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((rho - 0.8).abs() < 1e-9);
    }

    #[test]
    fn spearman_monotone() {
        assert!((spearman(&[10.0, 20.0, 30.0], &[1.0, 4.0, 9.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&[10.0, 20.0, 30.0], &[9.0, 4.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    }
}
