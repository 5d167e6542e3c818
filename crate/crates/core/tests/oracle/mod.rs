//! Naive reference implementations used to cross-check the library.
//!
//! Each routine takes a different algebraic route from the production
//! code: dense vectors over an explicit key union, the standard-score form
//! of Pearson's r, quadratic ranks, and the closed-form root of the Wilson
//! quadratic.
#![allow(dead_code)]

/// Cosine over dense vectors laid out on the union of both key sets.
pub fn dense_cosine(v: &[(String, f64)], w: &[(String, f64)]) -> f64 {
    let mut keys: Vec<&str> = Vec::new();
    for (k, _) in v.iter().chain(w) {
        if !keys.contains(&k.as_str()) {
            keys.push(k);
        }
    }
    let lookup =
        |xs: &[(String, f64)], key: &str| -> f64 { xs.iter().filter(|(k, _)| k == key).map(|(_, x)| *x).sum() };
    let a: Vec<f64> = keys.iter().map(|k| lookup(v, k)).collect();
    let b: Vec<f64> = keys.iter().map(|k| lookup(w, k)).collect();
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..keys.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot.abs() / (na * nb).sqrt()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_sd(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// `1/(n-1) Σ ((x-x̄)/s_x)((y-ȳ)/s_y)`; 0 for a constant array.
pub fn standard_score_pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    if x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
        return 0.0;
    }
    let (mx, my) = (mean(x), mean(y));
    let (sx, sy) = (sample_sd(x), sample_sd(y));
    let n = x.len() as f64;
    x.iter().zip(y).map(|(a, b)| ((a - mx) / sx) * ((b - my) / sy)).sum::<f64>() / (n - 1.0)
}

/// Average ranks by counting: rank = #smaller + (#equal + 1) / 2.
pub fn quadratic_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            let smaller = xs.iter().filter(|y| *y < x).count() as f64;
            let equal = xs.iter().filter(|y| *y == x).count() as f64;
            smaller + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn naive_spearman(x: &[f64], y: &[f64]) -> f64 {
    standard_score_pearson(&quadratic_ranks(x), &quadratic_ranks(y))
}

/// Lower root of `(n + z²) w² - (2np + z²) w + n p² = 0`.
pub fn wilson_root(p: f64, n: usize, z: f64) -> f64 {
    let n = n as f64;
    let z2 = z * z;
    let b = 2.0 * n * p + z2;
    let disc = z2 * (z2 + 4.0 * n * p * (1.0 - p));
    (b - disc.sqrt()) / (2.0 * (n + z2))
}
