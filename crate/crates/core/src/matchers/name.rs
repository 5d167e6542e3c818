/// Header similarity: `1 - levenshtein / max_len` over lowercased headers.
/// `None` (skipped) when either column is unnamed.
pub fn name_similarity(h1: Option<&str>, h2: Option<&str>) -> Option<f64> {
    let a = h1?.trim().to_lowercase();
    let b = h2?.trim().to_lowercase();
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return None;
    }
    Some(1.0 - strsim::levenshtein(&a, &b) as f64 / longest as f64)
}
