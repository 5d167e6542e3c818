use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Share of non-empty cells that must parse before a column is typed
/// numeric or date, expressed as `NUM / DEN`.
const SUPERMAJORITY_NUM: usize = 9;
const SUPERMAJORITY_DEN: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Date,
    Text,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Date => "date",
            ColumnKind::Text => "text",
        }
    }

    /// Numeric and date columns carry no entity evidence and are never reconciled.
    pub fn is_reconcilable(self) -> bool {
        self == ColumnKind::Text
    }
}

impl std::fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ColumnKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "numeric" => Ok(ColumnKind::Numeric),
            "date" => Ok(ColumnKind::Date),
            "text" => Ok(ColumnKind::Text),
            other => Err(format!("unknown column kind {other:?}")),
        }
    }
}

/// Parses a decimal number: optional sign, digits with optional comma
/// thousands separators, at most one decimal point. No exponents.
pub fn parse_number(raw: &str) -> Option<f64> {
    let s = raw.trim();
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };

    if int_part.is_empty() && frac_part.is_none_or(str::is_empty) {
        return None;
    }
    if let Some(frac) = frac_part {
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    if !valid_integer_part(int_part) {
        return None;
    }

    s.replace(',', "").parse().ok()
}

fn valid_integer_part(int_part: &str) -> bool {
    if int_part.is_empty() {
        return true;
    }
    if !int_part.contains(',') {
        return int_part.bytes().all(|b| b.is_ascii_digit());
    }
    let mut groups = int_part.split(',');
    let lead = groups.next().unwrap_or_default();
    (1..=3).contains(&lead.len())
        && lead.bytes().all(|b| b.is_ascii_digit())
        && groups.all(|g| g.len() == 3 && g.bytes().all(|b| b.is_ascii_digit()))
}

/// ISO-8601 calendar date, dd/mm/yyyy or mm/dd/yyyy.
pub fn is_date(raw: &str) -> bool {
    let s = raw.trim();
    if s.len() < 8 || s.len() > 10 {
        return false;
    }
    ["%Y-%m-%d", "%d/%m/%Y", "%m/%d/%Y"].iter().any(|fmt| NaiveDate::parse_from_str(s, fmt).is_ok())
}

/// Classifies a column from its cell texts. Empty cells are ignored; an
/// all-empty column is text.
pub fn infer_column_kind<S: AsRef<str>>(cells: &[S]) -> ColumnKind {
    let non_empty: Vec<&str> = cells.iter().map(AsRef::as_ref).filter(|c| !c.trim().is_empty()).collect();
    if non_empty.is_empty() {
        return ColumnKind::Text;
    }

    let supermajority = |hits: usize| hits * SUPERMAJORITY_DEN >= non_empty.len() * SUPERMAJORITY_NUM;

    if supermajority(non_empty.iter().filter(|c| parse_number(c).is_some()).count()) {
        ColumnKind::Numeric
    } else if supermajority(non_empty.iter().filter(|c| is_date(c)).count()) {
        ColumnKind::Date
    } else {
        ColumnKind::Text
    }
}
