//! Rectangular tabular projects: ingestion, kind inference and CSV export.

mod kind;
mod rfc4180;

pub use kind::{infer_column_kind, is_date, parse_number, ColumnKind};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    position: usize,
    header: Option<String>,
    cells: Vec<String>,
    kind: ColumnKind,
}

impl Column {
    pub fn position(&self) -> usize {
        self.position
    }

    /// `None` for unnamed columns.
    pub fn header(&self) -> Option<&str> {
        self.header.as_deref()
    }

    pub fn cells(&self) -> &[String] {
        &self.cells
    }

    pub fn kind(&self) -> ColumnKind {
        self.kind
    }

    /// Label shown for this column in reports.
    pub fn display_name(&self) -> String {
        match &self.header {
            Some(h) => h.clone(),
            None => format!("#{}", self.position),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    name: String,
    columns: Vec<Column>,
    row_count: usize,
}

fn normalize_header(h: Option<String>) -> Option<String> {
    h.and_then(|h| {
        let t = h.trim();
        (!t.is_empty()).then(|| t.to_string())
    })
}

impl Table {
    /// Builds a table from `(header, cells)` pairs, inferring every column kind.
    pub fn from_columns(name: impl Into<String>, columns: Vec<(Option<String>, Vec<String>)>) -> Result<Self> {
        let row_count = columns.first().map_or(0, |(_, cells)| cells.len());
        let columns = columns
            .into_iter()
            .enumerate()
            .map(|(position, (header, cells))| {
                if cells.len() != row_count {
                    return Err(Error::usage(format!(
                        "column {position} has {} cells, expected {row_count}",
                        cells.len()
                    )));
                }
                let kind = infer_column_kind(&cells);
                Ok(Column { position, header: normalize_header(header), cells, kind })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Table { name: name.into(), columns, row_count })
    }

    /// Like [`Table::from_columns`] but with kinds supplied by the caller.
    pub fn with_kinds(
        name: impl Into<String>,
        columns: Vec<(Option<String>, Vec<String>, ColumnKind)>,
    ) -> Result<Self> {
        let mut kinds = Vec::with_capacity(columns.len());
        let plain = columns
            .into_iter()
            .map(|(h, c, k)| {
                kinds.push(k);
                (h, c)
            })
            .collect();
        let mut table = Self::from_columns(name, plain)?;
        for (col, kind) in table.columns.iter_mut().zip(kinds) {
            col.kind = kind;
        }
        Ok(table)
    }

    /// Builds a table from row-major records, padding short rows with empty cells.
    pub fn from_rows(name: impl Into<String>, headers: Vec<Option<String>>, rows: Vec<Vec<String>>) -> Result<Self> {
        let width = rows.iter().map(Vec::len).chain([headers.len()]).max().unwrap_or(0);
        let mut headers = headers;
        headers.resize(width, None);

        let mut columns: Vec<Vec<String>> = vec![Vec::with_capacity(rows.len()); width];
        for row in rows {
            let mut row = row.into_iter();
            for col in columns.iter_mut() {
                col.push(row.next().unwrap_or_default());
            }
        }
        Self::from_columns(name, headers.into_iter().zip(columns).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, position: usize) -> Option<&Column> {
        self.columns.get(position)
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn headers(&self) -> Vec<Option<String>> {
        self.columns.iter().map(|c| c.header.clone()).collect()
    }

    pub fn kinds(&self) -> Vec<ColumnKind> {
        self.columns.iter().map(|c| c.kind).collect()
    }

    pub fn row(&self, index: usize) -> Vec<&str> {
        self.columns.iter().map(|c| c.cells[index].as_str()).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<&str>> + '_ {
        (0..self.row_count).map(|i| self.row(i))
    }

    /// Serializes with a header row; unnamed columns get an empty header field.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        writer.write_record(self.columns.iter().map(|c| c.header.as_deref().unwrap_or(""))).map_err(io)?;
        for row in self.rows() {
            writer.write_record(row).map_err(io)?;
        }
        writer.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Parses UTF-8 RFC 4180 CSV into a table.
pub fn load_table(csv_bytes: &[u8], has_header: bool, name: &str) -> Result<Table> {
    let text = std::str::from_utf8(csv_bytes).map_err(|e| {
        let line = 1 + csv_bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
        Error::Parse { line, message: "input is not valid UTF-8".into() }
    })?;

    let mut records = rfc4180::parse_records(text)?;
    if records.is_empty() {
        return Err(Error::EmptyTable);
    }

    let headers = if has_header { records.remove(0).into_iter().map(Some).collect() } else { Vec::new() };
    Table::from_rows(name, headers, records)
}
