//! File-backed project persistence: one JSON document per project.

use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{ColumnKind, Table};

/// Wire form of a persisted project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectDoc {
    pub name: String,
    pub headers: Vec<Option<String>>,
    pub kinds: Vec<ColumnKind>,
    pub rows: Vec<Vec<String>>,
}

impl From<&Table> for ProjectDoc {
    fn from(table: &Table) -> Self {
        ProjectDoc {
            name: table.name().to_string(),
            headers: table.headers(),
            kinds: table.kinds(),
            rows: table.rows().map(|r| r.into_iter().map(str::to_string).collect()).collect(),
        }
    }
}

impl TryFrom<ProjectDoc> for Table {
    type Error = Error;

    fn try_from(doc: ProjectDoc) -> Result<Table> {
        let width = doc.headers.len();
        if doc.kinds.len() != width {
            return Err(Error::usage(format!("project has {width} headers but {} kinds", doc.kinds.len())));
        }
        let mut cells: Vec<Vec<String>> = vec![Vec::with_capacity(doc.rows.len()); width];
        for (i, row) in doc.rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::usage(format!("project row {i} has {} cells, expected {width}", row.len())));
            }
            for (col, cell) in cells.iter_mut().zip(row) {
                col.push(cell);
            }
        }
        let columns = doc.headers.into_iter().zip(cells).zip(doc.kinds).map(|((h, c), k)| (h, c, k)).collect();
        Table::with_kinds(doc.name, columns)
    }
}

/// Directory of JSON documents. Projects live under `projects/`, other
/// collections (e.g. review sessions) under their own subdirectory.
#[derive(Debug, Clone)]
pub struct ProjectStore {
    root: PathBuf,
}

const PROJECTS: &str = "projects";

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

impl ProjectStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(root.join(PROJECTS))?;
        Ok(ProjectStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn new_id() -> String {
        uuid::Uuid::new_v4().simple().to_string()
    }

    pub fn save_project(&self, table: &Table) -> Result<String> {
        let id = Self::new_id();
        self.put(PROJECTS, &id, &ProjectDoc::from(table))?;
        Ok(id)
    }

    pub fn load_project(&self, id: &str) -> Result<Table> {
        self.get::<ProjectDoc>(PROJECTS, id)?.try_into()
    }

    /// Writes `collection/id.json` atomically (temp file + rename).
    pub fn put<T: Serialize>(&self, collection: &str, id: &str, value: &T) -> Result<()> {
        if !valid_id(id) || !valid_id(collection) {
            return Err(Error::usage(format!("invalid document id {collection}/{id}")));
        }
        let dir = self.root.join(collection);
        std::fs::create_dir_all(&dir)?;
        let tmp = dir.join(format!(".{id}.{}.tmp", Self::new_id()));
        std::fs::write(&tmp, serde_json::to_vec_pretty(value)?)?;
        std::fs::rename(&tmp, dir.join(format!("{id}.json")))?;
        Ok(())
    }

    pub fn get<T: DeserializeOwned>(&self, collection: &str, id: &str) -> Result<T> {
        if !valid_id(id) || !valid_id(collection) {
            return Err(Error::NotFound(id.to_string()));
        }
        let path = self.root.join(collection).join(format!("{id}.json"));
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(Error::NotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        Ok(serde_json::from_slice(&bytes)?)
    }
}
