use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Binary,
    Categorical,
    Numerical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Feature,
    Sensitive,
    Target,
    Ignore,
}

/// Declared type and role of one column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
    /// Ordered category labels; the position is the encoded code.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnSpec {
    pub fn code_of(&self, label: &str) -> Option<u32> {
        self.categories
            .iter()
            .position(|c| c == label)
            .map(|i| i as u32)
    }
}

/// Reads a JSON schema file: an array of `{name, kind, role, categories}`.
pub fn load_schema(path: impl AsRef<Path>) -> Result<Vec<ColumnSpec>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_schema(&text)
}

pub fn parse_schema(text: &str) -> Result<Vec<ColumnSpec>> {
    let specs: Vec<ColumnSpec> =
        serde_json::from_str(text).map_err(|e| DatasetError::Schema(e.to_string()))?;
    validate(&specs)?;
    Ok(specs)
}

pub(crate) fn validate(specs: &[ColumnSpec]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in specs {
        if s.name.trim().is_empty() {
            return Err(DatasetError::Schema("empty column name".into()));
        }
        if !seen.insert(s.name.as_str()) {
            return Err(DatasetError::Schema(format!("duplicate column `{}`", s.name)));
        }
        if s.kind != ColumnKind::Numerical {
            if s.categories.is_empty() && s.role != Role::Ignore {
                return Err(DatasetError::Schema(format!(
                    "column `{}` needs a category list",
                    s.name
                )));
            }
            let distinct: BTreeSet<_> = s.categories.iter().collect();
            if distinct.len() != s.categories.len() {
                return Err(DatasetError::Schema(format!(
                    "column `{}` has duplicate categories",
                    s.name
                )));
            }
            if s.kind == ColumnKind::Binary && s.categories.len() != 2 {
                return Err(DatasetError::Schema(format!(
                    "binary column `{}` must declare exactly two categories",
                    s.name
                )));
            }
        }
    }
    let targets = specs.iter().filter(|s| s.role == Role::Target).count();
    if targets != 1 {
        return Err(DatasetError::Schema(format!(
            "expected exactly one target column, found {targets}"
        )));
    }
    if !specs.iter().any(|s| s.role == Role::Sensitive) {
        return Err(DatasetError::Schema("no sensitive column".into()));
    }
    Ok(())
}
