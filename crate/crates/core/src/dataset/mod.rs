//! Schema-typed tabular datasets.
//!
//! A [`Dataset`] is column-major: every column carries its [`ColumnSpec`] and
//! cells already validated against it. Binary and categorical cells are stored
//! as category codes (indices into the declared category list), numerical
//! cells as `f64`, and ignored columns keep their raw text.

mod encode;
mod load;
mod recipe;
mod schema;
mod split;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use encode::{encode, EncodedColumn, EncodedMatrix, Encoder};
pub use load::{load_dataset, load_dataset_str};
pub use recipe::{apply_recipe, Recipe};
pub use schema::{load_schema, parse_schema, ColumnKind, ColumnSpec, Role};
pub use split::{split, split_indices};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("header does not match schema (missing: {missing:?}, unexpected: {unexpected:?})")]
    HeaderMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },
    #[error("unparseable cell at row {row}, column `{column}`: {value:?}")]
    BadCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("zero rows after validation")]
    ZeroRows,
    #[error("unknown recipe `{0}`")]
    UnknownRecipe(String),
    #[error("recipe `{recipe}` requires missing columns {missing:?}")]
    RecipeColumns {
        recipe: String,
        missing: Vec<String>,
    },
    #[error("value {value:?} outside declared categories of `{column}`")]
    UnknownCategory { column: String, value: String },
    #[error("test fraction {0} outside (0, 1)")]
    BadFraction(f64),
    #[error("split needs at least 5 rows, got {0}")]
    TooFewRows(usize),
    #[error("split of {n} rows at fraction {fraction} leaves an empty side")]
    EmptyPartition { n: usize, fraction: f64 },
    #[error("encoder/dataset mismatch on column `{0}`")]
    EncoderMismatch(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Classification,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        })
    }
}

/// Validated cell storage for one column.
#[derive(Debug, Clone, PartialEq)]
pub enum Cells {
    /// Category indices for binary / categorical columns.
    Codes(Vec<u32>),
    /// Numerical values.
    Values(Vec<f64>),
    /// Raw text, only for `Role::Ignore` columns.
    Text(Vec<String>),
}

impl Cells {
    pub fn len(&self) -> usize {
        match self {
            Cells::Codes(v) => v.len(),
            Cells::Values(v) => v.len(),
            Cells::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn take(&self, rows: &[usize]) -> Cells {
        match self {
            Cells::Codes(v) => Cells::Codes(rows.iter().map(|&i| v[i]).collect()),
            Cells::Values(v) => Cells::Values(rows.iter().map(|&i| v[i]).collect()),
            Cells::Text(v) => Cells::Text(rows.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub spec: ColumnSpec,
    pub cells: Cells,
}

impl Column {
    /// Cell text as it would appear in a CSV (category label or number).
    pub fn text(&self, row: usize) -> String {
        match &self.cells {
            Cells::Codes(v) => self.spec.categories[v[row] as usize].clone(),
            Cells::Values(v) => v[row].to_string(),
            Cells::Text(v) => v[row].clone(),
        }
    }

    /// Re-types the column under a new spec, converting storage if the kind or
    /// role change requires it.
    pub(crate) fn retyped(&self, spec: ColumnSpec) -> Result<Column> {
        let n = self.cells.len();
        let texts: Vec<String> = (0..n).map(|i| self.text(i)).collect();
        let cells = cells_from_text(&spec, &texts)?;
        Ok(Column { spec, cells })
    }
}

pub(crate) fn cells_from_text(spec: &ColumnSpec, texts: &[String]) -> Result<Cells> {
    if spec.role == Role::Ignore {
        return Ok(Cells::Text(texts.to_vec()));
    }
    match spec.kind {
        ColumnKind::Numerical => texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    DatasetError::BadCell {
                        row: i + 1,
                        column: spec.name.clone(),
                        value: t.clone(),
                    }
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Cells::Values),
        ColumnKind::Binary | ColumnKind::Categorical => texts
            .iter()
            .map(|t| {
                spec.code_of(t.trim()).ok_or_else(|| DatasetError::UnknownCategory {
                    column: spec.name.clone(),
                    value: t.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Cells::Codes),
    }
}

/// A validated table of records with sensitive and target designations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    n_rows: usize,
    task: Task,
    dropped_rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>) -> Result<Self> {
        let specs: Vec<ColumnSpec> = columns.iter().map(|c| c.spec.clone()).collect();
        schema::validate(&specs)?;
        let n_rows = columns.first().map(|c| c.cells.len()).unwrap_or(0);
        for c in &columns {
            if c.cells.len() != n_rows {
                return Err(DatasetError::Invalid(format!(
                    "column `{}` has {} cells, expected {n_rows}",
                    c.spec.name,
                    c.cells.len()
                )));
            }
            let ok = match (&c.cells, c.spec.role, c.spec.kind) {
                (Cells::Text(_), Role::Ignore, _) => true,
                (Cells::Values(v), r, ColumnKind::Numerical) if r != Role::Ignore => {
                    v.iter().all(|x| x.is_finite())
                }
                (Cells::Codes(v), r, ColumnKind::Binary | ColumnKind::Categorical)
                    if r != Role::Ignore =>
                {
                    v.iter().all(|&k| (k as usize) < c.spec.categories.len())
                }
                _ => false,
            };
            if !ok {
                return Err(DatasetError::Invalid(format!(
                    "cells of `{}` do not conform to its spec",
                    c.spec.name
                )));
            }
        }
        if n_rows == 0 {
            return Err(DatasetError::ZeroRows);
        }
        let target = columns
            .iter()
            .find(|c| c.spec.role == Role::Target)
            .expect("validated schema has a target");
        let task = match target.spec.kind {
            ColumnKind::Numerical => Task::Regression,
            _ => Task::Classification,
        };
        Ok(Dataset {
            columns,
            n_rows,
            task,
            dropped_rows: 0,
        })
    }

    pub(crate) fn with_dropped(mut self, dropped: usize) -> Self {
        self.dropped_rows = dropped;
        self
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// Rows dropped at load time for missing values.
    pub fn dropped_rows(&self) -> usize {
        self.dropped_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn specs(&self) -> Vec<ColumnSpec> {
        self.columns.iter().map(|c| c.spec.clone()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.spec.name == name)
    }

    pub fn target(&self) -> &Column {
        self.columns
            .iter()
            .find(|c| c.spec.role == Role::Target)
            .expect("dataset invariant: one target")
    }

    pub fn sensitive_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| c.spec.role == Role::Sensitive)
            .map(|c| c.spec.name.clone())
            .collect()
    }

    /// Subset of rows, in the given order.
    pub fn take_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                spec: c.spec.clone(),
                cells: c.cells.take(rows),
            })
            .collect();
        Dataset::new(columns)
    }

    /// Frequency of each category of a binary / categorical column.
    pub fn group_frequencies(&self, name: &str) -> Option<BTreeMap<String, usize>> {
        let col = self.column(name)?;
        let Cells::Codes(codes) = &col.cells else {
            return None;
        };
        let mut out: BTreeMap<String, usize> =
            col.spec.categories.iter().map(|c| (c.clone(), 0)).collect();
        for &k in codes {
            *out.get_mut(&col.spec.categories[k as usize]).unwrap() += 1;
        }
        Some(out)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn spec(name: &str, kind: ColumnKind, role: Role, cats: &[&str]) -> ColumnSpec {
        ColumnSpec {
            name: name.into(),
            kind,
            role,
            categories: cats.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// gender (sensitive, F/M), x numerical feature, y numerical target.
    pub fn tiny(n: usize) -> Dataset {
        let g: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = (0..n).map(|i| i as f64 + (i % 2) as f64).collect();
        Dataset::new(vec![
            Column {
                spec: spec("gender", ColumnKind::Binary, Role::Sensitive, &["F", "M"]),
                cells: Cells::Codes(g),
            },
            Column {
                spec: spec("x", ColumnKind::Numerical, Role::Feature, &[]),
                cells: Cells::Values(x),
            },
            Column {
                spec: spec("y", ColumnKind::Numerical, Role::Target, &[]),
                cells: Cells::Values(y),
            },
        ])
        .unwrap()
    }
}
