use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Cells, ColumnKind, Dataset, DatasetError, Result, Role};
use crate::linalg::{mean, sample_std};

/// Per-column metadata of an [`EncodedMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
    pub mean: f64,
    pub std: f64,
    /// Zero-variance column, stored unstandardized.
    pub constant: bool,
}

impl EncodedColumn {
    /// Raw (ordinal / numeric) value to the encoded scale.
    pub fn encode_value(&self, raw: f64) -> f64 {
        if self.constant {
            raw
        } else {
            (raw - self.mean) / self.std
        }
    }

    pub fn decode_value(&self, encoded: f64) -> f64 {
        if self.constant {
            encoded
        } else {
            encoded * self.std + self.mean
        }
    }
}

/// Numeric design matrix with one column per non-ignored dataset column.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedMatrix {
    pub values: DMatrix<f64>,
    pub columns: Vec<EncodedColumn>,
}

impl EncodedMatrix {
    /// Wraps an already-numeric matrix without standardization; every column is
    /// treated as a numerical feature.
    pub fn from_raw(names: &[&str], values: DMatrix<f64>) -> Self {
        assert_eq!(names.len(), values.ncols(), "one name per column");
        let columns = names
            .iter()
            .map(|n| EncodedColumn {
                name: n.to_string(),
                kind: ColumnKind::Numerical,
                role: Role::Feature,
                categories: Vec::new(),
                mean: 0.0,
                std: 1.0,
                constant: false,
            })
            .collect();
        EncodedMatrix { values, columns }
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column_meta(&self, name: &str) -> Option<&EncodedColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_values(&self, name: &str) -> Option<Vec<f64>> {
        self.index_of(name)
            .map(|j| self.values.column(j).iter().copied().collect())
    }

    /// Column mapped back to its raw ordinal / numeric scale.
    pub fn raw_column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.index_of(name)?;
        let meta = &self.columns[j];
        Some(self.values.column(j).iter().map(|&v| meta.decode_value(v)).collect())
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Columns in the given order.
    pub fn select(&self, names: &[&str]) -> Option<EncodedMatrix> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.index_of(n))
            .collect::<Option<_>>()?;
        Some(EncodedMatrix {
            values: self.values.select_columns(&idx),
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
        })
    }

    pub fn constant_columns(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| c.constant)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Standardization fitted on one dataset, reusable on another with the same schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    columns: Vec<EncodedColumn>,
}

fn ordinal(cells: &Cells) -> Vec<f64> {
    match cells {
        Cells::Codes(v) => v.iter().map(|&k| k as f64).collect(),
        Cells::Values(v) => v.clone(),
        Cells::Text(_) => unreachable!("ignored columns are not encoded"),
    }
}

impl Encoder {
    pub fn fit(ds: &Dataset) -> Result<Self> {
        let columns = ds
            .columns()
            .iter()
            .filter(|c| c.spec.role != Role::Ignore)
            .map(|c| {
                let raw = ordinal(&c.cells);
                let m = mean(&raw);
                let s = sample_std(&raw);
                let constant = !(s > 0.0);
                EncodedColumn {
                    name: c.spec.name.clone(),
                    kind: c.spec.kind,
                    role: c.spec.role,
                    categories: c.spec.categories.clone(),
                    mean: m,
                    std: if constant { 0.0 } else { s },
                    constant,
                }
            })
            .collect();
        Ok(Encoder { columns })
    }

    pub fn columns(&self) -> &[EncodedColumn] {
        &self.columns
    }

    pub fn transform(&self, ds: &Dataset) -> Result<EncodedMatrix> {
        let n = ds.n_rows();
        let mut values = DMatrix::zeros(n, self.columns.len());
        for (j, meta) in self.columns.iter().enumerate() {
            let col = ds
                .column(&meta.name)
                .filter(|c| c.spec.kind == meta.kind && c.spec.role != Role::Ignore)
                .ok_or_else(|| DatasetError::EncoderMismatch(meta.name.clone()))?;
            if col.spec.categories != meta.categories {
                // codes index a different label list; re-map by label
                if let Cells::Codes(codes) = &col.cells {
                    for (i, &k) in codes.iter().enumerate() {
                        let label = &col.spec.categories[k as usize];
                        let code = meta.categories.iter().position(|c| c == label).ok_or_else(|| {
                            DatasetError::UnknownCategory {
                                column: meta.name.clone(),
                                value: label.clone(),
                            }
                        })?;
                        values[(i, j)] = meta.encode_value(code as f64);
                    }
                    continue;
                }
            }
            for (i, v) in ordinal(&col.cells).into_iter().enumerate() {
                values[(i, j)] = meta.encode_value(v);
            }
        }
        Ok(EncodedMatrix {
            values,
            columns: self.columns.clone(),
        })
    }
}

/// Ordinal-encodes and z-scores every non-ignored column of `ds`.
pub fn encode(ds: &Dataset) -> Result<EncodedMatrix> {
    Encoder::fit(ds)?.transform(ds)
}
