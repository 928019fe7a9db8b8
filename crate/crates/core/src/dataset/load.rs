use std::collections::BTreeSet;
use std::path::Path;

use log::info;

use super::{Cells, Column, ColumnKind, ColumnSpec, Dataset, DatasetError, Result, Role};

/// Tokens treated as a missing cell.
const MISSING: &[&str] = &["", "?", "NA", "N/A", "NaN", "nan", "null", "NULL"];

/// Loads a CSV file and validates it cell-by-cell against `schema`.
///
/// Rows with a missing value in any non-ignored column are dropped; the count
/// is available through [`Dataset::dropped_rows`].
pub fn load_dataset(path: impl AsRef<Path>, schema: &[ColumnSpec]) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let ds = load_dataset_str(&text, schema)?;
    info!(
        "loaded {} rows from {} ({} dropped for missing values)",
        ds.n_rows(),
        path.display(),
        ds.dropped_rows()
    );
    Ok(ds)
}

/// Picks `;` when the header uses it and has no commas (the UCI student files).
fn sniff_delimiter(text: &str) -> u8 {
    let header = text.lines().next().unwrap_or("");
    if header.contains(';') && !header.contains(',') {
        b';'
    } else {
        b','
    }
}

pub fn load_dataset_str(text: &str, schema: &[ColumnSpec]) -> Result<Dataset> {
    super::schema::validate(schema)?;
    if text.trim().is_empty() {
        return Err(DatasetError::ZeroRows);
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(text))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let header_set: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    let schema_set: BTreeSet<&str> = schema.iter().map(|s| s.name.as_str()).collect();
    if header_set != schema_set || header_set.len() != header.len() {
        return Err(DatasetError::HeaderMismatch {
            missing: schema_set.difference(&header_set).map(|s| s.to_string()).collect(),
            unexpected: header_set.difference(&schema_set).map(|s| s.to_string()).collect(),
        });
    }
    // column position in the file for each schema entry
    let positions: Vec<usize> = schema
        .iter()
        .map(|s| header.iter().position(|h| h == &s.name).unwrap())
        .collect();

    let mut cells: Vec<Cells> = schema
        .iter()
        .map(|s| match (s.role, s.kind) {
            (Role::Ignore, _) => Cells::Text(Vec::new()),
            (_, ColumnKind::Numerical) => Cells::Values(Vec::new()),
            _ => Cells::Codes(Vec::new()),
        })
        .collect();
    let mut dropped = 0usize;

    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        let row = row_idx + 1;
        let missing = schema.iter().zip(&positions).any(|(s, &p)| {
            s.role != Role::Ignore && MISSING.contains(&record.get(p).unwrap_or(""))
        });
        if missing {
            dropped += 1;
            continue;
        }
        for ((spec, &p), out) in schema.iter().zip(&positions).zip(cells.iter_mut()) {
            let raw = record.get(p).unwrap_or("");
            let bad = || DatasetError::BadCell {
                row,
                column: spec.name.clone(),
                value: raw.to_string(),
            };
            match out {
                Cells::Text(v) => v.push(raw.to_string()),
                Cells::Values(v) => {
                    let x = raw.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad)?;
                    v.push(x);
                }
                Cells::Codes(v) => v.push(spec.code_of(raw).ok_or_else(bad)?),
            }
        }
    }

    let columns: Vec<Column> = schema
        .iter()
        .cloned()
        .zip(cells)
        .map(|(spec, cells)| Column { spec, cells })
        .collect();
    Ok(Dataset::new(columns)?.with_dropped(dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_schema;

    fn schema() -> Vec<ColumnSpec> {
        parse_schema(
            r#"[{"name":"id","kind":"numerical","role":"ignore"},
                {"name":"gender","kind":"binary","role":"sensitive","categories":["F","M"]},
                {"name":"band","kind":"categorical","role":"feature","categories":["lo","mid","hi"]},
                {"name":"score","kind":"numerical","role":"target"}]"#,
        )
        .unwrap()
    }

    #[test]
    fn loads_and_validates_rows() {
        let csv = "gender,id,band,score\nF,1,lo,1.5\nM,2,hi,2.0\n\"M\",3,mid,3\n";
        let ds = load_dataset_str(csv, &schema()).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.column("gender").unwrap().cells, Cells::Codes(vec![0, 1, 1]));
        assert_eq!(ds.column("band").unwrap().cells, Cells::Codes(vec![0, 2, 1]));
    }

    #[test]
    fn drops_rows_with_missing_values_outside_ignored_columns() {
        let csv = "gender,id,band,score\nF,,lo,1\nM,2,?,2\nF,3,hi,\nM,4,hi,4\n";
        let ds = load_dataset_str(csv, &schema()).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.dropped_rows(), 2);
    }

    #[test]
    fn empty_file_is_zero_rows() {
        assert!(matches!(load_dataset_str("", &schema()), Err(DatasetError::ZeroRows)));
        let header_only = "gender,id,band,score\n";
        assert!(matches!(
            load_dataset_str(header_only, &schema()),
            Err(DatasetError::ZeroRows)
        ));
    }

    #[test]
    fn reports_row_and_column_of_bad_cell() {
        let csv = "gender,id,band,score\nF,1,lo,1\nX,2,lo,2\n";
        match load_dataset_str(csv, &schema()) {
            Err(DatasetError::BadCell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "gender");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_mismatch_lists_both_sides() {
        let csv = "gender,id,level,score\nF,1,lo,1\n";
        match load_dataset_str(csv, &schema()) {
            Err(DatasetError::HeaderMismatch { missing, unexpected }) => {
                assert_eq!(missing, vec!["band"]);
                assert_eq!(unexpected, vec!["level"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semicolon_files_are_sniffed() {
        let csv = "gender;id;band;score\n\"F\";1;\"lo\";7\n";
        let ds = load_dataset_str(csv, &schema()).unwrap();
        assert_eq!(ds.column("score").unwrap().cells, Cells::Values(vec![7.0]));
    }
}
