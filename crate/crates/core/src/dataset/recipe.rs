use std::fmt;
use std::str::FromStr;

use super::{Cells, Column, ColumnKind, ColumnSpec, Dataset, DatasetError, Result, Role};

/// Dataset-specific preparation: column selection, relabeling and role marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recipe {
    /// gender + race sensitive, zfygpa target; keeps {gender, race, lsat, ugpa, zfygpa}.
    LawSchool,
    /// Module BBB only; disability sensitive; final_result binarized as target.
    OuladBbb,
    /// gender sensitive, G3 target; all other columns are features.
    StudentMat,
    StudentPor,
    Identity,
}

impl Recipe {
    pub fn key(&self) -> &'static str {
        match self {
            Recipe::LawSchool => "law_school",
            Recipe::OuladBbb => "oulad_bbb",
            Recipe::StudentMat => "student_mat",
            Recipe::StudentPor => "student_por",
            Recipe::Identity => "identity",
        }
    }

    pub fn apply(&self, raw: &Dataset) -> Result<Dataset> {
        match self {
            Recipe::LawSchool => law_school(raw),
            Recipe::OuladBbb => oulad_bbb(raw),
            Recipe::StudentMat | Recipe::StudentPor => student(raw, self.key()),
            Recipe::Identity => Ok(raw.clone()),
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Recipe {
    type Err = DatasetError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "law_school" => Recipe::LawSchool,
            "oulad_bbb" => Recipe::OuladBbb,
            "student_mat" => Recipe::StudentMat,
            "student_por" => Recipe::StudentPor,
            "identity" => Recipe::Identity,
            other => return Err(DatasetError::UnknownRecipe(other.to_string())),
        })
    }
}

/// Applies the recipe named by `key`.
pub fn apply_recipe(raw: &Dataset, key: &str) -> Result<Dataset> {
    key.parse::<Recipe>()?.apply(raw)
}

/// Columns a recipe needs: canonical name plus accepted source spellings.
struct Wanted {
    name: &'static str,
    aliases: &'static [&'static str],
}

fn resolve<'a>(raw: &'a Dataset, recipe: &str, wanted: &[Wanted]) -> Result<Vec<&'a Column>> {
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for w in wanted {
        match w.aliases.iter().find_map(|a| raw.column(a)) {
            Some(c) => found.push(c),
            None => missing.push(w.name.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(DatasetError::RecipeColumns {
            recipe: recipe.to_string(),
            missing,
        });
    }
    Ok(found)
}

fn relabel(col: &Column, name: &str, role: Role) -> Result<Column> {
    let spec = ColumnSpec {
        name: name.to_string(),
        role,
        ..col.spec.clone()
    };
    if col.spec.role == Role::Ignore || role == Role::Ignore {
        col.retyped(spec)
    } else {
        Ok(Column {
            spec,
            cells: col.cells.clone(),
        })
    }
}

/// Maps each row's label through `f` into a new binary column.
fn binarize(col: &Column, name: &str, role: Role, labels: [&str; 2], f: impl Fn(&str) -> Option<bool>) -> Result<Column> {
    let n = col.cells.len();
    let codes = (0..n)
        .map(|i| {
            let t = col.text(i);
            f(&t).map(u32::from).ok_or_else(|| DatasetError::UnknownCategory {
                column: col.spec.name.clone(),
                value: t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Column {
        spec: ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Binary,
            role,
            categories: labels.iter().map(|s| s.to_string()).collect(),
        },
        cells: Cells::Codes(codes),
    })
}

fn law_school(raw: &Dataset) -> Result<Dataset> {
    let cols = resolve(
        raw,
        "law_school",
        &[
            Wanted { name: "gender", aliases: &["gender", "sex", "male"] },
            Wanted { name: "race", aliases: &["race"] },
            Wanted { name: "lsat", aliases: &["lsat", "LSAT"] },
            Wanted { name: "ugpa", aliases: &["ugpa", "UGPA"] },
            Wanted { name: "zfygpa", aliases: &["zfygpa", "ZFYA"] },
        ],
    )?;
    let race = cols[1];
    // multi-valued race codings collapse to White / Non-White
    let race = if race.spec.kind == ColumnKind::Categorical
        && race.spec.categories.len() > 2
        && race.spec.categories.iter().any(|c| c == "White")
    {
        binarize(race, "race", Role::Sensitive, ["Non-White", "White"], |t| Some(t == "White"))?
    } else {
        relabel(race, "race", Role::Sensitive)?
    };
    Dataset::new(vec![
        relabel(cols[0], "gender", Role::Sensitive)?,
        race,
        relabel(cols[2], "lsat", Role::Feature)?,
        relabel(cols[3], "ugpa", Role::Feature)?,
        relabel(cols[4], "zfygpa", Role::Target)?,
    ])
}

fn oulad_bbb(raw: &Dataset) -> Result<Dataset> {
    let cols = resolve(
        raw,
        "oulad_bbb",
        &[
            Wanted { name: "code_module", aliases: &["code_module"] },
            Wanted { name: "gender", aliases: &["gender"] },
            Wanted { name: "disability", aliases: &["disability"] },
            Wanted { name: "highest_education", aliases: &["highest_education"] },
            Wanted { name: "imd_band", aliases: &["imd_band"] },
            Wanted { name: "age_band", aliases: &["age_band"] },
            Wanted { name: "studied_credits", aliases: &["studied_credits"] },
            Wanted { name: "final_result", aliases: &["final_result"] },
        ],
    )?;
    let module = cols[0];
    let rows: Vec<usize> = (0..raw.n_rows()).filter(|&i| module.text(i) == "BBB").collect();
    if rows.is_empty() {
        return Err(DatasetError::ZeroRows);
    }
    let result = binarize(cols[7], "final_result", Role::Target, ["0", "1"], |t| match t {
        "Pass" | "Distinction" | "1" => Some(true),
        "Fail" | "Withdrawn" | "0" => Some(false),
        _ => None,
    })?;
    let subset = Dataset::new(vec![
        relabel(cols[1], "gender", Role::Feature)?,
        relabel(cols[2], "disability", Role::Sensitive)?,
        relabel(cols[3], "highest_education", Role::Feature)?,
        relabel(cols[4], "imd_band", Role::Feature)?,
        relabel(cols[5], "age_band", Role::Feature)?,
        relabel(cols[6], "studied_credits", Role::Feature)?,
        result,
    ])?;
    subset.take_rows(&rows)
}

fn student(raw: &Dataset, key: &str) -> Result<Dataset> {
    let cols = resolve(
        raw,
        key,
        &[
            Wanted { name: "gender", aliases: &["gender", "sex"] },
            Wanted { name: "G3", aliases: &["G3"] },
        ],
    )?;
    let gender_src = cols[0].spec.name.clone();
    let columns = raw
        .columns()
        .iter()
        .map(|c| {
            if c.spec.name == gender_src {
                relabel(c, "gender", Role::Sensitive)
            } else if c.spec.name == "G3" {
                relabel(c, "G3", Role::Target)
            } else if c.spec.role == Role::Ignore {
                Ok(c.clone())
            } else {
                relabel(c, &c.spec.name, Role::Feature)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(columns).map(|d| d.with_dropped(raw.dropped_rows()))
}
