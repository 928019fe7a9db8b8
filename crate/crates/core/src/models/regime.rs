use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ModelError, Result};
use crate::causal::WeightedDag;
use crate::dataset::{EncodedMatrix, Role};
use crate::scm::{LatentScm, MatrixRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeKind {
    Unfair,
    Unaware,
    Counterfactual,
}

impl RegimeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeKind::Unfair => "unfair",
            RegimeKind::Unaware => "unaware",
            RegimeKind::Counterfactual => "counterfactual",
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which columns a predictor may read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    pub level: u8,
    pub excluded: BTreeSet<String>,
    /// Level 2 only: outcomes the latent posterior is computed from.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub latent_inputs: Vec<String>,
}

fn sensitives(data: &EncodedMatrix) -> BTreeSet<String> {
    data.columns
        .iter()
        .filter(|c| c.role == Role::Sensitive)
        .map(|c| c.name.clone())
        .collect()
}

fn target(data: &EncodedMatrix) -> Result<&str> {
    data.columns
        .iter()
        .find(|c| c.role == Role::Target)
        .map(|c| c.name.as_str())
        .ok_or(ModelError::NoTarget)
}

impl Regime {
    pub fn unfair() -> Self {
        Regime {
            kind: RegimeKind::Unfair,
            level: 1,
            excluded: BTreeSet::new(),
            latent_inputs: Vec::new(),
        }
    }

    pub fn unaware(data: &EncodedMatrix) -> Self {
        Regime {
            kind: RegimeKind::Unaware,
            level: 1,
            excluded: sensitives(data),
            latent_inputs: Vec::new(),
        }
    }

    /// Excludes the sensitives, all their descendants in `dag`, and every
    /// column outside the target's connected component. At level 2 the
    /// latent posterior (from `latent`'s outcomes other than the target) is
    /// added as a feature.
    pub fn counterfactual(
        data: &EncodedMatrix,
        dag: &WeightedDag,
        level: u8,
        latent: Option<&LatentScm>,
    ) -> Result<Self> {
        if !matches!(level, 1 | 2) {
            return Err(ModelError::BadLevel(level));
        }
        let sens = sensitives(data);
        let target = target(data)?;
        let present: Vec<&String> = sens.iter().filter(|s| dag.contains(s)).collect();
        let mut excluded = sens.clone();
        excluded.extend(dag.descendants_of_all(&present)?);
        let component = if dag.contains(target) {
            dag.component_of(target)?
        } else {
            BTreeSet::new()
        };
        for c in &data.columns {
            if matches!(c.role, Role::Feature | Role::Sensitive) && !component.contains(&c.name) {
                excluded.insert(c.name.clone());
            }
        }
        let latent_inputs = match (level, latent) {
            (1, _) => Vec::new(),
            (_, Some(m)) => m.outcomes.iter().filter(|o| *o != target).cloned().collect(),
            (_, None) => return Err(ModelError::MissingLatent),
        };
        Ok(Regime {
            kind: RegimeKind::Counterfactual,
            level,
            excluded,
            latent_inputs,
        })
    }

    pub fn name(&self) -> &'static str {
        self.kind.as_str()
    }
}

/// Named numeric inputs for a predictor, one row per instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

impl FeatureTable {
    pub fn new(names: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(ModelError::LengthMismatch {
                expected: values.ncols(),
                got: names.len(),
            });
        }
        Ok(FeatureTable { names, values })
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }
}

/// Column name used for the latent posterior feature.
pub const LATENT_FEATURE: &str = "K";

/// Builds the regime's feature table from an encoded matrix; the target and
/// excluded columns are never read.
pub fn select_features(data: &EncodedMatrix, regime: &Regime, latent: Option<&LatentScm>) -> Result<FeatureTable> {
    let mut names = Vec::new();
    let mut cols = Vec::new();
    if regime.level == 2 && regime.kind == RegimeKind::Counterfactual {
        let m = latent.ok_or(ModelError::MissingLatent)?;
        let observed: Vec<&str> = regime.latent_inputs.iter().map(String::as_str).collect();
        let k = (0..data.n_rows())
            .map(|row| m.posterior_latent(&MatrixRow { matrix: data, row }, &observed))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        names.push(LATENT_FEATURE.to_string());
        cols.push(k);
    }
    for (j, c) in data.columns.iter().enumerate() {
        if matches!(c.role, Role::Feature | Role::Sensitive) && !regime.excluded.contains(&c.name) {
            names.push(c.name.clone());
            cols.push(data.values.column(j).iter().copied().collect());
        }
    }
    if names.is_empty() {
        return Err(ModelError::EmptyFeatures(regime.name()));
    }
    let values = DMatrix::from_fn(data.n_rows(), cols.len(), |i, j| cols[j][i]);
    FeatureTable::new(names, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::causal::{edge, names};

    fn matrix() -> EncodedMatrix {
        let mut m = EncodedMatrix::from_raw(
            &["a", "f1", "f2", "f3", "y"],
            DMatrix::from_fn(6, 5, |i, j| (i * 5 + j) as f64),
        );
        m.columns[0].role = Role::Sensitive;
        m.columns[4].role = Role::Target;
        m
    }

    fn col_names(t: &FeatureTable) -> Vec<&str> {
        t.names.iter().map(String::as_str).collect()
    }

    #[test]
    fn unfair_uses_everything_but_the_target() {
        let t = select_features(&matrix(), &Regime::unfair(), None).unwrap();
        assert_eq!(col_names(&t), vec!["a", "f1", "f2", "f3"]);
    }

    #[test]
    fn unaware_drops_sensitives() {
        let m = matrix();
        let t = select_features(&m, &Regime::unaware(&m), None).unwrap();
        assert_eq!(col_names(&t), vec!["f1", "f2", "f3"]);
    }

    #[test]
    fn counterfactual_drops_descendants_and_disconnected() {
        let m = matrix();
        let dag = WeightedDag::new(
            names(&["a", "f1", "f2", "f3", "y"]),
            vec![edge("a", "f1", 0.5), edge("f1", "y", 0.4), edge("f2", "y", 0.3)],
        )
        .unwrap();
        let r = Regime::counterfactual(&m, &dag, 1, None).unwrap();
        let t = select_features(&m, &r, None).unwrap();
        assert_eq!(col_names(&t), vec!["f2"]);
    }

    #[test]
    fn empty_counterfactual_set_is_an_error() {
        let m = matrix();
        let dag = WeightedDag::new(
            names(&["a", "f1", "f2", "f3", "y"]),
            vec![edge("a", "f1", 0.5), edge("a", "f2", 0.5), edge("a", "f3", 0.5), edge("f1", "y", 0.4)],
        )
        .unwrap();
        let r = Regime::counterfactual(&m, &dag, 1, None).unwrap();
        assert!(matches!(select_features(&m, &r, None), Err(ModelError::EmptyFeatures(_))));
    }

    #[test]
    fn level_two_needs_a_latent_model() {
        let m = matrix();
        let dag = WeightedDag::new(names(&["a", "y"]), vec![edge("a", "y", 1.0)]).unwrap();
        assert!(matches!(
            Regime::counterfactual(&m, &dag, 2, None),
            Err(ModelError::MissingLatent)
        ));
    }
}
