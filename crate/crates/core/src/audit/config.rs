use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::models::{ModelSpec, RegimeKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSource {
    Discover,
    File { path: PathBuf },
}

impl Default for GraphSource {
    fn default() -> Self {
        GraphSource::Discover
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            test_fraction: 0.2,
            seed: 42,
        }
    }
}

fn default_threshold() -> f64 {
    0.1
}

fn default_level() -> u8 {
    1
}

fn default_regimes() -> Vec<RegimeKind> {
    vec![RegimeKind::Unfair, RegimeKind::Unaware, RegimeKind::Counterfactual]
}

/// One audit run. Relative paths resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Label used in tables; defaults to the recipe key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dataset: PathBuf,
    pub schema: PathBuf,
    pub recipe: String,
    /// Overrides which columns are sensitive after the recipe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensitive: Option<Vec<String>>,
    #[serde(default)]
    pub graph: GraphSource,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_level")]
    pub level: u8,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<RegimeKind>,
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub split: SplitConfig,
    /// Level 2: outcomes of the latent model (defaults to the sensitives' descendants).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latent_outcomes: Option<Vec<String>>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl AuditConfig {
    pub fn from_json_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self, AuditError> {
        let mut cfg: AuditConfig =
            serde_json::from_str(text).map_err(|e| AuditError::Config(format!("invalid config: {e}")))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AuditError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| AuditError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json_str(&text, base)
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        let bad = |m: &str| Err(AuditError::Config(m.to_string()));
        if !(self.threshold >= 0.0) {
            return bad("threshold must be >= 0");
        }
        if !matches!(self.level, 1 | 2) {
            return bad("level must be 1 or 2");
        }
        if self.level == 2 && self.recipe != "law_school" {
            return bad("level 2 is only supported with the law_school recipe");
        }
        if self.regimes.is_empty() {
            return bad("at least one regime is required");
        }
        if self.models.is_empty() {
            return bad("at least one model is required");
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.regimes {
            if !seen.insert(r) {
                return bad("regimes must be distinct");
            }
        }
        let mut kinds = std::collections::BTreeSet::new();
        for m in &self.models {
            m.validate().map_err(|e| AuditError::Config(e.to_string()))?;
            if !kinds.insert(m.kind) {
                return bad("model kinds must be distinct");
            }
        }
        if !(self.split.test_fraction > 0.0 && self.split.test_fraction < 1.0) {
            return bad("split.test_fraction must lie in (0, 1)");
        }
        if let Some(s) = &self.sensitive {
            if s.is_empty() {
                return bad("sensitive, when given, must name at least one column");
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.recipe)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"dataset": "d.csv", "schema": "s.json", "recipe": "identity", "models": [{"kind": "linear"}]}"#;

    #[test]
    fn defaults_are_filled() {
        let c = AuditConfig::from_json_str(MINIMAL, "/tmp").unwrap();
        assert_eq!(c.threshold, 0.1);
        assert_eq!(c.level, 1);
        assert_eq!(c.regimes.len(), 3);
        assert_eq!(c.split, SplitConfig::default());
        assert_eq!(c.graph, GraphSource::Discover);
        assert_eq!(c.models[0].hidden, 32);
        assert_eq!(c.resolve(Path::new("d.csv")), PathBuf::from("/tmp/d.csv"));
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        for text in [
            r#"{"dataset": "d", "schema": "s", "recipe": "identity", "models": []}"#,
            r#"{"dataset": "d", "schema": "s", "recipe": "identity", "models": [{"kind": "linear"}], "threshold": -1}"#,
            r#"{"dataset": "d", "schema": "s", "recipe": "student_mat", "level": 2, "models": [{"kind": "linear"}]}"#,
            r#"{"dataset": "d", "schema": "s", "recipe": "identity", "models": [{"kind": "linear"}], "regimes": []}"#,
            r#"{"dataset": "d", "schema": "s", "recipe": "identity", "models": [{"kind": "linear"}], "bogus": 1}"#,
            "not json",
        ] {
            assert!(matches!(AuditConfig::from_json_str(text, "."), Err(AuditError::Config(_))), "{text}");
        }
    }

    #[test]
    fn graph_file_source_parses() {
        let c = AuditConfig::from_json_str(
            r#"{"dataset": "d", "schema": "s", "recipe": "law_school", "level": 2,
                "graph": {"source": "file", "path": "g.json"}, "models": [{"kind": "linear"}]}"#,
            ".",
        )
        .unwrap();
        assert_eq!(c.graph, GraphSource::File { path: "g.json".into() });
    }
}
