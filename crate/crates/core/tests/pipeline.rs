use std::path::{Path, PathBuf};

use cfair::audit::{emit_report, GraphSource, Status};
use cfair::models::{ModelKind, ModelSpec, RegimeKind};
use cfair::{run_audit, AuditConfig, AuditError};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).join("audit.json")
}

fn config(name: &str) -> AuditConfig {
    AuditConfig::load(fixture(name)).unwrap()
}

fn stage_of(err: AuditError) -> String {
    match err {
        AuditError::Stage { stage, .. } => stage,
        other => panic!("expected a stage error, got {other}"),
    }
}

#[test]
fn student_fixture_report_is_complete() {
    let cfg = config("student");
    let r = run_audit(&cfg).unwrap();
    assert_eq!(r.dataset.task, "regression");
    assert_eq!(r.dataset.sensitives, vec!["gender"]);
    assert_eq!(r.dataset.n_train + r.dataset.n_test, r.dataset.n_rows);
    assert_eq!(r.cells.len(), 6);
    let keys: Vec<(String, String)> = r.cells.iter().map(|c| (c.regime.clone(), c.model.clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);

    let cf = &r.regimes["counterfactual"];
    assert!(cf.excluded.contains(&"gender".to_string()));
    for f in &cf.features {
        let desc = r.dag.descendants("gender").unwrap();
        assert!(!desc.contains(f), "{f} descends from gender");
    }
    assert!(!r.regimes["unaware"].features.contains(&"gender".to_string()));
    assert!(r.regimes["unfair"].features.contains(&"gender".to_string()));

    for c in &r.cells {
        assert_eq!(c.status, Status::Ok);
        assert_eq!(c.metrics["abroca"].status, Status::Skipped);
        assert!(c.metrics["mse"].value.unwrap() > 0.0);
        assert!(c.metrics["wd"].value.unwrap() >= 0.0);
    }
    assert_eq!(r.headline.model.as_deref(), Some("linear"));
    assert_eq!(r.graph.edges_total, r.graph.edges_kept + r.graph.edges_pruned);
}

#[test]
fn oulad_fixture_reports_classification_metrics() {
    let r = run_audit(&config("oulad")).unwrap();
    assert_eq!(r.dataset.task, "classification");
    assert!(r.dataset.n_rows < r.dataset.n_loaded, "BBB subset is smaller than the file");
    assert!(r.dataset.dropped_missing > 0);
    assert!(r.notes.contains_key("target_binarization"));
    let cf = &r.regimes["counterfactual"];
    assert!(cf.excluded.contains(&"disability".to_string()));
    for c in &r.cells {
        for m in ["abroca", "madd", "accuracy", "auroc"] {
            let v = c.metrics[m].value.unwrap_or_else(|| panic!("{} {} {m}", c.regime, c.model));
            assert!(v.is_finite());
        }
        assert!(c.metrics["madd"].value.unwrap() <= 2.0);
        assert!(c.metrics["abroca"].value.unwrap() <= 1.0);
    }
    assert_eq!(r.headline.model.as_deref(), Some("mlp"));
}

#[test]
fn law_fixture_uses_the_latent_feature_at_level_two() {
    let r = run_audit(&config("law")).unwrap();
    let latent = r.latent.as_ref().unwrap();
    assert!(latent.converged);
    assert_eq!(latent.observed_at_prediction, vec!["ugpa", "lsat"]);
    assert_eq!(r.regimes["counterfactual"].features, vec!["K"]);
    assert_eq!(r.regimes["counterfactual"].level, 2);
    assert!(r.graph.source.starts_with("file:"));
    let cf = r.cell("counterfactual", "linear").unwrap();
    assert!(cf.metrics["cf_max_abs"].value.unwrap() < 1e-12);
    assert!(r.metric("unfair", "linear", "cf_consistency").unwrap() > 0.01);
}

#[test]
fn emitted_files_are_well_formed() {
    let r = run_audit(&config("student")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_report(&r, dir.path()).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for f in ["report.json", "tables.csv", "dag.dot", "dag.json"] {
        assert!(names.contains(&f.to_string()), "{f} missing");
    }
    let svgs: Vec<&PathBuf> = written.iter().filter(|p| p.extension().unwrap() == "svg").collect();
    assert_eq!(svgs.len(), 3, "one figure per regime for the single gender pair");
    for p in svgs {
        let text = std::fs::read_to_string(p).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let paths = doc.descendants().filter(|n| n.has_tag_name("path")).count();
        assert_eq!(paths, 2);
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], "1");
    assert!(json["config"]["models"].is_array());
    let table = std::fs::read_to_string(dir.path().join("tables.csv")).unwrap();
    assert!(table.starts_with("dataset,regime,model,metric,value,status,reason"));
    assert!(table.contains("student_fixture,counterfactual,linear,wd,"));
    let dot = std::fs::read_to_string(dir.path().join("dag.dot")).unwrap();
    assert!(dot.contains("\"gender\" [style=filled"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for name in ["student", "oulad"] {
        let a = run_audit(&config(name)).unwrap().to_json();
        let b = run_audit(&config(name)).unwrap().to_json();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn unsupported_model_task_pairs_are_skipped_with_a_reason() {
    let mut cfg = config("student");
    cfg.models.push(ModelSpec::new(ModelKind::Logistic));
    cfg.regimes = vec![RegimeKind::Unfair];
    let r = run_audit(&cfg).unwrap();
    let cell = r.cell("unfair", "logistic").unwrap();
    assert_eq!(cell.status, Status::Skipped);
    assert!(cell.reason.as_ref().unwrap().contains("regression"));
    assert!(cell.metrics.values().all(|m| m.value.is_none()));
}

#[test]
fn failures_name_their_stage() {
    let mut cfg = config("student");
    cfg.recipe = "adult".into();
    assert_eq!(stage_of(run_audit(&cfg).unwrap_err()), "dataset/apply_recipe");

    let mut cfg = config("student");
    cfg.dataset = "missing.csv".into();
    assert_eq!(stage_of(run_audit(&cfg).unwrap_err()), "dataset/load");

    let mut cfg = config("student");
    cfg.schema = "../law/schema.json".into();
    assert_eq!(stage_of(run_audit(&cfg).unwrap_err()), "dataset/load");

    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    std::fs::write(&graph, r#"{"nodes": ["gender", "nope"], "edges": []}"#).unwrap();
    let mut cfg = config("student");
    cfg.graph = GraphSource::File { path: graph };
    assert_eq!(stage_of(run_audit(&cfg).unwrap_err()), "causal/load_graph");

    let mut cfg = config("student");
    cfg.sensitive = Some(vec!["shoe_size".into()]);
    assert_eq!(stage_of(run_audit(&cfg).unwrap_err()), "dataset/sensitive");
}

#[test]
fn invalid_configs_fail_before_any_work() {
    let mut cfg = config("student");
    cfg.level = 2;
    assert!(matches!(run_audit(&cfg), Err(AuditError::Config(_))));
    let mut cfg = config("student");
    cfg.threshold = -0.5;
    let err = run_audit(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn sensitive_override_changes_the_audited_attribute() {
    let mut cfg = config("student");
    cfg.sensitive = Some(vec!["school".into()]);
    cfg.models = vec![ModelSpec::new(ModelKind::Linear)];
    let r = run_audit(&cfg).unwrap();
    assert_eq!(r.dataset.sensitives, vec!["school"]);
    assert!(r.regimes["unaware"].features.contains(&"gender".to_string()));
    assert!(r.headline.regimes["unfair"].wd_pair.as_ref().unwrap().starts_with("school:"));
}

#[test]
fn higher_threshold_prunes_more_edges() {
    let mut low = config("student");
    low.threshold = 0.0;
    low.models = vec![ModelSpec::new(ModelKind::Linear)];
    let mut high = low.clone();
    high.threshold = 0.3;
    let a = run_audit(&low).unwrap();
    let b = run_audit(&high).unwrap();
    assert_eq!(a.graph.edges_total, b.graph.edges_total);
    assert!(b.graph.edges_kept < a.graph.edges_kept);
    assert!(b.graph.edges.iter().all(|e| e.weight.abs() >= 0.3));
}

#[test]
fn shipped_law_school_file_loads_every_row() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/law");
    let csv = dir.join("law_school.csv");
    if !csv.exists() {
        return;
    }
    let schema = cfair::dataset::load_schema(dir.join("schema.json")).unwrap();
    let raw = cfair::load_dataset(&csv, &schema).unwrap();
    assert_eq!(raw.n_rows(), 21_791);
    assert_eq!(raw.dropped_rows(), 0);
    let ds = cfair::dataset::apply_recipe(&raw, "law_school").unwrap();
    assert_eq!(ds.sensitive_names(), vec!["gender", "race"]);
    assert_eq!(ds.target().spec.name, "zfygpa");
}
