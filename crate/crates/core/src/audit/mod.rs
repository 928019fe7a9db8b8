//! End-to-end audit: data, graph, SCM, regimes x models, metrics, report.

mod config;
mod report;
mod svg;

use std::collections::BTreeMap;
use std::fmt::Display;

use rayon::prelude::*;
use thiserror::Error;

use crate::causal::{direct_lingam, WeightedDag};
use crate::dataset::{
    apply_recipe, load_dataset, load_schema, split, Cells, Column, Dataset, EncodedMatrix, Encoder, Role, Task,
};
use crate::metrics::{
    abroca, cf_deltas, kde, linspace, madd, mmd_rbf, performance, regression_grid, wasserstein1, KdeCurve,
};
use crate::models::{select_features, train, FeatureTable, ModelKind, ModelSpec, Regime, RegimeKind};
use crate::scm::{fit_latent_scm, fit_scm, Intervention, LatentScm, MatrixRow, Scm};

pub use config::{AuditConfig, GraphSource, SplitConfig};
pub use report::{
    emit_report, CellReport, DatasetStats, FairnessReport, GraphSummary, Headline, HeadlineEntry, KdePlot,
    LatentSummary, MetricValue, PairMetrics, RegimeSummary, Status, SCHEMA_VERSION,
};
pub use svg::render_kde_svg;

use report::{pair_key, slug};

const KDE_POINTS: usize = 512;

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Stage { stage: String, message: String },
}

impl AuditError {
    pub fn stage(stage: &str, message: impl Display) -> Self {
        AuditError::Stage {
            stage: stage.to_string(),
            message: message.to_string(),
        }
    }

    /// The pipeline stage that failed, if any.
    pub fn stage_name(&self) -> Option<&str> {
        match self {
            AuditError::Stage { stage, .. } => Some(stage),
            AuditError::Config(_) => None,
        }
    }

    /// Process exit code: 1 for configuration errors, 2 for runtime stage errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            AuditError::Config(_) => 1,
            AuditError::Stage { .. } => 2,
        }
    }
}

fn at<E: Display>(stage: &'static str) -> impl Fn(E) -> AuditError {
    move |e| AuditError::stage(stage, e)
}

fn raw_values(col: &Column) -> Vec<f64> {
    match &col.cells {
        Cells::Codes(v) => v.iter().map(|&k| k as f64).collect(),
        Cells::Values(v) => v.clone(),
        Cells::Text(_) => unreachable!("targets are never ignored columns"),
    }
}

fn codes(ds: &Dataset, name: &str) -> Result<Vec<u32>, AuditError> {
    match ds.column(name).map(|c| &c.cells) {
        Some(Cells::Codes(v)) => Ok(v.clone()),
        _ => Err(AuditError::stage(
            "audit/groups",
            format!("sensitive attribute `{name}` must be binary or categorical"),
        )),
    }
}

fn override_sensitives(ds: Dataset, names: &[String]) -> Result<Dataset, AuditError> {
    for n in names {
        if ds.column(n).is_none() {
            return Err(AuditError::stage("dataset/sensitive", format!("unknown column `{n}`")));
        }
    }
    let cols = ds
        .columns()
        .iter()
        .map(|c| {
            let listed = names.contains(&c.spec.name);
            let role = match (listed, c.spec.role) {
                (true, _) => Role::Sensitive,
                (false, Role::Sensitive) => Role::Feature,
                (false, r) => r,
            };
            if role == c.spec.role {
                return Ok(c.clone());
            }
            let mut spec = c.spec.clone();
            spec.role = role;
            c.retyped(spec)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(at("dataset/sensitive"))?;
    Dataset::new(cols).map_err(at("dataset/sensitive"))
}

/// How counterfactual test rows are produced.
enum Generator<'a> {
    Linear { scm: &'a Scm, cols: Vec<usize> },
    Latent { model: &'a LatentScm },
}

/// Factual test rows paired with their counterfactuals, one pair per
/// (instance, sensitive attribute, alternative value).
struct CfBatch {
    factual: EncodedMatrix,
    counterfactual: EncodedMatrix,
}

fn counterfactual_batch(
    x: &EncodedMatrix,
    test: &Dataset,
    sensitives: &[String],
    generator: &Generator,
) -> Result<CfBatch, AuditError> {
    let stage = "scm/counterfactual";
    let mut fact_rows = Vec::new();
    let mut cf_rows = Vec::new();
    let sens: Vec<(usize, Vec<u32>, usize)> = sensitives
        .iter()
        .map(|s| {
            let j = x.index_of(s).ok_or_else(|| AuditError::stage(stage, format!("`{s}` not encoded")))?;
            let n_cat = x.columns[j].categories.len();
            Ok((j, codes(test, s)?, n_cat))
        })
        .collect::<Result<_, AuditError>>()?;
    for i in 0..x.n_rows() {
        let row = x.row(i);
        for (si, (j, factual, n_cat)) in sens.iter().enumerate() {
            for v in 0..*n_cat as u32 {
                if v == factual[i] {
                    continue;
                }
                let value = x.columns[*j].encode_value(v as f64);
                let cf = match generator {
                    Generator::Linear { scm, cols } => {
                        if scm.graph().contains(&sensitives[si]) {
                            let iv = Intervention {
                                node: sensitives[si].clone(),
                                value,
                            };
                            scm.counterfactual_row(&row, cols, &iv).map_err(at(stage))?
                        } else {
                            let mut out = row.clone();
                            out[*j] = value;
                            out
                        }
                    }
                    Generator::Latent { model } => {
                        let shifted = model
                            .counterfactual_outcomes(&MatrixRow { matrix: x, row: i }, &sensitives[si], value)
                            .map_err(at(stage))?;
                        let mut out = row.clone();
                        out[*j] = value;
                        for (name, v) in shifted {
                            out[x.index_of(&name).expect("outcome is encoded")] = v;
                        }
                        out
                    }
                };
                fact_rows.push(row.clone());
                cf_rows.push(cf);
            }
        }
    }
    let to_matrix = |rows: &[Vec<f64>]| EncodedMatrix {
        values: nalgebra::DMatrix::from_fn(rows.len(), x.columns.len(), |i, j| rows[i][j]),
        columns: x.columns.clone(),
    };
    Ok(CfBatch {
        factual: to_matrix(&fact_rows),
        counterfactual: to_matrix(&cf_rows),
    })
}

struct PreparedRegime {
    regime: Regime,
    train: FeatureTable,
    test: FeatureTable,
    factual: FeatureTable,
    counterfactual: FeatureTable,
}

/// Test-split groups for one unordered pair of values of one sensitive attribute.
struct GroupPair {
    attribute: String,
    value_a: String,
    value_b: String,
    rows_a: Vec<usize>,
    rows_b: Vec<usize>,
}

impl GroupPair {
    fn key(&self) -> String {
        pair_key(&self.attribute, &self.value_a, &self.value_b)
    }
}

fn group_pairs(test: &Dataset, sensitives: &[String]) -> Result<Vec<GroupPair>, AuditError> {
    let mut out = Vec::new();
    for s in sensitives {
        let c = codes(test, s)?;
        let cats = &test.column(s).expect("sensitive column exists").spec.categories;
        for a in 0..cats.len() {
            for b in (a + 1)..cats.len() {
                let rows_a: Vec<usize> = (0..c.len()).filter(|&i| c[i] as usize == a).collect();
                let rows_b: Vec<usize> = (0..c.len()).filter(|&i| c[i] as usize == b).collect();
                if !rows_a.is_empty() && !rows_b.is_empty() {
                    out.push(GroupPair {
                        attribute: s.clone(),
                        value_a: cats[a].clone(),
                        value_b: cats[b].clone(),
                        rows_a,
                        rows_b,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn pick(v: &[f64], rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&i| v[i]).collect()
}

fn max_over<'a>(items: impl Iterator<Item = (&'a str, Option<f64>)>) -> Option<(String, f64)> {
    let mut best: Option<(String, f64)> = None;
    for (k, v) in items {
        if let Some(v) = v {
            if best.as_ref().is_none_or(|b| v > b.1) {
                best = Some((k.to_string(), v));
            }
        }
    }
    best
}

struct Context<'a> {
    task: Task,
    y_train: &'a [f64],
    y_test: &'a [f64],
    pairs: &'a [GroupPair],
}

fn metric_names(task: Task) -> &'static [&'static str] {
    match task {
        Task::Regression => &["wd", "mmd", "abroca", "madd", "cf_consistency", "cf_max_abs", "mse", "rmse"],
        Task::Classification => &[
            "wd",
            "mmd",
            "abroca",
            "madd",
            "cf_consistency",
            "cf_max_abs",
            "accuracy",
            "auroc",
        ],
    }
}

fn skipped_cell(regime: &PreparedRegime, spec: &ModelSpec, task: Task, reason: String) -> CellReport {
    CellReport {
        regime: regime.regime.name().to_string(),
        model: spec.kind.to_string(),
        status: Status::Skipped,
        reason: Some(reason.clone()),
        features: regime.train.names.clone(),
        metrics: metric_names(task)
            .iter()
            .map(|m| (m.to_string(), MetricValue::skipped(reason.clone())))
            .collect(),
        pairs: BTreeMap::new(),
        diverged: false,
    }
}

fn run_cell(
    ctx: &Context,
    prepared: &PreparedRegime,
    spec: &ModelSpec,
) -> Result<(CellReport, Option<Vec<f64>>), AuditError> {
    if !spec.supports(ctx.task) {
        let reason = format!("{} models are not trained for {} tasks", spec.kind, ctx.task);
        return Ok((skipped_cell(prepared, spec, ctx.task, reason), None));
    }
    let predictor = train(spec, &prepared.train, ctx.y_train, ctx.task)
        .map_err(at("models/train"))?
        .with_regime(prepared.regime.clone());
    let preds = predictor.predict(&prepared.test).map_err(at("models/predict"))?;
    let mut metrics = BTreeMap::new();
    let mut pairs = BTreeMap::new();
    let classification = ctx.task == Task::Classification;
    for g in ctx.pairs {
        let (pa, pb) = (pick(&preds, &g.rows_a), pick(&preds, &g.rows_b));
        let (abroca_v, madd_v) = if classification {
            let la: Vec<bool> = g.rows_a.iter().map(|&i| ctx.y_test[i] == 1.0).collect();
            let lb: Vec<bool> = g.rows_b.iter().map(|&i| ctx.y_test[i] == 1.0).collect();
            let ab = match abroca(&pa, &la, &pb, &lb) {
                Ok(v) => MetricValue::ok(v),
                Err(e) => MetricValue::skipped(format!("undefined: {e}")),
            };
            (Some(ab), Some(MetricValue::ok(madd(&pa, &pb).map_err(at("metrics/madd"))?)))
        } else {
            (None, None)
        };
        pairs.insert(
            g.key(),
            PairMetrics {
                attribute: g.attribute.clone(),
                value_a: g.value_a.clone(),
                value_b: g.value_b.clone(),
                n_a: pa.len(),
                n_b: pb.len(),
                wd: wasserstein1(&pa, &pb).map_err(at("metrics/wasserstein1"))?,
                mmd: mmd_rbf(&pa, &pb).map_err(at("metrics/mmd_rbf"))?,
                abroca: abroca_v,
                madd: madd_v,
            },
        );
    }
    let no_pairs = "no sensitive value pair has both groups in the test split";
    let headline = |f: &dyn Fn(&PairMetrics) -> Option<f64>| {
        max_over(pairs.iter().map(|(k, p)| (k.as_str(), f(p))))
            .map(|(_, v)| MetricValue::ok(v))
            .unwrap_or_else(|| MetricValue::skipped(no_pairs))
    };
    metrics.insert("wd".to_string(), headline(&|p| Some(p.wd)));
    metrics.insert("mmd".to_string(), headline(&|p| Some(p.mmd)));
    if classification {
        let abroca_all = headline(&|p| p.abroca.as_ref().and_then(|m| m.value));
        metrics.insert("abroca".to_string(), abroca_all);
        metrics.insert("madd".to_string(), headline(&|p| p.madd.as_ref().and_then(|m| m.value)));
    } else {
        let reason = "defined for classification tasks only";
        metrics.insert("abroca".to_string(), MetricValue::skipped(reason));
        metrics.insert("madd".to_string(), MetricValue::skipped(reason));
    }
    if prepared.factual.n_rows() > 0 {
        let d = cf_deltas(&predictor, &prepared.factual, &prepared.counterfactual).map_err(at("metrics/cf_consistency"))?;
        metrics.insert("cf_consistency".to_string(), MetricValue::ok(d.iter().sum::<f64>() / d.len() as f64));
        metrics.insert("cf_max_abs".to_string(), MetricValue::ok(d.iter().copied().fold(0.0, f64::max)));
    } else {
        let reason = "no counterfactual pairs";
        metrics.insert("cf_consistency".to_string(), MetricValue::skipped(reason));
        metrics.insert("cf_max_abs".to_string(), MetricValue::skipped(reason));
    }
    for (k, v) in performance(&preds, ctx.y_test, ctx.task).map_err(at("metrics/performance"))? {
        metrics.insert(k, MetricValue::ok(v));
    }
    Ok((
        CellReport {
            regime: prepared.regime.name().to_string(),
            model: spec.kind.to_string(),
            status: Status::Ok,
            reason: None,
            features: prepared.train.names.clone(),
            metrics,
            pairs,
            diverged: predictor.diverged,
        },
        Some(preds),
    ))
}

fn discover_graph(x: &EncodedMatrix) -> Result<(WeightedDag, Vec<String>), AuditError> {
    let constant: Vec<String> = x.constant_columns().iter().map(|s| s.to_string()).collect();
    let names: Vec<&str> = x
        .columns
        .iter()
        .filter(|c| !c.constant)
        .map(|c| c.name.as_str())
        .collect();
    let sub = x.select(&names).expect("columns exist");
    let (dag, _) = direct_lingam(&sub).map_err(at("causal/discover"))?;
    Ok((dag, constant))
}

fn load_graph(path: &std::path::Path, x: &EncodedMatrix) -> Result<WeightedDag, AuditError> {
    let dag = WeightedDag::load(path).map_err(at("causal/load_graph"))?;
    if let Some(missing) = dag.nodes().iter().find(|n| x.index_of(n).is_none()) {
        return Err(AuditError::stage(
            "causal/load_graph",
            format!("graph node `{missing}` is not a dataset column"),
        ));
    }
    Ok(dag)
}

/// Runs the full audit described by `cfg`.
pub fn run_audit(cfg: &AuditConfig) -> Result<FairnessReport, AuditError> {
    cfg.validate()?;
    let mut warnings = Vec::new();

    log::info!("loading {}", cfg.dataset.display());
    let schema = load_schema(cfg.resolve(&cfg.schema)).map_err(at("dataset/load_schema"))?;
    let raw = load_dataset(cfg.resolve(&cfg.dataset), &schema).map_err(at("dataset/load"))?;
    let mut ds = apply_recipe(&raw, &cfg.recipe).map_err(at("dataset/apply_recipe"))?;
    if let Some(s) = &cfg.sensitive {
        ds = override_sensitives(ds, s)?;
    }
    let task = ds.task();
    let sensitives = ds.sensitive_names();
    let target = ds.target().spec.name.clone();
    let (train_ds, test_ds) = split(&ds, cfg.split.test_fraction, cfg.split.seed).map_err(at("dataset/split"))?;
    let encoder = Encoder::fit(&train_ds).map_err(at("dataset/encode"))?;
    let x_train = encoder.transform(&train_ds).map_err(at("dataset/encode"))?;
    let x_test = encoder.transform(&test_ds).map_err(at("dataset/encode"))?;

    log::info!("building causal graph");
    let (full, excluded_constant, source) = match &cfg.graph {
        GraphSource::Discover => {
            let (g, c) = discover_graph(&x_train)?;
            (g, c, "discover".to_string())
        }
        GraphSource::File { path } => (
            load_graph(&cfg.resolve(path), &x_train)?,
            Vec::new(),
            format!("file:{}", path.display()),
        ),
    };
    if !excluded_constant.is_empty() {
        warnings.push(format!("constant columns left out of discovery: {}", excluded_constant.join(", ")));
    }
    let dag = full.threshold_edges(cfg.threshold);
    for s in &sensitives {
        if !dag.contains(s) {
            warnings.push(format!("sensitive attribute `{s}` is not in the graph"));
        }
    }
    if dag.contains(&target) && dag.parents(&target).is_empty() && dag.children(&target).is_empty() {
        warnings.push(format!("target `{target}` has no edges after thresholding"));
    }

    log::info!("fitting structural equations");
    let scm = fit_scm(&dag, &x_train).map_err(at("scm/fit"))?;
    let latent = if cfg.level == 2 {
        let outcomes: Vec<String> = match &cfg.latent_outcomes {
            Some(o) => o.clone(),
            None => {
                let present: Vec<&String> = sensitives.iter().filter(|s| dag.contains(s)).collect();
                let desc = dag.descendants_of_all(&present).map_err(at("scm/fit_latent"))?;
                dag.nodes().iter().filter(|n| desc.contains(*n)).cloned().collect()
            }
        };
        let o: Vec<&str> = outcomes.iter().map(String::as_str).collect();
        let s: Vec<&str> = sensitives.iter().map(String::as_str).collect();
        let m = fit_latent_scm(&x_train, &o, &s).map_err(at("scm/fit_latent"))?;
        if !m.converged {
            warnings.push("latent model EM hit the iteration cap before converging".to_string());
        }
        Some(m)
    } else {
        None
    };

    log::info!("generating counterfactual test rows");
    let generator = match &latent {
        Some(model) => Generator::Latent { model },
        None => Generator::Linear {
            scm: &scm,
            cols: scm.node_columns(&x_test).map_err(at("scm/counterfactual"))?,
        },
    };
    let batch = counterfactual_batch(&x_test, &test_ds, &sensitives, &generator)?;

    let mut regimes: Vec<Regime> = Vec::new();
    let mut kinds = cfg.regimes.clone();
    kinds.sort_by_key(|k| k.as_str());
    for kind in kinds {
        regimes.push(match kind {
            RegimeKind::Unfair => Regime::unfair(),
            RegimeKind::Unaware => Regime::unaware(&x_train),
            RegimeKind::Counterfactual => {
                Regime::counterfactual(&x_train, &dag, cfg.level, latent.as_ref()).map_err(at("models/select_features"))?
            }
        });
    }
    let prepared = regimes
        .into_iter()
        .map(|regime| {
            let sel = |m: &EncodedMatrix| select_features(m, &regime, latent.as_ref()).map_err(at("models/select_features"));
            Ok(PreparedRegime {
                train: sel(&x_train)?,
                test: sel(&x_test)?,
                factual: sel(&batch.factual)?,
                counterfactual: sel(&batch.counterfactual)?,
                regime,
            })
        })
        .collect::<Result<Vec<_>, AuditError>>()?;

    let y_train = raw_values(train_ds.target());
    let y_test = raw_values(test_ds.target());
    let pairs = group_pairs(&test_ds, &sensitives)?;
    let ctx = Context {
        task,
        y_train: &y_train,
        y_test: &y_test,
        pairs: &pairs,
    };
    let mut specs = cfg.models.clone();
    specs.sort_by_key(|s| s.kind.as_str());
    let jobs: Vec<(usize, &ModelSpec)> = (0..prepared.len())
        .flat_map(|r| specs.iter().map(move |s| (r, s)))
        .collect();
    log::info!("training {} regime x model cells", jobs.len());
    let results = jobs
        .par_iter()
        .map(|&(r, spec)| run_cell(&ctx, &prepared[r], spec).map(|(c, p)| (r, c, p)))
        .collect::<Result<Vec<_>, AuditError>>()?;

    for (_, c, _) in &results {
        if c.diverged {
            warnings.push(format!("{} / {}: mlp training diverged", c.regime, c.model));
        }
    }

    let preferred = match task {
        Task::Regression => ModelKind::Linear,
        Task::Classification => ModelKind::Mlp,
    };
    let headline_model = results
        .iter()
        .find(|(_, c, _)| c.model == preferred.as_str() && c.status == Status::Ok)
        .or_else(|| results.iter().find(|(_, c, _)| c.status == Status::Ok))
        .map(|(_, c, _)| c.model.clone());

    let mut headline = Headline {
        model: headline_model.clone(),
        regimes: BTreeMap::new(),
    };
    let mut plots = Vec::new();
    for (r, cell, preds) in &results {
        if Some(&cell.model) != headline_model.as_ref() {
            continue;
        }
        let best = |f: &dyn Fn(&PairMetrics) -> f64| max_over(cell.pairs.iter().map(|(k, p)| (k.as_str(), Some(f(p)))));
        let wd = best(&|p| p.wd);
        let mmd = best(&|p| p.mmd);
        headline.regimes.insert(
            cell.regime.clone(),
            HeadlineEntry {
                wd: wd.as_ref().map(|b| b.1),
                mmd: mmd.as_ref().map(|b| b.1),
                wd_pair: wd.map(|b| b.0),
                mmd_pair: mmd.map(|b| b.0),
            },
        );
        let preds = preds.as_ref().expect("ok cells carry predictions");
        for g in &pairs {
            let (pa, pb) = (pick(preds, &g.rows_a), pick(preds, &g.rows_b));
            let grid = match task {
                Task::Classification => linspace(0.0, 1.0, KDE_POINTS),
                Task::Regression => regression_grid(&[&pa, &pb], KDE_POINTS).map_err(at("metrics/kde"))?,
            };
            let curves: Vec<(String, KdeCurve)> = vec![
                (g.value_a.clone(), kde(&pa, &grid).map_err(at("metrics/kde"))?),
                (g.value_b.clone(), kde(&pb, &grid).map_err(at("metrics/kde"))?),
            ];
            let regime_name = prepared[*r].regime.name();
            plots.push(KdePlot {
                file_name: format!(
                    "kde_{}_{}.svg",
                    regime_name,
                    slug(&format!("{}_{}_vs_{}", g.attribute, g.value_a, g.value_b))
                ),
                title: format!("{regime_name}: {} ({} vs {})", g.attribute, g.value_a, g.value_b),
                curves,
            });
        }
    }

    let mut group_frequencies = BTreeMap::new();
    for s in &sensitives {
        if let Some(f) = ds.group_frequencies(s) {
            group_frequencies.insert(s.clone(), f);
        }
    }
    let regimes_summary = prepared
        .iter()
        .map(|p| {
            (
                p.regime.name().to_string(),
                RegimeSummary {
                    level: p.regime.level,
                    excluded: p.regime.excluded.iter().cloned().collect(),
                    features: p.train.names.clone(),
                },
            )
        })
        .collect();
    let latent_summary = latent.as_ref().map(|m| {
        let observed = prepared
            .iter()
            .find(|p| p.regime.kind == RegimeKind::Counterfactual)
            .map(|p| p.regime.latent_inputs.clone())
            .unwrap_or_default();
        LatentSummary {
            outcomes: m.outcomes.clone(),
            sensitives: m.sensitives.clone(),
            observed_at_prediction: observed,
            loadings: m.outcomes.iter().cloned().zip(m.loadings.iter().copied()).collect(),
            noise_var: m.outcomes.iter().cloned().zip(m.noise_var.iter().copied()).collect(),
            iterations: m.trace.len() - 1,
            converged: m.converged,
            log_likelihood: m.final_log_likelihood(),
        }
    });

    let mut notes = BTreeMap::new();
    notes.insert(
        "counterfactuals".to_string(),
        if cfg.level == 2 {
            "one-factor linear-Gaussian latent model fitted by EM (approximation); counterfactual outcomes hold the latent factor and residuals fixed".to_string()
        } else {
            "point counterfactuals from least-squares refits of the thresholded graph, residuals held fixed".to_string()
        },
    );
    notes.insert(
        "mmd".to_string(),
        "square root of the biased V-statistic MMD^2, RBF kernel, median-heuristic bandwidth".to_string(),
    );
    notes.insert(
        "grouping".to_string(),
        "test predictions partitioned by factual sensitive value; headline values are the maximum over value pairs".to_string(),
    );
    notes.insert("threshold_rule".to_string(), "edges with |weight| < threshold are removed".to_string());
    notes.insert("accuracy_threshold".to_string(), "0.5".to_string());
    if cfg.recipe == "oulad_bbb" {
        notes.insert(
            "target_binarization".to_string(),
            "Pass, Distinction -> 1; Fail, Withdrawn -> 0".to_string(),
        );
    }
    let kde_files = plots.iter().map(|p| p.file_name.clone()).collect();
    let edges_total = full.edges().len();
    let edges_kept = dag.edges().len();

    Ok(FairnessReport {
        schema_version: SCHEMA_VERSION.to_string(),
        config: cfg.clone(),
        dataset: DatasetStats {
            name: cfg.label().to_string(),
            recipe: cfg.recipe.clone(),
            task: task.to_string(),
            target,
            sensitives: sensitives.clone(),
            n_loaded: raw.n_rows(),
            dropped_missing: raw.dropped_rows(),
            n_rows: ds.n_rows(),
            n_train: train_ds.n_rows(),
            n_test: test_ds.n_rows(),
            group_frequencies,
        },
        graph: GraphSummary {
            source,
            threshold: cfg.threshold,
            nodes: dag.nodes().to_vec(),
            order: dag.order().to_vec(),
            excluded_constant,
            edges_total,
            edges_kept,
            edges_pruned: edges_total - edges_kept,
            edges: dag.edges().to_vec(),
        },
        latent: latent_summary,
        regimes: regimes_summary,
        cells: results.into_iter().map(|(_, c, _)| c).collect(),
        headline,
        kde_files,
        notes,
        warnings,
        dag,
        plots,
    })
}
