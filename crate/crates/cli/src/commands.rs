use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vgrnn::evaluation::{run_detection, run_prediction, MeanStdErr, Task, TaskResult};
use vgrnn::graphdata::{
    compute_stats, generate_migration_graph, load_dynamic_graph, make_detection_split,
    save_dynamic_graph, DynamicGraph, MigrationConfig,
};
use vgrnn::models::{load_checkpoint, prepare_sequence, save_checkpoint, Model};
use vgrnn::training::train;

use crate::config::RunConfig;
use crate::plot::{embedding_plot, line_plot, EmbeddedNode};

pub const GRAPH_FILE: &str = "graph.txt";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Generator parameters plus the node ids downstream analysis needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub generator: MigrationConfig,
    pub seed: u64,
    pub num_nodes: usize,
    pub migrating_node: usize,
    pub control_node: usize,
    pub transfer_steps: [usize; 2],
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    r.deserialize()
        .map(|row| row.with_context(|| format!("parsing {}", path.display())))
        .collect()
}

fn worker_pool(cfg: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .context("starting worker threads")
}

fn load_dataset(cfg: &RunConfig) -> Result<DynamicGraph> {
    let path = cfg.dataset()?;
    load_dynamic_graph(path).with_context(|| format!("loading dataset {}", path.display()))
}

fn input_dim(dg: &DynamicGraph) -> usize {
    dg.attribute_dim().unwrap_or(dg.num_nodes())
}

#[derive(Debug)]
pub struct GenerateOutput {
    pub graph: PathBuf,
    pub manifest: PathBuf,
    pub info: Manifest,
}

/// Writes the migration benchmark to `<out>/graph.txt` and its parameters to
/// `<out>/manifest.json`. The run seed drives the generator.
pub fn cmd_generate(cfg: &RunConfig) -> Result<GenerateOutput> {
    let gen = MigrationConfig {
        seed: cfg.seed,
        ..cfg.generator.clone()
    };
    let mg = generate_migration_graph(&gen)?;
    create_dir(&cfg.out)?;
    let graph = cfg.out.join(GRAPH_FILE);
    save_dynamic_graph(&mg.graph, &graph).with_context(|| format!("writing {}", graph.display()))?;
    let info = Manifest {
        seed: gen.seed,
        num_nodes: mg.graph.num_nodes(),
        migrating_node: mg.migrating_node,
        control_node: mg.control_node,
        transfer_steps: mg.transfer_steps(),
        generator: gen,
    };
    let manifest = cfg.out.join(MANIFEST_FILE);
    write_file(&manifest, serde_json::to_string_pretty(&info)? + "\n")?;
    log::info!("wrote {} snapshots to {}", mg.graph.len(), graph.display());
    Ok(GenerateOutput { graph, manifest, info })
}

/// Per-run outcome of `train`, one row of `runs.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub best_val_auc: Option<f64>,
    pub best_val_ap: Option<f64>,
    /// Training objective of the kept epoch.
    pub total_loss: f64,
}

/// One row of a `metric, mean, std_err, n` summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

fn summarize(metric: &str, values: &[f64]) -> Option<MetricSummary> {
    MeanStdErr::from_values(values).map(|s| MetricSummary {
        metric: metric.to_string(),
        mean: s.mean,
        std_err: s.std_err,
        n: s.n,
    })
}

#[derive(Debug)]
pub struct TrainOutput {
    pub runs: Vec<RunSummary>,
    pub summary: Vec<MetricSummary>,
    pub checkpoints: Vec<PathBuf>,
}

fn train_one(cfg: &RunConfig, dg: &DynamicGraph, seed: u64) -> Result<(RunSummary, PathBuf)> {
    let split = make_detection_split(dg, seed)?.with_holdout(cfg.holdout);
    let mut model = Model::new(cfg.model_config(input_dim(dg)), seed)?;
    let report = train(&mut model, dg, &split, &cfg.train_config(seed)?, |_, _| Ok(()))?;
    log::info!(
        "{} seed {seed}: {} epochs, best {} ({:.1}s)",
        cfg.model,
        report.history.len(),
        report.best_epoch,
        report.wall_clock_secs
    );

    let dir = cfg.run_dir(seed);
    create_dir(&dir)?;
    write_csv(&dir.join("epochs.csv"), &report.history)?;
    let meta: BTreeMap<String, String> = [
        ("seed", seed.to_string()),
        ("split_seed", seed.to_string()),
        ("holdout", cfg.holdout.to_string()),
        ("dataset", cfg.dataset_name()),
        ("best_epoch", report.best_epoch.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let ckpt = cfg.checkpoint_path(seed);
    save_checkpoint(&model, &meta, &ckpt)?;

    let kept = report.history.get(report.best_epoch.saturating_sub(1));
    Ok((
        RunSummary {
            seed,
            epochs_run: report.history.len(),
            best_epoch: report.best_epoch,
            stopped_early: report.stopped_early,
            best_val_auc: report.best_val_auc,
            best_val_ap: kept.and_then(|l| l.val_ap),
            total_loss: kept.map_or(f64::NAN, |l| l.total),
        },
        ckpt,
    ))
}

/// Trains one model per seed. Writes `<out>/<model>/seed_<s>/` with the
/// checkpoint and per-epoch log, plus `runs.csv` and `train_summary.csv`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    let dg = load_dataset(cfg)?;
    let seeds = cfg.seeds();
    let results = worker_pool(cfg)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| train_one(cfg, &dg, s).with_context(|| format!("training seed {s}")))
            .collect::<Result<Vec<_>>>()
    })?;
    let (runs, checkpoints): (Vec<_>, Vec<_>) = results.into_iter().unzip();

    let column = |f: &dyn Fn(&RunSummary) -> Option<f64>| -> Vec<f64> { runs.iter().filter_map(f).collect() };
    let summary: Vec<MetricSummary> = [
        summarize("best_val_auc", &column(&|r| r.best_val_auc)),
        summarize("best_val_ap", &column(&|r| r.best_val_ap)),
        summarize("best_epoch", &column(&|r| Some(r.best_epoch as f64))),
        summarize("total_loss", &column(&|r| Some(r.total_loss))),
    ]
    .into_iter()
    .flatten()
    .collect();
    let dir = cfg.model_dir();
    write_csv(&dir.join("runs.csv"), &runs)?;
    write_csv(&dir.join("train_summary.csv"), &summary)?;
    Ok(TrainOutput {
        runs,
        summary,
        checkpoints,
    })
}

/// One row of `results.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub task: String,
    pub model: String,
    pub dataset: String,
    pub seed: u64,
    pub snapshot: usize,
    pub auc: f64,
    pub ap: f64,
}

/// Mean ± standard error over seeds of each seed's snapshot-averaged score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub task: String,
    pub model: String,
    pub dataset: String,
    pub runs: usize,
    pub auc_mean: f64,
    pub auc_std_err: f64,
    pub ap_mean: f64,
    pub ap_std_err: f64,
}

#[derive(Debug)]
pub struct EvaluateOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<ResultSummary>,
}

fn meta_value<T: std::str::FromStr>(meta: &BTreeMap<String, String>, key: &str) -> Option<T> {
    meta.get(key).and_then(|v| v.parse().ok())
}

fn evaluate_one(cfg: &RunConfig, dg: &DynamicGraph, seed: u64) -> Result<Vec<TaskResult>> {
    let path = cfg.checkpoint_path(seed);
    if !path.is_file() {
        bail!("missing checkpoint {}", path.display());
    }
    let (model, meta) = load_checkpoint(&path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(h) = meta_value::<usize>(&meta, "holdout") {
        if h != cfg.holdout {
            bail!(
                "{} was trained with holdout {h}, evaluation asks for {}",
                path.display(),
                cfg.holdout
            );
        }
    }
    let split_seed = meta_value(&meta, "split_seed").unwrap_or(seed);
    let split = make_detection_split(dg, split_seed)?.with_holdout(cfg.holdout);
    let mut out = vec![run_detection(&model, dg, &split)?];
    if cfg.holdout > 0 {
        out.push(run_prediction(&model, dg, cfg.holdout, false, seed)?);
        out.push(run_prediction(&model, dg, cfg.holdout, true, seed)?);
    }
    Ok(out)
}

/// Aggregates per-seed rows: each seed's scores are averaged over snapshots,
/// then summarised across seeds. Tasks keep their canonical order.
pub fn aggregate_results(rows: &[ResultRow]) -> Vec<ResultSummary> {
    let mut out = Vec::new();
    for task in Task::ALL {
        let mut per_seed: BTreeMap<(&str, &str, u64), Vec<&ResultRow>> = BTreeMap::new();
        for r in rows.iter().filter(|r| r.task == task.as_str()) {
            per_seed.entry((&r.model, &r.dataset, r.seed)).or_default().push(r);
        }
        let mut groups: BTreeMap<(&str, &str), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
        for ((model, dataset, _), rs) in per_seed {
            let n = rs.len() as f64;
            let g = groups.entry((model, dataset)).or_default();
            g.0.push(rs.iter().map(|r| r.auc).sum::<f64>() / n);
            g.1.push(rs.iter().map(|r| r.ap).sum::<f64>() / n);
        }
        for ((model, dataset), (aucs, aps)) in groups {
            let (a, p) = (
                MeanStdErr::from_values(&aucs).expect("non-empty group"),
                MeanStdErr::from_values(&aps).expect("non-empty group"),
            );
            out.push(ResultSummary {
                task: task.as_str().to_string(),
                model: model.to_string(),
                dataset: dataset.to_string(),
                runs: a.n,
                auc_mean: a.mean,
                auc_std_err: a.std_err,
                ap_mean: p.mean,
                ap_std_err: p.std_err,
            });
        }
    }
    out
}

/// Scores every trained seed on detection, and on prediction and new-link
/// prediction when there is a holdout. Writes `results.csv` and
/// `results_summary.csv` next to the checkpoints.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluateOutput> {
    cfg.validate()?;
    let dg = load_dataset(cfg)?;
    let seeds = cfg.seeds();
    let per_seed = worker_pool(cfg)?.install(|| {
        seeds
            .par_iter()
            .map(|&s| evaluate_one(cfg, &dg, s).with_context(|| format!("evaluating seed {s}")))
            .collect::<Result<Vec<_>>>()
    })?;
    let (model, dataset) = (cfg.model.as_str().to_string(), cfg.dataset_name());
    let mut rows = Vec::new();
    for (&seed, results) in seeds.iter().zip(&per_seed) {
        for res in results {
            for s in &res.snapshots {
                rows.push(ResultRow {
                    task: res.task.as_str().to_string(),
                    model: model.clone(),
                    dataset: dataset.clone(),
                    seed,
                    snapshot: s.snapshot,
                    auc: s.auc,
                    ap: s.ap,
                });
            }
        }
    }
    let summary = aggregate_results(&rows);
    let dir = cfg.model_dir();
    write_csv(&dir.join("results.csv"), &rows)?;
    write_csv(&dir.join("results_summary.csv"), &summary)?;
    Ok(EvaluateOutput { rows, summary })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub t: usize,
    pub density: f64,
    pub clustering: f64,
}

/// Per-snapshot density and average clustering to `<out>/stats.csv` and
/// `<out>/stats.svg`.
pub fn cmd_stats(cfg: &RunConfig) -> Result<Vec<StatsRow>> {
    cfg.validate()?;
    let dg = load_dataset(cfg)?;
    let stats = compute_stats(&dg);
    let rows: Vec<StatsRow> = stats
        .density
        .iter()
        .zip(&stats.clustering)
        .enumerate()
        .map(|(t, (&density, &clustering))| StatsRow { t, density, clustering })
        .collect();
    create_dir(&cfg.out)?;
    write_csv(&cfg.out.join("stats.csv"), &rows)?;
    let svg = line_plot(
        &format!("{}: graph statistics", cfg.dataset_name()),
        "snapshot",
        &[("density", &stats.density), ("clustering", &stats.clustering)],
    );
    write_file(&cfg.out.join("stats.svg"), svg)?;
    Ok(rows)
}

/// Posterior parameters of one node at one snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingRow {
    pub node: usize,
    pub t: usize,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

#[derive(Debug)]
pub struct EmbedOutput {
    pub csv: PathBuf,
    pub svg: Option<PathBuf>,
    pub rows: Vec<EmbeddingRow>,
    pub highlight: Vec<usize>,
}

fn embedding_header(dim: usize) -> Vec<String> {
    let mut h = vec!["node".to_string(), "t".to_string()];
    h.extend((1..=dim).map(|i| format!("mu_{i}")));
    h.extend((1..=dim).map(|i| format!("sigma_{i}")));
    h
}

/// Reads an embedding dump written by `embed`.
pub fn read_embeddings(path: &Path) -> Result<Vec<EmbeddingRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let cols = r.headers()?.len();
    if cols < 4 || cols % 2 != 0 {
        bail!("{}: unexpected column count {cols}", path.display());
    }
    let dim = (cols - 2) / 2;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> { Ok(rec[i].parse()?) };
        rows.push(EmbeddingRow {
            node: rec[0].parse()?,
            t: rec[1].parse()?,
            mu: (0..dim).map(|i| num(2 + i)).collect::<Result<_>>()?,
            sigma: (0..dim).map(|i| num(2 + dim + i)).collect::<Result<_>>()?,
        });
    }
    Ok(rows)
}

fn default_highlight(cfg: &RunConfig) -> Vec<usize> {
    if !cfg.highlight.is_empty() {
        return cfg.highlight.clone();
    }
    let manifest = cfg
        .dataset
        .as_deref()
        .and_then(Path::parent)
        .map(|d| d.join(MANIFEST_FILE));
    match manifest {
        Some(p) if p.is_file() => match Manifest::load(&p) {
            Ok(m) => vec![m.migrating_node, m.control_node],
            Err(e) => {
                log::warn!("ignoring manifest: {e:#}");
                Vec::new()
            }
        },
        _ => Vec::new(),
    }
}

/// Dumps the posterior mean and σ of every node at every snapshot, inferred
/// over the full observed sequence, to `embeddings.csv` beside the checkpoint.
/// Two-dimensional latents also get `embeddings.svg`.
pub fn cmd_embed(cfg: &RunConfig) -> Result<EmbedOutput> {
    cfg.validate()?;
    let dg = load_dataset(cfg)?;
    let ckpt = cfg.checkpoint.clone().unwrap_or_else(|| cfg.checkpoint_path(cfg.seed));
    if !ckpt.is_file() {
        bail!("missing checkpoint {}", ckpt.display());
    }
    let (model, _) = load_checkpoint(&ckpt).with_context(|| format!("loading {}", ckpt.display()))?;
    if !model.kind().is_variational() {
        bail!("{} has no posterior variance to dump", model.kind());
    }
    let seq = prepare_sequence(&dg, model.config().input_dim)?;
    let (embs, _) = model.embed_sequence(&seq, model.initial_state(dg.num_nodes()))?;

    let dim = model.config().latent_dim;
    let mut rows = Vec::new();
    for (t, e) in embs.iter().enumerate() {
        let sigma = e.sigma.as_ref().ok_or_else(|| anyhow!("no posterior σ at snapshot {t}"))?;
        for (i, &node) in e.node_ids.iter().enumerate() {
            rows.push(EmbeddingRow {
                node,
                t,
                mu: e.mean.row(i).to_vec(),
                sigma: sigma.row(i).to_vec(),
            });
        }
    }
    if let Some(bad) = rows.iter().find(|r| r.mu.iter().chain(&r.sigma).any(|v| !v.is_finite())) {
        bail!("non-finite embedding for node {} at snapshot {}", bad.node, bad.t);
    }

    let dir = ckpt.parent().map(Path::to_path_buf).unwrap_or_default();
    let csv_path = dir.join("embeddings.csv");
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    w.write_record(embedding_header(dim))?;
    for r in &rows {
        let mut rec = vec![r.node.to_string(), r.t.to_string()];
        rec.extend(r.mu.iter().chain(&r.sigma).map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let highlight = default_highlight(cfg);
    let svg = if dim == 2 {
        let panels: Vec<(String, Vec<EmbeddedNode>)> = (0..embs.len())
            .map(|t| {
                let nodes = rows
                    .iter()
                    .filter(|r| r.t == t)
                    .map(|r| EmbeddedNode {
                        node: r.node,
                        mean: [r.mu[0], r.mu[1]],
                        sigma: [r.sigma[0], r.sigma[1]],
                    })
                    .collect();
                (format!("t = {t}"), nodes)
            })
            .collect();
        let path = dir.join("embeddings.svg");
        write_file(&path, embedding_plot(&panels, &highlight))?;
        Some(path)
    } else {
        log::info!("latent dimension {dim}: skipping the 2-d plot");
        None
    };
    Ok(EmbedOutput {
        csv: csv_path,
        svg,
        rows,
        highlight,
    })
}
