use std::fs;
use std::path::Path;
use std::process::Command as Process;

use vgrnn::graphdata::{compute_stats, load_dynamic_graph, save_dynamic_graph, DynamicGraph, SnapshotGraph};
use vgrnn_cli::{
    aggregate_results, cmd_embed, cmd_evaluate, cmd_generate, cmd_stats, cmd_train, read_csv,
    read_embeddings, Command, Manifest, ResultRow, RunConfig,
};

fn config(command: Command, dir: &Path) -> RunConfig {
    let mut c = RunConfig::new(command);
    c.out = dir.to_path_buf();
    c.dataset = Some(dir.join("graph.txt"));
    c.runs = 1;
    c.epochs = 5;
    c
}

fn generated(dir: &Path) -> RunConfig {
    cmd_generate(&config(Command::Generate, dir)).unwrap();
    config(Command::Train, dir)
}

fn read(path: impl AsRef<Path>) -> Vec<u8> {
    fs::read(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn generate_writes_a_loadable_reproducible_graph() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut cfg = config(Command::Generate, a.path());
    cfg.seed = 4;
    let out = cmd_generate(&cfg).unwrap();
    let dg = load_dynamic_graph(&out.graph).unwrap();
    assert_eq!(dg.len(), 6);
    assert_eq!(dg.num_nodes(), 60);
    let m = Manifest::load(&out.manifest).unwrap();
    assert_eq!((m.seed, m.migrating_node, m.control_node), (4, 19, 40));
    assert_eq!(m.transfer_steps, [2, 3]);

    cfg.out = b.path().to_path_buf();
    let again = cmd_generate(&cfg).unwrap();
    assert_eq!(read(&out.graph), read(&again.graph));
    assert_eq!(read(&out.manifest), read(&again.manifest));
}

#[test]
fn train_smoke_run_writes_one_checkpoint_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generated(dir.path());
    let out = cmd_train(&cfg).unwrap();
    assert_eq!(out.checkpoints.len(), 1);
    assert!(out.checkpoints[0].is_file());
    let files = ["runs.csv", "train_summary.csv", "seed_0/epochs.csv", "seed_0/checkpoint.json"];
    let first: Vec<Vec<u8>> = files.iter().map(|f| read(cfg.model_dir().join(f))).collect();
    cmd_train(&cfg).unwrap();
    for (f, bytes) in files.iter().zip(&first) {
        assert_eq!(&read(cfg.model_dir().join(f)), bytes, "{f} changed on rerun");
    }
    let log = fs::read_to_string(cfg.run_dir(0).join("epochs.csv")).unwrap();
    assert_eq!(log.lines().next(), Some("epoch,recon,kl,total,val_auc,val_ap"));
    assert_eq!(log.lines().count(), 6);
}

#[test]
fn summary_reports_mean_and_standard_error_over_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = generated(dir.path());
    cfg.runs = 3;
    cfg.workers = 3;
    let out = cmd_train(&cfg).unwrap();
    let text = fs::read_to_string(cfg.model_dir().join("train_summary.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("metric,mean,std_err,n"));
    let auc: Vec<f64> = out.runs.iter().map(|r| r.best_val_auc.unwrap()).collect();
    let s = out.summary.iter().find(|s| s.metric == "best_val_auc").unwrap();
    let mean = auc.iter().sum::<f64>() / 3.0;
    let var = auc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / 2.0;
    assert!((s.mean - mean).abs() < 1e-15);
    assert!((s.std_err - (var / 3.0).sqrt()).abs() < 1e-15);
    assert_eq!(s.n, 3);

    // worker count does not change any result
    let serial = tempfile::tempdir().unwrap();
    let mut one = cfg.clone();
    one.workers = 1;
    one.out = serial.path().to_path_buf();
    cmd_train(&one).unwrap();
    for f in ["runs.csv", "train_summary.csv", "seed_2/epochs.csv"] {
        assert_eq!(read(cfg.model_dir().join(f)), read(one.model_dir().join(f)), "{f}");
    }
}

#[test]
fn evaluate_writes_exact_columns_and_consistent_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = generated(dir.path());
    cfg.runs = 2;
    cmd_train(&cfg).unwrap();
    let out = cmd_evaluate(&cfg).unwrap();
    let path = cfg.model_dir().join("results.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("task,model,dataset,seed,snapshot,auc,ap"));
    let back: Vec<ResultRow> = read_csv(&path).unwrap();
    assert_eq!(back, out.rows);

    for task in ["detection", "prediction", "new_prediction"] {
        assert!(out.rows.iter().any(|r| r.task == task), "{task}");
    }
    assert!(out.rows.iter().filter(|r| r.task == "detection").all(|r| r.snapshot >= 3));

    // manual recomputation of the detection summary
    let per_seed: Vec<f64> = [0u64, 1]
        .iter()
        .map(|&s| {
            let v: Vec<f64> = out
                .rows
                .iter()
                .filter(|r| r.task == "detection" && r.seed == s)
                .map(|r| r.auc)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect();
    let det = out.summary.iter().find(|s| s.task == "detection").unwrap();
    assert_eq!(det.runs, 2);
    assert!((det.auc_mean - (per_seed[0] + per_seed[1]) / 2.0).abs() < 1e-15);
    assert!((det.auc_std_err - (per_seed[0] - per_seed[1]).abs() / 2.0).abs() < 1e-15);
    assert_eq!(aggregate_results(&back), out.summary);
}

#[test]
fn evaluate_is_detection_only_without_holdout() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = generated(dir.path());
    cfg.holdout = 0;
    cmd_train(&cfg).unwrap();
    let out = cmd_evaluate(&cfg).unwrap();
    assert!(out.rows.iter().all(|r| r.task == "detection"));
    assert_eq!(out.rows.len(), 6);

    cfg.holdout = 2;
    let err = cmd_evaluate(&cfg).unwrap_err();
    assert!(format!("{err:#}").contains("holdout"), "{err:#}");
}

#[test]
fn evaluate_reports_missing_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generated(dir.path());
    let err = cmd_evaluate(&cfg).unwrap_err();
    assert!(format!("{err:#}").contains("missing checkpoint"), "{err:#}");
    assert!(cmd_embed(&config(Command::Embed, dir.path())).is_err());
}

#[test]
fn stats_of_triangles_are_flat_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let tri = SnapshotGraph::with_prefix_nodes(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
    let dg = DynamicGraph::new(vec![tri.clone(), tri.clone(), tri]).unwrap();
    save_dynamic_graph(&dg, dir.path().join("graph.txt")).unwrap();
    let rows = cmd_stats(&config(Command::Stats, dir.path())).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.density == 1.0 && r.clustering == 1.0));
    let text = fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(dir.path().join("stats.svg").is_file());
}

#[test]
fn stats_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = generated(dir.path());
    let rows = cmd_stats(&cfg).unwrap();
    let want = compute_stats(&load_dynamic_graph(cfg.dataset().unwrap()).unwrap());
    let back: Vec<vgrnn_cli::StatsRow> = read_csv(&dir.path().join("stats.csv")).unwrap();
    assert_eq!(back, rows);
    for (t, r) in rows.iter().enumerate() {
        assert_eq!((r.t, r.density, r.clustering), (t, want.density[t], want.clustering[t]));
    }
}

#[test]
fn embed_dumps_every_node_of_every_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = generated(dir.path());
    cfg.latent_dim = 2;
    cfg.holdout = 0;
    cmd_train(&cfg).unwrap();
    let out = cmd_embed(&RunConfig { command: Command::Embed, ..cfg.clone() }).unwrap();
    assert_eq!(out.highlight, vec![19, 40]);
    assert!(out.svg.as_ref().unwrap().is_file());
    let text = fs::read_to_string(&out.csv).unwrap();
    assert_eq!(text.lines().next(), Some("node,t,mu_1,mu_2,sigma_1,sigma_2"));
    let rows = read_embeddings(&out.csv).unwrap();
    assert_eq!(rows, out.rows);
    for t in 0..6 {
        assert_eq!(rows.iter().filter(|r| r.t == t).count(), 60);
    }
    assert!(rows.iter().all(|r| r.sigma.iter().all(|&s| s > 0.0)));
}

#[test]
fn embed_rejects_deterministic_models() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = generated(dir.path());
    cfg.set("model", "grnn").unwrap();
    cmd_train(&cfg).unwrap();
    let err = cmd_embed(&RunConfig { command: Command::Embed, ..cfg }).unwrap_err();
    assert!(format!("{err:#}").contains("variance"), "{err:#}");
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_vgrnn");
    let ok = Process::new(bin)
        .args(["generate", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let cfg_file = dir.path().join("run.cfg");
    fs::write(&cfg_file, "epochs = 3\nruns = 1\nmodel = si-vgrnn\n").unwrap();
    let train = Process::new(bin)
        .arg("train")
        .arg("--config")
        .arg(&cfg_file)
        .arg("--dataset")
        .arg(dir.path().join("graph.txt"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));
    assert!(dir.path().join("si-vgrnn/seed_0/checkpoint.json").is_file());

    let missing = Process::new(bin).args(["stats", "--dataset", "/nonexistent/g.txt"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let no_dataset = Process::new(bin).arg("train").output().unwrap();
    assert!(!no_dataset.status.success());
    let bad_lr = Process::new(bin)
        .args(["train", "--lr", "-1", "--dataset"])
        .arg(dir.path().join("graph.txt"))
        .output()
        .unwrap();
    assert!(!bad_lr.status.success());
}
