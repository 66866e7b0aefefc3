mod support;

use vgrnn::evaluation::validation_metrics;
use vgrnn::graphdata::{
    generate_migration_graph, make_detection_split, DynamicGraph, MigrationConfig, SplitSpec,
};
use vgrnn::models::{prepare_sequence, Model, ModelConfig, ModelKind};
use vgrnn::training::{
    adam_step, clip_grad_norm, grad_norm, train, AdamConfig, AdamState, TrainConfig, TrainReport,
};
use vgrnn::{Error, ParamStore, Tensor};

fn store_with(values: &[&[f64]]) -> ParamStore {
    let mut s = ParamStore::new();
    for (i, v) in values.iter().enumerate() {
        s.add(format!("p{i}"), Tensor::from_vec(1, v.len(), v.to_vec()).unwrap());
    }
    s
}

fn set_grads(s: &mut ParamStore, grads: &[Vec<f64>]) {
    let ids: Vec<_> = s.ids().collect();
    for (id, g) in ids.into_iter().zip(grads) {
        s.grad_mut(id).data_mut().copy_from_slice(g);
    }
}

fn flat(s: &ParamStore) -> Vec<f64> {
    s.iter().flat_map(|(_, t)| t.data().to_vec()).collect()
}

/// Textbook Adam on a flat vector with global-norm clipping.
fn adam_oracle(x: &mut [f64], grads: &[Vec<f64>], cfg: &AdamConfig) {
    let n = x.len();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    for (t, g) in grads.iter().enumerate() {
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        let k = if norm > cfg.grad_clip_norm { cfg.grad_clip_norm / norm } else { 1.0 };
        let step = (t + 1) as i32;
        for i in 0..n {
            let gi = g[i] * k;
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
            let mh = m[i] / (1.0 - cfg.beta1.powi(step));
            let vh = v[i] / (1.0 - cfg.beta2.powi(step));
            x[i] -= cfg.learning_rate * mh / (vh.sqrt() + cfg.eps);
        }
    }
}

#[test]
fn adam_matches_reference_over_ten_steps() {
    let cfg = AdamConfig::default();
    let mut s = store_with(&[&[0.5, -1.0, 2.0], &[0.1, 0.0]]);
    let mut state = AdamState::new(&s);
    let mut r = support::rng(3);
    // Step 4 has a gradient large enough to be clipped.
    let grads: Vec<Vec<f64>> = (0..10)
        .map(|t| {
            let scale = if t == 4 { 50.0 } else { 1.0 };
            (0..5).map(|_| scale * (rand::Rng::random::<f64>(&mut r) - 0.5)).collect()
        })
        .collect();
    let mut oracle = flat(&s);
    adam_oracle(&mut oracle, &grads, &cfg);
    for g in &grads {
        set_grads(&mut s, &[g[..3].to_vec(), g[3..].to_vec()]);
        adam_step(&mut s, &mut state, &cfg).unwrap();
    }
    for (a, b) in flat(&s).iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

#[test]
fn zero_gradients_leave_parameters_unchanged() {
    let mut s = store_with(&[&[0.5, -1.0]]);
    let before = flat(&s);
    let mut state = AdamState::new(&s);
    adam_step(&mut s, &mut state, &AdamConfig::default()).unwrap();
    assert_eq!(flat(&s), before);
}

#[test]
fn first_step_moves_by_learning_rate() {
    let mut s = store_with(&[&[0.0, 0.0, 0.0]]);
    set_grads(&mut s, &[vec![0.3, -2.0, 0.0]]);
    let mut state = AdamState::new(&s);
    let cfg = AdamConfig::default();
    adam_step(&mut s, &mut state, &cfg).unwrap();
    let x = flat(&s);
    assert!((x[0] + cfg.learning_rate).abs() < 1e-9);
    assert!((x[1] - cfg.learning_rate).abs() < 1e-9);
    assert_eq!(x[2], 0.0);
}

#[test]
fn clipping_bounds_the_global_norm() {
    let mut s = store_with(&[&[0.0; 4], &[0.0; 3]]);
    set_grads(&mut s, &[vec![30.0, -40.0, 5.0, 1.0], vec![7.0, 8.0, -9.0]]);
    let before = clip_grad_norm(&mut s, 10.0);
    assert!(before > 10.0);
    assert!(grad_norm(&s) <= 10.0 + 1e-12);
}

#[test]
fn non_finite_gradients_are_rejected() {
    let mut s = store_with(&[&[0.0, 1.0]]);
    set_grads(&mut s, &[vec![f64::NAN, 0.0]]);
    let mut state = AdamState::new(&s);
    assert!(matches!(
        adam_step(&mut s, &mut state, &AdamConfig::default()),
        Err(Error::NonFiniteGradient(_))
    ));
}

fn benchmark(seed: u64) -> (DynamicGraph, SplitSpec) {
    let mg = generate_migration_graph(&MigrationConfig { seed, ..Default::default() }).unwrap();
    let split = make_detection_split(&mg.graph, seed).unwrap().with_holdout(3);
    (mg.graph, split)
}

fn run(kind: ModelKind, epochs: usize, lr: f64, seed: u64) -> (Model, TrainReport) {
    let (dg, split) = benchmark(seed);
    let mut model = Model::new(ModelConfig::new(kind, dg.num_nodes()), seed).unwrap();
    let cfg = TrainConfig {
        epochs,
        patience: epochs,
        seed,
        adam: AdamConfig { learning_rate: lr, ..Default::default() },
    };
    let report = train(&mut model, &dg, &split, &cfg, |_, _| Ok(())).unwrap();
    (model, report)
}

#[test]
fn zero_learning_rate_keeps_parameters() {
    let (dg, _) = benchmark(0);
    let fresh = Model::new(ModelConfig::new(ModelKind::Vgrnn, dg.num_nodes()), 0).unwrap();
    let (trained, _) = run(ModelKind::Vgrnn, 5, 0.0, 0);
    for ((_, a), (_, b)) in fresh.params().iter().zip(trained.params().iter()) {
        assert_eq!(a, b);
    }
}

#[test]
fn training_is_deterministic() {
    for kind in ModelKind::ALL {
        let (_, a) = run(kind, 15, 0.01, 4);
        let (_, b) = run(kind, 15, 0.01, 4);
        assert_eq!(a.history, b.history);
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.best_epoch, b.best_epoch);
    }
}

#[test]
fn two_hundred_epochs_reduce_loss_without_non_finite_values() {
    let (_, report) = run(ModelKind::Vgrnn, 200, 0.01, 1);
    assert_eq!(report.history.len(), 200);
    for log in &report.history {
        assert!(log.total.is_finite() && log.recon.is_finite() && log.kl.is_finite());
        assert!(log.val_auc.unwrap().is_finite());
    }
    assert!(report.history[199].total < report.history[0].total);
}

#[test]
fn loss_totals_equal_sum_of_parts() {
    let (_, report) = run(ModelKind::SiVgrnn, 3, 0.01, 2);
    for (log, b) in report.history.iter().zip(&report.losses) {
        let total = b.snapshots.iter().fold(0.0, |acc, s| acc + (s.recon + s.kl));
        assert_eq!(total.to_bits(), log.total.to_bits());
        assert_eq!(b.total.to_bits(), log.total.to_bits());
    }
}

#[test]
fn early_stopping_keeps_the_best_validation_parameters() {
    let (dg, split) = benchmark(5);
    let mut model = Model::new(ModelConfig::new(ModelKind::Vgrnn, dg.num_nodes()), 5).unwrap();
    let cfg = TrainConfig { epochs: 120, patience: 20, seed: 5, ..Default::default() };
    let report = train(&mut model, &dg, &split, &cfg, |_, _| Ok(())).unwrap();
    let max = report
        .history
        .iter()
        .filter_map(|l| l.val_auc)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(report.best_val_auc, Some(max));
    assert!(report.best_epoch <= report.history.len());
    assert_eq!(report.history[report.best_epoch - 1].val_auc, Some(max));

    let cut = dg.len() - 3;
    let mut seq = prepare_sequence(&split.training_graph(&dg).unwrap(), dg.num_nodes()).unwrap();
    seq.truncate(cut);
    let (auc, _) = validation_metrics(&model, &seq, &split.snapshots[..cut], dg.num_nodes())
        .unwrap()
        .unwrap();
    assert_eq!(auc, max);
}

#[test]
fn held_out_edges_never_reach_the_training_loss() {
    let (dg, split) = benchmark(6);
    // Same split, but every held-out edge replaced by a different pair.
    let poisoned: Vec<_> = dg
        .snapshots()
        .iter()
        .zip(&split.snapshots)
        .map(|(g, sp)| {
            let held: std::collections::BTreeSet<_> =
                sp.test_edges.iter().chain(&sp.val_edges).copied().collect();
            let kept = g.edges().filter(|e| !held.contains(e));
            let noise = sp.test_nonedges.iter().copied();
            g.with_edges(kept.chain(noise)).unwrap()
        })
        .collect();
    let poisoned = DynamicGraph::new(poisoned).unwrap();
    let cfg = TrainConfig { epochs: 5, seed: 6, ..Default::default() };
    let mut a = Model::new(ModelConfig::new(ModelKind::Vgrnn, dg.num_nodes()), 6).unwrap();
    let mut b = a.clone();
    let ra = train(&mut a, &dg, &split, &cfg, |_, _| Ok(())).unwrap();
    let rb = train(&mut b, &poisoned, &split, &cfg, |_, _| Ok(())).unwrap();
    assert_eq!(ra.losses, rb.losses);
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        TrainConfig { epochs: 0, ..Default::default() },
        TrainConfig { patience: 0, ..Default::default() },
        TrainConfig {
            adam: AdamConfig { learning_rate: -0.1, ..Default::default() },
            ..Default::default()
        },
        TrainConfig {
            adam: AdamConfig { grad_clip_norm: 0.0, ..Default::default() },
            ..Default::default()
        },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }
}
