use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, ModelKind};
use super::gaussian::{
    kl_gaussian_var, log_density_var, reparam_sample_var, standard_noise, GaussianParams,
    GaussianVars,
};
use super::prepared::PreparedSnapshot;
use super::recon::recon_loss;
use crate::autodiff::{Bound, ParamStore, SparseMatrix, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::layers::{decode_logits, decode_tensor, Activation, GcnLayer, GraphGruCell, Linear, Mlp};

/// Seed of the noise used for the semi-implicit posterior mean at evaluation.
const EVAL_NOISE_SEED: u64 = 0x5eed_e7a1;

/// Recurrent state between snapshots: one row per global node id, plus a
/// flag for nodes that have appeared in a consumed snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenState {
    pub h: Tensor,
    pub seen: Vec<bool>,
}

impl HiddenState {
    pub fn zeros(num_nodes: usize, hidden_dim: usize) -> Self {
        Self {
            h: Tensor::zeros(num_nodes, hidden_dim),
            seen: vec![false; num_nodes],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.seen.len()
    }
}

/// Reconstruction and regularisation terms of one snapshot. For SI-VGRNN the
/// regulariser is the sampled `log q(z) − log p(z)`; for GRNN it is zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotLoss {
    pub recon: f64,
    pub kl: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub snapshots: Vec<SnapshotLoss>,
    pub recon: f64,
    pub kl: f64,
    pub total: f64,
}

impl LossBreakdown {
    fn from_parts(snapshots: Vec<SnapshotLoss>) -> Self {
        let mut recon = 0.0;
        let mut kl = 0.0;
        let mut total = 0.0;
        for s in &snapshots {
            recon += s.recon;
            kl += s.kl;
            total += s.recon + s.kl;
        }
        Self {
            snapshots,
            recon,
            kl,
            total,
        }
    }
}

/// Loss of a whole sequence recorded on a tape.
#[derive(Clone, Debug)]
pub struct SequenceLoss {
    pub total: Var,
    pub parts: Vec<(Var, Var)>,
}

impl SequenceLoss {
    pub fn breakdown(&self, tape: &Tape) -> LossBreakdown {
        LossBreakdown::from_parts(
            self.parts
                .iter()
                .map(|&(r, k)| SnapshotLoss {
                    recon: tape.item(r),
                    kl: tape.item(k),
                })
                .collect(),
        )
    }
}

/// Evaluation-mode output for one snapshot, rows in the snapshot's local order.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotEmbedding {
    pub node_ids: Vec<usize>,
    /// Posterior mean, or the deterministic embedding for GRNN.
    pub mean: Tensor,
    pub sigma: Option<Tensor>,
    pub prior: Option<GaussianParams>,
}

#[derive(Clone, Debug)]
struct PriorNet {
    body: Mlp,
    mu: Linear,
    sigma: Linear,
}

#[derive(Clone, Debug)]
struct GaussianEncoder {
    shared: GcnLayer,
    mu: GcnLayer,
    sigma: GcnLayer,
}

#[derive(Clone, Debug)]
struct SiviEncoder {
    stochastic: Vec<GcnLayer>,
    mu: GcnLayer,
    sigma_hidden: GcnLayer,
    sigma: GcnLayer,
    noise_dim: usize,
}

#[derive(Clone, Debug)]
enum Head {
    Projection(Linear),
    Gaussian(GaussianEncoder),
    SemiImplicit(SiviEncoder),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Train,
    Infer,
}

struct StepVars {
    recon: Option<Var>,
    kl: Option<Var>,
    mean: Var,
    sigma: Option<Var>,
    prior: Option<GaussianVars>,
    h_next: Var,
}

/// A GRNN, VGRNN or SI-VGRNN together with its parameters.
#[derive(Clone, Debug)]
pub struct Model {
    config: ModelConfig,
    params: ParamStore,
    trained: bool,
    phi_x: Linear,
    phi_z: Option<Linear>,
    prior: Option<PriorNet>,
    gru: GraphGruCell,
    head: Head,
}

impl Model {
    /// Builds a model with Glorot-initialised weights drawn from `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::new();
        let c = &config;
        let relu = Activation::Relu;
        let phi_x = Linear::new(&mut store, "phi_x", c.input_dim, c.feature_dim, relu, &mut rng);

        let (phi_z, prior, gru_in) = if c.kind.is_variational() {
            let phi_z = Linear::new(&mut store, "phi_z", c.latent_dim, c.feature_dim, relu, &mut rng);
            let prior = c.recurrent_prior.then(|| PriorNet {
                body: Mlp::new(
                    &mut store,
                    "prior",
                    &[c.hidden_dim, c.prior_dim, c.prior_dim],
                    relu,
                    &mut rng,
                ),
                mu: Linear::new(&mut store, "prior.mu", c.prior_dim, c.latent_dim, Activation::None, &mut rng),
                sigma: Linear::new(&mut store, "prior.sigma", c.prior_dim, c.latent_dim, Activation::Softplus, &mut rng),
            });
            (Some(phi_z), prior, 2 * c.feature_dim)
        } else {
            (None, None, c.feature_dim)
        };

        let gru = GraphGruCell::new(&mut store, "gru", gru_in, c.hidden_dim, &mut rng);

        let head = match c.kind {
            ModelKind::Grnn => Head::Projection(Linear::new(
                &mut store,
                "projection",
                c.hidden_dim,
                c.latent_dim,
                Activation::None,
                &mut rng,
            )),
            ModelKind::Vgrnn => {
                let enc_in = c.feature_dim + c.hidden_dim;
                Head::Gaussian(GaussianEncoder {
                    shared: GcnLayer::new(&mut store, "encoder.shared", enc_in, c.encoder_dim, relu, &mut rng),
                    mu: GcnLayer::new(&mut store, "encoder.mu", c.encoder_dim, c.latent_dim, Activation::None, &mut rng),
                    sigma: GcnLayer::new(&mut store, "encoder.sigma", c.encoder_dim, c.latent_dim, Activation::Softplus, &mut rng),
                })
            }
            ModelKind::SiVgrnn => {
                let stochastic = (0..c.stochastic_layers)
                    .map(|j| {
                        let prev = if j == 0 { c.feature_dim } else { c.encoder_dim };
                        GcnLayer::new(
                            &mut store,
                            &format!("encoder.stochastic.{j}"),
                            c.hidden_dim + c.noise_dim + prev,
                            c.encoder_dim,
                            relu,
                            &mut rng,
                        )
                    })
                    .collect();
                Head::SemiImplicit(SiviEncoder {
                    stochastic,
                    mu: GcnLayer::new(&mut store, "encoder.mu", c.encoder_dim, c.latent_dim, Activation::None, &mut rng),
                    sigma_hidden: GcnLayer::new(
                        &mut store,
                        "encoder.sigma.0",
                        c.feature_dim + c.hidden_dim,
                        c.encoder_dim,
                        relu,
                        &mut rng,
                    ),
                    sigma: GcnLayer::new(&mut store, "encoder.sigma.1", c.encoder_dim, c.latent_dim, Activation::Softplus, &mut rng),
                    noise_dim: c.noise_dim,
                })
            }
        };

        Ok(Self {
            config,
            params: store,
            trained: false,
            phi_x,
            phi_z,
            prior,
            gru,
            head,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    pub fn set_trained(&mut self, trained: bool) {
        self.trained = trained;
    }

    pub fn initial_state(&self, num_nodes: usize) -> HiddenState {
        HiddenState::zeros(num_nodes, self.config.hidden_dim)
    }

    /// Records the training objective over `seq`, starting from a zero state
    /// over `num_nodes` global ids. Noise is drawn from `rng` in snapshot
    /// order; within a snapshot the semi-implicit noise precedes the
    /// reparameterisation noise, each row-major.
    pub fn sequence_loss(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        seq: &[PreparedSnapshot],
        num_nodes: usize,
        rng: &mut impl Rng,
    ) -> Result<SequenceLoss> {
        if seq.is_empty() {
            return Err(Error::InvalidGraph("empty snapshot sequence".into()));
        }
        let mut h = tape.constant(Tensor::zeros(num_nodes, self.config.hidden_dim));
        let mut seen = vec![false; num_nodes];
        let mut parts = Vec::with_capacity(seq.len());
        let mut total: Option<Var> = None;
        for snap in seq {
            let out = self.step(tape, bound, snap, h, &mut seen, Mode::Train, rng)?;
            let recon = out.recon.expect("train mode computes recon");
            let kl = out.kl.expect("train mode computes kl");
            let step_total = tape.add(recon, kl)?;
            total = Some(match total {
                None => step_total,
                Some(acc) => tape.add(acc, step_total)?,
            });
            parts.push((recon, kl));
            h = out.h_next;
        }
        Ok(SequenceLoss {
            total: total.expect("non-empty"),
            parts,
        })
    }

    /// Evaluates the training objective without recording gradients.
    pub fn loss_breakdown(
        &self,
        seq: &[PreparedSnapshot],
        num_nodes: usize,
        rng: &mut impl Rng,
    ) -> Result<LossBreakdown> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let loss = self.sequence_loss(&mut tape, &bound, seq, num_nodes, rng)?;
        Ok(loss.breakdown(&tape))
    }

    /// Consumes one observed snapshot in evaluation mode: embeddings use the
    /// posterior mean, which is also what feeds the recurrence.
    pub fn infer_step(
        &self,
        state: &HiddenState,
        snap: &PreparedSnapshot,
    ) -> Result<(SnapshotEmbedding, HiddenState)> {
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let h = tape.constant(state.h.clone());
        let mut seen = state.seen.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(EVAL_NOISE_SEED);
        let out = self.step(&mut tape, &bound, snap, h, &mut seen, Mode::Infer, &mut rng)?;
        let emb = SnapshotEmbedding {
            node_ids: snap.node_ids.clone(),
            mean: tape.value(out.mean).clone(),
            sigma: out.sigma.map(|s| tape.value(s).clone()),
            prior: out.prior.map(|p| p.values(&tape)),
        };
        let next = HiddenState {
            h: tape.value(out.h_next).clone(),
            seen,
        };
        Ok((emb, next))
    }

    /// Runs [`Model::infer_step`] over every snapshot in order.
    pub fn embed_sequence(
        &self,
        seq: &[PreparedSnapshot],
        state: HiddenState,
    ) -> Result<(Vec<SnapshotEmbedding>, HiddenState)> {
        let mut state = state;
        let mut out = Vec::with_capacity(seq.len());
        for snap in seq {
            let (emb, next) = self.infer_step(&state, snap)?;
            out.push(emb);
            state = next;
        }
        Ok((out, state))
    }

    /// Embeddings for `node_ids` at the next step, before that snapshot is
    /// observed: the prior mean for variational models, the projected hidden
    /// state for GRNN. Nodes never seen get the standard prior mean of zero.
    pub fn forecast_embedding(&self, state: &HiddenState, node_ids: &[usize]) -> Result<Tensor> {
        check_ids(node_ids, state.num_nodes())?;
        let mut tape = Tape::new();
        let bound = self.params.bind(&mut tape);
        let h = tape.constant(state.h.clone());
        let h_rows = tape.gather_rows(h, node_ids)?;
        let out = match &self.head {
            Head::Projection(p) => p.forward(&mut tape, &bound, h_rows)?,
            _ => {
                let new_rows = unseen_rows(node_ids, &state.seen);
                self.prior_vars(&mut tape, &bound, h_rows, &new_rows)?.mu
            }
        };
        Ok(tape.value(out).clone())
    }

    /// Edge probabilities among `node_ids` at the next step.
    pub fn predict_edges(&self, state: &HiddenState, node_ids: &[usize]) -> Result<Tensor> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        Ok(decode_tensor(&self.forecast_embedding(state, node_ids)?))
    }

    fn prior_vars(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        h_rows: Var,
        new_rows: &[usize],
    ) -> Result<GaussianVars> {
        let n = tape.shape(h_rows).0;
        let l = self.config.latent_dim;
        match &self.prior {
            Some(net) => {
                let body = net.body.forward(tape, bound, h_rows)?;
                let mu = net.mu.forward(tape, bound, body)?;
                let sigma = net.sigma.forward(tape, bound, body)?;
                Ok(GaussianVars {
                    mu: tape.fill_rows(mu, new_rows, 0.0),
                    sigma: tape.fill_rows(sigma, new_rows, 1.0),
                })
            }
            None => Ok(GaussianVars {
                mu: tape.constant(Tensor::zeros(n, l)),
                sigma: tape.constant(Tensor::ones(n, l)),
            }),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        snap: &PreparedSnapshot,
        h: Var,
        seen: &mut [bool],
        mode: Mode,
        rng: &mut impl Rng,
    ) -> Result<StepVars> {
        let ids = &snap.node_ids;
        check_ids(ids, seen.len())?;
        let a = &snap.a_norm;
        let n = ids.len();
        let h_rows = tape.gather_rows(h, ids)?;
        let x = tape.constant(snap.features.clone());
        let xf = self.phi_x.forward(tape, bound, x)?;
        let h_enc = if self.config.encoder_uses_hidden {
            h_rows
        } else {
            tape.constant(Tensor::zeros(n, self.config.hidden_dim))
        };

        let (mean, sigma, prior, z, kl) = match &self.head {
            Head::Projection(_) => {
                let h_new = self.gru.step(tape, bound, a, xf, h_rows)?;
                return self.finish_grnn(tape, bound, snap, h, h_new, seen, mode);
            }
            Head::Gaussian(enc) => {
                let new_rows = unseen_rows(ids, seen);
                let prior = self.prior_vars(tape, bound, h_rows, &new_rows)?;
                let input = tape.concat_cols(&[xf, h_enc])?;
                let shared = enc.shared.forward(tape, bound, a, input)?;
                let post = GaussianVars {
                    mu: enc.mu.forward(tape, bound, a, shared)?,
                    sigma: enc.sigma.forward(tape, bound, a, shared)?,
                };
                let (z, kl) = match mode {
                    Mode::Train => {
                        let z = reparam_sample_var(tape, post, rng)?;
                        (z, Some(kl_gaussian_var(tape, post, prior)?))
                    }
                    Mode::Infer => (post.mu, None),
                };
                (post.mu, post.sigma, prior, z, kl)
            }
            Head::SemiImplicit(enc) => {
                let new_rows = unseen_rows(ids, seen);
                let prior = self.prior_vars(tape, bound, h_rows, &new_rows)?;
                let sig_in = tape.concat_cols(&[xf, h_enc])?;
                let sig_hidden = enc.sigma_hidden.forward(tape, bound, a, sig_in)?;
                let sigma = enc.sigma.forward(tape, bound, a, sig_hidden)?;
                match mode {
                    Mode::Train => {
                        let mu = enc.mixing_mean(tape, bound, a, xf, h_enc, rng)?;
                        let post = GaussianVars { mu, sigma };
                        let z = reparam_sample_var(tape, post, rng)?;
                        let log_q = log_density_var(tape, z, post)?;
                        let log_p = log_density_var(tape, z, prior)?;
                        let kl = tape.sub(log_q, log_p)?;
                        (mu, sigma, prior, z, Some(kl))
                    }
                    Mode::Infer => {
                        let k = self.config.eval_samples;
                        let mut acc = enc.mixing_mean(tape, bound, a, xf, h_enc, rng)?;
                        for _ in 1..k {
                            let m = enc.mixing_mean(tape, bound, a, xf, h_enc, rng)?;
                            acc = tape.add(acc, m)?;
                        }
                        let mu = tape.scale(acc, 1.0 / k as f64);
                        (mu, sigma, prior, mu, None)
                    }
                }
            }
        };

        let recon = match mode {
            Mode::Train => {
                let logits = decode_logits(tape, z)?;
                Some(recon_loss(tape, logits, &snap.recon)?)
            }
            Mode::Infer => None,
        };

        let phi_z = self.phi_z.as_ref().expect("variational models have phi_z");
        let zf = phi_z.forward(tape, bound, z)?;
        let gru_in = tape.concat_cols(&[xf, zf])?;
        let h_new = self.gru.step(tape, bound, a, gru_in, h_rows)?;
        let h_next = tape.scatter_rows(h, h_new, ids)?;
        mark_seen(seen, ids);

        Ok(StepVars {
            recon,
            kl,
            mean,
            sigma: Some(sigma),
            prior: Some(prior),
            h_next,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_grnn(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        snap: &PreparedSnapshot,
        h: Var,
        h_new: Var,
        seen: &mut [bool],
        mode: Mode,
    ) -> Result<StepVars> {
        let Head::Projection(proj) = &self.head else {
            unreachable!("grnn head")
        };
        let emb = proj.forward(tape, bound, h_new)?;
        let (recon, kl) = match mode {
            Mode::Train => {
                let logits = decode_logits(tape, emb)?;
                let recon = recon_loss(tape, logits, &snap.recon)?;
                (Some(recon), Some(tape.constant(Tensor::scalar(0.0))))
            }
            Mode::Infer => (None, None),
        };
        let h_next = tape.scatter_rows(h, h_new, &snap.node_ids)?;
        mark_seen(seen, &snap.node_ids);
        Ok(StepVars {
            recon,
            kl,
            mean: emb,
            sigma: None,
            prior: None,
            h_next,
        })
    }
}

impl SiviEncoder {
    /// Mean of the conditional Gaussian for one draw of the layer noise.
    fn mixing_mean(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        a: &Arc<SparseMatrix>,
        xf: Var,
        h: Var,
        rng: &mut impl Rng,
    ) -> Result<Var> {
        let n = tape.shape(xf).0;
        let mut layer = xf;
        for gcn in &self.stochastic {
            let eps = tape.constant(standard_noise(n, self.noise_dim, rng));
            let input = tape.concat_cols(&[h, eps, layer])?;
            layer = gcn.forward(tape, bound, a, input)?;
        }
        self.mu.forward(tape, bound, a, layer)
    }
}

fn check_ids(ids: &[usize], num_nodes: usize) -> Result<()> {
    match ids.iter().find(|&&id| id >= num_nodes) {
        Some(id) => Err(Error::InvalidGraph(format!(
            "node id {id} outside hidden state of {num_nodes} nodes"
        ))),
        None => Ok(()),
    }
}

fn unseen_rows(ids: &[usize], seen: &[bool]) -> Vec<usize> {
    ids.iter()
        .enumerate()
        .filter(|(_, &id)| !seen[id])
        .map(|(i, _)| i)
        .collect()
}

fn mark_seen(seen: &mut [bool], ids: &[usize]) {
    for &id in ids {
        seen[id] = true;
    }
}
