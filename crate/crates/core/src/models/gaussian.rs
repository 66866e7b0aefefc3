use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};

/// Diagonal Gaussian per node: row `i` of `mu` and `sigma` parameterise node `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianParams {
    pub mu: Tensor,
    pub sigma: Tensor,
}

impl GaussianParams {
    pub fn new(mu: Tensor, sigma: Tensor) -> Result<Self> {
        if mu.shape() != sigma.shape() {
            return Err(Error::ShapeMismatch {
                op: "gaussian_params",
                lhs: mu.shape(),
                rhs: sigma.shape(),
            });
        }
        if let Some(&s) = sigma.data().iter().find(|&&s| s <= 0.0 || s.is_nan()) {
            return Err(Error::Domain {
                op: "gaussian sigma",
                value: s,
            });
        }
        Ok(Self { mu, sigma })
    }

    /// `N(0, I)` for `rows` nodes.
    pub fn standard(rows: usize, dim: usize) -> Self {
        Self {
            mu: Tensor::zeros(rows, dim),
            sigma: Tensor::ones(rows, dim),
        }
    }

    pub fn rows(&self) -> usize {
        self.mu.rows()
    }
}

/// Handles to a diagonal Gaussian recorded on a tape.
#[derive(Clone, Copy, Debug)]
pub struct GaussianVars {
    pub mu: Var,
    pub sigma: Var,
}

impl GaussianVars {
    pub fn values(&self, tape: &Tape) -> GaussianParams {
        GaussianParams {
            mu: tape.value(self.mu).clone(),
            sigma: tape.value(self.sigma).clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatentSource {
    Prior,
    Posterior,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatentSample {
    pub z: Tensor,
    pub source: LatentSource,
}

/// Standard-normal noise, drawn row-major.
pub fn standard_noise(rows: usize, cols: usize, rng: &mut (impl Rng + ?Sized)) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Tensor::from_vec(rows, cols, data).expect("sized")
}

/// `z = μ + σ ⊙ ε`, `ε ~ N(0, I)`.
pub fn reparam_sample(
    p: &GaussianParams,
    source: LatentSource,
    rng: &mut (impl Rng + ?Sized),
) -> LatentSample {
    let eps = standard_noise(p.mu.rows(), p.mu.cols(), rng);
    let scaled = p.sigma.zip_map(&eps, |s, e| s * e);
    LatentSample {
        z: p.mu.zip_map(&scaled, |m, s| m + s),
        source,
    }
}

/// Reparameterised sample on the tape; gradients reach `μ` and `σ`.
pub fn reparam_sample_var(
    tape: &mut Tape,
    p: GaussianVars,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Var> {
    let (r, c) = tape.shape(p.mu);
    let eps = tape.constant(standard_noise(r, c, rng));
    let scaled = tape.mul(p.sigma, eps)?;
    tape.add(p.mu, scaled)
}

fn kl_entry(mq: f64, sq: f64, mp: f64, sp: f64) -> f64 {
    let d = mq - mp;
    sp.ln() - sq.ln() + (sq * sq + d * d) / (2.0 * (sp * sp)) - 0.5
}

/// `KL(q ‖ p)` summed over nodes and latent dimensions.
pub fn kl_gaussian(q: &GaussianParams, p: &GaussianParams) -> Result<f64> {
    if q.mu.shape() != p.mu.shape() {
        return Err(Error::ShapeMismatch {
            op: "kl_gaussian",
            lhs: q.mu.shape(),
            rhs: p.mu.shape(),
        });
    }
    let mut total = 0.0;
    for i in 0..q.mu.len() {
        total += kl_entry(
            q.mu.data()[i],
            q.sigma.data()[i],
            p.mu.data()[i],
            p.sigma.data()[i],
        );
    }
    Ok(total)
}

/// Tape version of [`kl_gaussian`].
pub fn kl_gaussian_var(tape: &mut Tape, q: GaussianVars, p: GaussianVars) -> Result<Var> {
    let log_sp = tape.log(p.sigma)?;
    let log_sq = tape.log(q.sigma)?;
    let d = tape.sub(q.mu, p.mu)?;
    let d2 = tape.square(d);
    let sq2 = tape.square(q.sigma);
    let num = tape.add(sq2, d2)?;
    let sp2 = tape.square(p.sigma);
    let den = tape.scale(sp2, 2.0);
    let frac = tape.div(num, den)?;
    let log_ratio = tape.sub(log_sp, log_sq)?;
    let terms = tape.add(log_ratio, frac)?;
    let centered = tape.add_scalar(terms, -0.5);
    Ok(tape.sum(centered))
}

/// `Σ log N(z; μ, σ²)` without the `−½ log 2π` constant.
pub fn log_density_var(tape: &mut Tape, z: Var, p: GaussianVars) -> Result<Var> {
    let d = tape.sub(z, p.mu)?;
    let d2 = tape.square(d);
    let s2 = tape.square(p.sigma);
    let den = tape.scale(s2, 2.0);
    let quad = tape.div(d2, den)?;
    let log_s = tape.log(p.sigma)?;
    let inner = tape.add(log_s, quad)?;
    let s = tape.sum(inner);
    Ok(tape.scale(s, -1.0))
}
