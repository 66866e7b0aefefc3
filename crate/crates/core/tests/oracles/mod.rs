//! Independent reference implementations used as test oracles. Everything
//! here works on plain nested vectors and shares no code with the crate.
#![allow(dead_code)]

pub type Dense = Vec<Vec<f64>>;

pub fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            out[i][j] = s;
        }
    }
    out
}

pub fn transpose(a: &Dense) -> Dense {
    let c = a.first().map_or(0, Vec::len);
    (0..c).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn map(a: &Dense, f: impl Fn(f64) -> f64) -> Dense {
    a.iter().map(|r| r.iter().map(|&x| f(x)).collect()).collect()
}

pub fn add_row(a: &Dense, bias: &[f64]) -> Dense {
    a.iter()
        .map(|r| r.iter().zip(bias).map(|(x, b)| x + b).collect())
        .collect()
}

pub fn hcat(a: &Dense, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(x, y)| x.iter().chain(y).copied().collect()).collect()
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn softplus(x: f64) -> f64 {
    // ln(1 + e^x) = max(x, 0) + ln(1 + e^{-|x|})
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn log_sigmoid(x: f64) -> f64 {
    -softplus(-x)
}

/// Dense adjacency of an undirected edge list over local indices.
pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Dense {
    let mut a = zeros(n, n);
    for &(u, v) in edges {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    a
}

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` from the textbook formula.
pub fn gcn_normalize(a: &Dense) -> Dense {
    let n = a.len();
    let mut at = a.clone();
    for (i, row) in at.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    let d: Vec<f64> = at.iter().map(|r| r.iter().sum::<f64>()).collect();
    let mut out = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = at[i][j] / d[i].sqrt() / d[j].sqrt();
        }
    }
    out
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `sigmoid(Z Zᵀ)`.
pub fn decode(z: &Dense) -> Dense {
    map(&matmul(z, &transpose(z)), sigmoid)
}

/// O(P·N) pair counting; ties count one half.
pub fn brute_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut twice = 0u64;
    for &p in pos {
        for &n in neg {
            twice += if p > n {
                2
            } else if p == n {
                1
            } else {
                0
            };
        }
    }
    twice as f64 / (2 * pos.len() * neg.len()) as f64
}

/// Average precision from explicit rank positions: an item ranks ahead of
/// another if its score is larger, or equal with an earlier input position.
pub fn brute_ap(scores: &[(f64, bool)]) -> f64 {
    let ahead = |j: usize, i: usize| {
        scores[j].0 > scores[i].0 || (scores[j].0 == scores[i].0 && j < i)
    };
    let n_pos = scores.iter().filter(|s| s.1).count();
    let mut total = 0.0;
    for i in 0..scores.len() {
        if !scores[i].1 {
            continue;
        }
        let rank = (0..scores.len()).filter(|&j| ahead(j, i)).count() + 1;
        let pos_at_or_above = (0..scores.len()).filter(|&j| scores[j].1 && ahead(j, i)).count() + 1;
        total += pos_at_or_above as f64 / rank as f64;
    }
    total / n_pos as f64
}

/// `KL(N(mq, sq²) ‖ N(mp, sp²))` by composite Simpson quadrature of
/// `q log(q / p)` over `mq ± 12 sq`.
pub fn kl_quadrature(mq: f64, sq: f64, mp: f64, sp: f64) -> f64 {
    let log_pdf = |x: f64, m: f64, s: f64| {
        -0.5 * ((x - m) / s).powi(2) - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    };
    let (lo, hi) = (mq - 12.0 * sq, mq + 12.0 * sq);
    let n = 20_000;
    let h = (hi - lo) / n as f64;
    let f = |x: f64| {
        let lq = log_pdf(x, mq, sq);
        lq.exp() * (lq - log_pdf(x, mp, sp))
    };
    let mut s = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// Weights of a static VGAE: attribute layer, shared GCN, mean and scale GCNs.
pub struct VgaeWeights {
    pub wx: Dense,
    pub bx: Vec<f64>,
    pub w_shared: Dense,
    pub w_mu: Dense,
    pub w_sigma: Dense,
    /// Zero columns appended to the attribute features before the shared layer.
    pub pad: usize,
}

/// Negative ELBO of a static VGAE with an `N(0, I)` prior on one graph, for
/// a given standard-normal draw `eps`: weighted Bernoulli reconstruction of
/// `A + I` plus the closed-form KL.
pub fn static_vgae_loss(w: &VgaeWeights, a: &Dense, x: &Dense, eps: &Dense) -> (f64, f64) {
    let n = a.len();
    let a_norm = gcn_normalize(a);
    let xf = map(&add_row(&matmul(x, &w.wx), &w.bx), relu);
    let input = hcat(&xf, &zeros(n, w.pad));
    let shared = map(&matmul(&a_norm, &matmul(&input, &w.w_shared)), relu);
    let mu = matmul(&a_norm, &matmul(&shared, &w.w_mu));
    let sigma = map(&matmul(&a_norm, &matmul(&shared, &w.w_sigma)), softplus);
    let l = mu[0].len();
    let z: Dense = (0..n)
        .map(|i| (0..l).map(|j| mu[i][j] + sigma[i][j] * eps[i][j]).collect())
        .collect();
    let logits = matmul(&z, &transpose(&z));

    let n2 = (n * n) as f64;
    let ones: f64 = a.iter().flatten().sum();
    let (pos_weight, norm) = if ones == 0.0 {
        (1.0, 1.0)
    } else {
        ((n2 - ones) / ones, n2 / (2.0 * (n2 - ones)))
    };
    let mut recon = 0.0;
    for i in 0..n {
        for j in 0..n {
            let y = if i == j { 1.0 } else { a[i][j] };
            let x = logits[i][j];
            recon -= pos_weight * y * log_sigmoid(x) + (1.0 - y) * log_sigmoid(-x);
        }
    }
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..l {
            let (m, s) = (mu[i][j], sigma[i][j]);
            kl += -s.ln() + 0.5 * (s * s + m * m) - 0.5;
        }
    }
    (norm * recon, kl)
}
