mod oracles;
mod support;

use rand::Rng;
use vgrnn::models::{kl_gaussian, GaussianParams};
use vgrnn::Tensor;

use support::rng;

fn params(mu: Vec<f64>, sigma: Vec<f64>) -> GaussianParams {
    let n = mu.len();
    GaussianParams::new(
        Tensor::from_vec(1, n, mu).unwrap(),
        Tensor::from_vec(1, n, sigma).unwrap(),
    )
    .unwrap()
}

fn random_params(r: &mut impl Rng, dim: usize) -> GaussianParams {
    params(
        (0..dim).map(|_| r.random_range(-3.0..3.0)).collect(),
        (0..dim).map(|_| (r.random_range(-3.0f64..2.0)).exp()).collect(),
    )
}

#[test]
fn kl_is_nonnegative_on_ten_thousand_pairs() {
    let mut r = rng(17);
    for _ in 0..10_000 {
        let q = random_params(&mut r, 3);
        let p = random_params(&mut r, 3);
        assert!(kl_gaussian(&q, &p).unwrap() >= 0.0);
    }
}

#[test]
fn kl_is_zero_only_for_equal_parameters() {
    let mut r = rng(18);
    for _ in 0..1000 {
        let q = random_params(&mut r, 4);
        assert!(kl_gaussian(&q, &q).unwrap().abs() <= 1e-12);
        let mut p = q.clone();
        let k = r.random_range(0..4);
        if r.random::<bool>() {
            p.mu.data_mut()[k] += 1e-3;
        } else {
            p.sigma.data_mut()[k] *= 1.001;
        }
        assert!(kl_gaussian(&q, &p).unwrap() > 0.0);
    }
}

#[test]
fn kl_matches_quadrature_in_one_dimension() {
    let mut r = rng(19);
    for _ in 0..50 {
        let (mq, mp) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let (sq, sp) = (r.random_range(0.3..2.0), r.random_range(0.3..2.0));
        let closed = kl_gaussian(&params(vec![mq], vec![sq]), &params(vec![mp], vec![sp])).unwrap();
        let quad = oracles::kl_quadrature(mq, sq, mp, sp);
        assert!((closed - quad).abs() <= 1e-6, "{closed} vs {quad}");
    }
}

#[test]
fn kl_rejects_mismatched_shapes() {
    let q = params(vec![0.0, 1.0], vec![1.0, 1.0]);
    let p = params(vec![0.0], vec![1.0]);
    assert!(kl_gaussian(&q, &p).is_err());
}
