//! Helpers shared by the integration tests. The oracle functions here are
//! written from the model definition directly and avoid the library's own
//! conditionals.
#![allow(dead_code)]

use gmrbm::{HiddenCode, ModelParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn normals<R: Rng>(rng: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| scale * normal(rng)).collect()
}

/// Random model with the given shape; `scale` sets the weight spread.
pub fn random_model<R: Rng>(rng: &mut R, n: usize, m: usize, q: usize, scale: f64) -> ModelParams {
    let b = normals(rng, n, 1.0);
    let c = normals(rng, m * q, 1.0);
    let w = normals(rng, q * m * n, scale);
    ModelParams::from_parts(n, m, q, b, c, w, None).unwrap()
}

/// Random model with `n <= 3`, `m <= 2`, `q <= 3`.
pub fn tiny_model<R: Rng>(rng: &mut R) -> ModelParams {
    let n = rng.random_range(1..=3);
    let m = rng.random_range(1..=2);
    let q = rng.random_range(1..=3);
    random_model(rng, n, m, q, 0.8)
}

pub fn random_code<R: Rng>(rng: &mut R, m: usize, q: usize) -> HiddenCode {
    HiddenCode::new((0..m).map(|_| rng.random_range(1..=q)).collect())
}

/// Every code of an `(m, q)` model, slot 0 fastest, 1-based states.
pub fn all_codes(m: usize, q: usize) -> Vec<Vec<usize>> {
    let total = q.pow(m as u32);
    (0..total)
        .map(|mut idx| {
            (0..m)
                .map(|_| {
                    let s = idx % q + 1;
                    idx /= q;
                    s
                })
                .collect()
        })
        .collect()
}

fn var(p: &ModelParams, i: usize) -> f64 {
    p.sigma2.as_ref().map_or(1.0, |s| s[i])
}

fn w(p: &ModelParams, k: usize, j: usize, i: usize) -> f64 {
    // k is 1-based
    p.w[((k - 1) * p.m + j) * p.n + i]
}

/// The energy written term by term from its definition.
pub fn energy(p: &ModelParams, v: &[f64], h: &[usize]) -> f64 {
    let mut e = 0.0;
    for i in 0..p.n {
        e += 0.5 * (v[i] - p.b[i]).powi(2) / var(p, i);
    }
    for (j, &k) in h.iter().enumerate() {
        e -= p.c[j * p.q + k - 1];
        for i in 0..p.n {
            e -= w(p, k, j, i) * v[i] / var(p, i);
        }
    }
    e
}

pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Unnormalized `log sum_h exp(-E(v, h))`.
pub fn log_unnormalized(p: &ModelParams, v: &[f64]) -> f64 {
    let terms: Vec<f64> = all_codes(p.m, p.q).iter().map(|h| -energy(p, v, h)).collect();
    logsumexp(&terms)
}

/// `p(h | v)` over all codes by direct normalization of `exp(-E)`.
pub fn joint_posterior(p: &ModelParams, v: &[f64]) -> Vec<f64> {
    let terms: Vec<f64> = all_codes(p.m, p.q).iter().map(|h| -energy(p, v, h)).collect();
    let lz = logsumexp(&terms);
    terms.iter().map(|t| (t - lz).exp()).collect()
}

/// Composite Simpson's rule on `[a, b]` with `intervals` (even) pieces.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let hstep = (b - a) / intervals as f64;
    let mut s = f(a) + f(b);
    for k in 1..intervals {
        let x = a + k as f64 * hstep;
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * hstep / 3.0
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}
