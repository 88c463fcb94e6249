//! Brute-force inference over every hidden code of a small model.
//!
//! Codes are enumerated with slot 0 varying fastest. Integrating the
//! Gaussian visible factor analytically gives
//! `Z = prod_i sqrt(2 pi sigma2_i) * sum_h exp(-K(h))`, so every quantity
//! here is exact up to floating-point rounding and independent of the
//! factorized conditionals in [`crate::model`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grad::GradientRecord;
use crate::model::{log_sum_exp, HiddenCode, ModelParams};

/// Default limit on the number of enumerated codes.
pub const DEFAULT_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSummary {
    pub log_partition: f64,
    /// `p(h)` in enumeration order.
    pub hidden_marginal: Vec<f64>,
}

/// Number of hidden codes, `q^m`, saturating on overflow.
pub fn code_count(params: &ModelParams) -> u128 {
    let mut count: u128 = 1;
    for _ in 0..params.m {
        count = count.saturating_mul(params.q as u128);
    }
    count
}

/// The hidden code at position `index` of the enumeration order.
pub fn code_at(params: &ModelParams, mut index: usize) -> HiddenCode {
    let mut idx = vec![0; params.m];
    for slot in idx.iter_mut() {
        *slot = index % params.q;
        index /= params.q;
    }
    HiddenCode::from_zero_based(&idx)
}

/// Position of `h` in the enumeration order.
pub fn code_index(params: &ModelParams, h: &HiddenCode) -> usize {
    (0..params.m).rev().fold(0, |acc, j| acc * params.q + h.index(j))
}

/// Every hidden code, slot 0 fastest.
pub struct Codes {
    q: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for Codes {
    type Item = HiddenCode;

    fn next(&mut self) -> Option<HiddenCode> {
        let cur = self.next.take()?;
        let code = HiddenCode::from_zero_based(&cur);
        let mut succ = cur;
        for slot in succ.iter_mut() {
            *slot += 1;
            if *slot < self.q {
                self.next = Some(succ);
                return Some(code);
            }
            *slot = 0;
        }
        Some(code)
    }
}

/// Exhaustive inference bound to one model.
pub struct ExactOracle<'a> {
    params: &'a ModelParams,
    cap: u128,
}

impl<'a> ExactOracle<'a> {
    pub fn new(params: &'a ModelParams) -> Result<Self> {
        Self::with_cap(params, DEFAULT_CAP)
    }

    pub fn with_cap(params: &'a ModelParams, cap: u128) -> Result<Self> {
        params.validate()?;
        let codes = code_count(params);
        if codes > cap {
            return Err(Error::Capacity { codes, cap });
        }
        Ok(Self { params, cap })
    }

    pub fn cap(&self) -> u128 {
        self.cap
    }

    pub fn codes(&self) -> Codes {
        Codes {
            q: self.params.q,
            next: Some(vec![0; self.params.m]),
        }
    }

    fn log_gaussian_norm(&self) -> f64 {
        (0..self.params.n)
            .map(|i| 0.5 * (2.0 * PI * self.params.variance(i)).ln())
            .sum()
    }

    fn neg_offsets(&self) -> Vec<f64> {
        let mut mu = vec![0.0; self.params.n];
        self.codes()
            .map(|h| -self.params.offset_unchecked(&h, &mut mu))
            .collect()
    }

    pub fn summary(&self) -> ExactSummary {
        let neg_k = self.neg_offsets();
        let lse = log_sum_exp(&neg_k);
        ExactSummary {
            log_partition: self.log_gaussian_norm() + lse,
            hidden_marginal: neg_k.iter().map(|x| (x - lse).exp()).collect(),
        }
    }

    pub fn log_partition(&self) -> f64 {
        self.log_gaussian_norm() + log_sum_exp(&self.neg_offsets())
    }

    fn neg_energies(&self, v: &[f64]) -> Vec<f64> {
        self.codes()
            .map(|h| -self.params.energy_unchecked(v, &h))
            .collect()
    }

    /// `log p(v)`.
    pub fn log_likelihood(&self, v: &[f64]) -> Result<f64> {
        self.params.check_visible(v)?;
        Ok(log_sum_exp(&self.neg_energies(v)) - self.log_partition())
    }

    /// Mean of `log p(v)` over `data`.
    pub fn mean_log_likelihood(&self, data: &[Vec<f64>]) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::usage("empty dataset"));
        }
        for v in data {
            self.params.check_visible(v)?;
        }
        let log_z = self.log_partition();
        let total: f64 = data
            .iter()
            .map(|v| log_sum_exp(&self.neg_energies(v)) - log_z)
            .sum();
        Ok(total / data.len() as f64)
    }

    /// `p(h | v)` over all codes in enumeration order.
    pub fn posterior(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.params.check_visible(v)?;
        let neg_e = self.neg_energies(v);
        let lse = log_sum_exp(&neg_e);
        Ok(neg_e.iter().map(|x| (x - lse).exp()).collect())
    }

    /// Marginal of slot `j` under a table over all codes; entry `k` is the
    /// probability of 0-based state `k`.
    pub fn slot_marginal(&self, table: &[f64], j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.params.q];
        for (h, p) in self.codes().zip(table) {
            out[h.index(j)] += p;
        }
        out
    }

    /// Data-phase expectation of `-dE/dtheta`, averaged over `data`.
    pub fn positive_phase(&self, data: &[Vec<f64>]) -> Result<GradientRecord> {
        let p = self.params;
        let mut rec = GradientRecord::zeros_like(p);
        for v in data {
            let post = self.posterior(v)?;
            let vs = p.scaled(v);
            for i in 0..p.n {
                rec.db[i] += (v[i] - p.b[i]) / p.variance(i);
            }
            for (h, &ph) in self.codes().zip(&post) {
                for j in 0..p.m {
                    let k = h.index(j);
                    rec.dc[j * p.q + k] += ph;
                    let start = (k * p.m + j) * p.n;
                    for (d, x) in rec.dw[start..start + p.n].iter_mut().zip(&vs) {
                        *d += ph * x;
                    }
                }
            }
        }
        rec.scale(1.0 / data.len() as f64);
        Ok(rec)
    }

    /// Model-phase expectation of `-dE/dtheta` under the joint `p(v, h)`,
    /// using `E[v | h] = mu(h)`.
    pub fn model_moments(&self) -> GradientRecord {
        let p = self.params;
        let marginal = self.summary().hidden_marginal;
        let mut rec = GradientRecord::zeros_like(p);
        let mut mu = vec![0.0; p.n];
        for (h, &ph) in self.codes().zip(&marginal) {
            p.mean_into(&h, &mut mu);
            for i in 0..p.n {
                mu[i] /= p.variance(i);
                rec.db[i] += ph * (mu[i] - p.b[i] / p.variance(i));
            }
            for j in 0..p.m {
                let k = h.index(j);
                rec.dc[j * p.q + k] += ph;
                let start = (k * p.m + j) * p.n;
                for (d, x) in rec.dw[start..start + p.n].iter_mut().zip(&mu) {
                    *d += ph * x;
                }
            }
        }
        rec
    }

    /// Gradient of the mean log-likelihood of `data`.
    pub fn gradient(&self, data: &[Vec<f64>]) -> Result<GradientRecord> {
        if data.is_empty() {
            return Err(Error::usage("empty dataset"));
        }
        let mut g = self.positive_phase(data)?;
        g.sub_assign(&self.model_moments());
        Ok(g)
    }
}

pub fn exact_summary(params: &ModelParams) -> Result<ExactSummary> {
    Ok(ExactOracle::new(params)?.summary())
}

pub fn exact_log_likelihood(params: &ModelParams, v: &[f64]) -> Result<f64> {
    ExactOracle::new(params)?.log_likelihood(v)
}

pub fn exact_posterior(params: &ModelParams, v: &[f64]) -> Result<Vec<f64>> {
    ExactOracle::new(params)?.posterior(v)
}

pub fn exact_gradient(params: &ModelParams, data: &[Vec<f64>]) -> Result<GradientRecord> {
    ExactOracle::new(params)?.gradient(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_order_slot_zero_fastest() {
        let p = ModelParams::zeros(1, 2, 3);
        let oracle = ExactOracle::new(&p).unwrap();
        let codes: Vec<_> = oracle.codes().map(|h| h.states().to_vec()).collect();
        assert_eq!(codes.len(), 9);
        assert_eq!(codes[0], vec![1, 1]);
        assert_eq!(codes[1], vec![2, 1]);
        assert_eq!(codes[3], vec![1, 2]);
        assert_eq!(codes[8], vec![3, 3]);
        for (i, h) in oracle.codes().enumerate() {
            assert_eq!(code_index(&p, &h), i);
            assert_eq!(code_at(&p, i), h);
        }
    }

    #[test]
    fn symmetric_states_are_uniform() {
        let p = ModelParams::zeros(1, 1, 3);
        let s = exact_summary(&p).unwrap();
        for x in &s.hidden_marginal {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let expect = 0.5 * (2.0 * PI).ln() + 3f64.ln();
        assert!((s.log_partition - expect).abs() < 1e-14);
    }

    #[test]
    fn marginal_follows_offsets() {
        // m=1, q=2 with W=0: K(h) = -c_h, so c = (0, -ln 3) gives K = (0, ln 3).
        let mut p = ModelParams::zeros(2, 1, 2);
        p.c = vec![0.0, -(3f64.ln())];
        let s = exact_summary(&p).unwrap();
        assert!((s.hidden_marginal[0] - 0.75).abs() < 1e-14);
        assert!((s.hidden_marginal[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn standard_normal_density() {
        let p = ModelParams::zeros(1, 1, 1);
        let ll = exact_log_likelihood(&p, &[0.0]).unwrap();
        assert!((ll + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
        assert!((ll + 0.9189).abs() < 1e-4);
    }

    #[test]
    fn capacity_cap_is_enforced() {
        let p = ModelParams::zeros(1, 20, 3);
        match ExactOracle::new(&p) {
            Err(Error::Capacity { codes, cap }) => {
                assert_eq!(codes, 3u128.pow(20));
                assert_eq!(cap, DEFAULT_CAP);
            }
            _ => panic!("expected a capacity error"),
        }
        assert!(ExactOracle::with_cap(&ModelParams::zeros(1, 3, 3), 26).is_err());
        assert!(ExactOracle::with_cap(&ModelParams::zeros(1, 3, 3), 27).is_ok());
    }

    #[test]
    fn bias_gradient_vanishes_at_data_mean() {
        let data = vec![vec![1.0, -2.0], vec![3.0, 0.5], vec![-0.5, 0.0]];
        let mut p = ModelParams::zeros(2, 2, 3);
        p.b = vec![3.5 / 3.0, -1.5 / 3.0];
        let g = exact_gradient(&p, &data).unwrap();
        for x in &g.db {
            assert!(x.abs() < 1e-10, "{x}");
        }
    }
}
