//! Gaussian-Bernoulli RBM baseline and the tied `q = 2` reduction.

use crate::error::{Error, Result};
use crate::model::{dot, HiddenCode, ModelParams};

/// Parameters of a Gaussian-Bernoulli RBM with energy
/// `sum_i (v_i - mu_i)^2 / 2 s_i - sum_ij (v_i / s_i) W_ij h_j - sum_j bhid_j h_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbParams {
    pub n: usize,
    /// Number of binary hidden units.
    pub m: usize,
    /// Visible offset.
    pub mu: Vec<f64>,
    /// Hidden bias.
    pub bhid: Vec<f64>,
    /// Weights stored column by column: `w[j * n + i]`.
    pub w: Vec<f64>,
    /// Per-visible variance.
    pub sigma2: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl GbParams {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            mu: vec![0.0; n],
            bhid: vec![0.0; m],
            w: vec![0.0; n * m],
            sigma2: vec![1.0; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.len() != self.n || self.sigma2.len() != self.n {
            return Err(Error::dim("mu and sigma2 must have n entries"));
        }
        if self.bhid.len() != self.m || self.w.len() != self.n * self.m {
            return Err(Error::dim("bhid must have m entries and W n*m"));
        }
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        if !(finite(&self.mu) && finite(&self.bhid) && finite(&self.w)) {
            return Err(Error::NonFinite { block: "gb" });
        }
        if !self.sigma2.iter().all(|&s| s.is_finite() && s > 0.0) {
            return Err(Error::usage("sigma2 entries must be finite and positive"));
        }
        Ok(())
    }

    /// Number of free parameters, `n + m + n m` (the variance is fixed).
    pub fn param_count(&self) -> usize {
        self.mu.len() + self.bhid.len() + self.w.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.w[j * self.n..(j + 1) * self.n]
    }

    fn check_bits(&self, bits: &[u8]) -> Result<()> {
        if bits.len() != self.m {
            return Err(Error::dim(format!("{} hidden bits, expected {}", bits.len(), self.m)));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::usage("hidden bits must be 0 or 1"));
        }
        Ok(())
    }

    fn check_visible(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::dim(format!("visible vector has {} entries, expected {}", v.len(), self.n)));
        }
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::usage("visible vector contains non-finite values"));
        }
        Ok(())
    }

    pub fn energy(&self, v: &[f64], bits: &[u8]) -> Result<f64> {
        self.check_visible(v)?;
        self.check_bits(bits)?;
        let vs: Vec<f64> = v.iter().zip(&self.sigma2).map(|(x, s)| x / s).collect();
        let quad: f64 = (0..self.n)
            .map(|i| (v[i] - self.mu[i]).powi(2) / (2.0 * self.sigma2[i]))
            .sum();
        let mut rest = 0.0;
        for (j, &bit) in bits.iter().enumerate() {
            if bit == 1 {
                rest += dot(self.column(j), &vs) + self.bhid[j];
            }
        }
        Ok(quad - rest)
    }

    /// `p(h_j = 1 | v) = sigmoid([W^T (v / sigma2)]_j + bhid_j)`.
    pub fn hidden_probs(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_visible(v)?;
        let vs: Vec<f64> = v.iter().zip(&self.sigma2).map(|(x, s)| x / s).collect();
        Ok((0..self.m)
            .map(|j| sigmoid(dot(self.column(j), &vs) + self.bhid[j]))
            .collect())
    }

    /// `p(v | h) = N(mu + W h, diag sigma2)`.
    pub fn visible_conditional(&self, bits: &[u8]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_bits(bits)?;
        let mut mean = self.mu.clone();
        for (j, &bit) in bits.iter().enumerate() {
            if bit == 1 {
                for (o, w) in mean.iter_mut().zip(self.column(j)) {
                    *o += w;
                }
            }
        }
        Ok((mean, self.sigma2.clone()))
    }
}

/// Maps a `q = 2` hidden code to GB bits: state 1 is "on".
pub fn code_to_bits(h: &HiddenCode) -> Vec<u8> {
    h.states().iter().map(|&s| u8::from(s == 1)).collect()
}

/// Rewrites a two-state GM-RBM as an equivalent GB-RBM.
///
/// Writing `W^(h_j) = W^(2) + [h_j = 1] (W^(1) - W^(2))`, the state-2
/// templates fold into the visible offset `mu = b + sum_j W^(2)_{:,j}`.
/// Completing the square around the new offset only adds a term that depends
/// on neither `v` nor `h`, so the hidden bias needs no correction beyond
/// `c_{j,1} - c_{j,2}`. The two energies then differ by a constant and the
/// hidden posteriors coincide.
pub fn reduce_q2(params: &ModelParams) -> Result<GbParams> {
    if params.q != 2 {
        return Err(Error::usage(format!("reduction needs q = 2, model has q = {}", params.q)));
    }
    let (n, m) = (params.n, params.m);
    let mut mu = params.b.clone();
    let mut w = Vec::with_capacity(n * m);
    let mut bhid = Vec::with_capacity(m);
    for j in 0..m {
        let on = params.template(0, j);
        let off = params.template(1, j);
        for (o, t) in mu.iter_mut().zip(off) {
            *o += t;
        }
        w.extend(on.iter().zip(off).map(|(a, b)| a - b));
        bhid.push(params.bias(j, 0) - params.bias(j, 1));
    }
    Ok(GbParams {
        n,
        m,
        mu,
        bhid,
        w,
        sigma2: params.sigma2.clone().unwrap_or_else(|| vec![1.0; n]),
    })
}
