//! Gaussian visibles with q-state categorical hidden slots.
//!
//! Index conventions: visible units `i` and slots `j` are 0-based. Hidden
//! *states* are 1-based (`1..=q`) wherever they appear in the domain model
//! ([`HiddenCode`]); the shift to 0-based happens only when a template or
//! bias is looked up in storage.
//!
//! Storage layout:
//! - `c[j * q + k]` is the bias of slot `j` in (0-based) state `k`;
//! - `w[(k * m + j) * n + i]` is component `i` of the template of slot `j`
//!   in (0-based) state `k`, so each template is a contiguous stripe of
//!   length `n`.

use crate::error::{Error, Result};

/// All parameters of a GM-RBM.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    /// Visible bias, length `n`.
    pub b: Vec<f64>,
    /// Slot-state biases, `m * q`, slot-major.
    pub c: Vec<f64>,
    /// State templates, `q * m * n`, layout `(k, j, i)`.
    pub w: Vec<f64>,
    /// Per-visible variance; `None` means unit variance.
    pub sigma2: Option<Vec<f64>>,
}

/// One categorical state per slot, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HiddenCode {
    states: Vec<usize>,
}

impl HiddenCode {
    /// Builds a code from 1-based states. Range checks against a model
    /// happen when the code is used.
    pub fn new(states: Vec<usize>) -> Self {
        Self { states }
    }

    /// All slots in state 1.
    pub fn first(m: usize) -> Self {
        Self { states: vec![1; m] }
    }

    pub(crate) fn from_zero_based(idx: &[usize]) -> Self {
        Self {
            states: idx.iter().map(|&k| k + 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// 1-based state of slot `j`.
    pub fn state(&self, j: usize) -> usize {
        self.states[j]
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn set(&mut self, j: usize, state: usize) {
        self.states[j] = state;
    }

    /// 0-based storage index of slot `j`'s state.
    #[inline]
    pub(crate) fn index(&self, j: usize) -> usize {
        self.states[j] - 1
    }
}

/// Row-major `m x q` table of per-slot state probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub m: usize,
    pub q: usize,
    pub probs: Vec<f64>,
}

impl Posterior {
    pub fn row(&self, j: usize) -> &[f64] {
        &self.probs[j * self.q..(j + 1) * self.q]
    }

    /// Probability that slot `j` is in 1-based `state`.
    pub fn prob(&self, j: usize, state: usize) -> f64 {
        self.probs[j * self.q + state - 1]
    }
}

/// Normalizes `row` in place to a softmax, subtracting the row max first.
pub fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

/// `log(sum(exp(xs)))` without overflow. Returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

fn all_finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl ModelParams {
    /// A model with every parameter zero and unit variance.
    pub fn zeros(n: usize, m: usize, q: usize) -> Self {
        Self {
            n,
            m,
            q,
            b: vec![0.0; n],
            c: vec![0.0; m * q],
            w: vec![0.0; q * m * n],
            sigma2: None,
        }
    }

    /// Assembles a model from flat parameter vectors and validates it.
    pub fn from_parts(
        n: usize,
        m: usize,
        q: usize,
        b: Vec<f64>,
        c: Vec<f64>,
        w: Vec<f64>,
        sigma2: Option<Vec<f64>>,
    ) -> Result<Self> {
        let p = Self {
            n,
            m,
            q,
            b,
            c,
            w,
            sigma2,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks dimensions, finiteness and positivity of the variance.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.q == 0 {
            return Err(Error::usage(format!(
                "n, m and q must be positive (got n={}, m={}, q={})",
                self.n, self.m, self.q
            )));
        }
        if self.b.len() != self.n {
            return Err(Error::dim(format!("b has {} entries, expected {}", self.b.len(), self.n)));
        }
        if self.c.len() != self.m * self.q {
            return Err(Error::dim(format!(
                "c has {} entries, expected {}",
                self.c.len(),
                self.m * self.q
            )));
        }
        if self.w.len() != self.q * self.m * self.n {
            return Err(Error::dim(format!(
                "W has {} entries, expected {}",
                self.w.len(),
                self.q * self.m * self.n
            )));
        }
        if !all_finite(&self.b) {
            return Err(Error::NonFinite { block: "b" });
        }
        if !all_finite(&self.c) {
            return Err(Error::NonFinite { block: "c" });
        }
        if !all_finite(&self.w) {
            return Err(Error::NonFinite { block: "W" });
        }
        if let Some(s2) = &self.sigma2 {
            if s2.len() != self.n {
                return Err(Error::dim(format!("sigma2 has {} entries, expected {}", s2.len(), self.n)));
            }
            if !s2.iter().all(|&s| s.is_finite() && s > 0.0) {
                return Err(Error::usage("sigma2 entries must be finite and positive"));
            }
        }
        Ok(())
    }

    /// Total number of scalar parameters (`n + m q (1 + n)`).
    pub fn param_count(&self) -> usize {
        self.b.len() + self.c.len() + self.w.len()
    }

    /// Template of slot `j` in 0-based state `k`.
    #[inline]
    pub fn template(&self, k: usize, j: usize) -> &[f64] {
        let start = (k * self.m + j) * self.n;
        &self.w[start..start + self.n]
    }

    #[inline]
    pub fn template_mut(&mut self, k: usize, j: usize) -> &mut [f64] {
        let start = (k * self.m + j) * self.n;
        &mut self.w[start..start + self.n]
    }

    /// Bias of slot `j` in 0-based state `k`.
    #[inline]
    pub fn bias(&self, j: usize, k: usize) -> f64 {
        self.c[j * self.q + k]
    }

    /// Variance of visible unit `i`.
    #[inline]
    pub fn variance(&self, i: usize) -> f64 {
        self.sigma2.as_ref().map_or(1.0, |s| s[i])
    }

    pub fn check_visible(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::dim(format!("visible vector has {} entries, expected {}", v.len(), self.n)));
        }
        if !all_finite(v) {
            return Err(Error::usage("visible vector contains non-finite values"));
        }
        Ok(())
    }

    pub fn check_code(&self, h: &HiddenCode) -> Result<()> {
        if h.len() != self.m {
            return Err(Error::dim(format!("hidden code has {} slots, expected {}", h.len(), self.m)));
        }
        if let Some((j, &s)) = h.states().iter().enumerate().find(|(_, &s)| s == 0 || s > self.q) {
            return Err(Error::usage(format!("slot {j} has state {s}, outside 1..={}", self.q)));
        }
        Ok(())
    }

    /// `v / sigma2` elementwise (a copy of `v` under unit variance).
    pub(crate) fn scaled(&self, v: &[f64]) -> Vec<f64> {
        match &self.sigma2 {
            None => v.to_vec(),
            Some(s2) => v.iter().zip(s2).map(|(x, s)| x / s).collect(),
        }
    }

    pub(crate) fn mean_into(&self, h: &HiddenCode, out: &mut [f64]) {
        out.copy_from_slice(&self.b);
        for j in 0..self.m {
            for (o, t) in out.iter_mut().zip(self.template(h.index(j), j)) {
                *o += t;
            }
        }
    }

    /// `mu(h) = b + sum_j W^(h_j)_{:,j}`.
    pub fn conditional_mean(&self, h: &HiddenCode) -> Result<Vec<f64>> {
        self.check_code(h)?;
        let mut mu = vec![0.0; self.n];
        self.mean_into(h, &mut mu);
        Ok(mu)
    }

    pub(crate) fn energy_unchecked(&self, v: &[f64], h: &HiddenCode) -> f64 {
        let mut quad = 0.0;
        for i in 0..self.n {
            let d = v[i] - self.b[i];
            quad += d * d / self.variance(i);
        }
        let vs = self.scaled(v);
        let mut coupling = 0.0;
        let mut bias = 0.0;
        for j in 0..self.m {
            let k = h.index(j);
            bias += self.bias(j, k);
            coupling += dot(self.template(k, j), &vs);
        }
        0.5 * quad - bias - coupling
    }

    /// Joint energy `E(v, h)`. With `sigma2` present the quadratic and
    /// coupling terms are divided elementwise by the variance.
    pub fn energy(&self, v: &[f64], h: &HiddenCode) -> Result<f64> {
        self.check_visible(v)?;
        self.check_code(h)?;
        Ok(self.energy_unchecked(v, h))
    }

    pub(crate) fn offset_unchecked(&self, h: &HiddenCode, mu: &mut [f64]) -> f64 {
        self.mean_into(h, mu);
        let mut half = 0.0;
        for i in 0..self.n {
            half += (self.b[i] * self.b[i] - mu[i] * mu[i]) / self.variance(i);
        }
        let bias: f64 = (0..self.m).map(|j| self.bias(j, h.index(j))).sum();
        0.5 * half - bias
    }

    /// Completing-the-square constant
    /// `K(h) = 1/2 (|b|^2 - |mu(h)|^2) - sum_j c_{j,h_j}`
    /// (norms weighted by `1/sigma2` when present), so that
    /// `E(v,h) = 1/2 |v - mu(h)|^2 + K(h)`.
    pub fn offset_constant(&self, h: &HiddenCode) -> Result<f64> {
        self.check_code(h)?;
        let mut mu = vec![0.0; self.n];
        Ok(self.offset_unchecked(h, &mut mu))
    }

    /// Softmax logits `c_{j,k} + W^(k)_{:,j} . (v / sigma2)`, `m * q` row-major.
    pub(crate) fn logits_unchecked(&self, v: &[f64]) -> Vec<f64> {
        let vs = self.scaled(v);
        let mut logits = self.c.clone();
        for k in 0..self.q {
            for j in 0..self.m {
                logits[j * self.q + k] += dot(self.template(k, j), &vs);
            }
        }
        logits
    }

    pub(crate) fn posterior_unchecked(&self, v: &[f64]) -> Posterior {
        let mut probs = self.logits_unchecked(v);
        for row in probs.chunks_exact_mut(self.q) {
            softmax_in_place(row);
        }
        Posterior {
            m: self.m,
            q: self.q,
            probs,
        }
    }

    /// `p(h_j = k | v)` for every slot and state.
    pub fn hidden_posterior(&self, v: &[f64]) -> Result<Posterior> {
        self.check_visible(v)?;
        Ok(self.posterior_unchecked(v))
    }

    /// Gaussian `p(v | h)`: mean `mu(h)` and per-unit variance.
    pub fn visible_conditional(&self, h: &HiddenCode) -> Result<(Vec<f64>, Vec<f64>)> {
        let mean = self.conditional_mean(h)?;
        let var = self.sigma2.clone().unwrap_or_else(|| vec![1.0; self.n]);
        Ok((mean, var))
    }

    /// Visible mean averaged over the hidden posterior:
    /// `b + sum_j sum_k p(h_j=k|v) W^(k)_{:,j}`.
    pub fn posterior_mean(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_visible(v)?;
        let post = self.posterior_unchecked(v);
        Ok(self.expected_mean(&post))
    }

    pub(crate) fn expected_mean(&self, post: &Posterior) -> Vec<f64> {
        let mut out = self.b.clone();
        for k in 0..self.q {
            for j in 0..self.m {
                let p = post.probs[j * self.q + k];
                if p == 0.0 {
                    continue;
                }
                for (o, t) in out.iter_mut().zip(self.template(k, j)) {
                    *o += p * t;
                }
            }
        }
        out
    }
}

/// Dot product with four independent partial sums, which lets the compiler
/// vectorize the loop. The summation order is fixed, so results are
/// reproducible.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
