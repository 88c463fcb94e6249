//! Transition kernels: categorical hidden draws, exact Gaussian visible
//! draws, unadjusted visible Langevin steps, block-Gibbs sweeps and clamped
//! completion.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{HiddenCode, ModelParams, Posterior};
use crate::rng::{stream_rng, ChainRng};

/// How the visible layer is refreshed after each hidden draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerKind {
    /// Exact draw from `p(v | h)`.
    Gibbs,
    /// `steps` unadjusted Langevin updates of size `eps` at fixed `h`.
    GibbsLangevin { eps: f64, steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub kind: SamplerKind,
    /// Carry negative-phase chains across parameter updates.
    pub persistent: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            kind: SamplerKind::Gibbs,
            persistent: false,
        }
    }
}

impl SamplerConfig {
    pub fn gibbs() -> Self {
        Self::default()
    }

    pub fn langevin(eps: f64, steps: usize) -> Self {
        Self {
            kind: SamplerKind::GibbsLangevin { eps, steps },
            persistent: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SamplerKind::GibbsLangevin { eps, steps } = self.kind {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::usage("langevin eps must be positive"));
            }
            if steps == 0 {
                return Err(Error::usage("langevin steps must be positive"));
            }
        }
        Ok(())
    }
}

/// What clamped completion returns on the free coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Readout {
    /// `mu(h)` after the last hidden draw.
    #[default]
    Mean,
    /// The last visible sample.
    Sample,
}

/// One Markov chain: the current `(v, h)` and its private random stream.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub v: Vec<f64>,
    pub h: HiddenCode,
    pub stream: u64,
    pub rng: ChainRng,
}

impl ChainState {
    pub fn new(v: Vec<f64>, h: HiddenCode, seed: u64, stream: u64) -> Self {
        Self {
            v,
            h,
            stream,
            rng: stream_rng(seed, stream),
        }
    }

    /// Starts at `v` with `h` drawn once from `p(h | v)`.
    pub fn from_visible(params: &ModelParams, v: Vec<f64>, seed: u64, stream: u64) -> Self {
        let mut rng = stream_rng(seed, stream);
        let h = draw_hidden(params, &v, &mut rng);
        Self { v, h, stream, rng }
    }

    /// Starts at standard normal noise in the visible layer.
    pub fn from_noise(params: &ModelParams, seed: u64, stream: u64) -> Self {
        let mut rng = stream_rng(seed, stream);
        let v: Vec<f64> = (0..params.n).map(|_| rng.sample(StandardNormal)).collect();
        let h = draw_hidden(params, &v, &mut rng);
        Self { v, h, stream, rng }
    }

    /// Replaces the visible state and redraws `h`, keeping the stream.
    pub fn reset_to(&mut self, params: &ModelParams, v: &[f64]) {
        self.v.clear();
        self.v.extend_from_slice(v);
        self.h = draw_hidden(params, &self.v, &mut self.rng);
    }
}

/// Inverse-CDF draw of one 0-based state from a normalized row.
#[inline]
fn draw_categorical<R: Rng + ?Sized>(row: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // Rounding left the cumulative sum just under u.
    row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
}

pub(crate) fn draw_from_posterior<R: Rng + ?Sized>(post: &Posterior, rng: &mut R) -> HiddenCode {
    let idx: Vec<usize> = (0..post.m).map(|j| draw_categorical(post.row(j), rng)).collect();
    HiddenCode::from_zero_based(&idx)
}

pub(crate) fn draw_hidden<R: Rng + ?Sized>(params: &ModelParams, v: &[f64], rng: &mut R) -> HiddenCode {
    draw_from_posterior(&params.posterior_unchecked(v), rng)
}

/// Draws every slot independently from its softmax posterior given `v`.
pub fn sample_hidden<R: Rng + ?Sized>(params: &ModelParams, v: &[f64], rng: &mut R) -> Result<HiddenCode> {
    params.check_visible(v)?;
    Ok(draw_hidden(params, v, rng))
}

fn draw_visible_into<R: Rng + ?Sized>(params: &ModelParams, h: &HiddenCode, out: &mut [f64], rng: &mut R) {
    params.mean_into(h, out);
    for (i, x) in out.iter_mut().enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        *x += params.variance(i).sqrt() * z;
    }
}

/// Exact draw from `N(mu(h), diag var)`.
pub fn sample_visible<R: Rng + ?Sized>(params: &ModelParams, h: &HiddenCode, rng: &mut R) -> Result<Vec<f64>> {
    params.check_code(h)?;
    let mut v = vec![0.0; params.n];
    draw_visible_into(params, h, &mut v, rng);
    Ok(v)
}

/// Langevin update with caller-supplied noise:
/// `v + eps^2 / 2 * (mu - v) / sigma2 + eps * noise`.
pub fn langevin_step_with_noise(
    params: &ModelParams,
    h: &HiddenCode,
    v: &[f64],
    eps: f64,
    noise: &[f64],
) -> Result<Vec<f64>> {
    params.check_code(h)?;
    params.check_visible(v)?;
    if noise.len() != params.n {
        return Err(Error::dim("noise length must equal n"));
    }
    let mut mu = vec![0.0; params.n];
    params.mean_into(h, &mut mu);
    let half = 0.5 * eps * eps;
    Ok((0..params.n)
        .map(|i| v[i] + half * (mu[i] - v[i]) / params.variance(i) + eps * noise[i])
        .collect())
}

/// One unadjusted Langevin step on `v` at fixed `h` (no Metropolis test).
pub fn langevin_visible_step<R: Rng + ?Sized>(
    params: &ModelParams,
    h: &HiddenCode,
    v: &[f64],
    eps: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::usage("langevin eps must be positive"));
    }
    let noise: Vec<f64> = (0..params.n).map(|_| rng.sample(StandardNormal)).collect();
    langevin_step_with_noise(params, h, v, eps, &noise)
}

/// In-place Langevin updates on the coordinates where `free` is true (all
/// coordinates when `free` is `None`). `mu` must already hold `mu(h)`.
fn langevin_in_place<R: Rng + ?Sized>(
    params: &ModelParams,
    mu: &[f64],
    v: &mut [f64],
    free: Option<&[bool]>,
    eps: f64,
    steps: usize,
    rng: &mut R,
) {
    let half = 0.5 * eps * eps;
    for _ in 0..steps {
        for i in 0..params.n {
            if free.is_some_and(|f| !f[i]) {
                continue;
            }
            let z: f64 = rng.sample(StandardNormal);
            v[i] += half * (mu[i] - v[i]) / params.variance(i) + eps * z;
        }
    }
}

pub(crate) fn sweep_unchecked(params: &ModelParams, state: &mut ChainState, config: &SamplerConfig) {
    state.h = draw_hidden(params, &state.v, &mut state.rng);
    match config.kind {
        SamplerKind::Gibbs => draw_visible_into(params, &state.h, &mut state.v, &mut state.rng),
        SamplerKind::GibbsLangevin { eps, steps } => {
            let mut mu = vec![0.0; params.n];
            params.mean_into(&state.h, &mut mu);
            langevin_in_place(params, &mu, &mut state.v, None, eps, steps, &mut state.rng);
        }
    }
}

/// One block-Gibbs sweep: hidden draw first, then the visible refresh.
pub fn gibbs_sweep(params: &ModelParams, state: &mut ChainState, config: &SamplerConfig) -> Result<()> {
    config.validate()?;
    params.check_visible(&state.v)?;
    params.check_code(&state.h)?;
    sweep_unchecked(params, state, config);
    Ok(())
}

/// Fills the unclamped coordinates of `v` by running `steps` sweeps with the
/// clamped coordinates held fixed. `clamped[i] == true` pins `v[i]`.
///
/// Free coordinates start at the visible bias. Because `p(v | h)` is a
/// diagonal Gaussian, resampling only the free coordinates is an exact
/// conditional draw.
pub fn clamped_completion<R: Rng + ?Sized>(
    params: &ModelParams,
    v: &[f64],
    clamped: &[bool],
    steps: usize,
    config: &SamplerConfig,
    readout: Readout,
    rng: &mut R,
) -> Result<Vec<f64>> {
    config.validate()?;
    if v.len() != params.n || clamped.len() != params.n {
        return Err(Error::dim("clamp vector and mask must have n entries"));
    }
    if clamped.iter().all(|&c| c) {
        return Err(Error::usage("no free coordinates to complete"));
    }
    if steps == 0 {
        return Err(Error::usage("completion needs at least one sweep"));
    }
    if !(0..params.n).all(|i| !clamped[i] || v[i].is_finite()) {
        return Err(Error::usage("clamped values must be finite"));
    }
    let free: Vec<bool> = clamped.iter().map(|c| !c).collect();
    let mut state: Vec<f64> = (0..params.n)
        .map(|i| if clamped[i] { v[i] } else { params.b[i] })
        .collect();
    let mut mu = vec![0.0; params.n];
    for step in 0..steps {
        let h = draw_hidden(params, &state, rng);
        params.mean_into(&h, &mut mu);
        if step + 1 == steps && readout == Readout::Mean {
            for i in 0..params.n {
                if free[i] {
                    state[i] = mu[i];
                }
            }
            break;
        }
        match config.kind {
            SamplerKind::Gibbs => {
                for i in 0..params.n {
                    if free[i] {
                        let z: f64 = rng.sample(StandardNormal);
                        state[i] = mu[i] + params.variance(i).sqrt() * z;
                    }
                }
            }
            SamplerKind::GibbsLangevin { eps, steps: inner } => {
                langevin_in_place(params, &mu, &mut state, Some(&free), eps, inner, rng);
            }
        }
    }
    Ok(state)
}
