//! Contrastive-divergence training with Adam and checkpoint-based early
//! stopping.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grad::GradientRecord;
use crate::model::{ModelParams, Posterior};
use crate::rng::{named_seed, stream_rng};
use crate::sampler::{sweep_unchecked, ChainState, SamplerConfig};

/// Chains per accumulation chunk in the negative phase. Fixed so that the
/// reduction order, and therefore the result, does not depend on the number
/// of worker threads.
const CHAIN_CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Sweeps per negative phase after burn-in.
    pub cd_k: usize,
    pub sampler: SamplerConfig,
    /// Extra sweeps run when a chain is (re)started from data.
    pub burn_in: usize,
    pub max_epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    /// Epochs between validation checkpoints.
    pub checkpoint_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            batch_size: 64,
            cd_k: 1,
            sampler: SamplerConfig::default(),
            burn_in: 2,
            max_epochs: 1000,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            checkpoint_every: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::usage("learning_rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::usage("batch_size must be at least 1"));
        }
        if self.max_epochs == 0 || self.checkpoint_every == 0 {
            return Err(Error::usage("max_epochs and checkpoint_every must be positive"));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::usage("adam betas must lie in [0, 1)"));
        }
        if self.adam_epsilon.is_nan() || self.adam_epsilon < 0.0 {
            return Err(Error::usage("adam_epsilon must be nonnegative"));
        }
        self.sampler.validate()
    }
}

/// Checkpoint-level stopping rules; the validation metric is "higher is
/// better".
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarlyStopRule {
    pub target_accuracy: f64,
    /// Number of most recent checkpoints in the plateau test.
    pub window: usize,
    pub std_threshold: f64,
    /// Checkpoints without improvement before stopping.
    pub patience: usize,
}

impl Default for EarlyStopRule {
    fn default() -> Self {
        Self {
            target_accuracy: 0.98,
            window: 20,
            std_threshold: 0.01,
            patience: 10,
        }
    }
}

/// Improvement smaller than this does not reset the patience counter.
pub const IMPROVEMENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    TargetReached,
    Plateau,
    NoImprovement,
    MaxEpochs,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::TargetReached => "target",
            StopReason::Plateau => "plateau",
            StopReason::NoImprovement => "no-improvement",
            StopReason::MaxEpochs => "max-epochs",
        })
    }
}

impl std::str::FromStr for StopReason {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target" => Ok(StopReason::TargetReached),
            "plateau" => Ok(StopReason::Plateau),
            "no-improvement" => Ok(StopReason::NoImprovement),
            "max-epochs" => Ok(StopReason::MaxEpochs),
            other => Err(Error::usage(format!("unknown stop reason `{other}`"))),
        }
    }
}

/// Running state of the early-stopping rules.
#[derive(Debug, Clone)]
pub struct EarlyStopper {
    rule: EarlyStopRule,
    history: Vec<f64>,
    best: f64,
    since_best: usize,
}

impl EarlyStopper {
    pub fn new(rule: EarlyStopRule) -> Result<Self> {
        if !(0.0..=1.0).contains(&rule.target_accuracy) {
            return Err(Error::usage("target_accuracy must lie in [0, 1]"));
        }
        Ok(Self {
            rule,
            history: Vec::new(),
            best: f64::NEG_INFINITY,
            since_best: 0,
        })
    }

    /// Records one checkpoint metric and reports whether to stop.
    pub fn observe(&mut self, metric: f64) -> Option<StopReason> {
        self.history.push(metric);
        if metric > self.best + IMPROVEMENT_TOLERANCE {
            self.best = metric;
            self.since_best = 0;
        } else {
            self.since_best += 1;
        }
        if metric >= self.rule.target_accuracy {
            return Some(StopReason::TargetReached);
        }
        let w = self.rule.window;
        if w > 0 && self.history.len() >= w {
            let tail = &self.history[self.history.len() - w..];
            let mean = tail.iter().sum::<f64>() / w as f64;
            let var = tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w as f64;
            if var.sqrt() < self.rule.std_threshold {
                return Some(StopReason::Plateau);
            }
        }
        if self.since_best >= self.rule.patience {
            return Some(StopReason::NoImprovement);
        }
        None
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }
}

/// Adam in ascent form: `theta += lr * m_hat / (sqrt(v_hat) + eps)`.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: i32,
    m: GradientRecord,
    v: GradientRecord,
}

impl Adam {
    pub fn new(params: &ModelParams, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m: GradientRecord::zeros_like(params),
            v: GradientRecord::zeros_like(params),
        }
    }

    pub fn from_config(params: &ModelParams, config: &TrainConfig) -> Self {
        Self::new(
            params,
            config.learning_rate,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_epsilon,
        )
    }

    pub fn steps_taken(&self) -> i32 {
        self.t
    }

    /// Moves `params` along `grad`. Fails without touching `params` if the
    /// gradient or the result is non-finite.
    pub fn step(&mut self, params: &mut ModelParams, grad: &GradientRecord) -> Result<()> {
        grad.check_finite()?;
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let mut next = params.clone();
        let blocks = [
            (&mut next.b, &grad.db, &mut self.m.db, &mut self.v.db),
            (&mut next.c, &grad.dc, &mut self.m.dc, &mut self.v.dc),
            (&mut next.w, &grad.dw, &mut self.m.dw, &mut self.v.dw),
        ];
        for (theta, g, m, v) in blocks {
            for i in 0..theta.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                theta[i] += lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        next.validate()?;
        *params = next;
        Ok(())
    }
}

/// Fresh parameters: `b` at the data mean (zero without data), `c = 0`,
/// templates i.i.d. `N(0, 0.01^2)`.
pub fn init_params(n: usize, m: usize, q: usize, data_sample: Option<&[Vec<f64>]>, seed: u64) -> Result<ModelParams> {
    if n == 0 || m == 0 || q == 0 {
        return Err(Error::usage("n, m and q must be positive"));
    }
    let mut params = ModelParams::zeros(n, m, q);
    if let Some(data) = data_sample.filter(|d| !d.is_empty()) {
        for v in data {
            if v.len() != n {
                return Err(Error::dim(format!("data row has {} entries, expected {n}", v.len())));
            }
            for (b, x) in params.b.iter_mut().zip(v) {
                *b += x;
            }
        }
        for b in params.b.iter_mut() {
            *b /= data.len() as f64;
        }
    }
    let mut rng = stream_rng(named_seed(seed, "init"), 0);
    for w in params.w.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *w = 0.01 * z;
    }
    params.validate()?;
    Ok(params)
}

/// Adds the sufficient statistics of `v` under `post` to `rec`:
/// `(v - b) / s2` to `db`, `p(h_j=k|v)` to `dc`, `p(h_j=k|v) v / s2` to `dW`.
fn accumulate(params: &ModelParams, v: &[f64], post: &Posterior, rec: &mut GradientRecord) {
    let vs = params.scaled(v);
    for i in 0..params.n {
        rec.db[i] += (v[i] - params.b[i]) / params.variance(i);
    }
    for (d, p) in rec.dc.iter_mut().zip(&post.probs) {
        *d += p;
    }
    let (m, q, n) = (params.m, params.q, params.n);
    for k in 0..q {
        for j in 0..m {
            let p = post.probs[j * q + k];
            let start = (k * m + j) * n;
            for (d, x) in rec.dw[start..start + n].iter_mut().zip(&vs) {
                *d += p * x;
            }
        }
    }
}

fn check_batch(params: &ModelParams, batch: &[Vec<f64>]) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::usage("empty batch"));
    }
    batch.iter().try_for_each(|v| params.check_visible(v))
}

/// Data-phase statistics averaged over `batch`, using the exact softmax
/// posterior rather than sampled codes.
pub fn positive_statistics(params: &ModelParams, batch: &[Vec<f64>]) -> Result<GradientRecord> {
    check_batch(params, batch)?;
    Ok(positive_unchecked(params, batch).0)
}

/// Returns the statistics and the summed squared reconstruction error
/// `|v - E[mu(h) | v]|^2` over the batch.
fn positive_unchecked(params: &ModelParams, batch: &[Vec<f64>]) -> (GradientRecord, f64) {
    let mut rec = GradientRecord::zeros_like(params);
    let mut sq_err = 0.0;
    for v in batch {
        let post = params.posterior_unchecked(v);
        accumulate(params, v, &post, &mut rec);
        let recon = params.expected_mean(&post);
        sq_err += v.iter().zip(&recon).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    }
    rec.scale(1.0 / batch.len() as f64);
    (rec, sq_err)
}

/// Negative-phase chains. Non-persistent pools restart from the batch on
/// every call; persistent pools are seeded from the first batch and then
/// carried across calls.
#[derive(Debug, Clone)]
pub struct ChainPool {
    pub chains: Vec<ChainState>,
    seed: u64,
    persistent: bool,
    size: usize,
}

impl ChainPool {
    pub fn new(seed: u64, persistent: bool, size: usize) -> Self {
        Self {
            chains: Vec::new(),
            seed,
            persistent,
            size,
        }
    }

    pub fn for_config(config: &TrainConfig) -> Self {
        Self::new(named_seed(config.seed, "chains"), config.sampler.persistent, config.batch_size)
    }

    pub fn is_persistent(&self) -> bool {
        self.persistent
    }

    /// Points the chains at `batch`; returns the number of sweeps to run.
    fn prepare(&mut self, params: &ModelParams, batch: &[Vec<f64>], config: &TrainConfig) -> usize {
        if self.persistent && !self.chains.is_empty() {
            return config.cd_k;
        }
        let count = if self.persistent { self.size.max(1) } else { batch.len() };
        let seed = self.seed;
        self.chains.truncate(count);
        for (i, chain) in self.chains.iter_mut().enumerate() {
            chain.reset_to(params, &batch[i % batch.len()]);
        }
        for i in self.chains.len()..count {
            self.chains
                .push(ChainState::from_visible(params, batch[i % batch.len()].clone(), seed, i as u64));
        }
        config.burn_in + config.cd_k
    }
}

/// Advances the pool's chains and returns the model-phase statistics,
/// posterior-averaged at each chain's final visible state.
pub fn negative_statistics(
    params: &ModelParams,
    pool: &mut ChainPool,
    batch: &[Vec<f64>],
    config: &TrainConfig,
) -> Result<GradientRecord> {
    check_batch(params, batch)?;
    config.sampler.validate()?;
    let sweeps = pool.prepare(params, batch, config);
    let sampler = config.sampler;
    let partials: Vec<GradientRecord> = pool
        .chains
        .par_chunks_mut(CHAIN_CHUNK)
        .map(|chunk| {
            let mut rec = GradientRecord::zeros_like(params);
            for chain in chunk {
                for _ in 0..sweeps {
                    sweep_unchecked(params, chain, &sampler);
                }
                let post = params.posterior_unchecked(&chain.v);
                accumulate(params, &chain.v, &post, &mut rec);
            }
            rec
        })
        .collect();
    let mut total = GradientRecord::zeros_like(params);
    for p in &partials {
        total.add_assign(p);
    }
    total.scale(1.0 / pool.chains.len() as f64);
    Ok(total)
}

/// One CD step: positive minus negative statistics, then an Adam move.
/// Returns the gradient that was applied.
pub fn cd_update(
    params: &mut ModelParams,
    batch: &[Vec<f64>],
    pool: &mut ChainPool,
    config: &TrainConfig,
    adam: &mut Adam,
) -> Result<GradientRecord> {
    check_batch(params, batch)?;
    let (mut grad, _) = positive_unchecked(params, batch);
    grad.sub_assign(&negative_statistics(params, pool, batch, config)?);
    adam.step(params, &grad)?;
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub epoch: usize,
    /// Mean squared reconstruction error per visible unit over the epoch.
    pub recon: f64,
    pub val: Option<f64>,
    pub stop: Option<StopReason>,
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "epoch {} recon {}", self.epoch, self.recon)?;
        match self.val {
            Some(v) => write!(f, " val {v}")?,
            None => f.write_str(" val nan")?,
        }
        match self.stop {
            Some(s) => write!(f, " stop {s}"),
            None => f.write_str(" stop -"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub params: ModelParams,
    pub log: Vec<LogRecord>,
    pub stop: StopReason,
    pub epochs: usize,
    /// Metric at the last checkpoint, if any ran.
    pub last_metric: Option<f64>,
}

impl FitOutcome {
    /// The log as line records `epoch <int> recon <float> val <float> stop <reason|->`.
    pub fn log_text(&self) -> String {
        self.log.iter().map(|r| format!("{r}\n")).collect()
    }
}

/// Trains `params` on `dataset` with shuffled mini-batches, calling
/// `validate(params, epoch)` every `checkpoint_every` epochs.
pub fn fit<F>(
    mut params: ModelParams,
    dataset: &[Vec<f64>],
    config: &TrainConfig,
    early_stop: EarlyStopRule,
    mut validate: F,
) -> Result<FitOutcome>
where
    F: FnMut(&ModelParams, usize) -> f64,
{
    config.validate()?;
    params.validate()?;
    check_batch(&params, dataset)?;
    let mut stopper = EarlyStopper::new(early_stop)?;
    let mut adam = Adam::from_config(&params, config);
    let mut pool = ChainPool::for_config(config);
    let mut shuffle_rng = stream_rng(named_seed(config.seed, "train"), 0);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut log = Vec::new();
    let mut last_metric = None;
    let mut batch: Vec<Vec<f64>> = Vec::with_capacity(config.batch_size);

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sq_err = 0.0;
        for idx in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(idx.iter().map(|&i| dataset[i].clone()));
            let (mut grad, err) = positive_unchecked(&params, &batch);
            sq_err += err;
            grad.sub_assign(&negative_statistics(&params, &mut pool, &batch, config)?);
            adam.step(&mut params, &grad)?;
        }
        let recon = sq_err / (dataset.len() * params.n) as f64;
        let mut record = LogRecord {
            epoch,
            recon,
            val: None,
            stop: None,
        };
        if epoch % config.checkpoint_every == 0 {
            let metric = validate(&params, epoch);
            record.val = Some(metric);
            last_metric = Some(metric);
            record.stop = stopper.observe(metric);
        }
        if record.stop.is_none() && epoch == config.max_epochs {
            record.stop = Some(StopReason::MaxEpochs);
        }
        let stop = record.stop;
        log.push(record);
        if let Some(stop) = stop {
            return Ok(FitOutcome {
                params,
                log,
                stop,
                epochs: epoch,
                last_metric,
            });
        }
    }
    unreachable!("the last epoch always records a stop reason")
}
