//! Gaussian-Multinoulli restricted Boltzmann machines.
//!
//! Gaussian visible units are paired with `m` hidden slots, each taking one
//! of `q` categorical (Potts) states. Given a hidden code the visible layer
//! is Gaussian around a sum of per-slot templates; given the visibles every
//! slot is an independent softmax. With `q = 2` and tied templates the model
//! is a Gaussian-Bernoulli RBM.
//!
//! - [`model`]: parameters, energy and closed-form conditionals
//! - [`gb`]: the Gaussian-Bernoulli baseline and the `q = 2` reduction
//! - [`exact`]: brute-force enumeration over all hidden codes
//! - [`sampler`]: Gibbs, Gibbs-Langevin and clamped-completion kernels
//! - [`trainer`]: CD-k / persistent CD with Adam and early stopping
//! - [`matching`]: parameter counts and matched model sizing
//! - [`assoc`]: hetero-associative recall benchmark
//! - [`io`]: vector files, checkpoints and mixture data

pub mod assoc;
pub mod error;
pub mod exact;
pub mod gb;
pub mod grad;
pub mod io;
pub mod matching;
pub mod model;
pub mod rng;
pub mod sampler;
pub mod trainer;

pub use error::{Error, Result};
pub use exact::{exact_gradient, exact_log_likelihood, exact_posterior, exact_summary, ExactOracle, ExactSummary};
pub use gb::{reduce_q2, GbParams};
pub use grad::GradientRecord;
pub use model::{HiddenCode, ModelParams, Posterior};
pub use sampler::{ChainState, Readout, SamplerConfig, SamplerKind};
pub use trainer::{EarlyStopRule, StopReason, TrainConfig};
