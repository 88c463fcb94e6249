//! Hetero-associative recall: stimulus/response pairs stored as
//! concatenated, standardized visible vectors and retrieved by clamped
//! completion followed by a nearest-neighbour lookup among the stored
//! responses.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::{budget_hidden_units, Rounding};
use crate::model::ModelParams;
use crate::rng::{named_seed, stream_rng};
use crate::sampler::{clamped_completion, Readout, SamplerConfig};
use crate::trainer::{fit, init_params, EarlyStopRule, StopReason, TrainConfig};

/// Per-dimension standardization statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    /// Population mean and standard deviation of each column.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::usage("no rows to normalize"))?;
        let dim = first.len();
        let count = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            if r.len() != dim {
                return Err(Error::dim("rows have different lengths"));
            }
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std: Vec<f64> = var.iter().map(|v| (v / count).sqrt()).collect();
        for (dim, (s, m)) in std.iter().zip(&mean).enumerate() {
            if s.is_nan() || *s <= 1e-12 * m.abs().max(1.0) {
                return Err(Error::ZeroVariance { dim });
            }
        }
        Ok(Self { mean, std })
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }

    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((z, m), s)| z * s + m)
            .collect()
    }
}

/// Raw pairs plus the standardization of their `2d`-dimensional
/// concatenations. The stored responses double as the retrieval vocabulary.
#[derive(Debug, Clone)]
pub struct PairDataset {
    pub stimuli: Vec<Vec<f64>>,
    pub responses: Vec<Vec<f64>>,
    pub normalization: Normalization,
}

pub fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

impl PairDataset {
    pub fn build(raw_pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<Self> {
        if raw_pairs.len() < 2 {
            return Err(Error::usage("a pair dataset needs at least two pairs"));
        }
        let d = raw_pairs[0].0.len();
        if d == 0 {
            return Err(Error::usage("embedding dimension must be positive"));
        }
        for (i, (s, r)) in raw_pairs.iter().enumerate() {
            if s.len() != d || r.len() != d {
                return Err(Error::dim(format!("pair {i} does not have dimension {d}")));
            }
        }
        let rows: Vec<Vec<f64>> = raw_pairs.iter().map(|(s, r)| concat(s, r)).collect();
        let normalization = Normalization::fit(&rows)?;
        Ok(Self {
            stimuli: raw_pairs.iter().map(|p| p.0.clone()).collect(),
            responses: raw_pairs.iter().map(|p| p.1.clone()).collect(),
            normalization,
        })
    }

    /// Splits `2d`-wide rows (stimulus then response) into pairs.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || !width.is_multiple_of(2) {
            return Err(Error::dim(format!("pair rows need an even, positive width (got {width})")));
        }
        let pairs: Vec<_> = rows
            .iter()
            .map(|r| (r[..width / 2].to_vec(), r[width / 2..].to_vec()))
            .collect();
        Self::build(&pairs)
    }

    pub fn len(&self) -> usize {
        self.stimuli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stimuli.is_empty()
    }

    /// Embedding dimension `d`; the model sees `2d` visibles.
    pub fn dim(&self) -> usize {
        self.stimuli.first().map_or(0, Vec::len)
    }

    pub fn vocab(&self) -> &[Vec<f64>] {
        &self.responses
    }

    /// Standardized concatenation of pair `i`.
    pub fn normalized_row(&self, i: usize) -> Vec<f64> {
        self.normalization
            .normalize(&concat(&self.stimuli[i], &self.responses[i]))
    }

    pub fn training_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.normalized_row(i)).collect()
    }

    pub fn raw_rows(&self) -> Vec<Vec<f64>> {
        self.stimuli
            .iter()
            .zip(&self.responses)
            .map(|(s, r)| concat(s, r))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairStructure {
    /// Independent standard normal stimuli and responses.
    Random,
    /// Responses scattered around `ceil(sqrt(N))` shared centroids.
    Clustered,
}

/// Spread of clustered responses around their centroid, relative to the
/// unit-variance centroids.
pub const CLUSTER_SPREAD: f64 = 0.5;

/// Synthetic stand-in for an embedding corpus.
pub fn synth_pairs(count: usize, d: usize, seed: u64, structure: PairStructure) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    if count < 2 || d < 2 {
        return Err(Error::usage("synthetic pairs need N >= 2 and d >= 2"));
    }
    let mut rng = stream_rng(seed, 0);
    let mut gauss = |len: usize, scale: f64| -> Vec<f64> {
        (0..len)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };
    let stimuli: Vec<Vec<f64>> = (0..count).map(|_| gauss(d, 1.0)).collect();
    let responses: Vec<Vec<f64>> = match structure {
        PairStructure::Random => (0..count).map(|_| gauss(d, 1.0)).collect(),
        PairStructure::Clustered => {
            let k = (count as f64).sqrt().ceil() as usize;
            let centroids: Vec<Vec<f64>> = (0..k).map(|_| gauss(d, 1.0)).collect();
            (0..count)
                .map(|i| {
                    let noise = gauss(d, CLUSTER_SPREAD);
                    centroids[i % k].iter().zip(noise).map(|(c, e)| c + e).collect()
                })
                .collect()
        }
    };
    Ok(stimuli.into_iter().zip(responses).collect())
}

/// Cluster of pair `i` under [`PairStructure::Clustered`].
pub fn cluster_of(i: usize, count: usize) -> usize {
    i % (count as f64).sqrt().ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Distance {
    #[default]
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecallConfig {
    /// Clamped sweeps per query.
    pub steps: usize,
    pub sampler: SamplerConfig,
    pub readout: Readout,
    pub distance: Distance,
}

impl Default for RecallConfig {
    fn default() -> Self {
        Self {
            steps: 10,
            sampler: SamplerConfig::default(),
            readout: Readout::Mean,
            distance: Distance::Euclidean,
        }
    }
}

/// Index of the vocabulary entry closest to `x`; ties go to the lowest index.
pub fn nearest(x: &[f64], vocab: &[Vec<f64>], distance: Distance) -> usize {
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    let norm = |a: &[f64]| a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let x_norm = norm(x);
    for (i, cand) in vocab.iter().enumerate() {
        let score = match distance {
            Distance::Euclidean => x.iter().zip(cand).map(|(a, b)| (a - b).powi(2)).sum::<f64>(),
            Distance::Cosine => {
                let dot: f64 = x.iter().zip(cand).map(|(a, b)| a * b).sum();
                let denom = x_norm * norm(cand);
                if denom > 0.0 {
                    -dot / denom
                } else {
                    0.0
                }
            }
        };
        if score < best_score {
            best = i;
            best_score = score;
        }
    }
    best
}

fn check_model(params: &ModelParams, dataset: &PairDataset) -> Result<()> {
    if params.n != 2 * dataset.dim() {
        return Err(Error::dim(format!(
            "model has {} visibles but pairs need {}",
            params.n,
            2 * dataset.dim()
        )));
    }
    Ok(())
}

/// Clamps the stimulus half of pair `index`, completes the response half
/// and returns the index of the nearest stored response.
pub fn recall_one<R: Rng + ?Sized>(
    params: &ModelParams,
    dataset: &PairDataset,
    index: usize,
    config: &RecallConfig,
    rng: &mut R,
) -> Result<usize> {
    check_model(params, dataset)?;
    if index >= dataset.len() {
        return Err(Error::usage(format!("pair {index} out of range")));
    }
    let d = dataset.dim();
    let mut query = dataset.normalized_row(index);
    query[d..].iter_mut().for_each(|x| *x = 0.0);
    let mask: Vec<bool> = (0..2 * d).map(|i| i < d).collect();
    let completed = clamped_completion(params, &query, &mask, config.steps, &config.sampler, config.readout, rng)?;
    let raw = dataset.normalization.denormalize(&completed);
    Ok(nearest(&raw[d..], dataset.vocab(), config.distance))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairOutcome {
    pub index: usize,
    pub retrieved: usize,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecallResult {
    pub accuracy: f64,
    pub per_pair: Vec<PairOutcome>,
}

/// Recall over the pairs listed in `indices`; pair `i` draws from stream
/// `i` of `seed`, so the result does not depend on thread scheduling.
pub fn evaluate_recall_on(
    params: &ModelParams,
    dataset: &PairDataset,
    indices: &[usize],
    config: &RecallConfig,
    seed: u64,
) -> Result<RecallResult> {
    check_model(params, dataset)?;
    if indices.is_empty() {
        return Err(Error::usage("no pairs to evaluate"));
    }
    let per_pair = indices
        .par_iter()
        .map(|&index| {
            let mut rng = stream_rng(seed, index as u64);
            let retrieved = recall_one(params, dataset, index, config, &mut rng)?;
            Ok(PairOutcome {
                index,
                retrieved,
                correct: retrieved == index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let hits = per_pair.iter().filter(|p| p.correct).count();
    Ok(RecallResult {
        accuracy: hits as f64 / per_pair.len() as f64,
        per_pair,
    })
}

/// Recall over every stored pair.
pub fn evaluate_recall(params: &ModelParams, dataset: &PairDataset, config: &RecallConfig, seed: u64) -> Result<RecallResult> {
    let all: Vec<usize> = (0..dataset.len()).collect();
    evaluate_recall_on(params, dataset, &all, config, seed)
}

/// Settings shared by every cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Visible units, `2d`.
    pub n_v: usize,
    pub structure: PairStructure,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub early_stop: EarlyStopRule,
    pub recall: RecallConfig,
    pub rounding: Rounding,
}

impl SweepConfig {
    pub fn new(n_v: usize) -> Self {
        Self {
            n_v,
            structure: PairStructure::Clustered,
            seeds: vec![0],
            train: TrainConfig::default(),
            early_stop: EarlyStopRule::default(),
            recall: RecallConfig::default(),
            rounding: Rounding::TableCompatible,
        }
    }
}

/// One trained model in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub q: usize,
    pub m: usize,
    pub n_pairs: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub stop: Option<StopReason>,
    pub epochs: usize,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str = "q,m,N,seed,accuracy,stop_reason,epochs";

impl fmt::Display for SweepRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stop = match (&self.error, self.stop) {
            (Some(_), _) => "error".to_string(),
            (None, Some(s)) => s.to_string(),
            (None, None) => "-".to_string(),
        };
        write!(
            f,
            "{},{},{},{},{},{},{}",
            self.q, self.m, self.n_pairs, self.seed, self.accuracy, stop, self.epochs
        )
    }
}

/// Header plus one line per row.
pub fn format_sweep(rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{r}\n"));
    }
    out
}

/// The pairs a sweep cell trains on; shared by every model size at the
/// same `(N, seed)`.
pub fn sweep_pairs(config: &SweepConfig, n_pairs: usize, seed: u64) -> Result<PairDataset> {
    if config.n_v < 4 || !config.n_v.is_multiple_of(2) {
        return Err(Error::usage("n_v must be even and at least 4"));
    }
    let raw = synth_pairs(n_pairs, config.n_v / 2, named_seed(seed, "synth"), config.structure)?;
    PairDataset::build(&raw)
}

/// Trains a fresh `(m, q)` model on `dataset` with recall as the
/// validation metric, then scores final recall.
pub fn train_recall_model(
    dataset: &PairDataset,
    m: usize,
    q: usize,
    seed: u64,
    config: &SweepConfig,
) -> Result<(ModelParams, crate::trainer::FitOutcome, f64)> {
    let rows = dataset.training_rows();
    let params = init_params(2 * dataset.dim(), m, q, Some(&rows), seed)?;
    let train = TrainConfig {
        seed,
        ..config.train.clone()
    };
    let recall_seed = named_seed(seed, "recall");
    let recall = config.recall;
    let outcome = fit(params, &rows, &train, config.early_stop, |p, _| {
        evaluate_recall(p, dataset, &recall, recall_seed).map_or(0.0, |r| r.accuracy)
    })?;
    let accuracy = evaluate_recall(&outcome.params, dataset, &recall, recall_seed)?.accuracy;
    Ok((outcome.params.clone(), outcome, accuracy))
}

fn run_cell(q: usize, m: usize, n_pairs: usize, seed: u64, config: &SweepConfig) -> SweepRow {
    let result = sweep_pairs(config, n_pairs, seed)
        .and_then(|data| train_recall_model(&data, m, q, seed, config));
    match result {
        Ok((_, outcome, accuracy)) => SweepRow {
            q,
            m,
            n_pairs,
            seed,
            accuracy,
            stop: Some(outcome.stop),
            epochs: outcome.epochs,
            error: None,
        },
        Err(e) => SweepRow {
            q,
            m,
            n_pairs,
            seed,
            accuracy: f64::NAN,
            stop: None,
            epochs: 0,
            error: Some(e.to_string()),
        },
    }
}

fn run_cells(cells: Vec<(usize, usize, usize, u64)>, config: &SweepConfig) -> Vec<SweepRow> {
    cells
        .into_par_iter()
        .map(|(q, m, n, seed)| run_cell(q, m, n, seed, config))
        .collect()
}

/// Parameter-matched sweep: every `q` gets `budget_hidden_units(n_w, n_v, q)`
/// slots. Cells that fail are reported with an error and do not stop the
/// sweep.
pub fn run_q_sweep(n_w: usize, q_list: &[usize], dataset_sizes: &[usize], config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut cells = Vec::new();
    for &q in q_list {
        let m = budget_hidden_units(n_w, config.n_v, q, config.rounding)?;
        for &n in dataset_sizes {
            for &seed in &config.seeds {
                cells.push((q, m, n, seed));
            }
        }
    }
    Ok(run_cells(cells, config))
}

/// Hidden-size sweep at fixed `q`.
pub fn run_hidden_sweep(q: usize, hidden_list: &[usize], dataset_sizes: &[usize], config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if q == 0 || hidden_list.contains(&0) {
        return Err(Error::usage("q and hidden sizes must be positive"));
    }
    let mut cells = Vec::new();
    for &m in hidden_list {
        for &n in dataset_sizes {
            for &seed in &config.seeds {
                cells.push((q, m, n, seed));
            }
        }
    }
    Ok(run_cells(cells, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_standardizes() {
        let raw = synth_pairs(30, 4, 3, PairStructure::Random).unwrap();
        let ds = PairDataset::build(&raw).unwrap();
        let rows = ds.training_rows();
        for col in 0..8 {
            let mean = rows.iter().map(|r| r[col]).sum::<f64>() / 30.0;
            let var = rows.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / 30.0;
            assert!(mean.abs() < 1e-9 && (var.sqrt() - 1.0).abs() < 1e-9);
        }
        let again = Normalization::fit(&rows).unwrap();
        for r in &rows {
            for (a, b) in again.normalize(r).iter().zip(r) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        let x = ds.raw_rows()[4].clone();
        for (a, b) in ds.normalization.denormalize(&ds.normalization.normalize(&x)).iter().zip(&x) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn orthogonal_pairs_and_constant_dimension() {
        let pairs = vec![
            (vec![1.0, 0.0], vec![0.0, 1.0]),
            (vec![0.0, 1.0], vec![1.0, 0.0]),
        ];
        let ds = PairDataset::build(&pairs).unwrap();
        assert!(ds.normalization.std.iter().all(|s| s.is_finite() && *s > 0.0));

        let pairs = vec![
            (vec![1.0, 5.0], vec![0.0, 1.0]),
            (vec![0.0, 5.0], vec![1.0, 0.0]),
        ];
        assert!(matches!(PairDataset::build(&pairs), Err(Error::ZeroVariance { dim: 1 })));
        assert!(PairDataset::build(&pairs[..1]).is_err());
    }

    #[test]
    fn synth_is_deterministic() {
        for s in [PairStructure::Random, PairStructure::Clustered] {
            assert_eq!(synth_pairs(10, 5, 1, s).unwrap(), synth_pairs(10, 5, 1, s).unwrap());
            assert_ne!(synth_pairs(10, 5, 1, s).unwrap(), synth_pairs(10, 5, 2, s).unwrap());
        }
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let vocab = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(nearest(&[1.0, 0.1], &vocab, Distance::Euclidean), 0);
        assert_eq!(nearest(&[0.1, 1.0], &vocab, Distance::Euclidean), 2);
        assert_eq!(nearest(&[5.0, 0.0], &vocab, Distance::Cosine), 0);
    }

    #[test]
    fn sweep_rows_format() {
        let row = SweepRow {
            q: 4,
            m: 125,
            n_pairs: 50,
            seed: 1,
            accuracy: 0.5,
            stop: Some(StopReason::Plateau),
            epochs: 40,
            error: None,
        };
        assert_eq!(format_sweep(&[row]), "q,m,N,seed,accuracy,stop_reason,epochs\n4,125,50,1,0.5,plateau,40\n");
    }
}
