mod common;

use common::*;
use gmrbm::assoc::{
    cluster_of, evaluate_recall, nearest, run_hidden_sweep, run_q_sweep, synth_pairs, Distance, Normalization, PairDataset,
    PairStructure, RecallConfig, SweepConfig,
};
use gmrbm::trainer::init_params;
use gmrbm::ModelParams;
use proptest::prelude::*;

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn random_stimuli_are_nearly_orthogonal() {
    let pairs = synth_pairs(60, 200, 41, PairStructure::Random).unwrap();
    let mut sims = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            sims.push(cosine(&pairs[i].0, &pairs[j].0));
        }
    }
    assert!(mean(&sims).abs() < 0.05);
}

#[test]
fn clustered_responses_sit_near_their_centroid() {
    let n = 49;
    let pairs = synth_pairs(n, 20, 42, PairStructure::Clustered).unwrap();
    let (mut within, mut between) = (Vec::new(), Vec::new());
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(&pairs[i].1, &pairs[j].1);
            if cluster_of(i, n) == cluster_of(j, n) {
                within.push(d);
            } else {
                between.push(d);
            }
        }
    }
    assert!(mean(&within) < mean(&between));
}

#[test]
fn normalization_is_idempotent_and_invertible() {
    let pairs = synth_pairs(30, 5, 43, PairStructure::Random).unwrap();
    let data = PairDataset::build(&pairs).unwrap();
    let rows = data.training_rows();
    let again = Normalization::fit(&rows).unwrap();
    for row in &rows {
        for (a, b) in again.normalize(row).iter().zip(row) {
            assert!((a - b).abs() < 1e-9);
        }
    }
    for raw in data.raw_rows() {
        let back = data.normalization.denormalize(&data.normalization.normalize(&raw));
        assert!(back.iter().zip(&raw).all(|(a, b)| (a - b).abs() < 1e-9));
    }
}

/// Two stored pairs over `d = 2` with one template per pair.
fn two_pair_memory() -> (ModelParams, PairDataset) {
    let pairs = vec![(vec![1.0, 0.0], vec![0.0, 1.0]), (vec![0.0, 1.0], vec![1.0, 0.0])];
    let data = PairDataset::build(&pairs).unwrap();
    let mut p = ModelParams::zeros(4, 1, 2);
    for k in 0..2 {
        let row = data.normalized_row(k);
        for (w, x) in p.template_mut(k, 0).iter_mut().zip(row) {
            *w = 3.0 * x;
        }
    }
    (p, data)
}

#[test]
fn constructed_memory_recalls_both_pairs() {
    let (p, data) = two_pair_memory();
    let config = RecallConfig::default();
    let mut hits = [0; 2];
    for seed in 0..100 {
        let result = evaluate_recall(&p, &data, &config, seed).unwrap();
        for o in result.per_pair {
            hits[o.index] += usize::from(o.correct);
        }
    }
    assert!(hits.iter().all(|&h| h >= 95), "{hits:?}");
}

#[test]
fn recall_survives_reordering_the_pairs() {
    let (p, data) = two_pair_memory();
    let pairs: Vec<_> = data.stimuli.iter().cloned().zip(data.responses.iter().cloned()).rev().collect();
    let reversed = PairDataset::build(&pairs).unwrap();
    let mut q = p.clone();
    for k in 0..2 {
        q.template_mut(k, 0).copy_from_slice(p.template(1 - k, 0));
    }
    let config = RecallConfig::default();
    assert_eq!(evaluate_recall(&p, &data, &config, 1).unwrap().accuracy, 1.0);
    assert_eq!(evaluate_recall(&q, &reversed, &config, 1).unwrap().accuracy, 1.0);
}

#[test]
fn untrained_model_scores_chance() {
    let n = 100;
    let mut hits = 0.0;
    let trials = 3 * n;
    for seed in 0..3 {
        let pairs = synth_pairs(n, 10, seed, PairStructure::Clustered).unwrap();
        let data = PairDataset::build(&pairs).unwrap();
        let p = init_params(20, 16, 4, Some(&data.training_rows()), seed).unwrap();
        hits += evaluate_recall(&p, &data, &RecallConfig::default(), seed).unwrap().accuracy * n as f64;
    }
    let chance = 1.0 / n as f64;
    let sigma = (chance * (1.0 - chance) / trials as f64).sqrt();
    assert!((hits / trials as f64 - chance).abs() <= 3.0 * sigma);
}

proptest! {
    #[test]
    fn nearest_follows_vocabulary_permutations(seed in 0u64..1000, shift in 1usize..7) {
        let mut r = rng(seed);
        let vocab: Vec<Vec<f64>> = (0..7).map(|_| normals(&mut r, 3, 1.0)).collect();
        let x = normals(&mut r, 3, 1.0);
        let rotated: Vec<Vec<f64>> = (0..7).map(|i| vocab[(i + shift) % 7].clone()).collect();
        for distance in [Distance::Euclidean, Distance::Cosine] {
            let a = nearest(&x, &vocab, distance);
            let b = nearest(&x, &rotated, distance);
            prop_assert_eq!((b + shift) % 7, a);
        }
    }
}

#[test]
fn single_candidate_is_always_retrieved() {
    assert_eq!(nearest(&[3.0, -1.0], &[vec![0.0, 0.0]], Distance::Euclidean), 0);
}

fn smoke_config() -> SweepConfig {
    let mut config = SweepConfig::new(8);
    config.train.max_epochs = 20;
    config.train.checkpoint_every = 5;
    config
}

#[test]
fn q_sweep_smoke() {
    let rows = run_q_sweep(64, &[2, 4], &[20], &smoke_config()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0].m, rows[1].m), (4, 2));
    assert!(rows.iter().all(|r| r.error.is_none() && (0.0..=1.0).contains(&r.accuracy)));
}

#[test]
fn hidden_sweep_smoke() {
    let rows = run_hidden_sweep(4, &[8, 16], &[20], &smoke_config()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.error.is_none() && (0.0..=1.0).contains(&r.accuracy)));
}

#[test]
fn failing_cells_are_recorded_not_fatal() {
    let mut config = smoke_config();
    config.n_v = 7;
    let rows = run_hidden_sweep(2, &[4], &[20], &config).unwrap();
    assert!(rows[0].error.is_some());
    assert!(rows[0].to_string().contains("error"));
}
