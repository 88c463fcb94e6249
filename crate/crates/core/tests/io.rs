mod common;

use common::*;
use gmrbm::io::{load_checkpoint, read_vectors, sample_gmm_labeled, save_checkpoint, write_vectors, GmmComponent, GmmSpec};
use gmrbm::{exact_log_likelihood, Error};

#[test]
fn vector_file_round_trip_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.txt");
    let mut r = rng(31);
    let rows: Vec<Vec<f64>> = (0..3).map(|_| normals(&mut r, 2, 10.0)).collect();
    write_vectors(&path, &rows).unwrap();
    let back = read_vectors(&path).unwrap();
    assert_eq!((back.count, back.dim), (3, 2));
    assert_eq!(back.rows, rows);
}

#[test]
fn vector_file_errors_name_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.txt");
    std::fs::write(&path, "2 2\n1 2\n3 4\n5 6\n").unwrap();
    match read_vectors(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("unexpected {other:?}"),
    }
    std::fs::write(&path, "").unwrap();
    assert!(matches!(read_vectors(&path), Err(Error::Parse { .. })));
    assert!(matches!(read_vectors(dir.path().join("missing")), Err(Error::Io(_))));
}

#[test]
fn checkpoint_round_trip_preserves_likelihood() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    let mut r = rng(32);
    let p = random_model(&mut r, 3, 2, 3, 1.0);
    save_checkpoint(&p, &path).unwrap();
    let q = load_checkpoint(&path).unwrap();
    assert_eq!(p, q);
    for _ in 0..10 {
        let v = normals(&mut r, 3, 2.0);
        let (a, b) = (exact_log_likelihood(&p, &v).unwrap(), exact_log_likelihood(&q, &v).unwrap());
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn bad_checkpoints_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.ckpt");
    std::fs::write(&path, "GMRBM2 1 1 1 0\n0 0 0\n").unwrap();
    let err = load_checkpoint(&path).unwrap_err();
    assert!(err.to_string().contains("GMRBM1"), "{err}");
    std::fs::write(&path, "GMRBM1 2 1 1 0\n0 0 0\n").unwrap();
    assert!(load_checkpoint(&path).is_err());
}

fn two_modes() -> GmmSpec {
    GmmSpec {
        components: [-5.0, 5.0]
            .iter()
            .map(|&c| GmmComponent {
                weight: 0.5,
                mean: vec![c],
                var: vec![1.0],
            })
            .collect(),
    }
}

#[test]
fn mixture_frequencies_and_moments() {
    let n = 10_000;
    let (rows, labels) = sample_gmm_labeled(&two_modes(), n, 33).unwrap();
    let ones = labels.iter().filter(|&&l| l == 1).count() as f64;
    assert!((ones / n as f64 - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    for (k, centre) in [-5.0, 5.0].into_iter().enumerate() {
        let xs: Vec<f64> = rows.iter().zip(&labels).filter(|(_, &l)| l == k).map(|(r, _)| r[0]).collect();
        assert!((mean(&xs) - centre).abs() < 3.0 / (xs.len() as f64).sqrt());
    }
    let (again, _) = sample_gmm_labeled(&two_modes(), n, 33).unwrap();
    assert_eq!(rows, again);
}
