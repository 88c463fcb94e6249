//! Text file formats and synthetic Gaussian-mixture data.
//!
//! Vector files: a header line `<count> <dim>` followed by one
//! whitespace-separated row per line.
//!
//! Checkpoints: a header line `GMRBM1 n m q has_sigma2` followed by the
//! values of `b` (n), `c` (m*q, slot-major), `W` (q*m*n, layout (k,j,i))
//! and, when `has_sigma2` is 1, `sigma2` (n). Values may be split across
//! lines arbitrarily; the writer puts `b`, each slot's biases, each
//! template and `sigma2` on their own lines.
//!
//! Every float is written with 17 significant digits so reading it back
//! reproduces the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::stream_rng;

pub const CHECKPOINT_MAGIC: &str = "GMRBM1";

fn push_float(out: &mut String, x: f64) {
    let _ = write!(out, "{x:.16e}");
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, &x) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        push_float(out, x);
    }
    out.push('\n');
}

fn parse_float(tok: &str, line: usize) -> Result<f64> {
    let x: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{tok}` is not a number"),
    })?;
    if !x.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value `{tok}`"),
        });
    }
    Ok(x)
}

fn parse_count(tok: Option<&str>, what: &str, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("{what} `{tok}` is not a nonnegative integer"),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorFile {
    pub count: usize,
    pub dim: usize,
    pub rows: Vec<Vec<f64>>,
}

impl VectorFile {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::dim(format!("row {i} has {} entries, expected {dim}", rows[i].len())));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::usage("vector rows must be finite"));
        }
        Ok(Self {
            count: rows.len(),
            dim,
            rows,
        })
    }
}

pub fn format_vectors(rows: &[Vec<f64>]) -> Result<String> {
    let file = VectorFile::new(rows.to_vec())?;
    let mut out = format!("{} {}\n", file.count, file.dim);
    for row in &file.rows {
        push_row(&mut out, row);
    }
    Ok(out)
}

pub fn parse_vectors(text: &str) -> Result<VectorFile> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file, expected `<count> <dim>` header".into(),
    })?;
    let mut toks = header.split_whitespace();
    let count = parse_count(toks.next(), "row count", 1)?;
    let dim = parse_count(toks.next(), "dimension", 1)?;
    if toks.next().is_some() {
        return Err(Error::Parse {
            line: 1,
            msg: "header must be exactly `<count> <dim>`".into(),
        });
    }
    let mut rows = Vec::with_capacity(count);
    let mut last_line = 1;
    for (line, text) in lines {
        last_line = line;
        if text.trim().is_empty() {
            continue;
        }
        if rows.len() == count {
            return Err(Error::Parse {
                line,
                msg: format!("header declares {count} rows but more follow"),
            });
        }
        let row = text
            .split_whitespace()
            .map(|t| parse_float(t, line))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != dim {
            return Err(Error::Parse {
                line,
                msg: format!("row has {} values, expected {dim}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.len() != count {
        return Err(Error::Parse {
            line: last_line + 1,
            msg: format!("header declares {count} rows, found {}", rows.len()),
        });
    }
    Ok(VectorFile { count, dim, rows })
}

pub fn write_vectors(path: impl AsRef<Path>, rows: &[Vec<f64>]) -> Result<()> {
    fs::write(path, format_vectors(rows)?)?;
    Ok(())
}

pub fn read_vectors(path: impl AsRef<Path>) -> Result<VectorFile> {
    parse_vectors(&fs::read_to_string(path)?)
}

pub fn format_checkpoint(params: &ModelParams) -> Result<String> {
    params.validate()?;
    let mut out = format!(
        "{CHECKPOINT_MAGIC} {} {} {} {}\n",
        params.n,
        params.m,
        params.q,
        u8::from(params.sigma2.is_some())
    );
    push_row(&mut out, &params.b);
    for slot in params.c.chunks(params.q) {
        push_row(&mut out, slot);
    }
    for template in params.w.chunks(params.n) {
        push_row(&mut out, template);
    }
    if let Some(s2) = &params.sigma2 {
        push_row(&mut out, s2);
    }
    Ok(out)
}

pub fn parse_checkpoint(text: &str) -> Result<ModelParams> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| Error::Magic(String::new()))?;
    let mut toks = header.split_whitespace();
    let magic = toks.next().unwrap_or("");
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Magic(magic.to_string()));
    }
    let n = parse_count(toks.next(), "n", 1)?;
    let m = parse_count(toks.next(), "m", 1)?;
    let q = parse_count(toks.next(), "q", 1)?;
    let has_sigma2 = match toks.next() {
        Some("0") => false,
        Some("1") => true,
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("has_sigma2 flag must be 0 or 1, found {other:?}"),
            })
        }
    };
    if toks.next().is_some() {
        return Err(Error::Parse {
            line: 1,
            msg: "trailing tokens in header".into(),
        });
    }
    if n == 0 || m == 0 || q == 0 {
        return Err(Error::Parse {
            line: 1,
            msg: "n, m and q must be positive".into(),
        });
    }
    let expected = n + m * q + q * m * n + if has_sigma2 { n } else { 0 };
    let mut values = Vec::with_capacity(expected);
    let mut last_line = 1;
    for (line, text) in lines {
        last_line = line;
        for tok in text.split_whitespace() {
            if values.len() == expected {
                return Err(Error::Parse {
                    line,
                    msg: format!("more than the {expected} values the header declares"),
                });
            }
            values.push(parse_float(tok, line)?);
        }
    }
    if values.len() != expected {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("truncated checkpoint: expected {expected} values, found {}", values.len()),
        });
    }
    let mut rest = values.into_iter();
    let b: Vec<f64> = rest.by_ref().take(n).collect();
    let c: Vec<f64> = rest.by_ref().take(m * q).collect();
    let w: Vec<f64> = rest.by_ref().take(q * m * n).collect();
    let sigma2 = has_sigma2.then(|| rest.collect::<Vec<f64>>());
    ModelParams::from_parts(n, m, q, b, c, w, sigma2)
}

pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_checkpoint(params)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    parse_checkpoint(&fs::read_to_string(path)?)
}

/// One diagonal Gaussian mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmSpec {
    pub components: Vec<GmmComponent>,
}

impl GmmSpec {
    pub fn dim(&self) -> usize {
        self.components.first().map_or(0, |c| c.mean.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::usage("mixture needs at least one component"));
        }
        let d = self.dim();
        let mut total = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            if c.mean.len() != d || c.var.len() != d {
                return Err(Error::dim(format!("component {i} does not have dimension {d}")));
            }
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return Err(Error::usage(format!("component {i} weight must be positive")));
            }
            if !c.var.iter().all(|&v| v.is_finite() && v > 0.0) {
                return Err(Error::usage(format!("component {i} variances must be positive")));
            }
            if !c.mean.iter().all(|x| x.is_finite()) {
                return Err(Error::usage(format!("component {i} mean must be finite")));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::usage(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Draws `count` rows, returning each row with its component index.
pub fn sample_gmm_labeled(spec: &GmmSpec, count: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    spec.validate()?;
    let mut rng = stream_rng(seed, 0);
    let mut rows = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = spec.components.len() - 1;
        for (i, c) in spec.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                pick = i;
                break;
            }
        }
        let comp = &spec.components[pick];
        let row = comp
            .mean
            .iter()
            .zip(&comp.var)
            .map(|(mu, var)| {
                let z: f64 = rng.sample(StandardNormal);
                mu + var.sqrt() * z
            })
            .collect();
        rows.push(row);
        labels.push(pick);
    }
    Ok((rows, labels))
}

pub fn sample_gmm(spec: &GmmSpec, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(sample_gmm_labeled(spec, count, seed)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_round_trip() {
        let rows = vec![vec![0.1, -3.5e-300], vec![1.0 / 3.0, 2.0f64.sqrt()], vec![-0.0, 1e300]];
        let parsed = parse_vectors(&format_vectors(&rows).unwrap()).unwrap();
        assert_eq!(parsed.count, 3);
        assert_eq!(parsed.dim, 2);
        for (a, b) in parsed.rows.iter().flatten().zip(rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn vector_errors_carry_lines() {
        match parse_vectors("2 1\n1\n2\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_vectors(""), Err(Error::Parse { line: 1, .. })));
        match parse_vectors("2 2\n1 2\n3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_vectors("1 2\n1 x\n") {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains('x'));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_vectors("3 1\n1\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_vectors("two 1\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn ragged_rows_are_rejected_on_write() {
        assert!(format_vectors(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn checkpoint_round_trip_with_variance() {
        let mut p = ModelParams::zeros(2, 2, 3);
        for (i, w) in p.w.iter_mut().enumerate() {
            *w = (i as f64 + 0.1).ln();
        }
        p.c = vec![0.1, 0.2, 0.3, -1.0 / 7.0, 5.0, 6.0];
        p.b = vec![1e-17, -2.5];
        p.sigma2 = Some(vec![0.5, 3.0]);
        let text = format_checkpoint(&p).unwrap();
        assert!(text.starts_with("GMRBM1 2 2 3 1\n"));
        assert_eq!(parse_checkpoint(&text).unwrap(), p);
    }

    #[test]
    fn checkpoint_errors() {
        match parse_checkpoint("RBM 1 1 1 0\n0 0 0\n") {
            Err(e @ Error::Magic(_)) => assert!(e.to_string().contains("GMRBM1")),
            other => panic!("{other:?}"),
        }
        let text = format_checkpoint(&ModelParams::zeros(2, 1, 2)).unwrap();
        let cut = &text[..text.trim_end().rfind('\n').unwrap()];
        assert!(matches!(parse_checkpoint(cut), Err(Error::Parse { .. })));
        assert!(parse_checkpoint(&format!("{text}1.0\n")).is_err());
        assert!(parse_checkpoint("GMRBM1 1 1 1 2\n").is_err());
    }

    #[test]
    fn gmm_validation() {
        let comp = |w: f64| GmmComponent {
            weight: w,
            mean: vec![0.0],
            var: vec![1.0],
        };
        assert!(GmmSpec { components: vec![comp(0.5), comp(0.5)] }.validate().is_ok());
        assert!(GmmSpec { components: vec![comp(0.5), comp(0.4)] }.validate().is_err());
        assert!(GmmSpec { components: vec![] }.validate().is_err());
    }

    #[test]
    fn narrow_component_collapses_to_mean() {
        let spec = GmmSpec {
            components: vec![GmmComponent {
                weight: 1.0,
                mean: vec![3.0, -1.0],
                var: vec![1e-12, 1e-12],
            }],
        };
        let rows = sample_gmm(&spec, 100, 4).unwrap();
        for r in rows {
            assert!((r[0] - 3.0).abs() < 1e-5 && (r[1] + 1.0).abs() < 1e-5);
        }
        assert_eq!(sample_gmm(&spec, 10, 9).unwrap(), sample_gmm(&spec, 10, 9).unwrap());
    }
}
