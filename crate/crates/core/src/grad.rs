//! Gradient records shaped like [`ModelParams`].

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Per-block gradient (or sufficient-statistic) accumulator, laid out exactly
/// like the corresponding parameter blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientRecord {
    pub db: Vec<f64>,
    pub dc: Vec<f64>,
    pub dw: Vec<f64>,
}

impl GradientRecord {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            db: vec![0.0; params.b.len()],
            dc: vec![0.0; params.c.len()],
            dw: vec![0.0; params.w.len()],
        }
    }

    pub fn blocks(&self) -> [(&'static str, &[f64]); 3] {
        [("b", &self.db), ("c", &self.dc), ("W", &self.dw)]
    }

    fn blocks_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.db, &mut self.dc, &mut self.dw]
    }

    pub fn add_assign(&mut self, other: &GradientRecord) {
        for (dst, (_, src)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }

    pub fn sub_assign(&mut self, other: &GradientRecord) {
        for (dst, (_, src)) in self.blocks_mut().into_iter().zip(other.blocks()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d -= s;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for dst in self.blocks_mut() {
            for d in dst.iter_mut() {
                *d *= factor;
            }
        }
    }

    /// Iterates every coordinate in block order `b`, `c`, `W`.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.db.iter().chain(&self.dc).chain(&self.dw).copied()
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    /// Fails with the name of the first block holding a NaN or infinity.
    pub fn check_finite(&self) -> Result<()> {
        for (name, block) in self.blocks() {
            if !block.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite { block: name });
            }
        }
        Ok(())
    }
}
