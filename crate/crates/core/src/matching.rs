//! Parameter counting and the capacity- and parameter-matched sizing rules
//! used to compare GM-RBMs with GB-RBM baselines.

use std::fmt;

use crate::error::{Error, Result};

/// `n + m q (1 + n)`: visible bias, slot-state biases and templates.
pub fn gm_param_count(n: usize, m: usize, q: usize) -> usize {
    n + m * q * (1 + n)
}

/// `n + m' + n m'`.
pub fn gb_param_count(n: usize, m_prime: usize) -> usize {
    n + m_prime + n * m_prime
}

/// `log2` of the number of hidden codes, `m log2 q`.
pub fn gm_log2_codebook(m: usize, q: usize) -> f64 {
    m as f64 * (q as f64).log2()
}

/// Binary units whose codebook is at least as large as `q^m`:
/// `ceil(m log2 q)`.
pub fn capacity_matched_mprime(m: usize, q: usize) -> Result<usize> {
    if q < 2 {
        return Err(Error::usage("capacity matching needs q >= 2; a single-state slot carries no information"));
    }
    if q.is_power_of_two() {
        return Ok(m * q.trailing_zeros() as usize);
    }
    Ok(gm_log2_codebook(m, q).ceil() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Round down, reproducing the published hidden-unit table.
    #[default]
    TableCompatible,
    Ceiling,
}

/// Hidden slots that spend a weight budget `n_w` on templates of length
/// `n_v`, `q` per slot: `n_w / (n_v q)`, rounded per `rounding`, never
/// below one.
pub fn budget_hidden_units(n_w: usize, n_v: usize, q: usize, rounding: Rounding) -> Result<usize> {
    if n_w == 0 || n_v == 0 || q == 0 {
        return Err(Error::usage("budget, visible count and q must be positive"));
    }
    let per_slot = n_v * q;
    let units = match rounding {
        Rounding::TableCompatible => n_w / per_slot,
        Rounding::Ceiling => n_w.div_ceil(per_slot),
    };
    Ok(units.max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    Capacity,
    Parameter,
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchMode::Capacity => "capacity",
            MatchMode::Parameter => "parameter",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmSize {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub param_count: usize,
    pub log2_codebook: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbSize {
    pub n: usize,
    pub m_prime: usize,
    pub param_count: usize,
    pub log2_codebook: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchReport {
    pub gm: GmSize,
    pub gb: GbSize,
    pub mode: MatchMode,
}

fn gm_size(n: usize, m: usize, q: usize) -> GmSize {
    GmSize {
        n,
        m,
        q,
        param_count: gm_param_count(n, m, q),
        log2_codebook: gm_log2_codebook(m, q),
    }
}

fn gb_size(n: usize, m_prime: usize) -> GbSize {
    GbSize {
        n,
        m_prime,
        param_count: gb_param_count(n, m_prime),
        log2_codebook: m_prime as f64,
    }
}

impl MatchReport {
    /// GB baseline with a codebook at least as large as the GM model's.
    pub fn capacity(n: usize, m: usize, q: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::usage("n and m must be positive"));
        }
        let m_prime = capacity_matched_mprime(m, q)?;
        Ok(Self {
            gm: gm_size(n, m, q),
            gb: gb_size(n, m_prime),
            mode: MatchMode::Capacity,
        })
    }

    /// GM model sized from a weight budget; the GB baseline gets the
    /// hidden count the same budget gives at `q = 2`.
    pub fn parameter(n_w: usize, n_v: usize, q: usize, rounding: Rounding) -> Result<Self> {
        let m = budget_hidden_units(n_w, n_v, q, rounding)?;
        let m_prime = budget_hidden_units(n_w, n_v, 2, rounding)?;
        Ok(Self {
            gm: gm_size(n_v, m, q),
            gb: gb_size(n_v, m_prime),
            mode: MatchMode::Parameter,
        })
    }

    /// `key=value` lines for scripts.
    pub fn key_values(&self) -> String {
        format!(
            "mode={}\ngm.n={}\ngm.m={}\ngm.q={}\ngm.params={}\ngm.log2_codebook={}\n\
             gb.n={}\ngb.m={}\ngb.params={}\ngb.log2_codebook={}\n",
            self.mode,
            self.gm.n,
            self.gm.m,
            self.gm.q,
            self.gm.param_count,
            self.gm.log2_codebook,
            self.gb.n,
            self.gb.m_prime,
            self.gb.param_count,
            self.gb.log2_codebook,
        )
    }
}

impl fmt::Display for MatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: {}", self.mode)?;
        writeln!(f, "{:<8} {:>8} {:>8} {:>4} {:>12} {:>14}", "model", "visible", "hidden", "q", "params", "log2|codes|")?;
        writeln!(
            f,
            "{:<8} {:>8} {:>8} {:>4} {:>12} {:>14.3}",
            "GM-RBM", self.gm.n, self.gm.m, self.gm.q, self.gm.param_count, self.gm.log2_codebook
        )?;
        writeln!(
            f,
            "{:<8} {:>8} {:>8} {:>4} {:>12} {:>14.3}",
            "GB-RBM", self.gb.n, self.gb.m_prime, 2, self.gb.param_count, self.gb.log2_codebook
        )
    }
}
