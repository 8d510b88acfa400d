//! Hellinger and total-variation distances between one-dimensional laws,
//! block accounting for squared Hellinger distances, and Monte Carlo
//! estimates with standard errors.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{par_chunks, LabRng};
use crate::specfun::{integrate_pair, Density1D};

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl MCEstimate {
    /// `|value - target| <= k · stderr`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }

    /// Standardized distance to `target`.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target) / self.stderr
    }
}

/// Running mean and centered second moment, merged with Chan's update.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let mean = self.mean + d * o.n as f64 / n as f64;
        let m2 = self.m2 + o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64;
        Moments { n, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self, seed: u64) -> MCEstimate {
        MCEstimate {
            value: self.mean,
            stderr: (self.variance() / self.n.max(1) as f64).sqrt(),
            n: self.n,
            seed,
        }
    }
}

/// Mean of `f` over `n` draws split across fixed substreams.
pub fn mc_mean<F>(n: usize, seed: u64, f: F) -> Result<MCEstimate>
where
    F: Fn(&mut LabRng) -> f64 + Sync,
{
    if n == 0 {
        return Err(invalid("Monte Carlo needs at least one draw"));
    }
    let parts = par_chunks(seed, n, |rng, k| {
        let mut m = Moments::default();
        for _ in 0..k {
            m.push(f(rng));
        }
        m
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(m.estimate(seed))
}

/// Binomial proportion of `event(sampler(rng))` over `n` draws.
pub fn mc_event_prob<S, FS, FE>(n: usize, seed: u64, sampler: FS, event: FE) -> Result<MCEstimate>
where
    FS: Fn(&mut LabRng) -> S + Sync,
    FE: Fn(&S) -> bool + Sync,
{
    if n < 100 {
        return Err(invalid(format!("event probability needs n >= 100, got {n}")));
    }
    let hits: u64 = par_chunks(seed, n, |rng, k| (0..k).filter(|_| event(&sampler(rng))).count() as u64)
        .into_iter()
        .sum();
    let p = hits as f64 / n as f64;
    Ok(MCEstimate { value: p, stderr: (p * (1.0 - p) / n as f64).sqrt(), n: n as u64, seed })
}

/// `½∫|d1 - d2|` over `[lo, hi]`.
pub fn tv_densities(d1: &Density1D, d2: &Density1D, lo: f64, hi: f64) -> Result<f64> {
    Ok(0.5 * integrate_pair(d1, d2, lo, hi, |a, b| (a - b).abs())?)
}

/// Hellinger affinity `∫√(d1 d2)` over the common support.
pub fn hellinger_densities(d1: &Density1D, d2: &Density1D) -> Result<f64> {
    let lo = d1.lo.max(d2.lo);
    let hi = d1.hi.min(d2.hi);
    if lo >= hi {
        return Ok(0.0);
    }
    integrate_pair(d1, d2, lo, hi, |a, b| (a * b).sqrt())
}

/// `(√p - √q)² + 2√(pq)(1 - H)`: squared Hellinger distance of `p·μ` and
/// `q·ν` given the affinity `H` of `μ` and `ν`.
pub fn hellinger_weighted(p: f64, q: f64, cond_affinity: f64) -> f64 {
    let d = p.sqrt() - q.sqrt();
    d * d + 2.0 * (p * q).sqrt() * (1.0 - cond_affinity)
}

/// Same decomposition with an upper bound `D >= 1 - H` in place of the
/// deficit. `D` may exceed 1, in which case the term stays a valid but
/// loose upper bound.
pub fn hellinger_block_bound(p: f64, q: f64, deficit_bound: f64) -> f64 {
    let d = p.sqrt() - q.sqrt();
    d * d + 2.0 * (p * q).sqrt() * deficit_bound
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Block {
    E00,
    E10,
    E01,
    E11,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::E00, Block::E10, Block::E01, Block::E11];

    pub fn name(self) -> &'static str {
        match self {
            Block::E00 => "E00",
            Block::E10 => "E10",
            Block::E01 => "E01",
            Block::E11 => "E11",
        }
    }
}

/// Weights of one occupancy block under the two laws, and its contribution
/// to the squared Hellinger bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockTerm {
    pub p: f64,
    pub q: f64,
    /// Standard error of `p` (0 when exact).
    pub p_stderr: f64,
    pub cond_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    /// Indexed in the order of [`Block::ALL`].
    pub blocks: [BlockTerm; 4],
}

impl BlockDecomposition {
    pub fn get(&self, b: Block) -> &BlockTerm {
        &self.blocks[b as usize]
    }

    pub fn total(&self) -> f64 {
        self.blocks.iter().map(|b| b.cond_term).sum()
    }

    /// Both weight vectors sum to 1 within `k` combined standard errors.
    pub fn sums_consistent(&self, k: f64) -> bool {
        let sp: f64 = self.blocks.iter().map(|b| b.p).sum();
        let sq: f64 = self.blocks.iter().map(|b| b.q).sum();
        let se = self.blocks.iter().map(|b| b.p_stderr * b.p_stderr).sum::<f64>().sqrt();
        (sp - 1.0).abs() <= k * se + 1e-12 && (sq - 1.0).abs() <= 1e-12
    }
}
