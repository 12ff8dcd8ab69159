//! Maxima of i.i.d. samples built through the inverse-rate representation
//! `ξ = R⁻¹(τ)`, τ standard exponential.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::envelope::{centered_stats, RateEnvelope};
use crate::error::{domain, Result};
use crate::numeric::ks_distance;
use crate::rng::replica_rng;

/// Default ratio of the geometric checkpoint grid.
pub const DEFAULT_INDEX_GRID_RATIO: f64 = 1.1;

/// Smallest integer index where both `L₂` and `L₃` are defined (`n > e^e`).
pub const MIN_STAT_INDEX: u64 = 16;

/// `R₀⁻¹(u)`: maps a unit exponential variate to a variate with tail `exp(−R₀)`.
pub fn sample_via_inverse(env: &RateEnvelope, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(domain(format!("exponential variate must be >= 0, got {u}")));
    }
    env.inverse(u)
}

/// Lattice analogue: the least `k ≥ 0` with `R_k ≥ u`, so `P(ξ > k) = exp(−R_k)`.
///
/// `log_tail(k) = R_k` must be nondecreasing and unbounded.
pub fn sample_lattice<F: Fn(u64) -> f64>(log_tail: F, u: f64) -> Result<u64> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(domain(format!("exponential variate must be finite and >= 0, got {u}")));
    }
    if log_tail(0) >= u {
        return Ok(0);
    }
    let mut hi = 1u64;
    while log_tail(hi) < u {
        if hi > (1 << 60) {
            return Err(domain("lattice log-tail does not reach the variate"));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    // invariant: R_lo < u <= R_hi
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if log_tail(mid) >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Geometric checkpoint indices `ceil(g^j)` up to `n_max`, with `n_max` appended.
pub fn index_grid(n_max: u64, ratio: f64) -> Result<Vec<u64>> {
    if n_max == 0 {
        return Err(domain("n_max must be >= 1"));
    }
    if !(ratio > 1.0) {
        return Err(domain(format!("grid ratio must exceed 1, got {ratio}")));
    }
    let mut grid = Vec::new();
    let mut x = 1.0f64;
    loop {
        let n = x.ceil() as u64;
        if n > n_max {
            break;
        }
        if grid.last() != Some(&n) {
            grid.push(n);
        }
        x *= ratio;
    }
    if grid.last() != Some(&n_max) {
        grid.push(n_max);
    }
    Ok(grid)
}

/// Running maximum `z_n` recorded on a geometric index grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxSeries {
    pub checkpoints: Vec<(u64, f64)>,
}

impl MaxSeries {
    pub fn last(&self) -> Option<(u64, f64)> {
        self.checkpoints.last().copied()
    }
}

/// One pass over `n_max` draws of `sampler`, keeping only the checkpoints.
pub fn running_max_series<R, S>(mut sampler: S, n_max: u64, grid_ratio: f64, rng: &mut R) -> Result<MaxSeries>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Result<f64>,
{
    let grid = index_grid(n_max, grid_ratio)?;
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut z = f64::NEG_INFINITY;
    let mut n = 0u64;
    for &target in &grid {
        while n < target {
            z = z.max(sampler(rng)?);
            n += 1;
        }
        checkpoints.push((n, z));
    }
    Ok(MaxSeries { checkpoints })
}

/// Normalised statistic at one index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexStats {
    pub n: u64,
    pub s2: f64,
    pub s3: f64,
}

/// `r₀(a(n))(z_n − a(n))/L₂(n)` and the `L₃` analogue, with `a(n) = R₀⁻¹(log n)`.
///
/// Checkpoints below [`MIN_STAT_INDEX`] are skipped; a series with none
/// left is a domain error.
pub fn lemma1_stats(env: &RateEnvelope, series: &MaxSeries) -> Result<Vec<IndexStats>> {
    let mut out = Vec::new();
    for &(n, z) in &series.checkpoints {
        if n < MIN_STAT_INDEX {
            continue;
        }
        let nf = n as f64;
        let a = env.inverse(nf.ln())?;
        let s = centered_stats(env, a, nf, z)?;
        out.push(IndexStats { n, s2: s.s2, s3: s.s3 });
    }
    if out.is_empty() {
        return Err(domain(format!(
            "series has no checkpoint with n >= {MIN_STAT_INDEX}"
        )));
    }
    Ok(out)
}

/// [`lemma1_stats`] for integer-valued maxima.
///
/// The ±1 lattice rounding is absorbed by the same normalisation when `r₀`
/// grows slower than `log log` (see `theorem2_growth_conditions`).
pub fn lattice_stats(env: &RateEnvelope, series: &MaxSeries) -> Result<Vec<IndexStats>> {
    if let Some(&(n, z)) = series
        .checkpoints
        .iter()
        .find(|(_, z)| z.fract() != 0.0 || *z < 0.0)
    {
        return Err(domain(format!("lattice series has non-integer maximum {z} at n = {n}")));
    }
    lemma1_stats(env, series)
}

/// Standard Gumbel CDF `exp(−e^{−x})`.
pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Maximum of `n` standard exponentials.
pub fn exp_max<R: Rng + ?Sized>(n: u64, rng: &mut R) -> f64 {
    (0..n).map(|_| rng.sample::<f64, _>(Exp1)).fold(f64::NEG_INFINITY, f64::max)
}

/// KS distance between the law of `z_n^e − log n` over `replicas` runs and
/// the Gumbel distribution.
pub fn gumbel_check(n: u64, replicas: u64, seed: u64) -> f64 {
    let log_n = (n as f64).ln();
    let mut sample: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|i| exp_max(n, &mut replica_rng(seed, i)) - log_n)
        .collect();
    ks_distance(&mut sample, gumbel_cdf)
}
