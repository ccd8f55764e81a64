//! Small statistics kit for the experiment harnesses: monotone fits,
//! crossing extraction, and bootstrap confidence intervals, all with
//! deterministic randomness.

use crate::env::mix64;
use crate::error::{DreError, Result};

/// Sequential generator built on the same 64-bit finalizer the site hashes
/// use; good enough for resampling and fully reproducible.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        mix64(self.state)
    }

    /// Uniform draw from 0..n without floating point, by fixed-point
    /// multiplication.
    #[inline]
    pub fn next_below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

/// Pool-adjacent-violators fit: the weighted least-squares nondecreasing
/// sequence closest to `values`.
pub fn isotonic_nondecreasing(values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if values.len() != weights.len() {
        return Err(DreError::InvalidInput(format!(
            "{} values with {} weights",
            values.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| *w <= 0.0 || !w.is_finite()) {
        return Err(DreError::InvalidInput("weights must be positive and finite".into()));
    }
    // blocks of (mean, weight, count), merged while out of order
    let mut mean: Vec<f64> = Vec::with_capacity(values.len());
    let mut weight: Vec<f64> = Vec::with_capacity(values.len());
    let mut count: Vec<usize> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        mean.push(v);
        weight.push(w);
        count.push(1);
        while mean.len() > 1 && mean[mean.len() - 2] > mean[mean.len() - 1] {
            let (m2, w2, c2) = (mean.pop().unwrap(), weight.pop().unwrap(), count.pop().unwrap());
            let last = mean.len() - 1;
            let merged_w = weight[last] + w2;
            mean[last] = (mean[last] * weight[last] + m2 * w2) / merged_w;
            weight[last] = merged_w;
            count[last] += c2;
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for ((m, _), c) in mean.iter().zip(&weight).zip(&count) {
        out.extend(std::iter::repeat_n(*m, *c));
    }
    Ok(out)
}

/// First point where the nondecreasing curve reaches `level`, linearly
/// interpolated between grid nodes; None when the curve stays below.
pub fn crossing(grid: &[f64], fitted: &[f64], level: f64) -> Option<f64> {
    debug_assert_eq!(grid.len(), fitted.len());
    if fitted.is_empty() {
        return None;
    }
    if fitted[0] >= level {
        return Some(grid[0]);
    }
    for i in 1..fitted.len() {
        if fitted[i] >= level {
            let run = fitted[i] - fitted[i - 1];
            let t = if run > 0.0 { (level - fitted[i - 1]) / run } else { 1.0 };
            return Some(grid[i - 1] + t * (grid[i] - grid[i - 1]));
        }
    }
    None
}

/// Sample mean and standard error (unbiased variance over sqrt n); a
/// single observation reports zero error.
pub fn mean_and_stderr(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, (var / n).sqrt()))
}

/// Interpolated percentile of a sorted slice, q in [0,1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

#[derive(Clone, Debug)]
pub struct CrossingCi {
    /// Crossing of the isotonic fit of the observed fractions.
    pub point: Option<f64>,
    pub lo: f64,
    pub hi: f64,
    /// Bootstrap replicates whose refitted curve reached the level.
    pub reps_with_crossing: usize,
    pub reps: usize,
}

impl CrossingCi {
    /// Closed-interval overlap test between two intervals.
    pub fn overlaps(&self, other: &CrossingCi) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Percentile bootstrap for the level crossing of a success-fraction
/// curve: counts are resampled per grid point, refit monotone, and the
/// crossing recollected. Returns None when fewer than half the replicates
/// produce a crossing.
pub fn bootstrap_crossing_ci(
    grid: &[f64],
    successes: &[usize],
    totals: &[usize],
    level: f64,
    reps: usize,
    seed: u64,
) -> Result<Option<CrossingCi>> {
    if grid.len() != successes.len() || grid.len() != totals.len() {
        return Err(DreError::InvalidInput("grid, successes, totals lengths differ".into()));
    }
    if totals.iter().any(|t| *t == 0) {
        return Err(DreError::InvalidInput("every grid point needs samples".into()));
    }
    if successes.iter().zip(totals).any(|(s, t)| s > t) {
        return Err(DreError::InvalidInput("more successes than samples".into()));
    }
    let weights: Vec<f64> = totals.iter().map(|t| *t as f64).collect();
    let observed: Vec<f64> =
        successes.iter().zip(totals).map(|(s, t)| *s as f64 / *t as f64).collect();
    let point = crossing(grid, &isotonic_nondecreasing(&observed, &weights)?, level);

    let mut rng = SplitMix64::new(seed);
    let mut crossings = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut fracs = Vec::with_capacity(grid.len());
        for (&k, &n) in successes.iter().zip(totals) {
            // resample n observations of which k are successes
            let mut hits = 0usize;
            for _ in 0..n {
                if rng.next_below(n) < k {
                    hits += 1;
                }
            }
            fracs.push(hits as f64 / n as f64);
        }
        if let Some(c) = crossing(grid, &isotonic_nondecreasing(&fracs, &weights)?, level) {
            crossings.push(c);
        }
    }
    if crossings.len() * 2 < reps {
        return Ok(None);
    }
    crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(Some(CrossingCi {
        point,
        lo: percentile(&crossings, 0.025),
        hi: percentile(&crossings, 0.975),
        reps_with_crossing: crossings.len(),
        reps,
    }))
}
