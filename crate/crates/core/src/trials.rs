//! Seeded repetitions of the game and the concentration test for the
//! classical value one half.
//!
//! Under any classical strategy the win frequency `F_N` over `N` rounds
//! satisfies `P[|F_N − 1/2| ≥ ε] ≤ 2·exp(−2Nε²)`, so a small bound at the
//! observed deviation is evidence against every classical model at once.

use std::io::Write;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{pair_index, ConditionalDistribution};

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Environment variable consulted for the default seed.
pub const SEED_ENV: &str = "COHERENCE_GAME_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
    pub win: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialLog {
    pub seed: u64,
    pub rounds: Vec<Round>,
}

impl TrialLog {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn wins(&self) -> usize {
        self.rounds.iter().filter(|r| r.win).count()
    }

    /// Columns `round,x,y,a,b,win`, rounds counted from 1.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["round", "x", "y", "a", "b", "win"])?;
        for (i, r) in self.rounds.iter().enumerate() {
            w.write_record([
                (i + 1).to_string(),
                r.x.to_string(),
                r.y.to_string(),
                r.a.to_string(),
                r.b.to_string(),
                u8::from(r.win).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Generator for `(master seed, stream)`; stream 0 is what
/// [`simulate_game`] uses.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn play_round<R: Rng>(dist: &ConditionalDistribution, rng: &mut R) -> Round {
    let xy: u8 = rng.random_range(0..4);
    let (x, y) = (xy >> 1, xy & 1);
    let u: f64 = rng.random();
    let row = dist.row(x, y);
    let mut acc = 0.0;
    // Inverse CDF over outcomes 00, 01, 10, 11; rounding slack falls on the
    // last outcome with positive mass.
    let mut outcome = (0..4).rev().find(|&k| row[k] > 0.0).unwrap_or(3);
    for (k, p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            outcome = k;
            break;
        }
    }
    let (a, b) = ((outcome >> 1) as u8, (outcome & 1) as u8);
    Round {
        x,
        y,
        a,
        b,
        win: a ^ b == x ^ y,
    }
}

fn check_inputs(dist: &ConditionalDistribution, n: usize) -> Result<()> {
    dist.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("number of rounds must be at least 1".into()));
    }
    Ok(())
}

/// `n` independent rounds with uniform inputs, outputs drawn from `dist`.
pub fn simulate_game(dist: &ConditionalDistribution, n: usize, seed: u64) -> Result<TrialLog> {
    check_inputs(dist, n)?;
    let mut rng = stream_rng(seed, 0);
    let rounds = (0..n).map(|_| play_round(dist, &mut rng)).collect();
    Ok(TrialLog { seed, rounds })
}

/// Win count of `n` rounds on one stream, without keeping the log. Gives
/// the same count as [`simulate_game`] for stream 0.
pub fn count_wins(dist: &ConditionalDistribution, n: usize, seed: u64, stream: u64) -> usize {
    let mut rng = stream_rng(seed, stream);
    (0..n).filter(|_| play_round(dist, &mut rng).win).count()
}

/// Win frequencies for a batch of independent runs, one stream per run.
/// The result does not depend on how the runs are scheduled.
pub fn batch_frequencies(
    dist: &ConditionalDistribution,
    n: usize,
    seed: u64,
    streams: Range<u64>,
) -> Result<Vec<f64>> {
    check_inputs(dist, n)?;
    Ok(streams
        .into_par_iter()
        .map(|stream| count_wins(dist, n, seed, stream) as f64 / n as f64)
        .collect())
}

/// Counts of each `(x, y, a, b)` over `n` rounds, indexed like
/// [`ConditionalDistribution::records`].
pub fn joint_counts(dist: &ConditionalDistribution, n: usize, seed: u64) -> Result<[u64; 16]> {
    check_inputs(dist, n)?;
    let mut rng = stream_rng(seed, 0);
    let mut counts = [0u64; 16];
    for _ in 0..n {
        let r = play_round(dist, &mut rng);
        counts[4 * pair_index(r.x, r.y) + pair_index(r.a, r.b)] += 1;
    }
    Ok(counts)
}

/// `F_N`, the fraction of rounds won.
pub fn relative_frequency(log: &TrialLog) -> Result<f64> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(log.wins() as f64 / log.len() as f64)
}

/// `2·exp(−2nε²)`.
pub fn azuma_bound(n: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {epsilon}")));
    }
    Ok(2.0 * (-2.0 * n as f64 * epsilon * epsilon).exp())
}

/// `log10` of [`azuma_bound`], finite even where the bound underflows.
pub fn log10_azuma_bound(n: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {epsilon}")));
    }
    Ok(2f64.log10() - 2.0 * n as f64 * epsilon * epsilon / std::f64::consts::LN_10)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub seed: u64,
    pub n: usize,
    pub f_n: f64,
    pub epsilon: f64,
    /// `2·exp(−2nε²)` as computed, possibly above 1.
    pub raw_bound: f64,
    /// `min(1, raw_bound)`: tail probability under the classical hypothesis.
    pub bound: f64,
    pub log10_bound: f64,
    pub alpha: f64,
    pub rejected: bool,
}

/// Deviation of `F_N` from one half and its classical tail bound; the
/// classical model is rejected when the bound falls below `alpha`.
pub fn significance(log: &TrialLog, alpha: f64) -> Result<SignificanceReport> {
    let f_n = relative_frequency(log)?;
    significance_from_frequency(log.seed, log.len(), f_n, alpha)
}

pub fn significance_from_frequency(
    seed: u64,
    n: usize,
    f_n: f64,
    alpha: f64,
) -> Result<SignificanceReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let epsilon = (f_n - 0.5).abs();
    let raw_bound = azuma_bound(n, epsilon)?;
    Ok(SignificanceReport {
        seed,
        n,
        f_n,
        epsilon,
        raw_bound,
        bound: raw_bound.min(1.0),
        log10_bound: log10_azuma_bound(n, epsilon)?,
        alpha,
        rejected: raw_bound < alpha,
    })
}
