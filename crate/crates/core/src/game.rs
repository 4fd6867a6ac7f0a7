//! Probability algebra of the two-party blocker game.
//!
//! Referees pick `x, y` uniformly; the players win when `a ⊕ b = x ⊕ y`.
//! Any carrier that travels one definite path produces a mixture of one-way
//! signalling tables, and every such table has vanishing interference terms
//! and a win probability of exactly one half.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for normalization and identity checks on tables.
pub const PROB_TOL: f64 = 1e-12;

/// Row index of input pair `(x, y)` or column index of output pair `(a, b)`.
#[inline]
pub fn pair_index(first: u8, second: u8) -> usize {
    debug_assert!(first < 2 && second < 2);
    2 * first as usize + second as usize
}

/// Table `p(ab|xy)`, rows ordered by `(x, y)` and columns by `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalDistribution {
    #[serde(rename = "p")]
    table: [[f64; 4]; 4],
}

impl ConditionalDistribution {
    pub fn new(table: [[f64; 4]; 4]) -> Result<Self> {
        let dist = ConditionalDistribution { table };
        dist.validate()?;
        Ok(dist)
    }

    /// Uniformly random outputs for every input.
    pub fn uniform() -> Self {
        ConditionalDistribution {
            table: [[0.25; 4]; 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (row, probs) in self.table.iter().enumerate() {
            // Round-off from trace formulas may leave entries a few ulps below 0.
            if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -PROB_TOL) {
                return Err(Error::InvalidDistribution(format!(
                    "entry {p} in row (x,y)=({},{}) is negative or not finite",
                    row / 2,
                    row % 2
                )));
            }
            let total: f64 = probs.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "row (x,y)=({},{}) sums to {total}",
                    row / 2,
                    row % 2
                )));
            }
        }
        Ok(())
    }

    pub fn table(&self) -> &[[f64; 4]; 4] {
        &self.table
    }

    /// `p(ab|xy)`.
    pub fn prob(&self, a: u8, b: u8, x: u8, y: u8) -> f64 {
        self.table[pair_index(x, y)][pair_index(a, b)]
    }

    /// Output distribution for one input pair, ordered 00, 01, 10, 11.
    pub fn row(&self, x: u8, y: u8) -> &[f64; 4] {
        &self.table[pair_index(x, y)]
    }

    /// Convex combination `weight·self + (1 − weight)·other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Self {
        let mut table = [[0.0; 4]; 4];
        for (r, row) in table.iter_mut().enumerate() {
            for (c, p) in row.iter_mut().enumerate() {
                *p = weight * self.table[r][c] + (1.0 - weight) * other.table[r][c];
            }
        }
        ConditionalDistribution { table }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dist: ConditionalDistribution = serde_json::from_str(text)?;
        dist.validate()?;
        Ok(dist)
    }

    /// Writes rows `x,y,a,b,p`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for record in self.records() {
            w.serialize(record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut table = [[f64::NAN; 4]; 4];
        let mut r = csv::Reader::from_reader(reader);
        for record in r.deserialize() {
            let rec: DistributionRecord = record?;
            if rec.x > 1 || rec.y > 1 || rec.a > 1 || rec.b > 1 {
                return Err(Error::InvalidDistribution(format!(
                    "row with non-binary labels x={} y={} a={} b={}",
                    rec.x, rec.y, rec.a, rec.b
                )));
            }
            table[pair_index(rec.x, rec.y)][pair_index(rec.a, rec.b)] = rec.p;
        }
        if table.iter().flatten().any(|p| p.is_nan()) {
            return Err(Error::InvalidDistribution("csv does not cover all 16 entries".into()));
        }
        ConditionalDistribution::new(table)
    }

    pub fn records(&self) -> impl Iterator<Item = DistributionRecord> + '_ {
        (0..16u8).map(move |i| {
            let (x, y, a, b) = (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
            DistributionRecord {
                x,
                y,
                a,
                b,
                p: self.prob(a, b, x, y),
            }
        })
    }
}

/// One CSV row of a [`ConditionalDistribution`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
    pub p: f64,
}

/// `I_ab = Σ_{x,y} (−1)^(x⊕y) p(ab|xy)`.
pub fn interference_term(dist: &ConditionalDistribution, a: u8, b: u8) -> f64 {
    let mut total = 0.0;
    for x in 0..2u8 {
        for y in 0..2u8 {
            let sign = if x ^ y == 0 { 1.0 } else { -1.0 };
            total += sign * dist.prob(a, b, x, y);
        }
    }
    total
}

/// All four interference terms, ordered `I_00, I_01, I_10, I_11`.
pub fn interference_terms(dist: &ConditionalDistribution) -> [f64; 4] {
    [
        interference_term(dist, 0, 0),
        interference_term(dist, 0, 1),
        interference_term(dist, 1, 0),
        interference_term(dist, 1, 1),
    ]
}

/// Win probability under uniform inputs, summed directly over the winning
/// entries.
pub fn win_probability(dist: &ConditionalDistribution) -> f64 {
    let mut total = 0.0;
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a in 0..2u8 {
                let b = a ^ x ^ y;
                total += dist.prob(a, b, x, y);
            }
        }
    }
    let direct = total / 4.0;
    debug_assert!(
        (direct - win_probability_from_interference(dist)).abs() <= PROB_TOL,
        "win probability identity violated"
    );
    direct
}

/// `1/2 + (I_00 + I_11)/4`.
pub fn win_probability_from_interference(dist: &ConditionalDistribution) -> f64 {
    0.5 + (interference_term(dist, 0, 0) + interference_term(dist, 1, 1)) / 4.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    /// `I_00, I_01, I_10, I_11`.
    pub interference: [f64; 4],
    pub p_win: f64,
}

impl CoherenceReport {
    pub fn of(dist: &ConditionalDistribution) -> Self {
        CoherenceReport {
            interference: interference_terms(dist),
            p_win: win_probability(dist),
        }
    }

    pub fn max_abs_interference(&self) -> f64 {
        self.interference.iter().map(|i| i.abs()).fold(0.0, f64::max)
    }
}

/// The four maps `{0,1} → {0,1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitFunction {
    Zero,
    One,
    Identity,
    Not,
}

impl BitFunction {
    pub const ALL: [BitFunction; 4] = [
        BitFunction::Zero,
        BitFunction::One,
        BitFunction::Identity,
        BitFunction::Not,
    ];

    pub fn apply(self, bit: u8) -> u8 {
        match self {
            BitFunction::Zero => 0,
            BitFunction::One => 1,
            BitFunction::Identity => bit,
            BitFunction::Not => 1 - bit,
        }
    }
}

/// Outputs of both players as functions of the one input the carrier
/// delivered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Response {
    pub a: BitFunction,
    pub b: BitFunction,
}

impl Response {
    pub const SILENT: Response = Response {
        a: BitFunction::Zero,
        b: BitFunction::Zero,
    };

    pub fn outputs(&self, input: u8) -> (u8, u8) {
        (self.a.apply(input), self.b.apply(input))
    }
}

/// A classical carrier that goes to Alice with weight `lambda_sa` and to Bob
/// with weight `lambda_sb`, with a fixed response for each path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalStrategy {
    pub lambda_sa: f64,
    pub lambda_sb: f64,
    pub response_sa: Response,
    pub response_sb: Response,
}

impl ClassicalStrategy {
    pub fn new(lambda_sa: f64, response_sa: Response, response_sb: Response) -> Result<Self> {
        let s = ClassicalStrategy {
            lambda_sa,
            lambda_sb: 1.0 - lambda_sa,
            response_sa,
            response_sb,
        };
        s.validate()?;
        Ok(s)
    }

    /// Each player outputs 1 exactly when the particle arrives.
    pub fn detection(lambda_sa: f64) -> Result<Self> {
        ClassicalStrategy::new(
            lambda_sa,
            Response {
                a: BitFunction::Not,
                b: BitFunction::Zero,
            },
            Response {
                a: BitFunction::Zero,
                b: BitFunction::Not,
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        let (l_a, l_b) = (self.lambda_sa, self.lambda_sb);
        if !(l_a >= 0.0 && l_b >= 0.0) || (l_a + l_b - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidStrategy(format!(
                "branch weights ({l_a}, {l_b}) must be non-negative and sum to 1"
            )));
        }
        Ok(())
    }
}

/// `λ_SA · p_SA(ab|x) + λ_SB · p_SB(ab|y)`.
pub fn strategy_distribution(s: &ClassicalStrategy) -> ConditionalDistribution {
    let mut table = [[0.0; 4]; 4];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let row = &mut table[pair_index(x, y)];
            let (a, b) = s.response_sa.outputs(x);
            row[pair_index(a, b)] += s.lambda_sa;
            let (a, b) = s.response_sb.outputs(y);
            row[pair_index(a, b)] += s.lambda_sb;
        }
    }
    ConditionalDistribution { table }
}

/// Shared randomness: a finite convex combination of classical strategies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyMixture {
    pub components: Vec<(f64, ClassicalStrategy)>,
}

impl StrategyMixture {
    pub fn new(components: Vec<(f64, ClassicalStrategy)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidStrategy("empty mixture".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if components.iter().any(|(w, _)| !(*w >= 0.0)) || (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidStrategy(format!(
                "mixture weights must be non-negative and sum to 1, got {total}"
            )));
        }
        for (_, s) in &components {
            s.validate()?;
        }
        Ok(StrategyMixture { components })
    }

    pub fn distribution(&self) -> ConditionalDistribution {
        let mut table = [[0.0; 4]; 4];
        for (w, s) in &self.components {
            let d = strategy_distribution(s);
            for (row, drow) in table.iter_mut().zip(d.table.iter()) {
                for (p, q) in row.iter_mut().zip(drow) {
                    *p += w * q;
                }
            }
        }
        ConditionalDistribution { table }
    }
}

/// The 32 pure strategies: a definite path and a response on it. The
/// response on the unused path is fixed to [`Response::SILENT`].
pub fn enumerate_deterministic_strategies() -> Vec<ClassicalStrategy> {
    let mut out = Vec::with_capacity(32);
    for to_alice in [true, false] {
        for a in BitFunction::ALL {
            for b in BitFunction::ALL {
                let response = Response { a, b };
                out.push(if to_alice {
                    ClassicalStrategy {
                        lambda_sa: 1.0,
                        lambda_sb: 0.0,
                        response_sa: response,
                        response_sb: Response::SILENT,
                    }
                } else {
                    ClassicalStrategy {
                        lambda_sa: 0.0,
                        lambda_sb: 1.0,
                        response_sa: Response::SILENT,
                        response_sb: response,
                    }
                });
            }
        }
    }
    out
}

/// Random shared-randomness mixture of `components` strategies, each with a
/// random branch weight and random responses on both paths.
pub fn random_mixture<R: Rng>(rng: &mut R, components: usize) -> StrategyMixture {
    let components = components.max(1);
    let pick = |rng: &mut R| BitFunction::ALL[rng.random_range(0..4)];
    let mut parts = Vec::with_capacity(components);
    for _ in 0..components {
        let lambda_sa: f64 = rng.random();
        let response_sa = Response { a: pick(rng), b: pick(rng) };
        let response_sb = Response { a: pick(rng), b: pick(rng) };
        let weight: f64 = rng.random::<f64>() + 1e-3;
        parts.push((
            weight,
            ClassicalStrategy {
                lambda_sa,
                lambda_sb: 1.0 - lambda_sa,
                response_sa,
                response_sb,
            },
        ));
    }
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    for (w, _) in &mut parts {
        *w /= total;
    }
    StrategyMixture { components: parts }
}
