//! Versioned JSON envelopes and the consolidated reproduction table.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fock::Statistics;
use crate::game::{
    enumerate_deterministic_strategies, interference_terms, random_mixture, strategy_distribution,
    win_probability, win_probability_from_interference, ClassicalStrategy,
};
use crate::observable::BlochObservable;
use crate::scheme_one::{self, SchemeOneConfig};
use crate::scheme_two::{self, SourceAmplitudes};
use crate::trials;

pub const SCHEMA_VERSION: u32 = 1;

/// Names the formula behind a reported quantity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub quantity: String,
    pub formula: String,
}

impl Provenance {
    pub fn new(quantity: &str, formula: &str) -> Self {
        Provenance {
            quantity: quantity.to_string(),
            formula: formula.to_string(),
        }
    }
}

pub fn game_provenance() -> Vec<Provenance> {
    vec![
        Provenance::new("interference", "I_ab = sum_xy (-1)^(x xor y) p(ab|xy)"),
        Provenance::new(
            "p_win",
            "(1/4) sum over a xor b = x xor y of p(ab|xy) = 1/2 + (I_00 + I_11)/4",
        ),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema_version: u32,
    pub command: String,
    pub provenance: Vec<Provenance>,
    #[serde(flatten)]
    pub body: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: &str, provenance: Vec<Provenance>, body: T) -> Self {
        Envelope {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            provenance,
            body,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// Every computed value within `tolerance` of `expected`.
    Equal,
    /// Every computed value strictly below `expected`.
    Below,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub claim: String,
    pub expected: f64,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub closed_form: Option<f64>,
    pub pipeline: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReproduceReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReproduceOptions {
    pub seed: u64,
    pub mixtures: usize,
    pub trial_rounds: usize,
    /// Added to every computed value before comparison; a non-zero value
    /// must make the run fail.
    pub perturbation: f64,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            seed: trials::DEFAULT_SEED,
            mixtures: 1000,
            trial_rounds: 100_000,
            perturbation: 0.0,
        }
    }
}

pub const EXACT_TOL: f64 = 1e-12;

struct Checks {
    perturbation: f64,
    rows: Vec<Check>,
}

impl Checks {
    fn push(
        &mut self,
        claim: &str,
        expected: f64,
        comparison: Comparison,
        closed_form: Option<f64>,
        pipeline: Option<f64>,
    ) {
        let shift = |v: Option<f64>| v.map(|v| v + self.perturbation);
        let (closed_form, pipeline) = (shift(closed_form), shift(pipeline));
        let ok = |v: f64| match comparison {
            Comparison::Equal => (v - expected).abs() <= EXACT_TOL,
            Comparison::Below => v < expected,
        };
        let values: Vec<f64> = closed_form.into_iter().chain(pipeline).collect();
        let pass = !values.is_empty() && values.into_iter().all(ok);
        self.rows.push(Check {
            claim: claim.to_string(),
            expected,
            comparison,
            tolerance: if comparison == Comparison::Equal { EXACT_TOL } else { 0.0 },
            closed_form,
            pipeline,
            pass,
        });
    }

    fn equal(&mut self, claim: &str, expected: f64, closed_form: Option<f64>, pipeline: Option<f64>) {
        self.push(claim, expected, Comparison::Equal, closed_form, pipeline);
    }
}

/// Value in `values` farthest from `target`.
fn worst(values: impl IntoIterator<Item = f64>, target: f64) -> f64 {
    values
        .into_iter()
        .fold(target, |w, v| if (v - target).abs() > (w - target).abs() { v } else { w })
}

const AB: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

fn sign(a: u8, b: u8) -> f64 {
    if a ^ b == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Recomputes every headline number and compares it with its exact value.
pub fn reproduce(opts: &ReproduceOptions) -> Result<ReproduceReport> {
    let mut checks = Checks {
        perturbation: opts.perturbation,
        rows: Vec::new(),
    };

    // Classical strategies: pure ones plus random shared-randomness mixtures.
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut classical = Vec::new();
    for s in enumerate_deterministic_strategies() {
        classical.push(strategy_distribution(&s));
    }
    for k in 0..opts.mixtures {
        classical.push(random_mixture(&mut rng, 1 + k % 8).distribution());
    }
    checks.equal(
        "classical p_win over 32 pure strategies and random mixtures",
        0.5,
        Some(worst(classical.iter().map(win_probability_from_interference), 0.5)),
        Some(worst(classical.iter().map(win_probability), 0.5)),
    );
    checks.equal(
        "classical I_ab (largest magnitude)",
        0.0,
        None,
        Some(worst(classical.iter().flat_map(interference_terms), 0.0)),
    );

    // Scheme one.
    let sx = BlochObservable::sigma_x();
    let boson = SchemeOneConfig::optimal(Statistics::Boson);
    let boson_dist = scheme_one::measurement_distribution(&boson);
    checks.equal(
        "scheme one boson p_win, sigma_x sigma_x",
        9.0 / 16.0,
        Some(scheme_one::win_probability_closed_form(&boson)),
        Some(win_probability(&boson_dist)),
    );
    let closed = interference_terms(&scheme_one::closed_form_distribution(&boson));
    let piped = interference_terms(&boson_dist);
    for (k, (a, b)) in AB.into_iter().enumerate() {
        checks.equal(
            &format!("scheme one boson I_{a}{b}"),
            sign(a, b) / 8.0,
            Some(closed[k]),
            Some(piped[k]),
        );
    }
    let fermion_opt = SchemeOneConfig::optimal(Statistics::Fermion);
    checks.equal(
        "scheme one fermion p_win, sigma_x and -sigma_x",
        9.0 / 16.0,
        Some(scheme_one::win_probability_closed_form(&fermion_opt)),
        Some(win_probability(&scheme_one::measurement_distribution(&fermion_opt))),
    );
    let fermion_same = SchemeOneConfig {
        stats: Statistics::Fermion,
        obs_a: sx,
        obs_b: sx,
    };
    checks.equal(
        "scheme one fermion p_win, sigma_x sigma_x",
        7.0 / 16.0,
        Some(scheme_one::win_probability_closed_form(&fermion_same)),
        Some(win_probability(&scheme_one::measurement_distribution(&fermion_same))),
    );
    for stats in [Statistics::Boson, Statistics::Fermion] {
        let rates = scheme_one::postselection_rates(stats);
        for (k, expected) in [0.5, 0.25, 0.25, 0.0].into_iter().enumerate() {
            checks.equal(
                &format!("scheme one {stats} post-selection rate, x={} y={}", k / 2, k % 2),
                expected,
                None,
                Some(rates[k]),
            );
        }
    }

    // Scheme two.
    let bal = SourceAmplitudes::balanced();
    let two_dist = scheme_two::measurement_distribution(&bal, &sx, &sx);
    checks.equal(
        "scheme two p_win, balanced source, sigma_x sigma_x",
        0.625,
        Some(scheme_two::win_probability_closed_form(&bal, &sx, &sx)),
        Some(win_probability(&two_dist)),
    );
    let piped = interference_terms(&two_dist);
    for (k, (a, b)) in AB.into_iter().enumerate() {
        checks.equal(
            &format!("scheme two I_{a}{b}"),
            sign(a, b) / 4.0,
            Some(scheme_two::interference_closed_form(&bal, &sx, &sx, a, b)),
            Some(piped[k]),
        );
    }
    let refused = scheme_two::assert_physicality(Statistics::Fermion).is_err();
    checks.equal(
        "scheme two refused for fermions",
        1.0,
        None,
        Some(if refused { 1.0 } else { 0.0 }),
    );

    // Concentration test on sampled rounds.
    let log = trials::simulate_game(&boson_dist, opts.trial_rounds, opts.seed)?;
    let sig = trials::significance(&log, trials::DEFAULT_ALPHA)?;
    checks.push(
        &format!("log10 classical tail bound, scheme one boson, n={}", opts.trial_rounds),
        -100.0,
        Comparison::Below,
        None,
        Some(sig.log10_bound),
    );
    let detection = strategy_distribution(&ClassicalStrategy::detection(0.5)?);
    let log = trials::simulate_game(&detection, opts.trial_rounds, opts.seed)?;
    let sig = trials::significance(&log, trials::DEFAULT_ALPHA)?;
    checks.equal(
        &format!("classical detection strategy rejected at alpha=0.01, n={}", opts.trial_rounds),
        0.0,
        None,
        Some(if sig.rejected { 1.0 } else { 0.0 }),
    );

    let all_passed = checks.rows.iter().all(|c| c.pass);
    Ok(ReproduceReport {
        seed: opts.seed,
        checks: checks.rows,
        all_passed,
    })
}
