//! Source particle plus a pre-shared ancilla, both split between Alice and
//! Bob.
//!
//! Blockers sit on the source modes. Only rounds with one particle on each
//! side are measured; in every other round both players output a uniformly
//! random bit.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fock::{
    apply_blocker, apply_creation, make_vacuum, occupancy_sector, FockBasisElement, ModeIndex,
    Statistics, StateVector,
};
use crate::game::{pair_index, ConditionalDistribution, CoherenceReport};
use crate::observable::BlochObservable;

const ALICE: [ModeIndex; 2] = [ModeIndex::AS, ModeIndex::AM];
const BOB: [ModeIndex; 2] = [ModeIndex::BS, ModeIndex::BM];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeOneConfig {
    pub stats: Statistics,
    pub obs_a: BlochObservable,
    pub obs_b: BlochObservable,
}

impl SchemeOneConfig {
    /// `σ_A = σ_x` and `σ_B = ±σ_x`, the optimal setting for either statistics.
    pub fn optimal(stats: Statistics) -> Self {
        let obs_b = match stats {
            Statistics::Boson => BlochObservable::sigma_x(),
            Statistics::Fermion => BlochObservable::sigma_x().negated(),
        };
        SchemeOneConfig {
            stats,
            obs_a: BlochObservable::sigma_x(),
            obs_b,
        }
    }
}

/// Result of conditioning on one particle per side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostselectedState {
    pub prob_one_per_side: f64,
    /// Amplitudes over `|q_A q_B⟩`, index `2·q_A + q_B`. `None` when the
    /// event has zero probability.
    pub qubit_state: Option<[Complex64; 4]>,
}

/// `(1/2)(a†_S + b†_S)(a†_M + b†_M)|vac⟩` over modes AS, AM, BS, BM.
pub fn prepare_joint_state(stats: Statistics) -> StateVector {
    let build = || -> crate::Result<StateVector> {
        let vac = make_vacuum(4)?;
        let ancilla = apply_creation(&vac, ModeIndex::AM, stats)?
            .plus(&apply_creation(&vac, ModeIndex::BM, stats)?);
        let joint = apply_creation(&ancilla, ModeIndex::AS, stats)?
            .plus(&apply_creation(&ancilla, ModeIndex::BS, stats)?);
        Ok(joint.scaled(Complex64::new(0.5, 0.0)))
    };
    build().expect("four-mode joint state stays in the single-occupancy regime")
}

fn one_per_side(e: &FockBasisElement) -> bool {
    e.count_in(&ALICE) == 1 && e.count_in(&BOB) == 1
}

/// Qubit label on one side: the source mode occupied is `|0⟩`, the ancilla
/// mode is `|1⟩`.
fn qubit_index(e: &FockBasisElement) -> usize {
    let qa = usize::from(!e.is_occupied(ModeIndex::AS));
    let qb = usize::from(!e.is_occupied(ModeIndex::BS));
    2 * qa + qb
}

/// Blocks the source modes selected by `(x, y)` and post-selects on one
/// particle per side.
pub fn encode_and_postselect(stats: Statistics, x: u8, y: u8) -> PostselectedState {
    let mut state = prepare_joint_state(stats);
    if x == 1 {
        state = apply_blocker(&state, ModeIndex::AS).expect("mode AS exists");
    }
    if y == 1 {
        state = apply_blocker(&state, ModeIndex::BS).expect("mode BS exists");
    }
    let (prob, sector) = occupancy_sector(&state, one_per_side);
    if sector.is_empty() {
        return PostselectedState {
            prob_one_per_side: 0.0,
            qubit_state: None,
        };
    }
    let mut qubits = [Complex64::new(0.0, 0.0); 4];
    for (elem, amp) in sector.iter() {
        // Both particles are present, so nothing was absorbed.
        debug_assert_eq!(elem.absorbed(), 0);
        qubits[qubit_index(elem)] += amp;
    }
    PostselectedState {
        prob_one_per_side: prob,
        qubit_state: Some(qubits),
    }
}

fn expectation(state: &[Complex64; 4], op: &Matrix4<Complex64>) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += state[i].conj() * op[(i, j)] * state[j];
        }
    }
    acc.re
}

/// Exact outcome table from the Fock-space pipeline.
pub fn measurement_distribution(config: &SchemeOneConfig) -> ConditionalDistribution {
    let mut table = [[0.0; 4]; 4];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let post = encode_and_postselect(config.stats, x, y);
            let q = post.prob_one_per_side;
            let row = &mut table[pair_index(x, y)];
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let measured = post.qubit_state.map_or(0.0, |psi| {
                        let op = config.obs_a.projector(a).kronecker(&config.obs_b.projector(b));
                        expectation(&psi, &op)
                    });
                    row[pair_index(a, b)] = (1.0 - q) / 4.0 + q * measured;
                }
            }
        }
    }
    ConditionalDistribution::new(table).expect("scheme-one table is normalized")
}

/// Same table written out analytically from the post-selected states
/// `(|01⟩ ± |10⟩)/√2`, `|01⟩`, `|10⟩` and their rates `1/2, 1/4, 1/4, 0`.
pub fn closed_form_distribution(config: &SchemeOneConfig) -> ConditionalDistribution {
    // Entries of Π_outcome for an observable.
    let proj = |o: &BlochObservable, outcome: u8| {
        let s = if outcome == 0 { 1.0 } else { -1.0 };
        let p00 = 0.5 * (1.0 + s * o.diagonal());
        let p11 = 0.5 * (1.0 - s * o.diagonal());
        let p01 = o.off_diagonal() * (0.5 * s);
        (p00, p11, p01)
    };
    let exchange = match config.stats {
        Statistics::Boson => 1.0,
        Statistics::Fermion => -1.0,
    };
    let mut table = [[0.0; 4]; 4];
    for a in 0..2u8 {
        for b in 0..2u8 {
            let (a00, a11, a01) = proj(&config.obs_a, a);
            let (b00, b11, b01) = proj(&config.obs_b, b);
            let both_open = 0.5 * (a00 * b11 + a11 * b00) + exchange * (a01 * b01.conj()).re;
            let bob_blocked = a00 * b11;
            let alice_blocked = a11 * b00;
            let col = pair_index(a, b);
            table[pair_index(0, 0)][col] = 0.5 / 4.0 + 0.5 * both_open;
            table[pair_index(0, 1)][col] = 0.75 / 4.0 + 0.25 * bob_blocked;
            table[pair_index(1, 0)][col] = 0.75 / 4.0 + 0.25 * alice_blocked;
            table[pair_index(1, 1)][col] = 0.25;
        }
    }
    ConditionalDistribution::new(table).expect("closed-form table is normalized")
}

/// `1/2 ± (1/32)(⟨0|σ_A|1⟩⟨1|σ_B|0⟩ + ⟨1|σ_A|0⟩⟨0|σ_B|1⟩)`, `+` for bosons.
pub fn win_probability_closed_form(config: &SchemeOneConfig) -> f64 {
    let a01 = config.obs_a.off_diagonal();
    let b01 = config.obs_b.off_diagonal();
    let bracket = a01 * b01.conj() + a01.conj() * b01;
    let sign = match config.stats {
        Statistics::Boson => 1.0,
        Statistics::Fermion => -1.0,
    };
    0.5 + sign * bracket.re / 32.0
}

/// Post-selection rates for inputs 00, 01, 10, 11.
pub fn postselection_rates(stats: Statistics) -> [f64; 4] {
    let mut rates = [0.0; 4];
    for x in 0..2u8 {
        for y in 0..2u8 {
            rates[pair_index(x, y)] = encode_and_postselect(stats, x, y).prob_one_per_side;
        }
    }
    rates
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeOneReport {
    pub stats: Statistics,
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
    pub p_table: ConditionalDistribution,
    pub postselection_rates: [f64; 4],
    pub interference: [f64; 4],
    /// Win probability of the reported table.
    pub p_win: f64,
    pub p_win_pipeline: f64,
    pub p_win_closed_form: f64,
}

pub fn report(config: &SchemeOneConfig) -> SchemeOneReport {
    let dist = measurement_distribution(config);
    let coherence = CoherenceReport::of(&dist);
    SchemeOneReport {
        stats: config.stats,
        theta_a: config.obs_a.theta(),
        phi_a: config.obs_a.phi(),
        theta_b: config.obs_b.theta(),
        phi_b: config.obs_b.phi(),
        p_table: dist,
        postselection_rates: postselection_rates(config.stats),
        interference: coherence.interference,
        p_win: coherence.p_win,
        p_win_pipeline: coherence.p_win,
        p_win_closed_form: win_probability_closed_form(config),
    }
}
