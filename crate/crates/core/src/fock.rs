//! Occupation-number engine for a handful of labelled modes.
//!
//! Each mode holds at most one excitation. Particles removed by a blocker are
//! not discarded: they move into a counted loss sector, so amplitudes survive
//! and branches with different loss counts stay orthogonal.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_MODES: usize = 8;

/// Tolerance for the unitarity check in [`lift_su2`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Tolerance below which a bosonic double-occupancy amplitude is treated as zero.
const DOUBLE_OCCUPANCY_TOL: f64 = 1e-12;

/// Exchange statistics of the particles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    pub fn is_fermion(self) -> bool {
        matches!(self, Statistics::Fermion)
    }
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistics::Boson => f.write_str("boson"),
            Statistics::Fermion => f.write_str("fermion"),
        }
    }
}

impl FromStr for Statistics {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "boson" | "bosons" | "b" => Ok(Statistics::Boson),
            "fermion" | "fermions" | "f" => Ok(Statistics::Fermion),
            other => Err(format!("unknown statistics `{other}` (expected boson or fermion)")),
        }
    }
}

/// Position of a mode in the canonical ordering. The ordering fixes the
/// fermionic sign convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(pub usize);

impl ModeIndex {
    /// Source particle on Alice's side.
    pub const AS: ModeIndex = ModeIndex(0);
    /// Ancilla particle on Alice's side.
    pub const AM: ModeIndex = ModeIndex(1);
    /// Source particle on Bob's side.
    pub const BS: ModeIndex = ModeIndex(2);
    /// Ancilla particle on Bob's side.
    pub const BM: ModeIndex = ModeIndex(3);
}

/// One occupation-number ket: a bit per mode plus the number of particles
/// lost to blockers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisElement {
    occupancy: u8,
    absorbed: u32,
}

impl FockBasisElement {
    /// Builds an element from explicit occupation numbers, mode 0 first.
    pub fn from_occupancy(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_MODES {
            return Err(Error::ModeCount(bits.len()));
        }
        let mut occupancy = 0u8;
        for (mode, &n) in bits.iter().enumerate() {
            match n {
                0 => {}
                1 => occupancy |= 1 << mode,
                _ => return Err(Error::UnsupportedOccupancy(mode)),
            }
        }
        Ok(FockBasisElement {
            occupancy,
            absorbed: 0,
        })
    }

    pub fn with_absorbed(self, absorbed: u32) -> Self {
        FockBasisElement { absorbed, ..self }
    }

    pub(crate) fn from_mask(occupancy: u8) -> Self {
        FockBasisElement {
            occupancy,
            absorbed: 0,
        }
    }

    pub fn mask(&self) -> u8 {
        self.occupancy
    }

    pub fn is_occupied(&self, mode: ModeIndex) -> bool {
        self.occupancy & (1 << mode.0) != 0
    }

    pub fn absorbed(&self) -> u32 {
        self.absorbed
    }

    /// Particles still present in the modes.
    pub fn occupied_count(&self) -> u32 {
        self.occupancy.count_ones()
    }

    /// Particles in the modes plus those absorbed by blockers.
    pub fn total_particles(&self) -> u32 {
        self.occupied_count() + self.absorbed
    }

    /// Number of listed modes that are occupied.
    pub fn count_in(&self, modes: &[ModeIndex]) -> u32 {
        modes.iter().filter(|&&m| self.is_occupied(m)).count() as u32
    }

    pub fn occupancy(&self, mode_count: usize) -> Vec<u8> {
        (0..mode_count)
            .map(|m| (self.occupancy >> m) & 1)
            .collect()
    }

    fn occupied_below(&self, mode: ModeIndex) -> u32 {
        let below = (1u16 << mode.0) - 1;
        (self.occupancy as u16 & below).count_ones()
    }

    fn set(self, mode: ModeIndex) -> Self {
        FockBasisElement {
            occupancy: self.occupancy | (1 << mode.0),
            ..self
        }
    }

    fn clear(self, mode: ModeIndex) -> Self {
        FockBasisElement {
            occupancy: self.occupancy & !(1 << mode.0),
            ..self
        }
    }
}

/// Sign picked up by placing a creation operator for `mode` in front of the
/// operators already building `elem`.
fn creation_sign(elem: &FockBasisElement, mode: ModeIndex, stats: Statistics) -> f64 {
    if stats.is_fermion() && elem.occupied_below(mode) % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Complex amplitudes over occupation-number kets of a fixed mode count.
///
/// Linear combinations built with [`StateVector::plus`] and
/// [`StateVector::scaled`] are not renormalized; use
/// [`StateVector::is_normalized`] before treating one as a physical state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    mode_count: usize,
    amplitudes: BTreeMap<FockBasisElement, Complex64>,
}

impl StateVector {
    /// Empty (zero) vector over `mode_count` modes.
    pub fn zero(mode_count: usize) -> Result<Self> {
        if !(1..=MAX_MODES).contains(&mode_count) {
            return Err(Error::ModeCount(mode_count));
        }
        Ok(StateVector {
            mode_count,
            amplitudes: BTreeMap::new(),
        })
    }

    pub fn from_amplitudes<I>(mode_count: usize, amplitudes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (FockBasisElement, Complex64)>,
    {
        let mut state = StateVector::zero(mode_count)?;
        for (elem, amp) in amplitudes {
            if (elem.occupancy as u16) >> mode_count != 0 {
                return Err(Error::InvalidParameter(format!(
                    "basis element {:?} does not fit in {mode_count} modes",
                    elem.occupancy(MAX_MODES)
                )));
            }
            state.accumulate(elem, amp);
        }
        Ok(state)
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn amplitude(&self, elem: &FockBasisElement) -> Complex64 {
        self.amplitudes.get(elem).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockBasisElement, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= 1e-12
    }

    /// Unit-norm copy, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let norm = self.norm_sqr().sqrt();
        (norm > 0.0).then(|| self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        StateVector {
            mode_count: self.mode_count,
            amplitudes: self
                .amplitudes
                .iter()
                .map(|(e, a)| (*e, a * factor))
                .collect(),
        }
    }

    /// Sum of two vectors over the same mode count.
    pub fn plus(&self, other: &StateVector) -> Self {
        assert_eq!(
            self.mode_count, other.mode_count,
            "cannot add states over different mode counts"
        );
        let mut out = self.clone();
        for (e, a) in &other.amplitudes {
            out.accumulate(*e, *a);
        }
        out
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .map(|(e, a)| a.conj() * other.amplitude(e))
            .sum()
    }

    fn accumulate(&mut self, elem: FockBasisElement, amp: Complex64) {
        let slot = self.amplitudes.entry(elem).or_default();
        *slot += amp;
        if *slot == Complex64::new(0.0, 0.0) {
            self.amplitudes.remove(&elem);
        }
    }

    fn check_mode(&self, mode: ModeIndex) -> Result<()> {
        if mode.0 >= self.mode_count {
            return Err(Error::ModeOutOfRange {
                mode: mode.0,
                mode_count: self.mode_count,
            });
        }
        Ok(())
    }
}

/// All-modes-empty ket with unit amplitude.
pub fn make_vacuum(mode_count: usize) -> Result<StateVector> {
    let mut state = StateVector::zero(mode_count)?;
    state.accumulate(FockBasisElement::from_mask(0), Complex64::new(1.0, 0.0));
    Ok(state)
}

/// Applies the creation operator for `mode`.
///
/// Fermionic components that already occupy `mode` vanish. Bosonic ones
/// would need a doubly occupied mode and are rejected.
pub fn apply_creation(state: &StateVector, mode: ModeIndex, stats: Statistics) -> Result<StateVector> {
    state.check_mode(mode)?;
    let mut out = StateVector::zero(state.mode_count)?;
    for (elem, amp) in &state.amplitudes {
        if elem.is_occupied(mode) {
            match stats {
                Statistics::Fermion => continue,
                Statistics::Boson => return Err(Error::UnsupportedOccupancy(mode.0)),
            }
        }
        let sign = creation_sign(elem, mode, stats);
        out.accumulate(elem.set(mode), amp * sign);
    }
    Ok(out)
}

/// Absorbing barrier on `mode`: an excitation there is moved to the loss
/// sector with its amplitude intact.
pub fn apply_blocker(state: &StateVector, mode: ModeIndex) -> Result<StateVector> {
    state.check_mode(mode)?;
    let mut out = StateVector::zero(state.mode_count)?;
    for (elem, amp) in &state.amplitudes {
        let target = if elem.is_occupied(mode) {
            elem.clear(mode).with_absorbed(elem.absorbed + 1)
        } else {
            *elem
        };
        out.accumulate(target, *amp);
    }
    Ok(out)
}

/// Restricts `state` to the kets whose occupancy satisfies `predicate`.
///
/// Returns the probability of the sector (summed over loss counts) and the
/// renormalized restriction, which is empty when the probability is zero.
pub fn occupancy_sector<P>(state: &StateVector, predicate: P) -> (f64, StateVector)
where
    P: Fn(&FockBasisElement) -> bool,
{
    let kept: BTreeMap<_, _> = state
        .amplitudes
        .iter()
        .filter(|(e, _)| predicate(e))
        .map(|(e, a)| (*e, *a))
        .collect();
    let restricted = StateVector {
        mode_count: state.mode_count,
        amplitudes: kept,
    };
    let probability = restricted.norm_sqr();
    match restricted.normalized() {
        Some(s) if probability > 0.0 => (probability, s),
        _ => (
            0.0,
            StateVector {
                mode_count: state.mode_count,
                amplitudes: BTreeMap::new(),
            },
        ),
    }
}

/// A 2×2 unitary lifted to the Fock space of a mode pair.
///
/// On one particle in the pair it acts as the matrix itself, where column
/// and row 0 refer to `pair.0`. With no particle it is the identity. With
/// both modes filled, fermions pick up `det(u)`; bosons pick up the
/// permanent and are only supported when no doubly occupied mode results.
#[derive(Clone, Debug)]
pub struct LiftedUnitary {
    u: Matrix2<Complex64>,
    pair: (ModeIndex, ModeIndex),
    stats: Statistics,
}

pub fn lift_su2(
    u: &Matrix2<Complex64>,
    pair: (ModeIndex, ModeIndex),
    stats: Statistics,
) -> Result<LiftedUnitary> {
    if pair.0 == pair.1 {
        return Err(Error::DegeneratePair(pair.0 .0));
    }
    if pair.0 .0 >= MAX_MODES || pair.1 .0 >= MAX_MODES {
        return Err(Error::ModeOutOfRange {
            mode: pair.0 .0.max(pair.1 .0),
            mode_count: MAX_MODES,
        });
    }
    let deviation = (u.adjoint() * u - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary(deviation));
    }
    Ok(LiftedUnitary {
        u: *u,
        pair,
        stats,
    })
}

impl LiftedUnitary {
    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.u
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let modes = [self.pair.0, self.pair.1];
        for &m in &modes {
            state.check_mode(m)?;
        }
        let mut out = StateVector::zero(state.mode_count)?;
        for (elem, amp) in &state.amplitudes {
            let filled = [elem.is_occupied(modes[0]), elem.is_occupied(modes[1])];
            match filled {
                [false, false] => out.accumulate(*elem, *amp),
                [true, true] => {
                    let factor = self.two_particle_factor()?;
                    out.accumulate(*elem, amp * factor);
                }
                _ => {
                    let col = if filled[0] { 0 } else { 1 };
                    let rest = elem.clear(modes[col]);
                    let sign_in = creation_sign(&rest, modes[col], self.stats);
                    for (row, &target) in modes.iter().enumerate() {
                        let coeff = self.u[(row, col)];
                        if coeff == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let sign_out = creation_sign(&rest, target, self.stats);
                        out.accumulate(rest.set(target), amp * coeff * (sign_in * sign_out));
                    }
                }
            }
        }
        Ok(out)
    }

    fn two_particle_factor(&self) -> Result<Complex64> {
        let u = &self.u;
        match self.stats {
            Statistics::Fermion => Ok(u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)]),
            Statistics::Boson => {
                // Amplitudes of the doubly occupied kets |2,0> and |0,2>.
                let to_first = u[(0, 0)] * u[(0, 1)];
                let to_second = u[(1, 0)] * u[(1, 1)];
                if to_first.norm() > DOUBLE_OCCUPANCY_TOL || to_second.norm() > DOUBLE_OCCUPANCY_TOL
                {
                    return Err(Error::UnsupportedOccupancy(self.pair.0 .0));
                }
                Ok(u[(0, 0)] * u[(1, 1)] + u[(0, 1)] * u[(1, 0)])
            }
        }
    }
}
