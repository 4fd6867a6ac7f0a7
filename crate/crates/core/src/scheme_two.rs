//! One particle shared between modes A and B, read out in the vacuum /
//! one-particle basis of each mode.
//!
//! Basis ordering is `|n_A n_B⟩` with index `2·n_A + n_B`. A blocker on a
//! side replaces that side by vacuum and leaves the other side's reduced
//! state.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Statistics;
use crate::game::{pair_index, ConditionalDistribution, CoherenceReport};
use crate::observable::BlochObservable;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Caveat attached to bosonic runs.
pub const BOSON_NOTE: &str = "physical for bosons in principle, but reading out a superposition \
     of vacuum and one particle requires violating particle-number conservation";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Matrix4<Complex64>);

impl DensityMatrix {
    pub fn new(entries: Matrix4<Complex64>) -> Result<Self> {
        let rho = DensityMatrix(entries);
        rho.validate()?;
        Ok(rho)
    }

    pub fn entries(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.0).eigenvalues;
        [eig[0], eig[1], eig[2], eig[3]]
    }

    pub fn validate(&self) -> Result<()> {
        let asym = (self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !(asym <= HERMITIAN_TOL) {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (deviation {asym:e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < EIGENVALUE_FLOOR {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// `Tr_B ρ`.
    pub fn reduced_a(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|i, k| (0..2).map(|j| self.0[(2 * i + j, 2 * k + j)]).sum())
    }

    /// `Tr_A ρ`.
    pub fn reduced_b(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|j, l| (0..2).map(|i| self.0[(2 * i + j, 2 * i + l)]).sum())
    }

    /// `Tr[ρ (Π_A ⊗ Π_B)]`, real part.
    pub fn expectation(&self, pi_a: &Matrix2<Complex64>, pi_b: &Matrix2<Complex64>) -> f64 {
        (self.0 * pi_a.kronecker(pi_b)).trace().re
    }
}

fn vacuum_projector() -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceAmplitudes {
    pub s0: Complex64,
    pub s1: Complex64,
}

impl SourceAmplitudes {
    pub fn new(s0: Complex64, s1: Complex64) -> Result<Self> {
        let norm = s0.norm_sqr() + s1.norm_sqr();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(SourceAmplitudes { s0, s1 })
    }

    /// Rescales arbitrary amplitudes to unit norm.
    pub fn normalized(s0: Complex64, s1: Complex64) -> Result<Self> {
        let norm = (s0.norm_sqr() + s1.norm_sqr()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(SourceAmplitudes {
            s0: s0 / norm,
            s1: s1 / norm,
        })
    }

    /// `|s0| = cos(mixing)`, `|s1| = sin(mixing)`, `arg s0 − arg s1 = phase`.
    pub fn from_angles(mixing: f64, phase: f64) -> Self {
        SourceAmplitudes {
            s0: Complex64::from_polar(mixing.cos(), phase),
            s1: Complex64::new(mixing.sin(), 0.0),
        }
    }

    pub fn balanced() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        SourceAmplitudes {
            s0: Complex64::new(h, 0.0),
            s1: Complex64::new(h, 0.0),
        }
    }
}

/// `|ψ⟩⟨ψ|` with `|ψ⟩ = s0|10⟩ + s1|01⟩`.
pub fn prepare_state(s: &SourceAmplitudes) -> DensityMatrix {
    let mut psi = nalgebra::Vector4::<Complex64>::zeros();
    psi[pair_index(1, 0)] = s.s0;
    psi[pair_index(0, 1)] = s.s1;
    DensityMatrix(psi * psi.adjoint())
}

/// Replaces `side` by vacuum, keeping the other side's reduced state.
pub fn blocking_channel(rho: &DensityMatrix, side: Side) -> DensityMatrix {
    let out = match side {
        Side::A => vacuum_projector().kronecker(&rho.reduced_b()),
        Side::B => rho.reduced_a().kronecker(&vacuum_projector()),
    };
    DensityMatrix(out)
}

/// `ρ_xy = (B_A)^x (B_B)^y ρ`.
pub fn encoded_state(s: &SourceAmplitudes, x: u8, y: u8) -> DensityMatrix {
    let mut rho = prepare_state(s);
    if y == 1 {
        rho = blocking_channel(&rho, Side::B);
    }
    if x == 1 {
        rho = blocking_channel(&rho, Side::A);
    }
    rho
}

/// `p(ab|xy) = Tr[ρ_xy Π_a ⊗ Π_b]`.
pub fn measurement_distribution(
    s: &SourceAmplitudes,
    obs_a: &BlochObservable,
    obs_b: &BlochObservable,
) -> ConditionalDistribution {
    let mut table = [[0.0; 4]; 4];
    for x in 0..2u8 {
        for y in 0..2u8 {
            let rho = encoded_state(s, x, y);
            for a in 0..2u8 {
                for b in 0..2u8 {
                    table[pair_index(x, y)][pair_index(a, b)] =
                        rho.expectation(&obs_a.projector(a), &obs_b.projector(b));
                }
            }
        }
    }
    ConditionalDistribution::new(table).expect("trace-formula table is normalized")
}

/// `s0 s1* ⟨0|Π_a|1⟩⟨1|Π_b|0⟩ + h.c.`
pub fn interference_closed_form(
    s: &SourceAmplitudes,
    obs_a: &BlochObservable,
    obs_b: &BlochObservable,
    a: u8,
    b: u8,
) -> f64 {
    let pa = obs_a.projector(a);
    let pb = obs_b.projector(b);
    let term = s.s0 * s.s1.conj() * pa[(0, 1)] * pb[(1, 0)];
    2.0 * term.re
}

/// `1/2 + (1/8)(s0 s1* ⟨0|σ_A|1⟩⟨1|σ_B|0⟩ + h.c.)`.
pub fn win_probability_closed_form(
    s: &SourceAmplitudes,
    obs_a: &BlochObservable,
    obs_b: &BlochObservable,
) -> f64 {
    let term = s.s0 * s.s1.conj() * obs_a.off_diagonal() * obs_b.off_diagonal().conj();
    0.5 + (term + term.conj()).re / 8.0
}

/// Fermions are refused: the vacuum/one-particle readout breaks the parity
/// superselection rule. Bosons pass with a caveat.
pub fn assert_physicality(stats: Statistics) -> Result<&'static str> {
    match stats {
        Statistics::Boson => Ok(BOSON_NOTE),
        Statistics::Fermion => Err(Error::SuperselectionViolation),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeTwoReport {
    pub s0: Complex64,
    pub s1: Complex64,
    pub theta_a: f64,
    pub phi_a: f64,
    pub theta_b: f64,
    pub phi_b: f64,
    pub p_table: ConditionalDistribution,
    pub interference: [f64; 4],
    pub interference_closed_form: [f64; 4],
    /// Win probability of the reported table.
    pub p_win: f64,
    pub p_win_pipeline: f64,
    pub p_win_closed_form: f64,
    pub physicality_note: String,
}

pub fn report(
    stats: Statistics,
    s: &SourceAmplitudes,
    obs_a: &BlochObservable,
    obs_b: &BlochObservable,
) -> Result<SchemeTwoReport> {
    let note = assert_physicality(stats)?;
    let dist = measurement_distribution(s, obs_a, obs_b);
    let coherence = CoherenceReport::of(&dist);
    let closed = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .map(|(a, b)| interference_closed_form(s, obs_a, obs_b, a, b));
    Ok(SchemeTwoReport {
        s0: s.s0,
        s1: s.s1,
        theta_a: obs_a.theta(),
        phi_a: obs_a.phi(),
        theta_b: obs_b.theta(),
        phi_b: obs_b.phi(),
        p_table: dist,
        interference: coherence.interference,
        interference_closed_form: closed,
        p_win: coherence.p_win,
        p_win_pipeline: coherence.p_win,
        p_win_closed_form: win_probability_closed_form(s, obs_a, obs_b),
        physicality_note: note.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{interference_terms, win_probability};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn max_dev(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn diag(d: [f64; 4]) -> Matrix4<Complex64> {
        Matrix4::from_diagonal(&nalgebra::Vector4::new(c(d[0]), c(d[1]), c(d[2]), c(d[3])))
    }

    #[test]
    fn prepare_pure_states() {
        let s = SourceAmplitudes::new(c(1.0), c(0.0)).unwrap();
        assert!(max_dev(prepare_state(&s).entries(), &diag([0.0, 0.0, 1.0, 0.0])) < 1e-15);

        let rho = prepare_state(&SourceAmplitudes::balanced());
        let m = rho.entries();
        for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert!((m[(i, j)] - c(0.5)).norm() < 1e-15);
        }
        assert!((m.iter().map(|z| z.norm()).sum::<f64>() - 2.0).abs() < 1e-15);
        rho.validate().unwrap();
    }

    #[test]
    #[allow(clippy::approx_constant)] // rounded on purpose, as typed on a command line
    fn amplitude_validation() {
        assert!(matches!(
            SourceAmplitudes::new(c(0.7071068), c(0.7071068)),
            Err(Error::NotNormalized(_))
        ));
        let s = SourceAmplitudes::normalized(c(0.7071068), c(0.7071068)).unwrap();
        assert!((s.s0.norm_sqr() + s.s1.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(SourceAmplitudes::normalized(c(0.0), c(0.0)).is_err());
    }

    #[test]
    fn blocking_balanced_state() {
        let rho = prepare_state(&SourceAmplitudes::balanced());
        let blocked = blocking_channel(&rho, Side::A);
        assert!(max_dev(blocked.entries(), &diag([0.5, 0.5, 0.0, 0.0])) < 1e-15);
        let both = blocking_channel(&blocked, Side::B);
        assert!(max_dev(both.entries(), &diag([1.0, 0.0, 0.0, 0.0])) < 1e-15);
        let twice = blocking_channel(&blocked, Side::A);
        assert!(max_dev(twice.entries(), blocked.entries()) < 1e-15);
    }

    #[test]
    fn encoded_states() {
        let s = SourceAmplitudes::new(c(0.6), c(0.8)).unwrap();
        let rho = prepare_state(&s);
        assert_eq!(encoded_state(&s, 0, 0), rho);
        // ρ_A = diag(|s1|², |s0|²), B in vacuum.
        let e01 = encoded_state(&s, 0, 1);
        assert!(max_dev(e01.entries(), &diag([0.64, 0.0, 0.36, 0.0])) < 1e-15);
        let e10 = encoded_state(&s, 1, 0);
        assert!(max_dev(e10.entries(), &diag([0.36, 0.64, 0.0, 0.0])) < 1e-15);
        let e11 = encoded_state(&s, 1, 1);
        assert!(max_dev(e11.entries(), &diag([1.0, 0.0, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn optimal_table() {
        let sx = BlochObservable::sigma_x();
        let d = measurement_distribution(&SourceAmplitudes::balanced(), &sx, &sx);
        for (p, e) in d.row(0, 0).iter().zip([0.5, 0.0, 0.0, 0.5]) {
            assert!((p - e).abs() < 1e-15);
        }
        for (x, y) in [(0, 1), (1, 0), (1, 1)] {
            for p in d.row(x, y) {
                assert!((p - 0.25).abs() < 1e-15);
            }
        }
        for (v, e) in interference_terms(&d).iter().zip([0.25, -0.25, -0.25, 0.25]) {
            assert!((v - e).abs() < 1e-15);
        }
        assert!((win_probability(&d) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn closed_form_values() {
        let sx = BlochObservable::sigma_x();
        let sy = BlochObservable::sigma_y();
        let bal = SourceAmplitudes::balanced();
        assert!((win_probability_closed_form(&bal, &sx, &sx) - 0.625).abs() < 1e-15);
        assert!((win_probability_closed_form(&bal, &sx, &sy) - 0.5).abs() < 1e-15);
        let d = measurement_distribution(&bal, &sx, &sy);
        assert!((win_probability(&d) - 0.5).abs() < 1e-15);
        let lone = SourceAmplitudes::new(c(1.0), c(0.0)).unwrap();
        let o = BlochObservable::new(1.1, 2.3).unwrap();
        assert_eq!(win_probability_closed_form(&lone, &o, &sy), 0.5);
    }

    #[test]
    fn physicality() {
        assert!(assert_physicality(Statistics::Boson).unwrap().contains("particle-number"));
        let err = assert_physicality(Statistics::Fermion).unwrap_err();
        assert!(matches!(err, Error::SuperselectionViolation));
        assert!(err.to_string().contains("parity superselection rule"));
        let sx = BlochObservable::sigma_x();
        assert!(report(Statistics::Fermion, &SourceAmplitudes::balanced(), &sx, &sx).is_err());
    }

    #[test]
    fn rejects_invalid_density_matrices() {
        assert!(DensityMatrix::new(diag([0.5, 0.5, 0.5, 0.0])).is_err());
        assert!(DensityMatrix::new(diag([1.5, -0.5, 0.0, 0.0])).is_err());
        let mut m = diag([0.5, 0.5, 0.0, 0.0]);
        m[(0, 1)] = c(0.1);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(diag([0.25; 4])).is_ok());
    }
}
