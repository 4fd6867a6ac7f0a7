//! Two-outcome qubit observables parametrized on the Bloch sphere.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `σ = sinθ cosφ σ_x + sinθ sinφ σ_y + cosθ σ_z`, so `σ² = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochObservable {
    theta: f64,
    phi: f64,
}

impl BlochObservable {
    /// `theta` in `[0, π]`, `phi` in `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::AngleOutOfRange {
                name: "theta",
                value: theta,
                range: "[0, pi]",
            });
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::AngleOutOfRange {
                name: "phi",
                value: phi,
                range: "[0, 2pi)",
            });
        }
        Ok(BlochObservable { theta, phi })
    }

    pub fn sigma_x() -> Self {
        BlochObservable {
            theta: FRAC_PI_2,
            phi: 0.0,
        }
    }

    pub fn sigma_y() -> Self {
        BlochObservable {
            theta: FRAC_PI_2,
            phi: FRAC_PI_2,
        }
    }

    pub fn sigma_z() -> Self {
        BlochObservable {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `-σ`, i.e. the Bloch vector reversed. Outcome labels swap.
    pub fn negated(&self) -> Self {
        let mut phi = self.phi + PI;
        if phi >= TAU {
            phi -= TAU;
        }
        BlochObservable {
            theta: PI - self.theta,
            phi,
        }
    }

    /// `⟨0|σ|0⟩ = cosθ`.
    pub fn diagonal(&self) -> f64 {
        self.theta.cos()
    }

    /// `⟨0|σ|1⟩ = sinθ·e^(−iφ)`.
    pub fn off_diagonal(&self) -> Complex64 {
        Complex64::from_polar(self.theta.sin(), -self.phi)
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        let z = Complex64::new(self.diagonal(), 0.0);
        let off = self.off_diagonal();
        Matrix2::new(z, off, off.conj(), -z)
    }

    /// `Π_outcome = (1 + (−1)^outcome σ) / 2`.
    pub fn projector(&self, outcome: u8) -> Matrix2<Complex64> {
        debug_assert!(outcome < 2);
        let sign = if outcome == 0 { 0.5 } else { -0.5 };
        Matrix2::identity().scale(0.5) + self.matrix().scale(sign)
    }
}

pub fn observable_matrix(o: &BlochObservable) -> Matrix2<Complex64> {
    o.matrix()
}

pub fn projector(o: &BlochObservable, outcome: u8) -> Matrix2<Complex64> {
    o.projector(outcome)
}
