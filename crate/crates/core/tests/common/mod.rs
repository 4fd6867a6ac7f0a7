//! Reference formulas shared by the integration tests, written directly
//! from the textbook definitions rather than through the library.

#![allow(dead_code)]

use coherence_game::game::ConditionalDistribution;
use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `n·σ` for the unit vector at polar angle `theta`, azimuth `phi`.
pub fn sigma(theta: f64, phi: f64) -> Matrix2<Complex64> {
    let (n_x, n_y, n_z) = (theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
    Matrix2::new(c(n_z, 0.0), c(n_x, -n_y), c(n_x, n_y), c(-n_z, 0.0))
}

/// `(1 + (−1)^k σ)/2`.
pub fn proj(s: &Matrix2<Complex64>, k: u8) -> Matrix2<Complex64> {
    let sign = if k == 0 { 1.0 } else { -1.0 };
    (Matrix2::identity() + s * c(sign, 0.0)) * c(0.5, 0.0)
}

pub fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, k| a[(r / 2, k / 2)] * b[(r % 2, k % 2)])
}

pub fn expect(psi: &Vector4<Complex64>, op: &Matrix4<Complex64>) -> f64 {
    (psi.adjoint() * op * psi)[(0, 0)].re
}

/// Direct-sum win probability must equal `1/2 + (I_00 + I_11)/4`; checks
/// the identity with sums written out here and returns the direct value.
pub fn checked_win(d: &ConditionalDistribution) -> f64 {
    let mut direct = 0.0;
    let mut i = [[0.0; 2]; 2];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let p = d.prob(a, b, x, y);
                    if a ^ b == x ^ y {
                        direct += p / 4.0;
                    }
                    i[a as usize][b as usize] += if x == y { p } else { -p };
                }
            }
        }
    }
    let via_i = 0.5 + (i[0][0] + i[1][1]) / 4.0;
    assert!((direct - via_i).abs() <= 1e-12, "identity: {direct} vs {via_i}");
    direct
}

pub fn max_entry_gap(a: &ConditionalDistribution, b: &ConditionalDistribution) -> f64 {
    a.table()
        .iter()
        .flatten()
        .zip(b.table().iter().flatten())
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}
