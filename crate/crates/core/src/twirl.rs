//! Averaging over joint rotations about the z axis.
//!
//! `U_z(θ) = exp(iθŜ_z)` is diagonal in the computational basis,
//! `diag(e^{iθ}, 1, 1, e^{−iθ})`, so the average kills every coherence between
//! sectors of different `S_z`. What survives in the coupled basis is the
//! diagonal plus the `s₀ ↔ t₀` pair.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{conjugate_by, ComplexMatrix4, C64, ZERO};
use crate::qstate::{coupled_basis_matrix, DensityOperator, S0, T0};
use crate::sampling::SpunState;

pub const DEFAULT_TWIRL_POINTS: usize = 16;
pub const MIN_TWIRL_POINTS: usize = 8;

fn keep_in_spun_form(i: usize, j: usize) -> bool {
    i == j || (i == S0 && j == T0) || (i == T0 && j == S0)
}

/// Exact z-twirl by zeroing coupled-basis entries.
pub fn twirl_analytic(rho: &DensityOperator) -> DensityOperator {
    let b = coupled_basis_matrix();
    let coupled = rho.to_coupled_basis();
    let kept = ComplexMatrix4::from_fn(|i, j| {
        if keep_in_spun_form(i, j) {
            coupled.0[i][j]
        } else {
            ZERO
        }
    });
    DensityOperator::from_trusted(b * kept * b.adjoint())
}

/// Uniform `n_points` quadrature of `(1/2π) ∫ U_z(θ)† ρ U_z(θ) dθ`.
pub fn twirl_numeric(rho: &DensityOperator, n_points: usize) -> Result<DensityOperator> {
    if n_points < MIN_TWIRL_POINTS {
        return Err(Error::OutOfDomain(format!(
            "twirl quadrature needs at least {MIN_TWIRL_POINTS} points, got {n_points}"
        )));
    }
    let mut acc = ComplexMatrix4::zeros();
    for k in 0..n_points {
        let theta = TAU * k as f64 / n_points as f64;
        let e = C64::from_polar(1.0, theta);
        let u = ComplexMatrix4::from_fn(|i, j| match (i, j) {
            (0, 0) => e,
            (3, 3) => e.conj(),
            (1, 1) | (2, 2) => C64::new(1.0, 0.0),
            _ => ZERO,
        });
        acc = acc + conjugate_by(rho.matrix(), &u);
    }
    Ok(DensityOperator::from_trusted(
        acc.scale(1.0 / n_points as f64),
    ))
}

/// Rotates the magnetisation onto `+z`, then twirls. The result lives in the
/// rotated frame.
pub fn twirl_about_magnetisation(rho: &DensityOperator) -> DensityOperator {
    twirl_analytic(&rho.align_magnetisation_to_z())
}

/// Reads the six spun-form parameters off a state that is already twirled.
/// Uses the signed z-magnetisation.
pub fn spun_parameters(rho: &DensityOperator) -> Result<SpunState> {
    let c = rho.to_coupled_basis();
    let p_s = c.0[S0][S0].re;
    let a = c.0[T0][T0].re;
    let up = c.0[1][1].re;
    let down = c.0[3][3].re;
    let coh = c.0[S0][T0];
    let limit = (a * p_s).max(0.0).sqrt();
    let eta = if limit > 0.0 {
        (coh.norm() / limit).min(1.0)
    } else {
        0.0
    };
    let phi = if coh.norm() > 0.0 {
        coh.arg().rem_euclid(TAU)
    } else {
        0.0
    };
    let s = SpunState {
        p_s: p_s.max(0.0),
        a: a.max(0.0),
        b: (up + down).max(0.0),
        m: up - down,
        eta,
        phi,
    };
    // renormalise rounding in the population sum
    let total = s.p_s + s.a + s.b;
    let s = SpunState {
        p_s: s.p_s / total,
        a: s.a / total,
        b: s.b / total,
        m: (s.m / total).clamp(-s.b / total, s.b / total),
        ..s
    };
    s.check()?;
    Ok(s)
}
