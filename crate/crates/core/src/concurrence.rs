//! Wootters concurrence of two-qubit states.
//!
//! The generic path never forms a non-Hermitian product: the eigenvalues of
//! `R = (√ρ ρ̃ √ρ)^{1/2}` are the square roots of the eigenvalues of the
//! Hermitian PSD matrix `√ρ ρ̃ √ρ`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::{self, ComplexMatrix4};
use crate::qstate::{pauli, DensityOperator};
use crate::sampling::SpunState;

/// `R` eigenvalues below this are treated as exactly zero.
pub const LAMBDA_ZERO: f64 = 1e-12;
/// Eigenvalues of `√ρ ρ̃ √ρ` at or below this are rounding noise. Its entries
/// are bounded by one for any state, so the noise floor is absolute.
pub const R_SQUARED_NOISE: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceResult {
    pub concurrence: f64,
    /// Descending.
    pub lambdas: [f64; 4],
}

impl ConcurrenceResult {
    pub fn from_lambdas(mut lambdas: [f64; 4]) -> Self {
        for l in lambdas.iter_mut() {
            if *l < LAMBDA_ZERO {
                *l = 0.0;
            }
        }
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let c = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0);
        Self {
            concurrence: c.min(1.0),
            lambdas,
        }
    }
}

fn sigma_y_sigma_y() -> ComplexMatrix4 {
    let y = pauli()[1];
    ComplexMatrix4::kron2(&y, &y)
}

/// `(σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn spin_flip(rho: &DensityOperator) -> DensityOperator {
    let yy = sigma_y_sigma_y();
    DensityOperator::from_trusted(yy * rho.matrix().conj() * yy)
}

/// Concurrence through the Hermitian matrix `√ρ ρ̃ √ρ`.
pub fn wootters_concurrence(rho: &DensityOperator) -> Result<ConcurrenceResult> {
    let sqrt_rho = linalg::matrix_sqrt_psd(rho.matrix())?;
    let flipped = spin_flip(rho);
    let m = (sqrt_rho * *flipped.matrix() * sqrt_rho).hermitian_part();
    let eig = linalg::psd_eigen(&m)?;
    let lambdas = eig.eigenvalues.map(|mu| {
        if mu <= R_SQUARED_NOISE {
            0.0
        } else {
            mu.sqrt()
        }
    });
    Ok(ConcurrenceResult::from_lambdas(lambdas))
}

/// Closed-form `R` spectrum of a spun state:
///
/// ```text
/// λ₁,₂ = (1/√2) [X ± √(X² − 4(c² − a p_s)²)]^{1/2},  X = a² + p_s² − 2c² cos 2φ
/// λ₃ = λ₄ = ½ √(b² − m²)
/// ```
///
/// The `+` branch is the larger of the pair. Concurrence uses the simplified difference
/// `λ₁ − λ₂ = √((p_s − a)² + 4c² sin²φ)`, which avoids cancellation.
pub fn spun_concurrence_closed_form(s: &SpunState) -> Result<ConcurrenceResult> {
    s.check()?;
    let (p, a, b, m, phi) = (s.p_s, s.a, s.b, s.m, s.phi);
    let c = s.coherence();
    let x = a * a + p * p - 2.0 * c * c * (2.0 * phi).cos();
    let disc = (x * x - 4.0 * (c * c - a * p).powi(2)).max(0.0).sqrt();
    let l1 = ((x + disc).max(0.0) / 2.0).sqrt();
    let l2 = ((x - disc).max(0.0) / 2.0).sqrt();
    let edge = (b - m.abs()).max(0.0) * (b + m.abs());
    let edge = if edge <= crate::bounds::EDGE_NOISE {
        0.0
    } else {
        edge.sqrt()
    };
    let l34 = 0.5 * edge;

    let mut lambdas = [l1, l2, l34, l34];
    for l in lambdas.iter_mut() {
        if *l < LAMBDA_ZERO {
            *l = 0.0;
        }
    }
    // λ₃ = λ₄ may exceed the pair; the reported spectrum is descending
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let gap = ((p - a).powi(2) + 4.0 * c * c * phi.sin().powi(2)).sqrt();
    let c_val = (gap - edge).clamp(0.0, 1.0);
    Ok(ConcurrenceResult {
        concurrence: c_val,
        lambdas,
    })
}
