//! Two-qubit density operators and the two ensemble observables.
//!
//! Storage is always the computational basis ordered
//! `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` (index `2·a + b`, `↑ = 0`). The coupled
//! singlet/triplet basis is ordered `|s₀⟩, |t₁⟩, |t₀⟩, |t₋₁⟩` with
//!
//! ```text
//! |s₀⟩  = (|↑↓⟩ − |↓↑⟩)/√2     |t₁⟩  = |↑↑⟩
//! |t₀⟩  = (|↑↓⟩ + |↓↑⟩)/√2     |t₋₁⟩ = |↓↓⟩
//! ```
//!
//! so the change-of-basis matrix `B` (columns are coupled vectors written in
//! computational coordinates) is
//!
//! ```text
//!        s₀     t₁   t₀    t₋₁
//! ↑↑ [   0      1    0     0  ]
//! ↑↓ [  1/√2    0   1/√2   0  ]
//! ↓↑ [ -1/√2    0   1/√2   0  ]
//! ↓↓ [   0      0    0     1  ]
//! ```
//!
//! and `ρ_coupled = B† ρ B`.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, conjugate_by, ComplexMatrix4, C64, ONE, ZERO};

pub const TRACE_TOL: f64 = 1e-9;
pub const STATE_HERMITIAN_TOL: f64 = 1e-9;
pub const STATE_PSD_TOL: f64 = 1e-9;
pub const BLOCH_NORM_TOL: f64 = 1e-9;

/// Coupled-basis indices.
pub const S0: usize = 0;
pub const T1: usize = 1;
pub const T0: usize = 2;
pub const TM1: usize = 3;

pub fn coupled_basis_matrix() -> ComplexMatrix4 {
    let h = FRAC_1_SQRT_2;
    ComplexMatrix4::from_real([
        [0.0, 1.0, 0.0, 0.0],
        [h, 0.0, h, 0.0],
        [-h, 0.0, h, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// `|s₀⟩` in computational coordinates.
pub fn singlet_vector() -> [C64; 4] {
    let h = FRAC_1_SQRT_2;
    [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO]
}

pub(crate) fn pauli() -> [[[C64; 2]; 2]; 3] {
    let i = C64::new(0.0, 1.0);
    [
        [[ZERO, ONE], [ONE, ZERO]],
        [[ZERO, -i], [i, ZERO]],
        [[ONE, ZERO], [ZERO, -ONE]],
    ]
}

pub(crate) fn identity2() -> [[C64; 2]; 2] {
    [[ONE, ZERO], [ZERO, ONE]]
}

/// A validated two-qubit density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix4,
}

/// Which of the two spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    A,
    B,
}

impl DensityOperator {
    /// Checks Hermiticity, unit trace and positivity, then stores the
    /// Hermitian part.
    pub fn validate(matrix: ComplexMatrix4) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = matrix.hermiticity_error();
        if herm > STATE_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = matrix.trace();
        let dev = (tr - ONE).norm();
        if dev > TRACE_TOL {
            return Err(Error::NotUnitTrace { deviation: dev });
        }
        let eig = linalg::hermitian_eigen(&matrix)?;
        if eig.eigenvalues[0] < -STATE_PSD_TOL {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.eigenvalues[0],
            });
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Wraps a matrix already known to be a state (output of a channel
    /// applied to a valid state). Only Hermiticity is re-imposed.
    pub(crate) fn from_trusted(matrix: ComplexMatrix4) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    pub fn from_coupled(matrix: ComplexMatrix4) -> Result<Self> {
        Self::validate(conjugate_by(&matrix, &coupled_basis_matrix().adjoint()))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) amplitude vector.
    pub fn pure(amplitudes: [C64; 4]) -> Result<Self> {
        let n2: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::OutOfDomain(
                "zero or non-finite amplitude vector".into(),
            ));
        }
        let n = n2.sqrt();
        let psi = amplitudes.map(|z| z / n);
        Ok(Self::from_trusted(ComplexMatrix4::outer(&psi, &psi)))
    }

    pub fn singlet() -> Self {
        let s = singlet_vector();
        Self::from_trusted(ComplexMatrix4::outer(&s, &s))
    }

    pub fn maximally_mixed() -> Self {
        Self::from_trusted(ComplexMatrix4::identity().scale(0.25))
    }

    /// `F·|s₀⟩⟨s₀| + (1 − F)(I − |s₀⟩⟨s₀|)/3`.
    pub fn werner(singlet_weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&singlet_weight) {
            return Err(Error::OutOfDomain(format!(
                "Werner singlet weight {singlet_weight} outside [0, 1]"
            )));
        }
        let p = Self::singlet().matrix;
        let rest = (ComplexMatrix4::identity() - p).scale((1.0 - singlet_weight) / 3.0);
        Ok(Self::from_trusted(p.scale(singlet_weight) + rest))
    }

    /// Convex combination of states; weights are renormalised.
    pub fn mixture<'a>(
        parts: impl IntoIterator<Item = (f64, &'a DensityOperator)>,
    ) -> Result<Self> {
        let mut acc = ComplexMatrix4::zeros();
        let mut total = 0.0;
        for (w, rho) in parts {
            if w < 0.0 {
                return Err(Error::OutOfDomain(format!("negative mixture weight {w}")));
            }
            acc = acc + rho.matrix.scale(w);
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::OutOfDomain("mixture weights sum to zero".into()));
        }
        Ok(Self::from_trusted(acc.scale(1.0 / total)))
    }

    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.matrix
    }

    pub fn to_coupled_basis(&self) -> ComplexMatrix4 {
        conjugate_by(&self.matrix, &coupled_basis_matrix())
    }

    /// `⟨s₀|ρ|s₀⟩`.
    pub fn singlet_fraction(&self) -> f64 {
        let s = singlet_vector();
        let rs = self.matrix.mul_vec(&s);
        s.iter()
            .zip(rs.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .re
    }

    /// `Tr[Ŝ ρ]` with `Ŝ = (σ^A + σ^B)/2`.
    pub fn magnetisation(&self) -> [f64; 3] {
        let id = identity2();
        let paulis = pauli();
        std::array::from_fn(|k| {
            let total =
                ComplexMatrix4::kron2(&paulis[k], &id) + ComplexMatrix4::kron2(&id, &paulis[k]);
            0.5 * (total * self.matrix).trace().re
        })
    }

    /// Bloch vector of the reduced state on one site.
    pub fn reduced_bloch(&self, which: Site) -> BlochVector {
        let r = self.reduced(which);
        BlochVector {
            x: 2.0 * r[0][1].re,
            y: -2.0 * r[0][1].im,
            z: (r[0][0] - r[1][1]).re,
        }
    }

    /// Partial trace onto one site.
    pub fn reduced(&self, which: Site) -> [[C64; 2]; 2] {
        let mut r = [[ZERO; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..2)
                    .map(|k| match which {
                        Site::A => self.matrix.0[2 * i + k][2 * j + k],
                        Site::B => self.matrix.0[2 * k + i][2 * k + j],
                    })
                    .sum();
            }
        }
        r
    }

    pub fn observables(&self) -> Observables {
        Observables {
            singlet_fraction: self.singlet_fraction(),
            magnetisation: self.magnetisation(),
        }
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
    pub fn apply_local(&self, ua: &[[C64; 2]; 2], ub: &[[C64; 2]; 2]) -> Self {
        let u = ComplexMatrix4::kron2(ua, ub);
        Self::from_trusted(conjugate_by(&self.matrix, &u.adjoint()))
    }

    /// Applies the same spin rotation to both sites so that the magnetisation
    /// points along `+z`. States with `m = 0` are returned unchanged.
    pub fn align_magnetisation_to_z(&self) -> Self {
        let u = rotation_to_z(self.magnetisation());
        self.apply_local(&u, &u)
    }
}

/// SU(2) element `U` with `U (n·σ) U† = ẑ·σ` for the unit vector along `m`.
pub fn rotation_to_z(m: [f64; 3]) -> [[C64; 2]; 2] {
    let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    if norm < 1e-300 {
        return identity2();
    }
    let n = m.map(|x| x / norm);
    // axis n × ẑ = (n_y, -n_x, 0)
    let (kx, ky) = (n[1], -n[0]);
    let s = (kx * kx + ky * ky).sqrt();
    let (kx, ky, theta) = if s < 1e-15 {
        if n[2] > 0.0 {
            return identity2();
        }
        (1.0, 0.0, std::f64::consts::PI)
    } else {
        (kx / s, ky / s, n[2].clamp(-1.0, 1.0).acos())
    };
    let (c, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    // cos(θ/2) I − i sin(θ/2) (k·σ), k_z = 0
    let i = C64::new(0.0, 1.0);
    let off01 = -i * sn * C64::new(kx, -ky);
    let off10 = -i * sn * C64::new(kx, ky);
    [[C64::new(c, 0.0), off01], [off10, C64::new(c, 0.0)]]
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// `½(I + v·σ)`.
    pub fn density(&self) -> [[C64; 2]; 2] {
        [
            [
                C64::new(0.5 * (1.0 + self.z), 0.0),
                C64::new(0.5 * self.x, -0.5 * self.y),
            ],
            [
                C64::new(0.5 * self.x, 0.5 * self.y),
                C64::new(0.5 * (1.0 - self.z), 0.0),
            ],
        ]
    }

    fn check(&self) -> Result<()> {
        let n = self.norm();
        if !n.is_finite() || n > 1.0 + BLOCH_NORM_TOL {
            return Err(Error::BlochNormExceeded { norm: n });
        }
        Ok(())
    }
}

/// Uncorrelated pair `ρ^A ⊗ ρ^B` described by two Bloch vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductState {
    pub bloch_a: BlochVector,
    pub bloch_b: BlochVector,
}

impl ProductState {
    pub fn new(bloch_a: BlochVector, bloch_b: BlochVector) -> Result<Self> {
        bloch_a.check()?;
        bloch_b.check()?;
        Ok(Self { bloch_a, bloch_b })
    }

    /// Spin A along `+z` with length `v_a`, spin B of length `v_b` at angle
    /// `beta` from it in the x–z plane.
    pub fn from_lengths_and_angle(v_a: f64, v_b: f64, beta: f64) -> Result<Self> {
        Self::new(
            BlochVector::new(0.0, 0.0, v_a),
            BlochVector::new(v_b * beta.sin(), 0.0, v_b * beta.cos()),
        )
    }

    /// Angle between the Bloch vectors; zero if either vanishes.
    pub fn beta(&self) -> f64 {
        let (na, nb) = (self.bloch_a.norm(), self.bloch_b.norm());
        if na == 0.0 || nb == 0.0 {
            return 0.0;
        }
        (self.bloch_a.dot(&self.bloch_b) / (na * nb))
            .clamp(-1.0, 1.0)
            .acos()
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_trusted(ComplexMatrix4::kron2(
            &self.bloch_a.density(),
            &self.bloch_b.density(),
        ))
    }

    /// `¼(1 − v_A v_B cos β)`.
    pub fn separable_singlet_fraction(&self) -> f64 {
        0.25 * (1.0 - self.bloch_a.dot(&self.bloch_b))
    }
}

/// Re-checks the Bloch norms (fields are public) and builds `ρ^A ⊗ ρ^B`.
pub fn product_state_density(p: &ProductState) -> Result<DensityOperator> {
    p.bloch_a.check()?;
    p.bloch_b.check()?;
    Ok(p.density())
}

/// The measured pair: singlet fraction and magnetisation vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub singlet_fraction: f64,
    pub magnetisation: [f64; 3],
}

impl Observables {
    pub fn new(singlet_fraction: f64, magnetisation: [f64; 3]) -> Self {
        Self {
            singlet_fraction,
            magnetisation,
        }
    }

    pub fn m_abs(&self) -> f64 {
        self.magnetisation.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn m_z_abs(&self) -> f64 {
        self.magnetisation[2].abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Computational,
    Coupled,
}

/// On-disk state: `{"basis": ..., "matrix": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub basis: Basis,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_matrix(basis: Basis, m: &ComplexMatrix4) -> Self {
        Self {
            basis,
            matrix: m
                .0
                .iter()
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }

    pub fn from_state(rho: &DensityOperator, basis: Basis) -> Self {
        match basis {
            Basis::Computational => Self::from_matrix(basis, rho.matrix()),
            Basis::Coupled => Self::from_matrix(basis, &rho.to_coupled_basis()),
        }
    }

    pub fn to_state(&self) -> Result<DensityOperator> {
        if self.matrix.len() != 4 || self.matrix.iter().any(|r| r.len() != 4) {
            return Err(Error::Format("matrix must be 4×4".into()));
        }
        let m = ComplexMatrix4::from_fn(|i, j| {
            let [re, im] = self.matrix[i][j];
            C64::new(re, im)
        });
        match self.basis {
            Basis::Computational => DensityOperator::validate(m),
            Basis::Coupled => DensityOperator::from_coupled(m),
        }
    }

    pub fn parse(text: &str) -> Result<DensityOperator> {
        let file: StateFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.to_state()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis_state(k: usize) -> DensityOperator {
        let mut amps = [ZERO; 4];
        amps[k] = ONE;
        DensityOperator::pure(amps).unwrap()
    }

    fn close(a: &ComplexMatrix4, b: &ComplexMatrix4, tol: f64) -> bool {
        a.max_abs_diff(b) < tol
    }

    #[test]
    fn coupled_basis_examples() {
        let c = DensityOperator::singlet().to_coupled_basis();
        assert!(close(
            &c,
            &ComplexMatrix4::from_real_diagonal([1.0, 0.0, 0.0, 0.0]),
            1e-15
        ));

        let c = basis_state(0).to_coupled_basis();
        assert!(close(
            &c,
            &ComplexMatrix4::from_real_diagonal([0.0, 1.0, 0.0, 0.0]),
            1e-15
        ));

        // |↑↓⟩ = (|t₀⟩ + |s₀⟩)/√2
        let c = basis_state(1).to_coupled_basis();
        let mut expect = ComplexMatrix4::zeros();
        for (i, j) in [(S0, S0), (T0, T0), (S0, T0), (T0, S0)] {
            expect.0[i][j] = C64::new(0.5, 0.0);
        }
        assert!(close(&c, &expect, 1e-15));
    }

    #[test]
    fn singlet_fraction_examples() {
        assert!((DensityOperator::singlet().singlet_fraction() - 1.0).abs() < 1e-15);
        assert!((basis_state(1).singlet_fraction() - 0.5).abs() < 1e-15);
        // identical product states, |v| = 0.5 → (1 − 0.25)/4
        let p = ProductState::from_lengths_and_angle(0.5, 0.5, 0.0).unwrap();
        assert!((p.density().singlet_fraction() - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn magnetisation_examples() {
        let m = DensityOperator::singlet().magnetisation();
        assert!(m.iter().all(|x| x.abs() < 1e-15));
        assert_eq!(basis_state(0).magnetisation(), [0.0, 0.0, 1.0]);
        let p = ProductState::new(
            BlochVector::new(0.0, 0.0, 1.0),
            BlochVector::new(0.0, 0.0, -1.0),
        )
        .unwrap();
        let m = p.density().magnetisation();
        assert!(m.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn reduced_bloch_examples() {
        let ud = basis_state(1);
        assert_eq!(ud.reduced_bloch(Site::A), BlochVector::new(0.0, 0.0, 1.0));
        assert_eq!(ud.reduced_bloch(Site::B), BlochVector::new(0.0, 0.0, -1.0));
        let s = DensityOperator::singlet();
        for site in [Site::A, Site::B] {
            assert!(s.reduced_bloch(site).norm() < 1e-15);
        }
        let va = BlochVector::new(0.3, -0.2, 0.5);
        let vb = BlochVector::new(-0.1, 0.7, 0.2);
        let rho = ProductState::new(va, vb).unwrap().density();
        let ra = rho.reduced_bloch(Site::A);
        let rb = rho.reduced_bloch(Site::B);
        for (got, want) in [(ra, va), (rb, vb)] {
            for k in 0..3 {
                assert!((got.to_array()[k] - want.to_array()[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_density_examples() {
        let z = BlochVector::new(0.0, 0.0, 1.0);
        let mz = BlochVector::new(0.0, 0.0, -1.0);
        let p = ProductState::new(z, z).unwrap();
        assert_eq!(p.density(), basis_state(0));
        let p = ProductState::new(z, mz).unwrap();
        assert_eq!(p.density(), basis_state(1));
        let p = ProductState::new(BlochVector::default(), BlochVector::default()).unwrap();
        assert_eq!(p.density(), DensityOperator::maximally_mixed());

        let bad = BlochVector::new(1.0, 1.0, 0.0);
        assert!(matches!(
            ProductState::new(bad, z),
            Err(Error::BlochNormExceeded { .. })
        ));
        let raw = ProductState {
            bloch_a: bad,
            bloch_b: z,
        };
        assert!(product_state_density(&raw).is_err());
    }

    #[test]
    fn separable_singlet_fraction_examples() {
        let pi = std::f64::consts::PI;
        let f = |va, vb, beta| {
            ProductState::from_lengths_and_angle(va, vb, beta)
                .unwrap()
                .separable_singlet_fraction()
        };
        assert!((f(1.0, 1.0, pi) - 0.5).abs() < 1e-15);
        assert!(f(1.0, 1.0, 0.0).abs() < 1e-15);
        assert!((f(0.5, 0.5, 0.0) - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn validate_examples() {
        assert!(DensityOperator::validate(ComplexMatrix4::identity().scale(0.25)).is_ok());
        let m = ComplexMatrix4::from_real_diagonal([0.5, 0.5, 0.5, -0.5]);
        assert!(matches!(
            DensityOperator::validate(m),
            Err(Error::NotPsd { .. })
        ));
        let m = ComplexMatrix4::from_real_diagonal([0.6, 0.6, 0.0, 0.0]);
        match DensityOperator::validate(m) {
            Err(Error::NotUnitTrace { deviation }) => assert!((deviation - 0.2).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let mut m = ComplexMatrix4::identity().scale(0.25);
        m.0[0][3] = C64::new(0.0, 0.1);
        assert!(matches!(
            DensityOperator::validate(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn aligned_state_has_z_magnetisation() {
        for v in [
            [0.3, 0.4, 0.1],
            [0.0, 0.0, -0.6],
            [-0.2, 0.0, 0.0],
            [0.0, 0.0, 0.5],
        ] {
            let b = BlochVector::new(v[0], v[1], v[2]);
            let rho = ProductState::new(b, BlochVector::new(0.1, 0.0, 0.0))
                .unwrap()
                .density();
            let m = rho.magnetisation();
            let norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
            let aligned = rho.align_magnetisation_to_z().magnetisation();
            assert!(
                aligned[0].abs() < 1e-12 && aligned[1].abs() < 1e-12,
                "{aligned:?}"
            );
            assert!((aligned[2] - norm).abs() < 1e-12);
            assert!(
                (rho.align_magnetisation_to_z().singlet_fraction() - rho.singlet_fraction()).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn state_file_round_trip() {
        let rho = DensityOperator::werner(0.75).unwrap();
        for basis in [Basis::Computational, Basis::Coupled] {
            let text = StateFile::from_state(&rho, basis).to_json();
            let back = StateFile::parse(&text).unwrap();
            assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        }
        assert!(matches!(
            StateFile::parse("{\"basis\":\"computational\",\"matrix\":[]}"),
            Err(Error::Format(_))
        ));
        assert!(matches!(StateFile::parse("nope"), Err(Error::Format(_))));
    }
}
