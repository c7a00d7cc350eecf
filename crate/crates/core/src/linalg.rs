//! Fixed-size complex 4×4 arithmetic for Hermitian two-qubit problems.
//!
//! Everything here works on [`ComplexMatrix4`], a row-major array of
//! `Complex64` entries. The only decomposition provided is a cyclic Jacobi
//! eigensolver for Hermitian input; matrix square roots and the concurrence
//! pipeline are built on top of it.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Hermiticity tolerance for `hermitian_eigen` input, `max |M - M†|`.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenvalues in `[-PSD_CLIP_TOL, 0)` are clipped to zero by PSD routines.
pub const PSD_CLIP_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm, relative to the matrix norm, at which a Jacobi
/// sweep loop stops. Stricter than an absolute 1e-13 for unit-trace states.
pub const JACOBI_REL_TOL: f64 = 1e-15;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Dense 4×4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub [[C64; 4]; 4]);

impl Default for ComplexMatrix4 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl ComplexMatrix4 {
    pub const fn zeros() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self::from_real_diagonal([1.0; 4])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real_diagonal(d: [f64; 4]) -> Self {
        Self::from_fn(|i, j| if i == j { C64::new(d[i], 0.0) } else { ZERO })
    }

    pub fn from_real(rows: [[f64; 4]; 4]) -> Self {
        Self::from_fn(|i, j| C64::new(rows[i][j], 0.0))
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[C64; 4], v: &[C64; 4]) -> Self {
        Self::from_fn(|i, j| u[i] * v[j].conj())
    }

    /// Kronecker product of two 2×2 matrices, first factor on the high bit.
    pub fn kron2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> Self {
        Self::from_fn(|i, j| a[i >> 1][j >> 1] * b[i & 1][j & 1])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    /// Elementwise complex conjugate (no transpose).
    pub fn conj(&self) -> Self {
        Self::from_fn(|i, j| self.0[i][j].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn diagonal_real(&self) -> [f64; 4] {
        [
            self.0[0][0].re,
            self.0[1][1].re,
            self.0[2][2].re,
            self.0[3][3].re,
        ]
    }

    pub fn mul_vec(&self, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|k| self.0[i][k] * v[k]).sum();
        }
        out
    }

    /// `max_ij |self_ij - other_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// `max |M - M†|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Symmetrised copy `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(0.5)
    }
}

impl Index<(usize, usize)> for ComplexMatrix4 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.0[i][j]
    }
}

impl Add for ComplexMatrix4 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl Sub for ComplexMatrix4 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl Mul for ComplexMatrix4 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum())
    }
}

impl Mul<&ComplexMatrix4> for &ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn mul(self, rhs: &ComplexMatrix4) -> ComplexMatrix4 {
        *self * *rhs
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianEigenResult {
    /// Ascending.
    pub eigenvalues: [f64; 4],
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix4,
}

impl HermitianEigenResult {
    pub fn eigenvector(&self, k: usize) -> [C64; 4] {
        [
            self.eigenvectors.0[0][k],
            self.eigenvectors.0[1][k],
            self.eigenvectors.0[2][k],
            self.eigenvectors.0[3][k],
        ]
    }

    /// `V f(Λ) V†` for a function applied to each eigenvalue.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix4 {
        let v = &self.eigenvectors;
        let d: [f64; 4] = std::array::from_fn(|k| f(self.eigenvalues[k]));
        ComplexMatrix4::from_fn(|i, j| (0..4).map(|k| v.0[i][k] * v.0[j][k].conj() * d[k]).sum())
    }

    pub fn reconstruct(&self) -> ComplexMatrix4 {
        self.reconstruct_with(|x| x)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += a.0[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian 4×4
/// matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eigen(m: &ComplexMatrix4) -> Result<HermitianEigenResult> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm_err = m.hermiticity_error();
    if herm_err > HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            deviation: herm_err,
        });
    }

    let mut a = m.hermitian_part();
    for i in 0..4 {
        a.0[i][i].im = 0.0;
    }
    let mut v = ComplexMatrix4::identity();
    let scale = a.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off == 0.0 || off <= JACOBI_REL_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a);
        if !(off == 0.0 || off <= JACOBI_REL_TOL * scale) {
            return Err(Error::NoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                off_diagonal: off,
            });
        }
    }

    let mut order = [0usize, 1, 2, 3];
    let diag = a.diagonal_real();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let eigenvalues = order.map(|k| diag[k]);
    let eigenvectors = ComplexMatrix4::from_fn(|i, j| v.0[i][order[j]]);
    Ok(HermitianEigenResult {
        eigenvalues,
        eigenvectors,
    })
}

/// Annihilate `a[p][q]` with a unitary acting on the (p, q) plane:
/// a phase on column q makes the pair real, then a real Givens rotation.
fn jacobi_rotate(a: &mut ComplexMatrix4, v: &mut ComplexMatrix4, p: usize, q: usize) {
    let h = a.0[p][q];
    let habs = h.norm();
    if habs == 0.0 {
        return;
    }
    let app = a.0[p][p].re;
    let aqq = a.0[q][q].re;
    // underflow guard: already negligible next to both diagonal entries
    if habs <= f64::EPSILON * 1e-3 * app.abs().min(aqq.abs()) {
        a.0[p][q] = ZERO;
        a.0[q][p] = ZERO;
        return;
    }
    let omega = h / habs;
    let theta = (aqq - app) / (2.0 * habs);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s], [-s ω̄, c ω̄]]
    let u_pp = C64::new(c, 0.0);
    let u_pq = C64::new(s, 0.0);
    let u_qp = -omega.conj() * s;
    let u_qq = omega.conj() * c;

    // A <- A U (columns)
    for k in 0..4 {
        let akp = a.0[k][p];
        let akq = a.0[k][q];
        a.0[k][p] = akp * u_pp + akq * u_qp;
        a.0[k][q] = akp * u_pq + akq * u_qq;
    }
    // A <- U† A (rows)
    for k in 0..4 {
        let apk = a.0[p][k];
        let aqk = a.0[q][k];
        a.0[p][k] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a.0[q][k] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a.0[p][q] = ZERO;
    a.0[q][p] = ZERO;
    a.0[p][p].im = 0.0;
    a.0[q][q].im = 0.0;

    for k in 0..4 {
        let vkp = v.0[k][p];
        let vkq = v.0[k][q];
        v.0[k][p] = vkp * u_pp + vkq * u_qp;
        v.0[k][q] = vkp * u_pq + vkq * u_qq;
    }
}

/// Eigen-decomposition of a PSD matrix with tiny negative eigenvalues clipped.
pub fn psd_eigen(m: &ComplexMatrix4) -> Result<HermitianEigenResult> {
    let mut eig = hermitian_eigen(m)?;
    if eig.eigenvalues[0] < -PSD_CLIP_TOL {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.eigenvalues[0],
        });
    }
    for l in eig.eigenvalues.iter_mut() {
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    Ok(eig)
}

/// Eigenvalues at or below `NUMERICAL_ZERO_REL * λ_max` are rounding noise of
/// an exactly singular matrix and are treated as zero before square roots.
pub const NUMERICAL_ZERO_REL: f64 = 8.0 * f64::EPSILON;

/// Principal square root of a Hermitian PSD matrix.
pub fn matrix_sqrt_psd(m: &ComplexMatrix4) -> Result<ComplexMatrix4> {
    let eig = psd_eigen(m)?;
    let floor = NUMERICAL_ZERO_REL * eig.eigenvalues[3];
    Ok(eig.reconstruct_with(|l| if l <= floor { 0.0 } else { l.sqrt() }))
}

/// `u† · a · u`.
pub fn conjugate_by(a: &ComplexMatrix4, u: &ComplexMatrix4) -> ComplexMatrix4 {
    u.adjoint() * *a * *u
}
