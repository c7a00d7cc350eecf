use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian: max |M - M†| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("trace is not 1: |Tr ρ - 1| = {deviation:e}")]
    NotUnitTrace { deviation: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("Bloch vector norm {norm} exceeds 1")]
    BlochNormExceeded { norm: f64 },
    #[error("invalid spun state: {0}")]
    InvalidSpunState(String),
    #[error("unphysical observables: p_s = {p_s} exceeds 1 - |m| = {limit} (populations cannot sum past 1)")]
    Unphysical { p_s: f64, limit: f64 },
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("invalid state file: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
