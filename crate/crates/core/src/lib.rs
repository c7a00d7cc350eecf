//! Certifying entanglement between pairs of spin-½ particles from two
//! ensemble observables: the singlet fraction `p_s` and the magnetisation `m`.
//!
//! Any two-spin state with `p_s > (1 − m²)/2` is entangled, and its
//! concurrence is at least `max[p_s − √((1 − p_s)² − m²), 0]`. The crate
//! provides the two-qubit machinery to check this (Wootters concurrence, a
//! z-axis twirling channel, random state families) along with the bounds
//! themselves.

pub mod bounds;
pub mod concurrence;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod qstate;
pub mod sampling;
pub mod twirl;

pub use bounds::{
    contour_min_ps, min_concurrence_bound, singlet_bound, spun_entanglement_condition,
    supremum_check, witness, EtaReading, WitnessMode, WitnessVerdict,
};
pub use concurrence::{
    spin_flip, spun_concurrence_closed_form, wootters_concurrence, ConcurrenceResult,
};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix4, HermitianEigenResult, C64};
pub use qstate::{BlochVector, DensityOperator, Observables, ProductState, Site, StateFile};
pub use sampling::{saturating_state, Family, SamplerConfig, SeparableMixture, SpunState};
pub use twirl::{twirl_analytic, twirl_numeric};
