//! Closed-form bounds relating singlet fraction, magnetisation and
//! concurrence, and the witness built from them.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::Observables;
use crate::sampling::SpunState;

/// Slack allowed on `p_s ≤ 1 − |m|` before observables count as unphysical.
pub const PHYSICAL_TOL: f64 = 1e-9;
/// Certification requires `p_s` strictly above the singlet bound by more than this.
pub const CERTIFY_MARGIN: f64 = 1e-12;

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !x.is_finite() || !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

fn check_physical(p_s: f64, m: f64) -> Result<()> {
    if p_s > 1.0 - m + PHYSICAL_TOL {
        return Err(Error::Unphysical {
            p_s,
            limit: 1.0 - m,
        });
    }
    Ok(())
}

/// `(1 − p_s)² − m²` below this is rounding noise at the physical edge
/// `p_s = 1 − m`. Matches the noise floor of the generic concurrence path,
/// where the same quantity appears as `4λ₃²`.
pub const EDGE_NOISE: f64 = 4.0 * crate::concurrence::R_SQUARED_NOISE;

/// `√((1 − p_s)² − m²)`, factored as `(1 − p_s − m)(1 − p_s + m)`.
pub(crate) fn physical_gap(p_s: f64, m: f64) -> f64 {
    let sq = (1.0 - p_s - m).max(0.0) * (1.0 - p_s + m).max(0.0);
    if sq <= EDGE_NOISE {
        0.0
    } else {
        sq.sqrt()
    }
}

/// `(1 − m²)/2`: separable states never exceed this singlet fraction.
pub fn singlet_bound(m: f64) -> f64 {
    0.5 * (1.0 - m * m)
}

/// Least concurrence compatible with `(p_s, |m|)`:
/// `max[p_s − √((1 − p_s)² − m²), 0]`.
pub fn min_concurrence_bound(p_s: f64, m: f64) -> Result<f64> {
    check_unit("p_s", p_s)?;
    check_unit("m", m)?;
    check_physical(p_s, m)?;
    if p_s <= singlet_bound(m) {
        return Ok(0.0);
    }
    Ok((p_s - physical_gap(p_s, m)).clamp(0.0, 1.0))
}

/// Smallest singlet fraction at which every state with polarisation `m` has
/// concurrence at least `concurrence`: `(1 − C² − m²) / (2(1 − C))`, for
/// `m ≤ 1 − C`.
pub fn contour_min_ps(concurrence: f64, m: f64) -> Result<f64> {
    if !concurrence.is_finite() || !(0.0..1.0).contains(&concurrence) {
        return Err(Error::OutOfDomain(format!(
            "target concurrence {concurrence} outside [0, 1)"
        )));
    }
    if !m.is_finite() || m < 0.0 || m > 1.0 - concurrence + 1e-12 {
        return Err(Error::OutOfDomain(format!(
            "m = {m} outside [0, 1 − C] = [0, {}]",
            1.0 - concurrence
        )));
    }
    Ok((1.0 - concurrence * concurrence - m * m) / (2.0 * (1.0 - concurrence)))
}

/// Singlet fraction needed for a witness based on the generalised
/// observable of Mintert et al. to certify concurrence `C` at `m = 0`,
/// `(1 + √(1 + 3C²))/3`. Reference curve only.
pub fn mintert_reference_ps(concurrence: f64) -> f64 {
    (1.0 + (1.0 + 3.0 * concurrence * concurrence).sqrt()) / 3.0
}

/// How the coherence weight enters the spun-state threshold denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaReading {
    /// `1 − 2a + 2aη² sin²φ`, the form that follows from the concurrence.
    Squared,
    /// `1 − 2a + 2aη sin²φ`, as printed alongside the supremum.
    Linear,
}

fn threshold_parts(a: f64, m: f64, eta: f64, phi: f64, reading: EtaReading) -> (f64, f64) {
    let w = match reading {
        EtaReading::Squared => eta * eta,
        EtaReading::Linear => eta,
    };
    let numerator = 1.0 - 2.0 * a - m * m;
    let denominator = 1.0 - 2.0 * a + 2.0 * a * w * phi.sin().powi(2);
    (numerator, denominator)
}

/// Right-hand side `½(1 − 2a − m²)/(1 − 2a + 2aη² sin²φ)` when the
/// denominator is positive; `None` otherwise (the condition then no longer
/// takes the form "p_s above a threshold").
pub fn spun_singlet_threshold(s: &SpunState) -> Result<Option<f64>> {
    s.check()?;
    let (n, d) = threshold_parts(s.a, s.m, s.eta, s.phi, EtaReading::Squared);
    Ok((d > 0.0).then(|| 0.5 * n / d))
}

/// Whether a spun state is entangled, from `p_s` versus the threshold.
///
/// Evaluated multiplied through, `2 p_s D > N`, which is equivalent to the
/// threshold form for `D > 0` and remains exact when `D ≤ 0`.
pub fn spun_entanglement_condition(s: &SpunState) -> Result<bool> {
    s.check()?;
    let (n, d) = threshold_parts(s.a, s.m, s.eta, s.phi, EtaReading::Squared);
    Ok(2.0 * s.p_s * d > n)
}

/// Brute-force maximum of the spun threshold over `(a, η, φ)` at
/// polarisation `m`, squared-η reading.
pub fn supremum_check(m: f64, grid_resolution: usize) -> f64 {
    supremum_check_with(m, grid_resolution, EtaReading::Squared)
}

/// Grid maximum of `½(1 − 2a − m²)/D(a, η, φ)` over
/// `a ∈ [0, min(1 − m, ½))`, `η ∈ [0, 1]`, `φ ∈ [0, 2π)`. Points with a
/// non-positive denominator are skipped.
pub fn supremum_check_with(m: f64, grid_resolution: usize, reading: EtaReading) -> f64 {
    let res = grid_resolution.max(2);
    let a_max = (1.0 - m).min(0.5);
    (0..res)
        .into_par_iter()
        .map(|i| {
            let a = a_max * i as f64 / res as f64;
            let mut best = f64::NEG_INFINITY;
            for j in 0..res {
                let eta = j as f64 / (res - 1) as f64;
                for k in 0..res {
                    let phi = TAU * k as f64 / res as f64;
                    let (n, d) = threshold_parts(a, m, eta, phi, reading);
                    if d > 1e-12 {
                        best = best.max(0.5 * n / d);
                    }
                }
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessMode {
    /// Uses `|m|` of the full vector; the bound is tight.
    FullVector,
    /// Uses `|m_z|` only; sufficient but not tight.
    ZOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    pub min_concurrence: f64,
    pub entangled_certified: bool,
    pub singlet_bound_value: f64,
    pub physical: bool,
    pub mode: WitnessMode,
    pub tight: bool,
    pub singlet_fraction: f64,
    pub magnetisation_used: f64,
}

impl WitnessVerdict {
    /// Verdict reported for observables violating `p_s ≤ 1 − |m|`.
    pub fn unphysical(obs: &Observables, mode: WitnessMode) -> Self {
        let m_used = match mode {
            WitnessMode::FullVector => obs.m_abs(),
            WitnessMode::ZOnly => obs.m_z_abs(),
        };
        Self {
            min_concurrence: 0.0,
            entangled_certified: false,
            singlet_bound_value: singlet_bound(m_used.min(1.0)),
            physical: false,
            mode,
            tight: mode == WitnessMode::FullVector,
            singlet_fraction: obs.singlet_fraction,
            magnetisation_used: m_used,
        }
    }
}

/// Certifies entanglement when `p_s > (1 − m²)/2`, reporting the least
/// concurrence consistent with the observables.
pub fn witness(obs: &Observables, mode: WitnessMode) -> Result<WitnessVerdict> {
    let p_s = obs.singlet_fraction;
    let m_abs = obs.m_abs();
    check_unit("p_s", p_s)?;
    if !m_abs.is_finite() || m_abs > 1.0 + PHYSICAL_TOL {
        return Err(Error::OutOfDomain(format!("|m| = {m_abs} exceeds 1")));
    }
    check_physical(p_s, m_abs)?;
    let m_used = match mode {
        WitnessMode::FullVector => m_abs,
        WitnessMode::ZOnly => obs.m_z_abs(),
    }
    .min(1.0);
    let bound = singlet_bound(m_used);
    let certified = p_s > bound + CERTIFY_MARGIN;
    let min_c = if certified {
        // z-only: |m_z| ≤ |m| keeps the physical precondition
        min_concurrence_bound(p_s, m_used)?
    } else {
        0.0
    };
    Ok(WitnessVerdict {
        min_concurrence: min_c,
        entangled_certified: certified && min_c > 0.0,
        singlet_bound_value: bound,
        physical: true,
        mode,
        tight: mode == WitnessMode::FullVector,
        singlet_fraction: p_s,
        magnetisation_used: m_used,
    })
}
