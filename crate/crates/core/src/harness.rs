//! Batch experiments behind the command-line tool: scatter records for the
//! `(|m|, p_s)` plane, iso-concurrence contour extraction and the
//! self-verification suite.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, EtaReading, CERTIFY_MARGIN};
use crate::concurrence::{spun_concurrence_closed_form, wootters_concurrence};
use crate::error::{Error, Result};
use crate::qstate::DensityOperator;
use crate::sampling::{self, Family};
use crate::twirl;

pub const SAMPLE_CSV_HEADER: [&str; 7] = [
    "index",
    "family",
    "m_abs",
    "p_s",
    "concurrence",
    "certified",
    "bound_value",
];
pub const CONTOUR_CSV_HEADER: [&str; 4] = [
    "target_c",
    "m_bin_center",
    "min_ps_empirical",
    "min_ps_analytic",
];
pub const MINTERT_COLUMN: &str = "mintert_ps";
pub const DEFAULT_BIN_WIDTH: f64 = 0.02;
/// Bins with fewer sampled states than this are flagged.
pub const MIN_BIN_POPULATION: usize = 50;

/// One point of the scatter in the `(|m|, p_s)` plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    pub family: Family,
    pub m_abs: f64,
    pub p_s: f64,
    pub concurrence: f64,
    pub certified: bool,
    pub bound_value: f64,
}

impl SampleRecord {
    pub fn from_state(index: u64, family: Family, rho: &DensityOperator) -> Result<Self> {
        let obs = rho.observables();
        let m_abs = obs.m_abs();
        let bound_value = bounds::singlet_bound(m_abs.min(1.0));
        let concurrence = wootters_concurrence(rho)?.concurrence;
        Ok(Self {
            index,
            family,
            m_abs,
            p_s: obs.singlet_fraction,
            concurrence,
            certified: obs.singlet_fraction > bound_value + CERTIFY_MARGIN,
            bound_value,
        })
    }
}

/// Samples `count` states of a family and evaluates them, ordered by index.
pub fn generate_records(family: Family, seed: u64, count: usize) -> Result<Vec<SampleRecord>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| SampleRecord::from_state(i, family, &sampling::state_at(family, seed, i)))
        .collect()
}

pub fn write_sample_csv<W: Write>(out: W, records: &[SampleRecord]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLE_CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.index.to_string(),
            r.family.to_string(),
            r.m_abs.to_string(),
            r.p_s.to_string(),
            r.concurrence.to_string(),
            r.certified.to_string(),
            r.bound_value.to_string(),
        ])?;
    }
    w.flush()
}

/// Threshold line for one target concurrence in one `|m|` bin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourRecord {
    pub target_concurrence: f64,
    pub m: f64,
    /// Largest sampled `p_s` in the bin whose concurrence is still below the
    /// target: every sampled state above it reaches the target. `None` when
    /// no sampled state in the bin falls short.
    pub min_ps_empirical: Option<f64>,
    pub min_ps_analytic: f64,
    /// States in the bin.
    pub population: usize,
}

impl ContourRecord {
    pub fn deviation(&self) -> Option<f64> {
        self.min_ps_empirical
            .map(|e| (e - self.min_ps_analytic).abs())
    }

    pub fn well_populated(&self) -> bool {
        self.population >= MIN_BIN_POPULATION
    }
}

/// Per-bin empirical threshold next to `contour_min_ps` at the bin centre.
/// Bins whose centre lies beyond `1 − C` are omitted.
pub fn extract_contours(
    records: &[SampleRecord],
    targets: &[f64],
    bin_width: f64,
) -> Result<Vec<ContourRecord>> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(Error::OutOfDomain(format!(
            "bin width {bin_width} outside (0, 1]"
        )));
    }
    let n_bins = ((1.0 / bin_width).round() as usize).max(1);
    let mut out = Vec::new();
    for &target in targets {
        bounds::contour_min_ps(target, 0.0)?;
        let mut shortfall = vec![None::<f64>; n_bins];
        let mut population = vec![0usize; n_bins];
        for r in records {
            let k = ((r.m_abs * n_bins as f64).floor() as usize).min(n_bins - 1);
            population[k] += 1;
            let below = if target == 0.0 {
                r.concurrence <= 0.0
            } else {
                r.concurrence < target
            };
            if below {
                shortfall[k] = Some(shortfall[k].map_or(r.p_s, |v: f64| v.max(r.p_s)));
            }
        }
        for k in 0..n_bins {
            // (2k+1)/(2n) is correctly rounded, so centres print as short decimals
            let center = (2 * k + 1) as f64 / (2 * n_bins) as f64;
            if center > 1.0 - target {
                break;
            }
            out.push(ContourRecord {
                target_concurrence: target,
                m: center,
                min_ps_empirical: shortfall[k],
                min_ps_analytic: bounds::contour_min_ps(target, center)?,
                population: population[k],
            });
        }
    }
    Ok(out)
}

pub fn write_contour_csv<W: Write>(
    out: W,
    records: &[ContourRecord],
    with_mintert: bool,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CONTOUR_CSV_HEADER.to_vec();
    if with_mintert {
        header.push(MINTERT_COLUMN);
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.target_concurrence.to_string(),
            r.m.to_string(),
            r.min_ps_empirical
                .map(|v| v.to_string())
                .unwrap_or_default(),
            r.min_ps_analytic.to_string(),
        ];
        if with_mintert {
            row.push(bounds::mintert_reference_ps(r.target_concurrence).to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Largest violation of the checked inequality (0 when none).
    pub worst_violation: f64,
    pub evaluated: usize,
    pub detail: String,
}

impl CheckOutcome {
    fn from_worst(name: &'static str, worst: f64, evaluated: usize, detail: String) -> Self {
        Self {
            name,
            passed: worst <= 0.0,
            worst_violation: worst.max(0.0),
            evaluated,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// Negative control: lowers the singlet bound used by the separable
    /// check so that it must fail.
    pub inject_fault: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 20_000,
            seed: 2016,
            inject_fault: false,
        }
    }
}

fn par_max<F>(n: usize, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync + Send,
{
    (0..n as u64)
        .into_par_iter()
        .map(f)
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

fn conc(rho: &DensityOperator) -> f64 {
    wootters_concurrence(rho)
        .map(|r| r.concurrence)
        .unwrap_or(f64::NAN)
}

/// Runs every invariant check and returns one outcome per check.
pub fn run_verification(opts: &VerifyOptions) -> Vec<CheckOutcome> {
    let n = opts.samples.max(1);
    let seed = opts.seed;
    let fault = if opts.inject_fault { 0.05 } else { 0.0 };
    let mut out = Vec::new();

    // violation > 0 means the check failed for that sample; NaN counts as failure
    let nan_is_fail = |v: f64| if v.is_nan() { f64::INFINITY } else { v };

    let worst = par_max(n, |i| {
        let rho = sampling::state_at(Family::Separable, seed, i);
        let obs = rho.observables();
        let bound = bounds::singlet_bound(obs.m_abs()) - fault;
        let excess = obs.singlet_fraction - bound - 1e-9;
        let certified = obs.singlet_fraction > bound + CERTIFY_MARGIN;
        let c = conc(&rho);
        // a certification always counts, even when it sits inside the tolerance band
        let cert_violation = if certified {
            (obs.singlet_fraction - bound).max(CERTIFY_MARGIN)
        } else {
            0.0
        };
        nan_is_fail(excess.max(cert_violation).max(c - 1e-9))
    });
    out.push(CheckOutcome::from_worst(
        "separable_bound",
        worst,
        n,
        "separable mixtures: p_s ≤ (1−m²)/2, never certified, concurrence 0".into(),
    ));

    let worst = par_max(2 * n, |i| {
        let family = if i % 2 == 0 {
            Family::Spun
        } else {
            Family::Ginibre
        };
        let rho = sampling::state_at(family, seed, i / 2);
        let obs = rho.observables();
        let bound = bounds::min_concurrence_bound(
            obs.singlet_fraction.clamp(0.0, 1.0),
            obs.m_abs().min(1.0),
        )
        .unwrap_or(f64::NAN);
        nan_is_fail(bound - conc(&rho) - 1e-9)
    });
    out.push(CheckOutcome::from_worst(
        "bound_validity",
        worst,
        2 * n,
        "spun and Ginibre states: C ≥ max[p_s − √((1−p_s)² − m²), 0]".into(),
    ));

    let worst = par_max(n, |i| {
        let rho = sampling::state_at(Family::Ginibre, seed ^ 0x5eed, i);
        let t = twirl::twirl_analytic(&rho);
        let quad = twirl::twirl_numeric(&rho, twirl::DEFAULT_TWIRL_POINTS).expect("16 points");
        let drift = t.matrix().max_abs_diff(quad.matrix()) - 1e-10;
        nan_is_fail((conc(&t) - conc(&rho) - 1e-9).max(drift))
    });
    out.push(CheckOutcome::from_worst(
        "twirl_monotonicity",
        worst,
        n,
        "C(twirl ρ) ≤ C(ρ); analytic twirl equals 16-point quadrature".into(),
    ));

    let worst = par_max(n, |i| {
        let s = sampling::spun_at(seed, i);
        let closed = spun_concurrence_closed_form(&s)
            .map(|r| r.concurrence)
            .unwrap_or(f64::NAN);
        let generic = conc(&s.to_density().expect("valid spun sample"));
        let sign_ok = bounds::spun_entanglement_condition(&s).unwrap_or(false) == (closed > 0.0);
        let boundary = closed.abs() < 1e-10;
        let sign_violation = if sign_ok || boundary { 0.0 } else { 1.0 };
        nan_is_fail(((closed - generic).abs() - 1e-8).max(sign_violation))
    });
    out.push(CheckOutcome::from_worst(
        "closed_form_agreement",
        worst,
        n,
        "spun states: closed-form λ spectrum matches √ρ ρ̃ √ρ; threshold sign matches".into(),
    ));

    let grid = 50;
    let worst = par_max(grid * grid, |k| {
        let (i, j) = ((k as usize) / grid, (k as usize) % grid);
        let m = i as f64 / (grid - 1) as f64;
        let p = (1.0 - m) * j as f64 / (grid - 1) as f64;
        let rho = sampling::saturating_state(p, m).expect("feasible grid point");
        let bound = bounds::min_concurrence_bound(p, m).expect("feasible grid point");
        nan_is_fail((conc(&rho) - bound).abs() - 1e-8)
    });
    out.push(CheckOutcome::from_worst(
        "saturation",
        worst,
        grid * grid,
        "saturating family attains the minimum-concurrence bound on a 50×50 grid".into(),
    ));

    let ms = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
    let mut worst = f64::NEG_INFINITY;
    for m in ms {
        for reading in [EtaReading::Squared, EtaReading::Linear] {
            let s = bounds::supremum_check_with(m, 200, reading);
            worst = worst.max((s - bounds::singlet_bound(m)).abs() - 1e-4);
        }
    }
    out.push(CheckOutcome::from_worst(
        "supremum",
        nan_is_fail(worst),
        2 * ms.len(),
        "grid supremum of the spun threshold equals (1−m²)/2".into(),
    ));

    out
}
