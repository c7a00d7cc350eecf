//! Random state families.
//!
//! Every sample is drawn from its own ChaCha8 stream keyed by
//! `(seed, sample index)`, so a batch is the same whatever the worker count
//! or completion order.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix4, C64};
use crate::qstate::{
    coupled_basis_matrix, BlochVector, DensityOperator, ProductState, S0, T0, T1, TM1,
};

pub const POPULATION_TOL: f64 = 1e-12;

/// Twirled state in the frame where the magnetisation is along `z`:
///
/// ```text
/// p_s|s₀⟩⟨s₀| + a|t₀⟩⟨t₀| + c e^{iφ}|s₀⟩⟨t₀| + c e^{−iφ}|t₀⟩⟨s₀|
///   + (b+m)/2 |t₁⟩⟨t₁| + (b−m)/2 |t₋₁⟩⟨t₋₁|,     c = η √(a p_s)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpunState {
    pub p_s: f64,
    /// `t₀` population.
    pub a: f64,
    /// `t₁ + t₋₁` population.
    pub b: f64,
    /// Signed z-magnetisation.
    pub m: f64,
    pub eta: f64,
    pub phi: f64,
}

impl SpunState {
    pub fn new(p_s: f64, a: f64, b: f64, m: f64, eta: f64, phi: f64) -> Result<Self> {
        let s = Self {
            p_s,
            a,
            b,
            m,
            eta,
            phi,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidSpunState(msg));
        let vals = [self.p_s, self.a, self.b, self.m, self.eta, self.phi];
        if vals.iter().any(|v| !v.is_finite()) {
            return invalid(format!("non-finite parameter in {self:?}"));
        }
        if self.p_s < -POPULATION_TOL || self.a < -POPULATION_TOL || self.b < -POPULATION_TOL {
            return invalid(format!(
                "negative population (p_s={}, a={}, b={})",
                self.p_s, self.a, self.b
            ));
        }
        let total = self.p_s + self.a + self.b;
        if (total - 1.0).abs() > POPULATION_TOL {
            return invalid(format!("populations sum to {total}"));
        }
        if self.m.abs() > self.b + POPULATION_TOL {
            return invalid(format!("|m| = {} exceeds b = {}", self.m.abs(), self.b));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return invalid(format!("eta = {} outside [0, 1]", self.eta));
        }
        Ok(())
    }

    /// `c = η √(a p_s)`.
    pub fn coherence(&self) -> f64 {
        self.eta * (self.a.max(0.0) * self.p_s.max(0.0)).sqrt()
    }

    /// The state as a matrix in the coupled basis.
    pub fn coupled_matrix(&self) -> ComplexMatrix4 {
        let mut m = ComplexMatrix4::zeros();
        m.0[S0][S0] = C64::new(self.p_s, 0.0);
        m.0[T1][T1] = C64::new(0.5 * (self.b + self.m), 0.0);
        m.0[T0][T0] = C64::new(self.a, 0.0);
        m.0[TM1][TM1] = C64::new(0.5 * (self.b - self.m), 0.0);
        let coh = C64::from_polar(self.coherence(), self.phi);
        m.0[S0][T0] = coh;
        m.0[T0][S0] = coh.conj();
        m
    }

    pub fn to_density(&self) -> Result<DensityOperator> {
        self.check()?;
        let b = coupled_basis_matrix();
        Ok(DensityOperator::from_trusted(
            b * self.coupled_matrix() * b.adjoint(),
        ))
    }
}

/// Convex combination `Σ_k P_k ρ^A_k ⊗ ρ^B_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparableMixture {
    pub components: Vec<(f64, ProductState)>,
}

impl SeparableMixture {
    pub fn new(components: Vec<(f64, ProductState)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::OutOfDomain("empty separable mixture".into()));
        }
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if components.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > POPULATION_TOL {
            return Err(Error::OutOfDomain(format!(
                "mixture weights must be ≥ 0 and sum to 1 (sum {total})"
            )));
        }
        Ok(Self { components })
    }

    pub fn to_density(&self) -> DensityOperator {
        let mut acc = ComplexMatrix4::zeros();
        for (w, p) in &self.components {
            acc = acc + p.density().matrix().scale(*w);
        }
        DensityOperator::from_trusted(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Spun,
    Ginibre,
    Separable,
    Saturating,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Spun => "spun",
            Family::Ginibre => "ginibre",
            Family::Separable => "separable",
            Family::Saturating => "saturating",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spun" => Ok(Family::Spun),
            "ginibre" => Ok(Family::Ginibre),
            "separable" => Ok(Family::Separable),
            "saturating" => Ok(Family::Saturating),
            other => Err(Error::OutOfDomain(format!("unknown family '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub count: usize,
    pub family: Family,
}

impl SamplerConfig {
    pub fn new(seed: u64, count: usize, family: Family) -> Result<Self> {
        if count == 0 {
            return Err(Error::OutOfDomain("sample count must be ≥ 1".into()));
        }
        Ok(Self {
            seed,
            count,
            family,
        })
    }

    fn expect(&self, family: Family) -> Result<()> {
        if self.family != family {
            return Err(Error::OutOfDomain(format!(
                "sampler for '{family}' called with family '{}'",
                self.family
            )));
        }
        if self.count == 0 {
            return Err(Error::OutOfDomain("sample count must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Independent generator for one sample.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn flat_dirichlet<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

fn uniform_ball<R: Rng>(rng: &mut R) -> BlochVector {
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            let r = rng.random::<f64>().cbrt();
            return BlochVector::new(r * v[0] / n, r * v[1] / n, r * v[2] / n);
        }
    }
}

pub fn spun_at(seed: u64, index: u64) -> SpunState {
    let mut rng = sample_rng(seed, index);
    let w = flat_dirichlet(&mut rng, 3);
    let (p_s, a) = (w[0], w[1]);
    // enforce the sum exactly
    let b = (1.0 - p_s - a).max(0.0);
    let m = b * (2.0 * rng.random::<f64>() - 1.0);
    let eta = rng.random::<f64>();
    let phi = TAU * rng.random::<f64>();
    SpunState {
        p_s,
        a,
        b,
        m,
        eta,
        phi,
    }
}

pub fn ginibre_at(seed: u64, index: u64) -> DensityOperator {
    let mut rng = sample_rng(seed, index);
    let g = ComplexMatrix4::from_fn(|_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let gg = g * g.adjoint();
    let tr = gg.trace().re;
    DensityOperator::from_trusted(gg.scale(1.0 / tr))
}

pub fn separable_at(seed: u64, index: u64, max_components: usize) -> SeparableMixture {
    let mut rng = sample_rng(seed, index);
    let k = rng.random_range(1..=max_components.max(1));
    let weights = flat_dirichlet(&mut rng, k);
    let components = weights
        .into_iter()
        .map(|w| {
            let a = uniform_ball(&mut rng);
            let b = uniform_ball(&mut rng);
            (
                w,
                ProductState {
                    bloch_a: a,
                    bloch_b: b,
                },
            )
        })
        .collect();
    SeparableMixture { components }
}

/// Point on the feasible `(|m|, p_s)` region, `p_s ≤ 1 − |m|`, drawn
/// uniformly; the signed `m` has a random sign.
pub fn saturating_at(seed: u64, index: u64) -> DensityOperator {
    let mut rng = sample_rng(seed, index);
    loop {
        let m: f64 = rng.random();
        let p: f64 = rng.random();
        if p + m <= 1.0 {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            return saturating_state(p, sign * m).expect("feasible point");
        }
    }
}

pub fn sample_spun(cfg: &SamplerConfig) -> Result<Vec<SpunState>> {
    cfg.expect(Family::Spun)?;
    Ok((0..cfg.count as u64)
        .into_par_iter()
        .map(|i| spun_at(cfg.seed, i))
        .collect())
}

pub fn sample_ginibre(cfg: &SamplerConfig) -> Result<Vec<DensityOperator>> {
    cfg.expect(Family::Ginibre)?;
    Ok((0..cfg.count as u64)
        .into_par_iter()
        .map(|i| ginibre_at(cfg.seed, i))
        .collect())
}

pub fn sample_separable(
    cfg: &SamplerConfig,
    max_components: usize,
) -> Result<Vec<SeparableMixture>> {
    cfg.expect(Family::Separable)?;
    if max_components == 0 {
        return Err(Error::OutOfDomain("max_components must be ≥ 1".into()));
    }
    Ok((0..cfg.count as u64)
        .into_par_iter()
        .map(|i| separable_at(cfg.seed, i, max_components))
        .collect())
}

/// Default component cap for separable mixtures drawn by the harness.
pub const DEFAULT_MAX_COMPONENTS: usize = 4;

/// Draws sample `index` of any family as a density operator.
pub fn state_at(family: Family, seed: u64, index: u64) -> DensityOperator {
    match family {
        Family::Spun => spun_at(seed, index)
            .to_density()
            .expect("sampled spun states are valid"),
        Family::Ginibre => ginibre_at(seed, index),
        Family::Separable => separable_at(seed, index, DEFAULT_MAX_COMPONENTS).to_density(),
        Family::Saturating => saturating_at(seed, index),
    }
}

/// `p_s|s₀⟩⟨s₀| + ((1−p_s+m)/2)|t₁⟩⟨t₁| + ((1−p_s−m)/2)|t₋₁⟩⟨t₋₁|`: the
/// least entangled state with the given observables.
pub fn saturating_state(p_s: f64, m: f64) -> Result<DensityOperator> {
    if !(p_s.is_finite() && m.is_finite()) || !(0.0..=1.0).contains(&p_s) || m.abs() > 1.0 {
        return Err(Error::OutOfDomain(format!(
            "(p_s, m) = ({p_s}, {m}) outside [0,1] × [-1,1]"
        )));
    }
    if p_s + m.abs() > 1.0 + crate::bounds::PHYSICAL_TOL {
        return Err(Error::Unphysical {
            p_s,
            limit: 1.0 - m.abs(),
        });
    }
    let b = 1.0 - p_s;
    let m = m.clamp(-b, b);
    SpunState {
        p_s,
        a: 0.0,
        b,
        m,
        eta: 0.0,
        phi: 0.0,
    }
    .to_density()
}
