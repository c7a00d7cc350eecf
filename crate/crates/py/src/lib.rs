//! Python bindings for `spinbound`.
//!
//! Matrices cross the boundary as nested lists of Python `complex`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use spinbound::bounds::{self, EtaReading, WitnessMode};
use spinbound::harness;
use spinbound::qstate::Basis;
use spinbound::{twirl, ComplexMatrix4, Error, Family, Observables, StateFile, C64};

fn to_py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<C64>>) -> PyResult<ComplexMatrix4> {
    if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
        return Err(PyValueError::new_err("expected a 4×4 matrix"));
    }
    Ok(ComplexMatrix4::from_fn(|i, j| rows[i][j]))
}

fn matrix_to_rows(m: &ComplexMatrix4) -> Vec<Vec<C64>> {
    m.0.iter().map(|r| r.to_vec()).collect()
}

fn parse_basis(basis: &str) -> PyResult<Basis> {
    match basis {
        "computational" => Ok(Basis::Computational),
        "coupled" => Ok(Basis::Coupled),
        other => Err(PyValueError::new_err(format!("unknown basis '{other}'"))),
    }
}

fn parse_family(family: &str) -> PyResult<Family> {
    family.parse().map_err(to_py_err)
}

/// Validated two-qubit density operator.
#[pyclass(
    name = "DensityOperator",
    module = "spinbound_py",
    skip_from_py_object,
    frozen
)]
struct PyDensityOperator {
    inner: spinbound::DensityOperator,
}

#[pymethods]
impl PyDensityOperator {
    /// Builds a state from a 4×4 matrix in the given basis.
    #[new]
    #[pyo3(signature = (matrix, basis = "computational"))]
    fn new(matrix: Vec<Vec<C64>>, basis: &str) -> PyResult<Self> {
        let m = matrix_from_rows(matrix)?;
        let inner = match parse_basis(basis)? {
            Basis::Computational => spinbound::DensityOperator::validate(m),
            Basis::Coupled => spinbound::DensityOperator::from_coupled(m),
        }
        .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn singlet() -> Self {
        Self {
            inner: spinbound::DensityOperator::singlet(),
        }
    }

    #[staticmethod]
    fn maximally_mixed() -> Self {
        Self {
            inner: spinbound::DensityOperator::maximally_mixed(),
        }
    }

    /// `F|s₀⟩⟨s₀| + (1−F)(I − |s₀⟩⟨s₀|)/3`.
    #[staticmethod]
    fn werner(singlet_weight: f64) -> PyResult<Self> {
        Ok(Self {
            inner: spinbound::DensityOperator::werner(singlet_weight).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: StateFile::parse(text).map_err(to_py_err)?,
        })
    }

    #[pyo3(signature = (basis = "computational"))]
    fn to_json(&self, basis: &str) -> PyResult<String> {
        Ok(StateFile::from_state(&self.inner, parse_basis(basis)?).to_json())
    }

    #[pyo3(signature = (basis = "computational"))]
    fn matrix(&self, basis: &str) -> PyResult<Vec<Vec<C64>>> {
        Ok(match parse_basis(basis)? {
            Basis::Computational => matrix_to_rows(self.inner.matrix()),
            Basis::Coupled => matrix_to_rows(&self.inner.to_coupled_basis()),
        })
    }

    #[getter]
    fn singlet_fraction(&self) -> f64 {
        self.inner.singlet_fraction()
    }

    /// `Tr[S ρ]` as `[m_x, m_y, m_z]`.
    #[getter]
    fn magnetisation(&self) -> [f64; 3] {
        self.inner.magnetisation()
    }

    fn concurrence(&self) -> PyResult<f64> {
        Ok(spinbound::wootters_concurrence(&self.inner)
            .map_err(to_py_err)?
            .concurrence)
    }

    /// Descending eigenvalues of `(√ρ ρ̃ √ρ)^{1/2}`.
    fn wootters_lambdas(&self) -> PyResult<[f64; 4]> {
        Ok(spinbound::wootters_concurrence(&self.inner)
            .map_err(to_py_err)?
            .lambdas)
    }

    /// Projects onto states invariant under collective z rotations. With `align`,
    /// the magnetisation is first rotated onto +z; `numeric` selects the
    /// quadrature average with that many points.
    #[pyo3(signature = (align = false, numeric = None))]
    fn twirl(&self, align: bool, numeric: Option<usize>) -> PyResult<Self> {
        let rho = if align {
            self.inner.align_magnetisation_to_z()
        } else {
            self.inner
        };
        let inner = match numeric {
            Some(n) => twirl::twirl_numeric(&rho, n).map_err(to_py_err)?,
            None => twirl::twirl_analytic(&rho),
        };
        Ok(Self { inner })
    }

    /// Parameters of a state already invariant under z rotations.
    fn spun_parameters(&self) -> PyResult<PySpunState> {
        Ok(PySpunState {
            inner: twirl::spun_parameters(&self.inner).map_err(to_py_err)?,
        })
    }

    fn witness(&self) -> PyResult<PyWitnessVerdict> {
        witness_impl(&self.inner.observables(), WitnessMode::FullVector)
    }

    fn __repr__(&self) -> String {
        let m = self.inner.magnetisation();
        format!(
            "DensityOperator(singlet_fraction={:.6}, magnetisation=[{:.6}, {:.6}, {:.6}])",
            self.inner.singlet_fraction(),
            m[0],
            m[1],
            m[2]
        )
    }
}

/// Spun (twirled, z-aligned) state parametrisation.
#[pyclass(
    name = "SpunState",
    module = "spinbound_py",
    skip_from_py_object,
    frozen
)]
struct PySpunState {
    inner: spinbound::SpunState,
}

#[pymethods]
impl PySpunState {
    #[new]
    #[pyo3(signature = (p_s, a, b, m, eta = 0.0, phi = 0.0))]
    fn new(p_s: f64, a: f64, b: f64, m: f64, eta: f64, phi: f64) -> PyResult<Self> {
        Ok(Self {
            inner: spinbound::SpunState::new(p_s, a, b, m, eta, phi).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn p_s(&self) -> f64 {
        self.inner.p_s
    }
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }
    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }
    #[getter]
    fn m(&self) -> f64 {
        self.inner.m
    }
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }
    #[getter]
    fn phi(&self) -> f64 {
        self.inner.phi
    }

    fn to_density(&self) -> PyResult<PyDensityOperator> {
        Ok(PyDensityOperator {
            inner: self.inner.to_density().map_err(to_py_err)?,
        })
    }

    /// Concurrence from the closed-form spectrum.
    fn concurrence(&self) -> PyResult<f64> {
        Ok(spinbound::spun_concurrence_closed_form(&self.inner)
            .map_err(to_py_err)?
            .concurrence)
    }

    /// Singlet fraction above which this state family is entangled, if any.
    fn singlet_threshold(&self) -> PyResult<Option<f64>> {
        bounds::spun_singlet_threshold(&self.inner).map_err(to_py_err)
    }

    fn is_entangled(&self) -> PyResult<bool> {
        bounds::spun_entanglement_condition(&self.inner).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "SpunState(p_s={}, a={}, b={}, m={}, eta={}, phi={})",
            s.p_s, s.a, s.b, s.m, s.eta, s.phi
        )
    }
}

#[pyclass(name = "WitnessVerdict", module = "spinbound_py", frozen, get_all)]
struct PyWitnessVerdict {
    min_concurrence: f64,
    entangled_certified: bool,
    singlet_bound_value: f64,
    physical: bool,
    tight: bool,
    singlet_fraction: f64,
    magnetisation_used: f64,
}

#[pymethods]
impl PyWitnessVerdict {
    fn __repr__(&self) -> String {
        format!(
            "WitnessVerdict(entangled_certified={}, min_concurrence={}, singlet_bound_value={}, tight={})",
            self.entangled_certified, self.min_concurrence, self.singlet_bound_value, self.tight
        )
    }
}

fn witness_impl(obs: &Observables, mode: WitnessMode) -> PyResult<PyWitnessVerdict> {
    let v = bounds::witness(obs, mode).map_err(to_py_err)?;
    Ok(PyWitnessVerdict {
        min_concurrence: v.min_concurrence,
        entangled_certified: v.entangled_certified,
        singlet_bound_value: v.singlet_bound_value,
        physical: v.physical,
        tight: v.tight,
        singlet_fraction: v.singlet_fraction,
        magnetisation_used: v.magnetisation_used,
    })
}

/// Witness verdict from a singlet fraction and a magnetisation vector (or its
/// magnitude). Raises `ValueError` for unphysical observables.
#[pyfunction]
#[pyo3(signature = (p_s, m, z_only = false))]
fn witness(p_s: f64, m: Vec<f64>, z_only: bool) -> PyResult<PyWitnessVerdict> {
    let m = match m.as_slice() {
        [z] => [0.0, 0.0, *z],
        [x, y, z] => [*x, *y, *z],
        _ => return Err(PyValueError::new_err("m must have one or three components")),
    };
    let mode = if z_only {
        WitnessMode::ZOnly
    } else {
        WitnessMode::FullVector
    };
    witness_impl(&Observables::new(p_s, m), mode)
}

/// Largest singlet fraction reachable by separable states at magnetisation `m`.
#[pyfunction]
fn singlet_bound(m: f64) -> f64 {
    bounds::singlet_bound(m)
}

/// Least concurrence consistent with `(p_s, m)`.
#[pyfunction]
fn min_concurrence_bound(p_s: f64, m: f64) -> PyResult<f64> {
    bounds::min_concurrence_bound(p_s, m).map_err(to_py_err)
}

/// Singlet fraction on the iso-concurrence line at magnetisation `m`.
#[pyfunction]
fn contour_min_ps(concurrence: f64, m: f64) -> PyResult<f64> {
    bounds::contour_min_ps(concurrence, m).map_err(to_py_err)
}

/// Supremum over spun states of the singlet threshold at magnetisation `m`.
#[pyfunction]
#[pyo3(signature = (m, grid_resolution = 200, squared_eta = true))]
fn supremum_check(m: f64, grid_resolution: usize, squared_eta: bool) -> f64 {
    let reading = if squared_eta {
        EtaReading::Squared
    } else {
        EtaReading::Linear
    };
    bounds::supremum_check_with(m, grid_resolution, reading)
}

/// Deterministic state `index` of a sampling family.
#[pyfunction]
fn sample_state(family: &str, seed: u64, index: u64) -> PyResult<PyDensityOperator> {
    Ok(PyDensityOperator {
        inner: spinbound::sampling::state_at(parse_family(family)?, seed, index),
    })
}

/// `(m_abs, p_s, concurrence, certified)` for `count` sampled states.
#[pyfunction]
fn sample(
    py: Python<'_>,
    family: &str,
    seed: u64,
    count: usize,
) -> PyResult<Vec<(f64, f64, f64, bool)>> {
    let family = parse_family(family)?;
    let records = py
        .detach(|| harness::generate_records(family, seed, count))
        .map_err(to_py_err)?;
    Ok(records
        .into_iter()
        .map(|r| (r.m_abs, r.p_s, r.concurrence, r.certified))
        .collect())
}

#[pymodule]
fn spinbound_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityOperator>()?;
    m.add_class::<PySpunState>()?;
    m.add_class::<PyWitnessVerdict>()?;
    m.add_function(wrap_pyfunction!(witness, m)?)?;
    m.add_function(wrap_pyfunction!(singlet_bound, m)?)?;
    m.add_function(wrap_pyfunction!(min_concurrence_bound, m)?)?;
    m.add_function(wrap_pyfunction!(contour_min_ps, m)?)?;
    m.add_function(wrap_pyfunction!(supremum_check, m)?)?;
    m.add_function(wrap_pyfunction!(sample_state, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    Ok(())
}
