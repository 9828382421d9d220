//! Python bindings for `malus-core`.
//!
//! Directions cross the boundary as `Direction` objects or `(theta, phi)`
//! tuples; spins as `twice_s` integers; complex amplitudes as Python `complex`.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use malus_core::classical_limit::{self, PhaseSpaceFunction};
use malus_core::malus as experiments;
use malus_core::path_integral::{self, PathSpec};
use malus_core::spin_states as states;
use malus_core::{cli, MalusError, QuasiDistribution, SpinQuantumNumber};

fn to_py(e: MalusError) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn spin(twice_s: u32) -> PyResult<SpinQuantumNumber> {
    SpinQuantumNumber::from_twice(twice_s).map_err(to_py)
}

/// A point on the Bloch sphere, angles in radians.
#[pyclass(name = "Direction", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyDirection(malus_core::Direction);

#[pymethods]
impl PyDirection {
    #[new]
    fn new(theta: f64, phi: f64) -> PyResult<Self> {
        malus_core::Direction::new(theta, phi).map(Self).map_err(to_py)
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    #[getter]
    fn phi(&self) -> f64 {
        self.0.phi()
    }

    fn unit_vector(&self) -> (f64, f64, f64) {
        let [x, y, z] = self.0.unit_vector();
        (x, y, z)
    }

    fn antipode(&self) -> Self {
        Self(malus_core::antipode(&self.0))
    }

    fn angle_to(&self, other: DirectionArg) -> f64 {
        malus_core::relative_angle(&self.0, &other.0)
    }

    fn __repr__(&self) -> String {
        format!("Direction(theta={}, phi={})", self.0.theta(), self.0.phi())
    }
}

/// Accepts either a `Direction` or a `(theta, phi)` tuple.
struct DirectionArg(malus_core::Direction);

impl<'a, 'py> FromPyObject<'a, 'py> for DirectionArg {
    type Error = PyErr;

    fn extract(ob: Borrowed<'a, 'py, PyAny>) -> PyResult<Self> {
        if let Ok(d) = ob.cast::<PyDirection>() {
            return Ok(DirectionArg(d.get().0));
        }
        let (theta, phi): (f64, f64) = ob.extract()?;
        malus_core::Direction::new(theta, phi).map(DirectionArg).map_err(to_py)
    }
}

/// Product Gauss-Legendre x uniform-azimuth quadrature on the sphere.
#[pyclass(name = "Grid", frozen)]
struct PyGrid(malus_core::QuadratureGrid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n_theta: usize, n_phi: usize) -> PyResult<Self> {
        malus_core::build_grid(n_theta, n_phi).map(Self).map_err(to_py)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn refined(&self) -> Self {
        Self(self.0.refined())
    }

    /// `(theta, phi, weight)` per node, polar-major.
    fn nodes(&self) -> Vec<(f64, f64, f64)> {
        self.0
            .nodes()
            .iter()
            .map(|n| (n.direction.theta(), n.direction.phi(), n.weight))
            .collect()
    }
}

#[pyclass(name = "DensityMatrix", frozen)]
struct PyDensityMatrix(malus_core::DensityMatrix);

#[pymethods]
impl PyDensityMatrix {
    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.dims().to_vec()
    }

    /// Row-major nested lists of complex entries.
    fn entries(&self) -> Vec<Vec<Complex64>> {
        let m = self.0.entries();
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    fn is_physical(&self, tol: f64) -> bool {
        self.0.is_physical(tol)
    }

    fn max_entry_distance(&self, other: &PyDensityMatrix) -> PyResult<f64> {
        self.0.max_entry_distance(&other.0).map_err(to_py)
    }

    fn fidelity(&self, other: &PyDensityMatrix) -> PyResult<f64> {
        self.0.fidelity(&other.0).map_err(to_py)
    }

    #[staticmethod]
    fn singlet() -> Self {
        Self(states::singlet_projector())
    }

    /// Projector onto basis vector `index` (0 is the lowest m).
    #[staticmethod]
    fn basis_projector(twice_s: u32, index: usize) -> PyResult<Self> {
        let s = spin(twice_s)?;
        if index >= s.dim() {
            return Err(PyValueError::new_err(format!(
                "index {index} out of range for 2s = {twice_s}"
            )));
        }
        Ok(Self(states::projector(&states::SpinState::basis(s, index))))
    }
}

/// A built-in quasi-probability distribution.
#[pyclass(name = "Distribution", frozen)]
struct PyDistribution(QuasiDistribution);

#[pymethods]
impl PyDistribution {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        QuasiDistribution::by_name(name).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn names() -> Vec<&'static str> {
        malus_core::quasi_dist::BUILTIN_NAMES.to_vec()
    }

    #[getter]
    fn name(&self) -> &str {
        self.0.name()
    }

    #[getter]
    fn parties(&self) -> usize {
        self.0.parties()
    }

    #[getter]
    fn delta_weight(&self) -> f64 {
        self.0.delta_weight()
    }

    /// Smooth part at one or two directions.
    fn evaluate(&self, omegas: Vec<DirectionArg>) -> PyResult<f64> {
        let dirs: Vec<_> = omegas.into_iter().map(|d| d.0).collect();
        self.0.evaluate(&dirs).map_err(to_py)
    }

    fn normalization(&self, grid: &PyGrid) -> PyResult<f64> {
        self.0.normalization(&grid.0).map_err(to_py)
    }

    /// `rho = int dOmega P |Omega><Omega|`, one `twice_s` per party.
    fn reconstruct(&self, twice_s: Vec<u32>, grid: &PyGrid) -> PyResult<PyDensityMatrix> {
        let spins = twice_s.into_iter().map(spin).collect::<PyResult<Vec<_>>>()?;
        self.0
            .reconstruct_density(&spins, &grid.0)
            .map(PyDensityMatrix)
            .map_err(to_py)
    }

    /// `{"min_value", "argmin", "delta_weight", "negative"}`.
    fn negativity<'py>(&self, py: Python<'py>, grid: &PyGrid) -> PyResult<Bound<'py, PyDict>> {
        let scan = self.0.negativity_scan(&grid.0);
        let d = PyDict::new(py);
        d.set_item("min_value", scan.min_value)?;
        d.set_item(
            "argmin",
            scan.argmin.iter().map(|x| (x.theta(), x.phi())).collect::<Vec<_>>(),
        )?;
        d.set_item("delta_weight", scan.delta_weight)?;
        d.set_item("negative", scan.is_negative())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Distribution({:?})", self.0.name())
    }
}

#[pyfunction]
fn malus_probability(twice_s: u32, omega: DirectionArg, omega_prime: DirectionArg) -> PyResult<f64> {
    Ok(states::malus_probability(spin(twice_s)?, &omega.0, &omega_prime.0))
}

#[pyfunction]
fn coherent_overlap(twice_s: u32, omega: DirectionArg, omega_prime: DirectionArg) -> PyResult<Complex64> {
    Ok(states::coherent_overlap(spin(twice_s)?, &omega.0, &omega_prime.0))
}

/// Amplitudes in ascending-m order, built with the matrix exponential.
#[pyfunction]
fn coherent_state(twice_s: u32, omega: DirectionArg) -> PyResult<Vec<Complex64>> {
    let st = states::scs_exponential(spin(twice_s)?, &omega.0);
    Ok(st.amplitudes().iter().copied().collect())
}

#[pyfunction]
fn coherent_state_closed_form(twice_s: u32, omega: DirectionArg) -> PyResult<Vec<Complex64>> {
    let st = states::scs_closed_form(spin(twice_s)?, &omega.0);
    Ok(st.amplitudes().iter().copied().collect())
}

/// `(value, estimated_error)` of the quantum Malus average over `P`.
#[pyfunction]
fn quantum_malus_average(p: &PyDistribution, twice_s: u32, a: DirectionArg, grid: &PyGrid) -> PyResult<(f64, f64)> {
    let r = experiments::quantum_malus_average(&p.0, spin(twice_s)?, &a.0, &grid.0).map_err(to_py)?;
    Ok((r.value, r.estimated_error))
}

/// `(value, estimated_error)` of the classical average of `cos^2 alpha`.
#[pyfunction]
fn classical_malus(p: &PyDistribution, a: DirectionArg, grid: &PyGrid) -> PyResult<(f64, f64)> {
    let r = experiments::classical_malus(&p.0, &a.0, &grid.0).map_err(to_py)?;
    Ok((r.value, r.estimated_error))
}

/// `(value, estimated_error)` of the joint (+,+) detection probability.
#[pyfunction]
fn joint_probability(p: &PyDistribution, a: DirectionArg, b: DirectionArg, grid: &PyGrid) -> PyResult<(f64, f64)> {
    let r = experiments::joint_probability(&p.0, &a.0, &b.0, &grid.0).map_err(to_py)?;
    Ok((r.value, r.estimated_error))
}

#[pyfunction]
fn quantum_joint_oracle(a: DirectionArg, b: DirectionArg) -> f64 {
    experiments::quantum_joint_oracle(&a.0, &b.0)
}

/// CHSH value of the singlet oracle; standard settings when none are given.
#[pyfunction]
#[pyo3(signature = (settings = None))]
fn chsh_quantum(settings: Option<(DirectionArg, DirectionArg, DirectionArg, DirectionArg)>) -> f64 {
    let chosen = match settings {
        Some((a, a_prime, b, b_prime)) => experiments::ChshSettings {
            a: a.0,
            a_prime: a_prime.0,
            b: b.0,
            b_prime: b_prime.0,
        },
        None => experiments::ChshSettings::standard(),
    };
    experiments::chsh_value(experiments::quantum_joint_oracle, &chosen)
}

/// `{"exact", "composed", "abs_error", "K", "grid"}`.
#[pyfunction]
fn compose_amplitude<'py>(
    py: Python<'py>,
    twice_s: u32,
    start: DirectionArg,
    end: DirectionArg,
    insertions: usize,
    grid: &PyGrid,
) -> PyResult<Bound<'py, PyDict>> {
    let r = path_integral::compose_amplitude(spin(twice_s)?, &start.0, &end.0, insertions, &grid.0);
    let d = PyDict::new(py);
    d.set_item("exact", r.exact_amplitude)?;
    d.set_item("composed", r.composed_amplitude)?;
    d.set_item("abs_error", r.abs_error)?;
    d.set_item("K", r.insertions)?;
    d.set_item("grid", r.grid)?;
    Ok(d)
}

/// Sliced amplitude around the latitude loop at `theta`.
#[pyfunction]
fn loop_amplitude(twice_s: u32, theta: f64, steps: usize) -> PyResult<Complex64> {
    let path = PathSpec::closed_loop(spin(twice_s)?, theta, steps).map_err(to_py)?;
    path_integral::path_amplitude(&path).map_err(to_py)
}

#[pyfunction]
fn transmission_width(twice_s: u32, level: f64) -> PyResult<f64> {
    classical_limit::transmission_width(spin(twice_s)?, level).map_err(to_py)
}

/// `[(t, theta, phi, energy), ...]` for a named Hamiltonian.
#[pyfunction]
#[pyo3(signature = (hamiltonian, twice_s, initial, t_end, step, omega0 = 1.0))]
fn integrate_motion(
    hamiltonian: &str,
    twice_s: u32,
    initial: DirectionArg,
    t_end: f64,
    step: f64,
    omega0: f64,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let s = spin(twice_s)?;
    let h = PhaseSpaceFunction::by_name(hamiltonian, omega0, s)
        .ok_or_else(|| PyValueError::new_err(format!("unknown Hamiltonian `{hamiltonian}`")))?;
    let tr = classical_limit::integrate_motion(&h, &initial.0, s, t_end, step).map_err(to_py)?;
    Ok(tr.samples.iter().map(|x| (x.t, x.theta, x.phi, x.energy)).collect())
}

/// Runs the command line in-process: `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(std::iter::once("malus".to_string()).chain(args), &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

#[pymodule]
fn malus(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDirection>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyDistribution>()?;
    m.add_function(wrap_pyfunction!(malus_probability, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_state, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_state_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_malus_average, m)?)?;
    m.add_function(wrap_pyfunction!(classical_malus, m)?)?;
    m.add_function(wrap_pyfunction!(joint_probability, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_joint_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_quantum, m)?)?;
    m.add_function(wrap_pyfunction!(compose_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(loop_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(transmission_width, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_motion, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
