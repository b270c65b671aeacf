//! Python module `transmon_lindblad`: scenario runs, density matrices and
//! the entanglement measures.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use transmon_lindblad::dynamics::{
    integrate, Hamiltonian, IntegratorConfig, LindbladSystem, NoiseRates,
};
use transmon_lindblad::model::{self, CouplingModel, ThreeQubitParams, TwoQubitParams};
use transmon_lindblad::qops::{self, BasisLabel, Operator};
use transmon_lindblad::runner::{self, Overrides};
use transmon_lindblad::{measures, Error};

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn square(rows: Vec<Vec<C64>>) -> PyResult<Operator> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let flat: Vec<C64> = rows.into_iter().flatten().collect();
    Operator::from_rows(dim, &flat).map_err(to_py)
}

fn rows_of(op: &Operator) -> Vec<Vec<C64>> {
    let d = op.dim();
    (0..d)
        .map(|r| (0..d).map(|c| op.get(r, c)).collect())
        .collect()
}

#[pyclass(name = "DensityMatrix", module = "transmon_lindblad", frozen)]
struct PyDensityMatrix {
    inner: qops::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    #[new]
    fn new(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        let inner = qops::DensityMatrix::new(square(rows)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Projector onto a computational basis state such as "101".
    #[staticmethod]
    fn basis(label: &str) -> PyResult<Self> {
        let label = BasisLabel::parse(label).map_err(to_py)?;
        Ok(Self {
            inner: qops::basis_state(&label),
        })
    }

    #[staticmethod]
    fn w_state() -> PyResult<Self> {
        Ok(Self {
            inner: qops::w_state(3).map_err(to_py)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn qubits(&self) -> usize {
        self.inner.qubits()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn populations(&self) -> Vec<f64> {
        measures::populations(&self.inner)
    }

    fn concurrence(&self) -> PyResult<f64> {
        measures::concurrence(&self.inner).map_err(to_py)
    }

    fn w_fidelity(&self) -> PyResult<f64> {
        measures::w_fidelity(&self.inner).map_err(to_py)
    }

    fn to_list(&self) -> Vec<Vec<C64>> {
        rows_of(self.inner.op())
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityMatrix(qubits={}, populations={:?})",
            self.inner.qubits(),
            self.populations()
        )
    }
}

/// Outcome of a catalog or configured scenario run.
#[pyclass(name = "Simulation", module = "transmon_lindblad", frozen, get_all)]
struct PySimulation {
    scenario: String,
    grid: Vec<f64>,
    /// Basis populations per grid point.
    populations: Vec<Vec<f64>>,
    /// Standard error of each population per grid point (zeros for one run).
    stderr: Vec<Vec<f64>>,
    gate_time: f64,
    peak_probability: f64,
    final_populations: Vec<f64>,
    summary_json: String,
}

#[pymethods]
impl PySimulation {
    fn __repr__(&self) -> String {
        format!(
            "Simulation({}, gate_time={:.4}, peak_probability={:.4})",
            self.scenario, self.gate_time, self.peak_probability
        )
    }
}

#[pyfunction]
fn catalog() -> Vec<String> {
    runner::catalog().into_iter().map(|s| s.name).collect()
}

/// Runs a catalog scenario (or a JSON config file) with optional overrides.
#[pyfunction]
#[pyo3(signature = (scenario=None, *, config=None, seed=None, realizations=None, t_max=None, points=None, threads=None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    scenario: Option<String>,
    config: Option<std::path::PathBuf>,
    seed: Option<u64>,
    realizations: Option<usize>,
    t_max: Option<f64>,
    points: Option<usize>,
    threads: Option<usize>,
) -> PyResult<PySimulation> {
    let overrides = Overrides {
        seed,
        realizations,
        t_max,
        points,
        threads,
    };
    let sim = py
        .detach(|| {
            runner::resolve(scenario.as_deref(), config.as_deref(), &overrides)
                .and_then(|spec| runner::simulate(&spec))
        })
        .map_err(to_py)?;
    Ok(PySimulation {
        scenario: sim.summary.scenario.clone(),
        grid: sim.result.grid.clone(),
        populations: sim
            .result
            .mean_states
            .iter()
            .map(measures::populations)
            .collect(),
        stderr: sim.result.population_stderr.clone(),
        gate_time: sim.summary.gate.gate_time,
        peak_probability: sim.summary.gate.peak_probability,
        final_populations: sim.summary.final_populations.clone(),
        summary_json: sim.summary.to_json(),
    })
}

/// Integrates the master equation for a constant Hamiltonian with the same
/// rates on every qubit. Returns one density matrix per grid point.
#[pyfunction]
#[pyo3(signature = (hamiltonian, rho0, *, t_max=10.0, points=1001, gamma_down=0.0, gamma_up=0.0, eta=0.0))]
#[allow(clippy::too_many_arguments)]
fn evolve(
    py: Python<'_>,
    hamiltonian: Vec<Vec<C64>>,
    rho0: &PyDensityMatrix,
    t_max: f64,
    points: usize,
    gamma_down: f64,
    gamma_up: f64,
    eta: f64,
) -> PyResult<Vec<PyDensityMatrix>> {
    let h = square(hamiltonian)?;
    let rates = NoiseRates {
        gamma_down,
        gamma_up,
        eta,
    };
    let cfg = IntegratorConfig {
        t_max,
        grid_points: points,
        ..IntegratorConfig::default()
    };
    let rho0 = rho0.inner.clone();
    let traj = py
        .detach(|| {
            LindbladSystem::with_qubit_noise(Hamiltonian::Constant(h), rates)
                .and_then(|sys| integrate(&sys, &rho0, &cfg))
        })
        .map_err(to_py)?;
    Ok(traj
        .states
        .into_iter()
        .map(|inner| PyDensityMatrix { inner })
        .collect())
}

/// H0 + g(σ₁⁺σ₂⁻ + σ₁⁻σ₂⁺) as a 4×4 nested list.
#[pyfunction]
fn rwa_hamiltonian(omega1: f64, omega2: f64, g: f64) -> PyResult<Vec<Vec<C64>>> {
    let p = TwoQubitParams {
        omega1,
        omega2,
        coupling: CouplingModel::Constant { g_m: g },
    };
    Ok(rows_of(&model::build_rwa_two(&p, g).map_err(to_py)?))
}

/// Three-qubit flip-flop Hamiltonian with couplings (g12, g23, g13).
#[pyfunction]
fn three_qubit_hamiltonian(omegas: [f64; 3], couplings: [f64; 3]) -> PyResult<Vec<Vec<C64>>> {
    let c = |g_m| CouplingModel::Constant { g_m };
    let p = ThreeQubitParams {
        omega1: omegas[0],
        omega2: omegas[1],
        omega3: omegas[2],
        g12: c(couplings[0]),
        g23: c(couplings[1]),
        g13: c(couplings[2]),
    };
    Ok(rows_of(&model::build_three(&p, couplings).map_err(to_py)?))
}

#[pymodule]
#[pyo3(name = "transmon_lindblad")]
fn transmon_lindblad_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(rwa_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(three_qubit_hamiltonian, m)?)?;
    Ok(())
}
