//! Python bindings for the disclination solver: field construction, energy
//! evaluation, branch minimization, defect analysis, and checkpoints.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ldg_core::analysis::{analyze_field, director_kappa, eigenvalues};
use ldg_core::checkpoint::{load_checkpoint, save_checkpoint};
use ldg_core::energy::{energy, localized_energy};
use ldg_core::fields::Field3;
use ldg_core::mesh::build_mesh;
use ldg_core::optimizer::{
    solve_branch, Branch, ObstacleSpec, SolveStatus, SolverConfig,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_branch(name: &str) -> PyResult<Branch> {
    match name {
        "plus" => Ok(Branch::Plus),
        "minus" => Ok(Branch::Minus),
        "none" => Ok(Branch::None),
        other => Err(PyValueError::new_err(format!(
            "branch must be plus|minus|none, got '{other}'"
        ))),
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Plus => "plus",
        Branch::Minus => "minus",
        Branch::None => "none",
    }
}

fn energy_dict<'py>(
    py: Python<'py>,
    rep: &ldg_core::energy::EnergyReport,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("dirichlet", rep.dirichlet)?;
    d.set_item("singular", rep.singular)?;
    d.set_item("potential", rep.potential)?;
    d.set_item("total", rep.total)?;
    Ok(d)
}

/// Unit 3-vector field on the quarter-disk grid.
#[pyclass(name = "Field", from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: Field3,
}

#[pymethods]
impl PyField {
    /// Hedgehog reference field on an n-by-n quarter-disk grid.
    #[staticmethod]
    fn hedgehog(n: usize) -> PyResult<Self> {
        let mesh = Arc::new(build_mesh(n).map_err(err)?);
        Ok(PyField {
            inner: Field3::hedgehog(mesh),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.mesh.n
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.mesh.h
    }

    /// Nodal value (u1, u2, u3) at grid index (i, j).
    fn at(&self, i: usize, j: usize) -> PyResult<(f64, f64, f64)> {
        let n = self.inner.mesh.n;
        if i > n || j > n {
            return Err(PyValueError::new_err(format!(
                "index ({i}, {j}) outside grid of size {n}"
            )));
        }
        let v = self.inner.at(i, j);
        Ok((v[0], v[1], v[2]))
    }

    /// Bilinear sample at (rho, z); z may be negative (mirror symmetry).
    fn sample(&self, rho: f64, z: f64) -> (f64, f64, f64) {
        let v = self.inner.sample(rho, z);
        (v[0], v[1], v[2])
    }

    /// Energy report {dirichlet, singular, potential, total}.
    fn energy<'py>(&self, py: Python<'py>, mu: f64) -> PyResult<Bound<'py, PyDict>> {
        energy_dict(py, &energy(&self.inner, mu))
    }

    /// r^-1-scaled energy of the ball of radius r, 2h < r <= 1.
    fn localized_energy(&self, mu: f64, r: f64) -> PyResult<f64> {
        localized_energy(&self.inner, mu, r).map_err(err)
    }

    /// Defect report as a plain dict (axis crossings, ring, dumbbell, ...).
    fn analyze<'py>(&self, py: Python<'py>, branch: &str) -> PyResult<Bound<'py, PyAny>> {
        let report = analyze_field(&self.inner, parse_branch(branch)?);
        let text = serde_json::to_string(&report).map_err(err)?;
        let json = py.import("json")?;
        json.call_method1("loads", (text,))
    }
}

/// Minimize one branch with coarse-to-fine continuation.
#[pyfunction]
#[pyo3(signature = (n, mu, branch, bound, max_iters=None))]
fn minimize_branch<'py>(
    py: Python<'py>,
    n: usize,
    mu: f64,
    branch: &str,
    bound: f64,
    max_iters: Option<usize>,
) -> PyResult<(PyField, Bound<'py, PyDict>, usize, String)> {
    let b = parse_branch(branch)?;
    let obs = if b == Branch::None {
        ObstacleSpec::unconstrained()
    } else {
        ObstacleSpec::new(b, bound).map_err(err)?
    };
    let mut cfg = SolverConfig::for_grid(n);
    if let Some(m) = max_iters {
        cfg.max_iters = m;
    }
    let r = solve_branch(n, mu, &obs, &cfg).map_err(err)?;
    let status = match r.status {
        SolveStatus::Converged => "converged",
        SolveStatus::LineSearchStalled => "line_search_stalled",
        SolveStatus::IterationLimit => "iteration_limit",
    };
    Ok((
        PyField { inner: r.field },
        energy_dict(py, &r.report)?,
        r.iterations,
        status.into(),
    ))
}

/// Closed-form eigenvalues (l1, l2, l3) of the reconstructed Q-tensor.
#[pyfunction]
fn q_eigenvalues(u1: f64, u2: f64, u3: f64) -> (f64, f64, f64) {
    let e = eigenvalues(&[u1, u2, u3]);
    (e.l1, e.l2, e.l3)
}

/// Meridian director (kappa_rho, kappa_z), or None at uniaxial points.
#[pyfunction]
fn director(u1: f64, u2: f64, u3: f64) -> Option<(f64, f64)> {
    director_kappa(&[u1, u2, u3]).ok().map(|k| (k[0], k[1]))
}

/// Textual checkpoint with bit-exact float round-trip.
#[pyfunction]
fn checkpoint_save(field: &PyField, mu: f64, branch: &str, bound: f64) -> PyResult<String> {
    let b = parse_branch(branch)?;
    let obs = if b == Branch::None {
        ObstacleSpec::unconstrained()
    } else {
        ObstacleSpec::new(b, bound).map_err(err)?
    };
    Ok(save_checkpoint(&field.inner, mu, &obs))
}

#[pyfunction]
fn checkpoint_load(text: &str) -> PyResult<(PyField, f64, String, f64)> {
    let (field, mu, obs) = load_checkpoint(text).map_err(err)?;
    Ok((
        PyField { inner: field },
        mu,
        branch_name(obs.branch).into(),
        obs.bound,
    ))
}

#[pymodule]
fn ldg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(minimize_branch, m)?)?;
    m.add_function(wrap_pyfunction!(q_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(director, m)?)?;
    m.add_function(wrap_pyfunction!(checkpoint_save, m)?)?;
    m.add_function(wrap_pyfunction!(checkpoint_load, m)?)?;
    Ok(())
}
