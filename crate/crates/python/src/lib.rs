//! Python bindings for `qclone`.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use qclone::analysis::{self, SweepRow};
use qclone::coherence;
use qclone::machines::{self, Machine};
use qclone::oracle;
use qclone::pipelines::{self, Branch, Pipeline};
use qclone::qstate;
use qclone::{Complex64, Error};

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn machine(name: &str) -> PyResult<Machine> {
    name.parse().map_err(to_py)
}

fn pipeline(name: &str) -> PyResult<Pipeline> {
    name.parse().map_err(to_py)
}

fn branch(name: &str) -> PyResult<Branch> {
    name.parse().map_err(to_py)
}

/// Validated density matrix.
#[pyclass(
    name = "DensityMatrix",
    module = "pyqclone",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: qstate::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err(
                "density matrix rows must form a square",
            ));
        }
        let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        Ok(Self {
            inner: qstate::DensityMatrix::new(m).map_err(to_py)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn entries(&self) -> Vec<Vec<Complex64>> {
        let d = self.inner.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.inner.entry(i, j)).collect())
            .collect()
    }

    fn partial_trace(&self, keep: Vec<usize>, dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.partial_trace(&keep, &dims).map_err(to_py)?,
        })
    }

    fn overlap(&self, other: &PyDensityMatrix) -> PyResult<f64> {
        if other.inner.dim() != self.inner.dim() {
            return Err(PyValueError::new_err("overlap needs equal dimensions"));
        }
        Ok(self.inner.overlap(&other.inner))
    }

    fn l1_coherence(&self) -> f64 {
        coherence::l1_coherence(&self.inner)
    }

    fn coherence_report(&self) -> PyResult<PyCoherenceReport> {
        Ok(PyCoherenceReport {
            inner: coherence::coherence_report(&self.inner).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={})", self.inner.dim())
    }
}

#[pyclass(
    name = "CoherenceReport",
    module = "pyqclone",
    frozen,
    skip_from_py_object
)]
#[derive(Clone, Copy)]
struct PyCoherenceReport {
    inner: coherence::CoherenceReport,
}

#[pymethods]
impl PyCoherenceReport {
    #[getter]
    fn global_(&self) -> f64 {
        self.inner.global
    }

    #[getter]
    fn local_a(&self) -> f64 {
        self.inner.local_a
    }

    #[getter]
    fn local_b(&self) -> f64 {
        self.inner.local_b
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    fn __repr__(&self) -> String {
        let c = self.inner;
        format!(
            "CoherenceReport(global={}, local_a={}, local_b={}, residual={})",
            c.global, c.local_a, c.local_b, c.residual
        )
    }
}

#[pyclass(
    name = "PipelineReport",
    module = "pyqclone",
    frozen,
    skip_from_py_object
)]
struct PyPipelineReport {
    inner: pipelines::PipelineReport,
}

#[pymethods]
impl PyPipelineReport {
    #[getter]
    fn pipeline(&self) -> &'static str {
        self.inner.pipeline.label()
    }

    #[getter]
    fn machine(&self) -> String {
        self.inner.machine.clone()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn delta_c(&self) -> f64 {
        self.inner.delta_c
    }

    #[getter]
    fn delta_residual(&self) -> f64 {
        self.inner.delta_residual
    }

    #[getter]
    fn fidelity(&self) -> f64 {
        self.inner.fidelity
    }

    #[getter]
    fn fidelity_closed_form(&self) -> Option<f64> {
        self.inner.fidelity_closed_form
    }

    /// `(label, CoherenceReport)` pairs in process order.
    fn stages(&self) -> Vec<(&'static str, PyCoherenceReport)> {
        self.inner
            .stages
            .iter()
            .map(|s| (s.label, PyCoherenceReport { inner: s.coherence }))
            .collect()
    }

    fn final_state(&self) -> PyDensityMatrix {
        PyDensityMatrix {
            inner: self.inner.final_stage().state.clone(),
        }
    }
}

/// Cloned two-qubit state of a named machine.
#[pyfunction]
#[pyo3(signature = (machine_name, beta, phase = 0.0))]
fn cloned_state(machine_name: &str, beta: f64, phase: f64) -> PyResult<PyDensityMatrix> {
    let spec = machine(machine_name)?.spec();
    Ok(PyDensityMatrix {
        inner: machines::cloned_state(&spec, beta, phase).map_err(to_py)?,
    })
}

/// `(reduction factor, single-copy fidelity)` of a named machine.
#[pyfunction]
fn cloner_constants(machine_name: &str) -> PyResult<(f64, f64)> {
    let spec = machine(machine_name)?.spec();
    Ok((spec.reduction_factor(), spec.cloner_fidelity()))
}

#[pyfunction]
#[pyo3(signature = (beta, phase = 0.0))]
fn two_copy_deleted_state(beta: f64, phase: f64) -> PyResult<PyDensityMatrix> {
    Ok(PyDensityMatrix {
        inner: machines::two_copy_deleted_state(beta, phase).map_err(to_py)?,
    })
}

#[pyfunction]
#[pyo3(signature = (pipeline_name, machine_name, beta, branch_name = "a"))]
fn run_pipeline(
    pipeline_name: &str,
    machine_name: &str,
    beta: f64,
    branch_name: &str,
) -> PyResult<PyPipelineReport> {
    let report = pipelines::run(
        pipeline(pipeline_name)?,
        &machine(machine_name)?,
        beta,
        branch(branch_name)?,
    )
    .map_err(to_py)?;
    Ok(PyPipelineReport { inner: report })
}

#[pyfunction]
#[pyo3(signature = (pipeline_name, machine_name, tol = 1e-8))]
fn consumption_interval(pipeline_name: &str, machine_name: &str, tol: f64) -> PyResult<(f64, f64)> {
    analysis::consumption_interval(pipeline(pipeline_name)?, &machine(machine_name)?, tol)
        .map_err(to_py)
}

/// `(f_min, beta_argmin, f_max, beta_argmax)`.
#[pyfunction]
fn fidelity_extrema(pipeline_name: &str, machine_name: &str) -> PyResult<(f64, f64, f64, f64)> {
    let e = analysis::fidelity_extrema(pipeline(pipeline_name)?, &machine(machine_name)?)
        .map_err(to_py)?;
    Ok((e.f_min, e.beta_argmin, e.f_max, e.beta_argmax))
}

/// Sweep rows as tuples in CSV column order.
#[pyfunction]
#[pyo3(signature = (pipeline_name, machine_name, n_points, branch_name = "a"))]
fn sweep(
    pipeline_name: &str,
    machine_name: &str,
    n_points: usize,
    branch_name: &str,
) -> PyResult<Vec<[f64; 11]>> {
    let rows = analysis::sweep_branch(
        pipeline(pipeline_name)?,
        &machine(machine_name)?,
        n_points,
        branch(branch_name)?,
    )
    .map_err(to_py)?;
    Ok(rows.iter().map(row_values).collect())
}

fn row_values(r: &SweepRow) -> [f64; 11] {
    [
        r.beta,
        r.alpha_beta,
        r.c_global_in,
        r.c_local_a_in,
        r.c_local_b_in,
        r.c_global_mid,
        r.c_global_out,
        r.residual_out,
        r.delta_c,
        r.delta_residual,
        r.fidelity,
    ]
}

#[pyfunction]
fn sweep_columns() -> Vec<&'static str> {
    analysis::CSV_HEADER.to_vec()
}

/// `(all_passed, max_deviation)` of the oracle check on an evenly spaced grid.
#[pyfunction]
#[pyo3(signature = (machine_name, grid = 101, tol = 1e-9))]
fn verify(machine_name: &str, grid: usize, tol: f64) -> PyResult<(bool, f64)> {
    let report = oracle::verify_all(&machine(machine_name)?, &oracle::beta_grid(grid), tol)
        .map_err(to_py)?;
    Ok((report.all_passed(), report.max_deviation()))
}

#[pymodule]
fn pyqclone(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyCoherenceReport>()?;
    m.add_class::<PyPipelineReport>()?;
    m.add_function(wrap_pyfunction!(cloned_state, m)?)?;
    m.add_function(wrap_pyfunction!(cloner_constants, m)?)?;
    m.add_function(wrap_pyfunction!(two_copy_deleted_state, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(consumption_interval, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity_extrema, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_columns, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
