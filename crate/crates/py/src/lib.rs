//! Python module `gn3`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gn3_core::check::{run_check, CheckConfig, CheckReport};
use gn3_core::constitutive::{ConstitutiveModel, Flux, ScalarField};
use gn3_core::entropy::{condition_lists, discrepancy, expansion_crosscheck, residuals, violation_search};
use gn3_core::lemmas::{run_suite, SuiteConfig, SuiteReport};
use gn3_core::representation::extract_iso_coeffs;
use gn3_core::sim::{run, Scenario, SimOutput};
use gn3_core::tensor::sample_rotation_haar;
use gn3_core::{library, ThermalState, Vec3};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rows(t: &gn3_core::Ten2) -> [[f64; 3]; 3] {
    t.0
}

/// Thermal state `(alpha, alpha_dot, u, v)`.
#[pyclass(name = "State", from_py_object)]
#[derive(Clone, Copy)]
struct PyState(ThermalState);

#[pymethods]
impl PyState {
    #[new]
    fn new(alpha: f64, alpha_dot: f64, u: [f64; 3], v: [f64; 3]) -> PyResult<Self> {
        let s = ThermalState::new(alpha, alpha_dot, Vec3(u), Vec3(v));
        if !(alpha.is_finite() && alpha_dot.is_finite() && s.u.is_finite() && s.v.is_finite()) {
            return Err(value_err("state components must be finite"));
        }
        Ok(PyState(s))
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }

    #[getter]
    fn alpha_dot(&self) -> f64 {
        self.0.alpha_dot
    }

    #[getter]
    fn u(&self) -> [f64; 3] {
        self.0.u.0
    }

    #[getter]
    fn v(&self) -> [f64; 3] {
        self.0.v.0
    }

    fn __repr__(&self) -> String {
        format!("State(alpha={}, alpha_dot={}, u={:?}, v={:?})", self.0.alpha, self.0.alpha_dot, self.0.u.0, self.0.v.0)
    }
}

/// Equality residuals at one state.
#[pyclass(name = "Residuals", frozen)]
struct PyResiduals {
    #[pyo3(get)]
    r1: [[f64; 3]; 3],
    #[pyo3(get)]
    r2: [[f64; 3]; 3],
    #[pyo3(get)]
    r3: f64,
    #[pyo3(get)]
    r4: [f64; 3],
    #[pyo3(get)]
    reduced: f64,
    #[pyo3(get)]
    max_equality: f64,
}

#[pyclass(name = "Model", frozen)]
struct PyModel(ConstitutiveModel);

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ConstitutiveModel::from_json(text).map(PyModel).map_err(value_err)
    }

    /// Load a bundled model by name.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        library::load(name)
            .map(PyModel)
            .ok_or_else(|| value_err(format!("no bundled model named {name}")))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn name(&self) -> &str {
        &self.0.name
    }

    #[getter]
    fn transverse(&self) -> bool {
        self.0.is_transverse()
    }

    #[getter]
    fn axis(&self) -> Option<[f64; 3]> {
        self.0.symmetry.axis().map(|e| e.0)
    }

    fn h(&self, s: &PyState) -> PyResult<[f64; 3]> {
        self.0.eval_flux(Flux::H, &s.0).map(|v| v.0).map_err(value_err)
    }

    fn q(&self, s: &PyState) -> PyResult<[f64; 3]> {
        self.0.eval_flux(Flux::Q, &s.0).map(|v| v.0).map_err(value_err)
    }

    fn coldness(&self, s: &PyState) -> PyResult<f64> {
        self.0.eval_scalar(ScalarField::Lambda, &s.0).map_err(value_err)
    }

    fn energy(&self, s: &PyState) -> PyResult<f64> {
        self.0.eval_scalar(ScalarField::Eps, &s.0).map_err(value_err)
    }

    fn entropy(&self, s: &PyState) -> PyResult<f64> {
        self.0.eval_scalar(ScalarField::Eta, &s.0).map_err(value_err)
    }

    fn residuals(&self, s: &PyState) -> PyResult<PyResiduals> {
        let r = residuals(&self.0, &s.0).map_err(value_err)?;
        Ok(PyResiduals {
            r1: rows(&r.r1),
            r2: rows(&r.r2),
            r3: r.r3,
            r4: r.r4.0,
            reduced: r.reduced,
            max_equality: r.max_equality(),
        })
    }

    /// Scalar conditions as a list of `(key, value)` pairs.
    fn conditions(&self, s: &PyState) -> PyResult<Vec<(String, f64)>> {
        let list = condition_lists(&self.0, &s.0).map_err(value_err)?;
        Ok(list.entries.iter().map(|c| (c.key(), c.value)).collect())
    }

    fn expansion_deviation(&self, s: &PyState) -> PyResult<f64> {
        expansion_crosscheck(&self.0, &s.0).map_err(value_err)
    }

    /// `(h - lam q, axial part or None, orthogonal norm)`.
    fn discrepancy(&self, s: &PyState) -> PyResult<([f64; 3], Option<f64>, f64)> {
        let d = discrepancy(&self.0, &s.0).map_err(value_err)?;
        Ok((d.d.0, d.axial, d.orthogonal_norm))
    }

    /// Largest equality residual found, its label and the state reaching it.
    #[pyo3(signature = (budget = 10_000, seed = 0))]
    fn search(&self, budget: usize, seed: u64) -> PyResult<(f64, &'static str, PyState)> {
        let v = violation_search(&self.0, &self.0.domain, budget, seed).map_err(value_err)?;
        Ok((v.magnitude, v.label, PyState(v.state)))
    }

    #[pyo3(signature = (seed = 0, samples = 10_000, budget = 10_000))]
    fn check(&self, seed: u64, samples: usize, budget: usize) -> PyResult<PyCheckReport> {
        run_check(&self.0, &CheckConfig { seed, samples, budget })
            .map(PyCheckReport)
            .map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("Model({:?})", self.0.name)
    }
}

#[pyclass(name = "CheckReport", frozen)]
struct PyCheckReport(CheckReport);

#[pymethods]
impl PyCheckReport {
    #[getter]
    fn verdict(&self) -> &'static str {
        self.0.verdict.as_str()
    }

    #[getter]
    fn max_equality_residual(&self) -> f64 {
        self.0.max_equality_residual
    }

    #[getter]
    fn max_expansion_deviation(&self) -> f64 {
        self.0.max_expansion_deviation
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }
}

#[pyclass(name = "LemmaReport", frozen)]
struct PyLemmaReport(SuiteReport);

#[pymethods]
impl PyLemmaReport {
    #[getter]
    fn passed(&self) -> bool {
        self.0.passed
    }

    /// `(name, value, bound, tolerance, passed)` per check.
    #[getter]
    fn checks(&self) -> Vec<(String, f64, &'static str, f64, bool)> {
        self.0
            .checks
            .iter()
            .map(|c| {
                let bound = match c.bound {
                    gn3_core::lemmas::Bound::AtMost => "<=",
                    gn3_core::lemmas::Bound::AtLeast => ">=",
                };
                (c.name.clone(), c.value, bound, c.tolerance, c.passed)
            })
            .collect()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

#[pyclass(name = "Simulation", frozen)]
struct PySimulation(SimOutput);

#[pymethods]
impl PySimulation {
    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.0.final_state.alpha.clone()
    }

    #[getter]
    fn alpha_dot(&self) -> Vec<f64> {
        self.0.final_state.alpha_dot.clone()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.final_state.t
    }

    #[getter]
    fn entropy_produced(&self) -> f64 {
        self.0.summary.entropy.produced
    }

    #[getter]
    fn wave_speed(&self) -> Option<f64> {
        self.0.summary.wave_speed.map(|w| w.estimate)
    }

    #[getter]
    fn reference_l2(&self) -> Option<f64> {
        self.0.summary.reference_l2
    }

    fn summary_json(&self) -> String {
        self.0.summary.to_json()
    }

    fn series_csv(&self) -> &str {
        &self.0.csv
    }
}

#[pyfunction]
fn models() -> Vec<&'static str> {
    library::MODELS.iter().map(|m| m.name).collect()
}

#[pyfunction]
fn scenarios() -> Vec<&'static str> {
    library::SCENARIOS.iter().map(|s| s.name).collect()
}

#[pyfunction]
#[pyo3(signature = (seed = 0, samples = 10_000))]
fn lemmas(seed: u64, samples: usize) -> PyResult<PyLemmaReport> {
    if samples == 0 {
        return Err(value_err("samples must be at least 1"));
    }
    run_suite(&SuiteConfig {
        seed,
        samples,
        corrupt: false,
    })
    .map(PyLemmaReport)
    .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Run a scenario given as JSON text or `builtin:NAME`.
#[pyfunction]
fn simulate(py: Python<'_>, scenario: &str) -> PyResult<PySimulation> {
    let s = match scenario.strip_prefix("builtin:") {
        Some(name) => library::scenario(name).ok_or_else(|| value_err(format!("no bundled scenario named {name}")))?,
        None => Scenario::from_json(scenario).map_err(value_err)?,
    };
    let prepared = s.prepare().map_err(value_err)?;
    py.detach(|| run(&prepared)).map(PySimulation).map_err(value_err)
}

/// Coefficients `(phi1, phi2)` and residual of `f = phi1 u + phi2 v`.
#[pyfunction]
fn iso_coefficients(f: [f64; 3], u: [f64; 3], v: [f64; 3]) -> PyResult<([f64; 2], f64)> {
    let c = extract_iso_coeffs(&Vec3(f), &Vec3(u), &Vec3(v)).map_err(value_err)?;
    Ok((c.phi, c.residual))
}

/// Haar-distributed rotation matrix from `seed`.
#[pyfunction]
fn random_rotation(seed: u64) -> [[f64; 3]; 3] {
    rows(sample_rotation_haar(&mut ChaCha8Rng::seed_from_u64(seed)).matrix())
}

#[pymodule]
fn gn3(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyResiduals>()?;
    m.add_class::<PyCheckReport>()?;
    m.add_class::<PyLemmaReport>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(models, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(lemmas, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(iso_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(random_rotation, m)?)?;
    Ok(())
}
