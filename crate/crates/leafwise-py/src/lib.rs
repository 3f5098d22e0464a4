//! Python bindings for the leafwise engine: the polynomial/link toolbox,
//! nil-manifold constants, cutoff certification, the volume identity, and
//! the full verification suite.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use leafwise::config::SuiteConfig;
use leafwise::endperiodic::{build_cutoffs, build_turbulization, volume_coefficient, CutoffPair};
use leafwise::exterior::smooth_step;
use leafwise::milnor::{
    hopf_action, milnor_regularity_check, newton_project_to_fiber, sample_link, AmbientPoint, Cx,
    WeightedPolynomial,
};
use leafwise::nil::{connection_constant, NilChart};
use leafwise::suite;
use leafwise::symplectic::{liouville_identity_check, symplectization_identification};

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// The audited smooth step primitive and its exact derivative.
#[pyfunction]
fn step(t: f64) -> (f64, f64) {
    use leafwise::exterior::Dual;
    let d = smooth_step(Dual::<f64>::variable(t));
    (d.re, d.eps)
}

/// dζ-normalization −c₁/2π of the Heisenberg chart with Euler class c₁.
#[pyfunction]
fn nil_connection_constant(c1: i64) -> f64 {
    connection_constant(c1)
}

/// Midpoint quadrature of dζ/(−2π) over the fundamental torus.
#[pyfunction]
fn euler_class_integral(c1: i64, grid: usize) -> PyResult<f64> {
    let n = NilChart::new(c1).map_err(runtime_err)?;
    n.euler_class_integral(grid).map_err(runtime_err)
}

/// Max |ι_Xβ* − λ*| over sampled points (exact zero up to roundoff).
#[pyfunction]
fn liouville_residual(samples: usize, seed: u64) -> PyResult<f64> {
    Ok(liouville_identity_check(samples, seed)
        .map_err(runtime_err)?
        .max_residual)
}

/// A weighted-homogeneous polynomial (E6, E7 or E8) and its link toolbox.
#[pyclass(name = "Polynomial")]
struct PyPolynomial {
    inner: WeightedPolynomial,
}

#[pymethods]
impl PyPolynomial {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        let parsed = name.parse().map_err(PyValueError::new_err)?;
        Ok(PyPolynomial {
            inner: WeightedPolynomial::by_name(parsed),
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.to_string()
    }

    #[getter]
    fn degree(&self) -> u32 {
        self.inner.degree
    }

    #[getter]
    fn weights(&self) -> [u32; 3] {
        self.inner.weights
    }

    #[getter]
    fn link_euler_class(&self) -> i64 {
        self.inner.link_c1
    }

    /// f(Z) for Z given as six reals (x0, y0, x1, y1, x2, y2).
    fn evaluate(&self, z: [f64; 6]) -> (f64, f64) {
        let p = AmbientPoint::new(z);
        let v = self.inner.eval(&p.to_cx());
        (v.re, v.im)
    }

    /// Deterministic points on the link (f = 0, |Z| = 1).
    fn sample_link(&self, count: usize, seed: u64) -> PyResult<Vec<[f64; 6]>> {
        Ok(sample_link(&self.inner, count, seed)
            .map_err(runtime_err)?
            .into_iter()
            .map(|p| p.coords)
            .collect())
    }

    /// Newton retraction of Z onto the fiber f = w.
    fn project_to_fiber(&self, z: [f64; 6], w: (f64, f64)) -> PyResult<[f64; 6]> {
        let q = newton_project_to_fiber(&self.inner, &AmbientPoint::new(z), Cx::new(w.0, w.1))
            .map_err(runtime_err)?;
        Ok(q.coords)
    }

    /// Weighted Hopf action Zⱼ ↦ e^{i wⱼ t} Zⱼ.
    fn hopf(&self, t: f64, z: [f64; 6]) -> [f64; 6] {
        hopf_action(&self.inner, t, &AmbientPoint::new(z)).coords
    }

    /// Min tangential |d arg f| over the tube band, and whether it clears
    /// the floor.
    fn regularity_min(
        &self,
        band: (f64, f64),
        samples: usize,
        seed: u64,
        floor: f64,
    ) -> PyResult<(f64, bool)> {
        let r = milnor_regularity_check(&self.inner, band, samples, seed, floor)
            .map_err(runtime_err)?;
        Ok((r.note_value("min_norm").unwrap_or(f64::NAN), r.passed))
    }

    /// Max relative error of the symplectization rescaling identity.
    fn symplectization_residual(
        &self,
        rho_bar_star: f64,
        varrho: f64,
        base_points: usize,
        step: f64,
        seed: u64,
    ) -> PyResult<f64> {
        let out = symplectization_identification(
            &self.inner,
            rho_bar_star,
            varrho,
            base_points,
            step,
            10,
            seed,
        )
        .map_err(runtime_err)?;
        Ok(out.max_rel_err)
    }
}

/// The certified cutoff pair (k, l, λ) of the end-periodic construction.
#[pyclass(name = "Cutoffs")]
struct PyCutoffs {
    inner: CutoffPair,
}

#[pymethods]
impl PyCutoffs {
    #[new]
    fn new(mu: f64, breakpoints: [f64; 4]) -> PyResult<Self> {
        let inner = build_cutoffs(mu, breakpoints, -9, 10_000).map_err(runtime_err)?;
        Ok(PyCutoffs { inner })
    }

    #[getter]
    fn lambda_certified(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn scan_max_sharp(&self) -> f64 {
        self.inner.scan_max_sharp
    }

    #[getter]
    fn scan_max_classical(&self) -> f64 {
        self.inner.scan_max_classical
    }

    /// (k, k′) at τ, the derivative from a dual pass.
    fn k(&self, tau: f64) -> (f64, f64) {
        self.inner.k_at(tau)
    }

    fn l(&self, tau: f64) -> f64 {
        self.inner.l_at(tau)
    }

    /// The squared-form coefficient 2a·k′k + 2lμ (a = 9/2π).
    fn volume_coefficient(&self, tau: f64) -> f64 {
        volume_coefficient(&self.inner, tau)
    }
}

/// RK4 integration of the turbulization field from (r, θ) for `time`.
#[pyfunction]
fn turbulization_flow(radii: [f64; 4], r: f64, theta: f64, time: f64) -> PyResult<(f64, f64)> {
    let field = build_turbulization(radii).map_err(runtime_err)?;
    field.flow((r, theta), time, 1e-3).map_err(runtime_err)
}

/// Run the verification suite on a flat key=value config text; returns
/// (all_passed, {check: (passed, max_residual)}, report_text).
#[pyfunction]
#[pyo3(signature = (config_text, only=None))]
fn run_suite(
    py: Python<'_>,
    config_text: &str,
    only: Option<&str>,
) -> PyResult<(bool, Py<PyDict>, String)> {
    let cfg = SuiteConfig::parse(config_text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let outcome = suite::run_suite(&cfg, only).map_err(runtime_err)?;
    let dict = PyDict::new(py);
    for r in &outcome.reports {
        dict.set_item(r.check.clone(), (r.passed, r.max_residual))?;
    }
    Ok((outcome.all_passed, dict.into(), outcome.report_text))
}

#[pymodule]
fn leafwise_py(_py: Python<'_>, m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPolynomial>()?;
    m.add_class::<PyCutoffs>()?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(nil_connection_constant, m)?)?;
    m.add_function(wrap_pyfunction!(euler_class_integral, m)?)?;
    m.add_function(wrap_pyfunction!(liouville_residual, m)?)?;
    m.add_function(wrap_pyfunction!(turbulization_flow, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
