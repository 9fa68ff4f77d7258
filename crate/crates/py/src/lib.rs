//! Python bindings. Paths and potentials are built from the same JSON
//! descriptors the CLI reads; results come back as plain Python values.

use maslovflow::hamiltonian::{clm_hamiltonian as clm, SolverSettings, SymmetricFamily};
use maslovflow::maslov::{self, DEFAULT_CROSSING_TOL};
use maslovflow::path::{LagrangianPath, PathDescriptor};
use maslovflow::specflow::{spectral_flow_with, spectrum_window, BoundaryValueFamily, SpectralFlowOptions, DEFAULT_TOL};
use maslovflow::suite;
use maslovflow::symplectic::{self, LagrangianFrame};
use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

const DEFAULT_STEPS: usize = 256;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn frame(basis: Vec<Vec<f64>>) -> PyResult<LagrangianFrame> {
    LagrangianFrame::from_basis(&matrix(basis)?).map_err(err)
}

/// Continuous path of Lagrangian subspaces on `[0, 1]`.
#[pyclass(name = "Path", module = "maslovflow", frozen)]
struct Path {
    inner: LagrangianPath,
}

#[pymethods]
impl Path {
    /// Path from a JSON descriptor such as `{"kind": "gamma_nor", "n": 2}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let d: PathDescriptor = serde_json::from_str(text).map_err(err)?;
        Ok(Self { inner: LagrangianPath::new(d).map_err(err)? })
    }

    #[staticmethod]
    fn gamma_nor(n: usize) -> PyResult<Self> {
        Ok(Self { inner: maslov::gamma_nor(n).map_err(err)? })
    }

    #[staticmethod]
    fn gamma_nor_prime(n: usize) -> PyResult<Self> {
        Ok(Self { inner: maslov::gamma_nor_prime(n).map_err(err)? })
    }

    /// Constant path spanned by the columns of a `2n x n` basis.
    #[staticmethod]
    fn constant(basis: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: LagrangianPath::constant(&frame(basis)?) })
    }

    #[staticmethod]
    fn horizontal(n: usize) -> Self {
        Self { inner: LagrangianPath::constant(&LagrangianFrame::horizontal(n)) }
    }

    #[staticmethod]
    fn vertical(n: usize) -> Self {
        Self { inner: LagrangianPath::constant(&LagrangianFrame::vertical(n)) }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Orthonormal `2n x n` basis at `lam`.
    fn at(&self, lam: f64) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(self.inner.at(lam).map_err(err)?.matrix()))
    }

    fn concat(&self, other: &Path) -> PyResult<Self> {
        Ok(Self { inner: self.inner.concat(&other.inner).map_err(err)? })
    }

    fn reversed(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.reversed().map_err(err)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(self.inner.descriptor()).expect("descriptor serializes")
    }

    fn __repr__(&self) -> String {
        format!("Path({})", self.to_json())
    }
}

/// Polynomial family `S_lambda(t)` of symmetric `2n x 2n` matrices.
#[pyclass(name = "Potential", module = "maslovflow", frozen)]
struct Potential {
    inner: SymmetricFamily,
}

#[pymethods]
impl Potential {
    /// From `{"n": 1, "terms": [{"lambda_power": 1, "t_power": 0, "matrix": [[..]]}]}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(err)? })
    }

    #[staticmethod]
    fn zero(n: usize) -> Self {
        Self { inner: SymmetricFamily::zero(n) }
    }

    /// `c I`, constant in `lambda` and `t`.
    #[staticmethod]
    fn scalar(n: usize, c: f64) -> Self {
        Self { inner: SymmetricFamily::scalar(n, c) }
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("family serializes")
    }
}

fn family(g1: &Path, g2: &Path, potential: Option<&Potential>, steps: usize) -> PyResult<BoundaryValueFamily> {
    let s = potential.map_or_else(|| SymmetricFamily::zero(g1.inner.n()), |p| p.inner.clone());
    BoundaryValueFamily::new(g1.inner.clone(), g2.inner.clone(), s).and_then(|f| f.with_steps(steps)).map_err(err)
}

#[pyfunction]
fn maslov_pair(g1: &Path, g2: &Path) -> PyResult<i64> {
    maslov::maslov_pair(&g1.inner, &g2.inner).map_err(err)
}

/// `(lambda, sign, multiplicity)` for each crossing.
#[pyfunction]
#[pyo3(signature = (g1, g2, tol = DEFAULT_CROSSING_TOL))]
fn crossings(g1: &Path, g2: &Path, tol: f64) -> PyResult<Vec<(f64, i32, usize)>> {
    let list = maslov::crossing_list(&g1.inner, &g2.inner, tol).map_err(err)?;
    Ok(list.into_iter().map(|c| (c.lambda_star, c.sign, c.multiplicity)).collect())
}

/// `(value, partition)`.
#[pyfunction]
#[pyo3(signature = (g1, g2, potential = None, steps = DEFAULT_STEPS, tol = DEFAULT_TOL))]
fn spectral_flow(g1: &Path, g2: &Path, potential: Option<&Potential>, steps: usize, tol: f64) -> PyResult<(i64, Vec<f64>)> {
    let fam = family(g1, g2, potential, steps)?;
    let opts = SpectralFlowOptions { tol, ..SpectralFlowOptions::default() };
    let res = spectral_flow_with(&fam, &fam.default_grid(), &opts).map_err(err)?;
    Ok((res.value, res.partition))
}

/// `(mu, multiplicity)` for the eigenvalues in `(mu_min, mu_max)` at `lam`.
#[pyfunction]
#[pyo3(signature = (g1, g2, lam, mu_min, mu_max, potential = None, steps = DEFAULT_STEPS, tol = DEFAULT_TOL))]
#[allow(clippy::too_many_arguments)]
fn spectrum(g1: &Path, g2: &Path, lam: f64, mu_min: f64, mu_max: f64, potential: Option<&Potential>, steps: usize, tol: f64) -> PyResult<Vec<(f64, usize)>> {
    let fam = family(g1, g2, potential, steps)?;
    let w = spectrum_window(&fam, lam, mu_min, mu_max, tol).map_err(err)?;
    Ok(w.eigenvalues.iter().map(|e| (e.mu, e.multiplicity)).collect())
}

/// `(sfl, maslov)` for the Hamiltonian problem.
#[pyfunction]
#[pyo3(signature = (potential, g1, g2, steps = DEFAULT_STEPS, tol = DEFAULT_TOL))]
fn clm_hamiltonian(potential: &Potential, g1: &Path, g2: &Path, steps: usize, tol: f64) -> PyResult<(i64, i64)> {
    let r = clm(&potential.inner, &g1.inner, &g2.inner, &SolverSettings { steps, tol }).map_err(err)?;
    Ok((r.lhs, r.rhs))
}

/// Gap distance between the spans of two `2n x n` bases.
#[pyfunction]
fn gap_distance(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> PyResult<f64> {
    symplectic::gap_distance(&frame(a)?, &frame(b)?).map_err(err)
}

/// Runs a seeded randomized suite and returns its JSON report.
#[pyfunction]
#[pyo3(signature = (which, seed = 1, count = 5))]
fn verify(which: &str, seed: u64, count: usize) -> PyResult<String> {
    let s = SolverSettings::default();
    let report = match which {
        "clm" => suite::unperturbed_suite(seed, count, &s),
        "hamiltonian" => suite::clm_suite(seed, count, &s),
        "three-term" => suite::three_term_suite(seed, count, 1, &s),
        "alpha-beta" => suite::alpha_beta_suite(seed, count, &s),
        "morse" => suite::morse_suite(seed, &[5.0, 15.0, 30.0], count, &s),
        "axioms" => suite::axiom_suite(seed, count),
        "gap" => suite::gap_suite(seed, count, &[0.05, 0.1]),
        other => return Err(PyValueError::new_err(format!("unknown identity `{other}`"))),
    }
    .map_err(err)?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[pymodule]
#[pyo3(name = "maslovflow")]
fn maslovflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Path>()?;
    m.add_class::<Potential>()?;
    m.add_function(wrap_pyfunction!(maslov_pair, m)?)?;
    m.add_function(wrap_pyfunction!(crossings, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_flow, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(clm_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(gap_distance, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
