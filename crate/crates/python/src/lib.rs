//! Python bindings: grids, band-limited functions, triangle geometry, products,
//! structure constants, the verification suite and the limit scan.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use starlab::function_space::{self as fs, BandlimitedFunction, ParityFilter};
use starlab::geometry::{amplitude_a, classify_triple, triangle_area_s, SpherePoint, EPS_DET, EPS_SIGN};
use starlab::kernels::{Amplitude, KernelSpec, Variant};
use starlab::product::{self as engine, ProductResult};
use starlab::quadrature::QuadratureGrid;
use starlab::semiclassical::{self, LimitScanConfig};
use starlab::verify::{run_suite, VerifyConfig};

create_exception!(pystarlab, ParityContractError, PyValueError);

fn err(e: starlab::Error) -> PyErr {
    match e {
        starlab::Error::ParityContract(_) => ParityContractError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn point(v: [f64; 3]) -> PyResult<SpherePoint> {
    SpherePoint::new(v[0], v[1], v[2]).map_err(err)
}

/// Gauss-Legendre x uniform product grid, antipodally symmetric.
#[pyclass(name = "Grid", frozen)]
struct PyGrid {
    inner: QuadratureGrid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n_polar: usize, n_azimuth: usize) -> PyResult<Self> {
        Ok(PyGrid {
            inner: QuadratureGrid::new(n_polar, n_azimuth).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(theta, phi)` of every node.
    fn nodes(&self) -> Vec<(f64, f64)> {
        self.inner.nodes().iter().map(|p| (p.theta(), p.phi())).collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn antipode_index(&self) -> Vec<usize> {
        self.inner.antipode_index().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Grid({}, {})", self.inner.n_polar(), self.inner.n_azimuth())
    }
}

/// Band-limited function given by orthonormal spherical-harmonic coefficients.
#[pyclass(name = "Function", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFunction {
    inner: BandlimitedFunction,
}

#[pymethods]
impl PyFunction {
    /// Coefficients ordered by `(l, m)` with `m = -l..l`.
    #[new]
    fn new(l_max: usize, coeffs: Vec<Complex64>) -> PyResult<Self> {
        Ok(PyFunction {
            inner: BandlimitedFunction::from_coeffs(l_max, coeffs).map_err(err)?,
        })
    }

    #[staticmethod]
    fn basis(l_max: usize, l: usize, m: i64) -> PyResult<Self> {
        Ok(PyFunction {
            inner: BandlimitedFunction::basis(l_max, l, m).map_err(err)?,
        })
    }

    #[staticmethod]
    fn constant(value: Complex64) -> Self {
        PyFunction {
            inner: BandlimitedFunction::constant(0, value),
        }
    }

    /// Seeded unit-norm function; `parity` is `None`, `"even"` or `"odd"`
    /// relative to `n`.
    #[staticmethod]
    #[pyo3(signature = (l_max, seed, parity=None, n=2, real=false))]
    fn random(l_max: usize, seed: u64, parity: Option<&str>, n: u32, real: bool) -> PyResult<Self> {
        let filter = match parity {
            None => ParityFilter::None,
            Some("even") => ParityFilter::NEven(n),
            Some("odd") => ParityFilter::NOdd(n),
            Some(other) => return Err(PyValueError::new_err(format!("unknown parity {other:?}"))),
        };
        Ok(PyFunction {
            inner: fs::random_bandlimited(l_max, seed, filter, real),
        })
    }

    #[getter]
    fn l_max(&self) -> usize {
        self.inner.l_max()
    }

    fn coeffs(&self) -> Vec<Complex64> {
        self.inner.coeffs().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    fn value_at(&self, theta: f64, phi: f64) -> Complex64 {
        self.inner.value_at(&SpherePoint::from_angles(theta, phi))
    }

    fn evaluate(&self, grid: &PyGrid) -> Vec<Complex64> {
        self.inner.evaluate(&grid.inner)
    }

    /// `(n-even part, n-odd part)`.
    fn parity_decompose(&self, n: u32) -> (PyFunction, PyFunction) {
        let (a, b) = fs::parity_decompose(&self.inner, n);
        (PyFunction { inner: a }, PyFunction { inner: b })
    }

    fn __repr__(&self) -> String {
        format!("Function(l_max={})", self.inner.l_max())
    }
}

/// Product values on the nodes of a grid.
#[pyclass(name = "ProductResult", frozen)]
struct PyProductResult {
    inner: ProductResult,
    parity_defect: f64,
}

#[pymethods]
impl PyProductResult {
    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.inner.values.clone()
    }

    #[getter]
    fn skipped_weight(&self) -> f64 {
        self.inner.skipped_weight
    }

    /// `max_m |r(-m) - (-1)^n r(m)|`.
    #[getter]
    fn parity_defect(&self) -> f64 {
        self.parity_defect
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }
}

/// Invariants of a midpoint triple given as three 3-vectors.
#[pyfunction]
fn triangle<'py>(py: Python<'py>, p1: [f64; 3], p2: [f64; 3], p3: [f64; 3]) -> PyResult<Bound<'py, PyDict>> {
    let t = classify_triple(point(p1)?, point(p2)?, point(p3)?, EPS_SIGN);
    let d = PyDict::new(py);
    d.set_item("d12", t.d12())?;
    d.set_item("d23", t.d23())?;
    d.set_item("d31", t.d31())?;
    d.set_item("det", t.det())?;
    d.set_item("class", t.label().to_string())?;
    d.set_item("eta", t.eta().sign())?;
    d.set_item("S", triangle_area_s(&t).ok())?;
    d.set_item("A", amplitude_a(&t, EPS_DET).ok())?;
    Ok(d)
}

/// Skewed product of `f` and `g` on `grid`.
///
/// `variant` is `global`, `partial-ηνρ`, `restricted` or `generalized`;
/// `amplitude` (`jacobian`, `unit`, `jacobian-scaled`) applies to `generalized`.
#[pyfunction]
#[pyo3(signature = (f, g, n, grid, variant="global", amplitude="jacobian"))]
fn product(
    py: Python<'_>,
    f: &PyFunction,
    g: &PyFunction,
    n: u32,
    grid: &PyGrid,
    variant: &str,
    amplitude: &str,
) -> PyResult<PyProductResult> {
    let variant: Variant = variant.parse().map_err(err)?;
    let amplitude: Amplitude = amplitude.parse().map_err(err)?;
    let spec = KernelSpec::new(n, variant).map_err(err)?.with_amplitude(amplitude);
    let r = py
        .detach(|| engine::product(&spec, &f.inner, &g.inner, &grid.inner))
        .map_err(err)?;
    let parity_defect = r.parity_defect(&grid.inner);
    Ok(PyProductResult { inner: r, parity_defect })
}

/// Structure constants as a flat list indexed `(b1 * dim + b2) * dim + b3`,
/// together with `dim`.
#[pyfunction]
fn structure_constants(py: Python<'_>, n: u32, l_max: usize, grid: &PyGrid) -> PyResult<(usize, Vec<Complex64>)> {
    let t = py
        .detach(|| engine::structure_constants(n, l_max, &grid.inner))
        .map_err(err)?;
    Ok((t.dim(), t.entries))
}

/// Runs the property suite; returns `(passed, checks)` with one dict per check.
#[pyfunction]
#[pyo3(signature = (grid=(16, 32), l_max=4, seed=1, ns=vec![1, 2, 3, 4], triangles=1000, kernel_triples=10_000, partition_samples=1_000_000))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    grid: (usize, usize),
    l_max: usize,
    seed: u64,
    ns: Vec<u32>,
    triangles: usize,
    kernel_triples: usize,
    partition_samples: usize,
) -> PyResult<(bool, Vec<Bound<'py, PyDict>>)> {
    let config = VerifyConfig {
        ns,
        grid,
        l_max,
        seed,
        triangles,
        kernel_triples,
        partition_samples,
        ..VerifyConfig::default()
    };
    let outcome = py.detach(|| run_suite(&config)).map_err(err)?;
    let mut checks = Vec::new();
    for c in &outcome.report.checks {
        let d = PyDict::new(py);
        d.set_item("criterion", c.criterion)?;
        d.set_item("name", &c.name)?;
        d.set_item("passed", c.passed)?;
        d.set_item("max_defect", c.max_defect)?;
        d.set_item("tolerance", c.tolerance)?;
        d.set_item("samples", c.samples)?;
        checks.push(d);
    }
    Ok((outcome.report.passed(), checks))
}

/// `[(k, rel_error)]`; `rel_error` is `None` when `f g` vanishes.
#[pyfunction]
#[pyo3(signature = (f, g, ks=vec![1, 2, 4, 8, 16]))]
fn limit_scan(py: Python<'_>, f: &PyFunction, g: &PyFunction, ks: Vec<u32>) -> PyResult<Vec<(u32, Option<f64>)>> {
    let config = LimitScanConfig {
        ks,
        ..LimitScanConfig::default()
    };
    let rows = py
        .detach(|| semiclassical::limit_scan(&f.inner, &g.inner, &config))
        .map_err(err)?;
    Ok(rows.into_iter().map(|r| (r.k, r.rel_error)).collect())
}

#[pymodule]
fn pystarlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyFunction>()?;
    m.add_class::<PyProductResult>()?;
    m.add_function(wrap_pyfunction!(triangle, m)?)?;
    m.add_function(wrap_pyfunction!(product, m)?)?;
    m.add_function(wrap_pyfunction!(structure_constants, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(limit_scan, m)?)?;
    m.add("ParityContractError", m.py().get_type::<ParityContractError>())?;
    Ok(())
}
