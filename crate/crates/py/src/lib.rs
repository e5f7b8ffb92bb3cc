//! Python bindings. Bodies are a class; reports come back as plain dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use funktomo::bodies::{self, Smoothness};
use funktomo::bodyspec::BodySpec;
use funktomo::bpharness::{self, BpOptions, SlicingFamily};
use funktomo::intersect::{self, R4Options, ZonalOptions};
use funktomo::radon;
use funktomo::sections;
use funktomo::spherequad::cached_rule;
use funktomo::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Contract(_) | Error::DimensionMismatch { .. } | Error::Spec(_) | Error::NotAxial => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Converts a serializable report into Python objects through `json.loads`.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let json = PyModule::import(py, "json")?;
    Ok(json.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "StarBody", module = "funktomo", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyStarBody {
    inner: bodies::StarBody,
}

#[pymethods]
impl PyStarBody {
    #[staticmethod]
    #[pyo3(signature = (dim, radius = 1.0))]
    fn ball(dim: usize, radius: f64) -> PyResult<Self> {
        wrap(bodies::StarBody::ball(dim, radius))
    }

    #[staticmethod]
    fn ellipsoid(semi_axes: Vec<f64>) -> PyResult<Self> {
        wrap(bodies::StarBody::ellipsoid(semi_axes))
    }

    #[staticmethod]
    #[pyo3(signature = (dim, half_width = 1.0))]
    fn cube(dim: usize, half_width: f64) -> PyResult<Self> {
        wrap(bodies::StarBody::cube(dim, half_width))
    }

    #[staticmethod]
    #[pyo3(signature = (dim, p, radius = 1.0))]
    fn lp_ball(dim: usize, p: f64, radius: f64) -> PyResult<Self> {
        wrap(bodies::StarBody::lp_ball(dim, p, radius))
    }

    #[staticmethod]
    #[pyo3(signature = (dim, radius = 1.0, half_height = 1.0))]
    fn cylinder(dim: usize, radius: f64, half_height: f64) -> PyResult<Self> {
        wrap(bodies::StarBody::cylinder(dim, radius, half_height))
    }

    #[staticmethod]
    fn perturbed_ball(radius: f64, eps: f64, quad: Vec<f64>, quartic: Vec<f64>) -> PyResult<Self> {
        wrap(bodies::StarBody::perturbed_ball(radius, eps, quad, quartic))
    }

    /// Builds a body from the TOML text of a body spec file.
    #[staticmethod]
    fn from_spec(text: &str) -> PyResult<Self> {
        wrap(BodySpec::from_toml_str(text).and_then(|s| s.build()))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn id(&self) -> String {
        self.inner.id()
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().tag()
    }

    #[getter]
    fn smoothness(&self) -> &'static str {
        match self.inner.smoothness() {
            Smoothness::C2 => "C2",
            Smoothness::Lipschitz => "lipschitz",
            Smoothness::Piecewise => "piecewise",
        }
    }

    #[getter]
    fn axis(&self) -> Option<Vec<f64>> {
        self.inner.axis().map(<[f64]>::to_vec)
    }

    fn radial(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.radial(&u).map_err(py_err)
    }

    fn contains(&self, x: Vec<f64>) -> bool {
        self.inner.contains(&x)
    }

    #[pyo3(signature = (level = None))]
    fn volume(&self, py: Python<'_>, level: Option<usize>) -> PyResult<f64> {
        let level = level.unwrap_or_else(|| bpharness::default_volume_level(&self.inner));
        py.detach(|| bodies::volume(&self.inner, &cached_rule(self.inner.dim(), level)))
            .map_err(py_err)
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        wrap(self.inner.scaled(factor))
    }

    fn __repr__(&self) -> String {
        format!("StarBody({})", self.inner.id())
    }
}

fn wrap(r: funktomo::Result<bodies::StarBody>) -> PyResult<PyStarBody> {
    r.map(|inner| PyStarBody { inner }).map_err(py_err)
}

/// Funk transform of `rho_K^power` at `u`.
#[pyfunction]
#[pyo3(signature = (body, u, power = 1, level = sections::DEFAULT_LEVEL))]
fn funk_transform(py: Python<'_>, body: &PyStarBody, u: Vec<f64>, power: i32, level: usize) -> PyResult<f64> {
    let b = &body.inner;
    py.detach(|| radon::funk_transform(|v| b.radial_unchecked(v).powi(power), &u, level))
        .map_err(py_err)
}

/// Multipliers `lambda_0..lambda_kmax` of the Funk transform on S^{n-1}.
#[pyfunction]
#[pyo3(signature = (n, kmax, level = 8))]
fn funk_multipliers(n: usize, kmax: usize, level: usize) -> PyResult<Vec<f64>> {
    radon::funk_multipliers(n, kmax, level).map(|m| m.values).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (body, u, level = sections::DEFAULT_LEVEL))]
fn central_section_volume(py: Python<'_>, body: &PyStarBody, u: Vec<f64>, level: usize) -> PyResult<f64> {
    py.detach(|| sections::central_section_volume(&body.inner, &u, level))
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (body, u, z, level = sections::DEFAULT_LEVEL))]
fn parallel_section(py: Python<'_>, body: &PyStarBody, u: Vec<f64>, z: f64, level: usize) -> PyResult<f64> {
    py.detach(|| sections::parallel_section(&body.inner, &u, z, level))
        .map_err(py_err)
}

/// `(z, A(z))` sampled at `2 * half_points + 1` offsets.
#[pyfunction]
#[pyo3(signature = (body, u, half_points = 32, level = sections::DEFAULT_LEVEL))]
fn section_profile(
    py: Python<'_>,
    body: &PyStarBody,
    u: Vec<f64>,
    half_points: usize,
    level: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    py.detach(|| sections::section_profile(&body.inner, &u, half_points, level))
        .map(|p| (p.z, p.values))
        .map_err(py_err)
}

/// `(value, error_estimate, low_confidence)` of `R^{-1} rho_K` at `u` in R^4.
#[pyfunction]
fn lemma1_inverse(py: Python<'_>, body: &PyStarBody, u: Vec<f64>) -> PyResult<(f64, f64, bool)> {
    py.detach(|| sections::lemma1_inverse(&body.inner, &u))
        .map(|d| (d.value, d.error_estimate, d.low_confidence))
        .map_err(py_err)
}

/// Zonal inverse Funk transform of an axial body's radial function:
/// `(phi, values)` on the zonal grid.
#[pyfunction]
#[pyo3(signature = (body, grid = radon::DEFAULT_GRID, kmax = radon::DEFAULT_KMAX, smoothing = 1.0))]
fn zonal_inverse(
    py: Python<'_>,
    body: &PyStarBody,
    grid: usize,
    kmax: usize,
    smoothing: f64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let b = &body.inner;
    py.detach(|| {
        let g = radon::ZonalFunction::from_body(b, grid, kmax)?;
        let m = radon::funk_multipliers(b.dim(), kmax, 8)?;
        let opts = radon::ZonalInverseOptions {
            smoothing,
            ..Default::default()
        };
        let inv = radon::zonal_inverse(&g, &m, opts)?;
        Ok((inv.function.angles(), inv.function.samples().to_vec()))
    })
    .map_err(py_err)
}

/// Intersection-body verdict. `method` is `"auto"`, `"lemma1"` (R^4 only) or `"zonal"`.
#[pyfunction]
#[pyo3(signature = (body, method = "auto", grid = None))]
fn is_intersection_body(py: Python<'_>, body: &PyStarBody, method: &str, grid: Option<usize>) -> PyResult<Py<PyAny>> {
    let b = &body.inner;
    let lemma1 = match method {
        "auto" => b.dim() == 4,
        "lemma1" => true,
        "zonal" => false,
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    let verdict = py
        .detach(|| {
            if lemma1 {
                let mut opts = R4Options::default();
                if let Some(g) = grid {
                    opts.grid_size = g;
                }
                intersect::is_intersection_body_r4(b, opts)
            } else {
                let mut opts = ZonalOptions::default();
                if let Some(g) = grid {
                    opts.grid = g;
                }
                intersect::is_intersection_body_zonal(b, opts)
            }
        })
        .map_err(py_err)?;
    to_py(py, &verdict)
}

/// Busemann–Petty report; `i` selects the generalized check on `i`-dimensional sections.
#[pyfunction]
#[pyo3(signature = (k, l, i = None, samples = 500, seed = 0, certify = true))]
fn bp_check(
    py: Python<'_>,
    k: &PyStarBody,
    l: &PyStarBody,
    i: Option<usize>,
    samples: usize,
    seed: u64,
    certify: bool,
) -> PyResult<Py<PyAny>> {
    let opts = BpOptions {
        samples,
        seed,
        certify,
        ..Default::default()
    };
    let report = py
        .detach(|| match i {
            Some(i) => bpharness::gbp_check(&k.inner, &l.inner, i, &opts),
            None => bpharness::bp_check(&k.inner, &l.inner, &opts),
        })
        .map_err(py_err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (body, grid = 256))]
fn minmax_ratio(py: Python<'_>, body: &PyStarBody, grid: usize) -> PyResult<Py<PyAny>> {
    let rec = py
        .detach(|| bpharness::minmax_ratio(&body.inner, grid, None, None))
        .map_err(py_err)?;
    to_py(py, &rec)
}

/// Rows for `family` in `{"cube", "ball", "cylinder"}` over the given dimensions.
#[pyfunction]
#[pyo3(signature = (family, dims, half_height = 1.0))]
fn slicing_table(py: Python<'_>, family: &str, dims: Vec<usize>, half_height: f64) -> PyResult<Py<PyAny>> {
    let fam = match family {
        "cube" => SlicingFamily::Cube,
        "ball" => SlicingFamily::Ball,
        "cylinder" => SlicingFamily::Cylinder { half_height },
        other => return Err(PyValueError::new_err(format!("unknown family `{other}`"))),
    };
    let rows = bpharness::slicing_table(fam, dims).map_err(py_err)?;
    to_py(py, &rows)
}

#[pyfunction]
#[pyo3(signature = (body, u, points = 41, level = sections::DEFAULT_LEVEL))]
fn bm_concavity_check(py: Python<'_>, body: &PyStarBody, u: Vec<f64>, points: usize, level: usize) -> PyResult<Py<PyAny>> {
    let rep = py
        .detach(|| bpharness::bm_concavity_check(&body.inner, &u, points, level))
        .map_err(py_err)?;
    to_py(py, &rep)
}

#[pymodule]
#[pyo3(name = "funktomo")]
fn funktomo_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStarBody>()?;
    m.add_function(wrap_pyfunction!(funk_transform, m)?)?;
    m.add_function(wrap_pyfunction!(funk_multipliers, m)?)?;
    m.add_function(wrap_pyfunction!(central_section_volume, m)?)?;
    m.add_function(wrap_pyfunction!(parallel_section, m)?)?;
    m.add_function(wrap_pyfunction!(section_profile, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(zonal_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(is_intersection_body, m)?)?;
    m.add_function(wrap_pyfunction!(bp_check, m)?)?;
    m.add_function(wrap_pyfunction!(minmax_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(slicing_table, m)?)?;
    m.add_function(wrap_pyfunction!(bm_concavity_check, m)?)?;
    Ok(())
}
