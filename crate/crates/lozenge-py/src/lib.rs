//! Python bindings. Exact rationals come back as `fractions.Fraction`.

use lozenge::density::ScaledGeometry;
use lozenge::enumeration::{exact_distribution, z_det, EndpointConfig, RegionSpec};
use lozenge::exact::{parse_rational, ExactRational};
use lozenge::resolvent::{solve, Interval, ResolventProblem};
use lozenge::sampler::{default_bins, default_burnin, histogram_from_counts, mcmc_site_counts};
use lozenge::verify::{run_suite, Effort};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: lozenge::Error) -> PyErr {
    use lozenge::Error as E;
    match e {
        E::InvalidRegion(_) | E::InvalidConfig(_) | E::InvalidParameter(_) | E::SizeLimit(_) | E::NoValidConfig | E::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: &ExactRational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((format!("{}/{}", r.numer(), r.denom()),))
}

/// Builds a region; `region` is "cut" or "half-cut".
pub fn region(k: usize, n: usize, q: &str, region: &str) -> lozenge::Result<RegionSpec> {
    match region {
        "cut" => RegionSpec::cut_hexagon(k, n, parse_rational(q)?),
        "half-cut" => RegionSpec::half_cut_hexagon(k, n),
        other => Err(lozenge::Error::InvalidParameter(format!("unknown region {other:?}"))),
    }
}

/// Geometry from a model name and keyword parameters.
pub fn geometry(model: &str, get: impl Fn(&str) -> Option<f64>) -> lozenge::Result<ScaledGeometry> {
    let need = |name: &str| get(name).ok_or_else(|| lozenge::Error::InvalidParameter(format!("model {model} needs {name}")));
    Ok(match model {
        "uniform" => ScaledGeometry::Uniform { lambda: need("lambda")? },
        "qcut" => ScaledGeometry::QCut { alpha: need("alpha")?, beta: need("beta")? },
        "two-corner" => ScaledGeometry::TwoCorner { lambda: need("lambda")?, nu: need("nu")?, theta: need("theta")? },
        "hexagon" => ScaledGeometry::Hexagon { lambda: need("lambda")?, theta: need("theta")?, x: need("x")? },
        "half-cut" => ScaledGeometry::HalfCut { alpha: need("alpha")? },
        "triangle" => ScaledGeometry::Triangle { x: need("x")? },
        "tsscpp" => ScaledGeometry::Tsscpp { x: need("x")? },
        other => return Err(lozenge::Error::InvalidParameter(format!("unknown model {other:?}"))),
    })
}

/// Partition function of the endpoint configuration `m`.
#[pyfunction]
#[pyo3(signature = (k, n, m, q = "1", kind = "cut"))]
fn count<'py>(py: Python<'py>, k: usize, n: usize, m: Vec<i64>, q: &str, kind: &str) -> PyResult<Bound<'py, PyAny>> {
    let r = region(k, n, q, kind).map_err(py_err)?;
    let m = EndpointConfig::new(m);
    r.validate(&m).map_err(py_err)?;
    fraction(py, &z_det(&r, &m).map_err(py_err)?)
}

/// Every configuration with its exact probability.
#[pyfunction]
#[pyo3(signature = (k, n, q = "1", kind = "cut"))]
fn distribution<'py>(py: Python<'py>, k: usize, n: usize, q: &str, kind: &str) -> PyResult<Vec<(Vec<i64>, Bound<'py, PyAny>)>> {
    let r = region(k, n, q, kind).map_err(py_err)?;
    let d = exact_distribution(&r).map_err(py_err)?;
    (0..d.configs.len()).map(|i| Ok((d.configs[i].m.clone(), fraction(py, &d.probability(i))?))).collect()
}

/// (z, rho) on `grid` equally spaced points of the support.
#[pyfunction]
#[pyo3(signature = (model, grid = 201, **params))]
fn density(model: &str, grid: usize, params: Option<&Bound<'_, PyDict>>) -> PyResult<Vec<(f64, f64)>> {
    let get = |name: &str| params.and_then(|p| p.get_item(name).ok().flatten()).and_then(|v| v.extract::<f64>().ok());
    let g = geometry(model, get).map_err(py_err)?;
    g.validate().map_err(py_err)?;
    Ok(g.profile().map_err(py_err)?.grid(grid))
}

/// Metropolis endpoint histogram of the cut hexagon at q = 1, scaled by 1/k:
/// (bin_center, height) pairs.
#[pyfunction]
#[pyo3(signature = (k, n, steps, seed = 0, bins = None))]
fn sample_histogram(py: Python<'_>, k: usize, n: usize, steps: u64, seed: u64, bins: Option<usize>) -> PyResult<Vec<(f64, f64)>> {
    let r = region(k, n, "1", "cut").map_err(py_err)?;
    let (counts, _) = py.detach(|| mcmc_site_counts(&r, steps, default_burnin(steps), seed)).map_err(py_err)?;
    let bins = bins.unwrap_or_else(|| default_bins(counts.counts.len(), counts.samples));
    let h = histogram_from_counts(&counts, bins, 1.0 / k as f64).map_err(py_err)?;
    Ok((0..h.bins()).map(|i| (h.center(i), h.height(i))).collect())
}

/// Arctic curve points; `theta = None` gives the cut hexagon.
#[pyfunction]
#[pyo3(signature = (lam, theta = None, points = 256))]
fn arctic(lam: f64, theta: Option<f64>, points: usize) -> PyResult<Vec<(f64, f64)>> {
    let c = match theta {
        Some(t) => lozenge::arctic::hexagon_arctic(lam, t),
        None => lozenge::arctic::cuthex_arctic(lam),
    }
    .map_err(py_err)?;
    c.sample(points).map_err(py_err)
}

/// Band solution for forbidden and packed (lo, hi) intervals.
#[pyfunction]
#[pyo3(signature = (lam, forbidden = vec![], packed = vec![], mass = 1.0))]
fn solve_gap<'py>(py: Python<'py>, lam: f64, forbidden: Vec<(f64, f64)>, packed: Vec<(f64, f64)>, mass: f64) -> PyResult<Bound<'py, PyDict>> {
    let iv = forbidden
        .iter()
        .map(|&(lo, hi)| Interval::Forbidden { lo, hi })
        .chain(packed.iter().map(|&(lo, hi)| Interval::Packed { lo, hi }))
        .collect();
    let problem = ResolventProblem::new(lam, iv, mass).map_err(py_err)?;
    let sol = py.detach(|| solve(&problem, 24)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("converged", sol.converged)?;
    d.set_item("bands", sol.bands.iter().map(|b| (b.lo, b.hi)).collect::<Vec<_>>())?;
    d.set_item("saturated", sol.saturated.clone())?;
    d.set_item("residuals", sol.residuals.clone())?;
    d.set_item("total_mass", sol.total_mass())?;
    Ok(d)
}

/// Runs the quick (or full) cross-validation suite; returns
/// [(name, passed, measured, tolerance)].
#[pyfunction]
#[pyo3(signature = (full = false, seed = 0))]
fn verify(py: Python<'_>, full: bool, seed: u64) -> Vec<(String, bool, f64, f64)> {
    let report = py.detach(|| run_suite(if full { Effort::Full } else { Effort::Quick }, seed));
    report.checks().map(|c| (c.name.clone(), c.passed, c.measured, c.tolerance)).collect()
}

#[pymodule]
fn lozenge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(distribution, m)?)?;
    m.add_function(wrap_pyfunction!(density, m)?)?;
    m.add_function(wrap_pyfunction!(sample_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(arctic, m)?)?;
    m.add_function(wrap_pyfunction!(solve_gap, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
