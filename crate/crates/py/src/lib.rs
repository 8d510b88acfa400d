//! Python bindings for `randomset_core`.

use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

use randomset_core::brownian::{self, SeedParams};
use randomset_core::closedset;
use randomset_core::poisson;
use randomset_core::rng::{par_draws, substream};
use randomset_core::{specfun, tilt, verify, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::UnknownCheck(id) => PyKeyError::new_err(id),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Finite union of closed intervals in `[0, horizon]`.
#[pyclass(name = "ClosedSet", module = "randomset_lab", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyClosedSet(closedset::ClosedSet);

#[pymethods]
impl PyClosedSet {
    #[new]
    #[pyo3(signature = (horizon, intervals=vec![]))]
    fn new(horizon: f64, intervals: Vec<(f64, f64)>) -> PyResult<Self> {
        closedset::ClosedSet::new(horizon, intervals).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse().map(Self).map_err(py_err)
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    #[getter]
    fn intervals(&self) -> Vec<(f64, f64)> {
        self.0.intervals().to_vec()
    }

    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn anchor(&self) -> f64 {
        self.0.anchor()
    }

    fn sup(&self) -> Option<f64> {
        self.0.sup()
    }

    fn diam(&self) -> f64 {
        self.0.diam()
    }

    fn concat(&self, other: &Self) -> Self {
        Self(self.0.concat(&other.0))
    }

    fn restrict(&self, a: f64, b: f64) -> PyResult<Self> {
        self.0.restrict(a, b).map(Self).map_err(py_err)
    }

    fn scale(&self, new_horizon: f64) -> PyResult<Self> {
        self.0.scale(new_horizon).map(Self).map_err(py_err)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("ClosedSet({:?})", self.0.to_string())
    }
}

/// Marked Poisson process with rate `lam` and mark weights.
#[pyclass(name = "PoissonModel", module = "randomset_lab", frozen)]
struct PyPoissonModel(poisson::PoissonModel);

fn mark_fn(values: Vec<f64>) -> PyResult<poisson::MarkFunction> {
    poisson::MarkFunction::new(values).map_err(py_err)
}

#[pymethods]
impl PyPoissonModel {
    #[new]
    #[pyo3(signature = (lam, weights=vec![1.0]))]
    fn new(lam: f64, weights: Vec<f64>) -> PyResult<Self> {
        poisson::PoissonModel::new(lam, weights).map(Self).map_err(py_err)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    /// `n` samples on `(0, t)` as lists of `(time, mark)`.
    #[pyo3(signature = (t, n, seed))]
    fn sample(&self, t: f64, n: usize, seed: u64) -> PyResult<Vec<Vec<(f64, usize)>>> {
        poisson::sample_poisson(&self.0, t, &mut substream(seed, 0)).map_err(py_err)?;
        Ok(par_draws(seed, n, |r| poisson::sample_poisson(&self.0, t, r).expect("validated"))
            .into_iter()
            .map(|z| z.atoms().iter().map(|a| (a.time, a.mark)).collect())
            .collect())
    }

    fn unit_family(&self, a: Vec<f64>) -> PyResult<Self> {
        self.0.unit_family(&mark_fn(a)?).map(Self).map_err(py_err)
    }

    fn unit_inner_product(&self, a: Vec<f64>, b: Vec<f64>, t: f64) -> PyResult<f64> {
        poisson::unit_inner_product(&self.0, &mark_fn(a)?, &mark_fn(b)?, t).map_err(py_err)
    }

    fn covariance_kernel(&self, a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
        poisson::covariance_kernel(&self.0, &mark_fn(a)?, &mark_fn(b)?).map_err(py_err)
    }

    fn void_probability(&self, t: f64, interval_len: f64, mark_weight: f64) -> PyResult<f64> {
        poisson::void_probability(&self.0, t, interval_len, mark_weight).map_err(py_err)
    }

    /// Index Gram matrix as nested lists.
    fn index_gram(&self, fns: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let fns = fns.into_iter().map(mark_fn).collect::<PyResult<Vec<_>>>()?;
        let g = poisson::index_gram(&self.0, &fns).map_err(py_err)?;
        Ok((0..g.nrows()).map(|i| g.row(i).iter().copied().collect()).collect())
    }
}

/// Tilted arcsine law `μ_{T,c}`.
#[pyclass(name = "TiltedArcsine", module = "randomset_lab", frozen)]
struct PyTiltedArcsine(tilt::TiltedArcsine);

#[pymethods]
impl PyTiltedArcsine {
    #[new]
    fn new(t: f64, c: f64) -> PyResult<Self> {
        tilt::TiltedArcsine::new(t, c).map(Self).map_err(py_err)
    }

    #[getter]
    fn normalizer(&self) -> f64 {
        self.0.normalizer()
    }

    fn pdf(&self, g: f64) -> f64 {
        self.0.pdf(g)
    }

    fn cdf(&self, g: f64) -> PyResult<f64> {
        self.0.cdf(g).map_err(py_err)
    }

    fn tail(&self, r: f64) -> PyResult<f64> {
        self.0.tail(r).map_err(py_err)
    }

    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        let (t, c) = (self.0.horizon(), self.0.rate());
        tilt::sample_tilted_arcsine(t, c, &mut substream(seed, 0)).map_err(py_err)?;
        Ok(par_draws(seed, n, |r| tilt::sample_tilted_arcsine(t, c, r).expect("validated")))
    }
}

type Summary = Option<(f64, f64)>;

fn summary_tuple(z: &brownian::BrownianZeroSummary) -> Summary {
    z.span.map(|s| (s.alpha, s.g_last))
}

/// Zero-set summaries `(alpha, g_last)` or `None` for an empty set.
#[pyfunction]
fn sample_zero_summary(a: f64, t: f64, n: usize, seed: u64) -> PyResult<Vec<Summary>> {
    brownian::sample_zero_summary(a, t, &mut substream(seed, 0)).map_err(py_err)?;
    Ok(par_draws(seed, n, |r| brownian::sample_zero_summary(a, t, r).expect("validated")).iter().map(summary_tuple).collect())
}

/// Seed samples `(alpha, g_last)` or `None`.
#[pyfunction]
fn sample_seed(a: f64, beta: f64, t: f64, n: usize, seed: u64) -> PyResult<Vec<Summary>> {
    let p = SeedParams::new(a, beta).map_err(py_err)?;
    tilt::sample_seed(&p, t, &mut substream(seed, 0)).map_err(py_err)?;
    Ok(par_draws(seed, n, |r| tilt::sample_seed(&p, t, r).expect("validated")).iter().map(summary_tuple).collect())
}

/// Density of the seed against the plain zero-set law at one summary.
#[pyfunction]
#[pyo3(signature = (a, beta, t, summary=None))]
fn seed_density(a: f64, beta: f64, t: f64, summary: Summary) -> PyResult<f64> {
    let p = SeedParams::new(a, beta).map_err(py_err)?;
    let z = match summary {
        None => brownian::BrownianZeroSummary::empty(t),
        Some((alpha, g)) => brownian::BrownianZeroSummary::new(t, alpha, g).map_err(py_err)?,
    };
    tilt::seed_density(&p, t, &z).map_err(py_err)
}

#[pyfunction]
fn bessel_i0(x: f64) -> PyResult<f64> {
    specfun::bessel_i0(x).map_err(py_err)
}

#[pyfunction]
fn arcsine_phi(c: f64, t: f64) -> f64 {
    specfun::arcsine_phi(c, t)
}

#[pyfunction]
fn hitting_survival(a: f64, t: f64) -> PyResult<f64> {
    specfun::hitting_survival(a, t).map_err(py_err)
}

#[pyfunction]
fn vacuum_overlap(beta: f64, t: f64) -> f64 {
    tilt::vacuum_overlap(beta, t)
}

/// Partial products of `exp(-β t/(2n))`.
#[pyfunction]
fn kakutani_product(beta: f64, t: f64, n: usize) -> PyResult<Vec<f64>> {
    verify::kakutani_product(beta, t, verify::Dilation::Harmonic, n).map(|k| k.partial_products).map_err(py_err)
}

/// Run one check with default grids; returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (check_id, seed, n_samples=100_000, block_n=100_000))]
fn run_check(py: Python<'_>, check_id: &str, seed: u64, n_samples: usize, block_n: usize) -> PyResult<String> {
    let grids = verify::Grids { block_n, ..verify::Grids::default() };
    let rep = py.detach(|| verify::run_check(check_id, &grids, n_samples, seed)).map_err(py_err)?;
    Ok(rep.to_json().to_string())
}

#[pymodule]
fn randomset_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyClosedSet>()?;
    m.add_class::<PyPoissonModel>()?;
    m.add_class::<PyTiltedArcsine>()?;
    m.add_function(wrap_pyfunction!(sample_zero_summary, m)?)?;
    m.add_function(wrap_pyfunction!(sample_seed, m)?)?;
    m.add_function(wrap_pyfunction!(seed_density, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i0, m)?)?;
    m.add_function(wrap_pyfunction!(arcsine_phi, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_survival, m)?)?;
    m.add_function(wrap_pyfunction!(vacuum_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(kakutani_product, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    m.add("CHECK_IDS", verify::CHECK_IDS.to_vec())?;
    Ok(())
}
