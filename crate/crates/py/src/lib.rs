//! Python bindings for the `onewave` solvers.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use onewave::analysis::{self, Provenance};
use onewave::model::Layer;
use onewave::symbols::{self, Region};
use onewave::{spectral, Config, FdSolver, OneWaySolver};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "VelocityModel", frozen)]
struct PyVelocityModel {
    inner: onewave::VelocityModel,
}

#[pymethods]
impl PyVelocityModel {
    #[new]
    #[pyo3(signature = (layers, z_max, delta = 0.0, rho = 1000.0))]
    fn new(layers: Vec<(f64, f64)>, z_max: f64, delta: f64, rho: f64) -> PyResult<Self> {
        let layers = layers.into_iter().map(|(z, c)| Layer::new(z, c)).collect();
        let inner = onewave::VelocityModel::new(layers, delta, rho, z_max).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn evaluate_speed(&self, z: f64) -> PyResult<f64> {
        self.inner.evaluate_speed(z).map_err(value_err)
    }

    fn cell_speeds(&self, dz: f64, nz: usize) -> Vec<f64> {
        self.inner.cell_speeds(dz, nz)
    }

    #[getter]
    fn depth(&self) -> f64 {
        self.inner.depth()
    }

    #[getter]
    fn density(&self) -> f64 {
        self.inner.density()
    }

    fn __repr__(&self) -> String {
        format!(
            "VelocityModel(layers={:?}, z_max={}, delta={})",
            self.inner.layers().iter().map(|l| (l.top, l.speed)).collect::<Vec<_>>(),
            self.inner.depth(),
            self.inner.smoothing_width()
        )
    }
}

#[pyclass(name = "Seismogram", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySeismogram {
    inner: onewave::Seismogram,
}

#[pymethods]
impl PySeismogram {
    #[getter]
    fn nt(&self) -> usize {
        self.inner.nt
    }

    #[getter]
    fn nx(&self) -> usize {
        self.inner.nx
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx
    }

    #[getter]
    fn receiver_depth(&self) -> f64 {
        self.inner.receiver_depth
    }

    #[getter]
    fn provenance(&self) -> &'static str {
        self.inner.provenance.as_str()
    }

    /// Rows of `nx` samples, one per time step.
    fn values(&self) -> Vec<Vec<f64>> {
        self.inner.values.chunks(self.inner.nx).map(<[f64]>::to_vec).collect()
    }

    fn trace(&self, ix: usize) -> PyResult<Vec<f64>> {
        if ix >= self.inner.nx {
            return Err(value_err(format!("trace {ix} out of range")));
        }
        Ok(self.inner.trace(ix))
    }

    fn amplitudes(&self) -> Vec<f64> {
        analysis::amplitude_vs_offset(&self.inner)
    }

    fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }

    #[pyo3(signature = (path, source_x = 0.0))]
    fn write(&self, path: PathBuf, source_x: f64) -> PyResult<()> {
        analysis::write_section(&path, &self.inner.to_section(source_x))
            .map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Seismogram(nt={}, nx={}, dt={}, dx={}, depth={}, provenance='{}')",
            self.inner.nt,
            self.inner.nx,
            self.inner.dt,
            self.inner.dx,
            self.inner.receiver_depth,
            self.inner.provenance.as_str()
        )
    }
}

/// A configured shot that can be modeled by either solver.
#[pyclass(name = "Simulation", frozen)]
struct PySimulation {
    config: Config,
}

#[pymethods]
impl PySimulation {
    #[new]
    fn new(toml_text: &str) -> PyResult<Self> {
        let config = Config::from_toml(toml_text).map_err(value_err)?;
        config.plan().map_err(value_err)?;
        Ok(Self { config })
    }

    #[staticmethod]
    fn from_path(path: PathBuf) -> PyResult<Self> {
        let config = Config::from_path(&path).map_err(value_err)?;
        config.plan().map_err(value_err)?;
        Ok(Self { config })
    }

    #[getter]
    fn source_x(&self) -> f64 {
        self.config.shot.source_x
    }

    #[pyo3(signature = (epsilon = None, multiples = None, transmission = None))]
    fn run_oneway(
        &self,
        py: Python<'_>,
        epsilon: Option<u8>,
        multiples: Option<usize>,
        transmission: Option<bool>,
    ) -> PyResult<PySeismogram> {
        let mut cfg = self.config.clone();
        if let Some(e) = epsilon {
            cfg.run.epsilon = e;
        }
        if let Some(n) = multiples {
            cfg.run.multiples = n;
        }
        if let Some(t) = transmission {
            cfg.run.transmission = t;
        }
        let plan = cfg.plan().map_err(value_err)?;
        let result = py
            .detach(|| OneWaySolver::new(plan).run())
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(PySeismogram { inner: result.total })
    }

    #[pyo3(signature = (refine = None))]
    fn run_fullwave(&self, py: Python<'_>, refine: Option<usize>) -> PyResult<PySeismogram> {
        let mut params = self.config.fullwave;
        if let Some(r) = refine {
            params.refine = r;
        }
        let plan = self.config.plan().map_err(value_err)?;
        let seis = py
            .detach(|| FdSolver::new(plan, params).and_then(|s| s.run()))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(PySeismogram { inner: seis })
    }
}

#[pyfunction]
fn ricker_rate(t: f64, peak_frequency: f64) -> f64 {
    spectral::ricker_rate(t, peak_frequency)
}

#[pyfunction]
fn ricker_source(t: f64, peak_frequency: f64) -> f64 {
    spectral::ricker_source(t, peak_frequency)
}

/// Returns `(gamma0, region)` with region one of "hyperbolic", "elliptic",
/// "glancing".
#[pyfunction]
fn vertical_slowness(c: f64, kx: f64, omega: f64) -> PyResult<(Complex64, &'static str)> {
    let s = symbols::classify_and_slowness(c, kx, omega).map_err(value_err)?;
    let region = match s.region {
        Region::Hyperbolic => "hyperbolic",
        Region::Elliptic => "elliptic",
        Region::Glancing => "glancing",
    };
    Ok((s.gamma0, region))
}

/// Returns `(t0_dz, r0_dz)`.
#[pyfunction]
fn interface_symbols(gamma_above: Complex64, gamma_below: Complex64) -> PyResult<(Complex64, Complex64)> {
    let s = symbols::interface_symbols(gamma_above, gamma_below).map_err(value_err)?;
    Ok((s.t0_dz, s.r0_dz))
}

/// Returns `(x, q, defined)`; undefined bins hold NaN.
#[pyfunction]
fn q_metric(full: &PySeismogram, oneway: &PySeismogram, shot_x: f64) -> PyResult<(Vec<f64>, Vec<f64>, Vec<bool>)> {
    let q = analysis::q_metric(&full.inner, &oneway.inner, shot_x).map_err(value_err)?;
    Ok((q.x, q.q, q.defined))
}

#[pyfunction]
fn read_section(path: PathBuf) -> PyResult<PySeismogram> {
    let section = analysis::read_section(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
    if !matches!(section.provenance, Provenance::OneWay | Provenance::FullWave) {
        return Err(value_err("section is not a seismogram"));
    }
    let inner = onewave::Seismogram::from_section(section).map_err(value_err)?;
    Ok(PySeismogram { inner })
}

#[pymodule]
fn pyonewave(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVelocityModel>()?;
    m.add_class::<PySeismogram>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(ricker_rate, m)?)?;
    m.add_function(wrap_pyfunction!(ricker_source, m)?)?;
    m.add_function(wrap_pyfunction!(vertical_slowness, m)?)?;
    m.add_function(wrap_pyfunction!(interface_symbols, m)?)?;
    m.add_function(wrap_pyfunction!(q_metric, m)?)?;
    m.add_function(wrap_pyfunction!(read_section, m)?)?;
    Ok(())
}
