//! Python bindings for `qpm_rdc`.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qpm_rdc::analysis::{
    estimate_rdc_bound, normalize_peak, synthesize_scan, to_detuning_axis, BoundOptions, Etalon,
    ScanGrid, ScanNoise,
};
use qpm_rdc::dispersion::{
    map_wavelength_to_detuning, qpm_period, ProcessSpec, SellmeierModel, SellmeierRegistry,
};
use qpm_rdc::grating::{
    efficiency_values, ensemble_mean_with, sample_rdc_structure, GratingSpec, SpectrumModel,
};
use qpm_rdc::noise;
use qpm_rdc::spectrum::{AxisKind, EfficiencySpectrum};
use qpm_rdc::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn model(name: Option<&str>) -> PyResult<SellmeierModel> {
    let registry = SellmeierRegistry::builtin();
    match name {
        Some(n) => registry.get(n).cloned().map_err(py_err),
        None => Ok(registry.default_model().clone()),
    }
}

fn spectrum_model(name: &str) -> PyResult<SpectrumModel> {
    name.parse().map_err(PyValueError::new_err)
}

fn to_py_json<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Names of the bundled Sellmeier sets; the first is the default.
#[pyfunction]
fn sellmeier_names() -> Vec<String> {
    let registry = SellmeierRegistry::builtin();
    let default = registry.default_model().name.clone();
    let mut names: Vec<String> = registry.names().into_iter().map(String::from).collect();
    names.retain(|n| *n != default);
    names.insert(0, default);
    names
}

#[pyfunction]
#[pyo3(signature = (wavelength_nm, sellmeier=None))]
fn refractive_index(wavelength_nm: f64, sellmeier: Option<&str>) -> PyResult<f64> {
    model(sellmeier)?
        .refractive_index(wavelength_nm)
        .map_err(py_err)
}

/// QPM period, domain length and domain count as a dict.
#[pyfunction]
#[pyo3(signature = (pump_nm=1064.5, target_nm=1589.0, length_mm=20.0, sellmeier=None))]
fn design<'py>(
    py: Python<'py>,
    pump_nm: f64,
    target_nm: f64,
    length_mm: f64,
    sellmeier: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let process = ProcessSpec::from_pump_and_target(&model(sellmeier)?, pump_nm, target_nm)
        .map_err(py_err)?;
    let d = qpm_period(&process, length_mm).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("period_um", d.period_um)?;
    out.set_item("domain_um", d.domain_um)?;
    out.set_item("num_domains", d.num_domains)?;
    out.set_item("delta_k_per_m", d.delta_k_per_m)?;
    out.set_item("process", to_py_json(py, &process)?)?;
    Ok(out.into_any())
}

/// Nominal grating with a random duty-cycle error σ̄.
#[pyclass(name = "Grating", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrating {
    inner: GratingSpec,
}

#[pymethods]
impl PyGrating {
    #[new]
    #[pyo3(signature = (domain_um=7.85, num_domains=2550, sigma_bar=0.0))]
    fn new(domain_um: f64, num_domains: u64, sigma_bar: f64) -> PyResult<Self> {
        Ok(PyGrating {
            inner: GratingSpec::new(domain_um, num_domains, sigma_bar).map_err(py_err)?,
        })
    }

    /// Grating matched to a pump/target pair by the chosen dispersion.
    #[staticmethod]
    #[pyo3(signature = (pump_nm=1064.5, target_nm=1589.0, length_mm=20.0, sigma_bar=0.0, sellmeier=None))]
    fn designed(
        pump_nm: f64,
        target_nm: f64,
        length_mm: f64,
        sigma_bar: f64,
        sellmeier: Option<&str>,
    ) -> PyResult<Self> {
        let process = ProcessSpec::from_pump_and_target(&model(sellmeier)?, pump_nm, target_nm)
            .map_err(py_err)?;
        let d = qpm_period(&process, length_mm).map_err(py_err)?;
        Ok(PyGrating {
            inner: GratingSpec::from_design(&d, sigma_bar).map_err(py_err)?,
        })
    }

    #[getter]
    fn domain_um(&self) -> f64 {
        self.inner.domain_um
    }

    #[getter]
    fn num_domains(&self) -> u64 {
        self.inner.num_domains
    }

    #[getter]
    fn sigma_bar(&self) -> f64 {
        self.inner.sigma_bar
    }

    #[getter]
    fn length_mm(&self) -> f64 {
        self.inner.length_mm()
    }

    /// Domain boundaries in metres of one sampled realization.
    fn sample_boundaries(&self, py: Python<'_>, seed: u64) -> PyResult<Vec<f64>> {
        let s = py
            .detach(|| sample_rdc_structure(&self.inner, seed))
            .map_err(py_err)?;
        Ok(s.boundaries().to_vec())
    }

    /// Normalized efficiency of one realization at each detuning `x = ΔkL/π`.
    #[pyo3(signature = (detunings, seed=0, model="first-order"))]
    fn spectrum(
        &self,
        py: Python<'_>,
        detunings: Vec<f64>,
        seed: u64,
        model: &str,
    ) -> PyResult<Vec<f64>> {
        let m = spectrum_model(model)?;
        let spec = self.inner;
        py.detach(move || {
            let s = sample_rdc_structure(&spec, seed)?;
            Ok(efficiency_values(&s, &spec, &detunings, m))
        })
        .map_err(py_err)
    }

    /// Monte Carlo ensemble mean with standard errors and the analytic
    /// pedestal formula on the same detunings.
    #[pyo3(signature = (detunings, trials=2000, seed=0, model="first-order"))]
    fn ensemble<'py>(
        &self,
        py: Python<'py>,
        detunings: Vec<f64>,
        trials: u64,
        seed: u64,
        model: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let m = spectrum_model(model)?;
        let spec = self.inner;
        let xs = detunings.clone();
        let r = py
            .detach(move || ensemble_mean_with(&spec, &xs, trials, seed, m))
            .map_err(py_err)?;
        let analytic: Vec<f64> = detunings
            .iter()
            .map(|&x| noise::expected_noise_efficiency(x, spec.sigma_bar, spec.num_domains))
            .collect();
        let out = PyDict::new(py);
        out.set_item("detunings", detunings)?;
        out.set_item("mean", r.mean_efficiency)?;
        out.set_item("std_error", r.std_error)?;
        out.set_item("analytic", analytic)?;
        out.set_item("trials", trials)?;
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Grating(domain_um={}, num_domains={}, sigma_bar={})",
            self.inner.domain_um, self.inner.num_domains, self.inner.sigma_bar
        )
    }
}

#[pyfunction]
fn expected_noise_efficiency(x: f64, sigma_bar: f64, num_domains: u64) -> f64 {
    noise::expected_noise_efficiency(x, sigma_bar, num_domains)
}

#[pyfunction]
fn pedestal_level(sigma_bar: f64, num_domains: u64) -> f64 {
    noise::pedestal_level(sigma_bar, num_domains)
}

#[pyfunction]
fn sigma_bound_from_floor(floor: f64, num_domains: u64) -> PyResult<f64> {
    noise::sigma_bound_from_floor(floor, num_domains).map_err(py_err)
}

/// Noise spectral density in Hz/nm.
#[pyfunction]
#[pyo3(signature = (sigma_bar, num_domains=2550, eta_c=1.0, pump_nm=1064.5, target_nm=1589.0, sellmeier=None))]
fn nsd(
    sigma_bar: f64,
    num_domains: u64,
    eta_c: f64,
    pump_nm: f64,
    target_nm: f64,
    sellmeier: Option<&str>,
) -> PyResult<f64> {
    let process = ProcessSpec::from_pump_and_target(&model(sellmeier)?, pump_nm, target_nm)
        .map_err(py_err)?;
    noise::nsd_estimate(sigma_bar, num_domains, &process, eta_c).map_err(py_err)
}

/// Detuning `x` seen by an input wavelength for a grating.
#[pyfunction]
#[pyo3(signature = (wavelength_nm, grating, pump_nm=1064.5, sellmeier=None))]
fn detuning(
    wavelength_nm: f64,
    grating: &PyGrating,
    pump_nm: f64,
    sellmeier: Option<&str>,
) -> PyResult<f64> {
    map_wavelength_to_detuning(wavelength_nm, pump_nm, &grating.inner, &model(sellmeier)?)
        .map_err(py_err)
}

/// Synthetic scan as `(wavelengths_nm, efficiency)`.
#[pyfunction]
#[pyo3(signature = (
    grating, seed=0, pump_nm=1064.5, start_nm=1600.0, stop_nm=1370.0, step_nm=0.1,
    relative_std=0.1, additive_floor=1e-8, etalon_amplitude=0.2, etalon_period_nm=5.0,
    etalon_phase=qpm_rdc::analysis::DEFAULT_ETALON_PHASE, sellmeier=None
))]
#[allow(clippy::too_many_arguments)]
fn synthesize<'py>(
    py: Python<'py>,
    grating: &PyGrating,
    seed: u64,
    pump_nm: f64,
    start_nm: f64,
    stop_nm: f64,
    step_nm: f64,
    relative_std: f64,
    additive_floor: f64,
    etalon_amplitude: f64,
    etalon_period_nm: f64,
    etalon_phase: f64,
    sellmeier: Option<&str>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let m = model(sellmeier)?;
    let scan = ScanGrid {
        start_nm,
        stop_nm,
        step_nm,
    };
    let noise = ScanNoise {
        relative_std,
        additive_floor,
        etalon: Etalon {
            amplitude: etalon_amplitude,
            period_nm: etalon_period_nm,
            phase: etalon_phase,
        },
    };
    let spec = grating.inner;
    let s = py
        .detach(move || {
            synthesize_scan(
                &spec,
                &m,
                pump_nm,
                &scan,
                &noise,
                seed,
                SpectrumModel::FirstOrder,
            )
        })
        .map_err(py_err)?;
    Ok((s.axis().to_vec(), s.efficiency().to_vec()))
}

/// Bound σ̄ from a wavelength-axis scan; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (wavelengths_nm, efficiency, grating, pump_nm=1064.5, target_nm=1589.0, sellmeier=None))]
fn analyze<'py>(
    py: Python<'py>,
    wavelengths_nm: Vec<f64>,
    efficiency: Vec<f64>,
    grating: &PyGrating,
    pump_nm: f64,
    target_nm: f64,
    sellmeier: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    if wavelengths_nm.len() != efficiency.len() {
        return Err(PyValueError::new_err(
            "wavelengths and efficiency differ in length",
        ));
    }
    let m = model(sellmeier)?;
    let spec = grating.inner;
    let report = py
        .detach(move || {
            let raw = EfficiencySpectrum::new(
                AxisKind::WavelengthNm,
                wavelengths_nm.into_iter().zip(efficiency).collect(),
            )?;
            let detuned = normalize_peak(&to_detuning_axis(&raw, pump_nm, &spec, &m)?)?;
            let process = ProcessSpec::from_pump_and_target(&m, pump_nm, target_nm)?;
            estimate_rdc_bound(&detuned, &spec, &process, &BoundOptions::default())
        })
        .map_err(py_err)?;
    to_py_json(py, &report)
}

/// Measured and generated NSD of the bundled converter records.
#[pyfunction]
fn converter_table<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let rows = noise::builtin_records()
        .into_iter()
        .map(|r| {
            let n = noise::generated_nsd(&r)?;
            Ok(serde_json::json!({
                "label": r.label,
                "measured_mhz_nm": n.measured_mhz_nm,
                "generated_mhz_nm": n.generated_mhz_nm,
            }))
        })
        .collect::<qpm_rdc::Result<Vec<_>>>()
        .map_err(py_err)?;
    to_py_json(py, &rows)
}

#[pymodule]
fn qpmrdc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrating>()?;
    m.add_function(wrap_pyfunction!(sellmeier_names, m)?)?;
    m.add_function(wrap_pyfunction!(refractive_index, m)?)?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    m.add_function(wrap_pyfunction!(expected_noise_efficiency, m)?)?;
    m.add_function(wrap_pyfunction!(pedestal_level, m)?)?;
    m.add_function(wrap_pyfunction!(sigma_bound_from_floor, m)?)?;
    m.add_function(wrap_pyfunction!(nsd, m)?)?;
    m.add_function(wrap_pyfunction!(detuning, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(converter_table, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
