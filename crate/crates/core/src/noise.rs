//! Closed-form converter and noise models: pump-power conversion efficiency,
//! the RDC pedestal ensemble formula, the SPDC noise spectral density and the
//! measured-to-generated NSD bookkeeping used to compare converters.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::{SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::dispersion::ProcessSpec;
use crate::error::{Error, Result};

/// Converter parameters entering the pump power for full conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConverterParams {
    pub process: ProcessSpec,
    /// Effective nonlinear coefficient, pm/V.
    pub d_eff_pm_v: f64,
    pub length_mm: f64,
    /// Focusing reduction factor, 1 for plane waves.
    pub h_m: f64,
}

impl ConverterParams {
    pub fn new(process: ProcessSpec, d_eff_pm_v: f64, length_mm: f64, h_m: f64) -> Result<Self> {
        process.validate()?;
        if !(d_eff_pm_v > 0.0) {
            return Err(Error::Domain(format!(
                "d_eff must be positive, got {d_eff_pm_v}"
            )));
        }
        if !(length_mm > 0.0) {
            return Err(Error::Domain(format!(
                "length must be positive, got {length_mm}"
            )));
        }
        if !(h_m > 0.0 && h_m <= 1.0) {
            return Err(Error::Domain(format!("h_m must lie in (0, 1], got {h_m}")));
        }
        Ok(ConverterParams {
            process,
            d_eff_pm_v,
            length_mm,
            h_m,
        })
    }
}

/// `η_c = sin²((π/2)·√(P_P/P_max))`. Not clamped: beyond `P_max` the
/// efficiency oscillates back down.
pub fn conversion_efficiency(pump_w: f64, p_max_w: f64) -> Result<f64> {
    if !(pump_w >= 0.0) {
        return Err(Error::Domain(format!(
            "pump power must be non-negative, got {pump_w}"
        )));
    }
    if !(p_max_w > 0.0) {
        return Err(Error::Domain(format!(
            "P_max must be positive, got {p_max_w}"
        )));
    }
    Ok((0.5 * PI * (pump_w / p_max_w).sqrt()).sin().powi(2))
}

/// `P_max = c·ε₀·n_t·n_r·λ_t·λ_r·λ_p / (128·d_eff²·L·h_m)` in W.
pub fn p_max(params: &ConverterParams) -> f64 {
    let p = &params.process;
    let d = params.d_eff_pm_v * 1e-12;
    let l = params.length_mm * 1e-3;
    let nm = 1e-9;
    SPEED_OF_LIGHT
        * VACUUM_PERMITTIVITY
        * p.n_t
        * p.n_r
        * (p.lambda_t * nm)
        * (p.lambda_r * nm)
        * (p.lambda_p * nm)
        / (128.0 * d * d * l * params.h_m)
}

fn coherent_factor(sigma_bar: f64) -> f64 {
    (-PI * PI * sigma_bar * sigma_bar / 2.0).exp()
}

/// Ensemble-averaged efficiency at `x = ΔkL/π`:
/// `e^{−π²σ̄²/2}·sinc²(xπ/2) + (1 − e^{−π²σ̄²/2})/N_D`.
pub fn expected_noise_efficiency(x: f64, sigma_bar: f64, num_domains: u64) -> f64 {
    let u = 0.5 * PI * x;
    let sinc = if u == 0.0 { 1.0 } else { u.sin() / u };
    coherent_factor(sigma_bar) * sinc * sinc + pedestal_level(sigma_bar, num_domains)
}

/// Detuning-independent floor `(1 − e^{−π²σ̄²/2})/N_D`.
pub fn pedestal_level(sigma_bar: f64, num_domains: u64) -> f64 {
    // -expm1 keeps relative precision for small σ̄.
    -(-PI * PI * sigma_bar * sigma_bar / 2.0).exp_m1() / num_domains as f64
}

/// Inverse of [`pedestal_level`]: the largest σ̄ whose pedestal stays at or
/// below `floor`.
pub fn sigma_bound_from_floor(floor: f64, num_domains: u64) -> Result<f64> {
    let scaled = floor * num_domains as f64;
    if !(floor >= 0.0) {
        return Err(Error::Domain(format!(
            "noise floor must be non-negative, got {floor}"
        )));
    }
    if scaled >= 1.0 {
        return Err(Error::Unbounded { floor, num_domains });
    }
    Ok((-(2.0 / (PI * PI)) * (-scaled).ln_1p()).sqrt())
}

/// Noise spectral density of pump-induced SPDC in Hz per nm of target
/// wavelength, `(π²σ̄²/N_D)·(n_r/n_m)·(λ_r·c/(2·λ_m·λ_t²))·arcsin(√η_c)`.
///
/// There is deliberately no pump-power argument.
pub fn nsd_estimate(
    sigma_bar: f64,
    num_domains: u64,
    process: &ProcessSpec,
    eta_c: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta_c) {
        return Err(Error::Domain(format!(
            "eta_c must lie in [0, 1], got {eta_c}"
        )));
    }
    Ok(nsd_prefactor(sigma_bar, num_domains, process) * eta_c.sqrt().asin())
}

/// [`nsd_estimate`] without the `arcsin(√η_c)` factor, Hz/nm.
pub fn nsd_prefactor(sigma_bar: f64, num_domains: u64, process: &ProcessSpec) -> f64 {
    let m = 1e-9;
    let per_m = PI * PI * sigma_bar * sigma_bar / num_domains as f64
        * (process.n_r / process.n_m)
        * (process.lambda_r * m * SPEED_OF_LIGHT)
        / (2.0 * process.lambda_m * m * (process.lambda_t * m).powi(2));
    per_m * 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBudget {
    pub sigma_bar: f64,
    pub num_domains: u64,
    pub eta_c: f64,
    /// Hz/nm.
    pub nsd: f64,
}

pub fn noise_budget(
    sigma_bar: f64,
    num_domains: u64,
    process: &ProcessSpec,
    eta_c: f64,
) -> Result<NoiseBudget> {
    Ok(NoiseBudget {
        sigma_bar,
        num_domains,
        eta_c,
        nsd: nsd_estimate(sigma_bar, num_domains, process, eta_c)?,
    })
}

/// One published conversion experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionRecord {
    pub label: String,
    #[serde(rename = "bandwidth_nm")]
    pub detection_bandwidth_nm: f64,
    #[serde(rename = "noise_kcts_s")]
    pub measured_noise_kcts: f64,
    pub eta_filter: f64,
    pub eta_fc: f64,
    pub eta_detector: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsdPair {
    pub measured_mhz_nm: f64,
    pub generated_mhz_nm: f64,
}

/// Measured NSD (noise/bandwidth) and generated NSD (measured divided by
/// the filter, conversion and detector efficiencies), both in MHz/nm.
pub fn generated_nsd(record: &ConversionRecord) -> Result<NsdPair> {
    if !(record.detection_bandwidth_nm > 0.0) {
        return Err(Error::Domain(format!(
            "{}: detection bandwidth must be positive",
            record.label
        )));
    }
    let effs = [record.eta_filter, record.eta_fc, record.eta_detector];
    if effs.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(Error::Domain(format!(
            "{}: efficiencies must lie in (0, 1], got {effs:?}",
            record.label
        )));
    }
    // kcts/s per nm -> MHz/nm
    let measured = record.measured_noise_kcts / record.detection_bandwidth_nm * 1e-3;
    Ok(NsdPair {
        measured_mhz_nm: measured,
        generated_mhz_nm: measured / effs.iter().product::<f64>(),
    })
}

const BUILTIN_RECORDS: &str = include_str!("../data/converter_records.csv");

pub fn builtin_records() -> Vec<ConversionRecord> {
    parse_records(BUILTIN_RECORDS.as_bytes()).expect("bundled records parse")
}

pub fn load_records(path: &Path) -> Result<Vec<ConversionRecord>> {
    let f = std::fs::File::open(path)?;
    parse_records(f)
}

pub fn parse_records<R: std::io::Read>(reader: R) -> Result<Vec<ConversionRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// Records with their computed NSDs as CSV.
pub fn table_csv(records: &[ConversionRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "label",
        "bandwidth_nm",
        "noise_kcts_s",
        "eta_filter",
        "eta_fc",
        "eta_detector",
        "measured_nsd_mhz_nm",
        "generated_nsd_mhz_nm",
    ])?;
    for r in records {
        let nsd = generated_nsd(r)?;
        w.write_record([
            r.label.clone(),
            r.detection_bandwidth_nm.to_string(),
            r.measured_noise_kcts.to_string(),
            r.eta_filter.to_string(),
            r.eta_fc.to_string(),
            r.eta_detector.to_string(),
            nsd.measured_mhz_nm.to_string(),
            nsd.generated_mhz_nm.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Aligned text table; NSDs printed with one decimal in MHz/nm, or two
/// significant digits below 0.1.
pub fn table_text(records: &[ConversionRecord]) -> Result<String> {
    let mut out = format!(
        "{:<28} {:>12} {:>14} {:>14} {:>20} {:>15}\n",
        "", "Bandwidth", "Meas. noise", "Meas. NSD", "eta_f*eta_fc*eta_d", "Generated NSD"
    );
    for r in records {
        let nsd = generated_nsd(r)?;
        let effs = format!("{}*{}*{}", r.eta_filter, r.eta_fc, r.eta_detector);
        out.push_str(&format!(
            "{:<28} {:>9} nm {:>7} kcts/s {:>7} MHz/nm {:>20} {:>8} MHz/nm\n",
            r.label,
            r.detection_bandwidth_nm,
            r.measured_noise_kcts,
            format_mhz(nsd.measured_mhz_nm),
            effs,
            format_mhz(nsd.generated_mhz_nm),
        ));
    }
    Ok(out)
}

fn format_mhz(v: f64) -> String {
    if v < 0.1 {
        format!("{v:.2}")
    } else {
        format!("{v:.1}")
    }
}
