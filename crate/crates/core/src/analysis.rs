//! Scan analysis: normalization, moving averages, log-log roll-off fits,
//! pedestal bounds and synthetic scans.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::constants::{
    COMPARED_SIGMAS, DEFAULT_DETUNING_WINDOW, DEFAULT_FAR_WINDOW, DEFAULT_FIT_WINDOW,
};
use crate::dispersion::{map_wavelength_to_detuning, ProcessSpec, SellmeierModel};
use crate::error::{Error, Result};
use crate::grating::{
    efficiency_values, sample_rdc_structure, stream_rng, GratingSpec, SpectrumModel, NOISE_STREAM,
};
use crate::noise::{expected_noise_efficiency, nsd_estimate, sigma_bound_from_floor};
use crate::spectrum::{AxisKind, EfficiencySpectrum};

/// Divides by the maximum so the peak reads exactly 1.
pub fn normalize_peak(spectrum: &EfficiencySpectrum) -> Result<EfficiencySpectrum> {
    let peak = spectrum.efficiency().iter().copied().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Data(
            "cannot normalize a spectrum without positive points".into(),
        ));
    }
    let mut out = spectrum.with_values(spectrum.efficiency().iter().map(|e| e / peak).collect());
    out.normalized = true;
    Ok(out)
}

/// Centered boxcar mean over all points within `±window/2` on the axis.
/// Windows are truncated at the ends of the data.
pub fn moving_average(spectrum: &EfficiencySpectrum, window: f64) -> EfficiencySpectrum {
    let axis = spectrum.axis();
    let eff = spectrum.efficiency();
    let half = 0.5 * window;
    let mut lo = 0;
    let mut hi = 0;
    let mut out = Vec::with_capacity(axis.len());
    for &a in axis {
        while axis[lo] < a - half {
            lo += 1;
        }
        while hi + 1 < axis.len() && axis[hi + 1] <= a + half {
            hi += 1;
        }
        let sum: f64 = eff[lo..=hi].iter().sum();
        out.push(sum / (hi - lo + 1) as f64);
    }
    spectrum
        .with_values(out)
        .with_meta("moving_average_window", window)
}

/// Least-squares line through `(log10 axis, log10 efficiency)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    /// log10 units.
    pub intercept: f64,
    pub residuals: Vec<f64>,
    pub window: (f64, f64),
    pub points_used: usize,
    /// Points in the window dropped for a non-positive axis or efficiency.
    pub excluded: usize,
}

pub const MIN_FIT_POINTS: usize = 10;

pub fn loglog_fit(spectrum: &EfficiencySpectrum, window: (f64, f64)) -> Result<FitResult> {
    let range = spectrum.index_range(window.0, window.1);
    let mut excluded = 0;
    let mut xs = Vec::with_capacity(range.len());
    let mut ys = Vec::with_capacity(range.len());
    for i in range {
        let (a, e) = (spectrum.axis()[i], spectrum.efficiency()[i]);
        if a > 0.0 && e > 0.0 {
            xs.push(a.log10());
            ys.push(e.log10());
        } else {
            excluded += 1;
        }
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!(
            "{} usable points in [{}, {}], need {MIN_FIT_POINTS}",
            xs.len(),
            window.0,
            window.1
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all fit points share one axis value".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    Ok(FitResult {
        slope,
        intercept,
        residuals,
        window,
        points_used: xs.len(),
        excluded,
    })
}

/// Re-expresses a wavelength-axis scan on the detuning axis `x = ΔkL/π`.
pub fn to_detuning_axis(
    spectrum: &EfficiencySpectrum,
    pump_nm: f64,
    grating: &GratingSpec,
    model: &SellmeierModel,
) -> Result<EfficiencySpectrum> {
    if spectrum.axis_kind != AxisKind::WavelengthNm {
        return Err(Error::Data("expected a wavelength-axis spectrum".into()));
    }
    let points = spectrum
        .points()
        .map(|(nm, e)| Ok((map_wavelength_to_detuning(nm, pump_nm, grating, model)?, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = EfficiencySpectrum::new(AxisKind::DetuningX, points)?;
    out.normalized = spectrum.normalized;
    out.meta = spectrum.meta.clone();
    Ok(out
        .with_meta("pump_nm", pump_nm)
        .with_meta("sellmeier", model.name.clone())
        .with_meta("grating", serde_json::to_value(grating)?))
}

/// Input scan grid in nm. Either direction is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub start_nm: f64,
    pub stop_nm: f64,
    pub step_nm: f64,
}

impl ScanGrid {
    pub fn reference() -> Self {
        use crate::constants::*;
        ScanGrid {
            start_nm: DEFAULT_SCAN_START_NM,
            stop_nm: DEFAULT_SCAN_STOP_NM,
            step_nm: DEFAULT_SCAN_STEP_NM,
        }
    }

    /// Grid wavelengths, ascending.
    pub fn wavelengths(&self) -> Result<Vec<f64>> {
        if !(self.step_nm > 0.0) {
            return Err(Error::Config(format!(
                "scan step must be positive, got {}",
                self.step_nm
            )));
        }
        let lo = self.start_nm.min(self.stop_nm);
        let hi = self.start_nm.max(self.stop_nm);
        let n = ((hi - lo) / self.step_nm + 1e-6).floor() as usize + 1;
        Ok((0..n).map(|i| lo + i as f64 * self.step_nm).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Etalon {
    pub amplitude: f64,
    pub period_nm: f64,
    pub phase: f64,
}

/// Puts a ripple node at the default 1589 nm target, so the default ripple
/// does not rescale the peak used for normalization.
pub const DEFAULT_ETALON_PHASE: f64 = 0.4 * std::f64::consts::PI;

/// Measurement imperfections added to synthetic scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanNoise {
    pub relative_std: f64,
    pub additive_floor: f64,
    pub etalon: Etalon,
}

impl Default for ScanNoise {
    fn default() -> Self {
        ScanNoise {
            relative_std: 0.1,
            additive_floor: 1e-8,
            etalon: Etalon {
                amplitude: 0.2,
                period_nm: 5.0,
                phase: DEFAULT_ETALON_PHASE,
            },
        }
    }
}

impl ScanNoise {
    pub fn none() -> Self {
        ScanNoise {
            relative_std: 0.0,
            additive_floor: 0.0,
            etalon: Etalon {
                amplitude: 0.0,
                period_nm: 5.0,
                phase: 0.0,
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.etalon.amplitude) {
            return Err(Error::Config(format!(
                "etalon amplitude must lie in [0, 1), got {}",
                self.etalon.amplitude
            )));
        }
        if !(self.etalon.period_nm > 0.0) {
            return Err(Error::Config("etalon period must be positive".into()));
        }
        if !(self.relative_std >= 0.0) || !(self.additive_floor >= 0.0) {
            return Err(Error::Config("noise levels must be non-negative".into()));
        }
        Ok(())
    }
}

/// Simulated SFG scan of one RDC realization on a wavelength grid.
///
/// Per point: efficiency of the realization at the mapped detuning, times
/// the etalon ripple `1 + a·sin(2πλ/P + φ)`, times `1 + relative_std·ξ`,
/// plus `additive_floor`, clamped at zero. Output axis is ascending.
pub fn synthesize_scan(
    grating: &GratingSpec,
    model: &SellmeierModel,
    pump_nm: f64,
    scan: &ScanGrid,
    noise: &ScanNoise,
    seed: u64,
    spectrum_model: SpectrumModel,
) -> Result<EfficiencySpectrum> {
    noise.validate()?;
    let wavelengths = scan.wavelengths()?;
    let detunings = wavelengths
        .iter()
        .map(|&nm| map_wavelength_to_detuning(nm, pump_nm, grating, model))
        .collect::<Result<Vec<_>>>()?;
    let structure = sample_rdc_structure(grating, seed)?;
    let clean = efficiency_values(&structure, grating, &detunings, spectrum_model);

    let mut rng = stream_rng(seed, NOISE_STREAM, 0);
    let et = noise.etalon;
    let points = wavelengths
        .iter()
        .zip(clean)
        .map(|(&nm, eta)| {
            let ripple =
                1.0 + et.amplitude * (std::f64::consts::TAU * nm / et.period_nm + et.phase).sin();
            let xi: f64 = StandardNormal.sample(&mut rng);
            let v = eta * ripple * (1.0 + noise.relative_std * xi) + noise.additive_floor;
            (nm, v.max(0.0))
        })
        .collect();
    Ok(EfficiencySpectrum::new(AxisKind::WavelengthNm, points)?
        .with_meta("generator", "synthesize_scan")
        .with_meta("seed", seed)
        .with_meta("grating", serde_json::to_value(grating)?)
        .with_meta("sellmeier", model.name.clone())
        .with_meta("pump_nm", pump_nm)
        .with_meta("scan", serde_json::to_value(scan)?)
        .with_meta("noise", serde_json::to_value(noise)?)
        .with_meta("spectrum_model", serde_json::to_value(spectrum_model)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundOptions {
    /// Detuning interval searched for a pedestal.
    pub far_window: (f64, f64),
    /// Moving-average width in detuning units.
    pub averaging_window: f64,
    pub fit_window: (f64, f64),
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions {
            far_window: DEFAULT_FAR_WINDOW,
            averaging_window: DEFAULT_DETUNING_WINDOW,
            fit_window: DEFAULT_FIT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaComparison {
    pub sigma_bar: f64,
    /// Largest `log10(measured/predicted)` of the moving averages over the far
    /// window; negative when the data stay below the prediction throughout.
    pub max_log10_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RdcReport {
    /// Mean normalized efficiency over the far window.
    pub noise_floor: f64,
    /// Largest moving-average value inside the far window.
    pub max_moving_average: f64,
    /// `None` when the floor is too high to constrain σ̄.
    pub sigma_bound: Option<f64>,
    pub unbounded: bool,
    /// Fit of the normalized data.
    pub fit: FitResult,
    /// Fit of the moving average; absent if too few points survive.
    pub moving_average_fit: Option<FitResult>,
    /// Hz/nm at full conversion for σ̄ = `sigma_bound`.
    pub predicted_nsd: Option<f64>,
    pub compared_sigmas: Vec<SigmaComparison>,
    pub grating: GratingSpec,
    pub process: ProcessSpec,
    pub options: BoundOptions,
    pub points: usize,
}

/// Bounds σ̄ from the absence of a pedestal in a normalized detuning-axis
/// scan.
pub fn estimate_rdc_bound(
    spectrum: &EfficiencySpectrum,
    grating: &GratingSpec,
    process: &ProcessSpec,
    options: &BoundOptions,
) -> Result<RdcReport> {
    if spectrum.axis_kind != AxisKind::DetuningX {
        return Err(Error::Data(
            "pedestal bound needs a detuning-axis spectrum".into(),
        ));
    }
    if !spectrum.normalized {
        return Err(Error::Data(
            "pedestal bound needs a peak-normalized spectrum".into(),
        ));
    }
    let (lo, hi) = options.far_window;
    let far = spectrum.index_range(lo, hi);
    if far.is_empty() {
        return Err(Error::Data(format!(
            "no data inside far window [{lo}, {hi}]"
        )));
    }
    let eff = spectrum.efficiency();
    let noise_floor = eff[far.clone()].iter().sum::<f64>() / far.len() as f64;

    let averaged = moving_average(spectrum, options.averaging_window);
    let max_moving_average = averaged.efficiency()[far.clone()]
        .iter()
        .copied()
        .fold(0.0, f64::max);

    let (sigma_bound, unbounded) = match sigma_bound_from_floor(noise_floor, grating.num_domains) {
        Ok(s) => (Some(s), false),
        Err(Error::Unbounded { .. }) => (None, true),
        Err(e) => return Err(e),
    };

    let compared_sigmas = COMPARED_SIGMAS
        .iter()
        .map(|&sigma| {
            let predicted = spectrum.with_values(
                spectrum
                    .axis()
                    .iter()
                    .map(|&x| expected_noise_efficiency(x, sigma, grating.num_domains))
                    .collect(),
            );
            let predicted = moving_average(&predicted, options.averaging_window);
            let excess = far
                .clone()
                .map(|i| (averaged.efficiency()[i] / predicted.efficiency()[i]).log10())
                .fold(f64::NEG_INFINITY, f64::max);
            SigmaComparison {
                sigma_bar: sigma,
                max_log10_excess: excess,
            }
        })
        .collect();

    let predicted_nsd = match sigma_bound {
        Some(s) => Some(nsd_estimate(s, grating.num_domains, process, 1.0)?),
        None => None,
    };

    Ok(RdcReport {
        noise_floor,
        max_moving_average,
        sigma_bound,
        unbounded,
        fit: loglog_fit(spectrum, options.fit_window)?,
        moving_average_fit: loglog_fit(&averaged, options.fit_window).ok(),
        predicted_nsd,
        compared_sigmas,
        grating: *grating,
        process: *process,
        options: *options,
        points: spectrum.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spectrum(points: Vec<(f64, f64)>) -> EfficiencySpectrum {
        EfficiencySpectrum::new(AxisKind::DetuningX, points).unwrap()
    }

    #[test]
    fn normalize() {
        let s = spectrum(vec![(0.0, 2.0), (1.0, 4.0), (2.0, 1.0)]);
        let n = normalize_peak(&s).unwrap();
        assert_eq!(n.efficiency(), &[0.5, 1.0, 0.25]);
        assert!(n.normalized);
        assert_eq!(normalize_peak(&n).unwrap().efficiency(), n.efficiency());
        let c = normalize_peak(&spectrum(vec![(0.0, 3.0), (1.0, 3.0)])).unwrap();
        assert_eq!(c.efficiency(), &[1.0, 1.0]);
        assert!(normalize_peak(&spectrum(vec![(0.0, 0.0)])).is_err());
    }

    #[test]
    fn moving_average_edges() {
        let s = spectrum((0..5).map(|i| (i as f64, i as f64)).collect());
        let m = moving_average(&s, 2.0);
        assert_eq!(m.efficiency(), &[0.5, 1.0, 2.0, 3.0, 3.5]);
        assert_eq!(moving_average(&s, 0.5).efficiency(), s.efficiency());
        let flat = spectrum((0..20).map(|i| (i as f64 * 0.3, 0.7)).collect());
        assert!(moving_average(&flat, 3.0)
            .efficiency()
            .iter()
            .all(|&v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn fit_power_law_and_flat() {
        let s = spectrum(
            (1..200)
                .map(|i| (i as f64, 3.0 * (i as f64).powi(-2)))
                .collect(),
        );
        let f = loglog_fit(&s, (1.0, 200.0)).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-9);
        assert!((f.intercept - 3f64.log10()).abs() < 1e-9);
        let flat = spectrum((1..200).map(|i| (i as f64, 1e-6)).collect());
        assert!(loglog_fit(&flat, (1.0, 200.0)).unwrap().slope.abs() < 0.02);
        let mean: f64 = f.residuals.iter().sum::<f64>() / f.residuals.len() as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn fit_excludes_nonpositive() {
        let mut pts: Vec<(f64, f64)> = (1..30).map(|i| (i as f64, (i as f64).powi(-2))).collect();
        pts.push((-1.0, 1.0));
        pts[3].1 = 0.0;
        let f = loglog_fit(&spectrum(pts), (-5.0, 100.0)).unwrap();
        assert_eq!(f.excluded, 2);
        assert_eq!(f.points_used, 28);
        let few = spectrum((1..5).map(|i| (i as f64, 1.0)).collect());
        assert!(matches!(loglog_fit(&few, (0.0, 10.0)), Err(Error::Fit(_))));
    }

    #[test]
    fn averaged_sinc_squared_far_from_peak() {
        // Dense uniform grid; brute-force mean of sinc² over [60, 140].
        let s = spectrum(
            (0..=40_000)
                .map(|i| {
                    let x = i as f64 * 0.01;
                    let u = 0.5 * PI * x;
                    (x, if u == 0.0 { 1.0 } else { (u.sin() / u).powi(2) })
                })
                .collect(),
        );
        let m = moving_average(&s, 80.0);
        let at100 = m.efficiency()[10_000];
        let brute: f64 = (6000..=14000)
            .map(|i| {
                let u = 0.5 * PI * (i as f64 * 0.01);
                (u.sin() / u).powi(2)
            })
            .sum::<f64>()
            / 8001.0;
        assert!((at100 / brute - 1.0).abs() < 1e-12);
        // ≈ 2/(π²·(100² − 40²)), the boxcar mean of 2/(π²x²).
        assert!((at100 / (2.0 / (PI * PI * (100.0 * 100.0 - 1600.0))) - 1.0).abs() < 0.01);
    }

    #[test]
    fn bound_contract_errors() {
        let g = GratingSpec::reference(0.0).unwrap();
        let p =
            ProcessSpec::from_pump_and_target(&crate::dispersion::default_model(), 1064.5, 1589.0)
                .unwrap();
        let s = spectrum(
            (0..100)
                .map(|i| (i as f64 * 5.0, 1.0 / (1.0 + i as f64)))
                .collect(),
        );
        assert!(estimate_rdc_bound(&s, &g, &p, &BoundOptions::default()).is_err());
        let n = normalize_peak(&s).unwrap();
        let r = estimate_rdc_bound(&n, &g, &p, &BoundOptions::default()).unwrap();
        assert!(r.unbounded && r.sigma_bound.is_none() && r.predicted_nsd.is_none());
    }

    #[test]
    fn noise_config_errors() {
        let mut n = ScanNoise::none();
        n.etalon.amplitude = 1.0;
        assert!(matches!(n.validate(), Err(Error::Config(_))));
        assert!(ScanNoise::default().validate().is_ok());
    }

    #[test]
    fn reference_grid_size() {
        let w = ScanGrid::reference().wavelengths().unwrap();
        assert_eq!(w.len(), 2301);
        assert_eq!(w[0], 1370.0);
        assert!((w[2300] - 1600.0).abs() < 1e-9);
    }
}
