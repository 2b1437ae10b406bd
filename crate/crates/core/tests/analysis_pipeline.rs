use qpm_rdc::analysis::{
    estimate_rdc_bound, loglog_fit, moving_average, normalize_peak, synthesize_scan,
    to_detuning_axis, BoundOptions, Etalon, ScanGrid, ScanNoise,
};
use qpm_rdc::dispersion::{default_model, qpm_period, ProcessSpec};
use qpm_rdc::grating::{GratingSpec, SpectrumModel};
use qpm_rdc::noise::sigma_bound_from_floor;
use qpm_rdc::spectrum::{AxisKind, EfficiencySpectrum};

const PUMP: f64 = 1064.5;

fn process() -> ProcessSpec {
    ProcessSpec::from_pump_and_target(&default_model(), PUMP, 1589.0).unwrap()
}

fn reference_grating(sigma: f64) -> GratingSpec {
    // Designed domain length, N_D = 2550.
    let l = qpm_period(&process(), 20.0).unwrap().domain_um;
    GratingSpec::new(l, 2550, sigma).unwrap()
}

fn bound(grating: &GratingSpec, noise: &ScanNoise, seed: u64) -> qpm_rdc::analysis::RdcReport {
    let model = default_model();
    let scan = synthesize_scan(
        grating,
        &model,
        PUMP,
        &ScanGrid::reference(),
        noise,
        seed,
        SpectrumModel::FirstOrder,
    )
    .unwrap();
    let detuned = normalize_peak(&to_detuning_axis(&scan, PUMP, grating, &model).unwrap()).unwrap();
    estimate_rdc_bound(&detuned, grating, &process(), &BoundOptions::default()).unwrap()
}

#[test]
fn ideal_scan_bound() {
    let g = reference_grating(0.0);
    let r = bound(&g, &ScanNoise::none(), 1);
    assert!(
        (1.2e-6..1.9e-6).contains(&r.noise_floor),
        "{}",
        r.noise_floor
    );
    let s = r.sigma_bound.unwrap();
    assert!((s - 0.027).abs() < 0.003, "{s}");
    assert_eq!(
        s,
        sigma_bound_from_floor(r.noise_floor, g.num_domains).unwrap()
    );
    assert!(r.predicted_nsd.unwrap() > 0.0);
    assert_eq!(r.compared_sigmas.len(), 4);
}

#[test]
fn strong_rdc_is_detected() {
    let g = reference_grating(0.08);
    let r = bound(&g, &ScanNoise::none(), 5);
    let s = r.sigma_bound.unwrap();
    assert!((0.06..=0.10).contains(&s), "{s}");
}

#[test]
fn bound_calibration_median() {
    let g = reference_grating(0.04);
    let mut bounds: Vec<f64> = (0..50)
        .map(|seed| bound(&g, &ScanNoise::default(), seed).sigma_bound.unwrap())
        .collect();
    bounds.sort_by(f64::total_cmp);
    let median = 0.5 * (bounds[24] + bounds[25]);
    assert!((0.03..=0.05).contains(&median), "median {median}");
}

#[test]
fn additive_floor_is_monotone() {
    let g = reference_grating(0.02);
    let mut last = 0.0;
    for floor in [0.0, 1e-8, 1e-7, 1e-6, 3e-6] {
        let noise = ScanNoise {
            additive_floor: floor,
            ..ScanNoise::default()
        };
        let s = bound(&g, &noise, 17).sigma_bound.unwrap();
        assert!(s >= last, "floor {floor}: {s} < {last}");
        last = s;
    }
}

#[test]
fn noiseless_ideal_scan_matches_mapping() {
    let g = reference_grating(0.0);
    let scan = synthesize_scan(
        &g,
        &default_model(),
        PUMP,
        &ScanGrid::reference(),
        &ScanNoise::none(),
        0,
        SpectrumModel::FirstOrder,
    )
    .unwrap();
    assert_eq!(scan.len(), 2301);
    let normalized =
        normalize_peak(&to_detuning_axis(&scan, PUMP, &g, &default_model()).unwrap()).unwrap();
    assert_eq!(
        normalized.efficiency().iter().copied().fold(0.0, f64::max),
        1.0
    );
    let fit = loglog_fit(&normalized, (50.0, 400.0)).unwrap();
    assert!((fit.slope + 2.0).abs() < 0.05, "{}", fit.slope);
}

#[test]
fn etalon_ripple_period_recovered() {
    let g = reference_grating(0.0);
    let noise = ScanNoise {
        relative_std: 0.0,
        additive_floor: 0.0,
        etalon: Etalon {
            amplitude: 0.3,
            period_nm: 5.0,
            phase: 0.0,
        },
    };
    let model = default_model();
    let clean = synthesize_scan(
        &g,
        &model,
        PUMP,
        &ScanGrid::reference(),
        &ScanNoise::none(),
        0,
        SpectrumModel::FirstOrder,
    )
    .unwrap();
    let rippled = synthesize_scan(
        &g,
        &model,
        PUMP,
        &ScanGrid::reference(),
        &noise,
        0,
        SpectrumModel::FirstOrder,
    )
    .unwrap();
    // Residual from the smooth curve, restricted to where the signal is large.
    let residual: Vec<f64> = clean
        .efficiency()
        .iter()
        .zip(rippled.efficiency())
        .map(|(c, r)| if *c > 1e-15 { r / c - 1.0 } else { 0.0 })
        .collect();
    let active: Vec<f64> = residual.iter().copied().filter(|v| *v != 0.0).collect();
    assert!(active.len() > 100);
    let mean = active.iter().sum::<f64>() / active.len() as f64;
    let r: Vec<f64> = active.iter().map(|v| v - mean).collect();
    let step = 0.1;
    let acf = |lag: usize| -> f64 { r.iter().zip(&r[lag..]).map(|(a, b)| a * b).sum::<f64>() };
    let best = (20..80).max_by(|&a, &b| acf(a).total_cmp(&acf(b))).unwrap();
    let period = best as f64 * step;
    assert!((period - 5.0).abs() <= 0.3, "{period}");
}

#[test]
fn moving_average_of_ideal_roll_off() {
    let xs: Vec<f64> = (0..=4400).map(|i| i as f64 * 0.1).collect();
    let pts = xs
        .iter()
        .map(|&x| {
            let u = x * std::f64::consts::FRAC_PI_2;
            (x, if u == 0.0 { 1.0 } else { (u.sin() / u).powi(2) })
        })
        .collect();
    let s = EfficiencySpectrum::new(AxisKind::DetuningX, pts).unwrap();
    let ma = moving_average(&s, 80.0);
    let i = s.index_range(100.0, 100.0).start;
    let v = ma.efficiency()[i];
    // Boxcar mean of 2/(π²x²) over [60, 140].
    let oracle = 2.0 / (std::f64::consts::PI.powi(2) * (100.0f64.powi(2) - 40.0f64.powi(2)));
    assert!((v / oracle - 1.0).abs() < 0.02, "{v} vs {oracle}");
    assert!((v / 2.03e-5 - 1.0).abs() < 0.25);
}

#[test]
fn rejects_wrong_inputs() {
    let g = reference_grating(0.0);
    let wl = EfficiencySpectrum::new(AxisKind::WavelengthNm, vec![(1500.0, 1.0), (1501.0, 0.5)])
        .unwrap();
    assert!(estimate_rdc_bound(&wl, &g, &process(), &BoundOptions::default()).is_err());
    let raw =
        EfficiencySpectrum::new(AxisKind::DetuningX, vec![(350.0, 2.0), (351.0, 0.5)]).unwrap();
    assert!(estimate_rdc_bound(&raw, &g, &process(), &BoundOptions::default()).is_err());
    let bad = ScanNoise {
        etalon: Etalon {
            amplitude: 1.0,
            period_nm: 5.0,
            phase: 0.0,
        },
        ..ScanNoise::none()
    };
    assert!(synthesize_scan(
        &g,
        &default_model(),
        PUMP,
        &ScanGrid::reference(),
        &bad,
        0,
        SpectrumModel::FirstOrder
    )
    .is_err());
}
