//! Poled domain structures, RDC sampling, efficiency spectra and Monte Carlo
//! ensembles.

mod amplitude;
mod ensemble;
mod sampling;
mod structure;

use rayon::prelude::*;

pub use amplitude::{
    amplitude, exact_efficiency, first_order_efficiency, reduced_phase, SpectrumModel,
};
pub use ensemble::{
    ensemble_mean, ensemble_mean_on_workers, ensemble_mean_with, trial_efficiencies, EnsembleResult,
};
pub use sampling::{
    boundary_jitter_m, sample_rdc_structure, sample_rdc_structure_stream, MAX_RESAMPLE_ATTEMPTS,
};
pub(crate) use sampling::{stream_rng, NOISE_STREAM};
pub use structure::{ideal_structure, DomainStructure, GratingSpec, MAX_SIGMA_BAR};

use crate::error::Result;
use crate::spectrum::{AxisKind, EfficiencySpectrum};

/// Efficiencies at each detuning in input order.
pub fn efficiency_values(
    structure: &DomainStructure,
    nominal: &GratingSpec,
    detunings: &[f64],
    model: SpectrumModel,
) -> Vec<f64> {
    match model {
        SpectrumModel::FirstOrder => {
            let kernel = amplitude::FirstOrderKernel::new(structure, nominal);
            detunings
                .par_iter()
                .map(|&x| kernel.efficiency(x))
                .collect()
        }
        SpectrumModel::Exact => detunings
            .par_iter()
            .map(|&x| exact_efficiency(structure, nominal, x))
            .collect(),
    }
}

/// Efficiency spectrum of one structure on a detuning grid, normalized by
/// the ideal first-order peak so the ideal grating reads exactly 1 at x = 0.
pub fn efficiency_spectrum(
    structure: &DomainStructure,
    detunings: &[f64],
    nominal: &GratingSpec,
    model: SpectrumModel,
) -> Result<EfficiencySpectrum> {
    if detunings.is_empty() {
        return Ok(EfficiencySpectrum::empty(AxisKind::DetuningX));
    }
    let values = efficiency_values(structure, nominal, detunings, model);
    EfficiencySpectrum::new(
        AxisKind::DetuningX,
        detunings.iter().copied().zip(values).collect(),
    )
}

/// Detuning grid `start, start + step, …` up to and including `stop`.
pub fn detuning_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..n).map(|i| start + i as f64 * step).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn reference_spectrum_points() {
        let g = GratingSpec::reference(0.0).unwrap();
        let s = ideal_structure(&g);
        let spec =
            efficiency_spectrum(&s, &[0.0, 1.0, 2.0], &g, SpectrumModel::FirstOrder).unwrap();
        let e = spec.efficiency();
        assert_eq!(e[0], 1.0);
        assert!((e[1] / (4.0 / (PI * PI)) - 1.0).abs() < 0.01);
        assert!(e[2] < 1e-6);
        assert!(efficiency_spectrum(&s, &[], &g, SpectrumModel::Exact)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn grid() {
        assert_eq!(
            detuning_grid(0.0, 1.0, 0.25),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!(detuning_grid(0.0, 1.0, 0.0).is_empty());
    }
}
