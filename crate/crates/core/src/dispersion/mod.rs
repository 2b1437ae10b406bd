//! Wavelength, index, wavevector and phase-mismatch conversions.

mod process;
mod sellmeier;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use process::{idler_wavelength, sum_frequency_wavelength, ProcessSpec};
pub use sellmeier::{
    default_model, refractive_index, FunctionalForm, SellmeierModel, SellmeierRegistry,
};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::grating::GratingSpec;

/// Material wavevector mismatch of the SFG triple in rad/m,
/// `2π·(n_r/λ_r − n_p/λ_p − n_t/λ_t)`.
pub fn delta_k_material(process: &ProcessSpec) -> f64 {
    mismatch(
        (process.lambda_r, process.n_r),
        (process.lambda_p, process.n_p),
        (process.lambda_t, process.n_t),
    )
}

fn mismatch(red: (f64, f64), pump: (f64, f64), target: (f64, f64)) -> f64 {
    let k = |(nm, n): (f64, f64)| n / (nm * 1e-9);
    2.0 * PI * (k(red) - k(pump) - k(target))
}

/// SFG mismatch for an arbitrary input wavelength mixing with `pump_nm`.
pub fn sfg_delta_k(model: &SellmeierModel, pump_nm: f64, input_nm: f64) -> Result<f64> {
    let out_nm = sum_frequency_wavelength(pump_nm, input_nm);
    Ok(mismatch(
        (out_nm, model.refractive_index(out_nm)?),
        (pump_nm, model.refractive_index(pump_nm)?),
        (input_nm, model.refractive_index(input_nm)?),
    ))
}

/// First-order QPM grating that phase matches a process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpmDesign {
    pub delta_k_per_m: f64,
    pub period_um: f64,
    pub domain_um: f64,
    pub length_mm: f64,
    pub num_domains: u64,
}

/// Poling period `Λ = 2π/Δk_mat`, domain length `Λ/2` and `N_D = ⌊L/l⌋`.
pub fn qpm_period(process: &ProcessSpec, length_mm: f64) -> Result<QpmDesign> {
    let dk = delta_k_material(process);
    if dk == 0.0 || !dk.is_finite() {
        return Err(Error::Degenerate(
            "material mismatch is zero, process needs no poling".into(),
        ));
    }
    if !(length_mm >= 0.0) {
        return Err(Error::Domain(format!(
            "length must be non-negative, got {length_mm}"
        )));
    }
    let period_um = 2.0 * PI / dk.abs() * 1e6;
    let domain_um = period_um / 2.0;
    Ok(QpmDesign {
        delta_k_per_m: dk,
        period_um,
        domain_um,
        length_mm,
        num_domains: (length_mm * 1e3 / domain_um).floor() as u64,
    })
}

/// Normalized detuning `x = ΔkL/π` seen by an SFG input at `lambda_in` nm.
pub fn map_wavelength_to_detuning(
    lambda_in: f64,
    pump_nm: f64,
    grating: &GratingSpec,
    model: &SellmeierModel,
) -> Result<f64> {
    let dk = sfg_delta_k(model, pump_nm, lambda_in)?;
    let l = grating.domain_m();
    let grating_k = PI / l;
    Ok((dk - grating_k) * grating.length_m() / PI)
}

/// Frequency width in GHz to wavelength width in nm at `wavelength_nm`.
pub fn bandwidth_ghz_to_nm(delta_nu_ghz: f64, wavelength_nm: f64) -> f64 {
    let lambda = wavelength_nm * 1e-9;
    lambda * lambda * (delta_nu_ghz * 1e9) / SPEED_OF_LIGHT * 1e9
}

/// Inverse of [`bandwidth_ghz_to_nm`].
pub fn bandwidth_nm_to_ghz(delta_lambda_nm: f64, wavelength_nm: f64) -> f64 {
    let lambda = wavelength_nm * 1e-9;
    delta_lambda_nm * 1e-9 * SPEED_OF_LIGHT / (lambda * lambda) * 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ProcessSpec {
        ProcessSpec::from_pump_and_target(&default_model(), 1064.5, 1589.0).unwrap()
    }

    #[test]
    fn reference_period() {
        let d = qpm_period(&reference(), 20.0).unwrap();
        assert!((d.period_um / 15.7 - 1.0).abs() < 0.02, "{}", d.period_um);
        assert!((d.domain_um - d.period_um / 2.0).abs() < 1e-15);
        assert!(
            (d.num_domains as i64 - 2550).abs() <= 60,
            "{}",
            d.num_domains
        );
        assert!(d.delta_k_per_m > 0.0);
    }

    #[test]
    fn dispersionless_medium_has_no_mismatch() {
        let mut p = reference();
        p.n_p = 1.8;
        p.n_r = 1.8;
        p.n_t = 1.8;
        let dk = delta_k_material(&p);
        // Bracket vanishes up to rounding of three ~1e7 rad/m terms.
        assert!(dk.abs() < 1e-9 * 2.0 * PI * 1.8 / 637e-9, "{dk}");
    }

    #[test]
    fn zero_mismatch_is_degenerate() {
        // Indices tuned by hand so the bracket is exactly zero.
        let p = ProcessSpec {
            lambda_p: 1000.0,
            lambda_r: 500.0,
            lambda_t: 1000.0,
            lambda_m: 1e300,
            n_p: 1.0,
            n_r: 1.0,
            n_t: 1.0,
            n_m: 1.0,
        };
        assert_eq!(delta_k_material(&p), 0.0);
        assert!(matches!(qpm_period(&p, 20.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn zero_length_and_doubling() {
        let d0 = qpm_period(&reference(), 0.0).unwrap();
        assert_eq!(d0.num_domains, 0);
        // Lengths that are exact multiples of l keep floor() exact.
        let d = qpm_period(&reference(), 1.0).unwrap();
        let l_mm = d.domain_um * 1e-3;
        let n1 = qpm_period(&reference(), 1000.25 * l_mm)
            .unwrap()
            .num_domains;
        let n2 = qpm_period(&reference(), 2000.5 * l_mm).unwrap().num_domains;
        assert_eq!(n1, 1000);
        assert_eq!(n2, 2000);
    }

    #[test]
    fn two_models_agree() {
        let reg = SellmeierRegistry::builtin();
        let a = delta_k_material(
            &ProcessSpec::from_pump_and_target(
                reg.get("ktp-z-fradkin1999").unwrap(),
                1064.5,
                1589.0,
            )
            .unwrap(),
        );
        let kato = reg.get("ktp-z-kato2002").unwrap();
        let b = delta_k_material(&ProcessSpec::from_pump_and_target(kato, 1064.5, 1589.0).unwrap());
        assert!((a / b - 1.0).abs() < 0.03, "{a} {b}");
    }

    #[test]
    fn bandwidths() {
        assert!((bandwidth_ghz_to_nm(110.0, 1589.0) / 0.9 - 1.0).abs() < 0.05);
        assert!((bandwidth_ghz_to_nm(110.0, 637.5) / 0.15 - 1.0).abs() < 0.05);
        assert!((bandwidth_ghz_to_nm(110.0, 1589.0) - 0.926).abs() < 0.001);
        assert!((bandwidth_ghz_to_nm(110.0, 637.5) - 0.149).abs() < 0.001);
        assert_eq!(bandwidth_ghz_to_nm(0.0, 1234.0), 0.0);
    }

    #[test]
    fn design_and_detuning_are_self_consistent() {
        let model = default_model();
        let p = reference();
        let d = qpm_period(&p, 20.0).unwrap();
        let g = GratingSpec::new(d.domain_um, d.num_domains, 0.0).unwrap();
        let residual =
            sfg_delta_k(&model, 1064.5, 1589.0).unwrap() - 2.0 * PI / (d.period_um * 1e-6);
        assert!(residual.abs() < 1e-6 * PI / g.length_m(), "{residual}");
        let x = map_wavelength_to_detuning(1589.0, 1064.5, &g, &model).unwrap();
        assert!(x.abs() < 2.0, "{x}");
        let far = map_wavelength_to_detuning(1370.0, 1064.5, &g, &model).unwrap();
        assert!(far.abs() >= 400.0, "{far}");
    }

    #[test]
    fn detuning_out_of_range() {
        let g = GratingSpec::new(7.85, 2550, 0.0).unwrap();
        assert!(matches!(
            map_wavelength_to_detuning(5000.0, 1064.5, &g, &default_model()),
            Err(Error::Range { .. })
        ));
    }
}
