use serde::{Deserialize, Serialize};

use super::SellmeierModel;
use crate::error::{Error, Result};

const ENERGY_TOLERANCE: f64 = 1e-9;

/// Three-wave SFG process together with the SPDC noise idler it seeds.
///
/// All wavelengths are vacuum wavelengths in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub lambda_p: f64,
    pub lambda_r: f64,
    pub lambda_t: f64,
    pub lambda_m: f64,
    pub n_p: f64,
    pub n_r: f64,
    pub n_t: f64,
    pub n_m: f64,
}

impl ProcessSpec {
    /// Checks positivity, ordering and energy conservation.
    pub fn validate(&self) -> Result<()> {
        let w = [self.lambda_r, self.lambda_p, self.lambda_t, self.lambda_m];
        if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain(format!(
                "wavelengths must be positive: {w:?}"
            )));
        }
        if !(self.lambda_r < self.lambda_p
            && self.lambda_p < self.lambda_t
            && self.lambda_t < self.lambda_m)
        {
            return Err(Error::Domain(format!(
                "expected lambda_r < lambda_p < lambda_t < lambda_m, got {w:?}"
            )));
        }
        let sfg = (1.0 / self.lambda_r - (1.0 / self.lambda_p + 1.0 / self.lambda_t)).abs()
            * self.lambda_r;
        let spdc = (1.0 / self.lambda_p - (1.0 / self.lambda_t + 1.0 / self.lambda_m)).abs()
            * self.lambda_p;
        if sfg >= ENERGY_TOLERANCE || spdc >= ENERGY_TOLERANCE {
            return Err(Error::Domain(format!(
                "energy not conserved (sfg residual {sfg:e}, spdc residual {spdc:e})"
            )));
        }
        let n = [self.n_p, self.n_r, self.n_t, self.n_m];
        if n.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Domain(format!(
                "refractive indices must be positive: {n:?}"
            )));
        }
        Ok(())
    }

    /// Builds the process from pump and target wavelengths, deriving the red
    /// SFG output and the noise idler from energy conservation and taking all
    /// four indices from `model`.
    pub fn from_pump_and_target(
        model: &SellmeierModel,
        pump_nm: f64,
        target_nm: f64,
    ) -> Result<Self> {
        let lambda_m = idler_wavelength(pump_nm, target_nm)?;
        let lambda_r = sum_frequency_wavelength(pump_nm, target_nm);
        let spec = ProcessSpec {
            lambda_p: pump_nm,
            lambda_r,
            lambda_t: target_nm,
            lambda_m,
            n_p: model.refractive_index(pump_nm)?,
            n_r: model.refractive_index(lambda_r)?,
            n_t: model.refractive_index(target_nm)?,
            n_m: model.refractive_index(lambda_m)?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `1/λ_out = 1/λ₁ + 1/λ₂`, in nm.
pub fn sum_frequency_wavelength(a_nm: f64, b_nm: f64) -> f64 {
    a_nm * b_nm / (a_nm + b_nm)
}

/// Idler of the pump-induced down-conversion into the target band,
/// `λ_m = λ_p·λ_t/(λ_t − λ_p)`.
pub fn idler_wavelength(lambda_p: f64, lambda_t: f64) -> Result<f64> {
    if !(lambda_p > 0.0) {
        return Err(Error::Domain(format!(
            "pump wavelength must be positive, got {lambda_p}"
        )));
    }
    if lambda_t <= lambda_p {
        return Err(Error::Degenerate(format!(
            "target {lambda_t} nm not longer than pump {lambda_p} nm, no down-conversion idler"
        )));
    }
    Ok(lambda_p * lambda_t / (lambda_t - lambda_p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::default_model;

    #[test]
    fn idler_values() {
        let m = idler_wavelength(1064.5, 1589.0).unwrap();
        assert!((m - 3_224.958_055_290_753).abs() < 1e-9, "{m}");
        assert!((m - 3225.0).abs() < 0.05);
        assert_eq!(idler_wavelength(800.0, 1600.0).unwrap(), 1600.0);
        let blow = idler_wavelength(1064.5, 1064.6).unwrap();
        assert!(
            (blow / 1.133e7 - 1.0).abs() < 1e-3 && blow.is_finite(),
            "{blow}"
        );
        assert!(matches!(
            idler_wavelength(1064.5, 1064.5),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn reference_process_is_consistent() {
        let p = ProcessSpec::from_pump_and_target(&default_model(), 1064.5, 1589.0).unwrap();
        assert!((p.lambda_r - 637.5).abs() < 0.1);
        p.validate().unwrap();
    }

    #[test]
    fn broken_energy_conservation_rejected() {
        let mut p = ProcessSpec::from_pump_and_target(&default_model(), 1064.5, 1589.0).unwrap();
        p.lambda_r = 637.5;
        assert!(p.validate().is_err());
    }
}
