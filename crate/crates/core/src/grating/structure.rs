use serde::{Deserialize, Serialize};

use crate::dispersion::QpmDesign;
use crate::error::{Error, Result};

/// Upper guard on σ̄; beyond it neighbouring boundaries overlap routinely.
pub const MAX_SIGMA_BAR: f64 = 0.5;

/// Nominal grating: domain length, domain count and RDC level σ̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GratingSpec {
    pub domain_um: f64,
    pub num_domains: u64,
    pub sigma_bar: f64,
}

impl GratingSpec {
    pub fn new(domain_um: f64, num_domains: u64, sigma_bar: f64) -> Result<Self> {
        if !(domain_um.is_finite() && domain_um > 0.0) {
            return Err(Error::Domain(format!(
                "domain length must be positive, got {domain_um}"
            )));
        }
        if num_domains == 0 {
            return Err(Error::Domain("a grating needs at least one domain".into()));
        }
        if !(0.0..MAX_SIGMA_BAR).contains(&sigma_bar) {
            return Err(Error::ModelValidity(format!(
                "sigma_bar {sigma_bar} outside [0, {MAX_SIGMA_BAR})"
            )));
        }
        Ok(GratingSpec {
            domain_um,
            num_domains,
            sigma_bar,
        })
    }

    /// Grating of length `length_mm` with `N_D = ⌊L/l⌋`.
    pub fn from_length(domain_um: f64, length_mm: f64, sigma_bar: f64) -> Result<Self> {
        let n = (length_mm * 1e3 / domain_um).floor();
        if !(n >= 1.0) {
            return Err(Error::Domain(format!(
                "length {length_mm} mm holds no domain of {domain_um} um"
            )));
        }
        Self::new(domain_um, n as u64, sigma_bar)
    }

    pub fn from_design(design: &QpmDesign, sigma_bar: f64) -> Result<Self> {
        Self::new(design.domain_um, design.num_domains, sigma_bar)
    }

    /// The reference crystal as quoted: l = 7.85 µm, N_D = 2550.
    pub fn reference(sigma_bar: f64) -> Result<Self> {
        Self::new(
            crate::constants::DEFAULT_DOMAIN_UM,
            crate::constants::DEFAULT_NUM_DOMAINS,
            sigma_bar,
        )
    }

    pub fn with_sigma_bar(self, sigma_bar: f64) -> Result<Self> {
        Self::new(self.domain_um, self.num_domains, sigma_bar)
    }

    pub fn domain_m(&self) -> f64 {
        self.domain_um * 1e-6
    }

    /// `L = N_D·l` in metres.
    pub fn length_m(&self) -> f64 {
        self.num_domains as f64 * self.domain_m()
    }

    pub fn length_mm(&self) -> f64 {
        self.length_m() * 1e3
    }

    pub fn period_um(&self) -> f64 {
        2.0 * self.domain_um
    }
}

/// One realization of a poled grating: boundary positions in metres.
///
/// Domain `n` spans `boundaries[n]..boundaries[n + 1]` and carries the sign
/// `first_sign·(−1)ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainStructure {
    boundaries: Vec<f64>,
    first_sign: i8,
}

impl DomainStructure {
    pub fn new(boundaries: Vec<f64>, first_sign: i8) -> Result<Self> {
        if first_sign != 1 && first_sign != -1 {
            return Err(Error::Domain(format!(
                "first_sign must be ±1, got {first_sign}"
            )));
        }
        if boundaries.len() < 2 {
            return Err(Error::Domain("need at least two boundaries".into()));
        }
        if boundaries[0] != 0.0 {
            return Err(Error::Domain(format!(
                "first boundary must be 0, got {}",
                boundaries[0]
            )));
        }
        if let Some(w) = boundaries.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::ModelValidity(format!(
                "boundaries not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(DomainStructure {
            boundaries,
            first_sign,
        })
    }

    /// Translated copy; the first boundary no longer sits at zero, so this
    /// bypasses the constructor's origin check. Used to probe invariance.
    pub fn translated(&self, offset_m: f64) -> DomainStructure {
        DomainStructure {
            boundaries: self.boundaries.iter().map(|z| z + offset_m).collect(),
            first_sign: self.first_sign,
        }
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn first_sign(&self) -> i8 {
        self.first_sign
    }

    pub fn num_domains(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn length_m(&self) -> f64 {
        self.boundaries[self.boundaries.len() - 1] - self.boundaries[0]
    }

    pub fn sign(&self, n: usize) -> f64 {
        let s = f64::from(self.first_sign);
        if n.is_multiple_of(2) {
            s
        } else {
            -s
        }
    }

    /// `(z_{n+1} − z_n)` for every domain.
    pub fn domain_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.boundaries.windows(2).map(|w| w[1] - w[0])
    }
}

/// Ideal lattice `z_n = n·l`.
pub fn ideal_structure(spec: &GratingSpec) -> DomainStructure {
    let l = spec.domain_m();
    let boundaries = (0..=spec.num_domains).map(|n| n as f64 * l).collect();
    DomainStructure {
        boundaries,
        first_sign: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_crystal_length() {
        let s = ideal_structure(&GratingSpec::reference(0.0).unwrap());
        assert_eq!(s.num_domains(), 2550);
        assert_eq!(s.boundaries()[2550], 2550.0 * 7.85e-6);
        assert!((s.boundaries()[2550] - 20.0175e-3).abs() < 1e-15);
        DomainStructure::new(s.boundaries().to_vec(), 1).unwrap();
    }

    #[test]
    fn single_domain() {
        let s = ideal_structure(&GratingSpec::new(3.0, 1, 0.0).unwrap());
        assert_eq!(s.boundaries(), &[0.0, 3e-6]);
    }

    #[test]
    fn guards() {
        assert!(GratingSpec::new(7.85, 0, 0.0).is_err());
        assert!(matches!(
            GratingSpec::new(7.85, 10, 0.5),
            Err(Error::ModelValidity(_))
        ));
        assert!(GratingSpec::new(7.85, 10, -0.1).is_err());
        assert!(DomainStructure::new(vec![0.0, 2.0, 1.0], 1).is_err());
        assert!(DomainStructure::new(vec![1.0, 2.0], 1).is_err());
        assert!(DomainStructure::new(vec![0.0, 2.0], 0).is_err());
    }

    #[test]
    fn length_from_mm() {
        let g = GratingSpec::from_length(7.85, 20.0, 0.0).unwrap();
        assert_eq!(g.num_domains, 2547);
        assert!(g.length_mm() <= 20.0);
    }
}
