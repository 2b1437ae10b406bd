//! Conversion amplitudes of a domain structure.
//!
//! [`amplitude`] is the exact integral `∫ d(z)·e^{iΔk z} dz` of the
//! piecewise-constant nonlinearity. [`first_order_efficiency`] keeps only the
//! grating's resonant first Fourier harmonic: boundary errors enter through
//! the phase `K·ε_n` with `K = π/l`, and the slowly varying detuning phase is
//! integrated over the nominal lattice. For the ideal grating it reduces to
//! `sinc²(ΔkL/2)` exactly.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::structure::{DomainStructure, GratingSpec};

// 2π = TAU + TAU_LO to about 32 significant digits.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `a·b` reduced into `[−π, π]`, carrying the product's rounding error and
/// the representation error of 2π so that large phases keep full precision.
pub fn reduced_phase(a: f64, b: f64) -> f64 {
    let p = a * b;
    let err = a.mul_add(b, -p);
    let k = (p / TAU).round();
    let r = (-k).mul_add(TAU, p);
    (-k).mul_add(TAU_LO, r) + err
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Exact SFG amplitude in metres,
/// `Σ sign_n·(e^{iΔk z_{n+1}} − e^{iΔk z_n})/(iΔk)`.
///
/// Each domain is evaluated as `sign_n·d_n·sinc(Δk d_n/2)·e^{iΔk m_n}` with
/// `m_n` its midpoint, which stays finite at `Δk = 0` (where it equals
/// `Σ sign_n·d_n`).
pub fn amplitude(structure: &DomainStructure, delta_k: f64) -> Complex64 {
    let z = structure.boundaries();
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, w) in z.windows(2).enumerate() {
        let d = w[1] - w[0];
        let mid = 0.5 * (w[0] + w[1]);
        let mag = structure.sign(n) * d * sinc(0.5 * delta_k * d);
        acc += Complex64::from_polar(mag, reduced_phase(delta_k, mid));
    }
    acc
}

/// `|A|²` normalized by the ideal first-order peak `(2L/π)²`.
pub fn exact_efficiency(structure: &DomainStructure, nominal: &GratingSpec, x: f64) -> f64 {
    let l = nominal.domain_m();
    let length = nominal.length_m();
    let dk = PI / l + x * PI / length;
    let a = amplitude(structure, dk);
    a.norm_sqr() / (2.0 * length / PI).powi(2)
}

/// Resonant first-harmonic efficiency at normalized detuning `x = δL/π`.
///
/// `η = |Σ_{n=1}^{N−1} e^{i(Kε_n + nθ)} + E(θ)|² / N²` with `θ = xπ/N`,
/// `ε_n = z_n − n·l` and `E(θ)` the fixed end-face term that turns the ideal
/// lattice sum into the continuous `N·sinc(δL/2)`.
pub fn first_order_efficiency(structure: &DomainStructure, nominal: &GratingSpec, x: f64) -> f64 {
    let kernel = FirstOrderKernel::new(structure, nominal);
    kernel.efficiency(x)
}

/// Precomputed jitter phases for repeated first-order evaluations.
pub(crate) struct FirstOrderKernel {
    jitter_phase: Vec<f64>,
    n: usize,
}

impl FirstOrderKernel {
    pub(crate) fn new(structure: &DomainStructure, nominal: &GratingSpec) -> Self {
        let l = nominal.domain_m();
        let k = PI / l;
        let z = structure.boundaries();
        let n = structure.num_domains();
        let jitter_phase = (1..n).map(|i| k * (z[i] - i as f64 * l)).collect();
        FirstOrderKernel { jitter_phase, n }
    }

    pub(crate) fn efficiency(&self, x: f64) -> f64 {
        let n = self.n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &jp) in self.jitter_phase.iter().enumerate() {
            let idx = (i + 1) as f64;
            // nθ = π·(n·x/N), reduced modulo 2π through the factor of π.
            let lattice = PI * (idx * x / n).rem_euclid(2.0);
            acc += Complex64::from_polar(1.0, jp + lattice);
        }
        acc += end_term(self.n, x);
        acc.norm_sqr() / (n * n)
    }
}

/// `e^{iNθ/2}·[2 sin(Nθ/2)/θ − sin((N−1)θ/2)/sin(θ/2)]`, the continuum
/// integral minus the ideal interior lattice sum.
fn end_term(num_domains: usize, x: f64) -> Complex64 {
    let n = num_domains as f64;
    let theta = x * PI / n;
    let half = PI * (0.5 * x).rem_euclid(2.0);
    let continuum = if theta.abs() < 1e-12 {
        n
    } else {
        2.0 * half.sin() / theta
    };
    let s = (0.5 * theta).sin();
    let interior = if s.abs() > 1e-6 {
        (0.5 * (n - 1.0) * theta).sin() / s
    } else {
        // Near a lattice alias sum the ideal interior directly.
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 1..num_domains {
            sum += Complex64::from_polar(1.0, PI * (i as f64 * x / n).rem_euclid(2.0) - half);
        }
        sum.re
    };
    Complex64::from_polar(continuum - interior, half)
}

/// Which amplitude model turns a structure into an efficiency spectrum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumModel {
    /// Resonant first-harmonic envelope (the ensemble pedestal model).
    #[default]
    FirstOrder,
    /// Exact direct domain summation, all Fourier orders included.
    Exact,
}

impl std::str::FromStr for SpectrumModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first-order" => Ok(SpectrumModel::FirstOrder),
            "exact" => Ok(SpectrumModel::Exact),
            other => Err(format!(
                "unknown spectrum model `{other}` (first-order|exact)"
            )),
        }
    }
}
