//! RDC realizations.
//!
//! Interior boundaries are displaced by independent zero-mean Gaussians of
//! standard deviation `σ̄·l/√2`, so that each domain length `z_{n+1} − z_n`
//! fluctuates with standard deviation `σ̄·l`. End faces stay at 0 and L.
//! A draw that breaks the ordering of boundaries is thrown away as a whole
//! and redrawn from the next sub-stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::structure::{ideal_structure, DomainStructure, GratingSpec};
use crate::error::{Error, Result};

pub const MAX_RESAMPLE_ATTEMPTS: u64 = 100;

// Low bits of the ChaCha stream id carry the resample attempt.
const ATTEMPT_BITS: u32 = 7;

/// Stream reserved for measurement noise in synthetic scans.
pub(crate) const NOISE_STREAM: u64 = (1 << 57) - 1;

/// Deterministic generator for `(seed, stream, attempt)`.
pub(crate) fn stream_rng(seed: u64, stream: u64, attempt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << ATTEMPT_BITS) | attempt);
    rng
}

/// Standard deviation of one boundary displacement, metres.
pub fn boundary_jitter_m(spec: &GratingSpec) -> f64 {
    spec.sigma_bar * spec.domain_m() / std::f64::consts::SQRT_2
}

/// Samples one RDC realization; identical seeds give identical structures.
pub fn sample_rdc_structure(spec: &GratingSpec, seed: u64) -> Result<DomainStructure> {
    sample_rdc_structure_stream(spec, seed, 0)
}

/// As [`sample_rdc_structure`] on an independent sub-stream (one per
/// ensemble trial). Streams must stay below 2^57.
pub fn sample_rdc_structure_stream(
    spec: &GratingSpec,
    seed: u64,
    stream: u64,
) -> Result<DomainStructure> {
    if spec.sigma_bar == 0.0 {
        return Ok(ideal_structure(spec));
    }
    let l = spec.domain_m();
    let n = spec.num_domains as usize;
    let jitter = Normal::new(0.0, boundary_jitter_m(spec))
        .map_err(|e| Error::ModelValidity(format!("jitter distribution: {e}")))?;
    let length = spec.length_m();

    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let mut rng = stream_rng(seed, stream, attempt);
        let mut boundaries = Vec::with_capacity(n + 1);
        boundaries.push(0.0);
        for k in 1..n {
            boundaries.push(k as f64 * l + jitter.sample(&mut rng));
        }
        boundaries.push(length);
        match DomainStructure::new(boundaries, 1) {
            Ok(s) => return Ok(s),
            Err(Error::ModelValidity(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ModelValidity(format!(
        "sigma_bar {} produced overlapping domains in {MAX_RESAMPLE_ATTEMPTS} consecutive draws",
        spec.sigma_bar
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_ideal() {
        let g = GratingSpec::new(7.85, 100, 0.0).unwrap();
        assert_eq!(sample_rdc_structure(&g, 9).unwrap(), ideal_structure(&g));
    }

    #[test]
    fn deterministic() {
        let g = GratingSpec::new(7.85, 2550, 0.02).unwrap();
        let a = sample_rdc_structure(&g, 42).unwrap();
        let b = sample_rdc_structure(&g, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_rdc_structure(&g, 43).unwrap());
        assert_ne!(a, sample_rdc_structure_stream(&g, 42, 1).unwrap());
        assert_eq!(a.boundaries()[0], 0.0);
        assert_eq!(a.boundaries()[2550], g.length_m());
    }

    #[test]
    fn gross_errors_exhaust_resampling() {
        // With σ̄ close to the guard and many domains every draw overlaps.
        let g = GratingSpec::new(1.0, 20_000, 0.49).unwrap();
        assert!(matches!(
            sample_rdc_structure(&g, 1),
            Err(Error::ModelValidity(_))
        ));
    }

    #[test]
    fn resampling_recovers_occasional_overlap() {
        // Overlap probability per draw is moderate here; some attempt succeeds.
        let g = GratingSpec::new(1.0, 30, 0.3).unwrap();
        for seed in 0..20 {
            sample_rdc_structure(&g, seed).unwrap();
        }
    }
}
