//! Monte Carlo ensemble averages over RDC realizations.
//!
//! Trials are grouped into fixed blocks. Each block is reduced sequentially
//! and blocks are merged in index order, so the result depends only on
//! `(spec, detunings, trials, seed)` and not on how many threads ran it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::amplitude::{exact_efficiency, FirstOrderKernel, SpectrumModel};
use super::sampling::sample_rdc_structure_stream;
use super::structure::GratingSpec;
use crate::error::{Error, Result};

const BLOCK_TRIALS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub spec: GratingSpec,
    pub model: SpectrumModel,
    pub detunings: Vec<f64>,
    pub mean_efficiency: Vec<f64>,
    /// Sample standard deviation over `√trials`.
    pub std_error: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

/// Running mean and sum of squared deviations per detuning.
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            count: 0.0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.count += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(values) {
            let delta = v - *m;
            *m += delta / self.count;
            *s += delta * (v - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let total = self.count + other.count;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.count / total;
            self.m2[i] += other.m2[i] + delta * delta * self.count * other.count / total;
        }
        self.count = total;
    }
}

/// Per-trial efficiencies of trial `index`.
pub fn trial_efficiencies(
    spec: &GratingSpec,
    detunings: &[f64],
    seed: u64,
    index: u64,
    model: SpectrumModel,
) -> Result<Vec<f64>> {
    // Stream 0 is what `sample_rdc_structure` uses; trials start at 1.
    let structure = sample_rdc_structure_stream(spec, seed, index + 1)?;
    Ok(match model {
        SpectrumModel::FirstOrder => {
            let kernel = FirstOrderKernel::new(&structure, spec);
            detunings.iter().map(|&x| kernel.efficiency(x)).collect()
        }
        SpectrumModel::Exact => detunings
            .iter()
            .map(|&x| exact_efficiency(&structure, spec, x))
            .collect(),
    })
}

/// Ensemble mean on the global thread pool.
pub fn ensemble_mean(
    spec: &GratingSpec,
    detunings: &[f64],
    trials: u64,
    seed: u64,
) -> Result<EnsembleResult> {
    ensemble_mean_with(spec, detunings, trials, seed, SpectrumModel::FirstOrder)
}

pub fn ensemble_mean_with(
    spec: &GratingSpec,
    detunings: &[f64],
    trials: u64,
    seed: u64,
    model: SpectrumModel,
) -> Result<EnsembleResult> {
    if trials == 0 {
        return Err(Error::Domain("ensemble needs at least one trial".into()));
    }
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let partials: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut m = Moments::new(detunings.len());
            let end = ((b + 1) * BLOCK_TRIALS).min(trials);
            for t in b * BLOCK_TRIALS..end {
                m.push(&trial_efficiencies(spec, detunings, seed, t, model)?);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;

    let mut total = Moments::new(detunings.len());
    for p in &partials {
        total.merge(p);
    }
    let n = total.count;
    let std_error = total
        .m2
        .iter()
        .map(|&s| {
            if n > 1.0 {
                (s.max(0.0) / (n - 1.0)).sqrt() / n.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(EnsembleResult {
        spec: *spec,
        model,
        detunings: detunings.to_vec(),
        mean_efficiency: total.mean,
        std_error,
        trials,
        seed,
    })
}

/// Runs [`ensemble_mean_with`] on a dedicated pool of `workers` threads.
pub fn ensemble_mean_on_workers(
    spec: &GratingSpec,
    detunings: &[f64],
    trials: u64,
    seed: u64,
    model: SpectrumModel,
    workers: usize,
) -> Result<EnsembleResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| ensemble_mean_with(spec, detunings, trials, seed, model))
}

impl EnsembleResult {
    /// CSV with the Monte Carlo mean, its standard error and the analytic
    /// ensemble formula on the same grid.
    pub fn to_csv_string(&self) -> String {
        use crate::spectrum::fmt_f64;
        use std::fmt::Write as _;

        let mut out = String::from("detuning_x,efficiency,std_error,analytic\n");
        for i in 0..self.detunings.len() {
            let x = self.detunings[i];
            let analytic = crate::noise::expected_noise_efficiency(
                x,
                self.spec.sigma_bar,
                self.spec.num_domains,
            );
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(x),
                fmt_f64(self.mean_efficiency[i]),
                fmt_f64(self.std_error[i]),
                fmt_f64(analytic)
            );
        }
        out
    }
}
