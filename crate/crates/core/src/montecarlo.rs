//! Monte-Carlo error bars: every count bin is resampled as Poisson of its
//! observed value and the full reconstruction and metrics are rerun.
//!
//! Transfer samples are kept as observed; their uncertainty enters through
//! the fit covariance instead.

use ndarray::{Array2, Array3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsa::ComplexJsa;
use crate::metrics::{fidelity_complex, fidelity_intensity, phase_stripped, schmidt_number};
use crate::reconstruct::{reconstruct, ReconstructionOptions, ReconstructionResult};
use crate::rng::{derive_seed, substream};
use crate::scalar::{wrap_phase, Real};
use crate::synth::{poisson, sample_map, FringeScan, MeasurementSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub trials: usize,
    pub seed: u64,
    /// When false every trial reuses the observed counts (zero spread).
    pub resample: bool,
}

/// Mean and sample standard deviation over successful trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Some(Self {
            mean,
            std: var.sqrt(),
            n,
        })
    }
}

/// Comparison targets for fidelities inside each trial.
#[derive(Debug, Clone, Copy)]
pub struct Reference<'a, T> {
    pub jsi: &'a Array2<T>,
    pub jsa: &'a ComplexJsa<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub failures: usize,
    /// First failure message, if any.
    pub first_failure: Option<String>,
    pub k_jsa: Stat,
    pub k_jsi: Stat,
    pub median_sigma_delta: Stat,
    pub fidelity_intensity: Option<Stat>,
    pub fidelity_complex: Option<Stat>,
    /// Circular standard deviation of the signed phase per grid point over
    /// trials in which the point was valid (NaN if never valid twice).
    pub delta_std: Array2<f64>,
}

struct Trial {
    k_jsa: f64,
    k_jsi: f64,
    median_sigma: f64,
    f_int: Option<f64>,
    f_cplx: Option<f64>,
    delta: Array2<f64>,
    mask: Array2<bool>,
}

/// Resamples every count of `m` as Poisson(observed) with streams derived
/// from `seed`.
pub fn resample_measurement<T: Real>(m: &MeasurementSet<T>, seed: u64) -> MeasurementSet<T> {
    let (ns, ni, nt) = m.fringe.counts.dim();
    let flat: Vec<T> = (0..ns * ni * nt)
        .into_par_iter()
        .map(|k| {
            let v = m.fringe.counts[[k / (ni * nt), (k / nt) % ni, k % nt]];
            poisson(v, &mut substream(seed, "mc-fringe", k as u64))
        })
        .collect();
    MeasurementSet {
        i_res: sample_map(&m.i_res, seed, "mc-i_res"),
        i_spi: sample_map(&m.i_spi, seed, "mc-i_spi"),
        i_int: sample_map(&m.i_int, seed, "mc-i_int"),
        fringe: FringeScan {
            schedule: m.fringe.schedule.clone(),
            counts: Array3::from_shape_vec((ns, ni, nt), flat).expect("shape preserved"),
        },
        ..m.clone()
    }
}

fn run_trial<T: Real>(
    m: &MeasurementSet<T>,
    opts: &ReconstructionOptions,
    reference: Option<Reference<'_, T>>,
) -> Result<Trial> {
    let r: ReconstructionResult<T> = reconstruct(m, opts)?;
    let k_jsa = schmidt_number(&r.jsa)?.k.f64();
    let k_jsi = schmidt_number(&phase_stripped(&r.jsa))?.k.f64();
    let median_sigma = r
        .fringe
        .phase
        .median_sigma()
        .ok_or(Error::EmptyMask("monte carlo trial"))?
        .f64();
    let (f_int, f_cplx) = match reference {
        Some(rf) => (
            Some(fidelity_intensity(&r.jsi, rf.jsi)?.value.f64()),
            Some(fidelity_complex(&r.jsa, rf.jsa, Some(&r.jsp.mask))?.value.f64()),
        ),
        None => (None, None),
    };
    Ok(Trial {
        k_jsa,
        k_jsi,
        median_sigma,
        f_int,
        f_cplx,
        delta: r.fringe.phase.delta.mapv(|v| v.f64()),
        mask: r.fringe.phase.mask,
    })
}

pub fn monte_carlo_errors<T: Real>(
    m: &MeasurementSet<T>,
    opts: &ReconstructionOptions,
    mc: &MonteCarloOptions,
    reference: Option<Reference<'_, T>>,
) -> Result<MonteCarloSummary> {
    if mc.trials < 2 {
        return Err(Error::param("trials", "need at least 2 Monte-Carlo trials"));
    }
    let results: Vec<Result<Trial>> = (0..mc.trials)
        .into_par_iter()
        .map(|t| {
            if mc.resample {
                let data = resample_measurement(m, derive_seed(mc.seed, "mc-trial", t as u64));
                run_trial(&data, opts, reference)
            } else {
                run_trial(m, opts, reference)
            }
        })
        .collect();
    let mut ok = Vec::new();
    let mut failures = 0;
    let mut first_failure = None;
    for r in results {
        match r {
            Ok(t) => ok.push(t),
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let collect = |f: &dyn Fn(&Trial) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(f).collect() };
    let none = Stat {
        mean: f64::NAN,
        std: f64::NAN,
        n: 0,
    };
    let shape = m.grid.shape();
    let delta_std = Array2::from_shape_fn(shape, |idx| {
        let vals: Vec<f64> = ok.iter().filter(|t| t.mask[idx]).map(|t| t.delta[idx]).collect();
        if vals.len() < 2 {
            return f64::NAN;
        }
        let (s, c) = vals.iter().fold((0.0, 0.0), |(s, c), v| (s + v.sin(), c + v.cos()));
        let center = s.atan2(c);
        let dev: Vec<f64> = vals.iter().map(|v| wrap_phase(v - center)).collect();
        Stat::of(&dev).map_or(f64::NAN, |st| st.std)
    });
    Ok(MonteCarloSummary {
        trials: mc.trials,
        failures,
        first_failure,
        k_jsa: Stat::of(&collect(&|t| Some(t.k_jsa))).unwrap_or(none),
        k_jsi: Stat::of(&collect(&|t| Some(t.k_jsi))).unwrap_or(none),
        median_sigma_delta: Stat::of(&collect(&|t| Some(t.median_sigma))).unwrap_or(none),
        fidelity_intensity: Stat::of(&collect(&|t| t.f_int)),
        fidelity_complex: Stat::of(&collect(&|t| t.f_cplx)),
        delta_std,
    })
}
