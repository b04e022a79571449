//! Synthetic measurement campaigns: filtered single-arm and interference
//! intensities, per-point fringe scans over the relative arm phase, and a
//! complex Through-transfer scan, with optional Poisson shot noise.

use std::f64::consts::TAU;

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{FilterShape, FilterSpec};
use crate::grid::{SpectralGrid, UniformAxis};
use crate::jsa::ComplexJsa;
use crate::resonator::{Band, RingParams};
use crate::rng::substream;
use crate::scalar::{nm_to_omega, pm_width_to_omega, Real, C};
use crate::stimulated::{axis_of, band_axis, fe_correction, Beamsplitter, PhaseConvention, SeedOrder};

/// Measurement campaign settings. Wavelength spans are full widths centered
/// on the signal and idler resonances unless centers are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub n_signal: usize,
    pub n_idler: usize,
    pub signal_span_nm: f64,
    pub idler_span_nm: f64,
    pub signal_center_nm: Option<f64>,
    pub idler_center_nm: Option<f64>,
    /// Relative arm phases of the fringe scan.
    pub theta_schedule_rad: Vec<f64>,
    /// Expected counts at the brightest point of each single-arm map.
    pub ring_peak_counts: f64,
    pub spiral_peak_counts: f64,
    /// Expected dark counts per bin.
    pub dark_counts: f64,
    pub filter: FilterSpec<f64>,
    pub rng_seed: u64,
    pub seed_order: SeedOrder,
    /// Emit expected values instead of Poisson samples.
    pub noiseless: bool,
    /// Output beamsplitter power imbalance ε ∈ (−1, 1).
    pub imbalance: f64,
    /// Coherent background in the ring arm, relative to the ring peak amplitude.
    pub background_scale: f64,
    /// Constant extra phase of the ring arm.
    pub arm_phase_rad: f64,
    pub convention: PhaseConvention,
    pub transfer_points: usize,
    /// Transfer scan half-span relative to the seeded campaign half-span.
    pub transfer_span_factor: f64,
    /// Relative gaussian perturbation of transfer modulus and phase.
    pub transfer_noise: f64,
    /// Minimum oversampling of the simulation grid relative to the campaign grid.
    pub oversample: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            n_signal: 10,
            n_idler: 20,
            signal_span_nm: 1.4,
            idler_span_nm: 1.4,
            signal_center_nm: None,
            idler_center_nm: None,
            theta_schedule_rad: uniform_schedule(30),
            ring_peak_counts: 1e4,
            spiral_peak_counts: 1e4,
            dark_counts: 2.0,
            filter: FilterSpec::on_chip(),
            rng_seed: 42,
            seed_order: SeedOrder::Minus,
            noiseless: false,
            imbalance: 0.0,
            background_scale: 0.0,
            arm_phase_rad: 0.0,
            convention: PhaseConvention::Appendix,
            transfer_points: 201,
            transfer_span_factor: 1.5,
            transfer_noise: 5e-3,
            oversample: 4,
        }
    }
}

/// `n` phases uniformly covering one period, starting at zero.
pub fn uniform_schedule(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

/// Simulation grid on which truths are evaluated, and where each campaign
/// sample sits in it.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthLayout<T> {
    pub grid: SpectralGrid<T>,
    pub signal_index: Vec<usize>,
    pub idler_index: Vec<usize>,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let p = |name: &'static str, reason: &str| Err(Error::param(name, reason));
        if self.n_signal < 2 || self.n_idler < 2 {
            return p("campaign grid", "need at least 2 points per axis");
        }
        if !(self.signal_span_nm > 0.0) || !(self.idler_span_nm > 0.0) {
            return p("campaign span", "must be positive");
        }
        if self.theta_schedule_rad.len() < 4 {
            return p("theta schedule", "need at least 4 phases");
        }
        if self.theta_schedule_rad.iter().any(|t| !t.is_finite()) {
            return p("theta schedule", "phases must be finite");
        }
        if !(self.ring_peak_counts > 0.0) || !(self.spiral_peak_counts > 0.0) {
            return p("peak counts", "must be positive");
        }
        if !(self.dark_counts >= 0.0) {
            return p("dark counts", "must be nonnegative");
        }
        if !(self.imbalance.abs() < 1.0) {
            return p("imbalance", "must lie in (-1, 1)");
        }
        if !(self.background_scale >= 0.0) {
            return p("background scale", "must be nonnegative");
        }
        if self.transfer_points < 8 {
            return p("transfer points", "need at least 8 samples");
        }
        if !(self.transfer_span_factor > 0.0) || !(self.transfer_noise >= 0.0) {
            return p("transfer scan", "span factor must be positive and noise nonnegative");
        }
        if self.oversample == 0 {
            return p("oversample", "must be at least 1");
        }
        FilterSpec::new(self.filter.shape, self.filter.fwhm)?;
        Ok(())
    }

    pub fn filter_spec<T: Real>(&self) -> Result<FilterSpec<T>> {
        FilterSpec::new(self.filter.shape, T::lit(self.filter.fwhm))
    }

    fn axis<T: Real>(&self, ring: &RingParams<T>, band: Band) -> Result<UniformAxis<T>> {
        let (center_nm, span, n) = match band {
            Band::Signal => (self.signal_center_nm, self.signal_span_nm, self.n_signal),
            _ => (self.idler_center_nm, self.idler_span_nm, self.n_idler),
        };
        let center = match center_nm {
            Some(l) => nm_to_omega(T::lit(l)),
            None => ring.resonance(band).omega0,
        };
        let lambda = crate::scalar::omega_to_nm(center);
        let half = pm_width_to_omega(T::lit(span * 1e3 / 2.0), lambda);
        UniformAxis::centered(center, half, n)
    }

    /// Campaign grid in angular frequency.
    pub fn grid<T: Real>(&self, ring: &RingParams<T>) -> Result<SpectralGrid<T>> {
        Ok(SpectralGrid::new(
            self.axis(ring, Band::Signal)?,
            self.axis(ring, Band::Idler)?,
        ))
    }

    /// Simulation grid: every axis is oversampled so the filter is resolved
    /// with at least four samples per FWHM, and padded by ten filter widths so
    /// the filter kernel is never truncated at campaign points.
    pub fn truth_layout<T: Real>(&self, ring: &RingParams<T>) -> Result<TruthLayout<T>> {
        self.validate()?;
        let grid = self.grid(ring)?;
        let filter: FilterSpec<T> = self.filter_spec()?;
        let refine = |axis: &UniformAxis<T>| -> Result<(UniformAxis<T>, Vec<usize>)> {
            let (r, pad) = if filter.shape == FilterShape::Ideal {
                (1, 0)
            } else {
                let step = axis.step();
                let r = self
                    .oversample
                    .max((T::lit(4.0) * step / filter.fwhm).ceil().to_usize().unwrap_or(1));
                let fine = step / T::idx(r);
                let pad = (T::lit(crate::filter::KERNEL_REACH) * filter.fwhm / fine)
                    .ceil()
                    .to_usize()
                    .unwrap_or(0);
                (r, pad)
            };
            let fine = axis.refined(r, pad)?;
            let idx = (0..axis.len()).map(|k| pad + k * r).collect();
            Ok((fine, idx))
        };
        let (signal, signal_index) = refine(&grid.signal)?;
        let (idler, idler_index) = refine(&grid.idler)?;
        Ok(TruthLayout {
            grid: SpectralGrid::new(signal, idler),
            signal_index,
            idler_index,
        })
    }

    /// Frequencies of the Through-transfer scan, centered on the seeded resonance.
    pub fn transfer_omegas<T: Real>(&self, ring: &RingParams<T>) -> Result<Vec<T>> {
        let band = self.seed_order.band(ring);
        let grid = self.grid(ring)?;
        let seeded = axis_of(&grid, band)?;
        let half = (seeded.end() - seeded.start()) / T::lit(2.0) * T::lit(self.transfer_span_factor);
        Ok(UniformAxis::centered(ring.resonance(band).omega0, half, self.transfer_points)?.values())
    }
}

/// Counts per grid point versus the relative arm phase.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan<T> {
    pub schedule: Vec<T>,
    /// `counts[[s, i, k]]` at phase `schedule[k]`.
    pub counts: Array3<T>,
}

impl<T: Real> FringeScan<T> {
    pub fn new(schedule: Vec<T>, counts: Array3<T>) -> Result<Self> {
        if counts.len_of(Axis(2)) != schedule.len() {
            return Err(Error::GridMismatch(format!(
                "{} phases vs {} count columns",
                schedule.len(),
                counts.len_of(Axis(2))
            )));
        }
        Ok(Self { schedule, counts })
    }
}

/// One complex Through-transfer sample, phase relative to the reference arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferSample<T> {
    pub omega: T,
    pub modulus: T,
    pub phase: T,
}

/// Everything recorded in one campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet<T> {
    pub grid: SpectralGrid<T>,
    /// Ring arm alone.
    pub i_res: Array2<T>,
    /// Reference arm alone.
    pub i_spi: Array2<T>,
    /// Both arms at zero relative phase.
    pub i_int: Array2<T>,
    pub fringe: FringeScan<T>,
    pub transfer: Vec<TransferSample<T>>,
    /// Which band the seed laser scanned.
    pub seeded: Band,
    pub campaign: CampaignConfig,
}

impl<T: Real> MeasurementSet<T> {
    pub fn rng_seed(&self) -> u64 {
        self.campaign.rng_seed
    }

    pub fn detected(&self) -> Band {
        match self.seeded {
            Band::Signal => Band::Idler,
            _ => Band::Signal,
        }
    }
}

/// Noiseless campaign intensities, already scaled to counts (without dark counts).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCampaign<T> {
    pub grid: SpectralGrid<T>,
    /// Filtered `|a|²` of the ring arm.
    pub ring: Array2<T>,
    /// Filtered `|b|²` of the reference arm.
    pub spiral: Array2<T>,
    /// Filtered `a b̄`.
    pub cross: Array2<C<T>>,
    pub dark: T,
    pub seeded: Band,
}

impl<T: Real> ExpectedCampaign<T> {
    /// Expected counts at relative phase `theta`: `|a|² + |b|² + 2 Re(e^{iθ} a b̄) + dark`.
    pub fn interference(&self, theta: T) -> Array2<T> {
        let rot = Complex::from_polar(T::lit(2.0), theta);
        let mut out = &self.ring + &self.spiral;
        ndarray::Zip::from(&mut out)
            .and(&self.cross)
            .for_each(|o, x| *o += (rot * *x).re + self.dark);
        out.mapv(|v| v.max(T::zero()))
    }
}

/// Where campaign samples sit in the truth grid and how the filter acts.
struct CampaignView<T> {
    grid: SpectralGrid<T>,
    seeded: Band,
    seeded_axis: Axis,
    detected_axis: Axis,
    seeded_idx: Vec<usize>,
    detected_idx: Vec<usize>,
    filter: FilterSpec<T>,
    detected_step: T,
}

impl<T: Real> CampaignView<T> {
    fn new(truth: &SpectralGrid<T>, ring: &RingParams<T>, config: &CampaignConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid(ring)?;
        let si = truth.signal.locate(&grid.signal)?;
        let ii = truth.idler.locate(&grid.idler)?;
        let seeded = config.seed_order.band(ring);
        let seeded_axis = band_axis(seeded)?;
        let (seeded_idx, detected_idx, detected_step) = if seeded == Band::Signal {
            (si, ii, truth.idler.step())
        } else {
            (ii, si, truth.signal.step())
        };
        Ok(Self {
            grid,
            seeded,
            seeded_axis,
            detected_axis: Axis(1 - seeded_axis.index()),
            seeded_idx,
            detected_idx,
            filter: config.filter_spec()?,
            detected_step,
        })
    }

    /// Restriction of a truth map to the seeded campaign samples.
    fn rows<V: Clone>(&self, m: &Array2<V>) -> Array2<V> {
        m.select(self.seeded_axis, &self.seeded_idx)
    }

    /// Filters along the detected axis and samples at campaign points.
    fn detect<V>(&self, m: &Array2<V>) -> Result<Array2<V>>
    where
        V: Copy + num_traits::Zero + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V>,
    {
        Ok(self
            .filter
            .convolve_axis(m, self.detected_axis, self.detected_step)?
            .select(self.detected_axis, &self.detected_idx))
    }
}

/// Filtered truth on the campaign grid, the target of a reconstruction:
/// `conv|φ|²` and `conv(φ φ̄_ref)` along the detected axis.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredTruth<T> {
    pub grid: SpectralGrid<T>,
    pub jsi: Array2<T>,
    pub cross: Array2<C<T>>,
}

impl<T: Real> FilteredTruth<T> {
    /// The amplitude a reconstruction aims at: filtered intensity with the
    /// phase of the filtered ring × reference cross term, normalized.
    pub fn target_jsa(&self) -> Result<ComplexJsa<T>> {
        let mut values = self.cross.mapv(|c| Complex::from_polar(T::one(), c.arg()));
        values.zip_mut_with(&self.jsi, |v, p| *v *= p.max(T::zero()).sqrt());
        ComplexJsa::new(self.grid, values)?.into_normalized()
    }
}

pub fn filtered_truth<T: Real>(
    truth_ring: &ComplexJsa<T>,
    truth_spiral: &ComplexJsa<T>,
    ring: &RingParams<T>,
    config: &CampaignConfig,
) -> Result<FilteredTruth<T>> {
    truth_ring.grid.ensure_same(&truth_spiral.grid)?;
    let view = CampaignView::new(&truth_ring.grid, ring, config)?;
    let a = view.rows(&truth_ring.values);
    let b = view.rows(&truth_spiral.values);
    let mut ab = a.clone();
    ab.zip_mut_with(&b, |x, y| *x *= y.conj());
    Ok(FilteredTruth {
        jsi: view.detect(&a.mapv(|v| v.norm_sqr()))?,
        cross: view.detect(&ab)?,
        grid: view.grid,
    })
}

/// Forward model of the campaign without noise.
pub fn expected_campaign<T: Real>(
    truth_ring: &ComplexJsa<T>,
    truth_spiral: &ComplexJsa<T>,
    ring: &RingParams<T>,
    config: &CampaignConfig,
) -> Result<ExpectedCampaign<T>> {
    truth_ring.grid.ensure_same(&truth_spiral.grid)?;
    let truth = &truth_ring.grid;
    let view = CampaignView::new(truth, ring, config)?;

    // Arms restricted to the seeded campaign samples.
    let factors = fe_correction(ring, truth, config.seed_order, config.convention)?;
    let (wa, wb) = Beamsplitter::new(T::lit(config.imbalance))?.weights();
    let phase = Complex::from_polar(wa, T::lit(config.arm_phase_rad));
    let peak = |m: &Array2<C<T>>| m.iter().fold(T::zero(), |a, v| a.max(v.norm()));
    let bg = if config.background_scale > 0.0 {
        T::lit(config.background_scale) * peak(&truth_ring.values) / peak(&truth_spiral.values)
    } else {
        T::zero()
    };
    let spiral_rows = view.rows(&truth_spiral.values);
    let mut a = view.rows(&truth_ring.values);
    for (k, mut lane) in a.axis_iter_mut(view.seeded_axis).enumerate() {
        let f = factors[view.seeded_idx[k]];
        lane.mapv_inplace(|v| v * f);
    }
    if bg > T::zero() {
        a.zip_mut_with(&spiral_rows, |x, y| *x += *y * bg);
    }
    a.mapv_inplace(|v| v * phase);
    let b = spiral_rows.mapv(|v| v * wb);

    let pa = view.detect(&a.mapv(|v| v.norm_sqr()))?;
    let pb = view.detect(&b.mapv(|v| v.norm_sqr()))?;
    let mut ab = a.clone();
    ab.zip_mut_with(&b, |x, y| *x *= y.conj());
    let cross = view.detect(&ab)?;

    let max = |m: &Array2<T>| m.iter().fold(T::zero(), |a, &v| a.max(v));
    let (ma, mb) = (max(&pa), max(&pb));
    if !(ma > T::zero()) || !(mb > T::zero()) {
        return Err(Error::Degenerate("an arm has no power on the campaign grid"));
    }
    let sa = T::lit(config.ring_peak_counts) / ma;
    let sb = T::lit(config.spiral_peak_counts) / mb;
    // Product of roots: sa·sb itself can exceed the f32 range.
    let sab = sa.sqrt() * sb.sqrt();
    Ok(ExpectedCampaign {
        grid: view.grid,
        ring: pa.mapv(|v| v * sa),
        spiral: pb.mapv(|v| v * sb),
        cross: cross.mapv(|v| v * sab),
        dark: T::lit(config.dark_counts),
        seeded: view.seeded,
    })
}

pub(crate) fn poisson<T: Real, R: Rng>(mean: T, rng: &mut R) -> T {
    let m = mean.f64();
    if m > 0.0 {
        // Poisson::new only fails for non-positive or non-finite means.
        T::lit(Poisson::new(m).map(|d| d.sample(rng)).unwrap_or(0.0))
    } else {
        T::zero()
    }
}

/// Poisson draw of every bin from its own labelled stream.
pub fn sample_map<T: Real>(expected: &Array2<T>, seed: u64, label: &str) -> Array2<T> {
    let ncols = expected.ncols();
    let flat: Vec<T> = expected
        .as_standard_layout()
        .iter()
        .cloned()
        .collect::<Vec<_>>()
        .into_par_iter()
        .enumerate()
        .map(|(k, m)| poisson(m, &mut substream(seed, label, k as u64)))
        .collect();
    Array2::from_shape_vec((expected.nrows(), ncols), flat).expect("shape preserved")
}

/// Synthesizes a full campaign from truth amplitudes on a simulation grid
/// that contains the campaign grid (see [`CampaignConfig::truth_layout`]).
pub fn synthesize_campaign<T: Real>(
    truth_ring: &ComplexJsa<T>,
    truth_spiral: &ComplexJsa<T>,
    ring: &RingParams<T>,
    config: &CampaignConfig,
) -> Result<MeasurementSet<T>> {
    let exp = expected_campaign(truth_ring, truth_spiral, ring, config)?;
    let seed = config.rng_seed;
    let dark = exp.dark;
    let i_res_mean = exp.ring.mapv(|v| v + dark);
    let i_spi_mean = exp.spiral.mapv(|v| v + dark);
    let i_int_mean = exp.interference(T::zero());
    let schedule: Vec<T> = config.theta_schedule_rad.iter().map(|&t| T::lit(t)).collect();
    let (ns, ni) = exp.grid.shape();
    let mut fringe_mean = Array3::zeros((ns, ni, schedule.len()));
    for (k, &t) in schedule.iter().enumerate() {
        fringe_mean.index_axis_mut(Axis(2), k).assign(&exp.interference(t));
    }
    let omegas = config.transfer_omegas(ring)?;
    let band = exp.seeded;
    let (maps, fringe, transfer) = if config.noiseless {
        (
            [i_res_mean, i_spi_mean, i_int_mean],
            fringe_mean,
            synthesize_transfer_scan(ring, band, &omegas, T::zero(), seed)?,
        )
    } else {
        let nt = schedule.len();
        let flat: Vec<T> = (0..ns * ni)
            .into_par_iter()
            .flat_map_iter(|p| {
                let (s, i) = (p / ni, p % ni);
                let mut rng = substream(seed, "fringe", p as u64);
                (0..nt)
                    .map(|k| poisson(fringe_mean[[s, i, k]], &mut rng))
                    .collect::<Vec<_>>()
            })
            .collect();
        (
            [
                sample_map(&i_res_mean, seed, "i_res"),
                sample_map(&i_spi_mean, seed, "i_spi"),
                sample_map(&i_int_mean, seed, "i_int"),
            ],
            Array3::from_shape_vec((ns, ni, nt), flat).expect("shape preserved"),
            synthesize_transfer_scan(ring, band, &omegas, T::lit(config.transfer_noise), seed)?,
        )
    };
    let [i_res, i_spi, i_int] = maps;
    Ok(MeasurementSet {
        grid: exp.grid,
        i_res,
        i_spi,
        i_int,
        fringe: FringeScan::new(schedule, fringe)?,
        transfer,
        seeded: band,
        campaign: config.clone(),
    })
}

/// Complex Through response at `omegas`, with modulus scaled by
/// `1 + noise·n₁` and phase shifted by `noise·n₂` (`n` standard normal).
pub fn synthesize_transfer_scan<T: Real>(
    ring: &RingParams<T>,
    band: Band,
    omegas: &[T],
    noise: T,
    seed: u64,
) -> Result<Vec<TransferSample<T>>> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = substream(seed, "transfer", 0);
    omegas
        .iter()
        .map(|&w| {
            let t = ring.through_transfer(w, band)?;
            let (mut modulus, mut phase) = (t.norm(), t.arg());
            if noise > T::zero() {
                modulus *= T::one() + noise * T::lit(normal.sample(&mut rng));
                phase += noise * T::lit(normal.sample(&mut rng));
            }
            Ok(TransferSample {
                omega: w,
                modulus,
                phase,
            })
        })
        .collect()
}
