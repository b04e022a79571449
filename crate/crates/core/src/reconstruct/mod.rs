//! Inverse pipeline: measured intensities, fringe scans and a transfer scan
//! in; joint spectral intensity, phase and complex amplitude out.

pub mod assemble;
pub mod phase;
pub mod transfer;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use assemble::{assemble_complex_jsa, assemble_jsp, JspMap};
pub use phase::{abs_delta, fit_fringe, AbsDelta, FringeFit, PhaseMap, CLAMP_TOLERANCE, SNR_THRESHOLD};
pub use transfer::{fe_phase_curve, fit_transfer, FePhaseCurve, TransferFit, PARAMETER_NAMES};

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::jsa::ComplexJsa;
use crate::resonator::Band;
use crate::scalar::Real;
use crate::stimulated::{axis_of, PhaseConvention};
use crate::synth::MeasurementSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionOptions {
    /// Fringe amplitude significance (standard errors) for a valid point.
    pub snr_threshold: f64,
    /// Allowed excess of the arccos argument beyond ±1 before masking.
    pub clamp_tolerance: f64,
    pub convention: PhaseConvention,
    /// Remove the campaign's expected dark counts from the single-arm maps.
    pub subtract_dark: bool,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            snr_threshold: SNR_THRESHOLD,
            clamp_tolerance: CLAMP_TOLERANCE,
            convention: PhaseConvention::Appendix,
            subtract_dark: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult<T> {
    pub grid: SpectralGrid<T>,
    /// Dark-subtracted ring intensity, normalized to unit integral.
    pub jsi: Array2<T>,
    pub jsp: JspMap<T>,
    pub jsa: ComplexJsa<T>,
    /// Unsigned phase from the three intensity maps.
    pub abs_delta: AbsDelta<T>,
    /// Signed phase from the fringe scans.
    pub fringe: FringeFit<T>,
    pub transfer: TransferFit<T>,
    /// `θ_FE` on the seeded axis.
    pub theta_fe: FePhaseCurve<T>,
    pub seeded: Band,
    pub options: ReconstructionOptions,
}

impl<T: Real> ReconstructionResult<T> {
    /// Human-readable statement of the phase reference.
    pub fn convention_note(&self) -> String {
        let (s, i) = self.jsp.reference;
        format!(
            "JSP defined up to a global constant, fixed to zero at grid point (signal {s}, idler {i}), \
             the brightest valid point; stimulated phase sign convention {:?} (exponent {} on theta_FE)",
            self.options.convention,
            self.options.convention.fe_exponent()
        )
    }
}

/// Runs the full reconstruction on one measurement set.
pub fn reconstruct<T: Real>(m: &MeasurementSet<T>, opts: &ReconstructionOptions) -> Result<ReconstructionResult<T>> {
    let grid = &m.grid;
    let dark = if opts.subtract_dark {
        T::lit(m.campaign.dark_counts)
    } else {
        T::zero()
    };
    let sub = |x: &Array2<T>| x.mapv(|v| v - dark);
    let (i_int, i_res, i_spi) = (sub(&m.i_int), sub(&m.i_res), sub(&m.i_spi));

    let abs = abs_delta(grid, &i_int, &i_res, &i_spi, T::lit(opts.clamp_tolerance))?;
    let fringe = fit_fringe(grid, &m.fringe, T::lit(opts.snr_threshold))?;
    let transfer = fit_transfer(&m.transfer)?;
    let seeded_axis = axis_of(grid, m.seeded)?;
    let theta_fe = fe_phase_curve(&transfer, &seeded_axis.values());

    let jsi_raw = i_res.mapv(|v| v.max(T::zero()));
    let mut mask = fringe.phase.mask.clone();
    mask.zip_mut_with(&jsi_raw, |k, v| *k = *k && *v > T::zero());
    let reference = mask
        .indexed_iter()
        .filter(|(_, k)| **k)
        .map(|(idx, _)| idx)
        .max_by(|a, b| {
            jsi_raw[*a]
                .partial_cmp(&jsi_raw[*b])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or(Error::EmptyMask("reconstruction: no valid fringe fits"))?;
    let delta = PhaseMap {
        mask,
        ..fringe.phase.clone()
    };
    let jsp = assemble_jsp(&delta, &theta_fe, m.seeded, opts.convention, reference)?;

    let total = jsi_raw.sum() * grid.cell();
    if !(total > T::zero()) {
        return Err(Error::Degenerate("ring intensity map is empty"));
    }
    let jsi = jsi_raw.mapv(|v| v / total);
    let jsa = assemble_complex_jsa(&jsi, &jsp, grid)?;
    Ok(ReconstructionResult {
        grid: *grid,
        jsi,
        jsp,
        jsa,
        abs_delta: abs,
        fringe,
        transfer,
        theta_fe,
        seeded: m.seeded,
        options: *opts,
    })
}
