//! Spectral filters applied to detected intensities. The filter center
//! tracks each output sample, so filtering a map is a convolution of the
//! map with the filter power response along the detected axis.

use std::ops::{Add, Mul};

use ndarray::{Array2, Axis};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::scalar::Real;

/// Kernel half-width in units of the FWHM.
pub const KERNEL_REACH: f64 = 10.0;
/// Minimum samples per FWHM for a resolvable filter.
pub const MIN_SAMPLES_PER_FWHM: f64 = 3.0;

/// On-chip add-drop filter linewidth (rad/s).
pub const ON_CHIP_FWHM: f64 = 110e9;
/// Off-chip tunable filter linewidth (rad/s).
pub const OFF_CHIP_FWHM: f64 = 40e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterShape {
    /// `|G|² = (Γ/2)² / ((Γ/2)² + Δ²)`.
    Lorentzian,
    /// `|G|² = 1` for `|Δ| ≤ Γ/2`.
    Rect,
    /// Delta response: no spectral averaging.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec<T> {
    pub shape: FilterShape,
    /// FWHM (rad/s). Ignored for [`FilterShape::Ideal`].
    #[serde(rename = "fwhm_rad_per_s", default)]
    pub fwhm: T,
}

impl<T: Real> FilterSpec<T> {
    pub fn new(shape: FilterShape, fwhm: T) -> Result<Self> {
        if shape != FilterShape::Ideal && !(fwhm > T::zero() && fwhm.is_finite()) {
            return Err(Error::param("filter fwhm", "must be positive and finite"));
        }
        Ok(Self { shape, fwhm })
    }

    pub fn lorentzian(fwhm: T) -> Result<Self> {
        Self::new(FilterShape::Lorentzian, fwhm)
    }

    pub fn rect(fwhm: T) -> Result<Self> {
        Self::new(FilterShape::Rect, fwhm)
    }

    pub fn ideal() -> Self {
        Self {
            shape: FilterShape::Ideal,
            fwhm: T::zero(),
        }
    }

    pub fn on_chip() -> Self {
        Self {
            shape: FilterShape::Lorentzian,
            fwhm: T::lit(ON_CHIP_FWHM),
        }
    }

    pub fn off_chip() -> Self {
        Self {
            shape: FilterShape::Lorentzian,
            fwhm: T::lit(OFF_CHIP_FWHM),
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.shape == FilterShape::Ideal
    }

    /// `|G(Δ)|²`, unit at zero detuning.
    pub fn power_response(&self, detuning: T) -> T {
        let half = self.fwhm / T::lit(2.0);
        match self.shape {
            FilterShape::Lorentzian => half * half / (half * half + detuning * detuning),
            FilterShape::Rect => {
                if detuning.abs() <= half * (T::one() + T::lit(1e-9)) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            FilterShape::Ideal => {
                if detuning == T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Discrete kernel on a grid of spacing `step`, truncated at
    /// ±[`KERNEL_REACH`]·FWHM. Index `reach` is zero detuning.
    pub fn kernel(&self, step: T) -> Result<Vec<T>> {
        if self.is_ideal() {
            return Ok(vec![T::one()]);
        }
        let step = step.abs();
        if self.fwhm < T::lit(MIN_SAMPLES_PER_FWHM) * step {
            return Err(Error::UnderResolvedFilter {
                fwhm: self.fwhm.f64(),
                spacing: step.f64(),
            });
        }
        let reach = (T::lit(KERNEL_REACH) * self.fwhm / step * (T::one() + T::lit(1e-9)))
            .floor()
            .to_usize()
            .unwrap_or(0);
        Ok((0..=2 * reach)
            .map(|k| self.power_response((T::idx(k) - T::idx(reach)) * step))
            .collect())
    }

    /// Filters `map` along `axis` with sample spacing `step`. Each output is
    /// the kernel-weighted mean of the available input samples, so constant
    /// maps are preserved and peaks never grow.
    pub fn convolve_axis<V>(&self, map: &Array2<V>, axis: Axis, step: T) -> Result<Array2<V>>
    where
        V: Copy + Zero + Add<Output = V> + Mul<T, Output = V>,
    {
        let kernel = self.kernel(step)?;
        if kernel.len() == 1 {
            return Ok(map.clone());
        }
        let reach = kernel.len() / 2;
        let mut out = map.clone();
        for (lane_in, mut lane_out) in map.lanes(axis).into_iter().zip(out.lanes_mut(axis)) {
            let n = lane_in.len();
            for j in 0..n {
                let lo = j.saturating_sub(reach);
                let hi = (j + reach).min(n - 1);
                let mut acc = V::zero();
                let mut weight = T::zero();
                for k in lo..=hi {
                    let w = kernel[k + reach - j];
                    acc = acc + lane_in[k] * w;
                    weight += w;
                }
                lane_out[j] = acc * weight.recip();
            }
        }
        Ok(out)
    }
}

/// Filters a joint spectral intensity along the idler axis.
pub fn convolve_filter_jsi<T: Real>(
    jsi: &Array2<T>,
    grid: &SpectralGrid<T>,
    filter: &FilterSpec<T>,
) -> Result<Array2<T>> {
    if jsi.dim() != grid.shape() {
        return Err(Error::GridMismatch(format!(
            "map {:?} vs grid {:?}",
            jsi.dim(),
            grid.shape()
        )));
    }
    filter.convolve_axis(jsi, Axis(1), grid.idler.step())
}
