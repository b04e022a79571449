//! Complex joint spectral amplitudes on a uniform grid and the two forward
//! models: the microring (field-enhancement weighted) and the straight
//! spiral waveguide (phase-matching weighted).

use ndarray::Array2;
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::pump::{Autoconvolution, PumpSpectrum};
use crate::quadrature::Quadrature;
use crate::resonator::{Band, RingParams};
use crate::scalar::{sinc, Real, C};

/// `φ[signal][idler]` sampled on a [`SpectralGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexJsa<T> {
    pub grid: SpectralGrid<T>,
    pub values: Array2<C<T>>,
    /// Set when `Σ|φ|² Δω_s Δω_i = 1`.
    pub normalized: bool,
}

impl<T: Real> ComplexJsa<T> {
    pub fn new(grid: SpectralGrid<T>, values: Array2<C<T>>) -> Result<Self> {
        if values.dim() != grid.shape() {
            return Err(Error::GridMismatch(format!(
                "values {:?} vs grid {:?}",
                values.dim(),
                grid.shape()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("jsa values"));
        }
        Ok(Self {
            grid,
            values,
            normalized: false,
        })
    }

    /// `Σ|φ|² Δω_s Δω_i`.
    pub fn total_probability(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum::<T>() * self.grid.cell()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let p = self.total_probability();
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::Degenerate("joint spectral amplitude is identically zero"));
        }
        let s = p.sqrt().recip();
        self.values.mapv_inplace(|v| v * s);
        self.normalized = true;
        Ok(())
    }

    pub fn into_normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `|φ|²`.
    pub fn intensity(&self) -> Array2<T> {
        self.values.mapv(|v| v.norm_sqr())
    }

    /// `Arg φ` in `(−π, π]`.
    pub fn phase(&self) -> Array2<T> {
        self.values.mapv(|v| v.arg())
    }

    /// Grid index of the largest `|φ|`.
    pub fn peak(&self) -> (usize, usize) {
        argmax(&self.intensity())
    }

    pub fn cast<U: Real>(&self) -> ComplexJsa<U> {
        ComplexJsa {
            grid: self.grid.cast(),
            values: self.values.mapv(|v| C::new(U::lit(v.re.f64()), U::lit(v.im.f64()))),
            normalized: self.normalized,
        }
    }
}

/// Index of the largest entry; first occurrence on ties.
pub fn argmax<T: Real>(map: &Array2<T>) -> (usize, usize) {
    let mut best = ((0, 0), T::neg_infinity());
    for (idx, &v) in map.indexed_iter() {
        if v > best.1 {
            best = (idx, v);
        }
    }
    best.0
}

/// Straight waveguide used as the phase reference source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiralParams<T> {
    /// Length (m).
    pub length: T,
    /// Expansion frequency of the dispersion polynomial (rad/s).
    pub taylor_center: T,
    /// `[k0, k1, k2, …]`: `k(ω) = Σ k_n (ω − ω_c)ⁿ / n!` in s^n/m.
    pub taylor: Vec<T>,
    /// Nonlinear coefficient (1/(W·m)); scales brightness only.
    pub gamma_nl: T,
}

impl<T: Real> SpiralParams<T> {
    pub fn new(length: T, taylor_center: T, taylor: Vec<T>, gamma_nl: T) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::param("spiral length", "must be positive"));
        }
        if taylor.iter().any(|k| !k.is_finite()) {
            return Err(Error::NonFinite("dispersion coefficients"));
        }
        Ok(Self {
            length,
            taylor_center,
            taylor,
            gamma_nl,
        })
    }

    /// 2.35 mm waveguide with 1.3 ps²/m group-velocity dispersion about `omega_p`.
    pub fn reference(omega_p: T) -> Self {
        Self {
            length: T::lit(2.35e-3),
            taylor_center: omega_p,
            taylor: vec![T::zero(), T::zero(), T::lit(1.3e-24)],
            gamma_nl: T::one(),
        }
    }

    /// `Δk = k(ω₁) + k(ω₂) − k(ω_s) − k(ω_i)` given offsets from the
    /// expansion center with `y₁ + y₂ = y_s + y_i`. The constant and linear
    /// terms cancel identically under that constraint and are skipped.
    pub fn mismatch_offsets(&self, y1: T, y2: T, ys: T, yi: T) -> T {
        let mut dk = T::zero();
        let mut fact = T::one();
        let (mut p1, mut p2, mut ps, mut pi) = (y1, y2, ys, yi);
        for (n, &k) in self.taylor.iter().enumerate().skip(1) {
            if n >= 2 {
                fact *= T::idx(n);
                p1 *= y1;
                p2 *= y2;
                ps *= ys;
                pi *= yi;
                dk += k * (p1 + p2 - ps - pi) / fact;
            }
        }
        dk
    }

    /// Phase mismatch for pump photons at `ω′` and `ω_s + ω_i − ω′`.
    pub fn phase_mismatch(&self, omega_s: T, omega_i: T, omega_prime: T) -> T {
        let ys = omega_s - self.taylor_center;
        let yi = omega_i - self.taylor_center;
        let y1 = omega_prime - self.taylor_center;
        self.mismatch_offsets(y1, ys + yi - y1, ys, yi)
    }

    /// `e^{iΔkL/2} sinc(ΔkL/2)`.
    pub fn phase_matching(&self, dk: T) -> C<T> {
        let x = dk * self.length / T::lit(2.0);
        Complex::from_polar(sinc(x), x)
    }
}

fn fill_map<T: Real, F>(grid: &SpectralGrid<T>, f: F) -> Result<Array2<C<T>>>
where
    F: Fn(usize, usize) -> Result<C<T>> + Sync,
{
    let (ns, ni) = grid.shape();
    let rows: Vec<Vec<C<T>>> = (0..ns)
        .into_par_iter()
        .map(|s| (0..ni).map(|i| f(s, i)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let flat: Vec<C<T>> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((ns, ni), flat).map_err(|e| Error::GridMismatch(e.to_string()))
}

/// Microring JSA `FE_s(ω_s) FE_i(ω_i) ∫ F(ω_s+ω_i−ω′) F(ω′) dω′` with
/// `F = FE_p A_p`, normalized.
pub fn resonator_jsa<T: Real>(
    ring: &RingParams<T>,
    pump: &PumpSpectrum<T>,
    grid: &SpectralGrid<T>,
    quad: Quadrature<T>,
) -> Result<ComplexJsa<T>> {
    let kernel = Autoconvolution::new(pump, Some(ring), quad)?;
    let fe_s: Vec<C<T>> = grid
        .signal
        .values()
        .into_iter()
        .map(|w| ring.field_enhancement(w, Band::Signal))
        .collect::<Result<_>>()?;
    let fe_i: Vec<C<T>> = grid
        .idler
        .values()
        .into_iter()
        .map(|w| ring.field_enhancement(w, Band::Idler))
        .collect::<Result<_>>()?;
    let two = T::lit(2.0);
    let values = fill_map(grid, |s, i| {
        let offset = ((grid.signal.value(s) - pump.center) + (grid.idler.value(i) - pump.center)) / two;
        Ok(fe_s[s] * fe_i[i] * kernel.at_half_offset(offset)?)
    })?;
    ComplexJsa::new(*grid, values)?.into_normalized()
}

/// Spiral JSA `∫ e^{iΔkL/2} sinc(ΔkL/2) A_p(ω_s+ω_i−ω′) A_p(ω′) dω′`, normalized.
pub fn spiral_jsa<T: Real>(
    spiral: &SpiralParams<T>,
    pump: &PumpSpectrum<T>,
    grid: &SpectralGrid<T>,
    quad: Quadrature<T>,
) -> Result<ComplexJsa<T>> {
    let (lo, hi) = pump.support();
    let feature = pump.feature();
    let scale = T::one(); // ∫|A_p|² = 1 bounds the integral
    let two = T::lit(2.0);
    let shift = pump.center - spiral.taylor_center;
    let values = fill_map(grid, |s, i| {
        let xs = grid.signal.value(s) - pump.center;
        let xi = grid.idler.value(i) - pump.center;
        let d = (xs + xi) / two;
        let a = (lo - d).max(d - hi);
        let b = (hi - d).min(d - lo);
        if !(b > a) {
            return Ok(C::new(T::zero(), T::zero()));
        }
        quad.integrate(
            |u| {
                let dk = spiral.mismatch_offsets(shift + d + u, shift + d - u, shift + xs, shift + xi);
                spiral.phase_matching(dk) * pump.amplitude_at(d + u) * pump.amplitude_at(d - u)
            },
            a,
            b,
            feature,
            scale,
        )
    })?;
    ComplexJsa::new(*grid, values)?.into_normalized()
}
