//! Uniform spectral axes and the signal × idler grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Strictly increasing, uniformly spaced angular-frequency axis (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformAxis<T> {
    start: T,
    step: T,
    len: usize,
}

impl<T: Real> UniformAxis<T> {
    pub fn new(start: T, step: T, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::param("axis", "empty axis"));
        }
        if !(step > T::zero()) || !step.is_finite() || !start.is_finite() {
            return Err(Error::param("axis", "step must be positive and finite"));
        }
        Ok(Self { start, step, len })
    }

    /// `len` points spanning `center ± half_span`.
    pub fn centered(center: T, half_span: T, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::param("axis", "need at least two points"));
        }
        let step = T::lit(2.0) * half_span / T::idx(len - 1);
        Self::new(center - half_span, step, len)
    }

    /// Validates an explicit list of samples as a uniform axis
    /// (spacing uniform to 1e−9 relative).
    pub fn from_values(values: &[T]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::param("axis", "need at least two points"));
        }
        let n = values.len();
        let step = (values[n - 1] - values[0]) / T::idx(n - 1);
        // 1e-9 of a step, or the representation limit of the sample values.
        let magnitude = values[0].abs().max(values[n - 1].abs());
        let tol = (T::lit(1e-9) * step.abs()).max(T::lit(4.0) * T::epsilon() * magnitude);
        for (k, w) in values.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::param("axis", format!("not strictly increasing at {k}")));
            }
            if ((w[1] - w[0]) - step).abs() > tol {
                return Err(Error::param("axis", format!("non-uniform spacing at {k}")));
            }
        }
        Self::new(values[0], step, n)
    }

    #[inline]
    pub fn value(&self, i: usize) -> T {
        self.start + self.step * T::idx(i)
    }

    pub fn values(&self) -> Vec<T> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn end(&self) -> T {
        self.value(self.len - 1)
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, omega: T) -> bool {
        let slack = self.step * T::lit(1e-9);
        omega >= self.start - slack && omega <= self.end() + slack
    }

    /// Index of the sample equal to `omega` (within 1e−6 of a step, or the
    /// representation limit of `omega` if that is coarser).
    pub fn index_of(&self, omega: T) -> Option<usize> {
        let pos = (omega - self.start) / self.step;
        let k = pos.round();
        let tol = T::lit(1e-6).max(T::lit(16.0) * T::epsilon() * omega.abs().max(self.start.abs()) / self.step);
        if k < T::zero() || (pos - k).abs() > tol {
            return None;
        }
        let k = k.to_usize()?;
        (k < self.len).then_some(k)
    }

    /// Index of the sample closest to `omega`, if inside the axis.
    pub fn nearest(&self, omega: T) -> Option<usize> {
        if !self.contains(omega) {
            return None;
        }
        let k = ((omega - self.start) / self.step).round().to_usize()?;
        Some(k.min(self.len - 1))
    }

    /// Axis with `factor`× finer spacing, extended by `pad` fine samples on
    /// both ends. Every original sample `k` sits at index `pad + k·factor`.
    pub fn refined(&self, factor: usize, pad: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::param("oversample", "must be at least 1"));
        }
        let step = self.step / T::idx(factor);
        Self::new(
            self.start - step * T::idx(pad),
            step,
            (self.len - 1) * factor + 1 + 2 * pad,
        )
    }

    /// Indices of every sample of `coarse` inside `self`.
    pub fn locate(&self, coarse: &Self) -> Result<Vec<usize>> {
        (0..coarse.len)
            .map(|k| {
                self.index_of(coarse.value(k)).ok_or_else(|| {
                    Error::GridMismatch(format!(
                        "sample {k} ({:.6e} rad/s) is not on the finer axis",
                        coarse.value(k).f64()
                    ))
                })
            })
            .collect()
    }

    pub fn cast<U: Real>(&self) -> UniformAxis<U> {
        UniformAxis {
            start: U::lit(self.start.f64()),
            step: U::lit(self.step.f64()),
            len: self.len,
        }
    }
}

/// Signal × idler frequency grid. Maps are indexed `[signal][idler]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid<T> {
    pub signal: UniformAxis<T>,
    pub idler: UniformAxis<T>,
}

impl<T: Real> SpectralGrid<T> {
    pub fn new(signal: UniformAxis<T>, idler: UniformAxis<T>) -> Self {
        Self { signal, idler }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.signal.len(), self.idler.len())
    }

    /// Cell measure `Δω_s Δω_i`.
    pub fn cell(&self) -> T {
        self.signal.step() * self.idler.step()
    }

    /// Errors unless both grids agree to 1e−9 of a step.
    pub fn ensure_same(&self, other: &Self) -> Result<()> {
        let same_axis = |a: &UniformAxis<T>, b: &UniformAxis<T>| {
            a.len() == b.len()
                && (a.step() - b.step()).abs() <= T::lit(1e-9) * a.step()
                && (a.start() - b.start()).abs() <= T::lit(1e-6) * a.step()
        };
        if same_axis(&self.signal, &other.signal) && same_axis(&self.idler, &other.idler) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )))
        }
    }

    pub fn cast<U: Real>(&self) -> SpectralGrid<U> {
        SpectralGrid {
            signal: self.signal.cast(),
            idler: self.idler.cast(),
        }
    }
}
