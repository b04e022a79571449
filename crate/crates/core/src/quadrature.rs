//! Trapezoidal quadrature with step-halving error control.
//!
//! Integrands here are smooth and band-limited (pump envelopes, Lorentzians),
//! so the composite trapezoid rule converges spectrally once the step resolves
//! the narrowest feature. The difference between successive halvings is used
//! as the error estimate; no extrapolation is applied to the returned value.

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    /// Accepted error relative to the caller's scale.
    pub rel_tol: T,
    /// Initial samples per narrowest feature of the integrand.
    pub samples_per_feature: usize,
    /// Maximum number of step halvings after the initial pass.
    pub max_halvings: usize,
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10).max(T::lit(64.0) * T::epsilon()),
            samples_per_feature: 16,
            max_halvings: 6,
        }
    }
}

impl<T: Real> Quadrature<T> {
    /// Integrates `f` over `[a, b]` starting from a step no larger than
    /// `feature / samples_per_feature`. Converged when two successive
    /// halvings differ by at most `rel_tol * scale`.
    pub fn integrate<F>(&self, f: F, a: T, b: T, feature: T, scale: T) -> Result<C<T>>
    where
        F: Fn(T) -> C<T>,
    {
        if !(b > a) {
            return Ok(C::new(T::zero(), T::zero()));
        }
        let h0 = feature / T::idx(self.samples_per_feature.max(1));
        let mut n = ((b - a) / h0).ceil().to_usize().unwrap_or(1).max(2);
        let mut h = (b - a) / T::idx(n);
        let half = T::lit(0.5);
        let mut sum = (f(a) + f(b)) * half;
        for k in 1..n {
            sum += f(a + h * T::idx(k));
        }
        let mut estimate = sum * h;
        let tol = self.rel_tol * scale.abs().max(T::min_positive_value());
        let mut last_err = T::infinity();
        for _ in 0..=self.max_halvings {
            let mut mid = C::new(T::zero(), T::zero());
            for k in 0..n {
                mid += f(a + h * (T::idx(k) + half));
            }
            sum += mid;
            n *= 2;
            h *= half;
            let refined = sum * h;
            last_err = (refined - estimate).norm();
            estimate = refined;
            if last_err <= tol {
                return Ok(estimate);
            }
        }
        Err(Error::Quadrature {
            estimate: last_err.f64(),
            tolerance: tol.f64(),
            intervals: n,
        })
    }
}

/// Plain trapezoid rule on `n` equal intervals, no error control.
pub fn trapezoid<T: Real, F: Fn(T) -> C<T>>(f: F, a: T, b: T, n: usize) -> C<T> {
    let h = (b - a) / T::idx(n);
    let mut sum = (f(a) + f(b)) * T::lit(0.5);
    for k in 1..n {
        sum += f(a + h * T::idx(k));
    }
    sum * h
}
