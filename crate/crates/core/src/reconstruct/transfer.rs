//! Lorentzian fit of the complex Through transfer and the field-enhancement
//! phase derived from it.
//!
//! Model: `T(ω) = a₀ e^{i(φ₀ + φ₁ x)} (1 − κ_e / (κ − iΔ))` with `κ_e = 2/τ_e`,
//! `κ = 1/τ_tot`, `Δ = ω − ω₀` and `x` the frequency scaled to the scan.
//! The constant amplitude and linear phase absorb the reference-arm path.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{invert, solve};
use crate::scalar::{unwrap_phase, Real, C};
use crate::synth::TransferSample;

const MAX_ITERATIONS: usize = 200;
/// Smallest relative dip depth treated as a resonance.
const MIN_DEPTH: f64 = 1e-3;
/// Minimum scan width in resonance linewidths (FWHM).
const MIN_SPAN_LINEWIDTHS: f64 = 3.0;

pub const PARAMETER_NAMES: [&str; 6] = [
    "ln_kappa_e",
    "ln_kappa",
    "omega0_scaled",
    "ln_amplitude",
    "phase0_rad",
    "phase_slope_rad",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFit<T> {
    pub tau_e: T,
    pub tau_tot: T,
    pub omega0: T,
    pub amplitude: T,
    pub phase0: T,
    /// Phase slope per unit of scaled frequency `(ω − center)/scale`.
    pub phase_slope: T,
    pub center: T,
    pub scale: T,
    /// Covariance of the fitted parameters in [`PARAMETER_NAMES`] order,
    /// scaled by the residual variance.
    pub covariance: Vec<Vec<T>>,
    /// `‖T_model − T_data‖₂` over all samples.
    pub residual_norm: T,
    pub iterations: usize,
    /// Frequency range covered by the samples.
    pub domain: (T, T),
}

impl<T: Real> TransferFit<T> {
    /// Standard errors of `(τ_e, τ_tot, ω₀)`.
    pub fn std_errors(&self) -> (T, T, T) {
        let sd = |k: usize| self.covariance[k][k].max(T::zero()).sqrt();
        (self.tau_e * sd(0), self.tau_tot * sd(1), self.scale * sd(2))
    }

    pub fn model(&self, omega: T) -> C<T> {
        let p = [
            (T::lit(2.0) / self.tau_e).ln(),
            self.tau_tot.recip().ln(),
            (self.omega0 - self.center) / self.scale,
            self.amplitude.ln(),
            self.phase0,
            self.phase_slope,
        ];
        evaluate(&p, (omega - self.center) / self.scale, self.scale).0
    }
}

/// Model value and its derivatives with respect to the six parameters.
fn evaluate<T: Real>(p: &[T; 6], x: T, scale: T) -> (C<T>, [C<T>; 6]) {
    let (ke, k) = (p[0].exp(), p[1].exp());
    let detuning = scale * (x - p[2]);
    let den = C::new(k, -detuning);
    let l = C::new(ke, T::zero()) / den;
    let pre = Complex::from_polar(p[3].exp(), p[4] + p[5] * x);
    let t = pre * (C::new(T::one(), T::zero()) - l);
    let i = C::new(T::zero(), T::one());
    let d = [
        -pre * l,
        pre * l * k / den,
        pre * i * l * scale / den,
        t,
        i * t,
        i * t * x,
    ];
    (t, d)
}

struct Data<T> {
    x: Vec<T>,
    t: Vec<C<T>>,
}

fn cost<T: Real>(p: &[T; 6], data: &Data<T>, scale: T) -> T {
    data.x
        .iter()
        .zip(&data.t)
        .map(|(&x, &t)| (evaluate(p, x, scale).0 - t).norm_sqr())
        .sum()
}

/// Linewidth, depth and center estimates from the modulus dip.
fn initial_guess<T: Real>(omegas: &[T], t: &[C<T>], center: T, scale: T) -> Result<[T; 6]> {
    let n = t.len();
    let edge = (n / 10).max(1);
    let edges: Vec<usize> = (0..edge).chain(n - edge..n).collect();
    let a0 = edges.iter().map(|&k| t[k].norm()).sum::<T>() / T::idx(edges.len());
    let phase_ref = edges
        .iter()
        .fold(C::new(T::zero(), T::zero()), |acc, &k| acc + t[k])
        .arg();
    let power: Vec<T> = t.iter().map(|v| v.norm_sqr() / (a0 * a0)).collect();
    let (kmin, &pmin) = power
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or(Error::Degenerate("empty transfer scan"))?;
    let depth = T::one() - pmin;
    if !(depth > T::lit(MIN_DEPTH)) {
        return Err(Error::NoResonance { depth: depth.f64() });
    }
    // |T|²/a₀² = ((κ−κe)² + Δ²)/(κ² + Δ²) reaches (1 + min)/2 at |Δ| = κ.
    let half = (T::one() + pmin) / T::lit(2.0);
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<T> {
        let mut prev = kmin;
        for k in range {
            if power[k] >= half {
                let f = (half - power[prev]) / (power[k] - power[prev]);
                return Some(omegas[prev] + (omegas[k] - omegas[prev]) * f);
            }
            prev = k;
        }
        None
    };
    let lo = crossing(&mut (0..kmin).rev());
    let hi = crossing(&mut (kmin + 1..n));
    let span = omegas[n - 1] - omegas[0];
    let kappa = match (lo, hi) {
        (Some(a), Some(b)) => (b - a) / T::lit(2.0),
        (Some(a), None) => omegas[kmin] - a,
        (None, Some(b)) => b - omegas[kmin],
        (None, None) => {
            return Err(Error::InsufficientSpan { span_linewidths: 1.0 });
        }
    };
    let linewidths = span / (T::lit(2.0) * kappa);
    if linewidths < T::lit(MIN_SPAN_LINEWIDTHS) {
        return Err(Error::InsufficientSpan {
            span_linewidths: linewidths.f64(),
        });
    }
    // Under-coupled branch: κ_e/κ = 1 − √min.
    let ke = kappa * (T::one() - pmin.max(T::zero()).sqrt()).max(T::lit(1e-3));
    Ok([
        ke.ln(),
        kappa.ln(),
        (omegas[kmin] - center) / scale,
        a0.ln(),
        phase_ref,
        T::zero(),
    ])
}

/// Levenberg–Marquardt fit of the Through samples.
pub fn fit_transfer<T: Real>(samples: &[TransferSample<T>]) -> Result<TransferFit<T>> {
    if samples.len() < 8 {
        return Err(Error::param("transfer samples", "need at least 8 samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.omega.partial_cmp(&b.omega).unwrap_or(std::cmp::Ordering::Equal));
    if sorted
        .iter()
        .any(|s| !s.omega.is_finite() || !s.modulus.is_finite() || !s.phase.is_finite())
    {
        return Err(Error::NonFinite("transfer samples"));
    }
    let omegas: Vec<T> = sorted.iter().map(|s| s.omega).collect();
    let t: Vec<C<T>> = sorted.iter().map(|s| Complex::from_polar(s.modulus, s.phase)).collect();
    let (lo, hi) = (omegas[0], omegas[omegas.len() - 1]);
    let center = (lo + hi) / T::lit(2.0);
    let scale = (hi - lo) / T::lit(2.0);
    if !(scale > T::zero()) {
        return Err(Error::InsufficientSpan { span_linewidths: 0.0 });
    }
    let mut p = initial_guess(&omegas, &t, center, scale)?;
    // Remove the guessed linear phase so the fit starts near the data.
    let unwrapped = unwrap_phase(&sorted.iter().map(|s| s.phase).collect::<Vec<_>>());
    let n = unwrapped.len();
    let edge = (n / 10).max(2);
    let slope = ((unwrapped[n - 1] - unwrapped[n - edge]) + (unwrapped[edge - 1] - unwrapped[0]))
        / ((omegas[n - 1] - omegas[n - edge]) + (omegas[edge - 1] - omegas[0]))
        * scale;
    if slope.is_finite() {
        p[5] = slope;
        let x_edges = |k: usize| (omegas[k] - center) / scale;
        let mean_edge_phase = (0..edge)
            .chain(n - edge..n)
            .fold(C::new(T::zero(), T::zero()), |acc, k| {
                acc + t[k] * Complex::from_polar(T::one(), -slope * x_edges(k))
            })
            .arg();
        p[4] = mean_edge_phase;
    }
    let data = Data {
        x: omegas.iter().map(|&w| (w - center) / scale).collect(),
        t,
    };

    let mut lambda = T::lit(1e-3);
    let mut current = cost(&p, &data, scale);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Normal equations of the stacked real/imaginary residual.
        let mut jtj = vec![vec![T::zero(); 6]; 6];
        let mut jtr = [T::zero(); 6];
        for (&x, &td) in data.x.iter().zip(&data.t) {
            let (m, d) = evaluate(&p, x, scale);
            let r = m - td;
            for a in 0..6 {
                jtr[a] += d[a].re * r.re + d[a].im * r.im;
                for b in a..6 {
                    jtj[a][b] += d[a].re * d[b].re + d[a].im * d[b].im;
                }
            }
        }
        for a in 0..6 {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }
        let mut accepted = false;
        while lambda < T::lit(1e16) {
            let mut damped = jtj.clone();
            for a in 0..6 {
                damped[a][a] += lambda * jtj[a][a].max(T::epsilon());
            }
            let rhs: Vec<T> = jtr.iter().map(|v| -*v).collect();
            let Some(step) = solve(&damped, &rhs) else {
                lambda *= T::lit(10.0);
                continue;
            };
            let mut trial = p;
            for a in 0..6 {
                trial[a] += step[a];
            }
            let c = cost(&trial, &data, scale);
            if c.is_finite() && c <= current {
                let small_step = step
                    .iter()
                    .zip(&trial)
                    .all(|(s, v)| s.abs() <= T::lit(1e-13) * (T::one() + v.abs()));
                let small_gain = current - c <= T::lit(1e-15) * current;
                p = trial;
                current = c;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                accepted = true;
                if small_step || small_gain {
                    converged = true;
                }
                break;
            }
            lambda *= T::lit(10.0);
        }
        if !accepted {
            // No downhill step at any damping: at a minimum to working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged || !current.is_finite() {
        return Err(Error::FitDiverged {
            iterations,
            residual: current.sqrt().f64(),
            params: p.iter().map(|v| v.f64()).collect(),
        });
    }

    let mut jtj = vec![vec![T::zero(); 6]; 6];
    for &x in &data.x {
        let (_, d) = evaluate(&p, x, scale);
        for a in 0..6 {
            for b in 0..6 {
                jtj[a][b] += d[a].re * d[b].re + d[a].im * d[b].im;
            }
        }
    }
    let dof = T::idx((2 * data.x.len()).saturating_sub(6).max(1));
    let variance = current / dof;
    let covariance = invert(&jtj)
        .map(|inv| {
            inv.into_iter()
                .map(|row| row.into_iter().map(|v| v * variance).collect())
                .collect()
        })
        .unwrap_or_else(|| vec![vec![T::infinity(); 6]; 6]);
    let fit = TransferFit {
        tau_e: T::lit(2.0) / p[0].exp(),
        tau_tot: p[1].exp().recip(),
        omega0: center + scale * p[2],
        amplitude: p[3].exp(),
        phase0: p[4],
        phase_slope: p[5],
        center,
        scale,
        covariance,
        residual_norm: current.sqrt(),
        iterations,
        domain: (lo, hi),
    };
    if !(fit.tau_e > T::zero() && fit.tau_tot > T::zero()) {
        return Err(Error::FitDiverged {
            iterations,
            residual: current.sqrt().f64(),
            params: p.iter().map(|v| v.f64()).collect(),
        });
    }
    Ok(fit)
}

/// Field-enhancement phase on a set of frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FePhaseCurve<T> {
    pub omega: Vec<T>,
    /// `θ_FE`, unwrapped along `omega`.
    pub theta: Vec<T>,
    /// Frequency range over which the underlying fit is supported by data.
    pub domain: (T, T),
}

/// `θ_FE(ω) = π/2 + atan((ω − ω₀) τ_tot)` from a fitted resonance.
pub fn fe_phase_curve<T: Real>(fit: &TransferFit<T>, omegas: &[T]) -> FePhaseCurve<T> {
    let raw: Vec<T> = omegas
        .iter()
        .map(|&w| T::FRAC_PI_2() + ((w - fit.omega0) * fit.tau_tot).atan())
        .collect();
    FePhaseCurve {
        omega: omegas.to_vec(),
        theta: unwrap_phase(&raw),
        domain: fit.domain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resonator::{Band, RingParams};
    use crate::synth::synthesize_transfer_scan;
    use std::f64::consts::PI;

    fn scan(ring: &RingParams<f64>, band: Band, noise: f64, seed: u64) -> Vec<TransferSample<f64>> {
        let res = ring.resonance(band);
        let omegas: Vec<f64> = (0..201).map(|k| res.omega0 + (k as f64 - 100.0) * 8e9).collect();
        synthesize_transfer_scan(ring, band, &omegas, noise, seed).unwrap()
    }

    #[test]
    fn noiseless_round_trip_recovers_parameters() {
        let ring = RingParams::table1();
        for band in [Band::Signal, Band::Idler, Band::Pump] {
            let fit = fit_transfer(&scan(&ring, band, 0.0, 0)).unwrap();
            let res = ring.resonance(band);
            assert!((fit.tau_e / res.tau_e - 1.0).abs() < 1e-6, "{band:?} {}", fit.tau_e);
            assert!((fit.tau_tot / res.tau_tot - 1.0).abs() < 1e-6);
            assert!(((fit.omega0 - res.omega0) * res.tau_tot).abs() < 1e-6);
            assert!((fit.amplitude - 1.0).abs() < 1e-6);
            assert!(fit.residual_norm < 1e-9);
        }
    }

    #[test]
    fn recovers_with_background_phase_and_loss() {
        let ring = RingParams::table1();
        let band = Band::Signal;
        let res = ring.resonance(band);
        let samples: Vec<TransferSample<f64>> = scan(&ring, band, 0.0, 0)
            .into_iter()
            .map(|s| TransferSample {
                modulus: 0.63 * s.modulus,
                phase: s.phase + 1.1 + 2.0e-12 * (s.omega - res.omega0),
                ..s
            })
            .collect();
        let fit = fit_transfer(&samples).unwrap();
        assert!((fit.tau_tot / res.tau_tot - 1.0).abs() < 1e-6);
        assert!((fit.tau_e / res.tau_e - 1.0).abs() < 1e-6);
        assert!((fit.amplitude - 0.63).abs() < 1e-6);
    }

    #[test]
    fn flat_line_is_rejected() {
        let samples: Vec<TransferSample<f64>> = (0..50)
            .map(|k| TransferSample {
                omega: 1e15 + k as f64 * 1e9,
                modulus: 1.0,
                phase: 0.0,
            })
            .collect();
        assert!(matches!(fit_transfer(&samples), Err(Error::NoResonance { .. })));
    }

    #[test]
    fn narrow_scan_is_rejected() {
        let ring = RingParams::table1();
        let res = ring.resonance(Band::Signal);
        let omegas: Vec<f64> = (0..41).map(|k| res.omega0 + (k as f64 - 20.0) * 5e9).collect();
        let samples = synthesize_transfer_scan(&ring, Band::Signal, &omegas, 0.0, 0).unwrap();
        assert!(matches!(fit_transfer(&samples), Err(Error::InsufficientSpan { .. })));
    }

    #[test]
    fn one_percent_noise_recovers_lifetimes() {
        let ring = RingParams::table1();
        let res = *ring.resonance(Band::Signal);
        let mut ok_tot = 0;
        let mut ok_e = 0;
        for trial in 0..100 {
            let fit = fit_transfer(&scan(&ring, Band::Signal, 0.01, trial)).unwrap();
            if (fit.tau_tot / res.tau_tot - 1.0).abs() < 0.05 {
                ok_tot += 1;
            }
            if (fit.tau_e / res.tau_e - 1.0).abs() < 0.05 {
                ok_e += 1;
            }
        }
        assert!(ok_tot >= 95 && ok_e >= 95, "{ok_tot} {ok_e}");
    }

    #[test]
    fn fe_phase_limits() {
        let ring = RingParams::table1();
        let fit = fit_transfer(&scan(&ring, Band::Signal, 0.0, 0)).unwrap();
        let w0 = fit.omega0;
        let k = fit.tau_tot.recip();
        let c = fe_phase_curve(&fit, &[w0 - 1e6 * k, w0 - k, w0, w0 + k, w0 + 1e6 * k]);
        assert!(c.theta[0] < 1e-5);
        assert!((c.theta[1] - (PI / 2.0 - PI / 4.0)).abs() < 1e-12);
        assert!((c.theta[2] - PI / 2.0).abs() < 1e-12);
        assert!((c.theta[3] - (PI / 2.0 + PI / 4.0)).abs() < 1e-12);
        assert!((c.theta[4] - PI).abs() < 1e-5);
    }
}
