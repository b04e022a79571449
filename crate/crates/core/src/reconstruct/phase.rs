//! Per-point interference phase: unsigned from three intensity maps, signed
//! from a fringe scan over the relative arm phase.

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SpectralGrid;
use crate::linalg::invert;
use crate::scalar::{wrap_phase, Real};
use crate::synth::FringeScan;

/// Default arccos clamping tolerance.
pub const CLAMP_TOLERANCE: f64 = 0.05;
/// Default fringe amplitude significance (in standard errors) for validity.
pub const SNR_THRESHOLD: f64 = 3.0;

/// Phase estimate with uncertainty and validity mask. Masked points hold
/// zero and make no claim.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMap<T> {
    pub grid: SpectralGrid<T>,
    pub delta: Array2<T>,
    pub sigma: Array2<T>,
    pub mask: Array2<bool>,
}

impl<T: Real> PhaseMap<T> {
    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// Median `σ` over valid points.
    pub fn median_sigma(&self) -> Option<T> {
        let mut v: Vec<T> = self
            .sigma
            .iter()
            .zip(self.mask.iter())
            .filter(|(_, m)| **m)
            .map(|(s, _)| *s)
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let n = v.len();
        Some(if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
        })
    }
}

/// `|δ|` from the interference, ring-only and reference-only intensities
/// (dark counts already removed).
#[derive(Debug, Clone, PartialEq)]
pub struct AbsDelta<T> {
    pub phase: PhaseMap<T>,
    /// `max(|arg| − 1, 0)` of the arccos argument.
    pub clamp_distance: Array2<T>,
}

pub fn abs_delta<T: Real>(
    grid: &SpectralGrid<T>,
    i_int: &Array2<T>,
    i_res: &Array2<T>,
    i_spi: &Array2<T>,
    clamp_tolerance: T,
) -> Result<AbsDelta<T>> {
    let shape = grid.shape();
    for m in [i_int, i_res, i_spi] {
        if m.dim() != shape {
            return Err(Error::GridMismatch(format!("map {:?} vs grid {:?}", m.dim(), shape)));
        }
    }
    let one = T::one();
    let two = T::lit(2.0);
    let mut delta = Array2::zeros(shape);
    let mut sigma = Array2::zeros(shape);
    let mut mask = Array2::from_elem(shape, false);
    let mut clamp = Array2::zeros(shape);
    for idx in ndarray::indices(shape) {
        let (i, r, s) = (i_int[idx], i_res[idx], i_spi[idx]);
        if !(r > T::zero() && s > T::zero()) || !i.is_finite() {
            continue;
        }
        let den = two * r.sqrt() * s.sqrt();
        let arg = (i - r - s) / den;
        let dist = (arg.abs() - one).max(T::zero());
        clamp[idx] = dist;
        if dist > clamp_tolerance {
            continue;
        }
        let c = arg.max(-one).min(one);
        let d = c.acos();
        // First-order Poisson propagation through the arccos argument.
        let var = |x: T| x.abs().max(one);
        let d_int = den.recip();
        let d_r = -den.recip() - arg / (two * r);
        let d_s = -den.recip() - arg / (two * s);
        let sigma_arg = (d_int * d_int * var(i) + d_r * d_r * var(r) + d_s * d_s * var(s)).sqrt();
        // Near |δ| = 0 or π the slope diverges; use the square-root regime there.
        let sigma_d = (sigma_arg / d.sin().max(T::min_positive_value())).min((two * sigma_arg).sqrt());
        delta[idx] = d;
        sigma[idx] = sigma_d;
        mask[idx] = true;
    }
    Ok(AbsDelta {
        phase: PhaseMap {
            grid: *grid,
            delta,
            sigma,
            mask,
        },
        clamp_distance: clamp,
    })
}

/// Per-point fit of `counts ≈ A cos(Δθ + δ) + B`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeFit<T> {
    pub phase: PhaseMap<T>,
    pub amplitude: Array2<T>,
    pub sigma_amplitude: Array2<T>,
    pub background: Array2<T>,
}

impl<T: Real> FringeFit<T> {
    /// Visibility `A / B` per point (zero when `B ≤ 0`).
    pub fn visibility(&self) -> Array2<T> {
        let mut v = self.amplitude.clone();
        v.zip_mut_with(&self.background, |a, b| {
            *a = if *b > T::zero() { *a / *b } else { T::zero() }
        });
        v
    }

    /// Mask for a different significance threshold; `A ≥ k σ_A`.
    pub fn mask_at(&self, threshold: T) -> Array2<bool> {
        let mut m = Array2::from_elem(self.amplitude.dim(), false);
        ndarray::Zip::from(&mut m)
            .and(&self.amplitude)
            .and(&self.sigma_amplitude)
            .for_each(|m, a, s| *m = *a > T::zero() && *a >= threshold * *s);
        m
    }
}

struct PointFit<T> {
    a: T,
    b: T,
    delta: T,
    sigma_a: T,
    sigma_delta: T,
}

fn fit_point<T: Real>(basis: &[[T; 3]], counts: &[T]) -> Option<PointFit<T>> {
    let mut xtwx = vec![vec![T::zero(); 3]; 3];
    let mut xtwy = [T::zero(); 3];
    for (row, &y) in basis.iter().zip(counts) {
        let w = y.max(T::one()).recip();
        for p in 0..3 {
            xtwy[p] += w * row[p] * y;
            for q in 0..3 {
                xtwx[p][q] += w * row[p] * row[q];
            }
        }
    }
    let cov = invert(&xtwx)?;
    let c: Vec<T> = (0..3).map(|p| (0..3).map(|q| cov[p][q] * xtwy[q]).sum()).collect();
    let a = c[0].hypot(c[1]);
    let (ga, gd) = if a > T::zero() {
        let a2 = a * a;
        ([c[0] / a, c[1] / a], [c[1] / a2, -c[0] / a2])
    } else {
        ([T::zero(); 2], [T::zero(); 2])
    };
    let quad = |g: [T; 2]| {
        (g[0] * g[0] * cov[0][0] + T::lit(2.0) * g[0] * g[1] * cov[0][1] + g[1] * g[1] * cov[1][1])
            .max(T::zero())
            .sqrt()
    };
    Some(PointFit {
        a,
        b: c[2],
        delta: wrap_phase((-c[1]).atan2(c[0])),
        sigma_a: quad(ga),
        sigma_delta: if a > T::zero() { quad(gd) } else { T::PI() },
    })
}

/// Weighted linear least squares in `{cos Δθ, sin Δθ, 1}` with Poisson
/// weights `1/max(counts, 1)`. Points whose amplitude is below
/// `snr_threshold` standard errors are masked.
pub fn fit_fringe<T: Real>(grid: &SpectralGrid<T>, scan: &FringeScan<T>, snr_threshold: T) -> Result<FringeFit<T>> {
    let (ns, ni, nt) = scan.counts.dim();
    if (ns, ni) != grid.shape() {
        return Err(Error::GridMismatch(format!(
            "scan {:?} vs grid {:?}",
            (ns, ni),
            grid.shape()
        )));
    }
    let basis: Vec<[T; 3]> = scan.schedule.iter().map(|t| [t.cos(), t.sin(), T::one()]).collect();
    // Conditioning of the unweighted design: all-equal or antipodal-only
    // schedules cannot separate A, δ and B.
    let mut gram = vec![vec![T::zero(); 3]; 3];
    for row in &basis {
        for p in 0..3 {
            for q in 0..3 {
                gram[p][q] += row[p] * row[q];
            }
        }
    }
    let n = T::idx(nt.max(1));
    let det = {
        let g = &gram;
        g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
            + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
    } / (n * n * n);
    if nt < 3 || !(det > T::lit(1e-9)) {
        return Err(Error::DegenerateSchedule(format!(
            "{nt} phases with normalized design determinant {:.3e}",
            det.f64()
        )));
    }
    let points: Vec<Option<PointFit<T>>> = (0..ns * ni)
        .into_par_iter()
        .map(|p| {
            let lane = scan.counts.index_axis(Axis(0), p / ni);
            let counts: Vec<T> = lane.index_axis(Axis(0), p % ni).to_vec();
            fit_point(&basis, &counts)
        })
        .collect();
    let shape = (ns, ni);
    let mut out = FringeFit {
        phase: PhaseMap {
            grid: *grid,
            delta: Array2::zeros(shape),
            sigma: Array2::zeros(shape),
            mask: Array2::from_elem(shape, false),
        },
        amplitude: Array2::zeros(shape),
        sigma_amplitude: Array2::zeros(shape),
        background: Array2::zeros(shape),
    };
    for (p, fit) in points.into_iter().enumerate() {
        let idx = (p / ni, p % ni);
        let Some(f) = fit else { continue };
        out.amplitude[idx] = f.a;
        out.sigma_amplitude[idx] = f.sigma_a;
        out.background[idx] = f.b;
        if f.a > T::zero() && f.a >= snr_threshold * f.sigma_a {
            out.phase.delta[idx] = f.delta;
            out.phase.sigma[idx] = f.sigma_delta;
            out.phase.mask[idx] = true;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::UniformAxis;
    use crate::synth::uniform_schedule;
    use ndarray::Array3;
    use std::f64::consts::PI;

    fn grid(n: usize, m: usize) -> SpectralGrid<f64> {
        SpectralGrid::new(
            UniformAxis::new(0.0, 1.0, n).unwrap(),
            UniformAxis::new(0.0, 1.0, m).unwrap(),
        )
    }

    fn scan(params: &[(f64, f64, f64)], schedule: Vec<f64>) -> FringeScan<f64> {
        let nt = schedule.len();
        let counts = Array3::from_shape_fn((1, params.len(), nt), |(_, p, k)| {
            let (a, b, d) = params[p];
            a * (schedule[k] + d).cos() + b
        });
        FringeScan::new(schedule, counts).unwrap()
    }

    #[test]
    fn abs_delta_limits() {
        let g = grid(1, 3);
        let r = Array2::from_elem((1, 3), 4.0);
        let s = Array2::from_elem((1, 3), 9.0);
        let i = Array2::from_shape_vec((1, 3), vec![4.0 + 9.0 + 12.0, 13.0, 1.0]).unwrap();
        let out = abs_delta(&g, &i, &r, &s, 0.05).unwrap();
        assert!(out.phase.delta[[0, 0]].abs() < 1e-12);
        assert!((out.phase.delta[[0, 1]] - PI / 2.0).abs() < 1e-12);
        assert!((out.phase.delta[[0, 2]] - PI).abs() < 1e-12);
        assert!(out.phase.mask.iter().all(|m| *m));
    }

    #[test]
    fn abs_delta_clamps_then_masks() {
        let g = grid(1, 3);
        let r = Array2::from_elem((1, 3), 1.0);
        let s = Array2::from_elem((1, 3), 1.0);
        // Arguments 1.02 (clamped), 1.2 (masked), and a zero-power point.
        let i = Array2::from_shape_vec((1, 3), vec![2.0 + 2.04, 2.0 + 2.4, 1.0]).unwrap();
        let mut r2 = r.clone();
        r2[[0, 2]] = 0.0;
        let out = abs_delta(&g, &i, &r2, &s, 0.05).unwrap();
        assert_eq!(out.phase.mask.row(0).to_vec(), vec![true, false, false]);
        assert!((out.clamp_distance[[0, 0]] - 0.02).abs() < 1e-12);
        assert_eq!(out.phase.delta[[0, 0]], 0.0);
        let zero = Array2::zeros((1, 3));
        let all_masked = abs_delta(&g, &zero, &zero, &zero, 0.05).unwrap();
        assert_eq!(all_masked.phase.valid_count(), 0);
    }

    #[test]
    fn exact_fringe_is_recovered() {
        let sc = scan(&[(1.0, 2.0, 0.7), (3.0, 5.0, -2.9)], uniform_schedule(30));
        // Significance is irrelevant here: disable the mask.
        let f = fit_fringe(&grid(1, 2), &sc, 0.0).unwrap();
        assert!((f.amplitude[[0, 0]] - 1.0).abs() < 1e-9);
        assert!((f.background[[0, 0]] - 2.0).abs() < 1e-9);
        assert!((f.phase.delta[[0, 0]] - 0.7).abs() < 1e-9);
        assert!((f.phase.delta[[0, 1]] + 2.9).abs() < 1e-9);
    }

    #[test]
    fn phase_wrapping_is_irrelevant() {
        let a = fit_fringe(&grid(1, 1), &scan(&[(200.0, 300.0, 0.4)], uniform_schedule(12)), 3.0).unwrap();
        let b = fit_fringe(
            &grid(1, 1),
            &scan(&[(200.0, 300.0, 0.4 + 2.0 * PI)], uniform_schedule(12)),
            3.0,
        )
        .unwrap();
        assert!(a.phase.mask[[0, 0]]);
        assert!((a.phase.delta[[0, 0]] - b.phase.delta[[0, 0]]).abs() < 1e-12);
    }

    #[test]
    fn degenerate_schedules_are_rejected() {
        for sched in [vec![0.5; 10], vec![0.0, PI, 0.0, PI]] {
            let r = fit_fringe(&grid(1, 1), &scan(&[(1.0, 2.0, 0.1)], sched), 3.0);
            assert!(matches!(r, Err(Error::DegenerateSchedule(_))));
        }
        // Four well-spread phases suffice.
        assert!(fit_fringe(&grid(1, 1), &scan(&[(1.0, 2.0, 0.1)], uniform_schedule(4)), 3.0).is_ok());
    }

    #[test]
    fn flat_counts_are_masked() {
        let f = fit_fringe(&grid(1, 1), &scan(&[(0.0, 100.0, 0.0)], uniform_schedule(30)), 3.0).unwrap();
        assert!(!f.phase.mask[[0, 0]]);
        assert_eq!(f.phase.valid_count(), 0);
    }
}
