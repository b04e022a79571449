//! Entanglement and similarity metrics on joint spectra.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsa::ComplexJsa;
use crate::linalg::singular_values;
use crate::scalar::{Real, C};

/// Schmidt decomposition summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtResult<T> {
    /// Schmidt coefficients, nonincreasing, `Σλ² = 1`.
    pub coefficients: Vec<T>,
    /// `K = 1 / Σλ⁴`.
    pub k: T,
    /// Number of coefficients above `max(n_s, n_i)·ε·λ₀`.
    pub rank: usize,
    /// Grid shape `(n_s, n_i)`.
    pub shape: (usize, usize),
}

/// Schmidt number of a discretized amplitude. The uniform `√(Δω_s Δω_i)`
/// measure only rescales the matrix, so the normalized coefficients are
/// independent of it and of any global complex factor.
pub fn schmidt_number<T: Real>(jsa: &ComplexJsa<T>) -> Result<SchmidtResult<T>> {
    schmidt_of_matrix(&jsa.values)
}

pub fn schmidt_of_matrix<T: Real>(m: &Array2<C<T>>) -> Result<SchmidtResult<T>> {
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("schmidt_number input"));
    }
    let sv = singular_values(m);
    let total: T = sv.iter().map(|s| *s * *s).sum();
    if !(total > T::zero()) {
        return Err(Error::Degenerate("all-zero amplitude has no Schmidt decomposition"));
    }
    let norm = total.sqrt();
    let coefficients: Vec<T> = sv.iter().map(|s| *s / norm).collect();
    let purity: T = coefficients.iter().map(|l| (*l * *l) * (*l * *l)).sum();
    let cutoff = T::idx(m.nrows().max(m.ncols())) * T::epsilon() * coefficients[0];
    let rank = coefficients.iter().filter(|l| **l > cutoff).count();
    Ok(SchmidtResult {
        coefficients,
        k: purity.recip().max(T::one()),
        rank,
        shape: m.dim(),
    })
}

/// Schmidt number from `Tr(ρ)² / Tr(ρ²)`, `ρ = MMᴴ`; independent of the SVD.
pub fn schmidt_number_trace<T: Real>(m: &Array2<C<T>>) -> T {
    let mh = m.t().mapv(|v| v.conj());
    let (small, large) = if m.nrows() <= m.ncols() {
        (m.view(), mh.view())
    } else {
        (mh.view(), m.view())
    };
    let rho = small.dot(&large);
    let tr: T = (0..rho.nrows()).map(|i| rho[[i, i]].re).sum();
    let tr2: T = rho.iter().map(|v| v.norm_sqr()).sum();
    tr * tr / tr2
}

/// Amplitude with the phase discarded, `√|φ|²`; its Schmidt number is the
/// intensity-only lower bound.
pub fn phase_stripped<T: Real>(jsa: &ComplexJsa<T>) -> ComplexJsa<T> {
    ComplexJsa {
        grid: jsa.grid,
        values: jsa.values.mapv(|v| C::new(v.norm(), T::zero())),
        normalized: jsa.normalized,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FidelityKind {
    /// `100·(Σ√(p q))²` with `p, q` normalized to unit sum.
    Intensity,
    /// `100·max_θ |⟨a|e^{iθ}b⟩|²` with `a, b` normalized on the mask.
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityResult<T> {
    /// In `[0, 100]`.
    pub value: T,
    pub kind: FidelityKind,
    /// Maximizing global phase `θ* = −Arg⟨a|b⟩` (complex kind only).
    pub phase_offset: Option<T>,
}

fn check_shape<A, B>(a: &Array2<A>, b: &Array2<B>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Bhattacharyya-squared overlap of two nonnegative maps, in percent.
pub fn fidelity_intensity<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Result<FidelityResult<T>> {
    check_shape(a, b)?;
    if a.iter().chain(b.iter()).any(|v| !(*v >= T::zero()) || !v.is_finite()) {
        return Err(Error::param("intensity map", "entries must be finite and nonnegative"));
    }
    let (sa, sb): (T, T) = (a.sum(), b.sum());
    if !(sa > T::zero()) || !(sb > T::zero()) {
        return Err(Error::Degenerate("intensity map sums to zero"));
    }
    let overlap: T = a.iter().zip(b.iter()).map(|(p, q)| p.sqrt() * q.sqrt()).sum::<T>() / (sa.sqrt() * sb.sqrt());
    Ok(FidelityResult {
        value: (T::lit(100.0) * overlap * overlap).min(T::lit(100.0)),
        kind: FidelityKind::Intensity,
        phase_offset: None,
    })
}

/// Phase-insensitive state overlap of two amplitudes on a shared mask, in
/// percent. `mask = None` uses every grid point.
pub fn fidelity_complex<T: Real>(
    a: &ComplexJsa<T>,
    b: &ComplexJsa<T>,
    mask: Option<&Array2<bool>>,
) -> Result<FidelityResult<T>> {
    a.grid.ensure_same(&b.grid)?;
    fidelity_complex_values(&a.values, &b.values, mask)
}

pub fn fidelity_complex_values<T: Real>(
    a: &Array2<C<T>>,
    b: &Array2<C<T>>,
    mask: Option<&Array2<bool>>,
) -> Result<FidelityResult<T>> {
    check_shape(a, b)?;
    if let Some(m) = mask {
        check_shape(a, m)?;
    }
    let keep = |idx: (usize, usize)| mask.is_none_or(|m| m[idx]);
    let mut inner = C::new(T::zero(), T::zero());
    let (mut na, mut nb) = (T::zero(), T::zero());
    let mut any = false;
    for ((idx, x), y) in a.indexed_iter().zip(b.iter()) {
        if !keep(idx) {
            continue;
        }
        any = true;
        inner += x.conj() * *y;
        na += x.norm_sqr();
        nb += y.norm_sqr();
    }
    if !any {
        return Err(Error::EmptyMask("fidelity_complex"));
    }
    if !(na > T::zero()) || !(nb > T::zero()) {
        return Err(Error::Degenerate("amplitude vanishes on the mask"));
    }
    // Ratios of roots keep single-precision inputs (~1e-22 per cell) in range.
    let overlap = inner.norm() / (na.sqrt() * nb.sqrt());
    let f = T::lit(100.0) * overlap * overlap;
    Ok(FidelityResult {
        value: f.min(T::lit(100.0)),
        kind: FidelityKind::Complex,
        phase_offset: Some(-inner.arg()),
    })
}
