//! Joint spectral phase and complex amplitude from the measured pieces.

use ndarray::Array2;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::jsa::ComplexJsa;
use crate::reconstruct::phase::PhaseMap;
use crate::reconstruct::transfer::FePhaseCurve;
use crate::resonator::Band;
use crate::scalar::{wrap_phase, Real, C};
use crate::stimulated::{axis_of, band_axis, PhaseConvention};

/// Joint spectral phase, wrapped to `(−π, π]`, zero at `reference`.
#[derive(Debug, Clone, PartialEq)]
pub struct JspMap<T> {
    pub values: Array2<T>,
    pub mask: Array2<bool>,
    pub reference: (usize, usize),
}

/// `θ_φ = δ − e·θ_FE(seeded)` with `e` the convention's exponent, offset so
/// that the phase at `reference` is zero.
pub fn assemble_jsp<T: Real>(
    delta: &PhaseMap<T>,
    curve: &FePhaseCurve<T>,
    seeded: Band,
    convention: PhaseConvention,
    reference: (usize, usize),
) -> Result<JspMap<T>> {
    let axis = axis_of(&delta.grid, seeded)?;
    let (lo, hi) = curve.domain;
    let slack = axis.step() * T::lit(1e-6);
    if axis.start() < lo - slack || axis.end() > hi + slack {
        return Err(Error::OutsideGrid {
            what: "seeded axis vs field-enhancement phase curve",
            value: if axis.start() < lo - slack {
                axis.start().f64()
            } else {
                axis.end().f64()
            },
            lo: lo.f64(),
            hi: hi.f64(),
        });
    }
    if curve.omega.len() != axis.len()
        || curve
            .omega
            .iter()
            .enumerate()
            .any(|(k, w)| (*w - axis.value(k)).abs() > slack)
    {
        return Err(Error::GridMismatch(
            "phase curve is not sampled on the seeded axis".into(),
        ));
    }
    if delta.valid_count() == 0 {
        return Err(Error::EmptyMask("assemble_jsp"));
    }
    if !delta.mask[reference] {
        return Err(Error::param("reference point", "must lie on the valid mask"));
    }
    let e = T::lit(convention.fe_exponent() as f64);
    let seeded_axis = band_axis(seeded)?;
    let raw = Array2::from_shape_fn(delta.delta.dim(), |idx| {
        let k = if seeded_axis.index() == 0 { idx.0 } else { idx.1 };
        delta.delta[idx] - e * curve.theta[k]
    });
    let offset = raw[reference];
    let mut values = raw.mapv(|v| wrap_phase(v - offset));
    ndarray::Zip::from(&mut values).and(&delta.mask).for_each(|v, m| {
        if !*m {
            *v = T::zero();
        }
    });
    Ok(JspMap {
        values,
        mask: delta.mask.clone(),
        reference,
    })
}

/// `√JSI · e^{i JSP}` on the mask (zero elsewhere), normalized.
pub fn assemble_complex_jsa<T: Real>(
    jsi: &Array2<T>,
    jsp: &JspMap<T>,
    grid: &crate::grid::SpectralGrid<T>,
) -> Result<ComplexJsa<T>> {
    if jsi.dim() != jsp.values.dim() || jsi.dim() != grid.shape() {
        return Err(Error::GridMismatch(format!(
            "jsi {:?} vs jsp {:?}",
            jsi.dim(),
            jsp.values.dim()
        )));
    }
    if !jsp.mask.iter().any(|m| *m) {
        return Err(Error::EmptyMask("assemble_complex_jsa"));
    }
    if jsi.iter().any(|v| !(*v >= T::zero())) {
        return Err(Error::param("jsi", "must be nonnegative"));
    }
    let mut values = Array2::<C<T>>::zeros(jsi.dim());
    ndarray::Zip::from(&mut values)
        .and(jsi)
        .and(&jsp.values)
        .and(&jsp.mask)
        .for_each(|v, i, p, m| {
            if *m {
                *v = Complex::from_polar(i.sqrt(), *p);
            }
        });
    ComplexJsa::new(*grid, values)?.into_normalized()
}
