//! Classical stimulated-emission amplitudes and their interference.
//!
//! Seeding one band with a monochromatic laser stimulates an output field in
//! the other band proportional to the joint amplitude along the seeded
//! coordinate. In a ring the seed is coupled in and the stimulated field out
//! through the bus, which adds the factor `FE*/FE` at the seed frequency.

use ndarray::{Array2, Axis};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SpectralGrid, UniformAxis};
use crate::jsa::ComplexJsa;
use crate::resonator::{Band, RingParams};
use crate::scalar::{Real, C};

/// Resonance order of the seed relative to the pump order `m_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum SeedOrder {
    /// `m_p − 1`: the lower-frequency (longer-wavelength) band.
    Minus,
    /// `m_p + 1`: the higher-frequency band.
    Plus,
}

impl TryFrom<i8> for SeedOrder {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            -1 => Ok(Self::Minus),
            1 => Ok(Self::Plus),
            _ => Err(format!("seed order must be +1 or -1, got {v}")),
        }
    }
}

impl From<SeedOrder> for i8 {
    fn from(o: SeedOrder) -> i8 {
        match o {
            SeedOrder::Minus => -1,
            SeedOrder::Plus => 1,
        }
    }
}

impl std::str::FromStr for SeedOrder {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "-1" | "minus" => Ok(Self::Minus),
            "+1" | "1" | "plus" => Ok(Self::Plus),
            other => Err(format!("seed order must be +1 or -1, got {other:?}")),
        }
    }
}

impl SeedOrder {
    pub fn other(self) -> Self {
        match self {
            Self::Minus => Self::Plus,
            Self::Plus => Self::Minus,
        }
    }

    /// Which of the signal/idler bands this order seeds.
    pub fn band<T: Real>(self, ring: &RingParams<T>) -> Band {
        let s = ring.resonance(Band::Signal).omega0;
        let i = ring.resonance(Band::Idler).omega0;
        let signal_is_lower = s < i;
        match (self, signal_is_lower) {
            (Self::Minus, true) | (Self::Plus, false) => Band::Signal,
            _ => Band::Idler,
        }
    }
}

/// Map axis holding a band: signal rows (`Axis(0)`), idler columns (`Axis(1)`).
pub fn band_axis(band: Band) -> Result<Axis> {
    match band {
        Band::Signal => Ok(Axis(0)),
        Band::Idler => Ok(Axis(1)),
        Band::Pump => Err(Error::param("band", "pump band has no map axis")),
    }
}

pub fn axis_of<T>(grid: &SpectralGrid<T>, band: Band) -> Result<&UniformAxis<T>> {
    match band {
        Band::Signal => Ok(&grid.signal),
        Band::Idler => Ok(&grid.idler),
        Band::Pump => Err(Error::param("band", "pump band has no map axis")),
    }
}

/// Sign of the field-enhancement phase in the stimulated amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum PhaseConvention {
    /// `Arg γ = θ_φ − 2θ_FE`, from the bus-coupling factor `FE*/FE`.
    #[default]
    Appendix,
    /// `Arg γ = θ_φ + 2θ_FE`.
    MainText,
}

impl PhaseConvention {
    /// Multiplier of `θ_FE` in the stimulated phase.
    pub fn fe_exponent(self) -> i32 {
        match self {
            Self::Appendix => -2,
            Self::MainText => 2,
        }
    }

    /// `e^{i·exponent·θ_FE}` at the seed frequency.
    pub fn factor<T: Real>(self, ring: &RingParams<T>, omega: T, band: Band) -> Result<C<T>> {
        let f = ring.fe_phase_factor(omega, band)?;
        Ok(match self {
            Self::Appendix => f,
            Self::MainText => f.conj(),
        })
    }
}

/// Seed laser: resonance order and complex amplitude at the Input port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedSpec<T> {
    pub order: SeedOrder,
    pub amplitude: C<T>,
}

impl<T: Real> SeedSpec<T> {
    pub fn new(order: SeedOrder) -> Self {
        Self {
            order,
            amplitude: C::new(T::one(), T::zero()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    Ring,
    Spiral,
    Combined,
    /// Output of the inverse pipeline rather than a simulation.
    Reconstructed,
}

/// Stimulated output amplitude over a grid. Each sample along the seeded
/// axis is the response to a seed at that frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct StimulatedMap<T> {
    pub grid: SpectralGrid<T>,
    pub values: Array2<C<T>>,
    pub source: SourceTag,
}

impl<T: Real> StimulatedMap<T> {
    pub fn new(grid: SpectralGrid<T>, values: Array2<C<T>>, source: SourceTag) -> Result<Self> {
        if values.dim() != grid.shape() {
            return Err(Error::GridMismatch(format!(
                "values {:?} vs grid {:?}",
                values.dim(),
                grid.shape()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("stimulated amplitude"));
        }
        Ok(Self { grid, values, source })
    }

    pub fn intensity(&self) -> Array2<T> {
        self.values.mapv(|v| v.norm_sqr())
    }
}

/// Unit-modulus factor `e^{∓2iθ_FE}` for every sample of the seeded axis.
pub fn fe_correction<T: Real>(
    ring: &RingParams<T>,
    grid: &SpectralGrid<T>,
    order: SeedOrder,
    convention: PhaseConvention,
) -> Result<Vec<C<T>>> {
    let band = order.band(ring);
    axis_of(grid, band)?
        .values()
        .into_iter()
        .map(|w| convention.factor(ring, w, band))
        .collect()
}

/// Ring stimulated amplitude for a seed scanned across the seeded axis.
pub fn ring_stimulated_amplitude<T: Real>(
    jsa: &ComplexJsa<T>,
    ring: &RingParams<T>,
    seed: &SeedSpec<T>,
    convention: PhaseConvention,
) -> Result<StimulatedMap<T>> {
    let factors = fe_correction(ring, &jsa.grid, seed.order, convention)?;
    let axis = band_axis(seed.order.band(ring))?;
    let scale = seed.amplitude.conj();
    let mut values = jsa.values.clone();
    for (k, mut lane) in values.axis_iter_mut(axis).enumerate() {
        let f = factors[k] * scale;
        lane.mapv_inplace(|v| v * f);
    }
    StimulatedMap::new(jsa.grid, values, SourceTag::Ring)
}

/// Ring stimulated amplitude for one seed frequency: the slice across the
/// detected axis at the seeded grid sample `seed_omega`.
pub fn ring_stimulated_slice<T: Real>(
    jsa: &ComplexJsa<T>,
    ring: &RingParams<T>,
    seed: &SeedSpec<T>,
    seed_omega: T,
    convention: PhaseConvention,
) -> Result<Vec<C<T>>> {
    let band = seed.order.band(ring);
    let axis = axis_of(&jsa.grid, band)?;
    let k = axis.index_of(seed_omega).ok_or(Error::OutsideGrid {
        what: "seed frequency",
        value: seed_omega.f64(),
        lo: axis.start().f64(),
        hi: axis.end().f64(),
    })?;
    let f = convention.factor(ring, seed_omega, band)? * seed.amplitude.conj();
    Ok(jsa
        .values
        .index_axis(band_axis(band)?, k)
        .iter()
        .map(|v| *v * f)
        .collect())
}

/// Reference-source amplitude: the spiral JSA without resonant correction.
pub fn spiral_stimulated_amplitude<T: Real>(jsa: &ComplexJsa<T>, seed: &SeedSpec<T>) -> Result<StimulatedMap<T>> {
    let scale = seed.amplitude.conj();
    StimulatedMap::new(jsa.grid, jsa.values.mapv(|v| v * scale), SourceTag::Spiral)
}

/// `|e^{iΔθ} a + b|²`, i.e. `|a|² + |b|² + 2|a||b| cos(Δθ + δ)` with
/// `δ = Arg a − Arg b`.
pub fn interference_intensity<T: Real>(
    a: &StimulatedMap<T>,
    b: &StimulatedMap<T>,
    delta_theta: T,
) -> Result<Array2<T>> {
    Beamsplitter::balanced().combine(a, b, delta_theta)
}

/// Output beamsplitter with power imbalance `ε`: the two arms are weighted
/// by `√(1+ε)` and `√(1−ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beamsplitter<T> {
    pub imbalance: T,
}

impl<T: Real> Beamsplitter<T> {
    pub fn balanced() -> Self {
        Self { imbalance: T::zero() }
    }

    pub fn new(imbalance: T) -> Result<Self> {
        if !(imbalance.abs() < T::one()) {
            return Err(Error::param("imbalance", "must lie in (-1, 1)"));
        }
        Ok(Self { imbalance })
    }

    pub fn weights(&self) -> (T, T) {
        ((T::one() + self.imbalance).sqrt(), (T::one() - self.imbalance).sqrt())
    }

    pub fn combine(&self, a: &StimulatedMap<T>, b: &StimulatedMap<T>, delta_theta: T) -> Result<Array2<T>> {
        a.grid.ensure_same(&b.grid)?;
        let (wa, wb) = self.weights();
        let rot = Complex::from_polar(wa, delta_theta);
        let mut out = Array2::zeros(a.values.dim());
        ndarray::Zip::from(&mut out)
            .and(&a.values)
            .and(&b.values)
            .for_each(|o, x, y| *o = (*x * rot + *y * wb).norm_sqr());
        Ok(out)
    }
}

/// Closed-form fringe visibility `2|a||b| / (|a|² + |b|²)`.
pub fn visibility<T: Real>(a: &StimulatedMap<T>, b: &StimulatedMap<T>) -> Result<Array2<T>> {
    a.grid.ensure_same(&b.grid)?;
    let mut out = Array2::zeros(a.values.dim());
    ndarray::Zip::from(&mut out)
        .and(&a.values)
        .and(&b.values)
        .for_each(|o, x, y| {
            let den = x.norm_sqr() + y.norm_sqr();
            *o = if den > T::zero() {
                T::lit(2.0) * x.norm() * y.norm() / den
            } else {
                T::zero()
            };
        });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::wrap_phase;
    use std::f64::consts::PI;

    fn ring() -> RingParams<f64> {
        RingParams::table1()
    }

    fn synthetic(ring: &RingParams<f64>) -> ComplexJsa<f64> {
        let s = ring.resonance(Band::Signal);
        let i = ring.resonance(Band::Idler);
        let grid = SpectralGrid::new(
            UniformAxis::centered(s.omega0, 4.0 / s.tau_tot, 11).unwrap(),
            UniformAxis::centered(i.omega0, 4.0 / i.tau_tot, 9).unwrap(),
        );
        let values = Array2::from_shape_fn((11, 9), |(a, b)| {
            C::from_polar(1.0 + 0.1 * a as f64 + 0.05 * b as f64, 0.3 * a as f64 - 0.2 * b as f64)
        });
        ComplexJsa::new(grid, values).unwrap()
    }

    #[test]
    fn seed_orders_map_to_bands() {
        let r = ring();
        // The signal band is the longer wavelength in the default ring.
        assert_eq!(SeedOrder::Minus.band(&r), Band::Signal);
        assert_eq!(SeedOrder::Plus.band(&r), Band::Idler);
        assert_eq!("+1".parse::<SeedOrder>().unwrap(), SeedOrder::Plus);
        assert!("2".parse::<SeedOrder>().is_err());
    }

    #[test]
    fn on_resonance_factor_is_minus_one() {
        let r = ring();
        let w0 = r.resonance(Band::Signal).omega0;
        let f = PhaseConvention::Appendix.factor(&r, w0, Band::Signal).unwrap();
        assert!((f - C::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn modulus_is_unchanged() {
        let r = ring();
        let jsa = synthetic(&r);
        let seed = SeedSpec::new(SeedOrder::Minus);
        let g = ring_stimulated_amplitude(&jsa, &r, &seed, PhaseConvention::Appendix).unwrap();
        for (x, y) in g.values.iter().zip(jsa.values.iter()) {
            assert!((x.norm() / y.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seed_order_swap_shifts_phase_by_fe_difference() {
        let r = ring();
        let jsa = synthetic(&r);
        let minus =
            ring_stimulated_amplitude(&jsa, &r, &SeedSpec::new(SeedOrder::Minus), PhaseConvention::Appendix).unwrap();
        let plus =
            ring_stimulated_amplitude(&jsa, &r, &SeedSpec::new(SeedOrder::Plus), PhaseConvention::Appendix).unwrap();
        for ((s, i), m) in minus.values.indexed_iter() {
            let p = plus.values[[s, i]];
            let ths = r.fe_phase(jsa.grid.signal.value(s), Band::Signal);
            let thi = r.fe_phase(jsa.grid.idler.value(i), Band::Idler);
            let diff = wrap_phase(p.arg() - m.arg() - 2.0 * (ths - thi));
            assert!(diff.abs() < 1e-12);
            assert!((p.norm() - m.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn slice_matches_map_and_rejects_outside() {
        let r = ring();
        let jsa = synthetic(&r);
        let seed = SeedSpec::new(SeedOrder::Minus);
        let map = ring_stimulated_amplitude(&jsa, &r, &seed, PhaseConvention::Appendix).unwrap();
        let w = jsa.grid.signal.value(3);
        let row = ring_stimulated_slice(&jsa, &r, &seed, w, PhaseConvention::Appendix).unwrap();
        for (k, v) in row.iter().enumerate() {
            assert!((*v - map.values[[3, k]]).norm() < 1e-14);
        }
        let outside = jsa.grid.signal.end() + 1e12;
        assert!(matches!(
            ring_stimulated_slice(&jsa, &r, &seed, outside, PhaseConvention::Appendix),
            Err(Error::OutsideGrid { .. })
        ));
    }

    #[test]
    fn interference_identities() {
        let r = ring();
        let jsa = synthetic(&r);
        let a =
            ring_stimulated_amplitude(&jsa, &r, &SeedSpec::new(SeedOrder::Minus), PhaseConvention::Appendix).unwrap();
        let b = StimulatedMap::new(jsa.grid, jsa.values.mapv(|v| v.conj() * 0.7), SourceTag::Spiral).unwrap();
        let n = 64;
        let mut mean = Array2::<f64>::zeros(a.values.dim());
        let mut hi = Array2::<f64>::from_elem(a.values.dim(), f64::MIN);
        let mut lo = Array2::<f64>::from_elem(a.values.dim(), f64::MAX);
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            let i = interference_intensity(&a, &b, t).unwrap();
            let shifted = interference_intensity(&a, &b, t + 2.0 * PI).unwrap();
            for (x, y) in i.iter().zip(shifted.iter()) {
                assert!((x - y).abs() < 1e-13 * x.abs().max(1.0));
            }
            for ((idx, v), x) in i.indexed_iter().zip(a.values.iter()) {
                let y = b.values[idx];
                let d = x.arg() - y.arg();
                let closed = x.norm_sqr() + y.norm_sqr() + 2.0 * x.norm() * y.norm() * (t + d).cos();
                assert!((v - closed).abs() < 1e-12 * (x.norm_sqr() + y.norm_sqr()));
            }
            mean = mean + &i / n as f64;
            hi.zip_mut_with(&i, |h, v| *h = h.max(*v));
            lo.zip_mut_with(&i, |l, v| *l = l.min(*v));
        }
        let v = visibility(&a, &b).unwrap();
        for (idx, m) in mean.indexed_iter() {
            let (x, y) = (a.values[idx], b.values[idx]);
            assert!((m - x.norm_sqr() - y.norm_sqr()).abs() < 1e-12 * m);
            let sweep = (hi[idx] - lo[idx]) / (hi[idx] + lo[idx]);
            assert!((sweep - v[idx]).abs() < 2e-3);
        }
    }

    #[test]
    fn destructive_interference_and_missing_reference() {
        let r = ring();
        let jsa = synthetic(&r);
        let a = StimulatedMap::new(jsa.grid, jsa.values.clone(), SourceTag::Ring).unwrap();
        let b = StimulatedMap::new(
            jsa.grid,
            jsa.values.mapv(|v| v * C::from_polar(1.0, 0.4)),
            SourceTag::Spiral,
        )
        .unwrap();
        // δ = −0.4, so Δθ = π + 0.4 cancels.
        let i = interference_intensity(&a, &b, PI + 0.4).unwrap();
        assert!(i.iter().all(|v| v.abs() < 1e-12));
        let zero = StimulatedMap::new(jsa.grid, Array2::zeros(jsa.values.dim()), SourceTag::Spiral).unwrap();
        let only = interference_intensity(&a, &zero, 1.1).unwrap();
        for (x, y) in only.iter().zip(a.intensity().iter()) {
            assert!((x - y).abs() < 1e-14 * y);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let r = ring();
        let jsa = synthetic(&r);
        let a = StimulatedMap::new(jsa.grid, jsa.values.clone(), SourceTag::Ring).unwrap();
        let mut g2 = jsa.grid;
        g2.signal = UniformAxis::new(0.0, 1.0, 11).unwrap();
        let b = StimulatedMap::new(g2, jsa.values.clone(), SourceTag::Spiral).unwrap();
        assert!(interference_intensity(&a, &b, 0.0).is_err());
    }
}
