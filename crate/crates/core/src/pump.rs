//! Pump spectral amplitude and its (optionally resonator-filtered)
//! autoconvolution, the energy-conservation kernel shared by the ring and
//! spiral joint spectra.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;
use crate::resonator::{Band, RingParams};
use crate::scalar::{Real, C};

/// Spectral envelope of the pump.
#[derive(Debug, Clone, PartialEq)]
pub enum PumpShape<T> {
    /// Gaussian with intensity FWHM (rad/s).
    Gaussian { fwhm: T },
    /// Hyperbolic-secant-squared intensity profile with FWHM (rad/s).
    Sech2 { fwhm: T },
    /// Tabulated complex amplitude vs detuning from the center (rad/s),
    /// linearly interpolated, zero outside the table.
    Tabulated { detuning: Vec<T>, amplitude: Vec<C<T>> },
}

/// Pump amplitude `A_p(ω)` normalized to `∫|A_p|² dω = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpSpectrum<T> {
    /// Center angular frequency (rad/s).
    pub center: T,
    pub shape: PumpShape<T>,
    /// Quadratic spectral phase `φ(ω) = chirp · (ω − ω_p)²` (rad/(rad/s)²).
    pub chirp: T,
    norm: T,
}

const GAUSS_SUPPORT: f64 = 14.0;
const SECH_SUPPORT: f64 = 40.0;

impl<T: Real> PumpSpectrum<T> {
    pub fn gaussian(center: T, fwhm: T) -> Result<Self> {
        check_width(fwhm)?;
        let sigma = gaussian_sigma(fwhm);
        let norm = (T::TAU() * sigma * sigma).powf(T::lit(-0.25));
        Ok(Self {
            center,
            shape: PumpShape::Gaussian { fwhm },
            chirp: T::zero(),
            norm,
        })
    }

    pub fn sech2(center: T, fwhm: T) -> Result<Self> {
        check_width(fwhm)?;
        let w = sech_width(fwhm);
        Ok(Self {
            center,
            shape: PumpShape::Sech2 { fwhm },
            chirp: T::zero(),
            norm: T::one() / (T::lit(2.0) * w).sqrt(),
        })
    }

    /// Tabulated amplitude; rescaled so the interpolated `|A_p|²` integrates to one.
    pub fn tabulated(center: T, detuning: Vec<T>, amplitude: Vec<C<T>>) -> Result<Self> {
        if detuning.len() != amplitude.len() || detuning.len() < 2 {
            return Err(Error::param(
                "pump table",
                "need matching detuning/amplitude columns, >= 2 rows",
            ));
        }
        if detuning.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("pump table", "detuning must be strictly increasing"));
        }
        // Exact integral of |linear interpolant|² per segment.
        let mut power = T::zero();
        for k in 0..detuning.len() - 1 {
            let h = detuning[k + 1] - detuning[k];
            let (a, b) = (amplitude[k], amplitude[k + 1]);
            let cross = (a * b.conj()).re;
            power += h * (a.norm_sqr() + b.norm_sqr() + cross) / T::lit(3.0);
        }
        if !(power > T::zero()) {
            return Err(Error::param("pump table", "amplitude is identically zero"));
        }
        Ok(Self {
            center,
            shape: PumpShape::Tabulated { detuning, amplitude },
            chirp: T::zero(),
            norm: T::one() / power.sqrt(),
        })
    }

    pub fn with_chirp(mut self, chirp: T) -> Self {
        self.chirp = chirp;
        self
    }

    /// Same shape recentered at `center`.
    pub fn recentered(&self, center: T) -> Self {
        Self { center, ..self.clone() }
    }

    /// Intensity FWHM (rad/s); table extent for tabulated spectra.
    pub fn bandwidth(&self) -> T {
        match &self.shape {
            PumpShape::Gaussian { fwhm } | PumpShape::Sech2 { fwhm } => *fwhm,
            PumpShape::Tabulated { detuning, .. } => detuning[detuning.len() - 1] - detuning[0],
        }
    }

    /// `A_p(ω)`.
    pub fn amplitude(&self, omega: T) -> C<T> {
        self.amplitude_at(omega - self.center)
    }

    /// `A_p(center + x)`.
    pub fn amplitude_at(&self, x: T) -> C<T> {
        let envelope = match &self.shape {
            PumpShape::Gaussian { fwhm } => {
                let s = gaussian_sigma(*fwhm);
                C::new((-(x * x) / (T::lit(4.0) * s * s)).exp(), T::zero())
            }
            PumpShape::Sech2 { fwhm } => {
                let w = sech_width(*fwhm);
                C::new(T::one() / (x / w).cosh(), T::zero())
            }
            PumpShape::Tabulated { detuning, amplitude } => interpolate(detuning, amplitude, x),
        };
        let chirp = if self.chirp == T::zero() {
            C::new(T::one(), T::zero())
        } else {
            Complex::from_polar(T::one(), self.chirp * x * x)
        };
        envelope * chirp * self.norm
    }

    /// Detuning interval outside which the amplitude is negligible
    /// (below ~1e−17 of the peak for the analytic shapes).
    pub fn support(&self) -> (T, T) {
        match &self.shape {
            PumpShape::Gaussian { fwhm } => {
                let r = T::lit(GAUSS_SUPPORT) * gaussian_sigma(*fwhm);
                (-r, r)
            }
            PumpShape::Sech2 { fwhm } => {
                let r = T::lit(SECH_SUPPORT) * sech_width(*fwhm);
                (-r, r)
            }
            PumpShape::Tabulated { detuning, .. } => (detuning[0], detuning[detuning.len() - 1]),
        }
    }

    /// Narrowest spectral feature of the amplitude (rad/s).
    pub fn feature(&self) -> T {
        let envelope = match &self.shape {
            PumpShape::Gaussian { fwhm } => gaussian_sigma(*fwhm),
            PumpShape::Sech2 { fwhm } => sech_width(*fwhm),
            PumpShape::Tabulated { detuning, .. } => {
                detuning.windows(2).map(|w| w[1] - w[0]).fold(T::infinity(), T::min)
            }
        };
        if self.chirp == T::zero() {
            envelope
        } else {
            let (lo, hi) = self.support();
            let reach = lo.abs().max(hi.abs());
            // Local spectral-phase period at the edge of the support.
            envelope.min(T::PI() / (T::lit(2.0) * self.chirp.abs() * reach))
        }
    }
}

fn check_width<T: Real>(fwhm: T) -> Result<()> {
    if fwhm > T::zero() && fwhm.is_finite() {
        Ok(())
    } else {
        Err(Error::param("pump bandwidth", "must be positive and finite"))
    }
}

/// RMS width of the Gaussian intensity profile.
fn gaussian_sigma<T: Real>(fwhm: T) -> T {
    fwhm / (T::lit(2.0) * (T::lit(2.0) * T::LN_2()).sqrt())
}

/// `w` in `sech²(x/w)`: FWHM = 2 w acosh(√2).
fn sech_width<T: Real>(fwhm: T) -> T {
    fwhm / (T::lit(2.0) * T::SQRT_2().acosh())
}

fn interpolate<T: Real>(xs: &[T], ys: &[C<T>], x: T) -> C<T> {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return C::new(T::zero(), T::zero());
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = (x - x0) / (x1 - x0);
    ys[k - 1] * (T::one() - t) + ys[k] * t
}

/// Evaluates `J(Σ) = ∫ F(Σ − ω′) F(ω′) dω′` with `F = A_p` or, when a ring
/// is supplied, `F = FE_p · A_p`.
#[derive(Debug, Clone)]
pub struct Autoconvolution<'a, T> {
    pump: &'a PumpSpectrum<T>,
    ring: Option<&'a RingParams<T>>,
    quad: Quadrature<T>,
    feature: T,
    scale: T,
}

impl<'a, T: Real> Autoconvolution<'a, T> {
    pub fn new(pump: &'a PumpSpectrum<T>, ring: Option<&'a RingParams<T>>, quad: Quadrature<T>) -> Result<Self> {
        let mut feature = pump.feature();
        if let Some(r) = ring {
            feature = feature.min(r.resonance(Band::Pump).tau_tot.recip());
        }
        let mut this = Self {
            pump,
            ring,
            quad,
            feature,
            scale: T::one(),
        };
        // ∫|F|² bounds |J| by Cauchy–Schwarz; it sets the absolute tolerance.
        let (lo, hi) = pump.support();
        let power = quad.integrate(
            |x| C::new(this.factor(x).norm_sqr(), T::zero()),
            lo,
            hi,
            feature,
            T::zero(),
        );
        this.scale = match power {
            Ok(p) => p.re,
            // Zero scale makes the power integral itself demand exact agreement;
            // retry with a relative criterion on its own magnitude.
            Err(_) => {
                let rough =
                    crate::quadrature::trapezoid(|x| C::new(this.factor(x).norm_sqr(), T::zero()), lo, hi, 4096);
                quad.integrate(
                    |x| C::new(this.factor(x).norm_sqr(), T::zero()),
                    lo,
                    hi,
                    feature,
                    rough.re,
                )?
                .re
            }
        };
        Ok(this)
    }

    /// `F(center + x)`.
    pub fn factor(&self, x: T) -> C<T> {
        let a = self.pump.amplitude_at(x);
        match self.ring {
            None => a,
            Some(r) => {
                let res = r.resonance(Band::Pump);
                let detuning = (self.pump.center - res.omega0) + x;
                let den = C::new(res.total_rate(), -detuning);
                let fe = C::new(T::zero(), res.bus_rate().sqrt()) / den / r.round_trip.sqrt();
                a * fe
            }
        }
    }

    /// `J` at the sum frequency `2·center + 2·offset`; `offset = Σ/2 − ω_p`.
    pub fn at_half_offset(&self, offset: T) -> Result<C<T>> {
        let (lo, hi) = self.pump.support();
        // u ranges where both center+offset±u lie inside the support.
        let a = (lo - offset).max(offset - hi);
        let b = (hi - offset).min(offset - lo);
        if !(b > a) {
            return Ok(C::new(T::zero(), T::zero()));
        }
        self.quad.integrate(
            |u| self.factor(offset + u) * self.factor(offset - u),
            a,
            b,
            self.feature,
            self.scale,
        )
    }

    /// `J(Σ)`.
    pub fn eval(&self, sum: T) -> Result<C<T>> {
        if !sum.is_finite() {
            return Err(Error::NonFinite("pump_autoconvolution"));
        }
        self.at_half_offset(sum / T::lit(2.0) - self.pump.center)
    }

    pub fn pump(&self) -> &PumpSpectrum<T> {
        self.pump
    }
}

/// One-shot autoconvolution at `sum` (rad/s).
pub fn pump_autoconvolution<T: Real>(
    pump: &PumpSpectrum<T>,
    sum: T,
    ring: Option<&RingParams<T>>,
    quad: Quadrature<T>,
) -> Result<C<T>> {
    Autoconvolution::new(pump, ring, quad)?.eval(sum)
}
