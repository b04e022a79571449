//! Scalar abstraction shared by every numerical module.
//!
//! All physics is written against [`Real`], which is implemented for `f32`
//! and `f64`. Physical inputs are SI (rad/s, s, m); I/O layers convert from
//! the nm/ps/μm units used in configuration files.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the numerical core is generic over.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + NumAssign + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn idx(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("index fits in float")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`].
pub type C<T> = Complex<T>;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum wavelength in nm to angular frequency in rad/s.
pub fn nm_to_omega<T: Real>(lambda_nm: T) -> T {
    T::lit(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * 1e9) / lambda_nm
}

/// Angular frequency in rad/s to vacuum wavelength in nm.
pub fn omega_to_nm<T: Real>(omega: T) -> T {
    T::lit(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * 1e9) / omega
}

/// Converts a wavelength interval (pm) around `lambda_nm` into an
/// angular-frequency interval (rad/s).
pub fn pm_width_to_omega<T: Real>(width_pm: T, lambda_nm: T) -> T {
    let lambda_m = lambda_nm * T::lit(1e-9);
    T::lit(2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * 1e-12) * width_pm / (lambda_m * lambda_m)
}

/// Wraps a phase to (−π, π].
pub fn wrap_phase<T: Real>(phase: T) -> T {
    let two_pi = T::TAU();
    let mut p = phase % two_pi;
    if p <= -T::PI() {
        p += two_pi;
    } else if p > T::PI() {
        p -= two_pi;
    }
    p
}

/// 1D phase unwrapping: removes jumps larger than π between neighbours.
pub fn unwrap_phase<T: Real>(phases: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = T::zero();
    for (k, &p) in phases.iter().enumerate() {
        if k > 0 {
            let prev = phases[k - 1];
            let jump = p - prev;
            if jump > T::PI() {
                offset -= T::TAU();
            } else if jump < -T::PI() {
                offset += T::TAU();
            }
        }
        out.push(p + offset);
    }
    out
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + x2 * x2 / T::lit(120.0)
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_round_trip() {
        let w = nm_to_omega(1555.32_f64);
        assert!((omega_to_nm(w) - 1555.32).abs() < 1e-10);
    }

    #[test]
    fn wrap_is_half_open() {
        assert!((wrap_phase(std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-15);
        assert!((wrap_phase(-std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-15);
        assert!((wrap_phase(7.0_f64) - (7.0 - std::f64::consts::TAU)).abs() < 1e-12);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let raw = [3.0_f64, -3.1, -2.9, 3.0];
        let u = unwrap_phase(&raw);
        for w in u.windows(2) {
            assert!((w[1] - w[0]).abs() < std::f64::consts::PI);
        }
    }

    #[test]
    fn sinc_small_argument() {
        assert!((sinc(1e-6_f64) - 1.0).abs() < 1e-12);
        assert!((sinc(std::f64::consts::PI)).abs() < 1e-15);
    }
}
