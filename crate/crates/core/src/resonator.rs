//! Temporal coupled-mode model of an add-drop microring.
//!
//! Field-enhancement bookkeeping: the dimensionless quantity evaluated by
//! [`RingParams::energy_enhancement`] is `√τ_rt · FE`, the intracavity energy
//! amplitude per unit input amplitude,
//!
//! ```text
//! √τ_rt · FE(ω) = i √(2/τ_e) / (1/τ_tot − i(ω − ω_j))
//! ```
//!
//! and every port response is written in terms of it with the same coupling
//! constant `μ = √(2/τ_e)`:
//!
//! ```text
//! T_H = 1 + i μ √τ_rt FE        D_R = i μ √τ_rt FE
//! ```
//!
//! so that `T_H → 1` far from resonance and `FE = −i √(τ_e / 2τ_rt) (T_H − 1)`
//! is the exact inverse of the Through response.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{nm_to_omega, Real, C, SPEED_OF_LIGHT};

/// Resonance order addressed by an evaluation. Never inferred from ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Pump,
    Signal,
    Idler,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Pump, Band::Signal, Band::Idler];

    fn index(self) -> usize {
        match self {
            Band::Pump => 0,
            Band::Signal => 1,
            Band::Idler => 2,
        }
    }
}

/// Lifetimes and resonance frequency of one resonance order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance<T> {
    /// Resonance angular frequency (rad/s).
    pub omega0: T,
    /// Extrinsic lifetime into one bus waveguide (s).
    pub tau_e: T,
    /// Total lifetime (s).
    pub tau_tot: T,
}

impl<T: Real> Resonance<T> {
    /// Amplitude decay rate into one bus, `√(2/τ_e)` squared.
    pub fn bus_rate(&self) -> T {
        T::lit(2.0) / self.tau_e
    }

    /// Total amplitude decay rate `1/τ_tot` (half width at half maximum of
    /// the intracavity power Lorentzian).
    pub fn total_rate(&self) -> T {
        T::one() / self.tau_tot
    }

    /// Loaded quality factor `ω₀ τ_tot / 2`.
    pub fn quality_factor(&self) -> T {
        self.omega0 * self.tau_tot / T::lit(2.0)
    }
}

/// Add-drop ring geometry, lifetimes and resonance frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct RingParams<T> {
    /// Perimeter `L_res` (m).
    pub perimeter: T,
    /// Round-trip time `τ_rt` (s).
    pub round_trip: T,
    resonances: [Resonance<T>; 3],
}

/// Free spectral range used to derive the default group index (Hz).
pub const DEFAULT_FSR_HZ: f64 = 800e9;

impl<T: Real> RingParams<T> {
    /// Builds and validates a ring. `resonances` are ordered pump, signal, idler.
    pub fn new(perimeter: T, round_trip: T, resonances: [Resonance<T>; 3]) -> Result<Self> {
        if !(perimeter > T::zero()) || !perimeter.is_finite() {
            return Err(Error::param("perimeter", "must be positive and finite"));
        }
        if !(round_trip > T::zero()) || !round_trip.is_finite() {
            return Err(Error::param("round_trip", "must be positive and finite"));
        }
        for (band, r) in Band::ALL.iter().zip(resonances.iter()) {
            if !(r.tau_e > T::zero() && r.tau_tot > T::zero() && r.omega0 > T::zero())
                || !(r.tau_e.is_finite() && r.tau_tot.is_finite() && r.omega0.is_finite())
            {
                return Err(Error::param(
                    "resonance",
                    format!("{band:?}: lifetimes and resonance frequency must be positive"),
                ));
            }
            // Total decay must at least cover the decay into both buses.
            let slack = T::lit(1e-12) * r.total_rate();
            if r.total_rate() + slack < r.bus_rate() {
                return Err(Error::param(
                    "tau_tot",
                    format!(
                        "{band:?}: 1/tau_tot = {} is below 2/tau_e = {}",
                        r.total_rate(),
                        r.bus_rate()
                    ),
                ));
            }
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                if resonances[i].omega0 == resonances[j].omega0 {
                    return Err(Error::param(
                        "omega0",
                        format!("{:?} and {:?} resonances coincide", Band::ALL[i], Band::ALL[j]),
                    ));
                }
            }
        }
        Ok(Self {
            perimeter,
            round_trip,
            resonances,
        })
    }

    /// Ring with `τ_rt = n_g L / c`.
    pub fn with_group_index(perimeter: T, group_index: T, resonances: [Resonance<T>; 3]) -> Result<Self> {
        let round_trip = group_index * perimeter / T::lit(SPEED_OF_LIGHT);
        Self::new(perimeter, round_trip, resonances)
    }

    /// The measured device: L_res = 92.12 μm, group index giving an 800 GHz FSR.
    pub fn table1() -> Self {
        let perimeter = 92.12e-6;
        let group_index = SPEED_OF_LIGHT / (DEFAULT_FSR_HZ * perimeter);
        let res = |tau_e_ps: f64, tau_tot_ps: f64, lambda_nm: f64| Resonance {
            omega0: nm_to_omega(T::lit(lambda_nm)),
            tau_e: T::lit(tau_e_ps * 1e-12),
            tau_tot: T::lit(tau_tot_ps * 1e-12),
        };
        Self::with_group_index(
            T::lit(perimeter),
            T::lit(group_index),
            [
                res(24.8, 9.6, 1555.32),
                res(23.7, 9.3, 1561.60),
                res(25.9, 10.0, 1549.08),
            ],
        )
        .expect("reference parameters are valid")
    }

    pub fn resonance(&self, band: Band) -> &Resonance<T> {
        &self.resonances[band.index()]
    }

    /// Replaces one band's resonance, re-validating the ring.
    pub fn with_resonance(&self, band: Band, res: Resonance<T>) -> Result<Self> {
        let mut r = self.resonances;
        r[band.index()] = res;
        Self::new(self.perimeter, self.round_trip, r)
    }

    /// Free spectral range `1/τ_rt` (Hz).
    pub fn fsr_hz(&self) -> T {
        T::one() / self.round_trip
    }

    /// `√τ_rt · FE(ω)`, the dimensionless energy-amplitude enhancement.
    pub fn energy_enhancement(&self, omega: T, band: Band) -> C<T> {
        lorentz_enhancement(self.resonance(band), omega)
    }

    /// Internal field enhancement `FE(ω)` of one resonance order.
    pub fn field_enhancement(&self, omega: T, band: Band) -> Result<C<T>> {
        check_finite(omega, "field_enhancement")?;
        Ok(self.energy_enhancement(omega, band) / self.round_trip.sqrt())
    }

    /// Complex Through-port response `T_H(ω)`.
    pub fn through_transfer(&self, omega: T, band: Band) -> Result<C<T>> {
        check_finite(omega, "through_transfer")?;
        let res = self.resonance(band);
        Ok(C::new(T::one(), T::zero()) + coupling(res) * self.energy_enhancement(omega, band))
    }

    /// Complex Drop-port response `D_R(ω)`.
    pub fn drop_transfer(&self, omega: T, band: Band) -> Result<C<T>> {
        check_finite(omega, "drop_transfer")?;
        let res = self.resonance(band);
        Ok(coupling(res) * self.energy_enhancement(omega, band))
    }

    /// `(T_H + D_R)*` on the lossless manifold `1/τ_tot = 2/τ_e`, where it
    /// equals `FE*/FE`.
    pub fn sum_identity(&self, omega: T, band: Band) -> Result<C<T>> {
        let res = self.resonance(band);
        let (total, bus) = (res.total_rate(), res.bus_rate());
        if (total - bus).abs() > T::lit(1e-9) * total {
            return Err(Error::NotLossless {
                total_rate: total.f64(),
                bus_rate: bus.f64(),
            });
        }
        Ok((self.through_transfer(omega, band)? + self.drop_transfer(omega, band)?).conj())
    }

    /// Unit-modulus stimulated-phase factor `FE*/FE` at ω.
    pub fn fe_phase_factor(&self, omega: T, band: Band) -> Result<C<T>> {
        let fe = self.field_enhancement(omega, band)?;
        Ok(fe.conj() / fe)
    }

    /// `Arg FE(ω)`, continuous in (0, π) across the resonance.
    pub fn fe_phase(&self, omega: T, band: Band) -> T {
        let res = self.resonance(band);
        T::FRAC_PI_2() + ((omega - res.omega0) * res.tau_tot).atan()
    }
}

fn check_finite<T: Real>(omega: T, what: &'static str) -> Result<()> {
    if omega.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `i √(2/τ_e)`, the bus coupling constant shared by all port responses.
fn coupling<T: Real>(res: &Resonance<T>) -> C<T> {
    C::new(T::zero(), res.bus_rate().sqrt())
}

fn lorentz_enhancement<T: Real>(res: &Resonance<T>, omega: T) -> C<T> {
    let denom = C::new(res.total_rate(), -(omega - res.omega0));
    coupling(res) / denom
}

/// Recovered field enhancement with a coverage diagnostic.
#[derive(Debug, Clone)]
pub struct FeRecovery<T> {
    pub fe: Vec<C<T>>,
    /// False when the resonance frequency lies outside the sampled range.
    pub covers_resonance: bool,
}

/// Inverts Through-port samples into the field enhancement,
/// `FE = −i √(τ_e / 2τ_rt) (T_H − 1)`.
pub fn fe_from_through<T: Real>(
    omegas: &[T],
    through: &[C<T>],
    ring: &RingParams<T>,
    band: Band,
) -> Result<FeRecovery<T>> {
    if omegas.len() != through.len() {
        return Err(Error::GridMismatch(format!(
            "{} frequencies for {} transfer samples",
            omegas.len(),
            through.len()
        )));
    }
    let res = ring.resonance(band);
    let scale = (res.tau_e / (T::lit(2.0) * ring.round_trip)).sqrt();
    let minus_i = C::new(T::zero(), -scale);
    let one = C::new(T::one(), T::zero());
    let fe = through.iter().map(|&t| minus_i * (t - one)).collect();
    let (lo, hi) = omegas.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &w| {
        (lo.min(w), hi.max(w))
    });
    Ok(FeRecovery {
        fe,
        covers_resonance: lo <= res.omega0 && res.omega0 <= hi,
    })
}

/// A single resonance coupled to `M` channels, physical or phantom (loss).
///
/// The Input port shares the bus of the channel designated Through, so the
/// input coupling lifetime is `lifetimes[through]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    lifetimes: Vec<T>,
    through: usize,
    pub tau_tot: T,
    pub omega0: T,
}

impl<T: Real> ChannelSet<T> {
    pub fn new(lifetimes: Vec<T>, through: usize, tau_tot: T, omega0: T) -> Result<Self> {
        if lifetimes.len() < 2 {
            return Err(Error::param("channels", "need at least two channels"));
        }
        if through >= lifetimes.len() {
            return Err(Error::param("through", "index outside channel list"));
        }
        if lifetimes.iter().any(|&t| !(t > T::zero()) || !t.is_finite()) || !(tau_tot > T::zero()) {
            return Err(Error::param("channels", "lifetimes must be positive"));
        }
        let set = Self {
            lifetimes,
            through,
            tau_tot,
            omega0,
        };
        let total = T::one() / tau_tot;
        if set.channel_rate() > total * (T::one() + T::lit(1e-12)) {
            return Err(Error::ChannelRates {
                channel_rate: set.channel_rate().f64(),
                total_rate: total.f64(),
            });
        }
        Ok(set)
    }

    /// The lossless two-bus device: two channels of equal lifetime and
    /// `1/τ_tot = 2/τ_e`.
    pub fn symmetric_lossless(tau_e: T, omega0: T) -> Self {
        Self::new(vec![tau_e, tau_e], 0, tau_e / T::lit(2.0), omega0).expect("valid by construction")
    }

    /// Adds a phantom loss channel absorbing whatever decay the listed
    /// channels do not account for.
    pub fn with_phantom_loss(&self) -> Result<Self> {
        let missing = T::one() / self.tau_tot - self.channel_rate();
        if !(missing > T::lit(1e-12) / self.tau_tot) {
            return Err(Error::param("channels", "no unchannelled loss to assign"));
        }
        let mut lifetimes = self.lifetimes.clone();
        lifetimes.push(T::one() / missing);
        Self::new(lifetimes, self.through, self.tau_tot, self.omega0)
    }

    pub fn lifetimes(&self) -> &[T] {
        &self.lifetimes
    }

    pub fn len(&self) -> usize {
        self.lifetimes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lifetimes.is_empty()
    }

    /// `Σ_m 1/τ_e,m`.
    pub fn channel_rate(&self) -> T {
        self.lifetimes.iter().map(|&t| T::one() / t).sum()
    }

    fn check_channelized(&self) -> Result<()> {
        let total = T::one() / self.tau_tot;
        if (self.channel_rate() - total).abs() > T::lit(1e-9) * total {
            return Err(Error::ChannelRates {
                channel_rate: self.channel_rate().f64(),
                total_rate: total.f64(),
            });
        }
        Ok(())
    }

    /// Field enhancement (times `√τ_rt`) seen from the Input port.
    pub fn input_enhancement(&self, omega: T) -> C<T> {
        let tau_in = self.lifetimes[self.through];
        let res = Resonance {
            omega0: self.omega0,
            tau_e: tau_in,
            tau_tot: self.tau_tot,
        };
        lorentz_enhancement(&res, omega)
    }

    /// Stimulated-amplitude factor of the M-channel resonator, evaluated
    /// as the closed-form ratio
    ///
    /// ```text
    /// ( (−iΔ + 1/τ_tot − Σ_m 2/τ_e,m) / (−iΔ + 1/τ_tot) )*
    /// ```
    ///
    /// Requires the channels to carry all of the loss.
    pub fn stimulated_factor(&self, omega: T) -> Result<C<T>> {
        check_finite(omega, "stimulated_factor")?;
        self.check_channelized()?;
        let two = T::lit(2.0);
        let total = T::one() / self.tau_tot;
        let delta = omega - self.omega0;
        let rates: T = self.lifetimes.iter().map(|&t| two / t).sum();
        let num = C::new(total - rates, -delta);
        let den = C::new(total, -delta);
        Ok((num / den).conj())
    }

    /// Same factor assembled from the port transfer functions,
    /// `(T_H + Σ_{m≠T} √(τ_e,I/τ_e,m) D_R^(m))*`.
    pub fn stimulated_factor_from_transfers(&self, omega: T) -> Result<C<T>> {
        check_finite(omega, "stimulated_factor_from_transfers")?;
        self.check_channelized()?;
        let two = T::lit(2.0);
        let tau_in = self.lifetimes[self.through];
        let e = self.input_enhancement(omega);
        let i = C::new(T::zero(), T::one());
        let mut sum = C::new(T::one(), T::zero()) + i * (two / tau_in).sqrt() * e;
        for (m, &tau_m) in self.lifetimes.iter().enumerate() {
            if m == self.through {
                continue;
            }
            let drop_m = i * (two / tau_m).sqrt() * e;
            sum += drop_m * (tau_in / tau_m).sqrt();
        }
        Ok(sum.conj())
    }

    /// `FE*/FE` of the Input-port field enhancement.
    pub fn fe_phase_factor(&self, omega: T) -> C<T> {
        let e = self.input_enhancement(omega);
        e.conj() / e
    }
}

/// Convenience for tests and examples: `Complex::new`.
pub fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn ring() -> RingParams<f64> {
        RingParams::table1()
    }

    fn lossless(tau_e: f64) -> RingParams<f64> {
        let r = ring();
        let mut res = *r.resonance(Band::Signal);
        res.tau_e = tau_e;
        res.tau_tot = tau_e / 2.0;
        r.with_resonance(Band::Signal, res).unwrap()
    }

    #[test]
    fn on_resonance_fe_is_positive_imaginary() {
        let r = ring();
        let w0 = r.resonance(Band::Signal).omega0;
        let fe = r.field_enhancement(w0, Band::Signal).unwrap();
        assert!(fe.re.abs() < 1e-12 * fe.im.abs());
        assert!(fe.im > 0.0);
        assert!(close(fe.arg(), std::f64::consts::FRAC_PI_2, 1e-14));
    }

    #[test]
    fn fe_vanishes_far_from_resonance() {
        let r = ring();
        let w0 = r.resonance(Band::Signal).omega0;
        let peak = r.field_enhancement(w0, Band::Signal).unwrap().norm();
        for det in [1e15, -1e15] {
            let fe = r.field_enhancement(w0 + det, Band::Signal).unwrap().norm();
            assert!(fe < 1e-3 * peak);
        }
    }

    #[test]
    fn half_power_at_one_total_rate_detuning() {
        let r = ring();
        let res = *r.resonance(Band::Signal);
        let p0 = r.field_enhancement(res.omega0, Band::Signal).unwrap().norm_sqr();
        let p1 = r
            .field_enhancement(res.omega0 + 1.0 / res.tau_tot, Band::Signal)
            .unwrap()
            .norm_sqr();
        assert!(close(p1 / p0, 0.5, 1e-12));
    }

    #[test]
    fn non_finite_frequency_is_rejected() {
        let r = ring();
        assert!(matches!(
            r.field_enhancement(f64::NAN, Band::Pump),
            Err(Error::NonFinite(_))
        ));
        assert!(r.through_transfer(f64::INFINITY, Band::Pump).is_err());
    }

    #[test]
    fn through_extinction_matches_reference_value() {
        // 20 log10 |1 − 2 τ_tot/τ_e| for the signal band, frozen from the oracle.
        let r = ring();
        let w0 = r.resonance(Band::Signal).omega0;
        let t = r.through_transfer(w0, Band::Signal).unwrap();
        let db = 20.0 * t.norm().log10();
        assert!(close(db, -13.343563398243347, 1e-9), "{db}");
        assert!(t.norm() <= 1.0);
    }

    #[test]
    fn drop_power_on_idler_resonance() {
        let r = ring();
        let w0 = r.resonance(Band::Idler).omega0;
        let d = r.drop_transfer(w0, Band::Idler).unwrap();
        assert!(close(d.norm_sqr(), 0.5962940325874689, 1e-12));
    }

    #[test]
    fn transfer_limits_far_off_resonance() {
        let r = ring();
        let w = r.resonance(Band::Idler).omega0 + 1e16;
        assert!((r.through_transfer(w, Band::Idler).unwrap() - c(1.0, 0.0)).norm() < 1e-4);
        assert!(r.drop_transfer(w, Band::Idler).unwrap().norm() < 1e-4);
    }

    #[test]
    fn lossless_unitarity() {
        let r = lossless(23.7e-12);
        let w0 = r.resonance(Band::Signal).omega0;
        for k in -50..=50 {
            let w = w0 + k as f64 * 7.3e9;
            let t = r.through_transfer(w, Band::Signal).unwrap();
            let d = r.drop_transfer(w, Band::Signal).unwrap();
            assert!(close(t.norm_sqr() + d.norm_sqr(), 1.0, 1e-12));
        }
    }

    #[test]
    fn sum_identity_on_resonance_and_far() {
        let r = lossless(20e-12);
        let w0 = r.resonance(Band::Signal).omega0;
        let s = r.sum_identity(w0, Band::Signal).unwrap();
        assert!((s - c(-1.0, 0.0)).norm() < 1e-12);
        let f = r.fe_phase_factor(w0, Band::Signal).unwrap();
        assert!((f - c(-1.0, 0.0)).norm() < 1e-12);
        let far = r.sum_identity(w0 + 1e17, Band::Signal).unwrap();
        assert!((far - c(1.0, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn sum_identity_flags_lossy_ring() {
        assert!(matches!(
            ring().sum_identity(1.2e15, Band::Signal),
            Err(Error::NotLossless { .. })
        ));
    }

    #[test]
    fn fe_from_constant_unit_through_is_zero() {
        let r = ring();
        let w0 = r.resonance(Band::Signal).omega0;
        let omegas: Vec<f64> = (0..5).map(|k| w0 + (k as f64 - 2.0) * 1e11).collect();
        let t = vec![c(1.0, 0.0); 5];
        let rec = fe_from_through(&omegas, &t, &r, Band::Signal).unwrap();
        assert!(rec.fe.iter().all(|f| f.norm() == 0.0));
        assert!(rec.covers_resonance);
    }

    #[test]
    fn fe_from_through_round_trip_and_coverage_flag() {
        let r = ring();
        let w0 = r.resonance(Band::Signal).omega0;
        let omegas: Vec<f64> = (0..201).map(|k| w0 + (k as f64 - 100.0) * 5e9).collect();
        let t: Vec<_> = omegas
            .iter()
            .map(|&w| r.through_transfer(w, Band::Signal).unwrap())
            .collect();
        let rec = fe_from_through(&omegas, &t, &r, Band::Signal).unwrap();
        for (w, fe) in omegas.iter().zip(&rec.fe) {
            let truth = r.field_enhancement(*w, Band::Signal).unwrap();
            assert!((fe - truth).norm() <= 1e-10 * truth.norm());
            assert!((fe.arg() - truth.arg()).abs() < 1e-10);
        }
        assert!((rec.fe[100].arg() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        let side: Vec<f64> = omegas.iter().map(|w| w + 2e12).collect();
        let rec = fe_from_through(&side, &t, &r, Band::Signal).unwrap();
        assert!(!rec.covers_resonance);
    }

    #[test]
    fn validation_rejects_unphysical_rings() {
        let r = ring();
        let mut res = *r.resonance(Band::Pump);
        res.tau_tot = res.tau_e; // 1/τ_tot < 2/τ_e
        assert!(r.with_resonance(Band::Pump, res).is_err());
        let mut res = *r.resonance(Band::Pump);
        res.omega0 = r.resonance(Band::Idler).omega0;
        assert!(r.with_resonance(Band::Pump, res).is_err());
        let mut res = *r.resonance(Band::Pump);
        res.tau_e = -1.0;
        assert!(r.with_resonance(Band::Pump, res).is_err());
    }

    #[test]
    fn multichannel_two_bus_matches_sum_identity() {
        let tau_e = 21e-12;
        let lossless = lossless(tau_e);
        let w0 = lossless.resonance(Band::Signal).omega0;
        let set = ChannelSet::symmetric_lossless(tau_e, w0);
        for k in -20..=20 {
            let w = w0 + k as f64 * 1.3e10;
            let a = set.stimulated_factor(w).unwrap();
            let b = lossless.sum_identity(w, Band::Signal).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn phantom_loss_channel_on_resonance() {
        let r = ring();
        let res = r.resonance(Band::Signal);
        let set = ChannelSet::new(vec![res.tau_e, res.tau_e], 0, res.tau_tot, res.omega0)
            .unwrap()
            .with_phantom_loss()
            .unwrap();
        assert_eq!(set.len(), 3);
        let f = set.stimulated_factor(res.omega0).unwrap();
        assert!((f - c(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn multichannel_rejects_unchannelled_loss() {
        let set = ChannelSet::new(vec![30e-12, 40e-12], 0, 10e-12, 1.2e15).unwrap();
        assert!(matches!(set.stimulated_factor(1.2e15), Err(Error::ChannelRates { .. })));
        assert!(ChannelSet::new(vec![1e-12, 1e-12], 0, 10e-12, 1.2e15).is_err());
        assert!(ChannelSet::new(vec![1e-12], 0, 10e-12, 1.2e15).is_err());
    }

    #[test]
    fn f32_ring_agrees_with_f64() {
        let r32 = RingParams::<f32>::table1();
        let r64 = ring();
        let w0 = r64.resonance(Band::Signal).omega0;
        let w = w0 + 5e10;
        let a = r32.through_transfer(w as f32, Band::Signal).unwrap();
        let b = r64.through_transfer(w, Band::Signal).unwrap();
        assert!((a.re as f64 - b.re).abs() < 2e-3);
        assert!((a.im as f64 - b.im).abs() < 2e-3);
    }
}
