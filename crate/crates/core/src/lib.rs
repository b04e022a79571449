//! Forward simulation and phase-resolved reconstruction of the joint
//! spectral amplitude of photon pairs generated in an add-drop microring.
//!
//! The forward side computes the resonator JSA from coupled-mode field
//! enhancements and a pump autoconvolution, a straight-waveguide reference
//! JSA, and synthetic stimulated-emission campaigns with shot noise. The
//! inverse side turns single-arm intensities, interference fringes and a
//! complex transfer-function scan back into the joint spectral phase, and
//! [`metrics`] quantifies the result (Schmidt number, fidelities,
//! Monte-Carlo error bars).
//!
//! Every numerical type is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the precision. Inputs are SI internally — rad/s, s, m.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Dense linear algebra reads more clearly with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod filter;
pub mod grid;
pub mod io;
pub mod jsa;
pub mod linalg;
pub mod metrics;
pub mod montecarlo;
pub mod pipeline;
pub mod pump;
pub mod quadrature;
pub mod reconstruct;
pub mod resonator;
pub mod rng;
pub mod scalar;
pub mod stimulated;
pub mod synth;

pub use config::{RunConfig, Setup};
pub use error::{Error, Result};
pub use filter::{FilterShape, FilterSpec};
pub use grid::{SpectralGrid, UniformAxis};
pub use jsa::{resonator_jsa, spiral_jsa, ComplexJsa, SpiralParams};
pub use metrics::{fidelity_complex, fidelity_intensity, schmidt_number, FidelityResult, SchmidtResult};
pub use montecarlo::{monte_carlo_errors, MonteCarloOptions, MonteCarloSummary};
pub use pump::PumpSpectrum;
pub use quadrature::Quadrature;
pub use reconstruct::{reconstruct, ReconstructionOptions, ReconstructionResult};
pub use resonator::{Band, RingParams};
pub use scalar::{Real, C};
pub use stimulated::{PhaseConvention, SeedOrder};
pub use synth::{synthesize_campaign, CampaignConfig, MeasurementSet};

pub type RingParams64 = RingParams<f64>;
pub type RingParams32 = RingParams<f32>;
pub type PumpSpectrum64 = PumpSpectrum<f64>;
pub type PumpSpectrum32 = PumpSpectrum<f32>;
pub type SpiralParams64 = SpiralParams<f64>;
pub type SpiralParams32 = SpiralParams<f32>;
pub type SpectralGrid64 = SpectralGrid<f64>;
pub type SpectralGrid32 = SpectralGrid<f32>;
pub type ComplexJsa64 = ComplexJsa<f64>;
pub type ComplexJsa32 = ComplexJsa<f32>;
pub type MeasurementSet64 = MeasurementSet<f64>;
pub type MeasurementSet32 = MeasurementSet<f32>;
pub type ReconstructionResult64 = ReconstructionResult<f64>;
pub type ReconstructionResult32 = ReconstructionResult<f32>;
