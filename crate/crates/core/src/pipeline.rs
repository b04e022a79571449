//! Ground-truth simulation for a configured run.

use crate::config::Setup;
use crate::error::Result;
use crate::grid::{SpectralGrid, UniformAxis};
use crate::jsa::{resonator_jsa, spiral_jsa, ComplexJsa};
use crate::quadrature::Quadrature;
use crate::resonator::{Band, RingParams};
use crate::scalar::Real;
use crate::synth::TruthLayout;

/// Resonator and reference-waveguide JSAs on the campaign's simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth<T> {
    pub layout: TruthLayout<T>,
    pub ring: ComplexJsa<T>,
    pub spiral: ComplexJsa<T>,
}

pub fn simulate_truth<T: Real>(setup: &Setup<T>, quad: Quadrature<T>) -> Result<Truth<T>> {
    let layout = setup.campaign.truth_layout(&setup.ring)?;
    let ring = resonator_jsa(&setup.ring, &setup.pump, &layout.grid, quad)?;
    let spiral = spiral_jsa(&setup.spiral, &setup.pump, &layout.grid, quad)?;
    Ok(Truth { layout, ring, spiral })
}

/// Unfiltered `n × n` grid spanning ±`half_linewidths`·(1/τ_tot) about the
/// signal and idler resonances; used for converged Schmidt numbers.
pub fn dense_grid<T: Real>(ring: &RingParams<T>, n: usize, half_linewidths: T) -> Result<SpectralGrid<T>> {
    let axis = |band: Band| {
        let r = ring.resonance(band);
        UniformAxis::centered(r.omega0, half_linewidths * r.total_rate(), n)
    };
    Ok(SpectralGrid::new(axis(Band::Signal)?, axis(Band::Idler)?))
}

/// Default dense-grid settings: 161 points over ±12 linewidths.
pub const DENSE_POINTS: usize = 161;
pub const DENSE_HALF_LINEWIDTHS: f64 = 12.0;
