use ringjsa::config::RunConfig;
use ringjsa::montecarlo::{monte_carlo_errors, resample_measurement, MonteCarloOptions};
use ringjsa::pipeline::{simulate_truth, Truth};
use ringjsa::quadrature::Quadrature;
use ringjsa::reconstruct::{reconstruct, ReconstructionOptions};
use ringjsa::synth::{synthesize_campaign, CampaignConfig, MeasurementSet};
use ringjsa::Setup;

fn default_truth() -> (Setup<f64>, Truth<f64>) {
    let s = RunConfig::default().build::<f64>().unwrap();
    let t = simulate_truth(&s, Quadrature::default()).unwrap();
    (s, t)
}

fn campaign(s: &Setup<f64>, t: &Truth<f64>, edit: impl FnOnce(&mut CampaignConfig)) -> MeasurementSet<f64> {
    let mut c = s.campaign.clone();
    edit(&mut c);
    synthesize_campaign(&t.ring, &t.spiral, &s.ring, &c).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

#[test]
fn without_resampling_every_spread_is_zero() {
    let (s, t) = default_truth();
    let m = campaign(&s, &t, |c| c.noiseless = true);
    let mc = monte_carlo_errors(
        &m,
        &ReconstructionOptions::default(),
        &MonteCarloOptions {
            trials: 4,
            seed: 1,
            resample: false,
        },
        None,
    )
    .unwrap();
    assert_eq!(mc.failures, 0);
    assert_eq!(mc.k_jsa.std, 0.0);
    assert_eq!(mc.k_jsi.std, 0.0);
    assert_eq!(mc.median_sigma_delta.std, 0.0);
    assert!(mc.delta_std.iter().filter(|v| v.is_finite()).all(|v| *v == 0.0));
    assert!(mc.fidelity_complex.is_none());
}

#[test]
fn too_few_trials_is_rejected() {
    let (s, t) = default_truth();
    let m = campaign(&s, &t, |c| c.noiseless = true);
    let opts = MonteCarloOptions {
        trials: 1,
        seed: 1,
        resample: true,
    };
    assert!(monte_carlo_errors(&m, &ReconstructionOptions::default(), &opts, None).is_err());
}

#[test]
fn monte_carlo_is_deterministic_given_its_seed() {
    let (s, t) = default_truth();
    let m = campaign(&s, &t, |_| {});
    let opts = MonteCarloOptions {
        trials: 8,
        seed: 11,
        resample: true,
    };
    let a = monte_carlo_errors(&m, &ReconstructionOptions::default(), &opts, None).unwrap();
    let b = monte_carlo_errors(&m, &ReconstructionOptions::default(), &opts, None).unwrap();
    assert_eq!(a.k_jsa, b.k_jsa);
    assert_eq!(a.median_sigma_delta, b.median_sigma_delta);
    let c = monte_carlo_errors(
        &m,
        &ReconstructionOptions::default(),
        &MonteCarloOptions { seed: 12, ..opts },
        None,
    )
    .unwrap();
    assert_ne!(a.k_jsa, c.k_jsa);
    assert_eq!(resample_measurement(&m, 5), resample_measurement(&m, 5));
}

#[test]
fn fitted_phase_errors_match_monte_carlo_spread() {
    let (s, t) = default_truth();
    let m = campaign(&s, &t, |_| {});
    let r = reconstruct(&m, &ReconstructionOptions::default()).unwrap();
    let mc = monte_carlo_errors(
        &m,
        &ReconstructionOptions::default(),
        &MonteCarloOptions {
            trials: 120,
            seed: 3,
            resample: true,
        },
        None,
    )
    .unwrap();
    let ratios: Vec<f64> = r
        .fringe
        .phase
        .mask
        .indexed_iter()
        .filter(|(idx, ok)| **ok && mc.delta_std[*idx].is_finite())
        .map(|(idx, _)| mc.delta_std[idx] / r.fringe.phase.sigma[idx])
        .collect();
    assert!(ratios.len() > 100);
    let med = median(ratios);
    assert!((0.8..1.25).contains(&med), "empirical / fitted sigma = {med}");
}

#[test]
fn doubling_counts_shrinks_phase_spread_by_sqrt2() {
    let (s, t) = default_truth();
    let spread = |scale: f64| {
        let m = campaign(&s, &t, |c| {
            c.ring_peak_counts *= scale;
            c.spiral_peak_counts *= scale;
        });
        monte_carlo_errors(
            &m,
            &ReconstructionOptions::default(),
            &MonteCarloOptions {
                trials: 100,
                seed: 9,
                resample: true,
            },
            None,
        )
        .unwrap()
        .delta_std
    };
    let (one, two) = (spread(1.0), spread(2.0));
    let ratios: Vec<f64> = one
        .iter()
        .zip(two.iter())
        .filter(|(a, b)| a.is_finite() && b.is_finite() && **b > 0.0)
        .map(|(a, b)| a / b)
        .collect();
    let med = median(ratios);
    let expected = 2f64.sqrt();
    assert!(
        (med / expected - 1.0).abs() < 0.2,
        "std ratio {med}, expected {expected}"
    );
}
