use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use ndarray::Array2;
use ringjsa::config::RunConfig;
use ringjsa::io::{
    append_log, ensure_dir, load_measurement, load_reconstruction, read_jsa, save_measurement, save_reconstruction,
    sha256_hex, write_jsa, write_json, JsaHeader, LoadedResult, Provenance, CAMPAIGN_FILE,
};
use ringjsa::jsa::{resonator_jsa, ComplexJsa};
use ringjsa::metrics::{fidelity_complex, fidelity_intensity, phase_stripped, schmidt_number, SchmidtResult};
use ringjsa::montecarlo::{monte_carlo_errors, MonteCarloOptions, MonteCarloSummary, Reference, Stat};
use ringjsa::pipeline::{dense_grid, simulate_truth, DENSE_HALF_LINEWIDTHS, DENSE_POINTS};
use ringjsa::reconstruct::ReconstructionOptions;
use ringjsa::resonator::{Band, RingParams};
use ringjsa::scalar::{omega_to_nm, wrap_phase};
use ringjsa::stimulated::SourceTag;
use ringjsa::synth::{filtered_truth, synthesize_campaign, CampaignConfig, FilteredTruth};
use ringjsa::{Error, Quadrature, Result};
use serde::Serialize;

use crate::render::{from_rows, heatmap, masked, Palette};
use crate::{Overrides, ReconstructArgs, ReportArgs, SimulateArgs, SynthesizeArgs};

pub const RUN_CONFIG_FILE: &str = "run.toml";
pub const TRUTH_RING_FILE: &str = "truth_ring.bin";
pub const TRUTH_SPIRAL_FILE: &str = "truth_spiral.bin";
pub const TRUTH_DENSE_FILE: &str = "truth_dense.bin";
pub const TRANSFER_CURVES_FILE: &str = "transfer_curves.csv";
pub const TRUTH_SUMMARY_FILE: &str = "truth.json";
pub const METRICS_FILE: &str = "metrics.json";

/// Number of leading Schmidt coefficients written to reports.
const SPECTRUM_LEN: usize = 10;
/// Pump FWHM must cover at least this many dense-grid steps.
const PUMP_MIN_STEPS: f64 = 2.0;
/// Transfer curves span ±this many linewidths around each resonance.
const CURVE_HALF_LINEWIDTHS: f64 = 10.0;
const CURVE_POINTS: usize = 401;

fn log(dir: &Path, command: &str, detail: &str) -> Result<()> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    append_log(dir, &format!("[unix {stamp}] {command}: {detail}"))
}

fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = overrides.seed {
        cfg.rng_seed = seed;
    }
    if overrides.noiseless {
        cfg.campaign.noiseless = true;
    }
    if let Some(order) = overrides.seed_order {
        cfg.campaign.seed_order = order;
    }
    if let Some(preset) = overrides.filter {
        cfg.filter.preset = preset;
    }
    Ok(cfg)
}

fn provenance(cfg: &RunConfig) -> Provenance {
    Provenance {
        sha256: Some(sha256_hex(cfg.to_toml().as_bytes())),
        rng_seed: Some(cfg.rng_seed),
    }
}

fn require_files(dir: &Path, names: &[&str], what: &str) -> Result<()> {
    let missing: Vec<&str> = names.iter().copied().filter(|n| !dir.join(n).is_file()).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Format {
            file: dir.display().to_string(),
            reason: format!("incomplete {what} directory, missing: {}", missing.join(", ")),
        })
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Serialize)]
struct KPair {
    complex: f64,
    intensity_only: f64,
}

impl KPair {
    fn of(jsa: &ComplexJsa<f64>) -> Result<Self> {
        Ok(Self {
            complex: schmidt_number(jsa)?.k,
            intensity_only: schmidt_number(&phase_stripped(jsa))?.k,
        })
    }
}

#[derive(Debug, Serialize)]
struct TruthSummary {
    pump_fwhm_pm: f64,
    /// Unfiltered resonator JSA on the dense grid.
    dense_points: usize,
    dense_half_linewidths: f64,
    k_dense: KPair,
    pump_fwhm_rad_per_s: f64,
    dense_step_rad_per_s: f64,
    /// False when the pump is narrower than a few dense-grid steps; the
    /// dense Schmidt number is then a sampling artefact, not a converged value.
    pump_resolved_on_dense_grid: bool,
    /// Resonator JSA as seen by the campaign (filtered, campaign grid).
    k_campaign: KPair,
    simulation_shape: [usize; 2],
    campaign_shape: [usize; 2],
    provenance_sha256: Option<String>,
    rng_seed: u64,
}

/// Through/drop responses of the three resonances, one row per frequency.
fn transfer_curves(ring: &RingParams<f64>) -> Result<String> {
    let mut out = String::from("band,lambda_nm,omega_rad_per_s,through_re,through_im,drop_re,drop_im,fe_phase_rad\n");
    for band in [Band::Pump, Band::Signal, Band::Idler] {
        let r = ring.resonance(band);
        let half = CURVE_HALF_LINEWIDTHS * r.total_rate();
        for k in 0..CURVE_POINTS {
            let omega = r.omega0 - half + 2.0 * half * k as f64 / (CURVE_POINTS - 1) as f64;
            let t = ring.through_transfer(omega, band)?;
            let d = ring.drop_transfer(omega, band)?;
            let name = format!("{band:?}").to_lowercase();
            writeln!(
                out,
                "{name},{},{omega},{},{},{},{},{}",
                omega_to_nm(omega),
                t.re,
                t.im,
                d.re,
                d.im,
                ring.fe_phase(omega, band)
            )
            .expect("writing to a String");
        }
    }
    Ok(out)
}

fn jsa_previews(dir: &Path, stem: &str, jsa: &ComplexJsa<f64>, scale: usize) -> Result<()> {
    heatmap(
        &dir.join(format!("{stem}_jsi.png")),
        &masked(&jsa.intensity(), None),
        Palette::Intensity,
        scale,
    )?;
    heatmap(
        &dir.join(format!("{stem}_phase.png")),
        &masked(&jsa.phase(), None),
        Palette::Phase,
        scale,
    )
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let started = Instant::now();
    let mut cfg = load_config(args.config.as_deref(), &args.overrides)?;
    if let Some(pm) = args.pump_bandwidth {
        cfg.pump.fwhm_pm = pm;
    }
    let setup = cfg.build::<f64>()?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.join("truth"));
    ensure_dir(&out)?;
    let prov = provenance(&cfg);

    let quad = Quadrature::default();
    let truth = simulate_truth(&setup, quad)?;
    let grid = dense_grid(&setup.ring, DENSE_POINTS, DENSE_HALF_LINEWIDTHS)?;
    let dense = resonator_jsa(&setup.ring, &setup.pump, &grid, quad)?;
    let target = filtered_truth(&truth.ring, &truth.spiral, &setup.ring, &setup.campaign)?.target_jsa()?;

    write_text(&out.join(RUN_CONFIG_FILE), &cfg.to_toml())?;
    write_jsa(&out.join(TRUTH_RING_FILE), &truth.ring, SourceTag::Ring, &prov)?;
    write_jsa(&out.join(TRUTH_SPIRAL_FILE), &truth.spiral, SourceTag::Spiral, &prov)?;
    write_jsa(&out.join(TRUTH_DENSE_FILE), &dense, SourceTag::Ring, &prov)?;
    write_text(&out.join(TRANSFER_CURVES_FILE), &transfer_curves(&setup.ring)?)?;

    let step = grid.signal.step().max(grid.idler.step());
    let resolved = setup.pump.bandwidth() >= PUMP_MIN_STEPS * step;
    if !resolved {
        eprintln!(
            "simulate: warning: pump FWHM {:.3e} rad/s is below {PUMP_MIN_STEPS} dense-grid steps ({step:.3e} rad/s); \
             the reported Schmidt numbers are not converged",
            setup.pump.bandwidth()
        );
    }
    let (ss, si) = truth.layout.grid.shape();
    let (cs, ci) = target.grid.shape();
    let summary = TruthSummary {
        pump_fwhm_pm: cfg.pump.fwhm_pm,
        dense_points: DENSE_POINTS,
        dense_half_linewidths: DENSE_HALF_LINEWIDTHS,
        k_dense: KPair::of(&dense)?,
        pump_fwhm_rad_per_s: setup.pump.bandwidth(),
        dense_step_rad_per_s: step,
        pump_resolved_on_dense_grid: resolved,
        k_campaign: KPair::of(&target)?,
        simulation_shape: [ss, si],
        campaign_shape: [cs, ci],
        provenance_sha256: prov.sha256.clone(),
        rng_seed: cfg.rng_seed,
    };
    write_json(&out.join(TRUTH_SUMMARY_FILE), &summary)?;

    jsa_previews(&out, "truth_ring", &truth.ring, args.scale)?;
    jsa_previews(&out, "truth_spiral", &truth.spiral, args.scale)?;
    jsa_previews(&out, "truth_dense", &dense, args.scale)?;

    let detail = format!(
        "K dense {:.6} (intensity-only {:.6}), K campaign {:.6} (intensity-only {:.6}), {:.2} s",
        summary.k_dense.complex,
        summary.k_dense.intensity_only,
        summary.k_campaign.complex,
        summary.k_campaign.intensity_only,
        started.elapsed().as_secs_f64()
    );
    println!("simulate: wrote {} ({detail})", out.display());
    log(&out, "simulate", &detail)
}

// -------------------------------------------------------------- synthesize

fn read_truth_pair(dir: &Path) -> Result<(ComplexJsa<f64>, ComplexJsa<f64>, JsaHeader)> {
    require_files(dir, &[TRUTH_RING_FILE, TRUTH_SPIRAL_FILE], "truth")?;
    let (ring, header) = read_jsa::<f64>(&dir.join(TRUTH_RING_FILE))?;
    let (spiral, _) = read_jsa::<f64>(&dir.join(TRUTH_SPIRAL_FILE))?;
    Ok((ring, spiral, header))
}

pub fn synthesize(args: &SynthesizeArgs) -> Result<()> {
    let config = args.config.clone().unwrap_or_else(|| args.truth.join(RUN_CONFIG_FILE));
    require_files(&args.truth, &[TRUTH_RING_FILE, TRUTH_SPIRAL_FILE], "truth")?;
    let cfg = load_config(Some(&config), &args.overrides)?;
    let setup = cfg.build::<f64>()?;
    let (ring_jsa, spiral_jsa, header) = read_truth_pair(&args.truth)?;
    let layout = setup.campaign.truth_layout(&setup.ring)?;
    layout.grid.ensure_same(&ring_jsa.grid).map_err(|e| {
        Error::GridMismatch(format!(
            "{}: truth grid does not match the campaign's simulation grid ({e}); re-run simulate with the same settings",
            args.truth.display()
        ))
    })?;

    let m = synthesize_campaign(&ring_jsa, &spiral_jsa, &setup.ring, &setup.campaign)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.join("measurement"));
    let sha = header.provenance_sha256.or_else(|| provenance(&cfg).sha256);
    save_measurement(&out, &m, sha.as_deref())?;

    let detail = format!(
        "{} × {} grid, {} fringe steps, seed {}, noiseless {}",
        m.grid.signal.len(),
        m.grid.idler.len(),
        m.fringe.schedule.len(),
        m.rng_seed(),
        m.campaign.noiseless
    );
    println!("synthesize: wrote {} ({detail})", out.display());
    log(&out, "synthesize", &detail)
}

// ------------------------------------------------------------- reconstruct

pub fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let m = load_measurement::<f64>(&args.measurement)?;
    let mut opts = ReconstructionOptions::default();
    if let Some(t) = args.snr_threshold {
        opts.snr_threshold = t;
    }
    let r = ringjsa::reconstruct(&m, &opts)?;
    let out = args.out.clone().unwrap_or_else(|| {
        args.measurement
            .parent()
            .map_or_else(|| PathBuf::from("result"), |p| p.join("result"))
    });
    let manifest = fs::read(args.measurement.join(CAMPAIGN_FILE)).map_err(|source| Error::Io {
        path: args.measurement.join(CAMPAIGN_FILE).display().to_string(),
        source,
    })?;
    let prov = Provenance {
        sha256: Some(sha256_hex(&manifest)),
        rng_seed: Some(m.rng_seed()),
    };
    save_reconstruction(&out, &r, Some(&m.campaign), &prov)?;

    let valid = r.jsp.mask.iter().filter(|v| **v).count();
    let detail = format!(
        "{valid}/{} valid points, reference {:?}",
        r.jsp.mask.len(),
        r.jsp.reference
    );
    println!("reconstruct: wrote {} ({detail})", out.display());
    log(&out, "reconstruct", &detail)
}

// ------------------------------------------------------------------ report

#[derive(Debug, Serialize)]
struct SchmidtReport {
    k: f64,
    rank: usize,
    /// Leading normalized Schmidt coefficients λ_n (Σλ² = 1).
    leading_coefficients: Vec<f64>,
}

impl From<SchmidtResult<f64>> for SchmidtReport {
    fn from(s: SchmidtResult<f64>) -> Self {
        Self {
            k: s.k,
            rank: s.rank,
            leading_coefficients: s.coefficients.into_iter().take(SPECTRUM_LEN).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
struct TruthComparison {
    truth_dir: String,
    fidelity_intensity_percent: f64,
    fidelity_complex_percent: f64,
    /// Largest wrapped phase error over the valid mask, both phases
    /// referenced to the reconstruction's reference point.
    max_jsp_error_rad: f64,
    k_target: SchmidtReport,
    k_target_intensity_only: SchmidtReport,
}

#[derive(Debug, Serialize)]
struct MonteCarloReport {
    trials: usize,
    failures: usize,
    seed: u64,
    k_jsp: Stat,
    k_jsi: Stat,
    median_sigma_delta_rad: Stat,
    fidelity_intensity_percent: Option<Stat>,
    fidelity_complex_percent: Option<Stat>,
}

impl MonteCarloReport {
    fn new(s: MonteCarloSummary, seed: u64) -> Self {
        Self {
            trials: s.trials,
            failures: s.failures,
            seed,
            k_jsp: s.k_jsa,
            k_jsi: s.k_jsi,
            median_sigma_delta_rad: s.median_sigma_delta,
            fidelity_intensity_percent: s.fidelity_intensity,
            fidelity_complex_percent: s.fidelity_complex,
        }
    }
}

#[derive(Debug, Serialize)]
struct Formulas {
    schmidt_number: &'static str,
    fidelity_intensity: &'static str,
    fidelity_complex: &'static str,
}

const FORMULAS: Formulas = Formulas {
    schmidt_number: "K = 1 / sum(lambda_n^4), lambda_n the normalized singular values of the sampled amplitude",
    fidelity_intensity: "100 * (sum sqrt(p q))^2 with p, q normalized to unit sum",
    fidelity_complex: "100 * max_theta |<a|exp(i theta) b>|^2 with a, b normalized on the valid mask",
};

#[derive(Debug, Serialize)]
struct Metrics {
    tool_version: &'static str,
    formulas: Formulas,
    result_dir: String,
    shape: [usize; 2],
    valid_points: usize,
    /// Reconstructed amplitude including the measured phase.
    k_jsp: SchmidtReport,
    /// Same amplitude with the phase discarded.
    k_jsi: SchmidtReport,
    /// True when `k_jsp ≥ k_jsi`, as expected for a correlated phase.
    k_ordering_complex_ge_intensity: bool,
    self_fidelity_intensity_percent: f64,
    self_fidelity_complex_percent: f64,
    truth: Option<TruthComparison>,
    truth_skipped: Option<String>,
    monte_carlo: Option<MonteCarloReport>,
    images: Vec<String>,
}

/// Campaign-level truth matching a result: filtered intensity and target
/// amplitude on the result grid.
fn load_target(truth_dir: &Path, result: &LoadedResult<f64>) -> Result<(FilteredTruth<f64>, ComplexJsa<f64>)> {
    require_files(
        truth_dir,
        &[RUN_CONFIG_FILE, TRUTH_RING_FILE, TRUTH_SPIRAL_FILE],
        "truth",
    )?;
    let cfg = RunConfig::load(&truth_dir.join(RUN_CONFIG_FILE))?;
    let ring = cfg.ring_params::<f64>()?;
    let campaign: CampaignConfig = match &result.report.campaign {
        Some(c) => c.clone(),
        None => cfg.effective_campaign()?,
    };
    let (ring_jsa, spiral_jsa, _) = read_truth_pair(truth_dir)?;
    let ft = filtered_truth(&ring_jsa, &spiral_jsa, &ring, &campaign)?;
    ft.grid.ensure_same(&result.jsa.grid)?;
    let target = ft.target_jsa()?;
    Ok((ft, target))
}

fn compare(
    truth_dir: &Path,
    result: &LoadedResult<f64>,
    ft: &FilteredTruth<f64>,
    target: &ComplexJsa<f64>,
) -> Result<TruthComparison> {
    let reference_idx = (result.report.reference_index[0], result.report.reference_index[1]);
    let reference = ft.cross[reference_idx].arg();
    let max_jsp_error_rad = result
        .mask
        .indexed_iter()
        .filter(|(_, ok)| **ok)
        .map(|(idx, _)| wrap_phase(result.jsp[idx] - (ft.cross[idx].arg() - reference)).abs())
        .fold(0.0, f64::max);
    Ok(TruthComparison {
        truth_dir: truth_dir.display().to_string(),
        fidelity_intensity_percent: fidelity_intensity(&result.jsi, &ft.jsi)?.value,
        fidelity_complex_percent: fidelity_complex(&result.jsa, target, Some(&result.mask))?.value,
        max_jsp_error_rad,
        k_target: schmidt_number(target)?.into(),
        k_target_intensity_only: schmidt_number(&phase_stripped(target))?.into(),
    })
}

pub fn report(args: &ReportArgs) -> Result<()> {
    let result = load_reconstruction::<f64>(&args.result)?;
    let out = args.out.clone().unwrap_or_else(|| args.result.clone());
    ensure_dir(&out)?;

    let k_jsp: SchmidtReport = schmidt_number(&result.jsa)?.into();
    let k_jsi: SchmidtReport = schmidt_number(&phase_stripped(&result.jsa))?.into();

    let mut truth = None;
    let mut truth_skipped = None;
    let mut target = None;
    match &args.truth {
        None => truth_skipped = Some("no truth directory given".to_string()),
        Some(dir) => match load_target(dir, &result).and_then(|(ft, t)| {
            let c = compare(dir, &result, &ft, &t)?;
            Ok((c, ft, t))
        }) {
            Ok((c, ft, t)) => {
                truth = Some(c);
                target = Some((ft, t));
            }
            Err(e) => {
                eprintln!("report: skipping truth comparison: {e}");
                truth_skipped = Some(e.to_string());
            }
        },
    }

    let monte_carlo = if args.trials > 0 {
        let dir = args.measurement.as_deref().ok_or_else(|| Error::InvalidParameter {
            name: "measurement",
            reason: "Monte-Carlo error bars need --measurement".into(),
        })?;
        let m = load_measurement::<f64>(dir)?;
        let mc = MonteCarloOptions {
            trials: args.trials,
            seed: args.seed,
            resample: true,
        };
        let reference = target.as_ref().map(|(ft, t)| Reference { jsi: &ft.jsi, jsa: t });
        let summary = monte_carlo_errors(&m, &result.report.options, &mc, reference)?;
        Some(MonteCarloReport::new(summary, args.seed))
    } else {
        None
    };

    let mut images = Vec::new();
    let mut render = |name: &str, map: &Array2<Option<f64>>, palette: Palette| -> Result<()> {
        heatmap(&out.join(name), map, palette, args.scale)?;
        images.push(name.to_string());
        Ok(())
    };
    render("jsi.png", &masked(&result.jsi, None), Palette::Intensity)?;
    render("jsp.png", &masked(&result.jsp, Some(&result.mask)), Palette::Phase)?;
    render("delta.png", &from_rows(&result.report.delta_rad), Palette::Phase)?;
    render(
        "abs_delta.png",
        &from_rows(&result.report.abs_delta_rad),
        Palette::Phase,
    )?;
    if let Some((ft, t)) = &target {
        let r = result.report.reference_index;
        let reference = t.values[(r[0], r[1])].arg();
        let phase = t.phase().mapv(|p| wrap_phase(p - reference));
        render("truth_jsi.png", &masked(&ft.jsi, None), Palette::Intensity)?;
        render("truth_jsp.png", &masked(&phase, Some(&result.mask)), Palette::Phase)?;
    }

    let (ns, ni) = result.jsa.grid.shape();
    let metrics = Metrics {
        tool_version: env!("CARGO_PKG_VERSION"),
        formulas: FORMULAS,
        result_dir: args.result.display().to_string(),
        shape: [ns, ni],
        valid_points: result.report.valid_points,
        k_ordering_complex_ge_intensity: k_jsp.k >= k_jsi.k,
        k_jsp,
        k_jsi,
        self_fidelity_intensity_percent: fidelity_intensity(&result.jsi, &result.jsi)?.value,
        self_fidelity_complex_percent: fidelity_complex(&result.jsa, &result.jsa, None)?.value,
        truth,
        truth_skipped,
        monte_carlo,
        images,
    };
    write_json(&out.join(METRICS_FILE), &metrics)?;

    let mut detail = format!("K_JSP {:.6}, K_JSI {:.6}", metrics.k_jsp.k, metrics.k_jsi.k);
    if let Some(t) = &metrics.truth {
        write!(
            detail,
            ", fidelity {:.4}% intensity / {:.4}% complex",
            t.fidelity_intensity_percent, t.fidelity_complex_percent
        )
        .expect("writing to a String");
    }
    println!("report: wrote {} ({detail})", out.display());
    log(&out, "report", &detail)
}
