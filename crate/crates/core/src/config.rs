//! Run configuration: one TOML file with explicit units in every key name.
//!
//! ```toml
//! output_dir = "run"
//! rng_seed = 42
//!
//! [ring]
//! perimeter_um = 92.12
//! fsr_ghz = 800.0
//! lambda_p_nm = 1555.32
//! tau_e_p_ps = 24.8
//! tau_tot_p_ps = 9.6
//! # … signal (s) and idler (i) likewise
//!
//! [pump]
//! shape = "gaussian"
//! fwhm_pm = 250.0
//!
//! [spiral]
//! length_mm = 2.35
//! dispersion_k_sn_per_m = [0.0, 0.0, 1.3e-24]
//!
//! [filter]
//! preset = "on-chip"
//!
//! [campaign]
//! n_signal = 10
//! n_idler = 20
//! ```
//!
//! Every section and key is optional; omitted values reproduce the measured
//! device. Unknown keys are rejected with the dotted path of the offending key.

use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{FilterShape, FilterSpec};
use crate::jsa::SpiralParams;
use crate::pump::PumpSpectrum;
use crate::resonator::{Resonance, RingParams, DEFAULT_FSR_HZ};
use crate::scalar::{nm_to_omega, pm_width_to_omega, Real, SPEED_OF_LIGHT};
use crate::synth::CampaignConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingConfig {
    pub perimeter_um: f64,
    /// Sets the group index through `FSR = c / (n_g L)`. Ignored when
    /// `group_index` is given.
    pub fsr_ghz: f64,
    pub group_index: Option<f64>,
    pub lambda_p_nm: f64,
    pub lambda_s_nm: f64,
    pub lambda_i_nm: f64,
    pub tau_e_p_ps: f64,
    pub tau_e_s_ps: f64,
    pub tau_e_i_ps: f64,
    pub tau_tot_p_ps: f64,
    pub tau_tot_s_ps: f64,
    pub tau_tot_i_ps: f64,
}

impl Default for RingConfig {
    fn default() -> Self {
        Self {
            perimeter_um: 92.12,
            fsr_ghz: DEFAULT_FSR_HZ * 1e-9,
            group_index: None,
            lambda_p_nm: 1555.32,
            lambda_s_nm: 1561.60,
            lambda_i_nm: 1549.08,
            tau_e_p_ps: 24.8,
            tau_e_s_ps: 23.7,
            tau_e_i_ps: 25.9,
            tau_tot_p_ps: 9.6,
            tau_tot_s_ps: 9.3,
            tau_tot_i_ps: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpShapeName {
    Gaussian,
    Sech2,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PumpConfig {
    pub shape: PumpShapeName,
    /// Intensity FWHM in wavelength (parametric shapes).
    pub fwhm_pm: f64,
    /// Defaults to the pump resonance.
    pub center_nm: Option<f64>,
    /// Quadratic spectral phase coefficient, `φ = chirp·(ω − ω_p)²`.
    pub chirp_ps2: f64,
    /// CSV with columns `lambda_nm, amplitude_re, amplitude_im`
    /// (tabulated shape only), relative to the config file.
    pub table: Option<PathBuf>,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self {
            shape: PumpShapeName::Gaussian,
            fwhm_pm: 250.0,
            center_nm: None,
            chirp_ps2: 0.0,
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralConfig {
    pub length_mm: f64,
    /// Expansion point of the dispersion polynomial; defaults to the pump center.
    pub taylor_center_nm: Option<f64>,
    /// `[k0, k1, k2, …]` with `k(ω) = Σ kₙ (ω − ω_c)ⁿ / n!`.
    pub dispersion_k_sn_per_m: Vec<f64>,
    pub gamma_nl_per_w_m: f64,
}

impl Default for SpiralConfig {
    fn default() -> Self {
        Self {
            length_mm: 2.35,
            taylor_center_nm: None,
            dispersion_k_sn_per_m: vec![0.0, 0.0, 1.3e-24],
            gamma_nl_per_w_m: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterPreset {
    OnChip,
    OffChip,
    Ideal,
    Custom,
}

impl std::str::FromStr for FilterPreset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.replace('_', "-").as_str() {
            "on-chip" => Ok(Self::OnChip),
            "off-chip" => Ok(Self::OffChip),
            "ideal" => Ok(Self::Ideal),
            "custom" => Ok(Self::Custom),
            other => Err(format!("unknown filter `{other}` (on-chip, off-chip, ideal, custom)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub preset: FilterPreset,
    /// Custom preset only.
    pub shape: Option<FilterShape>,
    /// Custom preset only.
    pub fwhm_ghz: Option<f64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            preset: FilterPreset::OnChip,
            shape: None,
            fwhm_ghz: None,
        }
    }
}

impl FilterConfig {
    pub fn spec(&self) -> Result<FilterSpec<f64>> {
        let custom_only = |key: &str| Error::Config {
            path: format!("filter.{key}"),
            reason: "only allowed with preset = \"custom\"".into(),
        };
        if self.preset != FilterPreset::Custom {
            if self.shape.is_some() {
                return Err(custom_only("shape"));
            }
            if self.fwhm_ghz.is_some() {
                return Err(custom_only("fwhm_ghz"));
            }
        }
        match self.preset {
            FilterPreset::OnChip => Ok(FilterSpec::on_chip()),
            FilterPreset::OffChip => Ok(FilterSpec::off_chip()),
            FilterPreset::Ideal => Ok(FilterSpec::ideal()),
            FilterPreset::Custom => {
                let shape = self.shape.ok_or_else(|| Error::Config {
                    path: "filter.shape".into(),
                    reason: "required with preset = \"custom\"".into(),
                })?;
                let fwhm = match shape {
                    FilterShape::Ideal => 0.0,
                    _ => {
                        let ghz = self.fwhm_ghz.ok_or_else(|| Error::Config {
                            path: "filter.fwhm_ghz".into(),
                            reason: "required for a non-ideal custom filter".into(),
                        })?;
                        // Angular FWHM of a filter quoted as an ordinary-frequency width.
                        std::f64::consts::TAU * ghz * 1e9
                    }
                };
                FilterSpec::new(shape, fwhm).map_err(|e| Error::Config {
                    path: "filter.fwhm_ghz".into(),
                    reason: e.to_string(),
                })
            }
        }
    }
}

/// Complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    /// Top-level seed; every random stream is derived from it.
    pub rng_seed: u64,
    pub ring: RingConfig,
    pub pump: PumpConfig,
    pub spiral: SpiralConfig,
    pub filter: FilterConfig,
    /// Campaign settings. Its `filter` and `rng_seed` entries are overridden
    /// by the top-level `[filter]` section and `rng_seed`.
    pub campaign: CampaignConfig,
    /// Directory used to resolve relative paths (not serialized).
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("run"),
            rng_seed: 42,
            ring: RingConfig::default(),
            pump: PumpConfig::default(),
            spiral: SpiralConfig::default(),
            filter: FilterConfig::default(),
            campaign: CampaignConfig::default(),
            base_dir: PathBuf::new(),
        }
    }
}

/// Fully built physical inputs of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup<T> {
    pub ring: RingParams<T>,
    pub pump: PumpSpectrum<T>,
    pub spiral: SpiralParams<T>,
    pub campaign: CampaignConfig,
}

fn cfg_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(path, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    /// Parses TOML text. `origin` names the source in error messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize::<_, RunConfig>(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Config {
                path: if path == "." { origin.to_string() } else { path },
                reason: inner.message().trim().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config is always representable")
    }

    /// Campaign with the run-level filter and seed applied.
    pub fn effective_campaign(&self) -> Result<CampaignConfig> {
        let mut c = self.campaign.clone();
        c.filter = self.filter.spec()?;
        c.rng_seed = self.rng_seed;
        c.validate().map_err(|e| cfg_err("campaign", e.to_string()))?;
        Ok(c)
    }

    pub fn ring_params<T: Real>(&self) -> Result<RingParams<T>> {
        let r = &self.ring;
        let perimeter = positive("ring.perimeter_um", r.perimeter_um)? * 1e-6;
        let group_index = match r.group_index {
            Some(n) => positive("ring.group_index", n)?,
            None => SPEED_OF_LIGHT / (positive("ring.fsr_ghz", r.fsr_ghz)? * 1e9 * perimeter),
        };
        let band = |tag: &str, lambda: f64, tau_e: f64, tau_tot: f64| -> Result<Resonance<T>> {
            let lambda = positive(&format!("ring.lambda_{tag}_nm"), lambda)?;
            let tau_e = positive(&format!("ring.tau_e_{tag}_ps"), tau_e)?;
            let tau_tot = positive(&format!("ring.tau_tot_{tag}_ps"), tau_tot)?;
            if tau_tot * (1.0 - 1e-12) > tau_e / 2.0 {
                return Err(cfg_err(
                    &format!("ring.tau_tot_{tag}_ps"),
                    format!(
                        "{tau_tot} ps exceeds tau_e/2 = {} ps (decay into two buses)",
                        tau_e / 2.0
                    ),
                ));
            }
            Ok(Resonance {
                omega0: nm_to_omega(T::lit(lambda)),
                tau_e: T::lit(tau_e * 1e-12),
                tau_tot: T::lit(tau_tot * 1e-12),
            })
        };
        let res = [
            band("p", r.lambda_p_nm, r.tau_e_p_ps, r.tau_tot_p_ps)?,
            band("s", r.lambda_s_nm, r.tau_e_s_ps, r.tau_tot_s_ps)?,
            band("i", r.lambda_i_nm, r.tau_e_i_ps, r.tau_tot_i_ps)?,
        ];
        RingParams::with_group_index(T::lit(perimeter), T::lit(group_index), res)
            .map_err(|e| cfg_err("ring", e.to_string()))
    }

    pub fn pump_spectrum<T: Real>(&self, ring: &RingParams<T>) -> Result<PumpSpectrum<T>> {
        let p = &self.pump;
        let center = match p.center_nm {
            Some(l) => nm_to_omega(T::lit(positive("pump.center_nm", l)?)),
            None => ring.resonance(crate::resonator::Band::Pump).omega0,
        };
        let lambda = crate::scalar::omega_to_nm(center).f64();
        if !p.chirp_ps2.is_finite() {
            return Err(cfg_err("pump.chirp_ps2", "must be finite"));
        }
        if p.shape != PumpShapeName::Tabulated && p.table.is_some() {
            return Err(cfg_err("pump.table", "only allowed with shape = \"tabulated\""));
        }
        let spectrum = match p.shape {
            PumpShapeName::Gaussian | PumpShapeName::Sech2 => {
                let fwhm = pm_width_to_omega(T::lit(positive("pump.fwhm_pm", p.fwhm_pm)?), T::lit(lambda));
                if p.shape == PumpShapeName::Gaussian {
                    PumpSpectrum::gaussian(center, fwhm)
                } else {
                    PumpSpectrum::sech2(center, fwhm)
                }
                .map_err(|e| cfg_err("pump.fwhm_pm", e.to_string()))?
            }
            PumpShapeName::Tabulated => {
                let rel = p
                    .table
                    .as_ref()
                    .ok_or_else(|| cfg_err("pump.table", "required with shape = \"tabulated\""))?;
                let path = self.base_dir.join(rel);
                let (detuning, amplitude) = read_pump_table::<T>(&path, center)?;
                PumpSpectrum::tabulated(center, detuning, amplitude)
                    .map_err(|e| cfg_err("pump.table", e.to_string()))?
            }
        };
        Ok(spectrum.with_chirp(T::lit(p.chirp_ps2 * 1e-24)))
    }

    pub fn spiral_params<T: Real>(&self, pump: &PumpSpectrum<T>) -> Result<SpiralParams<T>> {
        let s = &self.spiral;
        let length = positive("spiral.length_mm", s.length_mm)? * 1e-3;
        let center = match s.taylor_center_nm {
            Some(l) => nm_to_omega(T::lit(positive("spiral.taylor_center_nm", l)?)),
            None => pump.center,
        };
        if let Some(k) = s.dispersion_k_sn_per_m.iter().position(|v| !v.is_finite()) {
            return Err(cfg_err(&format!("spiral.dispersion_k_sn_per_m[{k}]"), "must be finite"));
        }
        if !s.gamma_nl_per_w_m.is_finite() {
            return Err(cfg_err("spiral.gamma_nl_per_w_m", "must be finite"));
        }
        SpiralParams::new(
            T::lit(length),
            center,
            s.dispersion_k_sn_per_m.iter().map(|&v| T::lit(v)).collect(),
            T::lit(s.gamma_nl_per_w_m),
        )
        .map_err(|e| cfg_err("spiral", e.to_string()))
    }

    /// Validates every section and builds the physical inputs.
    pub fn build<T: Real>(&self) -> Result<Setup<T>> {
        let ring = self.ring_params()?;
        let pump = self.pump_spectrum(&ring)?;
        let spiral = self.spiral_params(&pump)?;
        let campaign = self.effective_campaign()?;
        Ok(Setup {
            ring,
            pump,
            spiral,
            campaign,
        })
    }
}

/// Reads `lambda_nm, amplitude_re, amplitude_im` rows, converting to
/// detuning from `center` in increasing order.
fn read_pump_table<T: Real>(path: &Path, center: T) -> Result<(Vec<T>, Vec<Complex<T>>)> {
    let file = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| cfg_err("pump.table", format!("{file}: {e}")))?;
    let mut rows: Vec<(T, Complex<T>)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format {
            file: file.clone(),
            reason: e.to_string(),
        })?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format {
                    file: file.clone(),
                    reason: format!("row {}: column {} is not a finite number", k + 1, i + 1),
                })
        };
        let omega = nm_to_omega(T::lit(field(0)?));
        rows.push((omega - center, Complex::new(T::lit(field(1)?), T::lit(field(2)?))));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite detuning"));
    Ok(rows.into_iter().unzip())
}
