//! On-disk formats.
//!
//! Binary containers (`*.bin`) are self-describing:
//!
//! ```text
//! magic     8 bytes   "RINGJSA\0"
//! version   u32 LE
//! hlen      u64 LE    length of the JSON header
//! header    hlen bytes of UTF-8 JSON (kind, shape, exact rad/s grid, metadata)
//! payload   f64 LE, row-major; complex values stored as (re, im) pairs
//! ```
//!
//! Real maps are CSV with a wavelength header row and a wavelength first
//! column (nm). Nothing written here contains timestamps, so identical inputs
//! produce byte-identical files.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Array3};
use num_complex::Complex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{SpectralGrid, UniformAxis};
use crate::jsa::ComplexJsa;
use crate::reconstruct::{ReconstructionOptions, ReconstructionResult, PARAMETER_NAMES};
use crate::resonator::Band;
use crate::scalar::{omega_to_nm, Real};
use crate::stimulated::SourceTag;
use crate::synth::{CampaignConfig, FringeScan, MeasurementSet, TransferSample};

pub const MAGIC: &[u8; 8] = b"RINGJSA\0";
pub const FORMAT_VERSION: u32 = 1;

pub const CAMPAIGN_FILE: &str = "campaign.cfg";
pub const I_RES_FILE: &str = "i_res.csv";
pub const I_SPI_FILE: &str = "i_spi.csv";
pub const I_INT_FILE: &str = "i_int.csv";
pub const FRINGE_FILE: &str = "fringes.bin";
pub const TRANSFER_FILE: &str = "t_h.csv";
pub const JSP_FILE: &str = "jsp.csv";
pub const JSI_FILE: &str = "jsi.csv";
pub const JSA_FILE: &str = "jsa.bin";
pub const REPORT_FILE: &str = "report.json";

/// Header string of the first CSV column.
const CORNER: &str = "lambda_s_nm\\lambda_i_nm";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        file: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(io_err(path))
}

// ---------------------------------------------------------------- containers

/// Writes a container with a JSON header and a flat `f64` payload.
pub fn write_container<H: Serialize>(path: &Path, header: &H, payload: &[f64]) -> Result<()> {
    let json = serde_json::to_vec(header).map_err(|e| format_err(path, e.to_string()))?;
    let mut buf = Vec::with_capacity(20 + json.len() + 8 * payload.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&json);
    for v in payload {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    write_file(path, &buf)
}

/// Reads a container written by [`write_container`]; the payload length is
/// not checked here.
pub fn read_container<H: DeserializeOwned>(path: &Path) -> Result<(H, Vec<f64>)> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(path))?;
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(format_err(path, "not a RINGJSA container"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(format_err(path, format!("unsupported container version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let body = &bytes[20..];
    if body.len() < hlen || !(body.len() - hlen).is_multiple_of(8) {
        return Err(format_err(path, "truncated container"));
    }
    let header: H = serde_json::from_slice(&body[..hlen]).map_err(|e| format_err(path, format!("header: {e}")))?;
    let payload = body[hlen..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((header, payload))
}

/// Re-validates a deserialized grid (deserialization bypasses the checks).
fn checked_grid(path: &Path, g: &SpectralGrid<f64>) -> Result<SpectralGrid<f64>> {
    let axis = |a: &UniformAxis<f64>| {
        UniformAxis::new(a.start(), a.step(), a.len()).map_err(|e| format_err(path, format!("grid: {e}")))
    };
    Ok(SpectralGrid::new(axis(&g.signal)?, axis(&g.idler)?))
}

/// Metadata stored with a complex JSA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsaHeader {
    pub kind: String,
    pub layout: String,
    pub shape: [usize; 2],
    /// Exact grid in rad/s.
    pub grid: SpectralGrid<f64>,
    pub normalized: bool,
    pub total_probability: f64,
    pub source: SourceTag,
    /// SHA-256 of the configuration text the data derive from.
    pub provenance_sha256: Option<String>,
    pub rng_seed: Option<u64>,
}

const JSA_KIND: &str = "complex_jsa";
const FRINGE_KIND: &str = "fringe_scan";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub sha256: Option<String>,
    pub rng_seed: Option<u64>,
}

pub fn write_jsa<T: Real>(path: &Path, jsa: &ComplexJsa<T>, source: SourceTag, prov: &Provenance) -> Result<()> {
    let (ns, ni) = jsa.values.dim();
    let header = JsaHeader {
        kind: JSA_KIND.into(),
        layout: "row-major [signal][idler], complex f64 LE as (re, im)".into(),
        shape: [ns, ni],
        grid: jsa.grid.cast(),
        normalized: jsa.normalized,
        total_probability: jsa.total_probability().f64(),
        source,
        provenance_sha256: prov.sha256.clone(),
        rng_seed: prov.rng_seed,
    };
    let payload: Vec<f64> = jsa.values.iter().flat_map(|c| [c.re.f64(), c.im.f64()]).collect();
    write_container(path, &header, &payload)
}

pub fn read_jsa<T: Real>(path: &Path) -> Result<(ComplexJsa<T>, JsaHeader)> {
    let (header, payload): (JsaHeader, Vec<f64>) = read_container(path)?;
    if header.kind != JSA_KIND {
        return Err(format_err(path, format!("expected {JSA_KIND}, found {}", header.kind)));
    }
    let grid = checked_grid(path, &header.grid)?;
    let [ns, ni] = header.shape;
    if grid.shape() != (ns, ni) || payload.len() != 2 * ns * ni {
        return Err(format_err(path, "shape does not match grid or payload"));
    }
    let values = Array2::from_shape_vec(
        (ns, ni),
        payload
            .chunks_exact(2)
            .map(|p| Complex::new(T::lit(p[0]), T::lit(p[1])))
            .collect(),
    )
    .expect("length checked");
    let mut jsa = ComplexJsa::new(grid.cast(), values)?;
    jsa.normalized = header.normalized;
    Ok((jsa, header))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FringeHeader {
    kind: String,
    layout: String,
    shape: [usize; 3],
    grid: SpectralGrid<f64>,
    schedule_rad: Vec<f64>,
    noiseless: bool,
    rng_seed: u64,
}

// ----------------------------------------------------------------- CSV maps

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Writes a real map with nm axes.
pub fn write_map_csv<T: Real>(path: &Path, grid: &SpectralGrid<T>, map: &Array2<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = std::iter::once(CORNER.to_string())
        .chain(grid.idler.values().into_iter().map(|o| fmt(omega_to_nm(o).f64())))
        .collect();
    let csv_err = |e: csv::Error| format_err(path, e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for (s, row) in map.rows().into_iter().enumerate() {
        let rec: Vec<String> = std::iter::once(fmt(omega_to_nm(grid.signal.value(s)).f64()))
            .chain(row.iter().map(|v| fmt(v.f64())))
            .collect();
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| format_err(path, e.to_string()))?;
    write_file(path, &bytes)
}

/// Real map with the nm axes found in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvMap {
    pub signal_nm: Vec<f64>,
    pub idler_nm: Vec<f64>,
    pub values: Array2<f64>,
}

impl CsvMap {
    /// Checks the axes against `grid` to `rel_tol` in wavelength.
    pub fn check_grid<T: Real>(&self, path: &Path, grid: &SpectralGrid<T>, rel_tol: f64) -> Result<()> {
        let same = |nm: &[f64], axis: &UniformAxis<T>| {
            nm.len() == axis.len()
                && nm
                    .iter()
                    .zip(axis.values())
                    .all(|(a, o)| (a - omega_to_nm(o).f64()).abs() <= rel_tol * a.abs())
        };
        if same(&self.signal_nm, &grid.signal) && same(&self.idler_nm, &grid.idler) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}: axes do not match the {:?} grid",
                path.display(),
                grid.shape()
            )))
        }
    }
}

pub fn read_map_csv(path: &Path) -> Result<CsvMap> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| format_err(path, e.to_string()))?;
    let mut records = rdr.records();
    let parse = |s: &str, what: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| format_err(path, format!("{what}: `{s}` is not a number")))
    };
    let header = records
        .next()
        .ok_or_else(|| format_err(path, "empty file"))?
        .map_err(|e| format_err(path, e.to_string()))?;
    let idler_nm = header
        .iter()
        .skip(1)
        .map(|s| parse(s, "header"))
        .collect::<Result<Vec<_>>>()?;
    let mut signal_nm = Vec::new();
    let mut flat = Vec::new();
    for (r, rec) in records.enumerate() {
        let rec = rec.map_err(|e| format_err(path, e.to_string()))?;
        if rec.len() != idler_nm.len() + 1 {
            return Err(format_err(
                path,
                format!("row {}: expected {} columns", r + 1, idler_nm.len() + 1),
            ));
        }
        signal_nm.push(parse(&rec[0], &format!("row {}", r + 1))?);
        for s in rec.iter().skip(1) {
            flat.push(parse(s, &format!("row {}", r + 1))?);
        }
    }
    if signal_nm.is_empty() || idler_nm.is_empty() {
        return Err(format_err(path, "map has no data"));
    }
    let values = Array2::from_shape_vec((signal_nm.len(), idler_nm.len()), flat).expect("row lengths checked");
    Ok(CsvMap {
        signal_nm,
        idler_nm,
        values,
    })
}

// ------------------------------------------------------------ measurement set

/// Contents of `campaign.cfg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementManifest {
    pub format_version: u32,
    pub seeded: Band,
    /// Maps hold expected values rather than integer counts.
    pub noiseless: bool,
    pub rng_seed: u64,
    pub provenance_sha256: Option<String>,
    pub campaign: CampaignConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct TransferRow {
    lambda_nm: f64,
    omega_rad_per_s: f64,
    modulus: f64,
    phase_rad: f64,
}

pub fn save_measurement<T: Real>(dir: &Path, m: &MeasurementSet<T>, provenance: Option<&str>) -> Result<()> {
    ensure_dir(dir)?;
    let manifest = MeasurementManifest {
        format_version: FORMAT_VERSION,
        seeded: m.seeded,
        noiseless: m.campaign.noiseless,
        rng_seed: m.rng_seed(),
        provenance_sha256: provenance.map(str::to_string),
        campaign: m.campaign.clone(),
    };
    let text = toml::to_string_pretty(&manifest).map_err(|e| format_err(&dir.join(CAMPAIGN_FILE), e.to_string()))?;
    write_file(&dir.join(CAMPAIGN_FILE), text.as_bytes())?;
    write_map_csv(&dir.join(I_RES_FILE), &m.grid, &m.i_res)?;
    write_map_csv(&dir.join(I_SPI_FILE), &m.grid, &m.i_spi)?;
    write_map_csv(&dir.join(I_INT_FILE), &m.grid, &m.i_int)?;

    let (ns, ni, nt) = m.fringe.counts.dim();
    let header = FringeHeader {
        kind: FRINGE_KIND.into(),
        layout: "row-major [signal][idler][phase], f64 LE".into(),
        shape: [ns, ni, nt],
        grid: m.grid.cast(),
        schedule_rad: m.fringe.schedule.iter().map(|v| v.f64()).collect(),
        noiseless: m.campaign.noiseless,
        rng_seed: m.rng_seed(),
    };
    let payload: Vec<f64> = m.fringe.counts.iter().map(|v| v.f64()).collect();
    write_container(&dir.join(FRINGE_FILE), &header, &payload)?;

    let path = dir.join(TRANSFER_FILE);
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in &m.transfer {
        w.serialize(TransferRow {
            lambda_nm: omega_to_nm(s.omega).f64(),
            omega_rad_per_s: s.omega.f64(),
            modulus: s.modulus.f64(),
            phase_rad: s.phase.f64(),
        })
        .map_err(|e| format_err(&path, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| format_err(&path, e.to_string()))?;
    write_file(&path, &bytes)
}

/// Loads a measurement directory, listing every missing file at once.
pub fn load_measurement<T: Real>(dir: &Path) -> Result<MeasurementSet<T>> {
    let required = [
        CAMPAIGN_FILE,
        I_RES_FILE,
        I_SPI_FILE,
        I_INT_FILE,
        FRINGE_FILE,
        TRANSFER_FILE,
    ];
    let missing: Vec<&str> = required.iter().copied().filter(|f| !dir.join(f).is_file()).collect();
    if !missing.is_empty() {
        return Err(format_err(
            dir,
            format!("incomplete measurement set, missing: {}", missing.join(", ")),
        ));
    }
    let cfg_path = dir.join(CAMPAIGN_FILE);
    let text = fs::read_to_string(&cfg_path).map_err(io_err(&cfg_path))?;
    let manifest: MeasurementManifest =
        serde_path_to_error::deserialize(toml::Deserializer::new(&text)).map_err(|e| Error::Config {
            path: format!("{}: {}", cfg_path.display(), e.path()),
            reason: e.into_inner().message().trim().to_string(),
        })?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(format_err(
            &cfg_path,
            format!("unsupported format version {}", manifest.format_version),
        ));
    }

    let fpath = dir.join(FRINGE_FILE);
    let (fh, payload): (FringeHeader, Vec<f64>) = read_container(&fpath)?;
    if fh.kind != FRINGE_KIND {
        return Err(format_err(&fpath, format!("expected {FRINGE_KIND}, found {}", fh.kind)));
    }
    let grid64 = checked_grid(&fpath, &fh.grid)?;
    let [ns, ni, nt] = fh.shape;
    if grid64.shape() != (ns, ni) || fh.schedule_rad.len() != nt || payload.len() != ns * ni * nt {
        return Err(format_err(&fpath, "shape does not match grid, schedule or payload"));
    }
    let grid: SpectralGrid<T> = grid64.cast();
    let fringe = FringeScan::new(
        fh.schedule_rad.iter().map(|&v| T::lit(v)).collect(),
        Array3::from_shape_vec((ns, ni, nt), payload.into_iter().map(T::lit).collect()).expect("length checked"),
    )?;

    let map = |name: &str| -> Result<Array2<T>> {
        let path = dir.join(name);
        let m = read_map_csv(&path)?;
        m.check_grid(&path, &grid, 1e-9)?;
        Ok(m.values.mapv(T::lit))
    };
    let (i_res, i_spi, i_int) = (map(I_RES_FILE)?, map(I_SPI_FILE)?, map(I_INT_FILE)?);

    let tpath = dir.join(TRANSFER_FILE);
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&tpath)
        .map_err(|e| format_err(&tpath, e.to_string()))?;
    let transfer = rdr
        .deserialize::<TransferRow>()
        .map(|r| {
            let r = r.map_err(|e| format_err(&tpath, e.to_string()))?;
            Ok(TransferSample {
                omega: T::lit(r.omega_rad_per_s),
                modulus: T::lit(r.modulus),
                phase: T::lit(r.phase_rad),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut campaign = manifest.campaign;
    campaign.noiseless = manifest.noiseless;
    campaign.rng_seed = manifest.rng_seed;
    Ok(MeasurementSet {
        grid,
        i_res,
        i_spi,
        i_int,
        fringe,
        transfer,
        seeded: manifest.seeded,
        campaign,
    })
}

// ------------------------------------------------------------ reconstruction

/// Fitted resonance of the seeded band, in lab units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    pub tau_e_ps: f64,
    pub tau_e_std_ps: f64,
    pub tau_tot_ps: f64,
    pub tau_tot_std_ps: f64,
    pub omega0_rad_per_s: f64,
    pub omega0_std_rad_per_s: f64,
    pub lambda0_nm: f64,
    pub amplitude: f64,
    pub phase0_rad: f64,
    pub phase_slope_rad: f64,
    pub parameter_names: Vec<String>,
    pub covariance: Vec<Vec<f64>>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Contents of `report.json`. Non-finite map entries (masked points) are
/// written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub format_version: u32,
    pub grid: SpectralGrid<f64>,
    pub signal_nm: Vec<f64>,
    pub idler_nm: Vec<f64>,
    pub seeded: Band,
    pub options: ReconstructionOptions,
    pub convention: String,
    pub reference_index: [usize; 2],
    pub valid_points: usize,
    pub median_sigma_delta_rad: Option<f64>,
    pub mask: Vec<Vec<bool>>,
    pub delta_rad: Vec<Vec<Option<f64>>>,
    pub sigma_delta_rad: Vec<Vec<Option<f64>>>,
    pub fringe_amplitude: Vec<Vec<Option<f64>>>,
    pub abs_delta_rad: Vec<Vec<Option<f64>>>,
    pub abs_delta_mask: Vec<Vec<bool>>,
    pub theta_fe_rad: Vec<f64>,
    pub transfer: TransferReport,
    /// Campaign the measurement came from, when known.
    pub campaign: Option<CampaignConfig>,
    pub provenance_sha256: Option<String>,
}

fn rows<T: Real>(a: &Array2<T>) -> Vec<Vec<Option<f64>>> {
    a.rows()
        .into_iter()
        .map(|r| r.iter().map(|v| Some(v.f64()).filter(|x| x.is_finite())).collect())
        .collect()
}

fn bool_rows(a: &Array2<bool>) -> Vec<Vec<bool>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

pub fn reconstruction_report<T: Real>(
    r: &ReconstructionResult<T>,
    campaign: Option<&CampaignConfig>,
    provenance: Option<&str>,
) -> ReconstructionReport {
    let t = &r.transfer;
    let (se, st, so) = t.std_errors();
    let mut delta = r.fringe.phase.delta.clone();
    delta.zip_mut_with(&r.fringe.phase.mask, |d, m| {
        if !*m {
            *d = T::nan();
        }
    });
    ReconstructionReport {
        format_version: FORMAT_VERSION,
        grid: r.grid.cast(),
        signal_nm: r.grid.signal.values().iter().map(|o| omega_to_nm(*o).f64()).collect(),
        idler_nm: r.grid.idler.values().iter().map(|o| omega_to_nm(*o).f64()).collect(),
        seeded: r.seeded,
        options: r.options,
        convention: r.convention_note(),
        reference_index: [r.jsp.reference.0, r.jsp.reference.1],
        valid_points: r.jsp.mask.iter().filter(|m| **m).count(),
        median_sigma_delta_rad: r.fringe.phase.median_sigma().map(|v| v.f64()),
        mask: bool_rows(&r.jsp.mask),
        delta_rad: rows(&delta),
        sigma_delta_rad: rows(&r.fringe.phase.sigma),
        fringe_amplitude: rows(&r.fringe.amplitude),
        abs_delta_rad: rows(&r.abs_delta.phase.delta),
        abs_delta_mask: bool_rows(&r.abs_delta.phase.mask),
        theta_fe_rad: r.theta_fe.theta.iter().map(|v| v.f64()).collect(),
        transfer: TransferReport {
            tau_e_ps: t.tau_e.f64() * 1e12,
            tau_e_std_ps: se.f64() * 1e12,
            tau_tot_ps: t.tau_tot.f64() * 1e12,
            tau_tot_std_ps: st.f64() * 1e12,
            omega0_rad_per_s: t.omega0.f64(),
            omega0_std_rad_per_s: so.f64(),
            lambda0_nm: omega_to_nm(t.omega0).f64(),
            amplitude: t.amplitude.f64(),
            phase0_rad: t.phase0.f64(),
            phase_slope_rad: t.phase_slope.f64(),
            parameter_names: PARAMETER_NAMES.iter().map(|s| s.to_string()).collect(),
            covariance: t
                .covariance
                .iter()
                .map(|r| r.iter().map(|v| v.f64()).collect())
                .collect(),
            residual_norm: t.residual_norm.f64(),
            iterations: t.iterations,
        },
        campaign: campaign.cloned(),
        provenance_sha256: provenance.map(str::to_string),
    }
}

pub fn save_reconstruction<T: Real>(
    dir: &Path,
    r: &ReconstructionResult<T>,
    campaign: Option<&CampaignConfig>,
    prov: &Provenance,
) -> Result<()> {
    ensure_dir(dir)?;
    write_map_csv(&dir.join(JSP_FILE), &r.grid, &r.jsp.values)?;
    write_map_csv(&dir.join(JSI_FILE), &r.grid, &r.jsi)?;
    write_jsa(&dir.join(JSA_FILE), &r.jsa, SourceTag::Reconstructed, prov)?;
    let report = reconstruction_report(r, campaign, prov.sha256.as_deref());
    write_json(&dir.join(REPORT_FILE), &report)
}

/// The parts of a result directory needed for metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedResult<T> {
    pub jsa: ComplexJsa<T>,
    pub jsi: Array2<T>,
    pub jsp: Array2<T>,
    pub mask: Array2<bool>,
    pub report: ReconstructionReport,
}

pub fn load_reconstruction<T: Real>(dir: &Path) -> Result<LoadedResult<T>> {
    let required = [JSP_FILE, JSI_FILE, JSA_FILE, REPORT_FILE];
    let missing: Vec<&str> = required.iter().copied().filter(|f| !dir.join(f).is_file()).collect();
    if !missing.is_empty() {
        return Err(format_err(
            dir,
            format!("incomplete result directory, missing: {}", missing.join(", ")),
        ));
    }
    let (jsa, _) = read_jsa::<T>(&dir.join(JSA_FILE))?;
    let rpath = dir.join(REPORT_FILE);
    let report: ReconstructionReport = read_json(&rpath)?;
    let (ns, ni) = jsa.grid.shape();
    if report.mask.len() != ns || report.mask.iter().any(|r| r.len() != ni) {
        return Err(format_err(&rpath, "mask shape does not match jsa.bin"));
    }
    let mask = Array2::from_shape_fn((ns, ni), |(s, i)| report.mask[s][i]);
    let map = |name: &str| -> Result<Array2<T>> {
        let path = dir.join(name);
        let m = read_map_csv(&path)?;
        m.check_grid(&path, &jsa.grid, 1e-9)?;
        Ok(m.values.mapv(T::lit))
    };
    Ok(LoadedResult {
        jsi: map(JSI_FILE)?,
        jsp: map(JSP_FILE)?,
        jsa,
        mask,
        report,
    })
}

// --------------------------------------------------------------------- JSON

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| format_err(path, e.to_string()))?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read(path).map_err(io_err(path))?;
    serde_json::from_slice(&text).map_err(|e| format_err(path, e.to_string()))
}

/// Appends one line to a sidecar log. This is the only place wall-clock
/// time may appear in output directories.
pub fn append_log(dir: &Path, line: &str) -> Result<()> {
    let path: PathBuf = dir.join("run.log");
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(io_err(&path))?;
    writeln!(f, "{line}").map_err(io_err(&path))
}
