//! End-to-end tests of the `ringjsa` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ringjsa::io::{load_measurement, read_jsa};
use serde_json::Value;

/// Schmidt numbers of the default resonator JSA (161 × 161 dense grid) and
/// of the default filtered 10 × 20 campaign target, from an independent
/// brute-force quadrature + SVD; (complex, intensity-only).
const DENSE_K: (f64, f64) = (1.322722005544517, 1.3183185870116982);
const CAMPAIGN_K: (f64, f64) = (1.272926219144304, 1.115298638199351);

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ringjsa"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn ringjsa")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "ringjsa {args:?} failed with {:?}:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// Default truth directory, simulated once for the whole test binary.
fn default_truth() -> &'static Path {
    static TRUTH: OnceLock<PathBuf> = OnceLock::new();
    TRUTH.get_or_init(|| {
        let dir = scratch("default-truth").join("truth");
        ok(&["simulate", "--out", s(&dir)]);
        dir
    })
}

/// Every file of a directory except the timestamped sidecar log.
fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "run.log")
        .map(|e| (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn png_size(path: &Path) -> (u32, u32) {
    let bytes = fs::read(path).unwrap();
    assert_eq!(&bytes[1..4], b"PNG");
    let be = |o: usize| u32::from_be_bytes(bytes[o..o + 4].try_into().unwrap());
    (be(16), be(20))
}

#[test]
fn simulate_writes_normalized_truth_and_reference_schmidt_numbers() {
    let truth = default_truth();
    for f in [
        "run.toml",
        "truth.json",
        "truth_ring.bin",
        "truth_spiral.bin",
        "truth_dense.bin",
        "transfer_curves.csv",
        "truth_ring_jsi.png",
        "truth_ring_phase.png",
        "run.log",
    ] {
        assert!(truth.join(f).is_file(), "missing {f}");
    }
    for f in ["truth_ring.bin", "truth_spiral.bin", "truth_dense.bin"] {
        let (jsa, header) = read_jsa::<f64>(&truth.join(f)).unwrap();
        assert!(header.normalized);
        assert!((jsa.total_probability() - 1.0).abs() < 1e-12, "{f}");
    }
    let summary = json(&truth.join("truth.json"));
    let k = |a: &str, b: &str| summary[a][b].as_f64().unwrap();
    assert!((k("k_dense", "complex") - DENSE_K.0).abs() < 1e-4);
    assert!((k("k_dense", "intensity_only") - DENSE_K.1).abs() < 1e-4);
    assert!((k("k_campaign", "complex") - CAMPAIGN_K.0).abs() < 1e-4);
    assert!((k("k_campaign", "intensity_only") - CAMPAIGN_K.1).abs() < 1e-4);
    assert_eq!(summary["pump_resolved_on_dense_grid"], Value::Bool(true));

    let curves = fs::read_to_string(truth.join("transfer_curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 1 + 3 * 401);
}

#[test]
fn simulate_is_idempotent() {
    let dir = scratch("idempotent");
    ok(&["simulate", "--out", s(&dir.join("a")), "--scale", "1"]);
    ok(&["simulate", "--out", s(&dir.join("b")), "--scale", "1"]);
    assert!(tree(&dir.join("a")) == tree(&dir.join("b")));
}

#[test]
fn pump_bandwidth_flag_sets_the_pump_and_flags_unresolved_grids() {
    let dir = scratch("narrow-pump");
    let out = ok(&["simulate", "--pump-bandwidth", "1", "--out", s(&dir)]);
    let summary = json(&dir.join("truth.json"));
    assert_eq!(summary["pump_fwhm_pm"].as_f64(), Some(1.0));
    assert_eq!(summary["pump_resolved_on_dense_grid"], Value::Bool(false));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not converged"));
    let run_toml = fs::read_to_string(dir.join("run.toml")).unwrap();
    assert!(run_toml.contains("fwhm_pm = 1.0"));
}

#[test]
fn synthesize_is_deterministic_for_a_fixed_seed() {
    let dir = scratch("determinism");
    let truth = default_truth();
    for name in ["a", "b"] {
        ok(&[
            "synthesize",
            "--truth",
            s(truth),
            "--seed",
            "11",
            "--out",
            s(&dir.join(name)),
        ]);
    }
    ok(&[
        "synthesize",
        "--truth",
        s(truth),
        "--seed",
        "12",
        "--out",
        s(&dir.join("c")),
    ]);
    let (a, b, c) = (tree(&dir.join("a")), tree(&dir.join("b")), tree(&dir.join("c")));
    assert!(a.len() >= 6);
    assert!(a == b);
    let res = |t: &[(String, Vec<u8>)]| t.iter().find(|(n, _)| n == "i_res.csv").unwrap().1.clone();
    assert_ne!(res(&a), res(&c));
}

#[test]
fn noiseless_synthesis_writes_seed_independent_expected_values() {
    let dir = scratch("noiseless");
    let truth = default_truth();
    for (name, seed) in [("a", "1"), ("b", "2")] {
        ok(&[
            "synthesize",
            "--truth",
            s(truth),
            "--noiseless",
            "--seed",
            seed,
            "--out",
            s(&dir.join(name)),
        ]);
    }
    let (a, b) = (
        load_measurement::<f64>(&dir.join("a")).unwrap(),
        load_measurement::<f64>(&dir.join("b")).unwrap(),
    );
    assert!(a.campaign.noiseless);
    assert!(a.i_res.iter().any(|v| v.fract() != 0.0));
    // Only the recorded seed may differ.
    assert_ne!(a.rng_seed(), b.rng_seed());
    assert_eq!(
        (&a.i_res, &a.i_spi, &a.i_int, &a.fringe),
        (&b.i_res, &b.i_spi, &b.i_int, &b.fringe)
    );
    let maps = |d: &Path| ["i_res.csv", "i_spi.csv", "i_int.csv"].map(|f| fs::read(d.join(f)).unwrap());
    assert!(maps(&dir.join("a")) == maps(&dir.join("b")));
}

#[test]
fn default_schedule_has_thirty_phase_steps() {
    let dir = scratch("schedule");
    ok(&["synthesize", "--truth", s(default_truth()), "--out", s(&dir)]);
    let m = load_measurement::<f64>(&dir).unwrap();
    assert_eq!(m.fringe.schedule.len(), 30);
    assert_eq!(m.fringe.counts.dim(), (10, 20, 30));
    assert!(m.i_res.iter().all(|v| v.fract() == 0.0));
}

#[test]
fn missing_inputs_and_bad_configs_exit_with_code_2() {
    let dir = scratch("errors");
    let out = run(&[
        "synthesize",
        "--truth",
        s(&dir.join("nowhere")),
        "--out",
        s(&dir.join("m")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("truth_ring.bin") && err.contains("truth_spiral.bin"),
        "{err}"
    );

    let bad = dir.join("bad.toml");
    fs::write(&bad, "[ring]\ntau_e_s_ps = -3.0\n").unwrap();
    let out = run(&["simulate", "--config", s(&bad), "--out", s(&dir.join("t"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ring.tau_e_s_ps"));

    fs::write(&bad, "[pump]\nfwhm_pmm = 3.0\n").unwrap();
    let out = run(&["simulate", "--config", s(&bad), "--out", s(&dir.join("t"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pump"));

    assert_eq!(run(&["simulate", "--seed-order", "2"]).status.code(), Some(2));
    assert_eq!(
        run(&["reconstruct", "--measurement", s(&dir.join("none"))])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["report", "--result", s(&dir.join("none"))]).status.code(),
        Some(2)
    );
}

#[test]
fn numerical_failures_exit_with_code_3() {
    let dir = scratch("numerical");
    let truth = default_truth();
    let cfg = fs::read_to_string(truth.join("run.toml")).unwrap();
    let starved: String = cfg
        .lines()
        .map(|l| match l.split(" = ").next() {
            Some("ring_peak_counts" | "spiral_peak_counts") => format!("{} = 1e-9", l.split(" = ").next().unwrap()),
            Some("dark_counts") => "dark_counts = 0.0".to_string(),
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n");
    let path = dir.join("starved.toml");
    fs::write(&path, starved).unwrap();
    ok(&[
        "synthesize",
        "--truth",
        s(truth),
        "--config",
        s(&path),
        "--out",
        s(&dir.join("m")),
    ]);
    let out = run(&["reconstruct", "--measurement", s(&dir.join("m"))]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn noiseless_round_trip_recovers_the_phase() {
    let dir = scratch("round-trip");
    let truth = default_truth();
    ok(&[
        "synthesize",
        "--truth",
        s(truth),
        "--noiseless",
        "--out",
        s(&dir.join("m")),
    ]);
    ok(&[
        "reconstruct",
        "--measurement",
        s(&dir.join("m")),
        "--out",
        s(&dir.join("r")),
    ]);
    ok(&["report", "--result", s(&dir.join("r")), "--truth", s(truth)]);
    let metrics = json(&dir.join("r").join("metrics.json"));
    let t = &metrics["truth"];
    assert!(t["max_jsp_error_rad"].as_f64().unwrap() < 1e-6, "{t}");
    assert!(t["fidelity_intensity_percent"].as_f64().unwrap() > 99.99);
    assert!((t["k_target"]["k"].as_f64().unwrap() - CAMPAIGN_K.0).abs() < 1e-4);
}

#[test]
fn both_seed_orders_give_the_same_phase() {
    let dir = scratch("seed-orders");
    let truth = dir.join("truth");
    ok(&["simulate", "--filter", "ideal", "--out", s(&truth), "--scale", "1"]);
    let mut maps = Vec::new();
    for order in ["-1", "+1"] {
        let (m, r) = (dir.join(format!("m{order}")), dir.join(format!("r{order}")));
        ok(&[
            "synthesize",
            "--truth",
            s(&truth),
            "--noiseless",
            "--seed-order",
            order,
            "--out",
            s(&m),
        ]);
        ok(&["reconstruct", "--measurement", s(&m), "--out", s(&r)]);
        let report = json(&r.join("report.json"));
        assert_eq!(report["seeded"], if order == "-1" { "signal" } else { "idler" });
        maps.push(ringjsa::io::read_map_csv(&r.join("jsp.csv")).unwrap().values);
    }
    let worst = maps[0]
        .iter()
        .zip(maps[1].iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn masked_points_propagate_to_report_and_images() {
    let dir = scratch("mask");
    ok(&["synthesize", "--truth", s(default_truth()), "--out", s(&dir.join("m"))]);
    ok(&["reconstruct", "--measurement", s(&dir.join("m"))]);
    let result = dir.join("result");
    ok(&["report", "--result", s(&result), "--scale", "3"]);
    let report = json(&result.join("report.json"));
    let mask = report["mask"].as_array().unwrap();
    let (ns, ni) = (mask.len(), mask[0].as_array().unwrap().len());
    let corners = [(0, 0), (0, ni - 1), (ns - 1, 0), (ns - 1, ni - 1)];
    let masked: Vec<_> = corners
        .iter()
        .filter(|(a, b)| mask[*a][*b] == Value::Bool(false))
        .collect();
    assert!(!masked.is_empty(), "no dim corner was masked");
    for (a, b) in masked {
        assert_eq!(report["delta_rad"][a][b], Value::Null);
    }

    let metrics = json(&result.join("metrics.json"));
    assert!(metrics["truth"].is_null());
    assert!(metrics["truth_skipped"].is_string());
}

#[test]
fn report_states_self_fidelity_k_ordering_and_grid_sized_images() {
    let dir = scratch("report");
    let truth = default_truth();
    ok(&["synthesize", "--truth", s(truth), "--out", s(&dir.join("m"))]);
    ok(&[
        "reconstruct",
        "--measurement",
        s(&dir.join("m")),
        "--out",
        s(&dir.join("r")),
    ]);
    ok(&[
        "report",
        "--result",
        s(&dir.join("r")),
        "--truth",
        s(truth),
        "--measurement",
        s(&dir.join("m")),
        "--trials",
        "20",
        "--scale",
        "5",
        "--out",
        s(&dir.join("out")),
    ]);
    let metrics = json(&dir.join("out").join("metrics.json"));
    assert_eq!(metrics["self_fidelity_intensity_percent"].as_f64(), Some(100.0));
    assert!((metrics["self_fidelity_complex_percent"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    let (kp, ki) = (
        metrics["k_jsp"]["k"].as_f64().unwrap(),
        metrics["k_jsi"]["k"].as_f64().unwrap(),
    );
    assert_eq!(metrics["k_ordering_complex_ge_intensity"], Value::Bool(kp >= ki));
    assert!(kp > ki);
    assert_eq!(metrics["monte_carlo"]["trials"].as_u64(), Some(20));
    assert!(metrics["truth"]["fidelity_complex_percent"].as_f64().unwrap() > 99.0);

    let images = metrics["images"].as_array().unwrap();
    assert!(images.len() >= 6);
    for name in images {
        let path = dir.join("out").join(name.as_str().unwrap());
        assert!(fs::metadata(&path).unwrap().len() > 0);
        assert_eq!(png_size(&path), (10 * 5, 20 * 5), "{}", path.display());
    }
}

#[test]
fn missing_truth_only_skips_fidelities() {
    let dir = scratch("no-truth");
    ok(&["synthesize", "--truth", s(default_truth()), "--out", s(&dir.join("m"))]);
    ok(&[
        "reconstruct",
        "--measurement",
        s(&dir.join("m")),
        "--out",
        s(&dir.join("r")),
    ]);
    let out = ok(&[
        "report",
        "--result",
        s(&dir.join("r")),
        "--truth",
        s(&dir.join("absent")),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipping truth comparison"));
    let metrics = json(&dir.join("r").join("metrics.json"));
    assert!(metrics["truth"].is_null());
    assert!(metrics["truth_skipped"].as_str().unwrap().contains("truth_ring.bin"));
}

#[test]
fn full_chain_from_defaults_runs_in_time() {
    let dir = scratch("chain");
    let started = Instant::now();
    let cfg = dir.join("run.toml");
    fs::write(&cfg, format!("output_dir = {:?}\n", s(&dir.join("run")))).unwrap();
    ok(&["simulate", "--config", s(&cfg)]);
    let run_dir = dir.join("run");
    ok(&["synthesize", "--truth", s(&run_dir.join("truth"))]);
    ok(&["reconstruct", "--measurement", s(&run_dir.join("measurement"))]);
    ok(&[
        "report",
        "--result",
        s(&run_dir.join("result")),
        "--truth",
        s(&run_dir.join("truth")),
    ]);
    assert!(started.elapsed() < Duration::from_secs(300));
    for f in [
        "truth/truth_ring.bin",
        "measurement/fringes.bin",
        "result/jsa.bin",
        "result/metrics.json",
    ] {
        assert!(run_dir.join(f).is_file(), "missing {f}");
    }
}

#[test]
fn shipped_default_config_matches_built_in_defaults() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let cfg = ringjsa::RunConfig::load(&path).unwrap();
    assert_eq!(cfg.to_toml(), ringjsa::RunConfig::default().to_toml());
}
