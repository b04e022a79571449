use ringjsa::config::RunConfig;
use ringjsa::error::Error;
use ringjsa::io::{
    load_measurement, load_reconstruction, read_jsa, save_measurement, save_reconstruction, write_jsa, Provenance,
    FRINGE_FILE, TRANSFER_FILE,
};
use ringjsa::metrics::schmidt_number;
use ringjsa::pipeline::simulate_truth;
use ringjsa::quadrature::Quadrature;
use ringjsa::reconstruct::{reconstruct, ReconstructionOptions};
use ringjsa::scalar::wrap_phase;
use ringjsa::stimulated::SourceTag;
use ringjsa::synth::{filtered_truth, synthesize_campaign};

#[test]
fn measurement_directory_round_trip() {
    let s = RunConfig::default().build::<f64>().unwrap();
    let t = simulate_truth(&s, Quadrature::default()).unwrap();
    for noiseless in [false, true] {
        let c = ringjsa::CampaignConfig {
            noiseless,
            ..s.campaign.clone()
        };
        let m = synthesize_campaign(&t.ring, &t.spiral, &s.ring, &c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_measurement(dir.path(), &m, Some("abc")).unwrap();
        let back = load_measurement::<f64>(dir.path()).unwrap();
        assert_eq!(back.grid, m.grid);
        assert_eq!(back.i_res, m.i_res);
        assert_eq!(back.i_spi, m.i_spi);
        assert_eq!(back.i_int, m.i_int);
        assert_eq!(back.fringe, m.fringe);
        assert_eq!(back.transfer, m.transfer);
        assert_eq!(back.seeded, m.seeded);
        assert_eq!(back.campaign, m.campaign);
        if !noiseless {
            let text = std::fs::read_to_string(dir.path().join("i_res.csv")).unwrap();
            assert!(text
                .lines()
                .skip(1)
                .flat_map(|l| l.split(',').skip(1))
                .all(|v| !v.contains('.')));
        }
        let a = reconstruct(&m, &ReconstructionOptions::default()).unwrap();
        let b = reconstruct(&back, &ReconstructionOptions::default()).unwrap();
        assert_eq!(a.jsp, b.jsp);
    }
}

#[test]
fn incomplete_measurement_lists_every_missing_file() {
    let s = RunConfig::default().build::<f64>().unwrap();
    let t = simulate_truth(&s, Quadrature::default()).unwrap();
    let m = synthesize_campaign(&t.ring, &t.spiral, &s.ring, &s.campaign).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_measurement(dir.path(), &m, None).unwrap();
    std::fs::remove_file(dir.path().join(FRINGE_FILE)).unwrap();
    std::fs::remove_file(dir.path().join(TRANSFER_FILE)).unwrap();
    let err = load_measurement::<f64>(dir.path()).unwrap_err();
    let text = err.to_string();
    assert!(text.contains(FRINGE_FILE) && text.contains(TRANSFER_FILE), "{text}");
    assert!(err.is_input_error());
    assert!(matches!(
        load_measurement::<f64>(&dir.path().join("nope")),
        Err(Error::Format { .. })
    ));
}

#[test]
fn reconstruction_directory_round_trip() {
    let s = RunConfig::default().build::<f64>().unwrap();
    let t = simulate_truth(&s, Quadrature::default()).unwrap();
    let m = synthesize_campaign(&t.ring, &t.spiral, &s.ring, &s.campaign).unwrap();
    let r = reconstruct(&m, &ReconstructionOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let prov = Provenance {
        sha256: Some("00".into()),
        rng_seed: Some(42),
    };
    save_reconstruction(dir.path(), &r, Some(&m.campaign), &prov).unwrap();
    let back = load_reconstruction::<f64>(dir.path()).unwrap();
    assert_eq!(back.jsa, r.jsa);
    assert_eq!(back.jsi, r.jsi);
    assert_eq!(back.jsp, r.jsp.values);
    assert_eq!(back.mask, r.jsp.mask);
    assert_eq!(back.report.reference_index, [r.jsp.reference.0, r.jsp.reference.1]);
    assert_eq!(back.report.campaign.as_ref(), Some(&m.campaign));
    assert!(back.report.convention.contains("Appendix"));
    assert!((schmidt_number(&back.jsa).unwrap().k - schmidt_number(&r.jsa).unwrap().k).abs() < 1e-15);
    // Masked points carry no phase estimate in the report.
    for (row_m, row_d) in back.report.mask.iter().zip(back.report.delta_rad.iter()) {
        for (m, d) in row_m.iter().zip(row_d.iter()) {
            assert!(*m <= d.is_some());
        }
    }
}

#[test]
fn truth_container_keeps_source_and_provenance() {
    let s = RunConfig::default().build::<f64>().unwrap();
    let t = simulate_truth(&s, Quadrature::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("truth_spiral.bin");
    let prov = Provenance {
        sha256: Some(ringjsa::io::sha256_hex(b"x")),
        rng_seed: None,
    };
    write_jsa(&path, &t.spiral, SourceTag::Spiral, &prov).unwrap();
    let (back, header) = read_jsa::<f64>(&path).unwrap();
    assert_eq!(back, t.spiral);
    assert_eq!(header.source, SourceTag::Spiral);
    assert_eq!(header.provenance_sha256, prov.sha256);
    assert!((header.total_probability - 1.0).abs() < 1e-9);
}

#[test]
fn single_precision_pipeline_round_trip() {
    let s = RunConfig::default().build::<f32>().unwrap();
    let mut c = s.campaign.clone();
    c.noiseless = true;
    let t = simulate_truth(&s, Quadrature::default()).unwrap();
    let m = synthesize_campaign(&t.ring, &t.spiral, &s.ring, &c).unwrap();
    let r = reconstruct(&m, &ReconstructionOptions::default()).unwrap();
    let target = filtered_truth(&t.ring, &t.spiral, &s.ring, &c).unwrap();
    let reference = target.cross[r.jsp.reference].arg();
    let worst = r
        .jsp
        .mask
        .indexed_iter()
        .filter(|(_, ok)| **ok)
        .map(|(idx, _)| wrap_phase(r.jsp.values[idx] - (target.cross[idx].arg() - reference)).abs())
        .fold(0.0f32, f32::max);
    assert!(worst < 1e-3, "f32 JSP error {worst}");
    let k = schmidt_number(&r.jsa).unwrap().k;
    assert!((k - 1.2729).abs() < 1e-2, "f32 K {k}");
}
