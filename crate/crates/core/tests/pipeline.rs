use scma_core::codebook::generate_grid_codebook;
use scma_core::detector::DetectorKind;
use scma_core::dmpa::DmpaMode;
use scma_core::harness::{
    emit_results, repro_path, run_bler, run_divergence, BlerRecord, CodebookSource, DivergenceConfig, DivergencePath,
    SimConfig, TimingRecord,
};

fn sim(detector: DetectorKind, n0: &[f64], blocks: usize) -> SimConfig {
    SimConfig {
        detector,
        n0: n0.to_vec(),
        blocks,
        ..SimConfig::default()
    }
}

#[test]
fn noiseless_limit_has_no_errors() {
    for kind in ["mpa", "llr", "split-mpa", "split-llr"] {
        let recs = run_bler(&sim(kind.parse().unwrap(), &[1e-6], 100)).unwrap();
        assert_eq!(recs[0].block_errors, 0, "{kind}");
        assert_eq!(recs[0].blocks, 600);
    }
}

#[test]
fn noiseless_dmpa_needs_grid_aligned_codebook() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.cb");
    generate_grid_codebook(4, 16, 0.05, 1.0, 4)
        .unwrap()
        .save(&path)
        .unwrap();
    for mode in [DmpaMode::Split1d, DmpaMode::Complex2d] {
        let cfg = SimConfig {
            codebook: CodebookSource::File(path.clone()),
            ..sim(DetectorKind::Dmpa(mode), &[1e-6], 100)
        };
        assert_eq!(run_bler(&cfg).unwrap()[0].block_errors, 0);
    }
    // off-grid components shift by up to w/2 each, far beyond sigma
    let recs = run_bler(&sim(DetectorKind::Dmpa(DmpaMode::Auto), &[1e-6], 50)).unwrap();
    assert!(recs[0].bler > 0.1);
}

#[test]
fn bler_non_increasing_as_noise_drops() {
    let sweep = [0.2, 0.05, 0.01, 0.002];
    for kind in [DetectorKind::Mpa, DetectorKind::Dmpa(DmpaMode::Auto)] {
        let recs = run_bler(&sim(kind, &sweep, 400)).unwrap();
        // sorted by ascending N0
        for pair in recs.windows(2) {
            assert!(pair[0].ci_lo <= pair[1].ci_hi, "{kind}: {pair:?}");
        }
    }
}

#[test]
fn coarse_grid_floor_at_low_noise() {
    let fine = run_bler(&sim(DetectorKind::Mpa, &[0.002], 300)).unwrap();
    let coarse = SimConfig {
        w: 0.3,
        ..sim(DetectorKind::Dmpa(DmpaMode::Auto), &[0.002], 300)
    };
    let coarse = run_bler(&coarse).unwrap();
    assert!(coarse[0].ci_lo > fine[0].ci_hi);
}

#[test]
fn detectors_share_trial_streams() {
    // LLR and linear MPA see identical bits and noise, so their counts agree
    let a = run_bler(&sim(DetectorKind::Mpa, &[0.05], 200)).unwrap();
    let b = run_bler(&sim(DetectorKind::Llr, &[0.05], 200)).unwrap();
    assert_eq!(a[0].block_errors, b[0].block_errors);
}

#[test]
fn thread_count_does_not_change_results() {
    let base = sim(DetectorKind::SplitMpa, &[0.02, 0.1], 150);
    let one = run_bler(&SimConfig {
        threads: Some(1),
        ..base.clone()
    })
    .unwrap();
    let three = run_bler(&SimConfig {
        threads: Some(3),
        ..base
    })
    .unwrap();
    assert_eq!(one, three);
}

fn divergence(w: f64, n0: f64, path: DivergencePath) -> f64 {
    run_divergence(&DivergenceConfig {
        w,
        n0,
        trials: 60,
        path,
        seed: 21,
        ..DivergenceConfig::default()
    })
    .unwrap()
    .max_abs
}

#[test]
fn halving_w_does_not_increase_divergence() {
    for n0 in [0.2, 0.05] {
        let mut prev = divergence(0.1, n0, DivergencePath::Split1d);
        for w in [0.05, 0.025] {
            let d = divergence(w, n0, DivergencePath::Split1d);
            assert!(d <= prev + 1e-9, "N0={n0} w={w}: {d} > {prev}");
            prev = d;
        }
    }
}

#[test]
fn grid_aligned_divergence_is_round_off() {
    for path in [DivergencePath::Split1d, DivergencePath::Complex2d] {
        let rec = run_divergence(&DivergenceConfig {
            w: 0.25,
            n0: 0.4,
            trials: 20,
            path,
            grid_aligned: true,
            amplitude: 0.5,
            ..DivergenceConfig::default()
        })
        .unwrap();
        assert!(rec.max_rel < 1e-8, "{path:?}: {}", rec.max_rel);
    }
}

#[test]
fn empty_tables_are_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.csv");
    emit_results::<BlerRecord>(&[], &p, 1, "").unwrap();
    assert_eq!(
        std::fs::read_to_string(&p).unwrap(),
        "detector,N0,w,blocks,block_errors,bler,ci_lo,ci_hi\n"
    );
    let t = dir.path().join("timing.csv");
    emit_results::<TimingRecord>(&[], &t, 1, "").unwrap();
    assert_eq!(
        std::fs::read_to_string(&t).unwrap(),
        "detector,d_f,trials,mean_s,std_s\n"
    );
    assert!(repro_path(&t).exists());
}

#[test]
fn unwritable_path_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("missing").join("out.csv");
    assert!(emit_results::<BlerRecord>(&[], &p, 1, "").is_err());
}
