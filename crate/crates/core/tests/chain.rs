use twostage::harness::{run_ber_sim, Chain, LlrMode, SimConfig, SimScheme};

fn small(scheme: SimScheme) -> SimConfig {
    SimConfig {
        scheme,
        m: 3,
        m1: 2,
        n: 480,
        dv: 3,
        dc: 6,
        max_iter: 30,
        frames: 24,
        min_frames: 24,
        target_errors: u64::MAX,
        seed: 12,
        ..SimConfig::default()
    }
}

#[test]
fn genie_never_hurts_the_hard_stage() {
    for scheme in [SimScheme::TwoStageBinary, SimScheme::TwoStageAdbp] {
        for db in [9.0, 11.0] {
            let decoded = Chain::new(&small(scheme)).unwrap().run_point(db, 0, 12, 24, 24, u64::MAX);
            let genie = Chain::new(&SimConfig { genie: true, ..small(scheme) })
                .unwrap()
                .run_point(db, 0, 12, 24, 24, u64::MAX);
            assert!(
                genie.ber_hard_raw <= decoded.ber_hard_raw,
                "{scheme:?} {db} dB: genie {} vs decoded {}",
                genie.ber_hard_raw,
                decoded.ber_hard_raw
            );
            assert_eq!(genie.ber_soft, decoded.ber_soft);
        }
    }
}

#[test]
fn error_rates_fall_with_snr_for_every_scheme() {
    for scheme in [SimScheme::Bicm, SimScheme::TwoStageBinary, SimScheme::TwoStageAdbp] {
        let cfg = SimConfig { snr_db: vec![6.0, 12.0, 24.0], ..small(scheme) };
        let recs = run_ber_sim(&cfg).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs[0].ser_total >= recs[1].ser_total && recs[1].ser_total >= recs[2].ser_total, "{scheme:?}");
        assert_eq!(recs[2].ser_total, 0.0, "{scheme:?}");
        assert!(recs.iter().all(|r| r.frames == 24 && r.undersampled));
    }
}

#[test]
fn von_mises_front_end_tracks_the_exact_one() {
    // several coset points per stage-1 class, where the wrapped model applies
    let base = SimConfig { m: 5, ..small(SimScheme::TwoStageBinary) };
    let exact = Chain::new(&base).unwrap().run_point(22.0, 0, 12, 24, 24, u64::MAX);
    let vm = Chain::new(&SimConfig { llr: LlrMode::VonMises, ..base }).unwrap().run_point(22.0, 0, 12, 24, 24, u64::MAX);
    assert!((exact.ber_soft_raw - vm.ber_soft_raw).abs() <= 0.1 * exact.ber_soft_raw, "{} vs {}", exact.ber_soft_raw, vm.ber_soft_raw);
    assert!((exact.ber_soft - vm.ber_soft).abs() <= 0.01 + 0.5 * exact.ber_soft);
}
