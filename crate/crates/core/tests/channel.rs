use statrs::distribution::{ContinuousCDF, Normal};

use twostage::channel::{
    rician_ergodic_capacity, sample_rician_amplitude, stream_rng, ChannelKind, ChannelModel, SnrConvention,
};

#[test]
fn noise_passes_kolmogorov_smirnov() {
    let ch = ChannelModel::new(ChannelKind::Awgn, 7.0, SnrConvention::PerDimension);
    let mut rng = stream_rng(21, 0);
    let n = 100_000;
    let mut z: Vec<f64> = (0..n).map(|_| ch.transmit(0.3, &mut rng).y - 0.3).collect();
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, ch.sigma()).unwrap();
    let d = z
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = normal.cdf(v);
            (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value
    assert!(d < 1.63 / (n as f64).sqrt(), "KS statistic {d}");
}

#[test]
fn ergodic_capacity_matches_monte_carlo() {
    let mut rng = stream_rng(22, 0);
    let n = 400_000;
    for &(k, snr_db) in &[(1e-10, 10.0), (2.0, 15.0), (10.0, 5.0)] {
        let snr = 10f64.powf(snr_db / 10.0);
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let h = sample_rician_amplitude(k, &mut rng);
                (1.0 + h * h * snr).log2()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let exact = rician_ergodic_capacity(k, snr).unwrap();
        assert!((exact - mean).abs() < 4.0 * se, "K={k}: {exact} vs {mean} ± {se}");
    }
}

#[test]
fn fading_gains_have_unit_power_and_are_shared_by_seed() {
    let ch = ChannelModel::rician(2.0, 10.0);
    let mut a = stream_rng(23, 4);
    let mut b = stream_rng(23, 4);
    let n = 1_000_000;
    let mut power = 0.0;
    for _ in 0..n {
        let u = ch.transmit(1.0, &mut a);
        let v = ch.transmit(1.0, &mut b);
        assert_eq!(u, v);
        power += u.h * u.h;
    }
    assert!((power / n as f64 - 1.0).abs() < 0.01);
}
