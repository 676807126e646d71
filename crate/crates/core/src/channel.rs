//! Channel transitions and reference capacities.
//!
//! Each PAM dimension sees `y = h x + z` with `z ~ N(0, sigma2)` and a
//! positive real gain `h` known to the receiver. The two dimensions of one
//! QAM symbol share a gain. `sigma2 = 1 / Kw` is the variance appearing in the
//! detector exponent `-(Kw / 2) |y - x|²`.

use std::f64::consts::LN_2;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::special::{bessel_i0e, integrate_adaptive, NumericError};

/// Rician factor used for Rayleigh fading (-100 dB).
pub const RAYLEIGH_K: f64 = 1e-10;

/// Deterministic generator for stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// How a quoted Es/N0 maps to the per-dimension noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// `sigma2 = E[x²] / snr`: the quoted SNR is the per-dimension SNR, equal
    /// to the complex-symbol Es/N0 with noise variance N0/2 per dimension.
    #[default]
    PerDimension,
    /// `sigma2 = N0` per dimension with `Es = 2 E[x²]` per complex symbol,
    /// i.e. `sigma2 = 2 E[x²] / snr` (3 dB below `PerDimension`).
    NoiseVarianceN0,
}

impl SnrConvention {
    pub fn label(self) -> &'static str {
        match self {
            SnrConvention::PerDimension => "esn0_per_dim",
            SnrConvention::NoiseVarianceN0 => "esn0_complex_sigma2_n0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "esn0_per_dim" | "per_dim" | "per-dimension" => Some(SnrConvention::PerDimension),
            "esn0_complex_sigma2_n0" | "n0" | "literal" => Some(SnrConvention::NoiseVarianceN0),
            _ => None,
        }
    }

    fn noise_factor(self) -> f64 {
        match self {
            SnrConvention::PerDimension => 1.0,
            SnrConvention::NoiseVarianceN0 => 2.0,
        }
    }
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Awgn,
    /// Rician fading with factor `k` (linear); Rayleigh as `k -> 0`.
    Rician { k: f64 },
}

impl ChannelKind {
    pub fn describe(&self) -> String {
        match self {
            ChannelKind::Awgn => "awgn".to_string(),
            ChannelKind::Rician { k } if *k <= RAYLEIGH_K => "rayleigh".to_string(),
            ChannelKind::Rician { k } => format!("rician_k{k}"),
        }
    }
}

/// A channel at one operating point. Immutable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    /// Quoted Es/N0 (linear).
    pub es_n0: f64,
    /// Per-dimension noise variance.
    pub sigma2: f64,
    pub convention: SnrConvention,
}

/// One received sample with its (perfectly known) gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelUse {
    pub y: f64,
    pub h: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl ChannelModel {
    /// Channel for a unit-energy constellation at `es_n0_db`.
    pub fn new(kind: ChannelKind, es_n0_db: f64, convention: SnrConvention) -> Self {
        Self::with_energy(kind, es_n0_db, convention, 1.0)
    }

    pub fn with_energy(
        kind: ChannelKind,
        es_n0_db: f64,
        convention: SnrConvention,
        energy: f64,
    ) -> Self {
        let es_n0 = db_to_linear(es_n0_db);
        assert!(es_n0 > 0.0 && energy > 0.0);
        if let ChannelKind::Rician { k } = kind {
            assert!(k >= 0.0, "Rician factor must be non-negative");
        }
        ChannelModel {
            kind,
            es_n0,
            sigma2: convention.noise_factor() * energy / es_n0,
            convention,
        }
    }

    pub fn awgn(es_n0_db: f64) -> Self {
        Self::new(ChannelKind::Awgn, es_n0_db, SnrConvention::default())
    }

    pub fn rician(k: f64, es_n0_db: f64) -> Self {
        Self::new(ChannelKind::Rician { k }, es_n0_db, SnrConvention::default())
    }

    pub fn rayleigh(es_n0_db: f64) -> Self {
        Self::rician(RAYLEIGH_K, es_n0_db)
    }

    /// Channel with an explicit noise variance (mostly for tests).
    pub fn from_sigma2(kind: ChannelKind, sigma2: f64) -> Self {
        ChannelModel {
            kind,
            es_n0: 1.0 / sigma2,
            sigma2,
            convention: SnrConvention::PerDimension,
        }
    }

    /// Detector concentration `Kw = 1 / sigma2`.
    pub fn kw(&self) -> f64 {
        1.0 / self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Per-dimension SNR `E[x²] / sigma2` for a constellation of the given energy.
    pub fn snr_per_dim(&self, energy: f64) -> f64 {
        energy / self.sigma2
    }

    pub fn sample_gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            ChannelKind::Awgn => 1.0,
            ChannelKind::Rician { k } => sample_rician_amplitude(k, rng),
        }
    }

    /// `y = h x + z` with a given gain.
    pub fn transmit_with_gain<R: Rng + ?Sized>(&self, x: f64, h: f64, rng: &mut R) -> ChannelUse {
        let z: f64 = rng.sample(StandardNormal);
        ChannelUse {
            y: h * x + self.sigma() * z,
            h,
        }
    }

    pub fn transmit<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> ChannelUse {
        let h = self.sample_gain(rng);
        self.transmit_with_gain(x, h, rng)
    }

    /// Reference capacity per real dimension for a constellation of the
    /// given energy: Shannon for AWGN, half the ergodic capacity for fading.
    pub fn reference_capacity_per_dim(&self, energy: f64) -> Result<f64, NumericError> {
        let snr = self.snr_per_dim(energy);
        match self.kind {
            ChannelKind::Awgn => Ok(shannon_capacity_per_dim(snr)),
            ChannelKind::Rician { k } => Ok(0.5 * rician_ergodic_capacity(k, snr)?),
        }
    }
}

/// Rician amplitude `|sqrt(K/(K+1)) + g|`, `g` circular complex Gaussian of
/// variance `1/(K+1)`, so that `E[h²] = 1`.
pub fn sample_rician_amplitude<R: Rng + ?Sized>(k: f64, rng: &mut R) -> f64 {
    let los = (k / (k + 1.0)).sqrt();
    let s = (0.5 / (k + 1.0)).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (los + s * re).hypot(s * im)
}

/// Rician amplitude density `2(K+1) h exp(-K-(K+1)h²) I0(2h sqrt(K(K+1)))`.
pub fn rician_pdf(h: f64, k: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    let alpha = 2.0 * h * (k * (k + 1.0)).sqrt();
    let e = (k + 1.0).sqrt() * h - k.sqrt();
    2.0 * (k + 1.0) * h * (-e * e).exp() * bessel_i0e(alpha)
}

/// Interval holding all but ~1e-14 of the Rician amplitude mass.
pub fn rician_support(k: f64) -> (f64, f64) {
    let los = (k / (k + 1.0)).sqrt();
    let spread = (32.0 / (k + 1.0)).sqrt();
    ((los - spread).max(0.0), los + spread)
}

/// Capacity of the real AWGN channel per dimension, `0.5 log2(1 + snr)`.
pub fn shannon_capacity_per_dim(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// Ergodic capacity `E_h[log2(1 + h² snr)]` in bits per complex symbol.
pub fn rician_ergodic_capacity(k: f64, snr: f64) -> Result<f64, NumericError> {
    let (lo, hi) = rician_support(k);
    integrate_adaptive(
        |h| rician_pdf(h, k) * (h * h * snr).ln_1p() / LN_2,
        lo,
        hi,
        16,
        1e-9,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_limit() {
        let ch = ChannelModel::from_sigma2(ChannelKind::Awgn, 1e-30);
        let mut rng = stream_rng(1, 0);
        let u = ch.transmit(0.75, &mut rng);
        assert_eq!(u.h, 1.0);
        assert!((u.y - 0.75).abs() < 1e-12);
    }

    #[test]
    fn line_of_sight_limit() {
        let mut rng = stream_rng(2, 0);
        for _ in 0..1000 {
            let h = sample_rician_amplitude(1e6, &mut rng);
            assert!((h - 1.0).abs() < 1e-2);
        }
        let mean: f64 = (0..10_000)
            .map(|_| sample_rician_amplitude(1e6, &mut rng))
            .sum::<f64>()
            / 1e4;
        assert!((mean - 1.0).abs() < 1e-3);
    }

    #[test]
    fn unit_power_gains() {
        for (k, seed) in [(2.0, 3u64), (0.0, 4)] {
            let mut rng = stream_rng(seed, 0);
            let n = 1_000_000;
            let p: f64 = (0..n)
                .map(|_| sample_rician_amplitude(k, &mut rng).powi(2))
                .sum::<f64>()
                / n as f64;
            assert!((p - 1.0).abs() < 0.01, "k={k} E[h²]={p}");
        }
    }

    #[test]
    fn noise_variance_moment() {
        let ch = ChannelModel::awgn(7.0);
        let mut rng = stream_rng(5, 0);
        let n = 1_000_000;
        let mut s2 = 0.0;
        for _ in 0..n {
            let z = ch.transmit(0.0, &mut rng).y;
            s2 += z * z;
        }
        let var = s2 / n as f64;
        assert!(((var - ch.sigma2) / ch.sigma2).abs() < 0.01);
    }

    #[test]
    fn reproducible_per_seed() {
        let ch = ChannelModel::rician(2.0, 10.0);
        let draw = |seed| {
            let mut rng = stream_rng(seed, 9);
            (0..64).map(|_| ch.transmit(1.0, &mut rng).y.to_bits()).collect::<Vec<_>>()
        };
        assert_eq!(draw(77), draw(77));
        assert_ne!(draw(77), draw(78));
    }

    #[test]
    fn conventions_differ_by_3db() {
        let a = ChannelModel::new(ChannelKind::Awgn, 10.0, SnrConvention::PerDimension);
        let b = ChannelModel::new(ChannelKind::Awgn, 10.0, SnrConvention::NoiseVarianceN0);
        assert!((b.sigma2 / a.sigma2 - 2.0).abs() < 1e-12);
        assert_eq!(SnrConvention::parse(a.convention.label()), Some(a.convention));
        assert_eq!(SnrConvention::parse(b.convention.label()), Some(b.convention));
    }

    #[test]
    fn shannon_examples() {
        assert!((shannon_capacity_per_dim(15.0) - 2.0).abs() < 1e-15);
        assert!(shannon_capacity_per_dim(1e-12) < 1e-11);
        // 10 dB: 0.5 log2(11)
        assert!((shannon_capacity_per_dim(10.0) - 1.729715809318648).abs() < 1e-12);
    }

    #[test]
    fn pdf_integrates_to_one() {
        for &k in &[RAYLEIGH_K, 0.5, 2.0, 30.0, 1e6] {
            let (lo, hi) = rician_support(k);
            let mass = integrate_adaptive(|h| rician_pdf(h, k), lo, hi, 16, 1e-12).unwrap();
            assert!((mass - 1.0).abs() < 1e-9, "k={k} mass={mass}");
        }
    }

    #[test]
    fn ergodic_capacity_limits() {
        let snr = db_to_linear(10.0);
        let los = rician_ergodic_capacity(1e6, snr).unwrap();
        assert!((los - (1.0 + snr).log2()).abs() < 1e-3);
        // Rayleigh closed form: log2(e) e^{1/snr} E1(1/snr)
        let ray = rician_ergodic_capacity(RAYLEIGH_K, snr).unwrap();
        let e1 = exp_integral_e1(1.0 / snr);
        let closed = (1.0 / snr).exp() * e1 / LN_2;
        assert!((ray - closed).abs() < 1e-6, "{ray} vs {closed}");
    }

    // E1 by its convergent series, for the Rayleigh closed form only.
    fn exp_integral_e1(x: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            sum -= term / k as f64;
        }
        -0.5772156649015329 - x.ln() + sum
    }

    #[test]
    fn ergodic_capacity_monotone() {
        let ks = [RAYLEIGH_K, 0.5, 2.0, 10.0, 100.0];
        let snrs_db = [0.0, 5.0, 10.0, 20.0, 30.0];
        let mut prev_row: Option<Vec<f64>> = None;
        for &k in &ks {
            let row: Vec<f64> = snrs_db
                .iter()
                .map(|&s| rician_ergodic_capacity(k, db_to_linear(s)).unwrap())
                .collect();
            for w in row.windows(2) {
                assert!(w[1] > w[0]);
            }
            if let Some(p) = &prev_row {
                for (a, b) in p.iter().zip(&row) {
                    assert!(b > a);
                }
            }
            prev_row = Some(row);
        }
    }
}
