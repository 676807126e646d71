//! Mutual-information quantities for BICM and the two-stage scheme.
//!
//! Every quantity is of the form `I(Y; G(X))` for a partition `G` of the PAM
//! points (one group per bit value, per stage-1 index, or per point), with
//! uniform inputs. For AWGN the expectation over the noise is a Gauss–Hermite
//! rule (or plain Monte Carlo). Fading channels add an outer average over the
//! gain: each draw of `h` is an AWGN channel at SNR `h² snr`, so the AWGN
//! values are tabulated once on a fine grid of effective SNR and interpolated
//! for every draw (the same draws are reused at every SNR point).

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{
    db_to_linear, linear_to_db, sample_rician_amplitude, stream_rng, ChannelKind, ChannelModel,
    SnrConvention,
};
use crate::constellation::{ConstellationError, TwoStageConstellation};
use crate::detection::hard_stage2_detect;
use crate::special::{binary_entropy, q_function, GaussHermite, NumericError};

/// Monte Carlo standard error above which a result is flagged (bits).
pub const MC_TOLERANCE: f64 = 0.01;
/// Terms whose exponent is this far below the transmitted point's are dropped.
const WINDOW_EXPONENT: f64 = 40.0;
/// Effective-SNR grid step (dB) for the fading tables.
const TABLE_STEP_DB: f64 = 0.125;

#[derive(Debug, Error)]
pub enum InfoError {
    #[error(transparent)]
    Constellation(#[from] ConstellationError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Bicm,
    TwoStage,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Bicm => "bicm",
            Scheme::TwoStage => "2sd_sh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bicm" => Some(Scheme::Bicm),
            "2sd_sh" | "2sd" => Some(Scheme::TwoStage),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage1Mode {
    /// Sum over the stage-1 bits of `I(Y; bit_j)`.
    Bitwise,
    /// `I(Y; B1)`.
    Symbolwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiMethod {
    Quadrature,
    MonteCarlo { n_samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage2Method {
    /// Exact Q-function sums over the coset decision intervals.
    Analytic,
    MonteCarlo { n_samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingMethod {
    /// Interpolate AWGN values tabulated on an effective-SNR grid.
    Tabulated,
    /// Evaluate the AWGN quantity for every gain draw.
    Direct,
}

#[derive(Debug, Clone)]
pub struct MiOptions {
    pub method: MiMethod,
    pub gh_nodes: usize,
    pub fading_samples: usize,
    pub fading: FadingMethod,
    pub stage2: Stage2Method,
    pub seed: u64,
}

impl Default for MiOptions {
    fn default() -> Self {
        MiOptions {
            method: MiMethod::Quadrature,
            gh_nodes: 64,
            fading_samples: 10_000,
            fading: FadingMethod::Tabulated,
            stage2: Stage2Method::Analytic,
            seed: 1,
        }
    }
}

/// An MI value in bits per dimension with its Monte Carlo standard error
/// (zero for quadrature on AWGN).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    pub std_err: f64,
}

impl MiEstimate {
    pub fn within_tolerance(&self) -> bool {
        self.std_err <= MC_TOLERANCE
    }
}

/// Hard-stage bit error probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage2Estimate {
    /// Average over the `m2` Gray bit positions.
    pub p: f64,
    pub std_err: f64,
    pub per_position: Vec<f64>,
    /// Bit errors counted (Monte Carlo only).
    pub errors: u64,
    pub bits: u64,
}

impl Stage2Estimate {
    /// Monte Carlo estimate resting on fewer than 25 errors.
    pub fn too_few_errors(&self) -> bool {
        self.bits > 0 && self.errors < 25
    }
}

/// One point of a loss curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MiCurvePoint {
    /// SNR as quoted under the channel's convention.
    pub snr_db: f64,
    /// The same operating point quoted as `2 E / sigma2`, i.e. under the
    /// complex-symbol convention.
    pub snr_db_complex: f64,
    pub scheme: Scheme,
    pub m: u32,
    pub m1: u32,
    pub mi_per_dim: f64,
    pub loss_per_dim: f64,
    pub std_err: f64,
    pub channel: String,
}

/// Group labels of the points for one partition.
struct Partition {
    labels: Vec<u32>,
    groups: u32,
}

fn bit_partitions(order: usize, nbits: u32, label_of: impl Fn(usize) -> usize) -> Vec<Partition> {
    (0..nbits)
        .map(|j| Partition {
            labels: (0..order)
                .map(|i| ((label_of(i) >> (nbits - 1 - j)) & 1) as u32)
                .collect(),
            groups: 2,
        })
        .collect()
}

/// Partitions whose MIs add up to the requested quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Quantity {
    /// All `m` Gray bits of the full index.
    BicmBits,
    Stage1(Stage1Mode),
    /// `I(Y; B)`.
    Symbol,
}

fn partitions(c: &TwoStageConstellation, q: Quantity) -> Vec<Partition> {
    let order = c.order();
    match q {
        Quantity::BicmBits => bit_partitions(order, c.m(), |i| i ^ (i >> 1)),
        Quantity::Stage1(Stage1Mode::Bitwise) => {
            bit_partitions(order, c.m1(), |i| c.gray1()[c.split(i).0])
        }
        Quantity::Stage1(Stage1Mode::Symbolwise) => vec![Partition {
            labels: (0..order).map(|i| c.split(i).0 as u32).collect(),
            groups: c.m1_card() as u32,
        }],
        Quantity::Symbol => vec![Partition {
            labels: (0..order as u32).collect(),
            groups: order as u32,
        }],
    }
}

/// Uniformly spaced points `x_k = first + k d` with a set of partitions.
struct Lattice<'a> {
    first: f64,
    d: f64,
    n: usize,
    parts: &'a [Partition],
}

impl Lattice<'_> {
    /// Sum over partitions of `log2(P(group(x) | y))`, i.e. the integrand of
    /// `I - log2(groups)`, for transmitted index `i` and noise `z`.
    fn log_ratio(&self, i: usize, z: f64, sigma: f64, num: &mut [f64]) -> f64 {
        let y = self.first + i as f64 * self.d + z;
        let inv = 0.5 / (sigma * sigma);
        let reach = (z * z + 2.0 * WINDOW_EXPONENT * sigma * sigma).sqrt();
        let lo = (((y - reach - self.first) / self.d).ceil().max(0.0) as usize).min(i);
        let hi = (((y + reach - self.first) / self.d).floor() as isize)
            .clamp(i as isize, self.n as isize - 1) as usize;
        num.fill(0.0);
        let mut total = 0.0;
        let z2 = z * z;
        for k in lo..=hi {
            let e = y - (self.first + k as f64 * self.d);
            let w = (-(e * e - z2) * inv).exp();
            total += w;
            for (q, p) in self.parts.iter().enumerate() {
                if p.labels[k] == p.labels[i] {
                    num[q] += w;
                }
            }
        }
        num.iter().map(|&v| (v / total).ln()).sum::<f64>() / LN_2
    }

    fn log_groups(&self) -> f64 {
        self.parts.iter().map(|p| (p.groups as f64).log2()).sum()
    }

    fn quadrature(&self, sigma: f64, gh: &GaussHermite) -> f64 {
        let mut num = vec![0.0; self.parts.len()];
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += gh.expect(sigma, |z| self.log_ratio(i, z, sigma, &mut num));
        }
        (self.log_groups() + acc / self.n as f64).max(0.0)
    }
}

fn lattice<'a>(c: &TwoStageConstellation, parts: &'a [Partition]) -> Lattice<'a> {
    Lattice {
        first: c.offset(),
        d: c.spacing(),
        n: c.order(),
        parts,
    }
}

/// Gain draws for fading channels; a single unit gain for AWGN.
pub fn gain_samples(kind: ChannelKind, n: usize, seed: u64) -> Vec<f64> {
    match kind {
        ChannelKind::Awgn => vec![1.0],
        ChannelKind::Rician { k } => {
            let mut rng = stream_rng(seed, 0x6761_696e);
            (0..n.max(1)).map(|_| sample_rician_amplitude(k, &mut rng)).collect()
        }
    }
}

/// Values of a function of effective SNR (dB) on a uniform grid, with cubic
/// interpolation and clamping at the ends.
struct SnrTable {
    lo_db: f64,
    step: f64,
    values: Vec<f64>,
}

impl SnrTable {
    fn build(lo_db: f64, hi_db: f64, f: impl Fn(f64) -> f64 + Sync) -> Self {
        let n = (((hi_db - lo_db) / TABLE_STEP_DB).ceil() as usize + 1).max(4);
        let values = (0..n)
            .into_par_iter()
            .map(|i| f(lo_db + i as f64 * TABLE_STEP_DB))
            .collect();
        SnrTable {
            lo_db,
            step: TABLE_STEP_DB,
            values,
        }
    }

    fn at(&self, db: f64) -> f64 {
        let n = self.values.len();
        let t = ((db - self.lo_db) / self.step).clamp(0.0, (n - 1) as f64);
        let i = (t.floor() as usize).min(n - 2);
        let f = t - i as f64;
        let v = &self.values;
        let p1 = v[i];
        let p2 = v[i + 1];
        let p0 = if i > 0 { v[i - 1] } else { 2.0 * p1 - p2 };
        let p3 = if i + 2 < n { v[i + 2] } else { 2.0 * p2 - p1 };
        let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
        let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
        let cc = -0.5 * p0 + 0.5 * p2;
        ((a * f + b) * f + cc) * f + p1
    }
}

/// Range of `20 log10 h` over the draws.
fn gain_db_range(gains: &[f64]) -> (f64, f64) {
    gains.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &h| {
        let g = 20.0 * h.max(1e-300).log10();
        (lo.min(g), hi.max(g))
    })
}

/// Mean and standard error of a sample.
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// A function of the per-dimension effective SNR (linear) averaged over the
/// gain draws, evaluated at several nominal SNRs with common draws.
fn fading_average(
    snrs: &[f64],
    gains: &[f64],
    method: FadingMethod,
    f: impl Fn(f64) -> f64 + Sync,
) -> Vec<(f64, f64)> {
    if gains.len() == 1 && gains[0] == 1.0 {
        return snrs.iter().map(|&s| (f(s), 0.0)).collect();
    }
    match method {
        FadingMethod::Direct => snrs
            .par_iter()
            .map(|&s| {
                let v: Vec<f64> = gains.iter().map(|&h| f(s * h * h)).collect();
                mean_and_se(&v)
            })
            .collect(),
        FadingMethod::Tabulated => {
            let (glo, ghi) = gain_db_range(gains);
            let (slo, shi) = snrs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
                (a.min(linear_to_db(s)), b.max(linear_to_db(s)))
            });
            let table = SnrTable::build(slo + glo - 1.0, shi + ghi + 1.0, |db| f(db_to_linear(db)));
            snrs.iter()
                .map(|&s| {
                    let sdb = linear_to_db(s);
                    let v: Vec<f64> =
                        gains.iter().map(|&h| table.at(sdb + 20.0 * h.log10())).collect();
                    mean_and_se(&v)
                })
                .collect()
        }
    }
}

/// AWGN value of a partition MI at per-dimension SNR `snr` (linear).
fn awgn_quantity(c: &TwoStageConstellation, parts: &[Partition], snr: f64, gh: &GaussHermite) -> f64 {
    let sigma = (c.energy() / snr).sqrt();
    lattice(c, parts).quadrature(sigma, gh)
}

fn monte_carlo_quantity(
    c: &TwoStageConstellation,
    parts: &[Partition],
    ch: &ChannelModel,
    n_samples: usize,
    seed: u64,
) -> MiEstimate {
    let lat = lattice(c, parts);
    let mut rng = stream_rng(seed, 0x6d63_6d69);
    let mut num = vec![0.0; parts.len()];
    let sigma = ch.sigma();
    let v: Vec<f64> = (0..n_samples.max(2))
        .map(|_| {
            let i = rng.random_range(0..c.order());
            let h = ch.sample_gain(&mut rng);
            let z: f64 = rng.sample(StandardNormal);
            // dividing by h gives an AWGN channel with noise sigma / h
            let s = sigma / h;
            lat.log_ratio(i, s * z, s, &mut num)
        })
        .collect();
    let (mean, se) = mean_and_se(&v);
    MiEstimate {
        bits: (lat.log_groups() + mean).max(0.0),
        std_err: se,
    }
}

fn partition_mi(
    c: &TwoStageConstellation,
    q: Quantity,
    ch: &ChannelModel,
    opts: &MiOptions,
) -> MiEstimate {
    let parts = partitions(c, q);
    match opts.method {
        MiMethod::MonteCarlo { n_samples } => {
            monte_carlo_quantity(c, &parts, ch, n_samples, opts.seed)
        }
        MiMethod::Quadrature => {
            let gh = GaussHermite::new(opts.gh_nodes);
            let gains = gain_samples(ch.kind, opts.fading_samples, opts.seed);
            let snr = ch.snr_per_dim(c.energy());
            let (bits, std_err) =
                fading_average(&[snr], &gains, opts.fading, |s| awgn_quantity(c, &parts, s, &gh))[0];
            MiEstimate { bits, std_err }
        }
    }
}

/// BICM mutual information in bits per dimension: the sum over the `m` Gray
/// bits of the full point index of `I(Y; bit)`.
pub fn bicm_mi(c: &TwoStageConstellation, ch: &ChannelModel, opts: &MiOptions) -> MiEstimate {
    partition_mi(c, Quantity::BicmBits, ch, opts)
}

/// Stage-1 mutual information with the hard-stage index unknown and uniform.
pub fn stage1_mi(
    c: &TwoStageConstellation,
    ch: &ChannelModel,
    mode: Stage1Mode,
    opts: &MiOptions,
) -> MiEstimate {
    partition_mi(c, Quantity::Stage1(mode), ch, opts)
}

/// Full symbol mutual information `I(Y; B)`.
pub fn symbol_mi(c: &TwoStageConstellation, ch: &ChannelModel, opts: &MiOptions) -> MiEstimate {
    partition_mi(c, Quantity::Symbol, ch, opts)
}

/// Exact AWGN hard-stage bit error probability (per position) at noise
/// standard deviation `sigma`, for the genie-aided nearest-coset detector.
fn stage2_p_awgn(c: &TwoStageConstellation, sigma: f64) -> Vec<f64> {
    let m2 = c.m2() as usize;
    let n = c.m2_card();
    if m2 == 0 {
        return Vec::new();
    }
    let big_d = c.coset_period();
    let reach = ((40.0 * sigma / big_d).ceil() as usize + 2).min(n);
    let gray = c.gray2();
    let mut per = vec![0.0; m2];
    for i in 0..n {
        let lo = i.saturating_sub(reach);
        let hi = (i + reach).min(n - 1);
        for j in lo..=hi {
            if j == i {
                continue;
            }
            // probability of landing in the decision interval of j
            let steps = (j as f64 - i as f64).abs();
            let near = (steps - 0.5) * big_d / sigma;
            let far = if (j > i && j == n - 1) || (j < i && j == 0) {
                f64::INFINITY
            } else {
                (steps + 0.5) * big_d / sigma
            };
            let prob = q_function(near) - if far.is_finite() { q_function(far) } else { 0.0 };
            let diff = gray[i] ^ gray[j];
            for (t, p) in per.iter_mut().enumerate() {
                if (diff >> (m2 - 1 - t)) & 1 == 1 {
                    *p += prob;
                }
            }
        }
    }
    for p in &mut per {
        *p /= n as f64;
    }
    per
}

fn stage2_analytic_over_gains(
    c: &TwoStageConstellation,
    snrs: &[f64],
    gains: &[f64],
    fading: FadingMethod,
) -> Vec<(Vec<f64>, f64)> {
    let m2 = c.m2() as usize;
    // one table per bit position keeps per-position values available
    let per: Vec<Vec<(f64, f64)>> = (0..m2)
        .map(|t| {
            fading_average(snrs, gains, fading, |s| {
                let sigma = (c.energy() / s).sqrt();
                stage2_p_awgn(c, sigma)[t]
            })
        })
        .collect();
    (0..snrs.len())
        .map(|k| {
            let pos: Vec<f64> = per.iter().map(|v| v[k].0).collect();
            let se = (per.iter().map(|v| v[k].1.powi(2)).sum::<f64>()).sqrt() / m2.max(1) as f64;
            (pos, se)
        })
        .collect()
}

/// Genie-aided hard-stage bit error probability, averaged over the `m2`
/// Gray positions and over fading.
pub fn stage2_bsc_p(
    c: &TwoStageConstellation,
    ch: &ChannelModel,
    method: Stage2Method,
    opts: &MiOptions,
) -> Stage2Estimate {
    let m2 = c.m2() as usize;
    if m2 == 0 {
        return Stage2Estimate {
            p: 0.0,
            std_err: 0.0,
            per_position: Vec::new(),
            errors: 0,
            bits: 0,
        };
    }
    match method {
        Stage2Method::Analytic => {
            let gains = gain_samples(ch.kind, opts.fading_samples, opts.seed);
            let snr = ch.snr_per_dim(c.energy());
            let (per_position, std_err) =
                stage2_analytic_over_gains(c, &[snr], &gains, opts.fading).remove(0);
            Stage2Estimate {
                p: per_position.iter().sum::<f64>() / m2 as f64,
                std_err,
                per_position,
                errors: 0,
                bits: 0,
            }
        }
        Stage2Method::MonteCarlo { n_samples } => {
            let mut rng = stream_rng(opts.seed, 0x7032_6d63);
            let mut per_err = vec![0u64; m2];
            let mut sym_frac = Vec::with_capacity(n_samples);
            for _ in 0..n_samples.max(2) {
                let b1 = rng.random_range(0..c.m1_card());
                let b2 = rng.random_range(0..c.m2_card());
                let x = c.points()[b2 * c.m1_card() + b1];
                let u = ch.transmit(x, &mut rng);
                let b2_hat = hard_stage2_detect(u.y, u.h, b1, c);
                let diff = c.gray2()[b2] ^ c.gray2()[b2_hat];
                for (t, e) in per_err.iter_mut().enumerate() {
                    *e += ((diff >> (m2 - 1 - t)) & 1) as u64;
                }
                sym_frac.push(diff.count_ones() as f64 / m2 as f64);
            }
            let n = sym_frac.len() as f64;
            let (p, std_err) = mean_and_se(&sym_frac);
            let errors: u64 = per_err.iter().sum();
            Stage2Estimate {
                p,
                std_err,
                per_position: per_err.iter().map(|&e| e as f64 / n).collect(),
                errors,
                bits: (n as u64) * m2 as u64,
            }
        }
    }
}

/// Capacity of the binary symmetric channel, `1 - H(p)` bits per use.
pub fn bsc_mi(p: f64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "crossover probability must lie in [0, 1]");
    1.0 - binary_entropy(p)
}

/// Two-stage MI per dimension: bitwise stage-1 MI plus `m2 (1 - H(p))`.
pub fn two_stage_mi(c: &TwoStageConstellation, ch: &ChannelModel, opts: &MiOptions) -> MiEstimate {
    let s1 = stage1_mi(c, ch, Stage1Mode::Bitwise, opts);
    if c.m2() == 0 {
        return s1;
    }
    let p = stage2_bsc_p(c, ch, opts.stage2, opts);
    let slope = if p.p > 0.0 && p.p < 0.5 {
        ((1.0 - p.p) / p.p).log2()
    } else {
        0.0
    };
    MiEstimate {
        bits: s1.bits + c.m2() as f64 * bsc_mi(p.p.clamp(0.0, 1.0)),
        std_err: s1.std_err.hypot(c.m2() as f64 * slope * p.std_err),
    }
}

/// Loss from the channel's own capacity along an SNR grid (dB, quoted under
/// `convention`). The constellation is used as given; its energy sets the
/// noise level.
pub fn loss_curve(
    scheme: Scheme,
    c: &TwoStageConstellation,
    kind: ChannelKind,
    convention: SnrConvention,
    snr_grid_db: &[f64],
    opts: &MiOptions,
) -> Result<Vec<MiCurvePoint>, InfoError> {
    if snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(InfoError::InvalidArgument("SNR grid must be strictly increasing".into()));
    }
    if snr_grid_db.iter().any(|v| !v.is_finite()) {
        return Err(InfoError::InvalidArgument("SNR grid must be finite".into()));
    }
    let energy = c.energy();
    let channels: Vec<ChannelModel> = snr_grid_db
        .iter()
        .map(|&db| ChannelModel::with_energy(kind, db, convention, energy))
        .collect();
    let snrs: Vec<f64> = channels.iter().map(|ch| ch.snr_per_dim(energy)).collect();
    let values: Vec<MiEstimate> = match opts.method {
        MiMethod::MonteCarlo { .. } => channels
            .par_iter()
            .map(|ch| match scheme {
                Scheme::Bicm => bicm_mi(c, ch, opts),
                Scheme::TwoStage => two_stage_mi(c, ch, opts),
            })
            .collect(),
        MiMethod::Quadrature => {
            let gh = GaussHermite::new(opts.gh_nodes);
            let gains = gain_samples(kind, opts.fading_samples, opts.seed);
            let q = match scheme {
                Scheme::Bicm => Quantity::BicmBits,
                Scheme::TwoStage => Quantity::Stage1(Stage1Mode::Bitwise),
            };
            let parts = partitions(c, q);
            let soft = fading_average(&snrs, &gains, opts.fading, |s| {
                awgn_quantity(c, &parts, s, &gh)
            });
            if scheme == Scheme::TwoStage && c.m2() > 0 {
                let hard: Vec<(f64, f64)> = match opts.stage2 {
                    Stage2Method::Analytic => {
                        stage2_analytic_over_gains(c, &snrs, &gains, opts.fading)
                            .into_iter()
                            .map(|(pos, se)| (pos.iter().sum::<f64>() / pos.len() as f64, se))
                            .collect()
                    }
                    Stage2Method::MonteCarlo { .. } => channels
                        .iter()
                        .map(|ch| {
                            let e = stage2_bsc_p(c, ch, opts.stage2, opts);
                            (e.p, e.std_err)
                        })
                        .collect(),
                };
                soft.iter()
                    .zip(&hard)
                    .map(|(&(s, sse), &(p, pse))| {
                        let slope = if p > 0.0 && p < 0.5 {
                            ((1.0 - p) / p).log2()
                        } else {
                            0.0
                        };
                        MiEstimate {
                            bits: s + c.m2() as f64 * bsc_mi(p.clamp(0.0, 1.0)),
                            std_err: sse.hypot(c.m2() as f64 * slope * pse),
                        }
                    })
                    .collect()
            } else {
                soft.iter()
                    .map(|&(bits, std_err)| MiEstimate { bits, std_err })
                    .collect()
            }
        }
    };
    channels
        .iter()
        .zip(snr_grid_db)
        .zip(values)
        .map(|((ch, &db), v)| {
            let cap = ch.reference_capacity_per_dim(energy)?;
            Ok(MiCurvePoint {
                snr_db: db,
                snr_db_complex: linear_to_db(2.0 * energy / ch.sigma2),
                scheme,
                m: c.m(),
                m1: if scheme == Scheme::Bicm { c.m() } else { c.m1() },
                mi_per_dim: v.bits,
                loss_per_dim: cap - v.bits,
                std_err: v.std_err,
                channel: kind.describe(),
            })
        })
        .collect()
}

/// MI in bits per use of the wrapped channel: `x` uniform on `Z_M` placed at
/// unit spacing, Gaussian noise of concentration `kw` (per unit spacing),
/// observation folded modulo `M`. Equivalent to the soft stage seen through
/// an unbounded hard stage.
pub fn wrapped_channel_mi(modulus: usize, kw: f64, gh: &GaussHermite) -> f64 {
    assert!(modulus >= 2 && kw > 0.0);
    let sigma = kw.sqrt().recip();
    let m = modulus as f64;
    let reach = (sigma * (2.0 * WINDOW_EXPONENT).sqrt() * 1.5 + m).ceil() as i64 + 1;
    // by symmetry transmit 0; y = z, lattice points at every integer
    let acc = gh.expect(sigma, |z| {
        let (mut own, mut all) = (0.0, 0.0);
        for k in -reach..=reach {
            let e = z - k as f64;
            let w = (-(e * e - z * z) * 0.5 * kw).exp();
            all += w;
            if k.rem_euclid(modulus as i64) == 0 {
                own += w;
            }
        }
        (own / all).log2()
    });
    (m.log2() + acc).max(0.0)
}

/// Concentration `kw` at which the wrapped channel reaches `target` bits.
pub fn wrapped_channel_kw_for_mi(modulus: usize, target: f64, gh: &GaussHermite) -> Result<f64, InfoError> {
    let m = (modulus as f64).log2();
    if !(target > 0.0 && target < m) {
        return Err(InfoError::InvalidArgument(format!(
            "target MI must lie in (0, {m}), got {target}"
        )));
    }
    let f = |u: f64| wrapped_channel_mi(modulus, u.exp(), gh) - target;
    Ok(crate::special::brent(f, (1e-4f64).ln(), (1e4f64).ln(), 1e-10)?.exp())
}

/// `sqrt(pi e / 6)` in bits: the high-SNR shaping loss of uniform inputs per dimension.
pub fn shaping_loss_bits() -> f64 {
    0.5 * (PI * std::f64::consts::E / 6.0).log2()
}
