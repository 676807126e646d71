//! Monte Carlo link chains.
//!
//! One frame spans `N` real dimensions. The soft stage carries `m1` coded
//! bits (binary LDPC) or one ring symbol (ADBP) per dimension; the hard stage
//! carries `m2` Gray bits per dimension, serialised across the frame and
//! packed eight per byte into shortened RS blocks. Leftover bits that do not
//! fill a byte are zero padding and are not counted. The two dimensions of a
//! QAM symbol share one fading gain.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{LlrMode, SimConfig, SimScheme};
use super::HarnessError;
use crate::adbp::{adbp_decode, DMessage};
use crate::channel::{stream_rng, ChannelKind, ChannelModel, SnrConvention};
use crate::constellation::{gray_unmap, TwoStageConstellation};
use crate::detection::{
    dmessage_from_channel, exact_stage1_llr_faded, hard_stage2_detect, kv_from_kw,
    symbol_to_bit_llr, vonmises_llr,
};
use crate::fec::{
    binary_bp_decode, nonbinary_bp_decode, peg_construct_encodable, BinaryLdpcCode, RingLdpcCode,
    RsCode,
};

/// Frames simulated between stopping checks; fixed so results do not depend
/// on the thread count.
const BATCH: u64 = 8;
const PEG_TRIES: usize = 64;

/// One SNR point of a BER simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub snr_db: f64,
    pub scheme: SimScheme,
    pub m: u32,
    pub m1: u32,
    /// Information bits per frame over `N m`.
    pub rc: f64,
    /// Soft-stage information BER after decoding.
    pub ber_soft: f64,
    /// Soft-stage coded BER of the channel hard decisions.
    pub ber_soft_raw: f64,
    /// Hard-stage information BER after RS decoding.
    pub ber_hard: f64,
    /// Hard-stage BER at the RS decoder input.
    pub ber_hard_raw: f64,
    /// Fraction of dimensions whose `(b1, b2)` is wrong after both stages.
    pub ser_total: f64,
    pub frames: u64,
    /// Symbol errors counted (the stopping statistic).
    pub error_events: u64,
    pub seed: u64,
    pub converged_fraction: f64,
    pub soft_code: String,
    /// Set when the frame budget ran out before the target error count.
    pub undersampled: bool,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    soft_info_bits: u64,
    soft_info_err: u64,
    soft_raw_bits: u64,
    soft_raw_err: u64,
    hard_info_bits: u64,
    hard_info_err: u64,
    hard_raw_bits: u64,
    hard_raw_err: u64,
    symbols: u64,
    symbol_err: u64,
    converged: u64,
    frames: u64,
}

impl Counts {
    fn add(&mut self, o: &Counts) {
        self.soft_info_bits += o.soft_info_bits;
        self.soft_info_err += o.soft_info_err;
        self.soft_raw_bits += o.soft_raw_bits;
        self.soft_raw_err += o.soft_raw_err;
        self.hard_info_bits += o.hard_info_bits;
        self.hard_info_err += o.hard_info_err;
        self.hard_raw_bits += o.hard_raw_bits;
        self.hard_raw_err += o.hard_raw_err;
        self.symbols += o.symbols;
        self.symbol_err += o.symbol_err;
        self.converged += o.converged;
        self.frames += o.frames;
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone)]
enum SoftCode {
    Binary(BinaryLdpcCode),
    Ring(RingLdpcCode),
}

/// Shortened RS blocks covering the whole bytes of the hard-stage payload.
#[derive(Debug, Clone)]
struct HardLayout {
    blocks: Vec<RsCode>,
    coded_bits: usize,
}

impl HardLayout {
    fn new(coded_bits: usize, t: usize) -> Result<Self, HarnessError> {
        let bytes = coded_bits / 8;
        if bytes == 0 {
            return Ok(HardLayout {
                blocks: Vec::new(),
                coded_bits,
            });
        }
        let nb = bytes.div_ceil(255);
        let (base, extra) = (bytes / nb, bytes % nb);
        let blocks = (0..nb)
            .map(|i| {
                let len = base + usize::from(i < extra);
                if len <= 2 * t {
                    return Err(HarnessError::Config(format!(
                        "hard-stage block of {len} bytes cannot hold 2t = {} parity bytes",
                        2 * t
                    )));
                }
                Ok(RsCode::shortened(len - 2 * t, t)?)
            })
            .collect::<Result<_, HarnessError>>()?;
        Ok(HardLayout { blocks, coded_bits })
    }

    fn info_bits(&self) -> usize {
        self.blocks.iter().map(|b| 8 * b.k()).sum()
    }
}

fn push_byte_bits(out: &mut Vec<u8>, byte: u8) {
    out.extend((0..8).rev().map(|s| (byte >> s) & 1));
}

fn bits_to_byte(bits: &[u8]) -> u8 {
    bits.iter().fold(0u8, |a, &b| (a << 1) | b)
}

fn bit_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

/// A built chain: constellation, codes and frame layout for one configuration.
#[derive(Debug, Clone)]
pub struct Chain {
    scheme: SimScheme,
    c: TwoStageConstellation,
    soft: SoftCode,
    hard: HardLayout,
    dims: usize,
    llr: LlrMode,
    genie: bool,
    max_iter: usize,
    kind: ChannelKind,
    convention: SnrConvention,
}

impl Chain {
    pub fn new(cfg: &SimConfig) -> Result<Self, HarnessError> {
        cfg.validate()?;
        let m1 = cfg.soft_bits();
        let c = TwoStageConstellation::build_pam(cfg.m, m1, true)?;
        let (soft, dims) = match cfg.scheme {
            SimScheme::Bicm | SimScheme::TwoStageBinary => {
                if cfg.n % m1 as usize != 0 {
                    return Err(HarnessError::Config(format!(
                        "binary code length {} is not a multiple of {m1} soft bits",
                        cfg.n
                    )));
                }
                let code = BinaryLdpcCode::peg(cfg.n, cfg.dv, cfg.dc, cfg.seed)?;
                (SoftCode::Binary(code), cfg.n / m1 as usize)
            }
            SimScheme::TwoStageAdbp => {
                let code =
                    peg_construct_encodable(cfg.n, cfg.dv, cfg.dc, 1 << m1, cfg.seed, PEG_TRIES)?;
                (SoftCode::Ring(code), cfg.n)
            }
        };
        let hard = HardLayout::new(dims * c.m2() as usize, cfg.rs_t)?;
        Ok(Chain {
            scheme: cfg.scheme,
            c,
            soft,
            hard,
            dims,
            llr: cfg.llr,
            genie: cfg.genie,
            max_iter: cfg.max_iter,
            kind: cfg.channel,
            convention: cfg.convention,
        })
    }

    pub fn constellation(&self) -> &TwoStageConstellation {
        &self.c
    }

    /// Real dimensions per frame.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Soft-stage code rate.
    pub fn r1(&self) -> f64 {
        match &self.soft {
            SoftCode::Binary(b) => b.rate(),
            SoftCode::Ring(r) => r.rate(),
        }
    }

    /// Hard-stage rate, counting padding as overhead.
    pub fn r2(&self) -> f64 {
        if self.hard.coded_bits == 0 {
            return 1.0;
        }
        self.hard.info_bits() as f64 / self.hard.coded_bits as f64
    }

    pub fn info_bits_per_frame(&self) -> usize {
        let soft = match &self.soft {
            SoftCode::Binary(b) => b.k(),
            SoftCode::Ring(r) => r.k() * self.c.m1() as usize,
        };
        soft + self.hard.info_bits()
    }

    pub fn rc(&self) -> f64 {
        self.info_bits_per_frame() as f64 / (self.dims * self.c.m() as usize) as f64
    }

    pub fn soft_code_label(&self) -> String {
        match &self.soft {
            SoftCode::Binary(b) => {
                let h = b.parity_check();
                format!("peg_binary_ldpc(n={},dv={},dc={})", b.n(), h.var_degree(0), h.check_degree(0))
            }
            SoftCode::Ring(r) => {
                let h = r.parity_check();
                format!(
                    "peg_ring_ldpc(n={},dv={},dc={},M={})",
                    r.n(),
                    h.var_degree(0),
                    h.check_degree(0),
                    r.modulus()
                )
            }
        }
    }

    fn frame<R: Rng>(&self, ch: &ChannelModel, rng: &mut R) -> Counts {
        let c = &self.c;
        let m1 = c.m1() as usize;
        let m2 = c.m2() as usize;
        let n = self.dims;
        let mut k = Counts {
            frames: 1,
            symbols: n as u64,
            ..Counts::default()
        };

        // soft stage: encode and map to stage-1 indices
        let (b1, soft_info): (Vec<usize>, Vec<u8>) = match &self.soft {
            SoftCode::Binary(code) => {
                let info: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..2u8)).collect();
                let cw = code.encode(&info).expect("info length matches");
                let b1 = cw
                    .chunks_exact(m1)
                    .map(|g| gray_unmap(bits_to_byte(g) as usize, m1 as u32).expect("fits"))
                    .collect();
                (b1, info)
            }
            SoftCode::Ring(code) => {
                let info: Vec<u32> =
                    (0..code.k()).map(|_| rng.random_range(0..code.modulus())).collect();
                let cw = code.encode(&info).expect("info length matches");
                let bits = info
                    .iter()
                    .flat_map(|&s| (0..m1).rev().map(move |j| ((s >> j) & 1) as u8))
                    .collect();
                (cw.into_iter().map(|s| s as usize).collect(), bits)
            }
        };

        // hard stage: RS codewords serialised to m2 bits per dimension
        let mut hard_info = Vec::new();
        let mut hard_bits = Vec::with_capacity(n * m2);
        for block in &self.hard.blocks {
            let info: Vec<u8> = (0..block.k()).map(|_| rng.random()).collect();
            for &b in &block.encode(&info).expect("info length matches") {
                push_byte_bits(&mut hard_bits, b);
            }
            hard_info.extend(info);
        }
        hard_bits.resize(n * m2, 0);
        let b2: Vec<usize> = if m2 == 0 {
            vec![0; n]
        } else {
            hard_bits
                .chunks_exact(m2)
                .map(|g| gray_unmap(bits_to_byte(g) as usize, m2 as u32).expect("fits"))
                .collect()
        };

        // channel, one gain per pair of dimensions
        let mut y = Vec::with_capacity(n);
        let mut h = Vec::with_capacity(n);
        let mut gain = 1.0;
        for i in 0..n {
            if i % 2 == 0 {
                gain = ch.sample_gain(rng);
            }
            let x = c.points()[b2[i] * c.m1_card() + b1[i]];
            let u = ch.transmit_with_gain(x, gain, rng);
            y.push(u.y);
            h.push(u.h);
        }
        let kw = ch.kw();

        // soft decoding
        let b1_hat: Vec<usize> = match &self.soft {
            SoftCode::Binary(code) => {
                let mut llrs = Vec::with_capacity(n * m1);
                for i in 0..n {
                    let lh = match self.llr {
                        LlrMode::Exact => exact_stage1_llr_faded(y[i], h[i], kw, c),
                        LlrMode::VonMises => {
                            let kv = kv_from_kw(kw * h[i] * h[i], c.m1_card(), c.spacing());
                            vonmises_llr(y[i] / h[i], kv, c)
                        }
                    };
                    llrs.extend(symbol_to_bit_llr(&lh, c.gray1()));
                }
                let sent: Vec<u8> = b1
                    .iter()
                    .flat_map(|&s| (0..m1).map(move |j| c.stage1_bit(s, j)))
                    .collect();
                let raw: Vec<u8> = llrs.iter().map(|&l| u8::from(l < 0.0)).collect();
                k.soft_raw_bits = sent.len() as u64;
                k.soft_raw_err = bit_errors(&raw, &sent);
                let out = binary_bp_decode(&llrs, code, self.max_iter).expect("valid LLRs");
                k.converged = u64::from(out.converged);
                let info_hat = code.extract_info(&out.symbols);
                k.soft_info_bits = soft_info.len() as u64;
                k.soft_info_err = bit_errors(&info_hat, &soft_info);
                out.symbols
                    .chunks_exact(m1)
                    .map(|g| gray_unmap(bits_to_byte(g) as usize, m1 as u32).expect("fits"))
                    .collect()
            }
            SoftCode::Ring(code) => {
                let msgs: Vec<DMessage> =
                    (0..n).map(|i| dmessage_from_channel(y[i], h[i], kw, c)).collect();
                let raw_err = msgs
                    .iter()
                    .zip(&b1)
                    .map(|(d, &s)| (d.decision() as usize ^ s).count_ones() as u64)
                    .sum();
                k.soft_raw_bits = (n * m1) as u64;
                k.soft_raw_err = raw_err;
                let out = adbp_decode(&msgs, code.parity_check(), self.max_iter)
                    .expect("messages match the code");
                k.converged = u64::from(out.converged);
                let info_hat: Vec<u8> = code
                    .extract_info(&out.symbols)
                    .iter()
                    .flat_map(|&s| (0..m1).rev().map(move |j| ((s >> j) & 1) as u8))
                    .collect();
                k.soft_info_bits = soft_info.len() as u64;
                k.soft_info_err = bit_errors(&info_hat, &soft_info);
                out.symbols.into_iter().map(|s| s as usize).collect()
            }
        };

        // hard stage given stage-1 decisions
        let b2_final: Vec<usize> = if m2 == 0 {
            vec![0; n]
        } else {
            let mut detected = Vec::with_capacity(n * m2);
            for i in 0..n {
                let s1 = if self.genie { b1[i] } else { b1_hat[i] };
                let s2 = hard_stage2_detect(y[i], h[i], s1, c);
                detected.extend((0..m2).map(|j| c.stage2_bit(s2, j)));
            }
            let used = self.hard.coded_bits / 8 * 8;
            k.hard_raw_bits = used as u64;
            k.hard_raw_err = bit_errors(&detected[..used], &hard_bits[..used]);
            let mut corrected = Vec::with_capacity(n * m2);
            let mut info_hat = Vec::with_capacity(hard_info.len());
            let mut pos = 0;
            for block in &self.hard.blocks {
                let len = block.n();
                let rx: Vec<u8> =
                    detected[8 * pos..8 * (pos + len)].chunks_exact(8).map(bits_to_byte).collect();
                let (word, _) = block.decode(&rx).expect("block length matches");
                info_hat.extend_from_slice(block.info(&word));
                for &b in &word {
                    push_byte_bits(&mut corrected, b);
                }
                pos += len;
            }
            corrected.resize(n * m2, 0);
            k.hard_info_bits = 8 * hard_info.len() as u64;
            k.hard_info_err = hard_info
                .iter()
                .zip(&info_hat)
                .map(|(a, b)| (a ^ b).count_ones() as u64)
                .sum();
            corrected
                .chunks_exact(m2)
                .map(|g| gray_unmap(bits_to_byte(g) as usize, m2 as u32).expect("fits"))
                .collect()
        };
        k.symbol_err = (0..n)
            .filter(|&i| b1_hat[i] != b1[i] || b2_final[i] != b2[i])
            .count() as u64;
        k
    }

    /// Simulates one SNR point (index `point` of the sweep).
    pub fn run_point(
        &self,
        snr_db: f64,
        point: u64,
        seed: u64,
        frames: u64,
        min_frames: u64,
        target_errors: u64,
    ) -> SimRecord {
        let ch = ChannelModel::with_energy(self.kind, snr_db, self.convention, self.c.energy());
        let mut total = Counts::default();
        while total.frames < frames {
            let start = total.frames;
            let end = (start + BATCH).min(frames);
            let batch: Vec<Counts> = (start..end)
                .into_par_iter()
                .map(|f| {
                    let mut rng = stream_rng(seed, (point << 32) | f);
                    self.frame(&ch, &mut rng)
                })
                .collect();
            for b in &batch {
                total.add(b);
            }
            if total.symbol_err >= target_errors && total.frames >= min_frames {
                break;
            }
        }
        SimRecord {
            snr_db,
            scheme: self.scheme,
            m: self.c.m(),
            m1: self.c.m1(),
            rc: self.rc(),
            ber_soft: ratio(total.soft_info_err, total.soft_info_bits),
            ber_soft_raw: ratio(total.soft_raw_err, total.soft_raw_bits),
            ber_hard: ratio(total.hard_info_err, total.hard_info_bits),
            ber_hard_raw: ratio(total.hard_raw_err, total.hard_raw_bits),
            ser_total: ratio(total.symbol_err, total.symbols),
            frames: total.frames,
            error_events: total.symbol_err,
            seed,
            converged_fraction: ratio(total.converged, total.frames),
            soft_code: self.soft_code_label(),
            undersampled: total.symbol_err < target_errors,
        }
    }
}

/// Runs every SNR point of the configuration.
pub fn run_ber_sim(cfg: &SimConfig) -> Result<Vec<SimRecord>, HarnessError> {
    let chain = Chain::new(cfg)?;
    Ok(cfg
        .snr_db
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            chain.run_point(db, i as u64, cfg.seed, cfg.frames, cfg.min_frames, cfg.target_errors)
        })
        .collect())
}

/// Symbol error counts of ADBP and full BP on the same frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrappedPoint {
    pub kw: f64,
    pub frames: u64,
    pub symbols: u64,
    pub errors_adbp: u64,
    pub errors_nbbp: Option<u64>,
}

impl WrappedPoint {
    pub fn ser_adbp(&self) -> f64 {
        ratio(self.errors_adbp, self.symbols)
    }
    pub fn ser_nbbp(&self) -> Option<f64> {
        self.errors_nbbp.map(|e| ratio(e, self.symbols))
    }
}

/// Ring code over the wrapped channel: symbol `a` sent at amplitude `a`
/// (unit spacing), Gaussian noise of concentration `kw`, observation folded
/// modulo `M`. ADBP sees the Von Mises D-message; full BP (optional) sees
/// the exact wrapped-Gaussian likelihoods of the same observation.
pub fn run_wrapped_point(
    code: &RingLdpcCode,
    kw: f64,
    frames: u64,
    max_iter: usize,
    seed: u64,
    point: u64,
    with_nbbp: bool,
) -> WrappedPoint {
    let m = code.modulus() as usize;
    let mf = m as f64;
    let sigma = kw.sqrt().recip();
    let kv = kv_from_kw(kw, m, 1.0);
    let reach = ((8.0 * sigma / mf).ceil() as i64).max(1) + 1;
    let per_frame: Vec<(u64, Option<u64>)> = (0..frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = stream_rng(seed, (point << 32) | f);
            let info: Vec<u32> = (0..code.k()).map(|_| rng.random_range(0..m as u32)).collect();
            let cw = code.encode(&info).expect("info length matches");
            let y: Vec<f64> = cw
                .iter()
                .map(|&s| {
                    let z: f64 = rng.sample(StandardNormal);
                    (s as f64 + sigma * z).rem_euclid(mf)
                })
                .collect();
            let msgs: Vec<DMessage> = y.iter().map(|&v| DMessage::new(v, kv, m as u32)).collect();
            let a = adbp_decode(&msgs, code.parity_check(), max_iter).expect("valid messages");
            let ea = a.symbols.iter().zip(&cw).filter(|(x, y)| x != y).count() as u64;
            let eb = with_nbbp.then(|| {
                let mut tables = Vec::with_capacity(y.len() * m);
                for &v in &y {
                    for s in 0..m {
                        let terms: Vec<f64> = (-reach..=reach)
                            .map(|q| {
                                let e = v - s as f64 - q as f64 * mf;
                                -0.5 * kw * e * e
                            })
                            .collect();
                        tables.push(crate::special::log_sum_exp(&terms));
                    }
                }
                let b = nonbinary_bp_decode(&tables, code.parity_check(), max_iter)
                    .expect("valid tables");
                b.symbols.iter().zip(&cw).filter(|(x, y)| x != y).count() as u64
            });
            (ea, eb)
        })
        .collect();
    WrappedPoint {
        kw,
        frames,
        symbols: frames * code.n() as u64,
        errors_adbp: per_frame.iter().map(|p| p.0).sum(),
        errors_nbbp: with_nbbp.then(|| per_frame.iter().map(|p| p.1.unwrap_or(0)).sum()),
    }
}
