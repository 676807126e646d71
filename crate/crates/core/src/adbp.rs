//! Two-parameter message passing over `Z_M`.
//!
//! Every message is a D-message: a Von Mises law on the circle of
//! circumference `M`, sampled at the ring points, described by its circular
//! mean `mu` (symbol units) and concentration `kappa`. Variable nodes
//! multiply messages, which is a sum of phasors. Check nodes add the circular
//! variances of the incoming messages and shift the mean by the weighted sum
//! of incoming means. Work per edge does not depend on `M`.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex, OnceLock};

use crate::fec::{Decoded, FecError, RingParityCheck};
use crate::special::{brent, CircularTables};

pub const KAPPA_MIN: f64 = 1e-9;
pub const KAPPA_MAX: f64 = 1e9;

/// A D-message over `Z_M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DMessage {
    /// Circular mean in `[0, M)`.
    pub mu: f64,
    /// Concentration; zero means uninformative.
    pub kappa: f64,
    pub modulus: u32,
}

fn wrap(mu: f64, m: f64) -> f64 {
    let r = mu.rem_euclid(m);
    if r >= m || !r.is_finite() {
        0.0
    } else {
        r
    }
}

impl DMessage {
    /// Canonicalises `mu` into `[0, M)`; a negative or NaN `kappa` becomes 0
    /// and an infinite one [`KAPPA_MAX`]. An uninformative message has `mu = 0`.
    pub fn new(mu: f64, kappa: f64, modulus: u32) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        let kappa = if kappa > 0.0 { kappa.min(KAPPA_MAX) } else { 0.0 };
        let mu = if kappa == 0.0 { 0.0 } else { wrap(mu, modulus as f64) };
        DMessage { mu, kappa, modulus }
    }

    pub fn uninformative(modulus: u32) -> Self {
        DMessage::new(0.0, 0.0, modulus)
    }

    /// `kappa cos(2 pi (s - mu) / M)`.
    pub fn log_pmf_unnormalised(&self, s: usize) -> f64 {
        self.kappa * (TAU * (s as f64 - self.mu) / self.modulus as f64).cos()
    }

    /// Normalised pmf over the ring points.
    pub fn pmf(&self) -> Vec<f64> {
        let l: Vec<f64> = (0..self.modulus as usize)
            .map(|s| self.log_pmf_unnormalised(s) - self.kappa)
            .collect();
        let z: f64 = l.iter().map(|v| v.exp()).sum();
        l.iter().map(|v| v.exp() / z).collect()
    }

    /// Nearest ring point to the mean.
    pub fn decision(&self) -> u32 {
        (self.mu.round() as u64 % self.modulus as u64) as u32
    }

    fn phasor(&self) -> (f64, f64) {
        let th = TAU * self.mu / self.modulus as f64;
        (self.kappa * th.cos(), self.kappa * th.sin())
    }

    fn from_phasor(re: f64, im: f64, modulus: u32) -> Self {
        let r = re.hypot(im);
        if r == 0.0 {
            return DMessage::uninformative(modulus);
        }
        let mu = im.atan2(re) / TAU * modulus as f64;
        DMessage::new(mu, r, modulus)
    }
}

/// Conversion between concentration and additive circular variance used by
/// the check node.
#[derive(Clone)]
pub enum MomentMap {
    /// Continuous Von Mises: `var = -2 ln(I1(k) / I0(k))` (radians²).
    Continuous,
    /// First circular moment of the Von Mises law sampled on `Z_M`; exact
    /// for cyclic convolutions of sampled messages with integer means, and
    /// equal to `Continuous` as `M` grows. Overconfident when channel means
    /// fall between ring points.
    Sampled(Arc<SampledMoments>),
}

impl std::fmt::Debug for MomentMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MomentMap::Continuous => write!(f, "Continuous"),
            MomentMap::Sampled(t) => write!(f, "Sampled(M = {})", t.modulus),
        }
    }
}

impl MomentMap {
    /// Sampled-moment map for modulus `m`, built once per modulus.
    pub fn sampled(m: u32) -> Self {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<SampledMoments>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        let t = guard
            .entry(m)
            .or_insert_with(|| Arc::new(SampledMoments::build(m)))
            .clone();
        MomentMap::Sampled(t)
    }

    /// Circular variance in radians² of a message with concentration `kappa > 0`.
    #[inline]
    pub fn variance(&self, kappa: f64) -> f64 {
        match self {
            MomentMap::Continuous => CircularTables::get().variance(kappa),
            MomentMap::Sampled(t) => t.variance(kappa),
        }
    }

    /// Concentration for a circular variance in radians².
    #[inline]
    pub fn kappa(&self, var: f64) -> f64 {
        match self {
            MomentMap::Continuous => CircularTables::get().kappa(var),
            MomentMap::Sampled(t) => t.kappa(var),
        }
    }
}

const SAMPLED_TABLE: usize = 4096;
const SAMPLED_K_LO: f64 = 1e-3;
/// Upper table end in units of `1 / (1 - cos(2 pi / M))`.
const SAMPLED_TAIL: f64 = 30.0;
const PAD: usize = 2;

/// Tables of `-2 ln rho_M(k)` with `rho_M` the mean resultant length of the
/// sampled Von Mises pmf on `Z_M`.
pub struct SampledMoments {
    modulus: u32,
    /// `1 - cos(2 pi / M)`
    gap: f64,
    /// `var ~ tail * exp(-k gap)` beyond the table
    tail: f64,
    /// `rho ~ c1 k` for small `k`
    c1: f64,
    ln_k0: f64,
    ln_k_step: f64,
    ln_var: Vec<f64>,
    ln_v0: f64,
    ln_v_step: f64,
    ln_k: Vec<f64>,
}

impl SampledMoments {
    fn exact_variance(m: u32, kappa: f64) -> f64 {
        // 1 - rho computed without cancellation
        let (mut num, mut den) = (0.0, 0.0);
        for a in 0..m {
            let c = (TAU * a as f64 / m as f64).cos();
            let w = (kappa * (c - 1.0)).exp();
            num += w * (1.0 - c);
            den += w;
        }
        -2.0 * (-(num / den)).ln_1p()
    }

    fn build(m: u32) -> Self {
        let gap = 1.0 - (TAU / m as f64).cos();
        let c1 = if m == 2 { 1.0 } else { 0.5 };
        let neighbours = if m == 2 { 1.0 } else { 2.0 };
        let tail = 2.0 * neighbours * gap;
        let ln_k0 = SAMPLED_K_LO.ln();
        let k_hi = (SAMPLED_TAIL / gap).min(KAPPA_MAX);
        let ln_k1 = k_hi.ln();
        let ln_k_step = (ln_k1 - ln_k0) / (SAMPLED_TABLE - 1) as f64;
        let f = |ln_k: f64| Self::exact_variance(m, ln_k.exp()).ln();
        // PAD extra samples on each side keep the cubic accurate up to the ends
        let ln_var: Vec<f64> = (0..SAMPLED_TABLE + 2 * PAD)
            .map(|i| f(ln_k0 + (i as f64 - PAD as f64) * ln_k_step))
            .collect();
        let ln_v0 = f(ln_k1);
        let ln_v1 = f(ln_k0);
        let ln_v_step = (ln_v1 - ln_v0) / (SAMPLED_TABLE - 1) as f64;
        let (lo, hi) = (ln_k0 - 3.0, ln_k1 + 3.0);
        let ln_k = (0..SAMPLED_TABLE + 2 * PAD)
            .map(|i| {
                let target = ln_v0 + (i as f64 - PAD as f64) * ln_v_step;
                brent(|u| f(u) - target, lo, hi, 1e-13).unwrap_or(f64::NAN)
            })
            .collect();
        SampledMoments {
            modulus: m,
            gap,
            tail,
            c1,
            ln_k0,
            ln_k_step,
            ln_var,
            ln_v0,
            ln_v_step,
            ln_k,
        }
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn variance(&self, kappa: f64) -> f64 {
        if kappa <= 0.0 {
            return f64::INFINITY;
        }
        let t = (kappa.ln() - self.ln_k0) / self.ln_k_step;
        if t < 0.0 {
            return -2.0 * (self.c1 * kappa).ln();
        }
        if t > (SAMPLED_TABLE - 1) as f64 {
            // the nearest neighbours dominate 1 - rho
            return self.tail * (-kappa * self.gap).exp();
        }
        lookup(&self.ln_var, t + PAD as f64).exp()
    }

    pub fn kappa(&self, var: f64) -> f64 {
        if !(var < f64::INFINITY) {
            return 0.0;
        }
        if var <= 0.0 {
            return KAPPA_MAX;
        }
        let lv = var.ln();
        let t = (lv - self.ln_v0) / self.ln_v_step;
        if t > (SAMPLED_TABLE - 1) as f64 {
            return (-0.5 * var).exp() / self.c1;
        }
        if t < 0.0 {
            return (self.tail.ln() - lv) / self.gap;
        }
        lookup(&self.ln_k, t + PAD as f64).exp()
    }
}

fn lookup(table: &[f64], t: f64) -> f64 {
    let n = table.len();
    let i = (t.floor() as usize).min(n - 2);
    let f = t - i as f64;
    let p1 = table[i];
    let p2 = table[i + 1];
    let p0 = if i > 0 { table[i - 1] } else { 2.0 * p1 - p2 };
    let p3 = if i + 2 < n { table[i + 2] } else { 2.0 * p2 - p1 };
    let a = -0.5 * p0 + 1.5 * p1 - 1.5 * p2 + 0.5 * p3;
    let b = p0 - 2.5 * p1 + 2.0 * p2 - 0.5 * p3;
    let c = -0.5 * p0 + 0.5 * p2;
    ((a * f + b) * f + c) * f + p1
}

fn clamp_kappa(k: f64) -> f64 {
    if k > 0.0 {
        k.clamp(KAPPA_MIN, KAPPA_MAX)
    } else {
        0.0
    }
}

/// Product of the channel message and the incoming messages.
pub fn vn_update(channel: &DMessage, incoming: &[DMessage]) -> DMessage {
    let m = channel.modulus;
    let (mut re, mut im) = channel.phasor();
    for msg in incoming {
        assert_eq!(msg.modulus, m, "messages must share the modulus");
        let (a, b) = msg.phasor();
        re += a;
        im += b;
    }
    if incoming.is_empty() {
        return *channel;
    }
    DMessage::from_phasor(re, im, m)
}

/// Check-node output on an edge with weight `w_out` given the other edges'
/// messages and weights, using the continuous moment map.
pub fn cn_update(incoming: &[DMessage], weights: &[i8], w_out: i8) -> DMessage {
    cn_update_with(incoming, weights, w_out, &MomentMap::Continuous)
}

/// [`cn_update`] with an explicit moment map.
pub fn cn_update_with(
    incoming: &[DMessage],
    weights: &[i8],
    w_out: i8,
    map: &MomentMap,
) -> DMessage {
    assert_eq!(incoming.len(), weights.len());
    assert!(w_out == 1 || w_out == -1, "weights must be ±1");
    let Some(first) = incoming.first() else {
        panic!("check-node update needs at least one incoming message");
    };
    let m = first.modulus;
    let mut mean = 0.0;
    let mut var = 0.0;
    for (msg, &w) in incoming.iter().zip(weights) {
        assert_eq!(msg.modulus, m, "messages must share the modulus");
        assert!(w == 1 || w == -1, "weights must be ±1");
        if msg.kappa == 0.0 {
            return DMessage::uninformative(m);
        }
        mean += w as f64 * msg.mu;
        var += map.variance(msg.kappa);
    }
    DMessage::new(-(w_out as f64) * mean, clamp_kappa(map.kappa(var)), m)
}

/// Options for [`adbp_decode_with`].
#[derive(Debug, Clone)]
pub struct AdbpOptions {
    pub max_iter: usize,
    pub moment_map: MomentMap,
    /// Stop as soon as the decision is a codeword.
    pub early_stop: bool,
}

impl AdbpOptions {
    /// Continuous moment map, early stopping on.
    pub fn new(max_iter: usize) -> Self {
        AdbpOptions {
            max_iter,
            moment_map: MomentMap::Continuous,
            early_stop: true,
        }
    }
}

/// Flooding-schedule decoding from channel D-messages with the continuous
/// moment map.
pub fn adbp_decode(
    channel_msgs: &[DMessage],
    code: &RingParityCheck,
    max_iter: usize,
) -> Result<Decoded<u32>, FecError> {
    adbp_decode_with(
        channel_msgs,
        code,
        &AdbpOptions::new(max_iter),
    )
}

/// Flooding-schedule decoding. The posterior of each symbol includes the
/// channel message; the decision is its rounded mean. Decoding has converged
/// when every check is satisfied and no posterior is uninformative.
pub fn adbp_decode_with(
    channel_msgs: &[DMessage],
    code: &RingParityCheck,
    opts: &AdbpOptions,
) -> Result<Decoded<u32>, FecError> {
    let n = code.n();
    let modulus = code.modulus();
    let m = modulus as f64;
    if channel_msgs.len() != n {
        return Err(FecError::Length {
            expected: n,
            got: channel_msgs.len(),
        });
    }
    if let Some(bad) = channel_msgs.iter().find(|d| d.modulus != modulus) {
        return Err(FecError::InvalidParameters(format!(
            "channel message modulus {} differs from code modulus {modulus}",
            bad.modulus
        )));
    }
    let map = &opts.moment_map;
    let ch: Vec<(f64, f64)> = channel_msgs
        .iter()
        .map(|d| DMessage::new(d.mu, clamp_kappa(d.kappa), modulus).phasor())
        .collect();
    let ne = code.num_edges();
    // variable-to-check messages as (mean, kappa); check-to-variable as phasors
    let mut v_mu = vec![0.0; ne];
    let mut v_k = vec![0.0; ne];
    for v in 0..n {
        let d = DMessage::new(channel_msgs[v].mu, clamp_kappa(channel_msgs[v].kappa), modulus);
        for &e in code.var_edges(v) {
            v_mu[e] = d.mu;
            v_k[e] = d.kappa;
        }
    }
    let mut c_re = vec![0.0; ne];
    let mut c_im = vec![0.0; ne];
    let mut prefix_mean = Vec::new();
    let mut prefix_var = Vec::new();
    let mut prefix_zero = Vec::new();
    let mut symbols = vec![0u32; n];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=opts.max_iter {
        iterations = it;
        for c in 0..code.r() {
            let edges = code.check_edges(c);
            let start = edges.start;
            let d = edges.len();
            // exclusive sums from prefix and suffix passes
            prefix_mean.clear();
            prefix_var.clear();
            prefix_zero.clear();
            let (mut sm, mut sv, mut sz) = (0.0, 0.0, 0usize);
            for e in edges.clone() {
                prefix_mean.push(sm);
                prefix_var.push(sv);
                prefix_zero.push(sz);
                sm += code.edge_weight(e) as f64 * v_mu[e];
                if v_k[e] == 0.0 {
                    sz += 1;
                } else {
                    sv += map.variance(v_k[e]);
                }
            }
            let (mut tm, mut tv, mut tz) = (0.0, 0.0, 0usize);
            for j in (0..d).rev() {
                let e = start + j;
                let w = code.edge_weight(e) as f64;
                let (re, im) = if prefix_zero[j] + tz > 0 {
                    (0.0, 0.0)
                } else {
                    let mu = -w * (prefix_mean[j] + tm);
                    let k = clamp_kappa(map.kappa(prefix_var[j] + tv));
                    let th = TAU * mu / m;
                    (k * th.cos(), k * th.sin())
                };
                c_re[e] = re;
                c_im[e] = im;
                tm += w * v_mu[e];
                if v_k[e] == 0.0 {
                    tz += 1;
                } else {
                    tv += map.variance(v_k[e]);
                }
            }
        }
        let mut erased = false;
        for v in 0..n {
            let (mut re, mut im) = ch[v];
            for &e in code.var_edges(v) {
                re += c_re[e];
                im += c_im[e];
            }
            for &e in code.var_edges(v) {
                let d = DMessage::from_phasor(re - c_re[e], im - c_im[e], modulus);
                v_mu[e] = d.mu;
                v_k[e] = clamp_kappa(d.kappa);
            }
            let post = DMessage::from_phasor(re, im, modulus);
            erased |= post.kappa == 0.0;
            symbols[v] = post.decision();
        }
        if !erased && code.is_codeword(&symbols) {
            converged = true;
            if opts.early_stop {
                break;
            }
        } else {
            converged = false;
        }
    }
    Ok(Decoded {
        symbols,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::bessel_ratio;

    fn close(a: &DMessage, b: &DMessage, tol: f64) -> bool {
        let m = a.modulus as f64;
        let dm = (a.mu - b.mu).rem_euclid(m);
        dm.min(m - dm) < tol && (a.kappa - b.kappa).abs() <= tol * a.kappa.max(1.0)
    }

    #[test]
    fn construction_is_canonical() {
        let d = DMessage::new(-0.5, 2.0, 4);
        assert_eq!(d.mu, 3.5);
        assert_eq!(DMessage::new(9.0, 1.0, 4).mu, 1.0);
        assert_eq!(DMessage::new(1.3, -1.0, 4), DMessage::uninformative(4));
        assert_eq!(DMessage::new(1.3, f64::INFINITY, 4).kappa, KAPPA_MAX);
        assert_eq!(DMessage::new(3.7, 5.0, 4).decision(), 0);
        let p = DMessage::new(1.0, 3.0, 4).pmf();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(p[1] > p[0] && p[1] > p[2]);
    }

    #[test]
    fn vn_examples() {
        let a = DMessage::new(1.2, 3.0, 8);
        assert_eq!(vn_update(&a, &[]), a);
        let two = vn_update(&a, &[a]);
        assert!(close(&two, &DMessage::new(1.2, 6.0, 8), 1e-12));
        let anti = vn_update(&DMessage::new(1.0, 2.5, 8), &[DMessage::new(5.0, 2.5, 8)]);
        assert!(anti.kappa < 1e-12);
        let with_zero = vn_update(&DMessage::uninformative(8), &[a]);
        assert!(close(&with_zero, &a, 1e-12));
    }

    #[test]
    fn vn_is_exact_product_of_sampled_pmfs() {
        let msgs = [
            DMessage::new(0.3, 1.5, 4),
            DMessage::new(2.9, 0.7, 4),
            DMessage::new(1.1, 2.2, 4),
        ];
        let out = vn_update(&msgs[0], &msgs[1..]);
        for s in 0..4 {
            for t in 0..4 {
                let lhs: f64 = msgs.iter().map(|d| d.log_pmf_unnormalised(s) - d.log_pmf_unnormalised(t)).sum();
                let rhs = out.log_pmf_unnormalised(s) - out.log_pmf_unnormalised(t);
                assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cn_examples() {
        let a = DMessage::new(1.25, 4.0, 4);
        let out = cn_update(&[a], &[1], 1);
        assert!((out.mu - 2.75).abs() < 1e-12);
        assert!((out.kappa - 4.0).abs() < 1e-6 * 4.0);
        let b = DMessage::new(0.5, 3.0, 4);
        assert_eq!(
            cn_update(&[a, DMessage::uninformative(4), b], &[1, -1, 1], -1),
            DMessage::uninformative(4)
        );
        // continuous map: mean resultant lengths multiply
        let out = cn_update(&[a, b], &[1, 1], 1);
        let r = bessel_ratio(out.kappa);
        assert!((r - bessel_ratio(4.0) * bessel_ratio(3.0)).abs() < 1e-7);
        assert!((out.mu - (4.0 - 1.75)).abs() < 1e-12);
    }

    #[test]
    fn cn_negation_invariance() {
        let msgs = [DMessage::new(0.7, 2.0, 8), DMessage::new(5.4, 1.1, 8), DMessage::new(3.3, 6.0, 8)];
        let w = [1i8, -1, 1];
        for map in [MomentMap::Continuous, MomentMap::sampled(8)] {
            let base = cn_update_with(&msgs, &w, 1, &map);
            let mut flipped = msgs;
            flipped[1] = DMessage::new(-msgs[1].mu, msgs[1].kappa, 8);
            let other = cn_update_with(&flipped, &[1, 1, 1], 1, &map);
            assert!(close(&base, &other, 1e-12));
        }
    }

    fn circular_convolution(p: &[f64], q: &[f64]) -> Vec<f64> {
        let m = p.len();
        let mut out = vec![0.0; m];
        for a in 0..m {
            for b in 0..m {
                out[(a + b) % m] += p[a] * q[b];
            }
        }
        out
    }

    fn resultant(p: &[f64]) -> f64 {
        let m = p.len() as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (a, &v) in p.iter().enumerate() {
            re += v * (TAU * a as f64 / m).cos();
            im += v * (TAU * a as f64 / m).sin();
        }
        re.hypot(im)
    }

    #[test]
    fn sampled_map_matches_dense_convolution() {
        // three equal-kappa sampled messages on Z_4, convolved densely
        for &k in &[0.3, 1.0, 2.0, 4.0, 8.0] {
            let msgs: Vec<DMessage> = [0.0, 1.0, 3.0].iter().map(|&mu| DMessage::new(mu, k, 4)).collect();
            let mut conv = vec![1.0, 0.0, 0.0, 0.0];
            for d in &msgs {
                conv = circular_convolution(&conv, &d.pmf());
            }
            let map = MomentMap::sampled(4);
            let target = map.kappa(-2.0 * resultant(&conv).ln());
            let out = cn_update_with(&msgs, &[1, 1, 1], 1, &map);
            assert!(((out.kappa - target) / target).abs() < 1e-6, "k={k}: {} vs {target}", out.kappa);
        }
    }

    #[test]
    fn sampled_tables_track_direct_sums() {
        for &m in &[2u32, 4, 8, 64] {
            let map = MomentMap::sampled(m);
            for i in 0..200 {
                let k = 10f64.powf(-5.0 + 9.0 * i as f64 / 199.0);
                let v = SampledMoments::exact_variance(m, k);
                if v < 1e-250 {
                    continue;
                }
                let got = map.variance(k);
                assert!(((got - v) / v).abs() < 1e-6, "m={m} k={k}: {got} vs {v}");
                let back = map.kappa(v);
                assert!(((back - k) / k).abs() < 1e-5, "m={m} k={k}: {back}");
            }
        }
        // large M approaches the continuous law where sampling is fine enough
        let map = MomentMap::sampled(64);
        for &k in &[0.5, 2.0, 10.0] {
            let c = CircularTables::get().variance(k);
            assert!(((map.variance(k) - c) / c).abs() < 1e-6);
        }
    }
}
