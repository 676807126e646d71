//! Browser bindings: loss curves, stage-1 likelihood comparison and a
//! D-message node playground. Results are flat `Float64Array`s; the layout of
//! each is given on the function.

use twostage::adbp::{cn_update, vn_update, DMessage};
use twostage::channel::{ChannelKind, ChannelModel, SnrConvention};
use twostage::constellation::TwoStageConstellation;
use twostage::detection::{exact_stage1_llr, kv_from_kw, vonmises_llr};
use twostage::infotheory::{loss_curve as mi_loss_curve, MiOptions, Scheme};
use wasm_bindgen::prelude::*;

const RAYLEIGH_K: f64 = 1e-10;
const MAX_POINTS: usize = 2000;

fn msg(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Loss from capacity for BICM and the two-stage scheme over an SNR grid
/// (dB per dimension). Returns `[snr, bicm_loss, two_stage_loss]` per point.
#[wasm_bindgen]
pub fn loss_curve(m: u32, m1: u32, snr_lo: f64, snr_hi: f64, step: f64, rayleigh: bool) -> Result<Vec<f64>, JsError> {
    js(loss_rows(m, m1, snr_lo, snr_hi, step, rayleigh))
}

pub fn loss_rows(m: u32, m1: u32, snr_lo: f64, snr_hi: f64, step: f64, rayleigh: bool) -> Result<Vec<f64>, String> {
    if !(step > 0.0) || !(snr_hi >= snr_lo) || (snr_hi - snr_lo) / step > MAX_POINTS as f64 {
        return Err(msg(format!("SNR grid must be non-empty with at most {MAX_POINTS} points")));
    }
    let snr: Vec<f64> = (0..=((snr_hi - snr_lo) / step).floor() as usize)
        .map(|i| snr_lo + i as f64 * step)
        .collect();
    let kind = if rayleigh { ChannelKind::Rician { k: RAYLEIGH_K } } else { ChannelKind::Awgn };
    let opts = MiOptions { fading_samples: 2000, ..MiOptions::default() };
    let bicm_c = TwoStageConstellation::build_pam(m, m, true).map_err(msg)?;
    let two_c = TwoStageConstellation::build_pam(m, m1, true).map_err(msg)?;
    let conv = SnrConvention::PerDimension;
    let bicm = mi_loss_curve(Scheme::Bicm, &bicm_c, kind, conv, &snr, &opts).map_err(msg)?;
    let two = mi_loss_curve(Scheme::TwoStage, &two_c, kind, conv, &snr, &opts).map_err(msg)?;
    Ok(snr
        .iter()
        .zip(bicm.iter().zip(&two))
        .flat_map(|(&s, (b, t))| [s, b.loss_per_dim, t.loss_per_dim])
        .collect())
}

/// Exact and Von Mises stage-1 log-likelihoods over `points` observations
/// spanning the constellation. Returns, per observation,
/// `[y, exact[0..M1], vonmises[0..M1]]`, both normalised to `lambda[0] = 0`.
#[wasm_bindgen]
pub fn llr_compare(m: u32, m1: u32, snr_db: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(llr_rows(m, m1, snr_db, points))
}

pub fn llr_rows(m: u32, m1: u32, snr_db: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(msg(format!("points must be in 2..={MAX_POINTS}")));
    }
    let c = TwoStageConstellation::build_pam(m, m1, true).map_err(msg)?;
    let ch = ChannelModel::with_energy(ChannelKind::Awgn, snr_db, SnrConvention::PerDimension, c.energy());
    let kw = ch.kw();
    let kv = kv_from_kw(kw, c.m1_card(), c.spacing());
    let half = c.offset().abs() + c.spacing();
    let mut out = Vec::with_capacity(points * (1 + 2 * c.m1_card()));
    for i in 0..points {
        let y = -half + 2.0 * half * i as f64 / (points - 1) as f64;
        out.push(y);
        out.extend(exact_stage1_llr(y, kw, &c).lambda);
        out.extend(vonmises_llr(y, kv, &c).lambda);
    }
    Ok(out)
}

/// Combines D-messages given as parallel `mu` / `kappa` arrays over `Z_M`.
/// The check-node output is the message on the remaining edge of a unit
/// weight check (the value completing a zero sum); the variable-node output
/// is the product of all messages. Returns
/// `[cn_mu, cn_kappa, vn_mu, vn_kappa, cn_pmf[0..M], vn_pmf[0..M]]`.
#[wasm_bindgen]
pub fn node_playground(mu: &[f64], kappa: &[f64], modulus: u32) -> Result<Vec<f64>, JsError> {
    js(node_rows(mu, kappa, modulus))
}

pub fn node_rows(mu: &[f64], kappa: &[f64], modulus: u32) -> Result<Vec<f64>, String> {
    if mu.is_empty() || mu.len() != kappa.len() {
        return Err(msg("mu and kappa must be non-empty and of equal length"));
    }
    if !(2..=256).contains(&modulus) {
        return Err(msg("modulus must be in 2..=256"));
    }
    let msgs: Vec<DMessage> = mu.iter().zip(kappa).map(|(&a, &k)| DMessage::new(a, k, modulus)).collect();
    let cn = cn_update(&msgs, &vec![1; msgs.len()], 1);
    let vn = vn_update(&msgs[0], &msgs[1..]);
    let mut out = vec![cn.mu, cn.kappa, vn.mu, vn.kappa];
    out.extend(cn.pmf());
    out.extend(vn.pmf());
    Ok(out)
}
