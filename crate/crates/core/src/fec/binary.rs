//! Binary LDPC codes and the sum-product decoder in the LLR domain.

use super::peg::peg_construct_encodable;
use super::ring::{RingLdpcCode, RingParityCheck};
use super::{Decoded, FecError};

/// Largest message magnitude; `tanh(L/2)` products are kept strictly inside
/// `(-1, 1)` so that `atanh` stays finite.
const LLR_CLIP: f64 = 60.0;
const TANH_CLIP: f64 = 1.0 - 1e-15;

/// An encodable binary LDPC code.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryLdpcCode {
    inner: RingLdpcCode,
}

impl BinaryLdpcCode {
    /// Wraps a binary parity-check matrix; rank deficiency only raises `k`.
    pub fn new(h: RingParityCheck) -> Result<Self, FecError> {
        if h.modulus() != 2 {
            return Err(FecError::InvalidParameters(format!(
                "binary code needs modulus 2, got {}",
                h.modulus()
            )));
        }
        Ok(BinaryLdpcCode {
            inner: RingLdpcCode::new_allow_deficient(h)?,
        })
    }

    /// Regular `(dv, dc)` code by progressive edge growth.
    pub fn peg(n: usize, dv: usize, dc: usize, seed: u64) -> Result<Self, FecError> {
        Ok(BinaryLdpcCode {
            inner: peg_construct_encodable(n, dv, dc, 2, seed, 1)?,
        })
    }

    pub fn parity_check(&self) -> &RingParityCheck {
        self.inner.parity_check()
    }
    pub fn n(&self) -> usize {
        self.inner.n()
    }
    pub fn k(&self) -> usize {
        self.inner.k()
    }
    pub fn rate(&self) -> f64 {
        self.inner.rate()
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, FecError> {
        let sym: Vec<u32> = info.iter().map(|&b| b as u32).collect();
        Ok(self.inner.encode(&sym)?.into_iter().map(|b| b as u8).collect())
    }

    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.inner.info_positions().iter().map(|&p| codeword[p]).collect()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        let h = self.parity_check();
        (0..h.r()).all(|c| h.check_edges(c).fold(0u8, |a, e| a ^ bits[h.edge_var(e)]) == 0)
    }
}

/// Sum-product decoding with a flooding schedule. LLRs are
/// `ln P(0) / P(1)`; a non-negative posterior decides 0. Stops as soon as the
/// hard decision satisfies every check with no posterior exactly zero (an
/// erased position never counts as decoded).
pub fn binary_bp_decode(
    bit_llrs: &[f64],
    code: &BinaryLdpcCode,
    max_iter: usize,
) -> Result<Decoded<u8>, FecError> {
    let h = code.parity_check();
    let n = h.n();
    if bit_llrs.len() != n {
        return Err(FecError::Length {
            expected: n,
            got: bit_llrs.len(),
        });
    }
    let ch: Vec<f64> = bit_llrs.iter().map(|l| l.clamp(-LLR_CLIP, LLR_CLIP)).collect();
    let ne = h.num_edges();
    let mut v2c: Vec<f64> = (0..ne).map(|e| ch[h.edge_var(e)]).collect();
    let mut c2v = vec![0.0; ne];
    let mut t = Vec::new();
    let mut bits = vec![0u8; n];
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        for c in 0..h.r() {
            let edges = h.check_edges(c);
            let start = edges.start;
            t.clear();
            t.extend(edges.clone().map(|e| (0.5 * v2c[e]).tanh()));
            // exclusive products from prefix and suffix passes
            let d = t.len();
            let mut prefix = 1.0;
            for j in 0..d {
                c2v[start + j] = prefix;
                prefix *= t[j];
            }
            let mut suffix = 1.0;
            for j in (0..d).rev() {
                let p = (c2v[start + j] * suffix).clamp(-TANH_CLIP, TANH_CLIP);
                c2v[start + j] = 2.0 * p.atanh();
                suffix *= t[j];
            }
        }
        let mut erased = false;
        for v in 0..n {
            let edges = h.var_edges(v);
            let total = ch[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                v2c[e] = (total - c2v[e]).clamp(-LLR_CLIP, LLR_CLIP);
            }
            bits[v] = u8::from(total < 0.0);
            erased |= total == 0.0;
        }
        if !erased && code.is_codeword(&bits) {
            converged = true;
            break;
        }
    }
    Ok(Decoded {
        symbols: bits,
        converged,
        iterations,
    })
}
