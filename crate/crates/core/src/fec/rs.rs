//! Reed–Solomon codes over GF(256), possibly shortened.
//!
//! The generator polynomial has roots `alpha^0, ..., alpha^{2t-1}`. Codewords
//! are systematic: the `k` information bytes come first, followed by the
//! `2t` parity bytes, with byte 0 the highest-degree coefficient. Decoding is
//! syndrome computation, Berlekamp–Massey, Chien search and Forney's formula.

use super::gf256::{alpha_pow, mul, poly_eval};
use super::FecError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    /// Decoded; the payload is the number of corrected symbols.
    Corrected(usize),
    /// Error pattern beyond the decoder's radius was detected.
    Failure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsCode {
    n: usize,
    k: usize,
    t: usize,
    /// Generator coefficients, highest degree first, monic.
    generator: Vec<u8>,
}

impl RsCode {
    /// Full-length code `RS(255, 255 - 2t)`.
    pub fn new(t: usize) -> Result<Self, FecError> {
        Self::shortened(255 - 2 * t.min(127), t)
    }

    /// Code with `k` information bytes and `2t` parity bytes, `k + 2t <= 255`.
    pub fn shortened(k: usize, t: usize) -> Result<Self, FecError> {
        if t == 0 || k == 0 || k + 2 * t > 255 {
            return Err(FecError::InvalidParameters(format!(
                "RS needs t >= 1, k >= 1 and k + 2t <= 255 (k = {k}, t = {t})"
            )));
        }
        let mut g = vec![1u8];
        for j in 0..2 * t {
            // multiply by (x + alpha^j)
            let root = alpha_pow(j as i64);
            let mut next = vec![0u8; g.len() + 1];
            for (i, &c) in g.iter().enumerate() {
                next[i] ^= c;
                next[i + 1] ^= mul(c, root);
            }
            g = next;
        }
        Ok(RsCode {
            n: k + 2 * t,
            k,
            t,
            generator: g,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn t(&self) -> usize {
        self.t
    }
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>, FecError> {
        if info.len() != self.k {
            return Err(FecError::Length {
                expected: self.k,
                got: info.len(),
            });
        }
        let np = 2 * self.t;
        let mut parity = vec![0u8; np];
        for &b in info {
            let f = b ^ parity[0];
            parity.rotate_left(1);
            parity[np - 1] = 0;
            if f != 0 {
                for (p, &g) in parity.iter_mut().zip(&self.generator[1..]) {
                    *p ^= mul(f, g);
                }
            }
        }
        let mut cw = info.to_vec();
        cw.extend_from_slice(&parity);
        Ok(cw)
    }

    fn syndromes(&self, word: &[u8]) -> Vec<u8> {
        (0..2 * self.t)
            .map(|j| poly_eval(word, alpha_pow(j as i64)))
            .collect()
    }

    /// Bounded-distance decoding. On failure the received word is returned
    /// unchanged.
    pub fn decode(&self, received: &[u8]) -> Result<(Vec<u8>, RsStatus), FecError> {
        if received.len() != self.n {
            return Err(FecError::Length {
                expected: self.n,
                got: received.len(),
            });
        }
        let s = self.syndromes(received);
        if s.iter().all(|&v| v == 0) {
            return Ok((received.to_vec(), RsStatus::Corrected(0)));
        }
        let lambda = berlekamp_massey(&s);
        let nu = lambda.len() - 1;
        if nu > self.t {
            return Ok((received.to_vec(), RsStatus::Failure));
        }
        // Chien search over the positions present in the (shortened) word
        let mut locations = Vec::with_capacity(nu);
        for i in 0..self.n {
            if eval_low(&lambda, alpha_pow(-(i as i64))) == 0 {
                locations.push(i);
            }
        }
        if locations.len() != nu {
            return Ok((received.to_vec(), RsStatus::Failure));
        }
        // omega = S(x) lambda(x) mod x^{2t}
        let two_t = 2 * self.t;
        let mut omega = vec![0u8; two_t];
        for (i, &si) in s.iter().enumerate() {
            for (j, &lj) in lambda.iter().enumerate() {
                if i + j < two_t {
                    omega[i + j] ^= mul(si, lj);
                }
            }
        }
        let derivative: Vec<u8> = lambda
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0 })
            .collect();
        let mut out = received.to_vec();
        for &i in &locations {
            let x = alpha_pow(i as i64);
            let x_inv = alpha_pow(-(i as i64));
            let den = eval_low(&derivative, x_inv);
            if den == 0 {
                return Ok((received.to_vec(), RsStatus::Failure));
            }
            let e = super::gf256::div(mul(x, eval_low(&omega, x_inv)), den);
            out[self.n - 1 - i] ^= e;
        }
        if self.syndromes(&out).iter().any(|&v| v != 0) {
            return Ok((received.to_vec(), RsStatus::Failure));
        }
        Ok((out, RsStatus::Corrected(nu)))
    }

    /// Information bytes of a codeword.
    pub fn info<'a>(&self, codeword: &'a [u8]) -> &'a [u8] {
        &codeword[..self.k]
    }
}

/// Evaluates a polynomial stored lowest degree first.
fn eval_low(p: &[u8], x: u8) -> u8 {
    p.iter().rev().fold(0u8, |acc, &c| mul(acc, x) ^ c)
}

/// Error-locator polynomial (lowest degree first, trailing zeros trimmed).
fn berlekamp_massey(s: &[u8]) -> Vec<u8> {
    let mut c = vec![1u8];
    let mut b = vec![1u8];
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bb = 1u8;
    for n in 0..s.len() {
        let mut d = s[n];
        for i in 1..=l.min(c.len() - 1) {
            d ^= mul(c[i], s[n - i]);
        }
        if d == 0 {
            m += 1;
            continue;
        }
        let coef = super::gf256::div(d, bb);
        let mut next = c.clone();
        if next.len() < b.len() + m {
            next.resize(b.len() + m, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            next[i + m] ^= mul(coef, bi);
        }
        if 2 * l <= n {
            b = std::mem::replace(&mut c, next);
            l = n + 1 - l;
            bb = d;
            m = 1;
        } else {
            c = next;
            m += 1;
        }
    }
    c.truncate(l + 1);
    while c.len() > 1 && *c.last().unwrap() == 0 {
        c.pop();
    }
    c
}
