//! Full `M`-ary sum-product decoding over `Z_M`, the accuracy reference for
//! the two-parameter decoder.

use super::ring::RingParityCheck;
use super::{Decoded, FecError};

const PROB_FLOOR: f64 = 1e-300;

/// Cyclic convolution `out(a) = Σ_b p(b) q(a - b)` over `Z_M`.
fn convolve(p: &[f64], q: &[f64], out: &mut [f64]) {
    let m = p.len();
    out.fill(0.0);
    for (b, &pb) in p.iter().enumerate() {
        if pb == 0.0 {
            continue;
        }
        for (c, &qc) in q.iter().enumerate() {
            out[(b + c) & (m - 1)] += pb * qc;
        }
    }
}

fn normalise(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    if s > 0.0 && s.is_finite() {
        for v in p.iter_mut() {
            *v /= s;
        }
    } else {
        p.fill(1.0 / p.len() as f64);
    }
}

/// Decodes from per-symbol log-likelihood tables, given row-major as
/// `tables[v * M + a] = ln p(y_v | x_v = a)` (any per-row offset).
///
/// Flooding schedule; the decision is the posterior argmax (lowest symbol on
/// ties) and decoding stops when the decision satisfies every check with no
/// tied posterior.
pub fn nonbinary_bp_decode(
    tables: &[f64],
    code: &RingParityCheck,
    max_iter: usize,
) -> Result<Decoded<u32>, FecError> {
    let n = code.n();
    let m = code.modulus() as usize;
    if tables.len() != n * m {
        return Err(FecError::Length {
            expected: n * m,
            got: tables.len(),
        });
    }
    if let Some(i) = tables.iter().position(|v| !v.is_finite()) {
        return Err(FecError::InvalidParameters(format!(
            "non-finite log-likelihood at row {}",
            i / m
        )));
    }
    let ch_log: Vec<f64> = tables
        .chunks_exact(m)
        .flat_map(|row| {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            row.iter().map(move |v| v - max)
        })
        .collect();
    let ne = code.num_edges();
    let mut v2c = vec![0.0; ne * m];
    for e in 0..ne {
        let v = code.edge_var(e);
        let dst = &mut v2c[e * m..(e + 1) * m];
        for (d, &l) in dst.iter_mut().zip(&ch_log[v * m..(v + 1) * m]) {
            *d = l.exp();
        }
        normalise(dst);
    }
    let mut c2v = vec![0.0; ne * m];
    let max_deg = (0..code.r()).map(|c| code.check_degree(c)).max().unwrap_or(0);
    let mut fwd = vec![0.0; (max_deg + 1) * m];
    let mut bwd = vec![0.0; (max_deg + 1) * m];
    let mut q = vec![0.0; max_deg * m];
    let mut tmp = vec![0.0; m];
    let mut post = vec![0.0; m];
    let mut symbols = vec![0u32; n];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=max_iter {
        iterations = it;
        for c in 0..code.r() {
            let edges = code.check_edges(c);
            let d = edges.len();
            // q_j(a) = P(w_j x_j = a)
            for (j, e) in edges.clone().enumerate() {
                let w = code.edge_weight(e);
                let src = &v2c[e * m..(e + 1) * m];
                for a in 0..m {
                    let x = if w == 1 { a } else { (m - a) & (m - 1) };
                    q[j * m + a] = src[x];
                }
            }
            fwd[..m].fill(0.0);
            fwd[0] = 1.0;
            for j in 0..d {
                let (head, tail) = fwd.split_at_mut((j + 1) * m);
                convolve(&head[j * m..], &q[j * m..(j + 1) * m], &mut tail[..m]);
            }
            bwd[d * m..(d + 1) * m].fill(0.0);
            bwd[d * m] = 1.0;
            for j in (0..d).rev() {
                let (head, tail) = bwd.split_at_mut((j + 1) * m);
                convolve(&tail[..m], &q[j * m..(j + 1) * m], &mut head[j * m..]);
            }
            for (j, e) in edges.enumerate() {
                // S = sum of the other terms; the constraint forces w_j x_j = -S
                convolve(&fwd[j * m..(j + 1) * m], &bwd[(j + 1) * m..(j + 2) * m], &mut tmp);
                let w = code.edge_weight(e);
                let dst = &mut c2v[e * m..(e + 1) * m];
                for (a, dv) in dst.iter_mut().enumerate() {
                    let s = if w == 1 { (m - a) & (m - 1) } else { a };
                    *dv = tmp[s];
                }
                normalise(dst);
                for v in dst.iter_mut() {
                    *v = v.max(PROB_FLOOR);
                }
            }
        }
        let mut tied = false;
        for v in 0..n {
            post.copy_from_slice(&ch_log[v * m..(v + 1) * m]);
            for &e in code.var_edges(v) {
                for (p, &cv) in post.iter_mut().zip(&c2v[e * m..(e + 1) * m]) {
                    *p += cv.ln();
                }
            }
            for &e in code.var_edges(v) {
                let dst = &mut v2c[e * m..(e + 1) * m];
                let mut max = f64::NEG_INFINITY;
                for (a, dv) in dst.iter_mut().enumerate() {
                    *dv = post[a] - c2v[e * m + a].ln();
                    max = max.max(*dv);
                }
                for dv in dst.iter_mut() {
                    *dv = (*dv - max).exp();
                }
                normalise(dst);
            }
            let mut best = 0;
            for a in 1..m {
                if post[a] > post[best] {
                    best = a;
                }
            }
            tied |= (0..m).any(|a| a != best && post[a] == post[best]);
            symbols[v] = best as u32;
        }
        if !tied && code.is_codeword(&symbols) {
            converged = true;
            break;
        }
    }
    Ok(Decoded {
        symbols,
        converged,
        iterations,
    })
}
