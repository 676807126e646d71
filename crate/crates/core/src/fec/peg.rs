//! Progressive edge growth for regular `(dv, dc)` parity-check matrices.
//!
//! Edges are placed variable by variable. Each new edge goes to an available
//! check (degree below `dc`) that is as far as possible from the variable in
//! the current graph, then of lowest current degree, then first in a
//! seed-dependent check order. Placements that would close a 4-cycle are
//! refused, so the result has girth at least 6. When the last variables find
//! no admissible open check, an existing edge is moved onto an open check to
//! free a slot at a distant one.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use super::ring::{check_modulus, RingLdpcCode, RingParityCheck};
use super::FecError;
use crate::channel::stream_rng;

const UNREACHED: usize = usize::MAX;

/// Builds a regular `(dv, dc)` matrix over `Z_M` with `±1` weights drawn from
/// the seed (all `+1` for `M = 2`).
pub fn peg_construct(
    n: usize,
    dv: usize,
    dc: usize,
    modulus: u32,
    seed: u64,
) -> Result<RingParityCheck, FecError> {
    check_modulus(modulus)?;
    if dv == 0 || dc < 2 || n == 0 || (n * dv) % dc != 0 {
        return Err(FecError::InvalidParameters(format!(
            "need n * dv divisible by dc (n = {n}, dv = {dv}, dc = {dc})"
        )));
    }
    let r = n * dv / dc;
    if dv > r {
        return Err(FecError::InvalidParameters(format!(
            "dv = {dv} exceeds the number of checks {r}"
        )));
    }
    let mut rng = stream_rng(seed, 0x7065_6700);
    let mut rank: Vec<usize> = (0..r).collect();
    rank.shuffle(&mut rng);

    let mut check_vars: Vec<Vec<usize>> = vec![Vec::with_capacity(dc); r];
    let mut var_checks: Vec<Vec<usize>> = vec![Vec::with_capacity(dv); n];
    let mut dist = vec![UNREACHED; r];
    let mut var_seen = vec![usize::MAX; n];
    let mut queue = VecDeque::new();

    for v in 0..n {
        for k in 0..dv {
            // Breadth-first levels of checks around v; level 0 = its own checks.
            dist.fill(UNREACHED);
            queue.clear();
            var_seen[v] = v * dv + k;
            for &c in &var_checks[v] {
                dist[c] = 0;
                queue.push_back(c);
            }
            while let Some(c) = queue.pop_front() {
                for &u in &check_vars[c] {
                    if var_seen[u] == v * dv + k {
                        continue;
                    }
                    var_seen[u] = v * dv + k;
                    for &c2 in &var_checks[u] {
                        if dist[c2] == UNREACHED {
                            dist[c2] = dist[c] + 1;
                            queue.push_back(c2);
                        }
                    }
                }
            }
            // farther first (unreached counts as farthest), then lower degree,
            // then lower rank; distance 1 would close a 4-cycle
            let best = (0..r)
                .filter(|&c| check_vars[c].len() < dc && dist[c] >= 2)
                .min_by_key(|&c| (usize::MAX - dist[c], check_vars[c].len(), rank[c]));
            let c = match best {
                Some(c) => c,
                None => swap_in(v, &dist, &rank, dc, &mut check_vars, &mut var_checks)
                    .ok_or(FecError::GirthViolation { var: v, edge: k })?,
            };
            check_vars[c].push(v);
            var_checks[v].push(c);
        }
    }

    let mut edges = Vec::with_capacity(n * dv);
    for (v, checks) in var_checks.iter().enumerate() {
        for &c in checks {
            let w: i8 = if modulus == 2 || rng.random::<bool>() { 1 } else { -1 };
            edges.push((c, v, w));
        }
    }
    RingParityCheck::from_edges(n, r, modulus, &edges)
}

/// Whether edge `(a, c)` would close a 4-cycle: another variable of `c`
/// shares a further check with `a`.
fn closes_4cycle(a: usize, c: usize, check_vars: &[Vec<usize>], var_checks: &[Vec<usize>]) -> bool {
    check_vars[c].iter().any(|&w| {
        w != a && var_checks[w].iter().any(|&cw| cw != c && var_checks[a].contains(&cw))
    })
}

/// End-game repair when every open check is too close to `v`: moves an edge
/// `(u, c_far)` with `c_far` at distance at least 2 onto an open check, freeing
/// a slot of `c_far` for `v`. Returns `c_far` with the slot free.
fn swap_in(
    v: usize,
    dist: &[usize],
    rank: &[usize],
    dc: usize,
    check_vars: &mut [Vec<usize>],
    var_checks: &mut [Vec<usize>],
) -> Option<usize> {
    let r = check_vars.len();
    let mut open: Vec<usize> = (0..r).filter(|&c| check_vars[c].len() < dc).collect();
    open.sort_by_key(|&c| rank[c]);
    let mut far: Vec<usize> = (0..r)
        .filter(|&c| dist[c] >= 2 && check_vars[c].len() == dc)
        .collect();
    far.sort_by_key(|&c| (usize::MAX - dist[c], rank[c]));
    for &cf in &far {
        for idx in 0..check_vars[cf].len() {
            let u = check_vars[cf][idx];
            if u == v {
                continue;
            }
            for &co in &open {
                if check_vars[co].contains(&u) {
                    continue;
                }
                check_vars[cf].swap_remove(idx);
                let pos = var_checks[u].iter().position(|&c| c == cf).expect("edge present");
                var_checks[u][pos] = co;
                check_vars[co].push(u);
                let ok = !closes_4cycle(u, co, check_vars, var_checks)
                    && !closes_4cycle(v, cf, check_vars, var_checks);
                if ok {
                    return Some(cf);
                }
                check_vars[co].pop();
                var_checks[u][pos] = cf;
                check_vars[cf].push(u);
                let last = check_vars[cf].len() - 1;
                check_vars[cf].swap(idx, last);
            }
        }
    }
    None
}

/// Runs [`peg_construct`] with seeds `seed, seed + 1, ...` until the matrix
/// admits an encoder (full rank modulo 2 for `M > 2`; any binary matrix is
/// accepted with its rank deficiency absorbed into `k`).
pub fn peg_construct_encodable(
    n: usize,
    dv: usize,
    dc: usize,
    modulus: u32,
    seed: u64,
    max_tries: usize,
) -> Result<RingLdpcCode, FecError> {
    let mut last = FecError::NotEncodable { modulus };
    for t in 0..max_tries.max(1) as u64 {
        let h = match peg_construct(n, dv, dc, modulus, seed.wrapping_add(t)) {
            Ok(h) => h,
            Err(e @ FecError::GirthViolation { .. }) => {
                last = e;
                continue;
            }
            Err(e) => return Err(e),
        };
        let built = if modulus == 2 {
            RingLdpcCode::new_allow_deficient(h)
        } else {
            RingLdpcCode::new(h)
        };
        match built {
            Ok(code) => return Ok(code),
            Err(e) => last = e,
        }
    }
    Err(last)
}
