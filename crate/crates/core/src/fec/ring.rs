//! Sparse parity-check matrices over `Z_M` with `±1` weights, alist I/O and a
//! systematic encoder.
//!
//! The ring modulus is a power of two no larger than 256, so all arithmetic
//! is carried out on `u8` with wrapping operations and reduced modulo `M` at
//! the end (`M` divides 256).

use std::io::{BufRead, Write};
use std::ops::Range;

use super::FecError;

pub const MAX_MODULUS: u32 = 256;

/// Sparse parity-check matrix. Edges are stored grouped by check, and each
/// variable keeps the list of its edge ids.
#[derive(Debug, Clone, PartialEq)]
pub struct RingParityCheck {
    n: usize,
    r: usize,
    modulus: u32,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    edge_weight: Vec<i8>,
    var_ptr: Vec<usize>,
    var_edges: Vec<usize>,
}

pub(crate) fn check_modulus(modulus: u32) -> Result<(), FecError> {
    if modulus < 2 || modulus > MAX_MODULUS || !modulus.is_power_of_two() {
        return Err(FecError::InvalidParameters(format!(
            "ring modulus must be a power of two in [2, {MAX_MODULUS}], got {modulus}"
        )));
    }
    Ok(())
}

impl RingParityCheck {
    /// Builds the matrix from `(check, variable, weight)` triples.
    pub fn from_edges(
        n: usize,
        r: usize,
        modulus: u32,
        edges: &[(usize, usize, i8)],
    ) -> Result<Self, FecError> {
        check_modulus(modulus)?;
        let mut sorted = edges.to_vec();
        for &(c, v, w) in &sorted {
            if c >= r || v >= n {
                return Err(FecError::InvalidParameters(format!(
                    "edge ({c}, {v}) outside a {r} x {n} matrix"
                )));
            }
            if w != 1 && w != -1 {
                return Err(FecError::InvalidParameters(format!("edge weight {w} is not ±1")));
            }
        }
        sorted.sort_unstable();
        if sorted.windows(2).any(|p| p[0].0 == p[1].0 && p[0].1 == p[1].1) {
            return Err(FecError::InvalidParameters("duplicate edge".into()));
        }
        let mut check_ptr = vec![0usize; r + 1];
        for &(c, _, _) in &sorted {
            check_ptr[c + 1] += 1;
        }
        for c in 0..r {
            check_ptr[c + 1] += check_ptr[c];
        }
        let edge_var: Vec<usize> = sorted.iter().map(|e| e.1).collect();
        let edge_weight = sorted
            .iter()
            .map(|e| if modulus == 2 { 1 } else { e.2 })
            .collect();
        let mut var_ptr = vec![0usize; n + 1];
        for &v in &edge_var {
            var_ptr[v + 1] += 1;
        }
        for v in 0..n {
            var_ptr[v + 1] += var_ptr[v];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0usize; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        Ok(RingParityCheck {
            n,
            r,
            modulus,
            check_ptr,
            edge_var,
            edge_weight,
            var_ptr,
            var_edges,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn modulus(&self) -> u32 {
        self.modulus
    }
    pub fn num_edges(&self) -> usize {
        self.edge_var.len()
    }

    /// Edge ids of check `c`.
    #[inline]
    pub fn check_edges(&self, c: usize) -> Range<usize> {
        self.check_ptr[c]..self.check_ptr[c + 1]
    }

    /// Edge ids of variable `v`.
    #[inline]
    pub fn var_edges(&self, v: usize) -> &[usize] {
        &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]]
    }

    #[inline]
    pub fn edge_var(&self, e: usize) -> usize {
        self.edge_var[e]
    }

    #[inline]
    pub fn edge_weight(&self, e: usize) -> i8 {
        self.edge_weight[e]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_ptr[v + 1] - self.var_ptr[v]
    }

    pub fn check_degree(&self, c: usize) -> usize {
        self.check_ptr[c + 1] - self.check_ptr[c]
    }

    /// `(check, variable, weight)` triples in check order.
    pub fn edges(&self) -> Vec<(usize, usize, i8)> {
        (0..self.r)
            .flat_map(|c| {
                self.check_edges(c)
                    .map(move |e| (c, self.edge_var[e], self.edge_weight[e]))
            })
            .collect()
    }

    /// `H x mod M`.
    pub fn syndrome(&self, x: &[u32]) -> Vec<u32> {
        assert_eq!(x.len(), self.n);
        let m = self.modulus as i64;
        (0..self.r)
            .map(|c| {
                let s: i64 = self
                    .check_edges(c)
                    .map(|e| self.edge_weight[e] as i64 * x[self.edge_var[e]] as i64)
                    .sum();
                s.rem_euclid(m) as u32
            })
            .collect()
    }

    pub fn is_codeword(&self, x: &[u32]) -> bool {
        self.syndrome(x).iter().all(|&s| s == 0)
    }

    /// True when no two variables share more than one check.
    pub fn has_girth_at_least_6(&self) -> bool {
        let mut last_seen = vec![usize::MAX; self.n];
        for v in 0..self.n {
            for &e in self.var_edges(v) {
                let c = self.check_of_edge(e);
                for f in self.check_edges(c) {
                    let u = self.edge_var[f];
                    if u == v {
                        continue;
                    }
                    if last_seen[u] == v {
                        return false;
                    }
                    last_seen[u] = v;
                }
            }
        }
        true
    }

    /// Check owning edge `e`.
    pub fn check_of_edge(&self, e: usize) -> usize {
        self.check_ptr.partition_point(|&p| p <= e) - 1
    }

    /// Writes the alist form. The first line is a header
    /// `# ring-alist n=<n> r=<r> M=<M>`; then the standard alist body
    /// (sizes, maximum degrees, degree lists, 1-based column and row
    /// adjacency, zero padded); then one line per check listing the `±1`
    /// weights in the same order as that check's row adjacency line.
    pub fn write_alist<W: Write>(&self, mut w: W) -> Result<(), FecError> {
        let max_dv = (0..self.n).map(|v| self.var_degree(v)).max().unwrap_or(0);
        let max_dc = (0..self.r).map(|c| self.check_degree(c)).max().unwrap_or(0);
        writeln!(w, "# ring-alist n={} r={} M={}", self.n, self.r, self.modulus)?;
        writeln!(w, "{} {}", self.n, self.r)?;
        writeln!(w, "{max_dv} {max_dc}")?;
        let line = |v: Vec<String>| v.join(" ");
        writeln!(
            w,
            "{}",
            line((0..self.n).map(|v| self.var_degree(v).to_string()).collect())
        )?;
        writeln!(
            w,
            "{}",
            line((0..self.r).map(|c| self.check_degree(c).to_string()).collect())
        )?;
        for v in 0..self.n {
            let mut checks: Vec<usize> =
                self.var_edges(v).iter().map(|&e| self.check_of_edge(e) + 1).collect();
            checks.sort_unstable();
            checks.resize(max_dv, 0);
            writeln!(w, "{}", line(checks.iter().map(|c| c.to_string()).collect()))?;
        }
        for c in 0..self.r {
            let mut vars: Vec<usize> = self.check_edges(c).map(|e| self.edge_var[e] + 1).collect();
            vars.resize(max_dc, 0);
            writeln!(w, "{}", line(vars.iter().map(|v| v.to_string()).collect()))?;
        }
        for c in 0..self.r {
            let mut ws: Vec<String> = self
                .check_edges(c)
                .map(|e| format!("{:+}", self.edge_weight[e]))
                .collect();
            ws.resize(max_dc, "0".into());
            writeln!(w, "{}", line(ws))?;
        }
        Ok(())
    }

    /// Reads the format produced by [`write_alist`](Self::write_alist). A
    /// plain alist file (no header, no weight block) is accepted as a binary
    /// matrix with unit weights.
    pub fn read_alist<R: BufRead>(reader: R) -> Result<Self, FecError> {
        let mut lines = Vec::new();
        for (i, l) in reader.lines().enumerate() {
            let l = l?;
            let t = l.trim().to_string();
            if !t.is_empty() {
                lines.push((i + 1, t));
            }
        }
        let mut modulus = 2u32;
        let mut pos = 0;
        if let Some((no, first)) = lines.first() {
            if let Some(rest) = first.strip_prefix('#') {
                for tok in rest.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("M=") {
                        modulus = v.parse().map_err(|_| FecError::Alist {
                            line: *no,
                            msg: format!("bad modulus {v:?}"),
                        })?;
                    }
                }
                pos = 1;
            }
        }
        let next_nums = |pos: &mut usize| -> Result<(usize, Vec<i64>), FecError> {
            let (no, text) = lines.get(*pos).ok_or(FecError::Alist {
                line: 0,
                msg: "unexpected end of file".into(),
            })?;
            *pos += 1;
            let nums = text
                .split_whitespace()
                .map(|t| t.parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| FecError::Alist {
                    line: *no,
                    msg: e.to_string(),
                })?;
            Ok((*no, nums))
        };
        let (no, sizes) = next_nums(&mut pos)?;
        if sizes.len() != 2 || sizes[0] < 0 || sizes[1] < 0 {
            return Err(FecError::Alist {
                line: no,
                msg: "expected `n r`".into(),
            });
        }
        let (n, r) = (sizes[0] as usize, sizes[1] as usize);
        next_nums(&mut pos)?;
        next_nums(&mut pos)?;
        let (_, row_deg) = next_nums(&mut pos)?;
        if row_deg.len() != r {
            return Err(FecError::Alist {
                line: no,
                msg: "row degree list length differs from r".into(),
            });
        }
        for _ in 0..n {
            next_nums(&mut pos)?;
        }
        let mut rows = Vec::with_capacity(r);
        for c in 0..r {
            let (no, vars) = next_nums(&mut pos)?;
            let deg = row_deg[c] as usize;
            if vars.len() < deg || vars[..deg].iter().any(|&v| v < 1 || v as usize > n) {
                return Err(FecError::Alist {
                    line: no,
                    msg: "bad row adjacency".into(),
                });
            }
            rows.push(vars[..deg].iter().map(|&v| v as usize - 1).collect::<Vec<_>>());
        }
        let mut edges = Vec::new();
        let has_weights = pos < lines.len();
        for (c, vars) in rows.iter().enumerate() {
            let weights = if has_weights {
                let (no, ws) = next_nums(&mut pos)?;
                if ws.len() < vars.len() {
                    return Err(FecError::Alist {
                        line: no,
                        msg: "weight line shorter than row".into(),
                    });
                }
                ws
            } else {
                vec![1; vars.len()]
            };
            for (j, &v) in vars.iter().enumerate() {
                edges.push((c, v, weights[j] as i8));
            }
        }
        RingParityCheck::from_edges(n, r, modulus, &edges)
    }

    /// Dense `r x n` matrix with entries reduced into `[0, M)` (as `u8`, mod 256).
    fn dense(&self) -> Vec<Vec<u8>> {
        let mut rows = vec![vec![0u8; self.n]; self.r];
        for (c, row) in rows.iter_mut().enumerate() {
            for e in self.check_edges(c) {
                row[self.edge_var[e]] = self.edge_weight[e] as u8;
            }
        }
        rows
    }
}

/// Inverse of an odd `u` modulo 256.
fn unit_inverse(u: u8) -> u8 {
    debug_assert!(u & 1 == 1);
    let mut x = u;
    for _ in 0..3 {
        x = x.wrapping_mul(2u8.wrapping_sub(u.wrapping_mul(x)));
    }
    x
}

/// Systematic encoder obtained by Gaussian elimination with unit pivots.
/// Row `i` of the echelon form fixes parity position `pivots[i]` from
/// positions whose values are already known when rows are processed last to
/// first.
#[derive(Debug, Clone, PartialEq)]
struct Encoder {
    info_positions: Vec<usize>,
    pivots: Vec<usize>,
    pivot_inv: Vec<u8>,
    rows: Vec<Vec<(usize, u8)>>,
}

impl Encoder {
    /// Fails when the matrix is not of full rank modulo 2 unless
    /// `allow_deficient` is set, in which case dependent rows are dropped.
    fn build(h: &RingParityCheck, allow_deficient: bool) -> Result<Self, FecError> {
        let mask = (h.modulus - 1) as u8;
        let mut rows = h.dense();
        let n = h.n;
        let mut pivots = Vec::new();
        let mut pivot_inv = Vec::new();
        let mut rank = 0;
        // Pivot columns taken from the right so information sits at the front.
        for col in (0..n).rev() {
            if rank == rows.len() {
                break;
            }
            let Some(p) = (rank..rows.len()).find(|&i| rows[i][col] & 1 == 1) else {
                continue;
            };
            rows.swap(rank, p);
            let inv = unit_inverse(rows[rank][col]);
            let (head, tail) = rows.split_at_mut(rank + 1);
            let prow = &head[rank];
            for row in tail.iter_mut() {
                let f = row[col].wrapping_mul(inv) & mask;
                if f != 0 {
                    for (a, &b) in row.iter_mut().zip(prow.iter()) {
                        *a = a.wrapping_sub(f.wrapping_mul(b));
                    }
                }
            }
            pivots.push(col);
            pivot_inv.push(inv);
            rank += 1;
        }
        for row in &rows[rank..] {
            if row.iter().any(|&v| v & mask != 0) && !allow_deficient {
                return Err(FecError::NotEncodable { modulus: h.modulus });
            }
        }
        if rank < h.r && !allow_deficient {
            return Err(FecError::NotEncodable { modulus: h.modulus });
        }
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions = (0..n).filter(|&j| !is_pivot[j]).collect();
        let sparse = rows[..rank]
            .iter()
            .zip(&pivots)
            .map(|(row, &p)| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, &v)| j != p && v & mask != 0)
                    .map(|(j, &v)| (j, v & mask))
                    .collect()
            })
            .collect();
        Ok(Encoder {
            info_positions,
            pivots,
            pivot_inv,
            rows: sparse,
        })
    }

    fn encode(&self, info: &[u32], n: usize, modulus: u32) -> Vec<u32> {
        let mask = (modulus - 1) as u8;
        let mut x = vec![0u8; n];
        for (&pos, &s) in self.info_positions.iter().zip(info) {
            x[pos] = s as u8;
        }
        for i in (0..self.pivots.len()).rev() {
            let s = self.rows[i]
                .iter()
                .fold(0u8, |acc, &(j, v)| acc.wrapping_add(v.wrapping_mul(x[j])));
            x[self.pivots[i]] = 0u8.wrapping_sub(s).wrapping_mul(self.pivot_inv[i]) & mask;
        }
        x.into_iter().map(u32::from).collect()
    }
}

/// An encodable LDPC code over `Z_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RingLdpcCode {
    h: RingParityCheck,
    enc: Encoder,
}

impl RingLdpcCode {
    /// Requires a parity part invertible over `Z_M`.
    pub fn new(h: RingParityCheck) -> Result<Self, FecError> {
        let enc = Encoder::build(&h, false)?;
        Ok(RingLdpcCode { h, enc })
    }

    /// Accepts rank-deficient matrices; `k` grows by the deficiency.
    pub(crate) fn new_allow_deficient(h: RingParityCheck) -> Result<Self, FecError> {
        let enc = Encoder::build(&h, true)?;
        Ok(RingLdpcCode { h, enc })
    }

    pub fn parity_check(&self) -> &RingParityCheck {
        &self.h
    }
    pub fn n(&self) -> usize {
        self.h.n
    }
    pub fn k(&self) -> usize {
        self.enc.info_positions.len()
    }
    pub fn modulus(&self) -> u32 {
        self.h.modulus
    }
    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }
    /// Codeword positions carrying the information symbols, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.enc.info_positions
    }

    /// Systematic encoding of `k` ring symbols.
    pub fn encode(&self, info: &[u32]) -> Result<Vec<u32>, FecError> {
        if info.len() != self.k() {
            return Err(FecError::Length {
                expected: self.k(),
                got: info.len(),
            });
        }
        if let Some(&value) = info.iter().find(|&&s| s >= self.h.modulus) {
            return Err(FecError::SymbolRange {
                value,
                modulus: self.h.modulus,
            });
        }
        Ok(self.enc.encode(info, self.h.n, self.h.modulus))
    }

    /// Information symbols read back from a codeword.
    pub fn extract_info(&self, codeword: &[u32]) -> Vec<u32> {
        self.enc.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RingParityCheck {
        // two checks over five variables
        RingParityCheck::from_edges(
            5,
            2,
            4,
            &[(0, 0, 1), (0, 1, -1), (0, 2, 1), (1, 2, 1), (1, 3, 1), (1, 4, -1)],
        )
        .unwrap()
    }

    #[test]
    fn adjacency_is_consistent() {
        let h = small();
        assert_eq!(h.num_edges(), 6);
        assert_eq!(h.var_degree(2), 2);
        assert_eq!(h.check_degree(1), 3);
        for e in 0..h.num_edges() {
            let c = h.check_of_edge(e);
            assert!(h.check_edges(c).contains(&e));
            assert!(h.var_edges(h.edge_var(e)).contains(&e));
        }
        assert!(h.has_girth_at_least_6());
    }

    #[test]
    fn syndrome_uses_weights() {
        let h = small();
        // x0 - x1 + x2 = 1 - 3 + 2 = 0, x2 + x3 - x4 = 2 + 1 - 3 = 0
        assert!(h.is_codeword(&[1, 3, 2, 1, 3]));
        assert_eq!(h.syndrome(&[1, 0, 0, 0, 0]), vec![1, 0]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(RingParityCheck::from_edges(3, 1, 4, &[(0, 0, 2)]).is_err());
        assert!(RingParityCheck::from_edges(3, 1, 4, &[(0, 0, 1), (0, 0, -1)]).is_err());
        assert!(RingParityCheck::from_edges(3, 1, 6, &[(0, 0, 1)]).is_err());
        assert!(RingParityCheck::from_edges(3, 1, 4, &[(1, 0, 1)]).is_err());
    }

    #[test]
    fn detects_four_cycle() {
        let h = RingParityCheck::from_edges(
            3,
            2,
            2,
            &[(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1), (1, 2, 1)],
        )
        .unwrap();
        assert!(!h.has_girth_at_least_6());
    }

    #[test]
    fn unit_inverses() {
        for u in (1..=255u8).step_by(2) {
            assert_eq!(u.wrapping_mul(unit_inverse(u)), 1);
        }
    }

    #[test]
    fn encoder_produces_codewords() {
        let code = RingLdpcCode::new(small()).unwrap();
        assert_eq!(code.k(), 3);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let x = code.encode(&[a, b, c]).unwrap();
                    assert!(code.parity_check().is_codeword(&x));
                    assert_eq!(code.extract_info(&x), vec![a, b, c]);
                }
            }
        }
        assert!(code.encode(&[0, 0]).is_err());
        assert!(code.encode(&[0, 0, 4]).is_err());
    }

    #[test]
    fn even_only_parity_part_is_rejected() {
        // x0 + x1 over Z_4 and x0 + x1 again: rank 1 mod 2
        let h = RingParityCheck::from_edges(2, 2, 4, &[(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, -1)])
            .unwrap();
        assert!(matches!(
            RingLdpcCode::new(h.clone()),
            Err(FecError::NotEncodable { modulus: 4 })
        ));
        // over Z_2 the dependent row is simply dropped
        let b = RingParityCheck::from_edges(2, 2, 2, &[(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)])
            .unwrap();
        let code = RingLdpcCode::new_allow_deficient(b).unwrap();
        assert_eq!(code.k(), 1);
    }

    #[test]
    fn alist_round_trip() {
        let h = small();
        let mut buf = Vec::new();
        h.write_alist(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# ring-alist n=5 r=2 M=4\n5 2\n"));
        let back = RingParityCheck::read_alist(buf.as_slice()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn plain_alist_reads_as_binary() {
        let text = "3 1\n1 3\n1 1 1\n3\n1\n1\n1\n1 2 3\n";
        let h = RingParityCheck::read_alist(text.as_bytes()).unwrap();
        assert_eq!(h.modulus(), 2);
        assert!(h.is_codeword(&[1, 1, 0]));
        assert!(!h.is_codeword(&[1, 0, 0]));
    }

    #[test]
    fn malformed_alist_is_reported() {
        assert!(matches!(
            RingParityCheck::read_alist("3 x\n".as_bytes()),
            Err(FecError::Alist { line: 1, .. })
        ));
        assert!(RingParityCheck::read_alist("3 1\n1 3\n".as_bytes()).is_err());
    }
}
