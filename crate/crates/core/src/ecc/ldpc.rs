//! Seeded LDPC construction, systematic encoding and normalized min-sum decoding.
//!
//! Generated codes have the parity-check layout `H = [A | T]` where `T` is a
//! dual-diagonal (staircase) `m x m` block and `A` has column weight
//! `min(3, m)`. `T` is lower triangular with a unit diagonal, so `H` always has
//! full row rank and the parity bits follow from an accumulator. Columns of `A`
//! are placed so that no two columns share two rows, which rules out 4-cycles
//! whenever `m` is large enough for that to be possible.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Extrinsic scale factor of the normalized min-sum check update.
pub const MIN_SUM_SCALE: f64 = 0.75;

const INFO_COLUMN_WEIGHT: usize = 3;
const PLACEMENT_ATTEMPTS: usize = 64;

/// Sparse parity-check matrix stored by rows (check -> variable indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheck {
    n: usize,
    rows: Vec<Vec<u32>>,
}

impl ParityCheck {
    /// Builds a matrix from per-check variable lists. Each list is sorted and
    /// must contain distinct indices below `n`.
    pub fn from_rows(n: usize, mut rows: Vec<Vec<u32>>) -> Result<Self> {
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "check {r} lists a variable twice"
                )));
            }
            if row.last().is_some_and(|&v| v as usize >= n) {
                return Err(Error::InvalidArgument(format!(
                    "check {r} references a variable outside 0..{n}"
                )));
            }
        }
        Ok(Self { n, rows })
    }

    /// Codeword length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Column view (variable -> check indices, ascending).
    pub fn columns(&self) -> Vec<Vec<u32>> {
        let mut cols = vec![Vec::new(); self.n];
        for (r, row) in self.rows.iter().enumerate() {
            for &v in row {
                cols[v as usize].push(r as u32);
            }
        }
        cols
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &v| acc ^ bits[v as usize]) == 0)
    }

    /// Counts pairs of columns sharing two rows. Each such pair closes a
    /// cycle of length 4 in the Tanner graph.
    pub fn four_cycles(&self) -> usize {
        let mut keys = Vec::new();
        for col in self.columns() {
            for i in 0..col.len() {
                for j in i + 1..col.len() {
                    keys.push(pair_key(col[i], col[j]));
                }
            }
        }
        keys.sort_unstable();
        keys.chunk_by(|a, b| a == b)
            .map(|run| run.len() * (run.len() - 1) / 2)
            .sum()
    }

    /// GF(2) rank, by dense elimination.
    pub fn rank(&self) -> usize {
        let mut dense = DenseRows::from_sparse(self);
        dense.eliminate().len()
    }
}

fn pair_key(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

/// Flattened Tanner graph used by the decoder.
#[derive(Debug, Clone)]
struct TannerGraph {
    check_start: Vec<u32>,
    edge_var: Vec<u32>,
    var_start: Vec<u32>,
    var_edges: Vec<u32>,
}

impl TannerGraph {
    fn new(h: &ParityCheck) -> Self {
        let mut check_start = Vec::with_capacity(h.m() + 1);
        let mut edge_var = Vec::with_capacity(h.edge_count());
        check_start.push(0);
        for row in h.rows() {
            edge_var.extend_from_slice(row);
            check_start.push(edge_var.len() as u32);
        }
        let mut degree = vec![0u32; h.n()];
        for &v in &edge_var {
            degree[v as usize] += 1;
        }
        let mut var_start = Vec::with_capacity(h.n() + 1);
        var_start.push(0u32);
        for d in &degree {
            let last = *var_start.last().unwrap();
            var_start.push(last + d);
        }
        let mut fill = var_start[..h.n()].to_vec();
        let mut var_edges = vec![0u32; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v as usize] as usize] = e as u32;
            fill[v as usize] += 1;
        }
        Self {
            check_start,
            edge_var,
            var_start,
            var_edges,
        }
    }
}

#[derive(Debug, Clone)]
enum Encoder {
    /// `H = [A | T]` with staircase `T`; info occupies the first `k` positions.
    Staircase { k: usize },
    /// Reduced row echelon form of an arbitrary full-rank `H`.
    Dense {
        info_positions: Vec<u32>,
        /// (pivot column, non-pivot columns of that row)
        pivots: Vec<(u32, Vec<u32>)>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct LdpcCode {
    h: ParityCheck,
    graph: TannerGraph,
    encoder: Encoder,
}

impl LdpcCode {
    pub(crate) fn generate(n: usize, k: usize, seed: u64) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::Construction(format!(
                "codeword length n={n} must be even"
            )));
        }
        if k == 0 || k >= n {
            return Err(Error::Construction(format!(
                "need 0 < k < n, got k={k}, n={n}"
            )));
        }
        if n > u32::MAX as usize {
            return Err(Error::Construction(format!("n={n} exceeds u32 indexing")));
        }
        let m = n - k;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); m];
        let mut degree = vec![0u32; m];
        let mut used_pairs = BTreeSet::new();
        // staircase block
        for j in 0..m {
            rows[j].push((k + j) as u32);
            if j + 1 < m {
                rows[j + 1].push((k + j) as u32);
                used_pairs.insert(pair_key(j as u32, (j + 1) as u32));
            }
        }
        let w = INFO_COLUMN_WEIGHT.min(m);
        let mut chosen = Vec::with_capacity(w);
        let mut best = Vec::with_capacity(w);
        for col in 0..k {
            let mut best_conflicts = usize::MAX;
            for _ in 0..PLACEMENT_ATTEMPTS {
                chosen.clear();
                while chosen.len() < w {
                    let r = pick_light_row(&mut rng, &degree, &chosen);
                    chosen.push(r);
                }
                let mut conflicts = 0;
                for i in 0..w {
                    for j in i + 1..w {
                        if used_pairs.contains(&pair_key(chosen[i], chosen[j])) {
                            conflicts += 1;
                        }
                    }
                }
                if conflicts < best_conflicts {
                    best_conflicts = conflicts;
                    best.clone_from(&chosen);
                }
                if conflicts == 0 {
                    break;
                }
            }
            for i in 0..w {
                for j in i + 1..w {
                    used_pairs.insert(pair_key(best[i], best[j]));
                }
                degree[best[i] as usize] += 1;
                rows[best[i] as usize].push(col as u32);
            }
        }
        let h = ParityCheck::from_rows(n, rows)?;
        Ok(Self {
            graph: TannerGraph::new(&h),
            encoder: Encoder::Staircase { k },
            h,
        })
    }

    pub(crate) fn from_parity_check(h: ParityCheck) -> Result<Self> {
        let n = h.n();
        let m = h.m();
        if m == 0 || m >= n {
            return Err(Error::Construction(format!(
                "parity-check matrix must have 0 < m < n, got m={m}, n={n}"
            )));
        }
        let k = n - m;
        let encoder = if is_staircase(&h, k) {
            Encoder::Staircase { k }
        } else {
            let mut dense = DenseRows::from_sparse(&h);
            let pivot_cols = dense.eliminate();
            if pivot_cols.len() != m {
                return Err(Error::Construction(format!(
                    "parity-check matrix has rank {} < m={m}",
                    pivot_cols.len()
                )));
            }
            let mut is_pivot = vec![false; n];
            for &p in &pivot_cols {
                is_pivot[p] = true;
            }
            let info_positions: Vec<u32> =
                (0..n).filter(|&c| !is_pivot[c]).map(|c| c as u32).collect();
            let pivots = pivot_cols
                .iter()
                .enumerate()
                .map(|(r, &p)| {
                    let others = info_positions
                        .iter()
                        .copied()
                        .filter(|&c| dense.get(r, c as usize))
                        .collect();
                    (p as u32, others)
                })
                .collect();
            Encoder::Dense {
                info_positions,
                pivots,
            }
        };
        Ok(Self {
            graph: TannerGraph::new(&h),
            encoder,
            h,
        })
    }

    pub(crate) fn parity_check(&self) -> &ParityCheck {
        &self.h
    }

    pub(crate) fn encode(&self, info: &[u8]) -> Vec<u8> {
        let n = self.h.n();
        match &self.encoder {
            Encoder::Staircase { k } => {
                let mut cw = vec![0u8; n];
                cw[..*k].copy_from_slice(info);
                let mut acc = 0u8;
                for (j, row) in self.h.rows().iter().enumerate() {
                    let s = row
                        .iter()
                        .take_while(|&&v| (v as usize) < *k)
                        .fold(0u8, |a, &v| a ^ info[v as usize]);
                    acc ^= s;
                    cw[k + j] = acc;
                }
                cw
            }
            Encoder::Dense {
                info_positions,
                pivots,
            } => {
                let mut cw = vec![0u8; n];
                for (&pos, &b) in info_positions.iter().zip(info) {
                    cw[pos as usize] = b;
                }
                for (p, others) in pivots {
                    cw[*p as usize] = others.iter().fold(0u8, |a, &c| a ^ cw[c as usize]);
                }
                cw
            }
        }
    }

    pub(crate) fn extract_info(&self, codeword: &[u8], out: &mut Vec<u8>) {
        out.clear();
        match &self.encoder {
            Encoder::Staircase { k } => out.extend_from_slice(&codeword[..*k]),
            Encoder::Dense { info_positions, .. } => {
                out.extend(info_positions.iter().map(|&p| codeword[p as usize]))
            }
        }
    }

    /// Normalized min-sum with a flooding schedule. Returns the hard decision,
    /// whether all checks were satisfied, and the number of iterations run.
    pub(crate) fn min_sum(&self, llr: &[f64], max_iters: usize) -> (Vec<u8>, bool, usize) {
        let g = &self.graph;
        let n = self.h.n();
        let mut posterior = llr.to_vec();
        let mut hard: Vec<u8> = posterior.iter().map(|&l| u8::from(l < 0.0)).collect();
        if self.h.syndrome_ok(&hard) {
            return (hard, true, 0);
        }
        let edges = g.edge_var.len();
        let mut c2v = vec![0.0f64; edges];
        let mut v2c = vec![0.0f64; edges];
        for iter in 1..=max_iters {
            for (v, &post) in posterior.iter().enumerate() {
                let (a, b) = (g.var_start[v] as usize, g.var_start[v + 1] as usize);
                for &e in &g.var_edges[a..b] {
                    v2c[e as usize] = post - c2v[e as usize];
                }
            }
            for c in 0..self.h.m() {
                let (a, b) = (g.check_start[c] as usize, g.check_start[c + 1] as usize);
                let mut min1 = f64::INFINITY;
                let mut min2 = f64::INFINITY;
                let mut min_edge = a;
                let mut negative = false;
                for (e, &msg) in v2c[a..b].iter().enumerate() {
                    let mag = msg.abs();
                    negative ^= msg < 0.0;
                    if mag < min1 {
                        min2 = min1;
                        min1 = mag;
                        min_edge = a + e;
                    } else if mag < min2 {
                        min2 = mag;
                    }
                }
                for e in a..b {
                    let mag = if e == min_edge { min2 } else { min1 };
                    let mag = if mag.is_finite() { mag } else { 0.0 };
                    let sign_neg = negative ^ (v2c[e] < 0.0);
                    let out = MIN_SUM_SCALE * mag;
                    c2v[e] = if sign_neg { -out } else { out };
                }
            }
            for v in 0..n {
                let (a, b) = (g.var_start[v] as usize, g.var_start[v + 1] as usize);
                let sum: f64 = g.var_edges[a..b].iter().map(|&e| c2v[e as usize]).sum();
                posterior[v] = llr[v] + sum;
                hard[v] = u8::from(posterior[v] < 0.0);
            }
            if self.h.syndrome_ok(&hard) {
                return (hard, true, iter);
            }
        }
        (hard, false, max_iters)
    }
}

fn pick_light_row(rng: &mut ChaCha8Rng, degree: &[u32], taken: &[u32]) -> u32 {
    let m = degree.len() as u32;
    loop {
        let mut best: Option<u32> = None;
        for _ in 0..3 {
            let r = rng.random_range(0..m);
            if taken.contains(&r) {
                continue;
            }
            if best.is_none_or(|b| degree[r as usize] < degree[b as usize]) {
                best = Some(r);
            }
        }
        if let Some(r) = best {
            return r;
        }
    }
}

fn is_staircase(h: &ParityCheck, k: usize) -> bool {
    let m = h.m();
    let cols = h.columns();
    (0..m).all(|j| {
        let col = &cols[k + j];
        if j + 1 < m {
            col.as_slice() == [j as u32, (j + 1) as u32]
        } else {
            col.as_slice() == [j as u32]
        }
    })
}

/// Dense GF(2) rows packed into 64-bit words.
struct DenseRows {
    words: usize,
    data: Vec<u64>,
    rows: usize,
    n: usize,
}

impl DenseRows {
    fn from_sparse(h: &ParityCheck) -> Self {
        let words = h.n().div_ceil(64);
        let mut data = vec![0u64; words * h.m()];
        for (r, row) in h.rows().iter().enumerate() {
            for &v in row {
                data[r * words + v as usize / 64] |= 1u64 << (v % 64);
            }
        }
        Self {
            words,
            data,
            rows: h.m(),
            n: h.n(),
        }
    }

    fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.words + c / 64] >> (c % 64) & 1 == 1
    }

    fn xor_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        for i in 0..w {
            let s = self.data[src * w + i];
            self.data[dst * w + i] ^= s;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words;
        for i in 0..w {
            self.data.swap(a * w + i, b * w + i);
        }
    }

    /// Reduced row echelon form, choosing pivots from the rightmost columns
    /// first so that free (information) positions gather at the front.
    /// Returns the pivot column of each leading row.
    fn eliminate(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in (0..self.n).rev() {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(r, p);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row(i, r);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }
}
