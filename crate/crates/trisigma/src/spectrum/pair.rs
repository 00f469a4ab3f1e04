//! The delta-constrained mode pairing in radial form.
//!
//! For integer triples k, l with equal component sums, the pairing behind
//! the quadratic form reduces (by the plane-wave expansion of the 2-d
//! delta) to the radial integral
//!
//! ```text
//! T(k, l) = int_0^inf J_{k1} J_{k2} J_{k3} J_{l1} J_{l2} J_{l3} (r) r dr,
//! ```
//!
//! normalized here with prefactor 1; the full pairing is
//! (2 pi)^5 (-1)^d T with d the common component sum. Unequal sums pair
//! to exactly zero (angular orthogonality).
//!
//! The integrand decays like r^{-2} with oscillation at integer
//! frequencies 2, 4, 6. Fixed Gauss-Legendre panels cover [0, R0]; the
//! tail is recovered by evaluating the truncated integral at four cut
//! points spaced exactly 2 pi apart and extrapolating the cubic model
//! B/R + C/R^2 + D/R^3 to R = infinity. The 2 pi spacing phase-locks the
//! oscillatory truncation remainders, so they are absorbed by the fitted
//! coefficients instead of polluting the extrapolated value. All
//! integrals of one family share a single node table sized to the largest
//! order, so identities that mix several pairings (weight transfer
//! between the two mode triples, matrix symmetry) are violated only at
//! the scale of the tail extrapolation error, not of the full quadrature.

use super::bessel::bessel_j_upto;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::sync::RwLock;

/// One evaluated pairing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairIntegral {
    pub k: [i64; 3],
    pub l: [i64; 3],
    pub value: f64,
    pub est_error: f64,
}

/// 10-point Gauss-Legendre nodes (positive half) and weights on [-1, 1].
const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Number of 2 pi tail windows used by the extrapolation.
const TAIL_WINDOWS: usize = 4;

/// Shared quadrature nodes with precomputed Bessel values of every order
/// up to `nmax`, plus a memoized store of evaluated integrals keyed by
/// the canonical (sorted absolute) order multiset.
pub struct PairCache {
    nmax: usize,
    r0: f64,
    /// cut radii R0 + 2 pi i, i = 1..=TAIL_WINDOWS
    cuts: [f64; TAIL_WINDOWS],
    nodes: Vec<f64>,
    /// quadrature weight times node radius (the measure r dr)
    weights_r: Vec<f64>,
    /// nodes strictly below cut i (prefix counts into `nodes`)
    cut_index: [usize; TAIL_WINDOWS + 1],
    /// bessel[order][node]
    bessel: Vec<Vec<f64>>,
    store: RwLock<HashMap<[usize; 6], (f64, f64)>>,
}

impl PairCache {
    /// Build the node and Bessel tables for orders up to `max_order`.
    ///
    /// The quadrature range R0 respects the slow phase drift of high-order
    /// Bessel products: the inverse-power tail model only converges once
    /// r clears the drift scale n^2/2 of the worst same-sign order pair,
    /// so the base grows quadratically with the largest order. Cost is
    /// linear in R0 and the per-family node table is built once, so even
    /// desk-scale assemblies stay in seconds.
    pub fn new(max_order: usize) -> Self {
        let base = (0.8 * (max_order * max_order) as f64).max(40.0);
        Self::with_base(base, max_order)
    }

    /// As [`PairCache::new`] with an explicit pre-tail range base:
    /// R0 = base + 2 max_order. Larger bases trade node count for tail
    /// accuracy (the extrapolation error falls roughly cubically in R0).
    pub fn with_base(base: f64, max_order: usize) -> Self {
        let r0 = base + 2.0 * max_order as f64;
        let mut cuts = [0.0; TAIL_WINDOWS];
        for (i, c) in cuts.iter_mut().enumerate() {
            *c = r0 + 2.0 * PI * (i as f64 + 1.0);
        }

        // Panel edges: ~0.5-wide panels up to r0, then 13 panels per
        // 2 pi window so edges land exactly on the cut radii.
        let mut edges = Vec::new();
        let n_main = (2.0 * r0).ceil() as usize;
        for i in 0..=n_main {
            edges.push(r0 * i as f64 / n_main as f64);
        }
        let mut cut_index = [0usize; TAIL_WINDOWS + 1];
        for w in 0..TAIL_WINDOWS {
            let lo = if w == 0 { r0 } else { cuts[w - 1] };
            for i in 1..=13usize {
                edges.push(lo + 2.0 * PI * i as f64 / 13.0);
            }
        }

        let mut nodes = Vec::new();
        let mut weights_r = Vec::new();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for i in 0..5 {
                for sign in [-1.0, 1.0] {
                    let x = c + sign * h * GL_X[i];
                    nodes.push(x);
                    weights_r.push(h * GL_W[i] * x);
                }
            }
        }
        // sort nodes ascending (each panel emitted its points unordered)
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
        let nodes: Vec<f64> = order.iter().map(|&i| nodes[i]).collect();
        let weights_r: Vec<f64> = order.iter().map(|&i| weights_r[i]).collect();

        cut_index[0] = nodes.partition_point(|&x| x < r0);
        for w in 0..TAIL_WINDOWS {
            cut_index[w + 1] = nodes.partition_point(|&x| x < cuts[w]);
        }

        let bessel_by_node: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|&x| bessel_j_upto(max_order, x))
            .collect();
        // transpose to bessel[order][node] for cache-friendly products
        let mut bessel = vec![vec![0.0f64; nodes.len()]; max_order + 1];
        for (ni, row) in bessel_by_node.iter().enumerate() {
            for (o, &v) in row.iter().enumerate() {
                bessel[o][ni] = v;
            }
        }

        PairCache {
            nmax: max_order,
            r0,
            cuts,
            nodes,
            weights_r,
            cut_index,
            bessel,
            store: RwLock::new(HashMap::new()),
        }
    }

    pub fn max_order(&self) -> usize {
        self.nmax
    }

    /// Pre-tail integration range R0.
    pub fn integration_range(&self) -> f64 {
        self.r0
    }

    /// Truncated integrals F(cut_i) for the six absolute orders, plus the
    /// plain trapezoid of everything (unused range beyond last cut is not
    /// evaluated).
    fn truncated_integrals(&self, orders: &[usize; 6]) -> [f64; TAIL_WINDOWS] {
        let b = &self.bessel;
        let o = orders;
        let mut partial = [0.0f64; TAIL_WINDOWS];
        let mut acc = 0.0f64;
        let mut seg = 0usize;
        for ni in 0..self.nodes.len() {
            while seg < TAIL_WINDOWS && ni == self.cut_index[seg + 1] {
                partial[seg] = acc;
                seg += 1;
            }
            let prod = b[o[0]][ni]
                * b[o[1]][ni]
                * b[o[2]][ni]
                * b[o[3]][ni]
                * b[o[4]][ni]
                * b[o[5]][ni];
            acc += self.weights_r[ni] * prod;
        }
        while seg < TAIL_WINDOWS {
            partial[seg] = acc;
            seg += 1;
        }
        partial
    }

    /// Evaluate the radial integral for nonnegative orders, returning
    /// (value, error estimate).
    fn eval_nonneg(&self, orders: &[usize; 6]) -> (f64, f64) {
        let f = self.truncated_integrals(orders);

        // Extrapolate W from W = F(E_i) + B/E_i + C/E_i^2 + D/E_i^3.
        let solve = |idx: &[usize]| -> f64 {
            let n = idx.len();
            let mut m = vec![vec![0.0f64; n + 1]; n];
            for (row, &i) in idx.iter().enumerate() {
                let x = 1.0 / self.cuts[i];
                m[row][0] = 1.0;
                for c in 1..n {
                    m[row][c] = -x.powi(c as i32);
                }
                m[row][n] = f[i];
            }
            gauss_solve(&mut m)[0]
        };
        let w_cubic = solve(&[0, 1, 2, 3]);
        let w_quad_a = solve(&[0, 1, 2]);
        let w_quad_b = solve(&[1, 2, 3]);

        let spread = (w_cubic - w_quad_a).abs().max((w_cubic - w_quad_b).abs());
        let rounding = 1e-14 * (1.0 + w_cubic.abs());
        (w_cubic, spread + rounding)
    }

    fn eval_cached(&self, key: [usize; 6]) -> (f64, f64) {
        if let Some(&v) = self.store.read().expect("cache lock").get(&key) {
            return v;
        }
        let v = self.eval_nonneg(&key);
        self.store.write().expect("cache lock").insert(key, v);
        v
    }

    /// The pairing T(k, l); exactly zero (no quadrature) when the
    /// component sums differ.
    pub fn pair_integral(&self, k: [i64; 3], l: [i64; 3]) -> Result<PairIntegral> {
        if k.iter().sum::<i64>() != l.iter().sum::<i64>() {
            return Ok(PairIntegral { k, l, value: 0.0, est_error: 0.0 });
        }
        let (key, sign) = canonical_key(&k, &l);
        for &o in &key {
            if o > self.nmax {
                return Err(Error::Precision {
                    requested: o as f64,
                    achieved: self.nmax as f64,
                    best_effort: f64::NAN,
                });
            }
        }
        let (value, est_error) = self.eval_cached(key);
        Ok(PairIntegral { k, l, value: sign * value, est_error })
    }

    /// Evaluate a batch of canonical keys in parallel and memoize them.
    /// Deterministic: the key set is deduplicated and sorted first.
    pub fn prefetch(&self, keys: &[[usize; 6]]) {
        let mut todo: Vec<[usize; 6]> = {
            let store = self.store.read().expect("cache lock");
            keys.iter().filter(|k| !store.contains_key(*k)).cloned().collect()
        };
        todo.sort_unstable();
        todo.dedup();
        let results: Vec<([usize; 6], (f64, f64))> = todo
            .par_iter()
            .map(|key| (*key, self.eval_nonneg(key)))
            .collect();
        let mut store = self.store.write().expect("cache lock");
        for (key, v) in results {
            store.insert(key, v);
        }
    }

    /// Number of memoized canonical integrals.
    pub fn len(&self) -> usize {
        self.store.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Persist the memoized values as sorted text lines
    /// `a1 a2 a3 a4 a5 a6 value est_error`.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let store = self.store.read().expect("cache lock");
        let mut entries: Vec<(&[usize; 6], &(f64, f64))> = store.iter().collect();
        entries.sort_by_key(|(k, _)| **k);
        let mut out = std::io::BufWriter::new(
            std::fs::File::create(path).map_err(|e| Error::Io(e.to_string()))?,
        );
        for (key, (v, e)) in entries {
            writeln!(
                out,
                "{} {} {} {} {} {} {:.17e} {:.3e}",
                key[0], key[1], key[2], key[3], key[4], key[5], v, e
            )
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        Ok(())
    }

    /// Merge persisted values back into the store. Entries with orders
    /// beyond this cache's table are ignored.
    pub fn load(&self, path: &std::path::Path) -> Result<usize> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(e.to_string()))?;
        let mut n = 0usize;
        let mut store = self.store.write().expect("cache lock");
        for line in std::io::BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::Io(e.to_string()))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 8 {
                return Err(Error::Io(format!("malformed cache line: {line}")));
            }
            let mut key = [0usize; 6];
            for (slot, p) in key.iter_mut().zip(&parts[..6]) {
                *slot = p.parse().map_err(|_| Error::Io(format!("bad order in: {line}")))?;
            }
            if key.iter().any(|&o| o > self.nmax) {
                continue;
            }
            let v: f64 = parts[6].parse().map_err(|_| Error::Io(format!("bad value: {line}")))?;
            let e: f64 = parts[7].parse().map_err(|_| Error::Io(format!("bad error: {line}")))?;
            store.insert(key, (v, e));
            n += 1;
        }
        Ok(n)
    }
}

/// Canonical form of the six orders: sorted absolute values, with the
/// parity sign (-1)^{sum of |negative orders|} factored out.
pub fn canonical_key(k: &[i64; 3], l: &[i64; 3]) -> ([usize; 6], f64) {
    let raw = [k[0], k[1], k[2], l[0], l[1], l[2]];
    let mut key = [0usize; 6];
    let mut neg_sum = 0i64;
    for (slot, &o) in key.iter_mut().zip(&raw) {
        if o < 0 {
            neg_sum += -o;
        }
        *slot = o.unsigned_abs() as usize;
    }
    key.sort_unstable();
    (key, if neg_sum % 2 == 0 { 1.0 } else { -1.0 })
}

/// Solve a small dense linear system in-place (rows of [A | b]); returns x.
fn gauss_solve(m: &mut [Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .expect("nonempty system");
        m.swap(col, pivot);
        let p = m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / p;
            for c in col..=n {
                let v = m[col][c];
                m[row][c] -= f * v;
            }
        }
    }
    let mut x = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for c in row + 1..n {
            acc -= m[row][c] * x[c];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// One-off evaluation without a shared cache; builds a private node table
/// sized to the arguments.
pub fn pair_integral(k: [i64; 3], l: [i64; 3]) -> Result<PairIntegral> {
    if k.iter().sum::<i64>() != l.iter().sum::<i64>() {
        return Ok(PairIntegral { k, l, value: 0.0, est_error: 0.0 });
    }
    let max_order =
        k.iter().chain(l.iter()).map(|o| o.unsigned_abs() as usize).max().unwrap_or(0);
    let cache = PairCache::new(max_order);
    cache.pair_integral(k, l)
}
