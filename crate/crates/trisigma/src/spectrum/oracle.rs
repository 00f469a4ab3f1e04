//! Reference evaluation of the mode pairing by resolving the delta
//! constraint in configuration space, with no Bessel functions anywhere.
//!
//! Two circle points with mode weights e^{i(n1 t1 + n2 t2)} push forward
//! under (t1, t2) -> omega_1 + omega_2 to an explicit density on the disk
//! |y| < 2: the two solutions t = phi +- gamma, gamma = arccos(|y|/2),
//! carry Jacobian |sin(t1 - t2)| = (|y|/2) sqrt(4 - |y|^2). Convolving
//! with the third point gives the radial profile F_n of the weighted
//! triple sum; the full six-fold pairing collapses to
//!
//! ```text
//! T(k, l) = int_0^3 F_k(rho) F_l(rho) rho d rho / (2 pi)^4,
//! ```
//!
//! directly comparable with the radial Bessel route. Everything is plain
//! adaptive quadrature of elementary trigonometric expressions, so this
//! path is slow but entirely independent of the production evaluator.
//!
//! Profiles are tabulated once per mode triple on a fixed radial grid
//! whose panels refine geometrically into the logarithmic singularity at
//! rho = 1 (and the mild endpoint at rho = 3); pairings are then plain
//! weighted dot products, which makes batch validation runs cheap.

use crate::error::{Error, Result};
use crate::quad::adaptive_quad_best_effort;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

/// Radial profile of the mode-weighted triple convolution at radius rho,
/// i.e. the density of e^{i n . theta} d theta^3 under
/// theta -> omega_1 + omega_2 + omega_3, evaluated at (rho, 0). Real by
/// reflection symmetry. Within ~1e-4 of the singular radii 1 and 3 the
/// quadrature may stall around 1e-7 absolute; that is accepted (the
/// outer integrals never need more there).
fn radial_density(n: [i64; 3], rho: f64) -> f64 {
    if rho >= 3.0 {
        return 0.0;
    }
    let (n1, n2, n3) = (n[0] as f64, n[1] as f64, n[2] as f64);
    // theta_3 sweeps the arc where |x - omega_3| < 2.
    let cos_bound = (rho * rho - 3.0) / (2.0 * rho);
    let theta_bar =
        if rho == 0.0 || cos_bound <= -1.0 { PI } else { cos_bound.clamp(-1.0, 1.0).acos() };

    let integrand = |t3: f64| -> f64 {
        let y = [rho - t3.cos(), -t3.sin()];
        let y_norm_sq = y[0] * y[0] + y[1] * y[1];
        let y_norm = y_norm_sq.sqrt();
        let jac_sq = 4.0 - y_norm_sq;
        if jac_sq <= 0.0 || y_norm == 0.0 {
            return 0.0;
        }
        let phi = y[1].atan2(y[0]);
        let gamma = (y_norm / 2.0).clamp(-1.0, 1.0).acos();
        4.0 * ((n1 + n2) * phi + n3 * t3).cos() * ((n1 - n2) * gamma).cos()
            / ((y_norm / 2.0) * jac_sq.sqrt())
    };

    if theta_bar < PI {
        // the Jacobian vanishes like sqrt(theta_bar - t3) at the edge;
        // t3 = theta_bar - t^2 removes it
        adaptive_quad_best_effort(
            |t| integrand(theta_bar - t * t) * 2.0 * t,
            0.0,
            theta_bar.sqrt(),
            1e-10,
            1e-10,
            20_000,
        )
        .value
    } else {
        adaptive_quad_best_effort(integrand, 0.0, PI, 1e-10, 1e-10, 20_000).value
    }
}

/// 10-point Gauss-Legendre rule (positive half).
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

/// Fixed radial grid with per-triple profile memoization.
pub struct DensityOracle {
    nodes: Vec<f64>,
    /// quadrature weight times node radius
    weights_r: Vec<f64>,
    profiles: RwLock<HashMap<[i64; 3], Arc<Vec<f64>>>>,
}

impl Default for DensityOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl DensityOracle {
    pub fn new() -> Self {
        // Panel edges: coarse over the smooth regions, geometric
        // refinement into rho = 1 from both sides (down to ~1.5e-11,
        // leaving a band whose mass is O(1e-9 log^2) ~ 1e-7) and into
        // rho = 3 (down to ~3.7e-9).
        let mut edges = vec![0.0, 0.25, 0.5, 0.75];
        for j in 0..=34 {
            edges.push(1.0 - 0.25 * 0.5f64.powi(j));
        }
        for j in (0..=34).rev() {
            edges.push(1.0 + 0.25 * 0.5f64.powi(j));
        }
        let mut x = 1.5;
        while x < 2.8 {
            edges.push(x);
            x += 0.25;
        }
        for j in 0..=26 {
            edges.push(3.0 - 0.25 * 0.5f64.powi(j));
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();

        let mut nodes = Vec::new();
        let mut weights_r = Vec::new();
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            for i in 0..5 {
                for sign in [-1.0, 1.0] {
                    let r = c + sign * h * GL_X[i];
                    nodes.push(r);
                    weights_r.push(h * GL_W[i] * r);
                }
            }
        }
        DensityOracle { nodes, weights_r, profiles: RwLock::new(HashMap::new()) }
    }

    /// Profiles are invariant under component permutations and global
    /// negation of the triple.
    fn canonical_triple(n: [i64; 3]) -> [i64; 3] {
        let mut a = n;
        a.sort_unstable();
        let mut b = [-n[0], -n[1], -n[2]];
        b.sort_unstable();
        if b < a {
            b
        } else {
            a
        }
    }

    fn profile(&self, n: [i64; 3]) -> Arc<Vec<f64>> {
        let key = Self::canonical_triple(n);
        if let Some(p) = self.profiles.read().expect("oracle lock").get(&key) {
            return p.clone();
        }
        let values: Vec<f64> =
            self.nodes.par_iter().map(|&rho| radial_density(key, rho)).collect();
        let arc = Arc::new(values);
        self.profiles.write().expect("oracle lock").insert(key, arc.clone());
        arc
    }

    /// The pairing T(k, l) by configuration-space quadrature; exactly
    /// zero when the component sums differ.
    pub fn pair(&self, k: [i64; 3], l: [i64; 3]) -> Result<f64> {
        if k.iter().sum::<i64>() != l.iter().sum::<i64>() {
            return Ok(0.0);
        }
        let f = self.profile(k);
        let g = self.profile(l);
        let mut acc = 0.0;
        for i in 0..self.nodes.len() {
            acc += self.weights_r[i] * f[i] * g[i];
        }
        let value = acc / (2.0 * PI).powi(4);
        if !value.is_finite() {
            return Err(Error::QuadratureNonConvergence(f64::NAN));
        }
        Ok(value)
    }
}

/// One-off pairing evaluation; builds a private table. Prefer
/// [`DensityOracle`] for batches.
pub fn oracle_pair_integral(k: [i64; 3], l: [i64; 3]) -> Result<f64> {
    DensityOracle::new().pair(k, l)
}
