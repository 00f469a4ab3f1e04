//! Configuration-space machinery on the 3-torus.
//!
//! The weight a(theta) = |omega_1 + omega_2 + omega_3|^2 of the quadratic
//! form lives on angle triples; everything here revolves around it: polar
//! coordinates on the zero-sum plane H, the four ball centers used in the
//! support decomposition, the rank-2 lattice they generate, the prism that
//! tiles the torus, the exact polynomial families describing the Taylor
//! expansion of the weight near the antipodal center, and the perturbation
//! series psi with certified tail bounds.

mod poly;

pub use poly::{poly_p, poly_q, EvenPolynomial, Rational};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// A point (theta_1, theta_2, theta_3) on the 3-torus, kept as plain
/// radians; all consumers are 2 pi periodic componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleTriple(pub [f64; 3]);

impl AngleTriple {
    pub const ZERO: AngleTriple = AngleTriple([0.0; 3]);

    pub fn new(t1: f64, t2: f64, t3: f64) -> Self {
        AngleTriple([t1, t2, t3])
    }

    pub fn add(&self, other: &AngleTriple) -> AngleTriple {
        AngleTriple([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    pub fn sub(&self, other: &AngleTriple) -> AngleTriple {
        AngleTriple([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    pub fn scale(&self, c: f64) -> AngleTriple {
        AngleTriple([c * self.0[0], c * self.0[1], c * self.0[2]])
    }

    pub fn neg(&self) -> AngleTriple {
        self.scale(-1.0)
    }

    pub fn component_sum(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn norm(&self) -> f64 {
        (self.0[0] * self.0[0] + self.0[1] * self.0[1] + self.0[2] * self.0[2]).sqrt()
    }

    /// Lexicographic comparison, used only for deterministic tie-breaking.
    fn lex_less(&self, other: &AngleTriple) -> bool {
        for i in 0..3 {
            if self.0[i] < other.0[i] {
                return true;
            }
            if self.0[i] > other.0[i] {
                return false;
            }
        }
        false
    }
}

/// Polar coordinates (s, alpha) on the plane H = {theta_1+theta_2+theta_3 = 0}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub s: f64,
    pub alpha: f64,
}

impl PolarPoint {
    pub fn new(s: f64, alpha: f64) -> Self {
        PolarPoint { s, alpha }
    }
}

/// One of the four ball centers of the support decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Center {
    /// 1-based index j in {1, 2, 3, 4}.
    pub index: usize,
    pub point: AngleTriple,
}

/// The weight a(theta) = 3 + 2cos(t1-t2) + 2cos(t2-t3) + 2cos(t3-t1);
/// equals |omega_1 + omega_2 + omega_3|^2 for omega_i = e^{i theta_i}.
pub fn a_of(theta: &AngleTriple) -> f64 {
    let [t1, t2, t3] = theta.0;
    3.0 + 2.0 * (t1 - t2).cos() + 2.0 * (t2 - t3).cos() + 2.0 * (t3 - t1).cos()
}

/// Deviation of the shifted weight from its antipodal value:
/// a(c4 + theta) - 1 = 2 + 2cos(t1-t2) - 2cos(t1-t3) - 2cos(t2-t3).
///
/// Algebraically identical to `a_of(&c4.add(theta)) - 1` but avoids the
/// cancellation of the subtraction when the value is O(s^2).
pub fn a_c4_minus_one(theta: &AngleTriple) -> f64 {
    let [t1, t2, t3] = theta.0;
    2.0 + 2.0 * (t1 - t2).cos() - 2.0 * (t1 - t3).cos() - 2.0 * (t2 - t3).cos()
}

/// Embed polar coordinates into H:
/// theta = s cos(a) (1,-1,0)/sqrt(2) + s sin(a) (1,1,-2)/sqrt(6).
pub fn embed(p: &PolarPoint) -> AngleTriple {
    let c = p.s * p.alpha.cos() / (2.0f64).sqrt();
    let d = p.s * p.alpha.sin() / (6.0f64).sqrt();
    AngleTriple([c + d, -c + d, -2.0 * d])
}

/// The four ball centers: the origin and the three antipodal centers.
pub fn centers() -> [Center; 4] {
    let t = 2.0 * PI / 3.0;
    let u = -PI / 3.0;
    [
        Center { index: 1, point: AngleTriple([0.0, 0.0, 0.0]) },
        Center { index: 2, point: AngleTriple([t, u, u]) },
        Center { index: 3, point: AngleTriple([u, t, u]) },
        Center { index: 4, point: AngleTriple([u, u, t]) },
    ]
}

/// Generators v1 = (2pi/3, -pi/3, -pi/3), v2 = (-pi/3, 2pi/3, -pi/3) of
/// the rank-2 lattice in H.
pub fn lattice_basis() -> (AngleTriple, AngleTriple) {
    let t = 2.0 * PI / 3.0;
    let u = -PI / 3.0;
    (AngleTriple([t, u, u]), AngleTriple([u, t, u]))
}

/// Tolerance for membership in the plane H.
const H_TOL: f64 = 1e-12;

/// Minimal-norm representative of theta modulo the lattice, searching
/// integer coefficients in [-3, 3]^2 (well beyond the covering radius).
/// Norm ties break to the lexicographically smaller triple.
pub fn reduce_mod_lattice(theta: &AngleTriple) -> Result<AngleTriple> {
    if theta.component_sum().abs() > H_TOL {
        return Err(Error::Domain(format!(
            "input must lie in H: component sum {:e}",
            theta.component_sum()
        )));
    }
    let (v1, v2) = lattice_basis();
    let mut best = *theta;
    let mut best_norm = theta.norm();
    for m in -3i32..=3 {
        for n in -3i32..=3 {
            let cand = theta.sub(&v1.scale(m as f64)).sub(&v2.scale(n as f64));
            let norm = cand.norm();
            if norm < best_norm - H_TOL
                || (norm < best_norm + H_TOL && cand.lex_less(&best))
            {
                best = cand;
                best_norm = norm;
            }
        }
    }
    Ok(best)
}

/// Quadrilateral vertex A = (pi, -pi, 0) of the fundamental cross-section.
fn vertex_a() -> AngleTriple {
    AngleTriple([PI, -PI, 0.0])
}

/// Quadrilateral vertex B = (-pi/3, -pi/3, 2pi/3).
fn vertex_b() -> AngleTriple {
    AngleTriple([-PI / 3.0, -PI / 3.0, 2.0 * PI / 3.0])
}

/// Orthonormal basis of H.
fn h_basis() -> (AngleTriple, AngleTriple) {
    (
        AngleTriple([1.0 / 2.0f64.sqrt(), -1.0 / 2.0f64.sqrt(), 0.0]),
        AngleTriple([1.0 / 6.0f64.sqrt(), 1.0 / 6.0f64.sqrt(), -2.0 / 6.0f64.sqrt()]),
    )
}

fn dot(x: &AngleTriple, y: &AngleTriple) -> f64 {
    x.0[0] * y.0[0] + x.0[1] * y.0[1] + x.0[2] * y.0[2]
}

/// Membership in the fundamental prism for R^3 / (2 pi Z)^3: the
/// quadrilateral C = conv{A, B, -A, -B} swept along (1,1,1) by
/// t in [0, 2 pi). The half-open conventions (t in [0, 2pi), barycentric
/// parameters in [0, 1)) make the translates tile space exactly.
pub fn in_fundamental_prism(theta: &AngleTriple) -> bool {
    let t = theta.component_sum() / 3.0;
    if !(0.0..2.0 * PI).contains(&t) {
        return false;
    }
    let p = theta.sub(&AngleTriple([t, t, t]));

    // C is the parallelogram -B + mu1 (A+B) + mu2 (B-A), mu_i in [0,1).
    let a = vertex_a();
    let b = vertex_b();
    let u = a.add(&b);
    let w = b.sub(&a);
    let (e1, e2) = h_basis();
    let (u1, u2) = (dot(&u, &e1), dot(&u, &e2));
    let (w1, w2) = (dot(&w, &e1), dot(&w, &e2));
    let rhs = p.add(&b);
    let (r1, r2) = (dot(&rhs, &e1), dot(&rhs, &e2));
    let det = u1 * w2 - u2 * w1;
    let mu1 = (r1 * w2 - r2 * w1) / det;
    let mu2 = (u1 * r2 - u2 * r1) / det;
    (0.0..1.0).contains(&mu1) && (0.0..1.0).contains(&mu2)
}

/// The leading angular factor 3 sin^2(alpha) - cos^2(alpha) of the weight
/// deviation, computed as 1 - 2 cos(2 alpha).
pub fn weight_factor(alpha: f64) -> f64 {
    1.0 - 2.0 * (2.0 * alpha).cos()
}

/// Default truncation order of the psi series; at s <= 1/20 the first
/// omitted term is below 1e-18.
pub const PSI_DEFAULT_KMAX: usize = 8;

/// Largest truncation order with cached coefficients.
const PSI_MAX_CACHED: usize = 24;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Coefficient arrays of Q_2k as f64, for k = 2..=PSI_MAX_CACHED.
fn q_coeff_table() -> &'static Vec<Vec<f64>> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (2..=PSI_MAX_CACHED)
            .map(|k| {
                poly_q(k)
                    .expect("Q polynomial construction cannot fail for k <= 24")
                    .coeffs()
                    .iter()
                    .map(|c| c.to_f64())
                    .collect()
            })
            .collect()
    })
}

fn eval_even_coeffs(coeffs: &[f64], x: f64, y: f64) -> f64 {
    let x2 = x * x;
    let y2 = y * y;
    let k = coeffs.len() - 1;
    let mut result = 0.0;
    let mut xp = 1.0;
    for (i, c) in coeffs.iter().enumerate() {
        result += c * xp * y2.powi((k - i) as i32);
        xp *= x2;
    }
    result
}

/// Sup bound 30 k^2 2^k for |Q_2k(sin, cos)| used in the tail estimates.
fn q_sup_bound(k: usize) -> f64 {
    30.0 * (k * k) as f64 * (2.0f64).powi(k as i32)
}

/// The perturbation series
/// psi(s, alpha) = sum_{k=2}^{kmax} s^{2k-2} Q_2k(sin a, cos a) / (2k)!,
/// the relative correction in a(c4 + theta) - 1 = s^2 w(alpha) (1 + psi).
///
/// Returns (value, truncation_bound); the bound covers every omitted term
/// via |Q_2k(sin, cos)| <= 30 k^2 2^k. Valid for 0 <= s <= 1/2.
pub fn psi(s: f64, alpha: f64, kmax: usize) -> Result<(f64, f64)> {
    psi_series(s, alpha, kmax, false)
}

/// Termwise s-derivative of `psi` with the matching tail bound.
pub fn psi_prime(s: f64, alpha: f64, kmax: usize) -> Result<(f64, f64)> {
    psi_series(s, alpha, kmax, true)
}

fn psi_series(s: f64, alpha: f64, kmax: usize, derivative: bool) -> Result<(f64, f64)> {
    if !(0.0..=0.5).contains(&s) {
        return Err(Error::OutOfValidity(format!(
            "psi series requires 0 <= s <= 1/2, got {s}"
        )));
    }
    if kmax < 2 {
        return Err(Error::Domain(format!("psi requires kmax >= 2, got {kmax}")));
    }
    let x = alpha.sin();
    let y = alpha.cos();
    let table = q_coeff_table();

    let mut value = 0.0f64;
    for k in 2..=kmax.min(PSI_MAX_CACHED) {
        let q = eval_even_coeffs(&table[k - 2], x, y);
        let term = if derivative {
            (2 * k - 2) as f64 * s.powi((2 * k - 3) as i32) * q / factorial(2 * k)
        } else {
            s.powi((2 * k - 2) as i32) * q / factorial(2 * k)
        };
        value += term;
    }

    // Tail bound from k = min(kmax, cached) + 1 on; consecutive bound terms
    // shrink by more than 30x for s <= 1/2, so one extra term covers the
    // geometric remainder.
    let start = kmax.min(PSI_MAX_CACHED) + 1;
    let mut tail = 0.0f64;
    let mut last = 0.0f64;
    for k in start..start + 40 {
        let b = if derivative {
            (2 * k - 2) as f64 * s.powi((2 * k - 3) as i32) * q_sup_bound(k) / factorial(2 * k)
        } else {
            s.powi((2 * k - 2) as i32) * q_sup_bound(k) / factorial(2 * k)
        };
        tail += b;
        last = b;
        if b < 1e-300 {
            break;
        }
    }
    tail += last;

    Ok((value, tail))
}

/// The scale ratio
/// h(s, t, alpha, beta) =
///   (t^2/s^2) (w(beta)/w(alpha)) (1 + psi(t, beta)) / (1 + psi(s, alpha)),
/// equal to (1 - a(c4 + theta(t, beta))) / (1 - a(c4 + theta(s, alpha))).
pub fn h_ratio(s: f64, t: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(0.0 < s && s <= 0.05 && 0.0 < t && t <= 0.05) {
        return Err(Error::Domain(format!(
            "h_ratio requires s, t in (0, 1/20], got s = {s}, t = {t}"
        )));
    }
    let wa = weight_factor(alpha);
    if wa.abs() < 1e-14 {
        return Err(Error::DegenerateDirection(format!(
            "weight factor vanishes at alpha = {alpha}"
        )));
    }
    let wb = weight_factor(beta);
    let (psi_s, _) = psi(s, alpha, PSI_DEFAULT_KMAX)?;
    let (psi_t, _) = psi(t, beta, PSI_DEFAULT_KMAX)?;
    Ok((t * t) / (s * s) * (wb / wa) * (1.0 + psi_t) / (1.0 + psi_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// SplitMix64: tiny deterministic generator for randomized checks.
    struct Rng(u64);

    impl Rng {
        fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        }

        fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * (self.next_u64() as f64 / u64::MAX as f64)
        }
    }

    fn random_in_h(rng: &mut Rng, scale: f64) -> AngleTriple {
        let p = PolarPoint::new(rng.uniform(0.0, scale), rng.uniform(0.0, 2.0 * PI));
        embed(&p)
    }

    #[test]
    fn weight_at_origin_and_centers() {
        assert_eq!(a_of(&AngleTriple::ZERO), 9.0);
        for c in centers().iter().skip(1) {
            assert!((a_of(&c.point) - 1.0).abs() < 1e-14, "a(c{}) != 1", c.index);
        }
    }

    #[test]
    fn weight_is_squared_resultant_norm() {
        let mut rng = Rng(7);
        for _ in 0..1000 {
            let t = AngleTriple([
                rng.uniform(0.0, 2.0 * PI),
                rng.uniform(0.0, 2.0 * PI),
                rng.uniform(0.0, 2.0 * PI),
            ]);
            let (mut re, mut im) = (0.0, 0.0);
            for v in t.0 {
                re += v.cos();
                im += v.sin();
            }
            assert!((a_of(&t) - (re * re + im * im)).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_invariances() {
        let mut rng = Rng(13);
        for _ in 0..1000 {
            let t = AngleTriple([
                rng.uniform(-10.0, 10.0),
                rng.uniform(-10.0, 10.0),
                rng.uniform(-10.0, 10.0),
            ]);
            let a = a_of(&t);
            // all 6 permutations
            let [x, y, z] = t.0;
            for p in [
                [x, y, z], [x, z, y], [y, x, z], [y, z, x], [z, x, y], [z, y, x],
            ] {
                assert!((a_of(&AngleTriple(p)) - a).abs() < 1e-12);
            }
            // diagonal translation
            let shift = rng.uniform(-5.0, 5.0);
            let shifted = t.add(&AngleTriple([shift, shift, shift]));
            assert!((a_of(&shifted) - a).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_floor_near_origin() {
        let mut rng = Rng(3);
        for _ in 0..500 {
            let theta = random_in_h(&mut rng, PI / 6.0 - 1e-9);
            assert!(a_of(&theta) >= 6.0 - 1e-12, "a({:?}) < 6", theta);
        }
    }

    #[test]
    fn embedding_basics() {
        assert_eq!(embed(&PolarPoint::new(0.0, 1.234)).0, [0.0; 3]);
        let e = embed(&PolarPoint::new(2.0f64.sqrt(), 0.0));
        assert!((e.0[0] - 1.0).abs() < 1e-15);
        assert!((e.0[1] + 1.0).abs() < 1e-15);
        assert!(e.0[2].abs() < 1e-15);
    }

    #[test]
    fn embedding_difference_identity() {
        let mut rng = Rng(99);
        for _ in 0..200 {
            let s = rng.uniform(0.0, 3.0);
            let alpha = rng.uniform(0.0, 2.0 * PI);
            let t = embed(&PolarPoint::new(s, alpha));
            assert!((t.0[0] - t.0[1] - 2.0f64.sqrt() * s * alpha.cos()).abs() < 1e-12);
            assert!((t.component_sum()).abs() < 1e-12);
            assert!((t.norm() - s).abs() < 1e-12);
        }
    }

    #[test]
    fn centers_and_lattice_relations() {
        let cs = centers();
        let (v1, v2) = lattice_basis();
        for c in &cs {
            assert!(c.point.component_sum().abs() < 1e-12);
        }
        // c2 - c3 = v1 - v2
        let d = cs[1].point.sub(&cs[2].point);
        let e = v1.sub(&v2);
        for i in 0..3 {
            assert!((d.0[i] - e.0[i]).abs() < 1e-12);
        }
        // v1 + v2 + c4 = 0
        let z = v1.add(&v2).add(&cs[3].point);
        assert!(z.norm() < 1e-12);
        let expect = PI * (2.0f64 / 3.0).sqrt();
        assert!((v1.norm() - expect).abs() < 1e-12);
        assert!((v2.norm() - expect).abs() < 1e-12);
    }

    #[test]
    fn lattice_reduction_examples() {
        let (v1, v2) = lattice_basis();
        let r = reduce_mod_lattice(&v1).unwrap();
        assert!(r.norm() < 1e-12);

        let small = AngleTriple([0.01, -0.01, 0.0]);
        let r = reduce_mod_lattice(&small).unwrap();
        assert!(r.sub(&small).norm() < 1e-12);

        let perturbed = v1.add(&v2.scale(0.01));
        let r = reduce_mod_lattice(&perturbed).unwrap();
        assert!(r.norm() < v1.norm());

        assert!(reduce_mod_lattice(&AngleTriple([0.1, 0.1, 0.1])).is_err());
    }

    #[test]
    fn lattice_reduction_matches_brute_force() {
        let (v1, v2) = lattice_basis();
        let mut rng = Rng(2024);
        let mut points: Vec<AngleTriple> = (0..200).map(|_| random_in_h(&mut rng, 4.0)).collect();
        points.push(v1.scale(0.5));
        for theta in &points {
            let got = reduce_mod_lattice(theta).unwrap();
            // oracle: exhaustive search over |m|, |n| <= 2 with lex ties
            let mut best: Option<AngleTriple> = None;
            for m in -2i32..=2 {
                for n in -2i32..=2 {
                    let cand = theta.sub(&v1.scale(m as f64)).sub(&v2.scale(n as f64));
                    best = match best {
                        None => Some(cand),
                        Some(b) => {
                            if cand.norm() < b.norm() - 1e-12
                                || (cand.norm() < b.norm() + 1e-12 && cand.lex_less(&b))
                            {
                                Some(cand)
                            } else {
                                Some(b)
                            }
                        }
                    };
                }
            }
            let b = best.unwrap();
            assert!(
                got.sub(&b).norm() < 1e-9,
                "reduction mismatch at {:?}: {:?} vs {:?}",
                theta,
                got,
                b
            );
        }
    }

    #[test]
    fn prism_contains_origin() {
        assert!(in_fundamental_prism(&AngleTriple::ZERO));
    }

    #[test]
    fn prism_tiles_the_torus() {
        let mut rng = Rng(41);
        for _ in 0..100_000 {
            let theta = AngleTriple([
                rng.uniform(0.0, 2.0 * PI),
                rng.uniform(0.0, 2.0 * PI),
                rng.uniform(0.0, 2.0 * PI),
            ]);
            let mut hits = 0;
            for e1 in -1i32..=1 {
                for e2 in -1i32..=1 {
                    for e3 in -1i32..=1 {
                        let cand = theta.add(&AngleTriple([
                            2.0 * PI * e1 as f64,
                            2.0 * PI * e2 as f64,
                            2.0 * PI * e3 as f64,
                        ]));
                        if in_fundamental_prism(&cand) {
                            hits += 1;
                        }
                    }
                }
            }
            assert_eq!(hits, 1, "point {:?} hit {} translates", theta, hits);
        }
    }

    #[test]
    fn prism_volume_is_full_cell() {
        // The prism fits inside [-pi, 3pi)^3; Monte-Carlo volume there must
        // come out as (2 pi)^3 within 1%.
        let mut rng = Rng(137);
        let n = 1_000_000usize;
        let mut inside = 0usize;
        for _ in 0..n {
            let theta = AngleTriple([
                rng.uniform(-PI, 3.0 * PI),
                rng.uniform(-PI, 3.0 * PI),
                rng.uniform(-PI, 3.0 * PI),
            ]);
            if in_fundamental_prism(&theta) {
                inside += 1;
            }
        }
        let box_vol = (4.0 * PI).powi(3);
        let vol = box_vol * inside as f64 / n as f64;
        let expect = (2.0 * PI).powi(3);
        assert!(
            (vol - expect).abs() < 0.01 * expect,
            "prism volume {vol} vs {expect}"
        );
    }

    #[test]
    fn weight_factor_values() {
        assert!(weight_factor(PI / 6.0).abs() < 1e-15);
        assert!((weight_factor(PI / 2.0) - 3.0).abs() < 1e-15);
        let mut rng = Rng(5);
        for _ in 0..100 {
            let alpha = rng.uniform(0.0, 2.0 * PI);
            let sum: f64 =
                (1..=3).map(|j| weight_factor(alpha + 2.0 * PI * j as f64 / 3.0)).sum();
            assert!((sum - 3.0).abs() < 1e-12, "sum at alpha = {alpha}: {sum}");
        }
    }

    #[test]
    fn psi_vanishes_at_zero() {
        let (v, b) = psi(0.0, 1.0, PSI_DEFAULT_KMAX).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(b, 0.0);
        let (v, b) = psi_prime(0.0, 1.0, PSI_DEFAULT_KMAX).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn psi_certified_bounds_on_grid() {
        for i in 1..=40 {
            let s = 0.05 * i as f64 / 40.0;
            for j in 0..60 {
                let alpha = 2.0 * PI * j as f64 / 60.0;
                let (v, tail) = psi(s, alpha, PSI_DEFAULT_KMAX).unwrap();
                let bound = 7.0 / 24.0 * s * s
                    + 17.0 / 720.0 * s.powi(4)
                    + s.powi(6) * ((2.0f64).sqrt() * s).exp();
                assert!(v.abs() + tail <= bound, "psi bound fails at ({s}, {alpha})");

                let (vp, tailp) = psi_prime(s, alpha, PSI_DEFAULT_KMAX).unwrap();
                let boundp = 14.0 / 24.0 * s
                    + 17.0 / 180.0 * s.powi(3)
                    + 2.0 * s.powi(5) * ((2.0f64).sqrt() * s).exp();
                assert!(vp.abs() + tailp <= boundp, "psi' bound fails at ({s}, {alpha})");
            }
        }
    }

    #[test]
    fn psi_consistent_with_direct_weight() {
        let s = 0.03;
        for j in 0..100 {
            let alpha = 2.0 * PI * j as f64 / 100.0;
            let w = weight_factor(alpha);
            if w.abs() <= 0.1 {
                continue;
            }
            let theta = embed(&PolarPoint::new(s, alpha));
            let direct = a_c4_minus_one(&theta) / (s * s * w);
            let (v, _) = psi(s, alpha, PSI_DEFAULT_KMAX).unwrap();
            assert!(
                (1.0 + v - direct).abs() < 1e-10,
                "psi consistency at alpha = {alpha}: {} vs {direct}",
                1.0 + v
            );
        }
    }

    #[test]
    fn psi_prime_matches_finite_difference() {
        let (s, alpha, h) = (0.03, 1.0, 1e-6);
        let (up, _) = psi(s + h, alpha, PSI_DEFAULT_KMAX).unwrap();
        let (dn, _) = psi(s - h, alpha, PSI_DEFAULT_KMAX).unwrap();
        let fd = (up - dn) / (2.0 * h);
        let (vp, _) = psi_prime(s, alpha, PSI_DEFAULT_KMAX).unwrap();
        assert!((fd - vp).abs() < 1e-7, "fd {fd} vs psi' {vp}");
    }

    #[test]
    fn psi_rejects_out_of_range() {
        assert!(matches!(psi(0.6, 1.0, 8), Err(Error::OutOfValidity(_))));
        assert!(matches!(psi(0.01, 1.0, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn shifted_weight_identity_on_h() {
        let mut rng = Rng(17);
        let c4 = centers()[3].point;
        for _ in 0..500 {
            let theta = random_in_h(&mut rng, 2.0);
            let direct = a_of(&c4.add(&theta)) - 1.0;
            assert!((a_c4_minus_one(&theta) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_covariance_of_shifted_weight() {
        let mut rng = Rng(23);
        let cs = centers();
        for _ in 0..300 {
            let s = rng.uniform(0.0, 1.0);
            let alpha = rng.uniform(0.0, 2.0 * PI);
            let a2 = a_of(&cs[1].point.add(&embed(&PolarPoint::new(s, alpha))));
            let a3 = a_of(&cs[2].point.add(&embed(&PolarPoint::new(s, alpha))));
            let a4_shift2 =
                a_of(&cs[3].point.add(&embed(&PolarPoint::new(s, alpha + 4.0 * PI / 3.0))));
            let a4_shift3 =
                a_of(&cs[3].point.add(&embed(&PolarPoint::new(s, alpha + 2.0 * PI / 3.0))));
            assert!((a2 - a4_shift2).abs() < 1e-12, "c2 covariance at ({s}, {alpha})");
            assert!((a3 - a4_shift3).abs() < 1e-12, "c3 covariance at ({s}, {alpha})");
        }
    }

    #[test]
    fn h_ratio_structure() {
        assert!((h_ratio(0.02, 0.02, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);

        let mut rng = Rng(31);
        for _ in 0..100 {
            let s = rng.uniform(1e-3, 0.05);
            let t = rng.uniform(1e-3, 0.05);
            let alpha = rng.uniform(0.3, 1.2);
            let beta = rng.uniform(1.5, 2.5);
            let fwd = h_ratio(s, t, alpha, beta).unwrap();
            let bwd = h_ratio(t, s, beta, alpha).unwrap();
            assert!((fwd * bwd - 1.0).abs() < 1e-12);
        }

        // direct quotient of weight deviations
        let (s, t, alpha, beta) = (0.02, 0.03, 1.0, 2.0);
        let num = 1.0 - a_of(&centers()[3].point.add(&embed(&PolarPoint::new(t, beta))));
        let den = 1.0 - a_of(&centers()[3].point.add(&embed(&PolarPoint::new(s, alpha))));
        let h = h_ratio(s, t, alpha, beta).unwrap();
        assert!((h - num / den).abs() < 1e-9, "h = {h}, quotient = {}", num / den);

        assert!(matches!(
            h_ratio(0.02, 0.03, PI / 6.0, 1.0),
            Err(Error::DegenerateDirection(_))
        ));
    }
}
