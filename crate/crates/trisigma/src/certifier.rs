//! Grid certification of the quantitative estimates.
//!
//! Each `certify_*` function scans a dense grid, evaluates the difference
//! `bound - quantity` at every point and reports the worst margin together
//! with the point attaining it. A positive worst margin means the estimate
//! held everywhere on the grid. This is certification at desk precision:
//! no interval arithmetic, but the reports carry the largest
//! point-to-point variation of the margin so a reader can judge whether
//! the grid resolves the checked function.
//!
//! Every certifier accepts a `tighten` factor (>= 1). The bound is moved
//! against the inequality by that factor, which is how the falsification
//! sanity checks demonstrate that violations are detectable.

use crate::error::{Error, Result};
use crate::geometry::{
    a_c4_minus_one, a_of, centers, embed, psi, psi_prime, weight_factor, AngleTriple,
    PolarPoint, PSI_DEFAULT_KMAX,
};
use crate::kernel::{asymptotic_error_bound, rho, rho_elliptic};
use crate::quad::adaptive_quad;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

/// Node spacing of one grid axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    Log,
}

/// One closed sampling interval with its point count and spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn uniform(lo: f64, hi: f64, points: usize) -> Self {
        Axis { lo, hi, points, spacing: Spacing::Uniform }
    }

    pub fn log(lo: f64, hi: f64, points: usize) -> Self {
        Axis { lo, hi, points, spacing: Spacing::Log }
    }

    /// `points` samples of the half-open circle [0, 2 pi).
    pub fn periodic(points: usize) -> Self {
        let hi = 2.0 * PI * (points as f64 - 1.0) / points as f64;
        Axis { lo: 0.0, hi, points, spacing: Spacing::Uniform }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Domain(format!("axis needs >= 2 points, got {}", self.points)));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::Domain(format!("bad axis range [{}, {}]", self.lo, self.hi)));
        }
        if self.spacing == Spacing::Log && self.lo <= 0.0 {
            return Err(Error::Domain("log spacing requires a strictly positive range".into()));
        }
        Ok(())
    }

    pub fn sample(&self, i: usize) -> f64 {
        debug_assert!(i < self.points);
        let t = i as f64 / (self.points - 1) as f64;
        match self.spacing {
            Spacing::Uniform => self.lo + (self.hi - self.lo) * t,
            Spacing::Log => self.lo * (self.hi / self.lo).powf(t),
        }
    }

    pub fn samples(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.sample(i)).collect()
    }
}

/// A full grid: the cartesian product of its axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Self {
        GridSpec { axes }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::Domain("grid needs at least one axis".into()));
        }
        for axis in &self.axes {
            axis.validate()?;
        }
        Ok(())
    }

    pub fn total_points(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }
}

/// Outcome of one lemma certification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertReport {
    pub lemma_id: String,
    pub grid: GridSpec,
    /// min over the grid of (bound - quantity); positive = pass.
    pub worst_margin: f64,
    pub worst_point: Vec<f64>,
    pub passed: bool,
    pub runtime_ms: u64,
    /// `passed` is `worst_margin >= -tolerance`.
    pub tolerance: f64,
    /// Bound-tightening factor the run was performed with (1 = as stated).
    pub tighten: f64,
    /// Largest margin change between consecutive grid points: a numerical
    /// Lipschitz-constant-times-spacing proxy for grid adequacy.
    pub max_adjacent_delta: f64,
    /// Points skipped (too close to a singularity).
    pub skipped: usize,
    pub notes: Vec<String>,
}

impl CertReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

enum PointOutcome {
    /// bound - quantity at this point
    Margin(f64),
    Skip,
}

struct Scan {
    worst_margin: f64,
    worst_point: Vec<f64>,
    max_adjacent_delta: f64,
    skipped: usize,
}

/// Evaluate `eval` over the cartesian product of `grid`, in parallel, and
/// reduce deterministically in index order.
fn scan_grid<F>(grid: &GridSpec, eval: F) -> Result<Scan>
where
    F: Fn(&[f64]) -> PointOutcome + Sync,
{
    grid.validate()?;
    let axes: Vec<Vec<f64>> = grid.axes.iter().map(|a| a.samples()).collect();
    let total = grid.total_points();

    let point_at = |mut idx: usize| -> Vec<f64> {
        let mut coords = vec![0.0; axes.len()];
        for (k, ax) in axes.iter().enumerate().rev() {
            coords[k] = ax[idx % ax.len()];
            idx /= ax.len();
        }
        coords
    };

    let outcomes: Vec<(Vec<f64>, PointOutcome)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let p = point_at(idx);
            let o = eval(&p);
            (p, o)
        })
        .collect();

    let mut worst_margin = f64::INFINITY;
    let mut worst_point = Vec::new();
    let mut max_adjacent_delta: f64 = 0.0;
    let mut skipped = 0usize;
    let mut prev: Option<f64> = None;
    for (p, o) in &outcomes {
        match o {
            PointOutcome::Skip => {
                skipped += 1;
                prev = None;
            }
            PointOutcome::Margin(m) => {
                if *m < worst_margin {
                    worst_margin = *m;
                    worst_point = p.clone();
                }
                if let Some(q) = prev {
                    max_adjacent_delta = max_adjacent_delta.max((m - q).abs());
                }
                prev = Some(*m);
            }
        }
    }
    Ok(Scan { worst_margin, worst_point, max_adjacent_delta, skipped })
}

fn finish(
    lemma_id: &str,
    grid: &GridSpec,
    scan: Scan,
    tolerance: f64,
    tighten: f64,
    start: Instant,
    notes: Vec<String>,
) -> CertReport {
    CertReport {
        lemma_id: lemma_id.to_string(),
        grid: grid.clone(),
        worst_margin: scan.worst_margin,
        worst_point: scan.worst_point,
        passed: scan.worst_margin >= -tolerance,
        runtime_ms: start.elapsed().as_millis() as u64,
        tolerance,
        tighten,
        max_adjacent_delta: scan.max_adjacent_delta,
        skipped: scan.skipped,
        notes,
    }
}

fn check_tighten(tighten: f64) -> Result<()> {
    if tighten <= 0.0 || !tighten.is_finite() {
        return Err(Error::Domain(format!("tighten factor must be positive, got {tighten}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Kernel asymptotics
// ---------------------------------------------------------------------------

/// Default grid for [`certify_rho_asymptotics`]: `points` log-spaced
/// distances |r-1| in [1e-6, 1/10]; both sides of the singularity are
/// checked at each distance.
pub fn rho_asymptotics_grid(points: usize) -> GridSpec {
    GridSpec::new(vec![Axis::log(1e-6, 0.1, points)])
}

/// Check |rho(r) - (-6 log|1-r| + 12 log 2)| <= -22|1-r| log|1-r| + 23|1-r|
/// at r = 1 +- eps for every grid distance eps.
pub fn certify_rho_asymptotics(grid: &GridSpec, tighten: f64) -> Result<CertReport> {
    check_tighten(tighten)?;
    let start = Instant::now();
    let scan = scan_grid(grid, |p| {
        let eps = p[0];
        let bound = asymptotic_error_bound(eps) / tighten;
        let center = -6.0 * eps.ln() + 12.0 * (2.0f64).ln();
        let mut margin = f64::INFINITY;
        for r in [1.0 - eps, 1.0 + eps] {
            match rho_elliptic(r) {
                Ok(e) => margin = margin.min(bound - (e.value - center).abs()),
                Err(_) => return PointOutcome::Skip,
            }
        }
        PointOutcome::Margin(margin)
    })?;
    Ok(finish("rho_asymptotics", grid, scan, 0.0, tighten, start, vec![]))
}

// ---------------------------------------------------------------------------
// Auxiliary integral estimates
// ---------------------------------------------------------------------------

/// Default grid for [`certify_aux_integrals`]: axes (delta, a, b).
pub fn aux_integrals_grid() -> GridSpec {
    GridSpec::new(vec![
        Axis::log(1e-6, 4.0, 120),
        Axis::log(1e-4, 0.99, 40),
        Axis::log(1e-4, 0.99, 40),
    ])
}

/// int_0^1 du / (sqrt(u) sqrt(u + delta)), de-singularized via u = t^2.
fn aux1_integral(delta: f64) -> Result<f64> {
    Ok(adaptive_quad(|t| 2.0 / (t * t + delta).sqrt(), 0.0, 1.0, 1e-12, 1e-12, 10_000)?.value)
}

/// int_0^1 dx / (sqrt(1-x^2) sqrt(a+1-x) sqrt(b+1+x)) via x = 1 - t^2.
fn aux5_integral(a: f64, b: f64) -> Result<f64> {
    Ok(adaptive_quad(
        |t| {
            let x = 1.0 - t * t;
            2.0 / ((1.0 + x).sqrt() * (a + t * t).sqrt() * (b + 1.0 + x).sqrt())
        },
        0.0,
        1.0,
        1e-12,
        1e-12,
        10_000,
    )?
    .value)
}

/// int_0^1 dx / ((1+x) sqrt(1-x) sqrt(a+1-x)) via x = 1 - t^2.
fn aux6_integral(a: f64) -> Result<f64> {
    Ok(adaptive_quad(
        |t| {
            let x = 1.0 - t * t;
            2.0 / ((1.0 + x) * (a + t * t).sqrt())
        },
        0.0,
        1.0,
        1e-12,
        1e-12,
        10_000,
    )?
    .value)
}

/// Verify the three singular-integral estimates used by the kernel
/// asymptotics:
///
/// 1. 0 <= int du/(sqrt(u) sqrt(u+delta)) - log(4/delta) <= delta/2, with
///    the closed form -log(delta) + 2 log(1 + sqrt(1+delta)) as cross-check;
/// 2. the b-perturbation bound (b/2)(log(4/a) + a/2);
/// 3. the (1+x)-weighted bound (a/2) log(1 + 1/a) around log(8/a)/2.
pub fn certify_aux_integrals(grid: &GridSpec, tighten: f64) -> Result<CertReport> {
    check_tighten(tighten)?;
    if grid.axes.len() != 3 {
        return Err(Error::Domain("aux integral grid needs axes (delta, a, b)".into()));
    }
    let start = Instant::now();
    let mut notes = Vec::new();

    // Estimate 1, over the delta axis.
    let g1 = GridSpec::new(vec![grid.axes[0].clone()]);
    let s1 = scan_grid(&g1, |p| {
        let delta = p[0];
        match aux1_integral(delta) {
            Ok(v) => {
                let diff = v - (4.0 / delta).ln();
                let upper = 0.5 * delta / tighten;
                PointOutcome::Margin(diff.min(upper - diff))
            }
            Err(_) => PointOutcome::Skip,
        }
    })?;
    let mut closed_form_dev = 0.0f64;
    for &delta in &g1.axes[0].samples() {
        let v = aux1_integral(delta)?;
        let closed = -delta.ln() + 2.0 * (1.0 + (1.0 + delta).sqrt()).ln();
        closed_form_dev = closed_form_dev.max((v - closed).abs());
    }
    notes.push(format!(
        "estimate 1 quadrature vs closed form: max deviation {closed_form_dev:.3e}"
    ));

    // Estimate 2, over the (a, b) plane.
    let g2 = GridSpec::new(vec![grid.axes[1].clone(), grid.axes[2].clone()]);
    let s2 = scan_grid(&g2, |p| {
        let (a, b) = (p[0], p[1]);
        match (aux5_integral(a, b), aux5_integral(a, 0.0)) {
            (Ok(with_b), Ok(without_b)) => {
                let bound = 0.5 * b * ((4.0 / a).ln() + 0.5 * a) / tighten;
                PointOutcome::Margin(bound - (with_b - without_b).abs())
            }
            _ => PointOutcome::Skip,
        }
    })?;

    // Estimate 3, over the a axis.
    let g3 = GridSpec::new(vec![grid.axes[1].clone()]);
    let s3 = scan_grid(&g3, |p| {
        let a = p[0];
        match aux6_integral(a) {
            Ok(v) => {
                let bound = 0.5 * a * (1.0 + 1.0 / a).ln() / tighten;
                PointOutcome::Margin(bound - (v - 0.5 * (8.0 / a).ln()).abs())
            }
            Err(_) => PointOutcome::Skip,
        }
    })?;

    let mut worst = s1;
    let mut which = 1;
    for (i, s) in [(2, s2), (3, s3)] {
        if s.worst_margin < worst.worst_margin {
            let skipped = worst.skipped;
            let delta = worst.max_adjacent_delta;
            worst = s;
            worst.skipped += skipped;
            worst.max_adjacent_delta = worst.max_adjacent_delta.max(delta);
            which = i;
        } else {
            worst.skipped += s.skipped;
            worst.max_adjacent_delta = worst.max_adjacent_delta.max(s.max_adjacent_delta);
        }
    }
    notes.push(format!("worst margin attained by estimate {which}"));
    Ok(finish("aux_integrals", grid, worst, 0.0, tighten, start, notes))
}

// ---------------------------------------------------------------------------
// Perturbation series bounds
// ---------------------------------------------------------------------------

/// Default grid for [`certify_psi_bounds`] with s up to `s_max`.
pub fn psi_bounds_grid(s_max: f64, s_points: usize, alpha_points: usize) -> GridSpec {
    GridSpec::new(vec![Axis::log(1e-4, s_max, s_points), Axis::periodic(alpha_points)])
}

/// Verify |psi| <= 7/24 s^2 + 17/720 s^4 + s^6 e^{sqrt(2) s},
/// |psi'| <= 14/24 s + 17/180 s^3 + 2 s^5 e^{sqrt(2) s} and the derived
/// bound |s psi' / (1 + psi)| <= 1/198.
pub fn certify_psi_bounds(grid: &GridSpec, tighten: f64) -> Result<CertReport> {
    check_tighten(tighten)?;
    let start = Instant::now();
    let scan = scan_grid(grid, |p| {
        let (s, alpha) = (p[0], p[1]);
        let (v, tail) = match psi(s, alpha, PSI_DEFAULT_KMAX) {
            Ok(x) => x,
            Err(_) => return PointOutcome::Skip,
        };
        let (vp, tailp) = match psi_prime(s, alpha, PSI_DEFAULT_KMAX) {
            Ok(x) => x,
            Err(_) => return PointOutcome::Skip,
        };
        let e = ((2.0f64).sqrt() * s).exp();
        let bound_psi = (7.0 / 24.0 * s * s + 17.0 / 720.0 * s.powi(4) + s.powi(6) * e) / tighten;
        let bound_prime =
            (14.0 / 24.0 * s + 17.0 / 180.0 * s.powi(3) + 2.0 * s.powi(5) * e) / tighten;
        let ratio = s * vp / (1.0 + v);
        let bound_ratio = (1.0 / 198.0) / tighten;
        let margin = (bound_psi - (v.abs() + tail))
            .min(bound_prime - (vp.abs() + tailp))
            .min(bound_ratio - ratio.abs());
        PointOutcome::Margin(margin)
    })?;
    Ok(finish("psi_bounds", grid, scan, 0.0, tighten, start, vec![]))
}

// ---------------------------------------------------------------------------
// Expansion error of the weighted kernel product
// ---------------------------------------------------------------------------

/// Default grid for [`certify_expansion_error`].
///
/// The s range starts at 2e-3: below that the whole alpha row sits inside
/// the singular skip band, and the check itself drowns in rounding (the
/// main terms cancel to O(s^4 log s), which sinks under the ~1e-16
/// absolute noise of the weight evaluation).
pub fn expansion_error_grid(s_points: usize, alpha_points: usize) -> GridSpec {
    GridSpec::new(vec![Axis::log(2e-3, 0.05, s_points), Axis::periodic(alpha_points)])
}

/// The weighted kernel product (a - 1) rho(sqrt(a)) given d = a - 1,
/// extended continuously by 0 where d underflows the representable
/// neighborhood of the singularity (x^2 log x -> 0). The product is
/// otherwise numerically robust for any tiny d: the relative error rho
/// picks up near the singularity is cancelled by the factor d.
pub fn weighted_kernel_product(d: f64) -> Result<f64> {
    let sqrt_a = (1.0 + d).sqrt();
    if sqrt_a == 1.0 || d.abs() < 1e-15 {
        return Ok(0.0);
    }
    Ok(d * rho(sqrt_a, 1e-9)?.value)
}

/// Verify |E| <= -180 s^4 log s + 71 s^4 for the remainder
/// E = (a-1) rho(sqrt(a)) - s^2 w(alpha) (-12 log s - 6 log|w| + 18 log 2)
/// at a = a(c4 + theta(s, alpha)). Points where the kernel evaluation
/// fails outright are skipped and counted; more than 0.1% of them makes
/// the run inconclusive.
pub fn certify_expansion_error(grid: &GridSpec, tighten: f64) -> Result<CertReport> {
    check_tighten(tighten)?;
    let start = Instant::now();
    let scan = scan_grid(grid, |p| {
        let (s, alpha) = (p[0], p[1]);
        let theta = embed(&PolarPoint::new(s, alpha));
        let d = a_c4_minus_one(&theta);
        let product = match weighted_kernel_product(d) {
            Ok(v) => v,
            Err(_) => return PointOutcome::Skip,
        };
        let w = weight_factor(alpha);
        let log_w = if w == 0.0 { 0.0 } else { w.abs().ln() };
        let main = s * s * w * (-12.0 * s.ln() - 6.0 * log_w + 18.0 * (2.0f64).ln());
        let e_term = product - main;
        let bound = (-180.0 * s.powi(4) * s.ln() + 71.0 * s.powi(4)) / tighten;
        PointOutcome::Margin(bound - e_term.abs())
    })?;
    let total = grid.total_points();
    if scan.skipped * 1000 > total {
        return Err(Error::Inconclusive(format!(
            "{} of {} points skipped (> 0.1%)",
            scan.skipped, total
        )));
    }
    Ok(finish("expansion_error", grid, scan, 0.0, tighten, start, vec![]))
}

// ---------------------------------------------------------------------------
// Trigonometric-logarithmic sum
// ---------------------------------------------------------------------------

/// Default alpha grid for [`certify_trig_log`].
pub fn trig_log_grid(points: usize) -> GridSpec {
    GridSpec::new(vec![Axis::periodic(points)])
}

/// The three rotated weight factors w(alpha + 2 pi j / 3), j = 1, 2, 3.
fn thirds(alpha: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        *o = weight_factor(alpha + 2.0 * PI * (j as f64 + 1.0) / 3.0);
    }
    out
}

/// The trig-log sum sum_j w_j log|w_j| with the convention 0 log 0 = 0.
pub fn trig_log_sum(alpha: f64) -> f64 {
    thirds(alpha)
        .iter()
        .map(|&w| if w == 0.0 { 0.0 } else { w * w.abs().ln() })
        .sum()
}

/// Verify sum_j w_j log|w_j| <= 3 log 3 over the alpha grid, plus the
/// exact identities sum a_j = 1 and sum a_j^2 = 1 for a_j = w_j / 3.
pub fn certify_trig_log(grid: &GridSpec, tighten: f64) -> Result<CertReport> {
    check_tighten(tighten)?;
    let start = Instant::now();
    let identity_tol = 1e-12;
    let scan = scan_grid(grid, |p| {
        let ws = thirds(p[0]);
        let sum: f64 = ws.iter().map(|&w| if w == 0.0 { 0.0 } else { w * w.abs().ln() }).sum();
        let bound = 3.0 * (3.0f64).ln() / tighten;
        let mut margin = bound - sum;

        let a1 = ws[0] / 3.0 + ws[1] / 3.0 + ws[2] / 3.0;
        let a2 = ws.iter().map(|w| (w / 3.0) * (w / 3.0)).sum::<f64>();
        if (a1 - 1.0).abs() > identity_tol || (a2 - 1.0).abs() > identity_tol {
            margin = f64::NEG_INFINITY;
        }
        PointOutcome::Margin(margin)
    })?;
    // Equality is attained at alpha = pi/2 (mod pi/3): tolerate rounding.
    Ok(finish("trig_log", grid, scan, 1e-12, tighten, start, vec![]))
}

// ---------------------------------------------------------------------------
// Multiplier lower bound
// ---------------------------------------------------------------------------

/// Default grid for [`certify_multiplier_lower`] with s up to `s_max`.
pub fn multiplier_grid(s_max: f64, s_points: usize, alpha_points: usize) -> GridSpec {
    GridSpec::new(vec![Axis::log(s_max / 100.0, s_max, s_points), Axis::periodic(alpha_points)])
}

/// The multiplier m(theta) = (1/(2 sqrt 3)) sum_{j=2..4} (a_j - 1) rho(sqrt a_j)
/// with a_j = a(theta + c_j). Terms with |a_j - 1| < 1e-12 use the
/// continuous extension 0 of x -> x log x.
pub fn multiplier(theta: &AngleTriple) -> Result<f64> {
    let cs = centers();
    let mut sum = 0.0;
    for c in &cs[1..] {
        let a = a_of(&theta.add(&c.point));
        sum += weighted_kernel_product(a - 1.0)?;
    }
    Ok(sum / (2.0 * 3.0f64.sqrt()))
}

/// Verify m(theta) >= 30 s^2 over the polar grid; the margin reported is
/// min(m/s^2) - 30 (tightening multiplies the 30).
pub fn certify_multiplier_lower(grid: &GridSpec, tighten: f64) -> Result<CertReport> {
    check_tighten(tighten)?;
    let start = Instant::now();
    let scan = scan_grid(grid, |p| {
        let (s, alpha) = (p[0], p[1]);
        let theta = embed(&PolarPoint::new(s, alpha));
        match multiplier(&theta) {
            Ok(m) => PointOutcome::Margin(m / (s * s) - 30.0 * tighten),
            Err(_) => PointOutcome::Skip,
        }
    })?;
    Ok(finish("multiplier_lower", grid, scan, 0.0, tighten, start, vec![]))
}

// ---------------------------------------------------------------------------
// Cauchy-Schwarz factor
// ---------------------------------------------------------------------------

/// Default grid for [`certify_cauchy_schwarz_factor`].
pub fn cauchy_schwarz_grid(s_max: f64, s_points: usize, alpha_points: usize) -> GridSpec {
    GridSpec::new(vec![Axis::log(1e-4, s_max, s_points), Axis::periodic(alpha_points)])
}

/// The scale-degeneracy factor 1 / (2 + s psi'/(1 + psi)).
pub fn cauchy_schwarz_factor(s: f64, alpha: f64) -> Result<f64> {
    let (v, _) = psi(s, alpha, PSI_DEFAULT_KMAX)?;
    let (vp, _) = psi_prime(s, alpha, PSI_DEFAULT_KMAX)?;
    Ok(1.0 / (2.0 + s * vp / (1.0 + v)))
}

/// Verify 1/(2 + s psi'/(1+psi)) <= 101/200 over the grid.
pub fn certify_cauchy_schwarz_factor(grid: &GridSpec, tighten: f64) -> Result<CertReport> {
    check_tighten(tighten)?;
    let start = Instant::now();
    let scan = scan_grid(grid, |p| match cauchy_schwarz_factor(p[0], p[1]) {
        Ok(f) => PointOutcome::Margin(101.0 / 200.0 / tighten - f),
        Err(_) => PointOutcome::Skip,
    })?;
    Ok(finish("cauchy_schwarz_factor", grid, scan, 0.0, tighten, start, vec![]))
}

// ---------------------------------------------------------------------------
// Max-vs-average comparison for localized supports
// ---------------------------------------------------------------------------

/// Default per-dimension resolution for [`certify_step5`].
pub fn step5_grid(points_per_dim: usize) -> GridSpec {
    GridSpec::new(vec![Axis::uniform(-1.0, 1.0, points_per_dim)])
}

/// The sign-averaged weighted kernel value at theta:
/// (1/8) sum_{gamma in {-1,1}^3} (a_gamma - 1) rho(sqrt(a_gamma)).
pub fn signed_average(theta: &AngleTriple) -> Result<f64> {
    // gamma and -gamma give the same summand; four sign classes suffice.
    let patterns: [[f64; 3]; 4] =
        [[1.0, 1.0, 1.0], [-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]];
    let [t1, t2, t3] = theta.0;
    let mut sum = 0.0;
    for g in &patterns {
        let re = g[0] * t1.cos() + g[1] * t2.cos() + g[2] * t3.cos();
        let im = g[0] * t1.sin() + g[1] * t2.sin() + g[2] * t3.sin();
        let a = re * re + im * im;
        sum += weighted_kernel_product(a - 1.0)?;
    }
    Ok(sum / 4.0)
}

/// The torus average (2 pi)^{-3} int (a - 1) rho(sqrt a) d sigma^3,
/// reduced to the radial form (2 pi)^{-2} int_0^3 (r^2 - 1) rho(r)^2 r dr.
pub fn torus_average() -> Result<f64> {
    let integrand = |r: f64| match rho(r, 1e-9) {
        Ok(k) => (r * r - 1.0) * k.value * k.value * r,
        Err(_) => 0.0,
    };
    // Split at the log singularity of rho; the integrand itself extends
    // continuously there ((r^2 - 1) log^2|1-r| -> 0).
    let left = adaptive_quad(&integrand, 0.0, 1.0, 1e-10, 1e-10, 10_000)?;
    let right = adaptive_quad(&integrand, 1.0, 3.0, 1e-10, 1e-10, 10_000)?;
    Ok((left.value + right.value) / (2.0 * PI).powi(2))
}

/// Verify that the maximum over [-eps', eps']^3 of the sign-averaged
/// weighted kernel value stays below the torus average. The grid's first
/// axis supplies the per-dimension resolution; its range is rescaled to
/// [-eps', eps'].
pub fn certify_step5(eps_prime: f64, grid: &GridSpec, tighten: f64) -> Result<CertReport> {
    check_tighten(tighten)?;
    if !(0.0 < eps_prime && eps_prime <= 0.07) {
        return Err(Error::Domain(format!("step5 requires 0 < eps' <= 0.07, got {eps_prime}")));
    }
    grid.validate()?;
    let start = Instant::now();
    let rhs = torus_average()? / tighten;
    let n = grid.axes[0].points;
    let cube = GridSpec::new(vec![
        Axis::uniform(-eps_prime, eps_prime, n),
        Axis::uniform(-eps_prime, eps_prime, n),
        Axis::uniform(-eps_prime, eps_prime, n),
    ]);
    // min over the grid of (RHS - LHS) = RHS - max(LHS).
    let scan = scan_grid(&cube, |p| {
        let theta = AngleTriple([p[0], p[1], p[2]]);
        match signed_average(&theta) {
            Ok(v) => PointOutcome::Margin(rhs - v),
            Err(_) => PointOutcome::Skip,
        }
    })?;
    let notes = vec![format!("torus average (RHS) = {:.12e}", rhs * tighten)];
    Ok(finish("step5", &cube, scan, 0.0, tighten, start, notes))
}

// ---------------------------------------------------------------------------
// Suite runner
// ---------------------------------------------------------------------------

/// Run every certifier on its default grid (support radius `eps` for the
/// grids that depend on it).
pub fn run_all(eps: f64, tighten: f64) -> Result<Vec<CertReport>> {
    let eps_prime = (3.0f64 / 8.0).sqrt() * eps;
    Ok(vec![
        certify_rho_asymptotics(&rho_asymptotics_grid(5000), tighten)?,
        certify_aux_integrals(&aux_integrals_grid(), tighten)?,
        certify_psi_bounds(&psi_bounds_grid(eps.min(0.05), 200, 200), tighten)?,
        certify_expansion_error(&expansion_error_grid(100, 400), tighten)?,
        certify_trig_log(&trig_log_grid(100_000), tighten)?,
        certify_multiplier_lower(&multiplier_grid(eps.min(0.05), 100, 400), tighten)?,
        certify_cauchy_schwarz_factor(&cauchy_schwarz_grid(eps.min(0.05), 100, 400), tighten)?,
        certify_step5(eps_prime.min(0.07), &step5_grid(21), tighten)?,
    ])
}
