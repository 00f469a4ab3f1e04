//! Both sides of the positivity inequality for localized supports, and
//! the largest support radius at which it still holds.
//!
//! For functions supported in an eps-neighborhood of the lattice, the
//! quadratic form stays positive semi-definite as long as
//!
//! ```text
//! inf_{|theta| <= eps} m(theta)/|theta|^2
//!     >= 18 pi sup_{s <= eps, alpha} 1/(2 + s psi'/(1 + psi)),
//! ```
//!
//! where m is the diagonal multiplier of the reduced form. The left side
//! shrinks and the right side grows as eps increases; their single
//! crossing is the method's maximal radius. Both sides are evaluated on
//! polar grids whose s-axis always includes the boundary s = eps, where
//! the extrema live (verified by the scan, not assumed).

use crate::certifier::{cauchy_schwarz_factor, multiplier, Axis, GridSpec, Spacing};
use crate::error::{Error, Result};
use crate::geometry::{embed, PolarPoint};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tabulated values of both sides of the inequality over a range of
/// support radii.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub eps_values: Vec<f64>,
    /// inf side (non-increasing in eps).
    pub lhs: Vec<f64>,
    /// sup side (non-decreasing in eps).
    pub rhs: Vec<f64>,
}

impl ThresholdCurve {
    /// Delimiter-separated export with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,lhs,rhs\n");
        for i in 0..self.eps_values.len() {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e}\n",
                self.eps_values[i], self.lhs[i], self.rhs[i]
            ));
        }
        out
    }

    /// The eps where lhs - rhs changes sign, linearly interpolated; None
    /// if the curve never crosses.
    pub fn crossing(&self) -> Option<f64> {
        for i in 1..self.eps_values.len() {
            let (g0, g1) = (self.lhs[i - 1] - self.rhs[i - 1], self.lhs[i] - self.rhs[i]);
            if g0 >= 0.0 && g1 < 0.0 {
                let t = g0 / (g0 - g1);
                let (e0, e1) = (self.eps_values[i - 1], self.eps_values[i]);
                return Some(e0 + t * (e1 - e0));
            }
        }
        None
    }
}

/// Default polar grid template: 400 log-spaced radii, 720 angles. The
/// radial range is rescaled to [eps/100, eps] at use; the integrands vary
/// logarithmically in s and slowly in alpha.
pub fn default_grid() -> GridSpec {
    GridSpec::new(vec![Axis::log(1e-2, 1.0, 400), Axis::periodic(720)])
}

fn polar_axes(eps: f64, grid: &GridSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    grid.validate()?;
    if grid.axes.len() != 2 {
        return Err(Error::Domain("threshold grids need axes (s, alpha)".into()));
    }
    let s_axis =
        Axis { lo: eps / 100.0, hi: eps, points: grid.axes[0].points, spacing: Spacing::Log };
    Ok((s_axis.samples(), grid.axes[1].samples()))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0 < eps && eps <= 0.15) {
        return Err(Error::Domain(format!("support radius must lie in (0, 0.15], got {eps}")));
    }
    Ok(())
}

/// inf over {theta = theta(s, alpha) : s <= eps} of m(theta)/s^2: the
/// normalized diagonal multiplier. The boundary s = eps is always a grid
/// point; the infimum is expected there and the scan confirms it.
pub fn lhs_inf(eps: f64, grid: &GridSpec) -> Result<f64> {
    check_eps(eps)?;
    let (s_vals, alpha_vals) = polar_axes(eps, grid)?;
    let minima: Vec<f64> = s_vals
        .par_iter()
        .map(|&s| {
            let mut row_min = f64::INFINITY;
            for &alpha in &alpha_vals {
                let theta = embed(&PolarPoint::new(s, alpha));
                if let Ok(m) = multiplier(&theta) {
                    row_min = row_min.min(m / (s * s));
                }
            }
            row_min
        })
        .collect();
    Ok(minima.into_iter().fold(f64::INFINITY, f64::min))
}

/// 18 pi sup over {s <= eps, alpha} of 1/(2 + s psi'/(1 + psi)).
pub fn rhs_sup(eps: f64, grid: &GridSpec) -> Result<f64> {
    check_eps(eps)?;
    let (s_vals, alpha_vals) = polar_axes(eps, grid)?;
    let maxima: Vec<f64> = s_vals
        .par_iter()
        .map(|&s| {
            let mut row_max = f64::NEG_INFINITY;
            for &alpha in &alpha_vals {
                if let Ok(f) = cauchy_schwarz_factor(s, alpha) {
                    row_max = row_max.max(f);
                }
            }
            row_max
        })
        .collect();
    Ok(18.0 * PI * maxima.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// Tabulate both sides on `n_points` radii between `eps_lo` and `eps_hi`.
pub fn scan(eps_lo: f64, eps_hi: f64, n_points: usize, grid: &GridSpec) -> Result<ThresholdCurve> {
    if !(0.0 < eps_lo && eps_lo < eps_hi && eps_hi <= 0.15) {
        return Err(Error::Domain(format!(
            "scan range must satisfy 0 < lo < hi <= 0.15, got [{eps_lo}, {eps_hi}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::Domain("scan needs at least 2 points".into()));
    }
    let mut curve = ThresholdCurve {
        eps_values: Vec::with_capacity(n_points),
        lhs: Vec::with_capacity(n_points),
        rhs: Vec::with_capacity(n_points),
    };
    for i in 0..n_points {
        let eps = eps_lo + (eps_hi - eps_lo) * i as f64 / (n_points - 1) as f64;
        curve.eps_values.push(eps);
        curve.lhs.push(lhs_inf(eps, grid)?);
        curve.rhs.push(rhs_sup(eps, grid)?);
    }
    Ok(curve)
}

/// Locate the crossing of the two sides by bisection on
/// lhs_inf(eps) - rhs_sup(eps) over [0.01, 0.15], to within `tolerance`.
pub fn max_epsilon(tolerance: f64, grid: &GridSpec) -> Result<f64> {
    if tolerance < 1e-4 {
        return Err(Error::Domain(format!(
            "bisection tolerance must be >= 1e-4, got {tolerance}"
        )));
    }
    let gap = |eps: f64| -> Result<f64> { Ok(lhs_inf(eps, grid)? - rhs_sup(eps, grid)?) };
    let (mut lo, mut hi) = (0.01, 0.15);
    let (glo, ghi) = (gap(lo)?, gap(hi)?);
    if glo <= 0.0 || ghi >= 0.0 {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: gap({lo}) = {glo}, gap({hi}) = {ghi}"
        )));
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The induced arc half-width eps' = sqrt(3/8) eps on the circle.
pub fn eps_prime_of(eps: f64) -> f64 {
    (3.0f64 / 8.0).sqrt() * eps
}
