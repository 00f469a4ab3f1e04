//! The radial kernel of the triple autoconvolution of arc length measure
//! on the unit circle.
//!
//! Writing sigma for arc length on S^1, the convolution sigma*sigma*sigma
//! is radial; its profile rho satisfies rho(r) = 0 for r > 3, stays
//! positive on (0, 3) and diverges like -6 log|1 - r| as r -> 1. Three
//! independent evaluation routes are provided:
//!
//! * `rho_quadrature` - the integral representation, de-singularized and
//!   fed to adaptive Gauss-Kronrod quadrature;
//! * `rho_elliptic` - the closed form in terms of the complete elliptic
//!   integral K, evaluated by the AGM;
//! * `rho_asymptotic` - the logarithmic expansion near r = 1 with an
//!   explicit error bound.
//!
//! `rho` dispatches between the elliptic and asymptotic routes based on the
//! requested tolerance.

use crate::error::{Error, Result};
use crate::quad::adaptive_quad;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which evaluation route produced a kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Elliptic,
    Asymptotic,
}

/// A kernel value together with a guaranteed absolute error bound
/// (`f64::INFINITY` when no bound is known).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelEstimate {
    pub value: f64,
    pub method: Method,
    pub error_bound: f64,
}

/// Near-singular cutoff below which the quadrature route refuses to run.
pub const QUADRATURE_SINGULAR_CUTOFF: f64 = 1e-4;

/// Validity radius of the asymptotic expansion.
pub const ASYMPTOTIC_RADIUS: f64 = 0.1;

/// Complete elliptic integral of the first kind,
/// K(k) = int_0^1 dx / (sqrt(1-x^2) sqrt(1-k^2 x^2)),
/// computed by the arithmetic-geometric mean iteration.
///
/// The argument is the modulus k, not the parameter m = k^2.
pub fn elliptic_k(modulus: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&modulus) {
        if modulus == 1.0 {
            return Err(Error::Divergence("K(k) diverges as k -> 1".into()));
        }
        return Err(Error::Domain(format!("elliptic_k requires 0 <= k < 1, got {modulus}")));
    }
    Ok(elliptic_k_from_complement(1.0 - modulus * modulus))
}

/// K given the complementary parameter k'^2 = 1 - k^2 directly.
///
/// Callers that can form k'^2 without cancellation (as the closed form of
/// rho can) retain full accuracy arbitrarily close to the k -> 1
/// singularity.
fn elliptic_k_from_complement(kprime_sq: f64) -> f64 {
    debug_assert!(kprime_sq > 0.0 && kprime_sq <= 1.0);
    let mut a = 1.0f64;
    let mut b = kprime_sq.sqrt();
    for _ in 0..64 {
        if (a - b).abs() < 1e-15 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

/// Lower integration limit A(r) of the integral representation.
fn lower_limit(r: f64) -> f64 {
    -1.0 + (0.0f64).max((3.0 + r) * (r - 1.0) / (2.0 * r))
}

/// rho(r) from the integral representation
/// rho(r) = (4/r) int_{A(r)}^1 du / (sqrt(1-u^2) sqrt(c1+1-u) sqrt(c2+1+u)),
/// c1 = (1-r)^2/(2r), c2 = (3+r)(1-r)/(2r).
///
/// The inverse-square-root endpoint singularities are removed by splitting
/// at the midpoint and substituting u = 1 - t^2 (upper half) and
/// u = A(r) + t^2 (lower half), after which adaptive quadrature converges
/// quickly. Refuses |r - 1| < 1e-4, where the integrand's condition number
/// exhausts double precision; at r = 3 the interval collapses to a point
/// and the representation loses the boundary value, so that case errors
/// out as well (the closed form gives rho(3) = 2 pi / sqrt(3)).
pub fn rho_quadrature(r: f64) -> Result<KernelEstimate> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("rho_quadrature requires r > 0, got {r}")));
    }
    if r > 3.0 {
        return Ok(KernelEstimate { value: 0.0, method: Method::Quadrature, error_bound: 0.0 });
    }
    if (r - 1.0).abs() < QUADRATURE_SINGULAR_CUTOFF {
        return Err(Error::NearSingular(format!(
            "|r - 1| = {:e} < {:e}; use the asymptotic or elliptic route",
            (r - 1.0).abs(),
            QUADRATURE_SINGULAR_CUTOFF
        )));
    }
    if r == 3.0 {
        return Err(Error::NearSingular(
            "integration interval degenerates at the support boundary r = 3".into(),
        ));
    }

    let c1 = (1.0 - r) * (1.0 - r) / (2.0 * r);
    let c2 = (3.0 + r) * (1.0 - r) / (2.0 * r);
    let a = lower_limit(r);
    let m = 0.5 * (a + 1.0);

    // Upper half [m, 1] under u = 1 - t^2: the sqrt(1-u) factor cancels.
    let upper = |t: f64| {
        let u = 1.0 - t * t;
        2.0 / ((1.0 + u).sqrt() * (c1 + t * t).sqrt() * (c2 + 1.0 + u).sqrt())
    };
    // Lower half [A, m] under u = A + t^2: the vanishing factor is
    // sqrt(1+u) for r < 1 (A = -1) and sqrt(c2+1+u) for r > 1.
    let lower: Box<dyn Fn(f64) -> f64> = if r < 1.0 {
        Box::new(move |t: f64| {
            let u = -1.0 + t * t;
            2.0 / ((1.0 - u).sqrt() * (c1 + 1.0 - u).sqrt() * (c2 + t * t).sqrt())
        })
    } else {
        Box::new(move |t: f64| {
            let u = a + t * t;
            2.0 / ((1.0 - u * u).sqrt() * (c1 + 1.0 - u).sqrt())
        })
    };

    let up = adaptive_quad(upper, 0.0, (1.0 - m).sqrt(), 1e-10, 1e-10, 10_000)?;
    let lo = adaptive_quad(lower, 0.0, (m - a).sqrt(), 1e-10, 1e-10, 10_000)?;

    let scale = 4.0 / r;
    Ok(KernelEstimate {
        value: scale * (up.value + lo.value),
        method: Method::Quadrature,
        error_bound: scale * (up.abs_error + lo.abs_error),
    })
}

/// rho(r) from the closed form
///
/// ```text
/// rho(r) = 16 / sqrt((r+1)^3 (3-r)) K( sqrt(16r / ((r+1)^3 (3-r))) )   0 <= r < 1
///        =  4 / sqrt(r)            K( sqrt((r+1)^3 (3-r) / (16r)) )    1 <  r <= 3
///        =  0                                                          r > 3
/// ```
///
/// The complementary parameter satisfies the exact algebraic identity
/// (r+1)^3 (3-r) - 16r = (1-r)^3 (3+r), which lets K be evaluated without
/// cancellation even extremely close to the r = 1 singularity.
pub fn rho_elliptic(r: f64) -> Result<KernelEstimate> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("rho_elliptic requires r > 0, got {r}")));
    }
    if r == 1.0 {
        return Err(Error::Divergence("rho diverges logarithmically at r = 1".into()));
    }
    if r > 3.0 {
        return Ok(KernelEstimate { value: 0.0, method: Method::Elliptic, error_bound: 0.0 });
    }

    let p = (r + 1.0).powi(3) * (3.0 - r);
    let (prefactor, kprime_sq) = if r < 1.0 {
        // k'^2 = (1-r)^3 (3+r) / ((r+1)^3 (3-r))
        (16.0 / p.sqrt(), (1.0 - r).powi(3) * (3.0 + r) / p)
    } else {
        // k'^2 = (r-1)^3 (3+r) / (16r)
        (4.0 / r.sqrt(), (r - 1.0).powi(3) * (3.0 + r) / (16.0 * r))
    };
    let k = elliptic_k_from_complement(kprime_sq);
    let value = prefactor * k;
    // Rounding model: k'^2 carries a few ulps of relative error and the AGM
    // resolves K to ~1e-15 relatively; the log-derivative dK/dlog(k') is
    // bounded by 1, so a small multiple of eps * (value + prefactor) covers
    // the result.
    let error_bound = 8.0 * f64::EPSILON * (value.abs() + prefactor.abs());
    Ok(KernelEstimate { value, method: Method::Elliptic, error_bound })
}

/// Error bound of the asymptotic expansion at distance `eps` from r = 1:
/// -22 eps log(eps) + 23 eps.
pub fn asymptotic_error_bound(eps: f64) -> f64 {
    -22.0 * eps * eps.ln() + 23.0 * eps
}

/// The logarithmic expansion rho(r) ~ -6 log|1-r| + 12 log 2, valid for
/// 0 < |r-1| <= 1/10 with guaranteed error -22|r-1| log|r-1| + 23|r-1|.
pub fn rho_asymptotic(r: f64) -> Result<KernelEstimate> {
    let eps = (r - 1.0).abs();
    if eps == 0.0 {
        return Err(Error::Divergence("rho diverges logarithmically at r = 1".into()));
    }
    // The slack admits arguments like r = 1.1 whose distance to 1 rounds
    // a few ulps above the nominal band edge.
    if eps > ASYMPTOTIC_RADIUS * (1.0 + 1e-12) {
        return Err(Error::OutOfValidity(format!(
            "asymptotic expansion requires |r - 1| <= {ASYMPTOTIC_RADIUS}, got {eps}"
        )));
    }
    Ok(KernelEstimate {
        value: -6.0 * eps.ln() + 12.0 * (2.0f64).ln(),
        method: Method::Asymptotic,
        error_bound: asymptotic_error_bound(eps),
    })
}

/// Evaluate rho(r) to absolute tolerance `tol`, choosing the route.
///
/// The asymptotic expansion is used inside the band around r = 1 where its
/// guaranteed bound already beats `tol`; everywhere else the closed form
/// runs. If neither route can certify `tol` the call fails with a
/// best-effort value.
pub fn rho(r: f64, tol: f64) -> Result<KernelEstimate> {
    if r <= 0.0 {
        return Err(Error::Domain(format!("rho requires r > 0, got {r}")));
    }
    if tol <= 0.0 {
        return Err(Error::Domain(format!("rho requires tol > 0, got {tol}")));
    }
    if r == 1.0 {
        return Err(Error::Divergence("rho diverges logarithmically at r = 1".into()));
    }
    let eps = (r - 1.0).abs();
    if eps <= ASYMPTOTIC_RADIUS && asymptotic_error_bound(eps) <= tol {
        return rho_asymptotic(r);
    }
    let est = rho_elliptic(r)?;
    if est.error_bound <= tol {
        Ok(est)
    } else {
        Err(Error::Precision { requested: tol, achieved: est.error_bound, best_effort: est.value })
    }
}
