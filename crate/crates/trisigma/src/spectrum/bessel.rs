//! Bessel functions of the first kind by downward recurrence.
//!
//! Integer orders only. The three-term recurrence
//! J_{n-1}(x) = (2n/x) J_n(x) - J_{n+1}(x) is run downward from a start
//! order safely above both the requested order and the turning point
//! x = n, then normalized with J_0 + 2 sum_k J_{2k} = 1 (Miller's
//! algorithm). One sweep yields every order up to nmax, which is what the
//! radial pairing tables want.

use crate::error::{Error, Result};

/// Largest order accepted by the scalar entry point.
pub const MAX_ORDER: i64 = 256;

/// Largest argument accepted.
pub const MAX_ARGUMENT: f64 = 1e6;

/// J_n(x) for integer n (|n| <= 256) and 0 <= x <= 1e6, accurate to
/// ~1e-13 relative away from zeros. Negative orders use
/// J_{-n} = (-1)^n J_n.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    if n.abs() > MAX_ORDER {
        return Err(Error::Precision {
            requested: n.abs() as f64,
            achieved: MAX_ORDER as f64,
            best_effort: f64::NAN,
        });
    }
    if !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::Domain(format!("bessel_j requires 0 <= x <= 1e6, got {x}")));
    }
    let m = n.unsigned_abs() as usize;
    let values = bessel_j_upto(m, x);
    let v = values[m];
    Ok(if n < 0 && n % 2 != 0 { -v } else { v })
}

/// J_0(x) .. J_nmax(x) in one downward sweep.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return out;
    }
    // Start far enough above max(nmax, x) for the minimal solution to
    // dominate once the recurrence reaches the orders we keep.
    let top = nmax.max(x.ceil() as usize);
    let start = top + 20 + 2 * (top as f64).sqrt().ceil() as usize;
    let start = if start % 2 == 0 { start } else { start + 1 };

    let mut out = vec![0.0; nmax + 1];
    let mut jp = 0.0f64; // J_{k+1}
    let mut j = 1e-300f64; // J_k (arbitrary seed)
    let mut norm = 0.0f64; // accumulates J_0 + 2 sum J_{2k}
    for k in (0..=start).rev() {
        let jm = (2.0 * (k as f64 + 1.0) / x) * j - jp;
        jp = j;
        j = jm;
        // j now holds the trial value of J_k.
        if k % 2 == 0 {
            norm += if k == 0 { j } else { 2.0 * j };
        }
        if k <= nmax {
            out[k] = j;
        }
        if j.abs() > 1e250 {
            // Rescale to dodge overflow; relative values are all that matter.
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}
