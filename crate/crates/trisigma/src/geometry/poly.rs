//! Exact rational arithmetic and the even polynomial families P_2k, Q_2k.
//!
//! The weight deviation at the antipodal center expands as
//!
//! ```text
//! a(c4 + theta(s, alpha)) - 1 = sum_{k>=1} s^{2k} (-1)^k / (2k)! P_2k(sin a, cos a)
//! ```
//!
//! Every P_2k vanishes on the lines sqrt(3) X = +-Y, so 3X^2 - Y^2 divides
//! it exactly; the quotients Q_2k defined by
//! Q_2k (3X^2 - Y^2) = (-1)^k P_2k are the Taylor coefficients of the
//! relative perturbation psi. All coefficients are kept as exact rationals
//! so the division can be certified remainder-free.

use crate::error::{Error, Result};
use std::fmt;

/// Exact rational number over i128. Always normalized: gcd(num, den) = 1,
/// den > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "rational with zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Rational { num: sign * num / g, den: sign * den / g }
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub fn from_int(n: i128) -> Self {
        Rational { num: n, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn add(&self, other: &Rational) -> Rational {
        let g = gcd(self.den, other.den).max(1);
        let lhs = self.num.checked_mul(other.den / g).expect("rational overflow");
        let rhs = other.num.checked_mul(self.den / g).expect("rational overflow");
        Rational::new(lhs + rhs, self.den / g * other.den)
    }

    pub fn sub(&self, other: &Rational) -> Rational {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        let g1 = gcd(self.num, other.den).max(1);
        let g2 = gcd(other.num, self.den).max(1);
        Rational::new(
            (self.num / g1).checked_mul(other.num / g2).expect("rational overflow"),
            (self.den / g2).checked_mul(other.den / g1).expect("rational overflow"),
        )
    }

    pub fn neg(&self) -> Rational {
        Rational { num: -self.num, den: self.den }
    }

    pub fn scale_int(&self, n: i128) -> Rational {
        self.mul(&Rational::from_int(n))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A homogeneous bivariate polynomial in (X, Y) of degree 2k containing
/// only even powers; `coeffs[i]` multiplies X^{2i} Y^{2(k-i)}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenPolynomial {
    coeffs: Vec<Rational>,
}

impl EvenPolynomial {
    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert!(!coeffs.is_empty());
        EvenPolynomial { coeffs }
    }

    /// Half-degree k; the polynomial is homogeneous of degree 2k.
    pub fn half_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        2 * self.half_degree()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Evaluate at (x, y) in floating point.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let x2 = x * x;
        let y2 = y * y;
        let mut result = 0.0f64;
        let mut xp = 1.0f64;
        let k = self.half_degree();
        for (i, c) in self.coeffs.iter().enumerate() {
            result += c.to_f64() * xp * y2.powi((k - i) as i32);
            xp *= x2;
        }
        result
    }

    /// Supremum of |coefficients| as f64, a crude sup-norm proxy on the
    /// unit circle.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl fmt::Display for EvenPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.half_degree();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({c}) X^{} Y^{}", 2 * i, 2 * (k - i))?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn binomial(n: u32, k: u32) -> i128 {
    let mut result: i128 = 1;
    for i in 0..k.min(n - k) {
        result = result * (n - i) as i128 / (i + 1) as i128;
    }
    result
}

/// P_2k(X, Y): the degree-2k member of the expansion of the weight
/// deviation in polar coordinates.
///
/// Construction: with the angle differences written as sqrt(2) cos(alpha),
/// sqrt(2) cos(alpha +- 2pi/3), the 2k-th power sums reduce to
///
/// ```text
/// bracket_k = cos^{2k}(a) - cos^{2k}(a + 2pi/3) - cos^{2k}(a - 2pi/3)
/// ```
///
/// rewritten in X = sin(a), Y = cos(a). P_2k = 2^{k+1} bracket_k for
/// k >= 2; the k = 1 member absorbs a factor 2 so that Q_2 = 1 normalizes
/// the quotient family.
pub fn poly_p(k: usize) -> Result<EvenPolynomial> {
    if k < 1 {
        return Err(Error::Domain(format!("poly_p requires k >= 1, got {k}")));
    }
    if k > 60 {
        return Err(Error::Domain(format!("poly_p coefficients overflow i128 beyond k = 60 (got {k})")));
    }
    // bracket = Y^{2k} - (2/4^k) sum_i C(2k, 2i) 3^i X^{2i} Y^{2(k-i)},
    // scaled by 2^{k+1} (k >= 2) or 2 (k = 1). Keeping the scale inside
    // the sum keeps every coefficient an exact small rational.
    let scale: i128 = if k == 1 { 2 } else { 1i128 << (k + 1) };
    let four_k: i128 = 1i128 << (2 * k);
    let mut coeffs = Vec::with_capacity(k + 1);
    let mut three_pow: i128 = 1;
    for i in 0..=k {
        let c = binomial(2 * k as u32, 2 * i as u32);
        let mut v = Rational::new(-2 * c * three_pow * scale, four_k);
        if i == 0 {
            v = v.add(&Rational::from_int(scale));
        }
        coeffs.push(v);
        three_pow = three_pow.checked_mul(3).expect("rational overflow");
    }
    // coeffs[i] currently indexed by X^{2i}; stored order matches.
    Ok(EvenPolynomial::from_coeffs(coeffs))
}

/// Q_2k(X, Y), defined by Q_2k (3X^2 - Y^2) = (-1)^k P_2k with exact
/// polynomial division; a nonzero remainder is an internal error.
pub fn poly_q(k: usize) -> Result<EvenPolynomial> {
    let p = poly_p(k)?;
    let sign = if k % 2 == 0 { 1 } else { -1 };
    let target: Vec<Rational> = p.coeffs().iter().map(|c| c.scale_int(sign)).collect();

    // (3X^2 - Y^2) * sum_j q_j X^{2j} Y^{2(k-1-j)} matched coefficient-wise:
    //   j = 0:        -q_0           = t_0
    //   1 <= j < k:   3q_{j-1} - q_j = t_j
    //   j = k:        3q_{k-1}       = t_k   (remainder check)
    let mut q = Vec::with_capacity(k);
    q.push(target[0].neg());
    for j in 1..k {
        let v = q[j - 1].scale_int(3).sub(&target[j]);
        q.push(v);
    }
    let remainder = q[k - 1].scale_int(3).sub(&target[k]);
    if !remainder.is_zero() {
        return Err(Error::Internal(format!(
            "division of P_{} by 3X^2 - Y^2 left remainder {remainder}",
            2 * k
        )));
    }
    Ok(EvenPolynomial::from_coeffs(q))
}
