//! Exact arithmetic: dense rational polynomials in `x` and truncated power
//! series in `z` whose coefficients are such polynomials.

mod poly;
mod series;

pub use poly::ExactPolynomial;
pub use series::BivariateSeries;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Natural log of a positive big integer without overflowing `f64`.
pub fn ln_bigint(v: &BigInt) -> f64 {
    debug_assert!(v.is_positive());
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = v >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational.
pub fn ln_rational(v: &Rational) -> f64 {
    ln_bigint(v.numer()) - ln_bigint(v.denom())
}

/// Nearest `f64`, accurate even when numerator and denominator overflow.
pub fn rational_to_f64(v: &Rational) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    if let Some(f) = v.to_f64() {
        if f.is_finite() && f != 0.0 {
            return f;
        }
    }
    let sign = if v.is_negative() { -1.0 } else { 1.0 };
    sign * ln_rational(&v.abs()).exp()
}
