use num_bigint::BigInt;

use super::{factorial, ExactPolynomial};
use crate::{Error, Rational, Result};

/// Power series in `z` truncated after `z^order`, with coefficients that are
/// polynomials in `x`.
///
/// All binary operations require equal orders; the product is computed only
/// up to the truncation order, so it depends on nothing above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariateSeries {
    coeffs: Vec<ExactPolynomial>,
}

impl BivariateSeries {
    pub fn zero(order: usize) -> Self {
        Self { coeffs: vec![ExactPolynomial::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = ExactPolynomial::one();
        s
    }

    /// Builds a series from its leading coefficients, padding with zeros or
    /// dropping terms above `order`.
    pub fn from_coeffs(order: usize, mut coeffs: Vec<ExactPolynomial>) -> Self {
        coeffs.resize(order + 1, ExactPolynomial::zero());
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of `z^p`.
    pub fn coeff(&self, p: usize) -> &ExactPolynomial {
        &self.coeffs[p]
    }

    pub fn coeffs(&self) -> &[ExactPolynomial] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, p: usize, c: ExactPolynomial) {
        self.coeffs[p] = c;
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::from_coeffs(order, self.coeffs[..=order.min(self.order())].to_vec())
    }

    /// `p!·[z^p]`, the `p`-th term of the sequence this series is the
    /// exponential generating function of.
    pub fn egf_term(&self, p: usize) -> ExactPolynomial {
        self.coeffs[p].scale(&Rational::from_integer(factorial(p)))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.check_order(rhs);
        Self { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.check_order(rhs);
        Self { coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.check_order(rhs);
        let order = self.order();
        let coeffs = (0..=order)
            .map(|p| {
                (0..=p)
                    .filter(|&i| !self.coeffs[i].is_zero() && !rhs.coeffs[p - i].is_zero())
                    .fold(ExactPolynomial::zero(), |acc, i| {
                        &acc + &(&self.coeffs[i] * &rhs.coeffs[p - i])
                    })
            })
            .collect();
        Self { coeffs }
    }

    /// Multiplies every coefficient by a polynomial in `x` alone.
    pub fn mul_poly(&self, q: &ExactPolynomial) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| a * q).collect() }
    }

    /// Formal `d/dz`; the top coefficient becomes zero.
    pub fn derivative_z(&self) -> Self {
        let order = self.order();
        let coeffs = (0..=order)
            .map(|p| {
                if p < order {
                    self.coeffs[p + 1].scale(&Rational::from_integer(BigInt::from(p + 1)))
                } else {
                    ExactPolynomial::zero()
                }
            })
            .collect();
        Self { coeffs }
    }

    /// Substitutes `x = t`, leaving a series with constant coefficients.
    pub fn eval_x(&self, t: &Rational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|a| ExactPolynomial::constant(a.eval(t))).collect() }
    }

    /// `exp(self)` to the same order.
    ///
    /// Uses `F' = g'·F`, i.e. `p·F_p = Σ_{k=1..p} k·g_k·F_{p-k}`, which keeps
    /// every coefficient exact. The constant term must vanish.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm(self.coeffs[0].to_string()));
        }
        let order = self.order();
        let weighted: Vec<ExactPolynomial> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, g)| g.scale(&Rational::from_integer(BigInt::from(k))))
            .collect();
        let mut out = Self::one(order);
        for p in 1..=order {
            let mut acc = ExactPolynomial::zero();
            for (k, w) in weighted.iter().enumerate().take(p + 1).skip(1) {
                if w.is_zero() || out.coeffs[p - k].is_zero() {
                    continue;
                }
                acc = &acc + &(w * &out.coeffs[p - k]);
            }
            out.coeffs[p] = acc.scale(&Rational::new(BigInt::from(1), BigInt::from(p)));
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(ExactPolynomial::is_zero)
    }

    fn check_order(&self, rhs: &Self) {
        assert_eq!(self.order(), rhs.order(), "series orders differ");
    }
}

impl Default for BivariateSeries {
    fn default() -> Self {
        Self::zero(0)
    }
}
