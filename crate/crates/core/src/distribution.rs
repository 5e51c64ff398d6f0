//! Exact block-count distributions `P(X_n = k) = p_{n,k} / P_n(1)` and their
//! distance to the normal law.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::algebra::{integer, rational_to_f64, ExactPolynomial};
use crate::families::FamilyDescriptor;
use crate::{Error, Rational, Result};

/// Standard normal distribution function, `Φ(t) = erfc(-t/√2) / 2`.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PmfTable {
    pub n: usize,
    /// Nonzero probabilities only.
    pub probs: BTreeMap<usize, Rational>,
    pub mean: Rational,
    pub variance: Rational,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl PmfTable {
    pub fn max_mass(&self) -> f64 {
        self.probs.values().map(rational_to_f64).fold(0.0, f64::max)
    }

    pub fn support_end(&self) -> usize {
        self.probs.keys().next_back().copied().unwrap_or(0)
    }
}

/// Normalizes `P_n` into the distribution of `X_n`.
pub fn pmf(p: &ExactPolynomial, n: usize) -> Result<PmfTable> {
    if let Some(k) = p.coeffs().iter().position(Signed::is_negative) {
        return Err(Error::NegativeCoefficient { n, k, value: p.coeff(k).to_string() });
    }
    let total = p.eval(&Rational::one());
    if total.is_zero() {
        return Err(Error::ZeroMass(n));
    }
    let probs: BTreeMap<usize, Rational> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k, c / &total))
        .collect();

    let mean = probs
        .iter()
        .fold(Rational::zero(), |acc, (k, q)| acc + q * BigInt::from(*k));
    // Exact central moments 2..4, then convert.
    let mut central = [Rational::zero(), Rational::zero(), Rational::zero()];
    for (k, q) in &probs {
        let dev = integer(*k as i64) - &mean;
        let dev2 = &dev * &dev;
        central[0] += q * &dev2;
        central[1] += q * &dev2 * &dev;
        central[2] += q * &dev2 * &dev2;
    }
    let [variance, mu3, mu4] = central;
    let (skewness, excess_kurtosis) = if variance.is_zero() {
        (f64::NAN, f64::NAN)
    } else {
        let v = rational_to_f64(&variance);
        (rational_to_f64(&mu3) / v.powf(1.5), rational_to_f64(&(mu4 / (&variance * &variance))) - 3.0)
    };
    Ok(PmfTable { n, probs, mean, variance, skewness, excess_kurtosis })
}

/// Mean and variance straight from the generating polynomial:
/// `P'(1)/P(1)` and `P''(1)/P(1) + mean − mean²`.
pub fn moments_from_derivatives(p: &ExactPolynomial) -> Option<(Rational, Rational)> {
    let one = Rational::one();
    let total = p.eval(&one);
    if total.is_zero() {
        return None;
    }
    let d1 = p.derivative();
    let mean = d1.eval(&one) / &total;
    let var = d1.derivative().eval(&one) / &total + &mean - &mean * &mean;
    Some((mean, var))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalityReport {
    pub n: usize,
    /// `sup_k |P(X ≤ k) − Φ((k − μ)/σ)|` with the exact mean and deviation.
    pub ks_plain: f64,
    /// Same with the continuity-corrected argument `(k + 1/2 − μ)/σ`.
    pub ks_continuity: f64,
    pub standardized_third: f64,
    pub standardized_fourth: f64,
    /// `d·n / log n`.
    pub center: f64,
    /// `d·√n / log n`.
    pub scale: f64,
    pub ks_theorem_plain: f64,
    pub ks_theorem_continuity: f64,
}

/// Kolmogorov distance diagnostics of one exact PMF against the normal law.
pub fn normality(table: &PmfTable, d: usize) -> Result<NormalityReport> {
    let n = table.n;
    if n < 2 {
        return Err(Error::NonPositiveLog(n));
    }
    if table.variance.is_zero() {
        return Err(Error::ZeroVariance(n));
    }
    let mu = rational_to_f64(&table.mean);
    let sigma = rational_to_f64(&table.variance).sqrt();
    let log_n = (n as f64).ln();
    let center = d as f64 * n as f64 / log_n;
    let scale = d as f64 * (n as f64).sqrt() / log_n;

    // Exact running CDF, converted once per k.
    let mut cdf = Vec::with_capacity(table.support_end() + 1);
    let mut acc = Rational::zero();
    for k in 0..=table.support_end() {
        if let Some(q) = table.probs.get(&k) {
            acc += q;
        }
        cdf.push(rational_to_f64(&acc));
    }
    let distance = |loc: f64, sd: f64, shift: f64| -> f64 {
        cdf.iter()
            .enumerate()
            .map(|(k, f)| (f - normal_cdf((k as f64 + shift - loc) / sd)).abs())
            .fold(0.0, f64::max)
    };
    Ok(NormalityReport {
        n,
        ks_plain: distance(mu, sigma, 0.0),
        ks_continuity: distance(mu, sigma, 0.5),
        standardized_third: table.skewness,
        standardized_fourth: table.excess_kurtosis + 3.0,
        center,
        scale,
        ks_theorem_plain: distance(center, scale, 0.0),
        ks_theorem_continuity: distance(center, scale, 0.5),
    })
}

/// One report per requested `n`, from a single pass of the recurrence.
pub fn clt_scan(fam: &FamilyDescriptor, ns: &[usize]) -> Result<Vec<NormalityReport>> {
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return Err(Error::NonPositiveLog(bad));
    }
    let Some(&max_n) = ns.iter().max() else {
        return Ok(Vec::new());
    };
    let d = fam.saddle.theorem_constants().d;
    let start = fam.spec.start_index();
    let polys = fam.spec.generate(max_n.max(start))?;
    ns.iter()
        .map(|&n| {
            let p = n.checked_sub(start).and_then(|i| polys.get(i)).cloned().unwrap_or_default();
            normality(&pmf(&p, n)?, d)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeanIdentityReport {
    pub checked: usize,
    /// First `n` where the two means differ, with both values.
    pub mismatch: Option<(usize, Rational, Rational)>,
}

/// Checks `E X_n = T_{n+1}(1)/(m·T_n(1)) − (1 + c)/m` for `γ = x + c`.
pub fn mean_identity_check(fam: &FamilyDescriptor, max_n: usize) -> Result<MeanIdentityReport> {
    let spec = &fam.spec;
    let gamma = spec.gamma();
    if !spec.lags().is_empty()
        || spec.start_index() != 0
        || !spec.start_poly().is_one()
        || gamma.degree() != 1
        || !gamma.coeff(1).is_one()
    {
        return Err(Error::UnsupportedShape(format!(
            "{}: the mean identity needs γ = x + c, no lags and P_0 = 1",
            fam.invocation()
        )));
    }
    let c = gamma.coeff(0);
    let m = spec.m();
    let polys = spec.generate(max_n + 1)?;
    let one = Rational::one();
    let sums: Vec<Rational> = polys.iter().map(|p| p.eval(&one)).collect();
    for n in 0..=max_n {
        let mean = pmf(&polys[n], n)?.mean;
        let formula = &sums[n + 1] / (m * &sums[n]) - (&one + &c) / m;
        if mean != formula {
            return Ok(MeanIdentityReport { checked: n, mismatch: Some((n, mean, formula)) });
        }
    }
    Ok(MeanIdentityReport { checked: max_n + 1, mismatch: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational;
    use crate::families::family;

    #[test]
    fn stirling_row_three() {
        let t = pmf(&ExactPolynomial::from_integers(&[0, 1, 3, 1]), 3).unwrap();
        let expected: BTreeMap<usize, Rational> =
            [(1, rational(1, 5)), (2, rational(3, 5)), (3, rational(1, 5))].into();
        assert_eq!(t.probs, expected);
        assert_eq!(t.mean, integer(2));
        assert_eq!(t.variance, rational(2, 5));
        assert!(t.skewness.abs() < 1e-15);
    }

    #[test]
    fn point_mass() {
        let t = pmf(&ExactPolynomial::one(), 0).unwrap();
        assert_eq!(t.probs.len(), 1);
        assert_eq!(t.mean, integer(0));
        assert_eq!(t.variance, integer(0));
        assert!(matches!(normality(&t, 1), Err(Error::NonPositiveLog(0))));
        let t = pmf(&ExactPolynomial::monomial(integer(3), 4), 5).unwrap();
        assert_eq!(normality(&t, 1), Err(Error::ZeroVariance(5)));
    }

    #[test]
    fn invalid_rows() {
        assert_eq!(pmf(&ExactPolynomial::zero(), 1), Err(Error::ZeroMass(1)));
        let neg = ExactPolynomial::from_integers(&[-1, 1]);
        assert!(matches!(pmf(&neg, 1), Err(Error::NegativeCoefficient { k: 0, .. })));
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((normal_cdf(-2.5) - 0.006_209_665_325_776_132).abs() < 1e-12);
        for i in 0..60 {
            let t = i as f64 * 0.13;
            assert!((normal_cdf(-t) - (1.0 - normal_cdf(t))).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_moments_agree() {
        for fam in crate::families::default_families() {
            let start = fam.spec.start_index();
            for (i, p) in fam.spec.generate(30).unwrap().iter().enumerate() {
                let Ok(t) = pmf(p, start + i) else { continue };
                let (mean, var) = moments_from_derivatives(p).unwrap();
                assert_eq!(t.mean, mean, "{}", fam.invocation());
                assert_eq!(t.variance, var, "{}", fam.invocation());
                let sum = t.probs.values().fold(Rational::zero(), |a, q| a + q);
                assert!(sum.is_one());
            }
        }
    }

    #[test]
    fn wang_mean_identity() {
        assert!(mean_identity_check(&family("whitney", &[("m", 3), ("c", 2)]).unwrap(), 10)
            .unwrap()
            .mismatch
            .is_none());
        assert!(mean_identity_check(&family("dowling", &[("m", 2)]).unwrap(), 10)
            .unwrap()
            .mismatch
            .is_none());
        let bad = family("assoc_stirling", &[("s", 2)]).unwrap();
        assert!(matches!(mean_identity_check(&bad, 5), Err(Error::UnsupportedShape(_))));
    }

    #[test]
    fn scan_rejects_small_n() {
        let fam = family("stirling2", &[]).unwrap();
        assert_eq!(clt_scan(&fam, &[1]), Err(Error::NonPositiveLog(1)));
        assert!(clt_scan(&fam, &[]).unwrap().is_empty());
    }

    #[test]
    fn ks_ordering_and_lattice_bound() {
        let fam = family("dowling", &[("m", 2)]).unwrap();
        let polys = fam.spec.generate(60).unwrap();
        for n in [5, 20, 60] {
            let t = pmf(&polys[n], n).unwrap();
            let r = normality(&t, 1).unwrap();
            assert!((0.0..=1.0).contains(&r.ks_plain));
            assert!((0.0..=1.0).contains(&r.ks_continuity));
            assert!(r.ks_continuity <= r.ks_plain + t.max_mass());
        }
    }
}
