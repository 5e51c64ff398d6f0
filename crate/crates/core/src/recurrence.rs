//! The differential–difference recurrence engine.
//!
//! A [`RecurrenceSpec`] describes
//!
//! ```text
//! P_n = γ·P_{n-1} + m·x·P'_{n-1} + Σ_lags w(n)·κ·P_{n-s},   n > n₀,
//! ```
//!
//! started from `P_{n₀}`, where `w(n)` is `C(n-1, s-1)` for binomially
//! weighted lags and `1` otherwise. Polynomials with index below `n₀` are zero.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::algebra::{binomial, ExactPolynomial};
use crate::{Error, Rational, Result};

/// One `w(n)·κ(x)·P_{n-s}` term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LagTerm {
    pub depth: usize,
    pub kappa: ExactPolynomial,
    pub binomial: bool,
}

impl LagTerm {
    pub fn new(depth: usize, kappa: ExactPolynomial, binomial: bool) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidSpec("lag depth must be at least 1".into()));
        }
        Ok(Self { depth, kappa, binomial })
    }

    /// `C(n-1, s-1)` or `1`.
    pub fn weight(&self, n: usize) -> BigInt {
        if self.binomial {
            binomial(n - 1, self.depth - 1)
        } else {
            BigInt::from(1)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceSpec {
    gamma: ExactPolynomial,
    m: Rational,
    lags: Vec<LagTerm>,
    start_index: usize,
    start_poly: ExactPolynomial,
    label: String,
}

impl RecurrenceSpec {
    /// `P_n = γ·P_{n-1} + m·x·P'_{n-1}` with `P_0 = 1`.
    pub fn new(gamma: ExactPolynomial, m: Rational) -> Result<Self> {
        if !m.is_positive() {
            return Err(Error::InvalidSpec(format!("m must be positive (m > 0), got {m}")));
        }
        Ok(Self {
            gamma,
            m,
            lags: Vec::new(),
            start_index: 0,
            start_poly: ExactPolynomial::one(),
            label: String::new(),
        })
    }

    /// Adds a lag term, keeping lags sorted by depth.
    pub fn with_lag(mut self, lag: LagTerm) -> Result<Self> {
        if self.lags.iter().any(|l| l.depth == lag.depth) {
            return Err(Error::InvalidSpec(format!("duplicate lag depth {}", lag.depth)));
        }
        let at = self.lags.partition_point(|l| l.depth < lag.depth);
        self.lags.insert(at, lag);
        Ok(self)
    }

    pub fn with_start(mut self, index: usize, poly: ExactPolynomial) -> Result<Self> {
        if poly.is_zero() {
            return Err(Error::InvalidSpec("start polynomial must be nonzero".into()));
        }
        self.start_index = index;
        self.start_poly = poly;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn gamma(&self) -> &ExactPolynomial {
        &self.gamma
    }

    pub fn m(&self) -> &Rational {
        &self.m
    }

    pub fn lags(&self) -> &[LagTerm] {
        &self.lags
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn start_poly(&self) -> &ExactPolynomial {
        &self.start_poly
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Field-wise equality ignoring the label.
    pub fn equivalent(&self, other: &Self) -> bool {
        self.gamma == other.gamma
            && self.m == other.m
            && self.lags == other.lags
            && self.start_index == other.start_index
            && self.start_poly == other.start_poly
    }

    fn max_depth(&self) -> usize {
        self.lags.iter().map(|l| l.depth).max().unwrap_or(1).max(1)
    }

    /// Computes `P_n` from `history`, where `history[i]` holds `P_{n-1-i}`.
    ///
    /// Entries for indices below the start index may be omitted; they are
    /// zero regardless of what the slice holds.
    pub fn advance(&self, history: &[ExactPolynomial], n: usize) -> Result<ExactPolynomial> {
        if n <= self.start_index {
            return Err(Error::InvalidIndex { n, start: self.start_index });
        }
        let lookup = |s: usize| -> Result<Option<&ExactPolynomial>> {
            if n < s || n - s < self.start_index {
                return Ok(None);
            }
            history.get(s - 1).map(Some).ok_or_else(|| {
                Error::InvalidSpec(format!("history lacks P_{} needed for P_{n}", n - s))
            })
        };
        let prev = lookup(1)?.expect("n > start_index");

        let width = [
            prev.coeffs().len() + self.gamma.coeffs().len(),
            prev.coeffs().len() + 1,
        ]
        .into_iter()
        .chain(self.lags.iter().map(|l| {
            lookup(l.depth)
                .ok()
                .flatten()
                .map_or(0, |p| p.coeffs().len() + l.kappa.coeffs().len())
        }))
        .max()
        .unwrap_or(0);
        let integral = self.m.is_integer()
            && self.gamma.is_integral()
            && self.lags.iter().all(|l| l.kappa.is_integral())
            && history.iter().take(self.max_depth()).all(ExactPolynomial::is_integral);
        if integral {
            return self.advance_integral(prev, &lookup, n, width);
        }
        let mut out = vec![Rational::zero(); width];

        // γ·P_{n-1}
        for (j, g) in self.gamma.coeffs().iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            for (k, p) in prev.coeffs().iter().enumerate() {
                if !p.is_zero() {
                    out[j + k] += g * p;
                }
            }
        }
        // m·x·P'_{n-1}: the x^k coefficient is m·k·p_k.
        for (k, p) in prev.coeffs().iter().enumerate().skip(1) {
            if !p.is_zero() {
                out[k] += p * (&self.m * BigInt::from(k));
            }
        }
        for lag in &self.lags {
            let Some(older) = lookup(lag.depth)? else { continue };
            let w = Rational::from_integer(lag.weight(n));
            for (j, c) in lag.kappa.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let cw = c * &w;
                for (k, p) in older.coeffs().iter().enumerate() {
                    if !p.is_zero() {
                        out[j + k] += &cw * p;
                    }
                }
            }
        }
        Ok(ExactPolynomial::new(out))
    }

    /// [`advance`](Self::advance) in plain integers, skipping the gcd
    /// reductions of rational arithmetic.
    fn advance_integral<'h>(
        &self,
        prev: &ExactPolynomial,
        lookup: &impl Fn(usize) -> Result<Option<&'h ExactPolynomial>>,
        n: usize,
        width: usize,
    ) -> Result<ExactPolynomial> {
        let mut out = vec![BigInt::zero(); width];
        let add_product = |out: &mut [BigInt], a: &ExactPolynomial, scale: &BigInt, b: &ExactPolynomial| {
            for (j, c) in a.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let cs = c.numer() * scale;
                for (k, p) in b.coeffs().iter().enumerate() {
                    if !p.is_zero() {
                        out[j + k] += &cs * p.numer();
                    }
                }
            }
        };
        add_product(&mut out, &self.gamma, &BigInt::one(), prev);
        for (k, p) in prev.coeffs().iter().enumerate().skip(1) {
            if !p.is_zero() {
                out[k] += p.numer() * (self.m.numer() * BigInt::from(k));
            }
        }
        for lag in &self.lags {
            let Some(older) = lookup(lag.depth)? else { continue };
            add_product(&mut out, &lag.kappa, &lag.weight(n), older);
        }
        Ok(ExactPolynomial::new(out.into_iter().map(Rational::from_integer).collect()))
    }

    /// `P_{n₀}, …, P_N`.
    pub fn generate(&self, max_n: usize) -> Result<Vec<ExactPolynomial>> {
        if max_n < self.start_index {
            return Err(Error::InvalidRange { end: max_n, start: self.start_index });
        }
        let depth = self.max_depth();
        let mut rows = Vec::with_capacity(max_n - self.start_index + 1);
        rows.push(self.start_poly.clone());
        let mut history: Vec<ExactPolynomial> = Vec::with_capacity(depth);
        for n in self.start_index + 1..=max_n {
            history.clear();
            history.extend(rows.iter().rev().take(depth).cloned());
            let next = self.advance(&history, n)?;
            rows.push(next);
        }
        Ok(rows)
    }

    /// Coefficient rows of `P_{n₀}, …, P_N`.
    pub fn triangle(&self, max_n: usize) -> Result<Vec<TriangleRow>> {
        let start = self.start_index;
        Ok(self
            .generate(max_n)?
            .into_iter()
            .enumerate()
            .map(|(i, p)| TriangleRow::from_poly(start + i, p))
            .collect())
    }
}

/// Coefficient vector of one `P_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangleRow {
    pub n: usize,
    pub coeffs: Vec<Rational>,
}

impl TriangleRow {
    pub fn from_poly(n: usize, p: ExactPolynomial) -> Self {
        Self { n, coeffs: p.into_coeffs() }
    }

    pub fn to_poly(&self) -> ExactPolynomial {
        ExactPolynomial::new(self.coeffs.clone())
    }

    pub fn sum(&self) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, c| acc + c)
    }
}

/// `T_{n,k} = u·T_{n-1,k-1} + (a + b·k)·T_{n-1,k}` with `T_{0,0} = 1`.
pub fn triangle_linear(u: &Rational, a: &Rational, b: &Rational, max_n: usize) -> Vec<TriangleRow> {
    let mut rows = Vec::with_capacity(max_n + 1);
    let mut prev = vec![Rational::from_integer(1.into())];
    rows.push(TriangleRow { n: 0, coeffs: prev.clone() });
    for n in 1..=max_n {
        let mut next = vec![Rational::zero(); prev.len() + 1];
        for (k, t) in prev.iter().enumerate() {
            if t.is_zero() {
                continue;
            }
            next[k + 1] += u * t;
            next[k] += (a + b * BigInt::from(k)) * t;
        }
        let row = ExactPolynomial::new(next).into_coeffs();
        rows.push(TriangleRow { n, coeffs: row.clone() });
        prev = row;
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::integer;

    fn p(c: &[i64]) -> ExactPolynomial {
        ExactPolynomial::from_integers(c)
    }

    fn stirling() -> RecurrenceSpec {
        RecurrenceSpec::new(ExactPolynomial::x(), integer(1)).unwrap()
    }

    fn assoc2() -> RecurrenceSpec {
        RecurrenceSpec::new(ExactPolynomial::zero(), integer(1))
            .unwrap()
            .with_lag(LagTerm::new(2, ExactPolynomial::x(), true).unwrap())
            .unwrap()
    }

    fn ints(row: &TriangleRow) -> Vec<i64> {
        row.coeffs.iter().map(|c| i64::try_from(c.to_integer()).unwrap()).collect()
    }

    #[test]
    fn advance_stirling() {
        let s = stirling();
        assert_eq!(s.advance(&[p(&[1])], 1).unwrap(), p(&[0, 1]));
        assert_eq!(s.advance(&[p(&[0, 1, 1])], 3).unwrap(), p(&[0, 1, 3, 1]));
    }

    #[test]
    fn advance_with_binomial_lag() {
        // Partitions of a 4-set into blocks of size ≥ 2: one 4-block and three 2+2 splits.
        let s = assoc2();
        assert_eq!(s.advance(&[p(&[0, 1]), p(&[0, 1])], 4).unwrap(), p(&[0, 1, 3]));
    }

    #[test]
    fn advance_rejects_start_index() {
        let s = stirling();
        assert_eq!(s.advance(&[], 0), Err(Error::InvalidIndex { n: 0, start: 0 }));
        let r = stirling().with_start(2, p(&[0, 0, 1])).unwrap();
        assert!(matches!(r.advance(&[p(&[1])], 2), Err(Error::InvalidIndex { .. })));
    }

    #[test]
    fn advance_reports_missing_history() {
        assert!(matches!(assoc2().advance(&[p(&[0, 1])], 4), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn generate_small() {
        assert_eq!(stirling().generate(2).unwrap(), vec![p(&[1]), p(&[0, 1]), p(&[0, 1, 1])]);
        let whitney = RecurrenceSpec::new(p(&[1, 1]), integer(2)).unwrap();
        assert_eq!(whitney.generate(2).unwrap(), vec![p(&[1]), p(&[1, 1]), p(&[1, 4, 1])]);
        let r2 = stirling().with_start(2, p(&[0, 0, 1])).unwrap();
        assert_eq!(r2.generate(2).unwrap(), vec![p(&[0, 0, 1])]);
        assert_eq!(r2.generate(1), Err(Error::InvalidRange { end: 1, start: 2 }));
    }

    #[test]
    fn assoc_rows_start_with_zero_row() {
        let rows = assoc2().generate(4).unwrap();
        assert!(rows[1].is_zero());
        assert_eq!(rows[2], p(&[0, 1]));
        assert_eq!(rows[3], p(&[0, 1]));
        assert_eq!(rows[4], p(&[0, 1, 3]));
    }

    #[test]
    fn integer_and_rational_paths_agree() {
        // A start of 1/3 forces rational arithmetic; the rows are linear in it.
        let third = crate::algebra::rational(1, 3);
        let scaled = assoc2().with_start(0, ExactPolynomial::constant(third.clone())).unwrap();
        let exact = assoc2().generate(25).unwrap();
        for (a, b) in scaled.generate(25).unwrap().iter().zip(&exact) {
            assert_eq!(a, &b.scale(&third));
        }
    }

    #[test]
    fn triangles() {
        let t = stirling().triangle(4).unwrap();
        assert_eq!(ints(&t[4]), vec![0, 1, 7, 6, 1]);
        let w = RecurrenceSpec::new(p(&[1, 1]), integer(2)).unwrap().triangle(2).unwrap();
        assert_eq!(ints(&w[2]), vec![1, 4, 1]);
        let r3 = stirling().with_start(3, p(&[0, 0, 0, 1])).unwrap().triangle(5).unwrap();
        assert_eq!(r3[0].n, 3);
        assert_eq!(ints(&r3[0]), vec![0, 0, 0, 1]);
    }

    #[test]
    fn linear_triangle() {
        let t = triangle_linear(&integer(1), &integer(0), &integer(1), 4);
        assert_eq!(ints(&t[4]), vec![0, 1, 7, 6, 1]);
        let w = triangle_linear(&integer(1), &integer(1), &integer(2), 2);
        assert_eq!(ints(&w[2]), vec![1, 4, 1]);
    }

    #[test]
    fn linear_triangle_matches_polynomial_recurrence() {
        for u in 1..=3 {
            for a in -2..=3 {
                for m in 1..=3 {
                    let spec = RecurrenceSpec::new(p(&[a, u]), integer(m)).unwrap();
                    let lin = triangle_linear(&integer(u), &integer(a), &integer(m), 30);
                    assert_eq!(spec.triangle(30).unwrap(), lin, "u={u} a={a} m={m}");
                }
            }
        }
    }

    #[test]
    fn row_sums_match_evaluation() {
        for row in assoc2().triangle(15).unwrap() {
            assert_eq!(row.sum(), row.to_poly().eval(&integer(1)));
        }
    }

    #[test]
    fn degree_bound() {
        let spec = RecurrenceSpec::new(p(&[1, 0, 2]), integer(3))
            .unwrap()
            .with_lag(LagTerm::new(2, p(&[0, 1, 1]), true).unwrap())
            .unwrap()
            .with_lag(LagTerm::new(3, p(&[2]), false).unwrap())
            .unwrap();
        for (n, poly) in spec.generate(20).unwrap().iter().enumerate() {
            assert!(poly.degree() <= 2 * n as isize);
        }
    }

    #[test]
    fn r_stirling_is_shifted_whitney() {
        for r in [2usize, 3] {
            let mut start = vec![0; r];
            start.push(1);
            let rs = stirling().with_start(r, p(&start)).unwrap().triangle(12).unwrap();
            let whitney = RecurrenceSpec::new(p(&[r as i64, 1]), integer(1)).unwrap();
            let w = whitney.triangle(12 - r).unwrap();
            for row in &rs {
                let t = &w[row.n - r];
                for (k, c) in row.coeffs.iter().enumerate() {
                    let expected = if k >= r { t.coeffs.get(k - r).cloned() } else { None };
                    assert_eq!(*c, expected.unwrap_or_else(Rational::zero), "r={r} n={} k={k}", row.n);
                }
            }
        }
    }

    #[test]
    fn spec_invariants() {
        assert!(RecurrenceSpec::new(p(&[0, 1]), integer(0)).is_err());
        assert!(RecurrenceSpec::new(p(&[0, 1]), integer(-1)).is_err());
        assert!(LagTerm::new(0, p(&[1]), true).is_err());
        assert!(stirling().with_start(0, ExactPolynomial::zero()).is_err());
        let dup = assoc2().with_lag(LagTerm::new(2, p(&[1]), false).unwrap());
        assert!(matches!(dup, Err(Error::InvalidSpec(_))));
    }
}
