//! Named recurrence families together with their closed-form exponential
//! generating functions.
//!
//! Each family's EGF is `F(z,x) = P_{n₀}(x)·exp(f(z,x))` with
//! `f(z,x) = q1(z,x) + q2(x·e^{m z})`, where `q1` is a polynomial in `z` and
//! `x` and `q2` a univariate polynomial with `q2(0) = 0`. Families whose start
//! polynomial is the monomial `x^r` fold the `e^{r m z}` factor coming from
//! `P_{n₀}(x·e^{mz})` into `q1`, so the prefactor is just `x^r`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::{factorial, integer, BivariateSeries, ExactPolynomial};
use crate::recurrence::{LagTerm, RecurrenceSpec, TriangleRow};
use crate::{Error, Rational, Result};

/// Polynomial in `z` with coefficients in `x`; entry `p` multiplies `z^p`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BivariatePolynomial {
    coeffs: Vec<ExactPolynomial>,
}

impl BivariatePolynomial {
    pub fn new(mut coeffs: Vec<ExactPolynomial>) -> Self {
        while coeffs.last().is_some_and(ExactPolynomial::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn z_coeffs(&self) -> &[ExactPolynomial] {
        &self.coeffs
    }

    pub fn z_coeff(&self, p: usize) -> ExactPolynomial {
        self.coeffs.get(p).cloned().unwrap_or_default()
    }

    /// Value and the five partial derivatives up to order two, as
    /// `(q, q_z, q_zz, q_x, q_zx, q_xx)`.
    pub fn partials(&self, z: f64, x: f64) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (p, cx) in self.coeffs.iter().enumerate() {
            let c = cx.eval_f64(x);
            let dc = cx.derivative().eval_f64(x);
            let ddc = cx.derivative().derivative().eval_f64(x);
            let pf = p as f64;
            let zp = z.powi(p as i32);
            let zp1 = if p >= 1 { pf * z.powi(p as i32 - 1) } else { 0.0 };
            let zp2 = if p >= 2 { pf * (pf - 1.0) * z.powi(p as i32 - 2) } else { 0.0 };
            out[0] += c * zp;
            out[1] += c * zp1;
            out[2] += c * zp2;
            out[3] += dc * zp;
            out[4] += dc * zp1;
            out[5] += ddc * zp;
        }
        out
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(p, c)| match p {
                0 => format!("({c})"),
                1 => format!("({c})·z"),
                _ => format!("({c})·z^{p}"),
            })
            .collect();
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

/// The EGF exponent `f(z,x) = q1(z,x) + q2(x·e^{m z})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaddleFunction {
    pub q1: BivariatePolynomial,
    pub q2: ExactPolynomial,
    pub m: Rational,
}

/// Degree and leading coefficient of `q2`, plus whether they satisfy the
/// normality hypothesis `d ≥ 1, α_d > 0, m > 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoremConstants {
    pub d: usize,
    pub alpha_d: Rational,
    pub hypothesis_ok: bool,
}

impl SaddleFunction {
    /// Taylor expansion of `f` in `z` up to `z^order`.
    pub fn exponent_series(&self, order: usize) -> BivariateSeries {
        let mut coeffs: Vec<ExactPolynomial> =
            (0..=order).map(|p| self.q1.z_coeff(p)).collect();
        // x^j·e^{j m z} contributes (j m)^p / p! · x^j to z^p.
        for (p, slot) in coeffs.iter_mut().enumerate() {
            let inv_fact = Rational::new(BigInt::one(), factorial(p));
            let term: Vec<Rational> = self
                .q2
                .coeffs()
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    if c.is_zero() {
                        return Rational::zero();
                    }
                    let rate = &self.m * BigInt::from(j);
                    c * num_traits::pow(rate, p) * &inv_fact
                })
                .collect();
            *slot = &*slot + &ExactPolynomial::new(term);
        }
        BivariateSeries::from_coeffs(order, coeffs)
    }

    pub fn theorem_constants(&self) -> TheoremConstants {
        let (d, alpha_d) = match self.q2.leading_coeff() {
            Some(lead) if self.q2.degree() >= 1 => (self.q2.degree() as usize, lead.clone()),
            _ => (0, Rational::zero()),
        };
        let hypothesis_ok = d >= 1 && alpha_d.is_positive() && self.m.is_positive();
        TheoremConstants { d, alpha_d, hypothesis_ok }
    }

    pub fn m_f64(&self) -> f64 {
        self.m.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for SaddleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q1 = {}; q2(u) = {}; m = {}", self.q1, self.q2, self.m)
    }
}

/// Derives `f` for a recurrence of the basic shape
/// `P_n = γ·P_{n-1} + m·x·P'_{n-1} + (n-1)·c(x)·P_{n-2}` with `P_0 = 1`.
pub fn build_exponent(spec: &RecurrenceSpec) -> Result<SaddleFunction> {
    if spec.start_index() != 0 || !spec.start_poly().is_one() {
        return Err(Error::UnsupportedShape("closed form needs P_0 = 1".into()));
    }
    let c = match spec.lags() {
        [] => ExactPolynomial::zero(),
        [lag] if lag.depth == 2 && lag.binomial => lag.kappa.clone(),
        _ => {
            return Err(Error::UnsupportedShape(
                "closed form needs at most one lag, of depth 2 with binomial weight".into(),
            ))
        }
    };
    let m = spec.m().clone();
    let gamma = spec.gamma();
    let width = gamma.coeffs().len().max(c.coeffs().len());

    let mut q1_const = vec![Rational::zero(); width];
    let mut q1_linear = vec![gamma.coeff(0)];
    q1_linear.resize(width, Rational::zero());
    let mut q2 = vec![Rational::zero(); width];
    for j in 1..width {
        let jm = &m * BigInt::from(j);
        let g_term = gamma.coeff(j) / &jm;
        let c_term = c.coeff(j) / (&jm * &jm);
        q1_const[j] = -(&g_term + &c_term);
        q1_linear[j] = -(c.coeff(j) / &jm);
        q2[j] = g_term + c_term;
    }
    let q1_quadratic = ExactPolynomial::constant(c.coeff(0) / integer(2));
    Ok(SaddleFunction {
        q1: BivariatePolynomial::new(vec![
            ExactPolynomial::new(q1_const),
            ExactPolynomial::new(q1_linear),
            q1_quadratic,
        ]),
        q2: ExactPolynomial::new(q2),
        m,
    })
}

/// `d = deg(γ + c)` and `α_d = [x^d](Σ γ_j x^j/(m j) + Σ c_j x^j/(m² j²))`,
/// computed directly from the recurrence coefficients.
pub fn recurrence_constants(spec: &RecurrenceSpec) -> Result<(usize, Rational)> {
    let c = match spec.lags() {
        [] => ExactPolynomial::zero(),
        [lag] if lag.depth == 2 && lag.binomial => lag.kappa.clone(),
        _ => return Err(Error::UnsupportedShape("expected at most one depth-2 lag".into())),
    };
    let d = (spec.gamma() + &c).degree().max(0) as usize;
    if d == 0 {
        return Ok((0, Rational::zero()));
    }
    let m = spec.m();
    let dm = m * BigInt::from(d);
    Ok((d, spec.gamma().coeff(d) / &dm + c.coeff(d) / (&dm * &dm)))
}

pub type FamilyParams = BTreeMap<String, i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyDescriptor {
    pub name: String,
    pub parameters: FamilyParams,
    pub spec: RecurrenceSpec,
    pub saddle: SaddleFunction,
    pub oeis_refs: Vec<&'static str>,
}

/// First index at which the closed form and the recurrence disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EgfMismatch {
    pub n: usize,
    pub from_series: ExactPolynomial,
    pub from_recurrence: ExactPolynomial,
}

impl FamilyDescriptor {
    /// Invocation string, e.g. `whitney(m=2, c=1)`.
    pub fn invocation(&self) -> String {
        let args: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.name, args.join(", "))
    }

    pub fn param(&self, key: &str) -> i64 {
        self.parameters[key]
    }

    /// `P_{n₀}(x)·exp(f)`, the EGF of `P_{n₀+j}` indexed by `j`.
    pub fn egf_series(&self, order: usize) -> Result<BivariateSeries> {
        Ok(self.saddle.exponent_series(order).exp()?.mul_poly(self.spec.start_poly()))
    }

    /// Checks `j!·[z^j] F = P_{n₀+j}` for every `n₀ + j ≤ max_n`.
    pub fn verify_egf(&self, max_n: usize) -> Result<Option<EgfMismatch>> {
        let start = self.spec.start_index();
        if max_n < start {
            return Ok(None);
        }
        let order = max_n - start;
        let series = self.egf_series(order)?;
        let polys = self.spec.generate(max_n)?;
        for (j, p) in polys.into_iter().enumerate() {
            let from_series = series.egf_term(j);
            if from_series != p {
                return Ok(Some(EgfMismatch { n: start + j, from_series, from_recurrence: p }));
            }
        }
        Ok(None)
    }
}

pub struct FamilyInfo {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub defaults: &'static [i64],
    pub description: &'static str,
}

pub const FAMILIES: &[FamilyInfo] = &[
    FamilyInfo {
        name: "stirling2",
        params: &[],
        defaults: &[],
        description: "Stirling numbers of the second kind",
    },
    FamilyInfo {
        name: "whitney",
        params: &["m", "c"],
        defaults: &[2, 1],
        description: "Whitney numbers T(n,k) = T(n-1,k-1) + (mk+c)T(n-1,k)",
    },
    FamilyInfo {
        name: "translated_whitney",
        params: &["m"],
        defaults: &[2],
        description: "translated Whitney numbers (c = 0)",
    },
    FamilyInfo {
        name: "dowling",
        params: &["m"],
        defaults: &[2],
        description: "Whitney numbers of Dowling lattices (c = 1); row sums are Dowling numbers",
    },
    FamilyInfo {
        name: "r_stirling",
        params: &["r"],
        defaults: &[2],
        description: "r-Stirling numbers: 1..r in distinct blocks, rows start at n = r",
    },
    FamilyInfo {
        name: "sheffer",
        params: &["d", "a"],
        defaults: &[2, 1],
        description: "Sheffer triangle S2[d,a](n,k) = d S2(n-1,k-1) + (a+dk) S2(n-1,k)",
    },
    FamilyInfo {
        name: "stirling_frobenius",
        params: &["m"],
        defaults: &[2],
        description: "scaled Stirling-Frobenius subset numbers (c = m-1)",
    },
    FamilyInfo {
        name: "galton",
        params: &["m", "c"],
        defaults: &[2, -1],
        description: "Galton triangles T(n,k) = T(n-1,k-1) + (mk+c)T(n-1,k), rows from n = 1",
    },
    FamilyInfo {
        name: "assoc_stirling",
        params: &["s"],
        defaults: &[2],
        description: "s-associated Stirling numbers: all blocks of size >= s",
    },
    FamilyInfo {
        name: "r_whitney_assoc",
        params: &["m", "r", "s"],
        defaults: &[2, 1, 2],
        description: "s-associated r-Whitney numbers of m-colored r-partitions",
    },
    FamilyInfo {
        name: "type_b",
        params: &["m", "c"],
        defaults: &[2, 1],
        description: "colored set partitions of type B (positive integers m, c)",
    },
];

/// Sequence ids cited for Sheffer-type triangles without a stated parameter pair.
pub const UNATTRIBUTED_OEIS: &[&str] =
    &["A039756", "A154537", "A282629", "A225466", "A285061", "A225467"];

/// Every family at its default parameters.
pub fn default_families() -> Vec<FamilyDescriptor> {
    FAMILIES
        .iter()
        .map(|info| {
            let params = info
                .params
                .iter()
                .zip(info.defaults)
                .map(|(k, v)| (k.to_string(), *v))
                .collect();
            catalog(info.name, &params).expect("defaults are valid")
        })
        .collect()
}

/// Convenience wrapper taking `(name, value)` pairs.
pub fn family(name: &str, params: &[(&str, i64)]) -> Result<FamilyDescriptor> {
    let params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    catalog(name, &params)
}

pub fn catalog(name: &str, params: &FamilyParams) -> Result<FamilyDescriptor> {
    let info = FAMILIES
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::UnknownFamily(name.to_string()))?;
    for key in params.keys() {
        if !info.params.contains(&key.as_str()) {
            return Err(Error::InvalidParameter(format!("{name} has no parameter `{key}`")));
        }
    }
    let get = |key: &str| -> Result<i64> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("{name} needs parameter `{key}`")))
    };
    let at_least = |key: &str, min: i64| -> Result<i64> {
        let v = get(key)?;
        if v < min {
            return Err(Error::InvalidParameter(format!("{name}: {key} must be >= {min}, got {v}")));
        }
        Ok(v)
    };

    let (spec, saddle, oeis) = match name {
        "stirling2" => whitney_like(1, 0, 0, 1),
        "whitney" => {
            let (m, c) = (at_least("m", 1)?, at_least("c", 0)?);
            whitney_like(m, c, 0, 1)
        }
        "translated_whitney" => whitney_like(at_least("m", 1)?, 0, 0, 1),
        "dowling" => whitney_like(at_least("m", 1)?, 1, 0, 1),
        "stirling_frobenius" => {
            let m = at_least("m", 1)?;
            whitney_like(m, m - 1, 0, 1)
        }
        "type_b" => {
            let (m, c) = (at_least("m", 1)?, at_least("c", 1)?);
            whitney_like(m, c, 0, 1)
        }
        "galton" => whitney_like(at_least("m", 1)?, get("c")?, 1, 1),
        "r_stirling" => whitney_like(1, 0, at_least("r", 0)? as usize, 1),
        "sheffer" => {
            let (d, a) = (at_least("d", 1)?, at_least("a", 0)?);
            whitney_like(d, a, 0, d)
        }
        "assoc_stirling" => associated(1, 0, at_least("s", 1)? as usize),
        "r_whitney_assoc" => {
            let (m, r, s) = (at_least("m", 1)?, at_least("r", 0)?, at_least("s", 1)?);
            associated(m, r, s as usize)
        }
        _ => unreachable!("name checked against FAMILIES"),
    };
    let oeis_refs = oeis_tags(name, params, oeis);
    let mut parameters = FamilyParams::new();
    for key in info.params {
        parameters.insert(key.to_string(), get(key)?);
    }
    let descriptor = FamilyDescriptor {
        name: name.to_string(),
        spec: spec.with_label(String::new()),
        saddle,
        oeis_refs,
        parameters,
    };
    let label = descriptor.invocation();
    Ok(FamilyDescriptor { spec: descriptor.spec.clone().with_label(label), ..descriptor })
}

type Built = (RecurrenceSpec, SaddleFunction, Vec<&'static str>);

/// `P_n = (u x + c) P_{n-1} + m x P'_{n-1}`, started at `P_r = x^r`.
///
/// Exponent: `(c + r m) z + (u/m)·x·(e^{mz} − 1)`.
fn whitney_like(m: i64, c: i64, r: usize, u: i64) -> Built {
    let gamma = ExactPolynomial::from_integers(&[c, u]);
    let spec = RecurrenceSpec::new(gamma, integer(m))
        .expect("m >= 1")
        .with_start(r, ExactPolynomial::monomial(Rational::one(), r))
        .expect("nonzero start");
    let slope = Rational::new(BigInt::from(u), BigInt::from(m));
    let q1 = BivariatePolynomial::new(vec![
        ExactPolynomial::monomial(-slope.clone(), 1),
        ExactPolynomial::constant(integer(c + r as i64 * m)),
    ]);
    let q2 = ExactPolynomial::monomial(slope, 1);
    (spec, SaddleFunction { q1, q2, m: integer(m) }, Vec::new())
}

/// `P_n = r P_{n-1} + m x P'_{n-1} + m^{s-1} C(n-1,s-1) x P_{n-s}`.
///
/// Exponent: `r z + (x/m)(e^{mz} − Σ_{j<s} (mz)^j / j!)`.
fn associated(m: i64, r: i64, s: usize) -> Built {
    let mr = integer(m);
    let kappa = ExactPolynomial::monomial(num_traits::pow(mr.clone(), s - 1), 1);
    let spec = RecurrenceSpec::new(ExactPolynomial::from_integers(&[r]), mr.clone())
        .expect("m >= 1")
        .with_lag(LagTerm::new(s, kappa, true).expect("s >= 1"))
        .expect("single lag");
    let mut q1: Vec<ExactPolynomial> = (0..s)
        .map(|j| {
            let c = -num_traits::pow(mr.clone(), j) / (&mr * factorial(j));
            ExactPolynomial::monomial(c, 1)
        })
        .collect();
    if q1.len() < 2 {
        q1.resize(2, ExactPolynomial::zero());
    }
    q1[1] = &q1[1] + &ExactPolynomial::constant(integer(r));
    let q2 = ExactPolynomial::monomial(mr.recip(), 1);
    (spec, SaddleFunction { q1: BivariatePolynomial::new(q1), q2, m: mr }, Vec::new())
}

fn oeis_tags(name: &str, params: &FamilyParams, mut tags: Vec<&'static str>) -> Vec<&'static str> {
    let p = |k: &str| params.get(k).copied().unwrap_or(0);
    let dowling_number = |m: i64| -> Option<&'static str> {
        const IDS: [&str; 9] = [
            "A007405", "A003575", "A003576", "A003577", "A003578", "A003579", "A003580",
            "A003581", "A003582",
        ];
        match m {
            2..=10 => Some(IDS[(m - 2) as usize]),
            64 => Some("A364069"),
            624 => Some("A364070"),
            _ => None,
        }
    };
    let frobenius = |m: i64| -> Option<&'static str> {
        match m {
            1 => Some("A048993"),
            2 => Some("A039755"),
            3 => Some("A225468"),
            4 => Some("A225469"),
            _ => None,
        }
    };
    let translated = |m: i64| -> Option<&'static str> {
        const IDS: [&str; 9] = [
            "A075497", "A075498", "A075499", "A075500", "A075501", "A075502", "A075503",
            "A075504", "A075505",
        ];
        (2..=10).contains(&m).then(|| IDS[(m - 2) as usize])
    };
    let whitney = |m: i64, c: i64, tags: &mut Vec<&'static str>| {
        if c == 1 {
            tags.extend(dowling_number(m));
        }
        if c == 0 {
            tags.extend(translated(m));
        }
        if c == m - 1 {
            tags.extend(frobenius(m));
        }
    };
    match name {
        "stirling2" => tags.push("A048993"),
        "whitney" | "type_b" => whitney(p("m"), p("c"), &mut tags),
        "dowling" => whitney(p("m"), 1, &mut tags),
        "translated_whitney" => whitney(p("m"), 0, &mut tags),
        "stirling_frobenius" => whitney(p("m"), p("m") - 1, &mut tags),
        "r_stirling" => match p("r") {
            0 | 1 => tags.push("A048993"),
            2 => tags.push("A143494"),
            3 => tags.push("A143495"),
            4 => tags.push("A143496"),
            _ => {}
        },
        "sheffer" if p("d") == 1 && p("a") == 0 => tags.push("A048993"),
        "galton" => match (p("m"), p("c")) {
            (2, -1) => tags.push("A186695"),
            (3, -2) => tags.push("A111577"),
            _ => {}
        },
        _ => {}
    }
    tags.dedup();
    tags
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NonnegativityReport {
    pub rows_checked: usize,
    /// `(n, k)` of the first negative entry.
    pub first_negative: Option<(usize, usize)>,
    /// Rows summing to zero; legal, but they carry no distribution.
    pub zero_sum_rows: Vec<usize>,
}

impl NonnegativityReport {
    pub fn is_nonnegative(&self) -> bool {
        self.first_negative.is_none()
    }
}

pub fn validate_nonnegativity(rows: &[TriangleRow]) -> NonnegativityReport {
    let mut report = NonnegativityReport { rows_checked: rows.len(), ..Default::default() };
    for row in rows {
        if report.first_negative.is_none() {
            if let Some(k) = row.coeffs.iter().position(Signed::is_negative) {
                report.first_negative = Some((row.n, k));
            }
        }
        if row.sum().is_zero() {
            report.zero_sum_rows.push(row.n);
        }
    }
    report
}
