//! Saddle-point analysis of `[z^n] exp(f(z,x))`.
//!
//! For `f = q1(z,x) + q2(x·e^{mz})` the saddle point `ρ(x)` solves
//! `ρ·f_z(ρ,x) = n`. With `h_n(x) = f(ρ(x),x) − n·log ρ(x)` the block-count
//! mean and variance are approximated by `h_n'(1) = f_x(ρ,1)` and
//! `h_n'(1) + h_n''(1) = f_x + ρ'·f_zx + f_xx`, where
//! `ρ' = −ρ·f_zx / (f_z + ρ·f_zz)`.

use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::{ln_rational, rational_to_f64};
use crate::distribution::pmf;
use crate::families::SaddleFunction;
use crate::recurrence::RecurrenceSpec;
use crate::{Error, Result};

/// Above this value of `d·m·z` the `e^{jmz}` terms are evaluated relative to
/// `e^{dmz}`.
pub const LOG_SCALE_THRESHOLD: f64 = 300.0;

/// `f` and its partial derivatives up to second order at one point.
///
/// The true values are the stored ones multiplied by `exp(log_scale)`;
/// `log_scale` is zero unless the evaluation point is large enough to risk
/// overflow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Partials {
    pub f: f64,
    pub f_z: f64,
    pub f_zz: f64,
    pub f_x: f64,
    pub f_zx: f64,
    pub f_xx: f64,
    pub log_scale: f64,
}

impl Partials {
    pub fn is_scaled(&self) -> bool {
        self.log_scale != 0.0
    }
}

pub fn f_partials(sf: &SaddleFunction, z: f64, x: f64) -> Partials {
    let m = sf.m_f64();
    let d = sf.q2.degree().max(0) as f64;
    let log_scale = if d * m * z > LOG_SCALE_THRESHOLD { d * m * z } else { 0.0 };

    // S_k = Σ_j j^(k) q2_j u^j with u = x e^{mz}, falling powers j^(k).
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (j, c) in sf.q2.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let jf = j as f64;
        let uj = (jf * (x.ln() + m * z) - log_scale).exp();
        let term = c.to_f64().unwrap_or(f64::NAN) * uj;
        s0 += term;
        s1 += jf * term;
        s2 += jf * (jf - 1.0) * term;
    }
    let [q, q_z, q_zz, q_x, q_zx, q_xx] = sf.q1.partials(z, x);
    let w = (-log_scale).exp();
    Partials {
        f: q * w + s0,
        f_z: q_z * w + m * s1,
        f_zz: q_zz * w + m * m * (s2 + s1),
        f_x: q_x * w + s1 / x,
        f_zx: q_zx * w + m * (s2 + s1) / x,
        f_xx: q_xx * w + s2 / (x * x),
        log_scale,
    }
}

fn saddle_gap(sf: &SaddleFunction, z: f64, x: f64, n: f64) -> f64 {
    let p = f_partials(sf, z, x);
    z * p.f_z - n * (-p.log_scale).exp()
}

/// Solves `ρ·f_z(ρ, x) = n` for `ρ > 0`.
pub fn solve_saddle(sf: &SaddleFunction, n: usize, x: f64) -> Result<f64> {
    let tc = sf.theorem_constants();
    if !tc.hypothesis_ok {
        return Err(Error::SaddleFailure(format!(
            "hypothesis d >= 1, alpha_d > 0 fails (d = {}, alpha_d = {})",
            tc.d, tc.alpha_d
        )));
    }
    if n == 0 || x.is_nan() || x <= 0.0 {
        return Err(Error::SaddleFailure(format!("needs n >= 1 and x > 0, got n={n}, x={x}")));
    }
    let nf = n as f64;
    let m = sf.m_f64();
    let mut lo = 1e-12;
    if saddle_gap(sf, lo, x, nf) >= 0.0 {
        return Err(Error::SaddleFailure("z·f_z is not below n near the origin".into()));
    }
    let mut hi = 2.0 * nf.ln().max(0.0) / (m * tc.d as f64) + 4.0;
    let mut doublings = 0;
    while saddle_gap(sf, hi, x, nf) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::SaddleFailure(format!("no bracket found for n={n}")));
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if saddle_gap(sf, mid, x, nf) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Newton polish inside the bracket; z·f_z has derivative f_z + z·f_zz.
    let mut rho = 0.5 * (lo + hi);
    for _ in 0..8 {
        let p = f_partials(sf, rho, x);
        let g = rho * p.f_z - nf * (-p.log_scale).exp();
        let dg = p.f_z + rho * p.f_zz;
        if dg.is_nan() || dg <= 0.0 {
            break;
        }
        let next = rho - g / dg;
        if !(next > lo && next < hi) || next == rho {
            break;
        }
        rho = next;
    }
    let residual = saddle_residual(sf, rho, x, n);
    if residual > (1e-9 * nf).max(1e-12) {
        return Err(Error::SaddleFailure(format!("residual {residual:e} at rho = {rho}")));
    }
    Ok(rho)
}

/// `|ρ·f_z(ρ,x) − n|`.
pub fn saddle_residual(sf: &SaddleFunction, rho: f64, x: f64, n: usize) -> f64 {
    let p = f_partials(sf, rho, x);
    (rho * p.f_z * p.log_scale.exp() - n as f64).abs()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleReport {
    pub n: usize,
    pub rho: f64,
    pub rho_prime: f64,
    /// `h_n'(1) = f_x(ρ,1)`.
    pub predicted_mean: f64,
    /// `h_n'(1) + h_n''(1)`.
    pub predicted_variance: f64,
    /// `b(ρ,1) = ρ·f_z + ρ²·f_zz`.
    pub b_value: f64,
    /// `log(ρ^{-n}·e^{f(ρ,1)} / √(2π·b))`, the estimate of `log [z^n] e^f`.
    pub coeff_estimate_log: f64,
    /// `d·n / log n`.
    pub leading_mean: f64,
    /// `d²·n / log² n`.
    pub leading_variance: f64,
}

pub fn saddle_report(sf: &SaddleFunction, n: usize) -> Result<SaddleReport> {
    if n < 3 {
        return Err(Error::SaddleFailure(format!("report needs n >= 3, got {n}")));
    }
    let rho = solve_saddle(sf, n, 1.0)?;
    let p = f_partials(sf, rho, 1.0);
    let scale = p.log_scale.exp();
    let (f, f_z, f_zz, f_x, f_zx, f_xx) = (
        p.f * scale,
        p.f_z * scale,
        p.f_zz * scale,
        p.f_x * scale,
        p.f_zx * scale,
        p.f_xx * scale,
    );
    // ρ' is a ratio, so the common scale cancels.
    let rho_prime = -rho * p.f_zx / (p.f_z + rho * p.f_zz);
    let b_value = rho * f_z + rho * rho * f_zz;
    if b_value.is_nan() || b_value <= 0.0 {
        return Err(Error::SaddleFailure(format!("b(rho,1) = {b_value} is not positive")));
    }
    let log_n = (n as f64).ln();
    let d = sf.theorem_constants().d as f64;
    Ok(SaddleReport {
        n,
        rho,
        rho_prime,
        predicted_mean: f_x,
        predicted_variance: f_x + rho_prime * f_zx + f_xx,
        b_value,
        coeff_estimate_log: -(n as f64) * rho.ln() + f
            - 0.5 * (2.0 * std::f64::consts::PI * b_value).ln(),
        leading_mean: d * n as f64 / log_n,
        leading_variance: d * d * n as f64 / (log_n * log_n),
    })
}

/// Exact values of `P_n` next to the saddle-point predictions.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactComparison {
    pub n: usize,
    pub exact_mean: f64,
    pub predicted_mean: f64,
    pub mean_rel_error: f64,
    pub exact_variance: f64,
    pub predicted_variance: f64,
    pub variance_rel_error: f64,
    /// `log P_n(1)`.
    pub log_row_sum: f64,
    /// Hayman estimate of `log P_n(1)`.
    pub log_row_sum_estimate: f64,
    /// Relative error between the two logarithms.
    pub log_rel_error: f64,
    pub saddle: SaddleReport,
}

/// Compares the saddle predictions with the exact `P_n` of `spec`.
///
/// `sf` is the exponent of `spec`'s EGF relative to its start, so a spec
/// starting at `P_{n₀} = c·x^r` has row `n` at saddle index `n − n₀`, mean
/// shifted by `r`, and row sum scaled by `c`.
pub fn compare_exact(sf: &SaddleFunction, spec: &RecurrenceSpec, n: usize) -> Result<ExactComparison> {
    let polys = spec.generate(n)?;
    compare_with_rows(sf, spec, &polys, n)
}

/// As [`compare_exact`], reusing rows `P_{n₀}, …` generated earlier.
pub fn compare_with_rows(
    sf: &SaddleFunction,
    spec: &RecurrenceSpec,
    polys: &[crate::ExactPolynomial],
    n: usize,
) -> Result<ExactComparison> {
    let start = spec.start_index();
    let (lead, shift) = spec.start_poly().as_monomial().ok_or_else(|| {
        Error::UnsupportedShape("comparison needs a monomial start polynomial".into())
    })?;
    let index = n
        .checked_sub(start)
        .ok_or(Error::InvalidIndex { n, start })?;
    let poly = polys.get(index).ok_or(Error::InvalidRange { end: n, start })?;
    let saddle = saddle_report(sf, index)?;
    let table = pmf(poly, n)?;

    let exact_mean = rational_to_f64(&table.mean);
    let exact_variance = rational_to_f64(&table.variance);
    let predicted_mean = saddle.predicted_mean + shift as f64;
    let predicted_variance = saddle.predicted_variance;

    let log_row_sum = ln_rational(&poly.eval(&crate::Rational::one()));
    let log_row_sum_estimate =
        saddle.coeff_estimate_log + libm::lgamma(index as f64 + 1.0) + rational_to_f64(lead).ln();
    Ok(ExactComparison {
        n,
        exact_mean,
        predicted_mean,
        mean_rel_error: (exact_mean - predicted_mean).abs() / exact_mean,
        exact_variance,
        predicted_variance,
        variance_rel_error: (exact_variance - predicted_variance).abs() / exact_variance,
        log_row_sum,
        log_row_sum_estimate,
        log_rel_error: (log_row_sum_estimate - log_row_sum).abs() / log_row_sum.abs(),
        saddle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::family;

    fn stirling() -> SaddleFunction {
        family("stirling2", &[]).unwrap().saddle
    }

    /// Independent root of `ρ e^ρ = n` by plain bisection.
    fn lambert_bisect(n: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 50.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn stirling_partials_at_origin() {
        let p = f_partials(&stirling(), 0.0, 1.0);
        let got = [p.f, p.f_z, p.f_zz, p.f_x, p.f_zx, p.f_xx];
        assert_eq!(got, [0.0, 1.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn stirling_partials_at_one() {
        let e = std::f64::consts::E;
        let p = f_partials(&stirling(), 1.0, 1.0);
        assert!(close(p.f, e - 1.0, 1e-15));
        assert!(close(p.f_z, e, 1e-15));
        assert!(close(p.f_x, e - 1.0, 1e-15));
    }

    #[test]
    fn assoc_partials_at_origin() {
        let sf = family("assoc_stirling", &[("s", 2)]).unwrap().saddle;
        let p = f_partials(&sf, 0.0, 1.0);
        assert_eq!((p.f, p.f_z, p.f_x), (0.0, 0.0, 0.0));
        assert!(close(p.f_zz, 1.0, 1e-15));
    }

    #[test]
    fn scaled_evaluation_matches_direct_ratio() {
        let sf = family("whitney", &[("m", 3), ("c", 2)]).unwrap().saddle;
        let z = 120.0; // m·z = 360 > threshold
        let p = f_partials(&sf, z, 1.0);
        assert!(p.is_scaled());
        // f_z / f_x = m·u·q2' / (u·q2') ≈ m once the exponential dominates.
        assert!(close(p.f_z / p.f_x, 3.0, 1e-12));
        assert!(p.f.is_finite() && p.f_zz.is_finite());
    }

    #[test]
    fn lambert_points() {
        let rho1 = solve_saddle(&stirling(), 1, 1.0).unwrap();
        assert!((rho1 - 0.567_143_290_409_783_8).abs() < 1e-12);
        let rho100 = solve_saddle(&stirling(), 100, 1.0).unwrap();
        assert!((rho100 - lambert_bisect(100.0)).abs() < 1e-9);
        assert!((rho100 - 3.385_630).abs() < 1e-6);
    }

    #[test]
    fn rho_tracks_log_n() {
        for n in [100usize, 1000, 10_000] {
            let rho = solve_saddle(&stirling(), n, 1.0).unwrap();
            let ln = (n as f64).ln();
            assert!((rho - ln).abs() <= 2.0 * ln.ln() + 3.0);
        }
    }

    #[test]
    fn hypothesis_failure() {
        let spec = RecurrenceSpec::new(crate::ExactPolynomial::from_integers(&[2]), crate::algebra::integer(1)).unwrap();
        let sf = crate::families::build_exponent(&spec).unwrap();
        assert!(matches!(solve_saddle(&sf, 10, 1.0), Err(Error::SaddleFailure(_))));
    }

    #[test]
    fn stirling_report_at_100() {
        let r = saddle_report(&stirling(), 100).unwrap();
        assert!(close(r.predicted_mean, r.rho.exp() - 1.0, 1e-12));
        assert!((r.predicted_mean - 28.54).abs() < 0.01);
        assert!((r.leading_mean - 21.71).abs() < 0.01);
        assert!(saddle_report(&stirling(), 2).is_err());
    }

    #[test]
    fn variance_below_mean() {
        for n in (50..=500).step_by(50) {
            let r = saddle_report(&stirling(), n).unwrap();
            assert!(r.predicted_variance > 0.0);
            assert!(r.predicted_variance < r.predicted_mean);
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        // Deterministic pseudo-random points in [0.1, 5] × [0.5, 2].
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let fams = [
            family("stirling2", &[]).unwrap(),
            family("r_whitney_assoc", &[("m", 2), ("r", 1), ("s", 3)]).unwrap(),
            family("sheffer", &[("d", 3), ("a", 2)]).unwrap(),
        ];
        let h = 1e-5;
        for fam in &fams {
            let sf = &fam.saddle;
            for _ in 0..20 {
                let z = 0.1 + 4.9 * next();
                let x = 0.5 + 1.5 * next();
                let p = f_partials(sf, z, x);
                let at = |z, x| f_partials(sf, z, x);
                let fd_z = (at(z + h, x).f - at(z - h, x).f) / (2.0 * h);
                let fd_x = (at(z, x + h).f - at(z, x - h).f) / (2.0 * h);
                let fd_zz = (at(z + h, x).f_z - at(z - h, x).f_z) / (2.0 * h);
                let fd_zx = (at(z, x + h).f_z - at(z, x - h).f_z) / (2.0 * h);
                let fd_xx = (at(z, x + h).f_x - at(z, x - h).f_x) / (2.0 * h);
                let size = 1.0 + p.f.abs() + p.f_zz.abs() + p.f_xx.abs();
                for (exact, fd) in [(p.f_z, fd_z), (p.f_x, fd_x), (p.f_zz, fd_zz), (p.f_zx, fd_zx), (p.f_xx, fd_xx)] {
                    assert!((exact - fd).abs() <= 1e-6 * size, "{} z={z} x={x}: {exact} vs {fd}", fam.invocation());
                }
            }
        }
    }
}
