//! Functionals of the K_alpha Levy measure
//! `nu(dx) = dx / ((1 + |x|) ln^(1+alpha)(1 + |x|))`, `0 < alpha < 2`.
//!
//! Every integral is taken in the coordinate `u = ln(1 + |x|)`, where the
//! density becomes the pure power `u^-(1+alpha) du`. The large-jump part
//! `nu'` is the restriction to `|x| > 1`, i.e. `u > ln 2`.

mod envelope;
mod support;

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{quad_with, Integral, QuadConfig, QuadError};

pub use envelope::{EnvelopeError, EnvelopeSpec};
pub use support::{
    classify_support, upper_function_integral, Convergence, KBetaVerdict, SupportVerdict, UpperFunctionOutcome,
};

/// Split point for the small-jump variance: below it the integrand is
/// integrated term by term from its power series.
pub const SERIES_SPLIT: f64 = 1e-3;
/// `lambda * x` beyond which `1 - exp(-lambda x)` is taken as exactly 1.
pub const LAPLACE_SATURATION: f64 = 745.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("alpha = {0} is outside (0, 2), the range on which the K_alpha Levy measure is defined")]
    InvalidAlpha(f64),
    #[error("{what} = {value} violates {constraint}")]
    Domain {
        what: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("integral unexpectedly diverged while computing {0}")]
    UnexpectedDivergence(&'static str),
    #[error("internal inconsistency: analytic classification says {analytic:?} but the quadrature test says {numeric:?} for {envelope}")]
    Inconsistent {
        envelope: String,
        analytic: Convergence,
        numeric: Convergence,
    },
}

fn domain(what: &'static str, value: f64, constraint: &'static str) -> MeasureError {
    MeasureError::Domain {
        what,
        value,
        constraint,
    }
}

/// Index `alpha` of the process together with the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KAlphaParams {
    alpha: f64,
    trunc_mass: f64,
    small_var: f64,
}

impl KAlphaParams {
    pub fn new(alpha: f64) -> Result<Self, MeasureError> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(MeasureError::InvalidAlpha(alpha));
        }
        let trunc_mass = 2.0 / (alpha * LN_2.powf(alpha));
        let small_var = small_jump_variance_raw(alpha, 1.0)?;
        Ok(Self {
            alpha,
            trunc_mass,
            small_var,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Two-sided mass of the large-jump measure, `2 / (alpha ln^alpha 2)`.
    /// This is the jump rate of the compound Poisson component.
    pub fn trunc_mass(&self) -> f64 {
        self.trunc_mass
    }

    /// `int_{|x| <= 1} x^2 nu(dx)`, the variance rate of the small-jump martingale.
    pub fn small_var(&self) -> f64 {
        self.small_var
    }
}

fn measure_cfg() -> QuadConfig {
    QuadConfig {
        abs_tol: 1e-15,
        rel_tol: 1e-13,
        max_subdivisions: 100_000,
    }
}

fn finite_value(i: Integral, what: &'static str) -> Result<f64, MeasureError> {
    i.finite()
        .map(|r| r.value)
        .ok_or(MeasureError::UnexpectedDivergence(what))
}

/// `ln(e^u - 1)` without overflow for large `u`.
pub(crate) fn ln_expm1(u: f64) -> f64 {
    if u > 1.0 {
        u + (-(-u).exp_m1()).ln()
    } else {
        u.exp_m1().ln()
    }
}

pub fn density(x: f64, p: &KAlphaParams) -> Result<f64, MeasureError> {
    if x == 0.0 || !x.is_finite() {
        return Err(domain("x", x, "x != 0 (the density is not integrable at the origin)"));
    }
    let l = x.abs().ln_1p();
    Ok(1.0 / ((1.0 + x.abs()) * l.powf(1.0 + p.alpha)))
}

/// One-sided tail `nu'(r, inf) = 1 / (alpha ln^alpha(1 + r))` for `r >= 1`.
pub fn tail_one_sided(r: f64, p: &KAlphaParams) -> Result<f64, MeasureError> {
    if !(r >= 1.0) {
        return Err(domain("r", r, "r >= 1 (the large-jump measure lives on |x| > 1)"));
    }
    Ok(tail_from_log1p(r.ln_1p(), p.alpha))
}

fn tail_from_log1p(l: f64, alpha: f64) -> f64 {
    1.0 / (alpha * l.powf(alpha))
}

/// Normalized one-sided survival of a large-jump magnitude,
/// `P(ln(1+|X|) > l) = (ln 2 / l)^alpha` for `l >= ln 2`.
pub fn survival_log1p(l: f64, p: &KAlphaParams) -> f64 {
    if l <= LN_2 {
        1.0
    } else {
        (LN_2 / l).powf(p.alpha)
    }
}

/// Inverse of [`survival_log1p`]: the `ln(1 + |x|)` whose survival is `u`.
/// The magnitude itself is never formed; for small `u` it is far outside `f64`.
pub fn inverse_tail(u: f64, p: &KAlphaParams) -> Result<f64, MeasureError> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(domain("u", u, "0 < u <= 1"));
    }
    Ok(LN_2 * u.powf(-1.0 / p.alpha))
}

/// `2 int_1^cap x^eta nu(dx)`, the truncated absolute moment of the large jumps.
pub fn trunc_moment(eta: f64, cap: f64, p: &KAlphaParams) -> Result<f64, MeasureError> {
    if !(eta > 0.0) {
        return Err(domain("eta", eta, "eta > 0"));
    }
    if !(cap >= 1.0) {
        return Err(domain("cap", cap, "cap >= 1"));
    }
    let hi = cap.ln_1p();
    if hi <= LN_2 {
        return Ok(0.0);
    }
    let a = p.alpha;
    let f = |u: f64| (eta * ln_expm1(u) - (1.0 + a) * u.ln()).exp();
    let v = finite_value(quad_with(f, LN_2, hi, &measure_cfg())?, "trunc_moment")?;
    Ok(2.0 * v)
}

/// Root of `x = ln^(alpha/eta)(1 + x)`, carried as `l = ln(1 + x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XStar {
    pub log1p_x: f64,
}

impl XStar {
    /// `eta l - alpha ln l` at the root.
    pub fn residual(&self, eta: f64, alpha: f64) -> f64 {
        eta * self.log1p_x - alpha * self.log1p_x.ln()
    }

    pub fn value(&self) -> crate::numerics::SignedLogValue {
        crate::numerics::SignedLogValue::from_log1p(1, self.log1p_x)
    }
}

/// Largest root of `eta l = alpha ln l` with `l = ln(1 + x)`; `None` when
/// `alpha / eta <= e`, where the gap function's minimum at `l = alpha / eta`
/// is nonnegative and only the trivial root `x = 0` remains.
pub fn solve_xstar(eta: f64, p: &KAlphaParams) -> Result<Option<XStar>, MeasureError> {
    if !(eta > 0.0) {
        return Err(domain("eta", eta, "eta > 0"));
    }
    let a = p.alpha;
    let m = a / eta;
    if m <= E {
        return Ok(None);
    }
    let gap = |l: f64| eta * l - a * l.ln();
    let mut lo = m;
    let mut hi = 2.0 * m;
    while gap(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let root = if gap(lo).abs() <= gap(hi).abs() { lo } else { hi };
    Ok(Some(XStar { log1p_x: root }))
}

/// The three terms of the Pruitt function `h(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PruittTerms {
    /// `nu'(|x| > r) = 2 / (alpha ln^alpha(1 + r))`, both signs counted.
    pub tail: f64,
    /// `r^-2 int_{1 < |x| <= r} x^2 nu'(dx)`.
    pub second_moment: f64,
    /// `r^-1 int_{1 < |x| <= r} x nu'(dx)`, zero for the symmetric measure.
    pub first_moment: f64,
}

impl PruittTerms {
    pub fn total(&self) -> f64 {
        self.tail + self.second_moment + self.first_moment
    }
}

pub fn pruitt_terms(r: f64, p: &KAlphaParams) -> Result<PruittTerms, MeasureError> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(domain("r", r, "r >= 1"));
    }
    let a = p.alpha;
    let hi = r.ln_1p();
    let tail = 2.0 * tail_from_log1p(hi, a);
    let second_moment = if hi > LN_2 {
        let ln_r2 = 2.0 * r.ln();
        let f = |u: f64| (2.0 * ln_expm1(u) - ln_r2 - (1.0 + a) * u.ln()).exp();
        2.0 * finite_value(quad_with(f, LN_2, hi, &measure_cfg())?, "pruitt_hbar")?
    } else {
        0.0
    };
    Ok(PruittTerms {
        tail,
        second_moment,
        first_moment: 0.0,
    })
}

/// Pruitt function `h(r)` of the large-jump measure.
pub fn pruitt_hbar(r: f64, p: &KAlphaParams) -> Result<f64, MeasureError> {
    pruitt_terms(r, p).map(|t| t.total())
}

/// Laplace exponent `Phi(lambda) = int_(0,inf) (1 - e^(-lambda x)) nu'(dx)` of
/// the one-sided large-jump subordinator.
pub fn laplace_exponent(lambda: f64, p: &KAlphaParams) -> Result<f64, MeasureError> {
    if !(lambda >= 0.0) {
        return Err(domain("lambda", lambda, "lambda >= 0"));
    }
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let a = p.alpha;
    let f = |u: f64| {
        let lx = lambda * u.exp_m1();
        let factor = if lx > LAPLACE_SATURATION || !lx.is_finite() {
            1.0
        } else {
            -(-lx).exp_m1()
        };
        factor * u.powf(-(1.0 + a))
    };
    finite_value(quad_with(f, LN_2, f64::INFINITY, &measure_cfg())?, "laplace_exponent")
}

/// Variance rate `2 int_0^{ln(1+eps)} (e^u - 1)^2 u^-(1+alpha) du` of the jumps
/// with magnitude at most `eps`.
pub fn small_jump_variance(eps: f64, p: &KAlphaParams) -> Result<f64, MeasureError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(domain("eps", eps, "0 < eps <= 1"));
    }
    small_jump_variance_raw(p.alpha, eps)
}

fn small_jump_variance_raw(alpha: f64, eps: f64) -> Result<f64, MeasureError> {
    let hi = eps.ln_1p();
    let split = hi.min(SERIES_SPLIT);
    let mut total = expm1_sq_series_integral(alpha, split);
    if hi > split {
        let f = |u: f64| u.exp_m1().powi(2) * u.powf(-(1.0 + alpha));
        total += finite_value(quad_with(f, split, hi, &measure_cfg())?, "small_var")?;
    }
    Ok(2.0 * total)
}

/// `int_0^d (e^u - 1)^2 u^-(1+alpha) du` from
/// `(e^u - 1)^2 = sum_{n>=2} (2^n - 2) u^n / n!`, integrated term by term.
fn expm1_sq_series_integral(alpha: f64, d: f64) -> f64 {
    let mut sum = 0.0;
    let mut coeff = 1.0; // 1/n!
    let mut pow2 = 1.0;
    for n in 1..40 {
        coeff /= n as f64;
        pow2 *= 2.0;
        if n < 2 {
            continue;
        }
        let e = n as f64 - alpha;
        let term = (pow2 - 2.0) * coeff * d.powf(e) / e;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Rate of jumps with magnitude in `(eps, 1]`, both signs:
/// `(2 / alpha)(ln^-alpha(1 + eps) - ln^-alpha 2)`.
pub fn band_rate(eps: f64, p: &KAlphaParams) -> Result<f64, MeasureError> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(domain("eps", eps, "0 < eps <= 1"));
    }
    let a = p.alpha;
    Ok((2.0 / a) * (eps.ln_1p().powf(-a) - LN_2.powf(-a)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(alpha: f64) -> KAlphaParams {
        KAlphaParams::new(alpha).unwrap()
    }

    #[test]
    fn alpha_range_enforced() {
        for a in [0.0, 2.0, -1.0, 2.5, f64::NAN] {
            assert!(matches!(KAlphaParams::new(a), Err(MeasureError::InvalidAlpha(_))));
        }
    }

    #[test]
    fn trunc_mass_matches_quadrature() {
        for a in [0.3, 1.0, 1.7] {
            let p = params(a);
            let q = quad_with(|u: f64| u.powf(-(1.0 + a)), LN_2, f64::INFINITY, &measure_cfg())
                .unwrap()
                .finite()
                .unwrap()
                .value;
            assert_relative_eq!(p.trunc_mass(), 2.0 * q, max_relative = 1e-10);
        }
    }

    #[test]
    fn density_examples() {
        let p1 = params(1.0);
        assert_relative_eq!(
            density(1.0, &p1).unwrap(),
            1.040_684_490_502_803_9,
            max_relative = 1e-14
        );
        assert_eq!(density(-1.0, &p1).unwrap(), density(1.0, &p1).unwrap());
        let p = params(1.5);
        assert_relative_eq!(density(E - 1.0, &p).unwrap(), 1.0 / E, max_relative = 1e-14);
        assert!(density(0.0, &p).is_err());
    }

    #[test]
    fn tail_examples() {
        let p = params(1.0);
        assert_relative_eq!(tail_one_sided(1.0, &p).unwrap(), 1.0 / LN_2, max_relative = 1e-15);
        assert_relative_eq!(tail_one_sided(E - 1.0, &p).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            tail_one_sided(3.0, &p).unwrap(),
            1.0 / 4.0_f64.ln(),
            max_relative = 1e-15
        );
        assert!(tail_one_sided(0.5, &p).is_err());
    }

    #[test]
    fn inverse_tail_examples() {
        assert_eq!(inverse_tail(1.0, &params(1.0)).unwrap(), LN_2);
        assert_relative_eq!(
            inverse_tail(0.5, &params(1.0)).unwrap(),
            2.0 * LN_2,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            inverse_tail(0.5, &params(0.5)).unwrap(),
            4.0 * LN_2,
            max_relative = 1e-15
        );
        let p = params(1.0);
        assert_relative_eq!(survival_log1p(2.0 * LN_2, &p), 0.5, max_relative = 1e-15);
        assert!(inverse_tail(0.0, &p).is_err());
        assert!(inverse_tail(1.5, &p).is_err());
        // u = 1e-6 at alpha = 1.5 lands far outside f64 in x
        assert!(inverse_tail(1e-6, &params(1.5)).unwrap() > 6900.0);
    }

    #[test]
    fn trunc_moment_examples() {
        let p = params(1.5);
        assert_eq!(trunc_moment(1.0, 1.0, &p).unwrap(), 0.0);
        // extended-precision reference values
        let m3 = trunc_moment(0.25, 1e3, &p).unwrap();
        let m4 = trunc_moment(0.25, 1e4, &p).unwrap();
        assert_relative_eq!(m3, 3.101_212_097_059_348, max_relative = 1e-10);
        assert_relative_eq!(m4, 3.290_184_587_768_106, max_relative = 1e-10);
        assert!(m4 > m3);
        // eta -> 0 reduces to a mass difference
        let cap = 50.0;
        let small = trunc_moment(1e-9, cap, &p).unwrap();
        let mass = 2.0 * (tail_one_sided(1.0, &p).unwrap() - tail_one_sided(cap, &p).unwrap());
        assert_relative_eq!(small, mass, max_relative = 1e-7);
    }

    #[test]
    fn xstar_examples() {
        assert_eq!(solve_xstar(1.0, &params(1.0)).unwrap(), None);
        let r = solve_xstar(0.1, &params(1.0)).unwrap().unwrap();
        assert!((r.log1p_x - 35.771_520_639_572_97).abs() < 1e-9);
        assert!(r.residual(0.1, 1.0).abs() < 1e-12);
        // root of 0.1 l = 1.5 ln l by 200-step mpmath bisection
        let r = solve_xstar(0.1, &params(1.5)).unwrap().unwrap();
        assert!((r.log1p_x - 61.877_301_159_906_66).abs() < 1e-9);
        assert!(r.residual(0.1, 1.5).abs() < 1e-12);
        // alpha / eta exactly e: tangent, no root beyond the trivial one
        assert_eq!(solve_xstar(1.0 / E, &params(1.0)).unwrap(), None);
    }

    #[test]
    fn pruitt_examples() {
        let p = params(1.0);
        assert_relative_eq!(pruitt_hbar(1.0, &p).unwrap(), 2.0 / LN_2, max_relative = 1e-15);
        assert_relative_eq!(pruitt_hbar(1.0, &p).unwrap(), p.trunc_mass(), max_relative = 1e-15);
        let p = params(1.5);
        let h = pruitt_hbar(1e3, &p).unwrap();
        assert!(h >= 1.0 / (1.5 * 1001.0_f64.ln().powf(1.5)));
        assert_relative_eq!(h, 0.083_384_878_771_122_02, max_relative = 1e-10);
        assert_eq!(pruitt_terms(1e5, &p).unwrap().first_moment, 0.0);
        assert!(pruitt_hbar(0.9, &p).is_err());
    }

    #[test]
    fn laplace_examples() {
        let p = params(1.0);
        assert_eq!(laplace_exponent(0.0, &p).unwrap(), 0.0);
        assert_relative_eq!(laplace_exponent(1e9, &p).unwrap(), 1.0 / LN_2, max_relative = 1e-10);
        let p = params(1.5);
        let v = laplace_exponent(1.0, &p).unwrap();
        assert!(v > 0.0 && v < tail_one_sided(1.0, &p).unwrap());
        assert!(laplace_exponent(-1.0, &p).is_err());
    }

    #[test]
    fn small_var_matches_series_reference() {
        // alpha = 1: sum_{n>=2} (2^n - 2)/n! ln2^(n-1)/(n-1), times 2
        let p = params(1.0);
        assert_relative_eq!(p.small_var(), 2.0 * 1.015_853_227_834_262_2, max_relative = 1e-12);
        assert!(params(1.9).small_var().is_finite());
    }

    #[test]
    fn band_rate_vanishes_at_one() {
        let p = params(0.7);
        assert_eq!(band_rate(1.0, &p).unwrap(), 0.0);
        assert!(band_rate(1e-3, &p).unwrap() > 0.0);
    }
}
