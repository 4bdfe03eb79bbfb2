//! Adaptive Gauss-Kronrod quadrature with dyadic handling of improper ends.
//!
//! Finite, regular pieces go through a global adaptive 21-point Gauss-Kronrod
//! scheme. An infinite upper limit is summed over dyadic segments
//! `[b 2^k, b 2^(k+1)]`, and a non-finite integrand value at the lower limit is
//! approached with segments shrinking geometrically toward it. Both series are
//! closed with a geometric extrapolation of the remainder; a series whose
//! segments fail to shrink for [`NONDECAY_RUN`] consecutive steps is reported as
//! divergent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Consecutive non-decaying dyadic segments that declare divergence.
pub const NONDECAY_RUN: usize = 8;
/// Segment ratio at or above which a dyadic step counts as non-decaying.
pub const NONDECAY_RATIO: f64 = 1.0 - 1e-6;
/// Maximum dyadic segments per improper end.
pub const MAX_DYADIC_SEGMENTS: usize = 1000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("invalid interval [{lo}, {hi}]: need finite lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("no convergence after {subdivisions} subdivisions (error estimate {abs_error_estimate:e})")]
    NonConvergence {
        subdivisions: usize,
        abs_error_estimate: f64,
    },
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    /// Relative tolerance; the target is `max(abs_tol, rel_tol * |I|)`.
    pub rel_tol: f64,
    /// Cap on the total number of interval bisections.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 100_000,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn relative(rel_tol: f64) -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
}

/// Which end of the domain failed the dyadic decay test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergentEnd {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    pub end: DivergentEnd,
    /// Segment ratio observed on the last dyadic step.
    pub last_ratio: f64,
    /// Number of dyadic segments evaluated before giving up.
    pub segments: usize,
}

/// Outcome of an integration: a finite value or a detected divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integral {
    Finite(QuadratureResult),
    Divergent(Divergence),
}

impl Integral {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Integral::Divergent(_))
    }

    pub fn finite(self) -> Option<QuadratureResult> {
        match self {
            Integral::Finite(r) => Some(r),
            Integral::Divergent(_) => None,
        }
    }
}

/// Integrates `f` over `[lo, hi]` with absolute tolerance `tol`; `hi` may be
/// `f64::INFINITY`.
pub fn quad_u<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Integral, QuadError>
where
    F: Fn(f64) -> f64,
{
    quad_with(f, lo, hi, &QuadConfig::with_tol(tol))
}

pub fn quad_with<F>(f: F, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<Integral, QuadError>
where
    F: Fn(f64) -> f64,
{
    if !lo.is_finite() || hi.is_nan() || hi <= lo {
        return Err(QuadError::InvalidInterval { lo, hi });
    }
    let mut budget = Budget {
        used: 0,
        max: cfg.max_subdivisions,
    };
    let singular_lo = !f(lo).is_finite();
    let infinite_hi = hi == f64::INFINITY;

    let body_hi = if infinite_hi {
        if lo > 0.0 {
            2.0 * lo
        } else {
            lo.max(0.0) + 1.0
        }
    } else {
        hi
    };
    let body_lo = if singular_lo { lo + 0.5 * (body_hi - lo) } else { lo };

    let share = match (singular_lo, infinite_hi) {
        (false, false) => 1.0,
        (true, true) => 1.0 / 3.0,
        _ => 0.5,
    };
    let piece_cfg = QuadConfig {
        abs_tol: cfg.abs_tol * share,
        ..*cfg
    };

    let mut total = adaptive(&f, body_lo, body_hi, &piece_cfg, &mut budget)?;

    if singular_lo {
        let width = body_lo - lo;
        let seg = |k: usize| {
            let a = lo + width * 0.5_f64.powi(k as i32 + 1);
            let b = lo + width * 0.5_f64.powi(k as i32);
            (a, b)
        };
        match dyadic_series(&f, seg, &piece_cfg, &mut budget, DivergentEnd::Lower)? {
            Integral::Finite(r) => total = combine(total, r),
            div => return Ok(div),
        }
    }
    if infinite_hi {
        let start = body_hi;
        let seg = |k: usize| {
            let a = start * 2.0_f64.powi(k as i32);
            (a, 2.0 * a)
        };
        match dyadic_series(&f, seg, &piece_cfg, &mut budget, DivergentEnd::Upper)? {
            Integral::Finite(r) => total = combine(total, r),
            div => return Ok(div),
        }
    }
    total.subdivisions = budget.used;
    Ok(Integral::Finite(total))
}

fn combine(a: QuadratureResult, b: QuadratureResult) -> QuadratureResult {
    QuadratureResult {
        value: a.value + b.value,
        abs_error_estimate: a.abs_error_estimate + b.abs_error_estimate,
        subdivisions: a.subdivisions + b.subdivisions,
    }
}

struct Budget {
    used: usize,
    max: usize,
}

fn dyadic_series<F, S>(
    f: &F,
    seg: S,
    cfg: &QuadConfig,
    budget: &mut Budget,
    end: DivergentEnd,
) -> Result<Integral, QuadError>
where
    F: Fn(f64) -> f64,
    S: Fn(usize) -> (f64, f64),
{
    let mut sum = 0.0_f64;
    let mut err = 0.0_f64;
    let mut prev: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut nondecay = 0usize;
    let mut decaying_run = 0usize;

    for k in 0..MAX_DYADIC_SEGMENTS {
        let (a, b) = seg(k);
        if !(a.is_finite() && b.is_finite()) || a >= b {
            // The segments no longer resolve in f64; what is left is below rounding.
            return Ok(Integral::Finite(QuadratureResult {
                value: sum,
                abs_error_estimate: err,
                subdivisions: budget.used,
            }));
        }
        let seg_cfg = QuadConfig {
            abs_tol: cfg.abs_tol * 0.5_f64.powi((k as i32 + 2).min(60)),
            rel_tol: cfg.rel_tol.max(1e-14),
            max_subdivisions: cfg.max_subdivisions,
        };
        let piece = adaptive(f, a, b, &seg_cfg, budget)?;
        sum += piece.value;
        err += piece.abs_error_estimate;
        let s = piece.value.abs();

        let ratio = match prev {
            None => None,
            Some(0.0) => Some(if s == 0.0 { 0.0 } else { f64::INFINITY }),
            Some(p) => Some(s / p),
        };
        prev = Some(s);
        let Some(q) = ratio else { continue };

        if q >= NONDECAY_RATIO {
            nondecay += 1;
            decaying_run = 0;
            if nondecay >= NONDECAY_RUN {
                return Ok(Integral::Divergent(Divergence {
                    end,
                    last_ratio: q,
                    segments: k + 1,
                }));
            }
        } else {
            nondecay = 0;
            decaying_run += 1;
            let geometric = |r: f64| r / (1.0 - r);
            let remainder = piece.value * geometric(q);
            let spread = match prev_ratio {
                Some(pq) if pq < NONDECAY_RATIO => piece.value.abs() * (geometric(q) - geometric(pq)).abs(),
                _ => f64::INFINITY,
            };
            let target = cfg.abs_tol.max(cfg.rel_tol * (sum + remainder).abs());
            let settled = decaying_run >= 3
                && spread <= 0.25 * target
                && remainder.abs() <= (sum + remainder).abs().max(cfg.abs_tol);
            if settled || s == 0.0 && decaying_run >= 3 {
                return Ok(Integral::Finite(QuadratureResult {
                    value: sum + remainder,
                    abs_error_estimate: err + spread,
                    subdivisions: budget.used,
                }));
            }
        }
        prev_ratio = Some(q);
    }
    Err(QuadError::NonConvergence {
        subdivisions: budget.used,
        abs_error_estimate: err,
    })
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn adaptive<F>(f: &F, a: f64, b: f64, cfg: &QuadConfig, budget: &mut Budget) -> Result<QuadratureResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    let first = gk21(f, a, b)?;
    let mut value = first.value;
    let mut err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // intervals too narrow to split stay out of the heap but keep their error
    let mut frozen_err = 0.0;
    let mut frozen_value = 0.0;
    let mut local = 0usize;

    loop {
        // the rounding floor of the rule itself is 50 eps |I|
        let target = cfg.abs_tol.max((cfg.rel_tol.max(100.0 * f64::EPSILON)) * value.abs());
        if err <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) || (worst.b - worst.a) < 1e-14 * mid.abs().max(1e-300) {
            frozen_err += worst.err;
            frozen_value += worst.value;
            continue;
        }
        if budget.used >= budget.max {
            return Err(QuadError::NonConvergence {
                subdivisions: budget.used,
                abs_error_estimate: err,
            });
        }
        budget.used += 1;
        local += 1;
        let left = gk21(f, worst.a, mid)?;
        let right = gk21(f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        if local.is_multiple_of(64) {
            // resum so the running totals do not drift
            err = frozen_err + heap.iter().map(|p| p.err).sum::<f64>();
            value = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
        }
    }
    let value = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
    Ok(QuadratureResult {
        value,
        abs_error_estimate: err,
        subdivisions: local,
    })
}

fn gk21<F>(f: &F, a: f64, b: f64) -> Result<Piece, QuadError>
where
    F: Fn(f64) -> f64,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64, QuadError> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFiniteIntegrand { x })
        }
    };
    let fc = eval(center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut resabs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = kronrod * half;
    resabs *= h;
    resasc *= h;
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Piece { a, b, value, err })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite(i: Integral) -> QuadratureResult {
        i.finite().expect("expected a finite integral")
    }

    #[test]
    fn inverse_square_tail_from_ln2() {
        let r = finite(quad_u(|u| u.powi(-2), 2.0_f64.ln(), f64::INFINITY, 1e-10).unwrap());
        assert!((r.value - 1.0 / 2.0_f64.ln()).abs() < 1e-10, "{r:?}");
        assert!(r.abs_error_estimate >= 0.0);
    }

    #[test]
    fn inverse_square_at_zero_diverges() {
        let r = quad_u(|u| u.powi(-2), 0.0, 1.0, 1e-10).unwrap();
        match r {
            Integral::Divergent(d) => assert_eq!(d.end, DivergentEnd::Lower),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn harmonic_tail_diverges() {
        let r = quad_u(|u| 1.0 / u, 1.0, f64::INFINITY, 1e-10).unwrap();
        assert!(r.is_divergent());
    }

    #[test]
    fn small_jump_variance_integrand_alpha_one() {
        // reference: sum_{n>=2} (2^n - 2)/n! * ln2^(n-1)/(n-1), summed to convergence
        let l2 = 2.0_f64.ln();
        let mut reference = 0.0;
        let mut fact = 1.0;
        for n in 1..40 {
            fact *= n as f64;
            if n >= 2 {
                reference += (2.0_f64.powi(n) - 2.0) / fact * l2.powi(n - 1) / (n as f64 - 1.0);
            }
        }
        let r = finite(quad_u(|u: f64| u.exp_m1().powi(2) / (u * u), 0.0, l2, 1e-12).unwrap());
        assert!(r.value > 0.0);
        assert!((r.value - reference).abs() < 1e-11, "{} vs {}", r.value, reference);
    }

    #[test]
    fn power_law_tails_match_closed_form() {
        for alpha in [0.5, 1.0, 1.5] {
            let lo = 2.0_f64.ln();
            let r = finite(quad_u(|u: f64| u.powf(-(1.0 + alpha)), lo, f64::INFINITY, 1e-13).unwrap());
            let exact = lo.powf(-alpha) / alpha;
            assert!(
                ((r.value - exact) / exact).abs() < 1e-10,
                "alpha {alpha}: {} vs {exact}",
                r.value
            );
        }
    }

    #[test]
    fn endpoint_power_singularity_converges() {
        // u^(1 - alpha) on (0, 1]: integral 1 / (2 - alpha)
        for alpha in [0.5, 1.5, 1.9] {
            let r = finite(quad_u(|u: f64| u.powf(1.0 - alpha), 0.0, 1.0, 1e-10).unwrap());
            assert!(
                (r.value - 1.0 / (2.0 - alpha)).abs() < 1e-9,
                "alpha {alpha}: {}",
                r.value
            );
        }
    }

    #[test]
    fn subdivision_cap_is_an_error_not_divergence() {
        let cfg = QuadConfig {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_subdivisions: 3,
        };
        let r = quad_with(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &cfg);
        assert!(matches!(r, Err(QuadError::NonConvergence { .. })));
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(matches!(
            quad_u(|x| x, 1.0, 0.0, 1e-10),
            Err(QuadError::InvalidInterval { .. })
        ));
    }
}
