//! Weighted sup-seminorms of the test functions.
//!
//! Every supremum is taken of `ln(weight) + ln|phi^(q)|`: a grid of
//! `2^16 + 1` points over the effective support (where the log value is above
//! `ln 1e-300`), then golden-section refinement around the best grid maxima.
//! The result carries the logarithm so weights like `e^(p |x|^beta)` never
//! overflow on the way.

use serde::Serialize;

use super::{SpacesError, TestFunction};

const GRID_INTERVALS: usize = 1 << 16;
/// `ln 1e-300`: below this the function is treated as invisible.
const LN_FLOOR: f64 = -690.8;
const REFINE_CANDIDATES: usize = 8;
const MAX_DOUBLINGS: usize = 80;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Seminorm {
    Finite {
        /// Natural log of the seminorm.
        ln_value: f64,
        /// Derivative order attaining the maximum.
        order: u32,
        argmax: f64,
    },
    Divergent {
        reason: String,
    },
}

impl Seminorm {
    /// The seminorm as a float; `None` when divergent or beyond `f64` range.
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite { ln_value, .. } => Some(ln_value.exp()).filter(|v| v.is_finite()),
            Self::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Self::Divergent { .. })
    }
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `(sup, argmax)` of `f` over `[lo, hi]` by grid search plus local refinement.
fn sup_on(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let h = (hi - lo) / GRID_INTERVALS as f64;
    let xs: Vec<f64> = (0..=GRID_INTERVALS).map(|i| lo + i as f64 * h).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut peaks: Vec<usize> = (0..xs.len())
        .filter(|&i| {
            let left = if i == 0 { f64::NEG_INFINITY } else { ys[i - 1] };
            let right = ys.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            ys[i] > f64::NEG_INFINITY && ys[i] >= left && ys[i] >= right
        })
        .collect();
    peaks.sort_by(|&i, &j| ys[j].total_cmp(&ys[i]));
    let mut best = (f64::NEG_INFINITY, 0.5 * (lo + hi));
    for &i in peaks.iter().take(REFINE_CANDIDATES) {
        if ys[i] > best.0 {
            best = (ys[i], xs[i]);
        }
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(xs.len() - 1)];
        let (x, y) = golden_max(f, a, b);
        if y > best.0 {
            best = (y, x);
        }
    }
    best
}

/// Half-width around `center` beyond which `f` stays below the floor.
fn effective_radius(f: &impl Fn(f64) -> f64, center: f64, base: f64) -> Option<f64> {
    let mut r = base;
    for _ in 0..MAX_DOUBLINGS {
        let outside = [center - r, center + r, center - 1.37 * r, center + 1.37 * r]
            .iter()
            .all(|&x| f(x) < LN_FLOOR);
        if outside {
            return Some(r);
        }
        r *= 2.0;
    }
    None
}

/// `sup_x ln(w(x)) + ln|phi^(q)(x)|` maximized over `q` in `orders`.
fn weighted_sup(
    phi: &TestFunction,
    orders: std::ops::RangeInclusive<u32>,
    ln_weight: impl Fn(f64) -> f64,
    limit_at_infinity: Option<&dyn Fn(u32) -> f64>,
) -> Result<Seminorm, SpacesError> {
    phi.validate()?;
    phi.check_order(*orders.end())?;
    let (center, scale) = phi.location();
    let mut best: Option<(f64, u32, f64)> = None;
    for q in orders {
        let obj = |x: f64| {
            let (s, l) = phi.ln_derivatives_unchecked(x, q as usize)[q as usize];
            if s == 0 {
                f64::NEG_INFINITY
            } else {
                ln_weight(x) + l
            }
        };
        let (lo, hi) = match (phi, limit_at_infinity) {
            (TestFunction::Bump { .. }, _) => (center - scale, center + scale),
            (_, Some(_)) => (center - 64.0 * scale, center + 64.0 * scale),
            _ => {
                let r = effective_radius(&obj, center, scale)
                    .ok_or_else(|| SpacesError::Domain(format!("no effective support found for {phi} at order {q}")))?;
                (center - r, center + r)
            }
        };
        let (mut y, mut x) = sup_on(&obj, lo, hi);
        if let Some(lim) = limit_at_infinity {
            let l = lim(q);
            if l > y {
                y = l;
                x = f64::INFINITY;
            }
        }
        if best.is_none_or(|(b, _, _)| y > b) {
            best = Some((y, q, x));
        }
    }
    let (ln_value, order, argmax) = best.expect("orders is nonempty");
    Ok(Seminorm::Finite {
        ln_value,
        order,
        argmax,
    })
}

/// `sup_x |x^p phi^(r)(x)|`.
pub fn s_norm(phi: &TestFunction, p: u32, r: u32) -> Result<Seminorm, SpacesError> {
    let pf = f64::from(p);
    weighted_sup(phi, r..=r, |x| if p == 0 { 0.0 } else { pf * x.abs().ln() }, None)
}

/// `max_{q <= p} sup_x e^(p|x|) |phi^(q)(x)|`.
pub fn k_norm(phi: &TestFunction, p: u32) -> Result<Seminorm, SpacesError> {
    weight_norm(phi, p, 1.0)
}

/// `max_{q <= p} sup_x e^(p|x|^beta) |phi^(q)(x)|` for `beta > 1`.
pub fn kbeta_norm(phi: &TestFunction, p: u32, beta: f64) -> Result<Seminorm, SpacesError> {
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(SpacesError::Domain(format!("beta = {beta} must be finite and > 1")));
    }
    weight_norm(phi, p, beta)
}

fn weight_norm(phi: &TestFunction, p: u32, beta: f64) -> Result<Seminorm, SpacesError> {
    phi.validate()?;
    phi.check_order(p)?;
    let pf = f64::from(p);
    let mut limit: Option<Box<dyn Fn(u32) -> f64>> = None;
    if p >= 1 {
        match *phi {
            TestFunction::Gaussian { scale, .. } => {
                if beta > 2.0 || (beta == 2.0 && pf * scale * scale >= 1.0) {
                    return Ok(Seminorm::Divergent {
                        reason: format!("weight e^({p}|x|^{beta}) outgrows {phi}"),
                    });
                }
            }
            TestFunction::ExpDecayPoly { rate, degree } => {
                if beta > 1.0 || pf > rate || (pf == rate && degree > 0) {
                    return Ok(Seminorm::Divergent {
                        reason: format!("weight e^({p}|x|^{beta}) outgrows {phi}"),
                    });
                }
                if pf == rate {
                    // e^(p|x|) |phi^(q)| tends to rate^q as |x| grows
                    limit = Some(Box::new(move |q| f64::from(q) * rate.ln()));
                }
            }
            TestFunction::Bump { .. } => {}
        }
    }
    weighted_sup(phi, 0..=p, |x| pf * x.abs().powf(beta), limit.as_deref())
}
