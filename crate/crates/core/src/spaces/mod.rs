//! Test functions, the S, K and K_beta seminorms, and the pairing of a
//! simulated path's derivative with a test function.

mod jet;
pub mod norms;
pub mod pairing;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::numerics::SignedLogValue;
use jet::Jet;

pub use norms::{k_norm, kbeta_norm, s_norm, Seminorm};
pub use pairing::{pair_white_noise, pair_with_small, Pairing};

/// Highest derivative served for the gaussian (Hermite recursion).
pub const MAX_GAUSSIAN_ORDER: u32 = 64;
/// Highest derivative served for the bump and the exponential family.
pub const MAX_JET_ORDER: u32 = 8;
/// Largest polynomial degree accepted by [`TestFunction::ExpDecayPoly`].
pub const MAX_DEGREE: u32 = 64;
/// Below this exponent the bump is reported as exactly zero.
const BUMP_CUTOFF: f64 = -1e4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpacesError {
    #[error("derivative order {order} is not available for the {family} family (max {max})")]
    Order { family: &'static str, order: u32, max: u32 },
    #[error("{0}")]
    Domain(String),
    #[error("unparseable test-function descriptor {0:?}")]
    Descriptor(String),
    #[error("paths do not match: {0}")]
    Mismatch(String),
}

/// Built-in test functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(-((x - center) / scale)^2)`
    Gaussian { center: f64, scale: f64 },
    /// `exp(-1 / (1 - y^2))` for `|y| < 1`, `y = (x - center) / width`, else 0
    Bump { center: f64, width: f64 },
    /// `x^degree exp(-rate sqrt(1 + x^2))`
    ExpDecayPoly { rate: f64, degree: u32 },
}

fn positive(what: &str, v: f64) -> Result<(), SpacesError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SpacesError::Domain(format!("{what} = {v} must be finite and > 0")))
    }
}

fn finite(what: &str, v: f64) -> Result<(), SpacesError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SpacesError::Domain(format!("{what} = {v} must be finite")))
    }
}

impl TestFunction {
    pub fn gaussian(center: f64, scale: f64) -> Result<Self, SpacesError> {
        let f = Self::Gaussian { center, scale };
        f.validate().map(|_| f)
    }

    pub fn bump(center: f64, width: f64) -> Result<Self, SpacesError> {
        let f = Self::Bump { center, width };
        f.validate().map(|_| f)
    }

    pub fn exp_decay_poly(rate: f64, degree: u32) -> Result<Self, SpacesError> {
        let f = Self::ExpDecayPoly { rate, degree };
        f.validate().map(|_| f)
    }

    pub fn validate(&self) -> Result<(), SpacesError> {
        match *self {
            Self::Gaussian { center, scale } => finite("center", center).and(positive("scale", scale)),
            Self::Bump { center, width } => finite("center", center).and(positive("width", width)),
            Self::ExpDecayPoly { rate, degree } => {
                positive("rate", rate)?;
                if degree > MAX_DEGREE {
                    return Err(SpacesError::Domain(format!("degree = {degree} exceeds {MAX_DEGREE}")));
                }
                Ok(())
            }
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Bump { .. } => "bump",
            Self::ExpDecayPoly { .. } => "expdecay",
        }
    }

    pub fn max_order(&self) -> u32 {
        match self {
            Self::Gaussian { .. } => MAX_GAUSSIAN_ORDER,
            _ => MAX_JET_ORDER,
        }
    }

    pub fn check_order(&self, order: u32) -> Result<(), SpacesError> {
        if order > self.max_order() {
            Err(SpacesError::Order {
                family: self.family(),
                order,
                max: self.max_order(),
            })
        } else {
            Ok(())
        }
    }

    /// Where the function lives: its center and a length scale. For the bump
    /// the scale is the exact support half-width.
    pub(crate) fn location(&self) -> (f64, f64) {
        match *self {
            Self::Gaussian { center, scale } => (center, scale),
            Self::Bump { center, width } => (center, width),
            Self::ExpDecayPoly { rate, degree } => (0.0, (1.0 / rate).max(1.0).max(f64::from(degree) / rate)),
        }
    }

    /// `(sign, ln|phi^(q)(x)|)` for `q = 0..=order`.
    pub fn ln_derivatives(&self, x: f64, order: u32) -> Result<Vec<(i8, f64)>, SpacesError> {
        self.check_order(order)?;
        Ok(self.ln_derivatives_unchecked(x, order as usize))
    }

    pub(crate) fn ln_derivatives_unchecked(&self, x: f64, n: usize) -> Vec<(i8, f64)> {
        match *self {
            Self::Gaussian { center, scale } => {
                let y = (x - center) / scale;
                let ln_s = scale.ln();
                // phi^(q) = (-1)^q s^-q H_q(y) e^(-y^2)
                let mut h_prev = 1.0;
                let mut h = 2.0 * y;
                (0..=n)
                    .map(|q| {
                        let hq = match q {
                            0 => 1.0,
                            1 => h,
                            _ => {
                                let next = 2.0 * y * h - 2.0 * (q - 1) as f64 * h_prev;
                                h_prev = h;
                                h = next;
                                next
                            }
                        };
                        if hq == 0.0 {
                            return (0, f64::NEG_INFINITY);
                        }
                        let sign = if (hq > 0.0) == (q % 2 == 0) { 1 } else { -1 };
                        (sign, hq.abs().ln() - q as f64 * ln_s - y * y)
                    })
                    .collect()
            }
            Self::Bump { center, width } => {
                let y = (x - center) / width;
                let zero = vec![(0, f64::NEG_INFINITY); n + 1];
                if !(y.abs() < 1.0) {
                    return zero;
                }
                let g0 = -1.0 / ((1.0 - y) * (1.0 + y));
                if g0 < BUMP_CUTOFF {
                    return zero;
                }
                // -1/(1-y^2) = -(1/(1-y) + 1/(1+y)) / 2, expanded about y
                let (a, b) = (1.0 - y, 1.0 + y);
                let mut g = vec![0.0; n + 1];
                for (k, gk) in g.iter_mut().enumerate().skip(1) {
                    let alt = if k % 2 == 0 { 1.0 } else { -1.0 };
                    *gk = -0.5 * (a.powi(-(k as i32 + 1)) + alt * b.powi(-(k as i32 + 1)));
                }
                let e = Jet(g).exp_shifted();
                let ln_w = width.ln();
                (0..=n)
                    .map(|q| {
                        let (s, l) = e.ln_derivative(q);
                        (s, l + g0 - q as f64 * ln_w)
                    })
                    .collect()
            }
            Self::ExpDecayPoly { rate, degree } => {
                let mut inner = vec![0.0; n + 1];
                inner[0] = 1.0 + x * x;
                if n >= 1 {
                    inner[1] = 2.0 * x;
                }
                if n >= 2 {
                    inner[2] = 1.0;
                }
                let s = Jet(inner).sqrt();
                let s0 = s.0[0];
                let e = Jet(s.0.iter().map(|c| -rate * c).collect()).exp_shifted();
                let f = Jet::power(x, degree, n).mul(&e);
                (0..=n)
                    .map(|q| {
                        let (sg, l) = f.ln_derivative(q);
                        (sg, l - rate * s0)
                    })
                    .collect()
            }
        }
    }

    /// `phi^(q)(x)` as a signed log value.
    pub fn derivative(&self, x: f64, q: u32) -> Result<SignedLogValue, SpacesError> {
        let d = self.ln_derivatives(x, q)?;
        let (s, l) = d[q as usize];
        Ok(SignedLogValue::from_parts(s, l))
    }

    /// `phi(x)` as a native float (all families are bounded by 1).
    pub fn value(&self, x: f64) -> f64 {
        let (s, l) = self.ln_derivatives_unchecked(x, 0)[0];
        f64::from(s) * l.exp()
    }

    /// `phi'(x)` as a native float.
    pub fn slope(&self, x: f64) -> f64 {
        let (s, l) = self.ln_derivatives_unchecked(x, 1)[1];
        f64::from(s) * l.exp()
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { center, scale } => write!(f, "gaussian:center={center},scale={scale}"),
            Self::Bump { center, width } => write!(f, "bump:center={center},width={width}"),
            Self::ExpDecayPoly { rate, degree } => write!(f, "expdecay:rate={rate},degree={degree}"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = SpacesError;

    /// Parses `gaussian:center=C,scale=S`, `bump:center=C,width=W` or
    /// `expdecay:rate=R,degree=D`. Missing centers default to 0, a missing
    /// scale to 1, a missing degree to 0.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SpacesError::Descriptor(s.to_string());
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = Vec::new();
        for tok in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (k, v) = tok.split_once('=').ok_or_else(bad)?;
            kv.push((k.trim(), v.trim()));
        }
        let get = |name: &str| -> Result<Option<f64>, SpacesError> {
            kv.iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| v.parse::<f64>().map_err(|_| bad()))
                .transpose()
        };
        let allowed: &[&str] = match kind.trim() {
            "gaussian" => &["center", "scale"],
            "bump" => &["center", "width"],
            "expdecay" | "exp_decay_poly" => &["rate", "degree"],
            _ => return Err(bad()),
        };
        if kv.iter().any(|(k, _)| !allowed.contains(k)) {
            return Err(bad());
        }
        match kind.trim() {
            "gaussian" => Self::gaussian(get("center")?.unwrap_or(0.0), get("scale")?.unwrap_or(1.0)),
            "bump" => Self::bump(get("center")?.unwrap_or(0.0), get("width")?.ok_or_else(bad)?),
            _ => {
                let rate = get("rate")?.ok_or_else(bad)?;
                let degree = kv
                    .iter()
                    .find(|(k, _)| *k == "degree")
                    .map(|(_, v)| v.parse::<u32>().map_err(|_| bad()))
                    .transpose()?
                    .unwrap_or(0);
                Self::exp_decay_poly(rate, degree)
            }
        }
    }
}
