use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvelopeError {
    #[error("envelope exponent beta = {0} must be > 1")]
    Beta(f64),
    #[error("envelope rate c = {0} must be > 0")]
    Rate(f64),
    #[error("malformed envelope descriptor {0:?}; expected pow:beta=B, exp:c=C or powexp:c=C,beta=B")]
    Descriptor(String),
}

/// Growth function `f(t)` compared against the running supremum:
/// `t^beta`, `e^(c t)` or `e^(c t^beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeSpec {
    Power { beta: f64 },
    Exponential { c: f64 },
    PowerExponential { c: f64, beta: f64 },
}

impl EnvelopeSpec {
    pub fn power(beta: f64) -> Result<Self, EnvelopeError> {
        check_beta(beta)?;
        Ok(Self::Power { beta })
    }

    pub fn exponential(c: f64) -> Result<Self, EnvelopeError> {
        check_rate(c)?;
        Ok(Self::Exponential { c })
    }

    pub fn power_exponential(c: f64, beta: f64) -> Result<Self, EnvelopeError> {
        check_rate(c)?;
        check_beta(beta)?;
        Ok(Self::PowerExponential { c, beta })
    }

    pub fn validate(&self) -> Result<(), EnvelopeError> {
        match *self {
            Self::Power { beta } => check_beta(beta),
            Self::Exponential { c } => check_rate(c),
            Self::PowerExponential { c, beta } => check_rate(c).and_then(|_| check_beta(beta)),
        }
    }

    /// `ln f(t)` for `t > 0`.
    pub fn ln_value(&self, t: f64) -> f64 {
        match *self {
            Self::Power { beta } => beta * t.ln(),
            Self::Exponential { c } => c * t,
            Self::PowerExponential { c, beta } => c * t.powf(beta),
        }
    }

    /// `ln(1 + f(t))`, stable when `f(t)` overflows.
    pub fn log1p_value(&self, t: f64) -> f64 {
        let lf = self.ln_value(t);
        if lf > 0.0 {
            lf + (-lf).exp().ln_1p()
        } else {
            lf.exp().ln_1p()
        }
    }

    /// The time `t >= 0` at which `ln f(t) = y`.
    pub fn inverse_ln(&self, y: f64) -> f64 {
        match *self {
            Self::Power { beta } => (y / beta).exp(),
            Self::Exponential { c } => (y / c).max(0.0),
            Self::PowerExponential { c, beta } => {
                if y <= 0.0 {
                    0.0
                } else {
                    (y / c).powf(1.0 / beta)
                }
            }
        }
    }
}

fn check_beta(beta: f64) -> Result<(), EnvelopeError> {
    if beta > 1.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(EnvelopeError::Beta(beta))
    }
}

fn check_rate(c: f64) -> Result<(), EnvelopeError> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(EnvelopeError::Rate(c))
    }
}

impl fmt::Display for EnvelopeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Power { beta } => write!(f, "pow:beta={beta}"),
            Self::Exponential { c } => write!(f, "exp:c={c}"),
            Self::PowerExponential { c, beta } => write!(f, "powexp:c={c},beta={beta}"),
        }
    }
}

impl FromStr for EnvelopeSpec {
    type Err = EnvelopeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EnvelopeError::Descriptor(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let mut beta = None;
        let mut c = None;
        for kv in rest.split(',').filter(|t| !t.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(bad)?;
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            match k.trim() {
                "beta" => beta = Some(v),
                "c" => c = Some(v),
                _ => return Err(bad()),
            }
        }
        match (kind.trim(), c, beta) {
            ("pow" | "power", None, Some(b)) => Self::power(b),
            ("exp" | "exponential", Some(c), None) => Self::exponential(c),
            ("powexp" | "power_exponential", Some(c), Some(b)) => Self::power_exponential(c, b),
            _ => Err(bad()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_descriptors() {
        assert_eq!(
            "exp:c=1.0".parse::<EnvelopeSpec>().unwrap(),
            EnvelopeSpec::Exponential { c: 1.0 }
        );
        assert_eq!(
            "pow:beta=2".parse::<EnvelopeSpec>().unwrap(),
            EnvelopeSpec::Power { beta: 2.0 }
        );
        assert_eq!(
            "powexp:c=1,beta=2".parse::<EnvelopeSpec>().unwrap(),
            EnvelopeSpec::PowerExponential { c: 1.0, beta: 2.0 }
        );
        assert_eq!("pow:beta=0.5".parse::<EnvelopeSpec>(), Err(EnvelopeError::Beta(0.5)));
        assert!(matches!(
            "exp:beta=2".parse::<EnvelopeSpec>(),
            Err(EnvelopeError::Descriptor(_))
        ));
        assert!(matches!(
            "nonsense".parse::<EnvelopeSpec>(),
            Err(EnvelopeError::Descriptor(_))
        ));
    }

    #[test]
    fn inverse_undoes_ln_value() {
        for env in [
            EnvelopeSpec::Power { beta: 2.0 },
            EnvelopeSpec::Exponential { c: 0.7 },
            EnvelopeSpec::PowerExponential { c: 1.3, beta: 1.5 },
        ] {
            for t in [1.0, 3.5, 40.0, 1e4] {
                let back = env.inverse_ln(env.ln_value(t));
                assert!((back - t).abs() <= 1e-12 * t, "{env}: {t} -> {back}");
            }
        }
    }

    #[test]
    fn log1p_survives_overflow() {
        let env = EnvelopeSpec::Exponential { c: 1.0 };
        assert_eq!(env.log1p_value(1e6), 1e6);
        assert!((env.log1p_value(0.0) - 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn display_round_trips() {
        let env = EnvelopeSpec::PowerExponential { c: 0.5, beta: 3.0 };
        assert_eq!(env.to_string().parse::<EnvelopeSpec>().unwrap(), env);
    }
}
