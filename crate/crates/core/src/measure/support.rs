//! Upper-function integrals and the resulting support classification.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use super::{measure_cfg, tail_from_log1p, EnvelopeSpec, KAlphaParams, MeasureError};
use crate::numerics::{quad_with, Integral};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Convergent,
    Divergent,
}

/// `I(f) = int_1^inf nu'(f(x), inf) dx`: the analytic verdict, the agreeing
/// quadrature result, and the value when finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperFunctionOutcome {
    pub envelope: EnvelopeSpec,
    pub status: Convergence,
    pub value: Option<f64>,
    pub numeric: Integral,
}

fn analytic(f: &EnvelopeSpec, alpha: f64) -> Convergence {
    let convergent = match *f {
        EnvelopeSpec::Power { .. } => false,
        EnvelopeSpec::Exponential { .. } => alpha > 1.0,
        EnvelopeSpec::PowerExponential { beta, .. } => alpha * beta > 1.0,
    };
    if convergent {
        Convergence::Convergent
    } else {
        Convergence::Divergent
    }
}

/// Classifies `I(f)` analytically and checks the verdict against the dyadic
/// tail test of the quadrature engine. Disagreement is an error.
pub fn upper_function_integral(f: &EnvelopeSpec, p: &KAlphaParams) -> Result<UpperFunctionOutcome, MeasureError> {
    f.validate()?;
    let a = p.alpha();
    let integrand = |x: f64| tail_from_log1p(f.log1p_value(x), a);
    let numeric = quad_with(integrand, 1.0, f64::INFINITY, &measure_cfg())?;
    let numeric_status = if numeric.is_divergent() {
        Convergence::Divergent
    } else {
        Convergence::Convergent
    };
    let status = analytic(f, a);
    if status != numeric_status {
        return Err(MeasureError::Inconsistent {
            envelope: f.to_string(),
            analytic: status,
            numeric: numeric_status,
        });
    }
    Ok(UpperFunctionOutcome {
        envelope: *f,
        status,
        value: numeric.finite().map(|r| r.value),
        numeric,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KBetaVerdict {
    pub beta: f64,
    pub member: bool,
    pub reason: String,
}

/// Path-support claims for a given `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportVerdict {
    pub alpha: f64,
    pub in_s_prime: bool,
    pub in_k_prime: bool,
    pub in_k_beta: Vec<KBetaVerdict>,
    pub reason_s_prime: String,
    pub reason_k_prime: String,
}

impl SupportVerdict {
    pub fn k_beta(&self, beta: f64) -> Option<bool> {
        self.in_k_beta.iter().find(|v| v.beta == beta).map(|v| v.member)
    }
}

struct BetaMembers<'a>(&'a [KBetaVerdict]);
struct BetaReasons<'a>(&'a [KBetaVerdict]);

impl Serialize for BetaMembers<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for v in self.0 {
            m.serialize_entry(&v.beta.to_string(), &v.member)?;
        }
        m.end()
    }
}

impl Serialize for BetaReasons<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for v in self.0 {
            m.serialize_entry(&v.beta.to_string(), &v.reason)?;
        }
        m.end()
    }
}

impl Serialize for SupportVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Reasons<'a> {
            #[serde(rename = "in_S_prime")]
            in_s_prime: &'a str,
            #[serde(rename = "in_K_prime")]
            in_k_prime: &'a str,
            #[serde(rename = "in_K_beta")]
            in_k_beta: BetaReasons<'a>,
        }
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("alpha", &self.alpha)?;
        m.serialize_entry("in_S_prime", &self.in_s_prime)?;
        m.serialize_entry("in_K_prime", &self.in_k_prime)?;
        m.serialize_entry("in_K_beta", &BetaMembers(&self.in_k_beta))?;
        m.serialize_entry(
            "reasons",
            &Reasons {
                in_s_prime: &self.reason_s_prime,
                in_k_prime: &self.reason_k_prime,
                in_k_beta: BetaReasons(&self.in_k_beta),
            },
        )?;
        m.end()
    }
}

fn describe(o: &UpperFunctionOutcome) -> String {
    match (o.status, o.value) {
        (Convergence::Convergent, Some(v)) => format!("I({}) converges (= {v:.6e})", o.envelope),
        _ => format!("I({}) diverges", o.envelope),
    }
}

/// Support of the sample paths: never in S' (no positive moments, power
/// envelopes are exceeded), in K' iff `alpha > 1`, in K'_beta iff `alpha > 1/beta`.
pub fn classify_support(p: &KAlphaParams, betas: &[f64]) -> Result<SupportVerdict, MeasureError> {
    let a = p.alpha();
    for &b in betas {
        if !(b > 1.0) {
            return Err(MeasureError::Domain {
                what: "beta",
                value: b,
                constraint: "beta > 1",
            });
        }
    }
    let power = upper_function_integral(&EnvelopeSpec::power(2.0)?, p)?;
    let reason_s_prime = format!(
        "no positive moment of the large jumps is finite and {}, so the paths are not slowly growing",
        describe(&power)
    );

    let exp = upper_function_integral(&EnvelopeSpec::exponential(1.0)?, p)?;
    let in_k_prime = exp.status == Convergence::Convergent;
    let reason_k_prime = if in_k_prime {
        format!("{} so e^(c|t|) is an upper function (alpha = {a} > 1)", describe(&exp))
    } else {
        format!(
            "{}; alpha = {a} <= 1 gives no exponential upper function",
            describe(&exp)
        )
    };

    let mut in_k_beta = Vec::with_capacity(betas.len());
    for &beta in betas {
        let o = upper_function_integral(&EnvelopeSpec::power_exponential(1.0, beta)?, p)?;
        let member = o.status == Convergence::Convergent;
        let cmp = if member { ">" } else { "<=" };
        in_k_beta.push(KBetaVerdict {
            beta,
            member,
            reason: format!("{} (alpha = {a} {cmp} 1/beta = {})", describe(&o), 1.0 / beta),
        });
    }

    Ok(SupportVerdict {
        alpha: a,
        in_s_prime: false,
        in_k_prime,
        in_k_beta,
        reason_s_prime,
        reason_k_prime,
    })
}
