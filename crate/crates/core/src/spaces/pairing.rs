//! `<K', phi> = -int_0^inf K(t) phi'(t) dt` for a piecewise-constant path.
//!
//! The path is frozen at its last level after the horizon and `phi` vanishes
//! at infinity, so with `t_0 = 0`, `K_0 = 0` the integral is exactly
//! `-sum_i K_i (phi(t_{i+1}) - phi(t_i))` over the constancy segments, which
//! summation by parts turns into `sum_j dK_j phi(t_j)`. Both forms are
//! evaluated independently and compared.

use serde::Serialize;

use super::{SpacesError, TestFunction};
use crate::numerics::SignedLogValue;
use crate::paths::{EventPath, GridPath};

/// Warn when the frozen tail `|K(H) phi(H)|` exceeds this share of the pairing's scale.
pub const TRUNCATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pairing {
    /// Segment-sum value.
    pub value: SignedLogValue,
    /// Summation-by-parts value.
    pub by_parts: SignedLogValue,
    pub crosscheck_rel_err: f64,
    /// `K(H) phi(H)`, the part of the result that depends on freezing the path.
    pub boundary_term: SignedLogValue,
    pub truncation_warning: bool,
    /// Trapezoidal pairing of the small-jump component, when supplied.
    pub small_component: Option<f64>,
}

impl Pairing {
    /// Large-jump value plus the small-jump contribution, if any.
    pub fn total(&self) -> SignedLogValue {
        self.value + SignedLogValue::encode(self.small_component.unwrap_or(0.0))
    }
}

pub fn pair_white_noise(path: &EventPath, phi: &TestFunction) -> Result<Pairing, SpacesError> {
    phi.validate()?;
    let events = path.events();
    let n = events.len();
    let jumps: Vec<SignedLogValue> = events.iter().map(|e| e.value()).collect();
    // phis[0] = phi(0), phis[j] = phi(t_j), phis[n + 1] = phi(inf) = 0
    let mut phis = Vec::with_capacity(n + 2);
    phis.push(phi.value(0.0));
    phis.extend(events.iter().map(|e| phi.value(e.t)));
    phis.push(0.0);

    let terms: Vec<SignedLogValue> = jumps.iter().zip(&phis[1..=n]).map(|(&dk, &f)| dk * f).collect();
    let by_parts = SignedLogValue::sum_slice(&terms);
    let scale = SignedLogValue::sum_slice(&terms.iter().map(|t| t.abs()).collect::<Vec<_>>());

    // Levels relative to the event where |phi| peaks, so the large common part
    // of the levels never multiplies the differences of phi.
    let value = if n == 0 {
        SignedLogValue::ZERO
    } else {
        let r = (1..=n)
            .max_by(|&i, &j| phis[i].abs().total_cmp(&phis[j].abs()))
            .unwrap_or(1);
        let mut rel = vec![SignedLogValue::ZERO; n + 1];
        for i in r + 1..=n {
            rel[i] = rel[i - 1] + jumps[i - 1];
        }
        for i in (0..r).rev() {
            rel[i] = rel[i + 1] - jumps[i];
        }
        let k_ref = SignedLogValue::sum_slice(&jumps[..r]);
        let mut parts: Vec<SignedLogValue> = (0..=n).map(|i| -(rel[i] * (phis[i + 1] - phis[i]))).collect();
        parts.push(k_ref * phis[0]);
        SignedLogValue::sum_slice(&parts)
    };

    let k_end = SignedLogValue::sum_slice(&jumps);
    let boundary_term = k_end * phi.value(path.horizon);
    let truncation_warning = !boundary_term.is_zero()
        && (scale.is_zero() || boundary_term.logmag() > scale.logmag() + TRUNCATION_TOLERANCE.ln());

    Ok(Pairing {
        value,
        by_parts,
        crosscheck_rel_err: value.relative_difference(by_parts),
        boundary_term,
        truncation_warning,
        small_component: None,
    })
}

/// Pairing of the full path: the large-jump part exactly, the small-jump grid
/// part by the trapezoidal rule on `-int v(t) phi'(t) dt` (frozen after the
/// last grid time).
pub fn pair_with_small(path: &EventPath, small: &GridPath, phi: &TestFunction) -> Result<Pairing, SpacesError> {
    if path.horizon != small.horizon || path.params.alpha() != small.params.alpha() {
        return Err(SpacesError::Mismatch(format!(
            "large (alpha {}, horizon {}) vs small (alpha {}, horizon {})",
            path.params.alpha(),
            path.horizon,
            small.params.alpha(),
            small.horizon
        )));
    }
    let mut out = pair_white_noise(path, phi)?;
    let g: Vec<f64> = small
        .times
        .iter()
        .zip(&small.values)
        .map(|(&t, &v)| v * phi.slope(t))
        .collect();
    let mut integral = 0.0;
    for k in 1..g.len() {
        integral += 0.5 * (g[k - 1] + g[k]) * (small.times[k] - small.times[k - 1]);
    }
    let tail = match (small.times.last(), small.values.last()) {
        (Some(&t), Some(&v)) => v * phi.value(t),
        _ => 0.0,
    };
    out.small_component = Some(tail - integral);
    Ok(out)
}
