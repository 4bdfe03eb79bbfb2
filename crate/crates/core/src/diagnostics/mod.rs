//! Finite-horizon statistics on simulated paths and on the measure: envelope
//! exceedances of the running supremum, the dyadic growth statistic, the
//! truncated-moment scan and the Pruitt slope report.
//!
//! Everything that touches path magnitudes works on `ln |L|`; no jump size is
//! ever decoded to a native float.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::measure::{self, EnvelopeSpec, KAlphaParams, MeasureError};
use crate::numerics::SignedLogValue;
use crate::paths::{sup_process, EventPath};

/// Envelope comparisons start here, the lower limit of the upper-function integral.
pub const COMPARISON_START: f64 = 1.0;
pub const DEFAULT_BURN_IN: f64 = 10.0;
pub const QUANTILE_LEVELS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Envelope(#[from] measure::EnvelopeError),
    #[error("{0}")]
    Domain(String),
    #[error("paths do not share parameters: {0}")]
    Mismatch(String),
}

/// Half-open time interval `[t_start, t_end)` on which `L* > f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub t_start: f64,
    pub t_end: f64,
}

/// Exact exceedance intervals of the running supremum over `env`.
///
/// `L*` is constant between its change points, so on a constancy stretch at
/// level `M` the exceedance runs from the stretch start (or `t = 1`) until the
/// envelope reaches `M`, which is `f^-1(M)` taken from `ln M`.
pub fn envelope_crossings(path: &EventPath, env: &EnvelopeSpec) -> Vec<Interval> {
    let sup = sup_process(path);
    let mut out: Vec<Interval> = Vec::new();
    for (i, &(t0, level)) in sup.iter().enumerate() {
        if level.is_zero() {
            continue;
        }
        let next = sup.get(i + 1).map_or(path.horizon, |&(t, _)| t);
        let start = t0.max(COMPARISON_START);
        let end = env.inverse_ln(level.logmag()).min(next).min(path.horizon);
        if !(end > start) {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.t_end >= start => last.t_end = last.t_end.max(end),
            _ => out.push(Interval {
                t_start: start,
                t_end: end,
            }),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathExceedance {
    pub path_index: u64,
    pub seed: u64,
    pub horizon: f64,
    pub intervals: Vec<Interval>,
    /// End of the last interval; equals the horizon when still exceeding there.
    pub last_exceedance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quantile {
    pub q: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceedanceAggregate {
    pub n_paths: usize,
    pub burn_in: f64,
    /// Share of paths exceeding the envelope at some time after the burn-in.
    pub exceedance_fraction: f64,
    /// Quantiles (type 7) of the last exceedance time over paths that exceed at all.
    pub last_exceedance_quantiles: Vec<Quantile>,
    /// Share of paths whose last exceedance falls in `(horizon / 2, horizon]`.
    pub final_half_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExceedanceReport {
    pub envelope: EnvelopeSpec,
    pub per_path: Vec<PathExceedance>,
    pub aggregate: ExceedanceAggregate,
}

/// Type-7 sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

pub fn exceedance_report(
    paths: &[EventPath],
    env: &EnvelopeSpec,
    burn_in: f64,
) -> Result<ExceedanceReport, DiagnosticsError> {
    env.validate()?;
    if !(burn_in >= 0.0) || !burn_in.is_finite() {
        return Err(DiagnosticsError::Domain(format!(
            "burn_in = {burn_in} must be finite and >= 0"
        )));
    }
    let per_path: Vec<PathExceedance> = paths
        .par_iter()
        .map(|p| {
            let intervals = envelope_crossings(p, env);
            PathExceedance {
                path_index: p.path_index,
                seed: p.seed,
                horizon: p.horizon,
                last_exceedance: intervals.last().map(|iv| iv.t_end),
                intervals,
            }
        })
        .collect();

    let n = per_path.len();
    let share = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let after_burn_in = per_path
        .iter()
        .filter(|pe| pe.last_exceedance.is_some_and(|t| t > burn_in))
        .count();
    let final_half = per_path
        .iter()
        .filter(|pe| pe.last_exceedance.is_some_and(|t| t > 0.5 * pe.horizon))
        .count();
    let mut last: Vec<f64> = per_path.iter().filter_map(|pe| pe.last_exceedance).collect();
    last.sort_by(f64::total_cmp);
    let last_exceedance_quantiles = QUANTILE_LEVELS
        .iter()
        .filter_map(|&q| quantile_sorted(&last, q).map(|t| Quantile { q, t }))
        .collect();

    Ok(ExceedanceReport {
        envelope: *env,
        per_path,
        aggregate: ExceedanceAggregate {
            n_paths: n,
            burn_in,
            exceedance_fraction: share(after_burn_in),
            last_exceedance_quantiles,
            final_half_fraction: share(final_half),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRow {
    pub t: f64,
    /// `max over paths of t^(-1/eta) L*(t)`.
    pub statistic: SignedLogValue,
}

fn sup_at(sup: &[(f64, SignedLogValue)], t: f64) -> SignedLogValue {
    let k = sup.partition_point(|&(s, _)| s <= t);
    if k == 0 {
        SignedLogValue::ZERO
    } else {
        sup[k - 1].1
    }
}

fn check_shared(paths: &[EventPath]) -> Result<(), DiagnosticsError> {
    if let Some(first) = paths.first() {
        let a = first.params.alpha();
        if let Some(p) = paths.iter().find(|p| p.params.alpha() != a) {
            return Err(DiagnosticsError::Mismatch(format!(
                "alpha {a} on path {} and {} on path {}",
                first.path_index,
                p.params.alpha(),
                p.path_index
            )));
        }
    }
    Ok(())
}

/// The ensemble statistic `max_paths t^(-1/eta) L*(t)` at `t = 2^k`, for every
/// `2^k` (`k >= 0`) not beyond the shortest horizon.
pub fn growth_scan(paths: &[EventPath], eta: f64) -> Result<Vec<GrowthRow>, DiagnosticsError> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(DiagnosticsError::Domain(format!("eta = {eta} must be finite and > 0")));
    }
    check_shared(paths)?;
    let horizon = paths.iter().map(|p| p.horizon).fold(f64::INFINITY, f64::min);
    let horizon = if horizon.is_finite() { horizon } else { 1.0 };
    let sups: Vec<_> = paths.par_iter().map(sup_process).collect();
    let mut rows = Vec::new();
    let mut t = 1.0_f64;
    while t <= horizon {
        let best = sups
            .iter()
            .map(|s| sup_at(s, t))
            .max_by(|a, b| a.cmp_abs(*b))
            .unwrap_or(SignedLogValue::ZERO);
        rows.push(GrowthRow {
            t,
            statistic: best.scale_ln(-t.ln() / eta),
        });
        t *= 2.0;
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentVerdict {
    Divergent,
    InsufficientEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRow {
    pub cap: f64,
    pub value: f64,
    /// `value / previous value`, absent on the first row.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentScan {
    pub alpha: f64,
    pub eta: f64,
    pub rows: Vec<MomentRow>,
    pub values_increasing: bool,
    pub ratios_increasing: bool,
    pub verdict: MomentVerdict,
}

impl MomentScan {
    pub fn divergence_flag(&self) -> bool {
        self.verdict == MomentVerdict::Divergent
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

/// Truncated moments over increasing caps with their successive ratios.
/// Divergence is flagged only when there are at least two ratios and they
/// strictly increase; anything less is reported as insufficient evidence.
pub fn moment_scan(p: &KAlphaParams, eta: f64, caps: &[f64]) -> Result<MomentScan, DiagnosticsError> {
    if let Some(&c) = caps.iter().find(|&&c| !(c > 1.0) || !c.is_finite()) {
        return Err(DiagnosticsError::Domain(format!("cap = {c} must be finite and > 1")));
    }
    if !strictly_increasing(caps) {
        return Err(DiagnosticsError::Domain("caps must be strictly increasing".into()));
    }
    let values = caps
        .iter()
        .map(|&c| measure::trunc_moment(eta, c, p))
        .collect::<Result<Vec<_>, _>>()?;
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let rows = caps
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(i, (&cap, &value))| MomentRow {
            cap,
            value,
            ratio: i.checked_sub(1).map(|j| ratios[j]),
        })
        .collect();
    let values_increasing = strictly_increasing(&values);
    let ratios_increasing = ratios.len() >= 2 && strictly_increasing(&ratios);
    let verdict = if values_increasing && ratios_increasing {
        MomentVerdict::Divergent
    } else {
        MomentVerdict::InsufficientEvidence
    };
    Ok(MomentScan {
        alpha: p.alpha(),
        eta,
        rows,
        values_increasing,
        ratios_increasing,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruittSeries {
    pub eta: f64,
    pub r: Vec<f64>,
    /// `r^eta h(r)` along the grid.
    pub values: Vec<f64>,
    pub monotone_increasing: bool,
    /// The last step of the grid is an increase.
    pub ultimately_increasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PruittReport {
    pub alpha: f64,
    pub series: Vec<PruittSeries>,
    /// Largest `eta` whose sequence still decreases at the grid end, else 0.
    pub index_estimate: f64,
}

pub fn pruitt_slope(p: &KAlphaParams, etas: &[f64], r_grid: &[f64]) -> Result<PruittReport, DiagnosticsError> {
    if let Some(&r) = r_grid.iter().find(|&&r| !(r >= 1.0) || !r.is_finite()) {
        return Err(DiagnosticsError::Domain(format!("r = {r} must be finite and >= 1")));
    }
    if !strictly_increasing(r_grid) {
        return Err(DiagnosticsError::Domain("r grid must be strictly increasing".into()));
    }
    if let Some(&e) = etas.iter().find(|&&e| !(e > 0.0) || !e.is_finite()) {
        return Err(DiagnosticsError::Domain(format!("eta = {e} must be finite and > 0")));
    }
    let hbar = r_grid
        .iter()
        .map(|&r| measure::pruitt_hbar(r, p))
        .collect::<Result<Vec<_>, _>>()?;
    let series: Vec<PruittSeries> = etas
        .iter()
        .map(|&eta| {
            let values: Vec<f64> = r_grid.iter().zip(&hbar).map(|(&r, &h)| r.powf(eta) * h).collect();
            let n = values.len();
            PruittSeries {
                eta,
                r: r_grid.to_vec(),
                monotone_increasing: n >= 2 && strictly_increasing(&values),
                ultimately_increasing: n >= 2 && values[n - 1] > values[n - 2],
                values,
            }
        })
        .collect();
    let index_estimate = series
        .iter()
        .filter(|s| s.values.len() >= 2 && !s.ultimately_increasing)
        .map(|s| s.eta)
        .fold(0.0, f64::max);
    Ok(PruittReport {
        alpha: p.alpha(),
        series,
        index_estimate,
    })
}
