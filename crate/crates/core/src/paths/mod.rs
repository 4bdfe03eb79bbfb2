//! Levy-Ito synthesis of K_alpha sample paths.
//!
//! The process splits into a compound Poisson part carrying the jumps with
//! `|x| > 1` and a martingale carrying the jumps with `|x| <= 1`. The large
//! jumps are kept as an exact event list with magnitudes stored as
//! `ln(1 + |x|)`; the small-jump martingale is sampled on a time grid.

pub mod io;
pub mod rng;

use std::f64::consts::LN_2;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{self, KAlphaParams, MeasureError};
use crate::numerics::SignedLogValue;
use rng::Component;

pub use io::{read_jsonl, read_small_jsonl, write_jsonl, write_small_jsonl, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("horizon = {0} must be finite and > 0")]
    Horizon(f64),
    #[error("eps = {0} must lie in (0, 1)")]
    Eps(f64),
    #[error("grid_step = {0} must be finite and > 0")]
    GridStep(f64),
    #[error("components do not match: {0}")]
    Mismatch(String),
    #[error("invalid path: {0}")]
    Invalid(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed path file at line {line}: {msg}")]
    Format { line: usize, msg: String },
}

/// One large jump: time, sign and `ln(1 + |jump|) >= ln 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub t: f64,
    pub sign: i8,
    pub log1p_mag: f64,
}

impl JumpEvent {
    pub fn value(&self) -> SignedLogValue {
        SignedLogValue::from_log1p(self.sign, self.log1p_mag)
    }
}

/// The compound Poisson (large-jump) component on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventPath {
    pub params: KAlphaParams,
    pub horizon: f64,
    pub seed: u64,
    pub path_index: u64,
    events: Vec<JumpEvent>,
}

impl EventPath {
    /// Builds a path from an explicit event list, checking ordering, range and
    /// the `ln 2` floor on magnitudes.
    pub fn from_events(
        params: KAlphaParams,
        horizon: f64,
        seed: u64,
        path_index: u64,
        events: Vec<JumpEvent>,
    ) -> Result<Self, PathError> {
        check_horizon(horizon)?;
        let mut prev = f64::NEG_INFINITY;
        for (i, e) in events.iter().enumerate() {
            if !(e.t >= 0.0 && e.t <= horizon) {
                return Err(PathError::Invalid(format!(
                    "event {i} at t = {} outside [0, {horizon}]",
                    e.t
                )));
            }
            if e.t <= prev {
                return Err(PathError::Invalid(format!(
                    "event {i} at t = {} is not after t = {prev}",
                    e.t
                )));
            }
            if e.sign != 1 && e.sign != -1 {
                return Err(PathError::Invalid(format!("event {i} has sign {}", e.sign)));
            }
            if !(e.log1p_mag >= LN_2) || !e.log1p_mag.is_finite() {
                return Err(PathError::Invalid(format!(
                    "event {i} has log1p_mag {} < ln 2",
                    e.log1p_mag
                )));
            }
            prev = e.t;
        }
        Ok(Self {
            params,
            horizon,
            seed,
            path_index,
            events,
        })
    }

    pub fn events(&self) -> &[JumpEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Path level after each event (`levels()[i]` holds on `[t_i, t_{i+1})`).
    pub fn levels(&self) -> Vec<SignedLogValue> {
        let mut acc = SignedLogValue::ZERO;
        self.events
            .iter()
            .map(|e| {
                acc = acc + e.value();
                acc
            })
            .collect()
    }

    /// `L(t)`: the sum of all jumps with event time `<= t`.
    pub fn value_at(&self, t: f64) -> SignedLogValue {
        self.events.iter().take_while(|e| e.t <= t).map(|e| e.value()).sum()
    }

    /// The same path restricted to `[0, horizon]`.
    pub fn truncated(&self, horizon: f64) -> Result<Self, PathError> {
        check_horizon(horizon)?;
        let events = self.events.iter().take_while(|e| e.t <= horizon).copied().collect();
        Ok(Self {
            events,
            horizon,
            ..*self
        })
    }
}

/// Small-jump component sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub params: KAlphaParams,
    pub horizon: f64,
    pub seed: u64,
    pub path_index: u64,
    pub eps: f64,
    pub grid_step: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_horizon(horizon: f64) -> Result<(), PathError> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(PathError::Horizon(horizon))
    }
}

fn next_after(t: f64) -> f64 {
    f64::from_bits(t.to_bits() + 1)
}

/// Poisson event times with the given rate on `[0, horizon]`, strictly increasing.
fn poisson_times<R: RngCore>(rng: &mut R, rate: f64, horizon: f64, mut mark: impl FnMut(&mut R, f64)) {
    if rate <= 0.0 {
        return;
    }
    let mut t = 0.0_f64;
    loop {
        let gap = -rng::open_unit(rng).ln() / rate;
        let mut next = t + gap;
        if next <= t {
            next = next_after(t);
        }
        if next > horizon {
            break;
        }
        t = next;
        mark(rng, t);
    }
}

/// Simulates the large-jump component. Equivalent to path 0 of an ensemble.
pub fn simulate_large(p: &KAlphaParams, horizon: f64, seed: u64) -> Result<EventPath, PathError> {
    simulate_large_indexed(p, horizon, seed, 0)
}

/// Jumps arrive at rate `trunc_mass`; each carries an independent fair sign and
/// `ln(1 + |x|)` drawn by inverting the survival `(ln 2 / l)^alpha`.
///
/// Gaps, magnitudes and signs are drawn in a fixed interleaved order from one
/// stream, so a path on a longer horizon extends the shorter one event for event.
pub fn simulate_large_indexed(
    p: &KAlphaParams,
    horizon: f64,
    seed: u64,
    path_index: u64,
) -> Result<EventPath, PathError> {
    check_horizon(horizon)?;
    let mut r = rng::stream(seed, path_index, Component::Large);
    let mut events = Vec::with_capacity((p.trunc_mass() * horizon * 1.2) as usize + 4);
    let mut bad = None;
    poisson_times(&mut r, p.trunc_mass(), horizon, |r, t| {
        let u = rng::open_unit(r);
        let sign = rng::sign(r);
        match measure::inverse_tail(u, p) {
            Ok(l) => events.push(JumpEvent { t, sign, log1p_mag: l }),
            Err(e) => bad = Some(e),
        }
    });
    if let Some(e) = bad {
        return Err(e.into());
    }
    Ok(EventPath {
        params: *p,
        horizon,
        seed,
        path_index,
        events,
    })
}

/// `n` independent large-jump paths (indices `0..n`) generated on `workers`
/// threads. The result is identical for any worker count.
pub fn simulate_ensemble(
    p: &KAlphaParams,
    horizon: f64,
    seed: u64,
    n: usize,
    workers: usize,
) -> Result<Vec<EventPath>, PathError> {
    check_horizon(horizon)?;
    let run = || {
        (0..n as u64)
            .into_par_iter()
            .map(|i| simulate_large_indexed(p, horizon, seed, i))
            .collect::<Result<Vec<_>, _>>()
    };
    if workers <= 1 {
        return (0..n as u64)
            .map(|i| simulate_large_indexed(p, horizon, seed, i))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| PathError::Pool(e.to_string()))?;
    pool.install(run)
}

/// Grid times `0, step, 2 step, ...` ending exactly at `horizon`.
pub fn grid_times(horizon: f64, grid_step: f64) -> Vec<f64> {
    let n = (horizon / grid_step).ceil().max(1.0) as usize;
    let mut times: Vec<f64> = (0..n).map(|i| i as f64 * grid_step).collect();
    times.push(horizon);
    times
}

/// Simulates the small-jump martingale: jumps with magnitude in `(eps, 1]`
/// exactly, the rest by a Brownian motion of matching variance rate.
/// The measure is symmetric, so no compensating drift is needed.
pub fn simulate_small(
    p: &KAlphaParams,
    horizon: f64,
    seed: u64,
    eps: f64,
    grid_step: f64,
) -> Result<GridPath, PathError> {
    simulate_small_indexed(p, horizon, seed, 0, eps, grid_step)
}

pub fn simulate_small_indexed(
    p: &KAlphaParams,
    horizon: f64,
    seed: u64,
    path_index: u64,
    eps: f64,
    grid_step: f64,
) -> Result<GridPath, PathError> {
    check_horizon(horizon)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(PathError::Eps(eps));
    }
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(PathError::GridStep(grid_step));
    }
    let a = p.alpha();
    let rate = measure::band_rate(eps, p)?;
    let sigma2 = measure::small_jump_variance(eps, p)?;
    let lo_pow = eps.ln_1p().powf(-a);
    let hi_pow = LN_2.powf(-a);

    let mut r = rng::stream(seed, path_index, Component::Small);
    let mut band: Vec<(f64, f64)> = Vec::new();
    poisson_times(&mut r, rate, horizon, |r, t| {
        // ln(1+|x|) conditioned on (ln(1+eps), ln 2]
        let v = rng::open_unit(r);
        let l = (hi_pow + v * (lo_pow - hi_pow)).powf(-1.0 / a);
        let x = l.exp_m1();
        band.push((t, f64::from(rng::sign(r)) * x));
    });

    let times = grid_times(horizon, grid_step);
    let mut values = Vec::with_capacity(times.len());
    values.push(0.0);
    let mut next_jump = 0;
    let mut level = 0.0;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        while next_jump < band.len() && band[next_jump].0 <= t1 {
            level += band[next_jump].1;
            next_jump += 1;
        }
        let z: f64 = StandardNormal.sample(&mut r);
        level += (sigma2 * (t1 - t0)).sqrt() * z;
        values.push(level);
    }
    Ok(GridPath {
        params: *p,
        horizon,
        seed,
        path_index,
        eps,
        grid_step,
        times,
        values,
    })
}

/// Running supremum of `|L|` as a step function: `(t, level)` pairs at which
/// the supremum changes, starting with `(0, 0)`.
pub fn sup_process(path: &EventPath) -> Vec<(f64, SignedLogValue)> {
    let mut out = vec![(0.0, SignedLogValue::ZERO)];
    let mut best = SignedLogValue::ZERO;
    let mut level = SignedLogValue::ZERO;
    for e in path.events() {
        level = level + e.value();
        let m = level.abs();
        if m.cmp_abs(best).is_gt() {
            best = m;
            out.push((e.t, best));
        }
    }
    out
}

/// `K = L^M + L^P` sampled on the small component's grid.
pub fn compose(large: &EventPath, small: &GridPath) -> Result<Vec<(f64, SignedLogValue)>, PathError> {
    if large.horizon != small.horizon {
        return Err(PathError::Mismatch(format!(
            "horizons {} and {}",
            large.horizon, small.horizon
        )));
    }
    if large.params.alpha() != small.params.alpha() {
        return Err(PathError::Mismatch(format!(
            "alpha {} and {}",
            large.params.alpha(),
            small.params.alpha()
        )));
    }
    let events = large.events();
    let mut idx = 0;
    let mut level = SignedLogValue::ZERO;
    Ok(small
        .times
        .iter()
        .zip(&small.values)
        .map(|(&t, &v)| {
            while idx < events.len() && events[idx].t <= t {
                level = level + events[idx].value();
                idx += 1;
            }
            (t, level + SignedLogValue::encode(v))
        })
        .collect())
}
