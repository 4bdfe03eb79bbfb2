//! JSON-Lines persistence.
//!
//! A file holds one or more path blocks. Each block starts with a header
//! record carrying `format_version`; the following lines are the block's
//! records (`{"t","sign","log1p_mag"}` for large-jump events,
//! `{"t","value"}` for small-jump grid samples). Floats use 17 significant
//! digits, so reading a file back reproduces every bit.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{rng::RNG_NAME, EventPath, GridPath, JumpEvent, PathError};
use crate::json;
use crate::measure::KAlphaParams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathHeader {
    pub format_version: u32,
    pub alpha: f64,
    pub horizon: f64,
    pub seed: u64,
    pub rng_name: String,
    pub component: String,
    pub path_index: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct GridRecord {
    t: f64,
    value: f64,
}

fn line<W: Write, T: Serialize>(w: &mut W, v: &T) -> Result<(), PathError> {
    json::to_writer(&mut *w, v).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    Ok(())
}

pub fn write_jsonl<W: Write>(mut w: W, paths: &[EventPath]) -> Result<(), PathError> {
    for p in paths {
        let header = PathHeader {
            format_version: FORMAT_VERSION,
            alpha: p.params.alpha(),
            horizon: p.horizon,
            seed: p.seed,
            rng_name: RNG_NAME.to_string(),
            component: "large".into(),
            path_index: p.path_index,
            eps: None,
            grid_step: None,
        };
        line(&mut w, &header)?;
        for e in p.events() {
            line(&mut w, e)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_small_jsonl<W: Write>(mut w: W, paths: &[GridPath]) -> Result<(), PathError> {
    for g in paths {
        let header = PathHeader {
            format_version: FORMAT_VERSION,
            alpha: g.params.alpha(),
            horizon: g.horizon,
            seed: g.seed,
            rng_name: RNG_NAME.to_string(),
            component: "small".into(),
            path_index: g.path_index,
            eps: Some(g.eps),
            grid_step: Some(g.grid_step),
        };
        line(&mut w, &header)?;
        for (&t, &value) in g.times.iter().zip(&g.values) {
            line(&mut w, &GridRecord { t, value })?;
        }
    }
    w.flush()?;
    Ok(())
}

enum Block<T> {
    None,
    Open(PathHeader, Vec<T>),
}

fn read_blocks<R: BufRead, T: for<'de> Deserialize<'de>>(
    r: R,
    component: &str,
) -> Result<Vec<(PathHeader, Vec<T>)>, PathError> {
    let mut out = Vec::new();
    let mut cur: Block<T> = Block::None;
    for (i, raw) in r.lines().enumerate() {
        let lineno = i + 1;
        let raw = raw?;
        if raw.trim().is_empty() {
            continue;
        }
        let fmt_err = |msg: String| PathError::Format { line: lineno, msg };
        let v: Value = serde_json::from_str(&raw).map_err(|e| fmt_err(e.to_string()))?;
        if v.get("format_version").is_some() {
            let h: PathHeader = serde_json::from_value(v).map_err(|e| fmt_err(e.to_string()))?;
            if h.format_version != FORMAT_VERSION {
                return Err(fmt_err(format!("unsupported format_version {}", h.format_version)));
            }
            if h.component != component {
                return Err(fmt_err(format!(
                    "expected component {component:?}, found {:?}",
                    h.component
                )));
            }
            if let Block::Open(h0, recs) = std::mem::replace(&mut cur, Block::Open(h, Vec::new())) {
                out.push((h0, recs));
            }
        } else {
            match &mut cur {
                Block::None => return Err(fmt_err("record before any header".into())),
                Block::Open(_, recs) => recs.push(serde_json::from_value(v).map_err(|e| fmt_err(e.to_string()))?),
            }
        }
    }
    if let Block::Open(h, recs) = cur {
        out.push((h, recs));
    }
    Ok(out)
}

pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<EventPath>, PathError> {
    read_blocks::<_, JumpEvent>(r, "large")?
        .into_iter()
        .map(|(h, events)| {
            let params = KAlphaParams::new(h.alpha)?;
            EventPath::from_events(params, h.horizon, h.seed, h.path_index, events)
        })
        .collect()
}

pub fn read_small_jsonl<R: BufRead>(r: R) -> Result<Vec<GridPath>, PathError> {
    read_blocks::<_, GridRecord>(r, "small")?
        .into_iter()
        .map(|(h, recs)| {
            let params = KAlphaParams::new(h.alpha)?;
            Ok(GridPath {
                params,
                horizon: h.horizon,
                seed: h.seed,
                path_index: h.path_index,
                eps: h.eps.unwrap_or(f64::NAN),
                grid_step: h.grid_step.unwrap_or(f64::NAN),
                times: recs.iter().map(|r| r.t).collect(),
                values: recs.iter().map(|r| r.value).collect(),
            })
        })
        .collect()
}
