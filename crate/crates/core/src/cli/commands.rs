use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{ClassifyArgs, CliError, DiagnoseArgs, PairArgs, RunManifest, SimulateArgs, REPORT_FORMAT_VERSION};
use crate::diagnostics::{self, GrowthRow};
use crate::json;
use crate::measure::{classify_support, EnvelopeSpec, KAlphaParams};
use crate::numerics::SignedLogValue;
use crate::paths::{self, EventPath, GridPath};
use crate::spaces::{pair_white_noise, pair_with_small, TestFunction};

/// Every JSON document: version, kind, manifest, then the command's fields.
#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    format_version: u32,
    kind: &'a str,
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: T,
}

fn emit<T: Serialize>(kind: &str, manifest: &RunManifest, body: T, out: Option<&Path>) -> Result<(), CliError> {
    let doc = Document {
        format_version: REPORT_FORMAT_VERSION,
        kind,
        manifest,
        body,
    };
    match out {
        Some(path) => {
            let mut w = BufWriter::new(create(path)?);
            json::to_writer(&mut w, &doc)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        None => {
            let mut w = io::stdout().lock();
            json::to_writer(&mut w, &doc)?;
            w.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if workers <= 1 {
        return Ok(f());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(|pool| pool.install(f))
        .map_err(|e| CliError::Consistency(format!("worker pool: {e}")))
}

pub(super) fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let p = KAlphaParams::new(a.alpha)?;
    if a.paths == 0 {
        return Err(CliError::Usage("--paths must be at least 1".into()));
    }
    let large = paths::simulate_ensemble(&p, a.horizon, a.seed, a.paths, a.workers)?;
    let mut w = BufWriter::new(create(&a.out)?);
    paths::write_jsonl(&mut w, &large)?;

    let mut params = serde_json::to_value(a)?;
    let mut outputs = vec![a.out.display().to_string()];
    if a.small {
        let step = a.grid_step.unwrap_or(a.horizon / 1024.0);
        let small_out = a
            .small_out
            .clone()
            .unwrap_or_else(|| with_suffix(&a.out, ".small.jsonl"));
        let grid: Vec<GridPath> = in_pool(a.workers, || {
            (0..a.paths as u64)
                .into_par_iter()
                .map(|i| paths::simulate_small_indexed(&p, a.horizon, a.seed, i, a.eps, step))
                .collect::<Result<Vec<_>, _>>()
        })??;
        paths::write_small_jsonl(BufWriter::new(create(&small_out)?), &grid)?;
        params["grid_step"] = json!(step);
        params["small_out"] = json!(small_out.display().to_string());
        outputs.push(small_out.display().to_string());
    }

    let manifest = RunManifest::new("simulate", params, Some(a.seed));
    let sidecar = with_suffix(&a.out, ".manifest.json");
    emit("simulate", &manifest, json!({ "outputs": outputs }), Some(&sidecar))?;
    eprintln!(
        "wrote {} path(s), {} large jumps, to {}",
        large.len(),
        large.iter().map(EventPath::len).sum::<usize>(),
        a.out.display()
    );
    Ok(())
}

/// `key=v1,v2,...,other=w1,...`: a token containing `=` starts a new key and
/// the following bare tokens extend its list.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyLists(pub Vec<(String, Vec<f64>)>);

impl KeyLists {
    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_slice())
    }

    fn require(&self, key: &str, spec: &str) -> Result<&[f64], CliError> {
        self.get(key)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| CliError::Usage(format!("{spec:?} is missing values for {key}")))
    }

    fn only(&self, keys: &[&str], spec: &str) -> Result<(), CliError> {
        match self.0.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
            Some((k, _)) => Err(CliError::Usage(format!(
                "{spec:?}: unknown key {k:?} (expected {keys:?})"
            ))),
            None => Ok(()),
        }
    }
}

pub fn parse_key_lists(s: &str) -> Result<KeyLists, CliError> {
    let bad = |why: String| CliError::Usage(format!("cannot parse {s:?}: {why}"));
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let value = match tok.split_once('=') {
            Some((k, v)) => {
                let k = k.trim();
                if out.iter().any(|(x, _)| x == k) {
                    return Err(bad(format!("key {k:?} given twice")));
                }
                out.push((k.to_string(), Vec::new()));
                v.trim()
            }
            None if out.is_empty() => return Err(bad(format!("value {tok:?} before any key"))),
            None => tok,
        };
        if value.is_empty() {
            continue;
        }
        let x: f64 = value.parse().map_err(|_| bad(format!("{value:?} is not a number")))?;
        out.last_mut().expect("a key was pushed").1.push(x);
    }
    Ok(KeyLists(out))
}

fn read_paths(files: &[PathBuf]) -> Result<Vec<EventPath>, CliError> {
    let mut all = Vec::new();
    for f in files {
        all.extend(paths::read_jsonl(open(f)?)?);
    }
    Ok(all)
}

fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = String>) -> Result<(), CliError> {
    let mut w = BufWriter::new(create(path)?);
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Growth<'a> {
    eta: f64,
    rows: &'a [GrowthRow],
}

pub(super) fn diagnose(a: &DiagnoseArgs) -> Result<(), CliError> {
    let exceed = !a.inputs.is_empty() || a.envelope.is_some();
    let modes = usize::from(exceed) + usize::from(a.moment_scan.is_some()) + usize::from(a.pruitt.is_some());
    if modes != 1 {
        return Err(CliError::Usage(
            "choose exactly one of --in/--envelope, --moment-scan or --pruitt".into(),
        ));
    }
    let params = serde_json::to_value(a)?;
    let out = a.json.as_deref();

    if exceed {
        let desc = a
            .envelope
            .as_deref()
            .ok_or_else(|| CliError::Usage("--envelope is required with --in".into()))?;
        if a.inputs.is_empty() {
            return Err(CliError::Usage("--in is required with --envelope".into()));
        }
        let env: EnvelopeSpec = desc.parse()?;
        let paths = read_paths(&a.inputs)?;
        let report = diagnostics::exceedance_report(&paths, &env, a.burn_in)?;
        let growth = a
            .growth_eta
            .map(|eta| diagnostics::growth_scan(&paths, eta))
            .transpose()?;
        let seed = paths
            .first()
            .map(|p| p.seed)
            .filter(|&s| paths.iter().all(|p| p.seed == s));
        let manifest = RunManifest::new("diagnose", params, seed);
        if let Some(csv) = &a.plot_data {
            match &growth {
                Some(rows) => write_csv(
                    csv,
                    "t,ln_statistic",
                    rows.iter()
                        .map(|r| format!("{:.16e},{:.16e}", r.t, r.statistic.logmag())),
                )?,
                None => write_csv(
                    csv,
                    "path_index,last_exceedance",
                    report.per_path.iter().map(|pe| {
                        format!(
                            "{},{}",
                            pe.path_index,
                            pe.last_exceedance.map_or(String::new(), |t| format!("{t:.16e}"))
                        )
                    }),
                )?,
            }
        }
        let body = json!({
            "envelope_descriptor": env.to_string(),
            "envelope": report.envelope,
            "per_path": report.per_path,
            "aggregate": report.aggregate,
            "growth": growth.as_deref().zip(a.growth_eta).map(|(rows, eta)| Growth { eta, rows }),
        });
        return emit("exceedance", &manifest, body, out);
    }

    let alpha = a
        .alpha
        .ok_or_else(|| CliError::Usage("--alpha is required for --moment-scan and --pruitt".into()))?;
    let p = KAlphaParams::new(alpha)?;
    let manifest = RunManifest::new("diagnose", params, None);

    if let Some(spec) = &a.moment_scan {
        let kl = parse_key_lists(spec)?;
        kl.only(&["eta", "caps"], spec)?;
        let eta = match kl.require("eta", spec)? {
            [e] => *e,
            _ => return Err(CliError::Usage(format!("{spec:?}: eta takes one value"))),
        };
        let scan = diagnostics::moment_scan(&p, eta, kl.require("caps", spec)?)?;
        if let Some(csv) = &a.plot_data {
            write_csv(
                csv,
                "cap,value,ratio",
                scan.rows.iter().map(|r| {
                    format!(
                        "{:.16e},{:.16e},{}",
                        r.cap,
                        r.value,
                        r.ratio.map_or(String::new(), |x| format!("{x:.16e}"))
                    )
                }),
            )?;
        }
        return emit("moment_scan", &manifest, &scan, out);
    }

    let spec = a.pruitt.as_deref().expect("one mode is selected");
    let kl = parse_key_lists(spec)?;
    kl.only(&["etas", "rs"], spec)?;
    let report = diagnostics::pruitt_slope(&p, kl.require("etas", spec)?, kl.require("rs", spec)?)?;
    if let Some(csv) = &a.plot_data {
        let rows = report.series.iter().flat_map(|s| {
            s.r.iter()
                .zip(&s.values)
                .map(move |(r, v)| format!("{:.16e},{r:.16e},{v:.16e}", s.eta))
        });
        write_csv(csv, "eta,r,value", rows)?;
    }
    emit("pruitt", &manifest, &report, out)
}

pub(super) fn classify(a: &ClassifyArgs) -> Result<(), CliError> {
    let p = KAlphaParams::new(a.alpha)?;
    let verdict = classify_support(&p, &a.betas)?;
    let manifest = RunManifest::new("classify", serde_json::to_value(a)?, None);
    if let Some(path) = &a.json {
        emit("classify", &manifest, &verdict, Some(path))?;
    }
    emit("classify", &manifest, &verdict, None)
}

fn slv_parts(v: SignedLogValue) -> (i8, f64) {
    (v.sign(), v.logmag())
}

pub(super) fn pair(a: &PairArgs) -> Result<(), CliError> {
    let phi: TestFunction = a.phi.parse()?;
    let all = paths::read_jsonl(open(&a.input)?)?;
    let path = all
        .iter()
        .find(|p| p.path_index == a.path_index)
        .ok_or_else(|| CliError::Domain(format!("{} has no path with index {}", a.input.display(), a.path_index)))?;
    let result = match &a.small_in {
        Some(f) => {
            let small = paths::read_small_jsonl(open(f)?)?;
            let g = small
                .iter()
                .find(|g| g.path_index == a.path_index)
                .ok_or_else(|| CliError::Domain(format!("{} has no path with index {}", f.display(), a.path_index)))?;
            pair_with_small(path, g, &phi)?
        }
        None => pair_white_noise(path, &phi)?,
    };
    let (value_sign, value_logmag) = slv_parts(result.value);
    let (by_parts_sign, by_parts_logmag) = slv_parts(result.by_parts);
    let (total_sign, total_logmag) = slv_parts(result.total());
    let body = json!({
        "phi": phi.to_string(),
        "path_index": path.path_index,
        "n_events": path.len(),
        "value_sign": value_sign,
        "value_logmag": value_logmag,
        "by_parts_sign": by_parts_sign,
        "by_parts_logmag": by_parts_logmag,
        "crosscheck_rel_err": result.crosscheck_rel_err,
        "boundary_logmag": result.boundary_term.logmag(),
        "truncation_warning": result.truncation_warning,
        "small_component": result.small_component,
        "total_sign": total_sign,
        "total_logmag": total_logmag,
    });
    let manifest = RunManifest::new("pair", serde_json::to_value(a)?, Some(path.seed));
    emit("pair", &manifest, body, a.json.as_deref())
}
