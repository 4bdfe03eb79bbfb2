//! Acceptance checks. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits nonzero if any fail.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kalpha::diagnostics::{exceedance_report, moment_scan, pruitt_slope, DEFAULT_BURN_IN};
use kalpha::measure::{self, upper_function_integral, Convergence, EnvelopeSpec, KAlphaParams};
use kalpha::numerics::quad_u;
use kalpha::paths::{simulate_ensemble, simulate_large_indexed, EventPath, JumpEvent};
use kalpha::spaces::{pair_white_noise, TestFunction};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

const ALPHAS: [f64; 3] = [0.5, 1.0, 1.5];
const REGRESSION_SEED: u64 = 20261016;
const POWER_EXCEEDANCE: [f64; 3] = [0.0, 1.0, 1.0];
const EXP_FINAL_HALF: [f64; 3] = [0.655, 0.24, 0.07];

type Outcome = Result<String, String>;

fn params(a: f64) -> KAlphaParams {
    KAlphaParams::new(a).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tail_vs_quadrature() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in ALPHAS {
        for r in [1.0f64, 10.0, 1e3, 1e6] {
            let q = quad_u(|u| u.powf(-(1.0 + a)), r.ln_1p(), f64::INFINITY, 1e-12)
                .map_err(|e| e.to_string())?
                .finite()
                .ok_or("quadrature reported divergence")?
                .value;
            let closed = measure::tail_one_sided(r, &params(a)).map_err(|e| e.to_string())?;
            worst = worst.max(((q - closed) / closed).abs());
        }
    }
    ensure(worst < 1e-8, || format!("max rel err {worst:.3e}"))?;
    Ok(format!("max rel err {worst:.3e}"))
}

fn ks_statistic(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn poisson_chi_square_p(counts: &[usize], mean: f64) -> f64 {
    let n = counts.len() as f64;
    let pois = Poisson::new(mean).unwrap();
    let mut lo = 0;
    while n * pois.cdf(lo) < 5.0 {
        lo += 1;
    }
    let mut hi = (*counts.iter().max().unwrap() as u64).max(lo + 1);
    while hi > lo + 1 && n * (1.0 - pois.cdf(hi - 1)) < 5.0 {
        hi -= 1;
    }
    let mut obs = vec![counts.iter().filter(|&&c| c as u64 <= lo).count() as f64];
    let mut exp = vec![n * pois.cdf(lo)];
    for k in lo + 1..hi {
        obs.push(counts.iter().filter(|&&c| c as u64 == k).count() as f64);
        exp.push(n * pois.pmf(k));
    }
    obs.push(counts.iter().filter(|&&c| c as u64 >= hi).count() as f64);
    exp.push(n * (1.0 - pois.cdf(hi - 1)));
    let stat: f64 = obs.iter().zip(&exp).map(|(o, e)| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((obs.len() - 1) as f64).unwrap().cdf(stat)
}

fn sampler_law() -> Outcome {
    let mut worst_ks: f64 = 0.0;
    let mut worst_p: f64 = 1.0;
    for (k, a) in ALPHAS.into_iter().enumerate() {
        let p = params(a);
        let n = 100_000;
        let path = simulate_large_indexed(&p, 1.1 * n as f64 / p.trunc_mass(), 1000 + k as u64, 0)
            .map_err(|e| e.to_string())?;
        ensure(path.len() >= n, || format!("alpha {a}: only {} events", path.len()))?;
        let sample = path.events()[..n].iter().map(|e| e.log1p_mag).collect();
        let d = ks_statistic(sample, |l| 1.0 - measure::survival_log1p(l, &p));
        worst_ks = worst_ks.max(d);

        let counts: Vec<usize> = simulate_ensemble(&p, 2.0, 7, 4000, 4)
            .map_err(|e| e.to_string())?
            .iter()
            .map(EventPath::len)
            .collect();
        worst_p = worst_p.min(poisson_chi_square_p(&counts, 2.0 * p.trunc_mass()));
    }
    let detail = format!("max KS {worst_ks:.4}, min chi-square p {worst_p:.4}");
    ensure(worst_ks < 0.01 && worst_p > 1e-3, || detail.clone())?;
    Ok(detail)
}

fn moment_divergence() -> Outcome {
    let caps: Vec<f64> = (1..=5).map(|k| 10f64.powi(k)).collect();
    let scan = moment_scan(&params(1.5), 0.25, &caps).map_err(|e| e.to_string())?;
    let ratios: Vec<String> = scan
        .rows
        .iter()
        .filter_map(|r| r.ratio)
        .map(|r| format!("{r:.6}"))
        .collect();
    let detail = format!("ratios [{}], flag {}", ratios.join(", "), scan.divergence_flag());
    ensure(scan.ratios_increasing && scan.divergence_flag(), || detail.clone())?;
    Ok(detail)
}

fn pruitt_signature() -> Outcome {
    let grid: Vec<f64> = (1..=8).map(|k| 10f64.powi(k)).collect();
    let etas = [0.05, 0.1, 0.5];
    let mut failures = Vec::new();
    let mut estimates = Vec::new();
    for a in ALPHAS {
        let rep = pruitt_slope(&params(a), &etas, &grid).map_err(|e| e.to_string())?;
        for s in rep.series.iter().filter(|s| !s.monotone_increasing) {
            failures.push(format!("alpha {a} eta {}", s.eta));
        }
        estimates.push(rep.index_estimate);
        if rep.index_estimate != 0.0 {
            failures.push(format!("alpha {a} estimate {}", rep.index_estimate));
        }
    }
    let detail = format!("estimates {estimates:?}");
    ensure(failures.is_empty(), || {
        format!("{detail}; not increasing: {}", failures.join(", "))
    })?;
    Ok(detail)
}

fn classification_table(bin: &Path) -> Outcome {
    let cells = [
        (EnvelopeSpec::power(2.0).unwrap(), 0.5, Convergence::Divergent),
        (EnvelopeSpec::power(2.0).unwrap(), 1.0, Convergence::Divergent),
        (EnvelopeSpec::power(2.0).unwrap(), 1.5, Convergence::Divergent),
        (EnvelopeSpec::power(5.0).unwrap(), 0.8, Convergence::Divergent),
        (EnvelopeSpec::exponential(1.0).unwrap(), 1.5, Convergence::Convergent),
        (EnvelopeSpec::exponential(1.0).unwrap(), 0.8, Convergence::Divergent),
        (
            EnvelopeSpec::power_exponential(1.0, 2.0).unwrap(),
            0.8,
            Convergence::Convergent,
        ),
    ];
    for (f, a, want) in cells {
        let o = upper_function_integral(&f, &params(a)).map_err(|e| format!("{f} alpha {a}: {e}"))?;
        ensure(o.status == want, || format!("{f} alpha {a}: {:?}", o.status))?;
    }
    for a in ["0.8", "1.5"] {
        let out = Command::new(bin)
            .args(["classify", "--alpha", a, "--betas", "2"])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.code() == Some(0), || {
            format!("classify --alpha {a} exited {:?}", out.status.code())
        })?;
    }
    Ok("7 cells agree, classify exits 0".into())
}

fn envelope_behavior() -> Outcome {
    let p = params(1.5);
    let long = simulate_ensemble(&p, 1e3, REGRESSION_SEED, 200, 4).map_err(|e| e.to_string())?;
    let (mut power, mut expo) = (Vec::new(), Vec::new());
    for h in [10.0, 100.0, 1000.0] {
        let paths: Vec<EventPath> = long.iter().map(|q| q.truncated(h).unwrap()).collect();
        let r = exceedance_report(&paths, &EnvelopeSpec::power(2.0).unwrap(), DEFAULT_BURN_IN)
            .map_err(|e| e.to_string())?;
        power.push(r.aggregate.exceedance_fraction);
        let r = exceedance_report(&paths, &EnvelopeSpec::exponential(1.0).unwrap(), DEFAULT_BURN_IN)
            .map_err(|e| e.to_string())?;
        expo.push(r.aggregate.final_half_fraction);
    }
    let detail = format!("power {power:?}, exponential final-half {expo:?}");
    ensure(power.windows(2).all(|w| w[1] >= w[0]), || {
        format!("power not nondecreasing: {detail}")
    })?;
    ensure(expo.windows(2).all(|w| w[1] <= w[0]), || {
        format!("exponential not nonincreasing: {detail}")
    })?;
    ensure(power == POWER_EXCEEDANCE && expo == EXP_FINAL_HALF, || {
        format!("regression mismatch: {detail}")
    })?;
    Ok(detail)
}

fn pairing_keystone() -> Outcome {
    let p = params(1.2);
    let phis = [
        TestFunction::bump(5.0, 2.0).unwrap(),
        TestFunction::gaussian(20.0, 8.0).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let path = simulate_large_indexed(&p, 60.0, 9, i).map_err(|e| e.to_string())?;
        for phi in &phis {
            let r = pair_white_noise(&path, phi).map_err(|e| e.to_string())?;
            worst = worst.max(r.crosscheck_rel_err);
        }
    }
    ensure(worst < 1e-9, || format!("max cross-check rel err {worst:.3e}"))?;

    let e = JumpEvent {
        t: 1.0,
        sign: -1,
        log1p_mag: 4.5,
    };
    let path = EventPath::from_events(p, 40.0, 0, 0, vec![e]).map_err(|e| e.to_string())?;
    let mut single: f64 = 0.0;
    for phi in [
        TestFunction::gaussian(2.0, 1.5).unwrap(),
        TestFunction::bump(1.5, 2.0).unwrap(),
    ] {
        let want = e.value() * phi.value(1.0);
        let r = pair_white_noise(&path, &phi).map_err(|e| e.to_string())?;
        single = single.max(r.value.relative_difference(want));
    }
    ensure(single < 1e-12, || format!("single jump rel err {single:.3e}"))?;
    Ok(format!("max cross-check rel err {worst:.3e}, single jump {single:.3e}"))
}

fn laplace_exponent() -> Outcome {
    let mut worst: f64 = 0.0;
    for a in ALPHAS {
        let p = params(a);
        let phi0 = measure::laplace_exponent(0.0, &p).map_err(|e| e.to_string())?;
        ensure(phi0 == 0.0, || format!("alpha {a}: Phi(0) = {phi0}"))?;
        let grid: Vec<f64> = (1..=50).map(|i| 0.1 * i as f64).collect();
        let mut vals = vec![0.0];
        for &l in &grid {
            vals.push(measure::laplace_exponent(l, &p).map_err(|e| e.to_string())?);
        }
        let d: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
        ensure(d.iter().all(|&x| x > 0.0), || format!("alpha {a}: not increasing"))?;
        ensure(d.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), || {
            format!("alpha {a}: not concave")
        })?;
        let big = measure::laplace_exponent(1e6, &p).map_err(|e| e.to_string())?;
        let t1 = measure::tail_one_sided(1.0, &p).map_err(|e| e.to_string())?;
        worst = worst.max((big - t1).abs());
    }
    ensure(worst < 1e-6, || format!("|Phi(1e6) - tail(1)| = {worst:.3e}"))?;
    Ok(format!("max |Phi(1e6) - tail(1)| {worst:.3e}"))
}

fn simulate_bytes(bin: &Path, dir: &Path, name: &str, workers: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(name);
    let status = Command::new(bin)
        .args([
            "simulate",
            "--alpha",
            "1.2",
            "--horizon",
            "200",
            "--seed",
            "42",
            "--paths",
            "8",
            "--small",
            "--eps",
            "0.01",
        ])
        .args(["--workers", workers, "--out"])
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.success(), || format!("simulate exited {:?}", status.code()))?;
    let mut bytes = std::fs::read(&out).map_err(|e| e.to_string())?;
    bytes.extend(std::fs::read(dir.join(format!("{name}.small.jsonl"))).map_err(|e| e.to_string())?);
    Ok(bytes)
}

fn determinism(bin: &Path) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = simulate_bytes(bin, dir.path(), "a.jsonl", "1")?;
    let b = simulate_bytes(bin, dir.path(), "b.jsonl", "1")?;
    let c = simulate_bytes(bin, dir.path(), "c.jsonl", "4")?;
    ensure(a == b, || "two runs differ".into())?;
    ensure(a == c, || "1 and 4 workers differ".into())?;
    Ok(format!("{} bytes identical across runs and worker counts", a.len()))
}

fn main() -> ExitCode {
    let bin = Path::new(env!("CARGO_BIN_EXE_kalpha"));
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Option<Duration>, Check)> = vec![
        (
            "1 tail closed form vs quadrature",
            Some(Duration::from_secs(1)),
            Box::new(tail_vs_quadrature),
        ),
        (
            "2 sampler law (KS, Poisson counts)",
            Some(Duration::from_secs(5)),
            Box::new(sampler_law),
        ),
        (
            "3 truncated moment divergence",
            Some(Duration::from_secs(1)),
            Box::new(moment_divergence),
        ),
        (
            "4 Pruitt growth signature",
            Some(Duration::from_secs(2)),
            Box::new(pruitt_signature),
        ),
        (
            "5 upper-function classification",
            None,
            Box::new(|| classification_table(bin)),
        ),
        (
            "6 envelope behavior regression",
            Some(Duration::from_secs(60)),
            Box::new(envelope_behavior),
        ),
        ("7 pairing keystone", None, Box::new(pairing_keystone)),
        ("8 Laplace exponent", None, Box::new(laplace_exponent)),
        ("9 simulate determinism", None, Box::new(|| determinism(bin))),
    ];
    let mut failed = 0;
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let over = budget.filter(|&b| took > b);
        let (verdict, detail) = match (outcome, over) {
            (Ok(d), None) => ("PASS", d),
            (Ok(d), Some(b)) => ("FAIL", format!("{d}; runtime over {b:?} budget")),
            (Err(d), _) => ("FAIL", d),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("{verdict} [{name}] {detail} ({:.2}s)", took.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
