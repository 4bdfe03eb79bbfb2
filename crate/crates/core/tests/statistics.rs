//! Goodness-of-fit checks of the samplers against their exact laws.

use kalpha::measure::{self, KAlphaParams};
use kalpha::paths::{simulate_ensemble, simulate_large_indexed, simulate_small_indexed};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

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

/// Pearson chi-square p-value of integer counts against Poisson(mean), with
/// bins merged from the tails until each expects at least 5.
fn poisson_chi_square_p(counts: &[usize], mean: f64) -> f64 {
    let n = counts.len() as f64;
    let pois = Poisson::new(mean).unwrap();
    let kmax = *counts.iter().max().unwrap();
    let mut lo = 0;
    while n * pois.cdf(lo) < 5.0 {
        lo += 1;
    }
    let mut hi = kmax.max(lo as usize + 1) as u64;
    while hi > lo + 1 && n * (1.0 - pois.cdf(hi - 1)) < 5.0 {
        hi -= 1;
    }
    // bins: [0, lo], lo+1 .. hi-1 singly, [hi, inf)
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    observed.push(counts.iter().filter(|&&c| c as u64 <= lo).count() as f64);
    expected.push(n * pois.cdf(lo));
    for k in lo + 1..hi {
        observed.push(counts.iter().filter(|&&c| c as u64 == k).count() as f64);
        expected.push(n * pois.pmf(k));
    }
    observed.push(counts.iter().filter(|&&c| c as u64 >= hi).count() as f64);
    expected.push(n * (1.0 - pois.cdf(hi - 1)));
    let stat: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (observed.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

#[test]
fn log_magnitudes_follow_the_pareto_law() {
    for (k, a) in [0.5, 1.0, 1.5].into_iter().enumerate() {
        let p = KAlphaParams::new(a).unwrap();
        let n = 100_000;
        let horizon = 1.1 * n as f64 / p.trunc_mass();
        let path = simulate_large_indexed(&p, horizon, 1000 + k as u64, 0).unwrap();
        assert!(path.len() >= n);
        let sample: Vec<f64> = path.events()[..n].iter().map(|e| e.log1p_mag).collect();
        let d = ks_statistic(sample, |l| 1.0 - measure::survival_log1p(l, &p));
        assert!(d < 0.01, "alpha {a}: KS = {d}");
    }
}

#[test]
fn event_counts_are_poisson() {
    for a in [0.5, 1.0, 1.5] {
        let p = KAlphaParams::new(a).unwrap();
        let horizon = 2.0;
        let counts: Vec<usize> = simulate_ensemble(&p, horizon, 7, 4000, 4)
            .unwrap()
            .iter()
            .map(|q| q.len())
            .collect();
        let pval = poisson_chi_square_p(&counts, p.trunc_mass() * horizon);
        assert!(pval > 1e-3, "alpha {a}: p = {pval}");
    }
}

#[test]
fn mean_event_count_alpha_one() {
    let p = KAlphaParams::new(1.0).unwrap();
    let counts: Vec<f64> = simulate_ensemble(&p, 10.0, 3, 1000, 4)
        .unwrap()
        .iter()
        .map(|q| q.len() as f64)
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let want = 10.0 * 2.0 / std::f64::consts::LN_2;
    let se = (want / counts.len() as f64).sqrt();
    assert!((mean - want).abs() < 3.0 * se, "mean {mean} vs {want}");
}

#[test]
fn small_component_matches_its_variance() {
    let p = KAlphaParams::new(1.0).unwrap();
    let n = 10_000;
    let finals: Vec<f64> = (0..n)
        .map(|i| {
            *simulate_small_indexed(&p, 1.0, 11, i, 1e-3, 0.25)
                .unwrap()
                .values
                .last()
                .unwrap()
        })
        .collect();
    let nf = n as f64;
    let mean = finals.iter().sum::<f64>() / nf;
    let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let m4 = finals.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let want = p.small_var();
    assert!(mean.abs() < 3.0 * (want / nf).sqrt(), "mean {mean}");
    let se_var = ((m4 - var * var) / nf).sqrt();
    assert!((var - want).abs() < 3.0 * se_var, "var {var} vs {want} (se {se_var})");
}
