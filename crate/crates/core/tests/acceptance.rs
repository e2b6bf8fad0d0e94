//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Exits 0 after reporting unless `CPSIM_ACCEPTANCE_STRICT=1`, in which case
//! any FAIL gives a nonzero exit status.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use priority_cp::classical::{estimate_edge_speed, extinction_time};
use priority_cp::experiments::{confinement_rate, fit_c_infinity, sample_extinction_at, sample_first_entries, InitialState};
use priority_cp::farm::run_replicas;
use priority_cp::harris::{ConstructionParams, HarrisConstruction, MarkStream, OccupancySweep, SiteInterval};
use priority_cp::renorm::{estimate_barrier_probability, BoxGeometry, RenormParams, Side};
use priority_cp::seed::{aux_rng, replica_seed};
use priority_cp::stats::{
    estimate_beta, ks_exponential, ks_two_sample, nonincreasing_within_wilson, Frequency, TimeSample,
};
use priority_cp::two_type::{arena, Cell, Trajectory, TwoTypeSweep};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use common::{enumerate_paths, enumerate_type_one_paths, random_small_construction, random_two_type};

const MASTER: u64 = 1;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn lambda_zero_extinction() -> Outcome {
    let start = Instant::now();
    let region = SiteInterval::new(1, 10).unwrap();
    let full: BTreeSet<i32> = region.sites().collect();
    let times = run_replicas(100_000, |i| {
        let p = ConstructionParams::new(0.0, 1, region, 1e3, replica_seed(MASTER, i));
        extinction_time(MarkStream::new(p).unwrap(), &full, region, 1e3).value
    });
    let h10: f64 = (1..=10).map(|k| 1.0 / f64::from(k)).sum();
    let (m, se) = mean_se(&times);
    let secs = start.elapsed().as_secs_f64();
    let z = (m - h10) / se;
    outcome(
        z.abs() < 3.0 && secs <= 10.0,
        format!("mean {m:.4} vs H10 {h10:.4}, z = {z:.2}, {secs:.1}s"),
    )
}

fn coupling_projection() -> Outcome {
    let mut mismatches = 0u64;
    let mut checked = 0u64;
    for n in [5, 10, 20] {
        for lambda in [0.5, 2.0] {
            for range in [1, 2] {
                let bad: u64 = run_replicas(1000, |s| {
                    let region = arena(n).unwrap();
                    let p = ConstructionParams::new(lambda, range, region, 10.0, replica_seed(MASTER, s));
                    let mut two = TwoTypeSweep::from_cells(n, InitialState::Reference.cells(n));
                    let mut one = OccupancySweep::new(region, region.sites());
                    let mut bad = 0;
                    for m in MarkStream::new(p).unwrap() {
                        two.apply(&m);
                        one.apply(&m);
                        if two
                            .cells()
                            .iter()
                            .zip(one.occupied_slice())
                            .any(|(&c, &o)| (c != Cell::Empty) != o)
                        {
                            bad += 1;
                        }
                    }
                    bad
                })
                .into_iter()
                .sum();
                mismatches += bad;
                checked += 1000;
            }
        }
    }
    outcome(mismatches == 0, format!("{checked} seeds over 12 combinations, {mismatches} mismatching mark times"))
}

fn path_lemma() -> Outcome {
    let mut rng = aux_rng(MASTER ^ 0x3);
    let mut failures = 0;
    for seed in 0..1000 {
        let n = rng.random_range(1..=8);
        let lambda = rng.random_range(0.5..2.5);
        let range = rng.random_range(1..=2);
        let h = HarrisConstruction::generate(ConstructionParams::new(lambda, range, arena(n).unwrap(), 1.5, seed)).unwrap();
        let (a, b) = random_two_type(&mut rng, n);
        let traj = Trajectory::from_construction(&h, &a, &b, n).unwrap();
        let x = rng.random_range(-n + 1..=n);
        let t = rng.random_range(0.0..1.5);
        let holds_one = traj.state_at(t).get(x) == Some(Cell::One);
        if holds_one != enumerate_type_one_paths(&traj, &h, t).contains(&x) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("1000 triples, {failures} disagreements with path search"))
}

fn reachability() -> Outcome {
    let mut rng = aux_rng(MASTER ^ 0x4);
    let mut failures = 0;
    for _ in 0..1000 {
        let h = random_small_construction(&mut rng, 12);
        let region = h.window();
        let sources: BTreeSet<i32> = region.sites().filter(|_| rng.random_bool(0.5)).collect();
        let t0 = rng.random_range(0.0..2.0);
        let t1 = rng.random_range(t0..4.0);
        let sweep = h.reachable(&sources, t0, t1, region).unwrap();
        if sweep != enumerate_paths(h.marks(), &sources, t0, t1, region) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("1000 constructions, {failures} disagreements"))
}

/// `τ` samples at λ = 2, R = 1, shared by the exponentiality and growth checks.
fn extinction_samples(n: i32, replicas: u64) -> Vec<TimeSample> {
    sample_extinction_at(2.0, 1, n, 1e6, replicas, MASTER, InitialState::Reference)
        .unwrap()
        .into_iter()
        .map(|r| r.tau)
        .collect()
}

fn synthetic_rejection_rate() -> f64 {
    let trials = 200u64;
    let rejected = run_replicas(trials, |i| {
        let mut rng = aux_rng(replica_seed(MASTER ^ 0x5, i));
        let s: Vec<TimeSample> = (0..10_000).map(|_| TimeSample::observed(Exp1.sample(&mut rng))).collect();
        ks_exponential(&s, 1.0).unwrap().p_value < 0.05
    })
    .into_iter()
    .filter(|&r| r)
    .count();
    rejected as f64 / trials as f64
}

fn exponentiality(samples: &[(i32, Vec<TimeSample>)], secs: f64) -> Outcome {
    let rate = synthetic_rejection_rate();
    let pipeline_ok = (rate - 0.05).abs() <= 0.02;
    let get = |n: i32| &samples.iter().find(|(m, _)| *m == n).unwrap().1;
    let ks = |n: i32| {
        let s = get(n);
        let uncensored = s.iter().filter(|t| !t.censored).count();
        let beta = estimate_beta(s).unwrap();
        (ks_exponential(s, beta).unwrap(), uncensored, beta)
    };
    let (k20, u20, b20) = ks(20);
    let (k40, u40, b40) = ks(40);
    let pass = pipeline_ok && u20 >= 2000 && u40 >= 2000 && k40.p_value > 0.01 && k40.statistic <= k20.statistic;
    outcome(
        pass,
        format!(
            "synthetic rejection {:.1}%; N=20: beta {b20:.1}, D {:.4}, p {:.3}, {u20} uncensored; \
             N=40: beta {b40:.1}, D {:.4}, p {:.3}, {u40} uncensored; sampling {secs:.0}s",
            100.0 * rate,
            k20.statistic,
            k20.p_value,
            k40.statistic,
            k40.p_value
        ),
    )
}

fn growth(samples: &[(i32, Vec<TimeSample>)]) -> Outcome {
    let fit = fit_c_infinity(samples).unwrap();
    let (lo, hi) = fit.slope_ci();
    let scaled: Vec<String> = fit.points.iter().map(|p| format!("{}:{:.3}", p.n, p.scaled)).collect();
    let pass = lo > 0.0 && fit.significant_decreases.is_empty() && fit.excluded.is_empty();
    outcome(
        pass,
        format!(
            "slope {:.4} CI [{lo:.4}, {hi:.4}], intercept {:.3}; median(log tau)/N {}; significant decreases {:?}",
            fit.fit.slope,
            fit.fit.intercept,
            scaled.join(" "),
            fit.significant_decreases
        ),
    )
}

fn reflection_symmetry() -> Outcome {
    // S_1 from even replicas, Ŝ_1 from odd ones, so the two samples are independent
    let entries = sample_first_entries(2.0, 1, 20, 1e5, 7000, MASTER).unwrap();
    let s: Vec<f64> = entries.iter().step_by(2).filter_map(|e| e.0).take(2000).collect();
    let s_hat: Vec<f64> = entries.iter().skip(1).step_by(2).filter_map(|e| e.1).take(2000).collect();
    if s.len() < 2000 || s_hat.len() < 2000 {
        return outcome(false, format!("only {} / {} uncensored entries", s.len(), s_hat.len()));
    }
    let ks = ks_two_sample(&s, &s_hat).unwrap();
    outcome(ks.p_value > 0.01, format!("D {:.4}, p {:.3}, 2000 samples each", ks.statistic, ks.p_value))
}

fn barrier_positivity() -> Outcome {
    let alpha = estimate_edge_speed(2.0, 2, 50.0, 100, MASTER).unwrap();
    let g = BoxGeometry::new(1, 1, alpha.alpha_hat, 2).unwrap();
    let params = RenormParams::new(g, 40, 1).unwrap();
    let Some(a2) = params.a2() else {
        return outcome(false, "A2 is empty".into());
    };
    let sites: Vec<i32> = a2.sites().collect();
    let est = estimate_barrier_probability(2.0, &params, Side::Right, &sites, 500, MASTER).unwrap();
    let min = est.min_site().unwrap();
    outcome(
        min.estimate.lower() > 0.0,
        format!(
            "alpha {:.3}, M {}, S {}, A2 [{}, {}]; min site {} at {:.3} +- {:.3} over 500 replicas",
            alpha.alpha_hat,
            params.m(),
            params.s(),
            a2.lo(),
            a2.hi(),
            min.site,
            min.estimate.estimate,
            min.estimate.ci_half_width
        ),
    )
}

fn confinement() -> Outcome {
    let horizon = 500.0;
    let per_n: Vec<_> = [10, 20, 40]
        .iter()
        .map(|&n| confinement_rate(2.0, 1, n, horizon, 1000, MASTER).unwrap())
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (j, sampler) in per_n[0].iter().enumerate() {
        let series: Vec<Frequency> = per_n.iter().map(|r| r[j].frequency).collect();
        pass &= nonincreasing_within_wilson(&series);
        let hits: Vec<String> = series.iter().map(|f| f.hits.to_string()).collect();
        parts.push(format!("{} {}", sampler.sampler, hits.join("/")));
    }
    outcome(pass, format!("horizon {horizon}, failures per 1000 at N=10/20/40: {}", parts.join(", ")))
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!("{} criterion {id} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };
    report(1, "lambda=0 extinction law", lambda_zero_extinction());
    report(2, "coupling projection", coupling_projection());
    report(3, "path lemma", path_lemma());
    report(4, "reachability vs brute force", reachability());

    let start = Instant::now();
    let samples: Vec<(i32, Vec<TimeSample>)> = [10, 20, 30, 40].iter().map(|&n| (n, extinction_samples(n, 2000))).collect();
    let secs = start.elapsed().as_secs_f64();
    report(5, "exponentiality of tau/beta", exponentiality(&samples, secs));
    report(6, "exponential growth in N", growth(&samples));
    report(7, "reflection symmetry of entries", reflection_symmetry());
    report(8, "barrier positivity", barrier_positivity());
    report(9, "confinement trend", confinement());

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("{} of {} criteria passed; failed: {failed:?}", results.len() - failed.len(), results.len());
    if !failed.is_empty() && std::env::var("CPSIM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
