use anyhow::{Context, Result};
use priority_cp::classical::{estimate_edge_speed, EdgeSpeedEstimate};
use priority_cp::dump;
use priority_cp::experiments::{
    confinement_rate, extinction_rows, fit_c_infinity, regeneration_event_rate, sample_first_extinction, summarize,
    two_type_regeneration_rate, CInfinityFit, ExtinctionSamples, ExtinctionSummary, SamplerFrequency, ScheduleUsed,
};
use priority_cp::harris::{ConstructionParams, HarrisConstruction, MarkKind, SiteInterval};
use priority_cp::renorm::{compute_phi_psi, estimate_barrier_probability, BoxGeometry, FieldWindow, RenormParams, Side};
use priority_cp::stats::nonincreasing_within_wilson;
use priority_cp::two_type::{arena, first_extinction, Cell, FirstExtinction, Trajectory};
use serde::Serialize;

use crate::config::Config;
use crate::output::{Staging, CODE_VERSION};

/// Written alongside every summary so outputs describe themselves.
#[derive(Serialize)]
struct Echo<'a, T: Serialize> {
    code_version: &'static str,
    config: &'a Config,
    #[serde(flatten)]
    result: T,
}

fn write_summary<T: Serialize>(out: &Staging, cfg: &Config, result: T) -> Result<()> {
    out.json(
        "summary.json",
        &Echo {
            code_version: CODE_VERSION,
            config: cfg,
            result,
        },
    )
}

#[derive(Serialize)]
struct MarkRow {
    time: f64,
    kind: &'static str,
    site: i32,
    target: Option<i32>,
}

#[derive(Serialize)]
struct ChangeRow {
    seq: u64,
    time: f64,
    site: i32,
    from: u8,
    to: u8,
}

#[derive(Serialize)]
struct SimulateSummary {
    marks: usize,
    changes: usize,
    first_extinction: FirstExtinction,
    final_counts: [usize; 3],
}

pub fn simulate(cfg: &Config, out: &Staging) -> Result<Vec<String>> {
    let s = &cfg.simulate;
    let region = arena(s.n)?;
    let h = HarrisConstruction::generate(ConstructionParams::new(s.lambda, s.range, region, s.t_max, cfg.experiment.seed))?;
    let (a, b) = s.initial.sets(s.n);
    let traj = Trajectory::from_construction(&h, &a, &b, s.n)?;
    out.csv(
        "marks.csv",
        h.marks().iter().map(|m| match m.kind {
            MarkKind::Recovery { site } => MarkRow {
                time: m.time,
                kind: "recovery",
                site,
                target: None,
            },
            MarkKind::Arrow { source, target } => MarkRow {
                time: m.time,
                kind: "arrow",
                site: source,
                target: Some(target),
            },
        }),
    )?;
    out.csv(
        "changes.csv",
        traj.changes.iter().map(|c| ChangeRow {
            seq: c.seq,
            time: c.time,
            site: c.site,
            from: c.from as u8,
            to: c.to as u8,
        }),
    )?;
    out.bytes("construction.bin", &dump::to_bytes(&h))?;
    let last = traj.state_at(s.t_max);
    let count = |c: Cell| last.cells.iter().filter(|&&x| x == c).count();
    write_summary(
        out,
        cfg,
        SimulateSummary {
            marks: h.marks().len(),
            changes: traj.changes.len(),
            first_extinction: first_extinction(h.marks(), &a, &b, s.n, s.t_max)?,
            final_counts: [count(Cell::Empty), count(Cell::One), count(Cell::Two)],
        },
    )?;
    Ok(files(&["marks.csv", "changes.csv", "construction.bin", "summary.json"]))
}

#[derive(Serialize)]
struct PerN {
    n: i32,
    t_max: f64,
    samples: usize,
    censored: usize,
    censored_fraction: f64,
    beta_n: Option<f64>,
    ks_stat: Option<f64>,
    p_value: Option<f64>,
    median_log_tau: Option<f64>,
    median_log_tau_stderr: Option<f64>,
    warnings: Vec<String>,
}

impl PerN {
    fn new(s: &ExtinctionSamples, x: ExtinctionSummary) -> Self {
        Self {
            n: s.n,
            t_max: s.t_max,
            samples: x.samples,
            censored: x.censored,
            censored_fraction: x.censored_fraction,
            beta_n: x.beta_n,
            ks_stat: x.ks.map(|k| k.statistic),
            p_value: x.ks.map(|k| k.p_value),
            median_log_tau: x.median_log_tau.map(|m| m.median),
            median_log_tau_stderr: x.median_log_tau.map(|m| m.stderr),
            warnings: x.warnings,
        }
    }
}

#[derive(Serialize)]
struct CInf {
    slope: f64,
    slope_stderr: f64,
    slope_ci: (f64, f64),
    intercept: f64,
    intercept_stderr: f64,
    /// `(N, median(log τ)/N)` for trend inspection.
    scaled_medians: Vec<(i32, f64)>,
    excluded: Vec<i32>,
    significant_decreases: Vec<(i32, i32)>,
}

impl From<CInfinityFit> for CInf {
    fn from(f: CInfinityFit) -> Self {
        Self {
            slope: f.fit.slope,
            slope_stderr: f.fit.slope_stderr,
            slope_ci: f.slope_ci(),
            intercept: f.fit.intercept,
            intercept_stderr: f.fit.intercept_stderr,
            scaled_medians: f.points.iter().map(|p| (p.n, p.scaled)).collect(),
            excluded: f.excluded,
            significant_decreases: f.significant_decreases,
        }
    }
}

#[derive(Serialize)]
struct ExtinctionOutput {
    per_n: Vec<PerN>,
    c_inf: Option<CInf>,
    c_inf_warning: Option<String>,
}

fn extinction_block(cfg: &Config, out: &Staging) -> Result<ExtinctionOutput> {
    let samples = sample_first_extinction(&cfg.experiment)?;
    out.csv("extinction.csv", extinction_rows(&cfg.experiment, &samples))?;
    let per_n = samples.iter().map(|s| PerN::new(s, summarize(s.n, &s.taus()))).collect();
    let fit_input: Vec<_> = samples.iter().map(|s| (s.n, s.taus())).collect();
    let (c_inf, c_inf_warning) = match fit_c_infinity(&fit_input) {
        Ok(f) => (Some(f.into()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ExtinctionOutput {
        per_n,
        c_inf,
        c_inf_warning,
    })
}

pub fn extinction(cfg: &Config, out: &Staging) -> Result<Vec<String>> {
    let result = extinction_block(cfg, out)?;
    write_summary(out, cfg, result)?;
    Ok(files(&["extinction.csv", "summary.json"]))
}

#[derive(Serialize)]
struct EdgeSpeedRow {
    lambda: f64,
    #[serde(rename = "R")]
    range: u32,
    t_max: f64,
    replicas: usize,
    excluded: usize,
    alpha_hat: f64,
    ci_half_width: f64,
    warning: bool,
}

fn edge_speed_for(cfg: &Config, lambda: f64, range: u32) -> Result<EdgeSpeedEstimate> {
    let e = &cfg.edge_speed;
    Ok(estimate_edge_speed(lambda, range, e.t_max, e.replicas, cfg.experiment.seed)?)
}

pub fn edge_speed(cfg: &Config, out: &Staging) -> Result<Vec<String>> {
    let e = &cfg.edge_speed;
    let est = edge_speed_for(cfg, e.lambda, e.range)?;
    out.csv(
        "edge_speed.csv",
        [EdgeSpeedRow {
            lambda: e.lambda,
            range: e.range,
            t_max: est.t_max,
            replicas: est.replicas,
            excluded: est.excluded,
            alpha_hat: est.alpha_hat,
            ci_half_width: est.ci_half_width,
            warning: est.warning,
        }],
    )?;
    write_summary(out, cfg, est)?;
    Ok(files(&["edge_speed.csv", "summary.json"]))
}

/// `α̂` from the config, or estimated with the `edge_speed` settings.
#[derive(Serialize)]
struct AlphaUsed {
    alpha_hat: f64,
    estimated: bool,
}

fn alpha(cfg: &Config, given: Option<f64>, lambda: f64, range: u32) -> Result<AlphaUsed> {
    Ok(match given {
        Some(a) => AlphaUsed {
            alpha_hat: a,
            estimated: false,
        },
        None => AlphaUsed {
            alpha_hat: edge_speed_for(cfg, lambda, range)?.alpha_hat,
            estimated: true,
        },
    })
}

#[derive(Serialize)]
struct BarrierRow {
    site: i32,
    side: Side,
    hits: u64,
    replicas: u64,
    estimate: f64,
    ci_half_width: f64,
}

#[derive(Serialize)]
struct BarrierSummary {
    alpha: AlphaUsed,
    m: i64,
    s: f64,
    imath: i64,
    a_n: f64,
    a2: Option<(i32, i32)>,
    a4: Option<(i32, i32)>,
    min_site: Option<i32>,
    min_estimate: Option<f64>,
    min_ci_lower: Option<f64>,
}

pub fn barrier(cfg: &Config, out: &Staging) -> Result<Vec<String>> {
    let b = &cfg.barrier;
    let alpha = alpha(cfg, b.alpha_hat, b.lambda, b.range)?;
    let params = RenormParams::new(BoxGeometry::new(b.n_hat, b.k_hat, alpha.alpha_hat, b.range)?, b.n, 1)?;
    let default_sites = match b.side {
        Side::Right => params.a2(),
        Side::Left => params.a4(),
    };
    let sites: Vec<i32> = match &b.sites {
        Some(s) => s.clone(),
        None => default_sites
            .context("the default site set is empty for these parameters; set barrier.sites")?
            .sites()
            .collect(),
    };
    let est = estimate_barrier_probability(b.lambda, &params, b.side, &sites, b.replicas, cfg.experiment.seed)?;
    out.csv(
        "barrier.csv",
        est.sites.iter().map(|s| BarrierRow {
            site: s.site,
            side: b.side,
            hits: s.hits,
            replicas: b.replicas,
            estimate: s.estimate.estimate,
            ci_half_width: s.estimate.ci_half_width,
        }),
    )?;
    let min = est.min_site();
    let bounds = |i: Option<SiteInterval>| i.map(|i| (i.lo(), i.hi()));
    write_summary(
        out,
        cfg,
        BarrierSummary {
            alpha,
            m: params.m(),
            s: params.s(),
            imath: params.imath(),
            a_n: params.a_n(),
            a2: bounds(params.a2()),
            a4: bounds(params.a4()),
            min_site: min.map(|s| s.site),
            min_estimate: min.map(|s| s.estimate.estimate),
            min_ci_lower: min.map(|s| s.estimate.lower()),
        },
    )?;
    Ok(files(&["barrier.csv", "summary.json"]))
}

#[derive(Serialize)]
struct RenormSummary {
    alpha: AlphaUsed,
    construction_window: (i32, i32),
    t_max: f64,
    margin: i32,
    cells: usize,
    phi_counts: [usize; 3],
    boundary_flagged: usize,
}

pub fn renorm(cfg: &Config, out: &Staging) -> Result<Vec<String>> {
    let r = &cfg.renorm;
    let alpha = alpha(cfg, r.alpha_hat, r.lambda, r.range)?;
    let g = BoxGeometry::new(r.n_hat, r.k_hat, alpha.alpha_hat, r.range)?;
    anyhow::ensure!(r.m_lo <= r.m_hi, "renorm.m_lo must not exceed renorm.m_hi");
    let margin = g.margin();
    let (mut lo, mut hi) = (i32::MAX, i32::MIN);
    for m in r.m_lo..=r.m_hi {
        let span = g.envelope(m).unwrap_or_else(|| g.base_union(m));
        lo = lo.min(span.lo() - margin);
        hi = hi.max(span.hi() + margin);
    }
    let window = SiteInterval::new(lo, hi)?;
    let t_max = g.box_time() * f64::from(r.rows);
    let h = HarrisConstruction::generate(ConstructionParams::new(r.lambda, r.range, window, t_max, cfg.experiment.seed))?;
    let field = compute_phi_psi(
        &h,
        &g,
        FieldWindow {
            m_lo: r.m_lo,
            m_hi: r.m_hi,
            rows: r.rows,
        },
    )?;
    out.csv("field.csv", &field.cells)?;
    let mut phi_counts = [0; 3];
    for c in &field.cells {
        phi_counts[usize::from(c.phi)] += 1;
    }
    write_summary(
        out,
        cfg,
        RenormSummary {
            alpha,
            construction_window: (lo, hi),
            t_max,
            margin,
            cells: field.cells.len(),
            phi_counts,
            boundary_flagged: field.cells.iter().filter(|c| c.boundary_flag).count(),
        },
    )?;
    Ok(files(&["field.csv", "summary.json"]))
}

#[derive(Serialize)]
struct EventRow<'a> {
    #[serde(rename = "N")]
    n: i32,
    event: &'a str,
    sampler: &'a str,
    horizon: f64,
    hits: u64,
    trials: u64,
    frequency: f64,
    wilson_lo: f64,
    wilson_hi: f64,
}

#[derive(Serialize)]
struct EventSeries {
    event: &'static str,
    sampler: String,
    /// `(N, frequency)` in `n_list` order.
    frequencies: Vec<(i32, f64)>,
    nonincreasing_within_wilson: bool,
}

#[derive(Serialize)]
struct MetaSummary {
    #[serde(flatten)]
    extinction: ExtinctionOutput,
    schedules: Vec<ScheduleUsed>,
    event_frequencies: Vec<EventSeries>,
    initial_state_note: &'static str,
}

const SAMPLER_NOTE: &str = "Event frequencies are taken under fixed samplers of the initial state plus \
the extreme states; they under-approximate the supremum over all initial states.";

pub fn meta(cfg: &Config, out: &Staging) -> Result<Vec<String>> {
    let e = &cfg.experiment;
    e.validate()?;
    let schedules: Vec<ScheduleUsed> = e
        .n_list
        .iter()
        .map(|&n| e.schedule.resolve(e.range, n))
        .collect::<Result<_, _>>()?;
    let extinction = extinction_block(cfg, out)?;
    type Runner = fn(f64, u32, i32, f64, u64, u64) -> priority_cp::Result<Vec<SamplerFrequency>>;
    let experiments: [(&str, Runner, fn(&ScheduleUsed) -> f64); 3] = [
        ("regeneration", regeneration_event_rate, |s| s.a_n),
        ("two_type_regeneration", two_type_regeneration_rate, |s| s.c_n),
        ("confinement_failure", confinement_rate, |s| s.confinement_horizon),
    ];
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (event, run, horizon) in experiments {
        let per_n: Vec<Vec<SamplerFrequency>> = schedules
            .iter()
            .map(|s| run(e.lambda, e.range, s.n, horizon(s), e.replicas, e.seed))
            .collect::<Result<_, _>>()?;
        for (s, freqs) in schedules.iter().zip(&per_n) {
            for f in freqs {
                let q = f.frequency;
                rows.push((s.n, event, f.sampler.clone(), horizon(s), q));
            }
        }
        for (j, first) in per_n[0].iter().enumerate() {
            let freqs: Vec<_> = per_n.iter().map(|v| v[j].frequency).collect();
            series.push(EventSeries {
                event,
                sampler: first.sampler.clone(),
                frequencies: schedules.iter().zip(&freqs).map(|(s, f)| (s.n, f.estimate)).collect(),
                nonincreasing_within_wilson: nonincreasing_within_wilson(&freqs),
            });
        }
    }
    out.csv(
        "events.csv",
        rows.iter().map(|(n, event, sampler, horizon, q)| EventRow {
            n: *n,
            event,
            sampler,
            horizon: *horizon,
            hits: q.hits,
            trials: q.trials,
            frequency: q.estimate,
            wilson_lo: q.lo,
            wilson_hi: q.hi,
        }),
    )?;
    write_summary(
        out,
        cfg,
        MetaSummary {
            extinction,
            schedules,
            event_frequencies: series,
            initial_state_note: SAMPLER_NOTE,
        },
    )?;
    Ok(files(&["extinction.csv", "events.csv", "summary.json"]))
}

fn files(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| (*s).to_string()).collect()
}

