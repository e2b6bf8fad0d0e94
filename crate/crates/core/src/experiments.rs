//! Metastability experiments: first-extinction samples, `β_N`, the
//! exponential fit, growth of `log τ` in `N`, and the frequencies of the
//! regeneration and confinement events.
//!
//! Seeding: replica `i` of an experiment of kind `kind` at size `N` runs on the
//! construction seeded with `replica_seed(labelled_seed(master, "kind/N=n"), i)`.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::farm::run_replicas;
use crate::harris::{ConstructionParams, MarkStream, OccupancySweep, SiteInterval};
use crate::renorm::BoxGeometry;
use crate::seed::{aux_rng, labelled_seed, replica_seed};
use crate::stats::{
    censored_fraction, censored_median, estimate_beta, ks_exponential, least_squares, Frequency, KsResult, LinearFit,
    MedianEstimate, TimeSample, Z95_ONE_SIDED,
};
use crate::two_type::{arena, run_to_first_extinction, Cell, Species, TwoTypeSweep};

/// Paper schedules and their overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub n_hat: u32,
    pub k_hat: u32,
    /// Edge speed used by `M(N)`; required by the formula schedules.
    pub alpha_hat: Option<f64>,
    /// Replaces `a_N = (K̂N̂M² + 3)N` for every `N`.
    pub a_n: Option<f64>,
    /// Replaces `c_N = 2N² a_{2N}` for every `N`.
    pub c_n: Option<f64>,
    /// Replaces the confinement horizon `2N²K a_{2N}` for every `N`.
    pub confinement_horizon: Option<f64>,
    /// The constant `K` of the confinement horizon.
    pub confinement_k: u32,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            n_hat: 10,
            k_hat: 2,
            alpha_hat: None,
            a_n: None,
            c_n: None,
            confinement_horizon: None,
            confinement_k: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleSource {
    Formula,
    Override,
}

/// The schedule values actually used at one `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleUsed {
    pub n: i32,
    pub a_n: f64,
    pub a_n_source: ScheduleSource,
    pub c_n: f64,
    pub c_n_source: ScheduleSource,
    pub confinement_horizon: f64,
    pub confinement_source: ScheduleSource,
}

impl ScheduleConfig {
    fn formula_a(&self, range: u32, n: i32) -> Result<f64> {
        let alpha = self.alpha_hat.ok_or_else(|| {
            invalid("schedule.alpha_hat", "required by the a_N formula unless a_n is overridden")
        })?;
        let g = BoxGeometry::new(self.n_hat, self.k_hat, alpha, range)?;
        if g.m_of(n) < 1 {
            return Err(Error::InvalidParameter {
                name: "schedule",
                reason: format!("M({n}) = {} < 1; override a_n / c_n or shrink n_hat, k_hat", g.m_of(n)),
            });
        }
        Ok(g.a_of(n))
    }

    pub fn resolve(&self, range: u32, n: i32) -> Result<ScheduleUsed> {
        let nf = f64::from(n);
        let (a_n, a_n_source) = match self.a_n {
            Some(v) => (v, ScheduleSource::Override),
            None => (self.formula_a(range, n)?, ScheduleSource::Formula),
        };
        let a_2n = || match self.a_n {
            Some(v) => Ok(v),
            None => self.formula_a(range, 2 * n),
        };
        let (c_n, c_n_source) = match self.c_n {
            Some(v) => (v, ScheduleSource::Override),
            None => (2.0 * nf * nf * a_2n()?, ScheduleSource::Formula),
        };
        let (confinement_horizon, confinement_source) = match self.confinement_horizon {
            Some(v) => (v, ScheduleSource::Override),
            None => (
                2.0 * nf * nf * f64::from(self.confinement_k) * a_2n()?,
                ScheduleSource::Formula,
            ),
        };
        for (name, v) in [
            ("schedule.a_n", a_n),
            ("schedule.c_n", c_n),
            ("schedule.confinement_horizon", confinement_horizon),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(ScheduleUsed {
            n,
            a_n,
            a_n_source,
            c_n,
            c_n_source,
            confinement_horizon,
            confinement_source,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lambda: f64,
    pub range: u32,
    pub n_list: Vec<i32>,
    pub replicas: u64,
    /// Censoring horizon: one value for every `N`, or one per entry of `n_list`.
    pub t_max: Vec<f64>,
    pub seed: u64,
    pub schedule: ScheduleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            range: 1,
            n_list: vec![10, 20, 30, 40],
            replicas: 500,
            t_max: vec![1e6],
            seed: 1,
            schedule: ScheduleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", "must be finite and >= 0"));
        }
        if self.range == 0 {
            return Err(invalid("range", "must be >= 1"));
        }
        if self.n_list.is_empty() {
            return Err(invalid("n_list", "must not be empty"));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 1) {
            return Err(invalid("n_list", format!("entries must be >= 1, got {n}")));
        }
        if self.replicas == 0 {
            return Err(invalid("replicas", "must be >= 1"));
        }
        if self.t_max.len() != 1 && self.t_max.len() != self.n_list.len() {
            return Err(invalid(
                "t_max",
                format!("needs 1 or {} entries, got {}", self.n_list.len(), self.t_max.len()),
            ));
        }
        if let Some(t) = self.t_max.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(invalid("t_max", format!("entries must be finite and > 0, got {t}")));
        }
        Ok(())
    }

    pub fn t_max_for(&self, index: usize) -> f64 {
        if self.t_max.len() == 1 {
            self.t_max[0]
        } else {
            self.t_max[index]
        }
    }
}

/// Seed of replica `replica` for experiment `kind` at size `n`.
pub fn experiment_seed(master: u64, kind: &str, n: i32, replica: u64) -> u64 {
    replica_seed(labelled_seed(master, &format!("{kind}/N={n}")), replica)
}

fn stream(lambda: f64, range: u32, region: SiteInterval, horizon: f64, seed: u64) -> Result<MarkStream> {
    MarkStream::new(ConstructionParams::new(lambda, range, region, horizon, seed))
}

/// Named initial configurations of the two-type process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Type 1 on `[-N+1, 0]`, type 2 on `[1, N]`.
    Reference,
    /// Type 2 on `[-N+1, 0]`, type 1 on `[1, N]`.
    Swapped,
}

impl InitialState {
    pub fn cells(self, n: i32) -> Vec<Cell> {
        let (left, right) = match self {
            InitialState::Reference => (Cell::One, Cell::Two),
            InitialState::Swapped => (Cell::Two, Cell::One),
        };
        let n = n as usize;
        let mut cells = vec![left; n];
        cells.resize(2 * n, right);
        cells
    }

    pub fn sets(self, n: i32) -> (BTreeSet<i32>, BTreeSet<i32>) {
        let left: BTreeSet<i32> = (-n + 1..=0).collect();
        let right: BTreeSet<i32> = (1..=n).collect();
        match self {
            InitialState::Reference => (left, right),
            InitialState::Swapped => (right, left),
        }
    }
}

/// A configuration of `𝒞`: every site uniform on `{0, 1, 2}`, redrawn until both types appear.
pub fn sample_uniform_c<R: Rng>(n: i32, rng: &mut R) -> Vec<Cell> {
    loop {
        let cells: Vec<Cell> = (0..2 * n)
            .map(|_| Cell::from_u8(rng.random_range(0..3u8)).expect("0..3"))
            .collect();
        if cells.contains(&Cell::One) && cells.contains(&Cell::Two) {
            return cells;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionRecord {
    pub replica: u64,
    pub tau: TimeSample,
    pub extinct_type: Option<Species>,
}

/// First-extinction times from `initial`, one streamed construction per replica.
pub fn sample_extinction_at(
    lambda: f64,
    range: u32,
    n: i32,
    t_max: f64,
    replicas: u64,
    master: u64,
    initial: InitialState,
) -> Result<Vec<ExtinctionRecord>> {
    let region = arena(n)?;
    ConstructionParams::new(lambda, range, region, t_max, 0).validate()?;
    let cells = initial.cells(n);
    Ok(run_replicas(replicas, |i| {
        let marks = stream(lambda, range, region, t_max, experiment_seed(master, "extinction", n, i)).expect("validated");
        let r = run_to_first_extinction(TwoTypeSweep::from_cells(n, cells.clone()), marks, t_max);
        ExtinctionRecord {
            replica: i,
            tau: r.tau,
            extinct_type: r.extinct_type,
        }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionSamples {
    pub n: i32,
    pub t_max: f64,
    pub records: Vec<ExtinctionRecord>,
}

impl ExtinctionSamples {
    pub fn taus(&self) -> Vec<TimeSample> {
        self.records.iter().map(|r| r.tau).collect()
    }
}

/// `τ^{1,2}_N` samples for every `N` of the configuration.
pub fn sample_first_extinction(cfg: &ExperimentConfig) -> Result<Vec<ExtinctionSamples>> {
    cfg.validate()?;
    cfg.n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let t_max = cfg.t_max_for(i);
            Ok(ExtinctionSamples {
                n,
                t_max,
                records: sample_extinction_at(cfg.lambda, cfg.range, n, t_max, cfg.replicas, cfg.seed, InitialState::Reference)?,
            })
        })
        .collect()
}

/// One CSV row per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionRow {
    #[serde(rename = "N")]
    pub n: i32,
    pub lambda: f64,
    #[serde(rename = "R")]
    pub range: u32,
    pub seed: u64,
    pub replica: u64,
    pub tau: f64,
    pub censored: bool,
    pub extinct_type: Option<u8>,
}

pub fn extinction_rows(cfg: &ExperimentConfig, samples: &[ExtinctionSamples]) -> Vec<ExtinctionRow> {
    samples
        .iter()
        .flat_map(|s| {
            s.records.iter().map(move |r| ExtinctionRow {
                n: s.n,
                lambda: cfg.lambda,
                range: cfg.range,
                seed: cfg.seed,
                replica: r.replica,
                tau: r.tau.value,
                censored: r.tau.censored,
                extinct_type: r.extinct_type.map(Species::label),
            })
        })
        .collect()
}

/// Per-`N` summary of a sample of `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionSummary {
    pub n: i32,
    pub samples: usize,
    pub censored: usize,
    pub censored_fraction: f64,
    pub beta_n: Option<f64>,
    pub ks: Option<KsResult>,
    pub median_log_tau: Option<MedianEstimate>,
    /// Reasons a statistic could not be computed.
    pub warnings: Vec<String>,
}

pub fn summarize(n: i32, taus: &[TimeSample]) -> ExtinctionSummary {
    let mut warnings = Vec::new();
    let beta_n = estimate_beta(taus).map_err(|e| warnings.push(format!("beta_n: {e}"))).ok();
    let ks = beta_n.and_then(|b| ks_exponential(taus, b).map_err(|e| warnings.push(format!("ks: {e}"))).ok());
    let median_log_tau = censored_median(&log_values(taus));
    if median_log_tau.is_none() {
        warnings.push("median log tau: censored-dominated".into());
    }
    ExtinctionSummary {
        n,
        samples: taus.len(),
        censored: taus.iter().filter(|t| t.censored).count(),
        censored_fraction: censored_fraction(taus),
        beta_n,
        ks,
        median_log_tau,
        warnings,
    }
}

/// `log τ`, with `None` for censored samples and for `τ = 0`.
fn log_values(taus: &[TimeSample]) -> Vec<Option<f64>> {
    taus.iter()
        .map(|t| (!t.censored && t.value > 0.0).then(|| t.value.ln()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub n: i32,
    pub median_log_tau: MedianEstimate,
    /// `median(log τ) / N`.
    pub scaled: f64,
    pub scaled_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CInfinityFit {
    /// Least-squares line `median(log τ) ≈ intercept + ĉ∞ N`.
    pub fit: LinearFit,
    pub points: Vec<GrowthPoint>,
    /// `N` values left out because their median was censored.
    pub excluded: Vec<i32>,
    /// Adjacent pairs `(N_i, N_{i+1})` where `median(log τ)/N` drops significantly.
    pub significant_decreases: Vec<(i32, i32)>,
}

impl CInfinityFit {
    pub fn slope_ci(&self) -> (f64, f64) {
        (
            self.fit.slope - self.fit.slope_ci_half_width,
            self.fit.slope + self.fit.slope_ci_half_width,
        )
    }
}

/// Indices `i` with `(v_i - v_{i+1}) / sqrt(se_i² + se_{i+1}²)` above the one-sided 5% normal quantile.
pub fn significant_decreases(values: &[f64], stderrs: &[f64]) -> Vec<usize> {
    (0..values.len().saturating_sub(1))
        .filter(|&i| {
            let se = (stderrs[i].powi(2) + stderrs[i + 1].powi(2)).sqrt();
            let drop = values[i] - values[i + 1];
            if se > 0.0 {
                drop / se > Z95_ONE_SIDED
            } else {
                drop > 0.0
            }
        })
        .collect()
}

/// Fits `median(log τ)` against `N`. Each entry is `(N, samples at N)`.
pub fn fit_c_infinity(per_n: &[(i32, Vec<TimeSample>)]) -> Result<CInfinityFit> {
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    let mut sorted: Vec<&(i32, Vec<TimeSample>)> = per_n.iter().collect();
    sorted.sort_by_key(|(n, _)| *n);
    for (n, taus) in sorted {
        match censored_median(&log_values(taus)) {
            Some(m) => points.push(GrowthPoint {
                n: *n,
                median_log_tau: m,
                scaled: m.median / f64::from(*n),
                scaled_stderr: m.stderr / f64::from(*n),
            }),
            None => excluded.push(*n),
        }
    }
    if points.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            have: points.len(),
        });
    }
    let x: Vec<f64> = points.iter().map(|p| f64::from(p.n)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.median_log_tau.median).collect();
    let fit = least_squares(&x, &y)?;
    let scaled: Vec<f64> = points.iter().map(|p| p.scaled).collect();
    let se: Vec<f64> = points.iter().map(|p| p.scaled_stderr).collect();
    let significant_decreases = significant_decreases(&scaled, &se)
        .into_iter()
        .map(|i| (points[i].n, points[i + 1].n))
        .collect();
    Ok(CInfinityFit {
        fit,
        points,
        excluded,
        significant_decreases,
    })
}

/// Frequency of an event under one sampler of initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerFrequency {
    pub sampler: String,
    pub frequency: Frequency,
}

fn tally(labels: &[&str], per_replica: &[Vec<bool>], replicas: u64) -> Vec<SamplerFrequency> {
    labels
        .iter()
        .enumerate()
        .map(|(j, label)| SamplerFrequency {
            sampler: (*label).to_string(),
            frequency: Frequency::wilson(per_replica.iter().filter(|r| r[j]).count() as u64, replicas),
        })
        .collect()
}

/// Samplers used by [`regeneration_event_rate`].
pub const CLASSICAL_SAMPLERS: [&str; 3] = ["bernoulli_half", "singleton_middle", "full"];

/// Frequency of `{ξ^{1,N}_{a} ≠ ξ^{ξ₀,N}_{a}, T^{ξ₀}_N > a}` on `[1, N]`, per sampler of `ξ₀`.
///
/// `bernoulli_half` occupies each site independently with probability 1/2
/// (redrawn if empty), `singleton_middle` is `{⌈N/2⌉}`, `full` is `[1, N]`.
pub fn regeneration_event_rate(
    lambda: f64,
    range: u32,
    n: i32,
    a_n: f64,
    replicas: u64,
    master: u64,
) -> Result<Vec<SamplerFrequency>> {
    let region = SiteInterval::new(1, n)?;
    ConstructionParams::new(lambda, range, region, a_n, 0).validate()?;
    let per_replica = run_replicas(replicas, |i| {
        let seed = experiment_seed(master, "regeneration", n, i);
        let mut rng = aux_rng(seed);
        let bernoulli: Vec<i32> = loop {
            let v: Vec<i32> = region.sites().filter(|_| rng.random_bool(0.5)).collect();
            if !v.is_empty() {
                break v;
            }
        };
        let mut full = OccupancySweep::new(region, region.sites());
        let mut others = [
            OccupancySweep::new(region, bernoulli),
            OccupancySweep::new(region, [(n + 1) / 2]),
            OccupancySweep::new(region, region.sites()),
        ];
        for m in stream(lambda, range, region, a_n, seed).expect("validated") {
            full.apply(&m);
            for s in &mut others {
                s.apply(&m);
            }
        }
        others
            .iter()
            .map(|s| s.count() > 0 && s.occupied_slice() != full.occupied_slice())
            .collect::<Vec<bool>>()
    });
    Ok(tally(&CLASSICAL_SAMPLERS, &per_replica, replicas))
}

/// Samplers used by [`two_type_regeneration_rate`] and [`confinement_rate`].
pub const TWO_TYPE_SAMPLERS: [&str; 3] = ["uniform_c", "reference", "swapped"];

fn two_type_initials(n: i32, seed: u64) -> [Vec<Cell>; 3] {
    let mut rng = aux_rng(seed);
    [
        sample_uniform_c(n, &mut rng),
        InitialState::Reference.cells(n),
        InitialState::Swapped.cells(n),
    ]
}

/// Frequency of `{ζ^{1,2,N}_c ≠ ζ^{ζ₀,N}_c, τ^{ζ₀}_N >= c}` per sampler of `ζ₀ ∈ 𝒞`.
pub fn two_type_regeneration_rate(
    lambda: f64,
    range: u32,
    n: i32,
    c_n: f64,
    replicas: u64,
    master: u64,
) -> Result<Vec<SamplerFrequency>> {
    let region = arena(n)?;
    ConstructionParams::new(lambda, range, region, c_n, 0).validate()?;
    let per_replica = run_replicas(replicas, |i| {
        let seed = experiment_seed(master, "two-type-regeneration", n, i);
        let mut reference = TwoTypeSweep::from_cells(n, InitialState::Reference.cells(n));
        let mut others = two_type_initials(n, seed).map(|c| TwoTypeSweep::from_cells(n, c));
        for m in stream(lambda, range, region, c_n, seed).expect("validated") {
            reference.apply(&m);
            for s in &mut others {
                s.apply(&m);
            }
        }
        others
            .iter()
            .map(|s| s.extinct().is_none() && s.cells() != reference.cells())
            .collect::<Vec<bool>>()
    });
    Ok(tally(&TWO_TYPE_SAMPLERS, &per_replica, replicas))
}

/// Whether the type-2 set fits in `[1, N]` at some time up to `horizon`, and
/// whether both types are still alive at `horizon`.
fn confinement_run(mut sweep: TwoTypeSweep, marks: MarkStream, horizon: f64) -> (bool, bool) {
    if sweep.count(Cell::Two, false) == 0 {
        return (true, sweep.extinct().is_none());
    }
    for m in marks {
        if m.time > horizon {
            break;
        }
        if sweep.apply(&m).is_some() {
            if sweep.extinct().is_some() {
                return (sweep.count(Cell::Two, false) == 0, false);
            }
            if sweep.count(Cell::Two, false) == 0 {
                return (true, true);
            }
        }
    }
    (false, sweep.extinct().is_none())
}

/// Frequency of `{τ^{ζ₀}_N > horizon, no t <= horizon with {x : ζ_t(x) = 2} ⊆ [1, N]}`
/// per sampler of `ζ₀`.
pub fn confinement_rate(
    lambda: f64,
    range: u32,
    n: i32,
    horizon: f64,
    replicas: u64,
    master: u64,
) -> Result<Vec<SamplerFrequency>> {
    let region = arena(n)?;
    ConstructionParams::new(lambda, range, region, horizon, 0).validate()?;
    let per_replica = run_replicas(replicas, |i| {
        let seed = experiment_seed(master, "confinement", n, i);
        two_type_initials(n, seed)
            .into_iter()
            .map(|cells| {
                let marks = stream(lambda, range, region, horizon, seed).expect("validated");
                let (confined, alive) = confinement_run(TwoTypeSweep::from_cells(n, cells), marks, horizon);
                !confined && alive
            })
            .collect::<Vec<bool>>()
    });
    Ok(tally(&TWO_TYPE_SAMPLERS, &per_replica, replicas))
}

/// First entry times from the swapped start: `S₁` (type 2 reaches `[1, N]`)
/// and `Ŝ₁` (type 1 reaches `[-N+1, 0]`), `None` when censored by extinction
/// of the entering type or by `horizon`.
pub fn sample_first_entries(
    lambda: f64,
    range: u32,
    n: i32,
    horizon: f64,
    replicas: u64,
    master: u64,
) -> Result<Vec<(Option<f64>, Option<f64>)>> {
    let region = arena(n)?;
    ConstructionParams::new(lambda, range, region, horizon, 0).validate()?;
    Ok(run_replicas(replicas, |i| {
        let seed = experiment_seed(master, "entry", n, i);
        let mut sweep = TwoTypeSweep::from_cells(n, InitialState::Swapped.cells(n));
        let (mut s, mut s_hat) = (None, None);
        for m in stream(lambda, range, region, horizon, seed).expect("validated") {
            if sweep.apply(&m).is_none() {
                continue;
            }
            if s.is_none() && sweep.count(Cell::Two, true) > 0 {
                s = Some(m.time);
            }
            if s_hat.is_none() && sweep.count(Cell::One, false) > 0 {
                s_hat = Some(m.time);
            }
            let done_s = s.is_some() || sweep.total(Cell::Two) == 0;
            let done_hat = s_hat.is_some() || sweep.total(Cell::One) == 0;
            if done_s && done_hat {
                break;
            }
        }
        (s, s_hat)
    }))
}
