//! The classical (one-type) contact process read off a Harris construction:
//! restricted evolution, extinction times, and the rightmost edge.

use std::borrow::Borrow;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::farm::run_replicas;
use crate::harris::{ConstructionParams, HarrisConstruction, Mark, MarkStream, OccupancySweep, SiteInterval};
use crate::seed::replica_seed;
use crate::stats::{TimeSample, Z95};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub region: SiteInterval,
    pub occupied: BTreeSet<i32>,
    pub time: f64,
}

/// `ξ^{A, region}_until`: the process started from `initial` at time 0 and
/// restricted to `region`.
pub fn evolve_classical(
    h: &HarrisConstruction,
    initial: &BTreeSet<i32>,
    region: SiteInterval,
    until: f64,
) -> Result<ClassicalState> {
    let occupied = h.reachable(initial, 0.0, until, region)?;
    Ok(ClassicalState {
        region,
        occupied,
        time: until,
    })
}

/// First time the process restricted to `region` is empty, or a censored
/// sample at `horizon` if it survives every mark up to then.
pub fn extinction_time<M, I>(marks: I, initial: &BTreeSet<i32>, region: SiteInterval, horizon: f64) -> TimeSample
where
    M: Borrow<Mark>,
    I: IntoIterator<Item = M>,
{
    let mut sweep = OccupancySweep::new(region, initial.iter().copied());
    if sweep.count() == 0 {
        return TimeSample::observed(0.0);
    }
    for m in marks {
        let m = m.borrow();
        if m.time > horizon {
            break;
        }
        if sweep.apply(m) && sweep.count() == 0 {
            return TimeSample::observed(m.time);
        }
    }
    TimeSample::censored(horizon)
}

/// Default left truncation for the half-line initial condition `(-inf, 0]`.
pub fn default_truncation_lo(lambda: f64, range: u32, t_max: f64) -> i32 {
    -(((f64::from(range) * lambda + 1.0) * t_max).ceil() as i32) - 50
}

/// Upper bound on the edge speed: the rate at which arrows from sites at or
/// behind the rightmost particle land beyond it, weighted by the overshoot,
/// `lambda * sum_{j<R} sum_{d>j}^{R} (d - j) = lambda * R(R+1)(R+2)/6`.
pub fn edge_speed_bound(lambda: f64, range: u32) -> f64 {
    let r = f64::from(range);
    lambda * r * (r + 1.0) * (r + 2.0) / 6.0
}

/// Right end of a window wide enough for the rightmost edge up to `t_max`.
pub fn default_window_hi(lambda: f64, range: u32, t_max: f64) -> i32 {
    ((edge_speed_bound(lambda, range) + 1.0) * t_max).ceil() as i32 + 50
}

/// `r_until` for the process started from `[truncation_lo, 0]` on the whole window.
pub fn rightmost_edge(h: &HarrisConstruction, truncation_lo: i32, until: f64) -> Result<i32> {
    let window = h.window();
    if !window.contains(truncation_lo) || !window.contains(0) || truncation_lo > 0 {
        return Err(Error::Domain(format!(
            "[{truncation_lo}, 0] must lie in the window [{}, {}]",
            window.lo(),
            window.hi()
        )));
    }
    if !(0.0..=h.t_max()).contains(&until) {
        return Err(Error::Domain(format!("until {until} outside [0, t_max]")));
    }
    let mut sweep = OccupancySweep::new(window, truncation_lo..=0);
    sweep.run_from(0.0, h.marks_between(0.0, until));
    sweep
        .max_occupied()
        .ok_or(Error::TruncationFailure { truncation_lo })
}

fn streamed_rightmost_edge(params: ConstructionParams, truncation_lo: i32) -> Result<Option<i32>> {
    let mut sweep = OccupancySweep::new(params.window(), truncation_lo..=0);
    for m in MarkStream::new(params)? {
        if sweep.apply(&m) && sweep.count() == 0 {
            return Ok(None);
        }
    }
    Ok(sweep.max_occupied())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpeedEstimate {
    pub alpha_hat: f64,
    pub ci_half_width: f64,
    pub t_max: f64,
    pub replicas: usize,
    /// Replicas that died out before `t_max` and were left out of the mean.
    pub excluded: usize,
    /// Set when more than 10% of the replicas were excluded.
    pub warning: bool,
}

/// Monte Carlo estimate of the edge speed `alpha` from `r_{t_max} / t_max`.
pub fn estimate_edge_speed(
    lambda: f64,
    range: u32,
    t_max: f64,
    replicas: usize,
    seed: u64,
) -> Result<EdgeSpeedEstimate> {
    if replicas == 0 {
        return Err(invalid("replicas", "must be >= 1"));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid("t_max", "must be finite and > 0"));
    }
    let lo = default_truncation_lo(lambda, range, t_max);
    let hi = default_window_hi(lambda, range, t_max);
    let window = SiteInterval::new(lo, hi)?;
    let speeds: Vec<Option<f64>> = run_replicas(replicas as u64, |i| {
        let params = ConstructionParams::new(lambda, range, window, t_max, replica_seed(seed, i));
        streamed_rightmost_edge(params, lo)
            .expect("parameters validated above")
            .map(|r| f64::from(r) / t_max)
    })
    .into_iter()
    .collect();
    let kept: Vec<f64> = speeds.iter().flatten().copied().collect();
    let excluded = replicas - kept.len();
    if kept.is_empty() {
        return Err(Error::AllExcluded { replicas });
    }
    let k = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / k;
    let var = if kept.len() > 1 {
        kept.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(EdgeSpeedEstimate {
        alpha_hat: mean,
        ci_half_width: Z95 * (var / k).sqrt(),
        t_max,
        replicas,
        excluded,
        warning: excluded * 10 > replicas,
    })
}
