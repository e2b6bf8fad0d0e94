//! The Harris graphical construction.
//!
//! Every site of a finite window carries a rate-1 Poisson process of recovery
//! marks and every ordered pair `(x, y)` with `0 < |x - y| <= R` inside the
//! window carries a rate-`lambda` Poisson process of infection arrows. All
//! processes in this crate are deterministic functions of these marks, which
//! is what makes the couplings between them exact.
//!
//! Marks are available in two modes:
//!
//! * [`MarkStream`] yields them lazily in time order and never stores them;
//! * [`HarrisConstruction`] materializes the stream up to `t_max`.
//!
//! Both read the same per-channel random streams, so a stored construction is
//! exactly the prefix of the stream with the same parameters.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::seed::channel_rng;

/// Default bound on the expected number of marks of a stored construction.
pub const DEFAULT_MARK_CAP: f64 = 1e9;

/// A nonempty closed interval of integer sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteInterval {
    lo: i32,
    hi: i32,
}

impl SiteInterval {
    pub fn new(lo: i32, hi: i32) -> Result<Self> {
        if lo > hi {
            return Err(invalid("interval", format!("lo {lo} > hi {hi}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (i64::from(self.hi) - i64::from(self.lo) + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: i32) -> bool {
        self.lo <= site && site <= self.hi
    }

    pub fn contains_interval(&self, other: &SiteInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Offset of `site` from `lo`; caller guarantees membership.
    #[inline]
    pub fn index(&self, site: i32) -> usize {
        (site - self.lo) as usize
    }

    pub fn sites(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }

    /// The interval re-indexed with `by` as the new origin (every site minus `by`).
    pub fn shifted(&self, by: i32) -> SiteInterval {
        SiteInterval {
            lo: self.lo - by,
            hi: self.hi - by,
        }
    }
}

/// A point `(site, time)` of space-time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub site: i32,
    pub time: f64,
}

impl SpaceTimePoint {
    pub fn new(site: i32, time: f64) -> Self {
        Self { site, time }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarkKind {
    Recovery { site: i32 },
    Arrow { source: i32, target: i32 },
}

impl MarkKind {
    /// (kind rank, site, target) used to break timestamp ties.
    fn key(&self) -> (u8, i32, i32) {
        match *self {
            MarkKind::Recovery { site } => (0, site, 0),
            MarkKind::Arrow { source, target } => (1, source, target),
        }
    }

    fn translated(&self, by: i32) -> MarkKind {
        match *self {
            MarkKind::Recovery { site } => MarkKind::Recovery { site: site - by },
            MarkKind::Arrow { source, target } => MarkKind::Arrow {
                source: source - by,
                target: target - by,
            },
        }
    }
}

/// A recovery cross or an infection arrow at a given time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mark {
    pub time: f64,
    pub kind: MarkKind,
}

impl Mark {
    pub fn recovery(time: f64, site: i32) -> Self {
        Self {
            time,
            kind: MarkKind::Recovery { site },
        }
    }

    pub fn arrow(time: f64, source: i32, target: i32) -> Self {
        Self {
            time,
            kind: MarkKind::Arrow { source, target },
        }
    }

    /// Total order on marks: time, then Recovery before Arrow, then site, then target.
    pub fn total_cmp(&self, other: &Mark) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.kind.key().cmp(&other.kind.key()))
    }
}

/// Generation parameters of a Harris construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    /// Infection rate per ordered neighbor pair.
    pub lambda: f64,
    /// Interaction range `R >= 1`.
    pub range: u32,
    pub window_lo: i32,
    pub window_hi: i32,
    /// Time horizon; may be infinite for streaming.
    pub t_max: f64,
    pub seed: u64,
}

impl ConstructionParams {
    pub fn new(lambda: f64, range: u32, window: SiteInterval, t_max: f64, seed: u64) -> Self {
        Self {
            lambda,
            range,
            window_lo: window.lo(),
            window_hi: window.hi(),
            t_max,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be finite and >= 0, got {}", self.lambda)));
        }
        if self.range < 1 {
            return Err(invalid("range", "must be >= 1"));
        }
        if self.window_lo > self.window_hi {
            return Err(invalid(
                "window",
                format!("window_lo {} > window_hi {}", self.window_lo, self.window_hi),
            ));
        }
        if !(self.t_max >= 0.0) {
            return Err(invalid("t_max", format!("must be >= 0, got {}", self.t_max)));
        }
        Ok(())
    }

    pub fn window(&self) -> SiteInterval {
        SiteInterval {
            lo: self.window_lo,
            hi: self.window_hi,
        }
    }

    /// Number of ordered pairs `(x, y)` inside the window with `0 < |x - y| <= R`.
    pub fn arrow_pairs(&self) -> u64 {
        let n = self.window().len() as u64;
        (1..=u64::from(self.range))
            .map(|d| 2 * n.saturating_sub(d))
            .sum()
    }

    /// Expected number of marks on `[0, t_max]`.
    pub fn expected_marks(&self) -> f64 {
        let n = self.window().len() as f64;
        (n + self.lambda * self.arrow_pairs() as f64) * self.t_max
    }
}

/// Channel table: recovery channels first (ascending site), then arrow
/// channels in ascending (source, target). Arrow channels are omitted when
/// `lambda == 0`. Channel order equals the tie-breaking order of [`Mark::total_cmp`].
#[derive(Debug, Clone)]
struct ChannelTable {
    kinds: Vec<MarkKind>,
    rates: Vec<f64>,
}

impl ChannelTable {
    fn new(params: &ConstructionParams) -> Self {
        let window = params.window();
        let r = params.range as i32;
        let mut kinds: Vec<MarkKind> = window.sites().map(|site| MarkKind::Recovery { site }).collect();
        let mut rates = vec![1.0; kinds.len()];
        if params.lambda > 0.0 {
            for source in window.sites() {
                for target in (source - r)..=(source + r) {
                    if target != source && window.contains(target) {
                        kinds.push(MarkKind::Arrow { source, target });
                        rates.push(params.lambda);
                    }
                }
            }
        }
        Self { kinds, rates }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    time: f64,
    channel: u32,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // Reversed: BinaryHeap is a max-heap and we want the earliest mark on top.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.channel.cmp(&self.channel))
    }
}

/// Lazily generated, time-ordered marks of a construction.
///
/// Each channel draws exponential inter-arrival times from its own random
/// stream; a heap merges the channels. Yields every mark with time `<= t_max`.
#[derive(Debug, Clone)]
pub struct MarkStream {
    params: ConstructionParams,
    table: ChannelTable,
    rngs: Vec<ChaCha8Rng>,
    heap: BinaryHeap<Pending>,
}

impl MarkStream {
    pub fn new(params: ConstructionParams) -> Result<Self> {
        params.validate()?;
        let table = ChannelTable::new(&params);
        let mut rngs: Vec<ChaCha8Rng> = (0..table.kinds.len())
            .map(|c| channel_rng(params.seed, c as u64))
            .collect();
        let mut heap = BinaryHeap::with_capacity(table.kinds.len());
        for (c, rng) in rngs.iter_mut().enumerate() {
            let gap: f64 = Exp1.sample(rng);
            heap.push(Pending {
                time: gap / table.rates[c],
                channel: c as u32,
            });
        }
        Ok(Self {
            params,
            table,
            rngs,
            heap,
        })
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }
}

impl Iterator for MarkStream {
    type Item = Mark;

    #[inline]
    fn next(&mut self) -> Option<Mark> {
        let mut top = self.heap.peek_mut()?;
        if top.time > self.params.t_max {
            return None;
        }
        let c = top.channel as usize;
        let mark = Mark {
            time: top.time,
            kind: self.table.kinds[c],
        };
        let gap: f64 = Exp1.sample(&mut self.rngs[c]);
        top.time += gap / self.table.rates[c];
        Some(mark)
    }
}

/// A stored Harris construction: all marks on the window up to `t_max`, sorted
/// by [`Mark::total_cmp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarrisConstruction {
    params: ConstructionParams,
    marks: Vec<Mark>,
}

impl HarrisConstruction {
    /// Generates a stored construction, refusing requests whose expected mark
    /// count exceeds [`DEFAULT_MARK_CAP`].
    pub fn generate(params: ConstructionParams) -> Result<Self> {
        Self::generate_with_cap(params, DEFAULT_MARK_CAP)
    }

    pub fn generate_with_cap(params: ConstructionParams, cap: f64) -> Result<Self> {
        params.validate()?;
        let expected = params.expected_marks();
        if !(expected <= cap) {
            return Err(Error::Capacity {
                expected_marks: expected,
                cap,
            });
        }
        let marks: Vec<Mark> = MarkStream::new(params)?.collect();
        Ok(Self { params, marks })
    }

    /// Builds a construction from explicit marks (fixtures, loaded dumps).
    ///
    /// Marks are sorted by the total order; every mark must lie in the window
    /// and in `[0, t_max]`, and arrows must respect the range.
    pub fn from_marks(params: ConstructionParams, mut marks: Vec<Mark>) -> Result<Self> {
        params.validate()?;
        let window = params.window();
        let r = params.range as i32;
        for m in &marks {
            if !(m.time >= 0.0 && m.time <= params.t_max) {
                return Err(Error::Domain(format!("mark time {} outside [0, t_max]", m.time)));
            }
            match m.kind {
                MarkKind::Recovery { site } => {
                    if !window.contains(site) {
                        return Err(Error::Domain(format!("recovery site {site} outside window")));
                    }
                }
                MarkKind::Arrow { source, target } => {
                    if !window.contains(source) || !window.contains(target) {
                        return Err(Error::Domain(format!(
                            "arrow {source}->{target} outside window"
                        )));
                    }
                    let d = (source - target).abs();
                    if d == 0 || d > r {
                        return Err(Error::Domain(format!(
                            "arrow {source}->{target} violates 0 < |x-y| <= {r}"
                        )));
                    }
                }
            }
        }
        marks.sort_by(Mark::total_cmp);
        Ok(Self { params, marks })
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn window(&self) -> SiteInterval {
        self.params.window()
    }

    pub fn t_max(&self) -> f64 {
        self.params.t_max
    }

    pub fn marks(&self) -> &[Mark] {
        &self.marks
    }

    /// Marks with `start <= time <= end`.
    pub fn marks_between(&self, start: f64, end: f64) -> &[Mark] {
        let a = self.marks.partition_point(|m| m.time < start);
        let b = self.marks.partition_point(|m| m.time <= end);
        &self.marks[a..b.max(a)]
    }

    /// `Θ_origin`: moves `origin` to `(0, 0)` and drops the marks before `origin.time`.
    pub fn shift(&self, origin: SpaceTimePoint) -> Result<Self> {
        if !(origin.time >= 0.0 && origin.time <= self.params.t_max) {
            return Err(Error::Domain(format!(
                "shift time {} outside [0, t_max = {}]",
                origin.time, self.params.t_max
            )));
        }
        let window = self.window().shifted(origin.site);
        let params = ConstructionParams {
            window_lo: window.lo(),
            window_hi: window.hi(),
            t_max: self.params.t_max - origin.time,
            ..self.params
        };
        let from = self.marks.partition_point(|m| m.time < origin.time);
        let marks = self.marks[from..]
            .iter()
            .map(|m| Mark {
                time: m.time - origin.time,
                kind: m.kind.translated(origin.site),
            })
            .collect();
        Ok(Self { params, marks })
    }

    fn check_query(&self, start: f64, end: f64, region: SiteInterval) -> Result<()> {
        if !self.window().contains_interval(&region) {
            return Err(Error::Domain(format!(
                "region [{}, {}] not within window [{}, {}]",
                region.lo(),
                region.hi(),
                self.params.window_lo,
                self.params.window_hi
            )));
        }
        if !(start >= 0.0 && start <= end && end <= self.params.t_max) {
            return Err(Error::Domain(format!(
                "need 0 <= start <= end <= t_max, got start {start}, end {end}, t_max {}",
                self.params.t_max
            )));
        }
        Ok(())
    }

    /// Sites `y` such that some `(x, start)`, `x` in `sources`, is joined to
    /// `(y, end)` by a path staying inside `region`.
    pub fn reachable(
        &self,
        sources: &BTreeSet<i32>,
        start: f64,
        end: f64,
        region: SiteInterval,
    ) -> Result<BTreeSet<i32>> {
        self.check_query(start, end, region)?;
        if let Some(&x) = sources.iter().find(|&&x| !region.contains(x)) {
            return Err(Error::Domain(format!("source {x} outside region")));
        }
        let mut sweep = OccupancySweep::new(region, sources.iter().copied());
        sweep.run_from(start, self.marks_between(start, end));
        Ok(sweep.occupied())
    }

    /// Whether `from` is joined to `to` by a path inside `region`.
    pub fn path_exists(&self, from: SpaceTimePoint, to: SpaceTimePoint, region: SiteInterval) -> Result<bool> {
        if to.time < from.time {
            return Err(Error::Domain(format!(
                "path must go forward in time: {} < {}",
                to.time, from.time
            )));
        }
        if !region.contains(to.site) {
            self.check_query(from.time, to.time, region)?;
            return Ok(false);
        }
        let sources = BTreeSet::from([from.site]);
        Ok(self.reachable(&sources, from.time, to.time, region)?.contains(&to.site))
    }
}

/// Forward sweep of the set of sites reachable inside a region.
///
/// A recovery mark empties its site; an arrow from an occupied site into the
/// region occupies its target. This is the classical contact process
/// restricted to `region` and, equivalently, path reachability.
#[derive(Debug, Clone)]
pub struct OccupancySweep {
    region: SiteInterval,
    occupied: Vec<bool>,
    count: usize,
}

impl OccupancySweep {
    pub fn new(region: SiteInterval, initial: impl IntoIterator<Item = i32>) -> Self {
        let mut occupied = vec![false; region.len()];
        let mut count = 0;
        for x in initial {
            if region.contains(x) && !occupied[region.index(x)] {
                occupied[region.index(x)] = true;
                count += 1;
            }
        }
        Self {
            region,
            occupied,
            count,
        }
    }

    pub fn region(&self) -> SiteInterval {
        self.region
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_occupied(&self, site: i32) -> bool {
        self.region.contains(site) && self.occupied[self.region.index(site)]
    }

    /// Applies one mark; returns `true` if the occupied set changed.
    #[inline]
    pub fn apply(&mut self, mark: &Mark) -> bool {
        match mark.kind {
            MarkKind::Recovery { site } => {
                if self.region.contains(site) {
                    let i = self.region.index(site);
                    if self.occupied[i] {
                        self.occupied[i] = false;
                        self.count -= 1;
                        return true;
                    }
                }
                false
            }
            MarkKind::Arrow { source, target } => {
                if self.region.contains(source) && self.region.contains(target) {
                    let (s, t) = (self.region.index(source), self.region.index(target));
                    if self.occupied[s] && !self.occupied[t] {
                        self.occupied[t] = true;
                        self.count += 1;
                        return true;
                    }
                }
                false
            }
        }
    }

    /// Applies marks that follow a start time `start`. An arrow exactly at
    /// `start` is skipped: a path sits at its initial site at its start time.
    pub fn run_from<'a>(&mut self, start: f64, marks: impl IntoIterator<Item = &'a Mark>) {
        for m in marks {
            if m.time == start && matches!(m.kind, MarkKind::Arrow { .. }) {
                continue;
            }
            self.apply(m);
        }
    }

    pub fn occupied(&self) -> BTreeSet<i32> {
        self.region
            .sites()
            .filter(|&x| self.occupied[self.region.index(x)])
            .collect()
    }

    pub fn occupied_slice(&self) -> &[bool] {
        &self.occupied
    }

    pub fn max_occupied(&self) -> Option<i32> {
        self.occupied
            .iter()
            .rposition(|&o| o)
            .map(|i| self.region.lo() + i as i32)
    }
}
