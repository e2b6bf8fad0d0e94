//! Renormalization: the box geometry, N-barriers, the fields `Φ`/`Ψ` on the
//! lattice `Λ = {(m, n) : m + n even, n >= 0}`, and open-path connectivity.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::farm::run_replicas;
use crate::harris::{ConstructionParams, HarrisConstruction, Mark, MarkKind, MarkStream, OccupancySweep, SiteInterval};
use crate::seed::replica_seed;
use crate::stats::ProportionEstimate;
use crate::two_type::arena;

/// Integer sites `x` with `lo2 <= 2x <= hi2` (bounds given doubled).
fn doubled_range(lo2: i64, hi2: i64) -> Option<SiteInterval> {
    let lo = lo2.div_euclid(2) + i64::from(lo2.rem_euclid(2) != 0);
    let hi = hi2.div_euclid(2);
    (lo <= hi).then(|| SiteInterval::new(lo as i32, hi as i32).expect("lo <= hi"))
}

/// Box sizes `N̂`, `K̂`, the edge speed `α̂` and the interaction range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGeometry {
    pub n_hat: u32,
    pub k_hat: u32,
    pub alpha_hat: f64,
    pub range: u32,
}

impl BoxGeometry {
    pub fn new(n_hat: u32, k_hat: u32, alpha_hat: f64, range: u32) -> Result<Self> {
        if n_hat == 0 {
            return Err(invalid("n_hat", "must be >= 1"));
        }
        if k_hat == 0 {
            return Err(invalid("k_hat", "must be >= 1"));
        }
        if !(alpha_hat >= 0.0 && alpha_hat.is_finite()) {
            return Err(invalid("alpha_hat", "must be finite and >= 0"));
        }
        if range == 0 {
            return Err(invalid("range", "must be >= 1"));
        }
        Ok(Self {
            n_hat,
            k_hat,
            alpha_hat,
            range,
        })
    }

    /// Time height `K̂N̂` of one box.
    pub fn box_time(&self) -> f64 {
        f64::from(self.k_hat * self.n_hat)
    }

    /// `𝓘_m`: the `N̂` sites of `(mN̂/2 - N̂/2, mN̂/2 + N̂/2]`.
    pub fn interval(&self, m: i32) -> SiteInterval {
        let nh = i64::from(self.n_hat);
        let c = i64::from(m) * nh;
        doubled_range(c - nh + 1, c + nh).expect("N̂ >= 1")
    }

    /// `𝓘_{m-1} ∪ 𝓘_{m+1}`, a run of `2N̂` sites.
    pub fn base_union(&self, m: i32) -> SiteInterval {
        let (a, b) = (self.interval(m - 1), self.interval(m + 1));
        SiteInterval::new(a.lo(), b.hi()).expect("adjacent intervals")
    }

    /// Sites of the corridor `J`: `|x - mN̂/2| < R`.
    pub fn corridor(&self, m: i32) -> SiteInterval {
        let c = i64::from(m) * i64::from(self.n_hat);
        let r2 = 2 * i64::from(self.range);
        doubled_range(c - r2 + 1, c + r2 - 1).expect("R >= 1")
    }

    fn envelope_half_width(&self) -> f64 {
        2.0 * self.alpha_hat * self.box_time()
    }

    /// Sites of the envelope `[mN̂/2 - 2α̂K̂N̂, mN̂/2 + 2α̂K̂N̂]`, `None` if it holds no site.
    pub fn envelope(&self, m: i32) -> Option<SiteInterval> {
        let c = f64::from(m) * f64::from(self.n_hat) / 2.0;
        let w = self.envelope_half_width();
        let (lo, hi) = ((c - w).ceil(), (c + w).floor());
        (lo <= hi).then(|| SiteInterval::new(lo as i32, hi as i32).expect("lo <= hi"))
    }

    /// Extra sites kept around every envelope to stand in for the full line.
    pub fn margin(&self) -> i32 {
        (2.0 * self.envelope_half_width()).ceil() as i32
    }

    /// Length of the intervals in the density condition, `⌈√N̂⌉`.
    pub fn density_interval_len(&self) -> usize {
        (f64::from(self.n_hat).sqrt().ceil() as usize).max(1)
    }

    fn floor_alpha_term(&self) -> i64 {
        (4.0 * self.alpha_hat * self.box_time()).floor() as i64
    }

    /// `M(N) = floor(2(N - 2α̂K̂N̂)/N̂)`.
    pub fn m_of(&self, n: i32) -> i64 {
        (2.0 * (f64::from(n) - self.envelope_half_width()) / f64::from(self.n_hat)).floor() as i64
    }

    /// `S(N) = K̂N̂M² + 2`.
    pub fn s_of(&self, n: i32) -> f64 {
        let m = self.m_of(n) as f64;
        self.box_time() * m * m + 2.0
    }

    /// Regeneration block length `a_N = (K̂N̂M² + 3)N`.
    pub fn a_of(&self, n: i32) -> f64 {
        (self.s_of(n) + 1.0) * f64::from(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `[-N+1, 0]`, where type 1 has priority.
    Left,
    /// `[1, N]`, where type 2 has priority.
    Right,
}

impl Side {
    pub fn interval(self, n: i32) -> SiteInterval {
        match self {
            Side::Left => SiteInterval::new(-n + 1, 0),
            Side::Right => SiteInterval::new(1, n),
        }
        .expect("n >= 1")
    }
}

/// Geometry for one interval size `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormParams {
    pub geometry: BoxGeometry,
    pub n: i32,
    /// Dependence range `k` of the percolation system; used for separation only.
    pub k_dep: u32,
}

impl RenormParams {
    pub fn new(geometry: BoxGeometry, n: i32, k_dep: u32) -> Result<Self> {
        arena(n)?;
        if geometry.m_of(n) < 1 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: format!(
                    "M(N) = {} < 1 for N = {n}, N̂ = {}, K̂ = {}, α̂ = {}",
                    geometry.m_of(n),
                    geometry.n_hat,
                    geometry.k_hat,
                    geometry.alpha_hat
                ),
            });
        }
        Ok(Self { geometry, n, k_dep })
    }

    pub fn m(&self) -> i64 {
        self.geometry.m_of(self.n)
    }

    pub fn s(&self) -> f64 {
        self.geometry.s_of(self.n)
    }

    /// `ı(N)`: `floor(4α̂K̂N̂)`, plus one when `M² + floor(4α̂K̂N̂)` is odd.
    pub fn imath(&self) -> i64 {
        let f = self.geometry.floor_alpha_term();
        let m = self.m();
        if (m * m + f) % 2 == 0 {
            f
        } else {
            f + 1
        }
    }

    /// `A₂ = [ıN̂/2 - N̂/2, MN̂/2 + N̂/2] ∩ [1, N]`, `None` if empty.
    pub fn a2(&self) -> Option<SiteInterval> {
        let nh = i64::from(self.geometry.n_hat);
        let r = doubled_range((self.imath() - 1) * nh, (self.m() + 1) * nh)?;
        SiteInterval::new(r.lo().max(1), r.hi().min(self.n)).ok()
    }

    /// `A₄ = [-MN̂/2 - N̂/2, -ıN̂/2 + N̂/2] ∩ [-N+1, 0]`, `None` if empty.
    pub fn a4(&self) -> Option<SiteInterval> {
        let nh = i64::from(self.geometry.n_hat);
        let r = doubled_range(-(self.m() + 1) * nh, -(self.imath() - 1) * nh)?;
        SiteInterval::new(r.lo().max(-self.n + 1), r.hi().min(0)).ok()
    }

    pub fn a_n(&self) -> f64 {
        self.geometry.a_of(self.n)
    }
}

fn check_barrier_construction(h: &HarrisConstruction, n: i32, s: f64) -> Result<()> {
    let ambient = arena(n)?;
    if !h.window().contains_interval(&ambient) {
        return Err(Error::Domain(format!(
            "construction window [{}, {}] does not cover [{}, {n}]",
            h.window().lo(),
            h.window().hi(),
            -n + 1
        )));
    }
    if h.t_max() < s {
        return Err(Error::Domain(format!("construction horizon {} < S = {s}", h.t_max())));
    }
    Ok(())
}

/// Whether `(x, 0)` is an N-barrier for `side`.
///
/// With `A` the sites of the side interval reached at time `S` from the whole
/// side interval at time 0 by paths inside `[-N+1, N]`, and `B` the sites
/// reached from `(x, 0)` by paths inside the side interval, `(x, 0)` is a
/// barrier iff `A ⊆ B`.
pub fn is_n_barrier(h: &HarrisConstruction, x: i32, side: Side, params: &RenormParams) -> Result<bool> {
    let (n, s) = (params.n, params.s());
    check_barrier_construction(h, n, s)?;
    let own = side.interval(n);
    if !own.contains(x) {
        return Err(Error::Domain(format!("site {x} not in [{}, {}]", own.lo(), own.hi())));
    }
    let ambient = arena(n)?;
    let a: BTreeSet<i32> = h
        .reachable(&own.sites().collect(), 0.0, s, ambient)?
        .into_iter()
        .filter(|&y| own.contains(y))
        .collect();
    let b = h.reachable(&BTreeSet::from([x]), 0.0, s, own)?;
    Ok(a.is_subset(&b))
}

/// Barrier status of up to 64 sites on one mark sequence in a single sweep.
///
/// Bit `j` of the per-site mask tracks reachability from `sites[j]` inside the
/// side interval; the ambient sweep tracks `A`.
pub fn barrier_flags<M, I>(marks: I, n: i32, side: Side, sites: &[i32], s: f64) -> Result<Vec<bool>>
where
    M: Borrow<Mark>,
    I: IntoIterator<Item = M>,
{
    if sites.len() > 64 {
        return Err(Error::Domain(format!("at most 64 sites per sweep, got {}", sites.len())));
    }
    let own = side.interval(n);
    let ambient = arena(n)?;
    if let Some(x) = sites.iter().find(|&&x| !own.contains(x)) {
        return Err(Error::Domain(format!("site {x} not in [{}, {}]", own.lo(), own.hi())));
    }
    let mut masks = vec![0u64; own.len()];
    for (j, &x) in sites.iter().enumerate() {
        masks[own.index(x)] |= 1 << j;
    }
    let mut survivors = OccupancySweep::new(ambient, own.sites());
    for m in marks {
        let m = m.borrow();
        if m.time > s {
            break;
        }
        survivors.apply(m);
        match m.kind {
            MarkKind::Recovery { site } if own.contains(site) => masks[own.index(site)] = 0,
            MarkKind::Arrow { source, target } if own.contains(source) && own.contains(target) => {
                masks[own.index(target)] |= masks[own.index(source)];
            }
            _ => {}
        }
    }
    let mut all = if sites.len() == 64 { u64::MAX } else { (1u64 << sites.len()) - 1 };
    for y in own.sites() {
        if survivors.is_occupied(y) {
            all &= masks[own.index(y)];
        }
    }
    Ok((0..sites.len()).map(|j| all & (1 << j) != 0).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteBarrier {
    pub site: i32,
    pub hits: u64,
    pub estimate: ProportionEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierEstimate {
    pub params: RenormParams,
    pub side: Side,
    pub lambda: f64,
    pub replicas: u64,
    pub sites: Vec<SiteBarrier>,
}

impl BarrierEstimate {
    /// The site with the smallest estimate.
    pub fn min_site(&self) -> Option<&SiteBarrier> {
        self.sites
            .iter()
            .min_by(|a, b| a.estimate.estimate.total_cmp(&b.estimate.estimate))
    }
}

/// Monte Carlo barrier probabilities per site. Every replica draws one
/// construction on `[-N+1, N] × [0, S]` and scores all sites on it.
pub fn estimate_barrier_probability(
    lambda: f64,
    params: &RenormParams,
    side: Side,
    sites: &[i32],
    replicas: u64,
    seed: u64,
) -> Result<BarrierEstimate> {
    if replicas == 0 {
        return Err(invalid("replicas", "must be >= 1"));
    }
    if sites.is_empty() {
        return Err(invalid("sites", "must not be empty"));
    }
    let (n, s) = (params.n, params.s());
    let own = side.interval(n);
    if let Some(x) = sites.iter().find(|&&x| !own.contains(x)) {
        return Err(Error::Domain(format!("site {x} not in [{}, {}]", own.lo(), own.hi())));
    }
    let base = ConstructionParams::new(lambda, params.geometry.range, arena(n)?, s, 0);
    base.validate()?;
    let per_replica = run_replicas(replicas, |i| {
        let p = ConstructionParams {
            seed: replica_seed(seed, i),
            ..base
        };
        let mut flags = Vec::with_capacity(sites.len());
        for chunk in sites.chunks(64) {
            let stream = MarkStream::new(p).expect("validated above");
            flags.extend(barrier_flags(stream, n, side, chunk, s).expect("sites checked above"));
        }
        flags
    });
    let mut hits = vec![0u64; sites.len()];
    for flags in &per_replica {
        for (h, &f) in hits.iter_mut().zip(flags) {
            *h += u64::from(f);
        }
    }
    Ok(BarrierEstimate {
        params: *params,
        side,
        lambda,
        replicas,
        sites: sites
            .iter()
            .zip(hits)
            .map(|(&site, hits)| SiteBarrier {
                site,
                hits,
                estimate: ProportionEstimate::normal(hits, replicas),
            })
            .collect(),
    })
}

/// Columns `m_lo..=m_hi` and rows `0..rows` of `Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldWindow {
    pub m_lo: i32,
    pub m_hi: i32,
    pub rows: u32,
}

/// Outcome of the four box conditions, in the order density, top, corridor, envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxConditions {
    pub density: bool,
    pub top: bool,
    pub corridor: bool,
    pub envelope: bool,
}

impl BoxConditions {
    pub fn all(&self) -> bool {
        self.density && self.top && self.corridor && self.envelope
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldCell {
    pub m: i32,
    pub n: u32,
    pub phi: u8,
    pub psi: u8,
    pub boundary_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormField {
    pub geometry: BoxGeometry,
    pub window: FieldWindow,
    /// Cells sorted by row, then column.
    pub cells: Vec<FieldCell>,
}

impl RenormField {
    /// A field with prescribed `Ψ` values and `Φ = Ψ`, for connectivity queries.
    pub fn from_psi(geometry: BoxGeometry, window: FieldWindow, psi: impl Fn(i32, u32) -> bool) -> Self {
        let mut cells = Vec::new();
        for n in 0..window.rows {
            for m in window.m_lo..=window.m_hi {
                if (i64::from(m) + i64::from(n)) % 2 == 0 {
                    let v = u8::from(psi(m, n));
                    cells.push(FieldCell {
                        m,
                        n,
                        phi: v,
                        psi: v,
                        boundary_flag: false,
                    });
                }
            }
        }
        Self {
            geometry,
            window,
            cells,
        }
    }

    pub fn get(&self, m: i32, n: u32) -> Option<&FieldCell> {
        self.cells
            .binary_search_by(|c| (c.n, c.m).cmp(&(n, m)))
            .ok()
            .map(|i| &self.cells[i])
    }

    pub fn psi(&self, m: i32, n: u32) -> bool {
        self.get(m, n).is_some_and(|c| c.psi == 1)
    }

    pub fn row(&self, n: u32) -> impl Iterator<Item = &FieldCell> {
        self.cells.iter().filter(move |c| c.n == n)
    }
}

/// Checks the four conditions for box `(m, n)` started from `start` (the
/// full-line process at time `K̂N̂n`, truncated to the window).
fn box_conditions(h: &HarrisConstruction, g: &BoxGeometry, m: i32, n: u32, start: &[bool]) -> BoxConditions {
    let window = h.window();
    let l = g.box_time();
    let (t0, t1) = (l * f64::from(n), l * f64::from(n + 1));
    let u = g.base_union(m);
    let j = g.corridor(m);
    let base = g.interval(m);
    let occupied_start: Vec<i32> = window.sites().filter(|&x| start[window.index(x)]).collect();
    let mut eta = OccupancySweep::new(window, occupied_start.iter().copied());
    let mut grown = OccupancySweep::new(window, occupied_start.iter().copied().filter(|&x| base.contains(x)));
    let slice: Vec<&Mark> = h.marks_between(t0, t1).iter().filter(|mk| mk.time > t0).collect();

    let mut corridor = j.sites().all(|x| !eta.is_occupied(x) || grown.is_occupied(x));
    for mk in &slice {
        eta.apply(mk);
        grown.apply(mk);
        if let MarkKind::Arrow { target, .. } = mk.kind {
            if j.contains(target) && eta.is_occupied(target) && !grown.is_occupied(target) {
                corridor = false;
            }
        }
    }

    let top = u.sites().all(|x| !eta.is_occupied(x) || grown.is_occupied(x));
    let w = g.density_interval_len().min(u.len());
    let occ: Vec<bool> = u.sites().map(|x| eta.is_occupied(x)).collect();
    let density = occ.windows(w).all(|win| win.contains(&true));

    let envelope = match g.envelope(m) {
        Some(env) if env.contains_interval(&u) => {
            let mut d = vec![false; window.len()];
            for x in u.sites() {
                d[window.index(x)] = true;
            }
            let mut ok = true;
            for mk in slice.iter().rev() {
                match mk.kind {
                    MarkKind::Arrow { source, target } => {
                        if window.contains(source) && window.contains(target) && d[window.index(target)] && !d[window.index(source)] {
                            d[window.index(source)] = true;
                            if !env.contains(source) {
                                ok = false;
                                break;
                            }
                        }
                    }
                    MarkKind::Recovery { site } => {
                        if window.contains(site) && !u.contains(site) {
                            d[window.index(site)] = false;
                        }
                    }
                }
            }
            ok
        }
        _ => false,
    };
    BoxConditions {
        density,
        top,
        corridor,
        envelope,
    }
}

/// Computes `Φ` and `Ψ` on `window` from a stored construction.
///
/// The full-line process is replaced by the process started from every site
/// of the construction window. A box is flagged when its envelope widened by
/// [`BoxGeometry::margin`] leaves the window, or when a parent is flagged or
/// outside the field window.
pub fn compute_phi_psi(h: &HarrisConstruction, g: &BoxGeometry, window: FieldWindow) -> Result<RenormField> {
    if window.m_lo > window.m_hi {
        return Err(Error::Domain("empty column range".into()));
    }
    let l = g.box_time();
    if h.t_max() < l * f64::from(window.rows) {
        return Err(Error::Domain(format!(
            "construction horizon {} < K̂N̂ * rows = {}",
            h.t_max(),
            l * f64::from(window.rows)
        )));
    }
    let hw = h.window();
    let mut eta = OccupancySweep::new(hw, hw.sites());
    let mut snapshots = vec![eta.occupied_slice().to_vec()];
    for n in 0..window.rows {
        let (t0, t1) = (l * f64::from(n), l * f64::from(n + 1));
        for mk in h.marks_between(t0, t1).iter().filter(|mk| mk.time > t0) {
            eta.apply(mk);
        }
        snapshots.push(eta.occupied_slice().to_vec());
    }

    let margin = g.margin();
    let mut cells: BTreeMap<(u32, i32), FieldCell> = BTreeMap::new();
    for n in 0..window.rows {
        for m in window.m_lo..=window.m_hi {
            if (i64::from(m) + i64::from(n)) % 2 != 0 {
                continue;
            }
            let outside = match g.envelope(m) {
                Some(env) => env.lo() - margin < hw.lo() || env.hi() + margin > hw.hi(),
                None => {
                    let u = g.base_union(m);
                    u.lo() - margin < hw.lo() || u.hi() + margin > hw.hi()
                }
            };
            let conditions = box_conditions(h, g, m, n, &snapshots[n as usize]);
            let (phi, flagged) = if n == 0 {
                (u8::from(conditions.all()), outside)
            } else {
                let parents = [cells.get(&(n - 1, m - 1)), cells.get(&(n - 1, m + 1))];
                let parent_flag = parents.iter().any(|p| p.is_none_or(|c| c.boundary_flag));
                let has_one = parents.iter().flatten().any(|c| c.phi == 1);
                let phi = if !has_one {
                    2
                } else {
                    u8::from(conditions.all())
                };
                (phi, outside || parent_flag)
            };
            cells.insert(
                (n, m),
                FieldCell {
                    m,
                    n,
                    phi,
                    psi: u8::from(phi != 0),
                    boundary_flag: flagged,
                },
            );
        }
    }
    Ok(RenormField {
        geometry: *g,
        window,
        cells: cells.into_values().collect(),
    })
}

/// Box conditions for `(m, n)` alone, for inspection and testing.
pub fn box_conditions_at(h: &HarrisConstruction, g: &BoxGeometry, m: i32, n: u32) -> Result<BoxConditions> {
    let l = g.box_time();
    if h.t_max() < l * f64::from(n + 1) {
        return Err(Error::Domain(format!("construction horizon {} too short for row {n}", h.t_max())));
    }
    let hw = h.window();
    let mut eta = OccupancySweep::new(hw, hw.sites());
    let t_start = l * f64::from(n);
    for mk in h.marks_between(0.0, t_start) {
        if mk.time > 0.0 && mk.time <= t_start {
            eta.apply(mk);
        }
    }
    Ok(box_conditions(h, g, m, n, eta.occupied_slice()))
}

/// Rectangle of `Λ` a connecting path must stay in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeRegion {
    pub m_lo: i32,
    pub m_hi: i32,
    pub n_lo: u32,
    pub n_hi: u32,
}

impl LatticeRegion {
    pub fn contains(&self, m: i32, n: u32) -> bool {
        (self.m_lo..=self.m_hi).contains(&m) && (self.n_lo..=self.n_hi).contains(&n)
    }
}

/// Whether `(m, k)` and `(m', k')` are joined by an open path inside `region`:
/// one step up per row, one column left or right, `Ψ = 1` at every point
/// before the endpoint.
pub fn op_connected(field: &RenormField, from: (i32, u32), to: (i32, u32), region: LatticeRegion) -> bool {
    let ((m0, k0), (m1, k1)) = (from, to);
    let in_lattice = |m: i32, n: u32| (i64::from(m) + i64::from(n)) % 2 == 0;
    if k1 <= k0 || !in_lattice(m0, k0) || !in_lattice(m1, k1) {
        return false;
    }
    if !region.contains(m0, k0) || !region.contains(m1, k1) {
        return false;
    }
    let mut seen: BTreeSet<(i32, u32)> = BTreeSet::new();
    let mut queue = VecDeque::from([(m0, k0)]);
    while let Some((m, n)) = queue.pop_front() {
        if (m, n) == (m1, k1) {
            return true;
        }
        if n >= k1 || !field.psi(m, n) {
            continue;
        }
        for next in [(m - 1, n + 1), (m + 1, n + 1)] {
            if region.contains(next.0, next.1) && (next.0 - m1).unsigned_abs() <= k1 - next.1 && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry(n_hat: u32, k_hat: u32, alpha: f64) -> BoxGeometry {
        BoxGeometry::new(n_hat, k_hat, alpha, 1).unwrap()
    }

    #[test]
    fn intervals_partition_the_line() {
        for n_hat in 1..6 {
            let g = geometry(n_hat, 1, 0.5);
            let mut next = g.interval(-3).lo();
            for m in (-3..8).step_by(2) {
                let i = g.interval(m);
                assert_eq!(i.len(), n_hat as usize);
                assert_eq!(i.lo(), next);
                next = i.hi() + 1;
            }
            assert_eq!(g.base_union(4).len(), 2 * n_hat as usize);
        }
    }

    #[test]
    fn interval_examples() {
        let g = geometry(10, 2, 0.5);
        assert_eq!(g.interval(0), SiteInterval::new(-4, 5).unwrap());
        assert_eq!(g.interval(1), SiteInterval::new(1, 10).unwrap());
        assert_eq!(g.corridor(2), SiteInterval::new(10, 10).unwrap());
        let g2 = BoxGeometry::new(10, 2, 0.5, 2).unwrap();
        assert_eq!(g2.corridor(2), SiteInterval::new(9, 11).unwrap());
        assert_eq!(g.envelope(2), Some(SiteInterval::new(-10, 30).unwrap()));
    }

    #[test]
    fn derived_quantities() {
        let g = BoxGeometry::new(1, 1, 6.1, 2).unwrap();
        let p = RenormParams::new(g, 40, 1).unwrap();
        assert_eq!(p.m(), 55);
        assert_eq!(p.s(), 3027.0);
        // floor(24.4) = 24, 55^2 + 24 odd
        assert_eq!(p.imath(), 25);
        assert_eq!(p.a2(), Some(SiteInterval::new(12, 28).unwrap()));
        assert_eq!(p.a4(), Some(SiteInterval::new(-28, -12).unwrap()));
        assert_eq!(p.a_n(), 3028.0 * 40.0);
        assert!(RenormParams::new(geometry(10, 2, 1.0), 40, 1).is_err());
    }

    #[test]
    fn op_connected_trivial_fields() {
        let g = geometry(2, 1, 0.5);
        let w = FieldWindow {
            m_lo: 0,
            m_hi: 8,
            rows: 9,
        };
        let region = LatticeRegion {
            m_lo: 0,
            m_hi: 8,
            n_lo: 0,
            n_hi: 8,
        };
        let ones = RenormField::from_psi(g, w, |_, _| true);
        let zeros = RenormField::from_psi(g, w, |_, _| false);
        assert!(op_connected(&ones, (4, 0), (4, 8), region));
        assert!(op_connected(&ones, (0, 0), (8, 8), region));
        assert!(!op_connected(&ones, (0, 0), (8, 6), region));
        assert!(!op_connected(&ones, (0, 0), (1, 4), region));
        assert!(!op_connected(&zeros, (4, 0), (4, 2), region));
    }
}
