//! The two-type contact process with spatial priorities on `[-N+1, N]`.
//!
//! Type 1 has priority on `[-N+1, 0]` and type 2 on `[1, N]`. The process is
//! read off the same Harris construction as the classical process: a cross
//! empties its site, and an arrow `y -> x` copies the type at `y` into `x`
//! unless `x` is occupied by the type that has priority at `x` (or `y` is empty).

use std::borrow::Borrow;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harris::{ConstructionParams, HarrisConstruction, Mark, MarkKind, SiteInterval};
use crate::stats::TimeSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[repr(u8)]
pub enum Cell {
    Empty = 0,
    One = 1,
    Two = 2,
}

impl Cell {
    pub fn from_u8(v: u8) -> Option<Cell> {
        match v {
            0 => Some(Cell::Empty),
            1 => Some(Cell::One),
            2 => Some(Cell::Two),
            _ => None,
        }
    }

    /// Swaps the two types.
    pub fn swapped(self) -> Cell {
        match self {
            Cell::Empty => Cell::Empty,
            Cell::One => Cell::Two,
            Cell::Two => Cell::One,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Species {
    One,
    Two,
}

impl Species {
    pub fn cell(self) -> Cell {
        match self {
            Species::One => Cell::One,
            Species::Two => Cell::Two,
        }
    }

    pub fn label(self) -> u8 {
        self.cell() as u8
    }
}

/// The interval `[-n+1, n]`.
pub fn arena(n: i32) -> Result<SiteInterval> {
    if n < 1 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("must be >= 1, got {n}"),
        });
    }
    SiteInterval::new(-n + 1, n)
}

/// `x ↦ 1 - x`, the reflection exchanging `[-N+1, 0]` and `[1, N]`.
pub fn mirror_site(x: i32) -> i32 {
    1 - x
}

/// The construction reflected by [`mirror_site`].
pub fn mirror_construction(h: &HarrisConstruction) -> HarrisConstruction {
    let p = h.params();
    let params = ConstructionParams {
        window_lo: mirror_site(p.window_hi),
        window_hi: mirror_site(p.window_lo),
        ..*p
    };
    let marks = h
        .marks()
        .iter()
        .map(|m| Mark {
            time: m.time,
            kind: match m.kind {
                MarkKind::Recovery { site } => MarkKind::Recovery {
                    site: mirror_site(site),
                },
                MarkKind::Arrow { source, target } => MarkKind::Arrow {
                    source: mirror_site(source),
                    target: mirror_site(target),
                },
            },
        })
        .collect();
    HarrisConstruction::from_marks(params, marks).expect("reflection preserves validity")
}

/// A configuration on `[-n+1, n]` at a given time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoTypeState {
    pub n: i32,
    pub cells: Vec<Cell>,
    pub time_bits: u64,
}

impl TwoTypeState {
    fn new(n: i32, cells: Vec<Cell>, time: f64) -> Self {
        Self {
            n,
            cells,
            time_bits: time.to_bits(),
        }
    }

    pub fn time(&self) -> f64 {
        f64::from_bits(self.time_bits)
    }

    pub fn get(&self, site: i32) -> Option<Cell> {
        let i = site + self.n - 1;
        usize::try_from(i).ok().and_then(|i| self.cells.get(i).copied())
    }

    pub fn sites_with(&self, cell: Cell) -> BTreeSet<i32> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cell)
            .map(|(i, _)| i as i32 - self.n + 1)
            .collect()
    }

    pub fn occupied(&self) -> BTreeSet<i32> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != Cell::Empty)
            .map(|(i, _)| i as i32 - self.n + 1)
            .collect()
    }
}

/// A single site update caused by one mark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Change {
    /// Index of the causing mark in the mark sequence that drove the evolution.
    pub seq: u64,
    pub time: f64,
    pub site: i32,
    pub from: Cell,
    pub to: Cell,
}

/// In-place evolution of the two-type process over a flat array.
#[derive(Debug, Clone)]
pub struct TwoTypeSweep {
    n: i32,
    region: SiteInterval,
    cells: Vec<Cell>,
    /// counts[cell][side]: side 0 is `[-n+1, 0]`, side 1 is `[1, n]`.
    counts: [[usize; 2]; 3],
}

impl TwoTypeSweep {
    pub fn new(n: i32, a_sites: &BTreeSet<i32>, b_sites: &BTreeSet<i32>) -> Result<Self> {
        let region = arena(n)?;
        if let Some(x) = a_sites.intersection(b_sites).next() {
            return Err(Error::Domain(format!("site {x} is in both initial sets")));
        }
        let mut cells = vec![Cell::Empty; region.len()];
        for (set, cell) in [(a_sites, Cell::One), (b_sites, Cell::Two)] {
            for &x in set {
                if !region.contains(x) {
                    return Err(Error::Domain(format!("initial site {x} outside [{}, {n}]", -n + 1)));
                }
                cells[region.index(x)] = cell;
            }
        }
        Ok(Self::from_cells(n, cells))
    }

    pub fn from_cells(n: i32, cells: Vec<Cell>) -> Self {
        let region = SiteInterval::new(-n + 1, n).expect("n >= 1");
        assert_eq!(cells.len(), region.len(), "configuration length must be 2n");
        let mut counts = [[0usize; 2]; 3];
        for (i, &c) in cells.iter().enumerate() {
            counts[c as usize][usize::from(i as i32 >= n)] += 1;
        }
        Self {
            n,
            region,
            cells,
            counts,
        }
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn get(&self, site: i32) -> Cell {
        self.cells[self.region.index(site)]
    }

    /// Number of `cell` particles on the left (`[-n+1, 0]`) or right (`[1, n]`) half.
    pub fn count(&self, cell: Cell, right: bool) -> usize {
        self.counts[cell as usize][usize::from(right)]
    }

    pub fn total(&self, cell: Cell) -> usize {
        self.counts[cell as usize][0] + self.counts[cell as usize][1]
    }

    /// The species that has died out, type 1 checked first.
    pub fn extinct(&self) -> Option<Species> {
        if self.total(Cell::One) == 0 {
            Some(Species::One)
        } else if self.total(Cell::Two) == 0 {
            Some(Species::Two)
        } else {
            None
        }
    }

    fn set(&mut self, i: usize, to: Cell) -> Cell {
        let from = self.cells[i];
        let right = usize::from(i as i32 >= self.n);
        self.counts[from as usize][right] -= 1;
        self.counts[to as usize][right] += 1;
        self.cells[i] = to;
        from
    }

    /// Applies one mark; returns `(site, from, to)` when a site changed.
    #[inline]
    pub fn apply(&mut self, mark: &Mark) -> Option<(i32, Cell, Cell)> {
        match mark.kind {
            MarkKind::Recovery { site } => {
                if !self.region.contains(site) {
                    return None;
                }
                let i = self.region.index(site);
                if self.cells[i] == Cell::Empty {
                    return None;
                }
                let from = self.set(i, Cell::Empty);
                Some((site, from, Cell::Empty))
            }
            MarkKind::Arrow { source, target } => {
                if !self.region.contains(source) || !self.region.contains(target) {
                    return None;
                }
                let s = self.cells[self.region.index(source)];
                if s == Cell::Empty {
                    return None;
                }
                let i = self.region.index(target);
                let t = self.cells[i];
                let protected = match t {
                    Cell::Empty => false,
                    _ if t == s => true,
                    Cell::One => target <= 0,
                    Cell::Two => target >= 1,
                };
                if protected {
                    return None;
                }
                let from = self.set(i, s);
                Some((target, from, s))
            }
        }
    }

    pub fn state(&self, time: f64) -> TwoTypeState {
        TwoTypeState::new(self.n, self.cells.clone(), time)
    }
}

/// `ζ^{A,B,N}_until` on a stored construction.
pub fn evolve_two_type(
    h: &HarrisConstruction,
    a_sites: &BTreeSet<i32>,
    b_sites: &BTreeSet<i32>,
    n: i32,
    until: f64,
) -> Result<TwoTypeState> {
    check_construction(h, n, until)?;
    let mut sweep = TwoTypeSweep::new(n, a_sites, b_sites)?;
    for m in h.marks_between(0.0, until) {
        sweep.apply(m);
    }
    Ok(sweep.state(until))
}

fn check_construction(h: &HarrisConstruction, n: i32, until: f64) -> Result<()> {
    let region = arena(n)?;
    if !h.window().contains_interval(&region) {
        return Err(Error::Domain(format!(
            "construction window [{}, {}] does not cover [{}, {n}]",
            h.window().lo(),
            h.window().hi(),
            -n + 1
        )));
    }
    if !(0.0..=h.t_max()).contains(&until) {
        return Err(Error::Domain(format!("time {until} outside [0, t_max]")));
    }
    Ok(())
}

/// First time one of the two types has no particles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstExtinction {
    /// `τ^{A,B}_N`, censored at the horizon if both types survive.
    pub tau: TimeSample,
    /// The type that died out, `None` when censored.
    pub extinct_type: Option<Species>,
}

pub fn first_extinction<M, I>(
    marks: I,
    a_sites: &BTreeSet<i32>,
    b_sites: &BTreeSet<i32>,
    n: i32,
    horizon: f64,
) -> Result<FirstExtinction>
where
    M: Borrow<Mark>,
    I: IntoIterator<Item = M>,
{
    let sweep = TwoTypeSweep::new(n, a_sites, b_sites)?;
    Ok(run_to_first_extinction(sweep, marks, horizon))
}

/// Runs an already initialized sweep until one type dies out or `horizon` passes.
pub fn run_to_first_extinction<M, I>(mut sweep: TwoTypeSweep, marks: I, horizon: f64) -> FirstExtinction
where
    M: Borrow<Mark>,
    I: IntoIterator<Item = M>,
{
    if let Some(s) = sweep.extinct() {
        return FirstExtinction {
            tau: TimeSample::observed(0.0),
            extinct_type: Some(s),
        };
    }
    for m in marks {
        let m = m.borrow();
        if m.time > horizon {
            break;
        }
        if let Some((_, from, _)) = sweep.apply(m) {
            if from != Cell::Empty && sweep.total(from) == 0 {
                return FirstExtinction {
                    tau: TimeSample::observed(m.time),
                    extinct_type: sweep.extinct(),
                };
            }
        }
    }
    FirstExtinction {
        tau: TimeSample::censored(horizon),
        extinct_type: None,
    }
}

/// Full event history of one realization: the initial configuration and
/// every site change up to `horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: i32,
    pub initial: Vec<Cell>,
    pub changes: Vec<Change>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn record<M, I>(marks: I, a_sites: &BTreeSet<i32>, b_sites: &BTreeSet<i32>, n: i32, horizon: f64) -> Result<Self>
    where
        M: Borrow<Mark>,
        I: IntoIterator<Item = M>,
    {
        let sweep = TwoTypeSweep::new(n, a_sites, b_sites)?;
        Ok(Self::record_from(sweep, marks, horizon))
    }

    pub fn record_from<M, I>(mut sweep: TwoTypeSweep, marks: I, horizon: f64) -> Self
    where
        M: Borrow<Mark>,
        I: IntoIterator<Item = M>,
    {
        let initial = sweep.cells().to_vec();
        let mut changes = Vec::new();
        for (seq, m) in marks.into_iter().enumerate() {
            let m = m.borrow();
            if m.time > horizon {
                break;
            }
            if let Some((site, from, to)) = sweep.apply(m) {
                changes.push(Change {
                    seq: seq as u64,
                    time: m.time,
                    site,
                    from,
                    to,
                });
            }
        }
        Self {
            n: sweep.n(),
            initial,
            changes,
            horizon,
        }
    }

    /// Records the trajectory of a stored construction up to its horizon.
    pub fn from_construction(h: &HarrisConstruction, a_sites: &BTreeSet<i32>, b_sites: &BTreeSet<i32>, n: i32) -> Result<Self> {
        check_construction(h, n, h.t_max())?;
        Self::record(h.marks(), a_sites, b_sites, n, h.t_max())
    }

    fn index(&self, site: i32) -> usize {
        (site + self.n - 1) as usize
    }

    /// Configuration right after every change with `time <= t`.
    pub fn state_at(&self, t: f64) -> TwoTypeState {
        let mut cells = self.initial.clone();
        for c in self.changes.iter().take_while(|c| c.time <= t) {
            cells[self.index(c.site)] = c.to;
        }
        TwoTypeState::new(self.n, cells, t)
    }

    /// The sequence of states after each change, preceded by the initial one.
    pub fn states(&self) -> impl Iterator<Item = TwoTypeState> + '_ {
        let mut cells = self.initial.clone();
        std::iter::once(TwoTypeState::new(self.n, cells.clone(), 0.0)).chain(self.changes.iter().map(move |c| {
            let i = (c.site + self.n - 1) as usize;
            cells[i] = c.to;
            TwoTypeState::new(self.n, cells.clone(), c.time)
        }))
    }

    /// Time intervals `[start, end)` during which the predicate on the running
    /// configuration holds. `end` is `+inf` for an interval still open at the horizon.
    fn intervals_where(&self, mut counter: impl FnMut(&[Cell]) -> bool) -> Vec<(f64, f64)> {
        let mut cells = self.initial.clone();
        let mut out = Vec::new();
        let mut open = if counter(&cells) { Some(0.0) } else { None };
        for c in &self.changes {
            cells[self.index(c.site)] = c.to;
            let holds = counter(&cells);
            match (open, holds) {
                (None, true) => open = Some(c.time),
                (Some(s), false) => {
                    out.push((s, c.time));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(s) = open {
            out.push((s, f64::INFINITY));
        }
        out
    }
}

/// Block entry times `S_i` and `Ŝ_i` with block length `a_2n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryTimes {
    pub a_2n: f64,
    /// `S_i`: first time after `(i-1) a_2n` with a type-2 particle in `[1, N]`; `None` if censored.
    pub s_entry: Vec<Option<f64>>,
    /// `Ŝ_i`: same with type 1 in `[-N+1, 0]`.
    pub s_hat_entry: Vec<Option<f64>>,
}

fn first_entry_after(intervals: &[(f64, f64)], block_start: f64, horizon: f64) -> Option<f64> {
    if block_start > horizon {
        return None;
    }
    intervals
        .iter()
        .find(|&&(_, end)| end > block_start)
        .map(|&(start, _)| start.max(block_start))
        .filter(|&t| t <= horizon)
}

/// Computes `S_i`, `Ŝ_i` for every block that starts at or before the
/// trajectory horizon. An event already true at a block boundary reports the
/// boundary itself.
pub fn entry_times(traj: &Trajectory, a_2n: f64) -> Result<EntryTimes> {
    if !(a_2n > 0.0 && a_2n.is_finite()) {
        return Err(Error::Domain(format!("block length must be positive, got {a_2n}")));
    }
    if !traj.horizon.is_finite() {
        return Err(Error::Domain("trajectory horizon must be finite".into()));
    }
    let n = traj.n as usize;
    let two_right = traj.intervals_where(|c| c[n..].contains(&Cell::Two));
    let one_left = traj.intervals_where(|c| c[..n].contains(&Cell::One));
    let blocks = (traj.horizon / a_2n).floor() as usize + 1;
    let starts = (0..blocks).map(|i| i as f64 * a_2n);
    Ok(EntryTimes {
        a_2n,
        s_entry: starts
            .clone()
            .map(|b| first_entry_after(&two_right, b, traj.horizon))
            .collect(),
        s_hat_entry: starts
            .map(|b| first_entry_after(&one_left, b, traj.horizon))
            .collect(),
    })
}

/// Sites `x` reachable at time `t` by a path from the initial type-1 set along
/// which every visited space-time point carries a type-1 particle.
///
/// Reads the configuration only from the trajectory, never from the update rule.
pub fn type_one_paths(traj: &Trajectory, h: &HarrisConstruction, t: f64) -> Result<BTreeSet<i32>> {
    check_construction(h, traj.n, t)?;
    if t > traj.horizon {
        return Err(Error::Domain(format!("time {t} beyond trajectory horizon {}", traj.horizon)));
    }
    let n = traj.n;
    let idx = |x: i32| (x + n - 1) as usize;
    let inside = |x: i32| -n < x && x <= n;
    let mut cells = traj.initial.clone();
    let mut reach: Vec<bool> = cells.iter().map(|&c| c == Cell::One).collect();
    let mut next_change = 0;
    for (seq, m) in h.marks().iter().enumerate() {
        if m.time > t {
            break;
        }
        while next_change < traj.changes.len() && traj.changes[next_change].seq <= seq as u64 {
            let c = &traj.changes[next_change];
            cells[idx(c.site)] = c.to;
            if c.to != Cell::One {
                reach[idx(c.site)] = false;
            }
            next_change += 1;
        }
        if let MarkKind::Arrow { source, target } = m.kind {
            if inside(source) && inside(target) && reach[idx(source)] && cells[idx(target)] == Cell::One {
                reach[idx(target)] = true;
            }
        }
    }
    Ok(reach
        .iter()
        .enumerate()
        .filter(|(_, &r)| r)
        .map(|(i, _)| i as i32 - n + 1)
        .collect())
}

/// Checks the path characterization of type-1 sites at `(x, t)`: `x` holds a
/// type-1 particle iff a type-1-occupied path joins the initial type-1 set to `(x, t)`.
pub fn verify_path_lemma(traj: &Trajectory, h: &HarrisConstruction, x: i32, t: f64) -> Result<bool> {
    if !arena(traj.n)?.contains(x) {
        return Err(Error::Domain(format!("site {x} outside the arena")));
    }
    let occupied_by_one = traj.state_at(t).get(x) == Some(Cell::One);
    let path = type_one_paths(traj, h, t)?.contains(&x);
    Ok(occupied_by_one == path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harris::ConstructionParams;

    fn fixture(n: i32, marks: Vec<Mark>) -> HarrisConstruction {
        HarrisConstruction::from_marks(
            ConstructionParams {
                lambda: 1.0,
                range: 2,
                window_lo: -n + 1,
                window_hi: n,
                t_max: 10.0,
                seed: 0,
            },
            marks,
        )
        .unwrap()
    }

    fn set(v: &[i32]) -> BTreeSet<i32> {
        v.iter().copied().collect()
    }

    #[test]
    fn priority_rule_protects_type_two_on_the_right() {
        let h = fixture(3, vec![Mark::arrow(1.0, 1, 2)]);
        let s = evolve_two_type(&h, &set(&[1]), &set(&[2]), 3, 2.0).unwrap();
        assert_eq!(s.get(2), Some(Cell::Two));
        assert_eq!(s.get(1), Some(Cell::One));
    }

    #[test]
    fn priority_rule_lets_type_two_displace_one_on_the_right() {
        let h = fixture(3, vec![Mark::arrow(1.0, 2, 1)]);
        let s = evolve_two_type(&h, &set(&[1]), &set(&[2]), 3, 2.0).unwrap();
        assert_eq!(s.get(1), Some(Cell::Two));
    }

    #[test]
    fn priority_rule_on_the_left() {
        let h = fixture(3, vec![Mark::arrow(1.0, 0, -1), Mark::arrow(2.0, -1, 0)]);
        // type 1 at -1 displaces type 2 at 0 only if 0 holds type 2: here 0 is type 1 -> protected.
        let s = evolve_two_type(&h, &set(&[-1]), &set(&[0]), 3, 0.5).unwrap();
        assert_eq!(s.get(0), Some(Cell::Two));
        let s = evolve_two_type(&h, &set(&[-1]), &set(&[0]), 3, 1.5).unwrap();
        // 2 -> 1 arrow into -1 holding type 1 on the left: protected.
        assert_eq!(s.get(-1), Some(Cell::One));
        let s = evolve_two_type(&h, &set(&[-1]), &set(&[0]), 3, 2.5).unwrap();
        // type 1 displaces type 2 at 0.
        assert_eq!(s.get(0), Some(Cell::One));
    }

    #[test]
    fn recovery_and_empty_source() {
        let h = fixture(2, vec![Mark::recovery(1.0, 1), Mark::arrow(2.0, 1, 2), Mark::arrow(3.0, 0, 1)]);
        let s = evolve_two_type(&h, &set(&[0]), &set(&[1]), 2, 5.0).unwrap();
        assert_eq!(s.get(1), Some(Cell::One));
        assert_eq!(s.get(2), Some(Cell::Empty));
    }

    #[test]
    fn overlapping_initial_sets_rejected() {
        let h = fixture(2, vec![]);
        assert!(matches!(
            evolve_two_type(&h, &set(&[0]), &set(&[0, 1]), 2, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(evolve_two_type(&h, &set(&[5]), &set(&[1]), 2, 1.0).is_err());
    }

    #[test]
    fn first_extinction_trivial_cases() {
        let h = fixture(2, vec![]);
        let r = first_extinction(h.marks(), &set(&[]), &set(&[1]), 2, 10.0).unwrap();
        assert_eq!(r.tau, TimeSample::observed(0.0));
        assert_eq!(r.extinct_type, Some(Species::One));
        let r = first_extinction(h.marks(), &set(&[0]), &set(&[1]), 2, 10.0).unwrap();
        assert!(r.tau.censored);
        assert_eq!(r.extinct_type, None);
    }

    #[test]
    fn first_extinction_records_type() {
        let h = fixture(2, vec![Mark::recovery(1.0, 1), Mark::recovery(2.0, 0)]);
        let r = first_extinction(h.marks(), &set(&[0]), &set(&[1, 2]), 2, 10.0).unwrap();
        assert_eq!(r.tau, TimeSample::observed(2.0));
        assert_eq!(r.extinct_type, Some(Species::One));
    }

    #[test]
    fn entry_times_reference_start_is_zero() {
        let h = fixture(3, vec![Mark::recovery(4.0, 1), Mark::recovery(4.5, 2), Mark::recovery(5.0, 3)]);
        let traj = Trajectory::from_construction(&h, &set(&[-2, -1, 0]), &set(&[1, 2, 3]), 3).unwrap();
        let e = entry_times(&traj, 3.0).unwrap();
        assert_eq!(e.s_entry[0], Some(0.0));
        assert_eq!(e.s_hat_entry[0], Some(0.0));
        // second block starts at 3.0 while type 2 is still on the right
        assert_eq!(e.s_entry[1], Some(3.0));
        // after 5.0 there is no type 2 left
        assert_eq!(e.s_entry[2], None);
        assert_eq!(e.s_hat_entry.len(), 4);
    }

    #[test]
    fn entry_times_without_type_two_are_censored() {
        let h = fixture(3, vec![Mark::arrow(1.0, 0, 1)]);
        let traj = Trajectory::from_construction(&h, &set(&[0]), &set(&[]), 3).unwrap();
        let e = entry_times(&traj, 2.0).unwrap();
        assert!(e.s_entry.iter().all(Option::is_none));
        assert!(entry_times(&traj, 0.0).is_err());
    }

    #[test]
    fn entry_time_after_block_start() {
        // type 2 starts on the left and enters [1, N] through an arrow at 1.5.
        let h = fixture(3, vec![Mark::arrow(1.5, 0, 1)]);
        let traj = Trajectory::from_construction(&h, &set(&[3]), &set(&[0]), 3).unwrap();
        let e = entry_times(&traj, 4.0).unwrap();
        assert_eq!(e.s_entry[0], Some(1.5));
        assert_eq!(e.s_entry[1], Some(4.0));
    }

    #[test]
    fn path_lemma_on_fixture() {
        let h = fixture(3, vec![Mark::arrow(1.0, 0, 1), Mark::arrow(2.0, 1, 2), Mark::recovery(3.0, 1)]);
        let traj = Trajectory::from_construction(&h, &set(&[0]), &set(&[2]), 3).unwrap();
        // 1 gets type 1 at t=1 (empty), 2 is type 2 on the right: protected.
        for x in -2..=3 {
            for t in [0.5, 1.5, 2.5, 3.5] {
                assert!(verify_path_lemma(&traj, &h, x, t).unwrap(), "x={x} t={t}");
            }
        }
        assert_eq!(type_one_paths(&traj, &h, 2.5).unwrap(), set(&[0, 1]));
    }

    #[test]
    fn mirror_is_an_involution() {
        let h = HarrisConstruction::generate(ConstructionParams {
            lambda: 1.0,
            range: 2,
            window_lo: -3,
            window_hi: 4,
            t_max: 3.0,
            seed: 9,
        })
        .unwrap();
        assert_eq!(mirror_construction(&mirror_construction(&h)), h);
    }
}
