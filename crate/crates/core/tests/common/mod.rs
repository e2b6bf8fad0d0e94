//! Brute-force oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;

use priority_cp::harris::{ConstructionParams, HarrisConstruction, Mark, MarkKind, SiteInterval};
use priority_cp::two_type::{Cell, Trajectory};
use rand::Rng;

/// All sites reachable at `end` from `sources` at `start` inside `region`, by
/// depth-first enumeration of every path: a path sitting at `site` may take
/// any later arrow out of `site` and is killed by the first recovery at `site`.
pub fn enumerate_paths(marks: &[Mark], sources: &BTreeSet<i32>, start: f64, end: f64, region: SiteInterval) -> BTreeSet<i32> {
    let window: Vec<&Mark> = marks.iter().filter(|m| m.time > start && m.time <= end).collect();
    let mut out = BTreeSet::new();
    fn walk(window: &[&Mark], from: usize, site: i32, region: SiteInterval, out: &mut BTreeSet<i32>) {
        for (k, m) in window.iter().enumerate().skip(from) {
            match m.kind {
                MarkKind::Recovery { site: s } if s == site => return,
                MarkKind::Arrow { source, target } if source == site && region.contains(target) => {
                    walk(window, k + 1, target, region, out);
                }
                _ => {}
            }
        }
        out.insert(site);
    }
    for &x in sources {
        walk(&window, 0, x, region, &mut out);
    }
    out
}

/// Sites joined at time `t` to the initial type-1 set by a path along which
/// every visited point holds a type-1 particle, by exhaustive enumeration.
pub fn enumerate_type_one_paths(traj: &Trajectory, h: &HarrisConstruction, t: f64) -> BTreeSet<i32> {
    let n = traj.n;
    let idx = |x: i32| (x + n - 1) as usize;
    let marks: Vec<&Mark> = h.marks().iter().take_while(|m| m.time <= t).collect();
    // after[k] is the configuration right after mark k
    let mut cells = traj.initial.clone();
    let mut after = Vec::with_capacity(marks.len());
    let mut c = 0;
    for k in 0..marks.len() {
        while c < traj.changes.len() && traj.changes[c].seq as usize <= k {
            cells[idx(traj.changes[c].site)] = traj.changes[c].to;
            c += 1;
        }
        after.push(cells.clone());
    }
    let inside = |x: i32| -n < x && x <= n;
    fn walk(
        marks: &[&Mark],
        after: &[Vec<Cell>],
        from: usize,
        site: i32,
        idx: &dyn Fn(i32) -> usize,
        inside: &dyn Fn(i32) -> bool,
        out: &mut BTreeSet<i32>,
    ) {
        for k in from..marks.len() {
            if after[k][idx(site)] != Cell::One {
                return;
            }
            if let MarkKind::Arrow { source, target } = marks[k].kind {
                if source == site && inside(target) && after[k][idx(target)] == Cell::One {
                    walk(marks, after, k + 1, target, idx, inside, out);
                }
            }
        }
        out.insert(site);
    }
    let mut out = BTreeSet::new();
    for x in (-n + 1..=n).filter(|&x| traj.initial[idx(x)] == Cell::One) {
        walk(&marks, &after, 0, x, &idx, &inside, &mut out);
    }
    out
}

/// A construction on a small window with at most `max_marks` uniformly placed marks.
pub fn random_small_construction<R: Rng>(rng: &mut R, max_marks: usize) -> HarrisConstruction {
    let lo = rng.random_range(-3..=1);
    let hi = lo + rng.random_range(1..=5);
    let range = rng.random_range(1..=2u32);
    let t_max = 4.0;
    let count = rng.random_range(0..=max_marks);
    let mut marks = Vec::with_capacity(count);
    while marks.len() < count {
        let time = rng.random_range(0.0..t_max);
        if rng.random_bool(0.35) {
            marks.push(Mark::recovery(time, rng.random_range(lo..=hi)));
        } else {
            let source = rng.random_range(lo..=hi);
            let target = rng.random_range(lo..=hi);
            let d = (source - target).unsigned_abs();
            if d > 0 && d <= range {
                marks.push(Mark::arrow(time, source, target));
            }
        }
    }
    let params = ConstructionParams {
        lambda: 1.0,
        range,
        window_lo: lo,
        window_hi: hi,
        t_max,
        seed: 0,
    };
    HarrisConstruction::from_marks(params, marks).expect("valid by construction")
}

/// A uniformly random subset of `region`.
pub fn random_subset<R: Rng>(rng: &mut R, region: SiteInterval) -> BTreeSet<i32> {
    region.sites().filter(|_| rng.random_bool(0.5)).collect()
}

/// A random two-type configuration on `[-n+1, n]` as two disjoint sets.
pub fn random_two_type<R: Rng>(rng: &mut R, n: i32) -> (BTreeSet<i32>, BTreeSet<i32>) {
    let (mut a, mut b) = (BTreeSet::new(), BTreeSet::new());
    for x in -n + 1..=n {
        match rng.random_range(0..3) {
            1 => {
                a.insert(x);
            }
            2 => {
                b.insert(x);
            }
            _ => {}
        }
    }
    (a, b)
}
