//! Maximal `k`-decreasing subsets ("geodesic watermelons") by min-cost flow.
//!
//! Decreasing subsets are chains of the order `a < b` iff `a.x < b.x` and
//! `a.y > b.y`. Every point is split into an `in` and an `out` node joined by
//! a unit arc of cost `-1`; the source feeds every `in` node, every `out` node
//! drains to the sink, and `out(a) -> in(b)` exists for every chain pair.
//! A direct source-sink arc of capacity `k` and cost `0` lets the flow stop
//! early. A min-cost flow of value `k` then covers a maximal `k`-decreasing
//! subset, and each unit of flow traces one decreasing sequence.
//!
//! The residual network is kept implicit: because every point carries at most
//! one unit, the flow is fully described by the predecessor and successor of
//! each covered point.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, PointSet};
use crate::scalar::Scalar;
use crate::tableau::{greene_k_decreasing_size, lis_length, rsk_shape};

pub const DEFAULT_EXACT_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatermelonResult<T> {
    pub subset: PointSet<T>,
    /// `k` decreasing sequences in order of increasing x, some possibly empty.
    pub sequences: Vec<Vec<Point<T>>>,
    pub size: usize,
    pub certified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pred {
    None,
    Source,
    Point(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Next {
    None,
    Sink,
    Point(u32),
}

const SOURCE: usize = 0;
const SINK: usize = 1;
const UNSET: u32 = u32::MAX;

#[inline]
fn in_node(a: usize) -> usize {
    2 + 2 * a
}

#[inline]
fn out_node(a: usize) -> usize {
    3 + 2 * a
}

/// Successive-shortest-path min-cost flow on the split chain network.
struct ChainFlow {
    n: usize,
    /// Chain successors of each point, in x-order indices.
    succ: Vec<Vec<u32>>,
    pred: Vec<Pred>,
    next: Vec<Next>,
    used: Vec<bool>,
    potential: Vec<i64>,
    dist: Vec<i64>,
    parent: Vec<u32>,
    done: Vec<bool>,
    cost: i64,
}

impl ChainFlow {
    /// `ys` are the y-coordinates in order of increasing x.
    fn new<T: Scalar>(ys: &[T]) -> Self {
        let n = ys.len();
        let succ: Vec<Vec<u32>> = (0..n).map(|a| (a + 1..n).filter(|&b| ys[b] < ys[a]).map(|b| b as u32).collect()).collect();
        let v = 2 * n + 2;
        let mut flow = ChainFlow {
            n,
            succ,
            pred: vec![Pred::None; n],
            next: vec![Next::None; n],
            used: vec![false; n],
            potential: vec![0; v],
            dist: vec![i64::MAX; v],
            parent: vec![UNSET; v],
            done: vec![false; v],
            cost: 0,
        };
        flow.init_potential();
        flow
    }

    /// Exact shortest distances from the source in the initial network: one
    /// Bellman–Ford pass in topological (x) order.
    fn init_potential(&mut self) {
        let h = &mut self.potential;
        for a in 0..self.n {
            h[in_node(a)] = 0;
        }
        let mut sink = 0;
        for a in 0..self.n {
            let out = h[in_node(a)] - 1;
            h[out_node(a)] = out;
            sink = sink.min(out);
            for &b in &self.succ[a] {
                let b = in_node(b as usize);
                h[b] = h[b].min(out);
            }
        }
        h[SINK] = sink;
    }

    #[inline]
    fn relax(&mut self, heap: &mut BinaryHeap<Reverse<(i64, u32)>>, from: usize, to: usize, cost: i64) {
        if self.done[to] {
            return;
        }
        let d = self.dist[from] + cost + self.potential[from] - self.potential[to];
        debug_assert!(cost + self.potential[from] - self.potential[to] >= 0);
        if d < self.dist[to] {
            self.dist[to] = d;
            self.parent[to] = from as u32;
            heap.push(Reverse((d, to as u32)));
        }
    }

    /// Dijkstra on reduced costs; returns the true cost of the cheapest
    /// augmenting path, or `None` if the sink is unreachable.
    fn shortest_path(&mut self) -> Option<i64> {
        self.dist.fill(i64::MAX);
        self.done.fill(false);
        self.parent.fill(UNSET);
        let mut heap = BinaryHeap::new();
        self.dist[SOURCE] = 0;
        heap.push(Reverse((0, SOURCE as u32)));
        let mut popped = Vec::new();
        while let Some(Reverse((d, v))) = heap.pop() {
            let v = v as usize;
            if self.done[v] || d > self.dist[v] {
                continue;
            }
            self.done[v] = true;
            popped.push(v);
            if v == SINK {
                break;
            }
            if v == SOURCE {
                for a in 0..self.n {
                    if self.pred[a] != Pred::Source {
                        self.relax(&mut heap, SOURCE, in_node(a), 0);
                    }
                }
            } else if v % 2 == 0 {
                let a = (v - 2) / 2;
                if !self.used[a] {
                    self.relax(&mut heap, v, out_node(a), -1);
                }
                match self.pred[a] {
                    Pred::Source => self.relax(&mut heap, v, SOURCE, 0),
                    Pred::Point(b) => self.relax(&mut heap, v, out_node(b as usize), 0),
                    Pred::None => {}
                }
            } else {
                let a = (v - 3) / 2;
                if self.used[a] {
                    self.relax(&mut heap, v, in_node(a), 1);
                }
                if self.next[a] != Next::Sink {
                    self.relax(&mut heap, v, SINK, 0);
                }
                let taken = match self.next[a] {
                    Next::Point(b) => b,
                    _ => UNSET,
                };
                let succ = std::mem::take(&mut self.succ[a]);
                for &b in &succ {
                    if b != taken {
                        self.relax(&mut heap, v, in_node(b as usize), 0);
                    }
                }
                self.succ[a] = succ;
            }
        }
        if !self.done[SINK] {
            return None;
        }
        let reach = self.dist[SINK];
        let true_cost = reach + self.potential[SINK] - self.potential[SOURCE];
        for v in popped {
            self.potential[v] += self.dist[v] - reach;
        }
        Some(true_cost)
    }

    /// Pushes one unit along the parent pointers ending at the sink.
    fn augment(&mut self) {
        let mut arcs = Vec::new();
        let mut v = SINK;
        while v != SOURCE {
            let u = self.parent[v] as usize;
            arcs.push((u, v));
            v = u;
        }
        // Cancellations first, so that reassignments on the same path win.
        for &(u, v) in &arcs {
            match (u, v) {
                (_, SOURCE) => self.pred[(u - 2) / 2] = Pred::None,
                (SINK, _) => self.next[(v - 3) / 2] = Next::None,
                _ if u % 2 == 1 && v % 2 == 0 && (u - 3) / 2 == (v - 2) / 2 => {
                    self.used[(u - 3) / 2] = false;
                }
                _ if u % 2 == 0 && u >= 2 && v % 2 == 1 && v != SINK && (u - 2) / 2 != (v - 3) / 2 => {
                    let (c, a) = ((u - 2) / 2, (v - 3) / 2);
                    self.next[a] = Next::None;
                    self.pred[c] = Pred::None;
                }
                _ => {}
            }
        }
        for &(u, v) in &arcs {
            match (u, v) {
                (SOURCE, _) => self.pred[(v - 2) / 2] = Pred::Source,
                (_, SINK) => self.next[(u - 3) / 2] = Next::Sink,
                _ if u % 2 == 0 && v % 2 == 1 && (u - 2) / 2 == (v - 3) / 2 => {
                    self.used[(u - 2) / 2] = true;
                }
                _ if u % 2 == 1 && v % 2 == 0 && (u - 3) / 2 != (v - 2) / 2 => {
                    let (a, b) = ((u - 3) / 2, (v - 2) / 2);
                    self.next[a] = Next::Point(b as u32);
                    self.pred[b] = Pred::Point(a as u32);
                }
                _ => {}
            }
        }
    }

    /// Augments until `k` units are routed through points or the cheapest
    /// path costs nothing (the bypass arc carries the rest). Returns the
    /// covered size after each unit, starting with 0.
    fn run(&mut self, k: usize) -> Vec<usize> {
        let mut profile = vec![0];
        for _ in 0..k {
            match self.shortest_path() {
                Some(c) if c < 0 => {
                    self.augment();
                    self.cost += c;
                    profile.push((-self.cost) as usize);
                }
                _ => break,
            }
        }
        let last = *profile.last().unwrap();
        profile.resize(k + 1, last);
        profile
    }

    /// The flow paths, each a list of x-order indices, ordered by first index.
    fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for a in 0..self.n {
            if self.pred[a] == Pred::Source {
                let mut path = vec![a];
                let mut cur = a;
                while let Next::Point(b) = self.next[cur] {
                    cur = b as usize;
                    path.push(cur);
                }
                out.push(path);
            }
        }
        out
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    Ok(())
}

/// A maximum-cardinality `k`-decreasing subset, with the default size cap.
pub fn max_k_decreasing<T: Scalar>(ps: &PointSet<T>, k: usize) -> Result<WatermelonResult<T>> {
    max_k_decreasing_with_cap(ps, k, DEFAULT_EXACT_CAP)
}

pub fn max_k_decreasing_with_cap<T: Scalar>(ps: &PointSet<T>, k: usize, cap: usize) -> Result<WatermelonResult<T>> {
    check_cap(ps.len(), cap)?;
    let order = ps.order_by_x();
    let ys: Vec<T> = order.iter().map(|&i| ps.points()[i].y).collect();
    let mut flow = ChainFlow::new(&ys);
    flow.run(k);
    let mut sequences: Vec<Vec<Point<T>>> =
        flow.paths().into_iter().map(|path| path.into_iter().map(|a| ps.points()[order[a]]).collect()).collect();
    let covered: Vec<usize> = (0..ps.len()).filter(|&a| flow.used[a]).map(|a| order[a]).collect();
    let subset = ps.select(&covered);
    sequences.resize(k.max(sequences.len()), Vec::new());
    let size = subset.len();
    let certified = size == greene_k_decreasing_size(&rsk_shape(ps), k);
    Ok(WatermelonResult { subset, sequences, size, certified })
}

/// Sizes of maximal `k`-decreasing subsets for every `k` in `0..=k_max`,
/// from a single flow computation.
pub fn max_k_decreasing_profile<T: Scalar>(ps: &PointSet<T>, k_max: usize, cap: usize) -> Result<Vec<usize>> {
    check_cap(ps.len(), cap)?;
    let order = ps.order_by_x();
    let ys: Vec<T> = order.iter().map(|&i| ps.points()[i].y).collect();
    Ok(ChainFlow::new(&ys).run(k_max))
}

/// Greedy approximation for sets beyond the exact cap: peel off a longest
/// decreasing subsequence `k` times. Never certified.
pub fn peel_k_decreasing<T: Scalar>(ps: &PointSet<T>, k: usize) -> WatermelonResult<T> {
    let order = ps.order_by_x();
    let mut remaining: Vec<usize> = order.clone();
    let mut sequences = Vec::new();
    let mut covered = Vec::new();
    for _ in 0..k {
        if remaining.is_empty() {
            sequences.push(Vec::new());
            continue;
        }
        let chain = longest_decreasing(ps, &remaining);
        let taken: HashSet<usize> = chain.iter().copied().collect();
        remaining.retain(|i| !taken.contains(i));
        covered.extend(chain.iter().copied());
        sequences.push(chain.iter().map(|&i| ps.points()[i]).collect());
    }
    covered.sort_unstable();
    let subset = ps.select(&covered);
    WatermelonResult { size: subset.len(), subset, sequences, certified: false }
}

/// Longest decreasing subsequence of `idx` (indices already sorted by x).
fn longest_decreasing<T: Scalar>(ps: &PointSet<T>, idx: &[usize]) -> Vec<usize> {
    // Patience piles on -y with back pointers.
    let mut tails: Vec<usize> = Vec::new();
    let mut back = vec![usize::MAX; idx.len()];
    for (pos, &i) in idx.iter().enumerate() {
        let y = -ps.points()[i].y;
        let p = tails.partition_point(|&t| -ps.points()[idx[t]].y < y);
        if p > 0 {
            back[pos] = tails[p - 1];
        }
        if p == tails.len() {
            tails.push(pos);
        } else {
            tails[p] = pos;
        }
    }
    let mut out = Vec::new();
    let mut cur = tails.last().copied();
    while let Some(p) = cur {
        out.push(idx[p]);
        cur = (back[p] != usize::MAX).then_some(back[p]);
    }
    out.reverse();
    out
}

/// Checks every structural invariant of `result` and the Greene certificate.
pub fn verify<T: Scalar>(result: &WatermelonResult<T>, ps: &PointSet<T>, k: usize) -> bool {
    let key = |p: &Point<T>| (p.x.as_f64().to_bits(), p.y.as_f64().to_bits());
    let universe: HashSet<_> = ps.points().iter().map(key).collect();
    let subset: HashSet<_> = result.subset.points().iter().map(key).collect();
    if subset.len() != result.subset.len() || !subset.is_subset(&universe) {
        return false;
    }
    let mut seen = HashSet::new();
    for seq in &result.sequences {
        if seq.windows(2).any(|w| !(w[0].x < w[1].x && w[0].y > w[1].y)) {
            return false;
        }
        for p in seq {
            if !seen.insert(key(p)) {
                return false;
            }
        }
    }
    let nonempty = result.sequences.iter().filter(|s| !s.is_empty()).count();
    result.certified
        && seen == subset
        && nonempty <= k
        && result.size == result.subset.len()
        && lis_length(&result.subset) <= k
        && result.size == greene_k_decreasing_size(&rsk_shape(ps), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::staircase_example;
    use crate::geometry::{sample_iid, DensityModel, RngSeed};

    #[test]
    fn example_watermelons() {
        let ps = staircase_example::<f64>();
        let shape = rsk_shape(&ps);
        for k in 0..=4 {
            let r = max_k_decreasing(&ps, k).unwrap();
            assert_eq!(r.size, greene_k_decreasing_size(&shape, k), "k={k}");
            assert!(verify(&r, &ps, k));
        }
        assert_eq!(max_k_decreasing(&ps, 0).unwrap().size, 0);
        assert_eq!(max_k_decreasing(&ps, 3).unwrap().size, 6);
    }

    #[test]
    fn k_at_least_lis_takes_everything() {
        let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 120, RngSeed(4)).unwrap();
        let lis = lis_length(&ps);
        let r = max_k_decreasing(&ps, lis).unwrap();
        assert_eq!(r.size, 120);
        assert_eq!(r.sequences.len(), lis);
    }

    #[test]
    fn removing_a_point_fails_verification() {
        let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 60, RngSeed(12)).unwrap();
        let mut r = max_k_decreasing(&ps, 3).unwrap();
        assert!(verify(&r, &ps, 3));
        let removed = r.sequences[0].pop().unwrap();
        let keep: Vec<_> = r.subset.points().iter().copied().filter(|p| *p != removed).collect();
        r.subset = PointSet::new(keep).unwrap();
        r.size -= 1;
        assert!(!verify(&r, &ps, 3));
    }

    #[test]
    fn cap_is_enforced() {
        let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 30, RngSeed(1)).unwrap();
        match max_k_decreasing_with_cap(&ps, 2, 20) {
            Err(Error::CapExceeded { n: 30, cap: 20 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn profile_is_monotone_and_matches_greene() {
        let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 150, RngSeed(21)).unwrap();
        let shape = rsk_shape(&ps);
        let lis = lis_length(&ps);
        let prof = max_k_decreasing_profile(&ps, lis + 2, DEFAULT_EXACT_CAP).unwrap();
        for (k, &v) in prof.iter().enumerate() {
            assert_eq!(v, greene_k_decreasing_size(&shape, k));
        }
        assert!(prof.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*prof.last().unwrap(), 150);
    }

    #[test]
    fn peeling_is_feasible_but_uncertified() {
        let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 200, RngSeed(3)).unwrap();
        let r = peel_k_decreasing(&ps, 4);
        assert!(!r.certified);
        assert!(lis_length(&r.subset) <= 4);
        assert!(r.size <= max_k_decreasing(&ps, 4).unwrap().size);
        for s in &r.sequences {
            assert!(s.windows(2).all(|w| w[0].x < w[1].x && w[0].y > w[1].y));
        }
        assert!(!verify(&r, &ps, 4));
    }
}
