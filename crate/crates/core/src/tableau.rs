//! Longest monotone subsequences, the Robinson–Schensted shape with its
//! Greene invariants, and the staircase surface `kappa_P`.

use serde::{Deserialize, Serialize};

use crate::geometry::PointSet;
use crate::scalar::Scalar;

/// Length of the longest increasing subset (patience sorting, `O(n log n)`).
pub fn lis_length<T: Scalar>(ps: &PointSet<T>) -> usize {
    let mut tails: Vec<T> = Vec::new();
    for i in ps.order_by_x() {
        let y = ps.points()[i].y;
        let pos = tails.partition_point(|t| *t < y);
        if pos == tails.len() {
            tails.push(y);
        } else {
            tails[pos] = y;
        }
    }
    tails.len()
}

/// Length of the longest decreasing subset.
pub fn lds_length<T: Scalar>(ps: &PointSet<T>) -> usize {
    lis_length(&ps.flip_y())
}

/// Prefix-maximum Fenwick tree over ranks `0..n`.
struct MaxFenwick {
    tree: Vec<usize>,
}

impl MaxFenwick {
    fn new(n: usize) -> Self {
        MaxFenwick { tree: vec![0; n + 1] }
    }

    /// Max over ranks `0..rank` (exclusive).
    fn prefix_max(&self, rank: usize) -> usize {
        let mut i = rank;
        let mut best = 0;
        while i > 0 {
            best = best.max(self.tree[i]);
            i &= i - 1;
        }
        best
    }

    fn update(&mut self, rank: usize, value: usize) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] = self.tree[i].max(value);
            i += i & i.wrapping_neg();
        }
    }
}

/// For every point, the length of the longest increasing subset ending at it.
pub fn chain_lengths<T: Scalar>(ps: &PointSet<T>) -> Vec<usize> {
    let ranks = ps.y_ranks();
    let mut fw = MaxFenwick::new(ps.len());
    let mut len = vec![0; ps.len()];
    for i in ps.order_by_x() {
        let l = fw.prefix_max(ranks[i]) + 1;
        len[i] = l;
        fw.update(ranks[i], l);
    }
    len
}

/// A Young diagram `lambda_1 >= lambda_2 >= ... > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct YoungShape(Vec<usize>);

impl YoungShape {
    /// Returns `None` unless the rows are positive and weakly decreasing.
    pub fn new(rows: Vec<usize>) -> Option<Self> {
        let ok = rows.iter().all(|&r| r > 0) && rows.windows(2).all(|w| w[0] >= w[1]);
        ok.then_some(YoungShape(rows))
    }

    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// `lambda_1 + ... + lambda_k`: the largest union of `k` increasing subsets.
    pub fn k_increasing_size(&self, k: usize) -> usize {
        self.0.iter().take(k).sum()
    }

    /// `sum_i min(lambda_i, k)`: the largest union of `k` decreasing subsets.
    pub fn k_decreasing_size(&self, k: usize) -> usize {
        self.0.iter().map(|&r| r.min(k)).sum()
    }
}

/// Shape of the insertion tableau of the permutation read off `ps`.
pub fn rsk_shape<T: Scalar>(ps: &PointSet<T>) -> YoungShape {
    let ranks = ps.y_ranks();
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for i in ps.order_by_x() {
        let mut v = ranks[i];
        let mut r = 0;
        loop {
            if r == rows.len() {
                rows.push(vec![v]);
                break;
            }
            let row = &mut rows[r];
            let pos = row.partition_point(|&e| e < v);
            if pos == row.len() {
                row.push(v);
                break;
            }
            std::mem::swap(&mut row[pos], &mut v);
            r += 1;
        }
    }
    YoungShape(rows.iter().map(Vec::len).collect())
}

/// Maximal size of a `k`-decreasing subset predicted by Greene's theorem.
pub fn greene_k_decreasing_size(shape: &YoungShape, k: usize) -> usize {
    shape.k_decreasing_size(k)
}

/// The step function `kappa_P(x, y)`: the longest increasing subset of `P`
/// inside the closed south-west quadrant of `(x, y)`.
///
/// Level `l` holds the points whose longest increasing chain ending there has
/// length exactly `l`. These form an antichain sorted by increasing x (and
/// therefore decreasing y), and they are the minimal points of the region
/// `{kappa >= l}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseFunction<T> {
    pub levels: Vec<Vec<(T, T)>>,
}

impl<T: Scalar> StaircaseFunction<T> {
    /// Maximum value of the surface, equal to the LIS length of the source.
    pub fn max_level(&self) -> usize {
        self.levels.len()
    }

    fn reaches(&self, level: usize, x: T, y: T) -> bool {
        let frontier = &self.levels[level - 1];
        let pos = frontier.partition_point(|p| p.0 <= x);
        pos > 0 && frontier[pos - 1].1 <= y
    }

    pub fn eval(&self, x: T, y: T) -> usize {
        // Level regions are nested, so the predicate is monotone in the level.
        let (mut lo, mut hi) = (0, self.levels.len());
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if self.reaches(mid, x, y) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        lo
    }
}

pub fn kappa_surface<T: Scalar>(ps: &PointSet<T>) -> StaircaseFunction<T> {
    let len = chain_lengths(ps);
    let max = len.iter().copied().max().unwrap_or(0);
    let mut levels = vec![Vec::new(); max];
    for i in ps.order_by_x() {
        let p = ps.points()[i];
        levels[len[i] - 1].push((p.x, p.y));
    }
    StaircaseFunction { levels }
}

pub fn eval_kappa<T: Scalar>(s: &StaircaseFunction<T>, x: T, y: T) -> usize {
    s.eval(x, y)
}
