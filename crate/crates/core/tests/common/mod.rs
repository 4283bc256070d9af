//! Brute-force oracles and random instance generators shared by the
//! integration tests and the acceptance run.
#![allow(dead_code)]

use monosurf::grid::{GridDomain, MonotoneGrid};
use monosurf::PointSet;
use nalgebra::{DMatrix, DVector};
use num_traits::Num;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A random permutation as points `(i, pi(i))`, shifted off the integers.
pub fn random_permutation_points(rng: &mut ChaCha8Rng, n: usize) -> PointSet<f64> {
    let mut ys: Vec<usize> = (0..n).collect();
    ys.shuffle(rng);
    let pairs: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 + 0.5, y as f64 + 0.25)).collect();
    PointSet::from_pairs(&pairs).unwrap()
}

/// Longest increasing subsequence by the quadratic recurrence.
pub fn lis_quadratic(ys: &[f64]) -> usize {
    let mut best = vec![1usize; ys.len()];
    for i in 0..ys.len() {
        for j in 0..i {
            if ys[j] < ys[i] {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

fn ys_by_x(points: &[(f64, f64)]) -> Vec<f64> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    p.into_iter().map(|q| q.1).collect()
}

/// Largest subset with no increasing subsequence longer than `k`, by
/// enumerating all subsets.
pub fn brute_max_k_decreasing(ps: &PointSet<f64>, k: usize) -> usize {
    let pts: Vec<(f64, f64)> = ys_by_x(&ps.points().iter().map(|p| (p.x, p.y)).collect::<Vec<_>>())
        .into_iter()
        .enumerate()
        .map(|(i, y)| (i as f64, y))
        .collect();
    let n = pts.len();
    assert!(n <= 16);
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let ys: Vec<f64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| pts[i].1).collect();
        if lis_quadratic(&ys) <= k {
            best = size;
        }
    }
    best
}

/// `kappa` straight from its definition: the longest increasing subset inside
/// the closed south-west quadrant.
pub fn kappa_direct(ps: &PointSet<f64>, x: f64, y: f64) -> usize {
    let inside: Vec<(f64, f64)> = ps.points().iter().filter(|p| p.x <= x && p.y <= y).map(|p| (p.x, p.y)).collect();
    lis_quadratic(&ys_by_x(&inside))
}

/// `min_{j <= i} u_j + a (x_i - x_j)` by the double loop.
pub fn smooth_1d_direct<T: Num + Copy + PartialOrd>(xs: &[T], us: &[T], a: T) -> Vec<T> {
    (0..xs.len())
        .map(|i| {
            let mut best = us[i];
            for j in 0..=i {
                let c = us[j] + a * (xs[i] - xs[j]);
                if c < best {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Pareto-maximal ceiling nodes by pairwise filtering, as offsets.
pub fn frontier_brute(u: &MonotoneGrid<f64>, i: usize, j: usize, z: f64) -> Vec<(f64, f64)> {
    let d = u.domain();
    let mut ceiling = Vec::new();
    for a in 0..=i {
        for b in 0..=j {
            if u.get(a, b) <= z {
                ceiling.push((a, b));
            }
        }
    }
    let mut out: Vec<(f64, f64)> = ceiling
        .iter()
        .filter(|&&(a, b)| !ceiling.iter().any(|&(c, e)| c >= a && e >= b && (c, e) != (a, b)))
        .map(|&(a, b)| ((i - a) as f64 * d.hx, (j - b) as f64 * d.hy))
        .collect();
    out.sort_by(|p, q| p.partial_cmp(q).unwrap());
    out
}

/// `max_p min_c (p dx + a dy / p)` by evaluating the envelope at every
/// pairwise crossing and every single-curve stationary point.
pub fn envelope_max_brute(corners: &[(f64, f64)], a: f64) -> f64 {
    if corners.iter().any(|c| c.0 == 0.0 && c.1 == 0.0) {
        return 0.0;
    }
    let env = |p: f64| corners.iter().map(|c| p * c.0 + a * c.1 / p).fold(f64::INFINITY, f64::min);
    let mut cands = Vec::new();
    for (k, c) in corners.iter().enumerate() {
        if c.0 > 0.0 && c.1 > 0.0 {
            cands.push((a * c.1 / c.0).sqrt());
        }
        for e in &corners[k + 1..] {
            if c.0 != e.0 && c.1 != e.1 {
                let p2 = a * (e.1 - c.1) / (c.0 - e.0);
                if p2 > 0.0 {
                    cands.push(p2.sqrt());
                }
            }
        }
    }
    cands.into_iter().map(env).fold(0.0, f64::max)
}

/// The smoothed surface by the triple loop over nodes, levels and ceiling
/// nodes, using the given level set.
pub fn smooth_2d_brute(u: &MonotoneGrid<f64>, a: f64, levels: &[f64]) -> Vec<f64> {
    let d = u.domain();
    let mut out = Vec::with_capacity(d.len());
    for i in 0..d.nx {
        for j in 0..d.ny {
            let mut best = u.get(i, j);
            if i > 0 && j > 0 {
                for &z in levels {
                    let f = frontier_brute(u, i, j, z);
                    best = best.min(z + envelope_max_brute(&f, a));
                }
            }
            out.push(best);
        }
    }
    out
}

/// Random doubly increasing grid vanishing on the west and south lines:
/// cumulative sums of nonnegative cell weights, some of them large.
pub fn random_zero_boundary_grid(rng: &mut ChaCha8Rng, m: usize, h: f64) -> MonotoneGrid<f64> {
    let d = GridDomain::new(0.0, 0.0, h, h, m, m).unwrap();
    let mut w = vec![0.0; m * m];
    for i in 1..m {
        for j in 1..m {
            let r: f64 = rng.gen();
            w[i * m + j] = if r < 0.05 {
                rng.gen_range(0.5..2.0)
            } else if r < 0.5 {
                rng.gen_range(0.0..0.02)
            } else {
                0.0
            };
        }
    }
    // Row prefix sums accumulated down the columns; rounding of sums of
    // nonnegative terms is monotone, so the result is exactly monotone.
    let mut v = vec![0.0; m * m];
    for i in 1..m {
        let mut row = 0.0;
        for j in 1..m {
            row += w[i * m + j];
            v[i * m + j] = v[(i - 1) * m + j] + row;
        }
    }
    MonotoneGrid::new(d, v).unwrap()
}

/// Random doubly increasing grid of arbitrary offset on `[0,1]^2`.
pub fn random_monotone_grid(rng: &mut ChaCha8Rng, m: usize) -> MonotoneGrid<f64> {
    let d = GridDomain::spanning(0.0, 0.0, 1.0, 1.0, m).unwrap();
    let raw: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut g = MonotoneGrid::monotone_envelope(d, raw).unwrap().into_values();
    let shift: f64 = rng.gen_range(-2.0..2.0);
    for v in &mut g {
        *v += shift;
    }
    MonotoneGrid::new(d, g).unwrap()
}

/// Lawson-Hanson nonnegative least squares: `argmin_{x >= 0} |M x - d|`.
pub fn nnls(m: &DMatrix<f64>, d: &DVector<f64>) -> DVector<f64> {
    let n = m.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let solve = |passive: &[bool]| -> DVector<f64> {
        let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
        let mut z = DVector::zeros(n);
        if idx.is_empty() {
            return z;
        }
        let sub = DMatrix::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])]);
        let sol = sub.svd(true, true).solve(d, 1e-12).unwrap();
        for (c, &k) in idx.iter().enumerate() {
            z[k] = sol[c];
        }
        z
    };
    for _ in 0..10 * n.max(1) {
        let w = m.transpose() * (d - m * &x);
        let pick = (0..n).filter(|&k| !passive[k] && w[k] > 1e-12).max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap());
        let Some(k) = pick else { break };
        passive[k] = true;
        loop {
            let z = solve(&passive);
            if (0..n).filter(|&k| passive[k]).all(|k| z[k] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for k in (0..n).filter(|&k| passive[k] && z[k] <= 0.0) {
                alpha = alpha.min(x[k] / (x[k] - z[k]));
            }
            x = &x + (&z - &x) * alpha;
            for k in 0..n {
                if passive[k] && x[k].abs() < 1e-14 {
                    passive[k] = false;
                    x[k] = 0.0;
                }
            }
        }
    }
    x
}

/// Constraint rows `A x <= b` describing doubly increasing grids of diameter
/// at most `r`: every edge of the grid graph plus the corner-to-corner band.
pub fn u_r_constraints(d: &GridDomain<f64>, r: f64) -> (Vec<Vec<(usize, f64)>>, Vec<f64>) {
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..d.nx {
        for j in 0..d.ny {
            if i + 1 < d.nx {
                rows.push(vec![(d.idx(i, j), 1.0), (d.idx(i + 1, j), -1.0)]);
                b.push(0.0);
            }
            if j + 1 < d.ny {
                rows.push(vec![(d.idx(i, j), 1.0), (d.idx(i, j + 1), -1.0)]);
                b.push(0.0);
            }
        }
    }
    rows.push(vec![(d.idx(d.nx - 1, d.ny - 1), 1.0), (d.idx(0, 0), -1.0)]);
    b.push(r);
    (rows, b)
}

/// Exact projection of `v` onto the discretised `U_r`, recovered from a
/// candidate `p`: the constraints active at `p` fix the face, the
/// multipliers come from nonnegative least squares on that face, and the
/// oracle point is `v - A^T lambda`. Returns the oracle point and the KKT
/// residual; a small residual certifies optimality of the oracle point.
pub fn qp_projection_oracle(d: &GridDomain<f64>, v: &[f64], p: &[f64], r: f64) -> (Vec<f64>, f64) {
    let (rows, b) = u_r_constraints(d, r);
    let active: Vec<usize> = (0..rows.len())
        .filter(|&k| {
            let ax: f64 = rows[k].iter().map(|&(i, c)| c * p[i]).sum();
            ax >= b[k] - 1e-7
        })
        .collect();
    let n = v.len();
    let m = DMatrix::from_fn(n, active.len(), |i, c| rows[active[c]].iter().filter(|e| e.0 == i).map(|e| e.1).sum());
    let target = DVector::from_iterator(n, v.iter().zip(p).map(|(a, b)| a - b));
    let lambda = nnls(&m, &target);
    let resid = (&m * &lambda - &target).amax();
    let x = DVector::from_column_slice(v) - &m * &lambda;
    (x.iter().copied().collect(), resid)
}

/// Largest violation of the `U_r` constraints.
pub fn u_r_violation(d: &GridDomain<f64>, x: &[f64], r: f64) -> f64 {
    let (rows, b) = u_r_constraints(d, r);
    rows.iter().zip(&b).map(|(row, &bk)| row.iter().map(|&(i, c)| c * x[i]).sum::<f64>() - bk).fold(0.0, f64::max)
}
