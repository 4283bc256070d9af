//! Doubly increasing functions sampled on rectangular grids.
//!
//! Node `(i, j)` sits at `(x0 + i*hx, y0 + j*hy)`; values are stored with the
//! y index fastest, so `values[i * ny + j]`. Cell `(i, j)` is the square with
//! lower-left node `(i, j)`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fmt_sig17, Scalar};
use crate::tableau::StaircaseFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain<T> {
    pub x0: T,
    pub y0: T,
    pub hx: T,
    pub hy: T,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Scalar> GridDomain<T> {
    pub fn new(x0: T, y0: T, hx: T, hy: T, nx: usize, ny: usize) -> Result<Self> {
        if !(hx > T::zero() && hy > T::zero()) || !hx.is_finite() || !hy.is_finite() {
            return Err(Error::InvalidArgument(format!("grid spacings must be positive, got {hx}, {hy}")));
        }
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2x2 nodes, got {nx}x{ny}")));
        }
        if !x0.is_finite() || !y0.is_finite() {
            return Err(Error::InvalidArgument("grid origin must be finite".into()));
        }
        Ok(GridDomain { x0, y0, hx, hy, nx, ny })
    }

    /// `m x m` nodes spanning `[x0, x1] x [y0, y1]`.
    pub fn spanning(x0: T, y0: T, x1: T, y1: T, m: usize) -> Result<Self> {
        let steps = T::lit((m.max(2) - 1) as f64);
        Self::new(x0, y0, (x1 - x0) / steps, (y1 - y0) / steps, m, m)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x0 + T::lit(i as f64) * self.hx
    }

    #[inline]
    pub fn y(&self, j: usize) -> T {
        self.y0 + T::lit(j as f64) * self.hy
    }

    pub fn cells(&self) -> usize {
        (self.nx - 1) * (self.ny - 1)
    }

    #[inline]
    pub fn cell_idx(&self, i: usize, j: usize) -> usize {
        i * (self.ny - 1) + j
    }

    pub fn cell_center(&self, i: usize, j: usize) -> (T, T) {
        let half = T::lit(0.5);
        (self.x(i) + half * self.hx, self.y(j) + half * self.hy)
    }

    pub fn cell_area(&self) -> T {
        self.hx * self.hy
    }

    /// Node coordinates in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (T, T)> + '_ {
        (0..self.nx).flat_map(move |i| (0..self.ny).map(move |j| (self.x(i), self.y(j))))
    }

    /// Trapezoid quadrature weights; they sum to the rectangle's area.
    pub fn node_weights(&self) -> Vec<T> {
        let mut w = Vec::with_capacity(self.len());
        let quarter = T::lit(0.25) * self.cell_area();
        for i in 0..self.nx {
            let ci = if i == 0 || i == self.nx - 1 { 1.0 } else { 2.0 };
            for j in 0..self.ny {
                let cj = if j == 0 || j == self.ny - 1 { 1.0 } else { 2.0 };
                w.push(quarter * T::lit(ci * cj));
            }
        }
        w
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && close(self.x0, other.x0)
            && close(self.y0, other.y0)
            && close(self.hx, other.hx)
            && close(self.hy, other.hy)
    }

    fn ensure_same(&self, other: &Self) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

fn close<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-9) * (T::one() + a.abs().max(b.abs()))
}

/// A real doubly increasing function on the nodes of a [`GridDomain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneGrid<T> {
    domain: GridDomain<T>,
    values: Vec<T>,
}

/// First violation of double monotonicity, if any.
pub fn monotone_violation<T: Scalar>(domain: &GridDomain<T>, values: &[T]) -> Option<String> {
    for i in 0..domain.nx {
        for j in 0..domain.ny {
            let v = values[domain.idx(i, j)];
            if !v.is_finite() {
                return Some(format!("non-finite value at ({i},{j})"));
            }
            if i > 0 && values[domain.idx(i - 1, j)] > v {
                return Some(format!("decrease along x into ({i},{j})"));
            }
            if j > 0 && values[domain.idx(i, j - 1)] > v {
                return Some(format!("decrease along y into ({i},{j})"));
            }
        }
    }
    None
}

impl<T: Scalar> MonotoneGrid<T> {
    pub fn new(domain: GridDomain<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::DomainMismatch(format!("{} values for a {}x{} grid", values.len(), domain.nx, domain.ny)));
        }
        if let Some(msg) = monotone_violation(&domain, &values) {
            return Err(Error::NotMonotone(msg));
        }
        Ok(MonotoneGrid { domain, values })
    }

    pub fn from_fn(domain: GridDomain<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        let values = domain.nodes().map(|(x, y)| f(x, y)).collect();
        Self::new(domain, values)
    }

    pub fn constant(domain: GridDomain<T>, c: T) -> Self {
        MonotoneGrid { domain, values: vec![c; domain.len()] }
    }

    /// Smallest doubly increasing grid above `values` (running maxima).
    pub fn monotone_envelope(domain: GridDomain<T>, mut values: Vec<T>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::DomainMismatch("value count".into()));
        }
        for i in 0..domain.nx {
            for j in 0..domain.ny {
                let mut v = values[domain.idx(i, j)];
                if i > 0 {
                    v = v.max(values[domain.idx(i - 1, j)]);
                }
                if j > 0 {
                    v = v.max(values[domain.idx(i, j - 1)]);
                }
                values[domain.idx(i, j)] = v;
            }
        }
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &GridDomain<T> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.domain.idx(i, j)]
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    /// `sup - inf` of the values, read off the two extreme corners.
    pub fn diam(&self) -> T {
        self.max() - self.min()
    }

    /// The grid plus a constant.
    pub fn shifted(&self, c: T) -> Self {
        MonotoneGrid { domain: self.domain, values: self.values.iter().map(|&v| v + c).collect() }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for i in 0..self.domain.nx {
            let row: Vec<String> = (0..self.domain.ny).map(|j| fmt_sig17(self.get(i, j).as_f64())).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads values written by [`MonotoneGrid::write_csv`]; the domain comes
    /// from the JSON sidecar.
    pub fn read_csv<R: BufRead>(r: R, domain: GridDomain<T>) -> Result<Self> {
        let values = read_values_csv(r)?;
        Self::new(domain, values)
    }
}

/// Parses a row-major CSV of numbers (no header).
pub fn read_values_csv<T: Scalar, R: BufRead>(r: R) -> Result<Vec<T>> {
    let mut values = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            values.push(T::lit(v));
        }
    }
    Ok(values)
}

/// Extends a doubly increasing function given on some nodes to the whole
/// grid: a node takes the supremum over the given nodes it dominates, or the
/// infimum of all given values if it dominates none.
pub fn extend_monotone<T: Scalar>(domain: GridDomain<T>, partial: &[Option<T>]) -> Result<MonotoneGrid<T>> {
    if partial.len() != domain.len() {
        return Err(Error::DomainMismatch(format!("{} entries for a {}x{} grid", partial.len(), domain.nx, domain.ny)));
    }
    let inf = partial
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<T>, v| Some(acc.map_or(v, |a| a.min(v))))
        .ok_or_else(|| Error::InvalidArgument("no defined values to extend".into()))?;
    // sup over defined nodes weakly south-west, None if there are none.
    let mut sup: Vec<Option<T>> = vec![None; domain.len()];
    for i in 0..domain.nx {
        for j in 0..domain.ny {
            let west = if i > 0 { sup[domain.idx(i - 1, j)] } else { None };
            let south = if j > 0 { sup[domain.idx(i, j - 1)] } else { None };
            let below = match (west, south) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            let own = partial[domain.idx(i, j)];
            if let (Some(v), Some(b)) = (own, below) {
                if b > v {
                    return Err(Error::NotMonotone(format!("defined value {v} at ({i},{j}) lies below a dominated value {b}")));
                }
            }
            sup[domain.idx(i, j)] = own.or(below);
        }
    }
    let values = sup.into_iter().map(|s| s.unwrap_or(inf)).collect();
    MonotoneGrid::new(domain, values)
}

/// Cell-wise products of the discrete partial derivatives,
/// `theta = (D_x v)(D_y v) / (hx hy)`, where `D_x v` averages the forward
/// differences along the cell's south and north edges (and `D_y v` along its
/// west and east edges).
pub fn forward_products<T: Scalar>(g: &MonotoneGrid<T>) -> Vec<T> {
    cell_products(g.domain(), g.values())
}

/// [`forward_products`] on raw values, which need not be monotone.
pub fn cell_products<T: Scalar>(d: &GridDomain<T>, v: &[T]) -> Vec<T> {
    let half = T::lit(0.5);
    let inv_area = T::one() / d.cell_area();
    let mut out = Vec::with_capacity(d.cells());
    for i in 0..d.nx - 1 {
        for j in 0..d.ny - 1 {
            let (a, b, c, e) = (v[d.idx(i, j)], v[d.idx(i + 1, j)], v[d.idx(i, j + 1)], v[d.idx(i + 1, j + 1)]);
            let dx = half * ((b - a) + (e - c));
            let dy = half * ((c - a) + (e - b));
            out.push(dx * dy * inv_area);
        }
    }
    out
}

/// Integral of `|g1 - g2|` with trapezoid weights.
pub fn l1_distance<T: Scalar>(g1: &MonotoneGrid<T>, g2: &MonotoneGrid<T>) -> Result<T> {
    g1.domain.ensure_same(&g2.domain)?;
    let w = g1.domain.node_weights();
    Ok(g1.values.iter().zip(&g2.values).zip(&w).map(|((&a, &b), &w)| w * (a - b).abs()).sum())
}

/// `min_c` of the integral of `|g1 - (g2 + c)|`, with the minimising `c`.
pub fn l1_distance_shifted<T: Scalar>(g1: &MonotoneGrid<T>, g2: &MonotoneGrid<T>) -> Result<(T, T)> {
    g1.domain.ensure_same(&g2.domain)?;
    let diffs: Vec<T> = g1.values.iter().zip(&g2.values).map(|(&a, &b)| a - b).collect();
    Ok(shift_minimized_l1(&diffs, &g1.domain.node_weights()))
}

/// Returns `(min_c sum_i w_i |d_i - c|, argmin c)`; the minimiser is a
/// weighted median of `d`.
pub fn shift_minimized_l1<T: Scalar>(diffs: &[T], weights: &[T]) -> (T, T) {
    let mut pairs: Vec<(T, T)> = diffs.iter().copied().zip(weights.iter().copied()).filter(|(_, w)| *w > T::zero()).collect();
    if pairs.is_empty() {
        return (T::zero(), T::zero());
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: T = pairs.iter().map(|p| p.1).sum();
    let half = T::lit(0.5) * total;
    let mut acc = T::zero();
    let mut c = pairs[pairs.len() - 1].0;
    for &(d, w) in &pairs {
        acc = acc + w;
        if acc >= half {
            c = d;
            break;
        }
    }
    let dist = pairs.iter().map(|&(d, w)| w * (d - c).abs()).sum();
    (dist, c)
}

/// Samples `scale * kappa` at the grid nodes.
pub fn from_kappa<T: Scalar>(s: &StaircaseFunction<T>, scale: T, domain: GridDomain<T>) -> Result<MonotoneGrid<T>> {
    if !(scale >= T::zero()) {
        return Err(Error::InvalidArgument(format!("kappa scale must be nonnegative, got {scale}")));
    }
    MonotoneGrid::from_fn(domain, |x, y| scale * T::lit(s.eval(x, y) as f64))
}

/// Tuning of the alternating projection onto the discretised `U_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions { tol: 1e-8, max_sweeps: 10_000 }
    }
}

#[derive(Debug, Clone)]
pub struct Projection<T> {
    pub grid: MonotoneGrid<T>,
    pub sweeps: usize,
    /// Largest change of any value during the final sweep.
    pub residual: f64,
    pub converged: bool,
}

/// Least-squares isotonic regression of a sequence (pool adjacent violators).
pub fn pava<T: Scalar>(y: &mut [T]) {
    // Blocks as (sum, count, mean) on a stack.
    let mut sums: Vec<T> = Vec::with_capacity(y.len());
    let mut counts: Vec<usize> = Vec::with_capacity(y.len());
    for &v in y.iter() {
        let mut s = v;
        let mut c = 1usize;
        while let (Some(&ps), Some(&pc)) = (sums.last(), counts.last()) {
            // Merge while the previous block mean exceeds the current one.
            if ps * T::lit(c as f64) > s * T::lit(pc as f64) {
                s = s + ps;
                c += pc;
                sums.pop();
                counts.pop();
            } else {
                break;
            }
        }
        sums.push(s);
        counts.push(c);
    }
    let mut k = 0;
    for (s, c) in sums.into_iter().zip(counts) {
        let mean = s / T::lit(c as f64);
        for slot in &mut y[k..k + c] {
            *slot = mean;
        }
        k += c;
    }
}

fn project_rows<T: Scalar>(d: &GridDomain<T>, v: &mut [T]) {
    for row in v.chunks_mut(d.ny) {
        pava(row);
    }
}

fn project_columns<T: Scalar>(d: &GridDomain<T>, v: &mut [T], scratch: &mut Vec<T>) {
    for j in 0..d.ny {
        scratch.clear();
        scratch.extend((0..d.nx).map(|i| v[d.idx(i, j)]));
        pava(scratch);
        for (i, &s) in scratch.iter().enumerate() {
            v[d.idx(i, j)] = s;
        }
    }
}

/// The offset `c` minimising the squared distance of `v` to the band
/// `[c, c + r]`, or `None` when `v` already fits.
pub fn band_offset<T: Scalar>(v: &[T], r: T) -> Option<T> {
    let mut s: Vec<T> = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (lo, hi) = (s[0], s[s.len() - 1]);
    if hi - lo <= r {
        return None;
    }
    let mut prefix = Vec::with_capacity(s.len() + 1);
    prefix.push(T::zero());
    for &x in &s {
        let last = *prefix.last().unwrap();
        prefix.push(last + x);
    }
    let total = prefix[s.len()];
    // Counts and sums of values strictly below c and strictly above c + r.
    let stats = |c: T, above_strict: bool| {
        let l = s.partition_point(|&x| x < c);
        let u_start = if above_strict { s.partition_point(|&x| x <= c + r) } else { s.partition_point(|&x| x < c + r) };
        (l, prefix[l], s.len() - u_start, total - prefix[u_start])
    };
    // g(c) = sum_{x<c} (c - x) - sum_{x>c+r} (x - c - r), nondecreasing in c.
    let g = |c: T| {
        let (l, sl, u, su) = stats(c, true);
        T::lit(l as f64) * c - sl - (su - T::lit(u as f64) * (c + r))
    };
    let mut bps: Vec<T> = s.iter().flat_map(|&x| [x, x - r]).filter(|&b| b >= lo && b <= hi - r).collect();
    bps.push(lo);
    bps.push(hi - r);
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bps.dedup();
    // Largest breakpoint with g <= 0.
    let k = bps.partition_point(|&b| g(b) <= T::zero());
    let b = bps[k.saturating_sub(1)];
    let upper = bps.get(k).copied().unwrap_or(hi - r);
    // On (b, upper) the active sets are fixed: below = {x <= b}, above = {x > b + r}.
    let l = s.partition_point(|&x| x <= b);
    let u_start = s.partition_point(|&x| x <= b + r);
    let (nl, sl, nu, su) = (l, prefix[l], s.len() - u_start, total - prefix[u_start]);
    let denom = T::lit((nl + nu) as f64);
    let c = if denom > T::zero() { (sl + su - T::lit(nu as f64) * r) / denom } else { b };
    Some(c.max(b).min(upper))
}

fn project_band<T: Scalar>(v: &mut [T], r: T) {
    if let Some(c) = band_offset(v, r) {
        let top = c + r;
        for x in v.iter_mut() {
            *x = x.max(c).min(top);
        }
    }
}

/// Euclidean projection of `values` onto doubly increasing grids with
/// diameter at most `r`, by Dykstra's method cycling over row
/// monotonicity, column monotonicity and the diameter band. The result is
/// always feasible; `converged` reports whether the sweep-to-sweep change
/// dropped below `tol`.
pub fn project_u_r_report<T: Scalar>(
    domain: GridDomain<T>,
    values: &[T],
    r: T,
    opts: ProjectionOptions,
) -> Result<Projection<T>> {
    if values.len() != domain.len() {
        return Err(Error::DomainMismatch("value count".into()));
    }
    if !(r >= T::zero()) {
        return Err(Error::InvalidArgument(format!("diameter bound must be nonnegative, got {r}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in projection input".into()));
    }
    let n = values.len();
    let mut x = values.to_vec();
    let (mut p, mut q, mut w) = (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut y = vec![T::zero(); n];
    let mut prev = x.clone();
    let mut scratch = Vec::with_capacity(domain.nx);
    let tol = T::lit(opts.tol);
    let mut sweeps = 0;
    let mut residual = f64::INFINITY;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        prev.copy_from_slice(&x);

        for k in 0..n {
            y[k] = x[k] + p[k];
        }
        project_rows(&domain, &mut y);
        for k in 0..n {
            p[k] = x[k] + p[k] - y[k];
        }
        std::mem::swap(&mut x, &mut y);

        for k in 0..n {
            y[k] = x[k] + q[k];
        }
        project_columns(&domain, &mut y, &mut scratch);
        for k in 0..n {
            q[k] = x[k] + q[k] - y[k];
        }
        std::mem::swap(&mut x, &mut y);

        for k in 0..n {
            y[k] = x[k] + w[k];
        }
        project_band(&mut y, r);
        for k in 0..n {
            w[k] = x[k] + w[k] - y[k];
        }
        std::mem::swap(&mut x, &mut y);

        let change = x.iter().zip(&prev).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
        residual = change.as_f64();
        if change < tol {
            break;
        }
    }
    let converged = residual < opts.tol;
    // The iterate satisfies the monotonicity constraints only up to the
    // residual; lift it to the monotone envelope and clip into the band.
    let mut grid = MonotoneGrid::monotone_envelope(domain, x)?.into_values();
    project_band(&mut grid, r);
    let grid = MonotoneGrid::new(domain, grid)?;
    Ok(Projection { grid, sweeps, residual, converged })
}

/// [`project_u_r_report`] that fails when the iteration does not converge.
pub fn project_u_r<T: Scalar>(domain: GridDomain<T>, values: &[T], r: T, opts: ProjectionOptions) -> Result<MonotoneGrid<T>> {
    let p = project_u_r_report(domain, values, r, opts)?;
    if !p.converged {
        return Err(Error::NonConvergence { iterations: p.sweeps, residual: p.residual });
    }
    Ok(p.grid)
}
