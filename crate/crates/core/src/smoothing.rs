//! Continuity smoothing of monotone functions.
//!
//! In one variable, `smooth_1d` is the inf-convolution of `u` with the ramp of
//! slope `a`: the highest function below `u` whose increments never exceed
//! `a` per unit length.
//!
//! In two variables, for a level `z` the *ceiling* of a node is the set of
//! grid nodes weakly south-west of it where `u <= z`. An *a-plane* has x-slope
//! `p` and y-slope `a/p`. The height `u_z` of a node is the highest point
//! through which some a-plane passes weakly below the whole ceiling (viewed
//! at height `z`), and the smoothed surface takes the infimum of `u_z` over
//! `z`. With `a = 4C`, wherever the result differs from `u` its slope product
//! is at least `C`, while it stays between `0` and `u` and is continuous.

use num_traits::Num;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RngSeed;
use crate::grid::{GridDomain, MonotoneGrid};
use crate::scalar::Scalar;

/// Lower envelope `min_{j <= i} (u_j + a (x_i - x_j))` in one pass.
///
/// Requires `xs` strictly increasing from `0` and `us` nondecreasing from `0`.
/// Generic over any ordered field so it can run on exact rationals.
pub fn smooth_1d<T>(xs: &[T], us: &[T], a: T) -> Result<Vec<T>>
where
    T: Num + Copy + PartialOrd,
{
    if xs.len() != us.len() {
        return Err(Error::InvalidArgument(format!("{} abscissae for {} values", xs.len(), us.len())));
    }
    if !(a > T::zero()) {
        return Err(Error::InvalidArgument("slope a must be positive".into()));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("abscissae must be strictly increasing".into()));
    }
    if us.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument("values must be nondecreasing".into()));
    }
    if let (Some(&x0), Some(&u0)) = (xs.first(), us.first()) {
        if x0 != T::zero() || u0 != T::zero() {
            return Err(Error::Precondition("smoothing starts from u(0) = 0".into()));
        }
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut best: Option<T> = None;
    for (&x, &u) in xs.iter().zip(us) {
        let cand = u - a * x;
        let m = match best {
            Some(b) if b <= cand => b,
            _ => cand,
        };
        best = Some(m);
        out.push(a * x + m);
    }
    Ok(out)
}

/// Parameters of the two-dimensional operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams<T> {
    /// Target lower bound on the slope product where the surface is lowered.
    pub c: T,
    /// Slope product of the planes, always `4 c`.
    pub a: T,
    /// Number of quantile levels for `z`; `0` means every distinct value of `u`.
    pub z_levels: usize,
    /// Relative slack for the slope-product check.
    pub product_tol: T,
}

impl<T: Scalar> SmoothingParams<T> {
    pub fn new(c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
        }
        Ok(SmoothingParams { c, a: T::lit(4.0) * c, z_levels: 64, product_tol: T::lit(0.2) })
    }

    pub fn with_z_levels(mut self, z_levels: usize) -> Self {
        self.z_levels = z_levels;
        self
    }
}

/// Pareto-maximal nodes of a ceiling, as offsets `(dx, dy)` from the query
/// node, with `dx` strictly increasing and `dy` strictly decreasing. The first
/// corner has `dx = 0` and the last has `dy = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CeilingFrontier<T> {
    corners: Vec<(T, T)>,
}

impl<T: Scalar> CeilingFrontier<T> {
    pub fn new(corners: Vec<(T, T)>) -> Result<Self> {
        let (first, last) = match (corners.first(), corners.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(Error::InvalidArgument("empty frontier".into())),
        };
        if first.0 != T::zero() || last.1 != T::zero() {
            return Err(Error::InvalidArgument("frontier must reach both axes".into()));
        }
        if corners.iter().any(|c| c.0 < T::zero() || c.1 < T::zero()) {
            return Err(Error::InvalidArgument("negative offset".into()));
        }
        if corners.windows(2).any(|w| !(w[0].0 < w[1].0 && w[0].1 > w[1].1)) {
            return Err(Error::InvalidArgument("corners must form a strict staircase".into()));
        }
        Ok(CeilingFrontier { corners })
    }

    pub fn corners(&self) -> &[(T, T)] {
        &self.corners
    }
}

fn check_zero_boundary<T: Scalar>(u: &MonotoneGrid<T>) -> Result<()> {
    let d = u.domain();
    let west = (0..d.ny).all(|j| u.get(0, j) == T::zero());
    let south = (0..d.nx).all(|i| u.get(i, 0) == T::zero());
    if !(west && south) {
        return Err(Error::Precondition("u must vanish on the west and south boundary lines".into()));
    }
    Ok(())
}

/// For each column, the highest row index with `u <= z` (or `None`).
fn column_tops<T: Scalar>(u: &MonotoneGrid<T>, z: T) -> Vec<Option<usize>> {
    let d = u.domain();
    (0..d.nx)
        .map(|i| {
            let col = &u.values()[d.idx(i, 0)..d.idx(i, 0) + d.ny];
            col.partition_point(|&v| v <= z).checked_sub(1)
        })
        .collect()
}

/// Frontier offsets for node `(i, j)` from precomputed column tops, written
/// into `out`. Returns `false` if the ceiling misses an axis.
fn frontier_from_tops<T: Scalar>(d: &GridDomain<T>, tops: &[Option<usize>], i: usize, j: usize, out: &mut Vec<(T, T)>) -> bool {
    out.clear();
    let mut best: Option<usize> = None;
    for col in (0..=i).rev() {
        let top = match tops[col] {
            Some(t) => t.min(j),
            None => continue,
        };
        if best.map_or(true, |b| top > b) {
            best = Some(top);
            out.push((T::lit((i - col) as f64) * d.hx, T::lit((j - top) as f64) * d.hy));
            if top == j {
                break;
            }
        }
    }
    matches!(out.first(), Some(c) if c.0 == T::zero()) && matches!(out.last(), Some(c) if c.1 == T::zero())
}

/// The Pareto-maximal nodes of the `(node, z)` ceiling of `u`.
pub fn ceiling_frontier<T: Scalar>(u: &MonotoneGrid<T>, node: (usize, usize), z: T) -> Result<CeilingFrontier<T>> {
    if !(z >= T::zero()) {
        return Err(Error::InvalidArgument(format!("level z must be nonnegative, got {z}")));
    }
    let d = u.domain();
    if node.0 >= d.nx || node.1 >= d.ny {
        return Err(Error::InvalidArgument(format!("node {node:?} outside the grid")));
    }
    check_zero_boundary(u)?;
    let tops = column_tops(u, z);
    let mut corners = Vec::new();
    frontier_from_tops(d, &tops, node.0, node.1, &mut corners);
    CeilingFrontier::new(corners)
}

/// `x`-slope at which the curves of corners `hi` (larger dx) and `lo` cross.
#[inline]
fn crossing<T: Scalar>(hi: (T, T), lo: (T, T), a: T) -> T {
    (a * (lo.1 - hi.1) / (hi.0 - lo.0)).sqrt()
}

#[inline]
fn plane<T: Scalar>(c: (T, T), p: T, a: T) -> T {
    p * c.0 + a / p * c.1
}

/// Best a-plane under a ceiling viewed at height `z`: returns `(p, h)` with
/// `h = max_p min_corner (z + p dx + (a/p) dy)`.
///
/// Each corner contributes a convex curve in `p` and any two cross exactly
/// once, so the lower envelope is assembled with a stack and its maximum sits
/// at one of its breakpoints.
pub fn best_plane<T: Scalar>(f: &CeilingFrontier<T>, a: T, z: T) -> (T, T) {
    let (p, g) = envelope_max(&f.corners, a);
    (p, z + g)
}

fn envelope_max<T: Scalar>(corners: &[(T, T)], a: T) -> (T, T) {
    if corners.iter().any(|c| c.0 == T::zero() && c.1 == T::zero()) {
        return (a.sqrt(), T::zero());
    }
    // Curves in order of decreasing dx dominate the envelope as p grows.
    let mut stack: Vec<(T, T)> = Vec::with_capacity(corners.len());
    for &c in corners.iter().rev() {
        while stack.len() >= 2 {
            let (prev, top) = (stack[stack.len() - 2], stack[stack.len() - 1]);
            if crossing(prev, top, a) >= crossing(top, c, a) {
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(c);
    }
    let mut best = (a.sqrt(), T::zero());
    for w in stack.windows(2) {
        let p = crossing(w[0], w[1], a);
        let h = plane(w[0], p, a).min(plane(w[1], p, a));
        if h > best.1 {
            best = (p, h);
        }
    }
    best
}

/// Height of the best a-plane at `node` for level `z` (the `z`-slice of the
/// smoothed surface before the infimum over `z`).
pub fn plane_height<T: Scalar>(u: &MonotoneGrid<T>, node: (usize, usize), z: T, a: T) -> Result<T> {
    let f = ceiling_frontier(u, node, z)?;
    Ok(best_plane(&f, a, z).1)
}

/// The quantised levels of `z`: `z_levels` evenly spaced order statistics of
/// all node values (deduplicated), or every distinct value when `z_levels`
/// is `0`. Always contains the minimum value.
pub fn z_level_set<T: Scalar>(u: &MonotoneGrid<T>, z_levels: usize) -> Vec<T> {
    let mut s = u.values().to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<T> = if z_levels == 0 || z_levels >= s.len() {
        s
    } else if z_levels == 1 {
        vec![s[0]]
    } else {
        let last = (s.len() - 1) as f64;
        (0..z_levels).map(|k| s[((k as f64) * last / ((z_levels - 1) as f64)).round() as usize]).collect()
    };
    out.dedup();
    out
}

/// The smoothed surface of `u`, which must vanish on its west and south
/// boundary lines. Distances are measured from those lines.
pub fn smooth_2d<T: Scalar>(u: &MonotoneGrid<T>, params: &SmoothingParams<T>) -> Result<MonotoneGrid<T>> {
    check_zero_boundary(u)?;
    if !(params.a > T::zero()) {
        return Err(Error::InvalidArgument("slope product a must be positive".into()));
    }
    let d = *u.domain();
    let levels = z_level_set(u, params.z_levels);
    let tops: Vec<Vec<Option<usize>>> = levels.iter().map(|&z| column_tops(u, z)).collect();
    let a = params.a;
    let mut values = vec![T::zero(); d.len()];
    values.par_chunks_mut(d.ny).enumerate().for_each(|(i, row)| {
        let mut corners = Vec::new();
        for (j, slot) in row.iter_mut().enumerate() {
            let own = u.get(i, j);
            if i == 0 || j == 0 {
                *slot = own;
                continue;
            }
            let mut best = own;
            for (z, t) in levels.iter().zip(&tops) {
                // u_z >= z, so no later level can beat the current minimum.
                if *z >= best {
                    break;
                }
                if frontier_from_tops(&d, t, i, j, &mut corners) {
                    let h = *z + envelope_max(&corners, a).1;
                    if h < best {
                        best = h;
                    }
                }
            }
            *slot = best;
        }
    });
    // Rounding in the plane heights can leave last-ulp dips; the running
    // maximum stays below u because u is doubly increasing.
    MonotoneGrid::monotone_envelope(d, values)
}

/// Applies [`smooth_2d`] to an arbitrary doubly increasing grid: shifts its
/// minimum to zero, pads a zero line to the west and south, smooths, and
/// undoes the padding and shift. The diameter never grows.
pub fn smooth_monotone<T: Scalar>(u: &MonotoneGrid<T>, params: &SmoothingParams<T>) -> Result<MonotoneGrid<T>> {
    let d = *u.domain();
    let base = u.min();
    let padded_domain = GridDomain::new(d.x0 - d.hx, d.y0 - d.hy, d.hx, d.hy, d.nx + 1, d.ny + 1)?;
    let mut padded = vec![T::zero(); padded_domain.len()];
    for i in 0..d.nx {
        for j in 0..d.ny {
            padded[padded_domain.idx(i + 1, j + 1)] = u.get(i, j) - base;
        }
    }
    let smoothed = smooth_2d(&MonotoneGrid::new(padded_domain, padded)?, params)?;
    let mut values = Vec::with_capacity(d.len());
    for i in 0..d.nx {
        for j in 0..d.ny {
            values.push(smoothed.get(i + 1, j + 1) + base);
        }
    }
    MonotoneGrid::new(d, values)
}

/// Maximum violation of every smoothing invariant, for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    /// `max(0, -min smoothed)`.
    pub below_zero: f64,
    /// `max(smoothed - u)`, clipped at zero.
    pub above_u: f64,
    /// Largest decrease between neighbouring nodes.
    pub monotone: f64,
    pub modulus_pairs: usize,
    /// Largest excess of an increment over `sqrt(a (y dx + x dy))`.
    pub modulus: f64,
    /// Largest gap between consecutive `z` levels. Quantising `z` can raise
    /// the surface by at most this much, so it bounds the modulus excess;
    /// with every distinct value as a level it is zero.
    pub z_gap: f64,
    pub lower_variation_samples: usize,
    /// Largest shortfall of a `z`-slice increment below `sqrt(a dx dy)`.
    pub lower_variation: f64,
    pub product_nodes: usize,
    /// Fraction of checked nodes whose central-difference product is at
    /// least `(1 - product_tol) C`.
    pub product_fraction_tol: f64,
    /// Fraction at least `C / 2`.
    pub product_fraction_half: f64,
    pub product_min: f64,
}

impl SmoothingReport {
    /// Exact invariants at the stated tolerances (the modulus up to the
    /// level gap), plus the slope product at 95% of the checked nodes.
    pub fn passes(&self) -> bool {
        self.below_zero == 0.0
            && self.above_u == 0.0
            && self.monotone == 0.0
            && self.modulus <= 1e-9 + self.z_gap
            && self.lower_variation <= 1e-9
            && (self.product_nodes == 0 || self.product_fraction_half >= 0.95)
    }
}

/// Nodes where the slope-product property is meaningful: interior, lowered by
/// more than 5% of the diameter with all four neighbours lowered too, and not
/// next to a jump of `u` larger than 20% of the diameter.
pub fn product_check_nodes<T: Scalar>(u: &MonotoneGrid<T>, s: &MonotoneGrid<T>) -> Vec<(usize, usize)> {
    let d = u.domain();
    let diam = u.diam();
    let gap = |i: usize, j: usize| u.get(i, j) - s.get(i, j);
    let mut out = Vec::new();
    for i in 1..d.nx.saturating_sub(1) {
        for j in 1..d.ny.saturating_sub(1) {
            let nbrs = [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)];
            if gap(i, j) <= T::lit(0.05) * diam || nbrs.iter().any(|&(a, b)| gap(a, b) <= T::zero()) {
                continue;
            }
            let jump = nbrs.iter().any(|&(a, b)| (u.get(a, b) - u.get(i, j)).abs() > T::lit(0.2) * diam);
            if !jump {
                out.push((i, j));
            }
        }
    }
    out
}

/// Central-difference slope product of `s` at an interior node.
pub fn central_product<T: Scalar>(s: &MonotoneGrid<T>, i: usize, j: usize) -> T {
    let d = s.domain();
    let two = T::lit(2.0);
    let px = (s.get(i + 1, j) - s.get(i - 1, j)) / (two * d.hx);
    let py = (s.get(i, j + 1) - s.get(i, j - 1)) / (two * d.hy);
    px * py
}

/// Checks `s = smooth_2d(u)` against every invariant of the operator,
/// sampling `pairs` random node pairs for the continuity modulus and the
/// lower-variation bound.
pub fn check_invariants<T: Scalar>(
    u: &MonotoneGrid<T>,
    s: &MonotoneGrid<T>,
    params: &SmoothingParams<T>,
    pairs: usize,
    seed: RngSeed,
) -> Result<SmoothingReport> {
    let d = *u.domain();
    if !d.same_as(s.domain()) {
        return Err(Error::DomainMismatch("smoothed grid differs from input".into()));
    }
    let a = params.a;
    let below_zero = s.values().iter().map(|&v| (-v).as_f64()).fold(0.0, f64::max).max(0.0) + 0.0;
    let above_u = s.values().iter().zip(u.values()).map(|(&v, &w)| (v - w).as_f64()).fold(0.0, f64::max);
    let mut monotone = 0.0f64;
    for i in 0..d.nx {
        for j in 0..d.ny {
            if i > 0 {
                monotone = monotone.max((s.get(i - 1, j) - s.get(i, j)).as_f64());
            }
            if j > 0 {
                monotone = monotone.max((s.get(i, j - 1) - s.get(i, j)).as_f64());
            }
        }
    }

    let mut rng = seed.rng();
    let mut modulus = f64::NEG_INFINITY;
    for _ in 0..pairs {
        let (i, j) = (rng.gen_range(0..d.nx), rng.gen_range(0..d.ny));
        let (i2, j2) = (rng.gen_range(0..=i), rng.gen_range(0..=j));
        let (x, y) = (T::lit(i as f64) * d.hx, T::lit(j as f64) * d.hy);
        let (x2, y2) = (T::lit(i2 as f64) * d.hx, T::lit(j2 as f64) * d.hy);
        let bound = (a * (y * (x - x2) + x * (y - y2))).sqrt();
        modulus = modulus.max((s.get(i, j) - s.get(i2, j2) - bound).as_f64());
    }
    let modulus = modulus.max(0.0);

    let levels = z_level_set(u, params.z_levels);
    let all_levels = z_level_set(u, 0);
    let z_gap = if levels.len() == all_levels.len() {
        0.0
    } else {
        levels.windows(2).map(|w| (w[1] - w[0]).as_f64()).fold(0.0, f64::max)
    };
    let mut lower_variation = 0.0f64;
    let mut samples = 0;
    for _ in 0..pairs.min(200) {
        let (i, j) = (rng.gen_range(1..d.nx), rng.gen_range(1..d.ny));
        let below: Vec<T> = levels.iter().copied().filter(|&z| z < u.get(i, j)).collect();
        if below.is_empty() || i + 1 >= d.nx || j + 1 >= d.ny {
            continue;
        }
        let z = below[rng.gen_range(0..below.len())];
        let (i2, j2) = (rng.gen_range(i + 1..d.nx), rng.gen_range(j + 1..d.ny));
        let dx = T::lit((i2 - i) as f64) * d.hx;
        let dy = T::lit((j2 - j) as f64) * d.hy;
        let lo = plane_height(u, (i, j), z, a)?;
        let hi = plane_height(u, (i2, j2), z, a)?;
        lower_variation = lower_variation.max(((a * dx * dy).sqrt() - (hi - lo)).as_f64());
        samples += 1;
    }

    let nodes = product_check_nodes(u, s);
    let tol_threshold = (T::one() - params.product_tol) * params.c;
    let half_threshold = T::lit(0.5) * params.c;
    let (mut at_tol, mut at_half) = (0usize, 0usize);
    let mut product_min = f64::INFINITY;
    for &(i, j) in &nodes {
        let p = central_product(s, i, j);
        product_min = product_min.min(p.as_f64());
        at_tol += (p >= tol_threshold) as usize;
        at_half += (p >= half_threshold) as usize;
    }
    let frac = |k: usize| if nodes.is_empty() { 1.0 } else { k as f64 / nodes.len() as f64 };
    Ok(SmoothingReport {
        below_zero,
        above_u,
        monotone,
        modulus_pairs: pairs,
        modulus,
        z_gap,
        lower_variation_samples: samples,
        lower_variation,
        product_nodes: nodes.len(),
        product_fraction_tol: frac(at_tol),
        product_fraction_half: frac(at_half),
        product_min: if nodes.is_empty() { 0.0 } else { product_min },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::counterexample_grid;

    fn direct_1d(xs: &[f64], us: &[f64], a: f64) -> Vec<f64> {
        (0..xs.len()).map(|i| (0..=i).map(|j| us[j] + a * (xs[i] - xs[j])).fold(f64::INFINITY, f64::min)).collect()
    }

    #[test]
    fn zero_function_1d() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.125).collect();
        assert_eq!(smooth_1d(&xs, &[0.0; 10], 2.0).unwrap(), vec![0.0; 10]);
    }

    #[test]
    fn unit_step_1d() {
        // x_i = i/64 on [0, 3], unit step at 1, a = 1.
        let xs: Vec<f64> = (0..=192).map(|i| i as f64 / 64.0).collect();
        let us: Vec<f64> = xs.iter().map(|&x| if x >= 1.0 { 1.0 } else { 0.0 }).collect();
        let s = smooth_1d(&xs, &us, 1.0).unwrap();
        assert_eq!(s, direct_1d(&xs, &us, 1.0));
        // The last zero sits one cell before the step.
        let h = 1.0 / 64.0;
        for (x, v) in xs.iter().zip(&s) {
            let expect = if *x < 1.0 { 0.0 } else { (x - 1.0 + h).min(1.0) };
            assert_eq!(*v, expect);
        }
    }

    #[test]
    fn smooth_1d_rejects_bad_input() {
        assert!(smooth_1d(&[0.0, 0.5, 0.4], &[0.0, 0.0, 0.0], 1.0).is_err());
        assert!(smooth_1d(&[0.0, 1.0], &[0.0, -1.0], 1.0).is_err());
        assert!(smooth_1d(&[0.0, 1.0], &[0.0, 1.0], 0.0).is_err());
        assert!(matches!(smooth_1d(&[0.5, 1.0], &[0.0, 1.0], 1.0), Err(Error::Precondition(_))));
        assert!(smooth_1d::<f64>(&[], &[], 1.0).unwrap().is_empty());
    }

    #[test]
    fn frontier_validation() {
        assert!(CeilingFrontier::new(vec![(0.0, 1.0), (1.0, 0.0)]).is_ok());
        assert!(CeilingFrontier::new(Vec::<(f64, f64)>::new()).is_err());
        assert!(CeilingFrontier::new(vec![(0.0, 1.0), (1.0, 0.5)]).is_err());
        assert!(CeilingFrontier::new(vec![(0.0, 1.0), (0.5, 1.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn best_plane_two_axis_corners() {
        let (x, y, a, z) = (0.75f64, 0.3f64, 4.0f64, 0.2f64);
        let f = CeilingFrontier::new(vec![(0.0, y), (x, 0.0)]).unwrap();
        let (p, h) = best_plane(&f, a, z);
        assert!((h - (z + (a * x * y).sqrt())).abs() < 1e-12);
        assert!((p - (a * y / x).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn best_plane_with_origin_corner() {
        let f = CeilingFrontier::new(vec![(0.0, 0.0)]).unwrap();
        assert_eq!(best_plane(&f, 3.0, 0.7).1, 0.7);
    }

    #[test]
    fn frontier_on_zero_grid() {
        let d = GridDomain::spanning(0.0, 0.0, 1.0, 1.0, 5).unwrap();
        let u = MonotoneGrid::constant(d, 0.0);
        let f = ceiling_frontier(&u, (3, 2), 0.0).unwrap();
        assert_eq!(f.corners(), &[(0.0, 0.0)]);
        assert!(ceiling_frontier(&u, (3, 2), -1.0).is_err());
        let s = smooth_2d(&u, &SmoothingParams::new(1.0).unwrap()).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn frontier_at_or_above_own_value_contains_origin() {
        let u = counterexample_grid::<f64>(11);
        for (i, j) in [(5, 5), (7, 3), (10, 10), (6, 9)] {
            let f = ceiling_frontier(&u, (i, j), u.get(i, j)).unwrap();
            assert_eq!(f.corners(), &[(0.0, 0.0)]);
            assert_eq!(best_plane(&f, 4.0, u.get(i, j)).1, u.get(i, j));
        }
    }

    #[test]
    fn nonzero_boundary_rejected() {
        let d = GridDomain::spanning(0.0, 0.0, 1.0, 1.0, 4).unwrap();
        let u = MonotoneGrid::from_fn(d, |x, y| x + y + 1.0).unwrap();
        let p = SmoothingParams::new(1.0).unwrap();
        assert!(matches!(smooth_2d(&u, &p), Err(Error::Precondition(_))));
        // The padded variant accepts it and keeps the range.
        let s = smooth_monotone(&u, &p).unwrap();
        assert!(s.min() >= u.min() && s.max() <= u.max());
    }

    #[test]
    fn params() {
        let p = SmoothingParams::new(1.5f64).unwrap();
        assert_eq!(p.a, 6.0);
        assert_eq!(p.z_levels, 64);
        assert!(SmoothingParams::new(0.0f64).is_err());
    }

    #[test]
    fn level_set_contains_minimum() {
        let u = counterexample_grid::<f64>(21);
        let z = z_level_set(&u, 8);
        assert_eq!(z[0], 0.0);
        assert!(z.windows(2).all(|w| w[0] < w[1]));
        let all = z_level_set(&u, 0);
        assert!(all.len() > z.len());
    }
}
