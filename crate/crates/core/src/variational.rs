//! The local integrand `L(eta, theta) = eta Phi(sqrt(2 theta / eta))`, the
//! functional `F_rho(u)` on grids, its maximisation over doubly increasing
//! grids of bounded diameter, and the Monte Carlo estimators that tie it back
//! to random point sets.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sample_iid, sample_poisson_rectangle, DensityModel, Rect, RectangleSpec, RngSeed};
use crate::grid::{
    cell_products, from_kappa, l1_distance, l1_distance_shifted, project_u_r_report, GridDomain, MonotoneGrid, ProjectionOptions,
};
use crate::scalar::Scalar;
use crate::smoothing::{smooth_monotone, SmoothingParams};
use crate::tableau::kappa_surface;
use crate::watermelon::{max_k_decreasing_profile, max_k_decreasing_with_cap, DEFAULT_EXACT_CAP};

/// Regularisation of `theta` in the derivative of `L`, which blows up at zero.
pub const THETA_EPS: f64 = 1e-12;

/// The limit constant `Phi(r)` of narrow rectangles.
///
/// Only `Phi(r) = 1` for `r >= sqrt2` is a theorem; the quadratic branch below
/// it is conjectural. A table model interpolates linearly between samples and
/// is forced to `1` from `sqrt2` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhiModel {
    Conjectured,
    Table { points: Vec<(f64, f64)> },
}

impl Default for PhiModel {
    fn default() -> Self {
        PhiModel::Conjectured
    }
}

impl PhiModel {
    /// Validates a table: starts at `(0, 0)`, strictly increasing abscissae,
    /// nondecreasing values in `[0, 1]`.
    pub fn table(mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.retain(|p| p.0 < std::f64::consts::SQRT_2);
        if points.first() != Some(&(0.0, 0.0)) {
            return Err(Error::InvalidArgument("phi table must start at (0, 0)".into()));
        }
        if points.windows(2).any(|w| !(w[0].0 < w[1].0 && w[0].1 <= w[1].1)) {
            return Err(Error::InvalidArgument("phi table must be increasing".into()));
        }
        if points.iter().any(|p| !(p.1 >= 0.0 && p.1 <= 1.0)) {
            return Err(Error::InvalidArgument("phi values must lie in [0, 1]".into()));
        }
        Ok(PhiModel::Table { points })
    }

    pub fn is_conjectural(&self) -> bool {
        matches!(self, PhiModel::Conjectured)
    }

    pub fn eval<T: Scalar>(&self, r: T) -> T {
        let s2 = T::SQRT_2();
        if r >= s2 {
            return T::one();
        }
        let r = r.max(T::zero());
        match self {
            PhiModel::Conjectured => s2 * r - T::lit(0.5) * r * r,
            PhiModel::Table { points } => {
                let (x, y) = self.segment(r.as_f64(), points);
                let t = (r - T::lit(x.0)) / T::lit(y.0 - x.0);
                T::lit(x.1) + t * T::lit(y.1 - x.1)
            }
        }
    }

    /// Right derivative of `Phi`.
    pub fn derivative<T: Scalar>(&self, r: T) -> T {
        let s2 = T::SQRT_2();
        if r >= s2 {
            return T::zero();
        }
        match self {
            PhiModel::Conjectured => s2 - r.max(T::zero()),
            PhiModel::Table { points } => {
                let (x, y) = self.segment(r.as_f64(), points);
                T::lit((y.1 - x.1) / (y.0 - x.0))
            }
        }
    }

    /// `dL/dtheta = Phi'(s) / s` with `s = sqrt(2 theta / eta)`.
    fn l_slope<T: Scalar>(&self, eta: T, theta: T, eps: T) -> T {
        if eta <= T::zero() {
            return T::zero();
        }
        let theta = theta.max(eps);
        match self {
            PhiModel::Conjectured => ((eta / theta).sqrt() - T::one()).max(T::zero()),
            PhiModel::Table { .. } => {
                let s = (T::lit(2.0) * theta / eta).sqrt();
                self.derivative(s) / s
            }
        }
    }

    fn segment(&self, r: f64, points: &[(f64, f64)]) -> ((f64, f64), (f64, f64)) {
        let end = (std::f64::consts::SQRT_2, 1.0);
        let k = points.partition_point(|p| p.0 <= r);
        let lo = points[k.max(1) - 1];
        let hi = points.get(k).copied().unwrap_or(end);
        (lo, hi)
    }
}

/// `L(eta, theta)`, exactly as defined: `eta Phi(sqrt(2 theta / eta))`, and `0`
/// when `eta = 0`.
pub fn l_value<T: Scalar>(eta: T, theta: T, phi: &PhiModel) -> Result<T> {
    if !(eta >= T::zero() && theta >= T::zero()) {
        return Err(Error::InvalidArgument(format!("L needs nonnegative arguments, got ({eta}, {theta})")));
    }
    Ok(l_unchecked(eta, theta, phi))
}

#[inline]
fn l_unchecked<T: Scalar>(eta: T, theta: T, phi: &PhiModel) -> T {
    if eta <= T::zero() {
        return T::zero();
    }
    eta * phi.eval((T::lit(2.0) * theta.max(T::zero()) / eta).sqrt())
}

/// A bounded probability density given by its values at cell centres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid<T> {
    domain: GridDomain<T>,
    values: Vec<T>,
    bound: T,
}

impl<T: Scalar> DensityGrid<T> {
    pub fn new(domain: GridDomain<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != domain.cells() {
            return Err(Error::DomainMismatch(format!("{} density values for {} cells", values.len(), domain.cells())));
        }
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidModel("density values must be finite and nonnegative".into()));
        }
        let bound = values.iter().copied().fold(T::zero(), T::max);
        Ok(DensityGrid { domain, values, bound })
    }

    pub fn from_cell_fn(domain: GridDomain<T>, f: impl Fn(T, T) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(domain.cells());
        for i in 0..domain.nx - 1 {
            for j in 0..domain.ny - 1 {
                let (x, y) = domain.cell_center(i, j);
                values.push(f(x, y));
            }
        }
        Self::new(domain, values)
    }

    /// Rasterises a density model at the cell centres of `domain`.
    pub fn from_model(model: &DensityModel, domain: GridDomain<T>) -> Result<Self> {
        Self::from_cell_fn(domain, |x, y| T::lit(model.density(x.as_f64(), y.as_f64())))
    }

    /// Rescales to unit mass.
    pub fn normalized(self) -> Result<Self> {
        let m = self.mass();
        if !(m > T::zero()) {
            return Err(Error::InvalidModel("density has zero mass".into()));
        }
        Self::new(self.domain, self.values.iter().map(|&v| v / m).collect())
    }

    pub fn mass(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.domain.cell_area()
    }

    pub fn domain(&self) -> &GridDomain<T> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn bound(&self) -> T {
        self.bound
    }

    /// The same density as a piecewise constant model, for sampling.
    pub fn to_model(&self) -> Result<DensityModel> {
        let d = &self.domain;
        let support = Rect { x0: d.x0.as_f64(), y0: d.y0.as_f64(), x1: d.x(d.nx - 1).as_f64(), y1: d.y(d.ny - 1).as_f64() };
        let cell = support.area() / d.cells() as f64;
        let raw: Vec<f64> = self.values.iter().map(|v| v.as_f64()).collect();
        let mass: f64 = raw.iter().sum::<f64>() * cell;
        let values = raw.iter().map(|v| v / mass).collect();
        DensityModel::table(support, d.nx - 1, d.ny - 1, values)
    }
}

/// `F_rho(u)`: midpoint sum of `L(rho, theta)` over cells.
pub fn f_rho<T: Scalar>(u: &MonotoneGrid<T>, rho: &DensityGrid<T>, phi: &PhiModel) -> Result<T> {
    if !u.domain().same_as(rho.domain()) {
        return Err(Error::DomainMismatch("u and rho live on different grids".into()));
    }
    Ok(f_values(rho, u.values(), phi))
}

fn f_values<T: Scalar>(rho: &DensityGrid<T>, v: &[T], phi: &PhiModel) -> T {
    let theta = cell_products(&rho.domain, v);
    let s: T = theta.iter().zip(&rho.values).map(|(&t, &eta)| l_unchecked(eta, t, phi)).sum();
    s * rho.domain.cell_area()
}

/// Gradient of the discretised `F` with respect to the node values. Valid
/// for any values, monotone or not, as long as cell products stay
/// nonnegative.
pub fn f_gradient<T: Scalar>(v: &[T], rho: &DensityGrid<T>, phi: &PhiModel) -> Result<Vec<T>> {
    gradient_eps(v, rho, phi, T::lit(THETA_EPS))
}

/// Gradient with `theta` clipped below at `eps` inside `dL/dtheta`.
fn gradient_eps<T: Scalar>(v: &[T], rho: &DensityGrid<T>, phi: &PhiModel, eps: T) -> Result<Vec<T>> {
    let d = rho.domain;
    if v.len() != d.len() {
        return Err(Error::DomainMismatch("gradient input has the wrong length".into()));
    }
    let half = T::lit(0.5);
    let mut g = vec![T::zero(); d.len()];
    // d(theta)/dv times cell area leaves just the difference products.
    for i in 0..d.nx - 1 {
        for j in 0..d.ny - 1 {
            let eta = rho.values[d.cell_idx(i, j)];
            if eta <= T::zero() {
                continue;
            }
            let (ia, ib, ic, ie) = (d.idx(i, j), d.idx(i + 1, j), d.idx(i, j + 1), d.idx(i + 1, j + 1));
            let dx = half * ((v[ib] - v[ia]) + (v[ie] - v[ic]));
            let dy = half * ((v[ic] - v[ia]) + (v[ie] - v[ib]));
            let theta = dx * dy / d.cell_area();
            let w = phi.l_slope(eta, theta, eps) * half;
            g[ia] = g[ia] - w * (dy + dx);
            g[ib] = g[ib] + w * (dy - dx);
            g[ic] = g[ic] + w * (dx - dy);
            g[ie] = g[ie] + w * (dy + dx);
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximizeOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step improves `F` by less than this, relatively.
    pub rel_tol: f64,
    /// Projection accuracy used inside the ascent.
    pub projection: ProjectionOptions,
    /// Points in the pilot simulation that seeds one of the starts; `0` skips it.
    pub pilot_points: usize,
    pub seed: RngSeed,
    /// Run the smoothing post-pass.
    pub smooth: bool,
    pub z_levels: usize,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        MaximizeOptions {
            max_iterations: 600,
            rel_tol: 1e-7,
            projection: ProjectionOptions { tol: 1e-6, max_sweeps: 300 },
            pilot_points: 1000,
            seed: RngSeed(0),
            smooth: true,
            z_levels: 64,
        }
    }
}

/// One accepted step of the ascent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub value: f64,
    pub step: f64,
    /// Largest change of a node value in the step.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaximizerReport<T> {
    /// Smoothed when the post-pass ran, otherwise the raw ascent result.
    pub u_star: MonotoneGrid<T>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub smoothing_applied: bool,
    pub value_after_smoothing: f64,
    /// Name of the start that produced the maximizer.
    pub start: String,
    pub phi_conjectural: bool,
    #[serde(skip)]
    pub raw: Option<MonotoneGrid<T>>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl<T: Scalar> MaximizerReport<T> {
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iteration,value,step,residual")?;
        for t in &self.trace {
            writeln!(w, "{},{:.16e},{:.16e},{:.16e}", t.iteration, t.value, t.step, t.residual)?;
        }
        Ok(())
    }
}

struct Ascent<T> {
    grid: MonotoneGrid<T>,
    value: T,
    iterations: usize,
    converged: bool,
    trace: Vec<TraceRow>,
}

fn project<T: Scalar>(d: GridDomain<T>, v: &[T], r: T, opts: &MaximizeOptions) -> Result<MonotoneGrid<T>> {
    Ok(project_u_r_report(d, v, r, opts.projection)?.grid)
}

/// Projected gradient ascent with Armijo backtracking from a feasible start.
///
/// `dL/dtheta` is unbounded near `theta = 0`, where a flat patch meets a
/// sloped one, and those few cells would dictate a tiny step everywhere. The
/// ascent therefore runs through a short sequence of clipping levels for
/// `theta`, ending at [`THETA_EPS`]. Every step is accepted on the true `F`.
fn ascend<T: Scalar>(
    start: MonotoneGrid<T>,
    rho: &DensityGrid<T>,
    r: T,
    phi: &PhiModel,
    opts: &MaximizeOptions,
) -> Result<Ascent<T>> {
    let d = *rho.domain();
    // Function-space gradient: divide by the area each node represents.
    let inv_area = T::one() / d.cell_area();
    let mut u = start;
    let mut value = f_values(rho, u.values(), phi);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let sigma = T::lit(1e-4);
    let stages = [1e-2, 1e-4, THETA_EPS];
    let per_stage = (opts.max_iterations / stages.len()).max(1);
    for (stage, &eps) in stages.iter().enumerate() {
        let eps = T::lit(eps);
        let mut step = T::lit(0.1);
        let mut stalled = 0;
        converged = false;
        let limit = if stage + 1 == stages.len() { opts.max_iterations - iterations } else { per_stage };
        for _ in 0..limit {
            iterations += 1;
            let g: Vec<T> = gradient_eps(u.values(), rho, phi, eps)?.into_iter().map(|x| x * inv_area).collect();
            if g.iter().all(|x| *x == T::zero()) {
                converged = true;
                break;
            }
            let mut t = step * T::lit(2.0);
            let mut accepted = None;
            for _ in 0..40 {
                let trial: Vec<T> = u.values().iter().zip(&g).map(|(&a, &b)| a + t * b).collect();
                let cand = project(d, &trial, r, opts)?;
                let cv = f_values(rho, cand.values(), phi);
                let ascent: T =
                    cand.values().iter().zip(u.values()).zip(&g).map(|((&c, &a), &b)| (c - a) * b).sum::<T>() * d.cell_area();
                if cv > value && cv >= value + sigma * ascent {
                    accepted = Some((cand, cv));
                    break;
                }
                t = t * T::lit(0.5);
            }
            let Some((cand, cv)) = accepted else {
                converged = true;
                break;
            };
            let residual = cand.values().iter().zip(u.values()).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
            let gain = cv - value;
            u = cand;
            value = cv;
            step = t;
            trace.push(TraceRow { iteration: iterations, value: value.as_f64(), step: t.as_f64(), residual: residual.as_f64() });
            if gain <= T::lit(opts.rel_tol) * value.abs().max(T::lit(1e-12)) {
                stalled += 1;
                if stalled >= STALL_WINDOW {
                    converged = true;
                    break;
                }
            } else {
                stalled = 0;
            }
        }
    }
    Ok(Ascent { grid: u, value, iterations, converged, trace })
}

/// Consecutive small gains that end a stage.
const STALL_WINDOW: usize = 5;

/// Feasible starting grids: a ramp scaled to diameter `r`, a constant, and a
/// pilot simulation's scaled `kappa`.
fn starts<T: Scalar>(rho: &DensityGrid<T>, r: T, opts: &MaximizeOptions) -> Result<Vec<(String, MonotoneGrid<T>)>> {
    let d = *rho.domain();
    let (x1, y1) = (d.x(d.nx - 1), d.y(d.ny - 1));
    let span = (x1 - d.x0) + (y1 - d.y0);
    let mut out = Vec::new();
    out.push(("ramp".to_string(), MonotoneGrid::from_fn(d, |x, y| r * ((x - d.x0) + (y - d.y0)) / span)?));
    out.push(("constant".to_string(), MonotoneGrid::constant(d, T::zero())));
    if opts.pilot_points > 0 {
        let model = rho.to_model()?;
        let n = opts.pilot_points.min(DEFAULT_EXACT_CAP);
        let ps = sample_iid::<T>(&model, n, opts.seed.split(0))?;
        let k = (r.as_f64() * (n as f64).sqrt()).floor() as usize;
        let melon = max_k_decreasing_with_cap(&ps, k, DEFAULT_EXACT_CAP)?;
        let kappa = kappa_surface(&melon.subset);
        let g = from_kappa(&kappa, T::one() / T::lit((n as f64).sqrt()), d)?;
        out.push(("pilot".to_string(), project(d, g.values(), r, opts)?));
    }
    Ok(out)
}

/// Maximises `F_rho` over doubly increasing grids with diameter at most `r`.
pub fn maximize<T: Scalar>(rho: &DensityGrid<T>, r: T, phi: &PhiModel, opts: &MaximizeOptions) -> Result<MaximizerReport<T>> {
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("diameter bound must be nonnegative, got {r}")));
    }
    let d = *rho.domain();
    if r == T::zero() {
        let u = MonotoneGrid::constant(d, T::zero());
        return Ok(MaximizerReport {
            u_star: u.clone(),
            value: 0.0,
            iterations: 0,
            converged: true,
            smoothing_applied: false,
            value_after_smoothing: 0.0,
            start: "constant".into(),
            phi_conjectural: phi.is_conjectural(),
            raw: Some(u),
            trace: Vec::new(),
        });
    }
    let candidates = starts(rho, r, opts)?;
    let runs: Vec<Result<(String, Ascent<T>)>> =
        candidates.into_par_iter().map(|(name, g)| Ok((name, ascend(g, rho, r, phi, opts)?))).collect();
    let mut best: Option<(String, Ascent<T>)> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().map_or(true, |b| run.1.value > b.1.value) {
            best = Some(run);
        }
    }
    let (start, best) = best.expect("at least one start");
    let value = best.value.as_f64();
    let (u_star, smoothing_applied, value_after_smoothing) = if opts.smooth && rho.bound() > T::zero() {
        let params = SmoothingParams::new(rho.bound())?.with_z_levels(opts.z_levels);
        let s = smooth_monotone(&best.grid, &params)?;
        let v = f_values(rho, s.values(), phi).as_f64();
        (s, true, v)
    } else {
        (best.grid.clone(), false, value)
    };
    Ok(MaximizerReport {
        u_star,
        value,
        iterations: best.iterations,
        converged: best.converged,
        smoothing_applied,
        value_after_smoothing,
        start,
        phi_conjectural: phi.is_conjectural(),
        raw: Some(best.grid),
        trace: best.trace,
    })
}

/// Monte Carlo estimate of `Phi(r)` with a 95% normal half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiEstimate {
    pub r: f64,
    pub k: usize,
    /// Mean of `Lambda / N` over reps, `N` the realised point count.
    pub mean: f64,
    pub half_width: f64,
    /// Mean of `Lambda / (beta gamma)`, normalised by the expected count.
    pub mean_per_area: f64,
    pub reps: usize,
}

fn check_rectangle(spec: &RectangleSpec, cap: usize) -> Result<()> {
    spec.validate()?;
    // Leave room for Poisson fluctuations of about five standard deviations.
    let mean = spec.mean_count();
    if mean + 5.0 * mean.sqrt() > cap as f64 {
        return Err(Error::CapExceeded { n: mean.ceil() as usize, cap });
    }
    Ok(())
}

/// Estimates `Phi` at every `r` from the same `reps` Poisson samples, so the
/// estimates are nondecreasing in `r`. Dividing by the realised count rather
/// than `beta gamma` has the same limit, keeps every estimate at most 1 and
/// removes the Poisson count noise.
pub fn phi_curve(rs: &[f64], spec: &RectangleSpec, reps: usize, seed: RngSeed) -> Result<Vec<PhiEstimate>> {
    if rs.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
        return Err(Error::InvalidArgument("r must be nonnegative".into()));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be positive".into()));
    }
    check_rectangle(spec, DEFAULT_EXACT_CAP)?;
    let ks: Vec<usize> = rs.iter().map(|r| (r * spec.gamma.sqrt()).floor() as usize).collect();
    let k_max = ks.iter().copied().max().unwrap_or(0);
    let scale = spec.beta * spec.gamma;
    let profiles: Vec<Result<(Vec<usize>, usize)>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let ps = sample_poisson_rectangle::<f64>(spec, seed.split(rep))?;
            Ok((max_k_decreasing_profile(&ps, k_max, DEFAULT_EXACT_CAP)?, ps.len()))
        })
        .collect();
    let profiles = profiles.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(rs
        .iter()
        .zip(&ks)
        .map(|(&r, &k)| {
            let xs: Vec<f64> = profiles.iter().map(|(p, n)| if *n == 0 { 0.0 } else { p[k] as f64 / *n as f64 }).collect();
            let mean = xs.iter().sum::<f64>() / reps as f64;
            let mean_per_area = profiles.iter().map(|(p, _)| p[k] as f64 / scale).sum::<f64>() / reps as f64;
            let half_width = if reps > 1 {
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
                1.96 * (var / reps as f64).sqrt()
            } else {
                0.0
            };
            PhiEstimate { r, k, mean, half_width, mean_per_area, reps }
        })
        .collect())
}

pub fn phi_estimate(r: f64, spec: &RectangleSpec, reps: usize, seed: RngSeed) -> Result<PhiEstimate> {
    Ok(phi_curve(&[r], spec, reps, seed)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitDistance {
    pub n: usize,
    pub k: usize,
    pub watermelon_size: usize,
    pub raw: f64,
    pub shifted: f64,
    /// Constant added to the maximizer in the shifted distance.
    pub shift: f64,
}

/// Distance between `kappa_P / sqrt n` and a given maximizer `u`, where `P` is
/// a maximal `floor(r sqrt n)`-decreasing subset of `n` points drawn from
/// `model`. Reported raw and minimised over an additive constant on `u`.
pub fn limit_distance<T: Scalar>(
    model: &DensityModel,
    n: usize,
    r: f64,
    u: &MonotoneGrid<T>,
    seed: RngSeed,
) -> Result<LimitDistance> {
    if n > DEFAULT_EXACT_CAP {
        return Err(Error::CapExceeded { n, cap: DEFAULT_EXACT_CAP });
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidArgument("r must be nonnegative".into()));
    }
    let ps = sample_iid::<T>(model, n, seed)?;
    let k = (r * (n as f64).sqrt()).floor() as usize;
    let melon = max_k_decreasing_with_cap(&ps, k, DEFAULT_EXACT_CAP)?;
    let scale = if n == 0 { T::zero() } else { T::one() / T::lit((n as f64).sqrt()) };
    let kappa = from_kappa(&kappa_surface(&melon.subset), scale, *u.domain())?;
    let raw = l1_distance(&kappa, u)?.as_f64();
    let (shifted, shift) = l1_distance_shifted(&kappa, u)?;
    Ok(LimitDistance { n, k, watermelon_size: melon.size, raw, shifted: shifted.as_f64(), shift: shift.as_f64() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitCheck {
    pub distance: LimitDistance,
    pub maximizer_value: f64,
    pub converged: bool,
}

/// Samples, extracts the watermelon, maximises `F_rho` on an `m x m` grid over
/// the model's support, and reports the distance.
pub fn limit_check(
    model: &DensityModel,
    n: usize,
    r: f64,
    m: usize,
    seed: RngSeed,
    opts: &MaximizeOptions,
) -> Result<LimitCheck> {
    let s = model.support;
    let domain = GridDomain::spanning(s.x0, s.y0, s.x1, s.y1, m)?;
    let rho = DensityGrid::from_model(model, domain)?.normalized()?;
    // The pilot start must not see the sample it is compared with.
    let opts = MaximizeOptions { seed: seed.split(1), ..*opts };
    let report = maximize(&rho, r, &PhiModel::Conjectured, &opts)?;
    let distance = limit_distance(model, n, r, &report.u_star, seed.split(0))?;
    Ok(LimitCheck { distance, maximizer_value: report.value_after_smoothing, converged: report.converged })
}
