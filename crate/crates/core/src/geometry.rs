//! Planar point configurations, random generation and permutation views.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fmt_sig17, Scalar};

/// Maximum number of redraws for a single point whose coordinate collides
/// with an earlier one.
pub const MAX_COLLISION_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    /// Coordinatewise `self <= other`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.x <= other.x && self.y <= other.y
    }
}

/// A finite point configuration in general position: no two points share an
/// x- or a y-coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSet<T> {
    points: Vec<Point<T>>,
}

impl<T: Scalar> PointSet<T> {
    pub fn empty() -> Self {
        PointSet { points: Vec::new() }
    }

    /// Validates finiteness and general position.
    pub fn new(points: Vec<Point<T>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coordinate ({}, {})", p.x, p.y)));
        }
        check_distinct(points.iter().map(|p| p.x), "x")?;
        check_distinct(points.iter().map(|p| p.y), "y")?;
        Ok(PointSet { points })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(x, y)| Point::new(T::lit(x), T::lit(y))).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point<T>> {
        self.points
    }

    /// Indices of the points in order of increasing x.
    pub fn order_by_x(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| self.points[a].x.partial_cmp(&self.points[b].x).unwrap());
        idx
    }

    /// 0-based rank of every point's y-coordinate.
    pub fn y_ranks(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| self.points[a].y.partial_cmp(&self.points[b].y).unwrap());
        let mut rank = vec![0; idx.len()];
        for (r, &i) in idx.iter().enumerate() {
            rank[i] = r;
        }
        rank
    }

    /// The subset of points with the given indices.
    pub fn select(&self, indices: &[usize]) -> Self {
        PointSet { points: indices.iter().map(|&i| self.points[i]).collect() }
    }

    /// Points with every y-coordinate negated.
    pub fn flip_y(&self) -> Self {
        PointSet { points: self.points.iter().map(|p| Point::new(p.x, -p.y)).collect() }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y")?;
        for p in &self.points {
            writeln!(w, "{},{}", fmt_sig17(p.x.as_f64()), fmt_sig17(p.y.as_f64()))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut points = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line == "x,y") {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<T> {
                let s = parts.next().ok_or_else(|| Error::Parse(format!("line {}: expected two fields", lineno + 1)))?;
                s.trim().parse::<f64>().map(T::lit).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            let x = next()?;
            let y = next()?;
            points.push(Point::new(x, y));
        }
        Self::new(points)
    }
}

fn check_distinct<T: Scalar>(coords: impl Iterator<Item = T>, axis: &str) -> Result<()> {
    let mut v: Vec<T> = coords.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::GeneralPosition(format!("two points share {axis}-coordinate {}", w[0])));
    }
    Ok(())
}

/// Reads the configuration as a permutation: `sigma[i-1] = j` when the i-th
/// point from the left is the j-th point from below (1-based values).
pub fn as_permutation<T: Scalar>(ps: &PointSet<T>) -> Result<Vec<usize>> {
    // Re-validate: a PointSet built through serde bypasses `new`.
    check_distinct(ps.points.iter().map(|p| p.x), "x")?;
    check_distinct(ps.points.iter().map(|p| p.y), "y")?;
    let ranks = ps.y_ranks();
    Ok(ps.order_by_x().into_iter().map(|i| ranks[i] + 1).collect())
}

/// Master seed of a reproducible experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Sub-seed for task `index`: `splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15)`.
    pub fn split(self, index: u64) -> RngSeed {
        let mut z = self.0.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensityKind {
    /// Uniform on the open unit square.
    UniformSquare,
    /// Uniform on the diamond `|x| + |y| < 1/sqrt(2)` (area one).
    UniformDiamond,
    /// Piecewise constant on an `nx x ny` cell partition of the support,
    /// values stored with the y index fastest.
    Table { nx: usize, ny: usize, values: Vec<f64> },
}

/// A bounded probability density on a bounded rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    pub support: Rect,
    pub kind: DensityKind,
    pub bound: f64,
}

impl DensityModel {
    pub fn uniform_square() -> Self {
        DensityModel { support: Rect { x0: 0.0, y0: 0.0, x1: 1.0, y1: 1.0 }, kind: DensityKind::UniformSquare, bound: 1.0 }
    }

    pub fn uniform_diamond() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityModel { support: Rect { x0: -h, y0: -h, x1: h, y1: h }, kind: DensityKind::UniformDiamond, bound: 1.0 }
    }

    /// Piecewise constant density. Rejects negative cells and tables that do
    /// not integrate to one within `1e-6`.
    pub fn table(support: Rect, nx: usize, ny: usize, values: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || values.len() != nx * ny {
            return Err(Error::InvalidModel(format!("table of {} values does not fill {nx} x {ny} cells", values.len())));
        }
        if !(support.width() > 0.0 && support.height() > 0.0) {
            return Err(Error::InvalidModel("support rectangle is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidModel("density values must be finite and nonnegative".into()));
        }
        let cell = support.area() / (nx * ny) as f64;
        let mass: f64 = values.iter().sum::<f64>() * cell;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidModel(format!("density integrates to {mass}, not 1")));
        }
        let bound = values.iter().cloned().fold(0.0, f64::max);
        Ok(DensityModel { support, kind: DensityKind::Table { nx, ny, values }, bound })
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let s = &self.support;
        match &self.kind {
            DensityKind::UniformSquare => {
                if x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            DensityKind::UniformDiamond => {
                if x.abs() + y.abs() < std::f64::consts::FRAC_1_SQRT_2 {
                    1.0
                } else {
                    0.0
                }
            }
            DensityKind::Table { nx, ny, values } => {
                if x < s.x0 || x >= s.x1 || y < s.y0 || y >= s.y1 {
                    return 0.0;
                }
                let i = (((x - s.x0) / s.width()) * *nx as f64) as usize;
                let j = (((y - s.y0) / s.height()) * *ny as f64) as usize;
                values[i.min(nx - 1) * ny + j.min(ny - 1)]
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.bound > 0.0) || !self.bound.is_finite() {
            return Err(Error::InvalidModel(format!("density bound {} must be positive", self.bound)));
        }
        if !(self.support.width() > 0.0 && self.support.height() > 0.0) {
            return Err(Error::InvalidModel("support rectangle is empty".into()));
        }
        Ok(())
    }
}

/// Long side `beta` and Poisson intensity `gamma` of the sloped rectangle
/// `0 < (x+y)/sqrt2 < 1, 0 < (y-x)/sqrt2 < beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectangleSpec {
    pub beta: f64,
    pub gamma: f64,
}

impl RectangleSpec {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        let spec = RectangleSpec { beta, gamma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) || !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rectangle needs beta > 0 and gamma > 0, got beta={} gamma={}",
                self.beta, self.gamma
            )));
        }
        Ok(())
    }

    /// Expected number of points, `beta * gamma`.
    pub fn mean_count(&self) -> f64 {
        self.beta * self.gamma
    }

    /// Rotated coordinates `((x+y)/sqrt2, (y-x)/sqrt2)`.
    pub fn to_rotated(x: f64, y: f64) -> (f64, f64) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ((x + y) * h, (y - x) * h)
    }

    pub fn from_rotated(s: f64, t: f64) -> (f64, f64) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ((s - t) * h, (s + t) * h)
    }
}

/// Accumulates points while rejecting coordinate collisions.
struct GeneralPositionBuilder<T> {
    xs: HashSet<u64>,
    ys: HashSet<u64>,
    points: Vec<Point<T>>,
}

impl<T: Scalar> GeneralPositionBuilder<T> {
    fn with_capacity(n: usize) -> Self {
        GeneralPositionBuilder { xs: HashSet::with_capacity(n), ys: HashSet::with_capacity(n), points: Vec::with_capacity(n) }
    }

    /// Draws with `draw` until the point is finite and collision free.
    fn push_with(&mut self, mut draw: impl FnMut() -> (f64, f64)) -> Result<()> {
        for _ in 0..=MAX_COLLISION_RETRIES {
            let (x, y) = draw();
            let (x, y) = (T::lit(x), T::lit(y));
            let (kx, ky) = (x.as_f64().to_bits(), y.as_f64().to_bits());
            if !self.xs.contains(&kx) && !self.ys.contains(&ky) {
                self.xs.insert(kx);
                self.ys.insert(ky);
                self.points.push(Point::new(x, y));
                return Ok(());
            }
        }
        Err(Error::GeneralPosition(format!(
            "could not place point {} without a coordinate collision after {MAX_COLLISION_RETRIES} redraws",
            self.points.len()
        )))
    }

    fn finish(self) -> PointSet<T> {
        PointSet { points: self.points }
    }
}

/// `n` i.i.d. points from `density`, by rejection from the uniform law on the
/// support rectangle scaled by the density bound.
pub fn sample_iid<T: Scalar>(density: &DensityModel, n: usize, seed: RngSeed) -> Result<PointSet<T>> {
    density.validate()?;
    let mut rng = seed.rng();
    let s = density.support;
    let mut out = GeneralPositionBuilder::with_capacity(n);
    for _ in 0..n {
        out.push_with(|| loop {
            let x = s.x0 + s.width() * rng.gen::<f64>();
            let y = s.y0 + s.height() * rng.gen::<f64>();
            let u: f64 = rng.gen::<f64>() * density.bound;
            if u < density.density(x, y) {
                break (x, y);
            }
        })?;
    }
    Ok(out.finish())
}

/// A homogeneous Poisson process of intensity `gamma` restricted to the
/// sloped rectangle of `spec`, drawn in rotated coordinates.
pub fn sample_poisson_rectangle<T: Scalar>(spec: &RectangleSpec, seed: RngSeed) -> Result<PointSet<T>> {
    spec.validate()?;
    let mut rng = seed.rng();
    let count = Poisson::new(spec.mean_count())
        .map_err(|e| Error::InvalidArgument(format!("poisson mean {}: {e}", spec.mean_count())))?
        .sample(&mut rng) as usize;
    let mut out = GeneralPositionBuilder::with_capacity(count);
    for _ in 0..count {
        out.push_with(|| loop {
            // gen() lies in [0, 1); the boundary values are redrawn to keep the rectangle open.
            let s: f64 = rng.gen();
            let t: f64 = spec.beta * rng.gen::<f64>();
            if s > 0.0 && t > 0.0 {
                break RectangleSpec::from_rotated(s, t);
            }
        })?;
    }
    Ok(out.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_reads_ranks() {
        let ps = PointSet::<f64>::from_pairs(&[(0.1, 0.9), (0.5, 0.2), (0.8, 0.6)]).unwrap();
        assert_eq!(as_permutation(&ps).unwrap(), vec![3, 1, 2]);
        assert!(as_permutation(&PointSet::<f64>::empty()).unwrap().is_empty());
    }

    #[test]
    fn diagonal_is_identity() {
        let n = 17;
        let pairs: Vec<_> = (1..=n).map(|i| (i as f64 / n as f64, i as f64 / n as f64)).collect();
        let ps = PointSet::<f64>::from_pairs(&pairs).unwrap();
        assert_eq!(as_permutation(&ps).unwrap(), (1..=n).collect::<Vec<_>>());
    }

    #[test]
    fn duplicate_coordinates_rejected() {
        let err = PointSet::<f64>::from_pairs(&[(0.1, 0.2), (0.1, 0.3)]).unwrap_err();
        assert!(matches!(err, Error::GeneralPosition(_)));
        let err = PointSet::<f64>::from_pairs(&[(0.1, 0.2), (0.4, 0.2)]).unwrap_err();
        assert!(matches!(err, Error::GeneralPosition(_)));
    }

    #[test]
    fn serde_bypass_still_checked_by_permutation() {
        let ps: PointSet<f64> = serde_json::from_str(r#"[{"x":1.0,"y":2.0},{"x":1.0,"y":3.0}]"#).unwrap();
        assert!(matches!(as_permutation(&ps), Err(Error::GeneralPosition(_))));
    }

    #[test]
    fn sample_empty_and_invalid_bound() {
        let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 0, RngSeed(1)).unwrap();
        assert!(ps.is_empty());
        let mut bad = DensityModel::uniform_square();
        bad.bound = 0.0;
        assert!(matches!(sample_iid::<f64>(&bad, 3, RngSeed(1)), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn sample_mean_is_centred() {
        // Var of U(0,1) is 1/12; 3 sigma at n=1000 is about 0.027.
        let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 1000, RngSeed(42)).unwrap();
        let mean = ps.points().iter().map(|p| p.x).sum::<f64>() / 1000.0;
        assert!((mean - 0.5).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_iid::<f64>(&DensityModel::uniform_diamond(), 200, RngSeed(9)).unwrap();
        let b = sample_iid::<f64>(&DensityModel::uniform_diamond(), 200, RngSeed(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|p| p.x.abs() + p.y.abs() < std::f64::consts::FRAC_1_SQRT_2));
    }

    #[test]
    fn f32_sampling_keeps_general_position() {
        let ps = sample_iid::<f32>(&DensityModel::uniform_square(), 5000, RngSeed(3)).unwrap();
        assert_eq!(ps.len(), 5000);
        assert!(PointSet::new(ps.points().to_vec()).is_ok());
    }

    #[test]
    fn table_density_checks_mass() {
        let support = Rect { x0: 0.0, y0: 0.0, x1: 2.0, y1: 1.0 };
        assert!(DensityModel::table(support, 2, 1, vec![0.5, 0.5]).is_ok());
        assert!(matches!(DensityModel::table(support, 2, 1, vec![0.5, 0.6]), Err(Error::InvalidModel(_))));
        let t = DensityModel::table(support, 2, 1, vec![1.0, 0.0]).unwrap();
        assert_eq!(t.bound, 1.0);
        let ps = sample_iid::<f64>(&t, 300, RngSeed(5)).unwrap();
        assert!(ps.points().iter().all(|p| p.x < 1.0));
    }

    #[test]
    fn poisson_points_in_rectangle() {
        let spec = RectangleSpec::new(10.0, 50.0).unwrap();
        let ps = sample_poisson_rectangle::<f64>(&spec, RngSeed(11)).unwrap();
        for p in ps.points() {
            let (s, t) = RectangleSpec::to_rotated(p.x, p.y);
            assert!(s > 0.0 && s < 1.0 + 1e-12, "s={s}");
            assert!(t > 0.0 && t < 10.0 + 1e-12, "t={t}");
        }
        assert!(RectangleSpec::new(0.0, 1.0).is_err());
        assert!(RectangleSpec::new(1.0, -1.0).is_err());
    }

    #[test]
    fn vanishing_intensity_is_empty() {
        let spec = RectangleSpec::new(1.0, 1e-4).unwrap();
        let empty = (0..20).filter(|&i| sample_poisson_rectangle::<f64>(&spec, RngSeed(i)).unwrap().is_empty()).count();
        assert!(empty >= 19);
    }

    #[test]
    fn csv_round_trip() {
        let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 50, RngSeed(2)).unwrap();
        let mut buf = Vec::new();
        ps.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x,y\n"));
        let back = PointSet::<f64>::read_csv(&buf[..]).unwrap();
        assert_eq!(back, ps);
    }

    #[test]
    fn split_seeds_differ() {
        let s = RngSeed(7);
        assert_ne!(s.split(0), s.split(1));
        assert_eq!(s.split(3), RngSeed(7).split(3));
    }
}
