//! Analytic fixtures: the discontinuous surface that no product-preserving
//! competitor can make continuous, the diamond density, and the six-point
//! staircase example.

use crate::geometry::PointSet;
use crate::grid::{GridDomain, MonotoneGrid};
use crate::scalar::Scalar;
use crate::variational::DensityGrid;

/// The six points whose staircase has levels 0, 1, 2, 3 at
/// `(1,2)`, `(3,5)`, `(5,5)`, `(7,6)`.
pub fn staircase_example<T: Scalar>() -> PointSet<T> {
    PointSet::from_pairs(&[(1.0, 4.0), (3.0, 1.0), (2.0, 6.0), (4.0, 3.0), (5.0, 2.0), (6.0, 5.0)])
        .expect("fixture is in general position")
}

/// Doubly increasing surface with a jump at the origin:
/// `(x+y)/|x-y|` where `xy <= 0`, `sgn(x+y)` where `xy > 0`, and `0` at the origin.
pub fn counterexample_eval<T: Scalar>(x: T, y: T) -> T {
    let zero = T::zero();
    if x == zero && y == zero {
        zero
    } else if x * y <= zero {
        (x + y) / (x - y).abs()
    } else if x + y > zero {
        T::one()
    } else {
        -T::one()
    }
}

/// The counterexample sampled on an `m x m` grid over `[-1, 1]^2`, floored at
/// zero, and relabelled onto `[0, 2]^2`. The west and south lines are zero,
/// as the smoothing operator requires.
pub fn counterexample_grid<T: Scalar>(m: usize) -> MonotoneGrid<T> {
    assert!(m >= 3, "counterexample grid needs m >= 3");
    let h = T::lit(2.0) / T::lit((m - 1) as f64);
    let domain = GridDomain::new(T::zero(), T::zero(), h, h, m, m).expect("valid domain");
    let coord = |i: usize| T::lit(-1.0) + T::lit(2.0 * i as f64 / (m - 1) as f64);
    let mut values = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            values.push(counterexample_eval(coord(i), coord(j)).max(T::zero()));
        }
    }
    MonotoneGrid::new(domain, values).expect("counterexample is doubly increasing")
}

/// The raw counterexample on `[-1, 1]^2` without flooring or shifting.
pub fn counterexample_raw_grid<T: Scalar>(m: usize) -> MonotoneGrid<T> {
    assert!(m >= 3, "counterexample grid needs m >= 3");
    let h = T::lit(2.0) / T::lit((m - 1) as f64);
    let domain = GridDomain::new(-T::one(), -T::one(), h, h, m, m).expect("valid domain");
    let values = domain.nodes().map(|(x, y)| counterexample_eval(x, y)).collect();
    MonotoneGrid::new(domain, values).expect("counterexample is doubly increasing")
}

/// `|x| + |y| < 1/sqrt2`.
pub fn in_diamond<T: Scalar>(x: T, y: T) -> bool {
    x.abs() + y.abs() < T::FRAC_1_SQRT_2()
}

/// `-sqrt2 < x+y < 1/sqrt2` and `|x-y| < 1/sqrt2`.
pub fn in_diamond_rectangle<T: Scalar>(x: T, y: T) -> bool {
    let s = x + y;
    s > -T::SQRT_2() && s < T::FRAC_1_SQRT_2() && (x - y).abs() < T::FRAC_1_SQRT_2()
}

/// Bounding box of the rectangle that contains the diamond, discretised with
/// `m x m` nodes, and the indicator density of the diamond rasterised at cell
/// centres and renormalised to unit mass.
pub fn diamond_instance<T: Scalar>(m: usize) -> (DensityGrid<T>, GridDomain<T>) {
    assert!(m >= 3, "diamond instance needs m >= 3");
    let lo = T::lit(-1.5 * std::f64::consts::FRAC_1_SQRT_2);
    let hi = T::FRAC_1_SQRT_2();
    let h = (hi - lo) / T::lit((m - 1) as f64);
    let domain = GridDomain::new(lo, lo, h, h, m, m).expect("valid domain");
    let rho = DensityGrid::from_cell_fn(domain, |x, y| if in_diamond(x, y) { T::one() } else { T::zero() })
        .and_then(DensityGrid::normalized)
        .expect("diamond has positive mass");
    (rho, domain)
}

/// Uniform density on the unit square, discretised with `m x m` nodes.
pub fn unit_square_instance<T: Scalar>(m: usize) -> (DensityGrid<T>, GridDomain<T>) {
    assert!(m >= 2);
    let h = T::one() / T::lit((m - 1) as f64);
    let domain = GridDomain::new(T::zero(), T::zero(), h, h, m, m).expect("valid domain");
    let rho =
        DensityGrid::from_cell_fn(domain, |_, _| T::one()).and_then(DensityGrid::normalized).expect("square has positive mass");
    (rho, domain)
}
