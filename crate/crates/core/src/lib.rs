//! Monotone subsequences of random point sets, the surfaces they trace, and
//! the variational problem their limits solve.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiation.

pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod grid;
pub mod plot;
pub mod scalar;
pub mod smoothing;
pub mod tableau;
pub mod variational;
pub mod watermelon;

pub use error::{Error, Result};
pub use geometry::{DensityModel, Point, PointSet, Rect, RectangleSpec, RngSeed};
pub use grid::{GridDomain, MonotoneGrid, ProjectionOptions};
pub use scalar::Scalar;
pub use smoothing::{CeilingFrontier, SmoothingParams};
pub use tableau::{StaircaseFunction, YoungShape};
pub use variational::{DensityGrid, MaximizeOptions, MaximizerReport, PhiModel};
pub use watermelon::WatermelonResult;

pub type PointSetF64 = PointSet<f64>;
pub type PointSetF32 = PointSet<f32>;
pub type GridDomainF64 = GridDomain<f64>;
pub type MonotoneGridF64 = MonotoneGrid<f64>;
pub type MonotoneGridF32 = MonotoneGrid<f32>;
pub type DensityGridF64 = DensityGrid<f64>;
pub type StaircaseF64 = StaircaseFunction<f64>;
pub type WatermelonF64 = WatermelonResult<f64>;
