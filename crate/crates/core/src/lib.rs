//! Construction and evaluation of a linear, near-optimal extension operator
//! for traces of the homogeneous Sobolev space `L²_p(R²)`, `p > 2`, on finite
//! planar point sets, together with the intrinsic trace-norm functional.
//!
//! The pipeline, in dependency order:
//!
//! * [`geometry`] — squares, triangles, Menger curvature, affine interpolation
//! * [`whitney`] — Whitney decomposition of `R²∖E` and a C² partition of unity
//! * [`lacunae`] — lacunae of Whitney squares, ε-net hierarchy, projections
//! * [`bridges`] — interior/exterior bridges and the well-separated family `K_E`
//! * [`curvature`] — the curvature measure `μ_E`, critical radii, important
//!   squares, and the Sobolev component `T₁`
//! * [`selection`] — constraint lines, pre-selection/selection, per-lacuna polynomials
//! * [`extension`] — the extension operator `f ↦ F` with derivatives
//! * [`analysis`] — Sobolev seminorm, trace functional `λ`, `h`-diagnostics,
//!   sandwich report
//! * [`verify`] — randomized invariant battery used by the CLI and tests

pub mod analysis;
pub mod bridges;
pub mod curvature;
pub mod dump;
pub mod extension;
pub mod geometry;
pub mod lacunae;
pub mod point_set;
pub mod selection;
pub mod verify;
pub mod whitney;

pub use geometry::{Point, Square, Vec2};
pub use point_set::{PointSet, SampleValues};
