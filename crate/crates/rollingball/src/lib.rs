//! Computational convex analysis built around rolling-ball (morphological
//! opening) constructions.
//!
//! The crate provides:
//!
//! - [`convex`]: convex bodies (halfspace intersections, polygons) and the
//!   basic kernel: membership, support, nearest-point projection, distance,
//!   Minkowski functional, Chebyshev center.
//! - [`morphology`]: inner parallel bodies `K_r`, ball openings `K(r)`,
//!   dilation factors, boundary normal fields, and exact / Monte Carlo
//!   boundary-measure computations.
//! - [`funcreg`]: convex functions as maxima of quadratic pieces and the
//!   epigraph-opening regularizer producing a `C^{1,1}` convex majorant `g`
//!   that agrees with `f` outside a small set.
//! - [`glue`]: smooth maximum, `C^{1,1}` convex extension from a ball,
//!   annulus patchwork and grid convex envelopes with second-difference
//!   certification.
//! - [`alexandrov`]: numerical certification of second-order Taylor
//!   expansions of convex functions at touch points of the regularizer.
//! - [`io`]: the JSON/CSV/SVG file formats shared with the `rollingball`
//!   command-line tool.
//!
//! All operations are pure functions of immutable inputs. Stochastic
//! estimators draw from counter-based streams keyed on `(seed, index)`, so
//! results are reproducible for any worker count.

pub mod alexandrov;
pub mod convex;
pub mod error;
pub mod funcreg;
pub mod geometry;
pub mod glue;
pub mod io;
pub mod morphology;
pub mod parallel;
pub mod rng;

pub use error::Error;
pub use geometry::{Matrix, Vector};

/// Library version string, embedded into every CLI report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
