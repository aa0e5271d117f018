//! Polygon-visibility viewpoint quality on a Fibonacci view sphere.
//!
//! The crate is `no_std` (with `alloc`) and contains every algorithm of the
//! engine: the triangle mesh model, view-sphere and surface sampling, a
//! deterministic item-buffer rasterizer, the four viewpoint quality measures
//! (entropy, visibility ratio, KL and mutual information), dynamic label
//! generation for best-view regression and a sphere-descent simulator that
//! exercises those labels without a network.
//!
//! File formats, parallel drivers and the command line live in the `viewq`
//! companion crate.
#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod cleaning;
pub mod descent;
pub mod error;
pub mod geom;
pub mod labels;
pub mod measures;
pub mod mesh;
pub mod raster;
pub mod sampling;
pub mod shapes;

pub use error::{Error, Result};
pub use geom::{Mat3, Vec3};
pub use labels::{GaussianParams, LabelSet};
pub use measures::{FacePrior, Measure, Orientation, VQMap};
pub use mesh::{Mesh, MeshSummary};
pub use raster::{Camera, CameraConfig, FaceStats, Rasterizer};
pub use sampling::{SurfaceCloud, ViewSphere};
