//! File formats, parallel drivers and the command-line front end for
//! [`viewq_core`].

pub mod dataset;
pub mod error;
pub mod mesh_io;
pub mod parallel;
pub mod points;

pub use error::{Error, Result};
pub use viewq_core;
