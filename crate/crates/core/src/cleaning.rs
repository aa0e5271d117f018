//! Visibility-based hidden-face removal: a triangle survives if it owns at
//! least one pixel in at least one view of a dense exterior view set.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::mesh::Mesh;
use crate::raster::{make_camera, CameraConfig, FaceStats, Rasterizer};
use crate::sampling::{fibonacci_sphere, ViewSphere};

/// Default number of views of the visibility pass.
pub const DEFAULT_VIEWS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Cleaned {
    pub mesh: Mesh,
    /// Removed triangle indices of the input mesh, ascending.
    pub removed: Vec<usize>,
}

/// ORs `stats` into the keep mask.
pub fn accumulate_visibility(keep: &mut [bool], stats: &FaceStats) {
    for (k, &c) in keep.iter_mut().zip(&stats.pixel_counts) {
        *k |= c > 0;
    }
}

/// Which triangles are visible from at least one view of `sphere`.
pub fn visible_faces(mesh: &Mesh, sphere: &ViewSphere, camera: &CameraConfig) -> Result<Vec<bool>> {
    let mut rasterizer = Rasterizer::new(camera.width, camera.height)?;
    let mut keep = vec![false; mesh.faces().len()];
    for &dir in sphere.viewpoints() {
        let cam = make_camera(mesh, dir, camera)?;
        let stats = rasterizer.rasterize(mesh, &cam)?;
        accumulate_visibility(&mut keep, &stats);
    }
    Ok(keep)
}

/// Drops the triangles with `keep[f] == false` and compacts vertices.
pub fn prune(mesh: &Mesh, keep: &[bool]) -> Result<Cleaned> {
    let removed = keep
        .iter()
        .enumerate()
        .filter(|(_, &k)| !k)
        .map(|(i, _)| i)
        .collect();
    Ok(Cleaned {
        mesh: mesh.retain_faces(keep)?,
        removed,
    })
}

/// Renders `n_views` Fibonacci directions and removes every triangle that
/// never owns a pixel. Sub-pixel triangles can be lost at low resolution.
pub fn remove_hidden_faces(mesh: &Mesh, n_views: usize, camera: &CameraConfig) -> Result<Cleaned> {
    let sphere = fibonacci_sphere(n_views)?;
    let keep = visible_faces(mesh, &sphere, camera)?;
    prune(mesh, &keep)
}
