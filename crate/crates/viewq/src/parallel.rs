//! Multithreaded versions of the per-view loops. Views are rendered on a
//! rayon pool with one rasterizer per worker and collected in sphere order,
//! so results do not depend on the thread count.

use rayon::prelude::*;
use viewq_core::cleaning::{prune, Cleaned};
use viewq_core::measures::{assemble_maps, view_distribution, ModelEvaluation, PolygonView};
use viewq_core::raster::{make_camera, CameraConfig, Rasterizer};
use viewq_core::sampling::{fibonacci_sphere, ViewSphere};
use viewq_core::Mesh;

use crate::error::Result;

/// A pool with `threads` workers; 0 lets rayon decide.
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn new_rasterizer(camera: &CameraConfig) -> viewq_core::Result<Rasterizer> {
    Rasterizer::new(camera.width, camera.height)
}

/// Per-view polygon distributions in sphere order.
pub fn render_views(
    mesh: &Mesh,
    sphere: &ViewSphere,
    camera: &CameraConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<viewq_core::Result<PolygonView>>> {
    new_rasterizer(camera)?;
    Ok(pool.install(|| {
        sphere
            .viewpoints()
            .par_iter()
            .map_init(
                || new_rasterizer(camera).expect("validated above"),
                |r, &dir| view_distribution(r, mesh, dir, camera),
            )
            .collect()
    }))
}

/// Same result as [`viewq_core::measures::evaluate_model`], rendered in
/// parallel.
pub fn evaluate_model(
    mesh: &Mesh,
    sphere: &ViewSphere,
    camera: &CameraConfig,
    pool: &rayon::ThreadPool,
) -> Result<ModelEvaluation> {
    let views = render_views(mesh, sphere, camera, pool)?;
    Ok(assemble_maps(mesh, &views)?)
}

/// Visibility mask over `sphere`, OR-reduced across workers.
pub fn visible_faces(
    mesh: &Mesh,
    sphere: &ViewSphere,
    camera: &CameraConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<bool>> {
    new_rasterizer(camera)?;
    let n = mesh.faces().len();
    pool.install(|| {
        sphere
            .viewpoints()
            .par_iter()
            .map_init(
                || new_rasterizer(camera).expect("validated above"),
                |r, &dir| -> viewq_core::Result<Vec<bool>> {
                    let cam = make_camera(mesh, dir, camera)?;
                    Ok(r.rasterize(mesh, &cam)?.visible_flags())
                },
            )
            .try_reduce(
                || vec![false; n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x |= y);
                    Ok(a)
                },
            )
    })
    .map_err(Into::into)
}

/// Parallel [`viewq_core::cleaning::remove_hidden_faces`].
pub fn remove_hidden_faces(
    mesh: &Mesh,
    n_views: usize,
    camera: &CameraConfig,
    pool: &rayon::ThreadPool,
) -> Result<Cleaned> {
    let sphere = fibonacci_sphere(n_views)?;
    let keep = visible_faces(mesh, &sphere, camera, pool)?;
    Ok(prune(mesh, &keep)?)
}
