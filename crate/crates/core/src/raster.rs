//! Deterministic item-buffer rasterizer.
//!
//! Every pixel stores the index of the front-most triangle covering its
//! center. Vertices are snapped to 1/256 pixel and coverage is decided with
//! exact integer edge functions under the top-left rule, so triangles that
//! share an edge never both claim a pixel on it. Depth is the interpolated
//! reciprocal view distance; equal depths go to the lower triangle index.
//! There is no backface culling.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::Mesh;

/// Item-buffer value of pixels no triangle covers.
pub const NO_FACE: u32 = u32::MAX;

const SUBPIXEL_BITS: u32 = 8;
const SUBPIXEL: f64 = (1 << SUBPIXEL_BITS) as f64;
const HALF_SUBPIXEL: i64 = 1 << (SUBPIXEL_BITS - 1);
// keeps snapped coordinates small enough for i64 edge products
const GUARD_BAND_PX: f64 = (1u64 << 20) as f64;

/// Image size and field of view used to build cameras.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraConfig {
    pub width: u32,
    pub height: u32,
    /// Vertical field of view in radians.
    pub vertical_fov: f64,
}

impl CameraConfig {
    pub fn square(resolution: u32) -> Self {
        CameraConfig {
            width: resolution,
            height: resolution,
            ..Default::default()
        }
    }

    pub fn with_fov_degrees(mut self, degrees: f64) -> Self {
        self.vertical_fov = degrees.to_radians();
        self
    }
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            width: 1024,
            height: 1024,
            vertical_fov: core::f64::consts::FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub eye: Vec3,
    pub target: Vec3,
    pub up: Vec3,
    pub vertical_fov: f64,
    pub width: u32,
    pub height: u32,
    pub near: f64,
    pub far: f64,
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::arg("zero image resolution"));
        }
        if !(self.vertical_fov > 0.0 && self.vertical_fov < core::f64::consts::PI) {
            return Err(Error::arg("vertical field of view must lie in (0, π)"));
        }
        if !(self.near > 0.0 && self.near < self.far) {
            return Err(Error::arg("need 0 < near < far"));
        }
        let forward = self.target - self.eye;
        if forward.try_normalize().is_none() {
            return Err(Error::arg("camera eye coincides with target"));
        }
        if forward.cross(self.up).try_normalize().is_none() {
            return Err(Error::arg("up vector is parallel to the view direction"));
        }
        Ok(())
    }

    /// Orthonormal (right, up, forward) frame.
    fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let f = (self.target - self.eye).try_normalize().expect("validated camera");
        let r = f.cross(self.up).try_normalize().expect("validated camera");
        let u = r.cross(f);
        (r, u, f)
    }

    /// Focal length in pixels.
    pub fn focal(&self) -> f64 {
        0.5 * self.height as f64 / libm::tan(0.5 * self.vertical_fov)
    }
}

/// Camera looking at the bounding-box center from half the box diagonal
/// along `view_dir`. Up is +y, or +x when the view is within ~8° of the y
/// axis. Near and far are 10⁻³ and 4 box diagonals.
pub fn make_camera(mesh: &Mesh, view_dir: Vec3, config: &CameraConfig) -> Result<Camera> {
    let diagonal = mesh.bbox_diagonal();
    if !(diagonal > 0.0) {
        return Err(Error::DegenerateGeometry("bounding box has zero diagonal".into()));
    }
    let dir = view_dir
        .try_normalize()
        .ok_or_else(|| Error::arg("zero view direction"))?;
    let up = if dir.dot(Vec3::Y).abs() > 0.99 { Vec3::X } else { Vec3::Y };
    let target = mesh.bbox_center();
    let camera = Camera {
        eye: target + dir * (0.5 * diagonal),
        target,
        up,
        vertical_fov: config.vertical_fov,
        width: config.width,
        height: config.height,
        near: 1e-3 * diagonal,
        far: 4.0 * diagonal,
    };
    camera.validate()?;
    Ok(camera)
}

/// Per-triangle pixel ownership of one rendered view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceStats {
    /// a_z(v) per triangle, in pixels.
    pub pixel_counts: Vec<u32>,
    /// a_t(v), the number of covered pixels.
    pub total_pixels: u64,
}

impl FaceStats {
    pub fn visible(&self, face: usize) -> bool {
        self.pixel_counts[face] > 0
    }

    pub fn visible_flags(&self) -> Vec<bool> {
        self.pixel_counts.iter().map(|&c| c > 0).collect()
    }

    pub fn visible_count(&self) -> usize {
        self.pixel_counts.iter().filter(|&&c| c > 0).count()
    }

    /// Pixel counts summed per source polygon.
    pub fn polygon_counts(&self, mesh: &Mesh) -> Vec<u64> {
        let mut out = vec![0u64; mesh.polygon_count()];
        for (&p, &c) in mesh.face_polygon().iter().zip(&self.pixel_counts) {
            out[p as usize] += c as u64;
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct ViewVertex {
    x: f64,
    y: f64,
    d: f64,
}

impl ViewVertex {
    fn key(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.d)
    }

    fn lerp(a: ViewVertex, b: ViewVertex, t: f64) -> ViewVertex {
        ViewVertex {
            x: a.x + (b.x - a.x) * t,
            y: a.y + (b.y - a.y) * t,
            d: a.d + (b.d - a.d) * t,
        }
    }
}

/// Half-space a·x + b·y + c·d + e ≥ 0 in view coordinates.
#[derive(Debug, Clone, Copy)]
struct ClipPlane([f64; 4]);

impl ClipPlane {
    fn eval(&self, v: &ViewVertex) -> f64 {
        let [a, b, c, e] = self.0;
        a * v.x + b * v.y + c * v.d + e
    }
}

/// Reusable item and depth buffers for one resolution.
#[derive(Debug, Clone)]
pub struct Rasterizer {
    width: u32,
    height: u32,
    items: Vec<u32>,
    inv_depth: Vec<f64>,
    view: Vec<ViewVertex>,
}

impl Rasterizer {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::arg("zero image resolution"));
        }
        let n = width as usize * height as usize;
        Ok(Rasterizer {
            width,
            height,
            items: vec![NO_FACE; n],
            inv_depth: vec![0.0; n],
            view: Vec::new(),
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Triangle index per pixel of the last render, row-major from the top
    /// left; [`NO_FACE`] where nothing was drawn.
    pub fn item_buffer(&self) -> &[u32] {
        &self.items
    }

    /// Renders `mesh` into the item buffer and counts pixels per triangle.
    pub fn rasterize(&mut self, mesh: &Mesh, camera: &Camera) -> Result<FaceStats> {
        camera.validate()?;
        if camera.width != self.width || camera.height != self.height {
            *self = Rasterizer::new(camera.width, camera.height)?;
        }
        self.items.fill(NO_FACE);
        self.inv_depth.fill(0.0);

        let (r, u, f) = camera.basis();
        self.view.clear();
        self.view.extend(mesh.vertices().iter().map(|&p| {
            let rel = p - camera.eye;
            ViewVertex {
                x: rel.dot(r),
                y: rel.dot(u),
                d: rel.dot(f),
            }
        }));

        let focal = camera.focal();
        let cx = 0.5 * self.width as f64;
        let cy = 0.5 * self.height as f64;
        let gx = (cx + GUARD_BAND_PX) / focal;
        let gy = (cy + GUARD_BAND_PX) / focal;
        let planes = [
            ClipPlane([0.0, 0.0, 1.0, -camera.near]),
            ClipPlane([0.0, 0.0, -1.0, camera.far]),
            ClipPlane([-1.0, 0.0, gx, 0.0]),
            ClipPlane([1.0, 0.0, gx, 0.0]),
            ClipPlane([0.0, -1.0, gy, 0.0]),
            ClipPlane([0.0, 1.0, gy, 0.0]),
        ];

        let mut poly: Vec<ViewVertex> = Vec::with_capacity(12);
        let mut scratch: Vec<ViewVertex> = Vec::with_capacity(12);
        let areas = mesh.face_areas();
        for (face, tri) in mesh.faces().iter().enumerate() {
            // zero-area faces stay in the mesh but never own pixels
            if areas[face] == 0.0 {
                continue;
            }
            poly.clear();
            poly.extend(tri.iter().map(|&i| self.view[i as usize]));
            for plane in &planes {
                if poly.iter().all(|v| plane.eval(v) >= 0.0) {
                    continue;
                }
                clip_polygon(&poly, plane, &mut scratch);
                core::mem::swap(&mut poly, &mut scratch);
                if poly.len() < 3 {
                    break;
                }
            }
            if poly.len() < 3 {
                continue;
            }
            let snap = |v: &ViewVertex| ScreenVertex {
                x: libm::round((cx + focal * v.x / v.d) * SUBPIXEL) as i64,
                y: libm::round((cy - focal * v.y / v.d) * SUBPIXEL) as i64,
                inv_d: 1.0 / v.d,
            };
            let v0 = snap(&poly[0]);
            let mut prev = snap(&poly[1]);
            for v in &poly[2..] {
                let next = snap(v);
                self.fill_triangle(face as u32, v0, prev, next);
                prev = next;
            }
        }

        let mut pixel_counts = vec![0u32; mesh.faces().len()];
        let mut total_pixels = 0u64;
        for &id in &self.items {
            if id != NO_FACE {
                pixel_counts[id as usize] += 1;
                total_pixels += 1;
            }
        }
        Ok(FaceStats {
            pixel_counts,
            total_pixels,
        })
    }

    fn fill_triangle(&mut self, face: u32, a: ScreenVertex, b: ScreenVertex, c: ScreenVertex) {
        let mut v = [a, b, c];
        let mut area2 = edge(v[0], v[1], v[2].x, v[2].y);
        if area2 == 0 {
            return;
        }
        if area2 < 0 {
            v.swap(1, 2);
            area2 = -area2;
        }
        let w = self.width as i64;
        let h = self.height as i64;
        let min_x = v.iter().map(|p| p.x).min().unwrap();
        let max_x = v.iter().map(|p| p.x).max().unwrap();
        let min_y = v.iter().map(|p| p.y).min().unwrap();
        let max_y = v.iter().map(|p| p.y).max().unwrap();
        // pixel i has its center at i*256 + 128
        let sub = 1i64 << SUBPIXEL_BITS;
        let px0 = (min_x - HALF_SUBPIXEL + sub - 1).div_euclid(sub).max(0);
        let px1 = (max_x - HALF_SUBPIXEL).div_euclid(sub).min(w - 1);
        let py0 = (min_y - HALF_SUBPIXEL + sub - 1).div_euclid(sub).max(0);
        let py1 = (max_y - HALF_SUBPIXEL).div_euclid(sub).min(h - 1);
        if px0 > px1 || py0 > py1 {
            return;
        }

        // edge k is opposite vertex k
        let edges = [(v[1], v[2]), (v[2], v[0]), (v[0], v[1])];
        let bias: [i64; 3] = core::array::from_fn(|k| {
            let (p, q) = edges[k];
            let (dx, dy) = (q.x - p.x, q.y - p.y);
            let top_left = (dy == 0 && dx > 0) || dy < 0;
            if top_left {
                0
            } else {
                -1
            }
        });
        let step_x: [i64; 3] = core::array::from_fn(|k| -(edges[k].1.y - edges[k].0.y) * sub);
        let step_y: [i64; 3] = core::array::from_fn(|k| (edges[k].1.x - edges[k].0.x) * sub);
        let sx = px0 * sub + HALF_SUBPIXEL;
        let sy = py0 * sub + HALF_SUBPIXEL;
        let mut row: [i64; 3] =
            core::array::from_fn(|k| edge(edges[k].0, edges[k].1, sx, sy) + bias[k]);
        let inv_area = 1.0 / area2 as f64;
        let iw = [v[0].inv_d, v[1].inv_d, v[2].inv_d];

        for py in py0..=py1 {
            let mut e = row;
            let base = (py * w) as usize;
            for px in px0..=px1 {
                if e[0] >= 0 && e[1] >= 0 && e[2] >= 0 {
                    let bary = [
                        (e[0] - bias[0]) as f64,
                        (e[1] - bias[1]) as f64,
                        (e[2] - bias[2]) as f64,
                    ];
                    let depth = (bary[0] * iw[0] + bary[1] * iw[1] + bary[2] * iw[2]) * inv_area;
                    let idx = base + px as usize;
                    let cur = self.inv_depth[idx];
                    if depth > cur || (depth == cur && face < self.items[idx]) {
                        self.inv_depth[idx] = depth;
                        self.items[idx] = face;
                    }
                }
                for k in 0..3 {
                    e[k] += step_x[k];
                }
            }
            for k in 0..3 {
                row[k] += step_y[k];
            }
        }
    }
}

/// Renders with a fresh set of buffers.
pub fn rasterize(mesh: &Mesh, camera: &Camera) -> Result<FaceStats> {
    Rasterizer::new(camera.width, camera.height)?.rasterize(mesh, camera)
}

#[derive(Debug, Clone, Copy)]
struct ScreenVertex {
    x: i64,
    y: i64,
    inv_d: f64,
}

fn edge(p: ScreenVertex, q: ScreenVertex, x: i64, y: i64) -> i64 {
    (q.x - p.x) * (y - p.y) - (q.y - p.y) * (x - p.x)
}

fn clip_polygon(input: &[ViewVertex], plane: &ClipPlane, out: &mut Vec<ViewVertex>) {
    out.clear();
    let n = input.len();
    for i in 0..n {
        let a = input[i];
        let b = input[(i + 1) % n];
        let fa = plane.eval(&a);
        let fb = plane.eval(&b);
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            out.push(intersect(a, fa, b, fb));
        }
    }
}

// Endpoints are ordered canonically so the two triangles sharing an edge
// compute the identical crossing point.
fn intersect(a: ViewVertex, fa: f64, b: ViewVertex, fb: f64) -> ViewVertex {
    let (p, fp, q, fq) = if a.key() <= b.key() {
        (a, fa, b, fb)
    } else {
        (b, fb, a, fa)
    };
    ViewVertex::lerp(p, q, fp / (fp - fq))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_mesh(z_near: f64, z_far: f64) -> Mesh {
        // two identical unit triangles stacked along z
        Mesh::from_triangles(
            vec![
                Vec3::new(-1.0, -1.0, z_far),
                Vec3::new(1.0, -1.0, z_far),
                Vec3::new(0.0, 1.0, z_far),
                Vec3::new(-1.0, -1.0, z_near),
                Vec3::new(1.0, -1.0, z_near),
                Vec3::new(0.0, 1.0, z_near),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap()
    }

    #[test]
    fn camera_construction() {
        let m = quad_mesh(0.5, -0.5);
        let cam = make_camera(&m, Vec3::Z, &CameraConfig::square(64)).unwrap();
        assert!(((cam.eye - cam.target).norm() - 0.5 * m.bbox_diagonal()).abs() < 1e-12);
        assert_eq!(cam.up, Vec3::Y);
        let cam = make_camera(&m, Vec3::Y, &CameraConfig::square(64)).unwrap();
        assert_eq!(cam.up, Vec3::X);
        assert!(make_camera(&m, Vec3::ZERO, &CameraConfig::square(64)).is_err());
    }

    #[test]
    fn zero_resolution_rejected() {
        assert!(Rasterizer::new(0, 10).is_err());
        let m = quad_mesh(0.5, -0.5);
        let cfg = CameraConfig {
            width: 0,
            ..CameraConfig::default()
        };
        assert!(make_camera(&m, Vec3::Z, &cfg).is_err());
    }

    #[test]
    fn nearer_copy_owns_every_shared_pixel() {
        let m = quad_mesh(0.5, -0.5);
        let cam = make_camera(&m, Vec3::Z, &CameraConfig::square(128)).unwrap();
        let stats = rasterize(&m, &cam).unwrap();
        assert!(stats.pixel_counts[1] > 0);
        assert_eq!(stats.pixel_counts[0], 0);
        assert_eq!(stats.total_pixels, stats.pixel_counts[1] as u64);
    }

    #[test]
    fn equal_depth_goes_to_lower_index() {
        let m = Mesh::from_triangles(
            vec![
                Vec3::new(-1.0, -1.0, 0.0),
                Vec3::new(1.0, -1.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, -1.0),
            ],
            // same triangle twice with different winding, plus a spacer
            vec![[0, 2, 1], [0, 1, 2], [0, 1, 3]],
        )
        .unwrap();
        let cam = make_camera(&m, Vec3::Z, &CameraConfig::square(96)).unwrap();
        let stats = rasterize(&m, &cam).unwrap();
        assert!(stats.pixel_counts[0] > 0);
        assert_eq!(stats.pixel_counts[1], 0);
    }

    #[test]
    fn shared_edges_are_counted_once() {
        // a square split along its diagonal must cover exactly the pixels of
        // the square, with no pixel lost or claimed twice
        let m = Mesh::from_polygons(
            vec![
                Vec3::new(-1.0, -1.0, 0.0),
                Vec3::new(1.0, -1.0, 0.0),
                Vec3::new(1.0, 1.0, 0.0),
                Vec3::new(-1.0, 1.0, 0.0),
                Vec3::new(0.0, 0.0, -3.0),
            ],
            &[vec![0u32, 1, 2, 3], vec![0, 1, 4]],
        )
        .unwrap();
        let cam = Camera {
            eye: Vec3::new(0.0, 0.0, 4.0),
            target: Vec3::ZERO,
            up: Vec3::Y,
            vertical_fov: core::f64::consts::FRAC_PI_2,
            width: 100,
            height: 100,
            near: 0.01,
            far: 100.0,
        };
        let mut r = Rasterizer::new(100, 100).unwrap();
        let stats = r.rasterize(&m, &cam).unwrap();
        // square spans ±1 at distance 4 with focal 50 px: ±12.5 px around 50
        let square = stats.pixel_counts[0] + stats.pixel_counts[1];
        assert_eq!(square, 25 * 25);
    }

    #[test]
    fn conservation_and_determinism() {
        let m = quad_mesh(0.3, -0.2);
        let cam = make_camera(&m, Vec3::new(0.3, 0.2, 1.0).try_normalize().unwrap(), &CameraConfig::square(200)).unwrap();
        let a = rasterize(&m, &cam).unwrap();
        let b = rasterize(&m, &cam).unwrap();
        assert_eq!(a, b);
        let sum: u64 = a.pixel_counts.iter().map(|&c| c as u64).sum();
        assert_eq!(sum, a.total_pixels);
        assert!(a.total_pixels <= 200 * 200);
    }

    #[test]
    fn geometry_behind_camera_is_clipped() {
        let m = quad_mesh(0.5, -0.5);
        let cam = Camera {
            eye: Vec3::new(0.0, 0.0, -1.0),
            target: Vec3::new(0.0, 0.0, -5.0),
            up: Vec3::Y,
            vertical_fov: 1.0,
            width: 32,
            height: 32,
            near: 0.01,
            far: 10.0,
        };
        let stats = rasterize(&m, &cam).unwrap();
        assert_eq!(stats.total_pixels, 0);
    }
}
