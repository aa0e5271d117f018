//! Procedural test meshes.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::geom::Vec3;
use crate::mesh::Mesh;

/// Accumulates polygons from several parts into one mesh.
#[derive(Debug, Default, Clone)]
pub struct MeshBuilder {
    vertices: Vec<Vec3>,
    polygons: Vec<Vec<u32>>,
}

impl MeshBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, v: Vec3) -> u32 {
        self.vertices.push(v);
        (self.vertices.len() - 1) as u32
    }

    pub fn polygon(&mut self, loop_: &[u32]) {
        self.polygons.push(loop_.to_vec());
    }

    /// Axis-aligned box as six outward-facing quads.
    pub fn cuboid(&mut self, min: Vec3, max: Vec3) -> &mut Self {
        let b = self.vertices.len() as u32;
        for i in 0..8u32 {
            let pick = |bit: u32, lo: f64, hi: f64| if i & bit != 0 { hi } else { lo };
            self.vertices.push(Vec3::new(
                pick(1, min.x, max.x),
                pick(2, min.y, max.y),
                pick(4, min.z, max.z),
            ));
        }
        for q in [
            [0, 2, 3, 1],
            [4, 5, 7, 6],
            [0, 1, 5, 4],
            [2, 6, 7, 3],
            [1, 3, 7, 5],
            [0, 4, 6, 2],
        ] {
            self.polygons.push(q.iter().map(|&k| b + k).collect());
        }
        self
    }

    /// Closed tube along +x from `start` with the given `length` and
    /// elliptical cross sections `radius(t) * (ry, rz)`, t in [0, 1]. Ends
    /// are capped with fans around a center vertex when the radius there is
    /// nonzero.
    #[allow(clippy::too_many_arguments)]
    pub fn tube(
        &mut self,
        start: Vec3,
        length: f64,
        ry: f64,
        rz: f64,
        rings: usize,
        segments: usize,
        radius: impl Fn(f64) -> f64,
    ) -> &mut Self {
        let base = self.vertices.len() as u32;
        for r in 0..=rings {
            let t = r as f64 / rings as f64;
            let k = radius(t);
            for s in 0..segments {
                let (sn, cs) = libm::sincos(TAU * s as f64 / segments as f64);
                self.vertices
                    .push(start + Vec3::new(length * t, k * ry * cs, k * rz * sn));
            }
        }
        let seg = segments as u32;
        let at = |r: usize, s: u32| base + r as u32 * seg + s % seg;
        let collapsed = |r: usize| radius(r as f64 / rings as f64) == 0.0;
        for r in 0..rings {
            for s in 0..seg {
                // a ring of radius 0 is a single point: skip the sliver
                // triangle that would have zero area
                if !collapsed(r + 1) {
                    self.polygons.push([at(r, s), at(r + 1, s), at(r + 1, s + 1)].to_vec());
                }
                if !collapsed(r) {
                    self.polygons.push([at(r, s), at(r + 1, s + 1), at(r, s + 1)].to_vec());
                }
            }
        }
        for (ring, t, flip) in [(0usize, 0.0, true), (rings, 1.0, false)] {
            if radius(t) == 0.0 {
                continue;
            }
            let c = self.vertex(start + Vec3::new(length * t, 0.0, 0.0));
            for s in 0..seg {
                let (a, b) = (at(ring, s), at(ring, s + 1));
                if flip {
                    self.polygons.push([c, b, a].to_vec());
                } else {
                    self.polygons.push([c, a, b].to_vec());
                }
            }
        }
        self
    }

    pub fn build(&self) -> Mesh {
        Mesh::from_polygons(self.vertices.clone(), &self.polygons).expect("builder shapes are valid")
    }
}

/// Axis-aligned unit cube centered at the origin, six quads (12 triangles).
pub fn unit_cube() -> Mesh {
    MeshBuilder::new()
        .cuboid(Vec3::new(-0.5, -0.5, -0.5), Vec3::new(0.5, 0.5, 0.5))
        .build()
}

/// A unit cube enclosed by a concentric cube of side `outer`.
pub fn nested_cubes(outer: f64) -> Mesh {
    let h = 0.5 * outer;
    MeshBuilder::new()
        .cuboid(Vec3::new(-h, -h, -h), Vec3::new(h, h, h))
        .cuboid(Vec3::new(-0.5, -0.5, -0.5), Vec3::new(0.5, 0.5, 0.5))
        .build()
}

/// Latitude-longitude sphere of radius 1 with `2 * slices * (stacks - 1)`
/// triangles.
pub fn uv_sphere(stacks: usize, slices: usize) -> Mesh {
    let mut b = MeshBuilder::new();
    let north = b.vertex(Vec3::Z);
    for i in 1..stacks {
        let theta = PI * i as f64 / stacks as f64;
        let (st, ct) = libm::sincos(theta);
        for j in 0..slices {
            let (sp, cp) = libm::sincos(TAU * j as f64 / slices as f64);
            b.vertex(Vec3::new(st * cp, st * sp, ct));
        }
    }
    let south = b.vertex(-Vec3::Z);
    let sl = slices as u32;
    let ring = |i: usize, j: u32| 1 + (i as u32 - 1) * sl + j % sl;
    for j in 0..sl {
        b.polygon(&[north, ring(1, j), ring(1, j + 1)]);
        b.polygon(&[south, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
    }
    for i in 1..stacks - 1 {
        for j in 0..sl {
            b.polygon(&[ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
            b.polygon(&[ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
        }
    }
    b.build()
}

/// Box chair: seat, backrest and four legs that reach into the seat.
pub fn chair() -> Mesh {
    let mut b = MeshBuilder::new();
    b.cuboid(Vec3::new(-0.5, 0.45, -0.5), Vec3::new(0.5, 0.55, 0.5));
    b.cuboid(Vec3::new(-0.5, 0.55, -0.5), Vec3::new(0.5, 1.3, -0.42));
    for (x, z) in [(-0.45, -0.45), (0.45, -0.45), (-0.45, 0.45), (0.45, 0.45)] {
        b.cuboid(Vec3::new(x - 0.04, 0.0, z - 0.04), Vec3::new(x + 0.04, 0.5, z + 0.04));
    }
    b.build()
}

/// Airplane-like model: a tapered fuselage tube along +x, swept wings,
/// a tailplane and a fin, plus one engine pod under the left wing so the
/// shape has no mirror symmetry. `detail` scales the fuselage tessellation.
pub fn airplane(detail: usize) -> Mesh {
    let detail = detail.max(1);
    let mut b = MeshBuilder::new();
    let profile = |t: f64| {
        if t < 0.15 {
            libm::sqrt(t / 0.15)
        } else if t > 0.8 {
            0.35 + 0.65 * (1.0 - t) / 0.2
        } else {
            1.0
        }
    };
    b.tube(Vec3::new(-1.0, 0.0, 0.0), 2.0, 0.12, 0.14, 12 * detail, 8 * detail, profile);
    // wings
    b.cuboid(Vec3::new(-0.15, -0.02, -0.95), Vec3::new(0.15, 0.02, 0.95));
    // tailplane
    b.cuboid(Vec3::new(0.78, 0.02, -0.35), Vec3::new(0.95, 0.05, 0.35));
    // fin
    b.cuboid(Vec3::new(0.75, 0.05, -0.015), Vec3::new(0.97, 0.38, 0.015));
    // engine pod under the left wing
    b.tube(Vec3::new(-0.25, -0.08, -0.5), 0.3, 0.06, 0.06, 3 * detail, 6 * detail, |_| 1.0);
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_counts() {
        let c = unit_cube();
        assert_eq!(c.faces().len(), 12);
        assert_eq!(c.polygon_count(), 6);
        assert!((c.total_area() - 6.0).abs() < 1e-15);
        assert_eq!(c.bbox_center(), Vec3::ZERO);
    }

    #[test]
    fn cube_faces_point_outward() {
        let c = unit_cube();
        for f in 0..12 {
            let [a, b, d] = c.triangle(f);
            let n = (b - a).cross(d - a);
            let centroid = (a + b + d) / 3.0;
            assert!(n.dot(centroid) > 0.0, "face {f} points inward");
        }
    }

    #[test]
    fn sphere_face_count() {
        assert_eq!(uv_sphere(21, 25).faces().len(), 1000);
        assert_eq!(uv_sphere(51, 100).faces().len(), 10_000);
    }

    #[test]
    fn airplane_is_reasonable() {
        let a = airplane(1);
        let s = a.summary();
        assert!(s.face_count > 200 && s.face_count < 10_000, "{}", s.face_count);
        assert!(s.bbox_max[2] > 0.9 && s.bbox_min[2] < -0.9);
        assert!(airplane(4).faces().len() > a.faces().len());
        assert_eq!(s.degenerate_count, 0);
    }
}
