//! Indexed triangle meshes.
//!
//! Input polygons are fan-triangulated on construction. Every triangle keeps
//! the index of the polygon it came from, and the quality measures aggregate
//! projected areas per polygon, so a quad face of a cube counts as a single
//! polygon even though it renders as two triangles.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    faces: Vec<[u32; 3]>,
    face_areas: Vec<f64>,
    face_polygon: Vec<u32>,
    polygon_areas: Vec<f64>,
    total_area: f64,
    bbox_min: Vec3,
    bbox_max: Vec3,
}

/// Counts and aggregates describing a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshSummary {
    pub vertex_count: usize,
    pub face_count: usize,
    pub polygon_count: usize,
    pub total_area: f64,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
    pub bbox_diagonal: f64,
    pub degenerate_count: usize,
}

/// Maps each used slot to its rank among used slots.
fn compact(used: &[bool]) -> Vec<u32> {
    let mut next = 0u32;
    used.iter()
        .map(|&u| {
            let id = next;
            next += u as u32;
            id
        })
        .collect()
}

pub fn triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    0.5 * (b - a).cross(c - a).norm()
}

impl Mesh {
    /// Builds a mesh from triangles; each triangle is its own polygon.
    pub fn from_triangles(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Mesh> {
        let face_polygon = (0..faces.len() as u32).collect();
        Mesh::assemble(vertices, faces, face_polygon)
    }

    /// Builds a mesh from polygons given as vertex loops, fan-triangulating
    /// each loop around its first vertex.
    pub fn from_polygons<P: AsRef<[u32]>>(vertices: Vec<Vec3>, polygons: &[P]) -> Result<Mesh> {
        let mut faces = Vec::with_capacity(polygons.len());
        let mut face_polygon = Vec::with_capacity(polygons.len());
        for (p, poly) in polygons.iter().enumerate() {
            let poly = poly.as_ref();
            if poly.len() < 3 {
                return Err(Error::arg(alloc::format!(
                    "polygon {p} has {} vertices, need at least 3",
                    poly.len()
                )));
            }
            for &i in poly {
                if i as usize >= vertices.len() {
                    return Err(Error::IndexOutOfRange {
                        face: p,
                        index: i as usize,
                        vertex_count: vertices.len(),
                    });
                }
            }
            for k in 1..poly.len() - 1 {
                faces.push([poly[0], poly[k], poly[k + 1]]);
                face_polygon.push(p as u32);
            }
        }
        Mesh::assemble(vertices, faces, face_polygon)
    }

    fn assemble(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>, face_polygon: Vec<u32>) -> Result<Mesh> {
        if vertices.is_empty() || faces.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(alloc::format!("vertex {i} has a non-finite coordinate")));
        }
        for (f, tri) in faces.iter().enumerate() {
            if let Some(&i) = tri.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(Error::IndexOutOfRange {
                    face: face_polygon[f] as usize,
                    index: i as usize,
                    vertex_count: vertices.len(),
                });
            }
        }
        let face_areas: Vec<f64> = faces
            .iter()
            .map(|t| {
                triangle_area(
                    vertices[t[0] as usize],
                    vertices[t[1] as usize],
                    vertices[t[2] as usize],
                )
            })
            .collect();
        let polygon_count = face_polygon.iter().map(|&p| p as usize + 1).max().unwrap_or(0);
        let mut polygon_areas = vec![0.0; polygon_count];
        for (&p, &a) in face_polygon.iter().zip(&face_areas) {
            polygon_areas[p as usize] += a;
        }
        let total_area: f64 = face_areas.iter().sum();
        if !(total_area > 0.0) {
            return Err(Error::ZeroArea);
        }
        let (bbox_min, bbox_max) = vertices.iter().fold(
            (vertices[0], vertices[0]),
            |(lo, hi), &v| (lo.min(v), hi.max(v)),
        );
        Ok(Mesh {
            vertices,
            faces,
            face_areas,
            face_polygon,
            polygon_areas,
            total_area,
            bbox_min,
            bbox_max,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    /// Triangles as vertex-index triples.
    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    /// Source polygon of every triangle.
    pub fn face_polygon(&self) -> &[u32] {
        &self.face_polygon
    }

    pub fn polygon_count(&self) -> usize {
        self.polygon_areas.len()
    }

    pub fn polygon_areas(&self) -> &[f64] {
        &self.polygon_areas
    }

    /// A_t, the sum of all face areas.
    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    pub fn bbox_min(&self) -> Vec3 {
        self.bbox_min
    }

    pub fn bbox_max(&self) -> Vec3 {
        self.bbox_max
    }

    pub fn bbox_center(&self) -> Vec3 {
        (self.bbox_min + self.bbox_max) * 0.5
    }

    pub fn bbox_diagonal(&self) -> f64 {
        (self.bbox_max - self.bbox_min).norm()
    }

    pub fn triangle(&self, face: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[face];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Indices of zero-area triangles.
    pub fn degenerate_faces(&self) -> Vec<usize> {
        self.face_areas
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            vertex_count: self.vertices.len(),
            face_count: self.faces.len(),
            polygon_count: self.polygon_count(),
            total_area: self.total_area,
            bbox_min: self.bbox_min.to_array(),
            bbox_max: self.bbox_max.to_array(),
            bbox_diagonal: self.bbox_diagonal(),
            degenerate_count: self.face_areas.iter().filter(|&&a| a == 0.0).count(),
        }
    }

    /// Reconstructs each polygon's vertex loop from its fan triangles.
    ///
    /// A polygon whose triangles no longer form an intact fan (for example
    /// after some of them were pruned) is emitted as one loop per triangle.
    pub fn polygon_loops(&self) -> Vec<Vec<u32>> {
        let mut loops = Vec::with_capacity(self.polygon_count());
        let mut start = 0;
        while start < self.faces.len() {
            let p = self.face_polygon[start];
            let mut end = start + 1;
            while end < self.faces.len() && self.face_polygon[end] == p {
                end += 1;
            }
            let run = &self.faces[start..end];
            let is_fan = run.windows(2).all(|w| w[1][0] == w[0][0] && w[1][1] == w[0][2]);
            if is_fan {
                let mut l = Vec::with_capacity(run.len() + 2);
                l.extend_from_slice(&run[0]);
                l.extend(run[1..].iter().map(|t| t[2]));
                loops.push(l);
            } else {
                loops.extend(run.iter().map(|t| t.to_vec()));
            }
            start = end;
        }
        loops
    }

    /// Same topology with every vertex multiplied by `rotation`.
    pub fn rotated(&self, rotation: &Mat3) -> Mesh {
        let vertices = self.vertices.iter().map(|&v| *rotation * v).collect();
        Mesh::assemble(vertices, self.faces.clone(), self.face_polygon.clone())
            .expect("rotation preserves validity")
    }

    /// Keeps the triangles with `keep[face] == true`, compacting vertices
    /// and polygon ids in their original order. Kept vertex coordinates are
    /// copied bit-exactly; keeping everything reproduces the mesh.
    pub fn retain_faces(&self, keep: &[bool]) -> Result<Mesh> {
        if keep.len() != self.faces.len() {
            return Err(Error::arg("keep mask length differs from face count"));
        }
        let mut vertex_used = vec![false; self.vertices.len()];
        let mut polygon_used = vec![false; self.polygon_count()];
        for (f, tri) in self.faces.iter().enumerate() {
            if keep[f] {
                for &v in tri {
                    vertex_used[v as usize] = true;
                }
                polygon_used[self.face_polygon[f] as usize] = true;
            }
        }
        let vertex_map = compact(&vertex_used);
        let polygon_map = compact(&polygon_used);
        let vertices = self
            .vertices
            .iter()
            .zip(&vertex_used)
            .filter(|(_, &u)| u)
            .map(|(&v, _)| v)
            .collect();
        let mut faces = Vec::new();
        let mut face_polygon = Vec::new();
        for (f, tri) in self.faces.iter().enumerate() {
            if keep[f] {
                faces.push(tri.map(|v| vertex_map[v as usize]));
                face_polygon.push(polygon_map[self.face_polygon[f] as usize]);
            }
        }
        Mesh::assemble(vertices, faces, face_polygon)
    }

    /// Splits every triangle of the selected polygons into four by edge
    /// midpoints, `levels` times. Each resulting triangle becomes its own
    /// coplanar polygon, which refines the meshing without changing the
    /// surface.
    pub fn subdivide_polygons(&self, selected: impl Fn(usize) -> bool, levels: u32) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut faces = Vec::new();
        let mut face_polygon = Vec::new();
        let mut next_polygon = 0u32;
        let mut polygon_map = vec![u32::MAX; self.polygon_count()];
        for (f, tri) in self.faces.iter().enumerate() {
            let p = self.face_polygon[f] as usize;
            if !selected(p) || levels == 0 {
                if polygon_map[p] == u32::MAX {
                    polygon_map[p] = next_polygon;
                    next_polygon += 1;
                }
                faces.push(*tri);
                face_polygon.push(polygon_map[p]);
                continue;
            }
            let mut current = vec![*tri];
            for _ in 0..levels {
                let mut next = Vec::with_capacity(current.len() * 4);
                for [a, b, c] in current {
                    let mid = |i: u32, j: u32, vs: &mut Vec<Vec3>| {
                        vs.push((vs[i as usize] + vs[j as usize]) * 0.5);
                        (vs.len() - 1) as u32
                    };
                    let ab = mid(a, b, &mut vertices);
                    let bc = mid(b, c, &mut vertices);
                    let ca = mid(c, a, &mut vertices);
                    next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
                }
                current = next;
            }
            for t in current {
                faces.push(t);
                face_polygon.push(next_polygon);
                next_polygon += 1;
            }
        }
        Mesh::assemble(vertices, faces, face_polygon).expect("subdivision preserves validity")
    }
}
