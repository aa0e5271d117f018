//! View-sphere layouts, surface point sampling and augmentation primitives.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{Mat3, Vec3};
use crate::mesh::Mesh;

/// Ordered candidate viewpoints on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewSphere {
    viewpoints: Vec<Vec3>,
}

impl ViewSphere {
    /// Wraps arbitrary directions, normalizing each one.
    pub fn from_directions(dirs: impl IntoIterator<Item = Vec3>) -> Result<ViewSphere> {
        let viewpoints = dirs
            .into_iter()
            .map(|d| d.try_normalize().ok_or_else(|| Error::arg("zero view direction")))
            .collect::<Result<Vec<_>>>()?;
        if viewpoints.is_empty() {
            return Err(Error::arg("view sphere needs at least one viewpoint"));
        }
        Ok(ViewSphere { viewpoints })
    }

    pub fn len(&self) -> usize {
        self.viewpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.viewpoints.is_empty()
    }

    pub fn viewpoints(&self) -> &[Vec3] {
        &self.viewpoints
    }

    pub fn get(&self, i: usize) -> Vec3 {
        self.viewpoints[i]
    }

    /// Index of the viewpoint closest to `dir` (largest dot product, lowest
    /// index on ties).
    pub fn nearest(&self, dir: Vec3) -> usize {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, v) in self.viewpoints.iter().enumerate() {
            let d = v.dot(dir);
            if d > best_dot {
                best_dot = d;
                best = i;
            }
        }
        best
    }

    /// Mean angular spacing √(4π/n) of an equal-area layout with n points.
    pub fn mean_spacing(&self) -> f64 {
        libm::sqrt(4.0 * PI / self.len() as f64)
    }

    /// Same layout rotated by `rotation`.
    pub fn rotated(&self, rotation: &Mat3) -> ViewSphere {
        ViewSphere {
            viewpoints: self.viewpoints.iter().map(|&v| *rotation * v).collect(),
        }
    }
}

/// Golden-angle spiral with half-offset latitudes:
/// z_i = 1 − 2(i + ½)/n, φ_i = 2π·i·(1 − 1/golden).
pub fn fibonacci_sphere(n: usize) -> Result<ViewSphere> {
    if n == 0 {
        return Err(Error::arg("fibonacci_sphere needs n >= 1"));
    }
    let golden = (1.0 + libm::sqrt(5.0)) / 2.0;
    let turn = TAU * (1.0 - 1.0 / golden);
    let viewpoints = (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = libm::sqrt(1.0 - z * z);
            let (s, c) = libm::sincos(turn * i as f64);
            Vec3::new(r * c, r * s, z)
        })
        .collect();
    Ok(ViewSphere { viewpoints })
}

/// Points sampled on a mesh surface together with the triangle each came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCloud {
    pub points: Vec<Vec3>,
    pub source_face: Vec<u32>,
}

impl SurfaceCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> SurfaceCloud {
        SurfaceCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            source_face: indices.iter().map(|&i| self.source_face[i]).collect(),
        }
    }

    pub fn transformed(&self, rotation: &Mat3) -> SurfaceCloud {
        SurfaceCloud {
            points: self.points.iter().map(|&p| *rotation * p).collect(),
            source_face: self.source_face.clone(),
        }
    }
}

/// `k` area-uniform surface samples: triangle chosen proportional to area,
/// then a uniform barycentric point (reflected when u + v > 1).
pub fn sample_surface_uniform(mesh: &Mesh, k: usize, seed: u64) -> Result<SurfaceCloud> {
    let weights = WeightedIndex::new(mesh.face_areas())
        .map_err(|_| Error::arg("all faces are degenerate, nothing to sample"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(k);
    let mut source_face = Vec::with_capacity(k);
    for _ in 0..k {
        let f = weights.sample(&mut rng);
        let [a, b, c] = mesh.triangle(f);
        let mut u: f64 = rng.gen();
        let mut v: f64 = rng.gen();
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        points.push(a + (b - a) * u + (c - a) * v);
        source_face.push(f as u32);
    }
    Ok(SurfaceCloud {
        points,
        source_face,
    })
}

/// Greedy farthest point sampling from a seeded random start point.
/// Returns indices into `cloud` in pick order.
pub fn farthest_point_sample(cloud: &SurfaceCloud, m: usize, seed: u64) -> Result<Vec<usize>> {
    if cloud.is_empty() {
        return Err(Error::arg("farthest point sampling on an empty cloud"));
    }
    let start = ChaCha8Rng::seed_from_u64(seed).gen_range(0..cloud.len());
    farthest_point_sample_from(&cloud.points, m, start)
}

/// Farthest point sampling starting at `start`; ties go to the lowest index.
pub fn farthest_point_sample_from(points: &[Vec3], m: usize, start: usize) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::arg("farthest point sampling on an empty cloud"));
    }
    if m > points.len() {
        return Err(Error::arg("requested more points than the cloud holds"));
    }
    if start >= points.len() {
        return Err(Error::arg("start index out of range"));
    }
    let mut picked = Vec::with_capacity(m);
    if m == 0 {
        return Ok(picked);
    }
    // squared distance to the selected set; -1 marks already selected
    let mut min_d2: Vec<f64> = alloc::vec![f64::INFINITY; points.len()];
    let mut current = start;
    for _ in 0..m {
        picked.push(current);
        min_d2[current] = -1.0;
        let p = points[current];
        let mut next = usize::MAX;
        let mut next_d = -1.0;
        for (i, d) in min_d2.iter_mut().enumerate() {
            if *d < 0.0 {
                continue;
            }
            let nd = (points[i] - p).norm_squared();
            if nd < *d {
                *d = nd;
            }
            if *d > next_d {
                next_d = *d;
                next = i;
            }
        }
        current = next;
    }
    Ok(picked)
}

/// Rz(γ)·Ry(β)·Rx(α) for the given angles.
pub fn euler_rotation(alpha: f64, beta: f64, gamma: f64) -> Mat3 {
    Mat3::rotation_z(gamma) * Mat3::rotation_y(beta) * Mat3::rotation_x(alpha)
}

/// Rotation from three independent angles uniform in [0, 2π), one per axis.
/// This is not Haar-uniform on SO(3).
pub fn random_rotation(seed: u64) -> Mat3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = rng.gen_range(0.0..TAU);
    let b = rng.gen_range(0.0..TAU);
    let c = rng.gen_range(0.0..TAU);
    euler_rotation(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::geodesic;
    use alloc::vec;

    #[test]
    fn single_view_is_on_equator() {
        let s = fibonacci_sphere(1).unwrap();
        assert_eq!(s.get(0), Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn zero_views_rejected() {
        assert!(fibonacci_sphere(0).is_err());
    }

    #[test]
    fn thousand_views_are_unit_spread_and_balanced() {
        let s = fibonacci_sphere(1000).unwrap();
        let mut mean = Vec3::ZERO;
        for v in s.viewpoints() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            mean += *v;
        }
        mean = mean / 1000.0;
        assert!(mean.x.abs() <= 0.01 && mean.y.abs() <= 0.01 && mean.z.abs() <= 0.01);
        let mut min_sep = f64::INFINITY;
        for i in 0..1000 {
            for j in i + 1..1000 {
                min_sep = min_sep.min(geodesic(s.get(i), s.get(j)));
            }
        }
        // brute force gives 0.8726 of the mean spacing, attained at the pole
        assert!(min_sep >= 0.87 * s.mean_spacing(), "min separation {min_sep}");
    }

    #[test]
    fn fibonacci_is_pure() {
        assert_eq!(fibonacci_sphere(257).unwrap(), fibonacci_sphere(257).unwrap());
    }

    #[test]
    fn samples_stay_inside_triangle() {
        let m = Mesh::from_triangles(vec![Vec3::ZERO, Vec3::X, Vec3::Y], vec![[0, 1, 2]]).unwrap();
        let c = sample_surface_uniform(&m, 10, 3).unwrap();
        assert_eq!(c.len(), 10);
        for p in &c.points {
            assert!(p.x >= 0.0 && p.y >= 0.0 && p.x + p.y <= 1.0 + 1e-12 && p.z == 0.0);
        }
        assert_eq!(c, sample_surface_uniform(&m, 10, 3).unwrap());
    }

    #[test]
    fn area_ratio_three_to_one() {
        // big triangle area 1.5, small 0.5
        let m = Mesh::from_triangles(
            vec![
                Vec3::ZERO,
                Vec3::new(3.0, 0.0, 0.0),
                Vec3::Y,
                Vec3::new(0.0, 0.0, 1.0),
                Vec3::new(1.0, 0.0, 1.0),
                Vec3::new(0.0, 1.0, 1.0),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
        )
        .unwrap();
        let c = sample_surface_uniform(&m, 40_000, 11).unwrap();
        let big = c.source_face.iter().filter(|&&f| f == 0).count() as f64;
        let ratio = big / (40_000.0 - big);
        assert!((2.8..=3.2).contains(&ratio), "ratio {ratio}");
    }

    fn collinear() -> Vec<Vec3> {
        [0.0, 1.0, 2.0, 10.0].iter().map(|&x| Vec3::new(x, 0.0, 0.0)).collect()
    }

    #[test]
    fn fps_collinear_trace() {
        assert_eq!(farthest_point_sample_from(&collinear(), 3, 0).unwrap(), vec![0, 3, 2]);
    }

    #[test]
    fn fps_square_corners_from_every_start() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.5, 0.5, 0.0),
        ];
        for start in 0..5 {
            let picked = farthest_point_sample_from(&pts, 4, start).unwrap();
            // every pick after the first is a corner
            assert!(picked[1..].iter().all(|&i| i < 4), "start {start}: {picked:?}");
            if start < 4 {
                let mut s = picked.clone();
                s.sort();
                assert_eq!(s, vec![0, 1, 2, 3]);
            }
        }
    }

    #[test]
    fn fps_full_size_is_permutation() {
        let cloud = SurfaceCloud {
            points: collinear(),
            source_face: vec![0; 4],
        };
        let mut p = farthest_point_sample(&cloud, 4, 9).unwrap();
        p.sort();
        assert_eq!(p, vec![0, 1, 2, 3]);
        let empty = SurfaceCloud {
            points: vec![],
            source_face: vec![],
        };
        assert!(farthest_point_sample(&empty, 0, 0).is_err());
    }

    #[test]
    fn rotation_special_cases() {
        assert_eq!(euler_rotation(0.0, 0.0, 0.0), Mat3::IDENTITY);
        let r = euler_rotation(PI, 0.0, 0.0);
        let expect = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
        for (row, want) in r.rows.iter().zip(&expect) {
            for (a, b) in row.iter().zip(want) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        for seed in 0..50 {
            let r = random_rotation(seed);
            let p = r.transpose() * r;
            for i in 0..3 {
                for j in 0..3 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((p.rows[i][j] - e).abs() < 1e-9);
                }
            }
            assert!((r.determinant() - 1.0).abs() < 1e-9);
        }
    }
}
