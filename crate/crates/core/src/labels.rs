//! Dynamic label generation for best-view regression.
//!
//! Three ways to turn a normalized quality map into a training target for a
//! predicted view direction v̂:
//!
//! * single label: a fixed best view, scored with the cosine loss 1 − v̂·v;
//! * multiple labels: every view with VQ* ≥ α, scored against the closest one;
//! * Gaussian labels: the view maximizing VQ*(v)·(exp(−‖v − v̂‖/2σ²) + s),
//!   which prefers good views near the current prediction without
//!   discarding distant ones.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::measures::VQMap;
use crate::sampling::ViewSphere;

/// Default quality threshold for the multiple-label set.
pub const DEFAULT_ALPHA: f64 = 0.99;

fn unit(v: Vec3, what: &str) -> Result<Vec3> {
    v.try_normalize()
        .ok_or_else(|| Error::arg(alloc::format!("{what} has zero norm")))
}

/// 1 − v̂·v after normalizing both inputs.
pub fn cosine_loss(pred: Vec3, label: Vec3) -> Result<f64> {
    let p = unit(pred, "prediction")?;
    let l = unit(label, "label")?;
    Ok((1.0 - p.dot(l)).clamp(0.0, 2.0))
}

/// Views whose normalized quality reaches `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSet {
    pub alpha: f64,
    pub indices: Vec<usize>,
    pub vectors: Vec<Vec3>,
}

impl LabelSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, view: usize) -> bool {
        self.indices.binary_search(&view).is_ok()
    }
}

fn check_shape(map: &VQMap, sphere: &ViewSphere) -> Result<()> {
    if map.len() != sphere.len() {
        return Err(Error::arg("quality map and view sphere differ in size"));
    }
    Ok(())
}

/// { v : VQ*(v) ≥ α }, skipping views excluded from the map.
pub fn build_label_set(map: &VQMap, sphere: &ViewSphere, alpha: f64) -> Result<LabelSet> {
    check_shape(map, sphere)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::arg("alpha must lie in [0, 1]"));
    }
    let indices: Vec<usize> = map
        .normalized
        .iter()
        .zip(&map.raw)
        .enumerate()
        .filter(|(_, (&q, raw))| raw.is_some() && q >= alpha)
        .map(|(i, _)| i)
        .collect();
    let vectors = indices.iter().map(|&i| sphere.get(i)).collect();
    Ok(LabelSet {
        alpha,
        indices,
        vectors,
    })
}

/// min over the label set of 1 − v̂·v, with the view index that attains it.
pub fn ml_loss(pred: Vec3, labels: &LabelSet) -> Result<(f64, usize)> {
    let p = unit(pred, "prediction")?;
    let mut best: Option<(f64, usize)> = None;
    for (&i, &v) in labels.indices.iter().zip(&labels.vectors) {
        let loss = (1.0 - p.dot(v)).clamp(0.0, 2.0);
        if best.is_none_or(|(b, _)| loss < b) {
            best = Some((loss, i));
        }
    }
    best.ok_or(Error::EmptyLabelSet)
}

/// How the proximity term decays with the chord distance d = ‖v − v̂‖.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceKernel {
    /// exp(−d / 2σ²)
    #[default]
    Linear,
    /// exp(−d² / 2σ²), the textbook Gaussian
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianParams {
    pub sigma: f64,
    pub s: f64,
    pub kernel: DistanceKernel,
}

impl Default for GaussianParams {
    fn default() -> Self {
        GaussianParams {
            sigma: 2.0,
            s: 1.0,
            kernel: DistanceKernel::Linear,
        }
    }
}

impl GaussianParams {
    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !(self.s >= 0.0) {
            return Err(Error::arg("need sigma > 0 and s >= 0"));
        }
        Ok(())
    }

    /// exp(−d/2σ²) + s (or the squared variant).
    pub fn proximity(&self, distance: f64) -> f64 {
        let x = match self.kernel {
            DistanceKernel::Linear => distance,
            DistanceKernel::Squared => distance * distance,
        };
        libm::exp(-x / (2.0 * self.sigma * self.sigma)) + self.s
    }
}

/// p_g(v, v̂) = VQ*(v)·proximity(‖v − v̂‖) for every view.
pub fn gl_weights(pred: Vec3, map: &VQMap, sphere: &ViewSphere, params: &GaussianParams) -> Result<Vec<f64>> {
    check_shape(map, sphere)?;
    params.validate()?;
    let p = unit(pred, "prediction")?;
    Ok(sphere
        .viewpoints()
        .iter()
        .zip(&map.normalized)
        .map(|(&v, &q)| q * params.proximity(v.distance(p)))
        .collect())
}

/// argmax of p_g over the sphere (lowest index on ties) and all weights.
pub fn gl_target(
    pred: Vec3,
    map: &VQMap,
    sphere: &ViewSphere,
    params: &GaussianParams,
) -> Result<(usize, Vec<f64>)> {
    let weights = gl_weights(pred, map, sphere, params)?;
    let mut best = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > weights[best] {
            best = i;
        }
    }
    Ok((best, weights))
}

/// 1 − v̂·v⁺_g(v̂).
pub fn gl_loss(pred: Vec3, map: &VQMap, sphere: &ViewSphere, params: &GaussianParams) -> Result<f64> {
    let (target, _) = gl_target(pred, map, sphere, params)?;
    cosine_loss(pred, sphere.get(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{normalize_map, Orientation};
    use crate::sampling::fibonacci_sphere;
    use alloc::vec;

    #[test]
    fn cosine_loss_examples() {
        assert_eq!(cosine_loss(Vec3::X, Vec3::X).unwrap(), 0.0);
        assert_eq!(cosine_loss(Vec3::X, -Vec3::X).unwrap(), 2.0);
        assert_eq!(cosine_loss(Vec3::X, Vec3::Y).unwrap(), 1.0);
        assert_eq!(cosine_loss(Vec3::X * 3.0, Vec3::Y).unwrap(), 1.0);
        assert!(cosine_loss(Vec3::ZERO, Vec3::Y).is_err());
    }

    fn small_map() -> (VQMap, ViewSphere) {
        let sphere = ViewSphere::from_directions([Vec3::X, -Vec3::X, Vec3::Y, Vec3::Z]).unwrap();
        let map = normalize_map(&[4.0, 4.0, 0.0, 3.0], Orientation::MaxIsBest).unwrap();
        (map, sphere)
    }

    #[test]
    fn label_set_thresholds() {
        let (map, sphere) = small_map();
        assert_eq!(build_label_set(&map, &sphere, 0.0).unwrap().indices, vec![0, 1, 2, 3]);
        assert_eq!(build_label_set(&map, &sphere, 1.0).unwrap().indices, vec![0, 1]);
        assert_eq!(build_label_set(&map, &sphere, 0.75).unwrap().indices, vec![0, 1, 3]);
        assert!(build_label_set(&map, &sphere, 1.5).is_err());
    }

    #[test]
    fn ml_loss_picks_closest_label() {
        let (map, sphere) = small_map();
        let labels = build_label_set(&map, &sphere, 1.0).unwrap();
        assert_eq!(ml_loss(Vec3::X, &labels).unwrap(), (0.0, 0));
        assert_eq!(ml_loss(-Vec3::X, &labels).unwrap(), (0.0, 1));
        // equidistant: lowest index
        assert_eq!(ml_loss(Vec3::Y, &labels).unwrap(), (1.0, 0));
        let empty = LabelSet {
            alpha: 1.0,
            indices: vec![],
            vectors: vec![],
        };
        assert_eq!(ml_loss(Vec3::Y, &empty), Err(Error::EmptyLabelSet));
    }

    #[test]
    fn gl_uniform_map_picks_nearest_view() {
        let sphere = fibonacci_sphere(200).unwrap();
        let map = normalize_map(&[1.0; 200], Orientation::MaxIsBest).unwrap();
        let pred = Vec3::new(0.3, -0.5, 0.8).try_normalize().unwrap();
        let (t, _) = gl_target(pred, &map, &sphere, &GaussianParams::default()).unwrap();
        assert_eq!(t, sphere.nearest(pred));
        let loss = gl_loss(pred, &map, &sphere, &GaussianParams::default()).unwrap();
        assert_eq!(loss, cosine_loss(pred, sphere.get(t)).unwrap());
    }

    #[test]
    fn gl_single_peak_wins_from_anywhere() {
        let sphere = fibonacci_sphere(100).unwrap();
        let mut raw = vec![0.0; 100];
        raw[37] = 1.0;
        let map = normalize_map(&raw, Orientation::MaxIsBest).unwrap();
        for pred in [Vec3::X, -Vec3::X, Vec3::Z, -sphere.get(37)] {
            assert_eq!(gl_target(pred, &map, &sphere, &GaussianParams::default()).unwrap().0, 37);
        }
    }

    #[test]
    fn proximity_kernels() {
        let lin = GaussianParams::default();
        assert!((lin.proximity(2.0) - (libm::exp(-0.25) + 1.0)).abs() < 1e-15);
        let sq = GaussianParams {
            kernel: DistanceKernel::Squared,
            ..lin
        };
        assert!((sq.proximity(2.0) - (libm::exp(-0.5) + 1.0)).abs() < 1e-15);
        assert_eq!(lin.proximity(0.0), 2.0);
    }
}
