//! Viewpoint entropy (VE), visibility ratio (VR), viewpoint KL divergence
//! (VKL) and viewpoint mutual information (VMI), plus per-model
//! normalization.
//!
//! All measures work on per-polygon projected areas a_z(v) (pixel counts)
//! against true polygon areas A_z. Logarithms are natural and 0·log 0 = 0.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::Mesh;
use crate::raster::{make_camera, CameraConfig, FaceStats, Rasterizer};
use crate::sampling::ViewSphere;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Ve,
    Vr,
    Vkl,
    Vmi,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Ve, Measure::Vr, Measure::Vkl, Measure::Vmi];

    pub fn orientation(self) -> Orientation {
        match self {
            Measure::Ve | Measure::Vr => Orientation::MaxIsBest,
            Measure::Vkl | Measure::Vmi => Orientation::MinIsBest,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Ve => "VE",
            Measure::Vr => "VR",
            Measure::Vkl => "VKL",
            Measure::Vmi => "VMI",
        }
    }

    pub fn from_name(name: &str) -> Option<Measure> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    MaxIsBest,
    MinIsBest,
}

impl Orientation {
    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Orientation::MaxIsBest => a > b,
            Orientation::MinIsBest => a < b,
        }
    }
}

/// Projected pixel area of every polygon in one view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolygonView {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl PolygonView {
    pub fn from_stats(stats: &FaceStats, mesh: &Mesh) -> PolygonView {
        PolygonView {
            counts: stats.polygon_counts(mesh),
            total: stats.total_pixels,
        }
    }

    /// Builds a view directly from per-polygon pixel counts.
    pub fn from_counts(counts: Vec<u64>) -> PolygonView {
        let total = counts.iter().sum();
        PolygonView { counts, total }
    }

    fn require_pixels(&self) -> Result<f64> {
        if self.total == 0 {
            Err(Error::EmptyView)
        } else {
            Ok(self.total as f64)
        }
    }

    /// p(z|v) for every polygon.
    pub fn conditional(&self) -> Result<Vec<f64>> {
        let total = self.require_pixels()?;
        Ok(self.counts.iter().map(|&c| c as f64 / total).collect())
    }
}

/// VE = −Σ (a_z/a_t) ln(a_z/a_t).
pub fn viewpoint_entropy(view: &PolygonView) -> Result<f64> {
    let total = view.require_pixels()?;
    Ok(-view
        .counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * libm::log(p)
        })
        .sum::<f64>())
}

/// VR = Σ vis_z A_z / A_t.
pub fn visibility_ratio(view: &PolygonView, mesh: &Mesh) -> f64 {
    view.counts
        .iter()
        .zip(mesh.polygon_areas())
        .filter(|(&c, _)| c > 0)
        .map(|(_, &a)| a)
        .sum::<f64>()
        / mesh.total_area()
}

/// VKL = Σ (a_z/a_t) ln((a_z/a_t) / (A_z/A_t)).
pub fn viewpoint_kl(view: &PolygonView, mesh: &Mesh) -> Result<f64> {
    let total = view.require_pixels()?;
    let area_total = mesh.total_area();
    let mut sum = 0.0;
    for (z, (&c, &area)) in view.counts.iter().zip(mesh.polygon_areas()).enumerate() {
        if c == 0 {
            continue;
        }
        if !(area > 0.0) {
            return Err(Error::MeasureUndefined { polygon: z });
        }
        let p = c as f64 / total;
        sum += p * libm::log(p * area_total / area);
    }
    Ok(sum)
}

/// p(z): mean of p(z|v) over the views that render any pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct FacePrior {
    pub p: Vec<f64>,
}

pub fn face_prior<'a>(views: impl IntoIterator<Item = &'a PolygonView>) -> Result<FacePrior> {
    let mut p: Vec<f64> = Vec::new();
    let mut used = 0usize;
    for view in views {
        if view.total == 0 {
            continue;
        }
        if p.is_empty() {
            p = vec![0.0; view.counts.len()];
        } else if p.len() != view.counts.len() {
            return Err(Error::arg("views disagree on polygon count"));
        }
        let total = view.total as f64;
        for (acc, &c) in p.iter_mut().zip(&view.counts) {
            *acc += c as f64 / total;
        }
        used += 1;
    }
    if used == 0 {
        return Err(Error::EmptyView);
    }
    let inv = 1.0 / used as f64;
    p.iter_mut().for_each(|x| *x *= inv);
    Ok(FacePrior { p })
}

/// VMI = Σ p(z|v) ln(p(z|v) / p(z)).
pub fn viewpoint_mi(view: &PolygonView, prior: &FacePrior) -> Result<f64> {
    let total = view.require_pixels()?;
    if prior.p.len() != view.counts.len() {
        return Err(Error::arg("prior and view disagree on polygon count"));
    }
    let mut sum = 0.0;
    for (z, (&c, &pz)) in view.counts.iter().zip(&prior.p).enumerate() {
        if c == 0 {
            continue;
        }
        if !(pz > 0.0) {
            return Err(Error::InconsistentPrior { polygon: z });
        }
        let p = c as f64 / total;
        sum += p * libm::log(p / pz);
    }
    Ok(sum)
}

/// Raw and normalized quality of one measure over a view sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct VQMap {
    pub measure: Option<Measure>,
    pub orientation: Orientation,
    /// VQ(v); `None` for views excluded from normalization.
    pub raw: Vec<Option<f64>>,
    /// VQ*(v) in [0, 1]; excluded views hold 0.
    pub normalized: Vec<f64>,
    pub best_index: usize,
    pub worst_index: usize,
}

impl VQMap {
    pub fn len(&self) -> usize {
        self.normalized.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalized.is_empty()
    }

    pub fn excluded(&self) -> impl Iterator<Item = usize> + '_ {
        self.raw
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_none())
            .map(|(i, _)| i)
    }
}

/// VQ*(v) = (VQ(v) − VQ(v⁻)) / (VQ(v⁺) − VQ(v⁻)); constant input maps to 1.
pub fn normalize_map(raw: &[f64], orientation: Orientation) -> Result<VQMap> {
    let raw: Vec<Option<f64>> = raw.iter().map(|&r| Some(r)).collect();
    normalize_partial(&raw, orientation, None)
}

/// Normalizes the `Some` entries and leaves `None` views out of v⁺/v⁻.
/// Ties resolve to the lowest index.
pub fn normalize_partial(
    raw: &[Option<f64>],
    orientation: Orientation,
    measure: Option<Measure>,
) -> Result<VQMap> {
    let mut best: Option<(usize, f64)> = None;
    let mut worst: Option<(usize, f64)> = None;
    for (i, r) in raw.iter().enumerate() {
        let Some(r) = *r else { continue };
        if !r.is_finite() {
            return Err(Error::arg(alloc::format!("non-finite quality at view {i}")));
        }
        if best.is_none_or(|(_, b)| orientation.better(r, b)) {
            best = Some((i, r));
        }
        if worst.is_none_or(|(_, w)| orientation.better(w, r)) {
            worst = Some((i, r));
        }
    }
    let ((best_index, hi), (worst_index, lo)) = match (best, worst) {
        (Some(b), Some(w)) => (b, w),
        _ => return Err(Error::EmptyView),
    };
    let span = hi - lo;
    let normalized = raw
        .iter()
        .map(|r| match *r {
            None => 0.0,
            Some(_) if span == 0.0 => 1.0,
            Some(r) => ((r - lo) / span).clamp(0.0, 1.0),
        })
        .collect();
    Ok(VQMap {
        measure,
        orientation,
        raw: raw.to_vec(),
        normalized,
        best_index,
        worst_index,
    })
}

/// Rasterizes one direction and aggregates pixel counts per polygon.
pub fn view_distribution(
    rasterizer: &mut Rasterizer,
    mesh: &Mesh,
    dir: Vec3,
    camera: &CameraConfig,
) -> Result<PolygonView> {
    let cam = make_camera(mesh, dir, camera)?;
    let stats = rasterizer.rasterize(mesh, &cam)?;
    Ok(PolygonView::from_stats(&stats, mesh))
}

/// All four maps of one model plus what was needed to build them.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvaluation {
    /// Maps in [`Measure::ALL`] order.
    pub maps: Vec<VQMap>,
    pub prior: FacePrior,
    /// Views excluded from a measure, with the reason.
    pub excluded: Vec<(usize, Measure, Error)>,
}

impl ModelEvaluation {
    pub fn map(&self, measure: Measure) -> &VQMap {
        &self.maps[measure as usize]
    }
}

/// Builds the four normalized maps from already rendered views, which must
/// be in sphere order. The prior for VMI is averaged over the same views.
pub fn assemble_maps(mesh: &Mesh, views: &[Result<PolygonView>]) -> Result<ModelEvaluation> {
    let prior = face_prior(views.iter().filter_map(|v| v.as_ref().ok()))?;
    let mut excluded = Vec::new();
    let mut raws: [Vec<Option<f64>>; 4] = Default::default();
    for (i, view) in views.iter().enumerate() {
        let view = match view {
            Ok(v) if v.total > 0 => v,
            other => {
                let err = match other {
                    Err(e) => e.clone(),
                    Ok(_) => Error::EmptyView,
                };
                for (m, raw) in Measure::ALL.iter().zip(raws.iter_mut()) {
                    excluded.push((i, *m, err.clone()));
                    raw.push(None);
                }
                continue;
            }
        };
        let values = [
            viewpoint_entropy(view),
            Ok(visibility_ratio(view, mesh)),
            viewpoint_kl(view, mesh),
            viewpoint_mi(view, &prior),
        ];
        for ((m, raw), value) in Measure::ALL.iter().zip(raws.iter_mut()).zip(values) {
            match value {
                Ok(x) => raw.push(Some(x)),
                Err(e) => {
                    excluded.push((i, *m, e));
                    raw.push(None);
                }
            }
        }
    }
    let maps = Measure::ALL
        .iter()
        .zip(raws.iter())
        .map(|(&m, raw)| normalize_partial(raw, m.orientation(), Some(m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelEvaluation {
        maps,
        prior,
        excluded,
    })
}

/// Renders every view once (sequentially) and evaluates all four measures.
pub fn evaluate_model(mesh: &Mesh, sphere: &ViewSphere, camera: &CameraConfig) -> Result<ModelEvaluation> {
    let mut rasterizer = Rasterizer::new(camera.width, camera.height)?;
    let views: Vec<Result<PolygonView>> = sphere
        .viewpoints()
        .iter()
        .map(|&dir| view_distribution(&mut rasterizer, mesh, dir, camera))
        .collect();
    assemble_maps(mesh, &views)
}
