//! Network-free stand-in for training a view predictor.
//!
//! A single prediction v̂ on the unit sphere follows the gradient of the
//! cosine loss towards whatever label the active strategy selects at each
//! step. The label is treated as constant within a step, the gradient is
//! projected to the tangent plane and the result renormalized.
//!
//! Inconsistent single labels across near-identical models are modelled by
//! giving the single-label strategy several fixed labels at once: their
//! gradients are averaged, which is what one shared prediction receives when
//! two similar models are labelled with different best views.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{geodesic, Vec3};
use crate::labels::{build_label_set, gl_target, ml_loss, GaussianParams, DEFAULT_ALPHA};
use crate::measures::{normalize_map, Orientation, VQMap};
use crate::sampling::ViewSphere;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Sl,
    Ml,
    Gl,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Sl => "SL",
            Stage::Ml => "ML",
            Stage::Gl => "GL",
        }
    }
}

/// Which label generation a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    SingleLabel,
    MultipleLabels,
    GaussianLabels,
    /// Multiple labels until the switch step, Gaussian labels afterwards.
    TwoStage,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::SingleLabel,
        Strategy::MultipleLabels,
        Strategy::GaussianLabels,
        Strategy::TwoStage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::SingleLabel => "SL",
            Strategy::MultipleLabels => "ML",
            Strategy::GaussianLabels => "GL",
            Strategy::TwoStage => "ML+GL",
        }
    }

    pub fn stage_at(self, step: usize, switch_step: usize) -> Stage {
        match self {
            Strategy::SingleLabel => Stage::Sl,
            Strategy::MultipleLabels => Stage::Ml,
            Strategy::GaussianLabels => Stage::Gl,
            Strategy::TwoStage if step < switch_step => Stage::Ml,
            Strategy::TwoStage => Stage::Gl,
        }
    }
}

/// Fixed labels of the single-label strategy.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SingleLabels {
    /// The map's best view (lowest index among ties).
    #[default]
    Argbest,
    /// Explicit view indices; more than one means conflicting labels whose
    /// gradients are averaged.
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    pub total_steps: usize,
    pub switch_step: usize,
    pub learning_rate: f64,
    pub alpha: f64,
    pub gaussian: GaussianParams,
    /// Seeds the initial predictions drawn by [`compare_strategies`].
    pub seed: u64,
    pub strategy: Strategy,
    pub single_labels: SingleLabels,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            total_steps: 400,
            switch_step: 200,
            learning_rate: 0.05,
            alpha: DEFAULT_ALPHA,
            gaussian: GaussianParams::default(),
            seed: 0,
            strategy: Strategy::TwoStage,
            single_labels: SingleLabels::Argbest,
        }
    }
}

impl DescentConfig {
    fn validate(&self) -> Result<()> {
        if self.switch_step > self.total_steps {
            return Err(Error::arg("switch_step exceeds total_steps"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::arg("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionState {
    pub step: usize,
    pub v_hat: Vec3,
    pub stage: Stage,
    /// Loss of `v_hat` against the labels selected at this step.
    pub loss: f64,
    /// Selected view index (the first fixed label for conflicting SL).
    pub label: usize,
}

/// −(v − (v·v̂)v̂): gradient of 1 − v̂·v projected onto the tangent plane at v̂.
pub fn tangent_gradient(v_hat: Vec3, label: Vec3) -> Vec3 {
    -(label - v_hat * label.dot(v_hat))
}

/// Runs `config.total_steps` updates from `init`; the trajectory holds the
/// initial state and the state after every step.
pub fn descend(map: &VQMap, sphere: &ViewSphere, config: &DescentConfig, init: Vec3) -> Result<Vec<PredictionState>> {
    config.validate()?;
    if map.len() != sphere.len() {
        return Err(Error::arg("quality map and view sphere differ in size"));
    }
    let mut v_hat = init
        .try_normalize()
        .ok_or_else(|| Error::arg("initial prediction has zero norm"))?;
    let labels = build_label_set(map, sphere, config.alpha)?;
    let fixed: Vec<usize> = match &config.single_labels {
        SingleLabels::Argbest => alloc::vec![map.best_index],
        SingleLabels::Fixed(ix) if ix.is_empty() => return Err(Error::EmptyLabelSet),
        SingleLabels::Fixed(ix) => {
            if ix.iter().any(|&i| i >= sphere.len()) {
                return Err(Error::arg("fixed label index out of range"));
            }
            ix.clone()
        }
    };

    let mut trajectory = Vec::with_capacity(config.total_steps + 1);
    for step in 0..=config.total_steps {
        let stage = config.strategy.stage_at(step, config.switch_step);
        let (loss, label, target) = match stage {
            Stage::Sl => {
                let mut sum = Vec3::ZERO;
                let mut loss = 0.0;
                for &i in &fixed {
                    let v = sphere.get(i);
                    sum += v;
                    loss += 1.0 - v_hat.dot(v);
                }
                let k = fixed.len() as f64;
                (loss / k, fixed[0], sum / k)
            }
            Stage::Ml => {
                let (loss, i) = ml_loss(v_hat, &labels)?;
                (loss, i, sphere.get(i))
            }
            Stage::Gl => {
                let (i, _) = gl_target(v_hat, map, sphere, &config.gaussian)?;
                (1.0 - v_hat.dot(sphere.get(i)), i, sphere.get(i))
            }
        };
        trajectory.push(PredictionState {
            step,
            v_hat,
            stage,
            loss,
            label,
        });
        if step == config.total_steps {
            break;
        }
        let descent = -tangent_gradient(v_hat, target);
        v_hat = (v_hat + descent * config.learning_rate)
            .try_normalize()
            .unwrap_or(v_hat);
    }
    Ok(trajectory)
}

/// One quality cluster of a synthetic map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub center: Vec3,
    /// Angular width in radians.
    pub width: f64,
    /// Peak height in (0, 1].
    pub peak: f64,
}

/// VQ(v) = max over clusters of peak·exp(−(geodesic(v, center)/width)²),
/// normalized with max-is-best orientation.
pub fn synth_map(clusters: &[Cluster], sphere: &ViewSphere) -> Result<VQMap> {
    if clusters.is_empty() {
        return Err(Error::arg("synthetic map needs at least one cluster"));
    }
    let centers = clusters
        .iter()
        .map(|c| {
            if !(c.width > 0.0) || !(c.peak > 0.0 && c.peak <= 1.0) {
                return Err(Error::arg("cluster needs width > 0 and peak in (0, 1]"));
            }
            c.center
                .try_normalize()
                .ok_or_else(|| Error::arg("cluster center has zero norm"))
        })
        .collect::<Result<Vec<_>>>()?;
    let raw: Vec<f64> = sphere
        .viewpoints()
        .iter()
        .map(|&v| {
            clusters
                .iter()
                .zip(&centers)
                .map(|(c, &center)| {
                    let t = geodesic(v, center) / c.width;
                    c.peak * libm::exp(-t * t)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    normalize_map(&raw, Orientation::MaxIsBest)
}

/// Two equal clusters centered on sample views `separation` radians apart
/// (view 0 and the view closest to that separation from it). Returns the
/// map and both peak indices.
pub fn bimodal_map(sphere: &ViewSphere, separation: f64, width: f64) -> Result<(VQMap, usize, usize)> {
    if sphere.len() < 2 {
        return Err(Error::arg("bimodal map needs at least two views"));
    }
    let a = 0;
    let off = |i: usize| libm::fabs(geodesic(sphere.get(a), sphere.get(i)) - separation);
    let mut b = 1;
    for i in 2..sphere.len() {
        if off(i) < off(b) {
            b = i;
        }
    }
    let clusters = [sphere.get(a), sphere.get(b)].map(|center| Cluster {
        center,
        width,
        peak: 1.0,
    });
    Ok((synth_map(&clusters, sphere)?, a, b))
}

/// Uniformly distributed unit vectors, reproducible from `seed`.
pub fn random_directions(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi = rng.gen_range(0.0..TAU);
            let r = libm::sqrt((1.0 - z * z).max(0.0));
            let (s, c) = libm::sincos(phi);
            Vec3::new(r * c, r * s, z)
        })
        .collect()
}

/// Normalized quality of the sampled view nearest to `v_hat`.
pub fn nearest_quality(map: &VQMap, sphere: &ViewSphere, v_hat: Vec3) -> f64 {
    map.normalized[sphere.nearest(v_hat)]
}

/// Views at least as good as every other view within `radius` radians.
pub fn local_maxima(map: &VQMap, sphere: &ViewSphere, radius: f64) -> Vec<usize> {
    let cos_r = libm::cos(radius);
    let vs = sphere.viewpoints();
    (0..vs.len())
        .filter(|&i| {
            let q = map.normalized[i];
            q > 0.0
                && vs
                    .iter()
                    .zip(&map.normalized)
                    .all(|(v, &other)| v.dot(vs[i]) < cos_r || other <= q)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyResult {
    pub strategy: Strategy,
    pub final_qualities: Vec<f64>,
    pub mean_final_quality: f64,
    /// Mean first step after which the nearest sampled view never changes.
    pub mean_convergence_step: f64,
    /// Mean geodesic distance from the final prediction to the nearest
    /// local maximum of the map (radius: two mean view spacings).
    pub mean_peak_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrategyReport {
    pub n_inits: usize,
    pub results: Vec<StrategyResult>,
}

impl StrategyReport {
    pub fn get(&self, strategy: Strategy) -> Option<&StrategyResult> {
        self.results.iter().find(|r| r.strategy == strategy)
    }
}

/// Runs every strategy from the same `n_inits` seeded initial predictions.
pub fn compare_strategies(
    map: &VQMap,
    sphere: &ViewSphere,
    config: &DescentConfig,
    n_inits: usize,
) -> Result<StrategyReport> {
    if n_inits == 0 {
        return Ok(StrategyReport::default());
    }
    let inits = random_directions(n_inits, config.seed);
    let peaks = local_maxima(map, sphere, 2.0 * sphere.mean_spacing());
    let mut results = Vec::with_capacity(Strategy::ALL.len());
    for strategy in Strategy::ALL {
        let cfg = DescentConfig {
            strategy,
            ..config.clone()
        };
        let mut final_qualities = Vec::with_capacity(n_inits);
        let mut steps = 0.0;
        let mut peak_distance = 0.0;
        for &init in &inits {
            let traj = descend(map, sphere, &cfg, init)?;
            let last = traj.last().expect("trajectory has the initial state").v_hat;
            final_qualities.push(nearest_quality(map, sphere, last));
            steps += convergence_step(sphere, &traj) as f64;
            peak_distance += peaks
                .iter()
                .map(|&p| geodesic(sphere.get(p), last))
                .fold(f64::INFINITY, f64::min);
        }
        let n = n_inits as f64;
        results.push(StrategyResult {
            strategy,
            mean_final_quality: final_qualities.iter().sum::<f64>() / n,
            final_qualities,
            mean_convergence_step: steps / n,
            mean_peak_distance: peak_distance / n,
        });
    }
    Ok(StrategyReport { n_inits, results })
}

fn convergence_step(sphere: &ViewSphere, traj: &[PredictionState]) -> usize {
    let last = sphere.nearest(traj[traj.len() - 1].v_hat);
    traj.iter()
        .rposition(|s| sphere.nearest(s.v_hat) != last)
        .map_or(0, |k| k + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::fibonacci_sphere;

    fn single_peak(sphere: &ViewSphere, center: Vec3) -> VQMap {
        synth_map(
            &[Cluster {
                center,
                width: 0.3,
                peak: 1.0,
            }],
            sphere,
        )
        .unwrap()
    }

    #[test]
    fn single_label_converges_monotonically() {
        let sphere = ViewSphere::from_directions([Vec3::Z, Vec3::X]).unwrap();
        let map = normalize_map(&[1.0, 0.0], Orientation::MaxIsBest).unwrap();
        let cfg = DescentConfig {
            strategy: Strategy::SingleLabel,
            learning_rate: 0.1,
            total_steps: 200,
            switch_step: 0,
            ..Default::default()
        };
        let traj = descend(&map, &sphere, &cfg, Vec3::X).unwrap();
        assert_eq!(traj.len(), 201);
        for w in traj.windows(2) {
            assert!(w[1].loss <= w[0].loss);
        }
        assert!(geodesic(traj[200].v_hat, Vec3::Z) < 0.01);
        for s in &traj {
            assert!((s.v_hat.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn start_on_label_stays_put() {
        let sphere = fibonacci_sphere(300).unwrap();
        let map = single_peak(&sphere, sphere.get(17));
        let cfg = DescentConfig::default();
        let traj = descend(&map, &sphere, &cfg, sphere.get(map.best_index)).unwrap();
        assert!(traj.iter().all(|s| s.v_hat == traj[0].v_hat));
    }

    #[test]
    fn synth_map_examples() {
        let sphere = fibonacci_sphere(500).unwrap();
        let m = single_peak(&sphere, Vec3::Z);
        assert_eq!(m.best_index, sphere.nearest(Vec3::Z));
        let half = synth_map(
            &[Cluster {
                center: Vec3::Z,
                width: 0.3,
                peak: 0.5,
            }],
            &sphere,
        )
        .unwrap();
        assert_eq!(half.normalized[half.best_index], 1.0);
        assert!(synth_map(&[], &sphere).is_err());
        let bad = Cluster {
            center: Vec3::Z,
            width: 0.3,
            peak: 1.5,
        };
        assert!(synth_map(&[bad], &sphere).is_err());
    }

    #[test]
    fn two_equal_clusters_share_the_label_set() {
        let sphere = fibonacci_sphere(1000).unwrap();
        let (a, b) = (sphere.get(100), sphere.get(900));
        let map = synth_map(
            &[
                Cluster { center: a, width: 0.3, peak: 1.0 },
                Cluster { center: b, width: 0.3, peak: 1.0 },
            ],
            &sphere,
        )
        .unwrap();
        let labels = build_label_set(&map, &sphere, 0.99).unwrap();
        assert!(labels.contains(100) && labels.contains(900));
    }

    #[test]
    fn empty_comparison() {
        let sphere = fibonacci_sphere(50).unwrap();
        let map = single_peak(&sphere, Vec3::Z);
        let r = compare_strategies(&map, &sphere, &DescentConfig::default(), 0).unwrap();
        assert!(r.results.is_empty());
    }

    #[test]
    fn config_validation() {
        let sphere = fibonacci_sphere(50).unwrap();
        let map = single_peak(&sphere, Vec3::Z);
        let cfg = DescentConfig {
            switch_step: 500,
            ..Default::default()
        };
        assert!(descend(&map, &sphere, &cfg, Vec3::X).is_err());
        assert!(descend(&map, &sphere, &DescentConfig::default(), Vec3::ZERO).is_err());
    }

    #[test]
    fn random_directions_are_unit_and_seeded() {
        let a = random_directions(20, 5);
        assert_eq!(a, random_directions(20, 5));
        assert_ne!(a, random_directions(20, 6));
        assert!(a.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }
}
