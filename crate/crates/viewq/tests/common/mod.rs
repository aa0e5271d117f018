use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viewq::dataset::ModelRecord;
use viewq_core::measures::{normalize_partial, Measure, ModelEvaluation};
use viewq_core::raster::CameraConfig;
use viewq_core::FacePrior;

/// A valid record with random raw values over many magnitudes and about 5%
/// of the views excluded.
pub fn random_record(seed: u64, n: usize) -> ModelRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps = Measure::ALL
        .iter()
        .map(|&m| {
            let raw: Vec<Option<f64>> = (0..n)
                .map(|_| {
                    (rng.gen::<f64>() > 0.05).then(|| {
                        let mant: f64 = rng.gen_range(-1.0..1.0);
                        mant * 10f64.powi(rng.gen_range(-30..30))
                    })
                })
                .collect();
            normalize_partial(&raw, m.orientation(), Some(m)).unwrap()
        })
        .collect();
    let eval = ModelEvaluation {
        maps,
        prior: FacePrior { p: vec![] },
        excluded: vec![],
    };
    let res = rng.gen_range(16..2048);
    ModelRecord::from_evaluation(&format!("model-{seed}"), n, &CameraConfig::square(res), &eval)
}
