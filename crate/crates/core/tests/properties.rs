use proptest::prelude::*;
use viewq_core::geom::Vec3;
use viewq_core::labels::{build_label_set, gl_target, gl_weights, ml_loss, DistanceKernel, GaussianParams};
use viewq_core::measures::{normalize_map, Orientation};
use viewq_core::sampling::{
    euler_rotation, farthest_point_sample, farthest_point_sample_from, fibonacci_sphere, sample_surface_uniform,
};
use viewq_core::shapes::{airplane, chair};
use viewq_core::Mesh;

fn unit_vec() -> impl Strategy<Value = Vec3> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter_map("near zero", |(x, y, z)| Vec3::new(x, y, z).try_normalize())
}

fn orientation() -> impl Strategy<Value = Orientation> {
    prop_oneof![Just(Orientation::MaxIsBest), Just(Orientation::MinIsBest)]
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn normalized_maps_span_zero_to_one(raw in prop::collection::vec(-1e3f64..1e3, 2..300), o in orientation()) {
        let map = normalize_map(&raw, o).unwrap();
        let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if lo == hi {
            prop_assert!(map.normalized.iter().all(|&q| q == 1.0));
        } else {
            prop_assert!(map.normalized.contains(&0.0));
            prop_assert!(map.normalized.contains(&1.0));
            prop_assert!(map.normalized.iter().all(|q| (0.0..=1.0).contains(q)));
            prop_assert_eq!(map.normalized[map.best_index], 1.0);
            prop_assert_eq!(map.normalized[map.worst_index], 0.0);
            // order agrees with the raw values under the orientation
            let best = if o == Orientation::MaxIsBest { hi } else { lo };
            let first = raw.iter().position(|&r| r == best).unwrap();
            prop_assert_eq!(map.best_index, first);
        }
    }

    #[test]
    fn constant_maps_are_all_one(c in -1e6f64..1e6, n in 1usize..100, o in orientation()) {
        let map = normalize_map(&vec![c; n], o).unwrap();
        prop_assert!(map.normalized.iter().all(|&q| q == 1.0));
        prop_assert_eq!(map.best_index, 0);
    }

    #[test]
    fn label_sets_nest_and_ml_is_exhaustive_min(raw in prop::collection::vec(0.0f64..1.0, 200), pred in unit_vec()) {
        let sphere = fibonacci_sphere(200).unwrap();
        let map = normalize_map(&raw, Orientation::MaxIsBest).unwrap();
        // the loss normalizes its input; score the same unit vector
        let p = pred.try_normalize().unwrap();
        let mut previous: Option<Vec<usize>> = None;
        for alpha in [0.9, 0.95, 0.99, 1.0] {
            let set = build_label_set(&map, &sphere, alpha).unwrap();
            prop_assert!(set.contains(map.best_index));
            if let Some(prev) = &previous {
                prop_assert!(set.indices.iter().all(|i| prev.contains(i)));
            }
            let oracle = set
                .indices
                .iter()
                .map(|&i| (1.0 - p.dot(sphere.get(i))).clamp(0.0, 2.0))
                .fold(f64::INFINITY, f64::min);
            let (loss, at) = ml_loss(pred, &set).unwrap();
            prop_assert_eq!(loss, oracle);
            prop_assert!(set.contains(at));
            previous = Some(set.indices);
        }
    }

    #[test]
    fn gl_target_is_exhaustive_argmax(
        raw in prop::collection::vec(0.0f64..1.0, 150),
        pred in unit_vec(),
        sigma in 0.1f64..4.0,
        s in 0.0f64..2.0,
        squared in any::<bool>(),
    ) {
        let sphere = fibonacci_sphere(150).unwrap();
        let map = normalize_map(&raw, Orientation::MaxIsBest).unwrap();
        let kernel = if squared { DistanceKernel::Squared } else { DistanceKernel::Linear };
        let params = GaussianParams { sigma, s, kernel };
        let (t, weights) = gl_target(pred, &map, &sphere, &params).unwrap();
        let mut best = 0;
        for (i, &v) in sphere.viewpoints().iter().enumerate() {
            let d = ((v.x - pred.x).powi(2) + (v.y - pred.y).powi(2) + (v.z - pred.z).powi(2)).sqrt();
            let x = if squared { d * d } else { d };
            let w = map.normalized[i] * ((-x / (2.0 * sigma * sigma)).exp() + s);
            prop_assert!(rel_eq(weights[i], w, 1e-12) || (w == 0.0 && weights[i] == 0.0));
            if weights[i] > weights[best] {
                best = i;
            }
        }
        prop_assert_eq!(t, best);
        prop_assert_eq!(weights, gl_weights(pred, &map, &sphere, &params).unwrap());
    }

    #[test]
    fn rotation_preserves_areas(a in 0.0f64..6.3, b in 0.0f64..6.3, c in 0.0f64..6.3) {
        let mesh = chair();
        let rotated = mesh.rotated(&euler_rotation(a, b, c));
        for (x, y) in mesh.face_areas().iter().zip(rotated.face_areas()) {
            prop_assert!(rel_eq(*y, *x, 1e-9));
        }
        prop_assert!(rel_eq(rotated.total_area(), mesh.total_area(), 1e-9));
    }

    #[test]
    fn fan_split_preserves_planar_polygon_area(
        n in 3usize..12,
        mut angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 12),
        (ex, ey) in (0.2f64..3.0, 0.2f64..3.0),
        a in 0.0f64..6.3, b in 0.0f64..6.3,
    ) {
        // convex polygon inscribed in an ellipse, rotated out of the xy-plane
        angles.truncate(n);
        angles.sort_by(f64::total_cmp);
        angles.dedup();
        prop_assume!(angles.len() >= 3);
        let n = angles.len();
        let r = euler_rotation(a, b, 0.0);
        let pts: Vec<(f64, f64)> = angles.iter().map(|t| (ex * t.cos(), ey * t.sin())).collect();
        let shoelace = 0.5 * (0..n)
            .map(|i| {
                let (p, q) = (pts[i], pts[(i + 1) % n]);
                p.0 * q.1 - q.0 * p.1
            })
            .sum::<f64>();
        let vertices = pts.iter().map(|&(x, y)| r * Vec3::new(x, y, 0.0)).collect();
        let loop_: Vec<u32> = (0..n as u32).collect();
        let mesh = Mesh::from_polygons(vertices, &[loop_]).unwrap();
        prop_assert_eq!(mesh.faces().len(), n - 2);
        prop_assume!(mesh.degenerate_faces().is_empty());
        prop_assert!(rel_eq(mesh.total_area(), shoelace, 1e-9));
    }

    #[test]
    fn fps_replays_from_its_first_pick(seed in any::<u64>(), m in 1usize..40) {
        let cloud = sample_surface_uniform(&airplane(1), 400, seed).unwrap();
        let picks = farthest_point_sample(&cloud, m, seed ^ 0x5555).unwrap();
        prop_assert_eq!(picks.len(), m);
        let replay = farthest_point_sample_from(&cloud.points, m, picks[0]).unwrap();
        prop_assert_eq!(&replay, &picks);
        // every pick maximizes the distance to the picks before it
        for k in 1..m {
            let d = |i: usize| picks[..k].iter().map(|&p| cloud.points[i].distance(cloud.points[p])).fold(f64::INFINITY, f64::min);
            let chosen = d(picks[k]);
            prop_assert!((0..cloud.len()).all(|i| d(i) <= chosen));
        }
    }
}
