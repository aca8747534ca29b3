use knotforge::curves::{sample_polygon, PolygonalKnot, SampleMode};
use knotforge::diagram::extract;
use knotforge::directional::{bridge_count_polygonal, random_directions, total_curvature, Direction};
use knotforge::fixtures;
use knotforge::geom::Vec3;
use knotforge::invariants::alexander_polynomial;
use knotforge::secants::{quadrisecants, transversals_of_four_lines, PluckerLine};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type V = Vec3<f64>;

fn rotation(axis: V, angle: f64) -> impl Fn(V) -> V {
    let k = axis.normalized().unwrap();
    let (s, c) = angle.sin_cos();
    move |v: V| v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c))
}

#[test]
fn rigid_motion_preserves_counts() {
    let rot = rotation(V::from_f64(1.0, 2.0, -0.5), 0.9);
    let shift = V::from_f64(3.0, -1.0, 7.5);
    let k = fixtures::trefoil_polygon::<f64>();
    let moved = k.map(|p| rot(p) + shift);
    for v in random_directions::<f64>(200, 5) {
        let w = Direction::new(rot(v.vector())).unwrap();
        let (Ok(a), Ok(b)) = (bridge_count_polygonal(&k, &v), bridge_count_polygonal(&moved, &w)) else { continue };
        assert_eq!(a.value, b.value);
    }
    let (ka, kb) = (total_curvature(&k).unwrap(), total_curvature(&moved).unwrap());
    assert!((ka - kb).abs() < 1e-9);
    assert_eq!(quadrisecants(&k).secants.len(), quadrisecants(&moved).secants.len());
}

#[test]
fn transversals_recover_planted_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pt = || V::from_f64(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    for _ in 0..50 {
        let l1 = PluckerLine::through(pt(), pt()).unwrap();
        let l2 = PluckerLine::through(pt(), pt()).unwrap();
        let four: Vec<PluckerLine<f64>> = (0..4)
            .map(|_| {
                let (s, t) = (pt().x, pt().y);
                PluckerLine::through(l1.point_at(s), l2.point_at(t)).unwrap()
            })
            .collect();
        let got = transversals_of_four_lines([&four[0], &four[1], &four[2], &four[3]]).unwrap();
        for want in [&l1, &l2] {
            assert!(
                got.lines.iter().any(|g| g.angle_to(want) < 1e-6 && g.moment_distance(want) < 1e-6),
                "planted line missing"
            );
        }
    }
}

#[test]
fn convex_polygons_have_no_quadrisecant() {
    for n in [5, 12, 31] {
        assert!(quadrisecants(&fixtures::regular_polygon::<f64>(n)).secants.is_empty());
    }
}

#[test]
fn torus_knot_polygons_have_quadrisecants() {
    let k = sample_polygon(&fixtures::torus::<f64>(2, 5).unwrap(), 60, SampleMode::Uniform).unwrap();
    assert!(!quadrisecants(&k).secants.is_empty());
}

fn random_polygon(seed: u64, n: usize) -> PolygonalKnot<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 3]> =
        (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    PolygonalKnot::from_f64(&pts).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn alexander_polynomial_ignores_the_viewpoint(seed in 0u64..10_000) {
        let k = random_polygon(seed, 10);
        let mut seen = None;
        for (i, v) in random_directions::<f64>(6, seed).iter().enumerate() {
            let Ok((pd, _)) = extract(&k, v, i as u64) else { continue };
            let a = alexander_polynomial::<i64>(&pd.diagram).unwrap();
            match &seen {
                None => seen = Some(a),
                Some(b) => prop_assert_eq!(&a, b),
            }
        }
    }

    #[test]
    fn reduction_keeps_the_polynomial(seed in 0u64..10_000) {
        let k = random_polygon(seed, 12);
        let v = random_directions::<f64>(1, seed ^ 77).remove(0);
        if let Ok((pd, _)) = extract(&k, &v, seed) {
            let d = pd.diagram;
            let a = alexander_polynomial::<i64>(&d).unwrap();
            let r = d.reduce_crescents();
            prop_assert!(r.find_crescents().iter().all(|c| c.alternating));
            prop_assert_eq!(alexander_polynomial::<i64>(&r).unwrap(), a.clone());
            for e in d.simplify().r3_moves() {
                prop_assert_eq!(alexander_polynomial::<i64>(&e).unwrap(), a.clone());
            }
        }
    }
}
