//! Curves and tables shipped with the crate.

use std::f64::consts::TAU;

use crate::curves::{ParametricKnot, PolygonalKnot};
use crate::geom::Vec3;
use crate::scalar::Scalar;

pub const FIG8_TRIG_JSON: &str = include_str!("../../../fixtures/fig8_trig.json");
pub const FIG8_TRAUTWEIN_JSON: &str = include_str!("../../../fixtures/fig8_trautwein.json");
pub const FIG8_POLY_JSON: &str = include_str!("../../../fixtures/fig8_poly.json");
pub const UNIT_CIRCLE_JSON: &str = include_str!("../../../fixtures/unit_circle.json");
pub const TORUS_2_3_JSON: &str = include_str!("../../../fixtures/torus_2_3.json");
pub const TORUS_2_5_JSON: &str = include_str!("../../../fixtures/torus_2_5.json");
pub const TORUS_3_4_JSON: &str = include_str!("../../../fixtures/torus_3_4.json");
pub const TORUS_3_5_JSON: &str = include_str!("../../../fixtures/torus_3_5.json");
pub const TABLE1_CSV: &str = include_str!("../../../fixtures/table1.csv");
pub const PD_CODES_TXT: &str = include_str!("../../../fixtures/pd_codes.txt");

fn parse<T: Scalar>(s: &str) -> ParametricKnot<T> {
    ParametricKnot::from_json_str(s).expect("shipped fixture parses")
}

/// Trigonometric figure-eight of harmonic degree 3.
pub fn fig8_trig<T: Scalar>() -> ParametricKnot<T> {
    parse(FIG8_TRIG_JSON)
}

pub fn fig8_trautwein<T: Scalar>() -> ParametricKnot<T> {
    parse(FIG8_TRAUTWEIN_JSON)
}

/// Polynomial figure-eight on `[0, 1)` whose z-axis is a quadrisecant.
pub fn fig8_poly<T: Scalar>() -> ParametricKnot<T> {
    parse(FIG8_POLY_JSON)
}

pub fn unit_circle<T: Scalar>() -> ParametricKnot<T> {
    parse(UNIT_CIRCLE_JSON)
}

pub fn torus<T: Scalar>(p: i64, q: i64) -> Option<ParametricKnot<T>> {
    match (p, q) {
        (2, 3) => Some(parse(TORUS_2_3_JSON)),
        (2, 5) => Some(parse(TORUS_2_5_JSON)),
        (3, 4) => Some(parse(TORUS_3_4_JSON)),
        (3, 5) => Some(parse(TORUS_3_5_JSON)),
        _ => None,
    }
}

fn sampled<T: Scalar>(n: usize, f: impl Fn(f64) -> [f64; 3]) -> PolygonalKnot<T> {
    let pts: Vec<Vec3<T>> = (0..n)
        .map(|i| {
            let [x, y, z] = f(TAU * i as f64 / n as f64);
            Vec3::from_f64(x, y, z)
        })
        .collect();
    PolygonalKnot::new(pts).expect("fixture polygon is simple")
}

/// 48-gon on `(sin t + 2 sin 2t, cos t - 2 cos 2t, -sin 3t)`.
pub fn trefoil_polygon<T: Scalar>() -> PolygonalKnot<T> {
    sampled(48, |t| [t.sin() + 2.0 * (2.0 * t).sin(), t.cos() - 2.0 * (2.0 * t).cos(), -(3.0 * t).sin()])
}

/// 96-gon on `((2 + cos 2t) cos 3t, (2 + cos 2t) sin 3t, sin 4t)`.
pub fn figure_eight_polygon<T: Scalar>() -> PolygonalKnot<T> {
    sampled(96, |t| {
        let r = 2.0 + (2.0 * t).cos();
        [r * (3.0 * t).cos(), r * (3.0 * t).sin(), (4.0 * t).sin()]
    })
}

/// Axis-parallel square in the xy-plane with vertices `(0,0,0)..(1,1,0)`.
pub fn square<T: Scalar>() -> PolygonalKnot<T> {
    PolygonalKnot::from_f64(&[[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.]]).expect("square")
}

/// Regular `n`-gon of circumradius 1 in the xy-plane.
pub fn regular_polygon<T: Scalar>(n: usize) -> PolygonalKnot<T> {
    sampled(n, |t| [t.cos(), t.sin(), 0.0])
}
