//! Census of candidate diagrams around a quadruple point, and the bound
//! rules for superbridge ranges of tabulated knots.
//!
//! A template combines one of two base shapes (four loops leaving the
//! quadruple point, with one or two twist boxes) with one of eighteen chord
//! patterns that connect the eight loop ends inside a small disk around the
//! point. Templates are realized as planar polygons with depths, so the
//! diagram code comes from the same crossing extraction used for space
//! curves.
//!
//! Slots `0..8` are the loop ends in counterclockwise order around the
//! quadruple point. A pattern is four chords between slots; an
//! [`Orientation`] rotates or reflects it before it is glued to the shape.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::PolygonalKnot;
use crate::diagram::{self, KnotDiagram, ProjectedDiagram};
use crate::directional::Direction;
use crate::geom::{Vec2, Vec3};
use crate::invariants::{self, KnotTable, KnotTableEntry, LaurentPoly, Marker};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkbenchError {
    #[error("InvalidTemplate: {0}")]
    InvalidTemplate(String),
    #[error("NotAKnot: template traces {components} components")]
    NotAKnot { components: usize },
    #[error("BudgetExceeded: {crossings} crossings after reduction, limit {limit}")]
    BudgetExceeded { crossings: usize, limit: usize },
    #[error("InconsistentRules: {name} gets lo {lo} > hi {hi}")]
    InconsistentRules { name: String, lo: i64, hi: i64 },
    #[error("Geometry: {0}")]
    Geometry(String),
    #[error("Invariant: {0}")]
    Invariant(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingBudget {
    pub per_pair_max: u32,
    pub shape_a_max: u32,
    pub shape_b_max: u32,
    pub pattern_max: u32,
    pub reduced_total_max: u32,
}

impl Default for CrossingBudget {
    fn default() -> Self {
        CrossingBudget { per_pair_max: 3, shape_a_max: 3, shape_b_max: 6, pattern_max: 6, reduced_total_max: 10 }
    }
}

impl CrossingBudget {
    fn shape_max(&self, shape: Shape) -> u32 {
        match shape {
            Shape::A => self.shape_a_max,
            Shape::B => self.shape_b_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Shape {
    A,
    B,
}

impl Shape {
    pub fn boxes(self) -> usize {
        match self {
            Shape::A => 1,
            Shape::B => 2,
        }
    }
}

/// Chords of the eighteen patterns, slots numbered counterclockwise from
/// the positive x-axis.
pub const PATTERNS: [[(u8, u8); 4]; 18] = [
    [(0, 1), (2, 3), (4, 5), (6, 7)],
    [(0, 1), (2, 3), (4, 7), (5, 6)],
    [(0, 1), (2, 3), (4, 6), (5, 7)],
    [(0, 1), (2, 6), (3, 4), (5, 7)],
    [(0, 1), (2, 7), (3, 6), (4, 5)],
    [(0, 1), (2, 6), (3, 7), (4, 5)],
    [(0, 1), (2, 4), (3, 6), (5, 7)],
    [(0, 1), (2, 6), (3, 5), (4, 7)],
    [(0, 1), (2, 5), (3, 7), (4, 6)],
    [(0, 1), (2, 5), (3, 6), (4, 7)],
    [(0, 1), (2, 7), (3, 5), (4, 6)],
    [(0, 2), (1, 3), (4, 6), (5, 7)],
    [(0, 2), (1, 4), (3, 6), (5, 7)],
    [(0, 2), (1, 5), (3, 7), (4, 6)],
    [(0, 2), (1, 5), (3, 6), (4, 7)],
    [(0, 3), (1, 6), (2, 5), (4, 7)],
    [(0, 3), (1, 5), (2, 6), (4, 7)],
    [(0, 4), (1, 5), (2, 6), (3, 7)],
];

fn interleaved(a: (u8, u8), b: (u8, u8)) -> bool {
    let (lo, hi) = (a.0.min(a.1), a.0.max(a.1));
    let inside = |x: u8| lo < x && x < hi;
    inside(b.0) != inside(b.1)
}

/// Pairs of chord indices that cross inside the disk.
pub fn pattern_crossing_pairs(pattern: u8) -> Vec<(usize, usize)> {
    let chords = PATTERNS[pattern as usize - 1];
    let mut out = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if interleaved(chords[i], chords[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Rotation (in slot steps) and optional reflection applied to a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Orientation {
    pub rotation: u8,
    pub reflect: bool,
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation { rotation: 0, reflect: false };

    pub fn apply(self, slot: u8) -> u8 {
        let s = if self.reflect { (8 - slot) % 8 } else { slot };
        (s + self.rotation) % 8
    }
}

fn chord_set(chords: &[(u8, u8); 4]) -> [(u8, u8); 4] {
    let mut c = chords.map(|(a, b)| (a.min(b), a.max(b)));
    c.sort_unstable();
    c
}

/// Orientations giving distinct chord sets, in (rotation, reflect) order.
pub fn distinct_orientations(pattern: u8) -> Vec<Orientation> {
    let chords = PATTERNS[pattern as usize - 1];
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rotation in 0..8 {
        for reflect in [false, true] {
            let o = Orientation { rotation, reflect };
            if seen.insert(chord_set(&chords.map(|(a, b)| (o.apply(a), o.apply(b))))) {
                out.push(o);
            }
        }
    }
    out
}

fn permutations4() -> Vec<[u8; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4u8 {
        for b in 0..4u8 {
            for c in 0..4u8 {
                for d in 0..4u8 {
                    let p = [a, b, c, d];
                    if (0..4).all(|k| p.contains(&k)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// One representative height order per distinct over/under assignment of
/// the pattern's crossings. `h[k]` is the level of chord `k`, 3 on top.
pub fn admissible_height_orders(pattern: u8) -> Vec<[u8; 4]> {
    let pairs = pattern_crossing_pairs(pattern);
    let mut seen = HashSet::new();
    permutations4()
        .into_iter()
        .filter(|h| seen.insert(pairs.iter().map(|&(i, j)| h[i] > h[j]).collect::<Vec<_>>()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TemplateSpec {
    pub shape: Shape,
    pub twist_counts: Vec<u32>,
    pub pattern: u8,
    pub orientation: Orientation,
    pub height_order: [u8; 4],
}

impl TemplateSpec {
    pub fn new(
        shape: Shape,
        twist_counts: Vec<u32>,
        pattern: u8,
        orientation: Orientation,
        height_order: [u8; 4],
    ) -> Result<Self, WorkbenchError> {
        Self::with_budget(shape, twist_counts, pattern, orientation, height_order, &CrossingBudget::default())
    }

    pub fn with_budget(
        shape: Shape,
        twist_counts: Vec<u32>,
        pattern: u8,
        orientation: Orientation,
        height_order: [u8; 4],
        budget: &CrossingBudget,
    ) -> Result<Self, WorkbenchError> {
        let bad = |s: String| Err(WorkbenchError::InvalidTemplate(s));
        if twist_counts.len() != shape.boxes() {
            return bad(format!("shape {shape:?} takes {} twist counts", shape.boxes()));
        }
        if let Some(t) = twist_counts.iter().find(|&&t| t > budget.per_pair_max) {
            return bad(format!("{t} half-twists exceed the per-pair limit {}", budget.per_pair_max));
        }
        let total: u32 = twist_counts.iter().sum();
        if total > budget.shape_max(shape) {
            return bad(format!("{total} twist crossings exceed the shape limit {}", budget.shape_max(shape)));
        }
        if !(1..=18).contains(&pattern) {
            return bad(format!("pattern {pattern} outside 1..=18"));
        }
        if pattern_crossing_pairs(pattern).len() as u32 > budget.pattern_max {
            return bad(format!("pattern {pattern} exceeds the pattern limit {}", budget.pattern_max));
        }
        if orientation.rotation >= 8 {
            return bad(format!("rotation {} outside 0..8", orientation.rotation));
        }
        if !(0..4).all(|k| height_order.contains(&k)) {
            return bad(format!("height order {height_order:?} is not a permutation"));
        }
        Ok(TemplateSpec { shape, twist_counts, pattern, orientation, height_order })
    }

    /// Chords with the orientation applied.
    pub fn chords(&self) -> [(u8, u8); 4] {
        PATTERNS[self.pattern as usize - 1].map(|(a, b)| (self.orientation.apply(a), self.orientation.apply(b)))
    }

    pub fn n_sign_bits(&self) -> usize {
        self.twist_counts.iter().sum::<u32>() as usize
    }

    pub fn pattern_crossings(&self) -> usize {
        pattern_crossing_pairs(self.pattern).len()
    }

    pub fn expected_crossings(&self) -> usize {
        self.pattern_crossings() + self.n_sign_bits()
    }
}

fn twist_choices(shape: Shape, budget: &CrossingBudget) -> Vec<Vec<u32>> {
    let cap = budget.per_pair_max;
    match shape {
        Shape::A => (0..=cap.min(budget.shape_a_max)).map(|t| vec![t]).collect(),
        Shape::B => (0..=cap)
            .flat_map(|a| (0..=cap).map(move |b| vec![a, b]))
            .filter(|v| v.iter().sum::<u32>() <= budget.shape_b_max)
            .collect(),
    }
}

/// All templates within the budget, in a fixed order.
pub fn enumerate_templates(budget: &CrossingBudget) -> Vec<TemplateSpec> {
    enumerate_templates_for(budget, &(1..=18).collect::<Vec<_>>())
}

pub fn enumerate_templates_for(budget: &CrossingBudget, patterns: &[u8]) -> Vec<TemplateSpec> {
    groups(budget, patterns)
        .into_iter()
        .flat_map(|g| {
            admissible_height_orders(g.pattern).into_iter().map(move |h| TemplateSpec { height_order: h, ..g.clone() })
        })
        .collect()
}

/// Templates up to the height order.
fn groups(budget: &CrossingBudget, patterns: &[u8]) -> Vec<TemplateSpec> {
    let mut out = Vec::new();
    for shape in [Shape::A, Shape::B] {
        for twists in twist_choices(shape, budget) {
            for &pattern in patterns {
                if pattern_crossing_pairs(pattern).len() as u32 > budget.pattern_max {
                    continue;
                }
                for orientation in distinct_orientations(pattern) {
                    out.push(TemplateSpec {
                        shape,
                        twist_counts: twists.clone(),
                        pattern,
                        orientation,
                        height_order: [0, 1, 2, 3],
                    });
                }
            }
        }
    }
    out
}

// Shape geometry, transcribed from the two base figures as quadratic Bézier
// chains. Coordinates are in figure units; the quadruple point is the origin.

type Bez = [[f64; 2]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum End {
    Slot,
    Port { bx: u8, right: bool, upper: bool },
}

struct RouteData {
    start: End,
    end: End,
    curve: &'static [Bez],
}

struct BoxData {
    x0: f64,
    x1: f64,
    upper: f64,
    lower: f64,
}

const fn port(bx: u8, right: bool, upper: bool) -> End {
    End::Port { bx, right, upper }
}

const SHAPE_A_BOXES: [BoxData; 1] = [BoxData { x0: -15.0, x1: 15.0, upper: 60.0, lower: 52.5 }];

const SHAPE_A_ROUTES: [RouteData; 6] = [
    RouteData {
        start: port(0, true, true),
        end: End::Slot,
        curve: &[[[15.0, 60.0], [37.5, 60.0], [37.5, 37.5]], [[37.5, 37.5], [37.5, 15.0], [0.0, 0.0]]],
    },
    RouteData {
        start: End::Slot,
        end: port(0, true, false),
        curve: &[[[0.0, 0.0], [30.0, 22.5], [30.0, 37.5]], [[30.0, 37.5], [30.0, 52.5], [15.0, 52.5]]],
    },
    RouteData {
        start: port(0, false, false),
        end: End::Slot,
        curve: &[[[-15.0, 52.5], [-30.0, 52.5], [-30.0, 37.5]], [[-30.0, 37.5], [-30.0, 22.5], [0.0, 0.0]]],
    },
    RouteData {
        start: End::Slot,
        end: port(0, false, true),
        curve: &[[[0.0, 0.0], [-37.5, 15.0], [-37.5, 37.5]], [[-37.5, 37.5], [-37.5, 60.0], [-15.0, 60.0]]],
    },
    RouteData {
        start: End::Slot,
        end: End::Slot,
        curve: &[[[0.0, 0.0], [-18.75, -7.5], [-16.875, -9.375]], [[-16.875, -9.375], [-15.0, -11.25], [0.0, 0.0]]],
    },
    RouteData {
        start: End::Slot,
        end: End::Slot,
        curve: &[[[0.0, 0.0], [15.0, -11.25], [16.875, -9.375]], [[16.875, -9.375], [18.75, -7.5], [0.0, 0.0]]],
    },
];

const SHAPE_B_BOXES: [BoxData; 2] = [
    BoxData { x0: -45.0, x1: -15.0, upper: 60.0, lower: 52.5 },
    BoxData { x0: 15.0, x1: 45.0, upper: 60.0, lower: 52.5 },
];

const SHAPE_B_ROUTES: [RouteData; 8] = [
    RouteData { start: port(0, true, true), end: port(1, false, true), curve: &[[[-15.0, 60.0], [0.0, 60.0], [15.0, 60.0]]] },
    RouteData {
        start: port(1, true, true),
        end: End::Slot,
        curve: &[[[45.0, 60.0], [67.5, 60.0], [67.5, 37.5]], [[67.5, 37.5], [67.5, 7.5], [0.0, 0.0]]],
    },
    RouteData {
        start: End::Slot,
        end: port(0, false, false),
        curve: &[[[0.0, 0.0], [-60.0, 22.5], [-60.0, 37.5]], [[-60.0, 37.5], [-60.0, 52.5], [-45.0, 52.5]]],
    },
    RouteData { start: port(0, true, false), end: End::Slot, curve: &[[[-15.0, 52.5], [-7.5, 52.5], [0.0, 0.0]]] },
    RouteData {
        start: End::Slot,
        end: End::Slot,
        curve: &[[[0.0, 0.0], [7.5, -15.0], [0.0, -15.0]], [[0.0, -15.0], [-7.5, -15.0], [0.0, 0.0]]],
    },
    RouteData { start: End::Slot, end: port(1, false, false), curve: &[[[0.0, 0.0], [7.5, 52.5], [15.0, 52.5]]] },
    RouteData {
        start: port(1, true, false),
        end: End::Slot,
        curve: &[[[45.0, 52.5], [60.0, 52.5], [60.0, 37.5]], [[60.0, 37.5], [60.0, 22.5], [0.0, 0.0]]],
    },
    RouteData {
        start: End::Slot,
        end: port(0, false, true),
        curve: &[[[0.0, 0.0], [-67.5, 7.5], [-67.5, 37.5]], [[-67.5, 37.5], [-67.5, 60.0], [-45.0, 60.0]]],
    },
];

const DISK_RADIUS: f64 = 4.0;
const BEZIER_SEGMENTS: usize = 24;
// Small per-slot rotations keep the chords of the straight pattern from
// meeting in one point.
const SLOT_NUDGE_DEG: [f64; 8] = [0.0, 0.9, -0.6, 1.3, -1.1, 0.4, -0.8, 1.7];
const TWIST_DEPTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Slot(u8),
    Port { bx: u8, right: bool, upper: bool },
}

struct ShapeGeometry {
    /// Route polylines, with slot ends already clipped to the disk.
    routes: Vec<(Node, Node, Vec<Vec2<f64>>)>,
    slots: [Vec2<f64>; 8],
    boxes: &'static [BoxData],
}

fn sample(curve: &[Bez]) -> Vec<Vec2<f64>> {
    let mut pts = Vec::new();
    for (bi, b) in curve.iter().enumerate() {
        for k in 0..=BEZIER_SEGMENTS {
            if bi > 0 && k == 0 {
                continue;
            }
            let t = k as f64 / BEZIER_SEGMENTS as f64;
            let s = 1.0 - t;
            pts.push(Vec2::new(
                s * s * b[0][0] + 2.0 * s * t * b[1][0] + t * t * b[2][0],
                s * s * b[0][1] + 2.0 * s * t * b[1][1] + t * t * b[2][1],
            ));
        }
    }
    pts
}

/// Replaces the points of `pts` (which starts at the origin) inside the
/// disk by one point on its boundary.
fn clip_start(pts: &mut Vec<Vec2<f64>>) {
    let k = pts.iter().position(|p| p.norm() >= DISK_RADIUS).expect("route leaves the disk");
    let (a, b) = (pts[k - 1], pts[k]);
    let d = b - a;
    // |a + s d| = r
    let (qa, qb, qc) = (d.dot(d), 2.0 * a.dot(d), a.dot(a) - DISK_RADIUS * DISK_RADIUS);
    let s = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
    let p = a + d * s;
    pts.splice(0..k, [p]);
}

fn rotate(p: Vec2<f64>, deg: f64) -> Vec2<f64> {
    let (s, c) = (deg * PI / 180.0).sin_cos();
    Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

fn build_shape(routes: &[RouteData], boxes: &'static [BoxData]) -> ShapeGeometry {
    // Slot ends sorted by tangent angle at the origin.
    let mut ends = Vec::new();
    for (ri, r) in routes.iter().enumerate() {
        let first = r.curve[0];
        let last = r.curve[r.curve.len() - 1];
        if r.start == End::Slot {
            ends.push((ri, true, (first[1][1] - first[0][1]).atan2(first[1][0] - first[0][0])));
        }
        if r.end == End::Slot {
            ends.push((ri, false, (last[1][1] - last[2][1]).atan2(last[1][0] - last[2][0])));
        }
    }
    assert_eq!(ends.len(), 8, "shape must have eight slot ends");
    ends.sort_by(|a, b| a.2.rem_euclid(2.0 * PI).total_cmp(&b.2.rem_euclid(2.0 * PI)));
    let mut slot_of = HashMap::new();
    for (s, e) in ends.iter().enumerate() {
        slot_of.insert((e.0, e.1), s as u8);
    }
    let mut slots = [Vec2::new(0.0, 0.0); 8];
    let node = |end: End, ri: usize, at_start: bool| match end {
        End::Slot => Node::Slot(slot_of[&(ri, at_start)]),
        End::Port { bx, right, upper } => Node::Port { bx, right, upper },
    };
    let mut out = Vec::new();
    for (ri, r) in routes.iter().enumerate() {
        let mut pts = sample(r.curve);
        if r.start == End::Slot {
            clip_start(&mut pts);
            let s = slot_of[&(ri, true)] as usize;
            pts[0] = rotate(pts[0], SLOT_NUDGE_DEG[s]);
            slots[s] = pts[0];
        }
        if r.end == End::Slot {
            pts.reverse();
            clip_start(&mut pts);
            let s = slot_of[&(ri, false)] as usize;
            pts[0] = rotate(pts[0], SLOT_NUDGE_DEG[s]);
            slots[s] = pts[0];
            pts.reverse();
        }
        out.push((node(r.start, ri, true), node(r.end, ri, false), pts));
    }
    ShapeGeometry { routes: out, slots, boxes }
}

fn shape_geometry(shape: Shape) -> &'static ShapeGeometry {
    static A: OnceLock<ShapeGeometry> = OnceLock::new();
    static B: OnceLock<ShapeGeometry> = OnceLock::new();
    match shape {
        Shape::A => A.get_or_init(|| build_shape(&SHAPE_A_ROUTES, &SHAPE_A_BOXES)),
        Shape::B => B.get_or_init(|| build_shape(&SHAPE_B_ROUTES, &SHAPE_B_BOXES)),
    }
}

/// Where a polygon edge comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeOrigin {
    Chord(u8),
    Route,
    Box(u8),
}

/// Which twist box crossing or chord pair a diagram crossing belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingOrigin {
    /// Chords `(over, under)`.
    Pattern(u8, u8),
    /// Global sign-bit index of a twist crossing.
    Twist(usize),
}

struct Piece {
    a: Node,
    b: Node,
    pts: Vec<Vec3<f64>>,
    origin: EdgeOrigin,
}

fn box_strands(bx: u8, data: &BoxData, k: u32, bits: &[bool]) -> [Piece; 2] {
    let k = k as usize;
    let make = |start_upper: bool| {
        let y_at = |c: usize| if (c % 2 == 0) == start_upper { data.upper } else { data.lower };
        let mut pts = Vec::new();
        if k == 0 {
            let y = y_at(0);
            pts.push(Vec3::new(data.x0, y, 0.0));
            pts.push(Vec3::new(data.x1, y, 0.0));
        } else {
            let w = (data.x1 - data.x0) / k as f64;
            for c in 0..k {
                let (xa, ya, yb) = (data.x0 + c as f64 * w, y_at(c), y_at(c + 1));
                let descending = ya > yb;
                let over = descending == bits[c];
                let z = if over { TWIST_DEPTH } else { -TWIST_DEPTH };
                pts.push(Vec3::new(xa, ya, 0.0));
                for f in [0.3, 0.7] {
                    pts.push(Vec3::new(xa + f * w, ya + f * (yb - ya), z));
                }
            }
            pts.push(Vec3::new(data.x1, y_at(k), 0.0));
        }
        let end_upper = (k % 2 == 0) == start_upper;
        Piece {
            a: Node::Port { bx, right: false, upper: start_upper },
            b: Node::Port { bx, right: true, upper: end_upper },
            pts,
            origin: EdgeOrigin::Box(bx),
        }
    };
    [make(true), make(false)]
}

fn chord_depth(level: u8) -> f64 {
    10.0 * (level as f64 + 1.0)
}

/// Builds the polygon of a template with the given twist crossing bits
/// (`true`: the strand descending left to right passes over). Returns the
/// polygon and the origin of each edge.
pub fn realize_polygon(
    tpl: &TemplateSpec,
    bits: &[bool],
) -> Result<(PolygonalKnot<f64>, Vec<EdgeOrigin>), WorkbenchError> {
    if bits.len() != tpl.n_sign_bits() {
        return Err(WorkbenchError::InvalidTemplate(format!(
            "{} sign bits for {} twist crossings",
            bits.len(),
            tpl.n_sign_bits()
        )));
    }
    let geo = shape_geometry(tpl.shape);
    let chords = tpl.chords();
    let mut slot_z = [0.0; 8];
    for (k, &(a, b)) in chords.iter().enumerate() {
        slot_z[a as usize] = chord_depth(tpl.height_order[k]);
        slot_z[b as usize] = chord_depth(tpl.height_order[k]);
    }
    let mut pieces = Vec::new();
    for (k, &(a, b)) in chords.iter().enumerate() {
        let z = chord_depth(tpl.height_order[k]);
        let (pa, pb) = (geo.slots[a as usize], geo.slots[b as usize]);
        pieces.push(Piece {
            a: Node::Slot(a),
            b: Node::Slot(b),
            pts: vec![Vec3::new(pa.x, pa.y, z), Vec3::new(pb.x, pb.y, z)],
            origin: EdgeOrigin::Chord(k as u8),
        });
    }
    for (a, b, pts) in &geo.routes {
        let last = pts.len() - 1;
        let pts = pts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let z = match (i, a, b) {
                    (0, Node::Slot(s), _) => slot_z[*s as usize],
                    (i, _, Node::Slot(s)) if i == last => slot_z[*s as usize],
                    _ => 0.0,
                };
                Vec3::new(p.x, p.y, z)
            })
            .collect();
        pieces.push(Piece { a: *a, b: *b, pts, origin: EdgeOrigin::Route });
    }
    let mut offset = 0;
    for (bx, data) in geo.boxes.iter().enumerate() {
        let k = tpl.twist_counts[bx];
        pieces.extend(box_strands(bx as u8, data, k, &bits[offset..offset + k as usize]));
        offset += k as usize;
    }

    let mut at: HashMap<Node, Vec<usize>> = HashMap::new();
    for (i, p) in pieces.iter().enumerate() {
        at.entry(p.a).or_default().push(i);
        at.entry(p.b).or_default().push(i);
    }
    debug_assert!(at.values().all(|v| v.len() == 2));

    let mut used = vec![false; pieces.len()];
    let mut components = 0;
    let mut verts: Vec<Vec3<f64>> = Vec::new();
    let mut origins = Vec::new();
    while let Some(first) = used.iter().position(|u| !u) {
        components += 1;
        let (mut cur, mut node) = (first, pieces[first].a);
        if components == 1 {
            verts.push(pieces[first].pts[0]);
        }
        while !used[cur] {
            used[cur] = true;
            let p = &pieces[cur];
            let forward = p.a == node;
            let seq: Vec<Vec3<f64>> = if forward { p.pts.clone() } else { p.pts.iter().rev().copied().collect() };
            node = if forward { p.b } else { p.a };
            if components == 1 {
                for q in &seq[1..] {
                    verts.push(*q);
                    origins.push(p.origin);
                }
            }
            let nx = &at[&node];
            cur = if nx[0] == cur { nx[1] } else { nx[0] };
        }
    }
    if components > 1 {
        return Err(WorkbenchError::NotAKnot { components });
    }
    verts.pop();
    let knot = PolygonalKnot::synthetic(verts).map_err(|e| WorkbenchError::Geometry(e.to_string()))?;
    Ok((knot, origins))
}

/// A template drawn in the plane with its crossing code.
#[derive(Debug, Clone)]
pub struct Realized {
    pub polygon: PolygonalKnot<f64>,
    pub projected: ProjectedDiagram<f64>,
    /// Origin of each diagram crossing.
    pub origins: Vec<CrossingOrigin>,
}

impl Realized {
    pub fn diagram(&self) -> &KnotDiagram {
        &self.projected.diagram
    }
}

/// Traces the template as a planar curve and extracts its diagram; twist
/// crossings take their over strand from `signs` and pattern crossings from
/// the height order.
pub fn realize_diagram(tpl: &TemplateSpec, signs: &[bool]) -> Result<Realized, WorkbenchError> {
    let (polygon, edge_origins) = realize_polygon(tpl, signs)?;
    let (projected, _) = diagram::extract(&polygon, &Direction::z(), 0)
        .map_err(|e| WorkbenchError::Geometry(e.to_string()))?;
    let geo = shape_geometry(tpl.shape);
    let mut box_offset = vec![0usize; tpl.twist_counts.len()];
    for b in 1..box_offset.len() {
        box_offset[b] = box_offset[b - 1] + tpl.twist_counts[b - 1] as usize;
    }
    let origins = projected
        .crossings
        .iter()
        .map(|c| match (edge_origins[c.over_edge], edge_origins[c.under_edge]) {
            (EdgeOrigin::Chord(i), EdgeOrigin::Chord(j)) => Ok(CrossingOrigin::Pattern(i, j)),
            (EdgeOrigin::Box(a), EdgeOrigin::Box(b)) if a == b => {
                let data = &geo.boxes[a as usize];
                let k = tpl.twist_counts[a as usize] as f64;
                let m = ((c.position.x - data.x0) / ((data.x1 - data.x0) / k)).floor() as usize;
                Ok(CrossingOrigin::Twist(box_offset[a as usize] + m))
            }
            (a, b) => Err(WorkbenchError::Geometry(format!("unexpected crossing between {a:?} and {b:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Realized { polygon, projected, origins })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub reduced: KnotDiagram,
    pub alexander: LaurentPoly<i64>,
    /// Table entries with the same Alexander polynomial and crossing
    /// number at most the reduced crossing count.
    pub candidates: Vec<String>,
    pub crossing_count: usize,
}

/// States visited by the Reidemeister III fallback.
pub const R3_SEARCH_STATES: usize = 500;

/// Kinks and non-alternating crescents removed to a fixed point; diagrams
/// still over the budget then go through a bounded Reidemeister III search.
pub fn reduce(d: &KnotDiagram, budget: &CrossingBudget) -> KnotDiagram {
    let r = d.simplify();
    if r.n_crossings() > budget.reduced_total_max as usize {
        r.simplify_deep(R3_SEARCH_STATES)
    } else {
        r
    }
}

/// Reduces the diagram (see [`reduce`]) and identifies the result against
/// the table.
pub fn reduce_and_classify(
    d: &KnotDiagram,
    table: &KnotTable,
    budget: &CrossingBudget,
) -> Result<Classification, WorkbenchError> {
    let reduced = reduce(d, budget);
    let crossing_count = reduced.n_crossings();
    if crossing_count > budget.reduced_total_max as usize {
        return Err(WorkbenchError::BudgetExceeded { crossings: crossing_count, limit: budget.reduced_total_max as usize });
    }
    let alexander =
        invariants::alexander_polynomial::<i64>(&reduced).map_err(|e| WorkbenchError::Invariant(e.to_string()))?;
    let candidates = table
        .identify_polynomial(&alexander)
        .into_iter()
        .filter(|e| e.crossing_number as usize <= crossing_count)
        .map(|e| e.name.clone())
        .collect();
    Ok(Classification { reduced, alexander, candidates, crossing_count })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub templates: usize,
    pub not_a_knot_templates: usize,
    pub realizations: usize,
    pub trivial: usize,
    /// Candidate sets (names joined by `|`) and their multiplicities.
    pub types: BTreeMap<String, usize>,
    pub unidentified: usize,
    /// Alexander polynomials of unidentified realizations.
    pub unidentified_polynomials: BTreeMap<String, usize>,
    pub budget_exceeded: usize,
    pub budget_exceeded_log: Vec<String>,
    pub max_pre_crossings: usize,
    pub max_reduced_crossings: usize,
    /// Largest reduced crossing count among identified realizations whose
    /// pattern is one of 1..=14.
    pub max_reduced_identified_low_patterns: usize,
    /// Templates whose drawn crossing count differs from the budget count.
    pub geometry_mismatches: usize,
}

impl CensusReport {
    fn merge(&mut self, o: CensusReport) {
        self.templates += o.templates;
        self.not_a_knot_templates += o.not_a_knot_templates;
        self.realizations += o.realizations;
        self.trivial += o.trivial;
        for (k, v) in o.types {
            *self.types.entry(k).or_default() += v;
        }
        self.unidentified += o.unidentified;
        for (k, v) in o.unidentified_polynomials {
            *self.unidentified_polynomials.entry(k).or_default() += v;
        }
        self.budget_exceeded += o.budget_exceeded;
        self.budget_exceeded_log.extend(o.budget_exceeded_log);
        self.max_pre_crossings = self.max_pre_crossings.max(o.max_pre_crossings);
        self.max_reduced_crossings = self.max_reduced_crossings.max(o.max_reduced_crossings);
        self.max_reduced_identified_low_patterns =
            self.max_reduced_identified_low_patterns.max(o.max_reduced_identified_low_patterns);
        self.geometry_mismatches += o.geometry_mismatches;
    }

    /// Distinct table entries occurring in some candidate set.
    pub fn identified_names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.types.keys().flat_map(|k| k.split('|').map(str::to_string)).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Clone)]
enum Outcome {
    Trivial,
    Identified(String),
    Unidentified(String),
}

fn census_group(group: &TemplateSpec, table: &KnotTable, budget: &CrossingBudget) -> CensusReport {
    let heights = admissible_height_orders(group.pattern);
    let nbits = group.n_sign_bits();
    let mut rep = CensusReport { templates: heights.len(), ..Default::default() };
    let base = match realize_diagram(group, &vec![false; nbits]) {
        Ok(r) => r,
        Err(WorkbenchError::NotAKnot { .. }) => {
            rep.not_a_knot_templates = heights.len();
            return rep;
        }
        Err(e) => {
            rep.geometry_mismatches = heights.len();
            rep.budget_exceeded_log.push(format!("{group:?}: {e}"));
            return rep;
        }
    };
    let pre = base.diagram().n_crossings();
    rep.max_pre_crossings = pre;
    if pre != group.expected_crossings() {
        rep.geometry_mismatches += heights.len();
    }
    let mut cache: HashMap<KnotDiagram, Outcome> = HashMap::new();
    let low_pattern = group.pattern <= 14;
    for h in &heights {
        for mask in 0u64..(1 << nbits) {
            rep.realizations += 1;
            let switch: Vec<usize> = base
                .origins
                .iter()
                .enumerate()
                .filter(|(_, o)| match **o {
                    CrossingOrigin::Pattern(i, j) => h[i as usize] < h[j as usize],
                    CrossingOrigin::Twist(m) => mask >> m & 1 == 1,
                })
                .map(|(c, _)| c)
                .collect();
            let d = base.diagram().switch_crossings(&switch);
            let reduced = reduce(&d, budget);
            let count = reduced.n_crossings();
            rep.max_reduced_crossings = rep.max_reduced_crossings.max(count);
            if count > budget.reduced_total_max as usize {
                rep.budget_exceeded += 1;
                if rep.budget_exceeded_log.len() < 20 {
                    rep.budget_exceeded_log.push(format!("{:?} heights {h:?} mask {mask:b}: {count}", group));
                }
                continue;
            }
            let key = reduced.canonical();
            let outcome = cache
                .entry(key)
                .or_insert_with(|| match invariants::alexander_polynomial::<i64>(&reduced) {
                    Ok(a) if a == LaurentPoly::one() => Outcome::Trivial,
                    Ok(a) => {
                        let names: Vec<&str> = table
                            .identify_polynomial(&a)
                            .into_iter()
                            .filter(|e| e.crossing_number as usize <= count)
                            .map(|e| e.name.as_str())
                            .collect();
                        if names.is_empty() {
                            Outcome::Unidentified(a.to_string())
                        } else {
                            Outcome::Identified(names.join("|"))
                        }
                    }
                    Err(e) => Outcome::Unidentified(format!("error: {e}")),
                })
                .clone();
            match outcome {
                Outcome::Trivial => rep.trivial += 1,
                Outcome::Identified(k) => {
                    *rep.types.entry(k).or_default() += 1;
                    if low_pattern {
                        rep.max_reduced_identified_low_patterns = rep.max_reduced_identified_low_patterns.max(count);
                    }
                }
                Outcome::Unidentified(p) => {
                    rep.unidentified += 1;
                    *rep.unidentified_polynomials.entry(p).or_default() += 1;
                }
            }
        }
    }
    rep
}

/// Runs every template and sign assignment through realization, reduction
/// and identification. Deterministic for any thread count.
pub fn census(budget: &CrossingBudget, table: &KnotTable) -> CensusReport {
    census_for(budget, table, &(1..=18).collect::<Vec<_>>())
}

pub fn census_for(budget: &CrossingBudget, table: &KnotTable, patterns: &[u8]) -> CensusReport {
    let parts: Vec<CensusReport> = groups(budget, patterns).par_iter().map(|g| census_group(g, table, budget)).collect();
    let mut out = CensusReport::default();
    for p in parts {
        out.merge(p);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRuleInput {
    pub name: String,
    pub bridge_index: u32,
    pub marker: Marker,
    pub two_bridge: bool,
    pub torus: Option<(i64, i64)>,
    pub edge_bound: i64,
}

impl From<&KnotTableEntry> for BoundRuleInput {
    fn from(e: &KnotTableEntry) -> Self {
        BoundRuleInput {
            name: e.name.clone(),
            bridge_index: e.bridge_index,
            marker: e.marker,
            two_bridge: e.two_bridge,
            torus: e.torus,
            edge_bound: e.edge_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRow {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub exact: Option<i64>,
}

/// Superbridge range from bridge index, marker, edge number and torus type.
pub fn table_bounds(inputs: &[BoundRuleInput]) -> Result<Vec<BoundRow>, WorkbenchError> {
    inputs
        .iter()
        .map(|k| {
            let (lo, hi) = match k.torus {
                Some((p, q)) => {
                    let v = crate::directional::torus_superbridge_index(p.min(q), p.max(q))
                        .map_err(|e| WorkbenchError::InvalidTemplate(e.to_string()))?;
                    (v, v)
                }
                None => {
                    let mut hi = k.edge_bound.div_euclid(2);
                    if k.two_bridge {
                        hi = hi.min(7);
                    }
                    let step = if k.marker.is_star() || k.marker.is_diamond() { 1 } else { 2 };
                    (k.bridge_index as i64 + step, hi)
                }
            };
            if lo > hi {
                return Err(WorkbenchError::InconsistentRules { name: k.name.clone(), lo, hi });
            }
            Ok(BoundRow { name: k.name.clone(), lo, hi, exact: (lo == hi).then_some(lo) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_crossing_counts() {
        let counts: Vec<usize> = (1..=18).map(|p| pattern_crossing_pairs(p).len()).collect();
        assert_eq!(counts, [0, 0, 1, 1, 0, 1, 2, 2, 2, 3, 1, 2, 3, 3, 4, 4, 5, 6]);
    }

    #[test]
    fn slots_are_ordered_by_angle() {
        for shape in [Shape::A, Shape::B] {
            let g = shape_geometry(shape);
            let angles: Vec<f64> = g.slots.iter().map(|p| p.y.atan2(p.x).rem_euclid(2.0 * PI)).collect();
            assert!(angles.windows(2).all(|w| w[0] < w[1]), "{shape:?} {angles:?}");
        }
    }

    #[test]
    fn oversized_twist_is_rejected() {
        let r = TemplateSpec::new(Shape::A, vec![4], 1, Orientation::IDENTITY, [0, 1, 2, 3]);
        assert!(matches!(r, Err(WorkbenchError::InvalidTemplate(_))));
    }

    #[test]
    fn drawn_crossings_match_the_budget_count() {
        for g in groups(&CrossingBudget::default(), &(1..=18).collect::<Vec<_>>()) {
            match realize_diagram(&g, &vec![false; g.n_sign_bits()]) {
                Ok(r) => assert_eq!(r.diagram().n_crossings(), g.expected_crossings(), "{g:?}"),
                Err(WorkbenchError::NotAKnot { .. }) => {}
                Err(e) => panic!("{g:?}: {e}"),
            }
        }
    }

    #[test]
    fn bound_rules() {
        let row = |name: &str, bridge, marker, two_bridge, torus, edge_bound| BoundRuleInput {
            name: name.into(),
            bridge_index: bridge,
            marker,
            two_bridge,
            torus,
            edge_bound,
        };
        let out = table_bounds(&[
            row("3_1", 2, Marker::CircStar, true, Some((2, 3)), 6),
            row("7_5", 2, Marker::Times, true, None, 8),
            row("9_2", 2, Marker::Times, true, None, 18),
        ])
        .unwrap();
        assert_eq!(out[0].exact, Some(3));
        assert_eq!(out[1].exact, Some(4));
        assert_eq!((out[2].lo, out[2].hi, out[2].exact), (4, 7, None));
        assert!(matches!(
            table_bounds(&[row("x", 3, Marker::Times, false, None, 8)]),
            Err(WorkbenchError::InconsistentRules { .. })
        ));
    }
}
