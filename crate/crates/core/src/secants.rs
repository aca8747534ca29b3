//! Lines meeting a polygonal knot several times: Plücker coordinates,
//! common transversals of four lines, and quadrisecant search.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{fan_is_clear, CurveKind, ParametricKnot, PolygonalKnot};
use crate::exact::{rat, IsolatedRoot};
use crate::geom::Vec3;
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SecantError {
    #[error("Degenerate: the four lines have infinitely many common transversals")]
    Degenerate,
    #[error("NotPolynomial: common axis roots need a polynomial curve")]
    NotPolynomial,
    #[error("TooFewHits: secant meets the knot {0} times, need at least 4")]
    TooFewHits(usize),
    #[error("InvalidLine: {0}")]
    InvalidLine(String),
}

/// Oriented line with unit direction `d` and moment `m = p x d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PluckerLine<T> {
    pub d: Vec3<T>,
    pub m: Vec3<T>,
}

impl<T: Scalar> PluckerLine<T> {
    pub fn through(p: Vec3<T>, q: Vec3<T>) -> Result<Self, SecantError> {
        Self::from_point_dir(p, q - p)
    }

    pub fn from_point_dir(p: Vec3<T>, dir: Vec3<T>) -> Result<Self, SecantError> {
        let d = dir.normalized().ok_or_else(|| SecantError::InvalidLine("zero direction".into()))?;
        Ok(PluckerLine { d, m: p.cross(d) })
    }

    /// Zero iff the two lines are coplanar (meet or are parallel).
    pub fn reciprocal(&self, o: &Self) -> T {
        self.d.dot(o.m) + o.d.dot(self.m)
    }

    /// Klein quadric residual `<d, m>`.
    pub fn klein(&self) -> T {
        self.d.dot(self.m)
    }

    /// Point of the line closest to the origin.
    pub fn closest_to_origin(&self) -> Vec3<T> {
        self.d.cross(self.m)
    }

    pub fn point_at(&self, s: T) -> Vec3<T> {
        self.closest_to_origin() + self.d * s
    }

    /// Signed position of the foot of `p` along the line.
    pub fn coordinate(&self, p: Vec3<T>) -> T {
        p.dot(self.d)
    }

    pub fn distance_to_point(&self, p: Vec3<T>) -> T {
        (p.cross(self.d) - self.m).norm()
    }

    /// Same line with the orientation whose largest direction component is
    /// positive.
    pub fn canonical(&self) -> Self {
        let d = self.d;
        let big = if d.x.abs() >= d.y.abs() && d.x.abs() >= d.z.abs() {
            d.x
        } else if d.y.abs() >= d.z.abs() {
            d.y
        } else {
            d.z
        };
        if big < T::zero() {
            PluckerLine { d: -self.d, m: -self.m }
        } else {
            *self
        }
    }

    /// Unoriented angle between directions.
    pub fn angle_to(&self, o: &Self) -> T {
        let c = self.d.dot(o.d).abs().min(T::one());
        self.d.cross(o.d).norm().atan2(c)
    }

    /// Moment distance after matching orientations.
    pub fn moment_distance(&self, o: &Self) -> T {
        let (a, b) = (self.canonical(), o.canonical());
        (a.m - b.m).norm()
    }

    fn transform(&self, shift: Vec3<T>, scale: T) -> Self {
        // Line in coordinates x' = (x - shift) / scale.
        PluckerLine { d: self.d, m: (self.m - shift.cross(self.d)) / scale }
    }

    fn untransform(&self, shift: Vec3<T>, scale: T) -> Self {
        PluckerLine { d: self.d, m: self.m * scale + shift.cross(self.d) }
    }

    /// Point on segment `a b` closest to the line, as `(s, distance)`.
    pub fn segment_hit(&self, a: Vec3<T>, b: Vec3<T>) -> (T, T) {
        let e = b - a;
        let p0 = self.closest_to_origin();
        let w = a - p0;
        let ee = e.dot(e);
        let ed = e.dot(self.d);
        let denom = ee - ed * ed;
        let s = if denom > ee * T::lit(1e-24) {
            (ed * w.dot(self.d) - w.dot(e)) / denom
        } else {
            T::zero()
        };
        let s = s.max(T::zero()).min(T::one());
        (s, self.distance_to_point(a + e * s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transversals<T> {
    pub lines: Vec<PluckerLine<T>>,
    /// The quadratic was tangent to the Klein quadric: one double solution.
    pub tangent: bool,
}

type Vec6<T> = [T; 6];

fn dot6<T: Scalar>(a: &Vec6<T>, b: &Vec6<T>) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

fn axpy6<T: Scalar>(a: &mut Vec6<T>, k: T, b: &Vec6<T>) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = *x - k * *y;
    }
}

fn normalize6<T: Scalar>(a: &mut Vec6<T>) -> T {
    let n = dot6(a, a).sqrt();
    if n > T::zero() {
        for x in a.iter_mut() {
            *x = *x / n;
        }
    }
    n
}

// Orthonormal basis of the null space of the given rows.
fn null_space<T: Scalar>(rows: &[Vec6<T>], rank_tol: T) -> Vec<Vec6<T>> {
    let mut basis: Vec<Vec6<T>> = Vec::new();
    for r in rows {
        let mut v = *r;
        if normalize6(&mut v) == T::zero() {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let k = dot6(&v, b);
                axpy6(&mut v, k, b);
            }
        }
        if normalize6(&mut v) > rank_tol {
            basis.push(v);
        }
    }
    let rank = basis.len();
    let mut null = Vec::new();
    for _ in rank..6 {
        let mut best: Option<(T, Vec6<T>)> = None;
        for k in 0..6 {
            let mut e = [T::zero(); 6];
            e[k] = T::one();
            for _ in 0..2 {
                for b in basis.iter().chain(null.iter()) {
                    let c = dot6(&e, b);
                    axpy6(&mut e, c, b);
                }
            }
            let n = dot6(&e, &e).sqrt();
            if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
                best = Some((n, e));
            }
        }
        let (_, mut e) = best.expect("six candidates");
        normalize6(&mut e);
        null.push(e);
    }
    null
}

fn line_of<T: Scalar>(x: &Vec6<T>) -> Option<PluckerLine<T>> {
    let d = Vec3::new(x[0], x[1], x[2]);
    let m = Vec3::new(x[3], x[4], x[5]);
    let n = d.norm();
    if n <= T::lit(1e-9) * m.norm().max(T::one()) {
        return None;
    }
    let d = d / n;
    let m = m / n;
    Some(PluckerLine { d, m: m - d * d.dot(m) })
}

fn parallel<T: Scalar>(a: &PluckerLine<T>, b: &PluckerLine<T>) -> bool {
    a.d.cross(b.d).norm() <= T::lit(1e-9)
}

/// All lines meeting four given lines.
///
/// The incidence conditions are linear in Plücker coordinates; their null
/// space is intersected with the Klein quadric. Solutions parallel to one of
/// the inputs meet it only at infinity and are dropped.
pub fn transversals_of_four_lines<T: Scalar>(lines: [&PluckerLine<T>; 4]) -> Result<Transversals<T>, SecantError> {
    if (1..4).all(|i| parallel(lines[0], lines[i])) {
        // Any transversal lies in a plane containing all four lines.
        let p0 = lines[0].closest_to_origin();
        let normals: Vec<Vec3<T>> =
            (1..4).filter_map(|i| (lines[i].closest_to_origin() - p0).cross(lines[0].d).normalized()).collect();
        let coplanar = normals.windows(2).all(|w| w[0].cross(w[1]).norm() <= T::lit(1e-9));
        return if coplanar { Err(SecantError::Degenerate) } else { Ok(Transversals { lines: vec![], tangent: false }) };
    }
    // Translate to the centroid of the lines' closest points and rescale.
    let pts: Vec<Vec3<T>> = lines.iter().map(|l| l.closest_to_origin()).collect();
    let c = pts.iter().fold(Vec3::zero(), |s, p| s + *p) / T::lit(4.0);
    let scale = pts.iter().map(|p| p.distance(c)).fold(T::zero(), T::max).max(T::epsilon());
    let local: Vec<PluckerLine<T>> = lines.iter().map(|l| l.transform(c, scale)).collect();
    let rows: Vec<Vec6<T>> =
        local.iter().map(|l| [l.m.x, l.m.y, l.m.z, l.d.x, l.d.y, l.d.z]).collect();
    let null = null_space(&rows, T::lit(1e-9));
    if null.len() >= 3 {
        return Err(SecantError::Degenerate);
    }
    let (u, w) = (&null[0], &null[1]);
    let q = |a: &Vec6<T>, b: &Vec6<T>| {
        (a[0] * b[3] + a[1] * b[4] + a[2] * b[5] + b[0] * a[3] + b[1] * a[4] + b[2] * a[5]) / T::lit(2.0)
    };
    let (a, b, cc) = (q(u, u), q(u, w), q(w, w));
    // Eigen-decomposition of [[a, b], [b, cc]].
    let tr = (a + cc) / T::lit(2.0);
    let det = a * cc - b * b;
    let disc = (tr * tr - det).max(T::zero()).sqrt();
    let (l1, l2) = (tr + disc, tr - disc);
    let norm = l1.abs().max(l2.abs());
    if norm <= T::lit(1e-12) {
        return Err(SecantError::Degenerate);
    }
    let eig = |l: T| {
        let (x, y) = if (a - l).abs() + b.abs() >= (cc - l).abs() + b.abs() { (b, l - a) } else { (l - cc, b) };
        let n = (x * x + y * y).sqrt();
        if n == T::zero() {
            if (a - l).abs() <= (cc - l).abs() { (T::one(), T::zero()) } else { (T::zero(), T::one()) }
        } else {
            (x / n, y / n)
        }
    };
    let (e1, e2) = (eig(l1), eig(l2));
    let comb = |alpha: T, beta: T| {
        // Coordinates (alpha, beta) in the eigenbasis back to (u, w).
        let cu = alpha * e1.0 + beta * e2.0;
        let cw = alpha * e1.1 + beta * e2.1;
        let mut x = [T::zero(); 6];
        for k in 0..6 {
            x[k] = cu * u[k] + cw * w[k];
        }
        x
    };
    let delta = -T::lit(4.0) * (l1 / norm) * (l2 / norm);
    let mut sols: Vec<Vec6<T>> = Vec::new();
    let tangent = delta.abs() < T::lit(1e-10);
    if tangent {
        // The eigenvector of the near-zero eigenvalue.
        sols.push(if l1.abs() < l2.abs() { comb(T::one(), T::zero()) } else { comb(T::zero(), T::one()) });
    } else if delta > T::zero() {
        // l1 > 0 > l2: l1 alpha^2 + l2 beta^2 = 0.
        let r = (-l2 / l1).sqrt();
        let k = (T::one() + r * r).sqrt();
        sols.push(comb(r / k, T::one() / k));
        sols.push(comb(-r / k, T::one() / k));
    }
    let out = sols
        .iter()
        .filter_map(line_of)
        .map(|l| l.untransform(c, scale))
        .filter(|l| lines.iter().all(|inp| !parallel(l, inp)))
        .collect();
    Ok(Transversals { lines: out, tangent })
}

/// Where a secant meets the knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit<T> {
    pub edge: usize,
    pub t_on_edge: T,
    pub point: Vec3<T>,
    /// Curve parameter, when the polygon was sampled from a curve.
    pub param: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantLine<T> {
    pub line: PluckerLine<T>,
    /// Distinct hits sorted along `line.d`.
    pub hits: Vec<Hit<T>>,
    /// Number of raw solutions merged into this line.
    pub dedup_group_size: usize,
}

impl<T: Scalar> SecantLine<T> {
    /// Intersects `line` with every edge and merges coincident hits.
    pub fn through(knot: &PolygonalKnot<T>, line: PluckerLine<T>) -> Self {
        Self::through_with(knot, line, T::lit(Tolerances::default().hit_slack))
    }

    fn through_with(knot: &PolygonalKnot<T>, line: PluckerLine<T>, slack: T) -> Self {
        let tol = knot.scale() * slack;
        let mut hits: Vec<Hit<T>> = (0..knot.len())
            .filter_map(|e| {
                let (a, b) = knot.edge(e);
                let (s, dist) = line.segment_hit(a, b);
                (dist <= tol).then(|| Hit {
                    edge: e,
                    t_on_edge: s,
                    point: a.lerp(b, s),
                    param: knot.edge_param(e, s.to_f64_lossy()),
                })
            })
            .collect();
        hits.sort_by(|x, y| line.coordinate(x.point).partial_cmp(&line.coordinate(y.point)).expect("finite"));
        let mut merged: Vec<Hit<T>> = Vec::with_capacity(hits.len());
        for h in hits {
            match merged.last() {
                Some(last) if last.point.distance(h.point) <= tol => {}
                _ => merged.push(h),
            }
        }
        SecantLine { line, hits: merged, dedup_group_size: 1 }
    }

    pub fn n_hits(&self) -> usize {
        self.hits.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrisecantReport<T> {
    pub secants: Vec<SecantLine<T>>,
    /// Edge quadruples whose transversal system had infinitely many solutions.
    pub degenerate_tuples: usize,
    /// Edge quadruples that reached the transversal solver.
    pub tuples_tested: usize,
    /// Solutions inside all four segments, before merging.
    pub raw_solutions: usize,
}

struct Ball<T> {
    c: Vec3<T>,
    r: T,
}

struct Node<T> {
    ball: Ball<T>,
    lo: usize,
    hi: usize,
    children: Option<(usize, usize)>,
}

/// Bounding-sphere hierarchy over contiguous runs of edges.
struct EdgeTree<T> {
    nodes: Vec<Node<T>>,
    edges: Vec<Ball<T>>,
}

impl<T: Scalar> EdgeTree<T> {
    fn new(knot: &PolygonalKnot<T>) -> Self {
        let edges: Vec<Ball<T>> = (0..knot.len())
            .map(|i| {
                let (a, b) = knot.edge(i);
                Ball { c: a.lerp(b, T::lit(0.5)), r: a.distance(b) / T::lit(2.0) }
            })
            .collect();
        let mut tree = EdgeTree { nodes: Vec::new(), edges };
        tree.build(knot, 0, knot.len());
        tree
    }

    fn build(&mut self, knot: &PolygonalKnot<T>, lo: usize, hi: usize) -> usize {
        let pts: Vec<Vec3<T>> = (lo..=hi).map(|i| knot.vertex(i)).collect();
        let (mn, mx) = pts.iter().fold((pts[0], pts[0]), |(a, b), p| (a.component_min(*p), b.component_max(*p)));
        let c = mn.lerp(mx, T::lit(0.5));
        let r = pts.iter().map(|p| p.distance(c)).fold(T::zero(), T::max);
        let id = self.nodes.len();
        self.nodes.push(Node { ball: Ball { c, r }, lo, hi, children: None });
        if hi - lo > 4 {
            let mid = (lo + hi) / 2;
            let a = self.build(knot, lo, mid);
            let b = self.build(knot, mid, hi);
            self.nodes[id].children = Some((a, b));
        }
        id
    }

    // Edges whose ball meets the union of balls interpolating `b1` to `b2`.
    fn query(&self, b1: &Ball<T>, b2: &Ball<T>, slack: T, out: &mut Vec<usize>) {
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !swept_ball_meets(b1, b2, &node.ball, slack) {
                continue;
            }
            match node.children {
                Some((a, b)) => {
                    stack.push(b);
                    stack.push(a);
                }
                None => {
                    for e in node.lo..node.hi {
                        if swept_ball_meets(b1, b2, &self.edges[e], slack) {
                            out.push(e);
                        }
                    }
                }
            }
        }
    }
}

// Conservative test: does ball `s` meet some ball centred at c1 + l D with
// radius (1 - l) r1 + l r2, l in [0, 1]? Points (1-l) a + l b with a, b in
// the two balls lie in those balls, so this covers the hull of two segments.
fn swept_ball_meets<T: Scalar>(b1: &Ball<T>, b2: &Ball<T>, s: &Ball<T>, slack: T) -> bool {
    let dvec = b2.c - b1.c;
    let w = s.c - b1.c;
    let f = |l: T| (w - dvec * l).norm() - (T::one() - l) * b1.r - l * b2.r - s.r - slack;
    let dn = dvec.norm();
    let sr = b1.r - b2.r;
    if dn <= sr.abs() + T::epsilon() {
        return f(T::zero()) <= T::zero() || f(T::one()) <= T::zero() || f(T::lit(0.5)) <= T::zero() || dn <= T::epsilon();
    }
    let l0 = w.dot(dvec) / (dn * dn);
    let delta = (w - dvec * l0).norm();
    let u = -sr * delta / (dn * (dn * dn - sr * sr).sqrt());
    let l = (l0 + u).max(T::zero()).min(T::one());
    f(l) <= T::zero() || f(T::zero()) <= T::zero() || f(T::one()) <= T::zero()
}

fn shares_vertex(n: usize, a: usize, b: usize) -> bool {
    a == b || (a + 1) % n == b || (b + 1) % n == a
}

/// All lines meeting the knot in at least four distinct points, found as
/// common transversals of edge quadruples.
pub fn quadrisecants<T: Scalar>(knot: &PolygonalKnot<T>) -> QuadrisecantReport<T> {
    quadrisecants_with(knot, &Tolerances::default())
}

pub fn quadrisecants_with<T: Scalar>(knot: &PolygonalKnot<T>, tol: &Tolerances) -> QuadrisecantReport<T> {
    let n = knot.len();
    let scale = knot.scale();
    let slack = scale * T::lit(tol.hit_slack);
    let tree = EdgeTree::new(knot);
    let lines: Vec<PluckerLine<T>> = (0..n)
        .map(|i| {
            let (a, b) = knot.edge(i);
            PluckerLine::through(a, b).expect("edges have positive length")
        })
        .collect();
    let on_edge = |l: &PluckerLine<T>, e: usize| {
        let (a, b) = knot.edge(e);
        l.segment_hit(a, b).1 <= slack
    };

    // The two outermost hits along a secant lie on edges i and j; the other
    // hits lie between them, inside the hull of those two edges.
    let per_i: Vec<(Vec<PluckerLine<T>>, usize, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut found = Vec::new();
            let (mut degenerate, mut tested) = (0, 0);
            let mut cand = Vec::new();
            for j in i + 1..n {
                if shares_vertex(n, i, j) {
                    continue;
                }
                cand.clear();
                tree.query(&tree.edges[i], &tree.edges[j], slack, &mut cand);
                cand.retain(|&k| !shares_vertex(n, k, i) && !shares_vertex(n, k, j));
                cand.sort_unstable();
                for (ka, &k) in cand.iter().enumerate() {
                    for &l in &cand[ka + 1..] {
                        if shares_vertex(n, k, l) {
                            continue;
                        }
                        tested += 1;
                        match transversals_of_four_lines([&lines[i], &lines[j], &lines[k], &lines[l]]) {
                            Ok(t) => {
                                for line in t.lines {
                                    if [i, j, k, l].iter().all(|&e| on_edge(&line, e)) {
                                        found.push(line.canonical());
                                    }
                                }
                            }
                            Err(_) => degenerate += 1,
                        }
                    }
                }
            }
            (found, degenerate, tested)
        })
        .collect();

    let mut raw: Vec<PluckerLine<T>> = Vec::new();
    let (mut degenerate_tuples, mut tuples_tested) = (0, 0);
    for (f, d, t) in per_i {
        raw.extend(f);
        degenerate_tuples += d;
        tuples_tested += t;
    }
    let raw_solutions = raw.len();
    let groups = dedup_lines(&raw, T::lit(tol.dedup_angle), scale * T::lit(tol.dedup_moment));
    let mut secants: Vec<SecantLine<T>> = groups
        .into_par_iter()
        .map(|(line, size)| {
            let mut s = SecantLine::through_with(knot, line, T::lit(tol.hit_slack));
            s.dedup_group_size = size;
            s
        })
        .filter(|s| s.hits.len() >= 4)
        .collect();
    secants.sort_by(|a, b| cmp_lines(&a.line, &b.line));
    QuadrisecantReport { secants, degenerate_tuples, tuples_tested, raw_solutions }
}

fn cmp_lines<T: Scalar>(a: &PluckerLine<T>, b: &PluckerLine<T>) -> std::cmp::Ordering {
    let ka = [a.d.x, a.d.y, a.d.z, a.m.x, a.m.y, a.m.z];
    let kb = [b.d.x, b.d.y, b.d.z, b.m.x, b.m.y, b.m.z];
    for (x, y) in ka.iter().zip(kb.iter()) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

// Single-linkage groups under (angle, moment distance); the representative
// is the member with the smallest lexicographic key.
fn dedup_lines<T: Scalar>(raw: &[PluckerLine<T>], max_angle: T, max_moment: T) -> Vec<(PluckerLine<T>, usize)> {
    let mut sorted: Vec<PluckerLine<T>> = raw.to_vec();
    sorted.sort_by(cmp_lines);
    let n = sorted.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for a in 0..n {
        for b in a + 1..n {
            if sorted[a].angle_to(&sorted[b]) < max_angle && sorted[a].moment_distance(&sorted[b]) < max_moment {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut sizes = vec![0usize; n];
    for a in 0..n {
        let r = find(&mut parent, a);
        sizes[r] += 1;
    }
    (0..n).filter(|&a| parent[a] == a).map(|a| (sorted[a], sizes[a])).collect()
}

/// Common real roots of `x(t)` and `y(t)` in `[0, 1)`: the parameters where
/// the curve meets the z-axis. Computed exactly via the polynomial GCD.
pub fn common_axis_roots<T: Scalar>(knot: &ParametricKnot<T>) -> Result<Vec<IsolatedRoot>, SecantError> {
    if knot.kind() != CurveKind::Polynomial {
        return Err(SecantError::NotPolynomial);
    }
    let [x, y, _] = knot.polynomials().ok_or(SecantError::NotPolynomial)?;
    let g = if x.is_zero() {
        y.monic()
    } else if y.is_zero() {
        x.monic()
    } else {
        x.gcd(y)
    };
    let lo: BigRational = rat(0, 1);
    let hi: BigRational = rat(1, 1);
    Ok(g.real_roots_in(&lo, &hi, 1e-13))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairEvidence {
    /// The fan spanning chord and arc is pierced by the rest of the knot.
    Pierced,
    /// No piercing found: the chord and arc may bound an embedded disk.
    Unpierced,
    /// The two hits are not consecutive along the knot, so no single arc
    /// of the knot minus the line joins them.
    NoDirectArc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nontrivial,
    SuspectTrivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NontrivialityCertificate<T> {
    pub secant: SecantLine<T>,
    pub verdict: Verdict,
    /// One entry per pair of hits adjacent along the line.
    pub evidence: Vec<((usize, usize), PairEvidence)>,
}

impl<T: Scalar> NontrivialityCertificate<T> {
    pub fn is_consistent(&self) -> bool {
        let any_unpierced = self.evidence.iter().any(|(_, e)| *e == PairEvidence::Unpierced);
        (self.verdict == Verdict::SuspectTrivial) == any_unpierced
            && self.evidence.len() + 1 == self.secant.hits.len()
    }
}

/// Heuristic screen for topological nontriviality of a secant.
///
/// For each pair of hits adjacent along the line and joined by an arc of the
/// knot with no other hit, the fan from the chord midpoint over that arc is
/// tested against the rest of the knot. A clear fan marks the secant as
/// suspect. This only inspects one spanning disk; it does not decide the
/// condition, which quantifies over all of them.
pub fn nontriviality_screen<T: Scalar>(
    knot: &PolygonalKnot<T>,
    secant: &SecantLine<T>,
) -> Result<NontrivialityCertificate<T>, SecantError> {
    let hits = &secant.hits;
    if hits.len() < 4 {
        return Err(SecantError::TooFewHits(hits.len()));
    }
    let pos = |h: &Hit<T>| h.edge as f64 + h.t_on_edge.to_f64_lossy();
    let mut order: Vec<usize> = (0..hits.len()).collect();
    order.sort_by(|&a, &b| pos(&hits[a]).total_cmp(&pos(&hits[b])));
    let m = order.len();
    let rank_of = |h: usize| order.iter().position(|&o| o == h).expect("hit is ordered");

    let mut evidence = Vec::new();
    for a in 0..hits.len() - 1 {
        let b = a + 1;
        let (ra, rb) = (rank_of(a), rank_of(b));
        // Forward arc along the knot from the earlier hit to the later.
        let (from, to) = if (ra + 1) % m == rb {
            (a, b)
        } else if (rb + 1) % m == ra {
            (b, a)
        } else {
            evidence.push(((a, b), PairEvidence::NoDirectArc));
            continue;
        };
        let arc = walk(knot, &hits[from], &hits[to]);
        let rest = walk(knot, &hits[to], &hits[from]);
        let apex = hits[a].point.lerp(hits[b].point, T::lit(0.5));
        let clear = arc.len() < 2 || fan_is_clear(apex, &arc, &rest, knot.scale());
        evidence.push(((a, b), if clear { PairEvidence::Unpierced } else { PairEvidence::Pierced }));
    }
    let verdict = if evidence.iter().any(|(_, e)| *e == PairEvidence::Unpierced) {
        Verdict::SuspectTrivial
    } else {
        Verdict::Nontrivial
    };
    Ok(NontrivialityCertificate { secant: secant.clone(), verdict, evidence })
}

// Polyline along the knot from hit `a` forward to hit `b`.
fn walk<T: Scalar>(knot: &PolygonalKnot<T>, a: &Hit<T>, b: &Hit<T>) -> Vec<Vec3<T>> {
    let n = knot.len();
    let mut pts = vec![a.point];
    let same_edge_ahead = a.edge == b.edge && b.t_on_edge >= a.t_on_edge;
    if !same_edge_ahead {
        let mut e = a.edge;
        loop {
            e = (e + 1) % n;
            pts.push(knot.vertex(e));
            if e == b.edge {
                break;
            }
        }
    }
    pts.push(b.point);
    pts.dedup_by(|x, y| x.distance(*y) <= knot.scale() * T::lit(1e-12));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(p: [f64; 3], d: [f64; 3]) -> PluckerLine<f64> {
        PluckerLine::from_point_dir(Vec3::from(p), Vec3::from(d)).unwrap()
    }

    #[test]
    fn plucker_basics() {
        let l = line([1.0, 2.0, 3.0], [0.0, 0.0, 2.0]);
        assert!(l.klein().abs() < 1e-15);
        assert!((l.distance_to_point(Vec3::from_f64(1.0, 2.0, -7.0))).abs() < 1e-15);
        let meets = line([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert!(l.reciprocal(&meets).abs() < 1e-15);
        let skew = line([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
        assert!(l.reciprocal(&skew).abs() > 1.0);
    }

    #[test]
    fn concurrent_lines_are_degenerate() {
        let ls = [
            line([0.0; 3], [1.0, 0.2, 0.1]),
            line([0.0; 3], [0.1, 1.0, -0.3]),
            line([0.0; 3], [-0.4, 0.3, 1.0]),
            line([0.0; 3], [0.7, -0.5, 0.2]),
        ];
        assert_eq!(transversals_of_four_lines([&ls[0], &ls[1], &ls[2], &ls[3]]), Err(SecantError::Degenerate));
    }

    #[test]
    fn parallel_lines() {
        let d = [0.0, 0.0, 1.0];
        let ls = [line([0.0, 0.0, 0.0], d), line([1.0, 0.0, 0.0], d), line([0.0, 1.0, 0.0], d), line([2.0, 3.0, 0.0], d)];
        let t = transversals_of_four_lines([&ls[0], &ls[1], &ls[2], &ls[3]]).unwrap();
        assert!(t.lines.is_empty());
        let flat = [line([0.0, 0.0, 0.0], d), line([1.0, 0.0, 0.0], d), line([2.0, 0.0, 0.0], d), line([5.0, 0.0, 0.0], d)];
        assert_eq!(transversals_of_four_lines([&flat[0], &flat[1], &flat[2], &flat[3]]), Err(SecantError::Degenerate));
    }

    #[test]
    fn transversals_satisfy_incidence() {
        let ls = [
            line([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
            line([0.0, 1.0, 1.0], [0.0, 0.0, 1.0]),
            line([1.0, 1.0, 0.0], [0.0, 1.0, 0.0]),
            line([0.3, -0.2, 0.9], [0.5, 0.7, 0.2]),
        ];
        let t = transversals_of_four_lines([&ls[0], &ls[1], &ls[2], &ls[3]]).unwrap();
        assert_eq!(t.lines.len(), 2);
        for s in &t.lines {
            assert!(s.klein().abs() < 1e-10);
            for l in &ls {
                assert!(s.reciprocal(l).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn swept_ball_test_is_conservative() {
        let b1 = Ball { c: Vec3::<f64>::from_f64(0.0, 0.0, 0.0), r: 0.5 };
        let b2 = Ball { c: Vec3::from_f64(10.0, 0.0, 0.0), r: 0.1 };
        assert!(swept_ball_meets(&b1, &b2, &Ball { c: Vec3::from_f64(5.0, 0.3, 0.0), r: 0.01 }, 0.0));
        assert!(!swept_ball_meets(&b1, &b2, &Ball { c: Vec3::from_f64(5.0, 0.5, 0.0), r: 0.01 }, 0.0));
        assert!(!swept_ball_meets(&b1, &b2, &Ball { c: Vec3::from_f64(11.0, 0.0, 0.0), r: 0.5 }, 0.0));
    }
}
