//! Directional bridge counts `b_v(K)`, their extremes over the sphere, total
//! curvature and the torus-knot superbridge formula.
//!
//! Sphere searches only sample directions. The reported minimum is therefore
//! an upper bound on the bridge number `b(K) = min_v b_v(K)`, and the reported
//! maximum is a lower bound on the superbridge number `s(K) = max_v b_v(K)`.
//! Neither of the knot-type invariants `b[K]`, `s[K]` is computed.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{ParametricKnot, PolygonalKnot};
use crate::geom::Vec3;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DirectionalError {
    #[error("NonGenericDirection: edge {edge} is level; plateau-merged count is {plateau_count}")]
    NonGenericDirection { edge: usize, plateau_count: usize },
    #[error("SuspectGrid: grid cell {cell} of {grid} may hide two critical points")]
    SuspectGrid { cell: usize, grid: usize },
    #[error("DegenerateAngle: edges meeting at vertex {vertex} are anti-parallel")]
    DegenerateAngle { vertex: usize },
    #[error("InvalidTorusType: ({p}, {q})")]
    InvalidTorusType { p: i64, q: i64 },
    #[error("ZeroDirection: direction vector has zero length")]
    ZeroDirection,
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
}

/// Unit vector on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[T; 3]", try_from = "[T; 3]")]
pub struct Direction<T: Scalar> {
    v: Vec3<T>,
}

impl<T: Scalar> From<Direction<T>> for [T; 3] {
    fn from(d: Direction<T>) -> Self {
        d.v.to_array()
    }
}

impl<T: Scalar> TryFrom<[T; 3]> for Direction<T> {
    type Error = DirectionalError;
    fn try_from(a: [T; 3]) -> Result<Self, Self::Error> {
        Direction::new(Vec3::from(a))
    }
}

impl<T: Scalar> Direction<T> {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: Vec3<T>) -> Result<Self, DirectionalError> {
        v.normalized().map(|v| Direction { v }).ok_or(DirectionalError::ZeroDirection)
    }

    pub fn from_f64(x: f64, y: f64, z: f64) -> Result<Self, DirectionalError> {
        Self::new(Vec3::from_f64(x, y, z))
    }

    pub fn z() -> Self {
        Direction { v: Vec3::from_f64(0.0, 0.0, 1.0) }
    }

    pub fn vector(&self) -> Vec3<T> {
        self.v
    }

    pub fn neg(&self) -> Self {
        Direction { v: -self.v }
    }

    pub fn angle_to(&self, o: &Self) -> T {
        self.v.cross(o.v).norm().atan2(self.v.dot(o.v))
    }
}

/// Where a local-maximum component sits on the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    /// Cyclic run of vertex indices `first..=last` at one maximal height.
    Vertices { first: usize, last: usize },
    /// Curve parameter of a smooth maximum.
    Parameter(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeCount<T: Scalar> {
    pub value: usize,
    pub direction: Direction<T>,
    pub generic: bool,
    pub witnesses: Vec<Witness>,
}

/// Anything whose height function can be counted in a direction.
pub trait HeightCurve<T: Scalar>: Sync {
    fn count_maxima(&self, v: &Direction<T>) -> Result<BridgeCount<T>, DirectionalError>;
}

/// `b_v` of a polygon: local-maximum components of the cyclic vertex
/// heights, with runs of level edges merged into one component.
pub fn bridge_count_polygonal<T: Scalar>(
    knot: &PolygonalKnot<T>,
    v: &Direction<T>,
) -> Result<BridgeCount<T>, DirectionalError> {
    bridge_count_polygonal_with(knot, v, 1e-12)
}

pub fn bridge_count_polygonal_with<T: Scalar>(
    knot: &PolygonalKnot<T>,
    v: &Direction<T>,
    eps_level: f64,
) -> Result<BridgeCount<T>, DirectionalError> {
    let h: Vec<T> = knot.vertices().iter().map(|p| p.dot(v.vector())).collect();
    let (lo, hi) = h.iter().fold((T::infinity(), T::neg_infinity()), |(l, u), &x| (l.min(x), u.max(x)));
    let eps = (hi - lo) * T::lit(eps_level);
    let n = h.len();
    let level = |i: usize| (h[i] - h[(i + 1) % n]).abs() <= eps;
    let first_level = (0..n).find(|&i| level(i));
    let witnesses = plateau_maxima(&h, &level);
    let count = BridgeCount { value: witnesses.len(), direction: *v, generic: first_level.is_none(), witnesses };
    match first_level {
        Some(edge) => Err(DirectionalError::NonGenericDirection { edge, plateau_count: count.value }),
        None => Ok(count),
    }
}

fn plateau_maxima<T: Scalar>(h: &[T], level: &impl Fn(usize) -> bool) -> Vec<Witness> {
    let n = h.len();
    if (0..n).all(level) {
        return vec![Witness::Vertices { first: 0, last: n - 1 }];
    }
    // Start just after a non-level edge so no run wraps past the start.
    let start = (0..n).find(|&i| !level(i)).expect("some edge is not level") + 1;
    let mut runs: Vec<(usize, usize, T)> = Vec::new();
    let mut k = 0;
    while k < n {
        let first = (start + k) % n;
        let mut last = first;
        while level(last) && k + 1 < n {
            k += 1;
            last = (start + k) % n;
        }
        runs.push((first, last, h[first]));
        k += 1;
    }
    let m = runs.len();
    (0..m)
        .filter(|&i| {
            let prev = runs[(i + m - 1) % m].2;
            let next = runs[(i + 1) % m].2;
            runs[i].2 > prev && runs[i].2 > next
        })
        .map(|i| Witness::Vertices { first: runs[i].0, last: runs[i].1 })
        .collect()
}

impl<T: Scalar> HeightCurve<T> for PolygonalKnot<T> {
    fn count_maxima(&self, v: &Direction<T>) -> Result<BridgeCount<T>, DirectionalError> {
        bridge_count_polygonal(self, v)
    }
}

/// First and second derivatives of a parametric knot on a uniform grid,
/// shared by all directions. Entry `grid` holds the left limits at the end
/// of the domain.
#[derive(Debug)]
pub struct SmoothProfile<'a, T: Scalar> {
    knot: &'a ParametricKnot<T>,
    grid: usize,
    d1: Vec<Vec3<T>>,
    d2: Vec<Vec3<T>>,
    finer: OnceLock<Box<SmoothProfile<'a, T>>>,
    retries: usize,
}

impl<'a, T: Scalar> SmoothProfile<'a, T> {
    pub fn new(knot: &'a ParametricKnot<T>, grid: usize) -> Result<Self, DirectionalError> {
        if grid < 64 {
            return Err(DirectionalError::InvalidArgument(format!("grid {grid} < 64")));
        }
        Ok(Self::build(knot, grid, 0))
    }

    /// Like [`Self::new`] but [`HeightCurve::count_maxima`] resolves
    /// suspect cells by doubling the grid up to `retries` times.
    pub fn with_retries(knot: &'a ParametricKnot<T>, grid: usize, retries: usize) -> Result<Self, DirectionalError> {
        let mut p = Self::new(knot, grid)?;
        p.retries = retries;
        Ok(p)
    }

    fn build(knot: &'a ParametricKnot<T>, grid: usize, retries: usize) -> Self {
        let period = knot.period();
        let step = period / T::lit(grid as f64);
        let (mut d1, mut d2): (Vec<_>, Vec<_>) = (0..grid)
            .into_par_iter()
            .map(|i| {
                let t = step * T::lit(i as f64);
                (knot.derivative(t), knot.second_derivative(t))
            })
            .unzip();
        let (e1, e2) = knot.derivatives_end();
        d1.push(e1);
        d2.push(e2);
        SmoothProfile { knot, grid, d1, d2, finer: OnceLock::new(), retries }
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    fn t_at(&self, i: usize) -> T {
        self.knot.period() * T::lit(i as f64 / self.grid as f64)
    }

    /// Counts maxima; witnesses are refined to `1e-10` in `t` when `refine`.
    pub fn count(&self, v: &Direction<T>, refine: bool) -> Result<BridgeCount<T>, DirectionalError> {
        let n = self.grid;
        let w = v.vector();
        let g: Vec<T> = self.d1.iter().map(|d| d.dot(w)).collect();
        let gmax = g.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        if gmax == T::zero() {
            return Err(DirectionalError::NonGenericDirection { edge: 0, plateau_count: 1 });
        }
        let tiny = gmax * T::epsilon() * T::lit(4.0);
        let sign = |x: T| if x > tiny { 1i8 } else if x < -tiny { -1 } else { 0 };

        // Hidden pairs of roots inside a cell without a sign change.
        for i in 0..n {
            let (a, b) = (sign(g[i]), sign(g[i + 1]));
            if a == 0 || a != b {
                continue;
            }
            let (pa, pb) = (self.d2[i].dot(w), self.d2[i + 1].dot(w));
            let interior_min = pa < T::zero() && pb > T::zero();
            let interior_max = pa > T::zero() && pb < T::zero();
            if (a > 0 && interior_min) || (a < 0 && interior_max) {
                let t = self.bisect(i, |t| self.knot.second_derivative(t).dot(w), pa);
                let gv = self.knot.derivative(t).dot(w);
                if sign(gv) == -a {
                    return Err(DirectionalError::SuspectGrid { cell: i, grid: n });
                }
            }
        }

        // Cyclic sign sequence: points 0..n, where point n is the left limit
        // at the seam and point 0 the right limit.
        let nz: Vec<usize> = (0..=n).filter(|&i| sign(g[i]) != 0).collect();
        let mut witnesses = Vec::new();
        let m = nz.len();
        for k in 0..m {
            let (i, j) = (nz[k], nz[(k + 1) % m]);
            if sign(g[i]) > 0 && sign(g[j]) < 0 {
                let t = if i == n && j == 0 {
                    0.0
                } else if refine {
                    self.refine_root(i, j, w).to_f64_lossy()
                } else {
                    self.t_at(i).to_f64_lossy()
                };
                witnesses.push(Witness::Parameter(t));
            }
        }
        witnesses.sort_by(|a, b| match (a, b) {
            (Witness::Parameter(x), Witness::Parameter(y)) => x.total_cmp(y),
            _ => std::cmp::Ordering::Equal,
        });
        Ok(BridgeCount { value: witnesses.len(), direction: *v, generic: true, witnesses })
    }

    fn bisect(&self, cell: usize, f: impl Fn(T) -> T, fa: T) -> T {
        let (mut a, mut b) = (self.t_at(cell), self.t_at(cell + 1));
        let sa = fa > T::zero();
        for _ in 0..40 {
            let mid = (a + b) / T::lit(2.0);
            if (f(mid) > T::zero()) == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        (a + b) / T::lit(2.0)
    }

    // Root of g between grid points i < j (j may wrap to a smaller index).
    fn refine_root(&self, i: usize, j: usize, w: Vec3<T>) -> T {
        let period = self.knot.period();
        let mut a = self.t_at(i);
        let mut b = self.t_at(j);
        if b <= a {
            b = b + period;
        }
        let tol = T::lit(1e-10).max(T::epsilon() * period * T::lit(8.0));
        while b - a > tol {
            let mid = (a + b) / T::lit(2.0);
            let gm = self.knot.derivative(mid).dot(w);
            if gm > T::zero() {
                a = mid;
            } else if gm < T::zero() {
                b = mid;
            } else {
                a = mid;
                b = mid;
            }
        }
        let t = (a + b) / T::lit(2.0);
        if t >= period {
            t - period
        } else {
            t
        }
    }

    fn finer(&self) -> &SmoothProfile<'a, T> {
        self.finer.get_or_init(|| Box::new(Self::build(self.knot, self.grid * 2, self.retries.saturating_sub(1))))
    }
}

impl<T: Scalar> HeightCurve<T> for SmoothProfile<'_, T> {
    fn count_maxima(&self, v: &Direction<T>) -> Result<BridgeCount<T>, DirectionalError> {
        match self.count(v, false) {
            Err(DirectionalError::SuspectGrid { .. }) if self.retries > 0 => self.finer().count_maxima(v),
            r => r,
        }
    }
}

/// `b_v` of a parametric knot from sign changes of `d/dt <K(t), v>`.
pub fn bridge_count_smooth<T: Scalar>(
    knot: &ParametricKnot<T>,
    v: &Direction<T>,
    grid: usize,
) -> Result<BridgeCount<T>, DirectionalError> {
    SmoothProfile::new(knot, grid)?.count(v, true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Min,
    Max,
}

impl std::str::FromStr for SearchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "min" => Ok(SearchMode::Min),
            "max" => Ok(SearchMode::Max),
            _ => Err(format!("mode must be min or max, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereSearchReport<T: Scalar> {
    pub mode: SearchMode,
    pub samples: usize,
    pub best_value: usize,
    pub best_direction: Direction<T>,
    pub histogram: BTreeMap<usize, usize>,
    /// Fraction of sampled directions that were generic without jitter.
    pub generic_fraction: f64,
    /// Which side of the sphere extremum the estimate bounds.
    pub bound: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchOptions {
    /// Re-sample 1000 directions within 0.05 rad of the incumbent.
    pub refine: bool,
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Point `i` of the `n`-point Fibonacci lattice on the unit sphere.
pub fn fibonacci_direction<T: Scalar>(i: usize, n: usize) -> Direction<T> {
    let z = 1.0 - (2 * i + 1) as f64 / n as f64;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = GOLDEN_ANGLE * i as f64;
    Direction { v: Vec3::from_f64(r * phi.cos(), r * phi.sin(), z) }
}

// Rotates `v` by less than `max_angle` in a direction fixed by the stream.
fn jitter<T: Scalar>(v: &Direction<T>, rng: &mut ChaCha8Rng, max_angle: f64) -> Direction<T> {
    let w = v.vector().cast::<f64>();
    loop {
        let u = Vec3::from_f64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let perp = u - w * u.dot(w);
        if let Some(p) = perp.normalized() {
            let a = max_angle * rng.gen_range(0.1..0.99);
            let out = w * a.cos() + p * a.sin();
            return Direction { v: out.cast() };
        }
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Evaluates the count at `v`, jittering non-generic directions by less than
/// `1e-6` rad (up to 16 attempts). Returns the count and whether `v` itself
/// was generic.
pub fn count_with_jitter<T: Scalar, C: HeightCurve<T> + ?Sized>(
    curve: &C,
    v: &Direction<T>,
    seed: u64,
    index: u64,
) -> Result<(BridgeCount<T>, bool), DirectionalError> {
    match curve.count_maxima(v) {
        Ok(c) => return Ok((c, true)),
        Err(DirectionalError::NonGenericDirection { .. }) => {}
        Err(e) => return Err(e),
    }
    let mut rng = stream(seed, index);
    let mut last = None;
    for _ in 0..16 {
        let u = jitter(v, &mut rng, 1e-6);
        match curve.count_maxima(&u) {
            Ok(c) => return Ok((c, false)),
            Err(e @ DirectionalError::NonGenericDirection { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Extremal `b_v` over an `n_samples`-point Fibonacci lattice.
pub fn sphere_search<T: Scalar, C: HeightCurve<T> + ?Sized>(
    curve: &C,
    mode: SearchMode,
    n_samples: usize,
    seed: u64,
    opts: SearchOptions,
) -> Result<SphereSearchReport<T>, DirectionalError> {
    if n_samples < 12 {
        return Err(DirectionalError::InvalidArgument(format!("n_samples {n_samples} < 12")));
    }
    let results: Vec<(usize, Direction<T>, bool)> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let v = fibonacci_direction(i, n_samples);
            count_with_jitter(curve, &v, seed, i as u64).map(|(c, g)| (c.value, c.direction, g))
        })
        .collect::<Result<_, _>>()?;
    let better = |a: usize, b: usize| match mode {
        SearchMode::Min => a < b,
        SearchMode::Max => a > b,
    };
    let mut histogram = BTreeMap::new();
    let mut best = (results[0].0, results[0].1);
    let mut generic = 0usize;
    for &(val, dir, g) in &results {
        *histogram.entry(val).or_insert(0) += 1;
        generic += g as usize;
        if better(val, best.0) {
            best = (val, dir);
        }
    }
    let mut samples = n_samples;
    if opts.refine {
        let extra = cap_directions(&best.1, 0.05, 1000);
        let more: Vec<(usize, Direction<T>, bool)> = extra
            .par_iter()
            .enumerate()
            .map(|(k, v)| {
                count_with_jitter(curve, v, seed, (n_samples + k) as u64).map(|(c, g)| (c.value, c.direction, g))
            })
            .collect::<Result<_, _>>()?;
        for &(val, dir, g) in &more {
            *histogram.entry(val).or_insert(0) += 1;
            generic += g as usize;
            if better(val, best.0) {
                best = (val, dir);
            }
        }
        samples += more.len();
    }
    let bound = match mode {
        SearchMode::Min => "upper bound on the bridge number b(K)",
        SearchMode::Max => "lower bound on the superbridge number s(K)",
    };
    Ok(SphereSearchReport {
        mode,
        samples,
        best_value: best.0,
        best_direction: best.1,
        histogram,
        generic_fraction: generic as f64 / samples as f64,
        bound: bound.to_string(),
    })
}

/// `m` directions spread over the cap of angular radius `radius` around `c`.
fn cap_directions<T: Scalar>(c: &Direction<T>, radius: f64, m: usize) -> Vec<Direction<T>> {
    let axis = c.vector().cast::<f64>();
    let helper = if axis.x.abs() < 0.9 { Vec3::from_f64(1.0, 0.0, 0.0) } else { Vec3::from_f64(0.0, 1.0, 0.0) };
    let e1 = (helper - axis * helper.dot(axis)).normalized().expect("helper not parallel");
    let e2 = axis.cross(e1);
    let h = 1.0 - radius.cos();
    (0..m)
        .map(|i| {
            let z = 1.0 - h * (i as f64 + 0.5) / m as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = GOLDEN_ANGLE * i as f64;
            let v = axis * z + e1 * (r * phi.cos()) + e2 * (r * phi.sin());
            Direction { v: v.cast() }
        })
        .collect()
}

/// Sum of exterior angles, each in `[0, pi]`.
pub fn total_curvature<T: Scalar>(knot: &PolygonalKnot<T>) -> Result<T, DirectionalError> {
    let n = knot.len();
    let mut total = T::zero();
    for i in 0..n {
        let a = knot.vertex(i) - knot.vertex(i + n - 1);
        let b = knot.vertex(i + 1) - knot.vertex(i);
        let cross = a.cross(b).norm();
        let dot = a.dot(b);
        if dot < T::zero() && cross <= T::lit(1e-12) * a.norm() * b.norm() {
            return Err(DirectionalError::DegenerateAngle { vertex: i });
        }
        total = total + cross.atan2(dot);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilnorCheck {
    pub avg_bv: f64,
    pub curvature_over_2pi: f64,
    pub discrepancy: f64,
    pub samples: usize,
}

/// Directions uniform on the sphere, from a seeded stream.
pub fn random_directions<T: Scalar>(n: usize, seed: u64) -> Vec<Direction<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (1.0 - z * z).sqrt();
            Direction { v: Vec3::from_f64(r * phi.cos(), r * phi.sin(), z) }
        })
        .collect()
}

/// Compares the sphere average of `b_v` with total curvature over `2pi`.
pub fn milnor_average_check<T: Scalar>(
    knot: &PolygonalKnot<T>,
    n_samples: usize,
    seed: u64,
) -> Result<MilnorCheck, DirectionalError> {
    let kappa = total_curvature(knot)?.to_f64_lossy();
    if n_samples == 0 {
        return Err(DirectionalError::InvalidArgument("n_samples must be positive".into()));
    }
    let dirs = random_directions::<T>(n_samples, seed);
    let sum: usize = dirs
        .par_iter()
        .enumerate()
        .map(|(i, v)| count_with_jitter(knot, v, seed ^ 0x9e37_79b9, i as u64).map(|(c, _)| c.value))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();
    let avg = sum as f64 / n_samples as f64;
    let c = kappa / std::f64::consts::TAU;
    Ok(MilnorCheck { avg_bv: avg, curvature_over_2pi: c, discrepancy: (avg - c).abs(), samples: n_samples })
}

/// Superbridge index `min(2p, q)` of the `(p, q)` torus knot.
pub fn torus_superbridge_index(p: i64, q: i64) -> Result<i64, DirectionalError> {
    if p < 2 || q <= p || p.gcd(&q) != 1 {
        return Err(DirectionalError::InvalidTorusType { p, q });
    }
    Ok((2 * p).min(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{sample_polygon, torus_curve, SampleMode, TorusKnotSpec};
    use crate::fixtures;

    #[test]
    fn square_counts() {
        let sq = fixtures::square::<f64>();
        let e = bridge_count_polygonal(&sq, &Direction::from_f64(1.0, 0.0, 0.0).unwrap());
        assert!(matches!(e, Err(DirectionalError::NonGenericDirection { plateau_count: 1, .. })));
        let c = bridge_count_polygonal(&sq, &Direction::from_f64(1.0, 2.0, 0.0).unwrap()).unwrap();
        assert_eq!(c.value, 1);
        assert!(c.generic);
    }

    #[test]
    fn plateau_merges_into_one_component() {
        // Two vertices at the top joined by a level edge.
        let k = PolygonalKnot::<f64>::from_f64(&[[0., 0., 0.], [1., 0., 1.], [2., 0., 1.], [3., 0., 0.], [1.5, 1., -1.]])
            .unwrap();
        match bridge_count_polygonal(&k, &Direction::z()) {
            Err(DirectionalError::NonGenericDirection { plateau_count, edge }) => {
                assert_eq!((plateau_count, edge), (1, 1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn torus_polygon_z_count_is_q() {
        let k = torus_curve::<f64>(&TorusKnotSpec::new(2, 3, 2.0, 1.0).unwrap());
        let poly = sample_polygon(&k, 2000, SampleMode::Uniform).unwrap();
        let v = Direction::from_f64(1e-7, 2e-7, 1.0).unwrap();
        assert_eq!(bridge_count_polygonal(&poly, &v).unwrap().value, 3);
    }

    #[test]
    fn smooth_counts_match_harmonics() {
        let c = fixtures::unit_circle::<f64>();
        let v = Direction::from_f64(0.3, -0.2, 0.5).unwrap();
        assert_eq!(bridge_count_smooth(&c, &v, 64).unwrap().value, 1);
        let k = torus_curve::<f64>(&TorusKnotSpec::new(2, 5, 2.0, 1.0).unwrap());
        let b = bridge_count_smooth(&k, &Direction::z(), 256).unwrap();
        assert_eq!(b.value, 5);
        for w in &b.witnesses {
            let Witness::Parameter(t) = *w else { panic!() };
            // maxima of sin 5t
            let frac = (t * 5.0 - std::f64::consts::FRAC_PI_2) / std::f64::consts::TAU;
            assert!((frac - frac.round()).abs() < 1e-9, "{t}");
        }
    }

    #[test]
    fn coarse_grid_is_flagged() {
        // z = sin t + 0.2 sin 40 t has 40 wiggles; 64 cells cannot resolve them
        // everywhere, and the anomaly must be reported rather than miscounted.
        use crate::curves::TrigSeries;
        use crate::exact::rat;
        let mut sin_z = vec![rat(0, 1); 40];
        sin_z[0] = rat(1, 1);
        sin_z[39] = rat(1, 5);
        let mut cx = vec![rat(0, 1); 40];
        cx[0] = rat(1, 1);
        let zeros = vec![rat(0, 1); 40];
        let k = ParametricKnot::<f64>::trigonometric(
            TrigSeries { a0: rat(0, 1), cos: cx, sin: zeros.clone() },
            TrigSeries { a0: rat(0, 1), cos: zeros.clone(), sin: {
                let mut s = zeros.clone();
                s[0] = rat(1, 1);
                s
            } },
            TrigSeries { a0: rat(0, 1), cos: zeros.clone(), sin: sin_z },
        )
        .unwrap();
        let r = bridge_count_smooth(&k, &Direction::z(), 64);
        assert!(matches!(r, Err(DirectionalError::SuspectGrid { .. })), "{r:?}");
        let fine = bridge_count_smooth(&k, &Direction::z(), 4096).unwrap();
        assert_eq!(fine.value, 40);
    }

    #[test]
    fn fibonacci_lattice_is_unit_and_deterministic() {
        for i in 0..100 {
            let d: Direction<f64> = fibonacci_direction(i, 100);
            assert!((d.vector().norm() - 1.0).abs() < 1e-12);
            assert_eq!(d, fibonacci_direction(i, 100));
        }
    }

    #[test]
    fn curvature_of_regular_polygons() {
        for n in [3, 4, 7, 50] {
            let k = fixtures::regular_polygon::<f64>(n);
            assert!((total_curvature(&k).unwrap() - std::f64::consts::TAU).abs() < 1e-12);
        }
        let back = PolygonalKnot::<f64>::synthetic(vec![
            Vec3::from_f64(0., 0., 0.),
            Vec3::from_f64(1., 0., 0.),
            Vec3::from_f64(2., 0., 0.),
        ])
        .unwrap();
        assert!(matches!(total_curvature(&back), Err(DirectionalError::DegenerateAngle { .. })));
    }

    #[test]
    fn torus_formula() {
        assert_eq!(torus_superbridge_index(2, 3), Ok(3));
        assert_eq!(torus_superbridge_index(3, 5), Ok(5));
        assert!(torus_superbridge_index(2, 4).is_err());
        assert!(torus_superbridge_index(1, 4).is_err());
    }
}
