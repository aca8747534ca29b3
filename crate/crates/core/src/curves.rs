//! Closed space curves: trigonometric and polynomial parametrizations with
//! exact rational coefficients, and the polygons sampled from them.

use std::path::Path;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{format_rational, parse_rational, rational_from_f64, rational_to_f64, RationalPoly};
use crate::geom::{bbox_diagonal, segment_distance, segment_touches_triangle, Vec3};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("DegenerateSample: samples {index} and {next} coincide")]
    DegenerateSample { index: usize, next: usize },
    #[error("DegeneratePolygon: {0}")]
    DegeneratePolygon(String),
    #[error("NotSimple: edges {0} and {1} come within {2:e}")]
    NotSimple(usize, usize, f64),
    #[error("InvalidTorusType: ({p}, {q})")]
    InvalidTorusType { p: i64, q: i64 },
    #[error("InvalidSubarc: {0}")]
    InvalidSubarc(String),
    #[error("InvalidCurve: {0}")]
    InvalidCurve(String),
    #[error("Io: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Trigonometric,
    Polynomial,
}

/// `a0 + sum_k cos[k-1] cos(k t) + sin[k-1] sin(k t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrigSeries {
    pub a0: BigRational,
    pub cos: Vec<BigRational>,
    pub sin: Vec<BigRational>,
}

impl TrigSeries {
    fn degree(&self) -> usize {
        let last = |v: &[BigRational]| v.iter().rposition(|c| !c.is_zero()).map_or(0, |i| i + 1);
        last(&self.cos).max(last(&self.sin))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coordinate {
    Trig(TrigSeries),
    Poly(RationalPoly),
}

/// Closed curve `t -> (x(t), y(t), z(t))` on `[0, 2pi)` (trigonometric) or
/// `[0, 1)` (polynomial). Coefficients are kept exact; trigonometric terms
/// are evaluated in `T`, polynomials by exact Horner then rounded once.
#[derive(Debug, Clone)]
pub struct ParametricKnot<T> {
    kind: CurveKind,
    coords: [Coordinate; 3],
    trig: Option<[(T, Vec<T>, Vec<T>); 3]>,
    deriv: Option<[RationalPoly; 3]>,
    deriv2: Option<[RationalPoly; 3]>,
}

impl<T: Scalar> ParametricKnot<T> {
    pub fn trigonometric(x: TrigSeries, y: TrigSeries, z: TrigSeries) -> Result<Self, CurveError> {
        let coords = [Coordinate::Trig(x), Coordinate::Trig(y), Coordinate::Trig(z)];
        let knot = Self::build(CurveKind::Trigonometric, coords);
        if knot.harmonic_degree() == 0 {
            return Err(CurveError::InvalidCurve("harmonic degree must be at least 1".into()));
        }
        Ok(knot)
    }

    pub fn polynomial(x: RationalPoly, y: RationalPoly, z: RationalPoly) -> Result<Self, CurveError> {
        let coords = [Coordinate::Poly(x), Coordinate::Poly(y), Coordinate::Poly(z)];
        let knot = Self::build(CurveKind::Polynomial, coords);
        if knot.coords.iter().all(|c| matches!(c, Coordinate::Poly(p) if p.degree().unwrap_or(0) == 0)) {
            return Err(CurveError::InvalidCurve("constant polynomial curve".into()));
        }
        Ok(knot)
    }

    fn build(kind: CurveKind, coords: [Coordinate; 3]) -> Self {
        let lit = |r: &BigRational| T::lit(rational_to_f64(r));
        let trig = match kind {
            CurveKind::Trigonometric => Some(coords.clone().map(|c| match c {
                Coordinate::Trig(s) => {
                    (lit(&s.a0), s.cos.iter().map(lit).collect(), s.sin.iter().map(lit).collect())
                }
                Coordinate::Poly(_) => unreachable!(),
            })),
            CurveKind::Polynomial => None,
        };
        let polys = match kind {
            CurveKind::Polynomial => Some(coords.clone().map(|c| match c {
                Coordinate::Poly(p) => p,
                Coordinate::Trig(_) => unreachable!(),
            })),
            CurveKind::Trigonometric => None,
        };
        let deriv = polys.as_ref().map(|ps| ps.clone().map(|p| p.derivative()));
        let deriv2 = deriv.as_ref().map(|ps| ps.clone().map(|p| p.derivative()));
        ParametricKnot { kind, coords, trig, deriv, deriv2 }
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn coordinates(&self) -> &[Coordinate; 3] {
        &self.coords
    }

    /// Polynomial coordinates, `None` for the trigonometric kind.
    pub fn polynomials(&self) -> Option<[&RationalPoly; 3]> {
        match &self.coords {
            [Coordinate::Poly(x), Coordinate::Poly(y), Coordinate::Poly(z)] => Some([x, y, z]),
            _ => None,
        }
    }

    /// Length of the parameter domain: `2pi` or `1`.
    pub fn period(&self) -> T {
        match self.kind {
            CurveKind::Trigonometric => T::TAU(),
            CurveKind::Polynomial => T::one(),
        }
    }

    pub fn domain_label(&self) -> &'static str {
        match self.kind {
            CurveKind::Trigonometric => "[0,2pi)",
            CurveKind::Polynomial => "[0,1)",
        }
    }

    pub fn harmonic_degree(&self) -> usize {
        self.coords
            .iter()
            .map(|c| match c {
                Coordinate::Trig(s) => s.degree(),
                Coordinate::Poly(p) => p.degree().unwrap_or(0),
            })
            .max()
            .unwrap_or(0)
    }

    fn wrap(&self, t: T) -> T {
        let period = self.period();
        let w = t - (t / period).floor() * period;
        if w >= period {
            w - period
        } else {
            w
        }
    }

    fn trig_eval(&self, t: T, order: usize) -> Vec3<T> {
        let series = self.trig.as_ref().expect("trigonometric kind");
        let comp = |(a0, cs, ss): &(T, Vec<T>, Vec<T>)| {
            let mut acc = if order == 0 { *a0 } else { T::zero() };
            for (i, (c, s)) in cs.iter().zip(ss.iter()).enumerate() {
                let k = T::lit((i + 1) as f64);
                let (sn, cn) = (k * t).sin_cos();
                acc = acc
                    + match order {
                        0 => *c * cn + *s * sn,
                        1 => k * (*s * cn - *c * sn),
                        _ => -k * k * (*c * cn + *s * sn),
                    };
            }
            acc
        };
        Vec3::new(comp(&series[0]), comp(&series[1]), comp(&series[2]))
    }

    fn poly_eval(polys: [&RationalPoly; 3], t: T) -> Vec3<T> {
        let tr = rational_from_f64(t.to_f64_lossy());
        let f = |p: &RationalPoly| T::lit(rational_to_f64(&p.eval(&tr)));
        Vec3::new(f(polys[0]), f(polys[1]), f(polys[2]))
    }

    /// Point on the curve; `t` is wrapped into the domain first.
    pub fn evaluate(&self, t: T) -> Vec3<T> {
        let t = self.wrap(t);
        match self.kind {
            CurveKind::Trigonometric => self.trig_eval(t, 0),
            CurveKind::Polynomial => Self::poly_eval(self.polynomials().expect("polynomial"), t),
        }
    }

    /// Exact point at a rational parameter (polynomial kind only).
    pub fn evaluate_exact(&self, t: &BigRational) -> Option<[BigRational; 3]> {
        self.polynomials().map(|ps| ps.map(|p| p.eval(t)))
    }

    /// First derivative. For polynomials this is the one-sided derivative
    /// from the right; the left limit at the seam is [`Self::derivatives_end`].
    pub fn derivative(&self, t: T) -> Vec3<T> {
        let t = self.wrap(t);
        match self.kind {
            CurveKind::Trigonometric => self.trig_eval(t, 1),
            CurveKind::Polynomial => {
                let d = self.deriv.as_ref().expect("polynomial");
                Self::poly_eval([&d[0], &d[1], &d[2]], t)
            }
        }
    }

    pub fn second_derivative(&self, t: T) -> Vec3<T> {
        let t = self.wrap(t);
        match self.kind {
            CurveKind::Trigonometric => self.trig_eval(t, 2),
            CurveKind::Polynomial => {
                let d = self.deriv2.as_ref().expect("polynomial");
                Self::poly_eval([&d[0], &d[1], &d[2]], t)
            }
        }
    }

    /// First and second derivatives as `t` approaches the end of the domain
    /// from the left. Equal to the values at 0 for trigonometric curves.
    pub fn derivatives_end(&self) -> (Vec3<T>, Vec3<T>) {
        match self.kind {
            CurveKind::Trigonometric => (self.trig_eval(T::zero(), 1), self.trig_eval(T::zero(), 2)),
            CurveKind::Polynomial => {
                let d = self.deriv.as_ref().expect("polynomial");
                let d2 = self.deriv2.as_ref().expect("polynomial");
                (
                    Self::poly_eval([&d[0], &d[1], &d[2]], T::one()),
                    Self::poly_eval([&d2[0], &d2[1], &d2[2]], T::one()),
                )
            }
        }
    }

    /// Closure residual `|K(start) - K(end)|` relative to the coordinate
    /// scale. Zero for trigonometric curves, exact for polynomial ones.
    pub fn closure_residual(&self) -> f64 {
        let Some(ps) = self.polynomials() else {
            return 0.0;
        };
        let zero = BigRational::zero();
        let one = BigRational::from_integer(1.into());
        let mut worst = 0.0f64;
        for p in ps {
            let gap = (p.eval(&one) - p.eval(&zero)).abs();
            let scale = p.coeffs().iter().map(|c| rational_to_f64(&c.abs())).fold(0.0, f64::max).max(1.0);
            worst = worst.max(rational_to_f64(&gap) / scale);
        }
        worst
    }

    /// Rough length scale: bounding-box diagonal of a dense sample.
    pub fn scale(&self) -> T {
        let n = 256;
        let pts: Vec<_> =
            (0..n).map(|i| self.evaluate(self.period() * T::lit(i as f64 / n as f64))).collect();
        bbox_diagonal(&pts)
    }

    pub fn from_json_str(s: &str) -> Result<Self, CurveError> {
        let raw: RawCurve = serde_json::from_str(s).map_err(|e| CurveError::InvalidCurve(e.to_string()))?;
        raw.into_knot()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CurveError> {
        let s = std::fs::read_to_string(path.as_ref())
            .map_err(|e| CurveError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json_str(&s)
    }

    pub fn to_json_string(&self) -> String {
        let coord = |c: &Coordinate| match c {
            Coordinate::Trig(s) => RawCoord::Trig {
                a0: format_rational(&s.a0),
                cos: s.cos.iter().map(format_rational).collect(),
                sin: s.sin.iter().map(format_rational).collect(),
            },
            Coordinate::Poly(p) => RawCoord::Poly(p.coeffs().iter().map(format_rational).collect()),
        };
        let raw = RawCurve {
            kind: self.kind,
            domain: self.domain_label().to_string(),
            coeffs: RawCoeffs { x: coord(&self.coords[0]), y: coord(&self.coords[1]), z: coord(&self.coords[2]) },
        };
        serde_json::to_string_pretty(&raw).expect("curve serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RawCurve {
    kind: CurveKind,
    domain: String,
    coeffs: RawCoeffs,
}

#[derive(Serialize, Deserialize)]
struct RawCoeffs {
    x: RawCoord,
    y: RawCoord,
    z: RawCoord,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawCoord {
    Trig { a0: String, cos: Vec<String>, sin: Vec<String> },
    Poly(Vec<String>),
}

fn parse_all(v: &[String]) -> Result<Vec<BigRational>, CurveError> {
    v.iter()
        .map(|s| parse_rational(s).ok_or_else(|| CurveError::InvalidCurve(format!("bad rational {s:?}"))))
        .collect()
}

impl RawCurve {
    fn into_knot<T: Scalar>(self) -> Result<ParametricKnot<T>, CurveError> {
        let want = match self.kind {
            CurveKind::Trigonometric => "[0,2pi)",
            CurveKind::Polynomial => "[0,1)",
        };
        if self.domain.replace(' ', "") != want {
            return Err(CurveError::InvalidCurve(format!("domain {} does not match kind", self.domain)));
        }
        let RawCoeffs { x, y, z } = self.coeffs;
        match self.kind {
            CurveKind::Trigonometric => {
                let conv = |c: RawCoord| match c {
                    RawCoord::Trig { a0, cos, sin } => {
                        let a0 = parse_all(&[a0])?.remove(0);
                        let (mut cos, mut sin) = (parse_all(&cos)?, parse_all(&sin)?);
                        let n = cos.len().max(sin.len());
                        cos.resize(n, BigRational::zero());
                        sin.resize(n, BigRational::zero());
                        Ok(TrigSeries { a0, cos, sin })
                    }
                    RawCoord::Poly(_) => Err(CurveError::InvalidCurve("expected cos/sin coefficients".into())),
                };
                ParametricKnot::trigonometric(conv(x)?, conv(y)?, conv(z)?)
            }
            CurveKind::Polynomial => {
                let conv = |c: RawCoord| match c {
                    RawCoord::Poly(v) => Ok(RationalPoly::new(parse_all(&v)?)),
                    RawCoord::Trig { .. } => Err(CurveError::InvalidCurve("expected a coefficient list".into())),
                };
                ParametricKnot::polynomial(conv(x)?, conv(y)?, conv(z)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusKnotSpec {
    pub p: i64,
    pub q: i64,
    pub major: f64,
    pub minor: f64,
}

impl TorusKnotSpec {
    pub fn new(p: i64, q: i64, major: f64, minor: f64) -> Result<Self, CurveError> {
        if p < 2 || q <= p || p.gcd(&q) != 1 {
            return Err(CurveError::InvalidTorusType { p, q });
        }
        if !(minor > 0.0 && minor < major) {
            return Err(CurveError::InvalidCurve(format!("radii must satisfy 0 < r < R, got R={major} r={minor}")));
        }
        Ok(TorusKnotSpec { p, q, major, minor })
    }
}

/// Standard embedding `((R + r cos q t) cos p t, (R + r cos q t) sin p t, r sin q t)`,
/// expanded into harmonics so its degree is `p + q`.
pub fn torus_curve<T: Scalar>(spec: &TorusKnotSpec) -> ParametricKnot<T> {
    let (p, q) = (spec.p as usize, spec.q as usize);
    let big_r = rational_from_f64(spec.major);
    let half_r = rational_from_f64(spec.minor) / BigRational::from_integer(2.into());
    let n = p + q;
    let zeros = || vec![BigRational::zero(); n];
    let (mut xc, mut ys, mut zs) = (zeros(), zeros(), zeros());
    xc[p - 1] += &big_r;
    xc[q + p - 1] += &half_r;
    xc[q - p - 1] += &half_r;
    ys[p - 1] += &big_r;
    ys[p + q - 1] += &half_r;
    ys[q - p - 1] -= &half_r;
    zs[q - 1] += rational_from_f64(spec.minor);
    let series = |cos, sin| TrigSeries { a0: BigRational::zero(), cos, sin };
    ParametricKnot::trigonometric(series(xc, zeros()), series(zeros(), ys), series(zeros(), zs))
        .expect("torus curve has positive degree")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SampleMode {
    #[default]
    Uniform,
    /// Parameters chosen so consecutive samples are equally spaced in arc
    /// length, estimated on a 64x finer uniform polyline.
    Arclength,
}

/// How the simple-curve invariant of a polygon was established.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Simplicity {
    /// Checked; `min_gap` is the smallest distance between non-adjacent edges.
    Checked { min_gap: f64 },
    Skipped,
}

/// Cyclic list of vertices; edge `i` joins vertex `i` to vertex `i + 1 mod n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalKnot<T> {
    vertices: Vec<Vec3<T>>,
    params: Option<Vec<f64>>,
    period: f64,
    simplicity: Simplicity,
}

impl<T: Scalar> PolygonalKnot<T> {
    /// Validated constructor: at least 3 vertices, no short edges, simple.
    pub fn new(vertices: Vec<Vec3<T>>) -> Result<Self, CurveError> {
        let mut k = Self::synthetic(vertices)?;
        let gap = k.min_nonadjacent_gap()?;
        k.simplicity = Simplicity::Checked { min_gap: gap };
        Ok(k)
    }

    /// Constructor that skips the simplicity check and records that it did.
    pub fn synthetic(vertices: Vec<Vec3<T>>) -> Result<Self, CurveError> {
        if vertices.len() < 3 {
            return Err(CurveError::DegeneratePolygon(format!("{} vertices", vertices.len())));
        }
        let eps = bbox_diagonal(&vertices) * T::lit(1e-12);
        let n = vertices.len();
        for i in 0..n {
            if vertices[i].distance(vertices[(i + 1) % n]) <= eps {
                return Err(CurveError::DegenerateSample { index: i, next: (i + 1) % n });
            }
        }
        Ok(PolygonalKnot { vertices, params: None, period: 0.0, simplicity: Simplicity::Skipped })
    }

    pub fn from_f64(points: &[[f64; 3]]) -> Result<Self, CurveError> {
        Self::new(points.iter().map(|p| Vec3::from_f64(p[0], p[1], p[2])).collect())
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vec3<T> {
        self.vertices[i % self.vertices.len()]
    }

    pub fn edge(&self, i: usize) -> (Vec3<T>, Vec3<T>) {
        (self.vertex(i), self.vertex(i + 1))
    }

    /// Curve parameters of the vertices when the polygon was sampled.
    pub fn params(&self) -> Option<&[f64]> {
        self.params.as_deref()
    }

    /// Curve parameter at fraction `s` along edge `i`, when known.
    pub fn edge_param(&self, i: usize, s: f64) -> Option<f64> {
        let p = self.params.as_ref()?;
        let n = p.len();
        let a = p[i % n];
        let mut b = p[(i + 1) % n];
        if b <= a {
            b += self.period;
        }
        let t = a + s * (b - a);
        Some(if t >= self.period { t - self.period } else { t })
    }

    pub fn simplicity(&self) -> Simplicity {
        self.simplicity
    }

    pub fn scale(&self) -> T {
        bbox_diagonal(&self.vertices)
    }

    pub fn map(&self, f: impl Fn(Vec3<T>) -> Vec3<T>) -> Self {
        PolygonalKnot {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            params: self.params.clone(),
            period: self.period,
            simplicity: self.simplicity,
        }
    }

    pub fn cast<U: Scalar>(&self) -> PolygonalKnot<U> {
        PolygonalKnot {
            vertices: self.vertices.iter().map(|v| v.cast()).collect(),
            params: self.params.clone(),
            period: self.period,
            simplicity: self.simplicity,
        }
    }

    fn min_nonadjacent_gap(&self) -> Result<f64, CurveError> {
        let n = self.len();
        let scale = self.scale();
        let tol = scale * T::lit(1e-9);
        let mut best = T::infinity();
        for i in 0..n {
            let (a0, a1) = self.edge(i);
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (b0, b1) = self.edge(j);
                let d = segment_distance(a0, a1, b0, b1);
                if d <= tol {
                    return Err(CurveError::NotSimple(i, j, d.to_f64_lossy()));
                }
                best = best.min(d);
            }
        }
        Ok(if n > 3 { best.to_f64_lossy() } else { f64::INFINITY })
    }
}

/// Samples `n` vertices of a parametric knot. The polygon closes by
/// construction: the last vertex is joined back to the first.
pub fn sample_polygon<T: Scalar>(
    knot: &ParametricKnot<T>,
    n: usize,
    mode: SampleMode,
) -> Result<PolygonalKnot<T>, CurveError> {
    if n < 3 {
        return Err(CurveError::DegeneratePolygon(format!("n = {n}")));
    }
    let period = knot.period().to_f64_lossy();
    let params: Vec<f64> = match mode {
        SampleMode::Uniform => (0..n).map(|i| period * i as f64 / n as f64).collect(),
        SampleMode::Arclength => arclength_params(knot, n),
    };
    let vertices = params.iter().map(|&t| knot.evaluate(T::lit(t))).collect();
    let mut poly = PolygonalKnot::new(vertices)?;
    poly.params = Some(params);
    poly.period = period;
    Ok(poly)
}

fn arclength_params<T: Scalar>(knot: &ParametricKnot<T>, n: usize) -> Vec<f64> {
    let fine = 64 * n;
    let period = knot.period().to_f64_lossy();
    let pts: Vec<Vec3<f64>> =
        (0..=fine).map(|i| knot.evaluate(T::lit(period * i as f64 / fine as f64)).cast()).collect();
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        cum.push(cum.last().unwrap() + w[0].distance(w[1]));
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let target = total * i as f64 / n as f64;
        while j + 1 < fine && cum[j + 1] < target {
            j += 1;
        }
        let seg = cum[j + 1] - cum[j];
        let frac = if seg > 0.0 { (target - cum[j]) / seg } else { 0.0 };
        out.push(period * (j as f64 + frac) / fine as f64);
    }
    out
}

/// Open subarc from vertex `start` forward to vertex `end` (cyclically).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubarcSpec {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Straightened<T> {
    pub knot: PolygonalKnot<T>,
    /// True only when the triangle fan swept between the old subarc and the
    /// new segment meets no other part of the knot.
    pub isotopy_checked: bool,
}

/// Replaces the vertices strictly between `arc.start` and `arc.end` with the
/// single segment joining them.
pub fn straighten_subarc<T: Scalar>(
    knot: &PolygonalKnot<T>,
    arc: SubarcSpec,
) -> Result<Straightened<T>, CurveError> {
    let n = knot.len();
    if arc.start >= n || arc.end >= n || arc.start == arc.end {
        return Err(CurveError::InvalidSubarc(format!("{arc:?} on {n} vertices")));
    }
    let span = (arc.end + n - arc.start) % n;
    if span < 2 {
        return Err(CurveError::InvalidSubarc("subarc has no interior vertex".into()));
    }
    let kept = n - (span - 1);
    if kept < 3 {
        return Err(CurveError::DegeneratePolygon(format!("{kept} vertices after straightening")));
    }
    let path: Vec<Vec3<T>> = (0..=span).map(|k| knot.vertex(arc.start + k)).collect();
    let rest: Vec<Vec3<T>> = (0..=(n - span)).map(|k| knot.vertex(arc.end + k)).collect();
    let isotopy_checked = fan_is_clear(path[0], &path, &rest, knot.scale());

    let interior = |i: usize| (1..span).contains(&((i + n - arc.start) % n));
    let keep: Vec<usize> = (0..n).filter(|&i| !interior(i)).collect();
    let vertices = keep.iter().map(|&i| knot.vertices[i]).collect();
    let params = knot.params.as_ref().map(|src| keep.iter().map(|&i| src[i]).collect());
    let mut out = PolygonalKnot::synthetic(vertices)
        .map_err(|e| CurveError::DegeneratePolygon(e.to_string()))?;
    out.params = params;
    out.period = knot.period;
    out.simplicity = if isotopy_checked { knot.simplicity } else { Simplicity::Skipped };
    Ok(Straightened { knot: out, isotopy_checked })
}

/// Whether the fan of triangles `(apex, path[k], path[k+1])` avoids the
/// polyline `rest`. `rest` shares its first and last points with the ends
/// of `path`; touching there is allowed.
pub(crate) fn fan_is_clear<T: Scalar>(apex: Vec3<T>, path: &[Vec3<T>], rest: &[Vec3<T>], scale: T) -> bool {
    let tol = scale * T::lit(1e-9);
    let trim = scale * T::lit(1e-7);
    let ends = [path[0], path[path.len() - 1]];
    for w in rest.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let len = a.distance(b);
        if len <= trim * T::lit(2.0) {
            continue;
        }
        if ends.iter().any(|e| e.distance(a) <= tol) {
            a = a.lerp(b, trim / len);
        }
        if ends.iter().any(|e| e.distance(b) <= tol) {
            b = b.lerp(a, trim / len);
        }
        for t in path.windows(2) {
            if segment_touches_triangle(a, b, apex, t[0], t[1], tol) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn circle() -> ParametricKnot<f64> {
        let one = |v: i64| vec![rat(v, 1)];
        ParametricKnot::trigonometric(
            TrigSeries { a0: rat(0, 1), cos: one(1), sin: one(0) },
            TrigSeries { a0: rat(0, 1), cos: one(0), sin: one(1) },
            TrigSeries { a0: rat(0, 1), cos: one(0), sin: one(0) },
        )
        .unwrap()
    }

    #[test]
    fn circle_quarter_turn() {
        let p = circle().evaluate(std::f64::consts::FRAC_PI_2);
        assert!(p.distance(Vec3::from_f64(0.0, 1.0, 0.0)) < 1e-15);
        let w = circle().evaluate(std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU);
        assert!(w.distance(p) < 1e-14);
    }

    #[test]
    fn circle_samples_to_square() {
        let sq = sample_polygon(&circle(), 4, SampleMode::Uniform).unwrap();
        let want = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (v, w) in sq.vertices().iter().zip(want) {
            assert!((v.x - w[0]).abs() < 1e-15 && (v.y - w[1]).abs() < 1e-15);
        }
        assert!(matches!(sq.simplicity(), Simplicity::Checked { .. }));
    }

    #[test]
    fn arclength_mode_equalizes_edges() {
        let spec = TorusKnotSpec::new(2, 3, 2.0, 1.0).unwrap();
        let k = torus_curve::<f64>(&spec);
        let poly = sample_polygon(&k, 200, SampleMode::Arclength).unwrap();
        let lens: Vec<f64> = (0..200).map(|i| {
            let (a, b) = poly.edge(i);
            a.distance(b)
        }).collect();
        let (lo, hi) = lens.iter().fold((f64::MAX, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(hi / lo < 1.01, "{lo} {hi}");
    }

    #[test]
    fn torus_matches_product_form() {
        let spec = TorusKnotSpec::new(3, 5, 2.0, 1.0).unwrap();
        let k = torus_curve::<f64>(&spec);
        assert_eq!(k.harmonic_degree(), 8);
        for i in 0..50 {
            let t = i as f64 * 0.37;
            let rr = 2.0 + (5.0 * t).cos();
            let want = Vec3::from_f64(rr * (3.0 * t).cos(), rr * (3.0 * t).sin(), (5.0 * t).sin());
            assert!(k.evaluate(t).distance(want) < 1e-12);
        }
        assert!(TorusKnotSpec::new(2, 4, 2.0, 1.0).is_err());
        assert!(TorusKnotSpec::new(3, 2, 2.0, 1.0).is_err());
    }

    #[test]
    fn trig_derivatives_match_differences() {
        let k = torus_curve::<f64>(&TorusKnotSpec::new(2, 5, 2.0, 1.0).unwrap());
        let h = 1e-6;
        for t in [0.1, 1.3, 4.0] {
            let fd = (k.evaluate(t + h) - k.evaluate(t - h)) / (2.0 * h);
            assert!(fd.distance(k.derivative(t)) < 1e-6);
            let fd2 = (k.derivative(t + h) - k.derivative(t - h)) / (2.0 * h);
            assert!(fd2.distance(k.second_derivative(t)) < 1e-5);
        }
    }

    #[test]
    fn json_round_trip() {
        let k = torus_curve::<f64>(&TorusKnotSpec::new(2, 3, 2.0, 1.0).unwrap());
        let back = ParametricKnot::<f64>::from_json_str(&k.to_json_string()).unwrap();
        assert_eq!(back.coordinates(), k.coordinates());
        assert!(ParametricKnot::<f64>::from_json_str(r#"{"kind":"polynomial","domain":"[0,2pi)","coeffs":{"x":["1"],"y":["1"],"z":["1"]}}"#).is_err());
    }

    #[test]
    fn square_straightens_to_triangle() {
        let sq = PolygonalKnot::<f64>::from_f64(&[[1., 0., 0.], [0., 1., 0.], [-1., 0., 0.], [0., -1., 0.]]).unwrap();
        let s = straighten_subarc(&sq, SubarcSpec { start: 0, end: 2 }).unwrap();
        assert_eq!(s.knot.len(), 3);
        assert!(s.isotopy_checked);
        assert!(straighten_subarc(&s.knot, SubarcSpec { start: 0, end: 2 }).is_err());
    }

    #[test]
    fn coincident_samples_are_rejected() {
        let e = PolygonalKnot::<f64>::from_f64(&[[0., 0., 0.], [0., 0., 0.], [1., 0., 0.]]);
        assert!(matches!(e, Err(CurveError::DegenerateSample { .. })));
    }
}
