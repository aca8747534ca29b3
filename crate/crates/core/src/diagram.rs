//! Planar projections, crossing extraction, PD and Gauss codes, bigon
//! (crescent) detection, Reidemeister I/II simplification and SVG output.
//!
//! Conventions. The projection plane has the right-handed frame
//! `(e1, e2, v)`; a point's depth is its coordinate along `v`, and the
//! viewer looks from `+v`, so the strand with the larger depth is over.
//! A crossing is positive when `cross(over_dir, under_dir) > 0` in the
//! `(e1, e2)` plane.
//!
//! Passages are numbered `1..=2n` in walk order. The arc entering passage
//! `q` has label `q`, the arc leaving it has label `q mod 2n + 1`. A PD entry
//! `X(a,b,c,d)` lists the four arcs counterclockwise from the incoming under
//! arc `a`; `c` is the outgoing under arc. At a positive crossing `b` is the
//! outgoing over arc and `d` the incoming one, at a negative crossing the
//! reverse. Hence an entry is positive exactly when `b = d mod 2n + 1`.

use std::fmt::Write as _;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::PolygonalKnot;
use crate::directional::Direction;
use crate::geom::{Vec2, Vec3};
use crate::scalar::Scalar;
use crate::secants::SecantLine;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feature {
    TriplePoint,
    VertexHit,
    SmallAngle,
    DepthTie,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagramError {
    #[error("NonGenericProjection: {feature:?} near edges {edges:?}")]
    NonGenericProjection { feature: Feature, edges: (usize, usize) },
    #[error("NotAKnot: {0}")]
    NotAKnot(String),
    #[error("NotR2Eligible: crescent ({0}, {1}) is alternating")]
    NotR2Eligible(usize, usize),
    #[error("InvalidCode: {0}")]
    InvalidCode(String),
    #[error("InconsistentSecant: hit images spread over {0:e}")]
    InconsistentSecant(f64),
    #[error("TooFewHits: secant meets the knot {0} times, need at least 4")]
    TooFewHits(usize),
    #[error("Io: {0}")]
    Io(String),
}

/// Orthogonal projection of a polygon onto the plane normal to `direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarProjection<T> {
    pub points: Vec<Vec2<T>>,
    pub depths: Vec<T>,
    pub direction: Vec3<T>,
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    /// Image of a secant and the radius of the disk excluded around it.
    pub quad_point: Option<(Vec2<T>, T)>,
}

impl<T: Scalar> PlanarProjection<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Source vertex rebuilt from plane coordinates and depth.
    pub fn lift(&self, i: usize) -> Vec3<T> {
        let p = self.points[i];
        self.e1 * p.x + self.e2 * p.y + self.direction * self.depths[i]
    }

    pub fn scale(&self) -> T {
        let (mut lo, mut hi) = (self.points[0], self.points[0]);
        for p in &self.points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (hi - lo).norm()
    }
}

/// Completes `v` to the frame `(e1, e2, v)` using the coordinate axis least
/// aligned with `v`.
pub fn frame<T: Scalar>(v: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let a = if v.x.abs() <= v.y.abs() && v.x.abs() <= v.z.abs() {
        Vec3::from_f64(1.0, 0.0, 0.0)
    } else if v.y.abs() <= v.z.abs() {
        Vec3::from_f64(0.0, 1.0, 0.0)
    } else {
        Vec3::from_f64(0.0, 0.0, 1.0)
    };
    let e1 = (a - v * a.dot(v)).normalized().expect("axis not parallel to v");
    (e1, v.cross(e1))
}

pub fn project<T: Scalar>(knot: &PolygonalKnot<T>, v: &Direction<T>) -> PlanarProjection<T> {
    let d = v.vector();
    let (e1, e2) = frame(d);
    let points = knot.vertices().iter().map(|p| Vec2::new(p.dot(e1), p.dot(e2))).collect();
    let depths = knot.vertices().iter().map(|p| p.dot(d)).collect();
    PlanarProjection { points, depths, direction: d, e1, e2, quad_point: None }
}

/// A transversal double point of a projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing<T> {
    pub position: Vec2<T>,
    pub over_edge: usize,
    pub over_t: T,
    pub under_edge: usize,
    pub under_t: T,
    pub sign: i8,
    pub transversality_angle: T,
}

/// One pass of the walk through a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Passage {
    /// Crossing index, `0..n`.
    pub crossing: usize,
    pub over: bool,
}

/// Signed Gauss code: passages in walk order plus a sign per crossing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct KnotDiagram {
    passages: Vec<Passage>,
    signs: Vec<i8>,
}

/// A bigon face between two distinct crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crescent {
    pub crossings: (usize, usize),
    pub alternating: bool,
}

impl KnotDiagram {
    pub fn unknot() -> Self {
        KnotDiagram::default()
    }

    /// Validates that every crossing is passed once over and once under.
    pub fn from_gauss(passages: Vec<Passage>, signs: Vec<i8>) -> Result<Self, DiagramError> {
        let n = signs.len();
        if passages.len() != 2 * n {
            return Err(DiagramError::InvalidCode(format!("{} passages for {n} crossings", passages.len())));
        }
        let mut seen = vec![[false; 2]; n];
        for p in &passages {
            if p.crossing >= n {
                return Err(DiagramError::InvalidCode(format!("crossing {} out of range", p.crossing + 1)));
            }
            let slot = &mut seen[p.crossing][p.over as usize];
            if *slot {
                return Err(DiagramError::InvalidCode(format!("crossing {} repeated", p.crossing + 1)));
            }
            *slot = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(DiagramError::InvalidCode("signs must be +1 or -1".into()));
        }
        Ok(KnotDiagram { passages, signs })
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn n_crossings(&self) -> usize {
        self.signs.len()
    }

    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// Mirror image: every crossing switched.
    pub fn mirror(&self) -> Self {
        KnotDiagram {
            passages: self.passages.iter().map(|p| Passage { crossing: p.crossing, over: !p.over }).collect(),
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    /// Switches over and under at the given crossings.
    pub fn switch_crossings(&self, which: &[usize]) -> Self {
        let mut d = self.clone();
        for &c in which {
            d.signs[c] = -d.signs[c];
        }
        for p in &mut d.passages {
            if which.contains(&p.crossing) {
                p.over = !p.over;
            }
        }
        d
    }

    /// Renumbers crossings by first appearance and rotates the walk to start
    /// at passage 0 of the smallest rotation; a canonical form for hashing.
    pub fn canonical(&self) -> Self {
        let m = self.passages.len();
        if m == 0 {
            return self.clone();
        }
        (0..m)
            .map(|r| self.relabel_from(r))
            .min_by(|a, b| a.key().cmp(&b.key()))
            .expect("nonempty")
    }

    fn key(&self) -> Vec<(usize, bool, i8)> {
        self.passages.iter().map(|p| (p.crossing, p.over, self.signs[p.crossing])).collect()
    }

    fn relabel_from(&self, start: usize) -> Self {
        let m = self.passages.len();
        let mut map = vec![usize::MAX; self.signs.len()];
        let mut next = 0;
        let mut passages = Vec::with_capacity(m);
        for k in 0..m {
            let p = self.passages[(start + k) % m];
            if map[p.crossing] == usize::MAX {
                map[p.crossing] = next;
                next += 1;
            }
            passages.push(Passage { crossing: map[p.crossing], over: p.over });
        }
        let mut signs = vec![0; self.signs.len()];
        for (old, &new) in map.iter().enumerate() {
            signs[new] = self.signs[old];
        }
        KnotDiagram { passages, signs }
    }

    /// `(under passage, over passage)` positions, 0-based, per crossing.
    pub fn passage_positions(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(usize::MAX, usize::MAX); self.signs.len()];
        for (q, p) in self.passages.iter().enumerate() {
            if p.over {
                out[p.crossing].1 = q;
            } else {
                out[p.crossing].0 = q;
            }
        }
        out
    }

    /// PD code as described in the module documentation.
    pub fn pd_code(&self) -> Vec<[usize; 4]> {
        let m = self.passages.len();
        let inc = |q: usize| q + 1;
        let out = |q: usize| (q + 1) % m + 1;
        self.passage_positions()
            .iter()
            .zip(&self.signs)
            .map(|(&(u, o), &s)| {
                if s > 0 {
                    [inc(u), out(o), out(u), inc(o)]
                } else {
                    [inc(u), inc(o), out(u), out(o)]
                }
            })
            .collect()
    }

    pub fn pd_text(&self) -> String {
        self.pd_code().iter().map(|x| format!("X({},{},{},{})", x[0], x[1], x[2], x[3])).collect::<Vec<_>>().join(" ")
    }

    /// Rebuilds the walk from a PD code of a knot diagram.
    pub fn from_pd(pd: &[[usize; 4]]) -> Result<Self, DiagramError> {
        let n = pd.len();
        if n == 0 {
            return Ok(KnotDiagram::unknot());
        }
        let m = 2 * n;
        let succ = |l: usize| l % m + 1;
        let mut counts = vec![0usize; m + 1];
        for x in pd {
            for &l in x {
                if l == 0 || l > m {
                    return Err(DiagramError::InvalidCode(format!("arc label {l} outside 1..={m}")));
                }
                counts[l] += 1;
            }
        }
        if counts[1..].iter().any(|&c| c != 2) {
            return Err(DiagramError::InvalidCode("every arc label must appear exactly twice".into()));
        }
        let mut is_under = vec![false; m + 1];
        for x in pd {
            if x[2] != succ(x[0]) {
                return Err(DiagramError::NotAKnot("under strand labels are not consecutive".into()));
            }
            if is_under[x[0]] {
                return Err(DiagramError::NotAKnot(format!("arc {} enters two under passages", x[0])));
            }
            is_under[x[0]] = true;
        }
        let mut passages = vec![None; m];
        let mut signs = Vec::with_capacity(n);
        for (c, x) in pd.iter().enumerate() {
            passages[x[0] - 1] = Some(Passage { crossing: c, over: false });
            let (b, d) = (x[1], x[3]);
            let pos = succ(d) == b && !is_under[d];
            let neg = succ(b) == d && !is_under[b];
            let (over_in, sign) = match (pos, neg) {
                (true, _) => (d, 1),
                (false, true) => (b, -1),
                _ => return Err(DiagramError::NotAKnot("over strand labels are not consecutive".into())),
            };
            if passages[over_in - 1].is_some() {
                return Err(DiagramError::NotAKnot(format!("passage {over_in} used twice")));
            }
            passages[over_in - 1] = Some(Passage { crossing: c, over: true });
            signs.push(sign);
        }
        let passages = passages
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| DiagramError::NotAKnot("walk does not visit every passage".into()))?;
        KnotDiagram::from_gauss(passages, signs)
    }

    /// Parses `X(a,b,c,d)` entries separated by whitespace, commas or
    /// newlines; a leading name token is ignored.
    pub fn parse_pd(text: &str) -> Result<Self, DiagramError> {
        let mut pd = Vec::new();
        let mut rest = text;
        while let Some(start) = rest.find("X(") {
            let end = rest[start..]
                .find(')')
                .ok_or_else(|| DiagramError::InvalidCode("unclosed X(".into()))?
                + start;
            let nums: Vec<usize> = rest[start + 2..end]
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| DiagramError::InvalidCode(e.to_string()))?;
            if nums.len() != 4 {
                return Err(DiagramError::InvalidCode(format!("X entry with {} labels", nums.len())));
            }
            pd.push([nums[0], nums[1], nums[2], nums[3]]);
            rest = &rest[end + 1..];
        }
        Self::from_pd(&pd)
    }

    /// Gauss code as `O1+ U2- ...` tokens, crossings numbered from 1.
    pub fn gauss_text(&self) -> String {
        self.passages
            .iter()
            .map(|p| {
                format!(
                    "{}{}{}",
                    if p.over { 'O' } else { 'U' },
                    p.crossing + 1,
                    if self.signs[p.crossing] > 0 { '+' } else { '-' }
                )
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_gauss(text: &str) -> Result<Self, DiagramError> {
        let mut passages = Vec::new();
        let mut signs: Vec<Option<i8>> = Vec::new();
        for tok in text.split_whitespace() {
            let bad = || DiagramError::InvalidCode(format!("bad Gauss token {tok:?}"));
            let over = match tok.chars().next() {
                Some('O') => true,
                Some('U') => false,
                _ => return Err(bad()),
            };
            let sign = match tok.chars().last() {
                Some('+') => 1,
                Some('-') => -1,
                _ => return Err(bad()),
            };
            let id: usize = tok[1..tok.len() - 1].parse().map_err(|_| bad())?;
            if id == 0 {
                return Err(bad());
            }
            if signs.len() < id {
                signs.resize(id, None);
            }
            if signs[id - 1].is_some_and(|s| s != sign) {
                return Err(DiagramError::InvalidCode(format!("crossing {id} has two signs")));
            }
            signs[id - 1] = Some(sign);
            passages.push(Passage { crossing: id - 1, over });
        }
        let signs = signs
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| DiagramError::InvalidCode("crossing ids are not contiguous".into()))?;
        Self::from_gauss(passages, signs)
    }

    /// Faces of the planar diagram as cycles of darts `(crossing, slot)`,
    /// slots indexed counterclockwise as in the PD entry.
    pub fn faces(&self) -> Vec<Vec<(usize, usize)>> {
        let pd = self.pd_code();
        let n = pd.len();
        if n == 0 {
            return Vec::new();
        }
        let m = 2 * n;
        let mut ends: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m + 1];
        for (c, x) in pd.iter().enumerate() {
            for (s, &l) in x.iter().enumerate() {
                ends[l].push((c, s));
            }
        }
        let partner = |c: usize, s: usize| {
            let l = pd[c][s];
            let e = &ends[l];
            if e[0] == (c, s) {
                e[1]
            } else {
                e[0]
            }
        };
        let mut used = vec![[false; 4]; n];
        let mut faces = Vec::new();
        for c in 0..n {
            for s in 0..4 {
                if used[c][s] {
                    continue;
                }
                let mut face = Vec::new();
                let (mut cc, mut ss) = (c, s);
                while !used[cc][ss] {
                    used[cc][ss] = true;
                    face.push((cc, ss));
                    let (pc, ps) = partner(cc, ss);
                    // Turn to the next slot clockwise at the far crossing.
                    cc = pc;
                    ss = (ps + 3) % 4;
                }
                faces.push(face);
            }
        }
        faces
    }

    /// Bigon faces between two distinct crossings.
    pub fn find_crescents(&self) -> Vec<Crescent> {
        let pd = self.pd_code();
        let mut out = Vec::new();
        for face in self.faces() {
            if face.len() != 2 || face[0].0 == face[1].0 {
                continue;
            }
            let (x, i) = face[0];
            let (y, _) = face[1];
            // The arc leaving x at slot i arrives at y in the slot whose
            // clockwise successor is face[1].1.
            let j = (face[1].1 + 1) % 4;
            debug_assert_eq!(pd[x][i], pd[y][j]);
            let over_x = i % 2 == 1;
            let over_y = j % 2 == 1;
            let (a, b) = if x < y { (x, y) } else { (y, x) };
            out.push(Crescent { crossings: (a, b), alternating: over_x != over_y });
        }
        out.sort_by_key(|c| c.crossings);
        out.dedup();
        out
    }

    /// Crossings that bound a monogon face (a kink).
    pub fn find_kinks(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.faces().iter().filter(|f| f.len() == 1).map(|f| f[0].0).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn remove_crossings(&self, gone: &[usize]) -> Self {
        let n = self.signs.len();
        let mut map = vec![usize::MAX; n];
        let mut signs = Vec::new();
        for c in 0..n {
            if !gone.contains(&c) {
                map[c] = signs.len();
                signs.push(self.signs[c]);
            }
        }
        let passages = self
            .passages
            .iter()
            .filter(|p| !gone.contains(&p.crossing))
            .map(|p| Passage { crossing: map[p.crossing], over: p.over })
            .collect();
        KnotDiagram { passages, signs }
    }

    /// Reidemeister II across a non-alternating crescent.
    pub fn eliminate_crescent(&self, crescent: &Crescent) -> Result<Self, DiagramError> {
        let (a, b) = crescent.crossings;
        let found = self.find_crescents().into_iter().find(|c| c.crossings == (a.min(b), a.max(b)));
        match found {
            None => Err(DiagramError::InvalidCode(format!("({}, {}) is not a crescent", a + 1, b + 1))),
            Some(c) if c.alternating => Err(DiagramError::NotR2Eligible(a + 1, b + 1)),
            Some(_) => Ok(self.remove_crossings(&[a, b])),
        }
    }

    /// Reidemeister I at a kink crossing.
    pub fn remove_kink(&self, crossing: usize) -> Result<Self, DiagramError> {
        if !self.find_kinks().contains(&crossing) {
            return Err(DiagramError::InvalidCode(format!("crossing {} is not a kink", crossing + 1)));
        }
        Ok(self.remove_crossings(&[crossing]))
    }

    /// Applies R1 and non-alternating R2 moves until none applies.
    pub fn simplify(&self) -> Self {
        let mut d = self.clone();
        loop {
            if let Some(&k) = d.find_kinks().first() {
                d = d.remove_crossings(&[k]);
                continue;
            }
            match d.find_crescents().into_iter().find(|c| !c.alternating) {
                Some(c) => d = d.remove_crossings(&[c.crossings.0, c.crossings.1]),
                None => return d,
            }
        }
    }

    /// Diagrams reachable by one Reidemeister III move across a triangular
    /// face. One side of the triangle must pass over (or under) both of its
    /// crossings; the move reverses the order of the passages on each side.
    pub fn r3_moves(&self) -> Vec<Self> {
        let pd = self.pd_code();
        let m = self.passages.len();
        let mut out = Vec::new();
        for face in self.faces() {
            if face.len() != 3 {
                continue;
            }
            let mut xs: Vec<usize> = face.iter().map(|d| d.0).collect();
            xs.sort_unstable();
            xs.dedup();
            if xs.len() != 3 {
                continue;
            }
            // Arc label l runs from passage l-2 to passage l-1.
            let sides: Vec<(usize, usize)> =
                face.iter().map(|&(c, s)| ((pd[c][s] + m - 2) % m, pd[c][s] - 1)).collect();
            let mut pos: Vec<usize> = sides.iter().flat_map(|&(i, j)| [i, j]).collect();
            pos.sort_unstable();
            pos.dedup();
            if pos.len() != 6 {
                continue;
            }
            let level = |(i, j): (usize, usize)| self.passages[i].over == self.passages[j].over;
            if !sides.iter().any(|&s| level(s)) {
                continue;
            }
            let mut d = self.clone();
            for &(i, j) in &sides {
                d.passages.swap(i, j);
            }
            out.push(d);
        }
        out
    }

    /// [`simplify`](Self::simplify) followed by a bounded search through
    /// Reidemeister III moves for a diagram that simplifies further.
    pub fn simplify_deep(&self, max_states: usize) -> Self {
        let mut best = self.simplify();
        'restart: loop {
            let mut seen = std::collections::HashSet::new();
            let mut queue = std::collections::VecDeque::from([best.clone()]);
            seen.insert(best.canonical());
            while let Some(d) = queue.pop_front() {
                for e in d.r3_moves() {
                    let e = e.simplify();
                    if e.n_crossings() < best.n_crossings() {
                        best = e;
                        continue 'restart;
                    }
                    if seen.len() < max_states && seen.insert(e.canonical()) {
                        queue.push_back(e);
                    }
                }
            }
            return best;
        }
    }

    /// Applies only non-alternating R2 moves until none applies.
    pub fn reduce_crescents(&self) -> Self {
        let mut d = self.clone();
        while let Some(c) = d.find_crescents().into_iter().find(|c| !c.alternating) {
            d = d.remove_crossings(&[c.crossings.0, c.crossings.1]);
        }
        d
    }
}

/// Crossings of a projection together with their combinatorial code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedDiagram<T> {
    pub diagram: KnotDiagram,
    /// Geometric crossings, indexed like the diagram's crossings.
    pub crossings: Vec<Crossing<T>>,
    /// Double points dropped because they lie in the quadruple-point disk.
    pub suppressed: usize,
}

fn cross2<T: Scalar>(a: Vec2<T>, b: Vec2<T>) -> T {
    a.x * b.y - a.y * b.x
}

fn near_quad<T: Scalar>(proj: &PlanarProjection<T>, p: Vec2<T>) -> bool {
    proj.quad_point.is_some_and(|(q, r)| p.distance(q) <= r)
}

/// Finds all double points and builds the signed Gauss code by walking the
/// polygon.
pub fn extract_diagram<T: Scalar>(proj: &PlanarProjection<T>) -> Result<ProjectedDiagram<T>, DiagramError> {
    extract_diagram_with(proj, &Tolerances::default())
}

pub fn extract_diagram_with<T: Scalar>(
    proj: &PlanarProjection<T>,
    tol: &Tolerances,
) -> Result<ProjectedDiagram<T>, DiagramError> {
    let n = proj.len();
    let scale = proj.scale();
    let eps = scale * T::lit(tol.hit_slack);
    let sin_min = T::lit(tol.theta_min.sin());
    let pts = &proj.points;
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    let adjacent = |i: usize, j: usize| i == j || (i + 1) % n == j || (j + 1) % n == i;
    let nongeneric = |feature, i, j| Err(DiagramError::NonGenericProjection { feature, edges: (i, j) });

    // Bounding boxes for a cheap overlap filter.
    let boxes: Vec<(Vec2<T>, Vec2<T>)> = (0..n)
        .map(|i| {
            let (a, b) = seg(i);
            (Vec2::new(a.x.min(b.x) - eps, a.y.min(b.y) - eps), Vec2::new(a.x.max(b.x) + eps, a.y.max(b.y) + eps))
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| boxes[a].0.x.partial_cmp(&boxes[b].0.x).expect("finite"));

    // Adjacent edges folding back onto each other.
    for i in 0..n {
        let (a, b) = seg(i);
        let (_, c) = seg((i + 1) % n);
        let (u, w) = (b - a, c - b);
        if cross2(u, w).abs() <= sin_min * u.norm() * w.norm() && u.dot(w) < T::zero() && !near_quad(proj, b) {
            return nongeneric(Feature::SmallAngle, i, (i + 1) % n);
        }
    }

    let mut crossings = Vec::new();
    let mut suppressed = 0;
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            if boxes[j].0.x > boxes[i].1.x {
                break;
            }
            if boxes[j].0.y > boxes[i].1.y || boxes[i].0.y > boxes[j].1.y || adjacent(i, j) {
                continue;
            }
            let (p, p1) = seg(i);
            let (q, q1) = seg(j);
            let (d1, d2) = (p1 - p, q1 - q);
            let (l1, l2) = (d1.norm(), d2.norm());
            // Vertices touching the other segment.
            for (v, (a, b), e) in [(p, (q, q1), j), (p1, (q, q1), j), (q, (p, p1), i), (q1, (p, p1), i)] {
                let ab = b - a;
                let t = ((v - a).dot(ab) / ab.dot(ab)).max(T::zero()).min(T::one());
                if (a + ab * t).distance(v) <= eps && !near_quad(proj, v) {
                    return nongeneric(Feature::VertexHit, e, if e == i { j } else { i });
                }
            }
            let den = cross2(d1, d2);
            if den.abs() <= sin_min * l1 * l2 {
                // Nearly parallel: only a problem if the segments overlap.
                let off = cross2(d1, q - p).abs() / l1;
                if off <= eps {
                    let s0 = (q - p).dot(d1) / (l1 * l1);
                    let s1 = (q1 - p).dot(d1) / (l1 * l1);
                    if s0.max(s1) >= T::zero() && s0.min(s1) <= T::one() {
                        return nongeneric(Feature::SmallAngle, i, j);
                    }
                }
                continue;
            }
            let s = cross2(q - p, d2) / den;
            let u = cross2(q - p, d1) / den;
            if s < T::zero() || s > T::one() || u < T::zero() || u > T::one() {
                continue;
            }
            let pos = p + d1 * s;
            if near_quad(proj, pos) {
                suppressed += 1;
                continue;
            }
            let angle = (den.abs() / (l1 * l2)).asin();
            let di = proj.depths[i] + (proj.depths[(i + 1) % n] - proj.depths[i]) * s;
            let dj = proj.depths[j] + (proj.depths[(j + 1) % n] - proj.depths[j]) * u;
            if (di - dj).abs() <= eps {
                return nongeneric(Feature::DepthTie, i, j);
            }
            let (over_edge, over_t, under_edge, under_t, od, ud) =
                if di > dj { (i, s, j, u, d1, d2) } else { (j, u, i, s, d2, d1) };
            let sign = if cross2(od, ud) > T::zero() { 1 } else { -1 };
            crossings.push(Crossing { position: pos, over_edge, over_t, under_edge, under_t, sign, transversality_angle: angle });
        }
    }
    for a in 0..crossings.len() {
        for b in a + 1..crossings.len() {
            if crossings[a].position.distance(crossings[b].position) <= eps {
                return nongeneric(Feature::TriplePoint, crossings[a].over_edge, crossings[b].over_edge);
            }
        }
    }

    // Walk the polygon: passages sorted by edge then position on the edge.
    let mut events: Vec<(usize, T, usize, bool)> = Vec::with_capacity(2 * crossings.len());
    for (c, x) in crossings.iter().enumerate() {
        events.push((x.over_edge, x.over_t, c, true));
        events.push((x.under_edge, x.under_t, c, false));
    }
    events.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite"));
    // Number crossings by first appearance.
    let mut map = vec![usize::MAX; crossings.len()];
    let mut next = 0;
    for e in &events {
        if map[e.2] == usize::MAX {
            map[e.2] = next;
            next += 1;
        }
    }
    let passages = events.iter().map(|e| Passage { crossing: map[e.2], over: e.3 }).collect();
    let mut ordered: Vec<(usize, Crossing<T>)> = crossings.iter().enumerate().map(|(old, c)| (map[old], *c)).collect();
    ordered.sort_by_key(|e| e.0);
    let ordered: Vec<Crossing<T>> = ordered.into_iter().map(|e| e.1).collect();
    let signs = ordered.iter().map(|c| c.sign).collect();
    let diagram = KnotDiagram::from_gauss(passages, signs)?;
    Ok(ProjectedDiagram { diagram, crossings: ordered, suppressed })
}

/// Projects along `v` and extracts the diagram, rotating `v` by less than
/// `1e-5` rad and retrying (at most 16 attempts) on non-generic views.
/// Returns the direction actually used.
pub fn extract<T: Scalar>(
    knot: &PolygonalKnot<T>,
    v: &Direction<T>,
    seed: u64,
) -> Result<(ProjectedDiagram<T>, Direction<T>), DiagramError> {
    extract_with(knot, v, seed, &Tolerances::default())
}

pub fn extract_with<T: Scalar>(
    knot: &PolygonalKnot<T>,
    v: &Direction<T>,
    seed: u64,
    tol: &Tolerances,
) -> Result<(ProjectedDiagram<T>, Direction<T>), DiagramError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir = *v;
    let mut last = None;
    for _ in 0..16 {
        match extract_diagram_with(&project(knot, &dir), tol) {
            Ok(d) => return Ok((d, dir)),
            Err(e @ DiagramError::NonGenericProjection { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
        dir = jitter_direction(v, &mut rng, 1e-5);
    }
    Err(last.expect("attempted"))
}

fn jitter_direction<T: Scalar>(v: &Direction<T>, rng: &mut ChaCha8Rng, max_angle: f64) -> Direction<T> {
    use rand::Rng;
    let w = v.vector().cast::<f64>();
    let (e1, e2) = frame(w);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let a = max_angle * rng.gen_range(0.1..0.99);
    let out = w * a.cos() + (e1 * phi.cos() + e2 * phi.sin()) * a.sin();
    Direction::new(out.cast()).expect("unit")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantProjection<T> {
    pub proj: PlanarProjection<T>,
    pub quad_point: Vec2<T>,
}

/// Projection along a secant: its hits all land on one quadruple point,
/// around which a disk of radius `1e-3 * scale` is excluded from crossing
/// extraction.
pub fn project_along_secant<T: Scalar>(
    knot: &PolygonalKnot<T>,
    secant: &SecantLine<T>,
) -> Result<SecantProjection<T>, DiagramError> {
    if secant.hits.len() < 4 {
        return Err(DiagramError::TooFewHits(secant.hits.len()));
    }
    let dir = Direction::new(secant.line.d).map_err(|_| DiagramError::InvalidCode("zero secant direction".into()))?;
    let mut proj = project(knot, &dir);
    let img = |p: Vec3<T>| Vec2::new(p.dot(proj.e1), p.dot(proj.e2));
    let q = img(secant.line.closest_to_origin());
    let spread = secant.hits.iter().map(|h| img(h.point).distance(q)).fold(T::zero(), T::max);
    let scale = knot.scale();
    if spread > scale * T::lit(1e-6) {
        return Err(DiagramError::InconsistentSecant(spread.to_f64_lossy()));
    }
    proj.quad_point = Some((q, scale * T::lit(1e-3)));
    Ok(SecantProjection { proj, quad_point: q })
}

/// Number of maximal runs of consecutive edges meeting the disk of radius
/// `r` around `q`.
pub fn strands_through_disk<T: Scalar>(proj: &PlanarProjection<T>, q: Vec2<T>, r: T) -> usize {
    let n = proj.len();
    let meets: Vec<bool> = (0..n)
        .map(|i| {
            let (a, b) = (proj.points[i], proj.points[(i + 1) % n]);
            let ab = b - a;
            let t = ((q - a).dot(ab) / ab.dot(ab)).max(T::zero()).min(T::one());
            (a + ab * t).distance(q) <= r
        })
        .collect();
    if meets.iter().all(|&m| m) {
        return 1;
    }
    (0..n).filter(|&i| meets[i] && !meets[(i + n - 1) % n]).count()
}

/// Deterministic SVG of a projection on a 1000 x 1000 canvas, with a gap in
/// the under strand at each crossing (2% of the bounding box).
pub fn render_svg<T: Scalar>(proj: &PlanarProjection<T>, diagram: Option<&ProjectedDiagram<T>>) -> String {
    let n = proj.len();
    let pts: Vec<(f64, f64)> = proj.points.iter().map(|p| (p.x.to_f64_lossy(), p.y.to_f64_lossy())).collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let k = 900.0 / span;
    let map = |x: f64, y: f64| (50.0 + (x - x0) * k, 950.0 - (y - y0) * k);
    let gap = 0.02 * ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();

    // Cut intervals (in edge-parameter units) on under edges.
    let mut cuts: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
    let crossings = diagram.map(|d| d.crossings.as_slice()).unwrap_or(&[]);
    for c in crossings {
        let e = c.under_edge;
        let (a, b) = (pts[e], pts[(e + 1) % n]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let t = c.under_t.to_f64_lossy();
        let h = gap / 2.0 / len;
        cuts[e].push((t - h, t + h));
    }

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="1000" height="1000" viewBox="0 0 1000 1000">"#
    );
    let _ = writeln!(s, r#"<metadata>scale {:.6e} units per model unit; crossings {}</metadata>"#, k, crossings.len());
    let _ = writeln!(s, r#"<rect width="1000" height="1000" fill="white"/>"#);
    // Pieces of the polygon between gaps.
    let mut pieces: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        let at = |t: f64| (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
        let mut cs = cuts[i].clone();
        cs.sort_by(|x, y| x.0.total_cmp(&y.0));
        if pieces.last().is_some_and(|p| p.is_empty()) {
            pieces.last_mut().expect("piece").push(a);
        }
        for (lo, hi) in cs {
            pieces.last_mut().expect("piece").push(at(lo.max(0.0)));
            pieces.push(vec![at(hi.min(1.0))]);
        }
        pieces.last_mut().expect("piece").push(b);
    }
    if crossings.is_empty() {
        let d: Vec<String> = pts.iter().map(|&(x, y)| {
            let (u, v) = map(x, y);
            format!("{u:.3},{v:.3}")
        }).collect();
        let _ = writeln!(s, r#"<path class="strand" d="M {} Z" fill="none" stroke="black" stroke-width="3"/>"#, d.join(" L "));
    } else {
        // The walk starts mid-strand; join the last piece onto the first.
        let last = pieces.pop().expect("pieces");
        let mut first = last;
        first.extend(pieces[0].iter().skip(1));
        pieces[0] = first;
        for p in &pieces {
            let d: Vec<String> = p.iter().map(|&(x, y)| {
                let (u, v) = map(x, y);
                format!("{u:.3},{v:.3}")
            }).collect();
            let _ = writeln!(s, r#"<path class="strand" d="M {}" fill="none" stroke="black" stroke-width="3"/>"#, d.join(" L "));
        }
        for c in crossings {
            let (u, v) = map(c.position.x.to_f64_lossy(), c.position.y.to_f64_lossy());
            let _ = writeln!(s, r#"<circle class="gap" cx="{u:.3}" cy="{v:.3}" r="{:.3}" fill="none" stroke="none"/>"#, gap * k / 2.0);
        }
    }
    if let Some((q, r)) = proj.quad_point {
        let (u, v) = map(q.x.to_f64_lossy(), q.y.to_f64_lossy());
        let _ = writeln!(
            s,
            r#"<circle class="quad-point" cx="{u:.3}" cy="{v:.3}" r="{:.3}" fill="none" stroke="red" stroke-width="2"/>"#,
            (r.to_f64_lossy() * k).max(6.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_svg<T: Scalar>(
    proj: &PlanarProjection<T>,
    diagram: Option<&ProjectedDiagram<T>>,
    sink: &mut impl Write,
) -> Result<(), DiagramError> {
    sink.write_all(render_svg(proj, diagram).as_bytes()).map_err(|e| DiagramError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREFOIL: &str = "X(1,5,2,4) X(3,1,4,6) X(5,3,6,2)";
    const FIG8: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";

    #[test]
    fn pd_round_trip() {
        for text in [TREFOIL, FIG8] {
            let d = KnotDiagram::parse_pd(text).unwrap();
            assert_eq!(d.pd_text(), text);
            assert_eq!(KnotDiagram::parse_gauss(&d.gauss_text()).unwrap(), d);
        }
    }

    #[test]
    fn trefoil_signs_follow_pd_rule() {
        let d = KnotDiagram::parse_pd(TREFOIL).unwrap();
        // b = d + 1 at every entry: all positive.
        assert_eq!(d.signs(), &[1, 1, 1]);
        let f = KnotDiagram::parse_pd(FIG8).unwrap();
        assert_eq!(f.signs(), &[1, 1, -1, -1]);
        assert_eq!(f.writhe(), 0);
    }

    #[test]
    fn faces_satisfy_euler() {
        for text in [TREFOIL, FIG8] {
            let d = KnotDiagram::parse_pd(text).unwrap();
            assert_eq!(d.faces().len(), d.n_crossings() + 2);
        }
    }

    #[test]
    fn trefoil_has_three_alternating_bigons() {
        let d = KnotDiagram::parse_pd(TREFOIL).unwrap();
        let cs = d.find_crescents();
        assert_eq!(cs.len(), 3);
        assert!(cs.iter().all(|c| c.alternating));
        assert_eq!(d.eliminate_crescent(&cs[0]), Err(DiagramError::NotR2Eligible(1, 2)));
    }

    #[test]
    fn r2_pair_reduces_to_unknot() {
        // One strand passes over another twice.
        let d = KnotDiagram::parse_gauss("O1+ O2- U1+ U2-").unwrap();
        let cs = d.find_crescents();
        assert!(cs.iter().any(|c| !c.alternating), "{cs:?}");
        let c = cs.iter().find(|c| !c.alternating).unwrap();
        assert_eq!(d.eliminate_crescent(c).unwrap().n_crossings(), 0);
    }

    #[test]
    fn links_are_rejected() {
        // Hopf link: under arcs do not chain into one walk.
        assert!(matches!(KnotDiagram::parse_pd("X(1,3,2,4) X(3,1,4,2)"), Err(DiagramError::NotAKnot(_))));
    }

    #[test]
    fn square_projects_flat() {
        let sq = crate::fixtures::square::<f64>();
        let p = project(&sq, &Direction::z());
        assert!(p.depths.iter().all(|&d| d == 0.0));
        let d = extract_diagram(&p).unwrap();
        assert_eq!(d.diagram.n_crossings(), 0);
        assert_eq!(d.diagram.pd_text(), "");
        for i in 0..4 {
            assert!(p.lift(i).distance(sq.vertex(i)) < 1e-15);
        }
    }

    #[test]
    fn opposite_views_are_reflections() {
        let k = crate::fixtures::trefoil_polygon::<f64>();
        let v = Direction::from_f64(0.3, 0.4, 0.8).unwrap();
        let a = project(&k, &v);
        let b = project(&k, &v.neg());
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p.x - q.x).abs() < 1e-12 && (p.y + q.y).abs() < 1e-12);
        }
    }

    #[test]
    fn triple_point_is_reported() {
        // Three strands through the origin of the xy-plane at different heights.
        let pts = [
            [-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [0.5, 0.866, 1.0], [-0.5, -0.866, 1.0],
            [-0.5, -1.5, 2.0], [0.5, -0.866, 2.0], [-0.5, 0.866, 2.0], [-1.5, 1.0, 1.0],
        ];
        let k = PolygonalKnot::<f64>::synthetic(pts.iter().map(|p| Vec3::from_f64(p[0], p[1], p[2])).collect()).unwrap();
        let r = extract_diagram(&project(&k, &Direction::z()));
        assert!(
            matches!(r, Err(DiagramError::NonGenericProjection { feature: Feature::TriplePoint, .. })),
            "{r:?}"
        );
    }

    #[test]
    fn svg_is_deterministic() {
        let sq = crate::fixtures::square::<f64>();
        let p = project(&sq, &Direction::z());
        let d = extract_diagram(&p).unwrap();
        let a = render_svg(&p, Some(&d));
        assert_eq!(a, render_svg(&p, Some(&d)));
        assert_eq!(a.matches("class=\"strand\"").count(), 1);
        assert_eq!(a.matches("class=\"gap\"").count(), 0);
    }
}
