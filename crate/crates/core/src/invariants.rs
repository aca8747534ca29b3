//! Alexander polynomial and determinant from a diagram, and identification
//! against a table of prime knots.
//!
//! The Alexander matrix comes from Fox derivatives of the Wirtinger
//! relations, one row per crossing. Its `(n-1)`-minor is evaluated exactly
//! by fraction-free (Bareiss) elimination over `Z[t, 1/t]` and normalized
//! so that `Δ(t) = Δ(1/t)` and `Δ(1) = 1`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::KnotDiagram;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvariantError {
    #[error("NotAKnot: {0}")]
    NotAKnot(String),
    #[error("SingularMatrix: Alexander minor vanished")]
    SingularMatrix,
    #[error("Overflow: coefficient does not fit the requested integer type")]
    Overflow,
    #[error("InvalidTable: line {line}: {reason}")]
    InvalidTable { line: usize, reason: String },
    #[error("Io: {0}")]
    Io(String),
}

/// Integer coefficient types usable in [`LaurentPoly`].
pub trait Coeff: Integer + Signed + Clone + fmt::Debug + fmt::Display + FromPrimitive + ToPrimitive + Send + Sync {}

impl<C> Coeff for C where C: Integer + Signed + Clone + fmt::Debug + fmt::Display + FromPrimitive + ToPrimitive + Send + Sync {}

/// `sum coeffs[k] * t^(lo + k)`, with nonzero end coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LaurentPoly<C> {
    lo: i64,
    coeffs: Vec<C>,
}

impl<C: Coeff> LaurentPoly<C> {
    pub fn new(lo: i64, coeffs: Vec<C>) -> Self {
        let mut p = LaurentPoly { lo, coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.lo += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.lo = 0;
        }
    }

    pub fn zero() -> Self {
        LaurentPoly { lo: 0, coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::new(0, vec![c])
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn monomial(c: C, k: i64) -> Self {
        Self::new(k, vec![c])
    }

    /// Coefficients listed from the lowest exponent of a symmetric polynomial,
    /// e.g. `[1, -1, 1]` is `t^-1 - 1 + t`.
    pub fn from_symmetric(coeffs: Vec<C>) -> Self {
        let lo = -((coeffs.len() as i64 - 1) / 2);
        Self::new(lo, coeffs)
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> C {
        if k < self.lo || k > self.hi() {
            return C::zero();
        }
        self.coeffs[(k - self.lo) as usize].clone()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Value at `t = 1`.
    pub fn at_one(&self) -> C {
        self.coeffs.iter().fold(C::zero(), |a, c| a + c.clone())
    }

    /// Value at `t = -1`.
    pub fn at_minus_one(&self) -> C {
        let mut s = C::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if (self.lo + k as i64).rem_euclid(2) == 0 {
                s = s + c.clone();
            } else {
                s = s - c.clone();
            }
        }
        s
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(o.lo);
        let hi = self.hi().max(o.hi());
        Self::new(lo, (lo..=hi).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { lo: self.lo, coeffs: self.coeffs.iter().map(|c| C::zero() - c.clone()).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(self.lo + o.lo, out)
    }

    /// Exact quotient, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let mut rem = self.coeffs.clone();
        let dl = d.coeffs.len();
        if rem.len() < dl {
            return None;
        }
        let lead = d.coeffs.last().expect("nonzero").clone();
        let mut q = vec![C::zero(); rem.len() - dl + 1];
        for k in (0..q.len()).rev() {
            let top = rem[k + dl - 1].clone();
            if top.is_zero() {
                continue;
            }
            let (qk, r) = top.div_rem(&lead);
            if !r.is_zero() {
                return None;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - qk.clone() * dc.clone();
            }
            q[k] = qk;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::new(self.lo - d.lo, q))
    }

    pub fn is_symmetric(&self) -> bool {
        self.lo == -self.hi() && self.coeffs.iter().eq(self.coeffs.iter().rev())
    }

    /// Multiplies by the unit `±t^k` that centres the exponent range on 0
    /// and makes `Δ(1) = 1` (or, if `Δ(1)` is not `±1`, the leading
    /// coefficient positive).
    pub fn normalize(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let span = self.hi() - self.lo;
        let mut p = LaurentPoly { lo: -span.div_euclid(2), coeffs: self.coeffs.clone() };
        let v = p.at_one();
        let negate = if v.is_one() || (C::zero() - v.clone()).is_one() {
            v.is_negative()
        } else {
            p.coeffs.last().expect("nonzero").is_negative()
        };
        if negate {
            p = p.neg();
        }
        p
    }

    pub fn convert<D: Coeff>(&self) -> Option<LaurentPoly<D>> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.to_i128().and_then(D::from_i128).or_else(|| D::from_str_radix(&c.to_string(), 10).ok()))
            .collect::<Option<Vec<D>>>()?;
        Some(LaurentPoly { lo: self.lo, coeffs })
    }

    /// Space-separated coefficients from the lowest exponent.
    pub fn coeff_string(&self) -> String {
        self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl<C: Coeff> fmt::Display for LaurentPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for k in (self.lo..=self.hi()).rev() {
            let c = self.coeff(k);
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let unit = a.is_one();
            match k {
                0 => write!(f, "{a}")?,
                1 if unit => write!(f, "t")?,
                1 => write!(f, "{a}t")?,
                _ if unit => write!(f, "t^{k}")?,
                _ => write!(f, "{a}t^{k}")?,
            }
        }
        Ok(())
    }
}

type BigPoly = LaurentPoly<BigInt>;

/// Determinant by Bareiss elimination; every division is exact.
fn bareiss(mut m: Vec<Vec<BigPoly>>) -> BigPoly {
    let n = m.len();
    if n == 0 {
        return BigPoly::one();
    }
    let mut sign = false;
    let mut prev = BigPoly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = !sign;
                }
                None => return BigPoly::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.div_exact(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = BigPoly::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign {
        d.neg()
    } else {
        d
    }
}

/// Alexander matrix with one row per crossing and one column per Wirtinger
/// generator (arc between consecutive under passages).
pub fn alexander_matrix(d: &KnotDiagram) -> Vec<Vec<LaurentPoly<i64>>> {
    let n = d.n_crossings();
    let m = 2 * n;
    let ps = d.passages();
    // Generator of the segment entering passage q.
    let mut gen = vec![usize::MAX; m];
    if n > 0 {
        let start = (0..m).find(|&q| !ps[q].over).expect("under passage") + 1;
        let mut g = 0;
        for k in 0..m {
            let s = (start + k) % m;
            gen[s] = g;
            if !ps[s].over {
                g += 1;
            }
        }
    }
    let t = |c: i64, k: i64| LaurentPoly::monomial(c, k);
    let mut rows = vec![vec![LaurentPoly::zero(); n]; n];
    for (c, &(u, o)) in d.passage_positions().iter().enumerate() {
        let (i, j, k) = (gen[u], gen[(u + 1) % m], gen[o]);
        let (ck, ci, cj) = if d.signs()[c] > 0 {
            (t(1, 0).add(&t(-1, 1)), t(1, 1), t(-1, 0))
        } else {
            (t(1, 1).add(&t(-1, 0)), t(1, 0), t(-1, 1))
        };
        let row = &mut rows[c];
        row[k] = row[k].add(&ck);
        row[i] = row[i].add(&ci);
        row[j] = row[j].add(&cj);
    }
    rows
}

/// Normalized Alexander polynomial of a knot diagram.
pub fn alexander_polynomial<C: Coeff>(d: &KnotDiagram) -> Result<LaurentPoly<C>, InvariantError> {
    let n = d.n_crossings();
    if n == 0 {
        return Ok(LaurentPoly::one());
    }
    if d.faces().len() != n + 2 {
        return Err(InvariantError::NotAKnot("Gauss code is not planar".into()));
    }
    let a = alexander_matrix(d);
    let minor: Vec<Vec<BigPoly>> = a[..n - 1]
        .iter()
        .map(|row| row[..n - 1].iter().map(|p| p.convert::<BigInt>().expect("fits")).collect())
        .collect();
    let det = bareiss(minor);
    if det.is_zero() {
        return Err(InvariantError::SingularMatrix);
    }
    det.normalize().convert().ok_or(InvariantError::Overflow)
}

/// `|Δ(-1)|`.
pub fn determinant(d: &KnotDiagram) -> Result<u64, InvariantError> {
    let p: LaurentPoly<BigInt> = alexander_polynomial(d)?;
    p.at_minus_one().abs().to_u64().ok_or(InvariantError::Overflow)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marker {
    Star,
    Diamond,
    Times,
    Circ,
    CircStar,
    CircDiamond,
}

impl FromStr for Marker {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "star" => Marker::Star,
            "diamond" => Marker::Diamond,
            "times" => Marker::Times,
            "circ" => Marker::Circ,
            "circ_star" => Marker::CircStar,
            "circ_diamond" => Marker::CircDiamond,
            _ => return Err(format!("unknown marker {s:?}")),
        })
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Marker::Star => "star",
            Marker::Diamond => "diamond",
            Marker::Times => "times",
            Marker::Circ => "circ",
            Marker::CircStar => "circ_star",
            Marker::CircDiamond => "circ_diamond",
        };
        f.write_str(s)
    }
}

impl Marker {
    pub fn is_torus(self) -> bool {
        matches!(self, Marker::Circ | Marker::CircStar | Marker::CircDiamond)
    }

    pub fn is_star(self) -> bool {
        matches!(self, Marker::Star | Marker::CircStar)
    }

    pub fn is_diamond(self) -> bool {
        matches!(self, Marker::Diamond | Marker::CircDiamond)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Range {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotTableEntry {
    pub name: String,
    pub crossing_number: u32,
    pub bridge_index: u32,
    pub marker: Marker,
    pub two_bridge: bool,
    pub torus: Option<(i64, i64)>,
    pub edge_bound: i64,
    pub alexander: LaurentPoly<i64>,
    pub table_range: Range,
}

#[derive(Debug, Deserialize)]
struct Row {
    name: String,
    crossings: u32,
    bridge: u32,
    marker: String,
    two_bridge: bool,
    torus_p: Option<i64>,
    torus_q: Option<i64>,
    edge_bound: i64,
    alexander_coeffs: String,
    range_lo: i64,
    range_hi: i64,
}

/// Ingested table plus the classes of entries sharing an Alexander
/// polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotTable {
    entries: Vec<KnotTableEntry>,
    classes: BTreeMap<LaurentPoly<i64>, Vec<usize>>,
}

impl KnotTable {
    pub fn parse(text: &str) -> Result<Self, InvariantError> {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut entries = Vec::new();
        for rec in reader.deserialize::<Row>() {
            let line = entries.len() + 2;
            let bad = |reason: String| InvariantError::InvalidTable { line, reason };
            let row = rec.map_err(|e| bad(e.to_string()))?;
            let marker: Marker = row.marker.parse().map_err(bad)?;
            let coeffs = row
                .alexander_coeffs
                .split_whitespace()
                .map(|s| s.parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| bad(e.to_string()))?;
            let alexander = LaurentPoly::from_symmetric(coeffs);
            if !alexander.is_symmetric() || alexander.at_one() != 1 {
                return Err(bad(format!("{}: Alexander polynomial {alexander} is not normalized", row.name)));
            }
            if row.range_lo > row.range_hi {
                return Err(bad(format!("{}: range {}..{} is empty", row.name, row.range_lo, row.range_hi)));
            }
            let torus = match (row.torus_p, row.torus_q) {
                (Some(p), Some(q)) => {
                    let v = crate::directional::torus_superbridge_index(p, q).map_err(|e| bad(e.to_string()))?;
                    if v < row.range_lo || v > row.range_hi {
                        return Err(bad(format!(
                            "{}: torus value {v} outside table range {}..{}",
                            row.name, row.range_lo, row.range_hi
                        )));
                    }
                    Some((p, q))
                }
                (None, None) => None,
                _ => return Err(bad(format!("{}: half-specified torus type", row.name))),
            };
            if torus.is_some() != marker.is_torus() {
                return Err(bad(format!("{}: marker {marker} disagrees with torus columns", row.name)));
            }
            entries.push(KnotTableEntry {
                name: row.name,
                crossing_number: row.crossings,
                bridge_index: row.bridge,
                marker,
                two_bridge: row.two_bridge,
                torus,
                edge_bound: row.edge_bound,
                alexander,
                table_range: Range { lo: row.range_lo, hi: row.range_hi },
            });
        }
        let mut classes: BTreeMap<LaurentPoly<i64>, Vec<usize>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            classes.entry(e.alexander.clone()).or_default().push(i);
        }
        Ok(KnotTable { entries, classes })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InvariantError> {
        let text = std::fs::read_to_string(path).map_err(|e| InvariantError::Io(e.to_string()))?;
        Self::parse(&text)
    }

    /// The shipped table of prime knots up to nine crossings.
    pub fn builtin() -> Self {
        Self::parse(crate::fixtures::TABLE1_CSV).expect("bundled table is valid")
    }

    pub fn entries(&self) -> &[KnotTableEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&KnotTableEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Groups of two or more entries with equal Alexander polynomials.
    pub fn ambiguous_classes(&self) -> Vec<Vec<&KnotTableEntry>> {
        self.classes
            .values()
            .filter(|v| v.len() > 1)
            .map(|v| v.iter().map(|&i| &self.entries[i]).collect())
            .collect()
    }

    pub fn identify_polynomial(&self, p: &LaurentPoly<i64>) -> Vec<&KnotTableEntry> {
        self.classes.get(&p.normalize()).map(|v| v.iter().map(|&i| &self.entries[i]).collect()).unwrap_or_default()
    }

    /// Candidate set of table entries with the diagram's Alexander
    /// polynomial; empty when nothing matches.
    pub fn identify(&self, d: &KnotDiagram) -> Result<Vec<&KnotTableEntry>, InvariantError> {
        Ok(self.identify_polynomial(&alexander_polynomial(d)?))
    }
}

/// Parses the `name X(...) X(...)` lines of a PD list file.
pub fn parse_pd_list(text: &str) -> Result<Vec<(String, KnotDiagram)>, crate::diagram::DiagramError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let name = l.split_whitespace().next().unwrap_or_default().to_string();
            Ok((name, KnotDiagram::parse_pd(l)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(lo: i64, c: &[i64]) -> LaurentPoly<i64> {
        LaurentPoly::new(lo, c.to_vec())
    }

    #[test]
    fn arithmetic() {
        let a = p(-1, &[1, -1, 1]);
        let b = p(0, &[1, 1]);
        let prod = a.mul(&b);
        assert_eq!(prod, p(-1, &[1, 0, 0, 1]));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        assert_eq!(prod.div_exact(&p(0, &[2])), None);
        assert_eq!(a.sub(&a), LaurentPoly::zero());
        assert_eq!(a.at_minus_one(), -3);
    }

    #[test]
    fn normalization() {
        let fig8 = p(0, &[1, -3, 1]);
        let n = fig8.normalize();
        assert_eq!(n, p(-1, &[-1, 3, -1]));
        assert_eq!(n.normalize(), n);
        assert!(n.is_symmetric());
        assert_eq!(n.to_string(), "-t + 3 - t^-1");
        assert_eq!(p(3, &[1, -1, 1]).normalize().to_string(), "t - 1 + t^-1");
    }

    #[test]
    fn trefoil_and_figure_eight() {
        let tre = KnotDiagram::parse_pd("X(1,5,2,4) X(3,1,4,6) X(5,3,6,2)").unwrap();
        let fig = KnotDiagram::parse_pd("X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)").unwrap();
        assert_eq!(alexander_polynomial::<i64>(&tre).unwrap(), p(-1, &[1, -1, 1]));
        assert_eq!(alexander_polynomial::<i64>(&fig).unwrap(), p(-1, &[-1, 3, -1]));
        assert_eq!(determinant(&tre).unwrap(), 3);
        assert_eq!(determinant(&fig).unwrap(), 5);
        assert_eq!(determinant(&KnotDiagram::unknot()).unwrap(), 1);
    }

    #[test]
    fn kinked_unknot_is_trivial() {
        let d = KnotDiagram::parse_gauss("O1+ U1+").unwrap();
        assert_eq!(alexander_polynomial::<i64>(&d).unwrap(), LaurentPoly::one());
    }

    #[test]
    fn table_ingests() {
        let t = KnotTable::builtin();
        assert_eq!(t.entries().len(), 84);
        assert_eq!(t.get("8_19").unwrap().torus, Some((3, 4)));
    }
}
