use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T> From<[T; 3]> for Vec3<T> {
    fn from([x, y, z]: [T; 3]) -> Self {
        Vec3 { x, y, z }
    }
}

impl<T> From<Vec3<T>> for [T; 3] {
    fn from(v: Vec3<T>) -> Self {
        [v.x, v.y, v.z]
    }
}

impl<T: Serialize> Serialize for Vec3<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.x, &self.y, &self.z).serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Vec3<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y, z) = <(T, T, T)>::deserialize(d)?;
        Ok(Vec3 { x, y, z })
    }
}

impl<T: Scalar> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Vec3::new(T::lit(x), T::lit(y), T::lit(z))
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction, `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn component_min(self, o: Self) -> Self {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn component_max(self, o: Self) -> Self {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn cast<U: Scalar>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
            U::lit(self.z.to_f64_lossy()),
        )
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }
}

impl<T: Scalar> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Scalar> Div<T> for Vec3<T> {
    type Output = Self;
    fn div(self, s: T) -> Self {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T> From<[T; 2]> for Vec2<T> {
    fn from([x, y]: [T; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl<T> From<Vec2<T>> for [T; 2] {
    fn from(v: Vec2<T>) -> Self {
        [v.x, v.y]
    }
}

impl<T: Serialize> Serialize for Vec2<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.x, &self.y).serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Vec2<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (x, y) = <(T, T)>::deserialize(d)?;
        Ok(Vec2 { x, y })
    }
}

impl<T: Scalar> Vec2<T> {
    pub const fn new(x: T, y: T) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }

    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Axis-aligned bounding box diagonal of a point set; the length scale that
/// relative tolerances are multiplied by.
pub fn bbox_diagonal<T: Scalar>(points: &[Vec3<T>]) -> T {
    let Some(first) = points.first() else {
        return T::zero();
    };
    let (lo, hi) = points
        .iter()
        .fold((*first, *first), |(lo, hi), p| (lo.component_min(*p), hi.component_max(*p)));
    (hi - lo).norm()
}

/// Parameters `(s, t)` of the closest points between segments `p0p1` and
/// `q0q1`, clamped to `[0, 1]`.
pub fn segment_closest_params<T: Scalar>(
    p0: Vec3<T>,
    p1: Vec3<T>,
    q0: Vec3<T>,
    q1: Vec3<T>,
) -> (T, T) {
    let zero = T::zero();
    let one = T::one();
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.norm_sq();
    let e = d2.norm_sq();
    let f = d2.dot(r);
    if a <= T::epsilon() && e <= T::epsilon() {
        return (zero, zero);
    }
    if a <= T::epsilon() {
        return (zero, (f / e).max(zero).min(one));
    }
    let c = d1.dot(r);
    if e <= T::epsilon() {
        return ((-c / a).max(zero).min(one), zero);
    }
    let b = d1.dot(d2);
    let denom = a * e - b * b;
    let mut s = if denom > zero { ((b * f - c * e) / denom).max(zero).min(one) } else { zero };
    let mut t = (b * s + f) / e;
    if t < zero {
        t = zero;
        s = (-c / a).max(zero).min(one);
    } else if t > one {
        t = one;
        s = ((b - c) / a).max(zero).min(one);
    }
    (s, t)
}

pub fn segment_distance<T: Scalar>(p0: Vec3<T>, p1: Vec3<T>, q0: Vec3<T>, q1: Vec3<T>) -> T {
    let (s, t) = segment_closest_params(p0, p1, q0, q1);
    p0.lerp(p1, s).distance(q0.lerp(q1, t))
}

/// Intersection of segment `a b` with triangle `p q r`, as the parameter
/// along the segment. Coplanar configurations report no hit.
pub fn segment_triangle_hit<T: Scalar>(
    a: Vec3<T>,
    b: Vec3<T>,
    p: Vec3<T>,
    q: Vec3<T>,
    r: Vec3<T>,
) -> Option<T> {
    let dir = b - a;
    let e1 = q - p;
    let e2 = r - p;
    let h = dir.cross(e2);
    let det = e1.dot(h);
    let scale = dir.norm() * e1.norm() * e2.norm();
    if scale == T::zero() || det.abs() <= T::lit(1e-14) * scale {
        return None;
    }
    let inv = T::one() / det;
    let s = a - p;
    let u = s.dot(h) * inv;
    if u < T::zero() || u > T::one() {
        return None;
    }
    let qv = s.cross(e1);
    let v = dir.dot(qv) * inv;
    if v < T::zero() || u + v > T::one() {
        return None;
    }
    let t = e2.dot(qv) * inv;
    if t < T::zero() || t > T::one() {
        return None;
    }
    Some(t)
}

fn point_in_triangle_tol<T: Scalar>(x: Vec3<T>, p: Vec3<T>, q: Vec3<T>, r: Vec3<T>, tol: T) -> bool {
    let n = (q - p).cross(r - p);
    let nn = n.norm_sq();
    if nn > T::zero() {
        let w = x - p;
        let b1 = w.cross(r - p).dot(n) / nn;
        let b2 = (q - p).cross(w).dot(n) / nn;
        if b1 >= T::zero() && b2 >= T::zero() && b1 + b2 <= T::one() {
            return true;
        }
    }
    segment_distance(x, x, p, q) <= tol
        || segment_distance(x, x, q, r) <= tol
        || segment_distance(x, x, r, p) <= tol
}

/// Closed segment/triangle contact test with slack `tol`, including the
/// coplanar case that [`segment_triangle_hit`] ignores. Conservative: near
/// misses within `tol` count as contact.
pub fn segment_touches_triangle<T: Scalar>(
    a: Vec3<T>,
    b: Vec3<T>,
    p: Vec3<T>,
    q: Vec3<T>,
    r: Vec3<T>,
    tol: T,
) -> bool {
    let n = (q - p).cross(r - p);
    let Some(nh) = n.normalized() else {
        return segment_distance(a, b, p, q) <= tol
            || segment_distance(a, b, q, r) <= tol
            || segment_distance(a, b, r, p) <= tol;
    };
    let da = (a - p).dot(nh);
    let db = (b - p).dot(nh);
    if da.abs() <= tol && db.abs() <= tol {
        return point_in_triangle_tol(a, p, q, r, tol)
            || point_in_triangle_tol(b, p, q, r, tol)
            || segment_distance(a, b, p, q) <= tol
            || segment_distance(a, b, q, r) <= tol
            || segment_distance(a, b, r, p) <= tol;
    }
    if da.abs() <= tol && point_in_triangle_tol(a - nh * da, p, q, r, tol) {
        return true;
    }
    if db.abs() <= tol && point_in_triangle_tol(b - nh * db, p, q, r, tol) {
        return true;
    }
    if (da > T::zero()) == (db > T::zero()) {
        return false;
    }
    let t = da / (da - db);
    point_in_triangle_tol(a.lerp(b, t), p, q, r, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_is_right_handed() {
        let x = Vec3::<f64>::from_f64(1.0, 0.0, 0.0);
        let y = Vec3::<f64>::from_f64(0.0, 1.0, 0.0);
        assert_eq!(x.cross(y), Vec3::from_f64(0.0, 0.0, 1.0));
    }

    #[test]
    fn skew_segment_distance() {
        let d = segment_distance(
            Vec3::<f64>::from_f64(-1.0, 0.0, 0.0),
            Vec3::from_f64(1.0, 0.0, 0.0),
            Vec3::from_f64(0.0, -1.0, 2.0),
            Vec3::from_f64(0.0, 1.0, 2.0),
        );
        assert!((d - 2.0).abs() < 1e-15);
    }

    #[test]
    fn segment_pierces_triangle() {
        let hit = segment_triangle_hit(
            Vec3::<f64>::from_f64(0.2, 0.2, -1.0),
            Vec3::from_f64(0.2, 0.2, 1.0),
            Vec3::from_f64(0.0, 0.0, 0.0),
            Vec3::from_f64(1.0, 0.0, 0.0),
            Vec3::from_f64(0.0, 1.0, 0.0),
        );
        assert_eq!(hit, Some(0.5));
        let miss = segment_triangle_hit(
            Vec3::<f64>::from_f64(0.8, 0.8, -1.0),
            Vec3::from_f64(0.8, 0.8, 1.0),
            Vec3::from_f64(0.0, 0.0, 0.0),
            Vec3::from_f64(1.0, 0.0, 0.0),
            Vec3::from_f64(0.0, 1.0, 0.0),
        );
        assert_eq!(miss, None);
    }

    #[test]
    fn coplanar_contact_is_detected() {
        let p = Vec3::<f64>::from_f64(0.0, 0.0, 0.0);
        let q = Vec3::from_f64(1.0, 0.0, 0.0);
        let r = Vec3::from_f64(0.0, 1.0, 0.0);
        let a = Vec3::from_f64(-1.0, 0.3, 0.0);
        let b = Vec3::from_f64(2.0, 0.3, 0.0);
        assert_eq!(segment_triangle_hit(a, b, p, q, r), None);
        assert!(segment_touches_triangle(a, b, p, q, r, 1e-12));
        let far = Vec3::from_f64(-1.0, 3.0, 0.0);
        assert!(!segment_touches_triangle(a, far, p, q, r, 1e-12));
    }
}
