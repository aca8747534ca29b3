//! Univariate polynomials over the rationals: exact evaluation, GCD and
//! Sturm-sequence real root isolation.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense polynomial with coefficients of `t^0 .. t^n`, trailing zeros trimmed.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

impl fmt::Debug for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("({c})t^{i}"))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or a decimal literal such as `"-51.5"` exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(n, d);
        return Some(if neg { -r } else { r });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // Scale so that the integer division keeps ~64 significant bits.
    let n = r.numer();
    let d = r.denom();
    if n.is_zero() {
        return 0.0;
    }
    let shift = n.bits() as i64 - d.bits() as i64 - 64;
    let (q, exp) = if shift > 0 {
        (n / (d << shift as usize), shift)
    } else {
        ((n << (-shift) as usize) / d, shift)
    };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(exp as i32)
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        RationalPoly::new(coeffs.iter().map(|&c| rat(c, 1)).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    /// Exact evaluation at a float argument, rounded once at the end.
    pub fn eval_f64(&self, t: f64) -> f64 {
        rational_to_f64(&self.eval(&rational_from_f64(t)))
    }

    pub fn derivative(&self) -> RationalPoly {
        RationalPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn scale(&self, k: &BigRational) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, o: &RationalPoly) -> RationalPoly {
        if self.is_zero() || o.is_zero() {
            return RationalPoly::default();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }

    pub fn sub(&self, o: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = BigRational::zero();
        RationalPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&z) - o.coeffs.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    /// Euclidean division `self = q * d + r`.
    pub fn div_rem(&self, d: &RationalPoly) -> (RationalPoly, RationalPoly) {
        let dl = d.leading().expect("division by zero polynomial");
        let dd = d.coeffs.len() - 1;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (RationalPoly::default(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / dl;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (RationalPoly::new(q), RationalPoly::new(r))
    }

    pub fn monic(&self) -> RationalPoly {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => self.clone(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &RationalPoly) -> RationalPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors.
    pub fn square_free(&self) -> RationalPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    fn sign_at(&self, t: &BigRational) -> i8 {
        let v = self.eval(t);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    fn sturm_sequence(&self) -> Vec<RationalPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(r.scale(&rat(-1, 1)));
        }
        seq
    }

    fn sign_variations(seq: &[RationalPoly], t: &BigRational) -> usize {
        let signs: Vec<i8> = seq.iter().map(|p| p.sign_at(t)).filter(|&s| s != 0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Real roots in the half-open interval `[lo, hi)`, each isolated by
    /// Sturm bisection and refined until the bracket is narrower than `tol`.
    pub fn real_roots_in(&self, lo: &BigRational, hi: &BigRational, tol: f64) -> Vec<IsolatedRoot> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let p = self.square_free();
        let seq = p.sturm_sequence();
        let count = |a: &BigRational, b: &BigRational| {
            // Number of distinct roots in (a, b].
            Self::sign_variations(&seq, a) - Self::sign_variations(&seq, b)
        };
        let tol = rational_from_f64(tol);
        let mut out = Vec::new();
        // Root exactly at the left end belongs to the half-open interval.
        if p.sign_at(lo) == 0 {
            out.push(IsolatedRoot { lo: lo.clone(), hi: lo.clone() });
        }
        let mut stack = vec![(lo.clone(), hi.clone())];
        while let Some((a, b)) = stack.pop() {
            let n = count(&a, &b);
            if n == 0 {
                continue;
            }
            if n == 1 {
                if p.sign_at(&b) == 0 {
                    if &b != hi {
                        out.push(IsolatedRoot { lo: b.clone(), hi: b });
                    }
                    continue;
                }
                out.push(refine(&p, a, b, &tol));
                continue;
            }
            let mid = (&a + &b) / rat(2, 1);
            stack.push((a, mid.clone()));
            stack.push((mid, b));
        }
        out.sort_by(|x, y| x.lo.cmp(&y.lo));
        out
    }
}

/// A real root bracketed by `[lo, hi]`; `lo == hi` when it is exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolatedRoot {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl IsolatedRoot {
    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / rat(2, 1)
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

// Bisection on a bracket (a, b] holding exactly one simple root of the
// square-free polynomial, with sign(p(a)) != sign(p(b)) unless p(a) == 0.
fn refine(p: &RationalPoly, mut a: BigRational, mut b: BigRational, tol: &BigRational) -> IsolatedRoot {
    let sb = p.sign_at(&b);
    while &(&b - &a) > tol {
        let mid = (&a + &b) / rat(2, 1);
        let sm = p.sign_at(&mid);
        if sm == 0 {
            return IsolatedRoot { lo: mid.clone(), hi: mid };
        }
        if sm == sb {
            b = mid;
        } else {
            a = mid;
        }
    }
    IsolatedRoot { lo: a, hi: b }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("-51.5"), Some(rat(-103, 2)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn gcd_of_shared_linear_factors() {
        // (t-1)(t-2) and (t-1)(t+3)
        let a = RationalPoly::from_i64(&[2, -3, 1]);
        let b = RationalPoly::from_i64(&[-3, 2, 1]);
        assert_eq!(a.gcd(&b), RationalPoly::from_i64(&[-1, 1]));
    }

    #[test]
    fn square_free_drops_multiplicity() {
        // (t-1)^2 (t+1)
        let p = RationalPoly::from_i64(&[1, -1, -1, 1]);
        assert_eq!(p.square_free(), RationalPoly::from_i64(&[-1, 0, 1]));
    }

    #[test]
    fn sturm_isolates_all_roots() {
        // (t - 1/10)(t - 1/4)(t - 1/2), rescaled to integers: (10t-1)(4t-1)(2t-1)
        let p = RationalPoly::from_i64(&[-1, 10])
            .mul(&RationalPoly::from_i64(&[-1, 4]))
            .mul(&RationalPoly::from_i64(&[-1, 2]));
        let roots = p.real_roots_in(&rat(0, 1), &rat(1, 1), 1e-14);
        let got: Vec<f64> = roots.iter().map(IsolatedRoot::to_f64).collect();
        let want = [0.1, 0.25, 0.5];
        assert_eq!(got.len(), 3);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-13, "{g} vs {w}");
        }
    }

    #[test]
    fn half_open_interval_convention() {
        // t (t - 1): root 0 included, root 1 excluded on [0, 1).
        let p = RationalPoly::from_i64(&[0, -1, 1]);
        let roots = p.real_roots_in(&rat(0, 1), &rat(1, 1), 1e-12);
        assert_eq!(roots.len(), 1);
        assert!(roots[0].is_exact());
        assert_eq!(roots[0].to_f64(), 0.0);
    }

    #[test]
    fn rational_to_f64_is_correctly_scaled() {
        let r = rat(42224361, 1146679);
        assert!((rational_to_f64(&r) - 42224361.0 / 1146679.0).abs() < 1e-12);
        assert_eq!(rational_to_f64(&rational_from_f64(-0.84)), -0.84);
    }
}
