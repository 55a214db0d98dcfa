//! Exact arithmetic in the real number field Q(theta), where theta is a
//! distinguished real root of a monic irreducible rational polynomial.
//!
//! Elements are residue-class polynomials in theta. Comparisons are decided
//! exactly: the isolating interval of theta is refined by bisection until
//! rational interval evaluation determines the sign (a nonzero element of the
//! field cannot evaluate to zero at theta, so this terminates).

use std::cell::RefCell;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::RatPoly;

/// An element of Q(theta), `coeffs[i]` the coefficient of theta^i, reduced
/// modulo the minimal polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldElem {
    pub coeffs: Vec<BigRational>,
}

impl FieldElem {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

/// Rational interval `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    fn point(x: BigRational) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    fn add(&self, other: &Self) -> Self {
        RatInterval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    fn mul(&self, other: &Self) -> Self {
        let c1 = &self.lo * &other.lo;
        let c2 = &self.lo * &other.hi;
        let c3 = &self.hi * &other.lo;
        let c4 = &self.hi * &other.hi;
        let mut lo = c1.clone();
        let mut hi = c1;
        for c in [c2, c3, c4] {
            if c < lo {
                lo = c.clone();
            }
            if c > hi {
                hi = c;
            }
        }
        RatInterval { lo, hi }
    }

    fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Upper bound for the absolute value.
    pub fn abs_hi(&self) -> BigRational {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b { a } else { b }
    }
}

/// The field Q(theta) with a refinable isolating interval for theta.
#[derive(Debug)]
pub struct NumberField {
    minpoly: RatPoly,
    degree: usize,
    interval: RefCell<(BigRational, BigRational)>,
}

impl NumberField {
    /// `minpoly` must be monic and irreducible over Q; the interval must
    /// isolate a simple real root with a sign change of `minpoly` across it
    /// (for degree 1 the root is exact and the interval is ignored).
    pub fn new(minpoly: RatPoly, lo: BigRational, hi: BigRational) -> Self {
        let degree = minpoly.degree();
        assert!(degree >= 1);
        assert!(minpoly.coeffs.last().unwrap().is_one(), "minimal polynomial must be monic");
        let (lo, hi) = if degree == 1 {
            let root = -minpoly.coeffs[0].clone();
            (root.clone(), root)
        } else {
            assert!(
                (minpoly.eval(&lo) * minpoly.eval(&hi)).is_negative(),
                "interval must isolate a simple root with a sign change"
            );
            (lo, hi)
        };
        NumberField { minpoly, degree, interval: RefCell::new((lo, hi)) }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn minpoly(&self) -> &RatPoly {
        &self.minpoly
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem { coeffs: vec![BigRational::zero(); self.degree] }
    }

    pub fn one(&self) -> FieldElem {
        self.from_rational(BigRational::one())
    }

    pub fn from_rational(&self, x: BigRational) -> FieldElem {
        let mut coeffs = vec![BigRational::zero(); self.degree];
        coeffs[0] = x;
        FieldElem { coeffs }
    }

    /// The generator theta itself.
    pub fn theta(&self) -> FieldElem {
        if self.degree == 1 {
            return self.from_rational(-self.minpoly.coeffs[0].clone());
        }
        let mut coeffs = vec![BigRational::zero(); self.degree];
        coeffs[1] = BigRational::one();
        FieldElem { coeffs }
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        FieldElem {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        FieldElem { coeffs: a.coeffs.iter().map(|x| -x).collect() }
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        let d = self.degree;
        let mut prod = vec![BigRational::zero(); 2 * d - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        // reduce modulo the monic minimal polynomial
        for k in (d..2 * d - 1).rev() {
            if prod[k].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut prod[k], BigRational::zero());
            for (j, m) in self.minpoly.coeffs[..d].iter().enumerate() {
                prod[k - d + j] -= &c * m;
            }
        }
        prod.truncate(d);
        FieldElem { coeffs: prod }
    }

    pub fn scale(&self, a: &FieldElem, s: &BigRational) -> FieldElem {
        FieldElem { coeffs: a.coeffs.iter().map(|x| x * s).collect() }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm in Q[X].
    pub fn inv(&self, a: &FieldElem) -> FieldElem {
        assert!(!a.is_zero(), "division by zero in number field");
        // extended gcd of a(X) and minpoly(X)
        let mut r0 = self.minpoly.coeffs.clone();
        let mut r1 = a.coeffs.clone();
        trim(&mut r1);
        let mut s0: Vec<BigRational> = vec![BigRational::zero()];
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        // s tracks the coefficient of a(X)
        while !(r1.len() == 1 && r1[0].is_zero()) {
            let (q, r) = poly_divmod(&r0, &r1);
            let s_new = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s_new;
        }
        assert_eq!(r0.len(), 1, "element is not invertible (minimal polynomial not irreducible?)");
        let inv_g = BigRational::one() / &r0[0];
        let mut coeffs: Vec<BigRational> = s0.iter().map(|c| c * &inv_g).collect();
        coeffs.resize(self.degree, BigRational::zero());
        FieldElem { coeffs }
    }

    fn refine_interval(&self) {
        let mut iv = self.interval.borrow_mut();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mid = (&iv.0 + &iv.1) * half;
        let f_lo = self.minpoly.eval(&iv.0);
        let f_mid = self.minpoly.eval(&mid);
        if f_mid.is_zero() {
            // theta is rational after all; irreducibility of degree >= 2 forbids this
            panic!("minimal polynomial has a rational root");
        }
        if (f_lo.is_negative() && f_mid.is_negative())
            || (f_lo.is_positive() && f_mid.is_positive())
        {
            iv.0 = mid;
        } else {
            iv.1 = mid;
        }
    }

    /// Rational interval enclosing the real value of `a`, current precision.
    pub fn enclose(&self, a: &FieldElem) -> RatInterval {
        let iv = self.interval.borrow();
        let x = RatInterval { lo: iv.0.clone(), hi: iv.1.clone() };
        let mut acc = RatInterval::point(BigRational::zero());
        for c in a.coeffs.iter().rev() {
            acc = acc.mul(&x).add(&RatInterval::point(c.clone()));
        }
        acc
    }

    /// Interval enclosure refined until its width is below `eps`.
    pub fn enclose_within(&self, a: &FieldElem, eps: &BigRational) -> RatInterval {
        loop {
            let enc = self.enclose(a);
            if &enc.hi - &enc.lo < *eps || self.degree == 1 {
                return enc;
            }
            self.refine_interval();
        }
    }

    /// Exact sign of the real value of `a`: -1, 0 or 1.
    pub fn sign(&self, a: &FieldElem) -> i8 {
        if a.is_zero() {
            return 0;
        }
        loop {
            let enc = self.enclose(a);
            if !enc.contains_zero() {
                return if enc.lo.is_positive() { 1 } else { -1 };
            }
            assert!(self.degree > 1, "exact rational evaluated to an ambiguous interval");
            self.refine_interval();
        }
    }

    pub fn cmp(&self, a: &FieldElem, b: &FieldElem) -> std::cmp::Ordering {
        match self.sign(&self.sub(a, b)) {
            -1 => std::cmp::Ordering::Less,
            0 => std::cmp::Ordering::Equal,
            _ => std::cmp::Ordering::Greater,
        }
    }

    /// A positive rational lower bound for |a| (requires a != 0).
    pub fn abs_lower_bound(&self, a: &FieldElem) -> BigRational {
        assert!(!a.is_zero());
        loop {
            let enc = self.enclose(a);
            if !enc.contains_zero() {
                return if enc.lo.is_positive() { enc.lo } else { -enc.hi };
            }
            self.refine_interval();
        }
    }

    /// A rational upper bound for |a| at a modest fixed precision.
    pub fn abs_upper_bound(&self, a: &FieldElem) -> BigRational {
        let eps = BigRational::new(BigInt::one(), BigInt::from(1_000_000i64));
        self.enclose_within(a, &eps).abs_hi()
    }

    /// Divides the minimal polynomial by `(X - theta)` (synthetic division);
    /// returns the monic quotient's coefficients, lowest degree first.
    pub fn minpoly_divided_by_root(&self) -> Vec<FieldElem> {
        let d = self.degree;
        let theta = self.theta();
        let mut quot = vec![self.zero(); d];
        quot[d - 1] = self.one();
        for j in (1..d).rev() {
            // b_{j-1} = q_j + theta * b_j
            let qj = self.from_rational(self.minpoly.coeffs[j].clone());
            quot[j - 1] = self.add(&qj, &self.mul(&theta, &quot[j]));
        }
        // remainder q_0 + theta*b_0 must vanish
        let rem = self.add(
            &self.from_rational(self.minpoly.coeffs[0].clone()),
            &self.mul(&theta, &quot[0]),
        );
        assert!(rem.is_zero(), "synthetic division remainder nonzero");
        quot
    }

    /// Schur-Cohn test: do all complex roots of the polynomial (coefficients
    /// in Q(theta), lowest degree first, nonzero leading coefficient) lie
    /// strictly inside the unit circle?
    pub fn all_roots_in_unit_disk(&self, poly: &[FieldElem]) -> bool {
        let mut p: Vec<FieldElem> = poly.to_vec();
        loop {
            while p.len() > 1 && p.last().unwrap().is_zero() {
                p.pop();
            }
            let n = p.len() - 1;
            if n == 0 {
                return true;
            }
            let a0 = &p[0];
            let an = &p[n];
            // require |a0| < |an|
            let diff = self.sub(&self.mul(an, an), &self.mul(a0, a0));
            if self.sign(&diff) <= 0 {
                return false;
            }
            // q = (an * p - a0 * p_reversed) / X, degree n-1
            let mut q = Vec::with_capacity(n);
            for j in 1..=n {
                let t = self.sub(&self.mul(an, &p[j]), &self.mul(a0, &p[n - j]));
                q.push(t);
            }
            p = q;
        }
    }
}

fn trim(v: &mut Vec<BigRational>) {
    while v.len() > 1 && v.last().unwrap().is_zero() {
        v.pop();
    }
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    trim(&mut c);
    c
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut c = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        c[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        c[i] -= y;
    }
    trim(&mut c);
    c
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = &b[db];
    if r.len() - 1 < db || (r.len() == 1 && r[0].is_zero()) {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() - 1 >= db && !(r.len() == 1 && r[0].is_zero()) {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / lead;
        q[k] = c.clone();
        for (j, y) in b.iter().enumerate() {
            let v = &c * y;
            r[k + j] -= v;
        }
        trim(&mut r);
        if r.len() - 1 < db {
            break;
        }
    }
    (q, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::IntPoly;

    fn golden_field() -> NumberField {
        // X^2 - X - 1, theta = golden ratio
        let mp = IntPoly::from_i64(&[-1, -1, 1]).to_rational();
        NumberField::new(
            mp,
            BigRational::from_integer(BigInt::from(1)),
            BigRational::from_integer(BigInt::from(2)),
        )
    }

    #[test]
    fn arithmetic_and_sign() {
        let f = golden_field();
        let theta = f.theta();
        // theta^2 = theta + 1
        let sq = f.mul(&theta, &theta);
        let expect = f.add(&theta, &f.one());
        assert_eq!(sq, expect);
        // theta - 1.6 is positive, theta - 1.62 is negative
        let c = f.from_rational(BigRational::new(BigInt::from(8), BigInt::from(5)));
        assert_eq!(f.sign(&f.sub(&theta, &c)), 1);
        let c = f.from_rational(BigRational::new(BigInt::from(81), BigInt::from(50)));
        assert_eq!(f.sign(&f.sub(&theta, &c)), -1);
    }

    #[test]
    fn inverse() {
        let f = golden_field();
        let theta = f.theta();
        let inv = f.inv(&theta);
        assert_eq!(f.mul(&theta, &inv), f.one());
        // 1/theta = theta - 1 for the golden ratio
        assert_eq!(inv, f.sub(&theta, &f.one()));
    }

    #[test]
    fn divided_by_root_and_schur_cohn() {
        let f = golden_field();
        // X^2 - X - 1 = (X - theta)(X + theta - 1); root -1/theta inside unit disk
        let q = f.minpoly_divided_by_root();
        assert!(f.all_roots_in_unit_disk(&q));
        // (X - theta) itself has its root outside
        let lin = vec![f.neg(&f.theta()), f.one()];
        assert!(!f.all_roots_in_unit_disk(&lin));
    }

    #[test]
    fn degree_one_field() {
        let mp = IntPoly::from_i64(&[-5, 1]).to_rational(); // X - 5
        let f = NumberField::new(mp, BigRational::zero(), BigRational::zero());
        let t = f.theta();
        assert_eq!(f.sign(&f.sub(&t, &f.from_rational(BigRational::from_integer(BigInt::from(4))))), 1);
        assert_eq!(f.mul(&t, &t), f.from_rational(BigRational::from_integer(BigInt::from(25))));
    }
}
