//! Exact integer and rational polynomial arithmetic: characteristic
//! polynomials, Sturm sequences, real-root isolation, and a bounded
//! irreducibility test for monic integer polynomials.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense integer polynomial, `coeffs[i]` is the coefficient of `X^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntPoly {
    pub coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigInt::zero());
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        Self::new(vec![BigInt::zero()])
    }

    pub fn one() -> Self {
        Self::new(vec![BigInt::one()])
    }

    /// The monomial `X^n`.
    pub fn x_power(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::one();
        Self::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().map_or(false, |c| c.is_one())
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().unwrap()
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut c = vec![BigInt::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[i] += a;
        }
        for (i, b) in other.coeffs.iter().enumerate() {
            c[i] += b;
        }
        Self::new(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    /// Exact division; `None` when `other` does not divide `self` over Z.
    pub fn try_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        if self.degree() < other.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let dq = self.degree() - other.degree();
        let mut quot = vec![BigInt::zero(); dq + 1];
        let lead = other.leading();
        for k in (0..=dq).rev() {
            let top = rem[k + other.degree()].clone();
            if top.is_zero() {
                continue;
            }
            if (&top % lead) != BigInt::zero() {
                return None;
            }
            let q = &top / lead;
            for (j, b) in other.coeffs.iter().enumerate() {
                rem[k + j] -= &q * b;
            }
            quot[k] = q;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::new(quot))
    }

    /// Splits off the maximal power of `X`: returns `(m, q)` with `self = X^m * q`
    /// and `q(0) != 0` (for the zero polynomial, `(0, 0)`).
    pub fn strip_x_power(&self) -> (usize, Self) {
        if self.is_zero() {
            return (0, Self::zero());
        }
        let m = self.coeffs.iter().position(|c| !c.is_zero()).unwrap();
        (m, Self::new(self.coeffs[m..].to_vec()))
    }

    pub fn to_rational(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }

    /// Cauchy bound: every complex root has modulus < 1 + max |a_i| / |lead|.
    pub fn cauchy_root_bound(&self) -> BigRational {
        let lead = BigRational::from_integer(self.leading().abs());
        let mut m = BigRational::zero();
        for c in &self.coeffs[..self.coeffs.len() - 1] {
            let a = BigRational::from_integer(c.abs());
            if a > m {
                m = a;
            }
        }
        BigRational::one() + m / lead
    }

    /// Monic irreducibility over Z by bounded factor enumeration.
    ///
    /// Handles degree <= 6 (rational roots plus exhaustive monic factor search
    /// of degree <= deg/2 with Cauchy-bounded coefficients). Higher degrees
    /// return `IrreducibilityUndecided`.
    pub fn is_irreducible_monic(&self) -> Result<bool> {
        assert!(self.is_monic(), "irreducibility test expects a monic polynomial");
        let d = self.degree();
        if d == 0 {
            return Ok(false);
        }
        if d == 1 {
            return Ok(true);
        }
        if d > 6 {
            return Err(Error::IrreducibilityUndecided(d));
        }
        if self.coeffs[0].is_zero() {
            return Ok(false); // divisible by X
        }
        // Degree-1 factors: integer roots divide the constant term.
        let c0 = self.coeffs[0].abs();
        let mut div = BigInt::one();
        while &div * &div <= c0 {
            if (&c0 % &div).is_zero() {
                for r in [div.clone(), &c0 / &div] {
                    for root in [r.clone(), -r.clone()] {
                        if self.eval_int(&root).is_zero() {
                            return Ok(false);
                        }
                    }
                }
            }
            div += 1;
        }
        if d <= 3 {
            return Ok(true); // no linear factor suffices up to degree 3
        }
        // Candidate monic factors of degree t in 2..=d/2. A factor's coefficient
        // of X^(t-j) is an elementary symmetric function of at most t roots, all
        // of modulus < Cauchy bound R, hence bounded by C(t,j) * R^j.
        let r_bound = self.cauchy_root_bound();
        let ceil = |q: &BigRational| -> i64 {
            let f = q.floor();
            let mut v = f.to_integer();
            if q > &f {
                v += 1;
            }
            i64::try_from(&v).expect("factor coefficient bound overflow")
        };
        for t in 2..=d / 2 {
            let mut bounds = Vec::with_capacity(t);
            for j in 1..=t {
                let binom = (0..j).fold(BigRational::one(), |acc, i| {
                    acc * BigRational::from_integer(BigInt::from(t - i))
                        / BigRational::from_integer(BigInt::from(i + 1))
                });
                let mut pw = BigRational::one();
                for _ in 0..j {
                    pw *= &r_bound;
                }
                bounds.push(ceil(&(binom * pw)));
            }
            let mut cand = vec![0i64; t];
            if search_factor(self, t, &bounds, &mut cand, 0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl std::fmt::Display for IntPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && self.degree() > 0 {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}")?;
                    }
                    if i == 1 {
                        write!(f, "X")?;
                    } else {
                        write!(f, "X^{i}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn search_factor(p: &IntPoly, t: usize, bounds: &[i64], cand: &mut Vec<i64>, pos: usize) -> bool {
    if pos == t {
        // candidate factor X^t + cand[t-1] X^(t-1) + ... + cand[0]
        if cand[0] == 0 {
            return false; // p(0) != 0 already ensured
        }
        let mut coeffs: Vec<BigInt> = cand.iter().map(|&c| BigInt::from(c)).collect();
        coeffs.push(BigInt::one());
        let g = IntPoly::new(coeffs);
        return p.try_div(&g).is_some();
    }
    let b = bounds[t - 1 - pos];
    for c in -b..=b {
        cand[t - 1 - pos] = c;
        if search_factor(p, t, bounds, cand, pos + 1) {
            return true;
        }
    }
    false
}

/// Dense rational polynomial for Sturm sequences and root isolation.
#[derive(Debug, Clone, PartialEq)]
pub struct RatPoly {
    pub coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        RatPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::new(vec![BigRational::zero()]);
        }
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, a)| a * BigRational::from_integer(BigInt::from(i)))
            .collect();
        Self::new(c)
    }

    /// Remainder of `self / other`.
    fn rem(&self, other: &Self) -> Self {
        assert!(!other.is_zero());
        let mut r = self.coeffs.clone();
        let dd = other.degree();
        let lead = other.coeffs.last().unwrap();
        while r.len() > 1 && r.last().unwrap().is_zero() {
            r.pop();
        }
        while r.len() - 1 >= dd && !(r.len() == 1 && r[0].is_zero()) {
            let k = r.len() - 1 - dd;
            let q = r.last().unwrap() / lead;
            for (j, b) in other.coeffs.iter().enumerate() {
                let v = &q * b;
                r[k + j] -= v;
            }
            while r.len() > 1 && r.last().unwrap().is_zero() {
                r.pop();
            }
            if r.len() == 1 {
                break;
            }
        }
        Self::new(r)
    }

    /// Sturm chain of the polynomial.
    pub fn sturm_chain(&self) -> Vec<Self> {
        let mut chain = vec![self.clone(), self.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            let neg = RatPoly::new(r.coeffs.iter().map(|c| -c).collect());
            chain.push(neg);
        }
        chain
    }

    fn sign_variations(chain: &[Self], x: &BigRational) -> usize {
        let mut vars = 0;
        let mut last = 0i8;
        for p in chain {
            let v = p.eval(x);
            let s = if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            };
            if s != 0 {
                if last != 0 && s != last {
                    vars += 1;
                }
                last = s;
            }
        }
        vars
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_real_roots(&self, a: &BigRational, b: &BigRational) -> usize {
        let chain = self.sturm_chain();
        Self::sign_variations(&chain, a) - Self::sign_variations(&chain, b)
    }

    /// Isolates the unique real root in `(a, b]` down to an interval of width
    /// at most `eps`. Panics if the root count in `(a, b]` is not 1.
    pub fn isolate_single_root(
        &self,
        a: &BigRational,
        b: &BigRational,
        eps: &BigRational,
    ) -> (BigRational, BigRational) {
        let chain = self.sturm_chain();
        let count =
            Self::sign_variations(&chain, a) - Self::sign_variations(&chain, b);
        assert_eq!(count, 1, "expected exactly one root in the interval");
        let mut lo = a.clone();
        let mut hi = b.clone();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        while &hi - &lo > *eps {
            let mid = (&lo + &hi) * &half;
            if Self::sign_variations(&chain, &lo) - Self::sign_variations(&chain, &mid) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }
}

/// Characteristic polynomial det(XI - M) of a square nonnegative-integer
/// matrix, computed exactly with the Faddeev-LeVerrier recurrence.
pub fn char_poly(m: &[Vec<BigInt>]) -> IntPoly {
    let n = m.len();
    if n == 0 {
        return IntPoly::one();
    }
    for row in m {
        assert_eq!(row.len(), n);
    }
    // c[n] = 1; M_1 = M; c_{n-k} = -tr(M N_{k-1} ...)/k
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut aux: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut c_prev = BigInt::one();
    for k in 1..=n {
        // aux = M * (aux + c_prev * I) ... standard: N_k = M N_{k-1} + c_{n-k+1} I
        let mut prod = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigInt::zero();
                for l in 0..n {
                    s += &m[i][l] * &aux[l][j];
                }
                prod[i][j] = s;
            }
        }
        let trace: BigInt = (0..n).map(|i| prod[i][i].clone()).sum();
        let c = -trace / BigInt::from(k as i64);
        coeffs[n - k] = c.clone();
        for (i, row) in prod.iter_mut().enumerate() {
            row[i] += &c;
        }
        aux = prod;
        c_prev = c;
    }
    let _ = c_prev;
    IntPoly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64(c)
    }

    #[test]
    fn char_poly_thue_morse() {
        let m: Vec<Vec<BigInt>> = vec![
            vec![BigInt::from(1), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(1)],
        ];
        // X^2 - 2X = X(X-2)
        assert_eq!(char_poly(&m), p(&[0, -2, 1]));
    }

    #[test]
    fn char_poly_identity_one_letter() {
        let m = vec![vec![BigInt::one()]];
        assert_eq!(char_poly(&m), p(&[-1, 1]));
    }

    #[test]
    fn division_and_strip() {
        let a = p(&[0, 0, -1, 0, -1, 1]); // X^2 (X^3 - X^2 - 1)
        let (m, q) = a.strip_x_power();
        assert_eq!(m, 2);
        assert_eq!(q, p(&[-1, 0, -1, 1]));
        assert_eq!(a.try_div(&q).unwrap(), p(&[0, 0, 1]));
        assert!(a.try_div(&p(&[1, 1])).is_none());
    }

    #[test]
    fn irreducibility_small_cases() {
        assert!(p(&[-1, 0, -1, 1]).is_irreducible_monic().unwrap()); // X^3-X^2-1
        assert!(p(&[-1, -1, 1]).is_irreducible_monic().unwrap()); // X^2-X-1
        assert!(!p(&[5, -6, 1]).is_irreducible_monic().unwrap()); // (X-1)(X-5)
        assert!(!p(&[1, 2, 3, 2, 1]).is_irreducible_monic().unwrap()); // (X^2+X+1)^2
        assert!(p(&[1, 0, 0, 0, -1, 1]).is_irreducible_monic().unwrap()); // X^5-X^4+1
        assert!(matches!(
            p(&[1, 0, 0, 0, 0, 0, -1, 1]).is_irreducible_monic(),
            Err(Error::IrreducibilityUndecided(7))
        ));
    }

    #[test]
    fn sturm_root_isolation() {
        let q = p(&[-1, 0, -1, 1]).to_rational(); // X^3 - X^2 - 1, root ~1.4656
        let one = BigRational::one();
        let bound = BigRational::from_integer(BigInt::from(3));
        assert_eq!(q.count_real_roots(&one, &bound), 1);
        let eps = BigRational::new(BigInt::one(), BigInt::from(1_000_000i64));
        let (lo, hi) = q.isolate_single_root(&one, &bound, &eps);
        let approx = 1.46557123_f64;
        let lo_f = lo.numer().to_string().parse::<f64>().unwrap()
            / lo.denom().to_string().parse::<f64>().unwrap();
        let hi_f = hi.numer().to_string().parse::<f64>().unwrap()
            / hi.denom().to_string().parse::<f64>().unwrap();
        assert!(lo_f <= approx && approx <= hi_f);
        assert!(hi_f - lo_f < 1e-6);
    }
}
