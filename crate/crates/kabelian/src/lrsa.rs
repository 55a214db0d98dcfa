//! Sequence automata with linear-recurrence vector maps, and the regularity
//! machinery built on them: support automata, adders, converters between
//! numeration systems sharing a Pisot root, and Parikh-prefix synchronizers.
//!
//! A sequence automaton assigns to every edge an integer linear-recurrence
//! sequence; the series of a word u = u_1..u_t is
//!     s(u) = sum_j e_{q_j, u_j}(t - 1 - j),
//! the valuation-style telescoping of the edge sequences. When the common
//! recurrence polynomial is (ultimately) Pisot, the support {u : s(u) != 0}
//! is regular, and the support automaton is constructed by exploring the
//! integer "remainder window" of the partial series, pruning states whose
//! dominant Pisot coefficient provably outgrows every possible continuation.
//! All pruning bounds are certified with exact arithmetic in Q(theta),
//! relaxed to rational interval bounds; no floating point is involved.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::field::{FieldElem, NumberField, RatInterval};
use crate::algebra::poly::{IntPoly, RatPoly};
use crate::error::{Error, Result};
use crate::logic::dfa::{num_symbols, pack, unpack, MultiTrackDfa};
use crate::numeration::NumerationSystem;
use crate::words::{Letter, SpectralTag};

/// Integer linear-recurrence sequence: monic recurrence polynomial plus the
/// first deg-many terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinRecSeq {
    pub poly: IntPoly,
    pub init: Vec<BigInt>,
}

impl LinRecSeq {
    pub fn new(poly: IntPoly, init: Vec<BigInt>) -> Self {
        assert!(poly.is_monic());
        assert_eq!(init.len(), poly.degree());
        LinRecSeq { poly, init }
    }

    pub fn zero(poly: IntPoly) -> Self {
        let d = poly.degree();
        LinRecSeq::new(poly, vec![BigInt::zero(); d])
    }

    /// First `count` terms.
    pub fn terms(&self, count: usize) -> Vec<BigInt> {
        let d = self.poly.degree();
        let mut t = self.init.clone();
        while t.len() < count {
            let n = t.len();
            let next: BigInt = (0..d).map(|i| -(&self.poly.coeffs[i] * &t[n - d + i])).sum();
            t.push(next);
        }
        t.truncate(count);
        t
    }

    pub fn term(&self, n: usize) -> BigInt {
        self.terms(n + 1).pop().unwrap()
    }

    /// The same sequence re-expressed with a recurrence multiple of its
    /// polynomial.
    pub fn rebase(&self, new_poly: &IntPoly) -> Self {
        debug_assert!(new_poly.try_div(&self.poly).is_some());
        let init = self.terms(new_poly.degree());
        LinRecSeq::new(new_poly.clone(), init)
    }

    pub fn scale(&self, c: i64) -> Self {
        LinRecSeq::new(
            self.poly.clone(),
            self.init.iter().map(|t| t * BigInt::from(c)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.poly, other.poly);
        LinRecSeq::new(
            self.poly.clone(),
            self.init.iter().zip(&other.init).map(|(a, b)| a + b).collect(),
        )
    }
}

/// Monic lcm of two monic integer polynomials.
pub fn poly_lcm(a: &IntPoly, b: &IntPoly) -> IntPoly {
    // rational gcd, normalized monic; for monic integer inputs the monic gcd
    // has integer coefficients (Gauss)
    let mut r0 = a.to_rational();
    let mut r1 = b.to_rational();
    while !r1.is_zero() {
        let r = rat_rem(&r0, &r1);
        r0 = r1;
        r1 = r;
    }
    let lead = r0.coeffs.last().unwrap().clone();
    let monic: Vec<BigRational> = r0.coeffs.iter().map(|c| c / &lead).collect();
    let gcd = IntPoly::new(
        monic
            .iter()
            .map(|c| {
                assert!(c.is_integer(), "gcd of monic integer polynomials must be integer");
                c.to_integer()
            })
            .collect(),
    );
    a.mul(b).try_div(&gcd).expect("gcd must divide the product")
}

fn rat_rem(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut r = a.coeffs.clone();
    let db = b.degree();
    let lead = b.coeffs.last().unwrap();
    let trim = |v: &mut Vec<BigRational>| {
        while v.len() > 1 && v.last().unwrap().is_zero() {
            v.pop();
        }
    };
    trim(&mut r);
    while r.len() - 1 >= db && !(r.len() == 1 && r[0].is_zero()) {
        let k = r.len() - 1 - db;
        let q = r.last().unwrap() / lead;
        for (j, c) in b.coeffs.iter().enumerate() {
            let v = &q * c;
            r[k + j] -= v;
        }
        trim(&mut r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
        if r.len() - 1 < db {
            break;
        }
    }
    RatPoly::new(r)
}

/// Partial deterministic automaton whose edges carry linear-recurrence
/// sequences; all states are final (the domain is the readable language).
#[derive(Debug, Clone)]
pub struct Lrsa {
    pub tracks: Vec<usize>,
    /// delta[state][symbol], partial.
    pub delta: Vec<Vec<Option<u32>>>,
    /// Edge sequences, same domain as delta, all sharing `poly`.
    pub pi: Vec<Vec<Option<LinRecSeq>>>,
    pub initial: u32,
    pub poly: IntPoly,
}

impl Lrsa {
    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    /// Direct evaluation of the series on a word of flattened symbols;
    /// `None` when the word leaves the domain.
    pub fn series(&self, word: &[usize]) -> Option<BigInt> {
        let t = word.len();
        let mut q = self.initial;
        let mut total = BigInt::zero();
        for (j, &sym) in word.iter().enumerate() {
            let e = self.pi[q as usize][sym].as_ref()?;
            total += e.term(t - 1 - j);
            q = self.delta[q as usize][sym]?;
        }
        Some(total)
    }
}

/// The addressing sequence automaton: its series at a representation is the
/// valuation. Edge (b, i) carries n |-> |tau^n(tau(b)[0..i))|.
pub fn addressing_lrsa(ns: &NumerationSystem) -> Lrsa {
    letter_count_lrsa(ns, None)
}

/// The Parikh sequence automaton for letter b: its series at rep(n) is the
/// number of occurrences of b in the length-n prefix of the fixed point.
pub fn parikh_lrsa(ns: &NumerationSystem, b: Letter) -> Lrsa {
    letter_count_lrsa(ns, Some(b))
}

/// Edge (state, digit i) carries n |-> |tau^n(tau(state)[0..i))| counting
/// all letters (None) or only letter b.
fn letter_count_lrsa(ns: &NumerationSystem, b: Option<Letter>) -> Lrsa {
    let s = &ns.automaton.subst;
    let nl = s.alphabet_size();
    let poly = crate::words::incidence(s).char_poly;
    let d = poly.degree();
    // occ[n][c] = |tau^n(c)|_b (or full length when b is None), n < d
    let mut occ: Vec<Vec<BigInt>> = Vec::with_capacity(d);
    let first: Vec<BigInt> = (0..nl)
        .map(|c| match b {
            Some(b) => BigInt::from(u64::from(c == b)),
            None => BigInt::one(),
        })
        .collect();
    occ.push(first);
    for _ in 1..d.max(1) {
        let prev = occ.last().unwrap();
        occ.push(
            (0..nl)
                .map(|c| s.image(c).iter().map(|&e| prev[e].clone()).sum())
                .collect(),
        );
    }
    let k = ns.digit_count();
    let mut delta = Vec::with_capacity(nl);
    let mut pi = Vec::with_capacity(nl);
    for q in 0..nl {
        let mut drow = Vec::with_capacity(k);
        let mut prow = Vec::with_capacity(k);
        for digit in 0..k {
            match ns.automaton.delta(q, digit) {
                Some(next) => {
                    drow.push(Some(next as u32));
                    let init: Vec<BigInt> = (0..d)
                        .map(|n| s.image(q)[..digit].iter().map(|&c| occ[n][c].clone()).sum())
                        .collect();
                    prow.push(Some(LinRecSeq::new(poly.clone(), init)));
                }
                None => {
                    drow.push(None);
                    prow.push(None);
                }
            }
        }
        delta.push(drow);
        pi.push(prow);
    }
    Lrsa { tracks: vec![k], delta, pi, initial: ns.automaton.initial as u32, poly }
}

/// Synchronized signed combination: the inputs read disjoint track groups
/// (tracks are concatenated in order) and the series is the signed sum.
pub fn combine(ops: &[(i64, &Lrsa)]) -> Lrsa {
    assert!(!ops.is_empty());
    let poly = ops
        .iter()
        .map(|(_, a)| a.poly.clone())
        .reduce(|a, b| poly_lcm(&a, &b))
        .unwrap();
    let tracks: Vec<usize> = ops.iter().flat_map(|(_, a)| a.tracks.clone()).collect();
    let ns = num_symbols(&tracks);
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let start: Vec<u32> = ops.iter().map(|(_, a)| a.initial).collect();
    index.insert(start.clone(), 0);
    let mut states = vec![start];
    let mut delta: Vec<Vec<Option<u32>>> = Vec::new();
    let mut pi: Vec<Vec<Option<LinRecSeq>>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let cur = states[i].clone();
        let mut drow = Vec::with_capacity(ns);
        let mut prow = Vec::with_capacity(ns);
        'sym: for sym in 0..ns {
            let digits = unpack(&tracks, sym);
            let mut offset = 0;
            let mut next = Vec::with_capacity(ops.len());
            let mut seq = LinRecSeq::zero(poly.clone());
            for (c, (sign, a)) in ops.iter().enumerate() {
                let local = pack(&a.tracks, &digits[offset..offset + a.tracks.len()]);
                offset += a.tracks.len();
                let q = cur[c] as usize;
                match (&a.delta[q][local], &a.pi[q][local]) {
                    (Some(t), Some(e)) => {
                        next.push(*t);
                        seq = seq.add(&e.rebase(&poly).scale(*sign));
                    }
                    _ => {
                        drow.push(None);
                        prow.push(None);
                        continue 'sym;
                    }
                }
            }
            let id = *index.entry(next.clone()).or_insert_with(|| {
                states.push(next);
                (states.len() - 1) as u32
            });
            drow.push(Some(id));
            prow.push(Some(seq));
        }
        delta.push(drow);
        pi.push(prow);
        i += 1;
    }
    Lrsa { tracks, delta, pi, initial: 0, poly }
}

/// Pointwise signed sum over a shared track structure (product automaton).
pub fn shared_sum(ops: &[(i64, &Lrsa)]) -> Lrsa {
    assert!(!ops.is_empty());
    let tracks = ops[0].1.tracks.clone();
    for (_, a) in ops {
        assert_eq!(a.tracks, tracks);
    }
    let poly = ops
        .iter()
        .map(|(_, a)| a.poly.clone())
        .reduce(|a, b| poly_lcm(&a, &b))
        .unwrap();
    let ns = num_symbols(&tracks);
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    let start: Vec<u32> = ops.iter().map(|(_, a)| a.initial).collect();
    index.insert(start.clone(), 0);
    let mut states = vec![start];
    let mut delta: Vec<Vec<Option<u32>>> = Vec::new();
    let mut pi: Vec<Vec<Option<LinRecSeq>>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let cur = states[i].clone();
        let mut drow = Vec::with_capacity(ns);
        let mut prow = Vec::with_capacity(ns);
        'sym: for sym in 0..ns {
            let mut next = Vec::with_capacity(ops.len());
            let mut seq = LinRecSeq::zero(poly.clone());
            for (c, (sign, a)) in ops.iter().enumerate() {
                let q = cur[c] as usize;
                match (&a.delta[q][sym], &a.pi[q][sym]) {
                    (Some(t), Some(e)) => {
                        next.push(*t);
                        seq = seq.add(&e.rebase(&poly).scale(*sign));
                    }
                    _ => {
                        drow.push(None);
                        prow.push(None);
                        continue 'sym;
                    }
                }
            }
            let id = *index.entry(next.clone()).or_insert_with(|| {
                states.push(next);
                (states.len() - 1) as u32
            });
            drow.push(Some(id));
            prow.push(Some(seq));
        }
        delta.push(drow);
        pi.push(prow);
        i += 1;
    }
    Lrsa { tracks, delta, pi, initial: 0, poly }
}

/// Default state budget for support exploration.
pub const SUPPORT_STATE_CAP: usize = 1_000_000;

/// Pisot data shared by all pruning decisions in one support construction.
struct PisotBounds {
    m: usize,
    q: usize,
    /// Enclosures of the Lagrange weights w_j (coefficients of
    /// Q/((X-theta) Q'(theta))): the functional sum_j w_j g(j) extracts the
    /// theta-coefficient of a Q-recurrent sequence g.
    w: Vec<RatInterval>,
    theta: RatInterval,
    /// Upper bound on the theta-coefficients of all edge sequences.
    c_max: BigRational,
    /// Upper bound for sum_{n>=0} max_e |rho_e(n)| (edge residual tails).
    r_sum: BigRational,
    /// Contraction data: max norm of the small companion powers below the
    /// first power contracting to 1/2.
    w_norm: BigRational,
    /// Max |e(n)| over edges and n < m (transient region).
    e0: BigInt,
}

fn interval_mul_int(iv: &RatInterval, x: &BigInt) -> RatInterval {
    let a = &iv.lo * BigRational::from_integer(x.clone());
    let b = &iv.hi * BigRational::from_integer(x.clone());
    if a <= b {
        RatInterval { lo: a, hi: b }
    } else {
        RatInterval { lo: b, hi: a }
    }
}

fn interval_add(a: &RatInterval, b: &RatInterval) -> RatInterval {
    RatInterval { lo: &a.lo + &b.lo, hi: &a.hi + &b.hi }
}

fn interval_mul(a: &RatInterval, b: &RatInterval) -> RatInterval {
    let c1 = &a.lo * &b.lo;
    let c2 = &a.lo * &b.hi;
    let c3 = &a.hi * &b.lo;
    let c4 = &a.hi * &b.hi;
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

impl PisotBounds {
    fn build(a: &Lrsa) -> Result<Self> {
        let spectral = crate::words::classify_spectrum(&a.poly)?;
        if spectral.tag == SpectralTag::NotPisot {
            return Err(Error::NotUltimatelyPisot);
        }
        let m = spectral.shift();
        let q_poly = spectral.pisot_min_poly.unwrap();
        let q = q_poly.degree();
        let (lo, hi) = spectral.pisot_root.unwrap();
        let field = NumberField::new(q_poly.to_rational(), lo, hi);
        let theta_el = field.theta();
        let eps = BigRational::new(BigInt::one(), BigInt::from(2u8).pow(96));

        // Lagrange weights: coefficients of Q/(X - theta), divided by
        // Q'(theta) = (Q/(X-theta))(theta)
        let quotient = field.minpoly_divided_by_root();
        let mut deriv = field.zero();
        let mut power = field.one();
        for coeff in &quotient {
            deriv = field.add(&deriv, &field.mul(coeff, &power));
            power = field.mul(&power, &theta_el);
        }
        let deriv_inv = field.inv(&deriv);
        let w_el: Vec<FieldElem> =
            quotient.iter().map(|c| field.mul(c, &deriv_inv)).collect();
        let w: Vec<RatInterval> =
            w_el.iter().map(|e| field.enclose_within(e, &eps)).collect();
        let theta = field.enclose_within(&theta_el, &eps);

        // contraction certificate for the conjugate companion matrix
        let (k_pow, w_norm) = if q == 1 {
            (1usize, BigRational::zero())
        } else {
            // companion of Q1 = Q/(X - theta), coefficients in Q(theta)
            let dim = q - 1;
            let mut comp = vec![vec![field.zero(); dim]; dim];
            for i in 0..dim - 1 {
                comp[i][i + 1] = field.one();
            }
            for j in 0..dim {
                comp[dim - 1][j] = field.neg(&quotient[j]);
            }
            let norm = |mat: &Vec<Vec<FieldElem>>| -> BigRational {
                (0..dim)
                    .map(|i| {
                        (0..dim)
                            .map(|j| field.enclose_within(&mat[i][j], &eps).abs_hi())
                            .sum::<BigRational>()
                    })
                    .max()
                    .unwrap()
            };
            let id: Vec<Vec<FieldElem>> = (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| if i == j { field.one() } else { field.zero() })
                        .collect()
                })
                .collect();
            let mat_mul = |a: &Vec<Vec<FieldElem>>, b: &Vec<Vec<FieldElem>>| {
                (0..dim)
                    .map(|i| {
                        (0..dim)
                            .map(|j| {
                                let mut s = field.zero();
                                for l in 0..dim {
                                    s = field.add(&s, &field.mul(&a[i][l], &b[l][j]));
                                }
                                s
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>()
            };
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            let mut pow = id;
            let mut w_norm = BigRational::one();
            let mut k_pow = None;
            for k in 1..=512usize {
                pow = mat_mul(&pow, &comp);
                let n = norm(&pow);
                if n <= half {
                    k_pow = Some(k);
                    break;
                }
                if n > w_norm {
                    w_norm = n;
                }
            }
            let k_pow = k_pow.ok_or_else(|| Error::CapExceeded {
                what: "conjugate contraction certificate".into(),
                detail: "no power of the companion matrix contracted within 512 steps".into(),
            })?;
            (k_pow, w_norm)
        };

        // per-edge theta coefficients and residual windows (exact in Q(theta))
        let mut c_max = BigRational::zero();
        let mut v_max = BigRational::zero();
        let mut e0 = BigInt::zero();
        for row in &a.pi {
            for edge in row.iter().flatten() {
                let terms = edge.terms(m + q);
                for t in &terms[..m] {
                    if t.abs() > e0 {
                        e0 = t.abs();
                    }
                }
                let mut c_e = field.zero();
                for j in 0..q {
                    let tj = field.from_rational(BigRational::from_integer(terms[m + j].clone()));
                    c_e = field.add(&c_e, &field.mul(&w_el[j], &tj));
                }
                let c_hi = field.enclose_within(&c_e, &eps).abs_hi();
                if c_hi > c_max {
                    c_max = c_hi;
                }
                // residual window rho(j) = e(m+j) - c_e * theta^j, j < q-1
                let mut theta_pow = field.one();
                for j in 0..q.saturating_sub(1) {
                    let raw = field.from_rational(BigRational::from_integer(terms[m + j].clone()));
                    let rho = field.sub(&raw, &field.mul(&c_e, &theta_pow));
                    let r_hi = field.enclose_within(&rho, &eps).abs_hi();
                    if r_hi > v_max {
                        v_max = r_hi;
                    }
                    theta_pow = field.mul(&theta_pow, &theta_el);
                }
            }
        }
        let r_sum = BigRational::from_integer(BigInt::from(2 * k_pow as i64)) * &w_norm * &v_max;
        Ok(PisotBounds { m, q, w, theta, c_max, r_sum, w_norm, e0 })
    }

    /// True when the remainder window f (values F(0..d)) provably stays
    /// nonzero under every continuation: the Pisot coefficient of F outgrows
    /// the largest possible continuation series plus all residuals.
    fn provably_never_zero(&self, f: &[BigInt]) -> bool {
        // transient region: |F(r)| must beat the at-most-r transient edge
        // terms of a length-r continuation
        for r in 0..self.m {
            if f[r].abs() <= BigInt::from(r as i64) * &self.e0 {
                return false;
            }
        }
        // Pisot coefficient of F via the Lagrange functional on the window
        let mut c_f = RatInterval { lo: BigRational::zero(), hi: BigRational::zero() };
        for j in 0..self.q {
            c_f = interval_add(&c_f, &interval_mul_int(&self.w[j], &f[self.m + j]));
        }
        let c_f_lo = if c_f.lo.is_positive() {
            c_f.lo.clone()
        } else if c_f.hi.is_negative() {
            -c_f.hi.clone()
        } else {
            return false; // sign not determined; keep exploring
        };
        // residual window of F
        let mut v_f = BigRational::zero();
        let mut theta_pow = RatInterval { lo: BigRational::one(), hi: BigRational::one() };
        for j in 0..self.q.saturating_sub(1) {
            let mut rho = interval_mul(&c_f, &theta_pow);
            rho = RatInterval {
                lo: BigRational::from_integer(f[self.m + j].clone()) - &rho.hi,
                hi: BigRational::from_integer(f[self.m + j].clone()) - &rho.lo,
            };
            let hi = rho.abs_hi();
            if hi > v_f {
                v_f = hi;
            }
            theta_pow = interval_mul(&theta_pow, &self.theta);
        }
        // |c_F| theta^r - residuals must dominate
        // C_max theta^r/(theta-1) + continuation residuals + transients
        let theta_lo_minus_1 = &self.theta.lo - BigRational::one();
        if !theta_lo_minus_1.is_positive() {
            return false;
        }
        let margin = &c_f_lo - &self.c_max / theta_lo_minus_1;
        if !margin.is_positive() {
            return false;
        }
        let residuals = &self.w_norm * &v_f
            + &self.r_sum
            + BigRational::from_integer(BigInt::from(self.m as i64) * &self.e0);
        margin > residuals
    }
}

/// Builds the complete DFA accepting the support {u : s(u) != 0} of the
/// series, provided the recurrence polynomial is (ultimately) Pisot.
pub fn support_dfa(a: &Lrsa) -> Result<MultiTrackDfa> {
    support_dfa_capped(a, SUPPORT_STATE_CAP)
}

pub fn support_dfa_capped(a: &Lrsa, cap: usize) -> Result<MultiTrackDfa> {
    let bounds = PisotBounds::build(a)?;
    let d = a.poly.degree();
    let ns = num_symbols(&a.tracks);

    // exploration states: Live(q, remainder window) or NeverZero(q); plus a
    // dead state for words outside the domain
    #[derive(Clone, PartialEq, Eq, Hash)]
    enum Key {
        Live(u32, Vec<BigInt>),
        NeverZero(u32),
    }
    let start = Key::Live(a.initial, vec![BigInt::zero(); d]);
    let mut index: HashMap<Key, u32> = HashMap::new();
    index.insert(start.clone(), 0);
    let mut states = vec![start];
    let mut delta: Vec<Vec<u32>> = Vec::new();
    let mut accept: Vec<bool> = Vec::new();
    const DEAD: u32 = u32::MAX;
    let mut i = 0;
    while i < states.len() {
        let cur = states[i].clone();
        let mut row = Vec::with_capacity(ns);
        let acc = match &cur {
            Key::Live(_, f) => !f[0].is_zero(),
            Key::NeverZero(_) => true,
        };
        for sym in 0..ns {
            let (q, f) = match &cur {
                Key::Live(q, f) => (*q, Some(f)),
                Key::NeverZero(q) => (*q, None),
            };
            let next_q = match a.delta[q as usize][sym] {
                Some(t) => t,
                None => {
                    row.push(DEAD);
                    continue;
                }
            };
            let key = match f {
                None => Key::NeverZero(next_q),
                Some(f) => {
                    let e = a.pi[q as usize][sym].as_ref().unwrap().terms(d);
                    // F'(j) = F(j+1) + e(j); F(d) comes from the recurrence
                    let f_d: BigInt =
                        (0..d).map(|l| -(&a.poly.coeffs[l] * &f[l])).sum();
                    let mut nf = Vec::with_capacity(d);
                    for j in 0..d {
                        let shifted = if j + 1 < d { f[j + 1].clone() } else { f_d.clone() };
                        nf.push(shifted + &e[j]);
                    }
                    if bounds.provably_never_zero(&nf) {
                        Key::NeverZero(next_q)
                    } else {
                        Key::Live(next_q, nf)
                    }
                }
            };
            let id = *index.entry(key.clone()).or_insert_with(|| {
                states.push(key);
                (states.len() - 1) as u32
            });
            row.push(id);
        }
        delta.push(row);
        accept.push(acc);
        if states.len() > cap {
            return Err(Error::StateBudgetExceeded(states.len()));
        }
        i += 1;
    }
    // wire the dead state in
    let dead_id = delta.len() as u32;
    for row in &mut delta {
        for t in row.iter_mut() {
            if *t == DEAD {
                *t = dead_id;
            }
        }
    }
    delta.push(vec![dead_id; ns]);
    accept.push(false);
    Ok(MultiTrackDfa::new(a.tracks.clone(), delta, accept, 0).minimize())
}

/// Product of the per-track padded-validity languages.
pub fn validity_product(systems: &[&NumerationSystem]) -> MultiTrackDfa {
    let tracks: Vec<usize> = systems.iter().map(|ns| ns.digit_count()).collect();
    let mut result: Option<MultiTrackDfa> = None;
    for (t, ns) in systems.iter().enumerate() {
        let mut v = ns.valid_padded_dfa();
        for (o, &size) in tracks.iter().enumerate() {
            if o < t {
                v = v.cylindrify(0, size);
            } else if o > t {
                v = v.cylindrify(v.tracks.len(), size);
            }
        }
        result = Some(match result {
            None => v,
            Some(r) => r.intersect(&v).unwrap(),
        });
    }
    result.unwrap().minimize()
}

/// The zero set of the series restricted to valid padded tuples.
fn zero_set(a: &Lrsa, systems: &[&NumerationSystem]) -> Result<MultiTrackDfa> {
    let support = support_dfa(a)?;
    let valid = validity_product(systems);
    Ok(support.complement().intersect(&valid)?.minimize())
}

/// Addition relation: accepts <x, y, z> (zero-padded to equal length) iff
/// val(x) + val(y) = val(z).
pub fn adder(ns: &NumerationSystem) -> Result<MultiTrackDfa> {
    let s = addressing_lrsa(ns);
    let sum = combine(&[(1, &s), (1, &s), (-1, &s)]);
    zero_set(&sum, &[ns, ns, ns])
}

/// Conversion relation between two numeration systems sharing a Pisot root:
/// accepts <u, v> iff val_1(u) = val_2(v).
pub fn converter(n1: &NumerationSystem, n2: &NumerationSystem) -> Result<MultiTrackDfa> {
    let p1 = crate::words::classify_spectrum(&crate::words::incidence(&n1.automaton.subst).char_poly)?;
    let p2 = crate::words::classify_spectrum(&crate::words::incidence(&n2.automaton.subst).char_poly)?;
    match (&p1.pisot_min_poly, &p2.pisot_min_poly) {
        (Some(a), Some(b)) if a == b => {}
        _ => return Err(Error::RootMismatch),
    }
    let s1 = addressing_lrsa(n1);
    let s2 = addressing_lrsa(n2);
    let diff = combine(&[(1, &s1), (-1, &s2)]);
    zero_set(&diff, &[n1, n2])
}

/// Parikh synchronizer for letter b: accepts <rep(n), rep(c)> iff the
/// length-n prefix of the fixed point contains exactly c occurrences of b.
pub fn parikh_sync(ns: &NumerationSystem, b: Letter) -> Result<MultiTrackDfa> {
    let pb = parikh_lrsa(ns, b);
    let s = addressing_lrsa(ns);
    let diff = combine(&[(1, &pb), (-1, &s)]);
    zero_set(&diff, &[ns, ns])
}
