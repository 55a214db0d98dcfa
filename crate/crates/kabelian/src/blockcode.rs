//! Length-k sliding-block codes, the derived block substitutions tau_k, and
//! the eigenvalue-lifting relation between their incidence matrices.
//!
//! Block letters are 1-based {1..p(k)} in display (matching the block
//! alphabet convention) but 0-based indices internally, like every other
//! alphabet in this crate.

use num_rational::BigRational;

use crate::algebra::poly::IntPoly;
use crate::error::{Error, Result};
use crate::words::{
    fixed_point_prefix, incidence, is_primitive, Alphabet, Letter, Substitution,
};

/// Ordered catalogue of the distinct length-k factors of a word, in order of
/// first occurrence; block letter i encodes `theta[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCoding {
    pub k: usize,
    pub theta: Vec<Vec<Letter>>,
    /// First-letter projection: block letter -> original letter.
    pub pi: Vec<Letter>,
}

impl BlockCoding {
    fn from_factors(k: usize, theta: Vec<Vec<Letter>>) -> Self {
        let pi = theta.iter().map(|f| f[0]).collect();
        BlockCoding { k, theta, pi }
    }

    pub fn letter_of(&self, factor: &[Letter]) -> Option<Letter> {
        self.theta.iter().position(|f| f == factor)
    }
}

/// Slides a length-k window over the prefix; output letter at position i
/// encodes `x[i..i+k)`, factors numbered by first occurrence.
pub fn sliding_block(x_prefix: &[Letter], k: usize) -> Result<(Vec<Letter>, BlockCoding)> {
    if k == 0 || k > x_prefix.len() {
        return Err(Error::WindowTooLong { k, len: x_prefix.len() });
    }
    let mut theta: Vec<Vec<Letter>> = Vec::new();
    let mut coded = Vec::with_capacity(x_prefix.len() - k + 1);
    for win in x_prefix.windows(k) {
        let letter = match theta.iter().position(|f| f == win) {
            Some(l) => l,
            None => {
                theta.push(win.to_vec());
                theta.len() - 1
            }
        };
        coded.push(letter);
    }
    Ok((coded, BlockCoding::from_factors(k, theta)))
}

/// The substitution tau_k on block letters together with its coding.
#[derive(Debug, Clone)]
pub struct BlockSubstitution {
    pub base: Substitution,
    pub k: usize,
    pub coding: BlockCoding,
    pub tau_k: Substitution,
}

/// Hard cap on the prefix grown while discovering length-k factors.
const FACTOR_DISCOVERY_CAP: usize = 1 << 22;

/// Grows tau-expansions of `a` until one more full expansion step reveals no
/// new length-k factor, and returns the stabilized prefix.
fn stabilized_prefix(s: &Substitution, a: Letter, k: usize) -> Result<Vec<Letter>> {
    let mut w = fixed_point_prefix(s, a, k.max(2))?;
    loop {
        let next = s.apply(&w);
        let count = |u: &[Letter]| {
            let mut seen: Vec<&[Letter]> = Vec::new();
            for win in u.windows(k) {
                if !seen.contains(&win) {
                    seen.push(win);
                }
            }
            seen.len()
        };
        if next.len() >= k && w.len() >= k && count(&next) == count(&w) {
            return Ok(w);
        }
        if next.len() > FACTOR_DISCOVERY_CAP {
            return Err(Error::CapExceeded {
                what: "length-k factor discovery".into(),
                detail: format!("prefix beyond {FACTOR_DISCOVERY_CAP} letters"),
            });
        }
        w = next;
    }
}

/// Builds tau_k generating B_k(tau^omega(a)): the image of a block letter
/// encoding u is the ordered list of the first |tau(u[0])| length-k factors
/// of tau(u).
pub fn block_substitution(s: &Substitution, a: Letter, k: usize) -> Result<BlockSubstitution> {
    if !is_primitive(s) {
        return Err(Error::NotPrimitive);
    }
    let prefix = stabilized_prefix(s, a, k)?;
    let (_, coding) = sliding_block(&prefix, k)?;
    let p = coding.theta.len();
    let mut images = Vec::with_capacity(p);
    for u in &coding.theta {
        let image_of_u = s.apply(u);
        let first_len = s.image(u[0]).len();
        debug_assert!(image_of_u.len() >= first_len + k - 1);
        let mut im = Vec::with_capacity(first_len);
        for i in 0..first_len {
            let block = &image_of_u[i..i + k];
            let letter = coding.letter_of(block).ok_or_else(|| Error::CapExceeded {
                what: "block substitution image".into(),
                detail: "image block missing from the stabilized factor set".into(),
            })?;
            im.push(letter);
        }
        images.push(im);
    }
    let tau_k = Substitution::new(Alphabet::one_based(p), images);
    // the construction is verified against the sliding-block code of the
    // base fixed point over the stabilized prefix
    let n = prefix.len() - k + 1;
    let coded = sliding_block(&prefix, k)?.0;
    let generated = fixed_point_prefix(&tau_k, 0, n)?;
    assert_eq!(coded, generated, "tau_{k} does not generate B_{k}");
    Ok(BlockSubstitution { base: s.clone(), k, coding, tau_k })
}

/// Lifts a rational right eigenpair of the base incidence matrix to the
/// block incidence matrix: V_k[i] = V[pi(i)].
pub fn lift_eigenvector(
    bs: &BlockSubstitution,
    v: &[BigRational],
    alpha: &BigRational,
) -> Result<Vec<BigRational>> {
    let m = incidence(&bs.base).matrix;
    let n = m.len();
    if v.len() != n {
        return Err(Error::NotAnEigenpair);
    }
    for i in 0..n {
        let row: BigRational = (0..n)
            .map(|j| BigRational::from_integer(m[i][j].clone()) * &v[j])
            .sum();
        if row != alpha * &v[i] {
            return Err(Error::NotAnEigenpair);
        }
    }
    let lifted: Vec<BigRational> = bs.coding.pi.iter().map(|&l| v[l].clone()).collect();
    // the lift is an eigenpair of the block incidence matrix by construction
    let mk = incidence(&bs.tau_k).matrix;
    for i in 0..mk.len() {
        let row: BigRational = (0..mk.len())
            .map(|j| BigRational::from_integer(mk[i][j].clone()) * &lifted[j])
            .sum();
        assert_eq!(row, alpha * &lifted[i], "lifted vector is not an eigenvector");
    }
    Ok(lifted)
}

/// Divisibility structure between the characteristic polynomials of tau,
/// tau_2, and tau_k.
#[derive(Debug, Clone)]
pub struct CharPolyRelation {
    pub p_tau: IntPoly,
    pub p_tau2: IntPoly,
    pub p_tauk: IntPoly,
    /// m with P_{tau_k} = X^m * P_{tau_2}, when the quotient is a power of X.
    pub shift_from_tau2: Option<usize>,
    pub divisible_by_p_tau: bool,
}

pub fn char_poly_relation(s: &Substitution, a: Letter, k: usize) -> Result<CharPolyRelation> {
    let p_tau = incidence(s).char_poly;
    let p_tau2 = incidence(&block_substitution(s, a, 2)?.tau_k).char_poly;
    let p_tauk = incidence(&block_substitution(s, a, k)?.tau_k).char_poly;
    let shift_from_tau2 = p_tauk.try_div(&p_tau2).and_then(|q| {
        let (m, rest) = q.strip_x_power();
        (rest == IntPoly::one()).then_some(m)
    });
    let divisible_by_p_tau = p_tauk.try_div(&p_tau).is_some();
    Ok(CharPolyRelation { p_tau, p_tau2, p_tauk, shift_from_tau2, divisible_by_p_tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_exact_kabelian, brute_kabelian};
    use num_bigint::BigInt;

    fn subst(dsl: &str) -> Substitution {
        Substitution::parse(dsl).unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn thue_morse_two_blocks() {
        let tm = subst("01/10");
        let x = fixed_point_prefix(&tm, 0, 16).unwrap();
        let (coded, coding) = sliding_block(&x, 2).unwrap();
        // Theta_2: 01->1, 11->2, 10->3, 00->4 (1-based), coded starts 123134...
        assert_eq!(coding.theta, vec![vec![0, 1], vec![1, 1], vec![1, 0], vec![0, 0]]);
        assert_eq!(&coded[..12], &[0, 1, 2, 0, 2, 3, 0, 1, 2, 3, 0, 2]);
        let bs = block_substitution(&tm, 0, 2).unwrap();
        // 1->12, 2->31, 3->34, 4->13 in 1-based display
        assert_eq!(bs.tau_k.dsl(), "12/31/34/13");
        assert_eq!(
            bs.tau_k.images,
            vec![vec![0, 1], vec![2, 0], vec![2, 3], vec![0, 2]]
        );
    }

    #[test]
    fn k_equals_one_is_relabeling() {
        let tri = subst("01/02/0");
        let x = fixed_point_prefix(&tri, 0, 100).unwrap();
        let (coded, coding) = sliding_block(&x, 1).unwrap();
        // first occurrences are 0,1,2 in that order, so the relabeling is
        // the identity here
        assert_eq!(coding.theta, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(coded, x);
        let bs = block_substitution(&tri, 0, 1).unwrap();
        assert_eq!(bs.tau_k.images, tri.images);
    }

    #[test]
    fn narayana_block_substitutions() {
        let nara = subst("01/2/0");
        let b2 = block_substitution(&nara, 0, 2).unwrap();
        assert_eq!(b2.tau_k.dsl(), "12/3/4/15/3");
        // 0-indexed over 7 letters; letter 4 encodes 010, whose image
        // 01.2.01 starts with blocks 012, 120 = letters 0, 1
        let b3 = block_substitution(&nara, 0, 3).unwrap();
        assert_eq!(
            b3.tau_k.images,
            vec![
                vec![0, 1],
                vec![2],
                vec![3],
                vec![4, 5],
                vec![0, 1],
                vec![6],
                vec![3]
            ]
        );
        // p(3) = 2*3+1 distinct blocks
        assert_eq!(b3.coding.theta.len(), 7);
        assert_eq!(b3.coding.theta[4], vec![0, 1, 0]);
    }

    #[test]
    fn window_too_long() {
        assert!(matches!(
            sliding_block(&[0, 1], 3),
            Err(Error::WindowTooLong { k: 3, len: 2 })
        ));
    }

    #[test]
    fn thue_morse_eigen_lifting() {
        let tm = subst("01/10");
        let bs = block_substitution(&tm, 0, 2).unwrap();
        let v2 = lift_eigenvector(&bs, &[rat(1), rat(1)], &rat(2)).unwrap();
        assert_eq!(v2, vec![rat(1), rat(1), rat(1), rat(1)]);
        let v0 = lift_eigenvector(&bs, &[rat(1), rat(-1)], &rat(0)).unwrap();
        assert_eq!(v0, vec![rat(1), rat(-1), rat(-1), rat(1)]);
        assert!(matches!(
            lift_eigenvector(&bs, &[rat(1), rat(2)], &rat(2)),
            Err(Error::NotAnEigenpair)
        ));
    }

    #[test]
    fn char_poly_relations() {
        // Narayana: P_{tau_2} = X^2 * (X^3 - X^2 - 1)
        let rel = char_poly_relation(&subst("01/2/0"), 0, 2).unwrap();
        assert_eq!(
            rel.p_tau2,
            IntPoly::x_power(2).mul(&IntPoly::from_i64(&[-1, 0, -1, 1]))
        );
        assert_eq!(rel.shift_from_tau2, Some(0));
        assert!(rel.divisible_by_p_tau);
        // z: P_{tau_2} = X^2 (X-1)(X-5)
        let rel = char_poly_relation(&subst("010011/1001"), 0, 2).unwrap();
        assert_eq!(
            rel.p_tau2,
            IntPoly::x_power(2)
                .mul(&IntPoly::from_i64(&[-1, 1]))
                .mul(&IntPoly::from_i64(&[-5, 1]))
        );
        // k = 1: P_{tau_1} = P_tau
        let rel = char_poly_relation(&subst("01/02/0"), 0, 1).unwrap();
        assert_eq!(rel.p_tauk, rel.p_tau);
        assert!(rel.divisible_by_p_tau);
        // P_{tau_2} | P_{tau_k} with power-of-X quotient for k up to 4
        for k in 2..=4usize {
            let rel = char_poly_relation(&subst("01/0"), 0, k).unwrap();
            assert!(rel.shift_from_tau2.is_some(), "k={k}");
            assert!(rel.divisible_by_p_tau, "k={k}");
        }
    }

    #[test]
    fn block_substitution_matches_sliding_block_long() {
        for (dsl, kmax) in [("01/0", 4), ("01/02/0", 3), ("01/2/0", 3)] {
            let s = subst(dsl);
            for k in 1..=kmax {
                let bs = block_substitution(&s, 0, k).unwrap();
                let x = fixed_point_prefix(&s, 0, 10_000 + k - 1).unwrap();
                let coded = sliding_block(&x, k).unwrap().0;
                let gen = fixed_point_prefix(&bs.tau_k, 0, 10_000).unwrap();
                assert_eq!(coded[..10_000], gen[..], "{dsl} k={k}");
            }
        }
    }

    #[test]
    fn exact_complexity_transfers_to_block_code() {
        // rho^{=k}_x(n+k-1) = rho^1_{B_k(x)}(n)
        for dsl in ["01/0", "01/02/0", "01/2/0"] {
            let s = subst(dsl);
            let x = fixed_point_prefix(&s, 0, 30_000).unwrap();
            for k in 2..=4usize {
                let exact = brute_exact_kabelian(&x, k, 60 + k - 1).unwrap();
                let coded = sliding_block(&x, k).unwrap().0;
                let ab = brute_kabelian(&coded, 1, 60).unwrap();
                for n in 1..=60usize {
                    assert_eq!(exact[n + k - 1], ab[n], "{dsl} k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn factor_sets_biject_with_block_factors() {
        // |F_{n+k-1}(x)| = |F_n(B_k(x))| for n <= 60
        let s = subst("01/2/0");
        let x = fixed_point_prefix(&s, 0, 30_000).unwrap();
        for k in 2..=3usize {
            let coded = sliding_block(&x, k).unwrap().0;
            let px = crate::oracle::brute_factor_complexity(&x, 60 + k - 1).unwrap();
            let pb = crate::oracle::brute_factor_complexity(&coded, 60).unwrap();
            for n in 1..=60usize {
                assert_eq!(px[n + k - 1], pb[n], "k={k} n={n}");
            }
        }
    }
}
