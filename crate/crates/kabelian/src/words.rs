//! Substitutions, fixed points, Parikh vectors, incidence matrices, and
//! spectral (Pisot) classification of their characteristic polynomials.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::algebra::field::NumberField;
use crate::algebra::poly::{char_poly, IntPoly};
use crate::error::{Error, Result};

/// Letters are indices into an [`Alphabet`].
pub type Letter = usize;

/// An ordered finite alphabet; letter `i` displays as `names[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Self {
        assert!(!names.is_empty(), "alphabet must be nonempty");
        for (i, n) in names.iter().enumerate() {
            assert!(
                !names[..i].contains(n),
                "duplicate symbol {n:?} in alphabet"
            );
        }
        Alphabet { names }
    }

    /// Digit alphabet `0..n`.
    pub fn digits(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string()).collect())
    }

    /// One-based alphabet `1..=n` (block-coded alphabets).
    pub fn one_based(n: usize) -> Self {
        Self::new((1..=n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn name(&self, i: Letter) -> &str {
        &self.names[i]
    }

    /// True when every symbol is a single character, so words can be printed
    /// without separators.
    pub fn single_char(&self) -> bool {
        self.names.iter().all(|n| n.chars().count() == 1)
    }

    pub fn display_word(&self, w: &[Letter]) -> String {
        if self.single_char() {
            w.iter().map(|&l| self.names[l].as_str()).collect()
        } else {
            w.iter()
                .map(|&l| self.names[l].as_str())
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

/// A substitution over a fixed alphabet: letter `i` maps to `images[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub alphabet: Alphabet,
    pub images: Vec<Vec<Letter>>,
}

impl Substitution {
    pub fn new(alphabet: Alphabet, images: Vec<Vec<Letter>>) -> Self {
        assert_eq!(alphabet.len(), images.len(), "one image per letter");
        assert!(
            images.iter().any(|im| !im.is_empty()),
            "at least one image must be nonempty"
        );
        for im in &images {
            for &l in im {
                assert!(l < alphabet.len(), "image letter out of range");
            }
        }
        Substitution { alphabet, images }
    }

    /// Parses the slash-separated digit DSL, e.g. `"01/2/0"`: field `i` is
    /// the image of letter `i`; digits must be smaller than the field count.
    pub fn parse(dsl: &str) -> Result<Self> {
        let fields: Vec<&str> = dsl.split('/').collect();
        let n = fields.len();
        let mut images = Vec::with_capacity(n);
        for f in &fields {
            let mut image = Vec::with_capacity(f.len());
            for ch in f.chars() {
                let d = ch
                    .to_digit(10)
                    .ok_or_else(|| Error::Parse(format!("non-digit letter {ch:?} in {dsl:?}")))?
                    as usize;
                if d >= n {
                    return Err(Error::Parse(format!(
                        "letter {d} out of range for a {n}-letter alphabet in {dsl:?}"
                    )));
                }
                image.push(d);
            }
            images.push(image);
        }
        if images.iter().all(|im| im.is_empty()) {
            return Err(Error::Parse(format!("all images empty in {dsl:?}")));
        }
        Ok(Substitution::new(Alphabet::digits(n), images))
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn image(&self, l: Letter) -> &[Letter] {
        &self.images[l]
    }

    pub fn apply(&self, u: &[Letter]) -> Vec<Letter> {
        let mut out = Vec::new();
        for &l in u {
            out.extend_from_slice(&self.images[l]);
        }
        out
    }

    /// The substitution printed back in the slash DSL when all letters are
    /// single characters; dotted otherwise.
    pub fn dsl(&self) -> String {
        self.images
            .iter()
            .map(|im| self.alphabet.display_word(im))
            .collect::<Vec<_>>()
            .join("/")
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, im) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(
                f,
                "{} -> {}",
                self.alphabet.name(i),
                self.alphabet.display_word(im)
            )?;
        }
        Ok(())
    }
}

/// Checks prolongability of `s` on `a` (image starts with `a` and iterates
/// grow strictly) and returns the first `n` letters of the fixed point.
pub fn fixed_point_prefix(s: &Substitution, a: Letter, n: usize) -> Result<Vec<Letter>> {
    if s.images[a].first() != Some(&a) {
        return Err(Error::NotProlongable(
            a,
            format!(
                "image {} does not start with {}",
                s.alphabet.display_word(&s.images[a]),
                s.alphabet.name(a)
            ),
        ));
    }
    // |tau^n(a)| must grow strictly within |A|+1 iterations; track letter
    // counts instead of materializing the words
    let mut counts = vec![0u128; s.alphabet_size()];
    counts[a] = 1;
    let mut len = 1u128;
    for _ in 0..=s.alphabet_size() {
        let mut next = vec![0u128; s.alphabet_size()];
        for (i, &c) in counts.iter().enumerate() {
            for &b in &s.images[i] {
                next[b] += c;
            }
        }
        counts = next;
        let next_len: u128 = counts.iter().sum();
        if next_len <= len {
            return Err(Error::NotProlongable(
                a,
                format!("iterated image length stalls at {next_len}"),
            ));
        }
        len = next_len;
    }
    // expand a prefix until it covers n letters
    let mut w = vec![a];
    while w.len() < n {
        let next = s.apply(&w);
        if next.len() <= w.len() {
            return Err(Error::NotProlongable(
                a,
                "prefix expansion stalls".to_string(),
            ));
        }
        w = next;
    }
    w.truncate(n);
    Ok(w)
}

/// Parikh vector: `counts[l]` = number of occurrences of letter `l` in `u`.
pub fn parikh(alphabet_size: usize, u: &[Letter]) -> Vec<u64> {
    let mut counts = vec![0u64; alphabet_size];
    for &l in u {
        counts[l] += 1;
    }
    counts
}

/// Number of (overlapping) occurrences of the factor `w` in `u`.
pub fn occurrences(u: &[Letter], w: &[Letter]) -> usize {
    if w.is_empty() || w.len() > u.len() {
        return if w.is_empty() { u.len() + 1 } else { 0 };
    }
    u.windows(w.len()).filter(|win| *win == w).count()
}

/// Incidence matrix and characteristic polynomial of a substitution.
#[derive(Debug, Clone)]
pub struct IncidenceData {
    /// `matrix[i][j]` = number of occurrences of letter `j` in the image of `i`.
    pub matrix: Vec<Vec<BigInt>>,
    pub char_poly: IntPoly,
}

pub fn incidence(s: &Substitution) -> IncidenceData {
    let n = s.alphabet_size();
    let mut matrix = vec![vec![BigInt::from(0); n]; n];
    for (i, im) in s.images.iter().enumerate() {
        for &j in im {
            matrix[i][j] += 1;
        }
    }
    let cp = char_poly(&matrix);
    IncidenceData { matrix, char_poly: cp }
}

/// Primitivity: some power of the incidence matrix is entrywise positive.
pub fn is_primitive(s: &Substitution) -> bool {
    let n = s.alphabet_size();
    // boolean reachability matrix, iterated (n-1)*n + 1 times is enough
    let inc = incidence(s);
    let mut b: Vec<Vec<bool>> = inc
        .matrix
        .iter()
        .map(|row| row.iter().map(|e| *e > BigInt::from(0)).collect())
        .collect();
    let step = |m: &[Vec<bool>], base: &[Vec<bool>]| -> Vec<Vec<bool>> {
        let mut out = vec![vec![false; n]; n];
        for i in 0..n {
            for l in 0..n {
                if m[i][l] {
                    for j in 0..n {
                        if base[l][j] {
                            out[i][j] = true;
                        }
                    }
                }
            }
        }
        out
    };
    let base = b.clone();
    for _ in 0..(n - 1) * n + 1 {
        if b.iter().all(|row| row.iter().all(|&x| x)) {
            return true;
        }
        b = step(&b, &base);
    }
    b.iter().all(|row| row.iter().all(|&x| x))
}

/// Spectral classification of a monic integer polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpectralTag {
    Pisot,
    /// `charPoly = X^m * pisotMinPoly` with shift `m >= 1`.
    UltimatelyPisot(usize),
    NotPisot,
}

#[derive(Debug, Clone)]
pub struct SpectralClass {
    pub tag: SpectralTag,
    /// Rational interval bracketing the Pisot root, width below 1e-12.
    pub pisot_root: Option<(BigRational, BigRational)>,
    pub pisot_min_poly: Option<IntPoly>,
}

impl SpectralClass {
    pub fn is_ultimately_pisot(&self) -> bool {
        self.tag != SpectralTag::NotPisot
    }

    /// The shift `m` with `charPoly = X^m * pisotMinPoly` (0 for plain Pisot).
    pub fn shift(&self) -> usize {
        match self.tag {
            SpectralTag::UltimatelyPisot(m) => m,
            _ => 0,
        }
    }
}

fn not_pisot() -> SpectralClass {
    SpectralClass { tag: SpectralTag::NotPisot, pisot_root: None, pisot_min_poly: None }
}

/// Strips the maximal `X^m` factor, checks that the remainder is the minimal
/// polynomial of a Pisot number (irreducible, one real root > 1, all other
/// roots strictly inside the unit circle), and reports the shift.
pub fn classify_spectrum(p: &IntPoly) -> Result<SpectralClass> {
    assert!(p.is_monic(), "spectral classification expects a monic polynomial");
    let (m, q) = p.strip_x_power();
    if q.degree() == 0 {
        return Ok(not_pisot());
    }
    if !q.is_irreducible_monic()? {
        return Ok(not_pisot());
    }
    // exactly one real root in (1, bound]; Pisot numbers are real and > 1
    let qr = q.to_rational();
    let one = BigRational::one();
    let bound = q.cauchy_root_bound() + BigRational::one();
    if qr.count_real_roots(&one, &bound) != 1 {
        return Ok(not_pisot());
    }
    let eps = BigRational::new(BigInt::one(), BigInt::from(10u64.pow(12)));
    let (lo, hi) = qr.isolate_single_root(&one, &bound, &eps);
    // remaining conjugates must lie strictly inside the unit disk
    if q.degree() > 1 {
        let field = NumberField::new(qr, lo.clone(), hi.clone());
        let quotient = field.minpoly_divided_by_root();
        if !field.all_roots_in_unit_disk(&quotient) {
            return Ok(not_pisot());
        }
    }
    let tag = if m == 0 { SpectralTag::Pisot } else { SpectralTag::UltimatelyPisot(m) };
    Ok(SpectralClass { tag, pisot_root: Some((lo, hi)), pisot_min_poly: Some(q) })
}
