//! Exact-rational linear representations of regular sequences and series:
//! path counting over multi-track automata, arithmetic, two-sided
//! (Schuetzenberger) reduction, and the semigroup trick turning boundedly
//! valued representations into finite-output automata. No floating point
//! anywhere: every entry is a `BigRational`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::logic::dfa::{num_symbols, pack, unpack, Dfao, MultiTrackDfa};

type Rat = BigRational;

/// Row-major sparse matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMat {
    pub dim_rows: usize,
    pub dim_cols: usize,
    /// rows[r] = sorted (column, value) pairs, values nonzero.
    pub rows: Vec<Vec<(u32, Rat)>>,
}

impl SparseMat {
    pub fn zero(dim_rows: usize, dim_cols: usize) -> Self {
        SparseMat { dim_rows, dim_cols, rows: vec![Vec::new(); dim_rows] }
    }

    pub fn from_dense(m: &[Vec<Rat>]) -> Self {
        let dim_rows = m.len();
        let dim_cols = m.first().map_or(0, |r| r.len());
        let rows = m
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j as u32, v.clone()))
                    .collect()
            })
            .collect();
        SparseMat { dim_rows, dim_cols, rows }
    }

    pub fn add_entry(&mut self, r: usize, c: usize, v: Rat) {
        if v.is_zero() {
            return;
        }
        let row = &mut self.rows[r];
        match row.binary_search_by_key(&(c as u32), |e| e.0) {
            Ok(i) => {
                row[i].1 += v;
                if row[i].1.is_zero() {
                    row.remove(i);
                }
            }
            Err(i) => row.insert(i, (c as u32, v)),
        }
    }

    /// v * M for a dense row vector v.
    pub fn left_mul(&self, v: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.dim_cols];
        for (r, val) in v.iter().enumerate() {
            if val.is_zero() {
                continue;
            }
            for (c, m) in &self.rows[r] {
                out[*c as usize] += val * m;
            }
        }
        out
    }

    /// M * w for a dense column vector w.
    pub fn right_mul(&self, w: &[Rat]) -> Vec<Rat> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(c, m)| m * &w[*c as usize]).sum())
            .collect()
    }
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Linear representation: value(u) = lambda * mu(u_1) ... mu(u_t) * gamma.
#[derive(Debug, Clone)]
pub struct LinRep {
    pub tracks: Vec<usize>,
    pub dim: usize,
    pub lambda: Vec<Rat>,
    pub mu: Vec<SparseMat>,
    pub gamma: Vec<Rat>,
}

impl LinRep {
    pub fn zero(tracks: Vec<usize>) -> Self {
        let ns = num_symbols(&tracks);
        LinRep {
            tracks,
            dim: 0,
            lambda: Vec::new(),
            mu: vec![SparseMat::zero(0, 0); ns],
            gamma: Vec::new(),
        }
    }

    /// The constant function with the given value.
    pub fn constant(tracks: Vec<usize>, value: Rat) -> Self {
        let ns = num_symbols(&tracks);
        let mut one = SparseMat::zero(1, 1);
        one.add_entry(0, 0, Rat::one());
        LinRep { tracks, dim: 1, lambda: vec![Rat::one()], mu: vec![one; ns], gamma: vec![value] }
    }

    pub fn evaluate(&self, word: &[usize]) -> Rat {
        if self.dim == 0 {
            return Rat::zero();
        }
        let mut v = self.lambda.clone();
        for &sym in word {
            v = self.mu[sym].left_mul(&v);
        }
        dot(&v, &self.gamma)
    }

    /// Values at rep(0), rep(1), ... for a single-track representation.
    pub fn first_values(&self, ns: &crate::numeration::NumerationSystem, count: usize) -> Vec<Rat> {
        assert_eq!(self.tracks.len(), 1);
        (0..count as u64).map(|n| self.evaluate(&ns.rep(n))).collect()
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = self.clone();
        for g in &mut out.gamma {
            *g *= c;
        }
        out
    }

    /// Signed sum by direct sum of representations.
    pub fn add(&self, other: &Self, sign: i64) -> Result<Self> {
        if self.tracks != other.tracks {
            return Err(Error::TrackMismatch(format!(
                "{:?} vs {:?}",
                self.tracks, other.tracks
            )));
        }
        let d = self.dim + other.dim;
        let mut lambda = self.lambda.clone();
        lambda.extend(other.lambda.iter().cloned());
        let s = Rat::from_integer(BigInt::from(sign));
        let mut gamma = self.gamma.clone();
        gamma.extend(other.gamma.iter().map(|g| g * &s));
        let mu = self
            .mu
            .iter()
            .zip(&other.mu)
            .map(|(a, b)| {
                let mut m = SparseMat::zero(d, d);
                for (r, row) in a.rows.iter().enumerate() {
                    for (c, v) in row {
                        m.add_entry(r, *c as usize, v.clone());
                    }
                }
                for (r, row) in b.rows.iter().enumerate() {
                    for (c, v) in row {
                        m.add_entry(self.dim + r, self.dim + *c as usize, v.clone());
                    }
                }
                m
            })
            .collect();
        Ok(LinRep { tracks: self.tracks.clone(), dim: d, lambda, mu, gamma })
    }

    /// Reorders the tracks: new track t reads what old track perm[t] read.
    pub fn permute_tracks(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.tracks.len());
        let tracks: Vec<usize> = perm.iter().map(|&p| self.tracks[p]).collect();
        let ns = num_symbols(&tracks);
        let mu = (0..ns)
            .map(|sym| {
                let digits = unpack(&tracks, sym);
                let old: Vec<usize> = (0..perm.len())
                    .map(|t| digits[perm.iter().position(|&p| p == t).unwrap()])
                    .collect();
                self.mu[pack(&self.tracks, &old)].clone()
            })
            .collect();
        LinRep {
            tracks,
            dim: self.dim,
            lambda: self.lambda.clone(),
            mu,
            gamma: self.gamma.clone(),
        }
    }
}

/// Reduced-row-echelon basis with coordinates back into the discovery basis.
struct EchelonBasis {
    width: usize,
    /// (reduced vector, pivot column, coordinates over discovery basis)
    rows: Vec<(Vec<Rat>, usize, Vec<Rat>)>,
    count: usize,
}

fn bit_size(r: &Rat) -> u64 {
    r.numer().bits() + r.denom().bits()
}

impl EchelonBasis {
    fn new(width: usize) -> Self {
        EchelonBasis { width, rows: Vec::new(), count: 0 }
    }

    /// Reduces x against the basis; returns Some(coordinates) when x lies in
    /// the span, None after inserting x as a new basis member.
    fn insert(&mut self, x: &[Rat]) -> Option<Vec<Rat>> {
        debug_assert_eq!(x.len(), self.width);
        let mut r = x.to_vec();
        let mut coord = vec![Rat::zero(); self.count];
        for (vec, pivot, c) in &self.rows {
            let t = r[*pivot].clone();
            if t.is_zero() {
                continue;
            }
            for (j, v) in vec.iter().enumerate() {
                if !v.is_zero() {
                    r[j] -= &t * v;
                }
            }
            for (j, v) in c.iter().enumerate() {
                coord[j] += &t * v;
            }
        }
        // pivot = smallest-bit-size nonzero entry
        let pivot = r
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .min_by_key(|(_, v)| bit_size(v))
            .map(|(j, _)| j);
        let pivot = match pivot {
            Some(p) => p,
            None => return Some(coord),
        };
        // remainder r = x - coord . basis; the new discovery-basis member is
        // x itself, so r has coordinates (-coord, 1)
        let inv = r[pivot].clone();
        let mut vec: Vec<Rat> = r.iter().map(|v| v / &inv).collect();
        vec[pivot] = Rat::one();
        let mut c: Vec<Rat> = coord.iter().map(|v| -(v / &inv)).collect();
        c.push(Rat::one() / &inv);
        // keep the form reduced: eliminate the new pivot from earlier rows
        for (old_vec, _, old_c) in &mut self.rows {
            let t = old_vec[pivot].clone();
            if t.is_zero() {
                continue;
            }
            for (j, v) in vec.iter().enumerate() {
                if !v.is_zero() {
                    old_vec[j] -= &t * v;
                }
            }
            while old_c.len() < c.len() {
                old_c.push(Rat::zero());
            }
            for (j, v) in c.iter().enumerate() {
                old_c[j] -= &t * v;
            }
        }
        for (_, _, old_c) in &mut self.rows {
            while old_c.len() <= self.count {
                old_c.push(Rat::zero());
            }
        }
        self.rows.push((vec, pivot, c));
        self.count += 1;
        None
    }

    fn express(&self, x: &[Rat]) -> Option<Vec<Rat>> {
        let mut r = x.to_vec();
        let mut coord = vec![Rat::zero(); self.count];
        for (vec, pivot, c) in &self.rows {
            let t = r[*pivot].clone();
            if t.is_zero() {
                continue;
            }
            for (j, v) in vec.iter().enumerate() {
                if !v.is_zero() {
                    r[j] -= &t * v;
                }
            }
            for (j, v) in c.iter().enumerate() {
                coord[j] += &t * v;
            }
        }
        if r.iter().all(|v| v.is_zero()) {
            Some(coord)
        } else {
            None
        }
    }
}

impl LinRep {
    /// Forward (reachability) pass: restricts to span{lambda mu(u)}.
    fn reduce_forward(&self) -> Self {
        if self.dim == 0 {
            return self.clone();
        }
        let ns = self.mu.len();
        let mut ech = EchelonBasis::new(self.dim);
        let mut basis: Vec<Vec<Rat>> = Vec::new();
        if ech.insert(&self.lambda).is_none() {
            basis.push(self.lambda.clone());
        }
        // radix-order discovery: breadth over the basis, digits ascending
        let mut i = 0;
        while i < basis.len() {
            for a in 0..ns {
                let cand = self.mu[a].left_mul(&basis[i]);
                if ech.insert(&cand).is_none() {
                    basis.push(cand);
                }
            }
            i += 1;
        }
        let n = basis.len();
        if n == 0 {
            return LinRep::zero(self.tracks.clone());
        }
        let mu = (0..ns)
            .map(|a| {
                let mut m = SparseMat::zero(n, n);
                for (r, b) in basis.iter().enumerate() {
                    let coords = ech.express(&self.mu[a].left_mul(b)).expect("closed basis");
                    for (c, v) in coords.iter().enumerate() {
                        m.add_entry(r, c, v.clone());
                    }
                }
                m
            })
            .collect();
        let mut lambda = vec![Rat::zero(); n];
        lambda[0] = Rat::one();
        let gamma = basis.iter().map(|b| dot(b, &self.gamma)).collect();
        LinRep { tracks: self.tracks.clone(), dim: n, lambda, mu, gamma }
    }

    /// Backward (observability) pass: restricts to span{mu(u) gamma}.
    fn reduce_backward(&self) -> Self {
        if self.dim == 0 {
            return self.clone();
        }
        let ns = self.mu.len();
        let mut ech = EchelonBasis::new(self.dim);
        let mut basis: Vec<Vec<Rat>> = Vec::new();
        if ech.insert(&self.gamma).is_none() {
            basis.push(self.gamma.clone());
        }
        let mut i = 0;
        while i < basis.len() {
            for a in 0..ns {
                let cand = self.mu[a].right_mul(&basis[i]);
                if ech.insert(&cand).is_none() {
                    basis.push(cand);
                }
            }
            i += 1;
        }
        let n = basis.len();
        if n == 0 {
            return LinRep::zero(self.tracks.clone());
        }
        let mu = (0..ns)
            .map(|a| {
                let mut m = SparseMat::zero(n, n);
                for (c, b) in basis.iter().enumerate() {
                    let coords = ech.express(&self.mu[a].right_mul(b)).expect("closed basis");
                    for (r, v) in coords.iter().enumerate() {
                        m.add_entry(r, c, v.clone());
                    }
                }
                m
            })
            .collect();
        let mut gamma = vec![Rat::zero(); n];
        gamma[0] = Rat::one();
        let lambda = basis.iter().map(|b| dot(&self.lambda, b)).collect();
        LinRep { tracks: self.tracks.clone(), dim: n, lambda, mu, gamma }
    }

    /// Two-sided reduction to a minimal-dimension representation with the
    /// same values on all words.
    pub fn reduce(&self) -> Self {
        self.reduce_forward().reduce_backward()
    }

    /// True when the represented series is identically zero.
    pub fn is_zero_series(&self) -> bool {
        self.reduce_forward().reduce_backward().dim == 0
    }

    /// Replaces lambda by lambda * mu(0)^c for the least c making the value
    /// invariant under leading-zero padding (value(0u) = value(u)).
    pub fn stabilize_lambda(&self) -> Result<Self> {
        if self.dim == 0 {
            return Ok(self.clone());
        }
        // observability basis once: two series agree iff their lambdas agree
        // against span{mu(u) gamma}
        let ns = self.mu.len();
        let mut ech = EchelonBasis::new(self.dim);
        let mut basis: Vec<Vec<Rat>> = Vec::new();
        if ech.insert(&self.gamma).is_none() {
            basis.push(self.gamma.clone());
        }
        let mut i = 0;
        while i < basis.len() {
            for a in 0..ns {
                let cand = self.mu[a].right_mul(&basis[i]);
                if ech.insert(&cand).is_none() {
                    basis.push(cand);
                }
            }
            i += 1;
        }
        let mut lam = self.lambda.clone();
        for _ in 0..=self.dim + 1 {
            let next = self.mu[0].left_mul(&lam);
            if basis.iter().all(|b| dot(&lam, b) == dot(&next, b)) {
                let mut out = self.clone();
                out.lambda = lam;
                return Ok(out);
            }
            lam = next;
        }
        Err(Error::CapExceeded {
            what: "lambda stabilization".into(),
            detail: "no padding-invariant lambda within dim+2 zero-digit steps".into(),
        })
    }
}

/// Path counting: value at kept-track word u = number of length-|u| words v
/// on the removed tracks with <u interleaved with v> accepted by d.
pub fn path_count(d: &MultiTrackDfa, keep: &[bool]) -> LinRep {
    assert_eq!(keep.len(), d.tracks.len());
    let kept: Vec<usize> = (0..keep.len()).filter(|&t| keep[t]).collect();
    let removed: Vec<usize> = (0..keep.len()).filter(|&t| !keep[t]).collect();
    let tracks: Vec<usize> = kept.iter().map(|&t| d.tracks[t]).collect();
    let removed_sizes: Vec<usize> = removed.iter().map(|&t| d.tracks[t]).collect();
    let n = d.num_states();
    let ns = num_symbols(&tracks);
    let rs = num_symbols(&removed_sizes);
    let mut mu = vec![SparseMat::zero(n, n); ns];
    for sym in 0..ns {
        let kd = unpack(&tracks, sym);
        for rsym in 0..rs {
            let rd = unpack(&removed_sizes, rsym);
            let mut full = vec![0usize; keep.len()];
            for (i, &t) in kept.iter().enumerate() {
                full[t] = kd[i];
            }
            for (i, &t) in removed.iter().enumerate() {
                full[t] = rd[i];
            }
            let fsym = pack(&d.tracks, &full);
            for p in 0..n {
                let q = d.delta[p][fsym] as usize;
                mu[sym].add_entry(p, q, Rat::one());
            }
        }
    }
    let mut lambda = vec![Rat::zero(); n];
    lambda[d.initial as usize] = Rat::one();
    let gamma = d
        .accept
        .iter()
        .map(|&a| if a { Rat::one() } else { Rat::zero() })
        .collect();
    LinRep { tracks, dim: n, lambda, mu, gamma }
}

/// Default caps for the semigroup exploration.
#[derive(Debug, Clone, Copy)]
pub struct SemigroupCaps {
    pub max_states: usize,
    pub max_entry_bits: u64,
}

impl Default for SemigroupCaps {
    fn default() -> Self {
        SemigroupCaps { max_states: 2_000_000, max_entry_bits: 32 }
    }
}

/// Converts a boundedly valued representation into a DFAO over the valid
/// language: output at u is value(u), provided the set of reachable row
/// vectors along prefixes of the valid language is finite within caps.
pub fn semigroup_trick(
    rep: &LinRep,
    valid: &MultiTrackDfa,
    caps: SemigroupCaps,
) -> Result<Dfao> {
    if rep.tracks != valid.tracks {
        return Err(Error::TrackMismatch(format!("{:?} vs {:?}", rep.tracks, valid.tracks)));
    }
    let ns = num_symbols(&rep.tracks);
    // states of the valid DFA from which acceptance is still reachable
    let co = co_reachable(valid);
    let value_to_output = |v: &Rat| -> Result<i64> {
        if !v.is_integer() {
            return Err(Error::CapExceeded {
                what: "semigroup outputs".into(),
                detail: format!("non-integer value {v}"),
            });
        }
        i64::try_from(v.numer()).map_err(|_| Error::CapExceeded {
            what: "semigroup outputs".into(),
            detail: "output exceeds i64".into(),
        })
    };
    #[derive(Clone, PartialEq, Eq, Hash)]
    struct Key(Vec<Rat>, u32);
    if rep.dim == 0 || !co[valid.initial as usize] {
        // zero series or empty valid language: single output-0 state
        return Ok(Dfao {
            tracks: rep.tracks.clone(),
            delta: vec![vec![0; ns]],
            outputs: vec![0],
            initial: 0,
        });
    }
    let start = Key(rep.lambda.clone(), valid.initial);
    let mut index: HashMap<Key, u32> = HashMap::new();
    index.insert(start.clone(), 0);
    let mut states = vec![start];
    let mut delta: Vec<Vec<u32>> = Vec::new();
    let mut outputs: Vec<i64> = Vec::new();
    const DEAD: u32 = u32::MAX;
    let mut i = 0;
    while i < states.len() {
        let Key(vec, vq) = states[i].clone();
        let val = dot(&vec, &rep.gamma);
        outputs.push(if valid.accept[vq as usize] {
            value_to_output(&val)?
        } else if val.is_integer() {
            value_to_output(&val).unwrap_or(0)
        } else {
            0
        });
        let mut row = Vec::with_capacity(ns);
        for sym in 0..ns {
            let nq = valid.delta[vq as usize][sym];
            if !co[nq as usize] {
                row.push(DEAD);
                continue;
            }
            let nv = rep.mu[sym].left_mul(&vec);
            for entry in &nv {
                if entry.numer().bits() > caps.max_entry_bits {
                    return Err(Error::CapExceeded {
                        what: "semigroup vector norm".into(),
                        detail: format!(
                            "entry magnitude exceeded 2^{} (likely unbounded)",
                            caps.max_entry_bits
                        ),
                    });
                }
            }
            let key = Key(nv, nq);
            let id = *index.entry(key.clone()).or_insert_with(|| {
                states.push(key);
                (states.len() - 1) as u32
            });
            row.push(id);
        }
        delta.push(row);
        if states.len() > caps.max_states {
            return Err(Error::CapExceeded {
                what: "semigroup states".into(),
                detail: format!("more than {} reachable vectors", caps.max_states),
            });
        }
        i += 1;
    }
    let dead_id = delta.len() as u32;
    let mut need_dead = false;
    for row in &mut delta {
        for t in row.iter_mut() {
            if *t == DEAD {
                *t = dead_id;
                need_dead = true;
            }
        }
    }
    if need_dead {
        delta.push(vec![dead_id; ns]);
        outputs.push(0);
    }
    Ok(Dfao { tracks: rep.tracks.clone(), delta, outputs, initial: 0 }.minimize())
}

/// Converts an integer, boundedly valued representation into a DFAO
/// without reducing it first. Prefix vectors are deduplicated by their
/// pairings with an integer observability basis; those pairings are values
/// of the represented function on extension words, so the number of
/// distinct signatures is finite exactly when the function is bounded.
/// This avoids the rational arithmetic of `reduce` + `semigroup_trick` on
/// large representations. The representation must vanish on invalid words
/// (path counts of validity-embedding automata do), and the resulting
/// DFAO outputs 0 there.
pub fn bounded_dfao(rep: &LinRep, caps: SemigroupCaps) -> Result<Dfao> {
    let ns = num_symbols(&rep.tracks);
    let zero_dfao = || Dfao {
        tracks: rep.tracks.clone(),
        delta: vec![vec![0; ns]],
        outputs: vec![0],
        initial: 0,
    };
    if rep.dim == 0 || rep.gamma.iter().all(|v| v.is_zero()) {
        return Ok(zero_dfao());
    }
    let overflow = || Error::CapExceeded {
        what: "bounded_dfao arithmetic".into(),
        detail: "intermediate value exceeds i64".into(),
    };
    let to_i64 = |v: &Rat| -> Result<i64> {
        if !v.is_integer() {
            return Err(Error::CapExceeded {
                what: "bounded_dfao entries".into(),
                detail: format!("non-integer entry {v}"),
            });
        }
        i64::try_from(v.numer()).map_err(|_| overflow())
    };
    let dim = rep.dim;
    let lambda: Vec<i64> = rep.lambda.iter().map(&to_i64).collect::<Result<_>>()?;
    let gamma: Vec<i64> = rep.gamma.iter().map(&to_i64).collect::<Result<_>>()?;
    // row-major sparse integer transition matrices
    let mut mu: Vec<Vec<Vec<(u32, i64)>>> = Vec::with_capacity(ns);
    for m in &rep.mu {
        let mut rows = Vec::with_capacity(dim);
        for row in &m.rows {
            rows.push(
                row.iter()
                    .map(|(c, v)| Ok((*c, to_i64(v)?)))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        mu.push(rows);
    }
    let right_mul = |m: &Vec<Vec<(u32, i64)>>, w: &[i64]| -> Result<Vec<i64>> {
        let mut out = vec![0i64; dim];
        for (r, row) in m.iter().enumerate() {
            let mut acc: i128 = 0;
            for (c, v) in row {
                acc += *v as i128 * w[*c as usize] as i128;
            }
            out[r] = i64::try_from(acc).map_err(|_| overflow())?;
        }
        Ok(out)
    };
    // integer observability basis: raw columns mu(w') gamma spanning the
    // smallest gamma-containing space closed under left multiplication;
    // gamma itself is the first basis column
    let to_rat =
        |v: &[i64]| -> Vec<Rat> { v.iter().map(|&x| Rat::from_integer(x.into())).collect() };
    let mut ech = EchelonBasis::new(dim);
    let mut obs: Vec<Vec<i64>> = Vec::new();
    ech.insert(&rep.gamma);
    obs.push(gamma.clone());
    let mut i = 0;
    while i < obs.len() {
        for m in &mu {
            let cand = right_mul(m, &obs[i])?;
            if ech.insert(&to_rat(&cand)).is_none() {
                obs.push(cand);
            }
        }
        i += 1;
    }
    let rank = obs.len();
    // transpose to rows so signatures accumulate along the sparse vector
    let mut obs_rows: Vec<Vec<i64>> = vec![vec![0i64; rank]; dim];
    let mut obs_max: i64 = 1;
    for (t, b) in obs.iter().enumerate() {
        for (r, &x) in b.iter().enumerate() {
            obs_rows[r][t] = x;
            obs_max = obs_max.max(x.abs());
        }
    }
    drop(obs);
    let debug = std::env::var_os("KABELIAN_DEBUG").is_some();
    if debug {
        eprintln!("bounded_dfao: dim {dim}, observability rank {rank}");
    }
    let sig_cap: i64 = if caps.max_entry_bits >= 62 {
        i64::MAX / 2
    } else {
        1i64 << caps.max_entry_bits
    };
    // |v| small enough that an i64 accumulation of v . obs cannot overflow
    let v_safe: i64 = i64::MAX / obs_max / (dim.max(1) as i64) / 2;
    let sig_err = || Error::CapExceeded {
        what: "bounded_dfao signatures".into(),
        detail: format!(
            "extension value exceeds 2^{} (likely unbounded)",
            caps.max_entry_bits
        ),
    };
    let signature = |v: &[i64]| -> Result<Vec<i64>> {
        if v.iter().all(|x| x.abs() <= v_safe) {
            let mut sig = vec![0i64; rank];
            for (r, &x) in v.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (s, y) in sig.iter_mut().zip(&obs_rows[r]) {
                    *s += x * y;
                }
            }
            if sig.iter().any(|s| s.abs() > sig_cap) {
                return Err(sig_err());
            }
            Ok(sig)
        } else {
            let mut sig = vec![0i128; rank];
            for (r, &x) in v.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (s, y) in sig.iter_mut().zip(&obs_rows[r]) {
                    *s += x as i128 * *y as i128;
                }
            }
            sig.into_iter()
                .map(|s| {
                    if s.unsigned_abs() > sig_cap as u128 {
                        Err(sig_err())
                    } else {
                        Ok(s as i64)
                    }
                })
                .collect()
        }
    };
    let left_mul = |m: &Vec<Vec<(u32, i64)>>, v: &[i64]| -> Result<Vec<i64>> {
        let mut out = vec![0i128; dim];
        for (r, row) in m.iter().enumerate() {
            let x = v[r] as i128;
            if x == 0 {
                continue;
            }
            for (c, val) in row {
                out[*c as usize] += x * *val as i128;
            }
        }
        out.into_iter()
            .map(|x| i64::try_from(x).map_err(|_| overflow()))
            .collect()
    };
    // equal signatures agree on every extension value, so merging by
    // signature preserves all outputs; the output itself is the pairing
    // with gamma, the first basis column
    let start_sig = signature(&lambda)?;
    let mut index: HashMap<Vec<i64>, u32> = HashMap::new();
    index.insert(start_sig.clone(), 0);
    // prefix vectors are only needed until their state is expanded
    let mut vectors: Vec<Option<Vec<i64>>> = vec![Some(lambda)];
    let mut delta: Vec<Vec<u32>> = Vec::new();
    let mut outputs: Vec<i64> = vec![start_sig[0]];
    let mut i = 0;
    while i < vectors.len() {
        let vec = vectors[i].take().expect("state expanded twice");
        let mut row = Vec::with_capacity(ns);
        for sym in 0..ns {
            let nv = left_mul(&mu[sym], &vec)?;
            let sig = signature(&nv)?;
            let id = match index.entry(sig) {
                std::collections::hash_map::Entry::Occupied(e) => *e.get(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    let id = vectors.len() as u32;
                    outputs.push(e.key()[0]);
                    e.insert(id);
                    vectors.push(Some(nv));
                    id
                }
            };
            row.push(id);
        }
        delta.push(row);
        if vectors.len() > caps.max_states {
            return Err(Error::CapExceeded {
                what: "bounded_dfao states".into(),
                detail: format!("more than {} reachable classes", caps.max_states),
            });
        }
        i += 1;
        if debug && i % 20000 == 0 {
            eprintln!("bounded_dfao: {i} states expanded, {} discovered", vectors.len());
        }
    }
    Ok(Dfao { tracks: rep.tracks.clone(), delta, outputs, initial: 0 }.minimize())
}

fn co_reachable(d: &MultiTrackDfa) -> Vec<bool> {
    let n = d.num_states();
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (p, row) in d.delta.iter().enumerate() {
        for &q in row {
            rev[q as usize].push(p as u32);
        }
    }
    let mut co = d.accept.clone();
    let mut stack: Vec<u32> = (0..n as u32).filter(|&q| co[q as usize]).collect();
    while let Some(q) = stack.pop() {
        for &p in &rev[q as usize] {
            if !co[p as usize] {
                co[p as usize] = true;
                stack.push(p);
            }
        }
    }
    co
}

/// Substitutes the variable on `track` through a functional synchronized
/// relation: result(.., x, ..) = rep(.., y, ..) for the unique y with
/// rel accepting <x, y>.
pub fn compose_functional(rep: &LinRep, rel: &MultiTrackDfa, track: usize) -> Result<LinRep> {
    if rel.tracks.len() != 2 || rel.tracks[0] != rep.tracks[track] || rel.tracks[1] != rep.tracks[track]
    {
        return Err(Error::TrackMismatch(format!(
            "relation tracks {:?} incompatible with track {} of {:?}",
            rel.tracks, track, rep.tracks
        )));
    }
    let ns = num_symbols(&rep.tracks);
    let k = rep.tracks[track];
    let rn = rel.num_states();
    let d = rep.dim * rn;
    let mut mu = vec![SparseMat::zero(d, d); ns];
    for sym in 0..ns {
        let digits = unpack(&rep.tracks, sym);
        for b in 0..k {
            let mut sub = digits.clone();
            sub[track] = b;
            let rep_sym = pack(&rep.tracks, &sub);
            let rel_sym = pack(&rel.tracks, &[digits[track], b]);
            for rp in 0..rn {
                let rq = rel.delta[rp][rel_sym] as usize;
                for (r, row) in rep.mu[rep_sym].rows.iter().enumerate() {
                    for (c, v) in row {
                        mu[sym].add_entry(rp * rep.dim + r, rq * rep.dim + *c as usize, v.clone());
                    }
                }
            }
        }
    }
    let mut lambda = vec![Rat::zero(); d];
    let init = rel.initial as usize;
    lambda[init * rep.dim..(init + 1) * rep.dim].clone_from_slice(&rep.lambda);
    let mut gamma = vec![Rat::zero(); d];
    for (rq, &acc) in rel.accept.iter().enumerate() {
        if acc {
            gamma[rq * rep.dim..(rq + 1) * rep.dim].clone_from_slice(&rep.gamma);
        }
    }
    Ok(LinRep { tracks: rep.tracks.clone(), dim: d, lambda, mu, gamma })
}
