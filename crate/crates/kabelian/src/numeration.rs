//! Dumont-Thomas numeration systems: addressing automata, representations,
//! valuations, and the fixed-point DFAO.

use std::cell::RefCell;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::logic::dfa::Dfao;
use crate::words::{fixed_point_prefix, Letter, Substitution};

/// The addressing automaton of a substitution prolongable on `initial`:
/// states are letters, digit `i` from state `b` goes to the `i`-th letter of
/// the image of `b` (partial deterministic, all states final).
#[derive(Debug, Clone)]
pub struct AddressingAutomaton {
    pub subst: Substitution,
    pub initial: Letter,
    /// Digit alphabet {0, .., digit_count-1}; digit_count = max image length.
    pub digit_count: usize,
}

impl AddressingAutomaton {
    pub fn new(subst: Substitution, initial: Letter) -> Result<Self> {
        // prolongability check (and growth check) via the fixed point
        fixed_point_prefix(&subst, initial, 1)?;
        let digit_count = subst.images.iter().map(|im| im.len()).max().unwrap();
        Ok(AddressingAutomaton { subst, initial, digit_count })
    }

    /// delta(b, i), defined when i < |image(b)|.
    pub fn delta(&self, b: Letter, digit: usize) -> Option<Letter> {
        self.subst.images[b].get(digit).copied()
    }

    pub fn num_states(&self) -> usize {
        self.subst.alphabet_size()
    }
}

/// A Dumont-Thomas numeration system with its representation language
/// L = L(A) \ 0+A* and radix order.
#[derive(Debug)]
pub struct NumerationSystem {
    pub automaton: AddressingAutomaton,
    /// Interop name tag, e.g. "msd_nara".
    pub name: String,
    /// counts[l][b] = number of digit words of length l readable from b,
    /// which equals |tau^l(b)|; grown lazily.
    counts: RefCell<Vec<Vec<BigUint>>>,
}

impl NumerationSystem {
    pub fn new(subst: Substitution, initial: Letter, name: impl Into<String>) -> Result<Self> {
        let automaton = AddressingAutomaton::new(subst, initial)?;
        let n = automaton.num_states();
        Ok(NumerationSystem {
            automaton,
            name: name.into(),
            counts: RefCell::new(vec![vec![BigUint::one(); n]]),
        })
    }

    pub fn digit_count(&self) -> usize {
        self.automaton.digit_count
    }

    fn ensure_counts(&self, len: usize) {
        let mut counts = self.counts.borrow_mut();
        while counts.len() <= len {
            let prev = counts.last().unwrap();
            let next: Vec<BigUint> = self
                .automaton
                .subst
                .images
                .iter()
                .map(|im| im.iter().map(|&c| prev[c].clone()).sum())
                .collect();
            counts.push(next);
        }
    }

    /// |tau^n(b)| = number of length-n digit words readable from b.
    pub fn expansion_length(&self, b: Letter, n: usize) -> BigUint {
        self.ensure_counts(n);
        self.counts.borrow()[n][b].clone()
    }

    /// Canonical representation of n: the n-th word of L in radix order;
    /// rep(0) = the empty word.
    pub fn rep(&self, n: u64) -> Vec<usize> {
        self.rep_big(&BigUint::from(n))
    }

    pub fn rep_big(&self, n: &BigUint) -> Vec<usize> {
        if n.is_zero() {
            return Vec::new();
        }
        let a = self.automaton.initial;
        // find the representation length: L valid words of length l starting
        // with a nonzero digit number Σ_{d>=1} counts[l-1][delta(a,d)]
        let mut remaining = n - BigUint::one();
        let mut len = 1usize;
        loop {
            let block: BigUint = (1..self.automaton.subst.images[a].len())
                .map(|d| self.expansion_length(self.automaton.delta(a, d).unwrap(), len - 1))
                .sum();
            if remaining < block {
                break;
            }
            remaining -= block;
            len += 1;
        }
        // greedy descent: first digit >= 1, the rest from 0
        let mut word = Vec::with_capacity(len);
        let mut state = a;
        for pos in 0..len {
            let lo = if pos == 0 { 1 } else { 0 };
            let rest = len - pos - 1;
            let mut digit = lo;
            loop {
                let next = self.automaton.delta(state, digit).expect("descent ran out of digits");
                let block = self.expansion_length(next, rest);
                if remaining < block {
                    word.push(digit);
                    state = next;
                    break;
                }
                remaining -= block;
                digit += 1;
            }
        }
        word
    }

    /// Valuation of a digit word; leading zeros allowed.
    pub fn val(&self, u: &[usize]) -> Result<BigUint> {
        let t = u.len();
        let mut state = self.automaton.initial;
        let mut total = BigUint::zero();
        for (j, &d) in u.iter().enumerate() {
            if d >= self.automaton.subst.images[state].len() {
                return Err(Error::InvalidRepresentation(format!(
                    "digit {d} undefined from state {} in {}",
                    self.automaton.subst.alphabet.name(state),
                    self.name
                )));
            }
            // positions contributed by smaller digits at this level
            for i in 0..d {
                let c = self.automaton.delta(state, i).unwrap();
                total += self.expansion_length(c, t - 1 - j);
            }
            state = self.automaton.delta(state, d).unwrap();
        }
        Ok(total)
    }

    /// val as u64 for small inputs.
    pub fn val_u64(&self, u: &[usize]) -> Result<u64> {
        let v = self.val(u)?;
        u64::try_from(&v).map_err(|_| Error::InvalidRepresentation("value overflows u64".into()))
    }

    /// True when the word (with leading zeros allowed) is readable by the
    /// addressing automaton.
    pub fn is_valid(&self, u: &[usize]) -> bool {
        let mut state = self.automaton.initial;
        for &d in u {
            match self.automaton.delta(state, d) {
                Some(next) => state = next,
                None => return false,
            }
        }
        true
    }

    /// Completed single-track DFA accepting 0*L, i.e. all padded valid
    /// representations (the addressing automaton plus a dead state).
    pub fn valid_padded_dfa(&self) -> crate::logic::dfa::MultiTrackDfa {
        let n = self.automaton.num_states();
        let dead = n as u32;
        let ns = self.digit_count();
        let mut delta = Vec::with_capacity(n + 1);
        for b in 0..n {
            delta.push(
                (0..ns)
                    .map(|d| self.automaton.delta(b, d).map_or(dead, |c| c as u32))
                    .collect(),
            );
        }
        delta.push(vec![dead; ns]);
        let mut accept = vec![true; n];
        accept.push(false);
        crate::logic::dfa::MultiTrackDfa::new(vec![ns], delta, accept, self.automaton.initial as u32)
    }

    /// Single-track DFA accepting exactly the padded representations 0*rep(c).
    pub fn value_dfa(&self, c: u64) -> crate::logic::dfa::MultiTrackDfa {
        let digits = self.rep(c);
        let t = digits.len();
        let k = self.digit_count();
        // states 0..=t track progress through rep(c); state 0 loops on the
        // padding zero; t+1 is dead
        let dead = (t + 1) as u32;
        let mut delta = Vec::with_capacity(t + 2);
        for q in 0..=t {
            delta.push(
                (0..k)
                    .map(|d| {
                        if q < t && d == digits[q] {
                            (q + 1) as u32
                        } else if q == 0 && d == 0 {
                            0
                        } else {
                            dead
                        }
                    })
                    .collect(),
            );
        }
        delta.push(vec![dead; k]);
        let mut accept = vec![false; t + 2];
        accept[t] = true;
        crate::logic::dfa::MultiTrackDfa::new(vec![k], delta, accept, 0).minimize()
    }
}

/// The fixed-point DFAO: on input rep(n) (leading zeros allowed) outputs the
/// n-th letter of the fixed point.
pub fn word_dfao(ns: &NumerationSystem) -> Dfao {
    let n = ns.automaton.num_states();
    let dead = n as u32;
    let k = ns.digit_count();
    let mut delta = Vec::with_capacity(n + 1);
    for b in 0..n {
        delta.push(
            (0..k)
                .map(|d| ns.automaton.delta(b, d).map_or(dead, |c| c as u32))
                .collect(),
        );
    }
    delta.push(vec![dead; k]);
    let mut outputs: Vec<i64> = (0..n as i64).collect();
    outputs.push(-1); // dead state, never reached on valid input
    Dfao { tracks: vec![k], delta, outputs, initial: ns.automaton.initial as u32 }
}
