//! Complete deterministic multi-track automata over tuples of digits, with
//! the product/complement/projection/minimization kernel used by the
//! predicate compiler.
//!
//! A symbol is a tuple of per-track digits, flattened in mixed radix with
//! track 0 most significant. Digit 0 of every track is the padding digit, so
//! the all-zero tuple is symbol 0.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Complete deterministic automaton over flattened digit tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiTrackDfa {
    /// Digit-alphabet size of each track.
    pub tracks: Vec<usize>,
    /// `delta[q][sym]` for every state and flattened symbol.
    pub delta: Vec<Vec<u32>>,
    pub accept: Vec<bool>,
    pub initial: u32,
}

/// Deterministic automaton with an integer output per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfao {
    pub tracks: Vec<usize>,
    pub delta: Vec<Vec<u32>>,
    pub outputs: Vec<i64>,
    pub initial: u32,
}

pub fn num_symbols(tracks: &[usize]) -> usize {
    tracks.iter().product()
}

/// Flattens a digit tuple into a symbol index.
pub fn pack(tracks: &[usize], digits: &[usize]) -> usize {
    debug_assert_eq!(tracks.len(), digits.len());
    let mut sym = 0;
    for (t, &d) in digits.iter().enumerate() {
        debug_assert!(d < tracks[t]);
        sym = sym * tracks[t] + d;
    }
    sym
}

/// Inverse of [`pack`].
pub fn unpack(tracks: &[usize], mut sym: usize) -> Vec<usize> {
    let mut digits = vec![0; tracks.len()];
    for t in (0..tracks.len()).rev() {
        digits[t] = sym % tracks[t];
        sym /= tracks[t];
    }
    digits
}

impl MultiTrackDfa {
    pub fn new(tracks: Vec<usize>, delta: Vec<Vec<u32>>, accept: Vec<bool>, initial: u32) -> Self {
        let ns = num_symbols(&tracks);
        assert_eq!(delta.len(), accept.len());
        for row in &delta {
            assert_eq!(row.len(), ns);
            for &t in row {
                assert!((t as usize) < delta.len());
            }
        }
        MultiTrackDfa { tracks, delta, accept, initial }
    }

    /// The automaton accepting nothing over the given tracks.
    pub fn empty(tracks: Vec<usize>) -> Self {
        let ns = num_symbols(&tracks);
        MultiTrackDfa { tracks, delta: vec![vec![0; ns]], accept: vec![false], initial: 0 }
    }

    /// The automaton accepting everything over the given tracks.
    pub fn all(tracks: Vec<usize>) -> Self {
        let mut d = Self::empty(tracks);
        d.accept[0] = true;
        d
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn accepts(&self, word: &[usize]) -> bool {
        let mut q = self.initial;
        for &sym in word {
            q = self.delta[q as usize][sym];
        }
        self.accept[q as usize]
    }

    /// Runs the automaton on per-track digit words of equal length.
    pub fn accepts_tuple(&self, tracks_words: &[&[usize]]) -> bool {
        assert_eq!(tracks_words.len(), self.tracks.len());
        let len = tracks_words.first().map_or(0, |w| w.len());
        for w in tracks_words {
            assert_eq!(w.len(), len, "tuple tracks must have equal length");
        }
        let mut q = self.initial;
        for i in 0..len {
            let digits: Vec<usize> = tracks_words.iter().map(|w| w[i]).collect();
            q = self.delta[q as usize][pack(&self.tracks, &digits)];
        }
        self.accept[q as usize]
    }

    pub fn complement(&self) -> Self {
        let mut out = self.clone();
        for a in &mut out.accept {
            *a = !*a;
        }
        out
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if self.tracks != other.tracks {
            return Err(Error::TrackMismatch(format!(
                "{:?} vs {:?}",
                self.tracks, other.tracks
            )));
        }
        let ns = num_symbols(&self.tracks);
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut pairs = vec![(self.initial, other.initial)];
        index.insert(pairs[0], 0);
        let mut delta = Vec::new();
        let mut accept = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (p, q) = pairs[i];
            let mut row = Vec::with_capacity(ns);
            for sym in 0..ns {
                let next = (self.delta[p as usize][sym], other.delta[q as usize][sym]);
                let id = *index.entry(next).or_insert_with(|| {
                    pairs.push(next);
                    (pairs.len() - 1) as u32
                });
                row.push(id);
            }
            delta.push(row);
            accept.push(op(self.accept[p as usize], other.accept[q as usize]));
            i += 1;
        }
        Ok(MultiTrackDfa { tracks: self.tracks.clone(), delta, accept, initial: 0 })
    }

    pub fn intersect(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a || b)
    }

    /// Symmetric difference; empty iff the two languages are equal.
    pub fn xor(&self, other: &Self) -> Result<Self> {
        self.combine(other, |a, b| a != b)
    }

    pub fn is_empty(&self) -> bool {
        // reachability from the initial state
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.initial];
        seen[self.initial as usize] = true;
        while let Some(q) = stack.pop() {
            if self.accept[q as usize] {
                return false;
            }
            for &t in &self.delta[q as usize] {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t);
                }
            }
        }
        true
    }

    pub fn same_language(&self, other: &Self) -> Result<bool> {
        Ok(self.xor(other)?.is_empty())
    }

    /// Some accepted symbol word, shortest first, if the language is nonempty.
    pub fn example_word(&self) -> Option<Vec<usize>> {
        let n = self.num_states();
        let mut pred: Vec<Option<(u32, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::new();
        seen[self.initial as usize] = true;
        queue.push_back(self.initial);
        let mut hit = None;
        while let Some(q) = queue.pop_front() {
            if self.accept[q as usize] {
                hit = Some(q);
                break;
            }
            for (sym, &t) in self.delta[q as usize].iter().enumerate() {
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    pred[t as usize] = Some((q, sym));
                    queue.push_back(t);
                }
            }
        }
        let mut q = hit?;
        let mut word = Vec::new();
        while let Some((p, sym)) = pred[q as usize] {
            word.push(sym);
            q = p;
        }
        word.reverse();
        Some(word)
    }

    /// Inserts a fresh track at position `pos` with digit alphabet `size`;
    /// the new track's digits are ignored.
    pub fn cylindrify(&self, pos: usize, size: usize) -> Self {
        let mut tracks = self.tracks.clone();
        tracks.insert(pos, size);
        let ns = num_symbols(&tracks);
        let delta = self
            .delta
            .iter()
            .map(|row| {
                (0..ns)
                    .map(|sym| {
                        let mut digits = unpack(&tracks, sym);
                        digits.remove(pos);
                        row[pack(&self.tracks, &digits)]
                    })
                    .collect()
            })
            .collect();
        MultiTrackDfa { tracks, delta, accept: self.accept.clone(), initial: self.initial }
    }

    /// Reorders tracks: new track `t` is old track `perm[t]`.
    pub fn permute_tracks(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.tracks.len());
        let tracks: Vec<usize> = perm.iter().map(|&p| self.tracks[p]).collect();
        let ns = num_symbols(&tracks);
        let delta = self
            .delta
            .iter()
            .map(|row| {
                (0..ns)
                    .map(|sym| {
                        let digits = unpack(&tracks, sym);
                        let mut old = vec![0; self.tracks.len()];
                        for (t, &p) in perm.iter().enumerate() {
                            old[p] = digits[t];
                        }
                        row[pack(&self.tracks, &old)]
                    })
                    .collect()
            })
            .collect();
        MultiTrackDfa { tracks, delta, accept: self.accept.clone(), initial: self.initial }
    }

    /// Re-reads each original track from a (possibly shared) track of a new
    /// layout: `map[t]` is the new track feeding old track `t`. Generalizes
    /// cylindrification, permutation and diagonal variable sharing.
    pub fn remap_tracks(&self, map: &[usize], new_tracks: &[usize]) -> Self {
        assert_eq!(map.len(), self.tracks.len());
        for (t, &m) in map.iter().enumerate() {
            assert_eq!(new_tracks[m], self.tracks[t], "track size mismatch at {t}");
        }
        let ns = num_symbols(new_tracks);
        let delta = self
            .delta
            .iter()
            .map(|row| {
                (0..ns)
                    .map(|sym| {
                        let digits = unpack(new_tracks, sym);
                        let old: Vec<usize> = map.iter().map(|&m| digits[m]).collect();
                        row[pack(&self.tracks, &old)]
                    })
                    .collect()
            })
            .collect();
        MultiTrackDfa {
            tracks: new_tracks.to_vec(),
            delta,
            accept: self.accept.clone(),
            initial: self.initial,
        }
    }

    /// Existential projection: removes track `pos`, guessing its digits.
    ///
    /// The projected variable's representation may be longer than the
    /// remaining tracks' words, which shows up as extra leading zero padding;
    /// the initial state set is therefore saturated under symbols whose
    /// remaining-track digits are all zero before determinizing.
    pub fn project(&self, pos: usize) -> Self {
        let removed = self.tracks[pos];
        let mut tracks = self.tracks.clone();
        tracks.remove(pos);
        let ns = num_symbols(&tracks);
        let n = self.num_states();
        // full_sym[sym][d]: the original packed symbol obtained by inserting
        // removed digit d into projected symbol sym
        let full_sym: Vec<Vec<usize>> = (0..ns)
            .map(|sym| {
                let digits = unpack(&tracks, sym);
                (0..removed)
                    .map(|d| {
                        let mut full = digits.clone();
                        full.insert(pos, d);
                        pack(&self.tracks, &full)
                    })
                    .collect()
            })
            .collect();
        // succ[q * ns + sym]: deduped NFA successors of q on projected symbol
        let mut succ: Vec<Vec<u32>> = Vec::with_capacity(n * ns);
        for q in 0..n {
            for fs in &full_sym {
                let mut list: Vec<u32> = fs.iter().map(|&f| self.delta[q][f]).collect();
                list.sort_unstable();
                list.dedup();
                succ.push(list);
            }
        }
        // generation-stamped scratch for subset unions
        let mut stamp = vec![u32::MAX; n];
        let mut generation = 0u32;
        let mut buf: Vec<u32> = Vec::new();
        // saturate the initial set under all-zero remaining digits (the
        // projected variable's representation may be longer than the rest)
        let mut init: Vec<u32> = vec![self.initial];
        stamp[self.initial as usize] = generation;
        let mut head = 0;
        while head < init.len() {
            let q = init[head] as usize;
            head += 1;
            for &t in &succ[q * ns] {
                if stamp[t as usize] != generation {
                    stamp[t as usize] = generation;
                    init.push(t);
                }
            }
        }
        init.sort_unstable();
        // subset construction over interned sorted state sets
        let mut index: HashMap<Box<[u32]>, u32> = HashMap::new();
        let start: Box<[u32]> = init.into_boxed_slice();
        index.insert(start.clone(), 0);
        let mut subsets: Vec<Box<[u32]>> = vec![start];
        let mut delta: Vec<Vec<u32>> = Vec::new();
        let mut accept = Vec::new();
        let mut i = 0;
        while i < subsets.len() {
            let cur = subsets[i].clone();
            let mut row = Vec::with_capacity(ns);
            for sym in 0..ns {
                generation = generation.wrapping_add(1);
                buf.clear();
                for &q in cur.iter() {
                    for &t in &succ[q as usize * ns + sym] {
                        if stamp[t as usize] != generation {
                            stamp[t as usize] = generation;
                            buf.push(t);
                        }
                    }
                }
                buf.sort_unstable();
                let id = match index.get(buf.as_slice()) {
                    Some(&id) => id,
                    None => {
                        let next: Box<[u32]> = buf.clone().into_boxed_slice();
                        let id = subsets.len() as u32;
                        index.insert(next.clone(), id);
                        subsets.push(next);
                        id
                    }
                };
                row.push(id);
            }
            delta.push(row);
            accept.push(cur.iter().any(|&q| self.accept[q as usize]));
            i += 1;
        }
        MultiTrackDfa { tracks, delta, accept, initial: 0 }.minimize()
    }

    /// Removes states unreachable from the initial state.
    fn trim(&self) -> Self {
        let n = self.num_states();
        let mut order = Vec::new();
        let mut map = vec![u32::MAX; n];
        let mut stack = vec![self.initial];
        map[self.initial as usize] = 0;
        order.push(self.initial);
        while let Some(q) = stack.pop() {
            for &t in &self.delta[q as usize] {
                if map[t as usize] == u32::MAX {
                    map[t as usize] = order.len() as u32;
                    order.push(t);
                    stack.push(t);
                }
            }
        }
        let delta = order
            .iter()
            .map(|&q| self.delta[q as usize].iter().map(|&t| map[t as usize]).collect())
            .collect();
        let accept = order.iter().map(|&q| self.accept[q as usize]).collect();
        MultiTrackDfa { tracks: self.tracks.clone(), delta, accept, initial: 0 }
    }

    /// Unique minimal complete DFA (Hopcroft partition refinement).
    pub fn minimize(&self) -> Self {
        let t = self.trim();
        let classes = moore_partition(&t.delta, &t.accept.iter().map(|&a| a as i64).collect::<Vec<_>>());
        let k = classes.iter().copied().max().map_or(0, |m| m as usize + 1);
        let ns = num_symbols(&t.tracks);
        let mut delta = vec![vec![u32::MAX; ns]; k];
        let mut accept = vec![false; k];
        for q in 0..t.num_states() {
            let c = classes[q] as usize;
            accept[c] = t.accept[q];
            for sym in 0..ns {
                delta[c][sym] = classes[t.delta[q][sym] as usize];
            }
        }
        MultiTrackDfa {
            tracks: t.tracks,
            delta,
            accept,
            initial: classes[t.initial as usize],
        }
        .trim()
    }
}

/// Moore partition refinement on a complete transition table; states start
/// partitioned by `colors` and end in coarsest bisimulation classes. Returns
/// the class of each state, classes numbered in order of first occurrence.
pub fn moore_partition(delta: &[Vec<u32>], colors: &[i64]) -> Vec<u32> {
    let n = delta.len();
    // initial classes by color
    let mut class: Vec<u32> = Vec::with_capacity(n);
    let mut seen: HashMap<i64, u32> = HashMap::new();
    for &c in colors {
        let next = seen.len() as u32;
        class.push(*seen.entry(c).or_insert(next));
    }
    let mut count = seen.len();
    loop {
        let mut index: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
        let mut next_class = vec![0u32; n];
        for q in 0..n {
            let sig: Vec<u32> = delta[q].iter().map(|&t| class[t as usize]).collect();
            let fresh = index.len() as u32;
            next_class[q] = *index.entry((class[q], sig)).or_insert(fresh);
        }
        let new_count = index.len();
        class = next_class;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    // renumber in order of first occurrence for determinism
    let mut renumber: HashMap<u32, u32> = HashMap::new();
    class
        .iter()
        .map(|&c| {
            let fresh = renumber.len() as u32;
            *renumber.entry(c).or_insert(fresh)
        })
        .collect()
}

impl Dfao {
    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn output(&self, word: &[usize]) -> i64 {
        let mut q = self.initial;
        for &sym in word {
            q = self.delta[q as usize][sym];
        }
        self.outputs[q as usize]
    }

    /// Output at a tuple of per-track digit words, left-padded with zeros
    /// to a common length.
    pub fn output_tuple(&self, tracks_words: &[&[usize]]) -> i64 {
        assert_eq!(tracks_words.len(), self.tracks.len());
        let len = tracks_words.iter().map(|w| w.len()).max().unwrap_or(0);
        let mut q = self.initial;
        for i in 0..len {
            let digits: Vec<usize> = tracks_words
                .iter()
                .map(|w| if i + w.len() >= len { w[i + w.len() - len] } else { 0 })
                .collect();
            q = self.delta[q as usize][pack(&self.tracks, &digits)];
        }
        self.outputs[q as usize]
    }

    pub fn output_range(&self) -> (i64, i64) {
        let lo = *self.outputs.iter().min().unwrap();
        let hi = *self.outputs.iter().max().unwrap();
        (lo, hi)
    }

    /// States unreachable from the initial state removed.
    pub fn trim(&self) -> Self {
        let n = self.num_states();
        let mut order = Vec::new();
        let mut map = vec![u32::MAX; n];
        let mut stack = vec![self.initial];
        map[self.initial as usize] = 0;
        order.push(self.initial);
        while let Some(q) = stack.pop() {
            for &t in &self.delta[q as usize] {
                if map[t as usize] == u32::MAX {
                    map[t as usize] = order.len() as u32;
                    order.push(t);
                    stack.push(t);
                }
            }
        }
        Dfao {
            tracks: self.tracks.clone(),
            delta: order
                .iter()
                .map(|&q| self.delta[q as usize].iter().map(|&t| map[t as usize]).collect())
                .collect(),
            outputs: order.iter().map(|&q| self.outputs[q as usize]).collect(),
            initial: 0,
        }
    }

    /// Minimal DFAO computing the same output function (Moore refinement
    /// seeded by outputs).
    pub fn minimize(&self) -> Self {
        let t = self.trim();
        let classes = moore_partition(&t.delta, &t.outputs);
        let k = classes.iter().copied().max().map_or(0, |m| m as usize + 1);
        let ns = num_symbols(&t.tracks);
        let mut delta = vec![vec![u32::MAX; ns]; k];
        let mut outputs = vec![0i64; k];
        for q in 0..t.num_states() {
            let c = classes[q] as usize;
            outputs[c] = t.outputs[q];
            for sym in 0..ns {
                delta[c][sym] = classes[t.delta[q][sym] as usize];
            }
        }
        Dfao { tracks: t.tracks, delta, outputs, initial: classes[t.initial as usize] }.trim()
    }

    /// The DFA accepting exactly the inputs on which the output is `value`.
    pub fn value_predicate(&self, value: i64) -> Result<MultiTrackDfa> {
        if !self.outputs.contains(&value) {
            return Err(Error::ValueNotInRange(value));
        }
        Ok(self.values_predicate(|o| o == value))
    }

    /// DFA accepting the words whose output satisfies the predicate.
    pub fn values_predicate(&self, keep: impl Fn(i64) -> bool) -> MultiTrackDfa {
        MultiTrackDfa {
            tracks: self.tracks.clone(),
            delta: self.delta.clone(),
            accept: self.outputs.iter().map(|&o| keep(o)).collect(),
            initial: self.initial,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Single-track DFA over digits {0,1} accepting words with an even
    /// number of 1s.
    fn even_ones() -> MultiTrackDfa {
        MultiTrackDfa::new(
            vec![2],
            vec![vec![0, 1], vec![1, 0]],
            vec![true, false],
            0,
        )
    }

    /// Accepting words ending in digit 1.
    fn ends_in_one() -> MultiTrackDfa {
        MultiTrackDfa::new(vec![2], vec![vec![0, 1], vec![0, 1]], vec![false, true], 0)
    }

    #[test]
    fn pack_unpack_roundtrip() {
        let tracks = vec![2, 6, 5];
        for sym in 0..num_symbols(&tracks) {
            assert_eq!(pack(&tracks, &unpack(&tracks, sym)), sym);
        }
    }

    #[test]
    fn boolean_ops() {
        let a = even_ones();
        let b = ends_in_one();
        let both = a.intersect(&b).unwrap();
        assert!(both.accepts(&[1, 0, 1, 1, 1])); // four 1s, ends in 1
        assert!(!both.accepts(&[1, 1, 0, 1])); // three 1s
        assert!(!both.accepts(&[1])); // odd
        assert!(!both.accepts(&[1, 1, 0])); // ends in 0
        // a AND NOT a is empty
        assert!(a.intersect(&a.complement()).unwrap().is_empty());
        // De Morgan
        let lhs = a.union(&b).unwrap().complement();
        let rhs = a.complement().intersect(&b.complement()).unwrap();
        assert!(lhs.same_language(&rhs).unwrap());
    }

    #[test]
    fn minimize_is_idempotent_and_preserves_language() {
        let a = even_ones().union(&ends_in_one()).unwrap();
        let m = a.minimize();
        assert!(m.same_language(&a).unwrap());
        assert_eq!(m.minimize().num_states(), m.num_states());
        assert!(m.num_states() <= a.num_states());
    }

    #[test]
    fn cylindrify_and_permute() {
        let a = ends_in_one();
        let c = a.cylindrify(0, 3); // new ignored track in front
        assert_eq!(c.tracks, vec![3, 2]);
        assert!(c.accepts_tuple(&[&[2, 0], &[0, 1]]));
        assert!(!c.accepts_tuple(&[&[2, 2], &[1, 0]]));
        let p = c.permute_tracks(&[1, 0]);
        assert!(p.accepts_tuple(&[&[0, 1], &[2, 0]]));
    }

    #[test]
    fn projection_with_padding_saturation() {
        // two tracks over {0,1}: accept <x,y> iff x = y and both end in 1.
        // equality automaton intersected with "track 0 ends in 1"
        let tracks = vec![2usize, 2];
        let eq = MultiTrackDfa::new(
            tracks.clone(),
            // state 0 = equal so far, 1 = dead
            vec![vec![0, 1, 1, 0], vec![1, 1, 1, 1]],
            vec![true, false],
            0,
        );
        let ends1 = {
            // track 0 ends in digit 1
            let mut delta = vec![vec![0u32; 4], vec![0u32; 4]];
            for sym in 0..4 {
                let d = unpack(&tracks, sym);
                let target = if d[0] == 1 { 1 } else { 0 };
                delta[0][sym] = target;
                delta[1][sym] = target;
            }
            MultiTrackDfa::new(tracks.clone(), delta, vec![false, true], 0)
        };
        let lang = eq.intersect(&ends1).unwrap();
        // project away track 1: result = words over {0,1} ending in 1
        let proj = lang.project(1);
        assert!(proj.same_language(&ends_in_one()).unwrap());
    }

    #[test]
    fn example_word_is_shortest() {
        let b = ends_in_one();
        assert_eq!(b.example_word(), Some(vec![1]));
        assert_eq!(MultiTrackDfa::empty(vec![2]).example_word(), None);
        assert_eq!(MultiTrackDfa::all(vec![2]).example_word(), Some(vec![]));
    }

    #[test]
    fn dfao_minimize_and_value_predicate() {
        // DFAO over {0,1} outputting the last digit read (0 at start), with
        // a redundant duplicated state
        let d = Dfao {
            tracks: vec![2],
            delta: vec![vec![0, 1], vec![2, 1], vec![0, 1]],
            outputs: vec![0, 1, 0],
            initial: 0,
        };
        let m = d.minimize();
        assert_eq!(m.num_states(), 2);
        for w in [vec![], vec![1], vec![1, 0], vec![0, 1, 1]] {
            assert_eq!(m.output(&w), d.output(&w));
        }
        let p = d.value_predicate(1).unwrap();
        assert!(p.accepts(&[0, 1]));
        assert!(!p.accepts(&[1, 0]));
        assert!(matches!(d.value_predicate(7), Err(Error::ValueNotInRange(7))));
    }
}
