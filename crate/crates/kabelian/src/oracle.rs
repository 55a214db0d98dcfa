//! Brute-force reference implementations of factor complexity, (exact)
//! k-abelian complexity, and balancedness, computed from a finite prefix.
//!
//! Factors of each length are tracked as classes of starting positions,
//! refined incrementally from length n to n+1 in O(prefix) per step; k-block
//! count vectors are carried along incrementally, so a full sweep up to nMax
//! costs O(|prefix| * nMax) plus the per-length class bookkeeping.
//!
//! Everything is prefix-relative. The public entry points run the sweep on
//! the full prefix and on its first half and insist the answers agree
//! (stability under doubling); otherwise they report PrefixTooShort.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::words::Letter;

/// One sweep's results for a fixed block length k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepResult {
    pub k: usize,
    /// factor complexity p(0..=nMax)
    pub factor: Vec<u64>,
    /// k-abelian complexity rho^k(0..=nMax)
    pub kabelian: Vec<u64>,
    /// exact k-abelian complexity rho^{=k}(0..=nMax)
    pub exact_kabelian: Vec<u64>,
    /// per n: max over length-k blocks w and length-n factors u,v of
    /// ||u|_w - |v|_w|
    pub balance: Vec<u64>,
}

/// Witness that some length-k block is (k,C)-unbalanced on the prefix.
#[derive(Debug, Clone)]
pub struct BlockWitness {
    pub block: Vec<Letter>,
    pub n: usize,
    pub u: Vec<Letter>,
    pub v: Vec<Letter>,
    pub spread: u64,
}

/// Outcome of the totally-(k,C)-unbalanced search. "No" and the balanced
/// side of "Mixed" are prefix-relative only.
#[derive(Debug, Clone)]
pub enum Unbalancedness {
    Yes(Vec<BlockWitness>),
    NoAtThisPrefix,
    Mixed {
        unbalanced: Vec<BlockWitness>,
        balanced_so_far: Vec<Vec<Letter>>,
    },
}

/// Classes of starting positions by factor identity at one length, ids in
/// order of first occurrence.
fn refine_step(prefix: &[Letter], cls: &[u32], n: usize) -> Vec<u32> {
    // class of x[i..i+n+1) = (class of x[i..i+n), x[i+n])
    let mut index: HashMap<(u32, Letter), u32> = HashMap::new();
    let mut out = Vec::with_capacity(prefix.len() - n);
    for i in 0..prefix.len() - n {
        let key = (cls[i], prefix[i + n]);
        let fresh = index.len() as u32;
        out.push(*index.entry(key).or_insert(fresh));
    }
    out
}

/// Class array for factors of length n (positions 0..=|prefix|-n).
fn classes_at(prefix: &[Letter], n: usize) -> Vec<u32> {
    let mut cls = vec![0u32; prefix.len() + 1];
    for m in 0..n {
        cls = refine_step(prefix, &cls, m);
    }
    cls
}

fn num_classes(cls: &[u32]) -> usize {
    cls.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Full sweep over n = 0..=n_max for one k, no stability check.
fn sweep(prefix: &[Letter], k: usize, n_max: usize) -> Result<SweepResult> {
    if k == 0 || k > prefix.len() || n_max >= prefix.len() {
        return Err(Error::WindowTooLong { k: k.max(n_max), len: prefix.len() });
    }
    let block_cls = classes_at(prefix, k);
    let num_blocks = num_classes(&block_cls);
    let pref_cls = classes_at(prefix, k - 1);

    let mut factor = Vec::with_capacity(n_max + 1);
    let mut kabelian = Vec::with_capacity(n_max + 1);
    let mut exact = Vec::with_capacity(n_max + 1);
    let mut balance = Vec::with_capacity(n_max + 1);

    // n = 0: the empty factor
    factor.push(1);
    kabelian.push(1);
    exact.push(1);
    balance.push(0);

    let mut cls = classes_at(prefix, 1);
    // per-class data, maintained for n >= k: first-occurrence representative
    // and k-block count vector
    let mut reps: Vec<usize> = Vec::new();
    let mut counts: Vec<Vec<u32>> = Vec::new();

    for n in 1..=n_max {
        let p = num_classes(&cls);
        factor.push(p as u64);
        if n < k {
            // rho^k(n) = p(n) below the window length; all short factors are
            // exactly-k equivalent (no length-k block at all)
            kabelian.push(p as u64);
            exact.push(1);
            balance.push(0);
        } else {
            if n == k {
                // a length-k factor contains exactly one block: itself
                reps = vec![usize::MAX; p];
                for (i, &c) in cls.iter().enumerate() {
                    if reps[c as usize] == usize::MAX {
                        reps[c as usize] = i;
                    }
                }
                counts = reps
                    .iter()
                    .map(|&i| {
                        let mut v = vec![0u32; num_blocks];
                        v[block_cls[i] as usize] = 1;
                        v
                    })
                    .collect();
            }
            // group classes for the two equivalences
            let mut kab_groups: HashMap<(u32, &[u32]), ()> = HashMap::new();
            let mut exact_groups: HashMap<&[u32], ()> = HashMap::new();
            for c in 0..p {
                kab_groups.insert((pref_cls[reps[c]], &counts[c]), ());
                exact_groups.insert(&counts[c], ());
            }
            kabelian.push(kab_groups.len() as u64);
            exact.push(exact_groups.len() as u64);
            // balance: max spread of any block count across classes
            let mut spread = 0u32;
            for b in 0..num_blocks {
                let mut lo = u32::MAX;
                let mut hi = 0u32;
                for c in 0..p {
                    lo = lo.min(counts[c][b]);
                    hi = hi.max(counts[c][b]);
                }
                spread = spread.max(hi - lo);
            }
            balance.push(spread as u64);
        }
        if n == n_max {
            break;
        }
        // refine to n+1 and push class data down to the children
        let next = refine_step(prefix, &cls, n);
        if n >= k {
            let np = num_classes(&next);
            let mut new_reps = vec![usize::MAX; np];
            let mut new_counts: Vec<Vec<u32>> = vec![Vec::new(); np];
            for (i, &c) in next.iter().enumerate() {
                let c = c as usize;
                if new_reps[c] == usize::MAX {
                    new_reps[c] = i;
                    let parent = cls[i] as usize;
                    let mut v = counts[parent].clone();
                    v[block_cls[i + n + 1 - k] as usize] += 1;
                    new_counts[c] = v;
                }
            }
            reps = new_reps;
            counts = new_counts;
        }
        cls = next;
    }
    Ok(SweepResult { k, factor, kabelian, exact_kabelian: exact, balance })
}

/// Sweep with the stability check: the same answers must come out of the
/// first half of the prefix.
pub fn stable_sweep(prefix: &[Letter], k: usize, n_max: usize) -> Result<SweepResult> {
    let full = sweep(prefix, k, n_max)?;
    let half = sweep(&prefix[..prefix.len() / 2], k, n_max).map_err(|_| {
        Error::PrefixTooShort(format!(
            "half prefix ({} letters) cannot reach n = {n_max}",
            prefix.len() / 2
        ))
    })?;
    if half != full {
        return Err(Error::PrefixTooShort(format!(
            "results not stable under prefix doubling (len {} vs {})",
            prefix.len() / 2,
            prefix.len()
        )));
    }
    Ok(full)
}

pub fn brute_kabelian(prefix: &[Letter], k: usize, n_max: usize) -> Result<Vec<u64>> {
    Ok(stable_sweep(prefix, k, n_max)?.kabelian)
}

pub fn brute_exact_kabelian(prefix: &[Letter], k: usize, n_max: usize) -> Result<Vec<u64>> {
    Ok(stable_sweep(prefix, k, n_max)?.exact_kabelian)
}

/// Per-n balance maxima and the overall maximum (prefix-relative lower
/// bounds for the true sequence).
pub fn brute_balance(prefix: &[Letter], k: usize, n_max: usize) -> Result<(Vec<u64>, u64)> {
    let s = stable_sweep(prefix, k, n_max)?;
    let overall = s.balance.iter().copied().max().unwrap_or(0);
    Ok((s.balance, overall))
}

pub fn brute_factor_complexity(prefix: &[Letter], n_max: usize) -> Result<Vec<u64>> {
    Ok(stable_sweep(prefix, 1, n_max)?.factor)
}

/// Searches, per length-k block w, for factor pairs u, v with
/// ||u|_w - |v|_w| > C, scanning n up to n_max.
pub fn brute_totally_unbalanced(
    prefix: &[Letter],
    k: usize,
    c: u64,
    n_max: usize,
) -> Result<Unbalancedness> {
    if k == 0 || k > prefix.len() || n_max >= prefix.len() {
        return Err(Error::WindowTooLong { k: k.max(n_max), len: prefix.len() });
    }
    let block_cls = classes_at(prefix, k);
    let num_blocks = num_classes(&block_cls);
    let mut block_rep = vec![usize::MAX; num_blocks];
    for (i, &b) in block_cls.iter().enumerate() {
        if block_rep[b as usize] == usize::MAX {
            block_rep[b as usize] = i;
        }
    }
    let mut witnesses: Vec<Option<BlockWitness>> = vec![None; num_blocks];

    let mut cls = classes_at(prefix, k);
    let p = num_classes(&cls);
    let mut reps: Vec<usize> = vec![usize::MAX; p];
    for (i, &cl) in cls.iter().enumerate() {
        if reps[cl as usize] == usize::MAX {
            reps[cl as usize] = i;
        }
    }
    let mut counts: Vec<Vec<u32>> = reps
        .iter()
        .map(|&i| {
            let mut v = vec![0u32; num_blocks];
            v[block_cls[i] as usize] = 1;
            v
        })
        .collect();

    for n in k..=n_max {
        for (b, w) in witnesses.iter_mut().enumerate() {
            if w.is_some() {
                continue;
            }
            let (mut lo, mut hi) = (u32::MAX, 0u32);
            let (mut lo_c, mut hi_c) = (0usize, 0usize);
            for (cl, v) in counts.iter().enumerate() {
                if v[b] < lo {
                    lo = v[b];
                    lo_c = cl;
                }
                if v[b] >= hi {
                    hi = v[b];
                    hi_c = cl;
                }
            }
            if u64::from(hi - lo) > c {
                let rep = block_rep[b];
                *w = Some(BlockWitness {
                    block: prefix[rep..rep + k].to_vec(),
                    n,
                    u: prefix[reps[hi_c]..reps[hi_c] + n].to_vec(),
                    v: prefix[reps[lo_c]..reps[lo_c] + n].to_vec(),
                    spread: u64::from(hi - lo),
                });
            }
        }
        if witnesses.iter().all(|w| w.is_some()) || n == n_max {
            break;
        }
        let next = refine_step(prefix, &cls, n);
        let np = num_classes(&next);
        let mut new_reps = vec![usize::MAX; np];
        let mut new_counts: Vec<Vec<u32>> = vec![Vec::new(); np];
        for (i, &cn) in next.iter().enumerate() {
            let cn = cn as usize;
            if new_reps[cn] == usize::MAX {
                new_reps[cn] = i;
                let mut v = counts[cls[i] as usize].clone();
                v[block_cls[i + n + 1 - k] as usize] += 1;
                new_counts[cn] = v;
            }
        }
        reps = new_reps;
        counts = new_counts;
        cls = next;
    }

    let found: Vec<BlockWitness> = witnesses.iter().flatten().cloned().collect();
    if found.len() == num_blocks {
        Ok(Unbalancedness::Yes(found))
    } else if found.is_empty() {
        Ok(Unbalancedness::NoAtThisPrefix)
    } else {
        let balanced = witnesses
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_none())
            .map(|(b, _)| prefix[block_rep[b]..block_rep[b] + k].to_vec())
            .collect();
        Ok(Unbalancedness::Mixed { unbalanced: found, balanced_so_far: balanced })
    }
}

/// CSV report: one row per n with the requested complexities, factor
/// complexity, and balance maxima per k.
pub fn csv_report(prefix: &[Letter], ks: &[usize], n_max: usize) -> Result<String> {
    let sweeps: Vec<SweepResult> =
        ks.iter().map(|&k| stable_sweep(prefix, k, n_max)).collect::<Result<_>>()?;
    let mut out = String::from("n");
    for k in ks {
        out.push_str(&format!(",rho^{k}(n)"));
    }
    out.push_str(",p(n)");
    for k in ks {
        out.push_str(&format!(",balance_{k}(n)"));
    }
    out.push('\n');
    let factor = sweeps
        .first()
        .map(|s| s.factor.clone())
        .unwrap_or_else(|| vec![0; n_max + 1]);
    for n in 0..=n_max {
        out.push_str(&n.to_string());
        for s in &sweeps {
            out.push_str(&format!(",{}", s.kabelian[n]));
        }
        out.push_str(&format!(",{}", factor[n]));
        for s in &sweeps {
            out.push_str(&format!(",{}", s.balance[n]));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{fixed_point_prefix, occurrences, Substitution};

    fn prefix(dsl: &str, len: usize) -> Vec<Letter> {
        fixed_point_prefix(&Substitution::parse(dsl).unwrap(), 0, len).unwrap()
    }

    #[test]
    fn factor_complexity_examples() {
        let t = prefix("01/02/0", 20_000);
        let p = brute_factor_complexity(&t, 200).unwrap();
        for n in 0..=200usize {
            assert_eq!(p[n], if n == 0 { 1 } else { 2 * n as u64 + 1 });
        }
        let s = prefix("01/2/0", 20_000);
        let p = brute_factor_complexity(&s, 200).unwrap();
        for n in 1..=200usize {
            assert_eq!(p[n], 2 * n as u64 + 1);
        }
    }

    #[test]
    fn fibonacci_two_abelian_is_sturmian() {
        // rho^2(n) = n+1 for n <= 3, 4 for n >= 4
        let f = prefix("01/0", 20_000);
        let r = brute_kabelian(&f, 2, 120).unwrap();
        for n in 0..=120usize {
            let expect = if n <= 3 { n as u64 + 1 } else { 4 };
            assert_eq!(r[n], expect, "n={n}");
        }
        // general Sturmian shape for k <= 5: n+1 up to 2k-1, then 2k
        for k in 1..=5usize {
            let r = brute_kabelian(&f, k, 100).unwrap();
            for n in 0..=100usize {
                let expect = if n <= 2 * k - 1 { n as u64 + 1 } else { 2 * k as u64 };
                assert_eq!(r[n], expect, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn narayana_one_abelian_value_set() {
        let s = prefix("01/2/0", 60_000);
        let r = brute_kabelian(&s, 1, 500).unwrap();
        assert_eq!(r[0], 1);
        for n in 1..=500usize {
            assert!(r[n] == 1 || (3..=8).contains(&r[n]), "n={n} value {}", r[n]);
        }
        // both extremes of the band show up
        assert!(r.iter().any(|&v| v == 3));
        assert!(r.iter().any(|&v| v == 8));
    }

    #[test]
    fn exact_kabelian_basics() {
        // 0100 ~_{=2} 1001 (same 2-block counts) but not ~_{=1}
        let u = [0usize, 1, 0, 0];
        let v = [1usize, 0, 0, 1];
        for w in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(occurrences(&u, &w), occurrences(&v, &w));
        }
        assert_ne!(occurrences(&u, &[0]), occurrences(&v, &[0]));
        // rho^{=1} = rho^1
        let f = prefix("01/0", 20_000);
        assert_eq!(
            brute_exact_kabelian(&f, 1, 150).unwrap(),
            brute_kabelian(&f, 1, 150).unwrap()
        );
    }

    #[test]
    fn lemma_2_2_chain() {
        let t = prefix("01/02/0", 30_000);
        let p = brute_factor_complexity(&t, 80).unwrap();
        let mut per_k: Vec<Vec<u64>> = Vec::new();
        let mut exact_k: Vec<Vec<u64>> = Vec::new();
        for k in 1..=4usize {
            per_k.push(brute_kabelian(&t, k, 80).unwrap());
            exact_k.push(brute_exact_kabelian(&t, k, 80).unwrap());
        }
        for n in 0..=80usize {
            for k in 1..=4usize {
                let rk = per_k[k - 1][n];
                // monotone in k
                if k < 4 {
                    assert!(rk <= per_k[k][n]);
                }
                // rho^k(n) = p(n) for n < k
                if n < k {
                    assert_eq!(rk, p[n]);
                }
                // rho^{=k} <= rho^k <= product of rho^{=i}
                assert!(exact_k[k - 1][n] <= rk);
                let prod: u64 = (1..=k).map(|i| exact_k[i - 1][n]).product();
                assert!(rk <= prod, "n={n} k={k} rho={rk} prod={prod}");
            }
        }
    }

    #[test]
    fn fibonacci_balance_and_unbalancedness() {
        let f = prefix("01/0", 40_000);
        let (_, overall) = brute_balance(&f, 2, 300).unwrap();
        assert_eq!(overall, 2);
        // k=2, C=1: unbalanced on 00, balanced so far on 01 and 10
        match brute_totally_unbalanced(&f, 2, 1, 300).unwrap() {
            Unbalancedness::Mixed { unbalanced, balanced_so_far } => {
                assert_eq!(unbalanced.len(), 1);
                let w = &unbalanced[0];
                assert_eq!(w.block, vec![0, 0]);
                assert_eq!(w.spread, 2);
                // the witness pair is concrete: recheck it by direct counting
                assert_eq!(
                    occurrences(&w.u, &w.block).abs_diff(occurrences(&w.v, &w.block)),
                    2
                );
                let mut b = balanced_so_far;
                b.sort();
                assert_eq!(b, vec![vec![0, 1], vec![1, 0]]);
            }
            other => panic!("expected mixed, got {other:?}"),
        }
        // k=4, C=1: totally unbalanced
        assert!(matches!(
            brute_totally_unbalanced(&f, 4, 1, 400).unwrap(),
            Unbalancedness::Yes(_)
        ));
        // k=2, C=2: no witness at this prefix (C_k = 2 is tight)
        assert!(matches!(
            brute_totally_unbalanced(&f, 2, 2, 300).unwrap(),
            Unbalancedness::NoAtThisPrefix
        ));
    }

    #[test]
    fn tribonacci_balance_bound() {
        let t = prefix("01/02/0", 10_000);
        for k in 1..=4usize {
            let (_, overall) = brute_balance(&t, k, 150).unwrap();
            assert_eq!(overall, 2, "k={k}");
        }
    }

    #[test]
    fn constant_word_is_balanced() {
        let w = vec![0usize; 4000];
        let (per_n, overall) = brute_balance(&w, 2, 100).unwrap();
        assert_eq!(overall, 0);
        assert!(per_n.iter().all(|&v| v == 0));
    }

    #[test]
    fn prefix_too_short_detected() {
        // 200 letters cannot stably resolve factors of length 150
        let f = prefix("01/0", 200);
        assert!(matches!(
            brute_kabelian(&f, 2, 150),
            Err(Error::PrefixTooShort(_)) | Err(Error::WindowTooLong { .. })
        ));
    }

    #[test]
    fn csv_shape() {
        let f = prefix("01/0", 5_000);
        let csv = csv_report(&f, &[1, 2], 10).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,rho^1(n),rho^2(n),p(n),balance_1(n),balance_2(n)");
        assert_eq!(lines.len(), 12);
        assert!(lines[1].starts_with("0,1,1,1,"));
    }
}
