//! Textual serialization of automata, automata with output, and linear
//! representations. The native format round-trips exactly: reading what was
//! written reproduces the structure bit for bit (rationals are kept in
//! lowest terms by construction). DOT, CSV and grid emitters cover
//! visualization and plot data.
//!
//! Native automaton format:
//!
//! ```text
//! dfa                      # or dfao / linrep
//! tracks 3
//! alphabet 2 2 2           # digit-alphabet size per track
//! numeration fib           # optional
//! initial 0
//! state 0 accepting        # dfao: state 0 output -1
//! state 1
//! trans 0 (1 0 1) -> 1     # one line per state and digit tuple
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linrep::{LinRep, SparseMat};
use crate::logic::dfa::{num_symbols, pack, unpack, Dfao, MultiTrackDfa};

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn write_header(out: &mut String, kind: &str, tracks: &[usize], numeration: Option<&str>) {
    let _ = writeln!(out, "{kind}");
    let _ = writeln!(out, "tracks {}", tracks.len());
    let alpha: Vec<String> = tracks.iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "alphabet {}", alpha.join(" "));
    if let Some(name) = numeration {
        let _ = writeln!(out, "numeration msd_{name}");
    }
}

fn write_transitions(out: &mut String, tracks: &[usize], delta: &[Vec<u32>]) {
    for (q, row) in delta.iter().enumerate() {
        for (sym, &to) in row.iter().enumerate() {
            let tuple: Vec<String> =
                unpack(tracks, sym).iter().map(|d| d.to_string()).collect();
            let _ = writeln!(out, "trans {q} ({}) -> {to}", tuple.join(" "));
        }
    }
}

/// Serializes a DFA; `numeration` tags the file with a system name for
/// interop (`numeration msd_<name>` header line).
pub fn write_dfa(d: &MultiTrackDfa, numeration: Option<&str>) -> String {
    let mut out = String::new();
    write_header(&mut out, "dfa", &d.tracks, numeration);
    let _ = writeln!(out, "initial {}", d.initial);
    for (q, &acc) in d.accept.iter().enumerate() {
        if acc {
            let _ = writeln!(out, "state {q} accepting");
        } else {
            let _ = writeln!(out, "state {q}");
        }
    }
    write_transitions(&mut out, &d.tracks, &d.delta);
    out
}

pub fn write_dfao(d: &Dfao, numeration: Option<&str>) -> String {
    let mut out = String::new();
    write_header(&mut out, "dfao", &d.tracks, numeration);
    let _ = writeln!(out, "initial {}", d.initial);
    for (q, &o) in d.outputs.iter().enumerate() {
        let _ = writeln!(out, "state {q} output {o}");
    }
    write_transitions(&mut out, &d.tracks, &d.delta);
    out
}

fn rat_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn rat_from_str(s: &str) -> Result<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num).map_err(|_| perr(format!("bad rational {s}")))?;
    let d = BigInt::from_str(den).map_err(|_| perr(format!("bad rational {s}")))?;
    if d.is_zero() {
        return Err(perr(format!("zero denominator in {s}")));
    }
    Ok(BigRational::new(n, d))
}

pub fn write_linrep(r: &LinRep, numeration: Option<&str>) -> String {
    let mut out = String::new();
    write_header(&mut out, "linrep", &r.tracks, numeration);
    let _ = writeln!(out, "dim {}", r.dim);
    let row = |v: &[BigRational]| v.iter().map(rat_to_string).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "lambda {}", row(&r.lambda));
    let _ = writeln!(out, "gamma {}", row(&r.gamma));
    for (sym, m) in r.mu.iter().enumerate() {
        let tuple: Vec<String> =
            unpack(&r.tracks, sym).iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "mu ({})", tuple.join(" "));
        for (rr, cols) in m.rows.iter().enumerate() {
            for (c, v) in cols {
                let _ = writeln!(out, "entry {rr} {c} {}", rat_to_string(v));
            }
        }
    }
    out
}

/// Line-oriented reader shared by the three native formats.
struct Lines<'a> {
    lines: Vec<Vec<&'a str>>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(src: &'a str) -> Self {
        let lines = src
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_whitespace().collect())
            .collect();
        Lines { lines, pos: 0 }
    }

    fn next(&mut self) -> Result<&[&'a str]> {
        let l = self.lines.get(self.pos).ok_or_else(|| perr("unexpected end of file"))?;
        self.pos += 1;
        Ok(l)
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|l| l[0])
    }
}

fn num<T: FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| perr(format!("bad number {s}")))
}

/// Header after the kind line: tracks, alphabet, optional numeration tag.
fn read_header(l: &mut Lines) -> Result<(Vec<usize>, Option<String>)> {
    let line = l.next()?;
    if line.len() != 2 || line[0] != "tracks" {
        return Err(perr("expected 'tracks <m>'"));
    }
    let m: usize = num(line[1])?;
    let line = l.next()?.to_vec();
    if line.len() != m + 1 || line[0] != "alphabet" {
        return Err(perr("expected 'alphabet <d_1> ... <d_m>'"));
    }
    let tracks: Vec<usize> = line[1..].iter().map(|s| num(s)).collect::<Result<_>>()?;
    if tracks.iter().any(|&d| d == 0) {
        return Err(perr("alphabet sizes must be positive"));
    }
    let numeration = if l.peek_key() == Some("numeration") {
        let line = l.next()?;
        if line.len() != 2 {
            return Err(perr("expected 'numeration msd_<name>'"));
        }
        let name = line[1]
            .strip_prefix("msd_")
            .ok_or_else(|| perr(format!("numeration tag must start with msd_: {}", line[1])))?;
        Some(name.to_string())
    } else {
        None
    };
    Ok((tracks, numeration))
}

fn read_tuple(tracks: &[usize], parts: &[&str]) -> Result<usize> {
    let open = parts.first().copied().unwrap_or("");
    let close = parts.last().copied().unwrap_or("");
    if !open.starts_with('(') || !close.ends_with(')') || parts.len() != tracks.len().max(1) {
        return Err(perr(format!("expected ({}-digit tuple)", tracks.len())));
    }
    let mut digits = Vec::with_capacity(tracks.len());
    for p in parts {
        let p = p.strip_prefix('(').unwrap_or(p);
        let p = p.strip_suffix(')').unwrap_or(p);
        if p.is_empty() {
            continue;
        }
        let d: usize = num(p)?;
        if digits.len() >= tracks.len() || d >= tracks[digits.len()] {
            return Err(perr(format!("digit {d} out of range on track {}", digits.len())));
        }
        digits.push(d);
    }
    if digits.len() != tracks.len() {
        return Err(perr(format!("expected {} digits in tuple", tracks.len())));
    }
    Ok(pack(tracks, &digits))
}

fn read_transitions(
    l: &mut Lines,
    tracks: &[usize],
    states: usize,
) -> Result<Vec<Vec<u32>>> {
    let ns = num_symbols(tracks);
    let mut delta = vec![vec![u32::MAX; ns]; states];
    while l.peek_key() == Some("trans") {
        let line = l.next()?.to_vec();
        // trans q (d ... d) -> q'
        if line.len() != tracks.len() + 4 || line[line.len() - 2] != "->" {
            return Err(perr("expected 'trans <q> (<tuple>) -> <q>'"));
        }
        let q: usize = num(line[1])?;
        let to: u32 = num(line[line.len() - 1])?;
        let sym = read_tuple(tracks, &line[2..line.len() - 2])?;
        if q >= states || (to as usize) >= states {
            return Err(perr(format!("transition references unknown state {q} -> {to}")));
        }
        if delta[q][sym] != u32::MAX {
            return Err(perr(format!("duplicate transition from state {q}")));
        }
        delta[q][sym] = to;
    }
    for (q, row) in delta.iter().enumerate() {
        if row.iter().any(|&t| t == u32::MAX) {
            return Err(perr(format!("state {q} is missing transitions")));
        }
    }
    Ok(delta)
}

pub fn read_dfa(src: &str) -> Result<(MultiTrackDfa, Option<String>)> {
    let mut l = Lines::new(src);
    let kind = l.next()?;
    if kind != ["dfa"] {
        return Err(perr("expected 'dfa' header"));
    }
    let (tracks, numeration) = read_header(&mut l)?;
    let line = l.next()?;
    if line.len() != 2 || line[0] != "initial" {
        return Err(perr("expected 'initial <q>'"));
    }
    let initial: u32 = num(line[1])?;
    let mut accept = Vec::new();
    while l.peek_key() == Some("state") {
        let line = l.next()?.to_vec();
        let q: usize = num(line[1])?;
        if q != accept.len() {
            return Err(perr(format!("states must be listed in order; found {q}")));
        }
        match &line[2..] {
            [] => accept.push(false),
            ["accepting"] => accept.push(true),
            _ => return Err(perr("expected 'state <q> [accepting]'")),
        }
    }
    if (initial as usize) >= accept.len() {
        return Err(perr("initial state out of range"));
    }
    let delta = read_transitions(&mut l, &tracks, accept.len())?;
    if l.pos != l.lines.len() {
        return Err(perr("trailing content after transitions"));
    }
    Ok((MultiTrackDfa { tracks, delta, accept, initial }, numeration))
}

pub fn read_dfao(src: &str) -> Result<(Dfao, Option<String>)> {
    let mut l = Lines::new(src);
    let kind = l.next()?;
    if kind != ["dfao"] {
        return Err(perr("expected 'dfao' header"));
    }
    let (tracks, numeration) = read_header(&mut l)?;
    let line = l.next()?;
    if line.len() != 2 || line[0] != "initial" {
        return Err(perr("expected 'initial <q>'"));
    }
    let initial: u32 = num(line[1])?;
    let mut outputs = Vec::new();
    while l.peek_key() == Some("state") {
        let line = l.next()?.to_vec();
        if line.len() != 4 || line[2] != "output" {
            return Err(perr("expected 'state <q> output <v>'"));
        }
        let q: usize = num(line[1])?;
        if q != outputs.len() {
            return Err(perr(format!("states must be listed in order; found {q}")));
        }
        outputs.push(num::<i64>(line[3])?);
    }
    if (initial as usize) >= outputs.len() {
        return Err(perr("initial state out of range"));
    }
    let delta = read_transitions(&mut l, &tracks, outputs.len())?;
    if l.pos != l.lines.len() {
        return Err(perr("trailing content after transitions"));
    }
    Ok((Dfao { tracks, delta, outputs, initial }, numeration))
}

pub fn read_linrep(src: &str) -> Result<(LinRep, Option<String>)> {
    let mut l = Lines::new(src);
    let kind = l.next()?;
    if kind != ["linrep"] {
        return Err(perr("expected 'linrep' header"));
    }
    let (tracks, numeration) = read_header(&mut l)?;
    let line = l.next()?;
    if line.len() != 2 || line[0] != "dim" {
        return Err(perr("expected 'dim <d>'"));
    }
    let dim: usize = num(line[1])?;
    let vector = |line: &[&str], key: &str| -> Result<Vec<BigRational>> {
        if line.len() != dim + 1 || line[0] != key {
            return Err(perr(format!("expected '{key}' with {dim} entries")));
        }
        line[1..].iter().map(|s| rat_from_str(s)).collect()
    };
    let lambda = vector(&l.next()?.to_vec(), "lambda")?;
    let gamma = vector(&l.next()?.to_vec(), "gamma")?;
    let ns = num_symbols(&tracks);
    let mut mu = vec![SparseMat::zero(dim, dim); ns];
    let mut seen = vec![false; ns];
    while l.peek_key() == Some("mu") {
        let line = l.next()?.to_vec();
        let sym = read_tuple(&tracks, &line[1..])?;
        if seen[sym] {
            return Err(perr("duplicate mu block"));
        }
        seen[sym] = true;
        while l.peek_key() == Some("entry") {
            let line = l.next()?.to_vec();
            if line.len() != 4 {
                return Err(perr("expected 'entry <r> <c> <value>'"));
            }
            let r: usize = num(line[1])?;
            let c: usize = num(line[2])?;
            if r >= dim || c >= dim {
                return Err(perr(format!("entry ({r},{c}) out of range for dim {dim}")));
            }
            mu[sym].add_entry(r, c, rat_from_str(line[3])?);
        }
    }
    if !seen.iter().all(|&s| s) {
        return Err(perr("missing mu block for some symbol"));
    }
    if l.pos != l.lines.len() {
        return Err(perr("trailing content after matrices"));
    }
    Ok((LinRep { tracks, dim, lambda, mu, gamma }, numeration))
}

/// GraphViz rendering of a DFA. Non-accepting sinks are dropped for
/// readability; transitions into them are omitted.
pub fn dot_dfa(d: &MultiTrackDfa, name: &str) -> String {
    let sink: Vec<bool> = (0..d.num_states())
        .map(|q| !d.accept[q] && d.delta[q].iter().all(|&t| t as usize == q))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "digraph {name} {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  init [shape=point];");
    let _ = writeln!(out, "  init -> q{};", d.initial);
    for q in 0..d.num_states() {
        if sink[q] {
            continue;
        }
        let shape = if d.accept[q] { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  q{q} [shape={shape}, label=\"{q}\"];");
    }
    dot_edges(&mut out, &d.tracks, &d.delta, &sink);
    let _ = writeln!(out, "}}");
    out
}

/// GraphViz rendering of a DFAO; state labels show `state/output`.
pub fn dot_dfao(d: &Dfao, name: &str) -> String {
    let sink = vec![false; d.num_states()];
    let mut out = String::new();
    let _ = writeln!(out, "digraph {name} {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  init [shape=point];");
    let _ = writeln!(out, "  init -> q{};", d.initial);
    for (q, o) in d.outputs.iter().enumerate() {
        let _ = writeln!(out, "  q{q} [shape=circle, label=\"{q}/{o}\"];");
    }
    dot_edges(&mut out, &d.tracks, &d.delta, &sink);
    let _ = writeln!(out, "}}");
    out
}

fn dot_edges(out: &mut String, tracks: &[usize], delta: &[Vec<u32>], skip: &[bool]) {
    for (q, row) in delta.iter().enumerate() {
        if skip[q] {
            continue;
        }
        // group parallel edges under one label
        let mut labels: std::collections::BTreeMap<u32, Vec<String>> =
            std::collections::BTreeMap::new();
        for (sym, &to) in row.iter().enumerate() {
            if skip[to as usize] {
                continue;
            }
            let tuple: Vec<String> =
                unpack(tracks, sym).iter().map(|d| d.to_string()).collect();
            labels.entry(to).or_default().push(format!("({})", tuple.join(",")));
        }
        for (to, syms) in labels {
            let _ = writeln!(out, "  q{q} -> q{to} [label=\"{}\"];", syms.join(" "));
        }
    }
}

/// CSV table: first column n, one column per named value series.
pub fn csv_values(columns: &[(String, Vec<i64>)]) -> String {
    let mut out = String::new();
    let header: Vec<&str> = columns.iter().map(|(name, _)| name.as_str()).collect();
    let _ = writeln!(out, "n,{}", header.join(","));
    let rows = columns.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    for n in 0..rows {
        let cells: Vec<String> = columns
            .iter()
            .map(|(_, v)| v.get(n).map(|x| x.to_string()).unwrap_or_default())
            .collect();
        let _ = writeln!(out, "{n},{}", cells.join(","));
    }
    out
}

/// Grid of integer values: one row per k (tab separated), columns indexed by
/// n starting at 0. Header row labels the columns.
pub fn write_grid(rows: &[(u64, Vec<i64>)]) -> String {
    let mut out = String::new();
    let width = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let header: Vec<String> = (0..width).map(|n| n.to_string()).collect();
    let _ = writeln!(out, "k\\n\t{}", header.join("\t"));
    for (k, vals) in rows {
        let cells: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{k}\t{}", cells.join("\t"));
    }
    out
}
