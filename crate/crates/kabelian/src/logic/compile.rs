//! Compiles first-order formulas over numeration-represented variables into
//! multi-track DFAs, plus a brute-force evaluator used as the semantics
//! oracle in tests.
//!
//! Invariant maintained throughout: every compiled automaton accepts only
//! tuples in which each track is a valid padded representation of its
//! variable's numeration system. Complements and unions re-intersect with
//! the validity product to keep this closed.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::logic::dfa::{Dfao, MultiTrackDfa};
use crate::logic::formula::{CmpOp, Formula, Term};
use crate::lrsa::{adder, addressing_lrsa, support_dfa};
use crate::numeration::NumerationSystem;

/// Per-numeration automata shared by every compilation.
pub struct SystemData {
    pub ns: NumerationSystem,
    pub valid: MultiTrackDfa,
    pub adder: MultiTrackDfa,
    pub eq: MultiTrackDfa,
    pub lt: MultiTrackDfa,
}

impl SystemData {
    fn build(ns: NumerationSystem) -> Result<Self> {
        let valid = ns.valid_padded_dfa();
        let add = adder(&ns)?;
        let k = ns.digit_count();
        // diagonal equality restricted to valid words
        let eq = {
            let n = valid.num_states();
            let mut delta = Vec::with_capacity(n);
            let dead: u32 = valid
                .accept
                .iter()
                .position(|&a| !a)
                .map(|i| i as u32)
                .unwrap_or(n as u32);
            let extra_dead = dead as usize == n;
            for q in 0..n {
                let mut row = Vec::with_capacity(k * k);
                for d1 in 0..k {
                    for d2 in 0..k {
                        row.push(if d1 == d2 { valid.delta[q][d1] } else { dead });
                    }
                }
                delta.push(row);
            }
            let mut accept = valid.accept.clone();
            if extra_dead {
                delta.push(vec![dead; k * k]);
                accept.push(false);
            }
            MultiTrackDfa::new(vec![k, k], delta, accept, valid.initial).minimize()
        };
        // x < y iff exists d != 0 with x + d = y
        let nonzero = support_dfa(&addressing_lrsa(&ns))?;
        let lt = add
            .intersect(&nonzero.cylindrify(0, k).cylindrify(2, k))?
            .project(1)
            .minimize();
        Ok(SystemData { ns, valid, adder: add, eq, lt })
    }
}

pub struct Relation {
    pub dfa: MultiTrackDfa,
    /// Numeration system name per track.
    pub systems: Vec<String>,
}

/// Named numeration systems, relations and DFAOs available to formulas.
pub struct Env {
    pub systems: BTreeMap<String, SystemData>,
    pub relations: BTreeMap<String, Relation>,
    pub dfaos: BTreeMap<String, (Dfao, Vec<String>)>,
}

impl Env {
    pub fn new() -> Self {
        Env { systems: BTreeMap::new(), relations: BTreeMap::new(), dfaos: BTreeMap::new() }
    }

    /// Registers a numeration system; fails when its adder machinery is
    /// unavailable (not ultimately Pisot).
    pub fn add_system(&mut self, ns: NumerationSystem) -> Result<()> {
        let name = ns.name.clone();
        let data = SystemData::build(ns)?;
        self.systems.insert(name, data);
        Ok(())
    }

    pub fn add_relation(&mut self, name: impl Into<String>, dfa: MultiTrackDfa, systems: Vec<String>) {
        assert_eq!(dfa.tracks.len(), systems.len());
        self.relations.insert(name.into(), Relation { dfa, systems });
    }

    pub fn add_dfao(&mut self, name: impl Into<String>, dfao: Dfao, system: impl Into<String>) {
        assert_eq!(dfao.tracks.len(), 1);
        self.dfaos.insert(name.into(), (dfao, vec![system.into()]));
    }

    /// Registers a multi-track DFAO with one numeration system per track.
    pub fn add_dfao_multi(&mut self, name: impl Into<String>, dfao: Dfao, systems: Vec<String>) {
        assert_eq!(dfao.tracks.len(), systems.len());
        self.dfaos.insert(name.into(), (dfao, systems));
    }

    fn system(&self, name: &str) -> Result<&SystemData> {
        self.systems
            .get(name)
            .ok_or_else(|| Error::UnknownRelation(format!("numeration system {name}")))
    }
}

impl Default for Env {
    fn default() -> Self {
        Self::new()
    }
}

/// A compiled formula: DFA over the alphabetically sorted free variables.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub dfa: MultiTrackDfa,
    pub vars: Vec<String>,
}

/// Infers the numeration system of every variable (free and bound).
/// Conflicting constraints surface as MixedNumerationWithoutConverter.
pub fn infer_systems(
    f: &Formula,
    env: &Env,
    default_sys: &str,
) -> Result<BTreeMap<String, String>> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    // fixpoint: Compare atoms propagate known systems between their variables
    loop {
        let before = map.len();
        infer_pass(f, env, &mut map)?;
        if map.len() == before {
            break;
        }
    }
    let mut all_vars = BTreeSet::new();
    collect_all_vars(f, &mut all_vars);
    for v in all_vars {
        map.entry(v).or_insert_with(|| default_sys.to_string());
    }
    Ok(map)
}

fn collect_all_vars(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::True => {}
        Formula::Compare(_, a, b) => {
            a.vars(out);
            b.vars(out);
        }
        Formula::DfaoCmp { args, .. } => {
            for t in args {
                t.vars(out);
            }
        }
        Formula::WordEq { index1, index2, .. } => {
            index1.vars(out);
            index2.vars(out);
        }
        Formula::Call { args, .. } => {
            for t in args {
                t.vars(out);
            }
        }
        Formula::Not(g) => collect_all_vars(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_all_vars(a, out);
            collect_all_vars(b, out);
        }
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            out.extend(vs.iter().cloned());
            collect_all_vars(g, out);
        }
    }
}

fn assign(map: &mut BTreeMap<String, String>, var: &str, sys: &str) -> Result<()> {
    match map.get(var) {
        Some(s) if s == sys => Ok(()),
        Some(s) => Err(Error::MixedNumerationWithoutConverter(
            format!("{var} (in {s})"),
            sys.to_string(),
        )),
        None => {
            map.insert(var.to_string(), sys.to_string());
            Ok(())
        }
    }
}

fn infer_pass(f: &Formula, env: &Env, map: &mut BTreeMap<String, String>) -> Result<()> {
    match f {
        Formula::True => Ok(()),
        Formula::Compare(_, a, b) => {
            let mut vs = BTreeSet::new();
            a.vars(&mut vs);
            b.vars(&mut vs);
            let known: BTreeSet<String> =
                vs.iter().filter_map(|v| map.get(v).cloned()).collect();
            if known.len() > 1 {
                let mut it = known.iter();
                return Err(Error::MixedNumerationWithoutConverter(
                    it.next().unwrap().clone(),
                    it.next().unwrap().clone(),
                ));
            }
            if let Some(sys) = known.into_iter().next() {
                for v in &vs {
                    assign(map, v, &sys)?;
                }
            }
            Ok(())
        }
        Formula::DfaoCmp { word, args, .. } => {
            let (dfao, systems) = env
                .dfaos
                .get(word)
                .ok_or_else(|| Error::UnknownRelation(format!("word {word}")))?;
            if systems.len() != args.len() {
                return Err(Error::ArityMismatch {
                    name: word.clone(),
                    expected: systems.len(),
                    got: args.len(),
                });
            }
            let _ = dfao;
            for (t, sys) in args.iter().zip(systems.clone()) {
                let mut vs = BTreeSet::new();
                t.vars(&mut vs);
                for v in &vs {
                    assign(map, v, &sys)?;
                }
            }
            Ok(())
        }
        Formula::WordEq { word1, index1, word2, index2 } => {
            for (w, t) in [(word1, index1), (word2, index2)] {
                let (_, systems) = env
                    .dfaos
                    .get(w)
                    .ok_or_else(|| Error::UnknownRelation(format!("word {w}")))?;
                let sys = systems[0].clone();
                let mut vs = BTreeSet::new();
                t.vars(&mut vs);
                for v in &vs {
                    assign(map, v, &sys)?;
                }
            }
            Ok(())
        }
        Formula::Call { name, args } => {
            let rel = env
                .relations
                .get(name)
                .ok_or_else(|| Error::UnknownRelation(name.clone()))?;
            if rel.systems.len() != args.len() {
                return Err(Error::ArityMismatch {
                    name: name.clone(),
                    expected: rel.systems.len(),
                    got: args.len(),
                });
            }
            for (t, sys) in args.iter().zip(rel.systems.clone()) {
                let mut vs = BTreeSet::new();
                t.vars(&mut vs);
                for v in &vs {
                    assign(map, v, &sys)?;
                }
            }
            Ok(())
        }
        Formula::Not(g) => infer_pass(g, env, map),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            infer_pass(a, env, map)?;
            infer_pass(b, env, map)
        }
        Formula::Exists(_, g) | Formula::Forall(_, g) => infer_pass(g, env, map),
    }
}

struct Ctx<'a> {
    env: &'a Env,
    sys_of: BTreeMap<String, String>,
    default_sys: String,
    fresh: usize,
}

impl<'a> Ctx<'a> {
    fn track_sizes(&self, vars: &[String]) -> Result<Vec<usize>> {
        vars.iter()
            .map(|v| Ok(self.env.system(self.sys_name(v))?.ns.digit_count()))
            .collect()
    }

    fn sys_name(&self, var: &str) -> &str {
        self.sys_of.get(var).map(|s| s.as_str()).unwrap_or(&self.default_sys)
    }

    fn fresh_var(&mut self, sys: &str) -> String {
        let name = format!(" t{}", self.fresh);
        self.fresh += 1;
        self.sys_of.insert(name.clone(), sys.to_string());
        name
    }

    /// Builds a Compiled from a relation DFA applied to (possibly repeated)
    /// argument variables.
    fn from_relation(&self, dfa: &MultiTrackDfa, arg_vars: &[String]) -> Result<Compiled> {
        let mut vars: Vec<String> = arg_vars.to_vec();
        vars.sort();
        vars.dedup();
        let sizes = self.track_sizes(&vars)?;
        let map: Vec<usize> = arg_vars
            .iter()
            .map(|a| vars.iter().position(|v| v == a).unwrap())
            .collect();
        Ok(Compiled { dfa: dfa.remap_tracks(&map, &sizes).minimize(), vars })
    }

    /// Validity product over a sorted variable list.
    fn validity(&self, vars: &[String]) -> Result<MultiTrackDfa> {
        let sizes = self.track_sizes(vars)?;
        let mut out = MultiTrackDfa::all(sizes.clone());
        for (i, v) in vars.iter().enumerate() {
            let valid = &self.env.system(self.sys_name(v))?.valid;
            out = out.intersect(&valid.remap_tracks(&[i], &sizes))?;
        }
        Ok(out.minimize())
    }

    fn align(&self, a: &Compiled, b: &Compiled) -> Result<(MultiTrackDfa, MultiTrackDfa, Vec<String>)> {
        let mut vars: Vec<String> = a.vars.iter().chain(&b.vars).cloned().collect();
        vars.sort();
        vars.dedup();
        let sizes = self.track_sizes(&vars)?;
        let expand = |c: &Compiled| -> MultiTrackDfa {
            let map: Vec<usize> = c
                .vars
                .iter()
                .map(|v| vars.iter().position(|w| w == v).unwrap())
                .collect();
            c.dfa.remap_tracks(&map, &sizes)
        };
        Ok((expand(a), expand(b), vars))
    }

    fn conj(&self, a: &Compiled, b: &Compiled) -> Result<Compiled> {
        let (da, db, vars) = self.align(a, b)?;
        // both sides are validity-closed on their own vars; the intersection
        // constrains every track of the union through at least one side only
        // when the var appears there, so re-intersect validity
        let dfa = da.intersect(&db)?.intersect(&self.validity(&vars)?)?.minimize();
        Ok(Compiled { dfa, vars })
    }

    fn disj(&self, a: &Compiled, b: &Compiled) -> Result<Compiled> {
        let (da, db, vars) = self.align(a, b)?;
        let dfa = da.union(&db)?.intersect(&self.validity(&vars)?)?.minimize();
        Ok(Compiled { dfa, vars })
    }

    fn negate(&self, a: &Compiled) -> Result<Compiled> {
        let dfa = a.dfa.complement().intersect(&self.validity(&a.vars)?)?.minimize();
        Ok(Compiled { dfa, vars: a.vars.clone() })
    }

    fn project_var(&self, c: Compiled, var: &str) -> Compiled {
        match c.vars.iter().position(|v| v == var) {
            None => c,
            Some(i) => {
                let mut vars = c.vars;
                vars.remove(i);
                Compiled { dfa: c.dfa.project(i).minimize(), vars }
            }
        }
    }

    /// Lowers a term to a variable plus adder/constant constraints;
    /// introduced fresh variables are appended to `fresh_list`.
    fn lower(
        &mut self,
        t: &Term,
        sys: &str,
        constraints: &mut Vec<Compiled>,
        fresh_list: &mut Vec<String>,
    ) -> Result<String> {
        match t {
            Term::Var(v) => Ok(v.clone()),
            Term::Const(c) => {
                let z = self.fresh_var(sys);
                let dfa = self.env.system(sys)?.ns.value_dfa(*c);
                constraints.push(Compiled { dfa, vars: vec![z.clone()] });
                fresh_list.push(z.clone());
                Ok(z)
            }
            Term::Add(a, b) => {
                let va = self.lower(a, sys, constraints, fresh_list)?;
                let vb = self.lower(b, sys, constraints, fresh_list)?;
                let z = self.fresh_var(sys);
                let add = self.env.system(sys)?.adder.clone();
                constraints.push(self.from_relation(&add, &[va, vb, z.clone()])?);
                fresh_list.push(z.clone());
                Ok(z)
            }
            Term::Sub(a, b) => {
                let va = self.lower(a, sys, constraints, fresh_list)?;
                let vb = self.lower(b, sys, constraints, fresh_list)?;
                let z = self.fresh_var(sys);
                // z = a - b encoded as z + b = a (false when a < b)
                let add = self.env.system(sys)?.adder.clone();
                constraints.push(self.from_relation(&add, &[z.clone(), vb, va])?);
                fresh_list.push(z.clone());
                Ok(z)
            }
        }
    }

    /// System governing an atom: the inferred system of any of its variables,
    /// or the default for all-constant atoms.
    fn atom_sys(&self, terms: &[&Term]) -> String {
        let mut vs = BTreeSet::new();
        for t in terms {
            t.vars(&mut vs);
        }
        vs.iter()
            .filter_map(|v| self.sys_of.get(v).cloned())
            .next()
            .unwrap_or_else(|| self.default_sys.clone())
    }

    fn finish_atom(
        &self,
        base: Compiled,
        constraints: Vec<Compiled>,
        fresh_list: Vec<String>,
    ) -> Result<Compiled> {
        let mut c = base;
        for k in constraints {
            c = self.conj(&c, &k)?;
        }
        for v in &fresh_list {
            c = self.project_var(c, v);
        }
        Ok(c)
    }

    fn compile_rec(&mut self, f: &Formula) -> Result<Compiled> {
        match f {
            Formula::True => Ok(Compiled { dfa: MultiTrackDfa::all(vec![]), vars: vec![] }),
            Formula::Compare(op, t1, t2) => match op {
                CmpOp::Ne => self.compile_rec(&Formula::not(Formula::Compare(
                    CmpOp::Eq,
                    t1.clone(),
                    t2.clone(),
                ))),
                CmpOp::Gt => {
                    self.compile_rec(&Formula::Compare(CmpOp::Lt, t2.clone(), t1.clone()))
                }
                CmpOp::Ge => {
                    self.compile_rec(&Formula::Compare(CmpOp::Le, t2.clone(), t1.clone()))
                }
                CmpOp::Le => self.compile_rec(&Formula::or(
                    Formula::Compare(CmpOp::Lt, t1.clone(), t2.clone()),
                    Formula::Compare(CmpOp::Eq, t1.clone(), t2.clone()),
                )),
                CmpOp::Eq | CmpOp::Lt => {
                    let sys = self.atom_sys(&[t1, t2]);
                    let mut constraints = Vec::new();
                    let mut fresh_list = Vec::new();
                    let v1 = self.lower(t1, &sys, &mut constraints, &mut fresh_list)?;
                    let v2 = self.lower(t2, &sys, &mut constraints, &mut fresh_list)?;
                    let data = self.env.system(&sys)?;
                    let rel = if *op == CmpOp::Eq { data.eq.clone() } else { data.lt.clone() };
                    let base = self.from_relation(&rel, &[v1, v2])?;
                    self.finish_atom(base, constraints, fresh_list)
                }
            },
            Formula::DfaoCmp { word, args, op, value } => {
                let (dfao, systems) = self
                    .env
                    .dfaos
                    .get(word)
                    .ok_or_else(|| Error::UnknownRelation(format!("word {word}")))?;
                if systems.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        name: word.clone(),
                        expected: systems.len(),
                        got: args.len(),
                    });
                }
                let systems = systems.clone();
                let pred = dfao.values_predicate(|o| match op {
                    CmpOp::Eq => o == *value,
                    CmpOp::Ne => o != *value,
                    CmpOp::Lt => o < *value,
                    CmpOp::Le => o <= *value,
                    CmpOp::Gt => o > *value,
                    CmpOp::Ge => o >= *value,
                });
                let mut constraints = Vec::new();
                let mut fresh_list = Vec::new();
                let mut arg_vars = Vec::with_capacity(args.len());
                for (t, sys) in args.iter().zip(&systems) {
                    arg_vars.push(self.lower(t, sys, &mut constraints, &mut fresh_list)?);
                }
                let mut base = self.from_relation(&pred, &arg_vars)?;
                // value predicates are not validity-closed by themselves
                for (v, sys) in arg_vars.iter().zip(&systems) {
                    base = self.conj(
                        &base,
                        &Compiled {
                            dfa: self.env.system(sys)?.valid.clone(),
                            vars: vec![v.clone()],
                        },
                    )?;
                }
                self.finish_atom(base, constraints, fresh_list)
            }
            Formula::WordEq { word1, index1, word2, index2 } => {
                let out1: BTreeSet<i64> = self
                    .env
                    .dfaos
                    .get(word1)
                    .ok_or_else(|| Error::UnknownRelation(format!("word {word1}")))?
                    .0
                    .outputs
                    .iter()
                    .copied()
                    .filter(|&o| o >= 0)
                    .collect();
                let out2: BTreeSet<i64> = self
                    .env
                    .dfaos
                    .get(word2)
                    .ok_or_else(|| Error::UnknownRelation(format!("word {word2}")))?
                    .0
                    .outputs
                    .iter()
                    .copied()
                    .filter(|&o| o >= 0)
                    .collect();
                let cases: Vec<Formula> = out1
                    .intersection(&out2)
                    .map(|&l| {
                        Formula::and(
                            Formula::dfao_eq(word1, index1.clone(), l),
                            Formula::dfao_eq(word2, index2.clone(), l),
                        )
                    })
                    .collect();
                self.compile_rec(&Formula::any(cases))
            }
            Formula::Call { name, args } => {
                let rel = self
                    .env
                    .relations
                    .get(name)
                    .ok_or_else(|| Error::UnknownRelation(name.clone()))?;
                if rel.systems.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        name: name.clone(),
                        expected: rel.systems.len(),
                        got: args.len(),
                    });
                }
                let dfa = rel.dfa.clone();
                let systems = rel.systems.clone();
                let mut constraints = Vec::new();
                let mut fresh_list = Vec::new();
                let mut arg_vars = Vec::with_capacity(args.len());
                for (t, sys) in args.iter().zip(&systems) {
                    arg_vars.push(self.lower(t, sys, &mut constraints, &mut fresh_list)?);
                }
                let base = self.from_relation(&dfa, &arg_vars)?;
                self.finish_atom(base, constraints, fresh_list)
            }
            Formula::Not(g) => {
                let c = self.compile_rec(g)?;
                self.negate(&c)
            }
            Formula::And(a, b) => {
                let ca = self.compile_rec(a)?;
                let cb = self.compile_rec(b)?;
                self.conj(&ca, &cb)
            }
            Formula::Or(a, b) => {
                let ca = self.compile_rec(a)?;
                let cb = self.compile_rec(b)?;
                self.disj(&ca, &cb)
            }
            Formula::Implies(a, b) => self.compile_rec(&Formula::or(
                Formula::not((**a).clone()),
                (**b).clone(),
            )),
            Formula::Iff(a, b) => self.compile_rec(&Formula::and(
                Formula::implies((**a).clone(), (**b).clone()),
                Formula::implies((**b).clone(), (**a).clone()),
            )),
            Formula::Exists(vars, g) => {
                let mut c = self.compile_rec(g)?;
                for v in vars {
                    c = self.project_var(c, v);
                }
                Ok(c)
            }
            Formula::Forall(vars, g) => {
                let inner = Formula::Exists(vars.clone(), Box::new(Formula::not((**g).clone())));
                let c = self.compile_rec(&inner)?;
                self.negate(&c)
            }
        }
    }
}

/// Compiles a formula into a DFA over its alphabetically sorted free
/// variables; every track accepts only valid padded representations.
pub fn compile(f: &Formula, env: &Env, default_sys: &str) -> Result<Compiled> {
    let sys_of = infer_systems(f, env, default_sys)?;
    let mut ctx = Ctx { env, sys_of, default_sys: default_sys.to_string(), fresh: 0 };
    let c = ctx.compile_rec(f)?;
    // bound variables may shadow frees in odd scripts; keep only true frees
    let frees = f.free_vars();
    let mut out = c;
    let extra: Vec<String> =
        out.vars.iter().filter(|v| !frees.contains(*v)).cloned().collect();
    for v in extra {
        out = ctx.project_var(out, &v);
    }
    Ok(out)
}

/// The factor-equality predicate feq(i, j, n): x[i..i+n) = x[j..j+n).
///
/// Compiled as ¬∃u,v at mismatched positions with the same offset:
/// i ≤ u, j ≤ v, u + j = v + i, u < n + i, and w[u] ≠ w[v]. Keeping the two
/// positions as separate quantified variables synchronized by one linear
/// relation determinizes far better than a shared-offset variable fed into
/// two adders.
pub fn feq_predicate(env: &Env, word: &str) -> Result<MultiTrackDfa> {
    let mismatch = Formula::all(vec![
        Formula::cmp(CmpOp::Le, Term::var("i"), Term::var("u")),
        Formula::cmp(CmpOp::Le, Term::var("j"), Term::var("v")),
        Formula::not(Formula::WordEq {
            word1: word.to_string(),
            index1: Term::var("u"),
            word2: word.to_string(),
            index2: Term::var("v"),
        }),
        Formula::cmp(
            CmpOp::Eq,
            Term::var("u").plus(Term::var("j")),
            Term::var("v").plus(Term::var("i")),
        ),
        Formula::cmp(CmpOp::Lt, Term::var("u"), Term::var("n").plus(Term::var("i"))),
    ]);
    let f = Formula::not(Formula::exists(&["u", "v"], mismatch));
    let sys = env
        .dfaos
        .get(word)
        .ok_or_else(|| Error::UnknownRelation(format!("word {word}")))?
        .1
        .clone();
    let c = compile(&f, env, &sys[0])?;
    assert_eq!(c.vars, vec!["i".to_string(), "j".to_string(), "n".to_string()]);
    Ok(c.dfa)
}

/// Brute-force evaluation of a formula under an assignment; quantifiers
/// range over [0, bound). The semantics oracle for compile.
pub fn eval_formula(
    f: &Formula,
    env: &Env,
    default_sys: &str,
    assign: &BTreeMap<String, u64>,
    bound: u64,
) -> Result<bool> {
    let sys_of = infer_systems(f, env, default_sys)?;
    eval_rec(f, env, default_sys, &sys_of, assign, bound)
}

fn eval_term(t: &Term, assign: &BTreeMap<String, u64>) -> Option<u64> {
    match t {
        Term::Var(v) => assign.get(v).copied(),
        Term::Const(c) => Some(*c),
        Term::Add(a, b) => Some(eval_term(a, assign)? + eval_term(b, assign)?),
        Term::Sub(a, b) => {
            let (x, y) = (eval_term(a, assign)?, eval_term(b, assign)?);
            x.checked_sub(y)
        }
    }
}

fn eval_rec(
    f: &Formula,
    env: &Env,
    default_sys: &str,
    sys_of: &BTreeMap<String, String>,
    assign: &BTreeMap<String, u64>,
    bound: u64,
) -> Result<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::Compare(op, a, b) => {
            let (x, y) = (eval_term(a, assign), eval_term(b, assign));
            match op {
                CmpOp::Eq => matches!((x, y), (Some(x), Some(y)) if x == y),
                CmpOp::Ne => !matches!((x, y), (Some(x), Some(y)) if x == y),
                CmpOp::Lt => matches!((x, y), (Some(x), Some(y)) if x < y),
                CmpOp::Le => matches!((x, y), (Some(x), Some(y)) if x <= y),
                CmpOp::Gt => matches!((x, y), (Some(x), Some(y)) if x > y),
                CmpOp::Ge => matches!((x, y), (Some(x), Some(y)) if x >= y),
            }
        }
        Formula::DfaoCmp { word, args, op, value } => {
            let (dfao, systems) = env
                .dfaos
                .get(word)
                .ok_or_else(|| Error::UnknownRelation(format!("word {word}")))?;
            let mut reps = Vec::with_capacity(args.len());
            let mut defined = true;
            for (t, sys) in args.iter().zip(systems) {
                match eval_term(t, assign) {
                    None => {
                        defined = false;
                        break;
                    }
                    Some(n) => reps.push(env.system(sys)?.ns.rep(n)),
                }
            }
            if !defined {
                false
            } else {
                let refs: Vec<&[usize]> = reps.iter().map(|v| v.as_slice()).collect();
                let o = dfao.output_tuple(&refs);
                match op {
                    CmpOp::Eq => o == *value,
                    CmpOp::Ne => o != *value,
                    CmpOp::Lt => o < *value,
                    CmpOp::Le => o <= *value,
                    CmpOp::Gt => o > *value,
                    CmpOp::Ge => o >= *value,
                }
            }
        }
        Formula::WordEq { word1, index1, word2, index2 } => {
            let (d1, s1) = env
                .dfaos
                .get(word1)
                .ok_or_else(|| Error::UnknownRelation(format!("word {word1}")))?;
            let (d2, s2) = env
                .dfaos
                .get(word2)
                .ok_or_else(|| Error::UnknownRelation(format!("word {word2}")))?;
            match (eval_term(index1, assign), eval_term(index2, assign)) {
                (Some(n1), Some(n2)) => {
                    let o1 = d1.output(&env.system(&s1[0])?.ns.rep(n1));
                    let o2 = d2.output(&env.system(&s2[0])?.ns.rep(n2));
                    o1 >= 0 && o1 == o2
                }
                _ => false,
            }
        }
        Formula::Call { name, args } => {
            let rel = env
                .relations
                .get(name)
                .ok_or_else(|| Error::UnknownRelation(name.clone()))?;
            if rel.systems.len() != args.len() {
                return Err(Error::ArityMismatch {
                    name: name.clone(),
                    expected: rel.systems.len(),
                    got: args.len(),
                });
            }
            let mut reps = Vec::with_capacity(args.len());
            let mut ok = true;
            for (t, sys) in args.iter().zip(&rel.systems) {
                match eval_term(t, assign) {
                    None => {
                        ok = false;
                        break;
                    }
                    Some(n) => reps.push(env.system(sys)?.ns.rep(n)),
                }
            }
            if !ok {
                false
            } else {
                let len = reps.iter().map(|r| r.len()).max().unwrap_or(0);
                let padded: Vec<Vec<usize>> = reps
                    .into_iter()
                    .map(|r| {
                        let mut v = vec![0usize; len - r.len()];
                        v.extend_from_slice(&r);
                        v
                    })
                    .collect();
                let refs: Vec<&[usize]> = padded.iter().map(|v| v.as_slice()).collect();
                rel.dfa.accepts_tuple(&refs)
            }
        }
        Formula::Not(g) => !eval_rec(g, env, default_sys, sys_of, assign, bound)?,
        Formula::And(a, b) => {
            eval_rec(a, env, default_sys, sys_of, assign, bound)?
                && eval_rec(b, env, default_sys, sys_of, assign, bound)?
        }
        Formula::Or(a, b) => {
            eval_rec(a, env, default_sys, sys_of, assign, bound)?
                || eval_rec(b, env, default_sys, sys_of, assign, bound)?
        }
        Formula::Implies(a, b) => {
            !eval_rec(a, env, default_sys, sys_of, assign, bound)?
                || eval_rec(b, env, default_sys, sys_of, assign, bound)?
        }
        Formula::Iff(a, b) => {
            eval_rec(a, env, default_sys, sys_of, assign, bound)?
                == eval_rec(b, env, default_sys, sys_of, assign, bound)?
        }
        Formula::Exists(vars, g) => {
            eval_quant(vars, g, env, default_sys, sys_of, assign, bound, false)?
        }
        Formula::Forall(vars, g) => {
            eval_quant(vars, g, env, default_sys, sys_of, assign, bound, true)?
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn eval_quant(
    vars: &[String],
    g: &Formula,
    env: &Env,
    default_sys: &str,
    sys_of: &BTreeMap<String, String>,
    assign: &BTreeMap<String, u64>,
    bound: u64,
    universal: bool,
) -> Result<bool> {
    if vars.is_empty() {
        return eval_rec(g, env, default_sys, sys_of, assign, bound);
    }
    let (first, rest) = vars.split_first().unwrap();
    for n in 0..bound {
        let mut a = assign.clone();
        a.insert(first.clone(), n);
        let inner = eval_quant(rest, g, env, default_sys, sys_of, &a, bound, universal)?;
        if universal && !inner {
            return Ok(false);
        }
        if !universal && inner {
            return Ok(true);
        }
    }
    Ok(universal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeration::{word_dfao, NumerationSystem};
    use crate::words::Substitution;

    fn fib_env() -> Env {
        let ns = NumerationSystem::new(Substitution::parse("01/0").unwrap(), 0, "fib").unwrap();
        let dfao = word_dfao(&ns);
        let mut env = Env::new();
        env.add_system(ns).unwrap();
        env.add_dfao("F", dfao, "fib");
        env
    }

    fn tri_env() -> Env {
        let ns = NumerationSystem::new(Substitution::parse("01/02/0").unwrap(), 0, "tri").unwrap();
        let dfao = word_dfao(&ns);
        let mut env = Env::new();
        env.add_system(ns).unwrap();
        env.add_dfao("T", dfao, "tri");
        env
    }

    fn accepts_values(env: &Env, c: &Compiled, vals: &[u64]) -> bool {
        assert_eq!(c.vars.len(), vals.len());
        let reps: Vec<Vec<usize>> = c
            .vars
            .iter()
            .zip(vals)
            .map(|(v, &n)| {
                let sys = env.systems.values().next().unwrap();
                let _ = v;
                sys.ns.rep(n)
            })
            .collect();
        let len = reps.iter().map(|r| r.len()).max().unwrap_or(0);
        let padded: Vec<Vec<usize>> = reps
            .into_iter()
            .map(|r| {
                let mut v = vec![0usize; len - r.len()];
                v.extend_from_slice(&r);
                v
            })
            .collect();
        let refs: Vec<&[usize]> = padded.iter().map(|v| v.as_slice()).collect();
        c.dfa.accepts_tuple(&refs)
    }

    #[test]
    fn trivial_identity() {
        let env = fib_env();
        let c = compile(
            &Formula::cmp(CmpOp::Eq, Term::var("x"), Term::var("x")),
            &env,
            "fib",
        )
        .unwrap();
        // x = x accepts exactly the valid representations
        let valid = env.systems["fib"].valid.clone();
        assert!(c.dfa.same_language(&valid.minimize()).unwrap());
    }

    #[test]
    fn comparison_semantics() {
        let env = fib_env();
        let cases: Vec<(fn(u64, u64) -> bool, CmpOp)> = vec![
            (|a, b| a < b, CmpOp::Lt),
            (|a, b| a <= b, CmpOp::Le),
            (|a, b| a == b, CmpOp::Eq),
            (|a, b| a != b, CmpOp::Ne),
            (|a, b| a > b, CmpOp::Gt),
            (|a, b| a >= b, CmpOp::Ge),
        ];
        for (op, f) in cases {
            let c = compile(&Formula::cmp(f, Term::var("x"), Term::var("y")), &env, "fib").unwrap();
            for a in 0..40u64 {
                for b in 0..40u64 {
                    assert_eq!(accepts_values(&env, &c, &[a, b]), op(a, b), "{f:?} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn terms_with_constants_and_sums() {
        let env = fib_env();
        // y = x + 3
        let c = compile(
            &Formula::cmp(
                CmpOp::Eq,
                Term::var("y"),
                Term::var("x").plus(Term::num(3)),
            ),
            &env,
            "fib",
        )
        .unwrap();
        assert_eq!(c.vars, vec!["x".to_string(), "y".to_string()]);
        for x in 0..100u64 {
            for y in 0..110u64 {
                assert_eq!(accepts_values(&env, &c, &[x, y]), y == x + 3);
            }
        }
        // subtraction is partial: z = x - 2 requires x >= 2
        let c = compile(
            &Formula::cmp(
                CmpOp::Eq,
                Term::var("z"),
                Term::var("x").minus(Term::num(2)),
            ),
            &env,
            "fib",
        )
        .unwrap();
        for x in 0..50u64 {
            for z in 0..50u64 {
                assert_eq!(accepts_values(&env, &c, &[x, z]), x >= 2 && z == x - 2);
            }
        }
    }

    #[test]
    fn forall_equals_not_exists_not() {
        let env = fib_env();
        let body = Formula::implies(
            Formula::cmp(CmpOp::Lt, Term::var("j"), Term::var("n")),
            Formula::cmp(CmpOp::Lt, Term::var("j"), Term::num(100)),
        );
        let fa = compile(&Formula::forall(&["j"], body.clone()), &env, "fib").unwrap();
        let ne = compile(
            &Formula::not(Formula::exists(&["j"], Formula::not(body))),
            &env,
            "fib",
        )
        .unwrap();
        assert!(fa.dfa.same_language(&ne.dfa).unwrap());
    }

    #[test]
    fn dfao_atoms() {
        let env = fib_env();
        // Fibonacci word f = 0100101001001010...
        let f = crate::words::fixed_point_prefix(
            &Substitution::parse("01/0").unwrap(),
            0,
            300,
        )
        .unwrap();
        let c = compile(
            &Formula::dfao_eq("F", Term::var("i"), 1),
            &env,
            "fib",
        )
        .unwrap();
        for i in 0..300u64 {
            assert_eq!(accepts_values(&env, &c, &[i]), f[i as usize] == 1, "{i}");
        }
    }

    #[test]
    fn feq_examples() {
        let env = fib_env();
        let feq = feq_predicate(&env, "F").unwrap();
        let c = Compiled { dfa: feq, vars: vec!["i".into(), "j".into(), "n".into()] };
        // reflexive
        for i in (0..50).step_by(7) {
            for n in (0..50).step_by(11) {
                assert!(accepts_values(&env, &c, &[i, i, n]));
            }
        }
        // f[0..2) = 01 = f[3..5)
        assert!(accepts_values(&env, &c, &[0, 3, 2]));
        // f[0] = 0 != f[1] = 1
        assert!(!accepts_values(&env, &c, &[0, 1, 1]));

        let tenv = tri_env();
        let tfeq = feq_predicate(&tenv, "T").unwrap();
        let tc = Compiled { dfa: tfeq, vars: vec!["i".into(), "j".into(), "n".into()] };
        assert!(!accepts_values(&tenv, &tc, &[0, 1, 1]));
        // brute cross-check against the prefix
        let t = crate::words::fixed_point_prefix(
            &Substitution::parse("01/02/0").unwrap(),
            0,
            200,
        )
        .unwrap();
        for i in 0..25u64 {
            for j in 0..25u64 {
                for n in 0..12u64 {
                    let expect = (0..n).all(|s| t[(i + s) as usize] == t[(j + s) as usize]);
                    assert_eq!(accepts_values(&tenv, &tc, &[i, j, n]), expect, "{i} {j} {n}");
                }
            }
        }
    }

    #[test]
    fn relation_calls_and_errors() {
        let mut env = fib_env();
        let lt = env.systems["fib"].lt.clone();
        env.add_relation("lt", lt, vec!["fib".into(), "fib".into()]);
        // repeated argument: $lt(x, x) is empty
        let c = compile(
            &Formula::Call { name: "lt".into(), args: vec![Term::var("x"), Term::var("x")] },
            &env,
            "fib",
        )
        .unwrap();
        assert!(c.dfa.is_empty());
        // compound argument: $lt(x+1, y)
        let c = compile(
            &Formula::Call {
                name: "lt".into(),
                args: vec![Term::var("x").plus(Term::num(1)), Term::var("y")],
            },
            &env,
            "fib",
        )
        .unwrap();
        for x in 0..40u64 {
            for y in 0..40u64 {
                assert_eq!(accepts_values(&env, &c, &[x, y]), x + 1 < y);
            }
        }
        assert!(matches!(
            compile(
                &Formula::Call { name: "nope".into(), args: vec![Term::var("x")] },
                &env,
                "fib"
            ),
            Err(Error::UnknownRelation(_))
        ));
        assert!(matches!(
            compile(
                &Formula::Call { name: "lt".into(), args: vec![Term::var("x")] },
                &env,
                "fib"
            ),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn mixed_numeration_rejected() {
        let mut env = fib_env();
        let tri =
            NumerationSystem::new(Substitution::parse("01/02/0").unwrap(), 0, "tri").unwrap();
        env.add_system(tri).unwrap();
        let lt_tri = env.systems["tri"].lt.clone();
        env.add_relation("lt_tri", lt_tri, vec!["tri".into(), "tri".into()]);
        // x is forced to fib by the first atom and tri by the second
        let f = Formula::and(
            Formula::dfao_eq("F", Term::var("x"), 0),
            Formula::Call { name: "lt_tri".into(), args: vec![Term::var("x"), Term::var("y")] },
        );
        assert!(matches!(
            compile(&f, &env, "fib"),
            Err(Error::MixedNumerationWithoutConverter(_, _))
        ));
    }

    #[test]
    fn compiled_matches_brute_eval() {
        let env = fib_env();
        // occ-style predicate: exists u (j <= u & u <= j + n & feq-free body)
        let f = Formula::exists(
            &["u"],
            Formula::and(
                Formula::and(
                    Formula::cmp(CmpOp::Le, Term::var("j"), Term::var("u")),
                    Formula::cmp(CmpOp::Le, Term::var("u"), Term::var("j").plus(Term::var("n"))),
                ),
                Formula::dfao_eq("F", Term::var("u"), 1),
            ),
        );
        let c = compile(&f, &env, "fib").unwrap();
        assert_eq!(c.vars, vec!["j".to_string(), "n".to_string()]);
        for j in 0..30u64 {
            for n in 0..30u64 {
                let mut assign = BTreeMap::new();
                assign.insert("j".to_string(), j);
                assign.insert("n".to_string(), n);
                let brute = eval_formula(&f, &env, "fib", &assign, 80).unwrap();
                assert_eq!(accepts_values(&env, &c, &[j, n]), brute, "{j} {n}");
            }
        }
    }

    #[test]
    fn padding_closure_after_compile() {
        let env = fib_env();
        let c = compile(
            &Formula::cmp(CmpOp::Eq, Term::var("y"), Term::var("x").plus(Term::num(2))),
            &env,
            "fib",
        )
        .unwrap();
        let ns = &env.systems["fib"].ns;
        for x in 0..60u64 {
            let (rx, ry) = (ns.rep(x), ns.rep(x + 2));
            for extra in 0..4usize {
                let len = rx.len().max(ry.len()) + extra;
                let pad = |w: &[usize]| {
                    let mut v = vec![0usize; len - w.len()];
                    v.extend_from_slice(w);
                    v
                };
                assert!(c.dfa.accepts_tuple(&[&pad(&rx), &pad(&ry)]));
            }
        }
    }
}
