//! Surface syntax for first-order formulas and definition scripts.
//!
//! Formula grammar (precedence low to high): `<=>`, `=>`, `|`, `&`, then
//! unary `~` / quantifiers / atoms. Quantifiers are written `E` / `A`,
//! optionally fused with the first variable (`Ej1,j2,n`), and their scope
//! extends to the end of the enclosing subformula. Atoms are term
//! comparisons (`u+j = v+i`, `k > 0`), relation calls (`$feq(i,u,k)`),
//! automatic-word output comparisons (`Dequi[i][j1][j2][k][n] <= @2`) and
//! output equality between word positions (`W[u] != W[v]`).
//!
//! `?msd_<name>` annotations may appear before any subformula or argument;
//! the leading one selects the statement's default numeration system, the
//! rest are accepted and ignored (variable systems are inferred from the
//! signatures of the relations and words they touch).
//!
//! Script statements:
//!
//! ```text
//! def  <name> "<formula>":
//! eval <name> [<var> ...] "<formula>":
//! ```
//!
//! `def` registers the compiled predicate as a callable relation. A closed
//! `eval` reports a truth value; an `eval` with parameter variables counts,
//! for each value of the parameters, the assignments of the remaining free
//! variables that satisfy the formula, yielding a linear representation.
//! `#` starts a comment running to the end of the line.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::linrep::{path_count, LinRep};
use crate::logic::compile::{compile, Env};
use crate::logic::formula::{CmpOp, Formula, Term};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(u64),
    Output(i64),
    Annot(String),
    Sym(&'static str),
    Quote(String),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Num(n) => write!(f, "{n}"),
            Tok::Output(v) => write!(f, "@{v}"),
            Tok::Annot(s) => write!(f, "?msd_{s}"),
            Tok::Sym(s) => write!(f, "{s}"),
            Tok::Quote(_) => write!(f, "\"...\""),
        }
    }
}

fn err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let bytes: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < bytes.len() && bytes[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j] != '"' {
                j += 1;
            }
            if j == bytes.len() {
                return Err(err("unterminated string literal"));
            }
            out.push(Tok::Quote(bytes[start..j].iter().collect()));
            i = j + 1;
            continue;
        }
        if c == '?' {
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j].is_alphanumeric() || bytes[j] == '_') {
                j += 1;
            }
            let word: String = bytes[i + 1..j].iter().collect();
            let name = word
                .strip_prefix("msd_")
                .ok_or_else(|| err(format!("expected ?msd_<system>, found ?{word}")))?;
            if name.is_empty() {
                return Err(err("?msd_ annotation with empty system name"));
            }
            out.push(Tok::Annot(name.to_string()));
            i = j;
            continue;
        }
        if c == '@' {
            let mut j = i + 1;
            if j < bytes.len() && bytes[j] == '-' {
                j += 1;
            }
            let start = j;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if j == start {
                return Err(err("expected integer after @"));
            }
            let text: String = bytes[i + 1..j].iter().collect();
            let v: i64 = text.parse().map_err(|_| err(format!("bad output literal @{text}")))?;
            out.push(Tok::Output(v));
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = bytes[i..j].iter().collect();
            let v: u64 = text.parse().map_err(|_| err(format!("integer out of range: {text}")))?;
            out.push(Tok::Num(v));
            i = j;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < bytes.len() && (bytes[j].is_alphanumeric() || bytes[j] == '_') {
                j += 1;
            }
            out.push(Tok::Ident(bytes[i..j].iter().collect()));
            i = j;
            continue;
        }
        let rest = &bytes[i..];
        let sym = match rest {
            ['<', '=', '>', ..] => "<=>",
            ['=', '>', ..] => "=>",
            ['<', '=', ..] => "<=",
            ['>', '=', ..] => ">=",
            ['!', '=', ..] => "!=",
            ['<', ..] => "<",
            ['>', ..] => ">",
            ['=', ..] => "=",
            ['&', ..] => "&",
            ['|', ..] => "|",
            ['~', ..] => "~",
            ['+', ..] => "+",
            ['-', ..] => "-",
            ['(', ..] => "(",
            [')', ..] => ")",
            ['[', ..] => "[",
            [']', ..] => "]",
            [',', ..] => ",",
            ['$', ..] => "$",
            [':', ..] => ":",
            _ => return Err(err(format!("unexpected character '{c}'"))),
        };
        out.push(Tok::Sym(sym));
        i += sym.len();
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(t)) if *t == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<()> {
        match self.next()? {
            Tok::Sym(t) if t == s => Ok(()),
            t => Err(err(format!("expected '{s}', found '{t}'"))),
        }
    }

    fn skip_annotations(&mut self) {
        while matches!(self.peek(), Some(Tok::Annot(_))) {
            self.pos += 1;
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            t => Err(err(format!("expected identifier, found '{t}'"))),
        }
    }

    // iff ::= implies ('<=>' implies)*   (left associative)
    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.implies()?;
        while self.eat_sym("<=>") {
            let rhs = self.implies()?;
            f = Formula::iff(f, rhs);
        }
        Ok(f)
    }

    fn implies(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat_sym("=>") {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut f = self.and()?;
        while self.eat_sym("|") {
            let rhs = self.and()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat_sym("&") {
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    /// Splits a leading `E`/`A` token into the quantifier and an optional
    /// fused first variable (`Ej1` -> E over j1).
    fn quantifier(&mut self) -> Option<(bool, Option<String>)> {
        if let Some(Tok::Ident(s)) = self.peek() {
            let mut chars = s.chars();
            let head = chars.next().unwrap();
            if head == 'E' || head == 'A' {
                let rest: String = chars.collect();
                let fused = if rest.is_empty() {
                    // Bare quantifier letter; the variable list follows.
                    if !matches!(self.toks.get(self.pos + 1), Some(Tok::Ident(_))) {
                        return None;
                    }
                    None
                } else {
                    Some(rest)
                };
                self.pos += 1;
                return Some((head == 'E', fused));
            }
        }
        None
    }

    fn unary(&mut self) -> Result<Formula> {
        self.skip_annotations();
        if self.eat_sym("~") {
            return Ok(Formula::not(self.unary()?));
        }
        if let Some((existential, fused)) = self.quantifier() {
            let mut vars = Vec::new();
            match fused {
                Some(v) => vars.push(v),
                None => vars.push(self.ident()?),
            }
            while self.eat_sym(",") {
                vars.push(self.ident()?);
            }
            let body = Box::new(self.formula()?);
            return Ok(if existential {
                Formula::Exists(vars, body)
            } else {
                Formula::Forall(vars, body)
            });
        }
        if self.eat_sym("(") {
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        if self.eat_sym("$") {
            let name = self.ident()?;
            self.expect_sym("(")?;
            let mut args = Vec::new();
            if !self.eat_sym(")") {
                loop {
                    self.skip_annotations();
                    args.push(self.term()?);
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
            return Ok(Formula::Call { name, args });
        }
        // Word access `Name[t]...[t]` versus a plain term both start with an
        // identifier; disambiguate on the following '['.
        if matches!(self.peek(), Some(Tok::Ident(_)))
            && self.toks.get(self.pos + 1) == Some(&Tok::Sym("["))
        {
            let (word, args) = self.word_access()?;
            let op = self.cmp_op()?;
            match self.peek() {
                Some(Tok::Output(_)) => {
                    let Tok::Output(value) = self.next()? else { unreachable!() };
                    return Ok(Formula::DfaoCmp { word, args, op, value });
                }
                _ => {
                    let (word2, args2) = self.word_access()?;
                    let one = |mut a: Vec<Term>, w: &str| {
                        if a.len() == 1 {
                            Ok(a.pop().unwrap())
                        } else {
                            Err(err(format!(
                                "output equality on {w} needs a single index, got {}",
                                a.len()
                            )))
                        }
                    };
                    let eq = Formula::WordEq {
                        index1: one(args, &word)?,
                        word1: word,
                        index2: one(args2, &word2)?,
                        word2,
                    };
                    return match op {
                        CmpOp::Eq => Ok(eq),
                        CmpOp::Ne => Ok(Formula::not(eq)),
                        _ => Err(err("output equality supports only = and !=")),
                    };
                }
            }
        }
        let lhs = self.term()?;
        let op = self.cmp_op()?;
        let rhs = self.term()?;
        Ok(Formula::Compare(op, lhs, rhs))
    }

    fn word_access(&mut self) -> Result<(String, Vec<Term>)> {
        let name = self.ident()?;
        let mut args = Vec::new();
        while self.eat_sym("[") {
            args.push(self.term()?);
            self.expect_sym("]")?;
        }
        if args.is_empty() {
            return Err(err(format!("expected '[' after word name {name}")));
        }
        Ok((name, args))
    }

    fn cmp_op(&mut self) -> Result<CmpOp> {
        let t = self.next()?;
        let op = match t {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            t => return Err(err(format!("expected comparison operator, found '{t}'"))),
        };
        Ok(op)
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = self.term_atom()?;
        loop {
            if self.eat_sym("+") {
                t = t.plus(self.term_atom()?);
            } else if self.eat_sym("-") {
                t = t.minus(self.term_atom()?);
            } else {
                return Ok(t);
            }
        }
    }

    fn term_atom(&mut self) -> Result<Term> {
        match self.next()? {
            Tok::Ident(v) => Ok(Term::var(v)),
            Tok::Num(n) => Ok(Term::num(n)),
            t => Err(err(format!("expected variable or constant, found '{t}'"))),
        }
    }
}

/// Parses a formula string, returning the leading `?msd_<name>` system
/// annotation (if any) and the AST.
pub fn parse_formula(src: &str) -> Result<(Option<String>, Formula)> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let system = match p.peek() {
        Some(Tok::Annot(name)) => {
            let name = name.clone();
            p.pos += 1;
            Some(name)
        }
        _ => None,
    };
    let f = p.formula()?;
    if let Some(t) = p.peek() {
        return Err(err(format!("trailing input after formula: '{t}'")));
    }
    Ok((system, f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementKind {
    Def,
    Eval,
}

/// One `def`/`eval` statement of a script.
#[derive(Debug, Clone)]
pub struct Statement {
    pub kind: StatementKind,
    pub name: String,
    /// For `eval`, the parameter variables listed between the name and the
    /// formula; the remaining free variables are counted.
    pub params: Vec<String>,
    /// Leading `?msd_<name>` annotation of the formula, if present.
    pub system: Option<String>,
    pub formula: Formula,
}

/// Parses a script: a sequence of `def`/`eval` statements.
pub fn parse_script(src: &str) -> Result<Vec<Statement>> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut out = Vec::new();
    while p.peek().is_some() {
        let kw = p.ident()?;
        let kind = match kw.as_str() {
            "def" => StatementKind::Def,
            "eval" => StatementKind::Eval,
            other => return Err(err(format!("expected def or eval, found '{other}'"))),
        };
        let name = p.ident()?;
        let mut params = Vec::new();
        while let Some(Tok::Ident(v)) = p.peek() {
            params.push(v.clone());
            p.pos += 1;
        }
        let body = match p.next()? {
            Tok::Quote(s) => s,
            t => return Err(err(format!("expected quoted formula, found '{t}'"))),
        };
        if kind == StatementKind::Def && !params.is_empty() {
            return Err(err(format!("def {name} does not take parameter variables")));
        }
        // Trailing ':' after the closing quote is optional.
        p.eat_sym(":");
        let (system, formula) = parse_formula(&body)?;
        out.push(Statement { kind, name, params, system, formula });
    }
    Ok(out)
}

/// Result of executing a single script statement.
#[derive(Debug)]
pub enum StatementResult {
    /// `def`: relation registered under the statement name;
    /// carries (free variables, DFA states).
    Defined(Vec<String>, usize),
    /// Closed `eval`: truth value.
    Truth(bool),
    /// `eval` with parameters: linear representation counting the satisfying
    /// assignments of the non-parameter free variables, indexed by the
    /// parameters (tracks in statement order).
    Counted(Vec<String>, LinRep),
}

/// Executes one statement against the environment. `def` statements extend
/// `env.relations`; the fallback numeration system is used when the formula
/// carries no `?msd_` annotation.
pub fn run_statement(
    env: &mut Env,
    st: &Statement,
    fallback_sys: &str,
) -> Result<StatementResult> {
    let sys = st.system.as_deref().unwrap_or(fallback_sys);
    if !env.systems.contains_key(sys) {
        return Err(Error::UnknownRelation(format!("numeration system {sys}")));
    }
    let compiled = compile(&st.formula, env, sys)?;
    match st.kind {
        StatementKind::Def => {
            let systems = track_systems(env, &st.formula, sys, &compiled.vars)?;
            let states = compiled.dfa.num_states();
            env.add_relation(st.name.clone(), compiled.dfa, systems);
            Ok(StatementResult::Defined(compiled.vars, states))
        }
        StatementKind::Eval => {
            if st.params.is_empty() && compiled.vars.is_empty() {
                return Ok(StatementResult::Truth(!compiled.dfa.is_empty()));
            }
            let free: BTreeSet<&String> = compiled.vars.iter().collect();
            for p in &st.params {
                if !free.contains(p) {
                    return Err(err(format!("parameter {p} is not free in eval {}", st.name)));
                }
            }
            let keep: Vec<bool> =
                compiled.vars.iter().map(|v| st.params.contains(v)).collect();
            let counted = path_count(&compiled.dfa, &keep).stabilize_lambda()?;
            // Reorder tracks to follow the parameter list.
            let kept: Vec<&String> =
                compiled.vars.iter().filter(|v| st.params.contains(v)).collect();
            let perm: Vec<usize> = st
                .params
                .iter()
                .map(|p| kept.iter().position(|v| *v == p).unwrap())
                .collect();
            let rep = counted.permute_tracks(&perm);
            Ok(StatementResult::Counted(st.params.clone(), rep))
        }
    }
}

/// Runs a whole script, returning each statement's result in order.
pub fn run_script(
    env: &mut Env,
    script: &[Statement],
    fallback_sys: &str,
) -> Result<Vec<(String, StatementResult)>> {
    script
        .iter()
        .map(|st| Ok((st.name.clone(), run_statement(env, st, fallback_sys)?)))
        .collect()
}

/// Per-track numeration systems for a defined relation, following the
/// compiler's inference over the sorted free variables.
fn track_systems(
    env: &Env,
    f: &Formula,
    default_sys: &str,
    vars: &[String],
) -> Result<Vec<String>> {
    let inferred = crate::logic::compile::infer_systems(f, env, default_sys)?;
    Ok(vars
        .iter()
        .map(|v| inferred.get(v).cloned().unwrap_or_else(|| default_sys.to_string()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(src: &str) -> Formula {
        parse_formula(src).unwrap().1
    }

    #[test]
    fn leading_annotation_recorded() {
        let (sys, _) = parse_formula("?msd_tri i <= j").unwrap();
        assert_eq!(sys.as_deref(), Some("tri"));
        let (sys, _) = parse_formula("i <= j").unwrap();
        assert_eq!(sys, None);
    }

    #[test]
    fn precedence_iff_implies_or_and_not() {
        // a=0 & ~b=0 | c=0 => d=0 <=> e=0
        // parses as (((a=0 & ~(b=0)) | c=0) => d=0) <=> e=0
        let at = |v: &str| Formula::cmp(CmpOp::Eq, Term::var(v), Term::num(0));
        let expect = Formula::iff(
            Formula::implies(
                Formula::or(Formula::and(at("a"), Formula::not(at("b"))), at("c")),
                at("d"),
            ),
            at("e"),
        );
        assert_eq!(f("a=0 & ~b=0 | c=0 => d=0 <=> e=0"), expect);
    }

    #[test]
    fn quantifier_scope_extends_to_end() {
        // k>0 & ~Ej j<i & $r(i,j)  ==  k>0 & ~(Ej (j<i & $r(i,j)))
        let got = f("k>0 & ~Ej j<i & $r(i,j)");
        let expect = Formula::and(
            Formula::cmp(CmpOp::Gt, Term::var("k"), Term::num(0)),
            Formula::not(Formula::exists(
                &["j"],
                Formula::and(
                    Formula::cmp(CmpOp::Lt, Term::var("j"), Term::var("i")),
                    Formula::Call {
                        name: "r".to_string(),
                        args: vec![Term::var("i"), Term::var("j")],
                    },
                ),
            )),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn fused_and_spaced_quantifier_variables() {
        let a = f("Ej1,j2,n j1+j2 = n");
        let b = f("E j1, j2, n j1+j2 = n");
        assert_eq!(a, b);
        match a {
            Formula::Exists(vars, _) => assert_eq!(vars, ["j1", "j2", "n"]),
            other => panic!("expected Exists, got {other:?}"),
        }
    }

    #[test]
    fn dfao_atoms_and_word_equality() {
        let got = f("Dequi[i][j1][j2][k][n] <= @2");
        assert_eq!(
            got,
            Formula::DfaoCmp {
                word: "Dequi".to_string(),
                args: ["i", "j1", "j2", "k", "n"].iter().map(|v| Term::var(*v)).collect(),
                op: CmpOp::Le,
                value: 2,
            }
        );
        assert_eq!(
            f("W[u] != W[v]"),
            Formula::not(Formula::WordEq {
                word1: "W".to_string(),
                index1: Term::var("u"),
                word2: "W".to_string(),
                index2: Term::var("v"),
            })
        );
        // Negative output literal.
        assert!(matches!(f("D[i][0] = @-1"), Formula::DfaoCmp { value: -1, .. }));
    }

    #[test]
    fn inner_annotations_are_skipped() {
        let got = f("?msd_a Ei ($c(?msd_a i, ?msd_b j) & ?msd_b j = j)");
        match got {
            Formula::Exists(_, body) => match *body {
                Formula::And(l, _) => {
                    assert!(matches!(*l, Formula::Call { .. }));
                }
                other => panic!("expected And, got {other:?}"),
            },
            other => panic!("expected Exists, got {other:?}"),
        }
    }

    #[test]
    fn def_eval_statements_parse() {
        let src = r#"
            # occurrence predicate
            def occ_tri "?msd_tri j1<=u & u<=j1+n & $feq_tri(i,u,k) & j2=j2":
            def sametri "?msd_tri Dequitri[i][j1][j2][k][n] = @0":
            def abeqextri "?msd_tri Ai $sametri(i,j1,j2,k,n)":
            def abfirsttri "?msd_tri k>0 & ~Ej j<i & $abeqtri(i,j,k,n)":
            eval allfrom6 "?msd_pell Ak $unb1pell(k) <=> k>=6":
            eval comp_nara n "?msd_nara Aj $feq_nara(i,j,n) => i<=j":
        "#;
        let script = parse_script(src).unwrap();
        assert_eq!(script.len(), 6);
        assert_eq!(script[0].name, "occ_tri");
        assert_eq!(script[0].system.as_deref(), Some("tri"));
        assert_eq!(script[5].kind, StatementKind::Eval);
        assert_eq!(script[5].params, ["n"]);
        assert!(script[4].params.is_empty());
    }

    #[test]
    fn variable_starting_with_quantifier_letter_is_rejected_cleanly() {
        // 'En' at formula position is always read as a quantifier; a lone
        // comparison over a variable named En therefore fails to parse
        // rather than silently changing meaning.
        assert!(parse_formula("En = 3").is_err());
    }

    #[test]
    fn fibonacci_complexity_script_end_to_end() {
        use crate::numeration::{word_dfao, NumerationSystem};
        use crate::words::Substitution;
        let sub = Substitution::parse("01/0").unwrap();
        let ns = NumerationSystem::new(sub, 0, "fib").unwrap();
        let word = word_dfao(&ns);
        let mut env = Env::new();
        env.add_system(ns).unwrap();
        env.add_dfao("F", word, "fib");
        let src = r#"
            def cut "?msd_fib i<=u & j<=v & u+j=v+i & u<n+i & v<n+j":
            def feq_fib "?msd_fib ~(Eu,v $cut(i,j,n,u,v) & F[u]!=F[v])":
            eval not_eventually_periodic "?msd_fib ~(Ep,m p>=1 & Ai i>=m => F[i]=F[i+p])":
            eval comp_fib n "?msd_fib Aj $feq_fib(i,j,n) => i<=j":
        "#;
        let script = parse_script(src).unwrap();
        let results = run_script(&mut env, &script, "fib").unwrap();
        match &results[2].1 {
            StatementResult::Truth(true) => {}
            other => panic!("expected TRUE, got {other:?}"),
        }
        match &results[3].1 {
            StatementResult::Counted(params, rep) => {
                assert_eq!(params, &["n".to_string()]);
                // Sturmian factor complexity: p(n) = n + 1
                let ns = &env.systems["fib"].ns;
                for (n, v) in rep.first_values(ns, 40).iter().enumerate() {
                    assert_eq!(*v, num_rational::BigRational::from_integer((n as i64 + 1).into()));
                }
            }
            other => panic!("expected counted representation, got {other:?}"),
        }
    }

    #[test]
    fn errors_are_reported() {
        assert!(parse_formula("i <").is_err());
        assert!(parse_formula("i = j extra").is_err());
        assert!(parse_formula("@x").is_err());
        assert!(parse_formula("?foo_bar i=0").is_err());
        assert!(parse_script("def x y \"i=0\":").is_err());
        assert!(parse_script("define x \"i=0\":").is_err());
    }
}
