//! First-order formula AST over numeration-represented integer variables.

use std::collections::BTreeSet;

/// Integer terms. Subtraction is partial: atoms containing a negative
/// subterm value are false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(u64),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn num(c: u64) -> Self {
        Term::Const(c)
    }

    pub fn plus(self, other: Term) -> Self {
        Term::Add(Box::new(self), Box::new(other))
    }

    pub fn minus(self, other: Term) -> Self {
        Term::Sub(Box::new(self), Box::new(other))
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::Add(a, b) | Term::Sub(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    Compare(CmpOp, Term, Term),
    /// `word[args...] <op> @value` (comparison of a DFAO output)
    DfaoCmp { word: String, args: Vec<Term>, op: CmpOp, value: i64 },
    /// `w1[i1] = w2[i2]` (same output letter)
    WordEq { word1: String, index1: Term, word2: String, index2: Term },
    /// `$name(args...)`
    Call { name: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
    Forall(Vec<String>, Box<Formula>),
}

impl Formula {
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(vars: &[&str], f: Formula) -> Self {
        Formula::Exists(vars.iter().map(|v| v.to_string()).collect(), Box::new(f))
    }

    pub fn forall(vars: &[&str], f: Formula) -> Self {
        Formula::Forall(vars.iter().map(|v| v.to_string()).collect(), Box::new(f))
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Self {
        Formula::Compare(op, a, b)
    }

    /// `word[index] = @value`
    pub fn dfao_eq(word: &str, index: Term, value: i64) -> Self {
        Formula::DfaoCmp { word: word.to_string(), args: vec![index], op: CmpOp::Eq, value }
    }

    /// Conjunction of a list (True when empty).
    pub fn all(fs: Vec<Formula>) -> Self {
        fs.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Disjunction of a list (neutral: ¬True when empty).
    pub fn any(fs: Vec<Formula>) -> Self {
        fs.into_iter().reduce(Formula::or).unwrap_or(Formula::not(Formula::True))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
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
            Formula::Not(f) => f.collect_free(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Exists(vars, f) | Formula::Forall(vars, f) => {
                let mut inner = BTreeSet::new();
                f.collect_free(&mut inner);
                for v in vars {
                    inner.remove(v);
                }
                out.extend(inner);
            }
        }
    }
}
