//! First-order predicate logic with equality.
//!
//! Signatures carry user sorts, operations and predicates. The sorts `Int` and `Bool`,
//! integer and boolean literals, `+ - *` and `< ≤ > ≥` are built in: every signature has
//! them, morphisms fix them and every algebra interprets them in the standard way over the
//! bounded carrier `-B..=B`.

mod algebra;
mod compiled;
mod enumerate;
mod morphism;
mod pushout;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use algebra::{eval_formula, eval_term, Algebra, Valuation, Value};
pub use compiled::Program;
pub use enumerate::{enumerate_algebras, Bounds};
#[allow(unused_imports)]
pub(crate) use enumerate::tuples;
pub use morphism::{translate_formula, translate_term, FopeqMorphism};
pub use pushout::{fopeq_pushout, name_pushout, FopeqPushout, NamePushout};

/// Renames a variable given its name and whether it is primed; `None` leaves it alone.
pub type VarRename<'a> = dyn Fn(&str, bool) -> Option<(String, bool)> + 'a;

/// Errors raised by the first-order layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FopeqError {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("no binding for variable `{0}`")]
    MissingBinding(String),
    #[error("sort error: {0}")]
    Sort(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("enumeration refused: {0}")]
    Refused(String),
}

/// A sort: one of the two built-ins or a user carrier set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Int,
    Bool,
    User(String),
}

impl Sort {
    pub fn user(name: &str) -> Self {
        Sort::User(name.to_string())
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("ℤ"),
            Sort::Bool => f.write_str("BOOL"),
            Sort::User(s) => f.write_str(s),
        }
    }
}

/// Argument sorts and result sort of an operation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpProfile {
    pub args: Vec<Sort>,
    pub result: Sort,
}

impl OpProfile {
    pub fn constant(result: Sort) -> Self {
        OpProfile { args: Vec::new(), result }
    }
}

/// `⟨S, Ω, Π⟩` restricted to user symbols; the built-ins are implicit.
///
/// Operation names are unique (no overloading), which trivially satisfies the
/// "same name and arguments, same result" requirement.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FopeqSignature {
    pub sorts: BTreeSet<String>,
    pub ops: BTreeMap<String, OpProfile>,
    pub preds: BTreeMap<String, Vec<Sort>>,
}

impl FopeqSignature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_sort(mut self, s: &str) -> Self {
        self.sorts.insert(s.to_string());
        self
    }

    pub fn with_op(mut self, name: &str, args: Vec<Sort>, result: Sort) -> Self {
        self.ops.insert(name.to_string(), OpProfile { args, result });
        self
    }

    pub fn with_pred(mut self, name: &str, args: Vec<Sort>) -> Self {
        self.preds.insert(name.to_string(), args);
        self
    }

    /// Built-in sorts are always present.
    pub fn has_sort(&self, s: &Sort) -> bool {
        match s {
            Sort::Int | Sort::Bool => true,
            Sort::User(n) => self.sorts.contains(n),
        }
    }

    pub fn validate(&self) -> Result<(), FopeqError> {
        for (name, p) in &self.ops {
            for s in p.args.iter().chain(core::iter::once(&p.result)) {
                if !self.has_sort(s) {
                    return Err(FopeqError::InvalidSignature(format!(
                        "operation `{name}` uses undeclared sort `{s}`"
                    )));
                }
            }
        }
        for (name, args) in &self.preds {
            if let Some(s) = args.iter().find(|s| !self.has_sort(s)) {
                return Err(FopeqError::InvalidSignature(format!(
                    "predicate `{name}` uses undeclared sort `{s}`"
                )));
            }
        }
        Ok(())
    }

    /// Name-based union: shared names must carry identical profiles.
    pub fn union(&self, other: &FopeqSignature) -> Result<FopeqSignature, FopeqError> {
        let mut out = self.clone();
        out.sorts.extend(other.sorts.iter().cloned());
        for (n, p) in &other.ops {
            match out.ops.get(n) {
                Some(q) if q != p => {
                    return Err(FopeqError::InvalidSignature(format!(
                        "operation `{n}` has incompatible profiles"
                    )))
                }
                _ => {
                    out.ops.insert(n.clone(), p.clone());
                }
            }
        }
        for (n, p) in &other.preds {
            match out.preds.get(n) {
                Some(q) if q != p => {
                    return Err(FopeqError::InvalidSignature(format!(
                        "predicate `{n}` has incompatible profiles"
                    )))
                }
                _ => {
                    out.preds.insert(n.clone(), p.clone());
                }
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn is_subsignature_of(&self, other: &FopeqSignature) -> bool {
        self.sorts.is_subset(&other.sorts)
            && self.ops.iter().all(|(n, p)| other.ops.get(n) == Some(p))
            && self.preds.iter().all(|(n, p)| other.preds.get(n) == Some(p))
    }
}

/// Built-in arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

/// Built-in integer comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "≤",
            CmpOp::Gt => ">",
            CmpOp::Ge => "≥",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Terms. Variables carry a primed flag so one term language covers `x` and `x′`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var { name: String, primed: bool },
    Op { name: String, args: Vec<Term> },
    Int(i64),
    Bool(bool),
    Arith(ArithOp, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var { name: name.to_string(), primed: false }
    }

    pub fn primed(name: &str) -> Term {
        Term::Var { name: name.to_string(), primed: true }
    }

    pub fn constant(name: &str) -> Term {
        Term::Op { name: name.to_string(), args: Vec::new() }
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::Op { name: name.to_string(), args }
    }

    pub fn arith(op: ArithOp, a: Term, b: Term) -> Term {
        Term::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::arith(ArithOp::Add, a, b)
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::arith(ArithOp::Sub, a, b)
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::arith(ArithOp::Mul, a, b)
    }

    fn collect_vars(&self, bound: &BTreeSet<String>, out: &mut BTreeSet<(String, bool)>) {
        match self {
            Term::Var { name, primed } => {
                if *primed || !bound.contains(name) {
                    out.insert((name.clone(), *primed));
                }
            }
            Term::Op { args, .. } => args.iter().for_each(|a| a.collect_vars(bound, out)),
            Term::Int(_) | Term::Bool(_) => {}
            Term::Arith(_, a, b) => {
                a.collect_vars(bound, out);
                b.collect_vars(bound, out);
            }
        }
    }

    /// Free variable occurrences as `(name, primed)`.
    pub fn free_vars(&self) -> BTreeSet<(String, bool)> {
        let mut out = BTreeSet::new();
        self.collect_vars(&BTreeSet::new(), &mut out);
        out
    }

    fn map_vars(&self, bound: &BTreeSet<String>, f: &VarRename<'_>) -> Term {
        match self {
            Term::Var { name, primed } => {
                if !*primed && bound.contains(name) {
                    return self.clone();
                }
                match f(name, *primed) {
                    Some((n, p)) => Term::Var { name: n, primed: p },
                    None => self.clone(),
                }
            }
            Term::Op { name, args } => Term::Op {
                name: name.clone(),
                args: args.iter().map(|a| a.map_vars(bound, f)).collect(),
            },
            Term::Int(_) | Term::Bool(_) => self.clone(),
            Term::Arith(op, a, b) => Term::arith(*op, a.map_vars(bound, f), b.map_vars(bound, f)),
        }
    }

    /// Sort of the term under a signature and a variable context.
    pub fn sort_in(
        &self,
        sig: &FopeqSignature,
        ctx: &dyn Fn(&str, bool) -> Option<Sort>,
    ) -> Result<Sort, FopeqError> {
        match self {
            Term::Var { name, primed } => {
                ctx(name, *primed).ok_or_else(|| FopeqError::MissingBinding(var_display(name, *primed)))
            }
            Term::Op { name, args } => {
                let p = sig.ops.get(name).ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?;
                if p.args.len() != args.len() {
                    return Err(FopeqError::Sort(format!(
                        "`{name}` expects {} arguments, got {}",
                        p.args.len(),
                        args.len()
                    )));
                }
                for (a, s) in args.iter().zip(&p.args) {
                    let got = a.sort_in(sig, ctx)?;
                    if &got != s {
                        return Err(FopeqError::Sort(format!("argument of `{name}` has sort {got}, expected {s}")));
                    }
                }
                Ok(p.result.clone())
            }
            Term::Int(_) => Ok(Sort::Int),
            Term::Bool(_) => Ok(Sort::Bool),
            Term::Arith(op, a, b) => {
                for t in [a, b] {
                    let s = t.sort_in(sig, ctx)?;
                    if s != Sort::Int {
                        return Err(FopeqError::Sort(format!("operand of `{}` has sort {s}", op.symbol())));
                    }
                }
                Ok(Sort::Int)
            }
        }
    }
}

pub(crate) fn var_display(name: &str, primed: bool) -> String {
    if primed {
        format!("{name}′")
    } else {
        name.to_string()
    }
}

/// Sorted variable binders of a quantifier.
pub type Binders = Vec<(String, Sort)>;

/// First-order formulas over the term language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Cmp(CmpOp, Term, Term),
    Pred { name: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Binders, Box<Formula>),
    Exists(Binders, Box<Formula>),
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }

    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
        Formula::Cmp(op, a, b)
    }

    pub fn lt(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Lt, a, b)
    }

    pub fn le(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Le, a, b)
    }

    pub fn gt(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Gt, a, b)
    }

    pub fn ge(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Ge, a, b)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(vars: Binders, body: Formula) -> Formula {
        Formula::Forall(vars, Box::new(body))
    }

    pub fn exists(vars: Binders, body: Formula) -> Formula {
        Formula::Exists(vars, Box::new(body))
    }

    fn collect_vars(&self, bound: &mut BTreeSet<String>, out: &mut BTreeSet<(String, bool)>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Eq(a, b) | Formula::Cmp(_, a, b) => {
                a.collect_vars(bound, out);
                b.collect_vars(bound, out);
            }
            Formula::Pred { args, .. } => args.iter().for_each(|a| a.collect_vars(bound, out)),
            Formula::Not(f) => f.collect_vars(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(bound, out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_vars(bound, out);
                b.collect_vars(bound, out);
            }
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                let fresh: Vec<String> =
                    vs.iter().filter(|(v, _)| bound.insert(v.clone())).map(|(v, _)| v.clone()).collect();
                body.collect_vars(bound, out);
                for v in fresh {
                    bound.remove(&v);
                }
            }
        }
    }

    /// Free variable occurrences as `(name, primed)`. Binders only capture unprimed names.
    pub fn free_vars(&self) -> BTreeSet<(String, bool)> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut BTreeSet::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Rename free variable occurrences, avoiding capture by renaming binders when needed.
    pub fn map_free_vars(&self, f: &VarRename<'_>) -> Formula {
        self.map_vars_in(&BTreeSet::new(), f)
    }

    fn map_vars_in(&self, bound: &BTreeSet<String>, f: &VarRename<'_>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(a.map_vars(bound, f), b.map_vars(bound, f)),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, a.map_vars(bound, f), b.map_vars(bound, f)),
            Formula::Pred { name, args } => Formula::Pred {
                name: name.clone(),
                args: args.iter().map(|a| a.map_vars(bound, f)).collect(),
            },
            Formula::Not(g) => Formula::not(g.map_vars_in(bound, f)),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.map_vars_in(bound, f)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.map_vars_in(bound, f)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.map_vars_in(bound, f), b.map_vars_in(bound, f)),
            Formula::Iff(a, b) => Formula::iff(a.map_vars_in(bound, f), b.map_vars_in(bound, f)),
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                // Names that renamed free variables may take inside this scope.
                let mut targets = BTreeSet::new();
                for (n, p) in body.free_vars() {
                    if p || !vs.iter().any(|(v, _)| *v == n) {
                        if !p && bound.contains(&n) {
                            continue;
                        }
                        if let Some((m, false)) = f(&n, p) {
                            targets.insert(m);
                        }
                    }
                }
                let mut new_vs = Vec::new();
                let mut renames: BTreeMap<String, String> = BTreeMap::new();
                let taken: BTreeSet<String> = body.all_names();
                for (v, s) in vs {
                    if targets.contains(v) {
                        let fresh = fresh_name(v, &|c: &str| taken.contains(c) || targets.contains(c));
                        renames.insert(v.clone(), fresh.clone());
                        new_vs.push((fresh, s.clone()));
                    } else {
                        new_vs.push((v.clone(), s.clone()));
                    }
                }
                let body = if renames.is_empty() {
                    (**body).clone()
                } else {
                    let vs_set: BTreeSet<String> = renames.keys().cloned().collect();
                    body.map_vars_in(&BTreeSet::new(), &|n, p| {
                        if !p && vs_set.contains(n) {
                            Some((renames[n].clone(), false))
                        } else {
                            None
                        }
                    })
                };
                let mut inner = bound.clone();
                inner.extend(new_vs.iter().map(|(v, _)| v.clone()));
                let body = Box::new(body.map_vars_in(&inner, f));
                match self {
                    Formula::Forall(..) => Formula::Forall(new_vs, body),
                    _ => Formula::Exists(new_vs, body),
                }
            }
        }
    }

    fn all_names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.free_vars().into_iter().map(|(n, _)| n).collect();
        self.visit(&mut |g| {
            if let Formula::Forall(vs, _) | Formula::Exists(vs, _) = g {
                out.extend(vs.iter().map(|(v, _)| v.clone()));
            }
        });
        out
    }

    /// Pre-order traversal of the formula tree.
    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(g) => g.visit(f),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| g.visit(f)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.visit(f),
            _ => {}
        }
    }

    /// `F.ι(vars)`: prime the free unprimed occurrences of the listed variables.
    pub fn prime_vars(&self, vars: &BTreeSet<String>) -> Formula {
        self.map_free_vars(&|n, p| if !p && vars.contains(n) { Some((n.to_string(), true)) } else { None })
    }

    /// Canonical shape used for comparisons: nested conjunctions flattened, `true`
    /// conjuncts dropped, singleton conjunctions and empty quantifiers unwrapped.
    pub fn canonical(&self) -> Formula {
        match self {
            Formula::And(fs) => {
                let mut out = Vec::new();
                for g in fs {
                    match g.canonical() {
                        Formula::True => {}
                        Formula::And(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Formula::True,
                    1 => out.pop().unwrap_or(Formula::True),
                    _ => Formula::And(out),
                }
            }
            Formula::Or(fs) => {
                let mut out = Vec::new();
                for g in fs {
                    match g.canonical() {
                        Formula::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => Formula::False,
                    1 => out.pop().unwrap_or(Formula::False),
                    _ => Formula::Or(out),
                }
            }
            Formula::Not(g) => Formula::not(g.canonical()),
            Formula::Implies(a, b) => Formula::implies(a.canonical(), b.canonical()),
            Formula::Iff(a, b) => Formula::iff(a.canonical(), b.canonical()),
            Formula::Forall(vs, b) if vs.is_empty() => b.canonical(),
            Formula::Exists(vs, b) if vs.is_empty() => b.canonical(),
            Formula::Forall(vs, b) => Formula::forall(vs.clone(), b.canonical()),
            Formula::Exists(vs, b) => Formula::exists(vs.clone(), b.canonical()),
            _ => self.clone(),
        }
    }

    /// Top-level conjuncts after canonicalisation.
    pub fn conjuncts(&self) -> Vec<Formula> {
        match self.canonical() {
            Formula::True => Vec::new(),
            Formula::And(fs) => fs,
            other => alloc::vec![other],
        }
    }

    /// Well-sortedness under a signature and variable context.
    pub fn check(&self, sig: &FopeqSignature, ctx: &dyn Fn(&str, bool) -> Option<Sort>) -> Result<(), FopeqError> {
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Eq(a, b) => {
                let (sa, sb) = (a.sort_in(sig, ctx)?, b.sort_in(sig, ctx)?);
                if sa != sb {
                    return Err(FopeqError::Sort(format!("equality between {sa} and {sb}")));
                }
                Ok(())
            }
            Formula::Cmp(op, a, b) => {
                for t in [a, b] {
                    let s = t.sort_in(sig, ctx)?;
                    if s != Sort::Int {
                        return Err(FopeqError::Sort(format!("operand of `{}` has sort {s}", op.symbol())));
                    }
                }
                Ok(())
            }
            Formula::Pred { name, args } => {
                let p = sig.preds.get(name).ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?;
                if p.len() != args.len() {
                    return Err(FopeqError::Sort(format!("`{name}` expects {} arguments", p.len())));
                }
                for (a, s) in args.iter().zip(p) {
                    if &a.sort_in(sig, ctx)? != s {
                        return Err(FopeqError::Sort(format!("argument of `{name}` has the wrong sort")));
                    }
                }
                Ok(())
            }
            Formula::Not(g) => g.check(sig, ctx),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().try_for_each(|g| g.check(sig, ctx)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.check(sig, ctx)?;
                b.check(sig, ctx)
            }
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                for (_, s) in vs {
                    if !sig.has_sort(s) {
                        return Err(FopeqError::UnknownSort(s.to_string()));
                    }
                }
                let inner = |n: &str, p: bool| -> Option<Sort> {
                    if !p {
                        if let Some((_, s)) = vs.iter().rev().find(|(v, _)| v == n) {
                            return Some(s.clone());
                        }
                    }
                    ctx(n, p)
                };
                body.check(sig, &inner)
            }
        }
    }

    /// Operation and predicate names used by the formula.
    pub fn symbols(&self) -> BTreeSet<String> {
        fn term_syms(t: &Term, out: &mut BTreeSet<String>) {
            match t {
                Term::Op { name, args } => {
                    out.insert(name.clone());
                    args.iter().for_each(|a| term_syms(a, out));
                }
                Term::Arith(_, a, b) => {
                    term_syms(a, out);
                    term_syms(b, out);
                }
                _ => {}
            }
        }
        let mut out = BTreeSet::new();
        self.visit(&mut |g| match g {
            Formula::Eq(a, b) | Formula::Cmp(_, a, b) => {
                term_syms(a, &mut out);
                term_syms(b, &mut out);
            }
            Formula::Pred { name, args } => {
                out.insert(name.clone());
                args.iter().for_each(|a| term_syms(a, &mut out));
            }
            _ => {}
        });
        out
    }
}

/// A name derived from `base` for which `taken` is false.
pub(crate) fn fresh_name(base: &str, taken: &dyn Fn(&str) -> bool) -> String {
    let mut k = 1;
    loop {
        let candidate = format!("{base}_{k}");
        if !taken(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_skip_bound_names() {
        let f = Formula::exists(
            alloc::vec![("p".into(), Sort::Int)],
            Formula::And(alloc::vec![
                Formula::gt(Term::var("p"), Term::Int(0)),
                Formula::eq(Term::primed("x"), Term::var("p")),
            ]),
        );
        let fv = f.free_vars();
        assert_eq!(fv.len(), 1);
        assert!(fv.contains(&("x".into(), true)));
    }

    #[test]
    fn renaming_avoids_capture() {
        // ∃p. x = p   with x ↦ p must not capture.
        let f = Formula::exists(alloc::vec![("p".into(), Sort::Int)], Formula::eq(Term::var("x"), Term::var("p")));
        let g = f.map_free_vars(&|n, pr| (n == "x").then(|| ("p".to_string(), pr)));
        match &g {
            Formula::Exists(vs, body) => {
                assert_ne!(vs[0].0, "p");
                assert_eq!(**body, Formula::eq(Term::var("p"), Term::var(&vs[0].0)));
            }
            _ => panic!("shape changed"),
        }
    }

    #[test]
    fn priming_only_touches_listed_free_vars() {
        let f = Formula::And(alloc::vec![
            Formula::le(Term::var("n"), Term::constant("d")),
            Formula::forall(alloc::vec![("n".into(), Sort::Int)], Formula::ge(Term::var("n"), Term::var("m"))),
        ]);
        let vars: BTreeSet<String> = ["n".to_string(), "m".to_string()].into_iter().collect();
        let g = f.prime_vars(&vars);
        let expected = Formula::And(alloc::vec![
            Formula::le(Term::primed("n"), Term::constant("d")),
            Formula::forall(alloc::vec![("n".into(), Sort::Int)], Formula::ge(Term::var("n"), Term::primed("m"))),
        ]);
        assert_eq!(g, expected);
    }

    #[test]
    fn canonical_flattens_conjunctions() {
        let a = Formula::lt(Term::var("n"), Term::constant("d"));
        let b = Formula::eq(Term::primed("n"), Term::add(Term::var("n"), Term::Int(1)));
        let f = Formula::And(alloc::vec![Formula::And(alloc::vec![a.clone()]), Formula::And(alloc::vec![]), Formula::And(alloc::vec![b.clone()])]);
        assert_eq!(f.canonical(), Formula::And(alloc::vec![a, b]));
    }

    #[test]
    fn sort_checking_rejects_mixed_equality() {
        let sig = FopeqSignature::new().with_op("d", alloc::vec![], Sort::Int);
        let ctx = |n: &str, _| (n == "y").then_some(Sort::Bool);
        assert!(Formula::eq(Term::var("y"), Term::constant("d")).check(&sig, &ctx).is_err());
        assert!(Formula::eq(Term::var("y"), Term::Bool(false)).check(&sig, &ctx).is_ok());
    }
}
