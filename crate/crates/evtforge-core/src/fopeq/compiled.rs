//! Slot-compiled formulas for the inner loops of model search.
//!
//! Variables are resolved to slot indices once; constants and op tables are looked up
//! ahead of time. Evaluation never fails: structural problems are reported at compile
//! time and undefined values follow the same strict-atom rule as [`super::eval_formula`].

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::algebra::arith;
use super::{ArithOp, CmpOp, FopeqError, Formula, Term, Value};
use super::Algebra;

#[derive(Clone, Debug)]
enum CTerm {
    Slot(usize),
    Val(Option<Value>),
    Op(Box<BTreeMap<Vec<Value>, Value>>, Vec<CTerm>),
    Arith(ArithOp, Box<CTerm>, Box<CTerm>),
}

#[derive(Clone, Debug)]
enum CFormula {
    Const(bool),
    Eq(CTerm, CTerm),
    Cmp(CmpOp, CTerm, CTerm),
    Pred(Box<BTreeSet<Vec<Value>>>, Vec<CTerm>),
    Not(Box<CFormula>),
    And(Vec<CFormula>),
    Or(Vec<CFormula>),
    Implies(Box<CFormula>, Box<CFormula>),
    Iff(Box<CFormula>, Box<CFormula>),
    Quant { universal: bool, slots: Vec<usize>, domains: Vec<Vec<Value>>, body: Box<CFormula> },
}

/// A compiled formula together with the slots it reads and the scratch width it needs.
#[derive(Clone, Debug)]
pub struct Program {
    formula: CFormula,
    bound: i64,
    /// Free-variable slots read by the formula, sorted.
    pub reads: Vec<usize>,
    /// Minimum length of the environment passed to [`Program::eval`].
    pub width: usize,
}

struct Compiler<'a> {
    alg: &'a Algebra,
    slot_of: &'a dyn Fn(&str, bool) -> Option<usize>,
    scope: Vec<(String, usize)>,
    next: usize,
    width: usize,
    reads: BTreeSet<usize>,
}

impl Compiler<'_> {
    fn term(&mut self, t: &Term) -> Result<CTerm, FopeqError> {
        Ok(match t {
            Term::Var { name, primed } => {
                if !*primed {
                    if let Some((_, s)) = self.scope.iter().rev().find(|(n, _)| n == name) {
                        return Ok(CTerm::Slot(*s));
                    }
                }
                let s = (self.slot_of)(name, *primed)
                    .ok_or_else(|| FopeqError::MissingBinding(super::var_display(name, *primed)))?;
                self.reads.insert(s);
                CTerm::Slot(s)
            }
            Term::Op { name, args } => {
                let table = self.alg.ops.get(name).ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?;
                if args.is_empty() {
                    CTerm::Val(table.get(&Vec::new()).copied())
                } else {
                    let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                    CTerm::Op(Box::new(table.clone()), args)
                }
            }
            Term::Int(i) => CTerm::Val((i.abs() <= self.alg.int_bound).then_some(Value::Int(*i))),
            Term::Bool(b) => CTerm::Val(Some(Value::Bool(*b))),
            Term::Arith(op, a, b) => CTerm::Arith(*op, Box::new(self.term(a)?), Box::new(self.term(b)?)),
        })
    }

    fn formula(&mut self, f: &Formula) -> Result<CFormula, FopeqError> {
        Ok(match f {
            Formula::True => CFormula::Const(true),
            Formula::False => CFormula::Const(false),
            Formula::Eq(a, b) => CFormula::Eq(self.term(a)?, self.term(b)?),
            Formula::Cmp(op, a, b) => CFormula::Cmp(*op, self.term(a)?, self.term(b)?),
            Formula::Pred { name, args } => {
                let rel = self.alg.preds.get(name).ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?;
                let args = args.iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                CFormula::Pred(Box::new(rel.clone()), args)
            }
            Formula::Not(g) => CFormula::Not(Box::new(self.formula(g)?)),
            Formula::And(fs) => CFormula::And(fs.iter().map(|g| self.formula(g)).collect::<Result<_, _>>()?),
            Formula::Or(fs) => CFormula::Or(fs.iter().map(|g| self.formula(g)).collect::<Result<_, _>>()?),
            Formula::Implies(a, b) => CFormula::Implies(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Iff(a, b) => CFormula::Iff(Box::new(self.formula(a)?), Box::new(self.formula(b)?)),
            Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
                let mut slots = Vec::new();
                let mut domains = Vec::new();
                let depth = self.scope.len();
                for (v, s) in vs {
                    let slot = self.next;
                    self.next += 1;
                    self.width = self.width.max(self.next);
                    slots.push(slot);
                    domains.push(self.alg.carrier(s)?);
                    self.scope.push((v.clone(), slot));
                }
                let body = Box::new(self.formula(body)?);
                self.scope.truncate(depth);
                self.next -= vs.len();
                CFormula::Quant { universal: matches!(f, Formula::Forall(..)), slots, domains, body }
            }
        })
    }
}

impl Program {
    /// Compiles `f` over `alg`. Free variables are resolved through `slot_of`; bound
    /// variables get scratch slots starting at `base`.
    pub fn compile(
        f: &Formula,
        alg: &Algebra,
        slot_of: &dyn Fn(&str, bool) -> Option<usize>,
        base: usize,
    ) -> Result<Program, FopeqError> {
        let mut c = Compiler { alg, slot_of, scope: Vec::new(), next: base, width: base, reads: BTreeSet::new() };
        let formula = c.formula(f)?;
        let width = c.width.max(c.reads.iter().next_back().map_or(0, |m| m + 1));
        Ok(Program { formula, bound: alg.int_bound, reads: c.reads.into_iter().collect(), width })
    }

    pub fn eval(&self, env: &mut [Value]) -> bool {
        eval_fb(&self.formula, env, self.bound)
    }
}

fn eval_t(t: &CTerm, env: &[Value], bound: i64) -> Option<Value> {
    match t {
        CTerm::Slot(s) => Some(env[*s]),
        CTerm::Val(v) => *v,
        CTerm::Op(table, args) => {
            let mut vs = Vec::with_capacity(args.len());
            for a in args {
                vs.push(eval_t(a, env, bound)?);
            }
            table.get(&vs).copied()
        }
        CTerm::Arith(op, a, b) => match (eval_t(a, env, bound)?, eval_t(b, env, bound)?) {
            (Value::Int(x), Value::Int(y)) => arith(*op, x, y, bound).map(Value::Int),
            _ => None,
        },
    }
}

fn eval_fb(f: &CFormula, env: &mut [Value], bound: i64) -> bool {
    match f {
        CFormula::Const(b) => *b,
        CFormula::Eq(a, b) => match (eval_t(a, env, bound), eval_t(b, env, bound)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
        CFormula::Cmp(op, a, b) => match (eval_t(a, env, bound), eval_t(b, env, bound)) {
            (Some(Value::Int(x)), Some(Value::Int(y))) => op.holds(x, y),
            _ => false,
        },
        CFormula::Pred(rel, args) => {
            let mut vs = Vec::with_capacity(args.len());
            for a in args {
                match eval_t(a, env, bound) {
                    Some(v) => vs.push(v),
                    None => return false,
                }
            }
            rel.contains(&vs)
        }
        CFormula::Not(g) => !eval_fb(g, env, bound),
        CFormula::And(fs) => fs.iter().all(|g| eval_fb(g, env, bound)),
        CFormula::Or(fs) => fs.iter().any(|g| eval_fb(g, env, bound)),
        CFormula::Implies(a, b) => !eval_fb(a, env, bound) || eval_fb(b, env, bound),
        CFormula::Iff(a, b) => eval_fb(a, env, bound) == eval_fb(b, env, bound),
        CFormula::Quant { universal, slots, domains, body } => {
            if domains.iter().any(|d| d.is_empty()) {
                return *universal;
            }
            let mut idx = alloc::vec![0usize; slots.len()];
            loop {
                for (k, s) in slots.iter().enumerate() {
                    env[*s] = domains[k][idx[k]];
                }
                if eval_fb(body, env, bound) != *universal {
                    return !*universal;
                }
                let mut k = slots.len();
                loop {
                    if k == 0 {
                        return *universal;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < domains[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
    }
}
