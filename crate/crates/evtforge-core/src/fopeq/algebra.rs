use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{ArithOp, FopeqError, FopeqMorphism, FopeqSignature, Formula, Sort, Term};

/// A carrier value. User-sort elements are indices into their carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Elem(u32),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Bool(true) => f.write_str("TRUE"),
            Value::Bool(false) => f.write_str("FALSE"),
            Value::Elem(e) => write!(f, "#{e}"),
        }
    }
}

/// Variable assignment keyed by `(name, primed)`.
pub type Valuation = BTreeMap<(String, bool), Value>;

/// A finite algebra: user carriers `0..n`, op tables (possibly partial) and predicate
/// extensions. `Int` is `-int_bound..=int_bound` and `Bool` is `{false, true}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Algebra {
    pub int_bound: i64,
    pub carriers: BTreeMap<String, u32>,
    pub ops: BTreeMap<String, BTreeMap<Vec<Value>, Value>>,
    pub preds: BTreeMap<String, BTreeSet<Vec<Value>>>,
}

impl Algebra {
    /// The algebra with no user symbols.
    pub fn empty(int_bound: i64) -> Self {
        Algebra { int_bound, ..Default::default() }
    }

    pub fn carrier(&self, sort: &Sort) -> Result<Vec<Value>, FopeqError> {
        Ok(match sort {
            Sort::Int => (-self.int_bound..=self.int_bound).map(Value::Int).collect(),
            Sort::Bool => alloc::vec![Value::Bool(false), Value::Bool(true)],
            Sort::User(s) => {
                let n = self.carriers.get(s).ok_or_else(|| FopeqError::UnknownSort(s.clone()))?;
                (0..*n).map(Value::Elem).collect()
            }
        })
    }

    pub fn in_carrier(&self, sort: &Sort, v: Value) -> bool {
        match (sort, v) {
            (Sort::Int, Value::Int(i)) => i.abs() <= self.int_bound,
            (Sort::Bool, Value::Bool(_)) => true,
            (Sort::User(s), Value::Elem(e)) => self.carriers.get(s).is_some_and(|n| e < *n),
            _ => false,
        }
    }

    /// Value of a constant, if interpreted.
    pub fn constant(&self, name: &str) -> Option<Value> {
        self.ops.get(name).and_then(|t| t.get(&Vec::new()).copied())
    }

    /// Checks that every interpreted value lies in the declared carrier.
    pub fn validate(&self, sig: &FopeqSignature) -> Result<(), FopeqError> {
        for s in &sig.sorts {
            if !self.carriers.contains_key(s) {
                return Err(FopeqError::UnknownSort(s.clone()));
            }
        }
        for (name, p) in &sig.ops {
            let table = self.ops.get(name).ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?;
            for (args, v) in table {
                let ok = args.len() == p.args.len()
                    && args.iter().zip(&p.args).all(|(a, s)| self.in_carrier(s, *a))
                    && self.in_carrier(&p.result, *v);
                if !ok {
                    return Err(FopeqError::Sort(format!("table of `{name}` leaves its carriers")));
                }
            }
        }
        for (name, p) in &sig.preds {
            let rel = self.preds.get(name).ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?;
            for args in rel {
                if args.len() != p.len() || !args.iter().zip(p).all(|(a, s)| self.in_carrier(s, *a)) {
                    return Err(FopeqError::Sort(format!("extension of `{name}` leaves its carriers")));
                }
            }
        }
        Ok(())
    }

    /// `A|σ`: the reduct along a morphism into this algebra's signature.
    pub fn reduct(&self, m: &FopeqMorphism) -> Result<Algebra, FopeqError> {
        let mut out = Algebra::empty(self.int_bound);
        for s in &m.source.sorts {
            let t = m.sorts.get(s).ok_or_else(|| FopeqError::UnknownSort(s.clone()))?;
            let n = self.carriers.get(t).ok_or_else(|| FopeqError::UnknownSort(t.clone()))?;
            out.carriers.insert(s.clone(), *n);
        }
        for o in m.source.ops.keys() {
            let t = m.ops.get(o).ok_or_else(|| FopeqError::UnknownSymbol(o.clone()))?;
            let table = self.ops.get(t).ok_or_else(|| FopeqError::UnknownSymbol(t.clone()))?;
            out.ops.insert(o.clone(), table.clone());
        }
        for p in m.source.preds.keys() {
            let t = m.preds.get(p).ok_or_else(|| FopeqError::UnknownSymbol(p.clone()))?;
            let rel = self.preds.get(t).ok_or_else(|| FopeqError::UnknownSymbol(t.clone()))?;
            out.preds.insert(p.clone(), rel.clone());
        }
        Ok(out)
    }

    /// Restriction to the symbols of a sub-signature (reduct along the inclusion).
    pub fn restrict(&self, sig: &FopeqSignature) -> Algebra {
        Algebra {
            int_bound: self.int_bound,
            carriers: self.carriers.iter().filter(|(k, _)| sig.sorts.contains(*k)).map(|(k, v)| (k.clone(), *v)).collect(),
            ops: self.ops.iter().filter(|(k, _)| sig.ops.contains_key(*k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
            preds: self.preds.iter().filter(|(k, _)| sig.preds.contains_key(*k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    /// Whether two algebras agree on every symbol they both interpret.
    pub fn compatible(&self, other: &Algebra) -> bool {
        self.int_bound == other.int_bound
            && self.carriers.iter().all(|(k, v)| other.carriers.get(k).is_none_or(|w| w == v))
            && self.ops.iter().all(|(k, v)| other.ops.get(k).is_none_or(|w| w == v))
            && self.preds.iter().all(|(k, v)| other.preds.get(k).is_none_or(|w| w == v))
    }

    /// Union of two compatible algebras.
    pub fn merge(&self, other: &Algebra) -> Option<Algebra> {
        if !self.compatible(other) {
            return None;
        }
        let mut out = self.clone();
        out.carriers.extend(other.carriers.iter().map(|(k, v)| (k.clone(), *v)));
        out.ops.extend(other.ops.iter().map(|(k, v)| (k.clone(), v.clone())));
        out.preds.extend(other.preds.iter().map(|(k, v)| (k.clone(), v.clone())));
        Some(out)
    }

    /// Short deterministic description, e.g. `d=2, Color:2, green=#0, red=#1`.
    pub fn label(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (s, n) in &self.carriers {
            parts.push(format!("{s}:{n}"));
        }
        for (o, table) in &self.ops {
            match table.get(&Vec::new()) {
                Some(v) if table.len() == 1 => parts.push(format!("{o}={v}")),
                _ => {
                    let cells: Vec<String> = table
                        .iter()
                        .map(|(a, v)| format!("{}->{v}", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")))
                        .collect();
                    parts.push(format!("{o}=[{}]", cells.join("; ")));
                }
            }
        }
        for (p, rel) in &self.preds {
            let cells: Vec<String> =
                rel.iter().map(|a| format!("({})", a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))).collect();
            parts.push(format!("{p}={{{}}}", cells.join(",")));
        }
        if parts.is_empty() {
            "∅".to_string()
        } else {
            parts.join(", ")
        }
    }
}

fn int_of(v: Value) -> Result<i64, FopeqError> {
    match v {
        Value::Int(i) => Ok(i),
        other => Err(FopeqError::Sort(format!("expected an integer, got {other}"))),
    }
}

/// Applies built-in arithmetic, returning `None` outside `-bound..=bound`.
pub(crate) fn arith(op: ArithOp, a: i64, b: i64, bound: i64) -> Option<i64> {
    let r = match op {
        ArithOp::Add => a.checked_add(b)?,
        ArithOp::Sub => a.checked_sub(b)?,
        ArithOp::Mul => a.checked_mul(b)?,
    };
    (r.abs() <= bound).then_some(r)
}

/// Evaluates a term. `Ok(None)` is an undefined value (strictly propagated); `Err` is a
/// structural problem such as an unbound variable or an uninterpreted symbol.
pub fn eval_term(t: &Term, a: &Algebra, val: &Valuation) -> Result<Option<Value>, FopeqError> {
    match t {
        Term::Var { name, primed } => val
            .get(&(name.clone(), *primed))
            .copied()
            .map(Some)
            .ok_or_else(|| FopeqError::MissingBinding(super::var_display(name, *primed))),
        Term::Op { name, args } => {
            let table = a.ops.get(name).ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?;
            let mut vs = Vec::with_capacity(args.len());
            let mut defined = true;
            for x in args {
                match eval_term(x, a, val)? {
                    Some(v) => vs.push(v),
                    None => defined = false,
                }
            }
            Ok(if defined { table.get(&vs).copied() } else { None })
        }
        Term::Int(i) => Ok((i.abs() <= a.int_bound).then_some(Value::Int(*i))),
        Term::Bool(b) => Ok(Some(Value::Bool(*b))),
        Term::Arith(op, x, y) => {
            let (vx, vy) = (eval_term(x, a, val)?, eval_term(y, a, val)?);
            match (vx, vy) {
                (Some(vx), Some(vy)) => Ok(arith(*op, int_of(vx)?, int_of(vy)?, a.int_bound).map(Value::Int)),
                _ => Ok(None),
            }
        }
    }
}

/// Classical evaluation with definedness-strict atoms: an atom mentioning an undefined
/// term is false. Quantifiers range over the finite carriers of `a`.
pub fn eval_formula(f: &Formula, a: &Algebra, val: &Valuation) -> Result<bool, FopeqError> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(x, y) => match (eval_term(x, a, val)?, eval_term(y, a, val)?) {
            (Some(vx), Some(vy)) => vx == vy,
            _ => false,
        },
        Formula::Cmp(op, x, y) => match (eval_term(x, a, val)?, eval_term(y, a, val)?) {
            (Some(vx), Some(vy)) => op.holds(int_of(vx)?, int_of(vy)?),
            _ => false,
        },
        Formula::Pred { name, args } => {
            let rel = a.preds.get(name).ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?;
            let mut vs = Vec::with_capacity(args.len());
            for x in args {
                match eval_term(x, a, val)? {
                    Some(v) => vs.push(v),
                    None => return Ok(false),
                }
            }
            rel.contains(&vs)
        }
        Formula::Not(g) => !eval_formula(g, a, val)?,
        Formula::And(fs) => {
            for g in fs {
                if !eval_formula(g, a, val)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval_formula(g, a, val)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Implies(x, y) => !eval_formula(x, a, val)? || eval_formula(y, a, val)?,
        Formula::Iff(x, y) => eval_formula(x, a, val)? == eval_formula(y, a, val)?,
        Formula::Forall(vs, body) => quantify(vs, body, a, val, true)?,
        Formula::Exists(vs, body) => quantify(vs, body, a, val, false)?,
    })
}

fn quantify(vs: &[(String, Sort)], body: &Formula, a: &Algebra, val: &Valuation, universal: bool) -> Result<bool, FopeqError> {
    let carriers = vs.iter().map(|(_, s)| a.carrier(s)).collect::<Result<Vec<_>, _>>()?;
    if carriers.iter().any(|c| c.is_empty()) {
        return Ok(universal);
    }
    let mut idx = alloc::vec![0usize; vs.len()];
    let mut env = val.clone();
    loop {
        for (k, (name, _)) in vs.iter().enumerate() {
            env.insert((name.clone(), false), carriers[k][idx[k]]);
        }
        let b = eval_formula(body, a, &env)?;
        if b != universal {
            return Ok(!universal);
        }
        // odometer step
        let mut k = vs.len();
        loop {
            if k == 0 {
                return Ok(universal);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < carriers[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
