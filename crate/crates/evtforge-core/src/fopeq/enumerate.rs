use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{eval_formula, Algebra, FopeqError, FopeqSignature, Formula, Sort, Valuation, Value};

/// Finite bounds under which model classes are realised.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// `Int` is `-int_bound..=int_bound`.
    pub int_bound: i64,
    /// Carrier sizes for user sorts. Unlisted sorts get as many elements as they have
    /// constants, or 2 if they have none.
    pub carriers: BTreeMap<String, u32>,
    /// Fixed values for constants (`Bool` uses `0`/`1`, user sorts an element index).
    pub pins: BTreeMap<String, i64>,
    /// Largest number of candidate algebras or model components we are willing to build.
    pub ceiling: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { int_bound: 3, carriers: BTreeMap::new(), pins: BTreeMap::new(), ceiling: 1 << 20 }
    }
}

impl Bounds {
    pub fn with_bound(int_bound: i64) -> Self {
        Bounds { int_bound, ..Default::default() }
    }

    pub fn pin(mut self, name: &str, v: i64) -> Self {
        self.pins.insert(name.into(), v);
        self
    }

    pub fn carrier_size(&self, sig: &FopeqSignature, sort: &str) -> u32 {
        if let Some(n) = self.carriers.get(sort) {
            return *n;
        }
        let consts =
            sig.ops.values().filter(|p| p.args.is_empty() && p.result == Sort::User(sort.into())).count() as u32;
        if consts == 0 {
            2
        } else {
            consts
        }
    }

    fn pinned(&self, name: &str, sort: &Sort) -> Option<Value> {
        let v = *self.pins.get(name)?;
        Some(match sort {
            Sort::Int => Value::Int(v),
            Sort::Bool => Value::Bool(v != 0),
            Sort::User(_) => Value::Elem(v as u32),
        })
    }
}

/// One free table position and its candidate values.
struct Cell {
    sym: String,
    args: Vec<Value>,
    candidates: Vec<Value>,
    pred: bool,
}

/// Enumerates all algebras over `sig` extending `fixed` (symbols it interprets stay put)
/// whose remaining constants, ops and predicates range over all tables, keeping those
/// that satisfy every closed axiom. The order is deterministic.
pub fn enumerate_algebras(
    sig: &FopeqSignature,
    bounds: &Bounds,
    fixed: &Algebra,
    axioms: &[Formula],
) -> Result<Vec<Algebra>, FopeqError> {
    let mut base = fixed.clone();
    base.int_bound = bounds.int_bound.max(0);
    for s in &sig.sorts {
        base.carriers.entry(s.clone()).or_insert_with(|| bounds.carrier_size(sig, s));
    }
    let mut cells: Vec<Cell> = Vec::new();
    for (name, p) in &sig.ops {
        if base.ops.contains_key(name) {
            continue;
        }
        let result = base.carrier(&p.result)?;
        let pinned = if p.args.is_empty() { bounds.pinned(name, &p.result) } else { None };
        if let Some(v) = pinned {
            if !base.in_carrier(&p.result, v) {
                return Err(FopeqError::Refused(format!("pinned value {v} of `{name}` is outside its carrier")));
            }
        }
        base.ops.insert(name.clone(), BTreeMap::new());
        for args in tuples(&base, &p.args)? {
            let candidates = match pinned {
                Some(v) => alloc::vec![v],
                None => result.clone(),
            };
            cells.push(Cell { sym: name.clone(), args, candidates, pred: false });
        }
    }
    for (name, p) in &sig.preds {
        if base.preds.contains_key(name) {
            continue;
        }
        base.preds.insert(name.clone(), BTreeSet::new());
        for args in tuples(&base, p)? {
            cells.push(Cell {
                sym: name.clone(),
                args,
                candidates: alloc::vec![Value::Bool(false), Value::Bool(true)],
                pred: true,
            });
        }
    }
    let mut total: u64 = 1;
    for c in &cells {
        total = total.saturating_mul(c.candidates.len() as u64);
        if total > bounds.ceiling {
            return Err(FopeqError::Refused(format!(
                "more than {} candidate algebras (free symbol `{}`); pin constants or shrink carriers",
                bounds.ceiling, c.sym
            )));
        }
    }
    let mut out = Vec::new();
    if cells.iter().any(|c| c.candidates.is_empty()) {
        return Ok(out);
    }
    let mut idx = alloc::vec![0usize; cells.len()];
    loop {
        let mut a = base.clone();
        for (c, &i) in cells.iter().zip(&idx) {
            let v = c.candidates[i];
            if c.pred {
                if v == Value::Bool(true) {
                    a.preds.get_mut(&c.sym).map(|r| r.insert(c.args.clone()));
                }
            } else {
                a.ops.get_mut(&c.sym).map(|t| t.insert(c.args.clone(), v));
            }
        }
        let mut ok = true;
        for ax in axioms {
            if !eval_formula(ax, &a, &Valuation::new())? {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(a);
        }
        let mut k = cells.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < cells[k].candidates.len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// All argument tuples over the given sorts.
pub(crate) fn tuples(a: &Algebra, sorts: &[Sort]) -> Result<Vec<Vec<Value>>, FopeqError> {
    let mut out: Vec<Vec<Value>> = alloc::vec![Vec::new()];
    for s in sorts {
        let c = a.carrier(s)?;
        out = out.into_iter().flat_map(|t| c.iter().map(move |v| {
            let mut t = t.clone();
            t.push(*v);
            t
        })).collect();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fopeq::Term;

    #[test]
    fn constant_filtered_by_axioms() {
        let sig = FopeqSignature::new().with_op("d", alloc::vec![], Sort::Int);
        let axioms = [Formula::gt(Term::constant("d"), Term::Int(0)), Formula::le(Term::constant("d"), Term::Int(3))];
        let algs = enumerate_algebras(&sig, &Bounds::default(), &Algebra::empty(3), &axioms).unwrap();
        let ds: Vec<_> = algs.iter().map(|a| a.constant("d").unwrap()).collect();
        // oracle: brute force over −3..3
        let expect: Vec<_> = (-3..=3).filter(|d| *d > 0 && *d <= 3).map(Value::Int).collect();
        assert_eq!(ds, expect);
    }

    #[test]
    fn no_free_symbols_gives_one_algebra() {
        let algs = enumerate_algebras(&FopeqSignature::new(), &Bounds::default(), &Algebra::empty(3), &[]).unwrap();
        assert_eq!(algs.len(), 1);
    }

    #[test]
    fn colour_axioms_leave_two_assignments() {
        let sig = FopeqSignature::new()
            .with_sort("Color")
            .with_op("red", alloc::vec![], Sort::user("Color"))
            .with_op("green", alloc::vec![], Sort::user("Color"));
        let exhaust = Formula::forall(
            alloc::vec![("x".into(), Sort::user("Color"))],
            Formula::Or(alloc::vec![
                Formula::eq(Term::var("x"), Term::constant("green")),
                Formula::eq(Term::var("x"), Term::constant("red")),
            ]),
        );
        let axioms = [exhaust, Formula::neq(Term::constant("green"), Term::constant("red"))];
        let algs = enumerate_algebras(&sig, &Bounds::default(), &Algebra::empty(3), &axioms).unwrap();
        assert_eq!(algs.len(), 2);
    }

    #[test]
    fn pins_fix_constants() {
        let sig = FopeqSignature::new().with_op("d", alloc::vec![], Sort::Int);
        let algs = enumerate_algebras(&sig, &Bounds::default().pin("d", 2), &Algebra::empty(3), &[]).unwrap();
        assert_eq!(algs.len(), 1);
        assert_eq!(algs[0].constant("d"), Some(Value::Int(2)));
    }

    #[test]
    fn oversized_spaces_are_refused() {
        let sig = FopeqSignature::new().with_op("f", alloc::vec![Sort::Int, Sort::Int], Sort::Int);
        let r = enumerate_algebras(&sig, &Bounds::default(), &Algebra::empty(3), &[]);
        assert!(matches!(r, Err(FopeqError::Refused(_))));
    }
}
