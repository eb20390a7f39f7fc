//! Backtracking enumeration of the states and state pairs satisfying a set of constraints.
//!
//! Each constraint is split into its top-level conjuncts, every conjunct is compiled to a
//! check over state slots, and slots are assigned in a greedy order that completes checks
//! as early as possible so that failing prefixes are cut off.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::model::{init_restrict, State};
use super::{EvtError, EvtSignature};
use crate::fopeq::{Algebra, Formula, Program, Value};

/// A constraint on an event's before/after states (or on initial states).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Constraint {
    Sentence(Formula),
    /// The projection onto `cols` (variable, primed) must be one of `rows`.
    Table { cols: Vec<(String, bool)>, rows: BTreeSet<Vec<Value>> },
}

enum Check {
    Prog(Program),
    Table { cols: Vec<usize>, rows: BTreeSet<Vec<Value>> },
}

impl Check {
    fn reads(&self) -> &[usize] {
        match self {
            Check::Prog(p) => &p.reads,
            Check::Table { cols, .. } => cols,
        }
    }

    fn holds(&self, env: &mut [Value], scratch: &mut Vec<Value>) -> bool {
        match self {
            Check::Prog(p) => p.eval(env),
            Check::Table { cols, rows } => {
                scratch.clear();
                scratch.extend(cols.iter().map(|c| env[*c]));
                rows.contains(scratch)
            }
        }
    }
}

/// All assignments to `domains.len()` slots passing every check.
fn solve(domains: &[Vec<Value>], checks: &[Check], ceiling: u64) -> Result<Vec<Vec<Value>>, EvtError> {
    let n = domains.len();
    let width = checks.iter().map(|c| if let Check::Prog(p) = c { p.width } else { 0 }).max().unwrap_or(0).max(n);
    let mut env: Vec<Value> = alloc::vec![Value::Int(0); width];
    let mut scratch = Vec::new();

    // Checks reading no slot are decided once.
    for c in checks.iter().filter(|c| c.reads().is_empty()) {
        if !c.holds(&mut env, &mut scratch) {
            return Ok(Vec::new());
        }
    }
    if domains.iter().any(|d| d.is_empty()) {
        return Ok(Vec::new());
    }

    // Greedy variable order.
    let live: Vec<&Check> = checks.iter().filter(|c| !c.reads().is_empty()).collect();
    let mut assigned = alloc::vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in (0..n).filter(|v| !assigned[*v]) {
            let mut completes = 0;
            let mut mentions = 0;
            for c in &live {
                let r = c.reads();
                if r.contains(&v) {
                    mentions += 1;
                    if r.iter().all(|s| *s == v || assigned[*s]) {
                        completes += 1;
                    }
                }
            }
            let better = match best {
                None => true,
                Some((_, bc, bm)) => (completes, mentions) > (bc, bm),
            };
            if better {
                best = Some((v, completes, mentions));
            }
        }
        let (v, _, _) = best.expect("an unassigned slot remains");
        assigned[v] = true;
        order.push(v);
    }
    let mut pos = alloc::vec![0usize; n];
    for (i, v) in order.iter().enumerate() {
        pos[*v] = i;
    }
    let mut at_depth: Vec<Vec<&Check>> = (0..n).map(|_| Vec::new()).collect();
    for c in live {
        let d = c.reads().iter().map(|s| pos[*s]).max().unwrap_or(0);
        at_depth[d].push(c);
    }

    let mut out: Vec<Vec<Value>> = Vec::new();
    let mut idx = alloc::vec![0usize; n];
    let mut depth = 0usize;
    // Iterative depth-first search; `idx[d]` is the next candidate at depth `d`.
    loop {
        if depth == n {
            out.push(env[..n].to_vec());
            if out.len() as u64 > ceiling {
                return Err(EvtError::Refused(format!("more than {ceiling} solutions; raise the ceiling or tighten bounds")));
            }
            if n == 0 {
                return Ok(out);
            }
            depth -= 1;
            continue;
        }
        let slot = order[depth];
        if idx[depth] >= domains[slot].len() {
            idx[depth] = 0;
            if depth == 0 {
                return Ok(out);
            }
            depth -= 1;
            continue;
        }
        env[slot] = domains[slot][idx[depth]];
        idx[depth] += 1;
        if at_depth[depth].iter().all(|c| c.holds(&mut env, &mut scratch)) {
            depth += 1;
        }
    }
}

fn compile_checks(
    constraints: &[Constraint],
    alg: &Algebra,
    slot_of: &dyn Fn(&str, bool) -> Option<usize>,
    base: usize,
    restrict: Option<&EvtSignature>,
) -> Result<Vec<Check>, EvtError> {
    let mut checks = Vec::new();
    for c in constraints {
        match c {
            Constraint::Sentence(f) => {
                let f = match restrict {
                    Some(sig) => init_restrict(f, sig),
                    None => f.clone(),
                };
                for conj in f.conjuncts() {
                    checks.push(Check::Prog(Program::compile(&conj, alg, slot_of, base)?));
                }
            }
            Constraint::Table { cols, rows } => {
                let cols = cols
                    .iter()
                    .map(|(v, p)| {
                        slot_of(v, *p).ok_or_else(|| EvtError::UnknownVariable(crate::fopeq::var_display(v, *p)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                checks.push(Check::Table { cols, rows: rows.clone() });
            }
        }
    }
    Ok(checks)
}

fn carriers(sig: &EvtSignature, alg: &Algebra) -> Result<Vec<Vec<Value>>, EvtError> {
    sig.vars.values().map(|s| alg.carrier(s).map_err(EvtError::from)).collect()
}

/// Maximal set of initial states: every after-state satisfying the constraints, with
/// sentences read under the `Init` restriction (see [`init_restrict`]).
pub fn solve_init(
    sig: &EvtSignature,
    alg: &Algebra,
    constraints: &[Constraint],
    ceiling: u64,
) -> Result<BTreeSet<State>, EvtError> {
    let names: Vec<&String> = sig.vars.keys().collect();
    let slot_of = |n: &str, p: bool| if p { names.iter().position(|v| v.as_str() == n) } else { None };
    let checks = compile_checks(constraints, alg, &slot_of, names.len(), Some(sig))?;
    Ok(solve(&carriers(sig, alg)?, &checks, ceiling)?.into_iter().collect())
}

/// Maximal relation of a non-`Init` event: all `(s, s′)` satisfying the constraints.
pub fn solve_event(
    sig: &EvtSignature,
    alg: &Algebra,
    constraints: &[Constraint],
    ceiling: u64,
) -> Result<BTreeSet<(State, State)>, EvtError> {
    let names: Vec<&String> = sig.vars.keys().collect();
    let k = names.len();
    let slot_of = |n: &str, p: bool| names.iter().position(|v| v.as_str() == n).map(|i| if p { k + i } else { i });
    let checks = compile_checks(constraints, alg, &slot_of, 2 * k, None)?;
    let mut domains = carriers(sig, alg)?;
    domains.extend(domains.clone());
    Ok(solve(&domains, &checks, ceiling)?
        .into_iter()
        .map(|mut v| {
            let after = v.split_off(k);
            (v, after)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evt::Status;
    use crate::fopeq::{Sort, Term};

    fn xy_sig() -> EvtSignature {
        EvtSignature::default().with_event("e", Status::Ordinary).with_var("x", Sort::Int).with_var("y", Sort::Bool)
    }

    #[test]
    fn search_matches_brute_force() {
        let sig = xy_sig();
        let alg = Algebra::empty(2);
        let f = Formula::And(alloc::vec![
            Formula::lt(Term::var("x"), Term::Int(2)),
            Formula::eq(Term::primed("x"), Term::add(Term::var("x"), Term::Int(1))),
            Formula::ge(Term::var("x"), Term::Int(0)),
        ]);
        let got = solve_event(&sig, &alg, &[Constraint::Sentence(f)], 1 << 20).unwrap();
        let mut expect = BTreeSet::new();
        for x in -2..=2i64 {
            for xp in -2..=2i64 {
                for y in [false, true] {
                    for yp in [false, true] {
                        if x < 2 && xp == x + 1 && x >= 0 {
                            expect.insert((
                                alloc::vec![Value::Int(x), Value::Bool(y)],
                                alloc::vec![Value::Int(xp), Value::Bool(yp)],
                            ));
                        }
                    }
                }
            }
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn false_sentence_gives_empty_relation() {
        let got = solve_event(&xy_sig(), &Algebra::empty(2), &[Constraint::Sentence(Formula::False)], 100).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn tables_restrict_projections() {
        let rows = [alloc::vec![Value::Int(1)]].into_iter().collect();
        let c = Constraint::Table { cols: alloc::vec![("x".into(), true)], rows };
        let got = solve_init(&xy_sig(), &Algebra::empty(2), &[c], 100).unwrap();
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn ceiling_is_enforced() {
        assert!(matches!(solve_event(&xy_sig(), &Algebra::empty(2), &[], 10), Err(EvtError::Refused(_))));
    }
}
