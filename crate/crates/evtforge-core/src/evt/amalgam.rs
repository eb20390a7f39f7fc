//! Amalgamation of models along a pushout square.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::model::{model_reduct, project, var_projection, EvtModel, State};
use super::search::{solve_event, solve_init, Constraint};
use super::{EvtError, EvtMorphism, EvtPushout};
use crate::fopeq::{Algebra, FopeqMorphism};

/// The amalgamated model and whether it is the only one with the given reducts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amalgam {
    pub model: EvtModel,
    pub unique: bool,
}

fn invert(m: &BTreeMap<String, String>) -> BTreeMap<&String, Vec<&String>> {
    let mut out: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
    for (k, v) in m {
        out.entry(v).or_default().push(k);
    }
    out
}

/// The algebra over the pushout signature whose reducts are `a1` and `a2`.
fn amalgamate_algebra(f1: &FopeqMorphism, f2: &FopeqMorphism, a1: &Algebra, a2: &Algebra) -> Result<Algebra, EvtError> {
    let mut out = Algebra::empty(a1.int_bound);
    for (m, a) in [(f1, a1), (f2, a2)] {
        for (s, t) in &m.sorts {
            out.carriers.insert(t.clone(), a.carriers[s]);
        }
        for (o, t) in &m.ops {
            out.ops.insert(t.clone(), a.ops[o].clone());
        }
        for (p, t) in &m.preds {
            out.preds.insert(t.clone(), a.preds[p].clone());
        }
    }
    Ok(out)
}

/// Columns of the pushout state layout a side's variables land on.
fn cols(m: &EvtMorphism, primed: bool) -> Vec<(String, bool)> {
    m.source.vars.keys().map(|v| (m.vars[v].clone(), primed)).collect()
}

/// Amalgamates `m1 ∈ Mod(Σ1)` and `m2 ∈ Mod(Σ2)` along the pushout of `σ1`, `σ2`.
///
/// Every state and pair of the result is the largest one compatible with both sides;
/// `unique` is false when a strictly smaller model has the same two reducts.
pub fn amalgamate(
    s1: &EvtMorphism,
    s2: &EvtMorphism,
    po: &EvtPushout,
    m1: &EvtModel,
    m2: &EvtModel,
    ceiling: u64,
) -> Result<Amalgam, EvtError> {
    if model_reduct(s1, m1)? != model_reduct(s2, m2)? {
        return Err(EvtError::Precondition("the models disagree on the shared signature".into()));
    }
    let (l, r) = (&po.left, &po.right);
    let algebra = amalgamate_algebra(&l.fopeq, &r.fopeq, &m1.algebra, &m2.algebra)?;
    let sig = &po.sig;

    let init_tables = [
        Constraint::Table { cols: cols(l, true), rows: m1.init.clone() },
        Constraint::Table { cols: cols(r, true), rows: m2.init.clone() },
    ];
    let init = solve_init(sig, &algebra, &init_tables, ceiling)?;

    let (inv_l, inv_r) = (invert(&l.events), invert(&r.events));
    let pair_table = |m: &EvtMorphism, rel: &BTreeSet<(State, State)>| {
        let mut c = cols(m, false);
        c.extend(cols(m, true));
        let rows = rel.iter().map(|(a, b)| a.iter().chain(b).copied().collect()).collect();
        Constraint::Table { cols: c, rows }
    };
    let mut rel = BTreeMap::new();
    for (e, _) in sig.proper_events() {
        let mut tables = Vec::new();
        for e1 in inv_l.get(e).into_iter().flatten() {
            tables.push(pair_table(l, &m1.rel[*e1]));
        }
        for e2 in inv_r.get(e).into_iter().flatten() {
            tables.push(pair_table(r, &m2.rel[*e2]));
        }
        rel.insert(e.clone(), solve_event(sig, &algebra, &tables, ceiling)?);
    }
    let model = EvtModel { algebra, init, rel };
    if model_reduct(l, &model)? != *m1 || model_reduct(r, &model)? != *m2 {
        return Err(EvtError::Precondition("no model has both given reducts".into()));
    }

    // An element is removable when each of its projections is also covered by another one.
    let (pl, pr) = (var_projection(l)?, var_projection(r)?);
    let removable_state = |set: &BTreeSet<State>| {
        let mut cl: BTreeMap<State, usize> = BTreeMap::new();
        let mut cr: BTreeMap<State, usize> = BTreeMap::new();
        for s in set {
            *cl.entry(project(s, &pl)).or_default() += 1;
            *cr.entry(project(s, &pr)).or_default() += 1;
        }
        set.iter().any(|s| cl[&project(s, &pl)] > 1 && cr[&project(s, &pr)] > 1)
    };
    let removable_pair = |e: &String, set: &BTreeSet<(State, State)>| {
        let mut cl: BTreeMap<(State, State), usize> = BTreeMap::new();
        let mut cr: BTreeMap<(State, State), usize> = BTreeMap::new();
        let has_l = inv_l.contains_key(e);
        let has_r = inv_r.contains_key(e);
        let pj = |(a, b): &(State, State), idx: &[usize]| (project(a, idx), project(b, idx));
        for p in set {
            *cl.entry(pj(p, &pl)).or_default() += 1;
            *cr.entry(pj(p, &pr)).or_default() += 1;
        }
        set.iter().any(|p| (!has_l || cl[&pj(p, &pl)] > 1) && (!has_r || cr[&pj(p, &pr)] > 1))
    };
    let unique = !removable_state(&model.init) && !model.rel.iter().any(|(e, set)| removable_pair(e, set));
    Ok(Amalgam { model, unique })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evt::{evt_pushout, EvtSignature, Status, StatusRule};
    use crate::fopeq::{Sort, Value};

    fn st(xs: &[i64]) -> State {
        xs.iter().map(|x| Value::Int(*x)).collect()
    }

    #[test]
    fn shared_variable_joins_and_reducts_are_recovered() {
        let base = EvtSignature::default().with_event("e", Status::Ordinary).with_var("x", Sort::Int);
        let a = base.clone().with_var("y", Sort::Int);
        let b = base.clone().with_var("z", Sort::Int);
        let s1 = EvtMorphism::inclusion(&base, &a, StatusRule::NonDecreasing).unwrap();
        let s2 = EvtMorphism::inclusion(&base, &b, StatusRule::NonDecreasing).unwrap();
        let po = evt_pushout(&s1, &s2).unwrap();
        let alg = Algebra::empty(1);
        let m1 = EvtModel {
            algebra: alg.clone(),
            init: [st(&[0, 1])].into_iter().collect(),
            rel: [("e".into(), [(st(&[0, 1]), st(&[1, 1]))].into_iter().collect())].into_iter().collect(),
        };
        let m2 = EvtModel {
            algebra: alg.clone(),
            init: [st(&[0, -1])].into_iter().collect(),
            rel: [("e".into(), [(st(&[0, 0]), st(&[1, 0]))].into_iter().collect())].into_iter().collect(),
        };
        let am = amalgamate(&s1, &s2, &po, &m1, &m2, 1 << 16).unwrap();
        assert!(am.unique);
        assert_eq!(am.model.init, [st(&[0, 1, -1])].into_iter().collect());
        assert_eq!(model_reduct(&po.left, &am.model).unwrap(), m1);
        assert_eq!(model_reduct(&po.right, &am.model).unwrap(), m2);
    }

    #[test]
    fn independent_choices_are_not_unique() {
        let base = EvtSignature::default();
        let a = base.clone().with_var("y", Sort::Int);
        let b = base.clone().with_var("z", Sort::Int);
        let s1 = EvtMorphism::inclusion(&base, &a, StatusRule::NonDecreasing).unwrap();
        let s2 = EvtMorphism::inclusion(&base, &b, StatusRule::NonDecreasing).unwrap();
        let po = evt_pushout(&s1, &s2).unwrap();
        let m = |xs: &[i64]| EvtModel {
            algebra: Algebra::empty(1),
            init: xs.iter().map(|x| st(&[*x])).collect(),
            rel: BTreeMap::new(),
        };
        let am = amalgamate(&s1, &s2, &po, &m(&[0, 1]), &m(&[0, 1]), 1 << 16).unwrap();
        assert_eq!(am.model.init.len(), 4);
        assert!(!am.unique);
    }

    #[test]
    fn disagreeing_models_are_rejected() {
        let base = EvtSignature::default().with_var("x", Sort::Int);
        let s = EvtMorphism::identity(&base);
        let po = evt_pushout(&s, &s).unwrap();
        let m = |x: i64| EvtModel { algebra: Algebra::empty(1), init: [st(&[x])].into_iter().collect(), rel: BTreeMap::new() };
        assert!(matches!(amalgamate(&s, &s, &po, &m(0), &m(1), 100), Err(EvtError::Precondition(_))));
    }
}
