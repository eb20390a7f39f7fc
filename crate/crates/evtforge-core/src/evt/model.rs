use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::search::{solve_event, solve_init, Constraint};
use super::{EvtError, EvtMorphism, EvtSentence, EvtSignature, INIT};
use crate::fopeq::{Algebra, Formula, Program, Value};

/// Values of the state variables, in the signature's (sorted) variable order.
pub type State = Vec<Value>;

/// `⟨A, L, R⟩`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvtModel {
    pub algebra: Algebra,
    pub init: BTreeSet<State>,
    pub rel: BTreeMap<String, BTreeSet<(State, State)>>,
}

impl EvtModel {
    /// Shape checks: non-empty `L`, one relation per non-`Init` event, states in the carriers.
    pub fn validate(&self, sig: &EvtSignature) -> Result<(), EvtError> {
        self.algebra.validate(&sig.fopeq)?;
        if self.init.is_empty() {
            return Err(EvtError::InvalidModel("the initialising set is empty".into()));
        }
        let events: BTreeSet<&String> = sig.proper_events().map(|(e, _)| e).collect();
        let rels: BTreeSet<&String> = self.rel.keys().collect();
        if events != rels {
            return Err(EvtError::InvalidModel("relations do not match the non-Init events".into()));
        }
        let sorts: Vec<_> = sig.vars.values().collect();
        let ok = |s: &State| s.len() == sorts.len() && s.iter().zip(&sorts).all(|(v, t)| self.algebra.in_carrier(t, *v));
        if !self.init.iter().all(ok) || !self.rel.values().flatten().all(|(a, b)| ok(a) && ok(b)) {
            return Err(EvtError::InvalidModel("a state leaves its carriers".into()));
        }
        Ok(())
    }

    /// Total number of initial states plus transition pairs.
    pub fn size(&self) -> usize {
        self.init.len() + self.rel.values().map(|r| r.len()).sum::<usize>()
    }

    /// Whether `self ⊆ other` component-wise (same algebra).
    pub fn included_in(&self, other: &EvtModel) -> bool {
        self.algebra == other.algebra
            && self.init.is_subset(&other.init)
            && self.rel.iter().all(|(e, r)| other.rel.get(e).is_some_and(|o| r.is_subset(o)))
    }
}

/// The `Init` reading of a sentence: maximal subformulas whose free state variables are
/// all unprimed, and remaining atoms mentioning an unprimed state variable, become `true`.
/// Bound variables shadow state variables.
pub fn init_restrict(f: &Formula, sig: &EvtSignature) -> Formula {
    let vars: BTreeSet<String> = sig.vars.keys().cloned().collect();
    restrict(f, &vars)
}

fn state_vars(f: &Formula, vars: &BTreeSet<String>) -> (bool, bool) {
    let fv = f.free_vars();
    let unprimed = fv.iter().any(|(n, p)| !*p && vars.contains(n));
    let primed = fv.iter().any(|(n, p)| *p && vars.contains(n));
    (unprimed, primed)
}

fn restrict(f: &Formula, vars: &BTreeSet<String>) -> Formula {
    let (unprimed, primed) = state_vars(f, vars);
    if !unprimed {
        return f.clone();
    }
    if !primed {
        return Formula::True;
    }
    match f {
        Formula::Not(g) => Formula::not(restrict(g, vars)),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| restrict(g, vars)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| restrict(g, vars)).collect()),
        Formula::Implies(a, b) => Formula::implies(restrict(a, vars), restrict(b, vars)),
        Formula::Iff(a, b) => Formula::iff(restrict(a, vars), restrict(b, vars)),
        Formula::Forall(vs, body) | Formula::Exists(vs, body) => {
            let mut inner = vars.clone();
            for (v, _) in vs {
                inner.remove(v);
            }
            let body = restrict(body, &inner);
            if matches!(f, Formula::Forall(..)) {
                Formula::forall(vs.clone(), body)
            } else {
                Formula::exists(vs.clone(), body)
            }
        }
        // a mixed atom
        _ => Formula::True,
    }
}

fn compile_for(sig: &EvtSignature, alg: &Algebra, body: &Formula, init: bool) -> Result<Program, EvtError> {
    let names: Vec<&String> = sig.vars.keys().collect();
    let k = names.len();
    let slot_of = |n: &str, p: bool| {
        let i = names.iter().position(|v| v.as_str() == n)?;
        match (init, p) {
            (true, true) => Some(i),
            (true, false) => None,
            (false, true) => Some(k + i),
            (false, false) => Some(i),
        }
    };
    Ok(Program::compile(body, alg, &slot_of, if init { k } else { 2 * k })?)
}

/// `M ⊨ ⟨e, φ⟩`: for `Init`, every state of `L` (as after-values) satisfies the restricted
/// body; otherwise every pair of `R.e` satisfies the body.
pub fn satisfies(sig: &EvtSignature, m: &EvtModel, s: &EvtSentence) -> Result<bool, EvtError> {
    if !sig.events.contains_key(&s.event) {
        return Err(EvtError::UnknownEvent(s.event.clone()));
    }
    if s.event == INIT {
        let body = init_restrict(&s.body, sig);
        let prog = compile_for(sig, &m.algebra, &body, true)?;
        let mut env = alloc::vec![Value::Int(0); prog.width.max(sig.vars.len())];
        for st in &m.init {
            env[..st.len()].copy_from_slice(st);
            if !prog.eval(&mut env) {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let prog = compile_for(sig, &m.algebra, &s.body, false)?;
    let k = sig.vars.len();
    let mut env = alloc::vec![Value::Int(0); prog.width.max(2 * k)];
    let empty = BTreeSet::new();
    for (a, b) in m.rel.get(&s.event).unwrap_or(&empty) {
        env[..k].copy_from_slice(a);
        env[k..2 * k].copy_from_slice(b);
        if !prog.eval(&mut env) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Index of each source variable's image in the target state layout.
pub(crate) fn var_projection(m: &EvtMorphism) -> Result<Vec<usize>, EvtError> {
    m.source
        .vars
        .keys()
        .map(|v| {
            let w = m.vars.get(v).ok_or_else(|| EvtError::UnknownVariable(v.clone()))?;
            m.target.var_index(w).ok_or_else(|| EvtError::UnknownVariable(w.clone()))
        })
        .collect()
}

pub(crate) fn project(s: &[Value], idx: &[usize]) -> State {
    idx.iter().map(|i| s[*i]).collect()
}

/// `M′|σ`.
pub fn model_reduct(m: &EvtMorphism, model: &EvtModel) -> Result<EvtModel, EvtError> {
    let idx = var_projection(m)?;
    let algebra = model.algebra.reduct(&m.fopeq)?;
    let init = model.init.iter().map(|s| project(s, &idx)).collect();
    let mut rel = BTreeMap::new();
    for (e, _) in m.source.proper_events() {
        let t = &m.events[e];
        let r: BTreeSet<(State, State)> = model
            .rel
            .get(t)
            .ok_or_else(|| EvtError::UnknownEvent(t.clone()))?
            .iter()
            .map(|(a, b)| (project(a, &idx), project(b, &idx)))
            .collect();
        rel.insert(e.clone(), r);
    }
    Ok(EvtModel { algebra, init, rel })
}

/// Largest `L` and `R.e` over a fixed algebra satisfying the sentences. `L` may come out
/// empty, in which case no model over this algebra exists.
pub fn maximal_model(
    sig: &EvtSignature,
    sentences: &[EvtSentence],
    alg: &Algebra,
    ceiling: u64,
) -> Result<EvtModel, EvtError> {
    let mut by_event: BTreeMap<&str, Vec<Constraint>> = sig.events.keys().map(|e| (e.as_str(), Vec::new())).collect();
    for s in sentences {
        s.validate(sig)?;
        by_event.get_mut(s.event.as_str()).ok_or_else(|| EvtError::UnknownEvent(s.event.clone()))?.push(Constraint::Sentence(s.body.clone()));
    }
    let init = solve_init(sig, alg, &by_event[INIT], ceiling)?;
    let mut rel = BTreeMap::new();
    for (e, _) in sig.proper_events() {
        rel.insert(e.clone(), solve_event(sig, alg, &by_event[e.as_str()], ceiling)?);
    }
    Ok(EvtModel { algebra: alg.clone(), init, rel })
}

/// Renders a state as `{x↦0, y↦FALSE}`.
pub fn show_state(sig: &EvtSignature, s: &[Value], primed: bool) -> String {
    let parts: Vec<String> = sig
        .vars
        .keys()
        .zip(s)
        .map(|(v, x)| format!("{}{}↦{x}", v, if primed { "′" } else { "" }))
        .collect();
    format!("{{{}}}", parts.join(", "))
}
