use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::format;

use super::morphism::StatusRule;
use super::{EvtError, EvtMorphism, EvtSignature, Status};
use crate::fopeq::{fopeq_pushout, name_pushout};

fn keys_of<V>(m: &BTreeMap<String, V>) -> BTreeSet<String> {
    m.keys().cloned().collect()
}

/// A pushout square completion `Σ1 → Σ′ ← Σ2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvtPushout {
    pub sig: EvtSignature,
    pub left: EvtMorphism,
    pub right: EvtMorphism,
}

/// Pushout of `σ1: Σ → Σ1` and `σ2: Σ → Σ2`. Events identified by the square take the
/// supremum of their statuses.
pub fn evt_pushout(s1: &EvtMorphism, s2: &EvtMorphism) -> Result<EvtPushout, EvtError> {
    if s1.source != s2.source {
        return Err(EvtError::InvalidMorphism("pushout of morphisms with different sources".into()));
    }
    s1.validate(StatusRule::Ignore)?;
    s2.validate(StatusRule::Ignore)?;
    let fo = fopeq_pushout(&s1.fopeq, &s2.fopeq)?;
    let (t1, t2) = (&s1.target, &s2.target);
    let events = name_pushout(&keys_of(&s1.source.events), &s1.events, &s2.events, &keys_of(&t1.events), &keys_of(&t2.events));
    let vars = name_pushout(&keys_of(&s1.source.vars), &s1.vars, &s2.vars, &keys_of(&t1.vars), &keys_of(&t2.vars));

    let mut sig = EvtSignature::new(fo.sig.clone());
    sig.events.clear();
    for (e, st) in &t1.events {
        let n = &events.left[e];
        let cur = sig.events.get(n).copied().unwrap_or(Status::Ordinary);
        sig.events.insert(n.clone(), cur.sup(*st));
    }
    for (e, st) in &t2.events {
        let n = &events.right[e];
        let cur = sig.events.get(n).copied().unwrap_or(Status::Ordinary);
        sig.events.insert(n.clone(), cur.sup(*st));
    }
    for (v, s) in &t1.vars {
        sig.vars.insert(vars.left[v].clone(), fo.left.map_sort(s)?);
    }
    for (v, s) in &t2.vars {
        let s = fo.right.map_sort(s)?;
        let n = &vars.right[v];
        if let Some(prev) = sig.vars.get(n) {
            if *prev != s {
                return Err(EvtError::InvalidSignature(format!("variable `{n}` gets two sorts")));
            }
        }
        sig.vars.insert(n.clone(), s);
    }
    sig.validate()?;
    let left = EvtMorphism { source: t1.clone(), target: sig.clone(), fopeq: fo.left, events: events.left, vars: vars.left };
    let right = EvtMorphism { source: t2.clone(), target: sig.clone(), fopeq: fo.right, events: events.right, vars: vars.right };
    left.validate(StatusRule::NonDecreasing)?;
    right.validate(StatusRule::NonDecreasing)?;
    Ok(EvtPushout { sig, left, right })
}
