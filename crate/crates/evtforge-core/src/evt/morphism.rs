use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;

use super::{EvtError, EvtSentence, EvtSignature, INIT};
use crate::fopeq::{translate_formula, FopeqMorphism};

/// How event statuses must relate along a morphism.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StatusRule {
    /// `status(e) ≤ status(σ(e))`.
    #[default]
    NonDecreasing,
    /// Statuses are not compared.
    Ignore,
}

/// `σ = ⟨σ_S, σ_Ω, σ_Π, σ_E, σ_V⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvtMorphism {
    pub source: EvtSignature,
    pub target: EvtSignature,
    pub fopeq: FopeqMorphism,
    pub events: BTreeMap<String, String>,
    pub vars: BTreeMap<String, String>,
}

impl EvtMorphism {
    pub fn identity(sig: &EvtSignature) -> Self {
        EvtMorphism {
            source: sig.clone(),
            target: sig.clone(),
            fopeq: FopeqMorphism::identity(&sig.fopeq),
            events: sig.events.keys().map(|e| (e.clone(), e.clone())).collect(),
            vars: sig.vars.keys().map(|v| (v.clone(), v.clone())).collect(),
        }
    }

    /// Inclusion of `source` into `target`, checked with the given status rule.
    pub fn inclusion(source: &EvtSignature, target: &EvtSignature, rule: StatusRule) -> Result<Self, EvtError> {
        let m = EvtMorphism {
            target: target.clone(),
            fopeq: FopeqMorphism { target: target.fopeq.clone(), ..FopeqMorphism::identity(&source.fopeq) },
            ..Self::identity(source)
        };
        m.validate(rule)?;
        Ok(m)
    }

    /// Builds a morphism from partial renamings, defaulting every unlisted name to itself.
    pub fn from_renaming(
        source: &EvtSignature,
        target: &EvtSignature,
        fopeq: FopeqMorphism,
        events: &BTreeMap<String, String>,
        vars: &BTreeMap<String, String>,
        rule: StatusRule,
    ) -> Result<Self, EvtError> {
        let pick = |m: &BTreeMap<String, String>, k: &String| m.get(k).cloned().unwrap_or_else(|| k.clone());
        let m = EvtMorphism {
            source: source.clone(),
            target: target.clone(),
            fopeq,
            events: source.events.keys().map(|e| (e.clone(), pick(events, e))).collect(),
            vars: source.vars.keys().map(|v| (v.clone(), pick(vars, v))).collect(),
        };
        m.validate(rule)?;
        Ok(m)
    }

    pub fn validate(&self, rule: StatusRule) -> Result<(), EvtError> {
        let bad = |m: String| Err(EvtError::InvalidMorphism(m));
        if self.fopeq.source != self.source.fopeq || self.fopeq.target != self.target.fopeq {
            return bad("first-order part does not match the signatures".into());
        }
        self.fopeq.validate()?;
        if self.events.len() != self.source.events.len() || self.vars.len() != self.source.vars.len() {
            return bad("maps are not total on the source".into());
        }
        for (e, s) in &self.source.events {
            let Some(t) = self.events.get(e) else { return bad(format!("event `{e}` is not mapped")) };
            let Some(ts) = self.target.events.get(t) else { return bad(format!("event `{e}` maps to unknown `{t}`")) };
            if (e == INIT) != (t == INIT) {
                return bad(format!("`Init` must map to `Init` and only `Init` may (`{e}` ↦ `{t}`)"));
            }
            if rule == StatusRule::NonDecreasing && s > ts {
                return bad(format!("status of `{e}` decreases from {s} to {ts}"));
            }
        }
        for (v, s) in &self.source.vars {
            let Some(w) = self.vars.get(v) else { return bad(format!("variable `{v}` is not mapped")) };
            let Some(ws) = self.target.vars.get(w) else { return bad(format!("variable `{v}` maps to unknown `{w}`")) };
            if &self.fopeq.map_sort(s)? != ws {
                return bad(format!("variable `{v}` ↦ `{w}` changes its sort"));
            }
        }
        Ok(())
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &EvtMorphism) -> Result<EvtMorphism, EvtError> {
        if self.target != next.source {
            return Err(EvtError::InvalidMorphism("morphisms are not composable".into()));
        }
        let comp = |a: &BTreeMap<String, String>, b: &BTreeMap<String, String>| -> BTreeMap<String, String> {
            a.iter().filter_map(|(k, v)| b.get(v).map(|w| (k.clone(), w.clone()))).collect()
        };
        Ok(EvtMorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            fopeq: self.fopeq.then(&next.fopeq)?,
            events: comp(&self.events, &next.events),
            vars: comp(&self.vars, &next.vars),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.fopeq.is_identity()
            && self.events.iter().all(|(k, v)| k == v)
            && self.vars.iter().all(|(k, v)| k == v)
    }

    pub fn is_injective_on_events(&self) -> bool {
        let mut seen = alloc::collections::BTreeSet::new();
        self.events.values().all(|t| seen.insert(t))
    }
}

/// `Sen(σ)`: maps the event, renames state variables (primed occurrences follow their
/// unprimed name) and translates the first-order symbols.
pub fn translate_sentence(m: &EvtMorphism, s: &EvtSentence) -> Result<EvtSentence, EvtError> {
    let event = m.events.get(&s.event).cloned().ok_or_else(|| EvtError::UnknownEvent(s.event.clone()))?;
    for (v, _) in s.body.free_vars() {
        if !m.vars.contains_key(&v) {
            return Err(EvtError::UnknownVariable(v));
        }
    }
    let body = translate_formula(&m.fopeq, &s.body)?;
    let body = body.map_free_vars(&|n, p| m.vars.get(n).map(|w| (w.clone(), p)));
    Ok(EvtSentence { event, body })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evt::Status;
    use crate::fopeq::{Formula, Sort, Term};
    use alloc::string::ToString;

    fn map(xs: &[(&str, &str)]) -> BTreeMap<String, String> {
        xs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    fn inout() -> EvtSignature {
        EvtSignature::default()
            .with_event("out", Status::Ordinary)
            .with_event("in", Status::Ordinary)
            .with_var("v1", Sort::Int)
            .with_var("v2", Sort::Int)
    }

    fn bridge() -> EvtSignature {
        EvtSignature::default()
            .with_event("ML_out", Status::Ordinary)
            .with_event("ML_in", Status::Ordinary)
            .with_event("IL_out", Status::Convergent)
            .with_event("IL_in", Status::Convergent)
            .with_var("a", Sort::Int)
            .with_var("c", Sort::Int)
    }

    #[test]
    fn renaming_events_and_variables() {
        let (s, t) = (inout(), bridge());
        let m = EvtMorphism::from_renaming(
            &s,
            &t,
            FopeqMorphism::identity(&s.fopeq),
            &map(&[("out", "ML_out"), ("in", "ML_in")]),
            &map(&[("v1", "c"), ("v2", "a")]),
            StatusRule::NonDecreasing,
        )
        .unwrap();
        let sen = EvtSentence::new("out", Formula::eq(Term::var("v1"), Term::Int(0)));
        let out = translate_sentence(&m, &sen).unwrap();
        assert_eq!(out, EvtSentence::new("ML_out", Formula::eq(Term::var("c"), Term::Int(0))));
        let sen = EvtSentence::new("in", Formula::eq(Term::primed("v1"), Term::sub(Term::var("v1"), Term::Int(1))));
        assert_eq!(
            translate_sentence(&m, &sen).unwrap().body,
            Formula::eq(Term::primed("c"), Term::sub(Term::var("c"), Term::Int(1)))
        );
    }

    #[test]
    fn ordinary_may_become_convergent_but_not_back() {
        let (s, t) = (inout(), bridge());
        let up = EvtMorphism::from_renaming(
            &s,
            &t,
            FopeqMorphism::identity(&s.fopeq),
            &map(&[("out", "IL_out"), ("in", "IL_in")]),
            &map(&[("v1", "a"), ("v2", "c")]),
            StatusRule::NonDecreasing,
        );
        assert!(up.is_ok());
        let down_src = EvtSignature::default().with_event("e", Status::Convergent);
        let down_tgt = EvtSignature::default().with_event("e", Status::Ordinary);
        assert!(EvtMorphism::inclusion(&down_src, &down_tgt, StatusRule::NonDecreasing).is_err());
        assert!(EvtMorphism::inclusion(&down_src, &down_tgt, StatusRule::Ignore).is_ok());
    }

    #[test]
    fn init_is_immutable() {
        let s = EvtSignature::default().with_event("e", Status::Ordinary);
        let mut m = EvtMorphism::identity(&s);
        m.events.insert(INIT.into(), "e".into());
        assert!(m.validate(StatusRule::NonDecreasing).is_err());
        let mut m = EvtMorphism::identity(&s);
        m.events.insert("e".into(), INIT.into());
        assert!(m.validate(StatusRule::NonDecreasing).is_err());
    }
}
