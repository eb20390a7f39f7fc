//! The comorphism embedding first-order logic into the Event-B institution: a signature
//! becomes one with only `Init` and no variables, a closed sentence is asserted of every
//! event, and an algebra becomes the model with the single empty state.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{EvtError, EvtModel, EvtSentence, EvtSignature};
use crate::fopeq::{Algebra, FopeqSignature, Formula};

/// `Φ(Σ) = ⟨Σ, {Init}, ∅⟩`.
pub fn comorphism_sign(sig: &FopeqSignature) -> EvtSignature {
    EvtSignature::new(sig.clone())
}

/// `α(φ)`: one sentence per event of `target`, each with body `φ`.
pub fn comorphism_sen(target: &EvtSignature, f: &Formula) -> Result<Vec<EvtSentence>, EvtError> {
    if let Some((v, _)) = f.free_vars().into_iter().next() {
        return Err(EvtError::InvalidSentence(alloc::format!("`{v}` is free in a first-order sentence")));
    }
    Ok(target.events.keys().map(|e| EvtSentence { event: e.clone(), body: f.clone() }).collect())
}

/// `β(M)`: the algebra of a model over a translated signature.
pub fn comorphism_mod(m: &EvtModel) -> Result<Algebra, EvtError> {
    if m.init.len() != 1 || m.init.iter().any(|s| !s.is_empty()) {
        return Err(EvtError::InvalidModel("expected the single empty initial state".into()));
    }
    if !m.rel.is_empty() {
        return Err(EvtError::InvalidModel("expected no events besides Init".into()));
    }
    Ok(m.algebra.clone())
}

/// The model `⟨A, {[]}, ∅⟩` over `Φ(Σ)`.
pub fn comorphism_model(a: &Algebra) -> EvtModel {
    EvtModel { algebra: a.clone(), init: [Vec::new()].into_iter().collect(), rel: BTreeMap::new() }
}
