//! The Event-B institution.
//!
//! Signatures extend first-order signatures with status-tagged events and sorted state
//! variables; sentences pair an event name with a before/after formula; models are
//! `⟨A, L, R⟩` with an algebra, a set of initial states and one relation per event.

mod amalgam;
mod comorphism;
mod model;
mod morphism;
mod pushout;
mod search;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::fopeq::{FopeqError, FopeqSignature, Formula, Sort};

pub use amalgam::{amalgamate, Amalgam};
pub use comorphism::{comorphism_mod, comorphism_model, comorphism_sen, comorphism_sign};
pub use model::{init_restrict, maximal_model, model_reduct, satisfies, show_state, EvtModel, State};
pub use morphism::{translate_sentence, EvtMorphism, StatusRule};
pub use pushout::{evt_pushout, EvtPushout};
pub use search::{solve_event, solve_init, Constraint};

/// Name of the initialising event every signature carries.
pub const INIT: &str = "Init";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvtError {
    #[error(transparent)]
    Fopeq(#[from] FopeqError),
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid signature: {0}")]
    InvalidSignature(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("invalid sentence: {0}")]
    InvalidSentence(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("amalgamation precondition violated: {0}")]
    Precondition(String),
    #[error("refused: {0}")]
    Refused(String),
}

/// Event status, totally ordered `ordinary < anticipated < convergent`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    #[default]
    Ordinary,
    Anticipated,
    Convergent,
}

impl Status {
    pub fn sup(self, other: Status) -> Status {
        self.max(other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ordinary => "ordinary",
            Status::Anticipated => "anticipated",
            Status::Convergent => "convergent",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ordinary" => Ok(Status::Ordinary),
            "anticipated" => Ok(Status::Anticipated),
            "convergent" => Ok(Status::Convergent),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// `⟨S, Ω, Π, E, V⟩`. States are laid out in the (sorted) order of `vars`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvtSignature {
    pub fopeq: FopeqSignature,
    pub events: BTreeMap<String, Status>,
    pub vars: BTreeMap<String, Sort>,
}

impl Default for EvtSignature {
    fn default() -> Self {
        Self::new(FopeqSignature::new())
    }
}

impl EvtSignature {
    /// A signature with only `Init` and no variables.
    pub fn new(fopeq: FopeqSignature) -> Self {
        EvtSignature { fopeq, events: [(INIT.to_string(), Status::Ordinary)].into_iter().collect(), vars: BTreeMap::new() }
    }

    pub fn with_event(mut self, name: &str, status: Status) -> Self {
        self.events.insert(name.to_string(), status);
        self
    }

    pub fn with_var(mut self, name: &str, sort: Sort) -> Self {
        self.vars.insert(name.to_string(), sort);
        self
    }

    pub fn var_names(&self) -> Vec<&String> {
        self.vars.keys().collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.keys().position(|v| v == name)
    }

    /// Events other than `Init`.
    pub fn proper_events(&self) -> impl Iterator<Item = (&String, &Status)> {
        self.events.iter().filter(|(e, _)| e.as_str() != INIT)
    }

    pub fn validate(&self) -> Result<(), EvtError> {
        self.fopeq.validate()?;
        match self.events.get(INIT) {
            Some(Status::Ordinary) => {}
            Some(s) => return Err(EvtError::InvalidSignature(format!("`Init` must be ordinary, not {s}"))),
            None => return Err(EvtError::InvalidSignature("missing the `Init` event".into())),
        }
        for (v, s) in &self.vars {
            if v.ends_with('\'') || v.ends_with('′') {
                return Err(EvtError::InvalidSignature(format!("variable `{v}` has a primed name")));
            }
            if !self.fopeq.has_sort(s) {
                return Err(EvtError::InvalidSignature(format!("variable `{v}` has undeclared sort `{s}`")));
            }
        }
        Ok(())
    }

    /// Name-based union; shared events take the supremum of their statuses.
    pub fn union(&self, other: &EvtSignature) -> Result<EvtSignature, EvtError> {
        let mut out = EvtSignature { fopeq: self.fopeq.union(&other.fopeq)?, ..self.clone() };
        for (e, s) in &other.events {
            let st = out.events.get(e).map_or(*s, |t| t.sup(*s));
            out.events.insert(e.clone(), st);
        }
        for (v, s) in &other.vars {
            match out.vars.get(v) {
                Some(t) if t != s => {
                    return Err(EvtError::InvalidSignature(format!("variable `{v}` declared with sorts {t} and {s}")))
                }
                _ => {
                    out.vars.insert(v.clone(), s.clone());
                }
            }
        }
        out.validate()?;
        Ok(out)
    }

    /// Sort lookup for formulas over `V ∪ V′`.
    pub fn var_sort(&self, name: &str) -> Option<Sort> {
        self.vars.get(name).cloned()
    }
}

/// `⟨e, φ(x̄, x̄′)⟩`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvtSentence {
    pub event: String,
    pub body: Formula,
}

impl EvtSentence {
    pub fn new(event: &str, body: Formula) -> Self {
        EvtSentence { event: event.to_string(), body }
    }

    /// Checks the event exists, the body is well-sorted and only mentions `V ∪ V′`.
    pub fn validate(&self, sig: &EvtSignature) -> Result<(), EvtError> {
        if !sig.events.contains_key(&self.event) {
            return Err(EvtError::UnknownEvent(self.event.clone()));
        }
        for (v, _) in self.body.free_vars() {
            if !sig.vars.contains_key(&v) {
                return Err(EvtError::UnknownVariable(v));
            }
        }
        self.body.check(&sig.fopeq, &|n, _| sig.var_sort(n))?;
        Ok(())
    }
}

impl fmt::Display for EvtSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}⟩", self.event, crate::syntax::print_formula(&self.body))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_order_and_supremum() {
        assert!(Status::Ordinary < Status::Anticipated && Status::Anticipated < Status::Convergent);
        assert_eq!(Status::Anticipated.sup(Status::Convergent), Status::Convergent);
        assert_eq!(Status::Ordinary.sup(Status::Ordinary), Status::Ordinary);
        assert_eq!("anticipated".parse::<Status>(), Ok(Status::Anticipated));
    }

    #[test]
    fn signatures_require_an_ordinary_init() {
        let mut sig = EvtSignature::default();
        assert!(sig.validate().is_ok());
        sig.events.insert(INIT.into(), Status::Convergent);
        assert!(sig.validate().is_err());
        sig.events.clear();
        assert!(sig.validate().is_err());
    }

    #[test]
    fn primed_variable_names_are_rejected() {
        let sig = EvtSignature::default().with_var("x'", Sort::Int);
        assert!(sig.validate().is_err());
    }

    #[test]
    fn union_takes_status_supremum() {
        let a = EvtSignature::default().with_event("e", Status::Anticipated);
        let b = EvtSignature::default().with_event("e", Status::Convergent).with_var("x", Sort::Int);
        let u = a.union(&b).unwrap();
        assert_eq!(u.events["e"], Status::Convergent);
        assert!(u.vars.contains_key("x"));
    }
}
