//! Structured specifications over the Event-B institution.
//!
//! A specification is a presentation (a body of declarations and sentences) or is built
//! from named specifications with `and` (sum), `then` (enrichment), `with` (translation
//! along a renaming), `hide via` (restriction to a sub-signature) and the embedding of
//! first-order specifications. Signatures are computed structurally; model classes are
//! computed per algebra over bounded carriers (see [`eval`]).

mod eval;
mod parse;
mod print;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::evt::{EvtError, EvtMorphism, EvtSentence, EvtSignature, Status, StatusRule, INIT};
use crate::fopeq::{FopeqError, FopeqMorphism, FopeqSignature, Formula, OpProfile, Sort, Term};
use crate::syntax::{SyntaxError, TypeAnn};

pub use eval::ModelClassRep;
pub use parse::{parse_library, parse_spec_expr, RefinementDecl};
pub use print::{print_def, print_expr_spec, print_library, PrintOptions};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unknown specification `{0}`")]
    Unknown(String),
    #[error("specification `{0}` is defined twice")]
    Duplicate(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Evt(#[from] EvtError),
    #[error(transparent)]
    Fopeq(#[from] FopeqError),
    #[error("refused: {0}")]
    Refused(String),
}

impl SpecError {
    pub fn is_parse(&self) -> bool {
        matches!(self, SpecError::Syntax(e) if e.is_parse())
    }
}

/// Names declared with one type: `a, b, c : ℕ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub names: Vec<String>,
    pub ty: TypeAnn,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SAction {
    /// `v1, v2 := E1, E2`, read as `v1′ = E1 ∧ v2′ = E2`.
    Assign(Vec<String>, Vec<Term>),
    /// `v :| P`, taken verbatim.
    Becomes(Vec<String>, Formula),
}

/// An event of a machine body. `Init` is written `INITIALISATION`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SugarEvent {
    pub name: String,
    pub status: Status,
    pub params: Vec<(String, Sort)>,
    pub guards: Vec<Formula>,
    pub witnesses: Vec<Formula>,
    pub actions: Vec<SAction>,
}

impl SugarEvent {
    pub fn new(name: &str, status: Status) -> Self {
        SugarEvent {
            name: name.into(),
            status,
            params: Vec::new(),
            guards: Vec::new(),
            witnesses: Vec::new(),
            actions: Vec::new(),
        }
    }
}

/// New signature items and sentences.
///
/// With `events` present the body describes a machine: `decls` are state variables,
/// `axioms` are invariants (asserted before and after every event) and the variant
/// constrains non-ordinary events. Without it the body is first-order: `decls` are
/// constants and `axioms` closed sentences asserted of every event.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Body {
    /// Declared sorts; the built-in names `ℕ`, `ℤ`, `BOOL` may appear for display.
    pub sorts: Vec<String>,
    pub decls: Vec<Decl>,
    pub axioms: Vec<Formula>,
    pub variant: Option<Term>,
    pub events: Option<Vec<SugarEvent>>,
}

pub(crate) const BUILTIN_SORT_NAMES: [&str; 3] = ["ℕ", "ℤ", "BOOL"];

impl Body {
    pub fn is_machine(&self) -> bool {
        self.events.is_some()
    }

    pub fn user_sorts(&self) -> impl Iterator<Item = &String> {
        self.sorts.iter().filter(|s| !BUILTIN_SORT_NAMES.contains(&s.as_str()))
    }

    /// Adds this body's items to `base`.
    pub fn extend_signature(&self, base: &EvtSignature) -> Result<EvtSignature, SpecError> {
        let mut sig = base.clone();
        for s in self.user_sorts() {
            sig.fopeq.sorts.insert(s.clone());
        }
        for d in &self.decls {
            let sort = d.ty.sort(&sig.fopeq)?;
            for n in &d.names {
                if self.is_machine() {
                    sig.vars.insert(n.clone(), sort.clone());
                } else {
                    sig.fopeq.ops.insert(n.clone(), OpProfile::constant(sort.clone()));
                }
            }
        }
        for e in self.events.iter().flatten() {
            let st = if e.name == INIT { Status::Ordinary } else { e.status };
            let joined = sig.events.get(&e.name).map_or(st, |old| old.sup(st));
            sig.events.insert(e.name.clone(), joined);
        }
        sig.validate()?;
        Ok(sig)
    }

    /// The sentences of this body over the enclosing signature `sig`.
    pub fn sentences(&self, sig: &EvtSignature) -> Result<Vec<EvtSentence>, SpecError> {
        use crate::translate::{translate_event, translate_invariant, translate_variant};
        let mut out = Vec::new();
        if self.is_machine() {
            for d in &self.decls {
                for n in &d.names {
                    if let Some(m) = d.ty.membership(&Term::var(n)) {
                        out.extend(translate_invariant(sig, &m));
                    }
                }
            }
            for a in &self.axioms {
                out.extend(translate_invariant(sig, a));
            }
            if let Some(v) = &self.variant {
                out.extend(translate_variant(sig, v));
            }
            for e in self.events.iter().flatten() {
                out.push(translate_event(e));
            }
        } else {
            let mut closed = Vec::new();
            for d in &self.decls {
                for n in &d.names {
                    closed.extend(d.ty.membership(&Term::constant(n)));
                }
            }
            closed.extend(self.axioms.iter().cloned());
            for f in &closed {
                out.extend(crate::evt::comorphism_sen(sig, f)?);
            }
        }
        Ok(out)
    }

    /// Closed first-order consequences usable to prefilter algebras.
    fn closed_axioms(&self) -> Vec<Formula> {
        if self.is_machine() {
            return Vec::new();
        }
        let mut out: Vec<Formula> = Vec::new();
        for d in &self.decls {
            for n in &d.names {
                out.extend(d.ty.membership(&Term::constant(n)));
            }
        }
        out.extend(self.axioms.iter().cloned());
        out
    }
}

/// `⟨e, status⟩` or a plain name on one side of a maplet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapSide {
    pub name: String,
    pub status: Option<Status>,
}

impl MapSide {
    pub fn plain(name: &str) -> Self {
        MapSide { name: name.into(), status: None }
    }
}

/// A renaming literal `σ{a ↦ b, ⟨e, st⟩ ↦ ⟨f, st′⟩}`; unlisted names map to themselves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Renaming {
    pub label: Option<String>,
    pub entries: Vec<(MapSide, MapSide)>,
}

/// The kept part of a signature, `σ{e1, v1, …}`; each entry names an item of the hidden
/// signature and (when written `a ↦ b`) the item of the child it stands for.
///
/// All sorts and operations are kept, `Init` always is, and variables are all kept when
/// none is listed. Listed events get the written status, `ordinary` by default.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HideLit {
    pub label: Option<String>,
    pub entries: Vec<(MapSide, String)>,
    /// Printed as its child alone; used for imports that are identities on behaviour.
    pub elided: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecExpr {
    Named(String),
    Presentation(Body),
    Enrich(Box<SpecExpr>, Body),
    /// `A then B` where `B` is a specification rather than a body.
    Then(Box<SpecExpr>, Box<SpecExpr>),
    Sum(Box<SpecExpr>, Box<SpecExpr>),
    Translate(Box<SpecExpr>, Renaming),
    Hide(Box<SpecExpr>, HideLit),
    /// A first-order specification used in the Event-B institution.
    Embed(Box<SpecExpr>),
}

impl SpecExpr {
    pub fn named(n: &str) -> Self {
        SpecExpr::Named(n.into())
    }

    pub fn sum(a: SpecExpr, b: SpecExpr) -> Self {
        SpecExpr::Sum(Box::new(a), Box::new(b))
    }
}

/// Named specifications, defined in order.
#[derive(Clone, Debug, Default)]
pub struct Library {
    order: Vec<String>,
    defs: BTreeMap<String, SpecExpr>,
    sigs: BTreeMap<String, EvtSignature>,
}

impl Library {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a definition after checking it; returns its signature.
    pub fn define(&mut self, name: &str, expr: SpecExpr) -> Result<EvtSignature, SpecError> {
        if self.defs.contains_key(name) {
            return Err(SpecError::Duplicate(name.into()));
        }
        let sig = self.sig_of(&expr).map_err(|e| SpecError::Invalid(format!("in `{name}`: {e}")))?;
        self.order.push(name.into());
        self.defs.insert(name.into(), expr);
        self.sigs.insert(name.into(), sig.clone());
        Ok(sig)
    }

    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn get(&self, name: &str) -> Result<&SpecExpr, SpecError> {
        self.defs.get(name).ok_or_else(|| SpecError::Unknown(name.into()))
    }

    pub fn sig(&self, name: &str) -> Result<&EvtSignature, SpecError> {
        self.sigs.get(name).ok_or_else(|| SpecError::Unknown(name.into()))
    }

    pub fn sig_of(&self, e: &SpecExpr) -> Result<EvtSignature, SpecError> {
        match e {
            SpecExpr::Named(n) => self.sig(n).cloned(),
            SpecExpr::Presentation(b) => b.extend_signature(&EvtSignature::default()),
            SpecExpr::Enrich(base, b) => b.extend_signature(&self.sig_of(base)?),
            SpecExpr::Then(a, b) | SpecExpr::Sum(a, b) => Ok(self.sig_of(a)?.union(&self.sig_of(b)?)?),
            SpecExpr::Translate(sp, r) => Ok(renaming_morphism(&self.sig_of(sp)?, r)?.target),
            SpecExpr::Hide(sp, h) => Ok(hide_morphism(&self.sig_of(sp)?, h)?.source),
            SpecExpr::Embed(sp) => {
                let s = self.sig_of(sp)?;
                if !s.vars.is_empty() || s.events.len() != 1 {
                    return Err(SpecError::Invalid("only first-order specifications can be embedded".into()));
                }
                Ok(s)
            }
        }
    }

    /// Closed first-order axioms implied by `e`, over `sig_of(e)`.
    pub(crate) fn closed_axioms(&self, e: &SpecExpr) -> Result<Vec<Formula>, SpecError> {
        Ok(match e {
            SpecExpr::Named(n) => self.closed_axioms(self.get(n)?)?,
            SpecExpr::Presentation(b) => b.closed_axioms(),
            SpecExpr::Enrich(base, b) => {
                let mut v = self.closed_axioms(base)?;
                v.extend(b.closed_axioms());
                v
            }
            SpecExpr::Then(a, b) | SpecExpr::Sum(a, b) => {
                let mut v = self.closed_axioms(a)?;
                v.extend(self.closed_axioms(b)?);
                v
            }
            SpecExpr::Translate(sp, r) => {
                let m = renaming_morphism(&self.sig_of(sp)?, r)?;
                self.closed_axioms(sp)?
                    .iter()
                    .map(|f| crate::fopeq::translate_formula(&m.fopeq, f))
                    .collect::<Result<_, _>>()?
            }
            SpecExpr::Hide(sp, _) | SpecExpr::Embed(sp) => self.closed_axioms(sp)?,
        })
    }
}

fn invalid<T>(msg: String) -> Result<T, SpecError> {
    Err(SpecError::Invalid(msg))
}

/// The morphism a renaming literal induces from `source` onto its image.
pub fn renaming_morphism(source: &EvtSignature, r: &Renaming) -> Result<EvtMorphism, SpecError> {
    let (mut ev, mut vs, mut so, mut op, mut pr) =
        (BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    let mut forced: BTreeMap<String, Status> = BTreeMap::new();
    for (from, to) in &r.entries {
        let n = &from.name;
        if let Some(st) = source.events.get(n) {
            if let Some(want) = from.status {
                if want != *st {
                    return invalid(format!("event `{n}` has status {st}, not {want}"));
                }
            }
            if let Some(s) = to.status {
                forced.insert(to.name.clone(), forced.get(&to.name).map_or(s, |o| o.sup(s)));
            }
            ev.insert(n.clone(), to.name.clone());
            continue;
        }
        if from.status.is_some() || to.status.is_some() {
            return invalid(format!("`{n}` is not an event of the source"));
        }
        let map = if source.vars.contains_key(n) {
            &mut vs
        } else if source.fopeq.sorts.contains(n) {
            &mut so
        } else if source.fopeq.ops.contains_key(n) {
            &mut op
        } else if source.fopeq.preds.contains_key(n) {
            &mut pr
        } else {
            return invalid(format!("`{n}` is not in the source signature"));
        };
        map.insert(n.clone(), to.name.clone());
    }
    let pick = |m: &BTreeMap<String, String>, k: &String| m.get(k).cloned().unwrap_or_else(|| k.clone());
    let mut tf = FopeqSignature::new();
    for s in &source.fopeq.sorts {
        tf.sorts.insert(pick(&so, s));
    }
    let map_sort = |s: &Sort| match s {
        Sort::User(u) => Sort::User(pick(&so, u)),
        other => other.clone(),
    };
    for (name, p) in &source.fopeq.ops {
        let img = OpProfile { args: p.args.iter().map(map_sort).collect(), result: map_sort(&p.result) };
        let t = pick(&op, name);
        match tf.ops.get(&t) {
            Some(q) if *q != img => return invalid(format!("operations identified as `{t}` have different profiles")),
            _ => {
                tf.ops.insert(t, img);
            }
        }
    }
    for (name, args) in &source.fopeq.preds {
        let img: Vec<Sort> = args.iter().map(map_sort).collect();
        let t = pick(&pr, name);
        match tf.preds.get(&t) {
            Some(q) if *q != img => return invalid(format!("predicates identified as `{t}` have different profiles")),
            _ => {
                tf.preds.insert(t, img);
            }
        }
    }
    let fm = FopeqMorphism::from_renaming(&source.fopeq, &tf, &so, &op, &pr)?;
    let mut target = EvtSignature::new(tf);
    for (e, st) in &source.events {
        let t = pick(&ev, e);
        let s = target.events.get(&t).map_or(*st, |o| o.sup(*st));
        target.events.insert(t, s);
    }
    for (t, s) in forced {
        target.events.insert(t, s);
    }
    for (v, s) in &source.vars {
        let t = pick(&vs, v);
        let img = map_sort(s);
        match target.vars.get(&t) {
            Some(q) if *q != img => return invalid(format!("variables identified as `{t}` have different sorts")),
            _ => {
                target.vars.insert(t, img);
            }
        }
    }
    target.validate()?;
    Ok(EvtMorphism::from_renaming(source, &target, fm, &ev, &vs, StatusRule::NonDecreasing)?)
}

/// The kept signature and its morphism into `child`.
pub fn hide_morphism(child: &EvtSignature, h: &HideLit) -> Result<EvtMorphism, SpecError> {
    let mut source = EvtSignature::new(child.fopeq.clone());
    let (mut ev, mut vs) = (BTreeMap::new(), BTreeMap::new());
    ev.insert(INIT.to_string(), INIT.to_string());
    let mut any_var = false;
    for (side, target) in &h.entries {
        if child.events.contains_key(target) {
            source.events.insert(side.name.clone(), side.status.unwrap_or_default());
            ev.insert(side.name.clone(), target.clone());
        } else if let Some(s) = child.vars.get(target) {
            if side.status.is_some() {
                return invalid(format!("`{target}` is a variable, not an event"));
            }
            any_var = true;
            source.vars.insert(side.name.clone(), s.clone());
            vs.insert(side.name.clone(), target.clone());
        } else {
            return invalid(format!("`{target}` is not an event or variable of the hidden specification"));
        }
    }
    if !any_var {
        source.vars = child.vars.clone();
        vs = child.vars.keys().map(|v| (v.clone(), v.clone())).collect();
    }
    source.validate()?;
    let fm = FopeqMorphism::identity(&child.fopeq);
    Ok(EvtMorphism::from_renaming(&source, child, fm, &ev, &vs, StatusRule::NonDecreasing)?)
}

/// Events and variables named in a hide literal, for diagnostics.
pub fn hidden_names(child: &EvtSignature, h: &HideLit) -> BTreeSet<String> {
    let kept: BTreeSet<&String> = h.entries.iter().map(|(_, t)| t).collect();
    child.events.keys().chain(child.vars.keys()).filter(|n| n.as_str() != INIT && !kept.contains(n)).cloned().collect()
}

#[cfg(test)]
mod tests;
