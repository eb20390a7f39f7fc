//! Event-B into structured specifications.
//!
//! Sentence level: invariants become before/after sentences of every event, the variant
//! becomes a decrease sentence for convergent (strict) and anticipated (weak) events, and
//! an event becomes a single sentence `∃ p̄ · G ∧ W ∧ BA`.
//!
//! Specification level: a context becomes a first-order presentation (enriching the
//! contexts it extends); a machine becomes a presentation of its new variables, invariants,
//! variant and events, enriching its abstract machine, the contexts it sees (embedded) and
//! one import per refinement that renames an abstract event.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::eventb::{ActionKind, Component, ContextDef, EbSpecification, Environment, EventDef, EventbError, MachineDef};
use crate::evt::{EvtSentence, EvtSignature, Status, INIT};
use crate::fopeq::{Formula, Sort, Term};
use crate::spec::{Body, Decl, HideLit, Library, MapSide, Renaming, SAction, SpecError, SpecExpr, SugarEvent};
use crate::syntax::{Scope, TypeAnn};

/// `𝕀`: `⟨e, φ ∧ φ′⟩` for every event `e`.
pub fn translate_invariant(sig: &EvtSignature, inv: &Formula) -> Vec<EvtSentence> {
    let vars: BTreeSet<String> = sig.vars.keys().cloned().collect();
    let body = Formula::And(alloc::vec![inv.clone(), inv.prime_vars(&vars)]);
    sig.events.keys().map(|e| EvtSentence::new(e, body.clone())).collect()
}

/// `𝕍`: `n′ < n` for convergent events, `n′ ≤ n` for anticipated ones.
pub fn translate_variant(sig: &EvtSignature, n: &Term) -> Vec<EvtSentence> {
    let vars: BTreeSet<String> = sig.vars.keys().cloned().collect();
    let after = prime_term(n, &vars);
    sig.events
        .iter()
        .filter_map(|(e, st)| match st {
            Status::Convergent => Some(EvtSentence::new(e, Formula::lt(after.clone(), n.clone()))),
            Status::Anticipated => Some(EvtSentence::new(e, Formula::le(after.clone(), n.clone()))),
            Status::Ordinary => None,
        })
        .collect()
}

pub(crate) fn prime_term(t: &Term, vars: &BTreeSet<String>) -> Term {
    match t {
        Term::Var { name, primed: false } if vars.contains(name) => Term::primed(name),
        Term::Op { name, args } => Term::app(name, args.iter().map(|a| prime_term(a, vars)).collect()),
        Term::Arith(op, a, b) => Term::arith(*op, prime_term(a, vars), prime_term(b, vars)),
        other => other.clone(),
    }
}

/// `𝔼`: `⟨e, ∃ p̄ · G ∧ W ∧ BA⟩`, where `v := E` contributes `v′ = E` and `v :| P`
/// contributes `P`. Variables not assigned are unconstrained.
pub fn translate_event(e: &SugarEvent) -> EvtSentence {
    let mut parts: Vec<Formula> = Vec::new();
    let push = |f: &Formula, parts: &mut Vec<Formula>| match f {
        Formula::True => {}
        Formula::And(xs) => parts.extend(xs.iter().cloned()),
        other => parts.push(other.clone()),
    };
    for g in e.guards.iter().chain(&e.witnesses) {
        push(g, &mut parts);
    }
    for a in &e.actions {
        match a {
            SAction::Assign(vs, es) => {
                for (v, x) in vs.iter().zip(es) {
                    parts.push(Formula::eq(Term::primed(v), x.clone()));
                }
            }
            SAction::Becomes(_, p) => push(p, &mut parts),
        }
    }
    let body = match parts.len() {
        0 => Formula::True,
        1 => parts.pop().unwrap(),
        _ => Formula::And(parts),
    };
    let body = if e.params.is_empty() { body } else { Formula::exists(e.params.clone(), body) };
    EvtSentence::new(&e.name, body)
}

// ---------------------------------------------------------------------------------------
// Specification level

/// Options for the specification-level translation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Keep imports for refinements that do not rename their event.
    pub no_elide: bool,
}

/// Specification names are the upper-cased component names.
pub fn spec_name(component: &str) -> String {
    component.to_uppercase()
}

fn err(owner: &str, msg: String) -> SpecError {
    SpecError::Invalid(format!("{owner}: {msg}"))
}

fn from_eventb(e: EventbError) -> SpecError {
    match e {
        EventbError::Syntax(s) => SpecError::Syntax(s),
        EventbError::Evt(e) => SpecError::Evt(e),
        EventbError::Fopeq(e) => SpecError::Fopeq(e),
        other => SpecError::Invalid(other.to_string()),
    }
}

/// Translates every component, in order, into `lib`. Returns the names defined.
pub fn translate_spec(
    spec: &EbSpecification,
    env: &Environment,
    lib: &mut Library,
    opts: TranslateOptions,
) -> Result<Vec<String>, SpecError> {
    let mut names = Vec::new();
    for c in &spec.components {
        let (name, expr) = match c {
            Component::Context(cx) => (spec_name(&cx.name), translate_context(cx, env)?),
            Component::Machine(m) => (spec_name(&m.name), translate_machine(m, env, opts)?),
        };
        let got = lib.define(&name, expr)?;
        let want = env.signature(c.name()).map_err(from_eventb)?;
        if got != want {
            return Err(err(&name, "translated signature differs from the extracted one".into()));
        }
        names.push(name);
    }
    Ok(names)
}

/// A context as a first-order presentation over the contexts it extends.
pub fn translate_context(cx: &ContextDef, env: &Environment) -> Result<SpecExpr, SpecError> {
    let info = env.context(&cx.name).map_err(from_eventb)?;
    let mut body = Body { sorts: cx.sets.clone(), ..Body::default() };
    if body.sorts.is_empty() && info.constants.iter().any(|(_, t)| *t == TypeAnn::Nat) {
        body.sorts.push("ℕ".into());
    }
    for (c, t) in &info.constants {
        body.decls.push(Decl { names: alloc::vec![c.clone()], ty: t.clone() });
    }
    let no_vars = BTreeMap::new();
    for (i, ax) in cx.axioms.iter().enumerate() {
        if info.typing.contains(&i) || ax.theorem {
            continue;
        }
        let f = Scope::new(&info.sig, &no_vars).formula(&ax.pred)?;
        body.axioms.push(f);
    }
    let mut base: Option<SpecExpr> = None;
    for e in &cx.extends {
        let n = SpecExpr::named(&spec_name(e));
        base = Some(match base {
            None => n,
            Some(b) => SpecExpr::sum(b, n),
        });
    }
    Ok(match base {
        None => SpecExpr::Presentation(body),
        Some(b) => SpecExpr::Enrich(alloc::boxed::Box::new(b), body),
    })
}

/// A machine as an enrichment of its imports.
pub fn translate_machine(m: &MachineDef, env: &Environment, opts: TranslateOptions) -> Result<SpecExpr, SpecError> {
    use alloc::boxed::Box;
    let info = env.machine(&m.name).map_err(from_eventb)?;
    let sig = &info.sig;
    let mut imports: Vec<SpecExpr> = Vec::new();

    if let (Some(a), Some(asig)) = (&m.refines, &info.abstract_sig) {
        let a_name = spec_name(a);
        let refined: BTreeSet<&String> = m.events.iter().flat_map(|e| e.refines.iter()).collect();
        // Events refined under their own name are re-specified by the body; they stay in
        // the abstract import as ordinary events so the status can be set by the body.
        let same_name: BTreeSet<&String> =
            m.events.iter().flat_map(|e| e.refines.iter().filter(move |r| *r == e.evt_name())).collect();
        let concrete: BTreeMap<&str, Status> = m.events.iter().map(|e| (e.evt_name(), e.status)).collect();
        let plain = refined.iter().all(|r| same_name.contains(r))
            && same_name.iter().all(|r| asig.events[*r] <= concrete[r.as_str()]);
        if plain {
            imports.push(SpecExpr::named(&a_name));
        } else {
            let mut entries = Vec::new();
            for (e, st) in asig.proper_events() {
                if !refined.contains(e) {
                    entries.push((MapSide { name: e.clone(), status: Some(*st) }, e.clone()));
                } else if same_name.contains(e) {
                    entries.push((MapSide { name: e.clone(), status: Some(Status::Ordinary) }, e.clone()));
                }
            }
            let h = HideLit { label: None, entries, elided: true };
            imports.push(SpecExpr::Hide(Box::new(SpecExpr::named(&a_name)), h));
        }
        for s in &m.sees {
            imports.push(SpecExpr::Embed(Box::new(SpecExpr::named(&spec_name(s)))));
        }
        for e in &m.events {
            for r in &e.refines {
                let renamed = r != e.evt_name();
                if !renamed && !opts.no_elide {
                    continue;
                }
                let h = HideLit {
                    label: Some("σh".into()),
                    entries: alloc::vec![(MapSide::plain(r), r.clone())],
                    elided: false,
                };
                let hidden = SpecExpr::Hide(Box::new(SpecExpr::named(&a_name)), h);
                imports.push(SpecExpr::Translate(
                    Box::new(hidden),
                    Renaming {
                        label: Some("σm".into()),
                        entries: alloc::vec![(MapSide::plain(r), MapSide::plain(e.evt_name()))],
                    },
                ));
            }
        }
    } else {
        for s in &m.sees {
            imports.push(SpecExpr::Embed(Box::new(SpecExpr::named(&spec_name(s)))));
        }
    }

    let mut body = Body { events: Some(Vec::new()), ..Body::default() };
    for (v, t) in &info.new_vars {
        body.decls.push(Decl { names: alloc::vec![v.clone()], ty: t.clone() });
    }
    let mut scope = Scope::new(&sig.fopeq, &sig.vars);
    scope.primes = false;
    for (i, inv) in m.invariants.iter().enumerate() {
        if info.typing.contains(&i) || inv.theorem {
            continue;
        }
        body.axioms.push(scope.formula(&inv.pred)?);
    }
    if let Some(v) = &m.variant {
        body.variant = Some(scope.term(v)?);
    }
    let events = body.events.as_mut().unwrap();
    for e in &m.events {
        events.push(sugar_event(m, e, sig)?);
    }

    let base = imports.into_iter().reduce(SpecExpr::sum);
    Ok(match base {
        None => SpecExpr::Presentation(body),
        Some(b) => SpecExpr::Enrich(Box::new(b), body),
    })
}

fn sugar_event(m: &MachineDef, e: &EventDef, sig: &EvtSignature) -> Result<SugarEvent, SpecError> {
    let owner = format!("{}.{}", m.name, e.name);
    let name = e.evt_name().to_string();
    let status = if name == INIT { Status::Ordinary } else { e.status };
    let mut ev = SugarEvent::new(&name, status);
    // Parameters are typed by `p ∈ T` guards, else inferred from their uses.
    let mut typing: BTreeSet<usize> = BTreeSet::new();
    let probe = Scope::new(&sig.fopeq, &sig.vars);
    for p in &e.params {
        let mut sort = None;
        for (i, g) in e.guards.iter().enumerate() {
            if let crate::syntax::Expr::Rel(crate::syntax::Rel::In, lhs, rhs) = &g.pred {
                if matches!(&**lhs, crate::syntax::Expr::Name(n) if n == p) {
                    if let Ok(t) = TypeAnn::from_expr(rhs, &sig.fopeq) {
                        sort = Some(t.sort(&sig.fopeq)?);
                        if t.membership(&Term::var(p)).is_none() {
                            typing.insert(i);
                        }
                        break;
                    }
                }
            }
        }
        let sort = match sort {
            Some(s) => s,
            None => e
                .guards
                .iter()
                .chain(&e.witnesses)
                .find_map(|g| probe.infer_sort(p, &g.pred))
                .unwrap_or(Sort::Int),
        };
        ev.params.push((p.clone(), sort));
    }
    let mut scope = Scope::new(&sig.fopeq, &sig.vars);
    scope.locals = ev.params.clone();
    scope.primes = false;
    for (i, g) in e.guards.iter().enumerate() {
        if typing.contains(&i) || g.theorem {
            continue;
        }
        let f = scope.formula(&g.pred).map_err(|x| err(&owner, x.to_string()))?;
        if f != Formula::True {
            ev.guards.push(f);
        }
    }
    scope.primes = true;
    for w in &e.witnesses {
        ev.witnesses.push(scope.formula(&w.pred).map_err(|x| err(&owner, x.to_string()))?);
    }
    for a in &e.actions {
        ev.actions.push(match &a.kind {
            ActionKind::Assign { vars, exprs } => {
                scope.primes = false;
                let ts = exprs.iter().map(|x| scope.term(x)).collect::<Result<Vec<_>, _>>();
                SAction::Assign(vars.clone(), ts.map_err(|x| err(&owner, x.to_string()))?)
            }
            ActionKind::Becomes { vars, pred } => {
                scope.primes = true;
                SAction::Becomes(vars.clone(), scope.formula(pred).map_err(|x| err(&owner, x.to_string()))?)
            }
        });
    }
    Ok(ev)
}
