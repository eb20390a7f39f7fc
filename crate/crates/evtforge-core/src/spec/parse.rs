//! Reader for the specification notation.
//!
//! ```text
//! spec M0 =
//!   CD
//! then
//!   ops n:ℕ
//!   . n ≤ d
//!   Events
//!     INITIALISATION thenAct n := 0
//!     ML_out ordinary when n < d thenAct n := n+1
//! end
//! ```
//!
//! Expressions combine named specifications with `and`, `then`, `with σ{a ↦ b}` and
//! `hide via σ{a, b}`; a body may follow `then` or stand alone. Bodies are parsed first
//! and resolved against the signature of what they enrich.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Body, Decl, HideLit, Library, MapSide, Renaming, SAction, SpecError, SpecExpr, SugarEvent};
use crate::evt::{EvtSignature, Status, INIT};
use crate::eventb::INITIALISATION;
use crate::fopeq::Sort;
use crate::syntax::{lex, parse_expr, type_expr, Cursor, Expr, Scope, SyntaxError, Tok, TypeAnn};

enum RawAction {
    Assign(Vec<String>, Vec<Expr>),
    Becomes(Vec<String>, Expr),
}

struct RawEvent {
    name: String,
    status: Status,
    params: Vec<(String, Option<Expr>)>,
    guards: Vec<Expr>,
    witnesses: Vec<Expr>,
    actions: Vec<RawAction>,
}

#[derive(Default)]
struct RawBody {
    sorts: Vec<String>,
    decls: Vec<(Vec<String>, Expr)>,
    axioms: Vec<Expr>,
    variant: Option<Expr>,
    events: Option<Vec<RawEvent>>,
}

enum Raw {
    Named(String),
    Presentation(RawBody),
    Enrich(Box<Raw>, RawBody),
    Then(Box<Raw>, Box<Raw>),
    Sum(Box<Raw>, Box<Raw>),
    Translate(Box<Raw>, Renaming),
    Hide(Box<Raw>, HideLit),
}

/// A refinement declaration `refinement R : A to C [downgrade] = a ↦ b, … end`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinementDecl {
    pub name: String,
    pub abstract_spec: String,
    pub concrete_spec: String,
    pub entries: Vec<(MapSide, MapSide)>,
    /// Accept morphisms that lower an event's status (reported as a warning).
    pub downgrade: bool,
}

const BODY_WORDS: &[&str] = &["sort", "sorts", "ops", "variant", "Events"];
const EVENT_WORDS: &[&str] = &["any", "when", "with", "thenAct"];

fn at_body(c: &Cursor<'_>) -> bool {
    c.peek() == Some(&Tok::Dot) || BODY_WORDS.iter().any(|w| c.is_word(w))
}

fn status_word(c: &Cursor<'_>, k: usize) -> Option<Status> {
    match c.peek_at(k) {
        Some(Tok::Ident(w)) => w.parse().ok(),
        _ => None,
    }
}

fn at_event_start(c: &Cursor<'_>) -> bool {
    match c.peek() {
        Some(Tok::Ident(w)) if w == INITIALISATION => true,
        Some(Tok::Ident(_)) => status_word(c, 1).is_some() || EVENT_WORDS.iter().any(|w| c.is_word_at(1, w)),
        _ => false,
    }
}

fn sort_name(c: &mut Cursor<'_>) -> Result<String, SyntaxError> {
    match c.peek() {
        Some(Tok::Nat) => {
            c.next();
            Ok("ℕ".into())
        }
        Some(Tok::IntSet) => {
            c.next();
            Ok("ℤ".into())
        }
        _ => c.ident(),
    }
}

fn body(c: &mut Cursor<'_>) -> Result<RawBody, SyntaxError> {
    let mut b = RawBody::default();
    loop {
        if c.eat_word("sort") || c.eat_word("sorts") {
            b.sorts.push(sort_name(c)?);
            while c.eat(&Tok::Comma) {
                b.sorts.push(sort_name(c)?);
            }
        } else if c.eat_word("ops") {
            loop {
                let names = c.ident_list()?;
                c.expect(&Tok::Colon)?;
                b.decls.push((names, type_expr(c)?));
                let more = matches!(c.peek(), Some(Tok::Ident(_)))
                    && matches!(c.peek_at(1), Some(Tok::Colon | Tok::Comma));
                if !more {
                    break;
                }
            }
        } else if c.eat(&Tok::Dot) {
            loop {
                b.axioms.push(parse_expr(c)?);
                c.eat(&Tok::Dot);
                if c.at_end() || c.is_word("end") || c.peek() == Some(&Tok::RParen) || at_body(c) {
                    break;
                }
            }
        } else if c.eat_word("variant") {
            b.variant = Some(parse_expr(c)?);
        } else if c.eat_word("Events") {
            let evs = b.events.get_or_insert_with(Vec::new);
            while !c.at_end() && !c.is_word("end") && c.peek() != Some(&Tok::RParen) {
                evs.push(event(c)?);
            }
        } else {
            return Ok(b);
        }
    }
}

fn event(c: &mut Cursor<'_>) -> Result<RawEvent, SyntaxError> {
    if !matches!(c.peek(), Some(Tok::Ident(_))) {
        return c.unexpected("an event");
    }
    let mut name = c.ident()?;
    if name == INITIALISATION {
        name = INIT.into();
    }
    let status = match status_word(c, 0) {
        Some(s) => {
            c.next();
            s
        }
        None => Status::Ordinary,
    };
    let mut ev = RawEvent { name, status, params: Vec::new(), guards: Vec::new(), witnesses: Vec::new(), actions: Vec::new() };
    if c.eat_word("any") {
        loop {
            let p = c.ident()?;
            let ty = if c.eat(&Tok::Colon) { Some(type_expr(c)?) } else { None };
            ev.params.push((p, ty));
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
    }
    let stop = |c: &Cursor<'_>| {
        c.at_end() || c.is_word("end") || matches!(c.peek(), Some(Tok::Semi | Tok::RParen)) || EVENT_WORDS.iter().any(|w| c.is_word(w)) || at_event_start(c)
    };
    if c.eat_word("when") {
        while !stop(c) {
            ev.guards.push(parse_expr(c)?);
        }
    }
    if c.eat_word("with") {
        while !stop(c) {
            ev.witnesses.push(parse_expr(c)?);
        }
    }
    if c.eat_word("thenAct") {
        while matches!(c.peek(), Some(Tok::Ident(_))) && matches!(c.peek_at(1), Some(Tok::Comma | Tok::Assign | Tok::Becomes)) {
            ev.actions.push(action(c)?);
        }
    }
    c.eat(&Tok::Semi);
    Ok(ev)
}

fn action(c: &mut Cursor<'_>) -> Result<RawAction, SyntaxError> {
    let vars = c.ident_list()?;
    if c.eat(&Tok::Assign) {
        let mut exprs = alloc::vec![parse_expr(c)?];
        while c.eat(&Tok::Comma) {
            exprs.push(parse_expr(c)?);
        }
        if exprs.len() != vars.len() {
            return c.error(alloc::format!("{} variables but {} expressions", vars.len(), exprs.len()));
        }
        Ok(RawAction::Assign(vars, exprs))
    } else if c.eat(&Tok::Becomes) {
        Ok(RawAction::Becomes(vars, parse_expr(c)?))
    } else {
        c.unexpected("`:=` or `:|`")
    }
}

fn map_side(c: &mut Cursor<'_>) -> Result<MapSide, SyntaxError> {
    if c.eat(&Tok::LAngle) {
        let name = c.ident()?;
        c.expect(&Tok::Comma)?;
        let w = c.ident()?;
        let st: Status = w.parse().or_else(|m: String| c.error(m))?;
        c.expect(&Tok::RAngle)?;
        Ok(MapSide { name, status: Some(st) })
    } else {
        Ok(MapSide::plain(&c.ident()?))
    }
}

/// `[label] { entries }`
fn literal<T>(
    c: &mut Cursor<'_>,
    mut entry: impl FnMut(&mut Cursor<'_>) -> Result<T, SyntaxError>,
) -> Result<(Option<String>, Vec<T>), SyntaxError> {
    let label = if matches!(c.peek(), Some(Tok::Ident(_))) && c.peek_at(1) == Some(&Tok::LBrace) { Some(c.ident()?) } else { None };
    c.expect(&Tok::LBrace)?;
    let mut out = Vec::new();
    if !c.eat(&Tok::RBrace) {
        loop {
            out.push(entry(c)?);
            if c.eat(&Tok::RBrace) {
                break;
            }
            c.expect(&Tok::Comma)?;
        }
    }
    Ok((label, out))
}

fn renaming_entry(c: &mut Cursor<'_>) -> Result<(MapSide, MapSide), SyntaxError> {
    let from = map_side(c)?;
    c.expect(&Tok::MapsTo)?;
    Ok((from, map_side(c)?))
}

fn hide_entry(c: &mut Cursor<'_>) -> Result<(MapSide, String), SyntaxError> {
    let side = map_side(c)?;
    let target = if c.eat(&Tok::MapsTo) { c.ident()? } else { side.name.clone() };
    Ok((side, target))
}

fn expr(c: &mut Cursor<'_>) -> Result<Raw, SyntaxError> {
    let mut a = sum(c)?;
    while c.eat_word("then") {
        a = if at_body(c) { Raw::Enrich(Box::new(a), body(c)?) } else { Raw::Then(Box::new(a), Box::new(sum(c)?)) };
    }
    Ok(a)
}

fn sum(c: &mut Cursor<'_>) -> Result<Raw, SyntaxError> {
    let mut a = postfix(c)?;
    while c.eat_word("and") {
        a = Raw::Sum(Box::new(a), Box::new(postfix(c)?));
    }
    Ok(a)
}

fn postfix(c: &mut Cursor<'_>) -> Result<Raw, SyntaxError> {
    let mut a = if c.eat(&Tok::LParen) {
        let inner = expr(c)?;
        c.expect(&Tok::RParen)?;
        inner
    } else if at_body(c) {
        Raw::Presentation(body(c)?)
    } else {
        Raw::Named(c.ident()?)
    };
    loop {
        if c.eat_word("with") {
            let (label, entries) = literal(c, renaming_entry)?;
            a = Raw::Translate(Box::new(a), Renaming { label, entries });
        } else if c.is_word("hide") && c.is_word_at(1, "via") {
            c.next();
            c.next();
            let (label, entries) = literal(c, hide_entry)?;
            a = Raw::Hide(Box::new(a), HideLit { label, entries, elided: false });
        } else {
            return Ok(a);
        }
    }
}

// ---------------------------------------------------------------------------------------
// Resolution

fn resolve(raw: Raw, lib: &Library) -> Result<SpecExpr, SpecError> {
    Ok(match raw {
        Raw::Named(n) => {
            lib.sig(&n)?;
            SpecExpr::Named(n)
        }
        Raw::Presentation(b) => SpecExpr::Presentation(resolve_body(b, &EvtSignature::default())?),
        Raw::Enrich(base, b) => {
            let base = resolve(*base, lib)?;
            let sig = lib.sig_of(&base)?;
            SpecExpr::Enrich(Box::new(base), resolve_body(b, &sig)?)
        }
        Raw::Then(a, b) => SpecExpr::Then(Box::new(resolve(*a, lib)?), Box::new(resolve(*b, lib)?)),
        Raw::Sum(a, b) => SpecExpr::Sum(Box::new(resolve(*a, lib)?), Box::new(resolve(*b, lib)?)),
        Raw::Translate(a, r) => SpecExpr::Translate(Box::new(resolve(*a, lib)?), r),
        Raw::Hide(a, h) => SpecExpr::Hide(Box::new(resolve(*a, lib)?), h),
    })
}

fn resolve_body(raw: RawBody, base: &EvtSignature) -> Result<Body, SpecError> {
    let machine = raw.events.is_some();
    let mut body = Body { sorts: raw.sorts, events: if machine { Some(Vec::new()) } else { None }, ..Body::default() };
    let mut sig = body.extend_signature(base)?;
    for (names, ty) in raw.decls {
        let ty = TypeAnn::from_expr(&ty, &sig.fopeq)?;
        body.decls.push(Decl { names, ty });
        sig = body.extend_signature(base)?;
    }
    // Events are added with their statuses so the variant sees them.
    let mut skeleton = body.clone();
    skeleton.events = raw.events.as_ref().map(|es| es.iter().map(|e| SugarEvent::new(&e.name, e.status)).collect());
    let sig = skeleton.extend_signature(base)?;
    let no_vars = Default::default();
    let vars = if machine { &sig.vars } else { &no_vars };
    let mut scope = Scope::new(&sig.fopeq, vars);
    scope.primes = false;
    for a in &raw.axioms {
        body.axioms.push(scope.formula(a)?);
    }
    if let Some(v) = &raw.variant {
        body.variant = Some(scope.term(v)?);
    }
    for e in raw.events.into_iter().flatten() {
        body.events.as_mut().unwrap().push(resolve_event(e, &sig)?);
    }
    Ok(body)
}

fn resolve_event(e: RawEvent, sig: &EvtSignature) -> Result<SugarEvent, SpecError> {
    let mut ev = SugarEvent::new(&e.name, e.status);
    let probe = Scope::new(&sig.fopeq, &sig.vars);
    for (p, ty) in &e.params {
        let sort = match ty {
            Some(t) => TypeAnn::from_expr(t, &sig.fopeq)?.sort(&sig.fopeq)?,
            None => e.guards.iter().chain(&e.witnesses).find_map(|g| probe.infer_sort(p, g)).unwrap_or(Sort::Int),
        };
        ev.params.push((p.clone(), sort));
    }
    let mut scope = Scope::new(&sig.fopeq, &sig.vars);
    scope.locals = ev.params.clone();
    scope.primes = false;
    for g in &e.guards {
        ev.guards.push(scope.formula(g)?);
    }
    scope.primes = true;
    for w in &e.witnesses {
        ev.witnesses.push(scope.formula(w)?);
    }
    for a in e.actions {
        ev.actions.push(match a {
            RawAction::Assign(vs, es) => {
                scope.primes = false;
                for v in &vs {
                    if !sig.vars.contains_key(v) {
                        return Err(SpecError::Invalid(alloc::format!("{}: `{v}` is not a variable", e.name)));
                    }
                }
                SAction::Assign(vs, es.iter().map(|x| scope.term(x)).collect::<Result<_, _>>()?)
            }
            RawAction::Becomes(vs, p) => {
                scope.primes = true;
                SAction::Becomes(vs, scope.formula(&p)?)
            }
        });
    }
    Ok(ev)
}

fn refinement(c: &mut Cursor<'_>) -> Result<RefinementDecl, SyntaxError> {
    c.expect_word("refinement")?;
    let name = c.ident()?;
    c.expect(&Tok::Colon)?;
    let abstract_spec = c.ident()?;
    c.expect_word("to")?;
    let concrete_spec = c.ident()?;
    let downgrade = c.eat_word("downgrade");
    c.expect(&Tok::Eq)?;
    let mut entries = Vec::new();
    while !c.at_end() && !c.is_word("end") {
        entries.push(renaming_entry(c)?);
        c.eat(&Tok::Comma);
    }
    c.expect_word("end")?;
    Ok(RefinementDecl { name, abstract_spec, concrete_spec, entries, downgrade })
}

/// Reads `spec` and `refinement` declarations, defining the specifications in `lib` in
/// order. Returns the refinement declarations.
pub fn parse_library(src: &str, lib: &mut Library) -> Result<Vec<RefinementDecl>, SpecError> {
    let toks = lex(src)?;
    let mut c = Cursor::new(&toks);
    let mut refinements = Vec::new();
    while !c.at_end() {
        if c.is_word("refinement") {
            refinements.push(refinement(&mut c)?);
            continue;
        }
        c.expect_word("spec")?;
        let name = c.ident()?;
        c.expect(&Tok::Eq)?;
        let raw = if at_body(&c) { Raw::Presentation(body(&mut c)?) } else { expr(&mut c)? };
        c.expect_word("end")?;
        let e = resolve(raw, lib).map_err(|e| match e {
            SpecError::Syntax(SyntaxError::Resolve(m)) => SpecError::Invalid(alloc::format!("in `{name}`: {m}")),
            other => other,
        })?;
        lib.define(&name, e)?;
    }
    Ok(refinements)
}

/// Reads a single specification expression over `lib`.
pub fn parse_spec_expr(src: &str, lib: &Library) -> Result<SpecExpr, SpecError> {
    let toks = lex(src)?;
    let mut c = Cursor::new(&toks);
    let raw = expr(&mut c)?;
    if !c.at_end() {
        return Err(c.unexpected::<()>("end of input").unwrap_err().into());
    }
    resolve(raw, lib)
}

impl core::fmt::Display for RefinementDecl {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{} : {} to {}", self.name, self.abstract_spec, self.concrete_spec)
    }
}
