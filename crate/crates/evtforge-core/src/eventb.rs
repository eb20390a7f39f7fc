//! Event-B machines and contexts: abstract syntax, a plain-text reader and printer, and
//! signature extraction into an environment.
//!
//! Text format:
//!
//! ```text
//! context cd
//!   constants d
//!   axioms
//!     axm1: d ∈ ℕ
//!     axm2: d > 0
//! end
//!
//! machine m0
//!   sees cd
//!   variables n
//!   invariants
//!     inv1: n ∈ ℕ
//!   events
//!     event INITIALISATION
//!       thenAct
//!         act1: n := 0
//!     end
//!     event ML_out status ordinary
//!       when
//!         grd1: n < d
//!       thenAct
//!         act1: n := n+1
//!     end
//! end
//! ```

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::evt::{comorphism_sign, EvtError, EvtSignature, Status, INIT};
use crate::fopeq::{FopeqError, FopeqSignature, OpProfile, Sort};
use crate::syntax::{lex, parse_expr, print_expr, Cursor, Expr, Rel, SyntaxError, Tok, TypeAnn};

/// Event-B name of the initialising event.
pub const INITIALISATION: &str = "INITIALISATION";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EventbError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("`{0}` is defined more than once")]
    Duplicate(String),
    #[error("`{0}` is not defined before its use")]
    Unknown(String),
    #[error("in `{0}`: {1}")]
    Invalid(String, String),
    #[error(transparent)]
    Evt(#[from] EvtError),
    #[error(transparent)]
    Fopeq(#[from] FopeqError),
}

impl EventbError {
    pub fn is_parse(&self) -> bool {
        matches!(self, EventbError::Syntax(e) if e.is_parse())
    }
}

/// `label: predicate`, optionally marked as a theorem.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelled {
    pub label: Option<String>,
    pub pred: Expr,
    pub theorem: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionKind {
    /// `v1, v2 := E1, E2`
    Assign { vars: Vec<String>, exprs: Vec<Expr> },
    /// `v1, v2 :| P`
    Becomes { vars: Vec<String>, pred: Expr },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub label: Option<String>,
    pub kind: ActionKind,
}

impl Action {
    pub fn assigned(&self) -> &[String] {
        match &self.kind {
            ActionKind::Assign { vars, .. } | ActionKind::Becomes { vars, .. } => vars,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventDef {
    pub name: String,
    pub status: Status,
    pub refines: Vec<String>,
    pub extended: bool,
    pub params: Vec<String>,
    pub guards: Vec<Labelled>,
    pub witnesses: Vec<Labelled>,
    pub actions: Vec<Action>,
}

impl EventDef {
    pub fn new(name: &str) -> Self {
        EventDef {
            name: name.into(),
            status: Status::Ordinary,
            refines: Vec::new(),
            extended: false,
            params: Vec::new(),
            guards: Vec::new(),
            witnesses: Vec::new(),
            actions: Vec::new(),
        }
    }

    pub fn is_init(&self) -> bool {
        self.name == INITIALISATION
    }

    /// Name of the event in an EVT signature.
    pub fn evt_name(&self) -> &str {
        if self.is_init() {
            INIT
        } else {
            &self.name
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineDef {
    pub name: String,
    pub refines: Option<String>,
    pub sees: Vec<String>,
    pub variables: Vec<String>,
    pub invariants: Vec<Labelled>,
    pub variant: Option<Expr>,
    pub events: Vec<EventDef>,
}

impl MachineDef {
    pub fn init(&self) -> Option<&EventDef> {
        self.events.iter().find(|e| e.is_init())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextDef {
    pub name: String,
    pub extends: Vec<String>,
    pub sets: Vec<String>,
    pub constants: Vec<String>,
    pub axioms: Vec<Labelled>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    Context(ContextDef),
    Machine(MachineDef),
}

impl Component {
    pub fn name(&self) -> &str {
        match self {
            Component::Context(c) => &c.name,
            Component::Machine(m) => &m.name,
        }
    }
}

/// An ordered list of machines and contexts; references point backwards only.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EbSpecification {
    pub components: Vec<Component>,
}

impl EbSpecification {
    /// Names unique, references resolve to earlier components of the right kind, one
    /// initialisation per machine, labels unique within each event.
    pub fn validate(&self) -> Result<(), EventbError> {
        let mut kinds: BTreeMap<&str, bool> = BTreeMap::new();
        let need = |kinds: &BTreeMap<&str, bool>, name: &str, machine: bool| match kinds.get(name) {
            Some(m) if *m == machine => Ok(()),
            _ => Err(EventbError::Unknown(name.into())),
        };
        for c in &self.components {
            match c {
                Component::Context(cx) => {
                    for e in &cx.extends {
                        need(&kinds, e, false)?;
                    }
                    unique(&cx.name, cx.sets.iter().chain(&cx.constants))?;
                }
                Component::Machine(m) => {
                    if let Some(a) = &m.refines {
                        need(&kinds, a, true)?;
                    }
                    for s in &m.sees {
                        need(&kinds, s, false)?;
                    }
                    unique(&m.name, m.variables.iter())?;
                    unique(&m.name, m.events.iter().map(|e| &e.name))?;
                    let inits = m.events.iter().filter(|e| e.is_init()).count();
                    if inits != 1 {
                        return Err(EventbError::Invalid(m.name.clone(), format!("{inits} initialisation events")));
                    }
                    for e in &m.events {
                        let labels = e
                            .guards
                            .iter()
                            .chain(&e.witnesses)
                            .filter_map(|l| l.label.as_ref())
                            .chain(e.actions.iter().filter_map(|a| a.label.as_ref()));
                        unique(&format!("{}.{}", m.name, e.name), labels)?;
                    }
                }
            }
            if kinds.insert(c.name(), matches!(c, Component::Machine(_))).is_some() {
                return Err(EventbError::Duplicate(c.name().into()));
            }
        }
        Ok(())
    }
}

fn unique<'a>(owner: &str, names: impl Iterator<Item = &'a String>) -> Result<(), EventbError> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(EventbError::Duplicate(format!("{owner}.{n}")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------------------
// Reader

const MACHINE_WORDS: &[&str] = &["refines", "sees", "variables", "invariants", "variant", "events", "event", "end"];
const CONTEXT_WORDS: &[&str] = &["extends", "sets", "constants", "axioms", "end"];
const EVENT_WORDS: &[&str] = &["status", "refines", "extended", "any", "when", "with", "then", "thenAct", "end"];

fn at_any(c: &Cursor<'_>, words: &[&str]) -> bool {
    words.iter().any(|w| c.is_word(w))
}

/// Labelled predicates until one of `stop` (or end of input).
fn labelled_list(c: &mut Cursor<'_>, stop: &[&str]) -> Result<Vec<Labelled>, SyntaxError> {
    let mut out = Vec::new();
    while !c.at_end() && !at_any(c, stop) {
        let label = if matches!(c.peek(), Some(Tok::Ident(_))) && c.peek_at(1) == Some(&Tok::Colon) {
            let l = c.ident()?;
            c.next();
            Some(l)
        } else {
            None
        };
        let pred = parse_expr(c)?;
        let theorem = c.eat_word("theorem");
        out.push(Labelled { label, pred, theorem });
    }
    Ok(out)
}

fn action(c: &mut Cursor<'_>) -> Result<Action, SyntaxError> {
    let label = if c.peek_at(1) == Some(&Tok::Colon) {
        let l = c.ident()?;
        c.next();
        Some(l)
    } else {
        None
    };
    let vars = c.ident_list()?;
    let kind = if c.eat(&Tok::Assign) {
        let mut exprs = alloc::vec![parse_expr(c)?];
        while c.eat(&Tok::Comma) {
            exprs.push(parse_expr(c)?);
        }
        if exprs.len() != vars.len() {
            return c.error(format!("{} variables but {} expressions", vars.len(), exprs.len()));
        }
        ActionKind::Assign { vars, exprs }
    } else if c.eat(&Tok::Becomes) {
        ActionKind::Becomes { vars, pred: parse_expr(c)? }
    } else {
        return c.unexpected("`:=` or `:|`");
    };
    Ok(Action { label, kind })
}

fn event(c: &mut Cursor<'_>) -> Result<EventDef, SyntaxError> {
    c.expect_word("event")?;
    let mut ev = EventDef::new(&c.ident()?);
    if c.eat_word("status") {
        let w = c.ident()?;
        ev.status = w.parse().or_else(|m: String| c.error(m))?;
    }
    if c.eat_word("refines") {
        ev.refines = c.ident_list()?;
    }
    ev.extended = c.eat_word("extended");
    if c.eat_word("any") {
        ev.params = c.ident_list()?;
    }
    if c.eat_word("when") {
        ev.guards = labelled_list(c, EVENT_WORDS)?;
    }
    if c.eat_word("with") {
        ev.witnesses = labelled_list(c, EVENT_WORDS)?;
    }
    if c.eat_word("thenAct") || c.eat_word("then") {
        while !c.at_end() && !c.is_word("end") {
            ev.actions.push(action(c)?);
        }
    }
    c.expect_word("end")?;
    Ok(ev)
}

fn machine(c: &mut Cursor<'_>) -> Result<MachineDef, SyntaxError> {
    c.expect_word("machine")?;
    let mut m = MachineDef {
        name: c.ident()?,
        refines: None,
        sees: Vec::new(),
        variables: Vec::new(),
        invariants: Vec::new(),
        variant: None,
        events: Vec::new(),
    };
    if c.eat_word("refines") {
        m.refines = Some(c.ident()?);
    }
    if c.eat_word("sees") {
        m.sees = c.ident_list()?;
    }
    if c.eat_word("variables") {
        m.variables = c.ident_list()?;
    }
    if c.eat_word("invariants") {
        m.invariants = labelled_list(c, MACHINE_WORDS)?;
    }
    if c.eat_word("variant") {
        m.variant = Some(parse_expr(c)?);
        if c.is_word("variant") {
            return c.error("a machine has at most one variant");
        }
    }
    if c.eat_word("events") {
        while c.is_word("event") {
            m.events.push(event(c)?);
        }
    }
    c.expect_word("end")?;
    Ok(m)
}

fn context(c: &mut Cursor<'_>) -> Result<ContextDef, SyntaxError> {
    c.expect_word("context")?;
    let mut cx =
        ContextDef { name: c.ident()?, extends: Vec::new(), sets: Vec::new(), constants: Vec::new(), axioms: Vec::new() };
    if c.eat_word("extends") {
        cx.extends = c.ident_list()?;
    }
    if c.eat_word("sets") {
        cx.sets = c.ident_list()?;
    }
    if c.eat_word("constants") {
        cx.constants = c.ident_list()?;
    }
    if c.eat_word("axioms") {
        cx.axioms = labelled_list(c, CONTEXT_WORDS)?;
    }
    c.expect_word("end")?;
    Ok(cx)
}

/// Reads one unlabelled action such as `x, y := 1, 2` or `x :∣ x′ > x`.
pub fn parse_action_str(src: &str) -> Result<Action, EventbError> {
    let toks = lex(src)?;
    let mut c = Cursor::new(&toks);
    let mut a = action(&mut c)?;
    a.label = None;
    if !c.at_end() {
        return Ok(c.unexpected("end of input")?);
    }
    Ok(a)
}

/// Reads and validates the text format. Syntax errors carry a line and column.
pub fn parse_text(src: &str) -> Result<EbSpecification, EventbError> {
    let spec = read_text(src)?;
    spec.validate()?;
    Ok(spec)
}

/// Reads the text format without the name-level checks of [`EbSpecification::validate`],
/// so that a development split over several files can be joined first.
pub fn read_text(src: &str) -> Result<EbSpecification, EventbError> {
    let toks = lex(src)?;
    let mut c = Cursor::new(&toks);
    let mut spec = EbSpecification::default();
    while !c.at_end() {
        let comp = if c.is_word("machine") {
            Component::Machine(machine(&mut c)?)
        } else if c.is_word("context") {
            Component::Context(context(&mut c)?)
        } else {
            return Ok(c.unexpected("`machine` or `context`")?);
        };
        spec.components.push(comp);
    }
    Ok(spec)
}

// ---------------------------------------------------------------------------------------
// Printer

fn write_labelled(out: &mut String, indent: &str, xs: &[Labelled]) {
    for l in xs {
        out.push_str(indent);
        if let Some(lbl) = &l.label {
            let _ = write!(out, "{lbl}: ");
        }
        out.push_str(&print_expr(&l.pred));
        if l.theorem {
            out.push_str(" theorem");
        }
        out.push('\n');
    }
}

fn write_action(out: &mut String, a: &Action) {
    out.push_str("        ");
    if let Some(l) = &a.label {
        let _ = write!(out, "{l}: ");
    }
    match &a.kind {
        ActionKind::Assign { vars, exprs } => {
            let es: Vec<String> = exprs.iter().map(print_expr).collect();
            let _ = write!(out, "{} := {}", vars.join(", "), es.join(", "));
        }
        ActionKind::Becomes { vars, pred } => {
            let _ = write!(out, "{} :| {}", vars.join(", "), print_expr(pred));
        }
    }
    out.push('\n');
}

fn write_event(out: &mut String, e: &EventDef) {
    let _ = write!(out, "    event {}", e.name);
    if !e.is_init() {
        let _ = write!(out, " status {}", e.status);
    }
    out.push('\n');
    if !e.refines.is_empty() {
        let _ = writeln!(out, "      refines {}", e.refines.join(", "));
    }
    if e.extended {
        out.push_str("      extended\n");
    }
    if !e.params.is_empty() {
        let _ = writeln!(out, "      any {}", e.params.join(", "));
    }
    if !e.guards.is_empty() {
        out.push_str("      when\n");
        write_labelled(out, "        ", &e.guards);
    }
    if !e.witnesses.is_empty() {
        out.push_str("      with\n");
        write_labelled(out, "        ", &e.witnesses);
    }
    if !e.actions.is_empty() {
        out.push_str("      thenAct\n");
        e.actions.iter().for_each(|a| write_action(out, a));
    }
    out.push_str("    end\n");
}

/// Prints in the text format; [`parse_text`] reads the result back to an equal AST.
pub fn print_text(spec: &EbSpecification) -> String {
    let mut out = String::new();
    for (i, c) in spec.components.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match c {
            Component::Context(cx) => {
                let _ = writeln!(out, "context {}", cx.name);
                for (kw, xs) in [("extends", &cx.extends), ("sets", &cx.sets), ("constants", &cx.constants)] {
                    if !xs.is_empty() {
                        let _ = writeln!(out, "  {kw} {}", xs.join(", "));
                    }
                }
                if !cx.axioms.is_empty() {
                    out.push_str("  axioms\n");
                    write_labelled(&mut out, "    ", &cx.axioms);
                }
            }
            Component::Machine(m) => {
                let _ = writeln!(out, "machine {}", m.name);
                if let Some(a) = &m.refines {
                    let _ = writeln!(out, "  refines {a}");
                }
                for (kw, xs) in [("sees", &m.sees), ("variables", &m.variables)] {
                    if !xs.is_empty() {
                        let _ = writeln!(out, "  {kw} {}", xs.join(", "));
                    }
                }
                if !m.invariants.is_empty() {
                    out.push_str("  invariants\n");
                    write_labelled(&mut out, "    ", &m.invariants);
                }
                if let Some(v) = &m.variant {
                    let _ = writeln!(out, "  variant {}", print_expr(v));
                }
                if !m.events.is_empty() {
                    out.push_str("  events\n");
                    m.events.iter().for_each(|e| write_event(&mut out, e));
                }
            }
        }
        out.push_str("end\n");
    }
    out
}

// ---------------------------------------------------------------------------------------
// Signature extraction

/// What signature extraction learned about a context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextInfo {
    /// The full signature, including everything inherited through `extends`.
    pub sig: FopeqSignature,
    /// Declared types of this context's own constants, in declaration order.
    pub constants: Vec<(String, TypeAnn)>,
    /// Indices of axioms consumed as typing declarations.
    pub typing: BTreeSet<usize>,
}

/// What signature extraction learned about a machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineInfo {
    pub sig: EvtSignature,
    /// Union of the seen contexts' signatures.
    pub seen: FopeqSignature,
    /// Variables introduced by this machine (not inherited), in declaration order.
    pub new_vars: Vec<(String, TypeAnn)>,
    /// Indices of invariants consumed as typing declarations.
    pub typing: BTreeSet<usize>,
    /// The abstract machine's signature, if any.
    pub abstract_sig: Option<EvtSignature>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnvEntry {
    Context(ContextInfo),
    Machine(MachineInfo),
}

/// `Env = (MachineName ∪ ContextName) → |Sign|`, plus what the translators need.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Environment {
    pub entries: BTreeMap<String, EnvEntry>,
    pub warnings: Vec<String>,
}

impl Environment {
    pub fn context(&self, name: &str) -> Result<&ContextInfo, EventbError> {
        match self.entries.get(name) {
            Some(EnvEntry::Context(c)) => Ok(c),
            _ => Err(EventbError::Unknown(name.into())),
        }
    }

    pub fn machine(&self, name: &str) -> Result<&MachineInfo, EventbError> {
        match self.entries.get(name) {
            Some(EnvEntry::Machine(m)) => Ok(m),
            _ => Err(EventbError::Unknown(name.into())),
        }
    }

    /// The EVT signature of an entry; contexts are lifted by the comorphism.
    pub fn signature(&self, name: &str) -> Result<EvtSignature, EventbError> {
        match self.entries.get(name) {
            Some(EnvEntry::Context(c)) => Ok(comorphism_sign(&c.sig)),
            Some(EnvEntry::Machine(m)) => Ok(m.sig.clone()),
            None => Err(EventbError::Unknown(name.into())),
        }
    }
}

/// `x ∈ T` with `x` one of `names`, and `T` a type.
fn typing_of(p: &Expr, names: &[String], sig: &FopeqSignature) -> Option<(String, TypeAnn)> {
    let Expr::Rel(Rel::In, lhs, rhs) = p else { return None };
    let Expr::Name(x) = &**lhs else { return None };
    if !names.contains(x) {
        return None;
    }
    TypeAnn::from_expr(rhs, sig).ok().map(|t| (x.clone(), t))
}

fn mentions_cmp(e: &Expr, name: &str) -> bool {
    let is = |x: &Expr| matches!(x, Expr::Name(n) if n == name);
    match e {
        Expr::Rel(Rel::Cmp(_), a, b) => is(a) || is(b),
        Expr::Rel(Rel::Eq | Rel::Neq, a, b) => {
            (is(a) && matches!(**b, Expr::Num(_) | Expr::Arith(..))) || (is(b) && matches!(**a, Expr::Num(_) | Expr::Arith(..)))
        }
        Expr::Arith(_, a, b) => is(a) || is(b) || mentions_cmp(a, name) || mentions_cmp(b, name),
        Expr::Rel(_, a, b) | Expr::Implies(a, b) | Expr::Iff(a, b) => mentions_cmp(a, name) || mentions_cmp(b, name),
        Expr::Not(a) | Expr::Neg(a) => mentions_cmp(a, name),
        Expr::And(xs) | Expr::Or(xs) => xs.iter().any(|x| mentions_cmp(x, name)),
        Expr::Quant { body, .. } => mentions_cmp(body, name),
        _ => false,
    }
}

fn context_info(cx: &ContextDef, env: &Environment) -> Result<ContextInfo, EventbError> {
    let mut sig = FopeqSignature::new();
    for e in &cx.extends {
        sig = sig.union(&env.context(e)?.sig)?;
    }
    for s in &cx.sets {
        sig.sorts.insert(s.clone());
    }
    let mut types: BTreeMap<String, TypeAnn> = BTreeMap::new();
    let mut typing = BTreeSet::new();
    // Plain types first, then literal sets (which need the constants they list).
    for pass in 0..2 {
        for (i, ax) in cx.axioms.iter().enumerate() {
            if typing.contains(&i) {
                continue;
            }
            let Expr::Rel(Rel::In, _, rhs) = &ax.pred else { continue };
            if (pass == 0) == matches!(**rhs, Expr::SetLit(_)) {
                continue;
            }
            let mut partial = sig.clone();
            for (c, t) in &types {
                partial.ops.insert(c.clone(), OpProfile::constant(t.sort(&sig)?));
            }
            if let Some((c, t)) = typing_of(&ax.pred, &cx.constants, &partial) {
                if let alloc::collections::btree_map::Entry::Vacant(slot) = types.entry(c) {
                    slot.insert(t);
                    typing.insert(i);
                }
            }
        }
    }
    // Partitions `S = {a, b}` type their members.
    for ax in &cx.axioms {
        if let Expr::Rel(Rel::Eq, lhs, rhs) = &ax.pred {
            if let (Expr::Name(s), Expr::SetLit(items)) = (&**lhs, &**rhs) {
                if sig.sorts.contains(s) {
                    for it in items {
                        if let Expr::Name(c) = it {
                            if cx.constants.contains(c) {
                                types.entry(c.clone()).or_insert_with(|| TypeAnn::Set(s.clone()));
                            }
                        }
                    }
                }
            }
        }
    }
    let mut constants = Vec::new();
    for c in &cx.constants {
        let t = match types.get(c) {
            Some(t) => t.clone(),
            None if cx.axioms.iter().any(|a| mentions_cmp(&a.pred, c)) => TypeAnn::Int,
            None => return Err(EventbError::Invalid(cx.name.clone(), format!("cannot infer the type of constant `{c}`"))),
        };
        constants.push((c.clone(), t));
    }
    for (c, t) in &constants {
        let s = t.sort(&sig)?;
        sig.ops.insert(c.clone(), OpProfile::constant(s));
    }
    sig.validate()?;
    Ok(ContextInfo { sig, constants, typing })
}

fn guess_sort(e: &Expr, sig: &FopeqSignature, vars: &BTreeMap<String, Sort>) -> Option<Sort> {
    match e {
        Expr::Num(_) | Expr::Neg(_) | Expr::Arith(..) => Some(Sort::Int),
        Expr::Name(n) if n == "TRUE" || n == "FALSE" => Some(Sort::Bool),
        Expr::Name(n) => vars.get(n).cloned().or_else(|| sig.ops.get(n).map(|p| p.result.clone())),
        Expr::App(n, _) => sig.ops.get(n).map(|p| p.result.clone()),
        _ => None,
    }
}

fn machine_info(m: &MachineDef, env: &Environment) -> Result<MachineInfo, EventbError> {
    let mut seen = FopeqSignature::new();
    for s in &m.sees {
        seen = seen.union(&env.context(s)?.sig)?;
    }
    let abstract_sig = match &m.refines {
        Some(a) => Some(env.machine(a)?.sig.clone()),
        None => None,
    };
    let inherited: BTreeMap<String, Sort> = abstract_sig.as_ref().map(|a| a.vars.clone()).unwrap_or_default();
    let abstract_fopeq = abstract_sig.as_ref().map(|a| a.fopeq.clone()).unwrap_or_default();
    let fopeq = seen.union(&abstract_fopeq)?;

    let mut typing = BTreeSet::new();
    let mut declared: BTreeMap<String, TypeAnn> = BTreeMap::new();
    for (i, inv) in m.invariants.iter().enumerate() {
        if let Some((v, t)) = typing_of(&inv.pred, &m.variables, &fopeq) {
            if let alloc::collections::btree_map::Entry::Vacant(slot) = declared.entry(v) {
                slot.insert(t);
                typing.insert(i);
            }
        }
    }
    let mut vars: BTreeMap<String, Sort> = inherited.clone();
    let mut new_vars = Vec::new();
    for v in &m.variables {
        if let Some(t) = declared.get(v) {
            let s = t.sort(&fopeq)?;
            if let Some(old) = inherited.get(v) {
                if *old != s {
                    return Err(EventbError::Invalid(m.name.clone(), format!("variable `{v}` changes sort")));
                }
            } else {
                new_vars.push((v.clone(), t.clone()));
            }
            vars.insert(v.clone(), s);
        } else if !inherited.contains_key(v) {
            let from_init = m.init().and_then(|e| {
                e.actions.iter().find_map(|a| match &a.kind {
                    ActionKind::Assign { vars: vs, exprs } => {
                        vs.iter().position(|x| x == v).and_then(|k| guess_sort(&exprs[k], &fopeq, &vars))
                    }
                    _ => None,
                })
            });
            let s = from_init
                .ok_or_else(|| EventbError::Invalid(m.name.clone(), format!("cannot infer the type of variable `{v}`")))?;
            let t = match &s {
                Sort::Int => TypeAnn::Int,
                Sort::Bool => TypeAnn::Bool,
                Sort::User(u) => TypeAnn::Set(u.clone()),
            };
            new_vars.push((v.clone(), t));
            vars.insert(v.clone(), s);
        }
    }

    // ⟨E, V⟩ of the body plus the abstract signature with refined events removed.
    let refined: BTreeSet<&String> = m.events.iter().flat_map(|e| e.refines.iter()).collect();
    let mut sig = EvtSignature::new(seen.clone());
    if let Some(a) = &abstract_sig {
        for r in &refined {
            if !a.events.contains_key(*r) {
                return Err(EventbError::Invalid(m.name.clone(), format!("refined event `{r}` is not abstract")));
            }
        }
        let mut kept = a.clone();
        kept.events.retain(|e, _| e == INIT || !refined.contains(e));
        sig = sig.union(&kept)?;
    } else if !refined.is_empty() {
        return Err(EventbError::Invalid(m.name.clone(), "events refine without an abstract machine".into()));
    }
    let mut body = EvtSignature::new(fopeq.clone());
    for e in &m.events {
        body.events.insert(e.evt_name().into(), if e.is_init() { Status::Ordinary } else { e.status });
    }
    body.vars = vars;
    let sig = sig.union(&body)?;
    for e in &m.events {
        for a in &e.actions {
            for v in a.assigned() {
                if !sig.vars.contains_key(v) {
                    return Err(EventbError::Invalid(
                        format!("{}.{}", m.name, e.name),
                        format!("assignment to undeclared variable `{v}`"),
                    ));
                }
            }
        }
    }
    Ok(MachineInfo { sig, seen, new_vars, typing, abstract_sig })
}

/// `𝔻`: folds the components left to right into an environment.
pub fn build_env(spec: &EbSpecification) -> Result<Environment, EventbError> {
    extend_env(Environment::default(), spec)
}

/// `𝔻⟦spec⟧ξ`, continuing from an existing environment.
pub fn extend_env(mut env: Environment, spec: &EbSpecification) -> Result<Environment, EventbError> {
    for c in &spec.components {
        if env.entries.contains_key(c.name()) {
            return Err(EventbError::Duplicate(c.name().into()));
        }
        let entry = match c {
            Component::Context(cx) => {
                for ax in cx.axioms.iter().filter(|a| a.theorem) {
                    env.warnings.push(theorem_warning(&cx.name, ax));
                }
                EnvEntry::Context(context_info(cx, &env)?)
            }
            Component::Machine(m) => {
                for inv in m.invariants.iter().filter(|a| a.theorem) {
                    env.warnings.push(theorem_warning(&m.name, inv));
                }
                EnvEntry::Machine(machine_info(m, &env)?)
            }
        };
        env.entries.insert(c.name().to_string(), entry);
    }
    Ok(env)
}

fn theorem_warning(owner: &str, l: &Labelled) -> String {
    format!("{owner}: theorem {} ignored", l.label.as_deref().unwrap_or("(unlabelled)"))
}
