//! Printer for the specification notation; the output reads back with
//! [`parse_library`](super::parse_library).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Body, HideLit, Library, MapSide, Renaming, SAction, SpecExpr, SugarEvent, BUILTIN_SORT_NAMES};
use crate::eventb::INITIALISATION;
use crate::evt::INIT;
use crate::fopeq::Sort;
use crate::syntax::{print_formula, print_term};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PrintOptions {
    /// Show imports that are normally printed as their child alone.
    pub explicit: bool,
}

const L_THEN: u8 = 0;
const L_SUM: u8 = 1;
const L_POSTFIX: u8 = 2;

fn level(e: &SpecExpr, opts: PrintOptions) -> u8 {
    match e {
        SpecExpr::Then(..) | SpecExpr::Enrich(..) | SpecExpr::Presentation(_) => L_THEN,
        SpecExpr::Sum(..) => L_SUM,
        SpecExpr::Hide(c, h) if h.elided && !opts.explicit => level(c, opts),
        SpecExpr::Embed(c) => level(c, opts),
        _ => L_POSTFIX,
    }
}

fn is_postfix(e: &SpecExpr, opts: PrintOptions) -> bool {
    match e {
        SpecExpr::Translate(..) => true,
        SpecExpr::Hide(c, h) if h.elided && !opts.explicit => is_postfix(c, opts),
        SpecExpr::Hide(..) => true,
        SpecExpr::Embed(c) => is_postfix(c, opts),
        _ => false,
    }
}

fn side(s: &MapSide) -> String {
    match s.status {
        Some(st) => format!("⟨{}, {st}⟩", s.name),
        None => s.name.clone(),
    }
}

fn renaming(r: &Renaming) -> String {
    let items: Vec<String> = r.entries.iter().map(|(a, b)| format!("{} ↦ {}", side(a), side(b))).collect();
    format!("{}{{{}}}", r.label.as_deref().unwrap_or(""), items.join(", "))
}

fn hide_lit(h: &HideLit) -> String {
    let items: Vec<String> = h
        .entries
        .iter()
        .map(|(a, t)| if a.name == *t { side(a) } else { format!("{} ↦ {t}", side(a)) })
        .collect();
    format!("{}{{{}}}", h.label.as_deref().unwrap_or(""), items.join(", "))
}

fn write_expr(e: &SpecExpr, opts: PrintOptions, out: &mut String) {
    let wrap = |x: &SpecExpr, need: u8, paren_postfix: bool, out: &mut String| {
        if level(x, opts) < need || (paren_postfix && is_postfix(x, opts)) {
            out.push('(');
            write_expr(x, opts, out);
            out.push(')');
        } else {
            write_expr(x, opts, out);
        }
    };
    match e {
        SpecExpr::Named(n) => out.push_str(n),
        SpecExpr::Presentation(b) => write_body(b, "  ", out),
        SpecExpr::Enrich(a, b) => {
            wrap(a, L_THEN, false, out);
            out.push_str("\nthen\n");
            write_body(b, "  ", out);
        }
        SpecExpr::Then(a, b) => {
            wrap(a, L_THEN, false, out);
            out.push_str(" then ");
            wrap(b, L_SUM, false, out);
        }
        SpecExpr::Sum(a, b) => {
            wrap(a, L_SUM, false, out);
            out.push_str(" and\n  ");
            wrap(b, L_POSTFIX, false, out);
        }
        SpecExpr::Translate(a, r) => {
            wrap(a, L_POSTFIX, true, out);
            out.push_str(" with ");
            out.push_str(&renaming(r));
        }
        SpecExpr::Hide(a, h) if h.elided && !opts.explicit => write_expr(a, opts, out),
        SpecExpr::Hide(a, h) => {
            wrap(a, L_POSTFIX, true, out);
            out.push_str(" hide via ");
            out.push_str(&hide_lit(h));
        }
        SpecExpr::Embed(a) => write_expr(a, opts, out),
    }
}

fn sort_text(s: &Sort) -> String {
    s.to_string()
}

fn write_event(e: &SugarEvent, ind: &str, out: &mut String) {
    out.push_str(ind);
    if e.name == INIT {
        out.push_str(INITIALISATION);
    } else {
        out.push_str(&format!("{} {}", e.name, e.status));
    }
    out.push('\n');
    let sub = format!("{ind}  ");
    let cont = format!("{ind}          ");
    if !e.params.is_empty() {
        let ps: Vec<String> = e
            .params
            .iter()
            .map(|(p, s)| if *s == Sort::Int { p.clone() } else { format!("{p}:{}", sort_text(s)) })
            .collect();
        out.push_str(&format!("{sub}any {}\n", ps.join(", ")));
    }
    let block = |kw: &str, items: Vec<String>, out: &mut String| {
        for (i, it) in items.iter().enumerate() {
            if i == 0 {
                out.push_str(&format!("{sub}{kw:<7} {it}\n"));
            } else {
                out.push_str(&format!("{cont}{it}\n"));
            }
        }
    };
    block("when", e.guards.iter().map(print_formula).collect(), out);
    block("with", e.witnesses.iter().map(print_formula).collect(), out);
    let acts: Vec<String> = e
        .actions
        .iter()
        .map(|a| match a {
            SAction::Assign(vs, es) => {
                let es: Vec<String> = es.iter().map(print_term).collect();
                format!("{} := {}", vs.join(", "), es.join(", "))
            }
            SAction::Becomes(vs, p) => format!("{} :| {}", vs.join(", "), print_formula(p)),
        })
        .collect();
    block("thenAct", acts, out);
}

fn write_body(b: &Body, ind: &str, out: &mut String) {
    if !b.sorts.is_empty() {
        let kw = if b.sorts.iter().all(|s| BUILTIN_SORT_NAMES.contains(&s.as_str())) { "sort" } else { "sorts" };
        out.push_str(&format!("{ind}{kw} {}\n", b.sorts.join(", ")));
    }
    if !b.decls.is_empty() {
        let ds: Vec<String> = b.decls.iter().map(|d| format!("{}:{}", d.names.join(", "), d.ty)).collect();
        out.push_str(&format!("{ind}ops {}\n", ds.join(&format!("\n{ind}    "))));
    }
    for (i, a) in b.axioms.iter().enumerate() {
        let lead = if i == 0 { ". " } else { "  " };
        out.push_str(&format!("{ind}{lead}{}\n", print_formula(a)));
    }
    if let Some(v) = &b.variant {
        out.push_str(&format!("{ind}variant {}\n", print_term(v)));
    }
    if let Some(evs) = &b.events {
        out.push_str(&format!("{ind}Events\n"));
        let sub = format!("{ind}  ");
        for e in evs {
            write_event(e, &sub, out);
        }
    }
}

/// A specification expression on its own.
pub fn print_expr_spec(e: &SpecExpr, opts: PrintOptions) -> String {
    let mut s = String::new();
    write_expr(e, opts, &mut s);
    s
}

/// `spec NAME = … end`
pub fn print_def(name: &str, e: &SpecExpr, opts: PrintOptions) -> String {
    let mut out = format!("spec {name} =\n");
    match e {
        SpecExpr::Presentation(b) => write_body(b, "  ", &mut out),
        other => {
            out.push_str("  ");
            write_expr(other, opts, &mut out);
            if !out.ends_with('\n') {
                out.push('\n');
            }
        }
    }
    out.push_str("end\n");
    out
}

/// Every definition of the library, in definition order.
pub fn print_library(lib: &Library, opts: PrintOptions) -> String {
    let defs: Vec<String> = lib.names().iter().map(|n| print_def(n, lib.get(n).expect("defined"), opts)).collect();
    defs.join("\n")
}
