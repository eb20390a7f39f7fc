//! Human-readable and JSON renderings of signatures, model classes and verdicts.

use std::fmt::Write as _;

use evtforge_core::evt::{EvtPushout, State};
use evtforge_core::refine::Verdict;
use evtforge_core::spec::ModelClassRep;
use evtforge_core::{Algebra, EvtMorphism, EvtSignature, FopeqSignature, Sort, Value};
use serde::Serialize;
use serde_json::{json, Map, Value as Json};

/// Names a user-sort element by the first constant denoting it, else `Sort#i`.
fn show_value(fo: &FopeqSignature, alg: &Algebra, sort: &Sort, v: Value) -> String {
    if let (Sort::User(s), Value::Elem(i)) = (sort, v) {
        let named = fo.ops.iter().find(|(n, p)| p.args.is_empty() && p.result == *sort && alg.constant(n) == Some(v));
        return named.map_or_else(|| format!("{s}#{i}"), |(n, _)| n.clone());
    }
    v.to_string()
}

fn json_value(fo: &FopeqSignature, alg: &Algebra, sort: &Sort, v: Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        Value::Bool(b) => json!(b),
        Value::Elem(_) => json!(show_value(fo, alg, sort, v)),
    }
}

fn tuple(sig: &EvtSignature, alg: &Algebra, s: &State) -> String {
    let parts: Vec<String> = sig.vars.values().zip(s).map(|(t, v)| show_value(&sig.fopeq, alg, t, *v)).collect();
    if parts.len() == 1 {
        parts.into_iter().next().unwrap()
    } else {
        format!("({})", parts.join(","))
    }
}

fn json_state(sig: &EvtSignature, alg: &Algebra, s: &State) -> Json {
    Json::Array(sig.vars.values().zip(s).map(|(t, v)| json_value(&sig.fopeq, alg, t, *v)).collect())
}

/// A first-order algebra as `name=value` for constants plus carrier sizes.
pub fn algebra_label(fo: &FopeqSignature, alg: &Algebra) -> String {
    let mut parts = Vec::new();
    for (s, n) in &alg.carriers {
        parts.push(format!("|{s}|={n}"));
    }
    for (o, p) in &fo.ops {
        if p.args.is_empty() {
            if let Some(v) = alg.constant(o) {
                parts.push(format!("{o}={v}"));
            }
        }
    }
    if parts.is_empty() || fo.ops.values().any(|p| !p.args.is_empty()) || !fo.preds.is_empty() {
        return alg.label();
    }
    parts.join(", ")
}

/// Options for [`models_text`] and [`models_json`].
#[derive(Clone, Debug, Default)]
pub struct ModelsView {
    pub event: Option<String>,
    pub list: bool,
}

fn plural(n: usize, what: &str) -> String {
    if n == 1 {
        format!("1 {what}")
    } else {
        format!("{n} {what}s")
    }
}

pub fn models_text(name: &str, class: &ModelClassRep, view: &ModelsView) -> String {
    let sig = &class.sig;
    let mut out = String::new();
    let vars: Vec<&String> = sig.vars.keys().collect();
    let _ = writeln!(
        out,
        "spec {name}: {}, {}; state ({})",
        plural(class.algebras().len(), "algebra"),
        plural(class.entries.len(), "maximal model"),
        vars.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ")
    );
    for m in &class.entries {
        let _ = writeln!(out, "algebra {}", algebra_label(&sig.fopeq, &m.algebra));
        let events: Vec<&String> = match &view.event {
            Some(e) => vec![e],
            None => m.rel.keys().collect(),
        };
        if view.event.is_none() || view.event.as_deref() == Some(evtforge_core::INIT) {
            let _ = writeln!(out, "  {}: {} states", evtforge_core::INIT, m.init.len());
            if view.list {
                let items: Vec<String> = m.init.iter().map(|s| tuple(sig, &m.algebra, s)).collect();
                let _ = writeln!(out, "    {}", items.join(", "));
            }
        }
        for e in events {
            let Some(r) = m.rel.get(e) else { continue };
            let _ = writeln!(out, "  {e}: {} pairs", r.len());
            if view.list {
                let items: Vec<String> =
                    r.iter().map(|(a, b)| format!("({},{})", tuple(sig, &m.algebra, a), tuple(sig, &m.algebra, b))).collect();
                let _ = writeln!(out, "    {}", items.join(","));
            }
        }
    }
    out
}

pub fn models_json(name: &str, class: &ModelClassRep, view: &ModelsView) -> Json {
    let sig = &class.sig;
    let models: Vec<Json> = class
        .entries
        .iter()
        .map(|m| {
            let alg = &m.algebra;
            let mut events = Map::new();
            for (e, r) in &m.rel {
                if view.event.as_ref().is_some_and(|w| w != e) {
                    continue;
                }
                let mut o = Map::new();
                o.insert("count".into(), json!(r.len()));
                if view.list {
                    let pairs: Vec<Json> =
                        r.iter().map(|(a, b)| json!([json_state(sig, alg, a), json_state(sig, alg, b)])).collect();
                    o.insert("pairs".into(), Json::Array(pairs));
                }
                events.insert(e.clone(), Json::Object(o));
            }
            let mut init = Map::new();
            init.insert("count".into(), json!(m.init.len()));
            if view.list {
                init.insert("states".into(), Json::Array(m.init.iter().map(|s| json_state(sig, alg, s)).collect()));
            }
            json!({ "algebra": algebra_label(&sig.fopeq, alg), "init": init, "events": events })
        })
        .collect();
    json!({ "spec": name, "vars": sig.vars.keys().collect::<Vec<_>>(), "models": models })
}

fn sort_text(s: &Sort) -> String {
    s.to_string()
}

/// A signature in a compact block layout.
pub fn signature_text(sig: &EvtSignature) -> String {
    let mut out = String::new();
    let fo = &sig.fopeq;
    if !fo.sorts.is_empty() {
        let _ = writeln!(out, "sorts {}", fo.sorts.iter().cloned().collect::<Vec<_>>().join(", "));
    }
    for (o, p) in &fo.ops {
        let args: Vec<String> = p.args.iter().map(sort_text).collect();
        if args.is_empty() {
            let _ = writeln!(out, "op {o} : {}", sort_text(&p.result));
        } else {
            let _ = writeln!(out, "op {o} : {} → {}", args.join(" × "), sort_text(&p.result));
        }
    }
    for (p, args) in &fo.preds {
        let _ = writeln!(out, "pred {p} : {}", args.iter().map(sort_text).collect::<Vec<_>>().join(" × "));
    }
    for (e, s) in &sig.events {
        let _ = writeln!(out, "event {e} {s}");
    }
    for (v, s) in &sig.vars {
        let _ = writeln!(out, "var {v} : {}", sort_text(s));
    }
    out
}

#[derive(Serialize)]
struct SigJson<'a> {
    sorts: Vec<&'a String>,
    ops: Vec<(&'a String, Vec<String>, String)>,
    preds: Vec<(&'a String, Vec<String>)>,
    events: Vec<(&'a String, String)>,
    vars: Vec<(&'a String, String)>,
}

pub fn signature_json(sig: &EvtSignature) -> Json {
    let fo = &sig.fopeq;
    let s = SigJson {
        sorts: fo.sorts.iter().collect(),
        ops: fo.ops.iter().map(|(o, p)| (o, p.args.iter().map(sort_text).collect(), sort_text(&p.result))).collect(),
        preds: fo.preds.iter().map(|(p, a)| (p, a.iter().map(sort_text).collect())).collect(),
        events: sig.events.iter().map(|(e, s)| (e, s.to_string())).collect(),
        vars: sig.vars.iter().map(|(v, s)| (v, sort_text(s))).collect(),
    };
    serde_json::to_value(s).expect("plain data")
}

fn morphism_lines(m: &EvtMorphism) -> Vec<String> {
    let f = &m.fopeq;
    f.sorts
        .iter()
        .chain(&f.ops)
        .chain(&f.preds)
        .chain(&m.events)
        .chain(&m.vars)
        .map(|(a, b)| format!("{a} ↦ {b}"))
        .collect()
}

pub fn pushout_text(p: &EvtPushout) -> String {
    let mut out = signature_text(&p.sig);
    let _ = writeln!(out, "left: {}", morphism_lines(&p.left).join(", "));
    let _ = writeln!(out, "right: {}", morphism_lines(&p.right).join(", "));
    out
}

pub fn pushout_json(p: &EvtPushout) -> Json {
    json!({
        "signature": signature_json(&p.sig),
        "left": morphism_lines(&p.left),
        "right": morphism_lines(&p.right),
    })
}

pub fn verdict_json(name: &str, v: &Verdict) -> Json {
    let mut o = Map::new();
    o.insert("name".into(), json!(name));
    for (k, val) in v.fields() {
        o.insert(k.into(), if k == "holds" { json!(v.holds) } else { json!(val) });
    }
    o.insert("algebras".into(), json!(v.algebras));
    o.insert("checked".into(), json!(v.checked));
    o.insert("warnings".into(), json!(v.warnings));
    Json::Object(o)
}
