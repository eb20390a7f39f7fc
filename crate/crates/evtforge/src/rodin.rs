//! Rodin project files (`.bum` machines, `.buc` contexts) read into the Event-B AST.
//!
//! Only the elements the core understands are read; unknown elements (proof files,
//! comments, configuration attributes) are ignored. A component's name is its file stem.

use std::path::Path;

use anyhow::{anyhow, bail, Context as _, Result};
use evtforge_core::eventb::{parse_action_str, Component, ContextDef, EventDef, Labelled, MachineDef};
use evtforge_core::syntax::parse_expr_str;
use evtforge_core::Status;
use roxmltree::{Document, Node};

const NS: &str = "org.eventb.core.";

fn attr<'a>(n: &Node<'a, '_>, key: &str) -> Option<&'a str> {
    n.attributes().find(|a| a.name() == format!("{NS}{key}")).map(|a| a.value())
}

fn need<'a>(n: &Node<'a, '_>, key: &str) -> Result<&'a str> {
    attr(n, key).ok_or_else(|| anyhow!("<{}> at byte {} lacks `{NS}{key}`", n.tag_name().name(), n.range().start))
}

fn kids<'a, 'i>(n: &Node<'a, 'i>, tag: &'static str) -> impl Iterator<Item = Node<'a, 'i>> {
    let full = format!("{NS}{tag}");
    n.children().filter(move |c| c.is_element() && c.tag_name().name() == full)
}

fn flag(n: &Node<'_, '_>, key: &str) -> bool {
    attr(n, key) == Some("true")
}

fn labelled(n: &Node<'_, '_>, text_key: &str) -> Result<Labelled> {
    let src = need(n, text_key)?;
    let pred = parse_expr_str(src).with_context(|| format!("in `{src}`"))?;
    Ok(Labelled { label: attr(n, "label").map(String::from), pred, theorem: flag(n, "theorem") })
}

fn status(n: &Node<'_, '_>) -> Result<Status> {
    Ok(match attr(n, "convergence").unwrap_or("0") {
        "0" => Status::Ordinary,
        "1" => Status::Convergent,
        "2" => Status::Anticipated,
        other => bail!("unknown convergence `{other}`"),
    })
}

fn event(n: &Node<'_, '_>) -> Result<EventDef> {
    let mut e = EventDef::new(need(n, "label")?);
    e.status = status(n)?;
    e.extended = flag(n, "extended");
    e.refines = kids(n, "refinesEvent").map(|r| need(&r, "target").map(String::from)).collect::<Result<_>>()?;
    e.params = kids(n, "parameter").map(|p| need(&p, "identifier").map(String::from)).collect::<Result<_>>()?;
    e.guards = kids(n, "guard").map(|g| labelled(&g, "predicate")).collect::<Result<_>>()?;
    e.witnesses = kids(n, "witness").map(|w| labelled(&w, "predicate")).collect::<Result<_>>()?;
    for a in kids(n, "action") {
        let src = need(&a, "assignment")?;
        let mut act = parse_action_str(src).with_context(|| format!("in `{src}`"))?;
        act.label = attr(&a, "label").map(String::from);
        e.actions.push(act);
    }
    Ok(e)
}

fn targets(n: &Node<'_, '_>, tag: &'static str) -> Result<Vec<String>> {
    kids(n, tag).map(|r| need(&r, "target").map(String::from)).collect()
}

fn idents(n: &Node<'_, '_>, tag: &'static str) -> Result<Vec<String>> {
    kids(n, tag).map(|r| need(&r, "identifier").map(String::from)).collect()
}

/// One component from the text of a `.bum` or `.buc` file.
pub fn parse_component(name: &str, xml: &str) -> Result<Component> {
    let doc = Document::parse(xml).context("malformed XML")?;
    let root = doc.root_element();
    match root.tag_name().name().strip_prefix(NS) {
        Some("machineFile") => {
            let refines = targets(&root, "refinesMachine")?;
            if refines.len() > 1 {
                bail!("machine `{name}` refines more than one machine");
            }
            let variant = match kids(&root, "variant").next() {
                Some(v) => Some(parse_expr_str(need(&v, "expression")?)?),
                None => None,
            };
            Ok(Component::Machine(MachineDef {
                name: name.into(),
                refines: refines.into_iter().next(),
                sees: targets(&root, "seesContext")?,
                variables: idents(&root, "variable")?,
                invariants: kids(&root, "invariant").map(|i| labelled(&i, "predicate")).collect::<Result<_>>()?,
                variant,
                events: kids(&root, "event").map(|e| event(&e)).collect::<Result<_>>()?,
            }))
        }
        Some("contextFile") => Ok(Component::Context(ContextDef {
            name: name.into(),
            extends: targets(&root, "extendsContext")?,
            sets: idents(&root, "carrierSet")?,
            constants: idents(&root, "constant")?,
            axioms: kids(&root, "axiom").map(|a| labelled(&a, "predicate")).collect::<Result<_>>()?,
        })),
        _ => bail!("`{}` is neither a machine nor a context file", root.tag_name().name()),
    }
}

/// Whether `path` looks like a Rodin component file.
pub fn is_rodin_file(path: &Path) -> bool {
    matches!(path.extension().and_then(|e| e.to_str()), Some("bum" | "buc"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use evtforge_core::eventb::ActionKind;

    const M0: &str = r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>
<org.eventb.core.machineFile org.eventb.core.configuration="org.eventb.core.fwd" version="5">
  <org.eventb.core.seesContext name="a" org.eventb.core.target="cd"/>
  <org.eventb.core.variable name="b" org.eventb.core.identifier="n"/>
  <org.eventb.core.invariant name="c" org.eventb.core.label="inv1" org.eventb.core.predicate="n ∈ ℕ"/>
  <org.eventb.core.event name="d" org.eventb.core.convergence="0" org.eventb.core.extended="false" org.eventb.core.label="INITIALISATION">
    <org.eventb.core.action name="e" org.eventb.core.assignment="n ≔ 0" org.eventb.core.label="act1"/>
  </org.eventb.core.event>
  <org.eventb.core.event name="f" org.eventb.core.convergence="1" org.eventb.core.extended="false" org.eventb.core.label="down">
    <org.eventb.core.guard name="g" org.eventb.core.label="grd1" org.eventb.core.predicate="n &gt; 0"/>
    <org.eventb.core.action name="h" org.eventb.core.assignment="n :∣ n' &lt; n" org.eventb.core.label="act1"/>
  </org.eventb.core.event>
</org.eventb.core.machineFile>"#;

    #[test]
    fn reads_a_machine() {
        let Component::Machine(m) = parse_component("m0", M0).unwrap() else { panic!() };
        assert_eq!((m.sees.as_slice(), m.variables.as_slice()), (&["cd".to_string()][..], &["n".to_string()][..]));
        assert_eq!(m.events[1].status, Status::Convergent);
        assert!(matches!(m.events[1].actions[0].kind, ActionKind::Becomes { .. }));
        assert_eq!(m.events[1].guards[0].label.as_deref(), Some("grd1"));
    }

    #[test]
    fn reads_a_context() {
        let xml = r#"<org.eventb.core.contextFile>
  <org.eventb.core.carrierSet org.eventb.core.identifier="Color"/>
  <org.eventb.core.constant org.eventb.core.identifier="red"/>
  <org.eventb.core.axiom org.eventb.core.label="axm1" org.eventb.core.predicate="red ∈ Color" org.eventb.core.theorem="false"/>
</org.eventb.core.contextFile>"#;
        let Component::Context(c) = parse_component("Color", xml).unwrap() else { panic!() };
        assert_eq!(c.sets, ["Color"]);
        assert_eq!(c.axioms.len(), 1);
    }

    #[test]
    fn rejects_other_roots_and_bad_predicates() {
        assert!(parse_component("x", "<foo/>").is_err());
        let bad = M0.replace("n ∈ ℕ", "n ∈ (");
        assert!(parse_component("m0", &bad).is_err());
    }
}
