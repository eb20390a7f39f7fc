//! Refinement as model-class inclusion.
//!
//! `SP_A ⊑ SP_C` along `σ : Sig[SP_A] → Sig[SP_C]` holds iff the reduct of every concrete
//! model is an abstract model. Both classes are downward closed below their maxima, and a
//! reduct of a submodel is a submodel of the reduct, so it suffices to reduce each concrete
//! maximum and find an abstract maximum over the reduced algebra that contains it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::evt::{model_reduct, show_state, EvtModel, EvtMorphism, EvtSignature, State, StatusRule, INIT};
use crate::fopeq::{Algebra, Bounds, FopeqMorphism};
use crate::spec::{Library, MapSide, RefinementDecl, SpecError, SpecExpr};

/// Where inclusion first breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The reduced algebra admits no abstract model at all.
    Algebra,
    /// A reduced initial state outside every abstract initial set.
    Init { state: State },
    /// A reduced transition outside the abstract relation of `event`.
    Event { event: String, before: State, after: State },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// The concrete algebra the violating model lives over.
    pub algebra: Algebra,
    /// Its reduct along the refinement morphism.
    pub abstract_algebra: Algebra,
    pub violation: Violation,
    /// States rendered over the abstract signature.
    pub shown: (Option<String>, Option<String>),
}

impl Counterexample {
    /// Event name, or `Init`, or `None` for an algebra-level failure.
    pub fn event(&self) -> Option<&str> {
        match &self.violation {
            Violation::Algebra => None,
            Violation::Init { .. } => Some(INIT),
            Violation::Event { event, .. } => Some(event),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
    /// Concrete algebras examined.
    pub algebras: usize,
    /// Initial states and transitions examined.
    pub checked: usize,
    pub warnings: Vec<String>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        if self.holds {
            let s = if self.algebras == 1 { "" } else { "s" };
            return writeln!(f, "holds ({} algebra{s}, {} states and pairs checked)", self.algebras, self.checked);
        }
        writeln!(f, "fails")?;
        if let Some(c) = &self.counterexample {
            writeln!(f, "  algebra: {}", c.algebra.label())?;
            match &c.violation {
                Violation::Algebra => writeln!(f, "  no abstract model over the reduced algebra {}", c.abstract_algebra.label())?,
                Violation::Init { .. } => {
                    writeln!(f, "  event: {INIT}")?;
                    writeln!(f, "  state: {}", c.shown.0.as_deref().unwrap_or(""))?;
                }
                Violation::Event { event, .. } => {
                    writeln!(f, "  event: {event}")?;
                    writeln!(f, "  before: {}", c.shown.0.as_deref().unwrap_or(""))?;
                    writeln!(f, "  after: {}", c.shown.1.as_deref().unwrap_or(""))?;
                }
            }
        }
        Ok(())
    }
}

/// The first place `m` escapes `a`, in canonical order (Init, then events by name).
fn first_escape(m: &EvtModel, a: &EvtModel) -> Option<Violation> {
    if let Some(s) = m.init.iter().find(|s| !a.init.contains(*s)) {
        return Some(Violation::Init { state: s.clone() });
    }
    for (e, r) in &m.rel {
        let empty = BTreeSet::new();
        let ar = a.rel.get(e).unwrap_or(&empty);
        if let Some((x, y)) = r.iter().find(|p| !ar.contains(*p)) {
            return Some(Violation::Event { event: e.clone(), before: x.clone(), after: y.clone() });
        }
    }
    None
}

/// Checks `abs ⊑ conc` along `sigma`, which must go from `Sig[abs]` to `Sig[conc]`.
pub fn check_with_morphism(
    lib: &Library,
    abs: &SpecExpr,
    conc: &SpecExpr,
    sigma: &EvtMorphism,
    bounds: &Bounds,
) -> Result<Verdict, SpecError> {
    if lib.sig_of(abs)? != sigma.source || lib.sig_of(conc)? != sigma.target {
        return Err(SpecError::Invalid("the morphism does not connect the two signatures".into()));
    }
    let mut v = Verdict { holds: true, ..Default::default() };
    let mut cache: BTreeMap<Algebra, Vec<EvtModel>> = BTreeMap::new();
    for alg in lib.algebras_of(conc, bounds)? {
        v.algebras += 1;
        let maxima = lib.maxima_at(conc, &alg, bounds.ceiling)?;
        if maxima.is_empty() {
            continue;
        }
        let red = alg.reduct(&sigma.fopeq)?;
        if !cache.contains_key(&red) {
            let am = lib.maxima_at(abs, &red, bounds.ceiling)?;
            cache.insert(red.clone(), am);
        }
        let abs_max = &cache[&red];
        for m in &maxima {
            let r = model_reduct(sigma, m)?;
            v.checked += r.size();
            if abs_max.iter().any(|a| r.included_in(a)) {
                continue;
            }
            let violation = match abs_max.first() {
                None => Violation::Algebra,
                Some(a) => first_escape(&r, a).unwrap_or(Violation::Algebra),
            };
            let src = &sigma.source;
            let shown = match &violation {
                Violation::Algebra => (None, None),
                Violation::Init { state } => (Some(show_state(src, state, true)), None),
                Violation::Event { before, after, .. } => {
                    (Some(show_state(src, before, false)), Some(show_state(src, after, true)))
                }
            };
            v.holds = false;
            v.counterexample = Some(Counterexample { algebra: alg.clone(), abstract_algebra: red, violation, shown });
            return Ok(v);
        }
    }
    Ok(v)
}

/// `abs ⊑ conc` over one signature: `Mod[conc] ⊆ Mod[abs]`.
pub fn check_same_sig(lib: &Library, abs: &SpecExpr, conc: &SpecExpr, bounds: &Bounds) -> Result<Verdict, SpecError> {
    let sa = lib.sig_of(abs)?;
    if sa != lib.sig_of(conc)? {
        return Err(SpecError::Invalid("the specifications have different signatures".into()));
    }
    check_with_morphism(lib, abs, conc, &EvtMorphism::identity(&sa), bounds)
}

/// The morphism a declaration denotes. Unmapped names go to themselves; a status named on
/// either side must match the respective signature.
pub fn decl_morphism(lib: &Library, d: &RefinementDecl) -> Result<(EvtMorphism, Vec<String>), SpecError> {
    let src = lib.sig(&d.abstract_spec)?.clone();
    let tgt = lib.sig(&d.concrete_spec)?.clone();
    let (mut ev, mut vs) = (BTreeMap::new(), BTreeMap::new());
    let (mut so, mut op, mut pr) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    let check_status = |side: &MapSide, sig: &EvtSignature, which: &str| -> Result<(), SpecError> {
        match (side.status, sig.events.get(&side.name)) {
            (Some(want), Some(have)) if want != *have => Err(SpecError::Invalid(format!(
                "{which} event `{}` has status {have}, not {want}",
                side.name
            ))),
            _ => Ok(()),
        }
    };
    for (a, c) in &d.entries {
        let (n, t) = (&a.name, &c.name);
        if src.events.contains_key(n) {
            if !tgt.events.contains_key(t) {
                return Err(SpecError::Unknown(format!("`{t}` is not an event of {}", d.concrete_spec)));
            }
            check_status(a, &src, "abstract")?;
            check_status(c, &tgt, "concrete")?;
            ev.insert(n.clone(), t.clone());
        } else if src.vars.contains_key(n) {
            if !tgt.vars.contains_key(t) {
                return Err(SpecError::Unknown(format!("`{t}` is not a variable of {}", d.concrete_spec)));
            }
            vs.insert(n.clone(), t.clone());
        } else if src.fopeq.sorts.contains(n) {
            so.insert(n.clone(), t.clone());
        } else if src.fopeq.ops.contains_key(n) {
            op.insert(n.clone(), t.clone());
        } else if src.fopeq.preds.contains_key(n) {
            pr.insert(n.clone(), t.clone());
        } else {
            return Err(SpecError::Unknown(format!("`{n}` is not in the signature of {}", d.abstract_spec)));
        }
    }
    let fm = FopeqMorphism::from_renaming(&src.fopeq, &tgt.fopeq, &so, &op, &pr)?;
    let m = EvtMorphism::from_renaming(&src, &tgt, fm.clone(), &ev, &vs, StatusRule::Ignore)?;
    let mut warnings = Vec::new();
    if let Err(e) = m.validate(StatusRule::NonDecreasing) {
        if !d.downgrade {
            return Err(SpecError::Evt(e));
        }
        warnings.push(format!("{}: {e}", d.name));
    }
    Ok((m, warnings))
}

/// Checks a declaration `refinement R : A to C = … end`.
pub fn check_decl(lib: &Library, d: &RefinementDecl, bounds: &Bounds) -> Result<Verdict, SpecError> {
    let (m, warnings) = decl_morphism(lib, d)?;
    let mut v = check_with_morphism(lib, &SpecExpr::named(&d.abstract_spec), &SpecExpr::named(&d.concrete_spec), &m, bounds)?;
    v.warnings = warnings;
    Ok(v)
}

/// Replays a counterexample: `true` iff the offending reduced state or pair is outside
/// every abstract model over the reduced algebra.
pub fn replay(lib: &Library, abs: &SpecExpr, c: &Counterexample, ceiling: u64) -> Result<bool, SpecError> {
    let maxima = lib.maxima_at(abs, &c.abstract_algebra, ceiling)?;
    Ok(match &c.violation {
        Violation::Algebra => maxima.is_empty(),
        Violation::Init { state } => maxima.iter().all(|m| !m.init.contains(state)),
        Violation::Event { event, before, after } => {
            let pair = (before.clone(), after.clone());
            maxima.iter().all(|m| m.rel.get(event).is_none_or(|r| !r.contains(&pair)))
        }
    })
}

/// Composes two declarations `A to B` and `B to C` into `A to C`.
pub fn compose(lib: &Library, first: &RefinementDecl, second: &RefinementDecl) -> Result<RefinementDecl, SpecError> {
    if first.concrete_spec != second.abstract_spec {
        return Err(SpecError::Invalid(format!("{} does not end where {} starts", first.name, second.name)));
    }
    let (m1, _) = decl_morphism(lib, first)?;
    let (m2, _) = decl_morphism(lib, second)?;
    let src = lib.sig(&first.abstract_spec)?;
    let mut entries = Vec::new();
    for e in src.events.keys() {
        let mid = &m1.events[e];
        entries.push((MapSide::plain(e), MapSide::plain(&m2.events[mid])));
    }
    for v in src.vars.keys() {
        entries.push((MapSide::plain(v), MapSide::plain(&m2.vars[&m1.vars[v]])));
    }
    Ok(RefinementDecl {
        name: format!("{}_{}", first.name, second.name),
        abstract_spec: first.abstract_spec.clone(),
        concrete_spec: second.concrete_spec.clone(),
        entries,
        downgrade: first.downgrade || second.downgrade,
    })
}

impl Verdict {
    /// Stable machine-readable fields: `holds`, `algebra`, `event`, `before`, `after`.
    pub fn fields(&self) -> [(&'static str, Option<String>); 5] {
        let c = self.counterexample.as_ref();
        [
            ("holds", Some(self.holds.to_string())),
            ("algebra", c.map(|c| c.algebra.label())),
            ("event", c.and_then(|c| c.event().map(String::from))),
            ("before", c.and_then(|c| c.shown.0.clone())),
            ("after", c.and_then(|c| c.shown.1.clone())),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eventb::{build_env, read_text, EbSpecification};
    use crate::spec::parse_library;
    use crate::translate::{translate_spec, TranslateOptions};

    fn fixture(name: &str) -> String {
        let p = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
        std::fs::read_to_string(p).unwrap()
    }

    fn load(eb: &[&str], specs: &[&str]) -> (Library, Vec<RefinementDecl>) {
        let mut spec = EbSpecification::default();
        for f in eb {
            spec.components.extend(read_text(&fixture(f)).unwrap().components);
        }
        spec.validate().unwrap();
        let env = build_env(&spec).unwrap();
        let mut lib = Library::new();
        translate_spec(&spec, &env, &mut lib, TranslateOptions::default()).unwrap();
        let mut decls = Vec::new();
        for f in specs {
            decls.extend(parse_library(&fixture(f), &mut lib).unwrap());
        }
        (lib, decls)
    }

    fn bounds(d: i64) -> Bounds {
        Bounds::with_bound(3).pin("d", d)
    }

    #[test]
    fn bridge_chain_holds() {
        let (lib, decls) = load(&["ebm0.eb", "ebm1.eb", "ebm2.eb"], &["refinement.spec"]);
        for d in [1, 2] {
            for decl in &decls {
                let v = check_decl(&lib, decl, &bounds(d)).unwrap();
                assert!(v.holds, "{decl} at d={d}: {v}");
                assert_eq!(v.warnings.is_empty(), !decl.downgrade);
            }
        }
    }

    #[test]
    fn status_lowering_needs_downgrade() {
        let (lib, decls) = load(&["ebm0.eb", "ebm1.eb", "ebm2.eb"], &["refinement.spec"]);
        let strict = RefinementDecl { downgrade: false, ..decls[1].clone() };
        assert!(check_decl(&lib, &strict, &bounds(2)).is_err());
    }

    #[test]
    fn composition_of_steps_holds() {
        let (lib, decls) = load(&["ebm0.eb", "ebm1.eb", "ebm2.eb"], &["refinement.spec"]);
        let c = compose(&lib, &decls[0], &decls[1]).unwrap();
        assert_eq!((c.abstract_spec.as_str(), c.concrete_spec.as_str()), ("M0", "M2"));
        assert!(check_decl(&lib, &c, &bounds(2)).unwrap().holds);
    }

    #[test]
    fn identity_holds() {
        let (lib, _) = load(&["ebm0.eb"], &[]);
        let m0 = SpecExpr::named("M0");
        assert!(check_same_sig(&lib, &m0, &m0, &bounds(2)).unwrap().holds);
    }

    #[test]
    fn guard_weakening_is_masked_by_the_invariant() {
        let (lib, decls) = load(&["ebm0.eb", "mutant/m0_guard.eb", "mutant/m0_weak.eb"], &["mutant/refinement.spec"]);
        assert!(check_decl(&lib, &decls[0], &bounds(2)).unwrap().holds);
        let v = check_decl(&lib, &decls[1], &bounds(2)).unwrap();
        assert!(!v.holds);
        let c = v.counterexample.as_ref().unwrap();
        // Without the bound, states above d appear; ML_in sorts first and leaves one.
        assert_eq!(c.event(), Some("ML_in"));
        assert_eq!(v.fields()[3].1.as_deref(), Some("{n↦3}"));
        assert!(replay(&lib, &SpecExpr::named("M0"), c, 1 << 20).unwrap());
    }

    #[test]
    fn strengthening_a_guard_refines() {
        let (mut lib, _) = load(&["ebm0.eb"], &[]);
        parse_library("spec STRONG = M0 then Events ML_out ordinary when n = 0 end", &mut lib).unwrap();
        let v = check_same_sig(&lib, &SpecExpr::named("M0"), &SpecExpr::named("STRONG"), &bounds(2)).unwrap();
        assert!(v.holds);
        let back = check_same_sig(&lib, &SpecExpr::named("STRONG"), &SpecExpr::named("M0"), &bounds(2)).unwrap();
        assert!(!back.holds);
    }

    #[test]
    fn unknown_concrete_event_is_named() {
        let (mut lib, _) = load(&["ebm0.eb", "ebm1.eb"], &[]);
        let d = parse_library("refinement R : M0 to M1 = ML_out ↦ nope end", &mut lib).unwrap();
        let err = check_decl(&lib, &d[0], &bounds(2)).unwrap_err().to_string();
        assert!(err.contains("nope"), "{err}");
    }
}
