//! Model-class semantics over bounded domains.
//!
//! Over a fixed algebra the models of a presentation are all `⟨A, L, R⟩` below one maximal
//! model, so a class is a union of such "boxes". A box is kept symbolically as constraints
//! per event: sentences, and value tables where hiding projected a computed maximum. The
//! operators then act on constraints:
//!
//! * enrichment and sum conjoin the constraints of their parts (one box per combination),
//! * translation renames constraints along the morphism, so a model is in the class iff its
//!   reduct satisfies the child's constraints,
//! * hiding along a bijection on variables renames back; otherwise the child's maximum is
//!   computed and projected, which is again a box because every subset of a projection is
//!   the projection of a subset.
//!
//! Boxes whose initial set comes out empty contribute no model.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{hide_morphism, renaming_morphism, Library, SpecError, SpecExpr};
use crate::evt::{solve_event, solve_init, translate_sentence, Constraint, EvtModel, EvtSentence, EvtSignature, INIT};
use crate::fopeq::{enumerate_algebras, Algebra, Bounds};

type Box_ = BTreeMap<String, Vec<Constraint>>;

/// The model class of a specification: every model below one of `entries` (same algebra,
/// non-empty initial set).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelClassRep {
    pub sig: EvtSignature,
    pub entries: Vec<EvtModel>,
}

impl ModelClassRep {
    pub fn contains(&self, m: &EvtModel) -> bool {
        m.validate(&self.sig).is_ok()
            && !m.init.is_empty()
            && self.entries.iter().any(|e| e.algebra == m.algebra && m.included_in(e))
    }

    /// Sorted maximal entries without duplicates or dominated boxes; two classes are equal
    /// iff their normal forms are.
    pub fn normalized(&self) -> ModelClassRep {
        let mut es: Vec<EvtModel> = self.entries.clone();
        es.sort_by(|a, b| (&a.algebra, &a.init, &a.rel).cmp(&(&b.algebra, &b.init, &b.rel)));
        es.dedup();
        let keep: Vec<EvtModel> = es
            .iter()
            .enumerate()
            .filter(|(i, e)| !es.iter().enumerate().any(|(j, f)| j != *i && f.algebra == e.algebra && e.included_in(f)))
            .map(|(_, e)| e.clone())
            .collect();
        ModelClassRep { sig: self.sig.clone(), entries: keep }
    }

    pub fn algebras(&self) -> Vec<&Algebra> {
        let mut out: Vec<&Algebra> = self.entries.iter().map(|e| &e.algebra).collect();
        out.dedup();
        out
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn product(a: Vec<Box_>, b: Vec<Box_>) -> Vec<Box_> {
    let mut out = Vec::new();
    for x in &a {
        for y in &b {
            let mut z = x.clone();
            for (e, cs) in y {
                z.entry(e.clone()).or_default().extend(cs.iter().cloned());
            }
            out.push(z);
        }
    }
    out
}

fn add_sentences(bx: &mut Box_, ss: &[EvtSentence]) {
    for s in ss {
        bx.entry(s.event.clone()).or_default().push(Constraint::Sentence(s.body.clone()));
    }
}

impl Library {
    fn boxes(&self, e: &SpecExpr, alg: &Algebra, ceiling: u64) -> Result<Vec<Box_>, SpecError> {
        match e {
            SpecExpr::Named(n) => self.boxes(self.get(n)?, alg, ceiling),
            SpecExpr::Embed(c) => self.boxes(c, alg, ceiling),
            SpecExpr::Presentation(b) => {
                let sig = self.sig_of(e)?;
                let mut bx = Box_::new();
                add_sentences(&mut bx, &b.sentences(&sig)?);
                Ok(alloc::vec![bx])
            }
            SpecExpr::Enrich(base, b) => {
                let sig = self.sig_of(e)?;
                let base_sig = self.sig_of(base)?;
                let own = b.sentences(&sig)?;
                let mut out = self.boxes(base, &alg.restrict(&base_sig.fopeq), ceiling)?;
                for bx in &mut out {
                    add_sentences(bx, &own);
                }
                Ok(out)
            }
            SpecExpr::Then(a, b) | SpecExpr::Sum(a, b) => {
                let (sa, sb) = (self.sig_of(a)?, self.sig_of(b)?);
                let xa = self.boxes(a, &alg.restrict(&sa.fopeq), ceiling)?;
                let xb = self.boxes(b, &alg.restrict(&sb.fopeq), ceiling)?;
                Ok(product(xa, xb))
            }
            SpecExpr::Translate(c, r) => {
                let m = renaming_morphism(&self.sig_of(c)?, r)?;
                let child = self.boxes(c, &alg.reduct(&m.fopeq)?, ceiling)?;
                let mut out = Vec::new();
                for bx in child {
                    let mut nb = Box_::new();
                    for (ev, cs) in bx {
                        let target = m.events.get(&ev).cloned().unwrap_or(ev.clone());
                        let slot = nb.entry(target).or_default();
                        for c in cs {
                            slot.push(match c {
                                Constraint::Sentence(f) => {
                                    Constraint::Sentence(translate_sentence(&m, &EvtSentence::new(&ev, f))?.body)
                                }
                                Constraint::Table { cols, rows } => Constraint::Table {
                                    cols: cols
                                        .into_iter()
                                        .map(|(v, p)| (m.vars.get(&v).cloned().unwrap_or(v), p))
                                        .collect(),
                                    rows,
                                },
                            });
                        }
                    }
                    out.push(nb);
                }
                Ok(out)
            }
            SpecExpr::Hide(c, h) => {
                let child_sig = self.sig_of(c)?;
                let m = hide_morphism(&child_sig, h)?;
                if !m.is_injective_on_events() {
                    return Err(SpecError::Refused("hiding that identifies events".into()));
                }
                let child = self.boxes(c, alg, ceiling)?;
                let image: BTreeSet<&String> = m.vars.values().collect();
                let bijective = image.len() == m.vars.len() && image.len() == child_sig.vars.len();
                if bijective {
                    let inv: BTreeMap<String, String> = m.vars.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
                    let out = child
                        .into_iter()
                        .map(|bx| {
                            let mut nb = Box_::new();
                            for (hidden, target) in &m.events {
                                let cs = bx.get(target).cloned().unwrap_or_default();
                                let cs = cs
                                    .into_iter()
                                    .map(|c| match c {
                                        Constraint::Sentence(f) => Constraint::Sentence(
                                            f.map_free_vars(&|n, p| inv.get(n).map(|w| (w.clone(), p))),
                                        ),
                                        Constraint::Table { cols, rows } => Constraint::Table {
                                            cols: cols.into_iter().map(|(v, p)| (inv.get(&v).cloned().unwrap_or(v), p)).collect(),
                                            rows,
                                        },
                                    })
                                    .collect();
                                nb.insert(hidden.clone(), cs);
                            }
                            nb
                        })
                        .collect();
                    return Ok(out);
                }
                // Project the child's maxima onto the kept variables.
                let child_names: Vec<&String> = child_sig.vars.keys().collect();
                let kept: Vec<(&String, usize)> = m
                    .source
                    .vars
                    .keys()
                    .map(|v| (v, child_names.iter().position(|c| *c == &m.vars[v]).expect("checked by the morphism")))
                    .collect();
                let mut out = Vec::new();
                for bx in child {
                    let none = Vec::new();
                    let init = solve_init(&child_sig, alg, bx.get(INIT).unwrap_or(&none), ceiling)?;
                    if init.is_empty() {
                        continue;
                    }
                    let mut nb = Box_::new();
                    let cols: Vec<(String, bool)> = kept.iter().map(|(v, _)| ((*v).clone(), true)).collect();
                    let rows = init.iter().map(|s| kept.iter().map(|(_, i)| s[*i]).collect()).collect();
                    nb.insert(INIT.into(), alloc::vec![Constraint::Table { cols, rows }]);
                    for (hidden, target) in &m.events {
                        if hidden == INIT {
                            continue;
                        }
                        let rel = solve_event(&child_sig, alg, bx.get(target).unwrap_or(&none), ceiling)?;
                        let mut cols: Vec<(String, bool)> = kept.iter().map(|(v, _)| ((*v).clone(), false)).collect();
                        cols.extend(kept.iter().map(|(v, _)| ((*v).clone(), true)));
                        let rows = rel
                            .iter()
                            .map(|(s, t)| kept.iter().map(|(_, i)| s[*i]).chain(kept.iter().map(|(_, i)| t[*i])).collect())
                            .collect();
                        nb.insert(hidden.clone(), alloc::vec![Constraint::Table { cols, rows }]);
                    }
                    out.push(nb);
                }
                Ok(out)
            }
        }
    }

    /// The maximal models of `e` over one algebra of its signature; none when the algebra
    /// admits no model.
    pub fn maxima_at(&self, e: &SpecExpr, alg: &Algebra, ceiling: u64) -> Result<Vec<EvtModel>, SpecError> {
        let sig = self.sig_of(e)?;
        let none = Vec::new();
        let mut out = Vec::new();
        for bx in self.boxes(e, alg, ceiling)? {
            let init = solve_init(&sig, alg, bx.get(INIT).unwrap_or(&none), ceiling)?;
            if init.is_empty() {
                continue;
            }
            let mut rel = BTreeMap::new();
            for (ev, _) in sig.proper_events() {
                rel.insert(ev.clone(), solve_event(&sig, alg, bx.get(ev).unwrap_or(&none), ceiling)?);
            }
            let m = EvtModel { algebra: alg.clone(), init, rel };
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }

    /// The algebras a specification's models may use under `bounds`.
    pub fn algebras_of(&self, e: &SpecExpr, bounds: &Bounds) -> Result<Vec<Algebra>, SpecError> {
        let sig = self.sig_of(e)?;
        let axioms = self.closed_axioms(e)?;
        let algs = enumerate_algebras(&sig.fopeq, bounds, &Algebra::empty(bounds.int_bound), &axioms)?;
        if algs.len() as u64 > bounds.ceiling {
            return Err(SpecError::Refused(format!("{} algebras exceed the ceiling", algs.len())));
        }
        Ok(algs)
    }

    /// `Mod[e]` under `bounds`.
    pub fn mod_of(&self, e: &SpecExpr, bounds: &Bounds) -> Result<ModelClassRep, SpecError> {
        let sig = self.sig_of(e)?;
        let mut entries = Vec::new();
        for alg in self.algebras_of(e, bounds)? {
            entries.extend(self.maxima_at(e, &alg, bounds.ceiling)?);
        }
        Ok(ModelClassRep { sig, entries })
    }

    /// `Mod[NAME]` under `bounds`.
    pub fn mod_of_name(&self, name: &str, bounds: &Bounds) -> Result<ModelClassRep, SpecError> {
        self.mod_of(&SpecExpr::named(name), bounds)
    }
}
