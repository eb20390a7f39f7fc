//! Executable statements of the institution properties over small finite universes.
//!
//! Each `check_*` function tests one law on one instance and returns a description of
//! the failure, if any. The enumerators build the universes the laws are checked over:
//! families of small signatures, every morphism between two signatures, a fixed family
//! of sentence schemas, and the algebras and states of a signature under small carriers.
//!
//! Random instances are drawn through a [`Chooser`], so callers decide where randomness
//! comes from (a seeded generator, a proptest byte stream, ...).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::evt::{
    amalgamate, comorphism_mod, comorphism_model, comorphism_sen, comorphism_sign, evt_pushout, model_reduct,
    satisfies, translate_sentence, EvtModel, EvtMorphism, EvtSentence, EvtSignature, State, Status, StatusRule, INIT,
};
use crate::fopeq::{
    enumerate_algebras, eval_formula, translate_formula, Algebra, Bounds, FopeqMorphism, FopeqSignature, Formula,
    OpProfile, Sort, Term, Value,
};

/// Picks an index below its argument (which is always at least 1).
pub trait Chooser {
    fn pick(&mut self, n: usize) -> usize;

    fn coin(&mut self) -> bool {
        self.pick(2) == 1
    }
}

impl<F: FnMut(usize) -> usize> Chooser for F {
    fn pick(&mut self, n: usize) -> usize {
        self(n) % n.max(1)
    }
}

/// Every combination of one choice per position.
pub fn product<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for c in choices {
        let mut next = Vec::with_capacity(out.len() * c.len());
        for prefix in &out {
            for x in c {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Every subset of `items` with at most `k` elements, smallest first.
pub fn subsets_upto<T: Clone + Ord>(items: &[T], k: usize) -> Vec<BTreeSet<T>> {
    let mut out = vec![BTreeSet::new()];
    let mut layer = vec![(BTreeSet::new(), 0usize)];
    for _ in 0..k {
        let mut next = Vec::new();
        for (set, from) in &layer {
            for (i, x) in items.iter().enumerate().skip(*from) {
                let mut s: BTreeSet<T> = set.clone();
                s.insert(x.clone());
                out.push(s.clone());
                next.push((s, i + 1));
            }
        }
        layer = next;
    }
    out
}

/// Shape of a signature family. Names are canonical: sorts `A`, `B`, ...; events `a`,
/// `b`, ...; variables `x`, `y`, ... Events are listed up to renaming (statuses
/// non-decreasing in name order).
#[derive(Clone, Debug)]
pub struct Family {
    pub max_sorts: usize,
    /// Proper events besides `Init`.
    pub max_events: usize,
    pub max_vars: usize,
    /// Variables may take `BOOL` as well as the user sorts.
    pub bool_vars: bool,
    /// A constant `c` of the first sort, whenever there is a sort.
    pub constant: bool,
    /// Signatures that have exactly this many sorts (ignores `max_sorts`).
    pub exact_sorts: Option<usize>,
}

const SORT_NAMES: [&str; 4] = ["A", "B", "C", "D"];
const EVENT_NAMES: [&str; 4] = ["a", "b", "c", "d"];
const VAR_NAMES: [&str; 4] = ["x", "y", "z", "w"];
const STATUSES: [Status; 3] = [Status::Ordinary, Status::Anticipated, Status::Convergent];

fn status_lists(n: usize) -> Vec<Vec<Status>> {
    product(&vec![STATUSES.to_vec(); n]).into_iter().filter(|l| l.windows(2).all(|w| w[0] <= w[1])).collect()
}

impl Family {
    pub fn signatures(&self) -> Vec<EvtSignature> {
        let mut out = Vec::new();
        let sort_counts: Vec<usize> = match self.exact_sorts {
            Some(n) => vec![n],
            None => (0..=self.max_sorts).collect(),
        };
        for ns in sort_counts {
            let mut fo = FopeqSignature::new();
            for s in &SORT_NAMES[..ns] {
                fo = fo.with_sort(s);
            }
            if self.constant && ns > 0 {
                fo = fo.with_op("c", Vec::new(), Sort::user(SORT_NAMES[0]));
            }
            let mut var_sorts: Vec<Sort> = SORT_NAMES[..ns].iter().map(|s| Sort::user(s)).collect();
            if self.bool_vars {
                var_sorts.insert(0, Sort::Bool);
            }
            for ne in 0..=self.max_events {
                for statuses in status_lists(ne) {
                    for nv in 0..=self.max_vars {
                        // Up to renaming, variable sorts are a non-decreasing list.
                        let lists = product(&vec![var_sorts.clone(); nv]);
                        for vs in lists.into_iter().filter(|l| l.windows(2).all(|w| w[0] <= w[1])) {
                            let mut sig = EvtSignature::new(fo.clone());
                            for (e, st) in EVENT_NAMES.iter().zip(&statuses) {
                                sig = sig.with_event(e, *st);
                            }
                            for (v, s) in VAR_NAMES.iter().zip(vs) {
                                sig = sig.with_var(v, s);
                            }
                            out.push(sig);
                        }
                    }
                }
            }
        }
        out
    }
}

fn fopeq_morphisms(src: &FopeqSignature, tgt: &FopeqSignature) -> Vec<FopeqMorphism> {
    let sorts: Vec<&String> = src.sorts.iter().collect();
    let tsorts: Vec<String> = tgt.sorts.iter().cloned().collect();
    let mut out = Vec::new();
    for image in product(&vec![tsorts.clone(); sorts.len()]) {
        let smap: BTreeMap<String, String> = sorts.iter().map(|s| (*s).clone()).zip(image).collect();
        let map_sort = |s: &Sort| match s {
            Sort::User(n) => Sort::User(smap[n].clone()),
            o => o.clone(),
        };
        let op_choices: Vec<Vec<String>> = src
            .ops
            .values()
            .map(|p| {
                let want = OpProfile { args: p.args.iter().map(map_sort).collect(), result: map_sort(&p.result) };
                tgt.ops.iter().filter(|(_, q)| **q == want).map(|(n, _)| n.clone()).collect()
            })
            .collect();
        let pred_choices: Vec<Vec<String>> = src
            .preds
            .values()
            .map(|p| {
                let want: Vec<Sort> = p.iter().map(map_sort).collect();
                tgt.preds.iter().filter(|(_, q)| **q == want).map(|(n, _)| n.clone()).collect()
            })
            .collect();
        for ops in product(&op_choices) {
            for preds in product(&pred_choices) {
                out.push(FopeqMorphism {
                    source: src.clone(),
                    target: tgt.clone(),
                    sorts: smap.clone(),
                    ops: src.ops.keys().cloned().zip(ops.iter().cloned()).collect(),
                    preds: src.preds.keys().cloned().zip(preds).collect(),
                });
            }
        }
    }
    out
}

/// Every signature morphism `src → tgt` valid under `rule`, in a deterministic order.
pub fn morphisms(src: &EvtSignature, tgt: &EvtSignature, rule: StatusRule) -> Vec<EvtMorphism> {
    let mut out = Vec::new();
    for fo in fopeq_morphisms(&src.fopeq, &tgt.fopeq) {
        let ev_choices: Vec<Vec<String>> = src
            .events
            .iter()
            .map(|(e, s)| {
                tgt.events
                    .iter()
                    .filter(|(t, ts)| (e == INIT) == (*t == INIT) && (rule == StatusRule::Ignore || s <= *ts))
                    .map(|(t, _)| t.clone())
                    .collect()
            })
            .collect();
        let var_choices: Vec<Vec<String>> = src
            .vars
            .values()
            .map(|s| {
                let want = fo.map_sort(s).expect("sort is mapped");
                tgt.vars.iter().filter(|(_, t)| **t == want).map(|(n, _)| n.clone()).collect()
            })
            .collect();
        for evs in product(&ev_choices) {
            for vs in product(&var_choices) {
                out.push(EvtMorphism {
                    source: src.clone(),
                    target: tgt.clone(),
                    fopeq: fo.clone(),
                    events: src.events.keys().cloned().zip(evs.iter().cloned()).collect(),
                    vars: src.vars.keys().cloned().zip(vs).collect(),
                });
            }
        }
    }
    out
}

/// All algebras over `sig` with every user carrier of size `1..=max_carrier`.
pub fn small_algebras(sig: &FopeqSignature, max_carrier: u32, int_bound: i64) -> Vec<Algebra> {
    let sorts: Vec<&String> = sig.sorts.iter().collect();
    let sizes: Vec<u32> = (1..=max_carrier).collect();
    let mut out = Vec::new();
    for combo in product(&vec![sizes; sorts.len()]) {
        let mut b = Bounds::with_bound(int_bound);
        for (s, n) in sorts.iter().zip(combo) {
            b.carriers.insert((*s).clone(), n);
        }
        out.extend(enumerate_algebras(sig, &b, &Algebra::empty(int_bound), &[]).expect("small universe"));
    }
    out
}

/// Every state of `sig` over `alg`, in lexicographic order.
pub fn states(sig: &EvtSignature, alg: &Algebra) -> Vec<State> {
    let carriers: Vec<Vec<Value>> = sig.vars.values().map(|s| alg.carrier(s).expect("declared sort")).collect();
    product(&carriers)
}

/// Every before/after pair of `sig` over `alg`.
pub fn pairs(sig: &EvtSignature, alg: &Algebra) -> Vec<(State, State)> {
    let st = states(sig, alg);
    st.iter().flat_map(|a| st.iter().map(move |b| (a.clone(), b.clone()))).collect()
}

/// A ground term of the given sort: the first constant of that sort, or a literal.
fn witness(sig: &FopeqSignature, sort: &Sort) -> Option<Term> {
    match sort {
        Sort::Int => Some(Term::Int(0)),
        Sort::Bool => Some(Term::Bool(true)),
        Sort::User(_) => sig.ops.iter().find(|(_, p)| p.args.is_empty() && p.result == *sort).map(|(n, _)| Term::constant(n)),
    }
}

/// The twelve sentence schemas, instantiated on the first two variables of `sig`
/// (falling back to ground terms when there are fewer) and asserted of `event`.
pub fn sentence_schemas(sig: &EvtSignature, event: &str) -> Vec<EvtSentence> {
    let vars: Vec<(&String, &Sort)> = sig.vars.iter().collect();
    let ground = witness(&sig.fopeq, &Sort::Bool).expect("BOOL literal");
    let (x, xs) = match vars.first() {
        Some((n, s)) => ((Term::var(n), Term::primed(n)), (*s).clone()),
        None => ((ground.clone(), ground.clone()), Sort::Bool),
    };
    // The second variable of the same sort as the first, else the first again.
    let y = match vars.iter().skip(1).find(|(_, s)| **s == xs) {
        Some((n, _)) => (Term::var(n), Term::primed(n)),
        None => x.clone(),
    };
    let k = witness(&sig.fopeq, &xs).unwrap_or_else(|| x.0.clone());
    let unchanged = Formula::And(vars.iter().map(|(n, _)| Formula::eq(Term::primed(n), Term::var(n))).collect());
    let changed = Formula::Or(vars.iter().map(|(n, _)| Formula::neq(Term::primed(n), Term::var(n))).collect());
    let z = || Term::var("z_");
    let bodies = [
        Formula::True,
        Formula::False,
        unchanged,
        changed,
        Formula::eq(x.0.clone(), k.clone()),
        Formula::eq(x.1.clone(), k.clone()),
        Formula::eq(x.1.clone(), y.0.clone()),
        Formula::exists(vec![("z_".into(), xs.clone())], Formula::And(vec![Formula::neq(z(), x.0.clone()), Formula::eq(x.1.clone(), z())])),
        Formula::forall(vec![("z_".into(), xs.clone())], Formula::Or(vec![Formula::eq(z(), x.0.clone()), Formula::eq(z(), x.1.clone())])),
        Formula::implies(Formula::eq(x.0.clone(), y.0.clone()), Formula::eq(x.1.clone(), y.1.clone())),
        Formula::iff(Formula::eq(x.1.clone(), x.0.clone()), Formula::eq(y.1.clone(), y.0.clone())),
        Formula::Or(vec![Formula::neq(x.1.clone(), k.clone()), Formula::eq(x.0.clone(), k)]),
    ];
    bodies.into_iter().map(|b| EvtSentence::new(event, b)).collect()
}

/// One model over `sig`: algebra, initial states and a relation per proper event.
pub fn model(alg: &Algebra, init: BTreeSet<State>, rel: BTreeMap<String, BTreeSet<(State, State)>>) -> EvtModel {
    EvtModel { algebra: alg.clone(), init, rel }
}

/// The models over `sig` and `alg` that vary the component a sentence about `event`
/// reads: for `Init`, every non-empty `L` (relations empty); otherwise every `R.event`
/// with at most `max_pairs` pairs (the others empty, `L` the first state).
pub fn component_models(sig: &EvtSignature, alg: &Algebra, event: &str, max_pairs: usize) -> Vec<EvtModel> {
    let st = states(sig, alg);
    let empty: BTreeMap<String, BTreeSet<(State, State)>> =
        sig.proper_events().map(|(e, _)| (e.clone(), BTreeSet::new())).collect();
    if event == INIT {
        return subsets_upto(&st, st.len()).into_iter().filter(|l| !l.is_empty()).map(|l| model(alg, l, empty.clone())).collect();
    }
    let first: BTreeSet<State> = st.first().cloned().into_iter().collect();
    subsets_upto(&pairs(sig, alg), max_pairs)
        .into_iter()
        .map(|r| {
            let mut rel = empty.clone();
            rel.insert(event.to_string(), r);
            model(alg, first.clone(), rel)
        })
        .collect()
}

/// A random model: each state and pair is kept with probability one half (`L` non-empty).
pub fn random_model(sig: &EvtSignature, alg: &Algebra, rng: &mut impl Chooser) -> EvtModel {
    let st = states(sig, alg);
    let mut init: BTreeSet<State> = st.iter().filter(|_| rng.coin()).cloned().collect();
    if init.is_empty() {
        init.insert(st[rng.pick(st.len())].clone());
    }
    let all = pairs(sig, alg);
    let rel = sig.proper_events().map(|(e, _)| (e.clone(), all.iter().filter(|_| rng.coin()).cloned().collect())).collect();
    model(alg, init, rel)
}

/// `M′ ⊨ σ(φ)  ⟺  M′|σ ⊨ φ`.
pub fn check_satisfaction(sigma: &EvtMorphism, s: &EvtSentence, m: &EvtModel) -> Result<(), String> {
    check_satisfaction_all(sigma, s, core::slice::from_ref(m)).map(|_| ())
}

/// [`check_satisfaction`] over many models, translating the sentence once. Returns the
/// number of models checked.
pub fn check_satisfaction_all(sigma: &EvtMorphism, s: &EvtSentence, models: &[EvtModel]) -> Result<usize, String> {
    let t = translate_sentence(sigma, s).map_err(|e| e.to_string())?;
    for m in models {
        let lhs = satisfies(&sigma.target, m, &t).map_err(|e| e.to_string())?;
        let red = model_reduct(sigma, m).map_err(|e| e.to_string())?;
        let rhs = satisfies(&sigma.source, &red, s).map_err(|e| e.to_string())?;
        if lhs != rhs {
            return Err(format!(
                "{s:?} along events {:?}, vars {:?}: M′ ⊨ σ(φ) is {lhs}, M′|σ ⊨ φ is {rhs} for {m:?}",
                sigma.events, sigma.vars
            ));
        }
    }
    Ok(models.len())
}

/// `A′ ⊨ σ(φ)  ⟺  A′|σ ⊨ φ` for closed first-order sentences.
pub fn check_fopeq_satisfaction(sigma: &FopeqMorphism, f: &Formula, a: &Algebra) -> Result<(), String> {
    let t = translate_formula(sigma, f).map_err(|e| e.to_string())?;
    let lhs = eval_formula(&t, a, &Default::default()).map_err(|e| e.to_string())?;
    let red = a.reduct(sigma).map_err(|e| e.to_string())?;
    let rhs = eval_formula(f, &red, &Default::default()).map_err(|e| e.to_string())?;
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("{f:?}: A′ ⊨ σ(φ) is {lhs}, A′|σ ⊨ φ is {rhs}"))
    }
}

/// The comorphism laws at one algebra and sentence: `β(M) ⊨ φ ⟺ M ⊨ α(φ)` for the model
/// `M` over `Φ(Σ)` carrying `a`, `β` recovers `a`, and `α` commutes with translation along
/// `sigma` (when given).
pub fn check_comorphism(
    sig: &FopeqSignature,
    f: &Formula,
    a: &Algebra,
    sigma: Option<&FopeqMorphism>,
) -> Result<(), String> {
    let target = comorphism_sign(sig);
    let m = comorphism_model(a);
    if comorphism_mod(&m).map_err(|e| e.to_string())? != *a {
        return Err("β does not recover the algebra".into());
    }
    let sens = comorphism_sen(&target, f).map_err(|e| e.to_string())?;
    let mut lhs = true;
    for s in &sens {
        lhs &= satisfies(&target, &m, s).map_err(|e| e.to_string())?;
    }
    let rhs = eval_formula(f, a, &Default::default()).map_err(|e| e.to_string())?;
    if lhs != rhs {
        return Err(format!("{f:?}: M ⊨ α(φ) is {lhs}, β(M) ⊨ φ is {rhs}"));
    }
    if let Some(sigma) = sigma {
        let lifted = EvtMorphism {
            source: target.clone(),
            target: comorphism_sign(&sigma.target),
            fopeq: sigma.clone(),
            events: [(INIT.to_string(), INIT.to_string())].into_iter().collect(),
            vars: BTreeMap::new(),
        };
        let via_evt: Vec<EvtSentence> =
            sens.iter().map(|s| translate_sentence(&lifted, s)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        let via_fo = translate_formula(sigma, f).map_err(|e| e.to_string())?;
        let direct = comorphism_sen(&lifted.target, &via_fo).map_err(|e| e.to_string())?;
        if via_evt != direct {
            return Err(format!("{f:?}: α does not commute with translation"));
        }
    }
    Ok(())
}

type NameMap = BTreeMap<String, String>;

fn mediate(
    legs: [(&NameMap, &NameMap); 2],
    names: &BTreeSet<String>,
) -> Result<BTreeMap<String, String>, String> {
    let mut u: BTreeMap<String, String> = BTreeMap::new();
    for (iota, tau) in legs {
        for (x, p) in iota {
            let t = &tau[x];
            if let Some(prev) = u.insert(p.clone(), t.clone()) {
                if prev != *t {
                    return Err(format!("`{p}` would have to map to both `{prev}` and `{t}`"));
                }
            }
        }
    }
    if let Some(missing) = names.iter().find(|n| !u.contains_key(*n)) {
        return Err(format!("`{missing}` is outside the image of both injections"));
    }
    Ok(u)
}

/// Universality of the computed pushout of `s1`, `s2` against the cocone `t1`, `t2`
/// (which must satisfy `t1 ∘ s1 = t2 ∘ s2`): the square commutes, a mediating morphism
/// exists, and it is unique because the injections are jointly surjective.
pub fn check_pushout(s1: &EvtMorphism, s2: &EvtMorphism, t1: &EvtMorphism, t2: &EvtMorphism) -> Result<(), String> {
    let po = evt_pushout(s1, s2).map_err(|e| e.to_string())?;
    let (l, r) = (&po.left, &po.right);
    if s1.then(l).map_err(|e| e.to_string())? != s2.then(r).map_err(|e| e.to_string())? {
        return Err("the pushout square does not commute".into());
    }
    let keys = |m: &BTreeMap<String, Status>| m.keys().cloned().collect::<BTreeSet<_>>();
    let fo = &po.sig.fopeq;
    let u_sorts = mediate([(&l.fopeq.sorts, &t1.fopeq.sorts), (&r.fopeq.sorts, &t2.fopeq.sorts)], &fo.sorts)?;
    let u_ops = mediate([(&l.fopeq.ops, &t1.fopeq.ops), (&r.fopeq.ops, &t2.fopeq.ops)], &fo.ops.keys().cloned().collect())?;
    let u_preds =
        mediate([(&l.fopeq.preds, &t1.fopeq.preds), (&r.fopeq.preds, &t2.fopeq.preds)], &fo.preds.keys().cloned().collect())?;
    let u_events = mediate([(&l.events, &t1.events), (&r.events, &t2.events)], &keys(&po.sig.events))?;
    let u_vars = mediate([(&l.vars, &t1.vars), (&r.vars, &t2.vars)], &po.sig.vars.keys().cloned().collect())?;
    let u = EvtMorphism {
        source: po.sig.clone(),
        target: t1.target.clone(),
        fopeq: FopeqMorphism { source: fo.clone(), target: t1.target.fopeq.clone(), sorts: u_sorts, ops: u_ops, preds: u_preds },
        events: u_events,
        vars: u_vars,
    };
    u.validate(StatusRule::NonDecreasing).map_err(|e| format!("mediating morphism: {e}"))?;
    if l.then(&u).map_err(|e| e.to_string())? != *t1 || r.then(&u).map_err(|e| e.to_string())? != *t2 {
        return Err("the mediating morphism does not factor the cocone".into());
    }
    Ok(())
}

/// Amalgamation along the pushout of `s1`, `s2`: `m` over the pushout signature is
/// reduced to both sides, the two reducts are amalgamated, and the result must reduce
/// back to them and contain `m`.
pub fn check_amalgamation(s1: &EvtMorphism, s2: &EvtMorphism, m: &EvtModel, ceiling: u64) -> Result<(), String> {
    let po = evt_pushout(s1, s2).map_err(|e| e.to_string())?;
    let m1 = model_reduct(&po.left, m).map_err(|e| e.to_string())?;
    let m2 = model_reduct(&po.right, m).map_err(|e| e.to_string())?;
    let am = amalgamate(s1, s2, &po, &m1, &m2, ceiling).map_err(|e| e.to_string())?;
    if model_reduct(&po.left, &am.model).map_err(|e| e.to_string())? != m1 {
        return Err("left reduct of the amalgam differs".into());
    }
    if model_reduct(&po.right, &am.model).map_err(|e| e.to_string())? != m2 {
        return Err("right reduct of the amalgam differs".into());
    }
    if !m.included_in(&am.model) {
        return Err("the amalgam is not the largest model with these reducts".into());
    }
    Ok(())
}

/// Totals of an exhaustive sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sweep {
    /// Morphisms (satisfaction) or spans (pushouts) visited.
    pub morphisms: usize,
    /// Individual law instances checked.
    pub checks: usize,
}

/// The satisfaction condition for every morphism between signatures of `family`, every
/// algebra with carriers up to `max_carrier`, the twelve schemas on every source event,
/// and every model from [`component_models`] with up to `max_pairs` pairs.
pub fn satisfaction_sweep(family: &Family, max_carrier: u32, max_pairs: usize) -> Result<Sweep, String> {
    let sigs = family.signatures();
    let mut out = Sweep::default();
    for src in &sigs {
        let schemas: Vec<(String, Vec<EvtSentence>)> =
            src.events.keys().map(|e| (e.clone(), sentence_schemas(src, e))).collect();
        for tgt in &sigs {
            let algebras = small_algebras(&tgt.fopeq, max_carrier, 1);
            for sigma in morphisms(src, tgt, StatusRule::NonDecreasing) {
                out.morphisms += 1;
                for alg in &algebras {
                    for (e, sens) in &schemas {
                        let models = component_models(tgt, alg, &sigma.events[e], max_pairs);
                        for s in sens {
                            out.checks += check_satisfaction_all(&sigma, s, &models)?;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

type Composite = [Vec<(String, String)>; 5];

/// The maps of `next ∘ first`, enough to compare cocone legs with equal ends.
fn composite(first: &EvtMorphism, next: &EvtMorphism) -> Composite {
    let c = |a: &BTreeMap<String, String>, b: &BTreeMap<String, String>| a.iter().map(|(k, v)| (k.clone(), b[v].clone())).collect();
    [
        c(&first.fopeq.sorts, &next.fopeq.sorts),
        c(&first.fopeq.ops, &next.fopeq.ops),
        c(&first.fopeq.preds, &next.fopeq.preds),
        c(&first.events, &next.events),
        c(&first.vars, &next.vars),
    ]
}

/// Pushout universality for every span `Σ1 ← Σ0 → Σ2` with `Σ0` from `apex` and `Σ1`,
/// `Σ2` from `family` (each unordered pair of legs once), against every cocone into a
/// signature of `family`.
pub fn pushout_sweep(apex: &Family, family: &Family) -> Result<Sweep, String> {
    let (s0, fs) = (apex.signatures(), family.signatures());
    let rule = StatusRule::NonDecreasing;
    let mor: Vec<Vec<Vec<EvtMorphism>>> = fs.iter().map(|x| fs.iter().map(|y| morphisms(x, y, rule)).collect()).collect();
    let legs: Vec<Vec<Vec<EvtMorphism>>> = s0.iter().map(|x| fs.iter().map(|y| morphisms(x, y, rule)).collect()).collect();
    let mut out = Sweep::default();
    for from_apex in &legs {
        for (xi, l1) in from_apex.iter().enumerate() {
            for s1 in l1 {
                for (yi, l2) in from_apex.iter().enumerate().skip(xi) {
                    for s2 in l2 {
                        out.morphisms += 1;
                        for (into_x, into_y) in mor[xi].iter().zip(&mor[yi]) {
                            let mut by: BTreeMap<Composite, Vec<&EvtMorphism>> = BTreeMap::new();
                            for t2 in into_y {
                                by.entry(composite(s2, t2)).or_default().push(t2);
                            }
                            for t1 in into_x {
                                for t2 in by.get(&composite(s1, t1)).into_iter().flatten() {
                                    out.checks += 1;
                                    check_pushout(s1, s2, t1, t2)
                                        .map_err(|e| format!("span {:?} / {:?}: {e}", s1.events, s2.events))?;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A random first-order signature: up to two sorts, constants, a unary operation and a
/// unary predicate on the first sort.
pub fn random_fopeq_signature(rng: &mut impl Chooser) -> FopeqSignature {
    let ns = 1 + rng.pick(2);
    let mut sig = FopeqSignature::new();
    for s in &SORT_NAMES[..ns] {
        sig = sig.with_sort(s);
    }
    let a = Sort::user("A");
    for c in ["c", "d"].iter().take(1 + rng.pick(2)) {
        sig = sig.with_op(c, Vec::new(), Sort::user(SORT_NAMES[rng.pick(ns)]));
    }
    sig = sig.with_op("k", Vec::new(), Sort::Int);
    if rng.coin() {
        sig = sig.with_op("f", vec![a.clone()], a.clone());
    }
    if rng.coin() {
        sig = sig.with_pred("p", vec![a]);
    }
    sig
}

fn random_term(sig: &FopeqSignature, sort: &Sort, bound: &[(String, Sort)], depth: usize, rng: &mut impl Chooser) -> Option<Term> {
    let mut options: Vec<Term> = bound.iter().filter(|(_, s)| s == sort).map(|(n, _)| Term::var(n)).collect();
    for (n, p) in &sig.ops {
        if p.result == *sort && p.args.is_empty() {
            options.push(Term::constant(n));
        }
    }
    match sort {
        Sort::Int => options.push(Term::Int(rng.pick(3) as i64 - 1)),
        Sort::Bool => options.push(Term::Bool(rng.coin())),
        Sort::User(_) => {}
    }
    if depth > 0 {
        for (n, p) in &sig.ops {
            if p.result == *sort && !p.args.is_empty() && rng.coin() {
                let args: Option<Vec<Term>> = p.args.iter().map(|s| random_term(sig, s, bound, depth - 1, rng)).collect();
                if let Some(args) = args {
                    options.push(Term::app(n, args));
                }
            }
        }
        if *sort == Sort::Int && rng.coin() {
            let a = random_term(sig, sort, bound, depth - 1, rng)?;
            let b = random_term(sig, sort, bound, depth - 1, rng)?;
            options.push(Term::add(a, b));
        }
    }
    if options.is_empty() {
        return None;
    }
    let i = rng.pick(options.len());
    Some(options.swap_remove(i))
}

/// A random closed formula of the given depth over `sig` (quantifiers bind `q0`, `q1`, ...).
pub fn random_formula(sig: &FopeqSignature, depth: usize, rng: &mut impl Chooser) -> Formula {
    random_formula_in(sig, &[], depth, rng)
}

fn random_atom(sig: &FopeqSignature, bound: &[(String, Sort)], rng: &mut impl Chooser) -> Formula {
    if let Some((name, args)) = sig.preds.iter().next() {
        if rng.coin() {
            if let Some(t) = random_term(sig, &args[0], bound, 1, rng) {
                return Formula::Pred { name: name.clone(), args: vec![t] };
            }
        }
    }
    let s = random_sort(sig, rng);
    match (random_term(sig, &s, bound, 1, rng), random_term(sig, &s, bound, 1, rng)) {
        (Some(a), Some(b)) if s == Sort::Int && rng.coin() => Formula::le(a, b),
        (Some(a), Some(b)) => Formula::eq(a, b),
        _ => Formula::True,
    }
}

fn random_sort(sig: &FopeqSignature, rng: &mut impl Chooser) -> Sort {
    let mut sorts: Vec<Sort> = sig.sorts.iter().map(|s| Sort::user(s)).collect();
    sorts.push(Sort::Int);
    sorts.push(Sort::Bool);
    let i = rng.pick(sorts.len());
    sorts.swap_remove(i)
}

fn random_formula_in(sig: &FopeqSignature, bound: &[(String, Sort)], depth: usize, rng: &mut impl Chooser) -> Formula {
    if depth == 0 {
        return random_atom(sig, bound, rng);
    }
    let sub = |rng: &mut _| random_formula_in(sig, bound, depth - 1, rng);
    match rng.pick(7) {
        0 => random_atom(sig, bound, rng),
        1 => Formula::not(sub(rng)),
        2 => Formula::And(vec![sub(rng), sub(rng)]),
        3 => Formula::Or(vec![sub(rng), sub(rng)]),
        4 => Formula::implies(sub(rng), sub(rng)),
        k => {
            let s = random_sort(sig, rng);
            let v = format!("q{}", bound.len());
            let mut inner = bound.to_vec();
            inner.push((v.clone(), s.clone()));
            let body = random_formula_in(sig, &inner, depth - 1, rng);
            if k == 5 {
                Formula::forall(vec![(v, s)], body)
            } else {
                Formula::exists(vec![(v, s)], body)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counter(seed: u64) -> impl FnMut(usize) -> usize {
        let mut s = seed;
        move |n| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as usize) % n.max(1)
        }
    }

    #[test]
    fn subsets_are_counted_by_binomials() {
        let items = [1, 2, 3, 4];
        assert_eq!(subsets_upto(&items, 2).len(), 1 + 4 + 6);
        assert_eq!(subsets_upto(&items, 4).len(), 16);
    }

    #[test]
    fn morphisms_respect_status_and_sorts() {
        let src = EvtSignature::default().with_event("a", Status::Convergent).with_var("x", Sort::Bool);
        let tgt = EvtSignature::default()
            .with_event("p", Status::Ordinary)
            .with_event("q", Status::Convergent)
            .with_var("u", Sort::Bool)
            .with_var("v", Sort::Bool);
        let ms = morphisms(&src, &tgt, StatusRule::NonDecreasing);
        assert_eq!(ms.len(), 2);
        assert!(ms.iter().all(|m| m.events["a"] == "q" && m.validate(StatusRule::NonDecreasing).is_ok()));
        assert_eq!(morphisms(&src, &tgt, StatusRule::Ignore).len(), 4);
    }

    #[test]
    fn schemas_are_well_formed() {
        let fam = Family { max_sorts: 1, max_events: 1, max_vars: 2, bool_vars: true, constant: true, exact_sorts: None };
        for sig in fam.signatures() {
            for e in sig.events.keys() {
                let ss = sentence_schemas(&sig, e);
                assert_eq!(ss.len(), 12);
                for s in ss {
                    s.validate(&sig).unwrap_or_else(|err| panic!("{sig:?} {s:?}: {err}"));
                }
            }
        }
    }

    #[test]
    fn sweeps_over_tiny_universes() {
        let tiny = Family { max_sorts: 1, max_events: 1, max_vars: 1, bool_vars: true, constant: true, exact_sorts: Some(1) };
        let s = satisfaction_sweep(&tiny, 2, 1).unwrap();
        assert!(s.morphisms > 0 && s.checks > s.morphisms);
        let apex = Family { max_sorts: 0, max_events: 1, max_vars: 0, bool_vars: false, constant: false, exact_sorts: None };
        let legs = Family { max_sorts: 1, max_events: 1, max_vars: 0, bool_vars: false, constant: false, exact_sorts: None };
        let p = pushout_sweep(&apex, &legs).unwrap();
        assert!(p.checks > 0);
    }

    #[test]
    fn random_formulas_are_closed_and_evaluate() {
        let mut rng = counter(7);
        for _ in 0..50 {
            let sig = random_fopeq_signature(&mut rng);
            let f = random_formula(&sig, 3, &mut rng);
            assert!(f.is_closed(), "{f:?}");
            for a in small_algebras(&sig, 2, 1).iter().take(3) {
                eval_formula(&f, a, &Default::default()).unwrap();
            }
        }
    }
}
