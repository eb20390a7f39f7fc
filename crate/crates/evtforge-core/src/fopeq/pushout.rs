//! Pushouts of name sets and of first-order signatures.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{FopeqError, FopeqMorphism, FopeqSignature, OpProfile, Sort};

/// Pushout of `f: A → B`, `g: A → C` in the category of finite name sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamePushout {
    /// Canonical names of the equivalence classes, in creation order.
    pub names: Vec<String>,
    pub left: BTreeMap<String, String>,
    pub right: BTreeMap<String, String>,
}

/// Disjoint union of `left` and `right` modulo the least equivalence with `f(a) ~ g(a)`.
///
/// A class is named after its smallest left member, or else its smallest right member;
/// classes containing left members are named first, and a name already taken gets a
/// `#k` suffix.
pub fn name_pushout(
    shared: &BTreeSet<String>,
    f: &BTreeMap<String, String>,
    g: &BTreeMap<String, String>,
    left: &BTreeSet<String>,
    right: &BTreeSet<String>,
) -> NamePushout {
    // union-find over tagged elements: 0..nl left, nl.. right
    let lv: Vec<&String> = left.iter().collect();
    let rv: Vec<&String> = right.iter().collect();
    let nl = lv.len();
    let li: BTreeMap<&String, usize> = lv.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let ri: BTreeMap<&String, usize> = rv.iter().enumerate().map(|(i, n)| (*n, nl + i)).collect();
    let mut parent: Vec<usize> = (0..nl + rv.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for a in shared {
        if let (Some(x), Some(y)) = (f.get(a).and_then(|b| li.get(b)), g.get(a).and_then(|c| ri.get(c))) {
            let (rx, ry) = (find(&mut parent, *x), find(&mut parent, *y));
            if rx != ry {
                parent[rx.max(ry)] = rx.min(ry);
            }
        }
    }
    let mut classes: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for i in 0..parent.len() {
        let r = find(&mut parent, i);
        let e = classes.entry(r).or_default();
        if i < nl {
            e.0.push(i);
        } else {
            e.1.push(i - nl);
        }
    }
    let mut order: Vec<(bool, String, Vec<usize>, Vec<usize>)> = classes
        .into_values()
        .map(|(ls, rs)| {
            let base = match ls.first() {
                Some(i) => lv[*i].clone(),
                None => rv[rs[0]].clone(),
            };
            (ls.is_empty(), base, ls, rs)
        })
        .collect();
    order.sort();
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut out = NamePushout { names: Vec::new(), left: BTreeMap::new(), right: BTreeMap::new() };
    for (_, base, ls, rs) in order {
        let mut name = base.clone();
        let mut k = 1;
        while used.contains(&name) {
            name = format!("{base}#{k}");
            k += 1;
        }
        used.insert(name.clone());
        for i in ls {
            out.left.insert(lv[i].clone(), name.clone());
        }
        for i in rs {
            out.right.insert(rv[i].clone(), name.clone());
        }
        out.names.push(name);
    }
    out
}

/// A pushout square completion `Σ1 → Σ′ ← Σ2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FopeqPushout {
    pub sig: FopeqSignature,
    pub left: FopeqMorphism,
    pub right: FopeqMorphism,
}

fn keys_of<V>(m: &BTreeMap<String, V>) -> BTreeSet<String> {
    m.keys().cloned().collect()
}

/// Pushout of two first-order morphisms with a common source.
pub fn fopeq_pushout(m1: &FopeqMorphism, m2: &FopeqMorphism) -> Result<FopeqPushout, FopeqError> {
    if m1.source != m2.source {
        return Err(FopeqError::InvalidMorphism("pushout of morphisms with different sources".into()));
    }
    m1.validate()?;
    m2.validate()?;
    let (s1, s2) = (&m1.target, &m2.target);
    let sorts = name_pushout(&m1.source.sorts, &m1.sorts, &m2.sorts, &s1.sorts, &s2.sorts);
    let ops = name_pushout(&keys_of(&m1.source.ops), &m1.ops, &m2.ops, &keys_of(&s1.ops), &keys_of(&s2.ops));
    let preds = name_pushout(&keys_of(&m1.source.preds), &m1.preds, &m2.preds, &keys_of(&s1.preds), &keys_of(&s2.preds));

    let map_l = |s: &Sort| match s {
        Sort::User(n) => Sort::User(sorts.left[n].clone()),
        o => o.clone(),
    };
    let map_r = |s: &Sort| match s {
        Sort::User(n) => Sort::User(sorts.right[n].clone()),
        o => o.clone(),
    };
    let mut sig = FopeqSignature::new();
    sig.sorts = sorts.names.iter().cloned().collect();
    for (o, p) in &s1.ops {
        sig.ops.insert(ops.left[o].clone(), OpProfile { args: p.args.iter().map(map_l).collect(), result: map_l(&p.result) });
    }
    for (o, p) in &s2.ops {
        sig.ops
            .entry(ops.right[o].clone())
            .or_insert_with(|| OpProfile { args: p.args.iter().map(map_r).collect(), result: map_r(&p.result) });
    }
    for (o, p) in &s1.preds {
        sig.preds.insert(preds.left[o].clone(), p.iter().map(map_l).collect());
    }
    for (o, p) in &s2.preds {
        sig.preds.entry(preds.right[o].clone()).or_insert_with(|| p.iter().map(map_r).collect());
    }
    let left = FopeqMorphism { source: s1.clone(), target: sig.clone(), sorts: sorts.left, ops: ops.left, preds: preds.left };
    let right =
        FopeqMorphism { source: s2.clone(), target: sig.clone(), sorts: sorts.right, ops: ops.right, preds: preds.right };
    left.validate()?;
    right.validate()?;
    Ok(FopeqPushout { sig, left, right })
}
