use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{FopeqError, FopeqSignature, Formula, Sort, Term};

/// A signature morphism. The maps are total on the source's user symbols; built-in sorts,
/// literals and arithmetic are fixed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FopeqMorphism {
    pub source: FopeqSignature,
    pub target: FopeqSignature,
    pub sorts: BTreeMap<String, String>,
    pub ops: BTreeMap<String, String>,
    pub preds: BTreeMap<String, String>,
}

impl FopeqMorphism {
    pub fn identity(sig: &FopeqSignature) -> Self {
        FopeqMorphism {
            source: sig.clone(),
            target: sig.clone(),
            sorts: sig.sorts.iter().map(|s| (s.clone(), s.clone())).collect(),
            ops: sig.ops.keys().map(|s| (s.clone(), s.clone())).collect(),
            preds: sig.preds.keys().map(|s| (s.clone(), s.clone())).collect(),
        }
    }

    /// The inclusion of `source` into `target` (identity on names), validated.
    pub fn inclusion(source: &FopeqSignature, target: &FopeqSignature) -> Result<Self, FopeqError> {
        let m = FopeqMorphism { target: target.clone(), ..Self::identity(source) };
        m.validate()?;
        Ok(m)
    }

    /// Builds a morphism from partial renamings, defaulting every unlisted symbol to itself.
    pub fn from_renaming(
        source: &FopeqSignature,
        target: &FopeqSignature,
        sorts: &BTreeMap<String, String>,
        ops: &BTreeMap<String, String>,
        preds: &BTreeMap<String, String>,
    ) -> Result<Self, FopeqError> {
        let pick = |m: &BTreeMap<String, String>, k: &String| m.get(k).cloned().unwrap_or_else(|| k.clone());
        let m = FopeqMorphism {
            source: source.clone(),
            target: target.clone(),
            sorts: source.sorts.iter().map(|s| (s.clone(), pick(sorts, s))).collect(),
            ops: source.ops.keys().map(|s| (s.clone(), pick(ops, s))).collect(),
            preds: source.preds.keys().map(|s| (s.clone(), pick(preds, s))).collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn map_sort(&self, s: &Sort) -> Result<Sort, FopeqError> {
        match s {
            Sort::User(n) => {
                self.sorts.get(n).map(|t| Sort::User(t.clone())).ok_or_else(|| FopeqError::UnknownSort(n.clone()))
            }
            other => Ok(other.clone()),
        }
    }

    pub fn validate(&self) -> Result<(), FopeqError> {
        let bad = |msg: String| Err(FopeqError::InvalidMorphism(msg));
        for s in &self.source.sorts {
            match self.sorts.get(s) {
                Some(t) if self.target.sorts.contains(t) => {}
                Some(t) => return bad(format!("sort `{s}` maps to undeclared `{t}`")),
                None => return bad(format!("sort `{s}` is not mapped")),
            }
        }
        for (o, p) in &self.source.ops {
            let Some(t) = self.ops.get(o) else { return bad(format!("operation `{o}` is not mapped")) };
            let Some(q) = self.target.ops.get(t) else { return bad(format!("operation `{o}` maps to undeclared `{t}`")) };
            let args = p.args.iter().map(|s| self.map_sort(s)).collect::<Result<Vec<_>, _>>()?;
            if args != q.args || self.map_sort(&p.result)? != q.result {
                return bad(format!("operation `{o}` ↦ `{t}` does not preserve its profile"));
            }
        }
        for (o, p) in &self.source.preds {
            let Some(t) = self.preds.get(o) else { return bad(format!("predicate `{o}` is not mapped")) };
            let Some(q) = self.target.preds.get(t) else { return bad(format!("predicate `{o}` maps to undeclared `{t}`")) };
            let args = p.iter().map(|s| self.map_sort(s)).collect::<Result<Vec<_>, _>>()?;
            if &args != q {
                return bad(format!("predicate `{o}` ↦ `{t}` does not preserve its profile"));
            }
        }
        if self.sorts.len() != self.source.sorts.len()
            || self.ops.len() != self.source.ops.len()
            || self.preds.len() != self.source.preds.len()
        {
            return bad("maps mention symbols outside the source".into());
        }
        Ok(())
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &FopeqMorphism) -> Result<FopeqMorphism, FopeqError> {
        if self.target != next.source {
            return Err(FopeqError::InvalidMorphism("morphisms are not composable".into()));
        }
        let comp = |a: &BTreeMap<String, String>, b: &BTreeMap<String, String>| -> Result<BTreeMap<String, String>, FopeqError> {
            a.iter()
                .map(|(k, v)| b.get(v).map(|w| (k.clone(), w.clone())).ok_or_else(|| FopeqError::UnknownSymbol(v.clone())))
                .collect()
        };
        Ok(FopeqMorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            sorts: comp(&self.sorts, &next.sorts)?,
            ops: comp(&self.ops, &next.ops)?,
            preds: comp(&self.preds, &next.preds)?,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.sorts.iter().all(|(k, v)| k == v)
            && self.ops.iter().all(|(k, v)| k == v)
            && self.preds.iter().all(|(k, v)| k == v)
    }
}

/// Renames operation symbols; variables keep their names.
pub fn translate_term(m: &FopeqMorphism, t: &Term) -> Result<Term, FopeqError> {
    Ok(match t {
        Term::Var { .. } | Term::Int(_) | Term::Bool(_) => t.clone(),
        Term::Op { name, args } => Term::Op {
            name: m.ops.get(name).cloned().ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?,
            args: args.iter().map(|a| translate_term(m, a)).collect::<Result<_, _>>()?,
        },
        Term::Arith(op, a, b) => Term::arith(*op, translate_term(m, a)?, translate_term(m, b)?),
    })
}

/// `Sen(σ)`: renames sorts, operations and predicates. Bound and free variables keep
/// their names; binder sorts are mapped.
pub fn translate_formula(m: &FopeqMorphism, f: &Formula) -> Result<Formula, FopeqError> {
    let tr = |g: &Formula| translate_formula(m, g);
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(a, b) => Formula::Eq(translate_term(m, a)?, translate_term(m, b)?),
        Formula::Cmp(op, a, b) => Formula::Cmp(*op, translate_term(m, a)?, translate_term(m, b)?),
        Formula::Pred { name, args } => Formula::Pred {
            name: m.preds.get(name).cloned().ok_or_else(|| FopeqError::UnknownSymbol(name.clone()))?,
            args: args.iter().map(|a| translate_term(m, a)).collect::<Result<_, _>>()?,
        },
        Formula::Not(g) => Formula::not(tr(g)?),
        Formula::And(fs) => Formula::And(fs.iter().map(tr).collect::<Result<_, _>>()?),
        Formula::Or(fs) => Formula::Or(fs.iter().map(tr).collect::<Result<_, _>>()?),
        Formula::Implies(a, b) => Formula::implies(tr(a)?, tr(b)?),
        Formula::Iff(a, b) => Formula::iff(tr(a)?, tr(b)?),
        Formula::Forall(vs, b) | Formula::Exists(vs, b) => {
            let vs = vs.iter().map(|(v, s)| Ok((v.clone(), m.map_sort(s)?))).collect::<Result<Vec<_>, FopeqError>>()?;
            let body = tr(b)?;
            if matches!(f, Formula::Forall(..)) {
                Formula::forall(vs, body)
            } else {
                Formula::exists(vs, body)
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn sig_ab() -> FopeqSignature {
        FopeqSignature::new().with_sort("S").with_op("a", alloc::vec![], Sort::user("S")).with_op("b", alloc::vec![], Sort::user("S"))
    }

    #[test]
    fn identity_translation_is_identity() {
        let f = Formula::neq(Term::constant("a"), Term::constant("b"));
        let id = FopeqMorphism::identity(&sig_ab());
        assert_eq!(translate_formula(&id, &f).unwrap(), f);
    }

    #[test]
    fn renaming_maps_symbols_and_binder_sorts() {
        let src = sig_ab();
        let tgt = FopeqSignature::new().with_sort("T").with_op("c", alloc::vec![], Sort::user("T"));
        let m = FopeqMorphism {
            source: src,
            target: tgt,
            sorts: [("S".to_string(), "T".to_string())].into_iter().collect(),
            ops: [("a".to_string(), "c".to_string()), ("b".to_string(), "c".to_string())].into_iter().collect(),
            preds: BTreeMap::new(),
        };
        m.validate().unwrap();
        let f = Formula::forall(alloc::vec![("x".into(), Sort::user("S"))], Formula::eq(Term::var("x"), Term::constant("a")));
        let g = translate_formula(&m, &f).unwrap();
        assert_eq!(g, Formula::forall(alloc::vec![("x".into(), Sort::user("T"))], Formula::eq(Term::var("x"), Term::constant("c"))));
    }

    #[test]
    fn profile_violations_are_rejected() {
        let src = FopeqSignature::new().with_op("d", alloc::vec![], Sort::Int);
        let tgt = FopeqSignature::new().with_op("d", alloc::vec![], Sort::Bool);
        assert!(FopeqMorphism::inclusion(&src, &tgt).is_err());
    }

    #[test]
    fn unmapped_symbol_is_structural_error() {
        let m = FopeqMorphism::identity(&FopeqSignature::new());
        assert!(translate_formula(&m, &Formula::eq(Term::constant("d"), Term::Int(0))).is_err());
    }
}
