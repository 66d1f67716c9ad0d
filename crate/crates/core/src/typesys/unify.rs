//! First-order, sort-respecting unification over flexible type variables.
//!
//! Flexible variables are free variables whose name starts with `?`. Every
//! other free variable is rigid.

use crate::scalar::Scalar;
use crate::syntax::{leaf, Hint, Name, Sort, TyArg, TyVar, Type, UnitType};
use crate::typesys::canon::{canonicalize, norm_unit, CanonicalType, Class};
use std::cell::Cell;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Supply of fresh names, shared by everything within one judgment.
#[derive(Debug, Default)]
pub struct Fresh {
    next: Cell<usize>,
}

impl Fresh {
    pub fn new() -> Self {
        Fresh::default()
    }

    fn tick(&self) -> usize {
        let n = self.next.get();
        self.next.set(n + 1);
        n
    }

    pub fn flex(&self) -> Name {
        format!("?{}", self.tick()).into()
    }

    /// A rigid (or term) name that cannot clash with user names.
    pub fn rigid(&self, hint: &str) -> Name {
        let base = hint.trim_start_matches('?').split('#').next().filter(|s| !s.is_empty()).unwrap_or("X");
        format!("{base}#{}", self.tick()).into()
    }
}

pub fn is_flex(name: &str) -> bool {
    name.starts_with('?')
}

pub type Subst = BTreeMap<Name, TyArg>;

fn zonk_arg(a: &TyArg, s: &Subst) -> TyArg {
    match a {
        TyArg::Unit(u) => TyArg::Unit(zonk_unit(u, s)),
        TyArg::General(t) => TyArg::General(zonk_type(t, s)),
    }
}

pub fn zonk_unit(u: &UnitType, s: &Subst) -> UnitType {
    if s.is_empty() {
        return u.clone();
    }
    u.subst_with(&|_, n| s.get(n).map(|a| zonk_arg(a, s)))
}

pub fn zonk_type(t: &Type, s: &Subst) -> Type {
    if s.is_empty() {
        return t.clone();
    }
    t.subst_with(&|_, n| s.get(n).map(|a| zonk_arg(a, s)))
}

pub fn zonk_canon(c: &CanonicalType, s: &Subst) -> CanonicalType {
    if s.is_empty() || c.is_empty() {
        return c.clone();
    }
    canonicalize(&zonk_type(&c.to_type(), s))
}

/// Flexible variables of a type, in order of first occurrence.
pub fn flex_vars(t: &Type) -> Vec<(Sort, Name)> {
    let mut out = t.free_vars_ordered();
    out.retain(|(_, n)| is_flex(n));
    out
}

fn bind(name: &Name, arg: TyArg, s: &mut Subst) -> bool {
    let occurs = match &arg {
        TyArg::Unit(u) => u.free_vars().iter().any(|(_, n)| n == name),
        TyArg::General(t) => t.free_vars().iter().any(|(_, n)| n == name),
    };
    if occurs {
        return false;
    }
    s.insert(name.clone(), arg);
    true
}

fn flex_unit(u: &UnitType) -> Option<&Name> {
    match u {
        UnitType::Var(TyVar::Free(n)) if is_flex(n) => Some(n),
        _ => None,
    }
}

pub fn unify_unit(a: &UnitType, b: &UnitType, s: &mut Subst, fresh: &Fresh) -> bool {
    let a = norm_unit(&zonk_unit(a, s));
    let b = norm_unit(&zonk_unit(b, s));
    if a == b {
        return true;
    }
    if let Some(n) = flex_unit(&a) {
        return bind(n, TyArg::Unit(b), s);
    }
    if let Some(n) = flex_unit(&b) {
        return bind(n, TyArg::Unit(a), s);
    }
    match (&a, &b) {
        (UnitType::Arrow(d1, c1), UnitType::Arrow(d2, c2)) => {
            unify_unit(d1, d2, s, fresh) && unify_canon(&canonicalize(c1), &canonicalize(c2), s, fresh)
        }
        (UnitType::Forall(s1, h, b1), UnitType::Forall(s2, _, b2)) if s1 == s2 => {
            let r = fresh.rigid(&h.0);
            let v = leaf(*s1, TyVar::Free(r.clone()));
            if !unify_unit(&b1.instantiate(&v), &b2.instantiate(&v), s, fresh) {
                return false;
            }
            // The opened variable must not escape through a binding.
            !s.values().any(|arg| arg.as_type().free_vars().iter().any(|(_, n)| *n == r))
        }
        _ => false,
    }
}

fn single_flex_gen(c: &CanonicalType) -> Option<(Scalar, Name)> {
    if c.len() != 1 {
        return None;
    }
    match c.entries().next() {
        Some((Class::Gen(TyVar::Free(n)), k)) if is_flex(n) && !k.is_zero() => Some((k.clone(), n.clone())),
        _ => None,
    }
}

pub fn unify_class(a: &Class, b: &Class, s: &mut Subst, fresh: &Fresh) -> bool {
    match (a, b) {
        (Class::Unit(x), Class::Unit(y)) => unify_unit(x, y, s, fresh),
        _ => {
            let x = canonicalize(&zonk_type(&a.to_type(), s));
            let y = canonicalize(&zonk_type(&b.to_type(), s));
            if x == y {
                return true;
            }
            let flex_of = |c: &CanonicalType| match c.classes().next() {
                Some(Class::Gen(TyVar::Free(n))) if is_flex(n) && c.len() == 1 => Some(n.clone()),
                _ => None,
            };
            if let Some(n) = flex_of(&x) {
                return bind(&n, TyArg::General(y.to_type()), s);
            }
            if let Some(n) = flex_of(&y) {
                return bind(&n, TyArg::General(x.to_type()), s);
            }
            let pair = match (x.classes().next(), y.classes().next()) {
                (Some(Class::Unit(u)), Some(Class::Unit(v))) if x.len() == 1 && y.len() == 1 => Some((u.clone(), v.clone())),
                _ => None,
            };
            match pair {
                Some((u, v)) => unify_unit(&u, &v, s, fresh),
                None => false,
            }
        }
    }
}

/// Unifies two canonical types: a lone `c·?𝕏` absorbs the other side,
/// otherwise entries are paired with equal coefficients.
pub fn unify_canon(a: &CanonicalType, b: &CanonicalType, s: &mut Subst, fresh: &Fresh) -> bool {
    let a = zonk_canon(a, s);
    let b = zonk_canon(b, s);
    if a == b {
        return true;
    }
    if let Some((k, n)) = single_flex_gen(&a) {
        return bind(&n, TyArg::General(b.scaled(&(&Scalar::one() / &k)).to_type()), s);
    }
    if let Some((k, n)) = single_flex_gen(&b) {
        return bind(&n, TyArg::General(a.scaled(&(&Scalar::one() / &k)).to_type()), s);
    }
    if a.len() != b.len() {
        return false;
    }
    let ae: Vec<_> = a.entries().collect();
    let be: Vec<_> = b.entries().collect();
    let mut used = vec![false; be.len()];
    pair_entries(0, &ae, &be, &mut used, s, fresh)
}

fn pair_entries(
    i: usize,
    ae: &[(&Class, &Scalar)],
    be: &[(&Class, &Scalar)],
    used: &mut [bool],
    s: &mut Subst,
    fresh: &Fresh,
) -> bool {
    if i == ae.len() {
        return true;
    }
    for j in 0..be.len() {
        if used[j] || ae[i].1 != be[j].1 {
            continue;
        }
        let mut trial = s.clone();
        if unify_class(ae[i].0, be[j].0, &mut trial, fresh) {
            used[j] = true;
            if pair_entries(i + 1, ae, be, used, &mut trial, fresh) {
                *s = trial;
                return true;
            }
            used[j] = false;
        }
    }
    false
}

/// A binder opened to a named variable.
pub type Opened = (Sort, Hint, Name);

/// Opens the leading quantifiers of `u`, naming each variable with `name`.
pub fn open_prefix(u: &UnitType, mut name: impl FnMut(&Hint) -> Name) -> (Vec<Opened>, UnitType) {
    let mut binders = Vec::new();
    let mut cur = u.clone();
    while let UnitType::Forall(sort, h, body) = &cur {
        let n = name(h);
        let next = body.instantiate(&leaf(*sort, TyVar::Free(n.clone())));
        binders.push((*sort, h.clone(), n));
        cur = next;
    }
    (binders, cur)
}

/// Re-quantifies `body` over the given names, outermost first.
pub fn close_over(binders: &[Opened], body: UnitType) -> UnitType {
    binders
        .iter()
        .rev()
        .fold(body, |acc, (sort, h, n)| UnitType::Forall(*sort, h.clone(), Arc::new(acc.close(*sort, n, 0))))
}

/// `u` with each quantifier moved below the arrows whose domains do not
/// mention it, e.g. `∀X Y. X→Y→Y` becomes `∀X. X→∀Y. Y→Y`.
pub fn nest_unit(u: &UnitType, fresh: &Fresh) -> UnitType {
    let (binders, body) = open_prefix(u, |h| fresh.rigid(&h.0));
    let UnitType::Arrow(dom, cod) = &body else { return u.clone() };
    let dvars = Type::Unit((**dom).clone()).free_vars();
    let (keep, moved): (Vec<Opened>, Vec<Opened>) =
        binders.into_iter().partition(|(s, _, n)| dvars.contains(&(*s, n.clone())));
    let mut parts = Vec::new();
    for (class, kappa) in canonicalize(cod).entries() {
        let piece = match class {
            Class::Unit(c) => {
                let order = c.free_vars_ordered();
                let local: Vec<Opened> =
                    order.iter().filter_map(|v| moved.iter().find(|(s, _, n)| (*s, n.clone()) == *v).cloned()).collect();
                Type::Unit(nest_unit(&close_over(&local, c.clone()), fresh))
            }
            Class::Gen(_) => {
                let fv = class.to_type().free_vars();
                if moved.iter().any(|(s, _, n)| fv.contains(&(*s, n.clone()))) {
                    return u.clone();
                }
                class.to_type()
            }
        };
        parts.push(Type::scale(kappa.clone(), piece));
    }
    close_over(&keep, UnitType::Arrow(dom.clone(), Arc::new(canonicalize(&Type::sum(parts)).to_type())))
}

/// How a unit type `w` reaches `g`: eliminate `w`'s prefix at `elim`, then
/// reintroduce `g`'s prefix over the rigid names in `intro`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub elim: Vec<TyArg>,
    pub intro: Vec<Opened>,
}

/// A default for a flexible variable nothing constrained.
pub fn default_arg(sort: Sort, fresh: &Fresh) -> TyArg {
    leaf(sort, TyVar::Free(fresh.rigid("T")))
}

pub fn match_instance(w: &UnitType, g: &UnitType, fresh: &Fresh) -> Option<Instance> {
    let (intro, gbody) = open_prefix(g, |h| fresh.rigid(&h.0));
    let (flex, wbody) = open_prefix(w, |_| fresh.flex());
    let mut s = Subst::new();
    if !unify_unit(&wbody, &gbody, &mut s, fresh) {
        return None;
    }
    for (sort, _, n) in &flex {
        if !s.contains_key(n) {
            s.insert(n.clone(), default_arg(*sort, fresh));
        }
    }
    let elim: Vec<TyArg> = flex.iter().map(|(_, _, n)| zonk_arg(&s[n], &s)).collect();
    if norm_unit(&zonk_unit(&wbody, &s)) != norm_unit(&gbody) {
        return None;
    }
    Some(Instance { elim, intro })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_unit_type;

    fn u(src: &str) -> UnitType {
        parse_unit_type(src).unwrap()
    }

    #[test]
    fn flex_binds_with_occurs_check() {
        let fresh = Fresh::new();
        let mut s = Subst::new();
        let x = UnitType::var("?a");
        assert!(unify_unit(&x, &u("A -> B"), &mut s, &fresh));
        assert_eq!(zonk_unit(&x, &s), u("A -> B"));
        let mut s = Subst::new();
        assert!(!unify_unit(&x, &UnitType::arrow(x.clone(), Type::unit_var("A")), &mut s, &fresh));
    }

    #[test]
    fn quantified_types_unify_up_to_renaming() {
        let fresh = Fresh::new();
        let mut s = Subst::new();
        assert!(unify_unit(&u("forall X. X -> X"), &u("forall Y. Y -> Y"), &mut s, &fresh));
        assert!(!unify_unit(&u("forall X. X -> X"), &u("forall %X. A -> A"), &mut s, &fresh));
    }

    #[test]
    fn general_flex_absorbs_sums() {
        let fresh = Fresh::new();
        let mut s = Subst::new();
        let lhs = canonicalize(&Type::scale(Scalar::int(2), Type::gvar("?g")));
        let rhs = canonicalize(&crate::syntax::parse_type("A + 3 * B").unwrap());
        assert!(unify_canon(&lhs, &rhs, &mut s, &fresh));
        let got = canonicalize(&zonk_type(&Type::gvar("?g"), &s));
        assert_eq!(got, rhs.scaled(&Scalar::frac(1, 2)));
    }

    #[test]
    fn instances() {
        let fresh = Fresh::new();
        let inst = match_instance(&u("forall X Y. X -> Y -> X"), &u("A -> B -> A"), &fresh).unwrap();
        assert_eq!(inst.elim, vec![TyArg::Unit(u("A")), TyArg::Unit(u("B"))]);
        assert!(inst.intro.is_empty());
        let inst = match_instance(&u("forall X. X -> X"), &u("forall Y. Y -> Y"), &fresh).unwrap();
        assert_eq!(inst.intro.len(), 1);
        assert!(match_instance(&u("A -> A"), &u("forall Y. Y -> Y"), &fresh).is_none());
        assert!(match_instance(&u("forall X Y. X -> Y -> X"), &u("forall X Y. X -> Y -> Y"), &fresh).is_none());
    }
}
