use crate::scalar::Scalar;
use crate::syntax::types::UnitType;
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub type Name = Arc<str>;

/// Display name of a binder. Ignored by equality, ordering and hashing, so
/// alpha-equivalent ASTs compare equal.
#[derive(Clone, Debug)]
pub struct Hint(pub Name);

impl Hint {
    pub fn new(name: &str) -> Self {
        Hint(name.into())
    }
}

impl PartialEq for Hint {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for Hint {}
impl PartialOrd for Hint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Hint {
    fn cmp(&self, _: &Self) -> Ordering {
        Ordering::Equal
    }
}
impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// Terms in locally nameless form: `Bound(i)` is a de Bruijn index, `Free`
/// a named variable. `Sum` is kept flat and sorted, so it behaves as a
/// multiset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Bound(usize),
    Free(Name),
    Abs(Hint, Option<UnitType>, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
    Scale(Scalar, Arc<Term>),
    Sum(Vec<Term>),
}

/// Summand order: by core (scalars stripped) first, then by the scalars, with
/// de Bruijn indices compared in reverse so `λx₁…xₙ.xᵢ` sorts by `i`.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        let (ca, sa) = strip_scales(self);
        let (cb, sb) = strip_scales(other);
        cmp_core(ca, cb).then_with(|| sa.cmp(&sb))
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn strip_scales(t: &Term) -> (&Term, Vec<&Scalar>) {
    let mut scalars = Vec::new();
    let mut cur = t;
    while let Term::Scale(s, inner) = cur {
        scalars.push(s);
        cur = inner;
    }
    (cur, scalars)
}

fn rank(t: &Term) -> u8 {
    match t {
        Term::Bound(_) => 0,
        Term::Free(_) => 1,
        Term::Abs(..) => 2,
        Term::App(..) => 3,
        Term::Scale(..) => 4,
        Term::Sum(_) => 5,
    }
}

fn cmp_core(a: &Term, b: &Term) -> Ordering {
    match (a, b) {
        (Term::Bound(x), Term::Bound(y)) => y.cmp(x),
        (Term::Free(x), Term::Free(y)) => x.cmp(y),
        (Term::Abs(_, xa, xb), Term::Abs(_, ya, yb)) => xb.cmp(yb).then_with(|| xa.cmp(ya)),
        (Term::App(xf, xa), Term::App(yf, ya)) => xf.cmp(yf).then_with(|| xa.cmp(ya)),
        (Term::Sum(x), Term::Sum(y)) => x.cmp(y),
        _ => rank(a).cmp(&rank(b)),
    }
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Free(name.into())
    }

    /// `λname.body`, binding the free occurrences of `name` in `body`.
    pub fn lam(name: &str, body: Term) -> Term {
        Term::lam_ann(name, None, body)
    }

    pub fn lam_ann(name: &str, ann: Option<UnitType>, body: Term) -> Term {
        Term::Abs(Hint::new(name), ann, Arc::new(body.close(name, 0)))
    }

    /// Nested abstraction `λx₁…xₙ.body`.
    pub fn lams(names: &[&str], body: Term) -> Term {
        names.iter().rev().fold(body, |acc, n| Term::lam(n, acc))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    /// Raw scaling; `α·(β·t)` is kept as written.
    pub fn scale(alpha: Scalar, t: Term) -> Term {
        Term::Scale(alpha, Arc::new(t))
    }

    /// Flattened, sorted sum. A single item is returned unchanged.
    ///
    /// Panics on an empty iterator: the calculus has no zero term.
    pub fn sum(items: impl IntoIterator<Item = Term>) -> Term {
        let mut flat = Vec::new();
        for t in items {
            match t {
                Term::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        assert!(!flat.is_empty(), "empty sum");
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        flat.sort();
        Term::Sum(flat)
    }

    pub fn plus(self, other: Term) -> Term {
        Term::sum([self, other])
    }

    pub fn is_basis(&self) -> bool {
        matches!(self, Term::Bound(_) | Term::Free(_) | Term::Abs(..))
    }

    pub fn is_abs(&self) -> bool {
        matches!(self, Term::Abs(..))
    }

    pub fn summands(&self) -> &[Term] {
        match self {
            Term::Sum(items) => items,
            other => std::slice::from_ref(other),
        }
    }

    pub fn has_app(&self) -> bool {
        match self {
            Term::Bound(_) | Term::Free(_) => false,
            Term::Abs(_, _, b) => b.has_app(),
            Term::App(..) => true,
            Term::Scale(_, t) => t.has_app(),
            Term::Sum(items) => items.iter().any(Term::has_app),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Bound(_) | Term::Free(_) => 1,
            Term::Abs(_, _, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Scale(_, t) => 1 + t.size(),
            Term::Sum(items) => 1 + items.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Name>) {
        match self {
            Term::Bound(_) => {}
            Term::Free(n) => {
                out.insert(n.clone());
            }
            Term::Abs(_, _, b) => b.collect_free(out),
            Term::App(f, a) => {
                f.collect_free(out);
                a.collect_free(out);
            }
            Term::Scale(_, t) => t.collect_free(out),
            Term::Sum(items) => items.iter().for_each(|t| t.collect_free(out)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty() && self.is_locally_closed()
    }

    /// No dangling de Bruijn index.
    pub fn is_locally_closed(&self) -> bool {
        fn go(t: &Term, depth: usize) -> bool {
            match t {
                Term::Bound(i) => *i < depth,
                Term::Free(_) => true,
                Term::Abs(_, _, b) => go(b, depth + 1),
                Term::App(f, a) => go(f, depth) && go(a, depth),
                Term::Scale(_, t) => go(t, depth),
                Term::Sum(items) => items.iter().all(|t| go(t, depth)),
            }
        }
        go(self, 0)
    }

    /// Rebuilds the term, replacing each variable leaf by `f(leaf, depth)`
    /// when it returns `Some`. Sums are re-sorted.
    fn map_vars(&self, depth: usize, f: &mut impl FnMut(&Term, usize) -> Option<Term>) -> Term {
        match self {
            Term::Bound(_) | Term::Free(_) => f(self, depth).unwrap_or_else(|| self.clone()),
            Term::Abs(h, ann, b) => Term::Abs(h.clone(), ann.clone(), Arc::new(b.map_vars(depth + 1, f))),
            Term::App(g, a) => Term::app(g.map_vars(depth, f), a.map_vars(depth, f)),
            Term::Scale(s, t) => Term::scale(s.clone(), t.map_vars(depth, f)),
            Term::Sum(items) => Term::sum(items.iter().map(|t| t.map_vars(depth, f)).collect::<Vec<_>>()),
        }
    }

    /// Adds `by` to every index at or above `cutoff`.
    pub fn shift(&self, by: usize, cutoff: usize) -> Term {
        if by == 0 {
            return self.clone();
        }
        self.map_vars(cutoff, &mut |leaf, depth| match leaf {
            Term::Bound(i) if *i >= depth => Some(Term::Bound(i + by)),
            _ => None,
        })
    }

    /// Replaces free occurrences of `name` with index `depth` (relative).
    pub fn close(&self, name: &str, depth: usize) -> Term {
        self.map_vars(depth, &mut |leaf, d| match leaf {
            Term::Free(n) if &**n == name => Some(Term::Bound(d)),
            _ => None,
        })
    }

    /// Given the body of an abstraction, substitutes `arg` for its bound
    /// variable.
    pub fn instantiate(&self, arg: &Term) -> Term {
        self.map_vars(0, &mut |leaf, d| match leaf {
            Term::Bound(i) if *i == d => Some(arg.shift(d, 0)),
            Term::Bound(i) if *i > d => Some(Term::Bound(i - 1)),
            _ => None,
        })
    }

    /// Capture-avoiding `t[b/x]` for a free variable `x`.
    pub fn subst(&self, x: &str, b: &Term) -> Term {
        self.map_vars(0, &mut |leaf, d| match leaf {
            Term::Free(n) if &**n == x => Some(b.shift(d, 0)),
            _ => None,
        })
    }

    /// Substitutes several free variables at once.
    pub fn subst_all(&self, defs: &dyn Fn(&str) -> Option<Term>) -> Term {
        self.map_vars(0, &mut |leaf, d| match leaf {
            Term::Free(n) => defs(n).map(|b| b.shift(d, 0)),
            _ => None,
        })
    }

    /// Child at a given position, using the path convention of the
    /// rewriter: App 0 = function, 1 = argument; Abs/Scale 0 = body; Sum i.
    pub fn child(&self, i: usize) -> Option<&Term> {
        match (self, i) {
            (Term::Abs(_, _, b), 0) => Some(b),
            (Term::App(f, _), 0) => Some(f),
            (Term::App(_, a), 1) => Some(a),
            (Term::Scale(_, t), 0) => Some(t),
            (Term::Sum(items), i) => items.get(i),
            _ => None,
        }
    }
}

/// Alpha-equivalence up to reordering of sums; structural on this
/// representation.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    a == b
}

pub fn is_basis(t: &Term) -> bool {
    t.is_basis()
}

pub fn subst_term(t: &Term, x: &str, b: &Term) -> Term {
    t.subst(x, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renaming_is_invisible() {
        assert!(alpha_eq(&Term::lam("x", Term::var("x")), &Term::lam("y", Term::var("y"))));
        let tru = Term::lams(&["x", "y"], Term::var("x"));
        let fls = Term::lams(&["x", "y"], Term::var("y"));
        assert!(!alpha_eq(&tru, &fls));
    }

    #[test]
    fn sums_are_multisets() {
        let (t, r) = (Term::var("t"), Term::var("r"));
        assert_eq!(t.clone().plus(r.clone()), r.clone().plus(t.clone()));
        let nested = Term::sum([t.clone().plus(r.clone()), t.clone()]);
        assert_eq!(nested.summands().len(), 3);
    }

    #[test]
    fn substitution_respects_binding() {
        let b = Term::var("b");
        let t = Term::lam("y", Term::var("x"));
        assert_eq!(t.subst("x", &b), Term::lam("y", b.clone()));
        let id = Term::lam("x", Term::var("x"));
        assert_eq!(id.subst("x", &b), id);
        let xx = Term::app(Term::var("x"), Term::var("x"));
        let idy = Term::lam("y", Term::var("y"));
        assert_eq!(xx.subst("x", &idy), Term::app(idy.clone(), idy));
    }

    #[test]
    fn substitution_under_binder_shifts_indices() {
        // λz.(λy.y z) with z substituted for the inner binder keeps z bound
        let inner = Term::lam("y", Term::app(Term::var("y"), Term::var("z")));
        let t = Term::lam("z", inner);
        if let Term::Abs(_, _, body) = &t {
            if let Term::Abs(_, _, inner_body) = &**body {
                let reduced = inner_body.instantiate(&Term::Bound(0));
                assert_eq!(reduced, Term::app(Term::Bound(0), Term::Bound(0)));
            }
        }
    }

    #[test]
    fn free_vars_and_basis() {
        let t = Term::app(Term::var("x"), Term::var("y"));
        let fv: Vec<String> = t.free_vars().iter().map(|n| n.to_string()).collect();
        assert_eq!(fv, ["x", "y"]);
        assert!(Term::lam("x", Term::var("x")).is_basis());
        assert!(!Term::scale(Scalar::int(2), Term::lam("x", Term::var("x"))).is_basis());
    }
}
