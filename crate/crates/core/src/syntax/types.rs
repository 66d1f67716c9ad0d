use crate::scalar::Scalar;
use crate::syntax::term::{Hint, Name};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::sync::Arc;
use thiserror::Error;

/// Sort of a type variable: unit variables range over unit types, general
/// variables over arbitrary types.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Sort {
    Unit,
    General,
}

/// Type variable occurrence. Bound indices count binders of both sorts.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum TyVar {
    Bound(usize),
    Free(Name),
}

impl Ord for TyVar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (TyVar::Bound(a), TyVar::Bound(b)) => b.cmp(a),
            (TyVar::Bound(_), TyVar::Free(_)) => Ordering::Less,
            (TyVar::Free(_), TyVar::Bound(_)) => Ordering::Greater,
            (TyVar::Free(a), TyVar::Free(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for TyVar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TyVar {
    pub fn free(name: &str) -> TyVar {
        TyVar::Free(name.into())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitType {
    Var(TyVar),
    Arrow(Arc<UnitType>, Arc<Type>),
    Forall(Sort, Hint, Arc<UnitType>),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Unit(UnitType),
    GVar(TyVar),
    Scale(Scalar, Arc<Type>),
    /// Flat and sorted, at least two items.
    Sum(Vec<Type>),
}

/// Argument for instantiating a binder of either sort.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TyArg {
    Unit(UnitType),
    General(Type),
}

impl TyArg {
    pub fn sort(&self) -> Sort {
        match self {
            TyArg::Unit(_) => Sort::Unit,
            TyArg::General(_) => Sort::General,
        }
    }

    pub(crate) fn shift(&self, by: usize) -> TyArg {
        match self {
            TyArg::Unit(u) => TyArg::Unit(u.shift(by, 0)),
            TyArg::General(t) => TyArg::General(t.shift(by, 0)),
        }
    }

    pub fn as_type(&self) -> Type {
        match self {
            TyArg::Unit(u) => Type::Unit(u.clone()),
            TyArg::General(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("sort error: {0}")]
pub struct SortError(pub String);

impl UnitType {
    pub fn var(name: &str) -> UnitType {
        UnitType::Var(TyVar::free(name))
    }

    pub fn arrow(dom: UnitType, cod: impl Into<Type>) -> UnitType {
        UnitType::Arrow(Arc::new(dom), Arc::new(cod.into()))
    }

    /// `∀name.body`, binding free occurrences of `name` with the given sort.
    pub fn forall(sort: Sort, name: &str, body: UnitType) -> UnitType {
        UnitType::Forall(sort, Hint::new(name), Arc::new(body.close(sort, name, 0)))
    }

    pub fn foralls(names: &[&str], body: UnitType) -> UnitType {
        names.iter().rev().fold(body, |acc, n| UnitType::forall(Sort::Unit, n, acc))
    }

    /// Strips leading quantifiers, returning their sorts and the body with
    /// dangling indices.
    pub fn quantifiers(&self) -> (Vec<(Sort, Hint)>, &UnitType) {
        let mut binders = Vec::new();
        let mut cur = self;
        while let UnitType::Forall(s, h, body) = cur {
            binders.push((*s, h.clone()));
            cur = body;
        }
        (binders, cur)
    }

    fn map_vars(&self, depth: usize, f: &mut dyn FnMut(Sort, &TyVar, usize) -> Option<TyArg>) -> UnitType {
        match self {
            UnitType::Var(v) => match f(Sort::Unit, v, depth) {
                Some(TyArg::Unit(u)) => u,
                Some(TyArg::General(t)) => panic!("general type {t:?} substituted at unit position"),
                None => self.clone(),
            },
            UnitType::Arrow(d, c) => UnitType::Arrow(Arc::new(d.map_vars(depth, f)), Arc::new(c.map_vars(depth, f))),
            UnitType::Forall(s, h, b) => UnitType::Forall(*s, h.clone(), Arc::new(b.map_vars(depth + 1, f))),
        }
    }

    pub fn shift(&self, by: usize, cutoff: usize) -> UnitType {
        if by == 0 {
            return self.clone();
        }
        self.map_vars(cutoff, &mut |sort, v, d| shift_leaf(sort, v, d, by))
    }

    pub fn close(&self, sort: Sort, name: &str, depth: usize) -> UnitType {
        self.map_vars(depth, &mut |s, v, d| close_leaf(s, v, d, sort, name))
    }

    /// Given the body of a quantifier, substitutes `arg` for its variable.
    pub fn instantiate(&self, arg: &TyArg) -> UnitType {
        self.map_vars(0, &mut |s, v, d| inst_leaf(s, v, d, arg))
    }

    /// Substitutes a free variable of the given sort.
    pub fn subst_free(&self, sort: Sort, name: &str, arg: &TyArg) -> UnitType {
        self.map_vars(0, &mut |s, v, d| subst_leaf(s, v, d, sort, name, arg))
    }

    /// Replaces the free variables for which `f` returns a replacement.
    pub fn subst_with(&self, f: &dyn Fn(Sort, &Name) -> Option<TyArg>) -> UnitType {
        self.map_vars(0, &mut |s, v, d| match v {
            TyVar::Free(n) => f(s, n).map(|a| a.shift(d)),
            TyVar::Bound(_) => None,
        })
    }

    pub fn free_vars(&self) -> BTreeSet<(Sort, Name)> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    pub(crate) fn collect_free(&self, out: &mut BTreeSet<(Sort, Name)>) {
        match self {
            UnitType::Var(TyVar::Free(n)) => {
                out.insert((Sort::Unit, n.clone()));
            }
            UnitType::Var(TyVar::Bound(_)) => {}
            UnitType::Arrow(d, c) => {
                d.collect_free(out);
                c.collect_free(out);
            }
            UnitType::Forall(_, _, b) => b.collect_free(out),
        }
    }

    /// Free variables in order of first occurrence (left to right).
    pub fn free_vars_ordered(&self) -> Vec<(Sort, Name)> {
        let mut out = Vec::new();
        Type::Unit(self.clone()).collect_ordered(&mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            UnitType::Var(_) => 1,
            UnitType::Arrow(d, c) => 1 + d.size() + c.size(),
            UnitType::Forall(_, _, b) => 1 + b.size(),
        }
    }
}

fn shift_leaf(sort: Sort, v: &TyVar, depth: usize, by: usize) -> Option<TyArg> {
    match v {
        TyVar::Bound(i) if *i >= depth => Some(leaf(sort, TyVar::Bound(i + by))),
        _ => None,
    }
}

/// A variable occurrence of the given sort.
pub fn leaf(sort: Sort, v: TyVar) -> TyArg {
    match sort {
        Sort::Unit => TyArg::Unit(UnitType::Var(v)),
        Sort::General => TyArg::General(Type::GVar(v)),
    }
}

fn close_leaf(s: Sort, v: &TyVar, depth: usize, sort: Sort, name: &str) -> Option<TyArg> {
    match v {
        TyVar::Free(n) if s == sort && &**n == name => Some(leaf(s, TyVar::Bound(depth))),
        _ => None,
    }
}

fn inst_leaf(sort: Sort, v: &TyVar, depth: usize, arg: &TyArg) -> Option<TyArg> {
    match v {
        TyVar::Bound(i) if *i == depth => Some(arg.shift(depth)),
        TyVar::Bound(i) if *i > depth => Some(leaf(sort, TyVar::Bound(i - 1))),
        _ => None,
    }
}

fn subst_leaf(s: Sort, v: &TyVar, depth: usize, sort: Sort, name: &str, arg: &TyArg) -> Option<TyArg> {
    match v {
        TyVar::Free(n) if s == sort && &**n == name => Some(arg.shift(depth)),
        _ => None,
    }
}

/// Same convention as for terms: core first, then scalars.
impl Ord for Type {
    fn cmp(&self, other: &Self) -> Ordering {
        fn strip(t: &Type) -> (&Type, Vec<&Scalar>) {
            let mut scalars = Vec::new();
            let mut cur = t;
            while let Type::Scale(s, inner) = cur {
                scalars.push(s);
                cur = inner;
            }
            (cur, scalars)
        }
        fn rank(t: &Type) -> u8 {
            match t {
                Type::Unit(_) => 0,
                Type::GVar(_) => 1,
                Type::Scale(..) => 2,
                Type::Sum(_) => 3,
            }
        }
        let (ca, sa) = strip(self);
        let (cb, sb) = strip(other);
        let core = match (ca, cb) {
            (Type::Unit(x), Type::Unit(y)) => x.cmp(y),
            (Type::GVar(x), Type::GVar(y)) => x.cmp(y),
            (Type::Sum(x), Type::Sum(y)) => x.cmp(y),
            _ => rank(ca).cmp(&rank(cb)),
        };
        core.then_with(|| sa.cmp(&sb))
    }
}

impl PartialOrd for Type {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<UnitType> for Type {
    fn from(u: UnitType) -> Type {
        Type::Unit(u)
    }
}

impl Type {
    pub fn unit_var(name: &str) -> Type {
        Type::Unit(UnitType::var(name))
    }

    pub fn gvar(name: &str) -> Type {
        Type::GVar(TyVar::free(name))
    }

    pub fn scale(alpha: Scalar, t: Type) -> Type {
        Type::Scale(alpha, Arc::new(t))
    }

    /// Flattened, sorted sum; a single item is returned unchanged.
    pub fn sum(items: impl IntoIterator<Item = Type>) -> Type {
        let mut flat = Vec::new();
        for t in items {
            match t {
                Type::Sum(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        assert!(!flat.is_empty(), "empty type sum");
        if flat.len() == 1 {
            return flat.pop().unwrap();
        }
        flat.sort();
        Type::Sum(flat)
    }

    pub fn plus(self, other: Type) -> Type {
        Type::sum([self, other])
    }

    pub fn as_unit(&self) -> Option<&UnitType> {
        match self {
            Type::Unit(u) => Some(u),
            _ => None,
        }
    }

    fn map_vars(&self, depth: usize, f: &mut dyn FnMut(Sort, &TyVar, usize) -> Option<TyArg>) -> Type {
        match self {
            Type::Unit(u) => Type::Unit(u.map_vars(depth, f)),
            Type::GVar(v) => match f(Sort::General, v, depth) {
                Some(a) => a.as_type(),
                None => self.clone(),
            },
            Type::Scale(s, t) => Type::scale(s.clone(), t.map_vars(depth, f)),
            Type::Sum(items) => Type::sum(items.iter().map(|t| t.map_vars(depth, f)).collect::<Vec<_>>()),
        }
    }

    pub fn shift(&self, by: usize, cutoff: usize) -> Type {
        if by == 0 {
            return self.clone();
        }
        self.map_vars(cutoff, &mut |sort, v, d| shift_leaf(sort, v, d, by))
    }

    pub fn close(&self, sort: Sort, name: &str, depth: usize) -> Type {
        self.map_vars(depth, &mut |s, v, d| close_leaf(s, v, d, sort, name))
    }

    pub fn instantiate(&self, arg: &TyArg) -> Type {
        self.map_vars(0, &mut |s, v, d| inst_leaf(s, v, d, arg))
    }

    /// `T[A/X]` for a free variable; the argument's sort must match.
    pub fn subst(&self, sort: Sort, name: &str, arg: &TyArg) -> Result<Type, SortError> {
        if arg.sort() != sort {
            return Err(SortError(format!(
                "variable `{name}` has {sort:?} sort but the replacement is {:?}",
                arg.sort()
            )));
        }
        Ok(self.map_vars(0, &mut |s, v, d| subst_leaf(s, v, d, sort, name, arg)))
    }

    pub fn subst_with(&self, f: &dyn Fn(Sort, &Name) -> Option<TyArg>) -> Type {
        self.map_vars(0, &mut |s, v, d| match v {
            TyVar::Free(n) => f(s, n).map(|a| a.shift(d)),
            TyVar::Bound(_) => None,
        })
    }

    pub fn free_vars(&self) -> BTreeSet<(Sort, Name)> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    pub(crate) fn collect_free(&self, out: &mut BTreeSet<(Sort, Name)>) {
        match self {
            Type::Unit(u) => u.collect_free(out),
            Type::GVar(TyVar::Free(n)) => {
                out.insert((Sort::General, n.clone()));
            }
            Type::GVar(TyVar::Bound(_)) => {}
            Type::Scale(_, t) => t.collect_free(out),
            Type::Sum(items) => items.iter().for_each(|t| t.collect_free(out)),
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars_ordered(&self) -> Vec<(Sort, Name)> {
        let mut out = Vec::new();
        self.collect_ordered(&mut out);
        out
    }

    fn collect_ordered(&self, out: &mut Vec<(Sort, Name)>) {
        let mut push = |s: Sort, n: &Name| {
            if !out.iter().any(|(s2, n2)| *s2 == s && n2 == n) {
                out.push((s, n.clone()));
            }
        };
        match self {
            Type::Unit(UnitType::Var(TyVar::Free(n))) => push(Sort::Unit, n),
            Type::GVar(TyVar::Free(n)) => push(Sort::General, n),
            Type::Unit(UnitType::Var(TyVar::Bound(_))) | Type::GVar(TyVar::Bound(_)) => {}
            Type::Unit(UnitType::Arrow(d, c)) => {
                Type::Unit((**d).clone()).collect_ordered(out);
                c.collect_ordered(out);
            }
            Type::Unit(UnitType::Forall(_, _, b)) => Type::Unit((**b).clone()).collect_ordered(out),
            Type::Scale(_, t) => t.collect_ordered(out),
            Type::Sum(items) => items.iter().for_each(|t| t.collect_ordered(out)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Unit(u) => u.size(),
            Type::GVar(_) => 1,
            Type::Scale(_, t) => 1 + t.size(),
            Type::Sum(items) => 1 + items.iter().map(Type::size).sum::<usize>(),
        }
    }
}

pub fn subst_type(t: &Type, sort: Sort, name: &str, arg: &TyArg) -> Result<Type, SortError> {
    t.subst(sort, name, arg)
}
